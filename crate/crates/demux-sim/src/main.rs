//! Batch front end: `simulate` runs a scenario and writes tags, histograms
//! and a report; `analyze` recomputes estimators from an existing tag file;
//! `predict` evaluates the closed-form rate table.
//!
//! Exit codes: 0 success, 2 configuration error, 3 I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use demux_sim::analytics::{
    analytic_coincidence_rate_with_sigma, build_histogram, hbt_g2, switching_metrics,
    HistogramMeta, RateModel, RateModelSigma,
};
use demux_sim::config::ScenarioConfig;
use demux_sim::report::{build_report, write_histogram_csv_file};
use demux_sim::scenario;
use demux_sim::sim::run_scenario_with_threads;
use demux_sim::tags::{read_file, split_channels, write_file, TagFormat};

#[derive(Parser)]
#[command(name = "demux-sim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write time tags, histograms and a report.
    Simulate(SimulateArgs),
    /// Recompute estimators from a time-tag file.
    Analyze(AnalyzeArgs),
    /// Evaluate the analytic n-fold coincidence-rate table.
    Predict(PredictArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario config file (TOML); keys can be overridden via DEMUX_* env vars.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the config's RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's pulse count.
    #[arg(long)]
    pulses: Option<u64>,
    /// Cap the worker-thread count (results do not depend on it).
    #[arg(long)]
    threads: Option<usize>,
    /// Tag-file format.
    #[arg(long, value_enum, default_value_t = FormatArg::Binary)]
    format: FormatArg,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Time-tag file (.csv is parsed as CSV, anything else as binary).
    #[arg(long)]
    tags: PathBuf,
    /// Scenario config supplying the clock and analysis settings.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for the metric report and histograms.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long, default_value_t = scenario::REFERENCE_RR_HZ)]
    rr_hz: f64,
    /// Output channel count m.
    #[arg(long, default_value_t = 4)]
    channels: u32,
    #[arg(long, default_value_t = 0.36)]
    eta_blinking: f64,
    #[arg(long, default_value_t = 0.0090)]
    eta_qd: f64,
    #[arg(long, default_value_t = 0.84)]
    eta_routing: f64,
    #[arg(long, default_value_t = 0.68)]
    eta_det: f64,
    #[arg(long, default_value_t = 0.946)]
    eta_sw: f64,
    /// Highest coincidence order to tabulate (defaults to m).
    #[arg(long)]
    max_n: Option<u32>,
    /// Print the table as JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Binary,
    Csv,
    Json,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Predict(args) => cmd_predict(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

fn config_error(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_CONFIG,
        message: message.into(),
    }
}

fn io_error(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_IO,
        message: message.into(),
    }
}

fn load_config(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| io_error(format!("cannot read {}: {e}", path.display())))?;
    ScenarioConfig::load(&text).map_err(|e| config_error(e.to_string()))
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let mut config = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.rng_seed = seed;
    }
    if let Some(pulses) = args.pulses {
        config.clock.n_pulses = pulses;
    }
    config
        .validate()
        .map_err(|e| config_error(format!("config invalid: {e:?}")))?;

    std::fs::create_dir_all(&args.out)
        .map_err(|e| io_error(format!("cannot create {}: {e}", args.out.display())))?;

    let started = Instant::now();
    let output = run_scenario_with_threads(&config, args.threads)
        .map_err(|e| config_error(e.to_string()))?;
    let wall = started.elapsed().as_secs_f64();

    let merged = output.merged_tags();
    let tag_path = match args.format {
        FormatArg::Binary => {
            let p = args.out.join("tags.bin");
            write_file(&p, &merged, TagFormat::Binary)
                .map_err(|e| io_error(e.to_string()))?;
            p
        }
        FormatArg::Csv => {
            let p = args.out.join("tags.csv");
            write_file(&p, &merged, TagFormat::Csv).map_err(|e| io_error(e.to_string()))?;
            p
        }
        FormatArg::Json => {
            let p = args.out.join("tags.json");
            let file = std::fs::File::create(&p).map_err(|e| io_error(e.to_string()))?;
            serde_json::to_writer(std::io::BufWriter::new(file), &merged)
                .map_err(|e| io_error(e.to_string()))?;
            p
        }
    };

    let (report, histograms) = build_report(&config, &output, wall);
    for (ch, hist) in histograms.sync_per_channel.iter().enumerate() {
        write_histogram_csv_file(&args.out.join(format!("sync_hist_ch{ch}.csv")), hist)
            .map_err(|e| io_error(e.to_string()))?;
    }
    if let Some(hist) = &histograms.g2 {
        write_histogram_csv_file(&args.out.join("g2_hist.csv"), hist)
            .map_err(|e| io_error(e.to_string()))?;
    }
    let report_path = args.out.join("report.json");
    std::fs::write(&report_path, report.to_json()).map_err(|e| io_error(e.to_string()))?;

    println!(
        "simulated {} pulses in {:.2} s -> {} tags ({}), report {}",
        config.clock.n_pulses,
        wall,
        merged.len(),
        tag_path.display(),
        report_path.display()
    );
    for s in &report.singles {
        println!(
            "  ch{} singles: {:.3e} Hz (+- {:.1e})",
            s.channel, s.rate_hz.value, s.rate_hz.sigma
        );
    }
    if let Some(sw) = &report.switching {
        println!(
            "  switching efficiency: {:.4} +- {:.4}",
            sw.mean_eta_sw, sw.std_eta_sw
        );
    }
    if let Some(g2) = &report.g2_zero {
        println!("  g2(0): {:.4} +- {:.4}", g2.value, g2.sigma);
    }
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    let config = load_config(&args.config)?;
    let tags = read_file(&args.tags).map_err(|e| io_error(e.to_string()))?;
    std::fs::create_dir_all(&args.out)
        .map_err(|e| io_error(format!("cannot create {}: {e}", args.out.display())))?;

    let clock = config.clock.pulse_clock();
    let duration_ps = clock.duration_ps().max(tags.last().map(|t| t.time_ps + 1).unwrap_or(1));
    let duration_s = duration_ps as f64 / 1e12;
    let m = config.network.channel_count();
    let streams = split_channels(&tags, m);
    let analysis = &config.analysis;

    let mut report = serde_json::Map::new();
    report.insert("tag_count".into(), tags.len().into());
    report.insert("duration_s".into(), duration_s.into());
    let singles: Vec<serde_json::Value> = streams
        .iter()
        .enumerate()
        .map(|(ch, s)| {
            serde_json::json!({
                "channel": ch,
                "count": s.len(),
                "rate_hz": { "value": s.len() as f64 / duration_s,
                             "sigma": (s.len() as f64).sqrt() / duration_s },
            })
        })
        .collect();
    report.insert("singles".into(), singles.into());

    if let Some((a, b)) = analysis.g2_channels {
        let starts: Vec<i64> = streams[a as usize].iter().map(|t| t.time_ps).collect();
        let stops: Vec<i64> = streams[b as usize].iter().map(|t| t.time_ps).collect();
        let hist = build_histogram(
            &starts,
            &stops,
            analysis.histogram_bin_width_ps,
            analysis.histogram_range_ps,
            1,
            HistogramMeta::StartStop {
                start_channel: a,
                stop_channel: b,
            },
        );
        write_histogram_csv_file(&args.out.join("g2_hist.csv"), &hist)
            .map_err(|e| io_error(e.to_string()))?;
        if let Ok(g2) = hbt_g2(&hist, clock.pulse_period_ps, clock.pulse_period_ps) {
            report.insert(
                "g2_zero".into(),
                serde_json::json!({ "value": g2.value, "sigma": g2.sigma }),
            );
        }
    }

    if analysis.switching && m > 1 {
        let sync_period = clock.pulse_period_ps * analysis.sync_divider as i64;
        let n_syncs = (duration_ps / sync_period).max(1) as u64;
        let hists: Vec<_> = streams
            .iter()
            .enumerate()
            .map(|(ch, s)| {
                let stops: Vec<i64> = s.iter().map(|t| t.time_ps).collect();
                demux_sim::analytics::build_sync_histogram(
                    &stops,
                    sync_period,
                    n_syncs,
                    analysis.histogram_bin_width_ps,
                    analysis.histogram_range_ps,
                    HistogramMeta::Sync {
                        stop_channel: ch as u8,
                        sync_divider: analysis.sync_divider,
                    },
                )
            })
            .collect();
        for (ch, hist) in hists.iter().enumerate() {
            write_histogram_csv_file(&args.out.join(format!("sync_hist_ch{ch}.csv")), hist)
                .map_err(|e| io_error(e.to_string()))?;
        }
        if let Ok(sw) = switching_metrics(&hists, clock.pulse_period_ps * m as i64, clock.pulse_period_ps)
        {
            report.insert(
                "switching".into(),
                serde_json::to_value(&sw).expect("serializable"),
            );
        }
    }

    let report_path = args.out.join("analysis.json");
    let text = serde_json::to_string_pretty(&serde_json::Value::Object(report))
        .expect("report serializes");
    std::fs::write(&report_path, &text).map_err(|e| io_error(e.to_string()))?;
    println!("{text}");
    println!("written to {}", report_path.display());
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<(), CliError> {
    let model = RateModel {
        rr_hz: args.rr_hz,
        m: args.channels,
        eta_blinking: args.eta_blinking,
        eta_qd: args.eta_qd,
        eta_routing: args.eta_routing,
        eta_det: args.eta_det,
        eta_sw: args.eta_sw,
    };
    for (name, value) in [
        ("eta-blinking", model.eta_blinking),
        ("eta-qd", model.eta_qd),
        ("eta-routing", model.eta_routing),
        ("eta-det", model.eta_det),
        ("eta-sw", model.eta_sw),
    ] {
        if !(0.0..=1.0).contains(&value) {
            return Err(config_error(format!("--{name} {value} out of range [0, 1]")));
        }
    }
    if model.eta_qd > model.eta_blinking {
        return Err(config_error(format!(
            "--eta-qd {} exceeds --eta-blinking {} (blinking is part of eta_qd)",
            model.eta_qd, model.eta_blinking
        )));
    }
    if model.rr_hz <= 0.0 || model.m == 0 {
        return Err(config_error("repetition rate and channel count must be positive"));
    }
    let max_n = args.max_n.unwrap_or(args.channels);
    if max_n > args.channels {
        return Err(config_error(format!(
            "cannot predict {max_n}-fold rates with {} channels",
            args.channels
        )));
    }
    let sigma = if (model.rr_hz, model.m) == (scenario::REFERENCE_RR_HZ, 4) {
        scenario::published_rate_sigma()
    } else {
        RateModelSigma::default()
    };
    let mut rows = Vec::new();
    for n in 1..=max_n {
        let rate = analytic_coincidence_rate_with_sigma(n, &model, &sigma)
            .map_err(|e| config_error(e.to_string()))?;
        rows.push((n, rate));
    }
    if args.json {
        let value = serde_json::json!({
            "model": model,
            "rates": rows
                .iter()
                .map(|(n, r)| serde_json::json!({ "n": n, "rate_hz": r.value, "sigma_hz": r.sigma }))
                .collect::<Vec<_>>(),
        });
        println!("{}", serde_json::to_string_pretty(&value).expect("serializes"));
    } else {
        println!(
            "detected n-fold coincidence rates (RR = {:.4e} Hz, m = {}):",
            model.rr_hz, model.m
        );
        for (n, rate) in &rows {
            println!("  R({n}) = {:>12.4e} Hz  (+- {:.1e})", rate.value, rate.sigma);
        }
    }
    Ok(())
}
