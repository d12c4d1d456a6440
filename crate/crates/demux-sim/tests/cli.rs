//! End-to-end command-line tests: exit codes, determinism of the tag files,
//! the analyze path on a hand-written fixture, and predict/library identity.

use std::path::Path;
use std::process::Command;

use demux_sim::analytics::analytic_coincidence_rate_with_sigma;
use demux_sim::scenario;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_demux-sim"))
}

fn write_micro_config(dir: &Path) -> std::path::PathBuf {
    let config = scenario::four_channel_reference(10_000, 12_345);
    let path = dir.join("micro.toml");
    std::fs::write(&path, config.to_toml()).unwrap();
    path
}

#[test]
fn simulate_is_deterministic_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_micro_config(dir.path());
    for (out, threads) in [("a", "1"), ("b", "4"), ("c", "2")] {
        let status = bin()
            .args(["simulate", "--config"])
            .arg(&config)
            .args(["--out"])
            .arg(dir.path().join(out))
            .args(["--threads", threads])
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read(dir.path().join("a/tags.bin")).unwrap();
    let b = std::fs::read(dir.path().join("b/tags.bin")).unwrap();
    let c = std::fs::read(dir.path().join("c/tags.bin")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b, "tag files must be byte-identical across runs");
    assert_eq!(a, c, "tag files must not depend on the thread count");

    // report schema carries the expected keys
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a/report.json")).unwrap())
            .unwrap();
    for key in [
        "schema_version",
        "seed",
        "n_pulses",
        "realized_on_fraction",
        "singles",
        "coincidences",
        "switching",
        "config",
    ] {
        assert!(report.get(key).is_some(), "report missing {key}");
    }
    // every reported rate carries an uncertainty
    for s in report["singles"].as_array().unwrap() {
        assert!(s["rate_hz"]["sigma"].is_number());
    }
}

#[test]
fn tag_formats_agree() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_micro_config(dir.path());
    for format in ["binary", "csv", "json"] {
        assert!(bin()
            .args(["simulate", "--config"])
            .arg(&config)
            .args(["--out"])
            .arg(dir.path().join(format))
            .args(["--format", format])
            .status()
            .unwrap()
            .success());
    }
    let from_bin = demux_sim::tags::read_file(&dir.path().join("binary/tags.bin")).unwrap();
    let from_csv = demux_sim::tags::read_file(&dir.path().join("csv/tags.csv")).unwrap();
    let from_json: Vec<demux_sim::TimeTag> = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("json/tags.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(from_bin, from_csv);
    assert_eq!(from_bin, from_json);
}

#[test]
fn zero_pulse_run_writes_empty_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_micro_config(dir.path());
    let status = bin()
        .args(["simulate", "--config"])
        .arg(&config)
        .args(["--pulses", "0", "--out"])
        .arg(dir.path().join("out"))
        .status()
        .unwrap();
    assert!(status.success());
    let tags = std::fs::read(dir.path().join("out/tags.bin")).unwrap();
    assert!(tags.is_empty());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/report.json")).unwrap())
            .unwrap();
    for s in report["singles"].as_array().unwrap() {
        assert_eq!(s["count"], 0);
    }
}

#[test]
fn invalid_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = scenario::four_channel_reference(1_000, 1);
    config.detectors[0].efficiency = 1.3;
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, config.to_toml()).unwrap();
    let output = bin()
        .args(["simulate", "--config"])
        .arg(&path)
        .args(["--out"])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("out of range"), "stderr: {stderr}");
}

#[test]
fn unreadable_config_exits_3() {
    let output = bin()
        .args(["simulate", "--config", "/nonexistent/config.toml"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_micro_config(dir.path());
    // a regular file blocks the output-directory path
    let blocker = dir.path().join("blocked");
    std::fs::write(&blocker, b"file").unwrap();
    let output = bin()
        .args(["simulate", "--config"])
        .arg(&config)
        .args(["--out"])
        .arg(blocker.join("sub"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn env_override_changes_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_micro_config(dir.path());
    let run = |envs: &[(&str, &str)], out: &str| {
        let mut cmd = bin();
        cmd.args(["simulate", "--config"])
            .arg(&config)
            .args(["--out"])
            .arg(dir.path().join(out));
        for (k, v) in envs {
            cmd.env(k, v);
        }
        cmd.status().unwrap()
    };
    assert!(run(&[], "plain").success());
    assert!(run(&[("DEMUX_RNG_SEED", "999")], "reseeded").success());
    let plain = std::fs::read(dir.path().join("plain/tags.bin")).unwrap();
    let reseeded = std::fs::read(dir.path().join("reseeded/tags.bin")).unwrap();
    assert_ne!(plain, reseeded);

    // an invalid override is a config error
    let output = bin()
        .args(["simulate", "--config"])
        .arg(&config)
        .args(["--out"])
        .arg(dir.path().join("invalid"))
        .env("DEMUX_SOURCE__ETA_POP", "1.5")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn analyze_handwritten_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = scenario::four_channel_reference(1_000, 1);
    config.analysis.switching = false;
    let config_path = dir.path().join("config.toml");
    std::fs::write(&config_path, config.to_toml()).unwrap();
    // four tags: two on channel 0, one each on 1 and 2
    let tags_path = dir.path().join("tiny.csv");
    std::fs::write(
        &tags_path,
        "channel,time_ps\n0,1000\n1,2000\n0,54000\n2,60000\n",
    )
    .unwrap();
    let output = bin()
        .args(["analyze", "--tags"])
        .arg(&tags_path)
        .args(["--config"])
        .arg(&config_path)
        .args(["--out"])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert!(output.status.success());
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("out/analysis.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["tag_count"], 4);
    let singles = report["singles"].as_array().unwrap();
    assert_eq!(singles[0]["count"], 2);
    assert_eq!(singles[1]["count"], 1);
    assert_eq!(singles[2]["count"], 1);
    assert_eq!(singles[3]["count"], 0);
}

#[test]
fn analyze_reports_corruption_offset() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_micro_config(dir.path());
    let tags_path = dir.path().join("corrupt.bin");
    std::fs::write(&tags_path, [0u8, 1, 2, 3, 4]).unwrap(); // truncated record
    let output = bin()
        .args(["analyze", "--tags"])
        .arg(&tags_path)
        .args(["--config"])
        .arg(&config)
        .args(["--out"])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("byte offset 0"), "stderr: {stderr}");
}

#[test]
fn analyze_recovers_simulated_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = scenario::switching_benchmark(1_000_000, 8);
    config.analysis.g2_channels = Some((0, 1));
    let config_path = dir.path().join("config.toml");
    std::fs::write(&config_path, config.to_toml()).unwrap();
    assert!(bin()
        .args(["simulate", "--config"])
        .arg(&config_path)
        .args(["--out"])
        .arg(dir.path().join("sim"))
        .status()
        .unwrap()
        .success());
    let output = bin()
        .args(["analyze", "--tags"])
        .arg(dir.path().join("sim/tags.bin"))
        .args(["--config"])
        .arg(&config_path)
        .args(["--out"])
        .arg(dir.path().join("ana"))
        .output()
        .unwrap();
    assert!(output.status.success());
    let analysis: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("ana/analysis.json")).unwrap(),
    )
    .unwrap();
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("sim/report.json")).unwrap(),
    )
    .unwrap();
    // the analyze path reproduces the simulate-side switching metrics
    let a = analysis["switching"]["mean_eta_sw"].as_f64().unwrap();
    let b = report["switching"]["mean_eta_sw"].as_f64().unwrap();
    assert!((a - b).abs() < 1e-9, "analyze {a} vs simulate {b}");
    // and the correlation estimate
    let a = analysis["g2_zero"]["value"].as_f64().unwrap();
    let b = report["g2_zero"]["value"].as_f64().unwrap();
    assert!((a - b).abs() < 1e-9, "analyze g2 {a} vs simulate {b}");
}

#[test]
fn predict_equals_library_rates_exactly() {
    let output = bin().args(["predict", "--json"]).output().unwrap();
    assert!(output.status.success());
    let table: serde_json::Value =
        serde_json::from_slice(&output.stdout).unwrap();
    let model = scenario::published_rate_model();
    let sigma = scenario::published_rate_sigma();
    for row in table["rates"].as_array().unwrap() {
        let n = row["n"].as_u64().unwrap() as u32;
        let expected = analytic_coincidence_rate_with_sigma(n, &model, &sigma).unwrap();
        assert_eq!(row["rate_hz"].as_f64().unwrap(), expected.value);
        assert_eq!(row["sigma_hz"].as_f64().unwrap(), expected.sigma);
    }
}

#[test]
fn predict_what_if_and_errors() {
    // bright-source projection lands in the published band
    let output = bin()
        .args([
            "predict",
            "--json",
            "--eta-qd",
            "0.261",
            "--eta-blinking",
            "1.0",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let table: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    let r4 = table["rates"].as_array().unwrap()[3]["rate_hz"].as_f64().unwrap();
    assert!((5_000.0..=9_000.0).contains(&r4), "R(4) = {r4}");

    // asking for more folds than channels is a config error
    let output = bin()
        .args(["predict", "--max-n", "5"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn bundled_scenarios_match_presets() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let cases = [
        (
            "four_channel_reference.toml",
            scenario::four_channel_reference(100_000_000, 7600),
        ),
        ("hbt_calibration.toml", scenario::hbt_calibration(10_000_000, 2022)),
        (
            "switching_benchmark.toml",
            scenario::switching_benchmark(10_000_000, 314),
        ),
        ("hom_interference.toml", scenario::hom_interference(4_000_000, 99)),
        (
            "micro_fixed_seed.toml",
            scenario::four_channel_reference(10_000, 12345),
        ),
    ];
    for (name, preset) in cases {
        let text = std::fs::read_to_string(dir.join(name))
            .unwrap_or_else(|e| panic!("bundled scenario {name} missing: {e}"));
        assert_eq!(text, preset.to_toml(), "{name} drifted from its preset");
        demux_sim::ScenarioConfig::load_with_overrides(&text, &[])
            .unwrap_or_else(|e| panic!("{name} fails to load: {e}"));
    }
}
