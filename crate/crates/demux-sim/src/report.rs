//! Run reports: per-channel rates, coincidence tables, estimator outputs and
//! run metadata, serialized as JSON. Histograms export as two-column CSV.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::analytics::{
    analytic_coincidence_rate_with_sigma, build_histogram, build_sync_histogram, hbt_g2,
    switching_metrics, CorrelationHistogram, HistogramMeta, Measured, RateModelSigma,
    SwitchingMetrics,
};
use crate::clock::TimeTag;
use crate::config::ScenarioConfig;
use crate::detector::coincidence_count;
use crate::sim::SimOutput;

#[derive(Debug, Clone, Serialize)]
pub struct ChannelRate {
    pub channel: u8,
    pub count: u64,
    pub rate_hz: Measured,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoincidenceEntry {
    pub channels: Vec<u8>,
    pub window_ps: i64,
    pub count: u64,
    pub rate_hz: Measured,
    /// Closed-form rate for this coincidence order at the configured
    /// parameters.
    pub analytic_rate_hz: Measured,
    /// Same, scaled to the on-time fraction the blinking trace actually
    /// realized in this run.
    pub analytic_rate_realized_hz: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub schema_version: u32,
    pub seed: u64,
    pub n_pulses: u64,
    pub duration_s: f64,
    pub wall_time_s: f64,
    pub realized_on_fraction: f64,
    pub singles: Vec<ChannelRate>,
    pub coincidences: Vec<CoincidenceEntry>,
    pub switching: Option<SwitchingMetrics>,
    pub g2_zero: Option<Measured>,
    pub config: ScenarioConfig,
}

/// All channel subsets of size 2..=m, ordered by size then lexicographically.
fn coincidence_subsets(m: usize) -> Vec<Vec<u8>> {
    let mut subsets = Vec::new();
    for size in 2..=m {
        for mask in 0u32..(1 << m) {
            if mask.count_ones() as usize == size {
                subsets.push(
                    (0..m as u8)
                        .filter(|c| mask & (1 << c) != 0)
                        .collect::<Vec<u8>>(),
                );
            }
        }
    }
    subsets
}

/// Histograms the report derives alongside the metrics, for CSV export.
#[derive(Debug, Clone, Default)]
pub struct ReportHistograms {
    pub sync_per_channel: Vec<CorrelationHistogram>,
    pub g2: Option<CorrelationHistogram>,
}

pub fn build_report(
    config: &ScenarioConfig,
    output: &SimOutput,
    wall_time_s: f64,
) -> (ScenarioReport, ReportHistograms) {
    let clock = output.clock;
    let duration_ps = clock.duration_ps().max(1);
    let duration_s = duration_ps as f64 / 1e12;
    let m = config.network.channel_count();
    let analysis = &config.analysis;

    let singles = output
        .tags
        .iter()
        .enumerate()
        .map(|(ch, tags)| ChannelRate {
            channel: ch as u8,
            count: tags.len() as u64,
            rate_hz: Measured {
                value: tags.len() as f64 / duration_s,
                sigma: (tags.len() as f64).sqrt() / duration_s,
            },
        })
        .collect();

    let model = config.rate_model();
    let blink_scale = if model.eta_blinking > 0.0 {
        output.realized_on_fraction / model.eta_blinking
    } else {
        0.0
    };
    let coincidences = coincidence_subsets(m)
        .into_iter()
        .map(|subset| {
            let streams: Vec<&[TimeTag]> = subset
                .iter()
                .map(|&c| output.tags[c as usize].as_slice())
                .collect();
            let rep = coincidence_count(&streams, analysis.coincidence_window_ps, duration_ps);
            let analytic = analytic_coincidence_rate_with_sigma(
                subset.len() as u32,
                &model,
                &RateModelSigma::default(),
            )
            .unwrap_or(Measured {
                value: f64::NAN,
                sigma: f64::NAN,
            });
            CoincidenceEntry {
                channels: subset,
                window_ps: analysis.coincidence_window_ps,
                count: rep.count,
                rate_hz: Measured {
                    value: rep.rate_hz,
                    sigma: rep.rate_sigma_hz,
                },
                analytic_rate_hz: analytic,
                analytic_rate_realized_hz: analytic.value * blink_scale,
            }
        })
        .collect();

    let mut histograms = ReportHistograms::default();
    let switching = if analysis.switching && m > 1 {
        let sync_period = clock.pulse_period_ps * analysis.sync_divider as i64;
        let n_syncs = clock.n_pulses / analysis.sync_divider as u64;
        for (ch, tags) in output.tags.iter().enumerate() {
            let stops: Vec<i64> = tags.iter().map(|t| t.time_ps).collect();
            histograms.sync_per_channel.push(build_sync_histogram(
                &stops,
                sync_period,
                n_syncs,
                analysis.histogram_bin_width_ps,
                analysis.histogram_range_ps,
                HistogramMeta::Sync {
                    stop_channel: ch as u8,
                    sync_divider: analysis.sync_divider,
                },
            ));
        }
        switching_metrics(
            &histograms.sync_per_channel,
            clock.pulse_period_ps * m as i64,
            clock.pulse_period_ps,
        )
        .ok()
    } else {
        None
    };

    let g2_zero = analysis.g2_channels.and_then(|(a, b)| {
        let starts: Vec<i64> = output.tags.get(a as usize)?.iter().map(|t| t.time_ps).collect();
        let stops: Vec<i64> = output.tags.get(b as usize)?.iter().map(|t| t.time_ps).collect();
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
        let g = hbt_g2(&hist, clock.pulse_period_ps, clock.pulse_period_ps).ok();
        histograms.g2 = Some(hist);
        g
    });

    let report = ScenarioReport {
        schema_version: config.schema_version,
        seed: config.rng_seed,
        n_pulses: clock.n_pulses,
        duration_s,
        wall_time_s,
        realized_on_fraction: output.realized_on_fraction,
        singles,
        coincidences,
        switching,
        g2_zero,
        config: config.clone(),
    };
    (report, histograms)
}

impl ScenarioReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Two-column CSV export, `bin_start_ps,count`.
pub fn write_histogram_csv<W: Write>(
    mut w: W,
    hist: &CorrelationHistogram,
) -> std::io::Result<()> {
    writeln!(w, "bin_start_ps,count")?;
    for (i, count) in hist.counts.iter().enumerate() {
        let start = hist.origin_ps + i as i64 * hist.bin_width_ps;
        writeln!(w, "{start},{count}")?;
    }
    Ok(())
}

pub fn write_histogram_csv_file(
    path: &Path,
    hist: &CorrelationHistogram,
) -> std::io::Result<()> {
    let file = std::fs::File::create(path)?;
    write_histogram_csv(std::io::BufWriter::new(file), hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario;

    #[test]
    fn subsets_cover_all_orders() {
        let subs = coincidence_subsets(4);
        assert_eq!(subs.len(), 6 + 4 + 1);
        assert_eq!(subs[0], vec![0, 1]);
        assert_eq!(subs.last().unwrap(), &vec![0, 1, 2, 3]);
    }

    #[test]
    fn report_builds_and_serializes() {
        let mut config = scenario::four_channel_reference(100_000, 3);
        config.analysis.g2_channels = Some((0, 1));
        let out = crate::sim::run_scenario(&config).unwrap();
        let (report, hists) = build_report(&config, &out, 0.0);
        assert_eq!(report.singles.len(), 4);
        assert_eq!(report.coincidences.len(), 11);
        assert!(report.switching.is_some());
        assert_eq!(hists.sync_per_channel.len(), 4);
        let json = report.to_json();
        assert!(json.contains("realized_on_fraction"));
        // every reported rate carries an uncertainty
        for s in &report.singles {
            assert!(s.rate_hz.sigma >= 0.0);
        }
        for c in &report.coincidences {
            assert!(c.rate_hz.sigma >= 0.0);
            assert!(c.analytic_rate_hz.sigma >= 0.0);
        }
    }

    #[test]
    fn histogram_csv_format() {
        let hist = CorrelationHistogram {
            bin_width_ps: 50,
            origin_ps: -100,
            counts: vec![1, 2, 3, 4],
            meta: HistogramMeta::StartStop {
                start_channel: 0,
                stop_channel: 1,
            },
        };
        let mut buf = Vec::new();
        write_histogram_csv(&mut buf, &hist).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "bin_start_ps,count\n-100,1\n-50,2\n0,3\n50,4\n");
    }
}
