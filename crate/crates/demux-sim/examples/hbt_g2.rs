//! Intensity-correlation measurement: split the photon stream 50/50 between
//! two counters (modulators off, quarter-wave bias only) and estimate the
//! second-order correlation at zero delay from the histogram.

use demux_sim::report::build_report;
use demux_sim::scenario;
use demux_sim::sim::run_scenario;

fn main() {
    let n_pulses = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(10_000_000);
    let config = scenario::hbt_calibration(n_pulses, 20_22);
    println!(
        "source residual two-photon probability {:.5} -> intrinsic g2(0) {:.5}",
        config.source.multiphoton_prob,
        config.source.g2_zero()
    );
    let output = run_scenario(&config).expect("scenario runs");
    let (report, histograms) = build_report(&config, &output, 0.0);
    let g2 = report.g2_zero.expect("g2 configured");
    println!(
        "estimated g2(0) over {} pulses: {:.5} +- {:.5}",
        n_pulses, g2.value, g2.sigma
    );
    if let Some(hist) = &histograms.g2 {
        let (lo, hi) = hist.range_ps();
        println!(
            "histogram spans [{lo}, {hi}) ps with {} bins, {} correlation counts",
            hist.counts.len(),
            hist.total_counts()
        );
    }
}
