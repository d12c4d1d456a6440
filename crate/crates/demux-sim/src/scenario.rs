//! Bundled scenario presets.
//!
//! `four_channel_reference` encodes the characterized four-channel setup:
//! 76.2 MHz excitation, 90.9% population at pi pulse, 0.36 on-time fraction
//! with millisecond blinking, a 0.90% fiber-coupled source efficiency, the
//! measured per-channel transmissions, stage extinctions tuned to a 0.946
//! mean switching efficiency, and 68% detectors. The other presets boost
//! efficiencies to give the estimator benches high statistics in short runs.

use crate::analytics::{RateModel, RateModelSigma};
use crate::clock::PulseClock;
use crate::config::{AnalysisSpec, ClockSpec, ScenarioConfig};
use crate::detector::{DetectorParams, HomBenchSpec};
use crate::network::{build_demux_tree, StageDefaults};
use crate::source::SourceParams;

/// Repetition rate of the reference excitation laser.
pub const REFERENCE_RR_HZ: f64 = 76.2e6;

/// Residual two-photon probability tuned so the intrinsic source g2(0)
/// `2 p q / (p + q)^2` evaluates to 0.016 at p = 0.909.
pub const CALIBRATED_MULTIPHOTON_PROB: f64 = 0.00739;

/// Per-photon path transmissions of the four output channels. The measured
/// time-integrated power fractions are these values divided by m = 4; their
/// mean is the combined routing efficiency of 0.837.
pub const REFERENCE_TRANSMISSIONS: [f64; 4] = [0.900, 0.796, 0.856, 0.796];

/// Shortest compensation fiber, common to all channels.
pub const REFERENCE_DELAY_BASE_PS: i64 = 9_790;

fn reference_source() -> SourceParams {
    SourceParams {
        eta_pop: 0.909,
        pulse_area_rad: std::f64::consts::PI,
        rabi_damping: 0.03036,
        eta_blinking: 0.36,
        blink_on_dwell_ps: 0.5625e9,
        blink_off_dwell_ps: 1.0e9,
        multiphoton_prob: CALIBRATED_MULTIPHOTON_PROB,
        lifetime_ps: 167.0,
        eta_extr: 0.12,
        eta_optics: 0.382,
        eta_fibercoup: 0.60,
        eta_qd: 0.0090,
    }
}

/// The full characterized four-channel scenario.
pub fn four_channel_reference(n_pulses: u64, seed: u64) -> ScenarioConfig {
    let clock = PulseClock::new(REFERENCE_RR_HZ, n_pulses);
    let mut network = build_demux_tree(
        2,
        &clock,
        &StageDefaults {
            amplitude_rel: 1.0,
            extinction_ratio_switch: 25.5,
            extinction_ratio_pass: 28.2,
        },
        REFERENCE_DELAY_BASE_PS,
    );
    for stage in &mut network.stages[1..] {
        stage.extinction_ratio_switch = 50.0;
        stage.extinction_ratio_pass = 55.3;
    }
    network.channel_transmissions = REFERENCE_TRANSMISSIONS.to_vec();
    ScenarioConfig {
        schema_version: crate::config::SCHEMA_VERSION,
        rng_seed: seed,
        clock: ClockSpec {
            repetition_rate_hz: REFERENCE_RR_HZ,
            n_pulses,
        },
        source: reference_source(),
        network,
        detectors: vec![
            DetectorParams {
                efficiency: 0.68,
                dead_time_ps: 50_000,
                jitter_sigma_ps: 350.0,
            };
            4
        ],
        analysis: AnalysisSpec::default(),
    }
}

/// Intensity-correlation bench: modulators off, the quarter-wave bias alone
/// splits the stream 50/50 between two outputs. Losses are removed so the
/// correlation statistics accumulate quickly; g2 is loss-independent.
pub fn hbt_calibration(n_pulses: u64, seed: u64) -> ScenarioConfig {
    let clock = PulseClock::new(REFERENCE_RR_HZ, n_pulses);
    let mut network = build_demux_tree(1, &clock, &StageDefaults::default(), 0);
    network.stages[0].drive.amplitude_rel = 0.0;
    network.channel_delays_ps = vec![0, 0];
    let mut source = reference_source();
    source.eta_qd =
        source.eta_blinking * (source.eta_pop + source.multiphoton_prob);
    ScenarioConfig {
        schema_version: crate::config::SCHEMA_VERSION,
        rng_seed: seed,
        clock: ClockSpec {
            repetition_rate_hz: REFERENCE_RR_HZ,
            n_pulses,
        },
        source,
        network,
        detectors: vec![
            DetectorParams {
                efficiency: 1.0,
                dead_time_ps: 0,
                jitter_sigma_ps: 350.0,
            };
            2
        ],
        analysis: AnalysisSpec {
            g2_channels: Some((0, 1)),
            switching: false,
            ..AnalysisSpec::default()
        },
    }
}

/// Four-channel scenario with lossless transmission and unit dead-time-free
/// detectors, for high-statistics switching-efficiency extraction. At this
/// boosted flux a channel clicks nearly every cycle, so a realistic dead
/// time would swallow the side peaks that arrive 1-3 pulse periods after
/// each main click; the reference scenario keeps its dead time because its
/// click rates are three orders of magnitude below that regime.
pub fn switching_benchmark(n_pulses: u64, seed: u64) -> ScenarioConfig {
    let mut config = four_channel_reference(n_pulses, seed);
    config.network.channel_transmissions = vec![1.0; 4];
    config.source.eta_qd =
        config.source.eta_blinking * (config.source.eta_pop + config.source.multiphoton_prob);
    for d in &mut config.detectors {
        d.efficiency = 1.0;
        d.dead_time_ps = 0;
    }
    config
}

/// Two-photon interference scenario (the bench picks the channel pair).
/// Moderate arm transmission keeps higher-order terms small while photon
/// pairs still accumulate quickly.
pub fn hom_interference(n_pulses: u64, seed: u64) -> ScenarioConfig {
    let mut config = four_channel_reference(n_pulses, seed);
    config.network.channel_transmissions = vec![0.3; 4];
    config.source.eta_qd =
        config.source.eta_blinking * (config.source.eta_pop + config.source.multiphoton_prob);
    for d in &mut config.detectors {
        d.efficiency = 1.0;
        d.dead_time_ps = 0;
    }
    config.analysis.switching = false;
    config.analysis.histogram_range_ps = 200_000;
    config
}

/// Bench description for one interference run.
pub fn hom_bench(config: &ScenarioConfig, other_channel: u8, overlap: f64) -> HomBenchSpec {
    let clock = config.clock.pulse_clock();
    HomBenchSpec {
        input_a: 0,
        input_b: other_channel,
        reflectivity: 0.514,
        mutual_indistinguishability: overlap,
        relative_delay_ps: 0,
        pairing_window_ps: clock.pulse_period_ps / 2,
    }
}

/// Per-slot photon-number distribution at one bench input: probabilities of
/// 0, 1 or 2 photons arriving in the channel's time slot.
fn slot_distribution(p: f64, q: f64, survival: f64) -> [f64; 3] {
    let p2 = p * q * survival * survival;
    let p1 = survival * (p + q) - 2.0 * p2;
    [1.0 - p1 - p2, p1, p2]
}

/// Expected center-peak pair count and first-output tag count per slot for
/// the bench model: `pairs` interfere (cross-output with probability
/// `R^2 + T^2 - 2RT V`, bunching with the R/T side split), unpaired extras
/// route independently. Histogram center counts are tag pairs, so a slot
/// with `n1` and `n2` tags contributes `n1 * n2`.
fn bench_slot_expectations(
    dist_a: &[f64; 3],
    dist_b: &[f64; 3],
    reflectivity: f64,
    overlap: f64,
) -> (f64, f64) {
    let r = reflectivity;
    let t = 1.0 - r;
    let p_c = (r * r + t * t - 2.0 * r * t * overlap).clamp(0.0, 1.0);
    // per interfering pair: E[tags at out1] and out2
    let a = p_c + 2.0 * r * (1.0 - p_c);
    let b = p_c + 2.0 * t * (1.0 - p_c);
    let mut center = 0.0;
    let mut out1 = 0.0;
    for (ka, pa) in dist_a.iter().enumerate() {
        for (kb, pb) in dist_b.iter().enumerate() {
            let weight = pa * pb;
            let pairs = ka.min(kb) as f64;
            let extras = (ka + kb) as f64 - 2.0 * pairs;
            // E[n1 n2] with n1 = sum of pair out1 tags + Bin(extras, R)
            let e_center = pairs * p_c
                + pairs * (pairs - 1.0) * a * b
                + pairs * extras * (a * t + r * b)
                + extras * (extras - 1.0) * r * t;
            center += weight * e_center;
            out1 += weight * (pairs * a + extras * r);
        }
    }
    (center, out1)
}

/// Pairwise overlap to feed the bench so that the full chain (co and cross
/// runs, raw visibility, g2 and splitting-ratio correction) recovers
/// `target_v`.
///
/// The center-peak expectation of the bench model (including residual
/// two-photon slots) is evaluated exactly per slot and the overlap solved by
/// bisection; at R = 0.5 and g2 = 0 this reduces to the identity.
pub fn bench_overlap_for_target(
    config: &ScenarioConfig,
    bench: &HomBenchSpec,
    target_v: f64,
    g2_for_correction: f64,
) -> f64 {
    let clock = config.clock.pulse_clock();
    let p = config.source.eta_pop;
    let q = config.source.multiphoton_prob;
    let pre = config.source.pre_network_survival().min(1.0);
    let m = config.network.channel_count() as u64;
    let survival = |channel: u8| -> f64 {
        let pulse = (0..m)
            .find(|&r| config.network.ideal_channel_for_pulse(r, &clock) == channel)
            .expect("every channel has a source pulse");
        pre * config.network.channel_transmissions[channel as usize]
            * config.network.expected_switching_for_pulse(pulse, &clock)
    };
    let dist_a = slot_distribution(p, q, survival(bench.input_a));
    let dist_b = slot_distribution(p, q, survival(bench.input_b));
    let r = bench.reflectivity;

    let (c_perp, s_perp) = bench_slot_expectations(&dist_a, &dist_b, r, 0.0);
    let recovered = |overlap: f64| -> f64 {
        let (c_par, s_par) = bench_slot_expectations(&dist_a, &dist_b, r, overlap);
        let v_raw = 1.0 - (c_par / s_par) / (c_perp / s_perp);
        crate::analytics::hom_visibility_corrected(v_raw, g2_for_correction, r)
            .unwrap_or(f64::NAN)
    };
    // recovered visibility is monotone in the overlap; bisect
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if recovered(mid) < target_v {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The characterized demultiplexer as a rate-model parameter tuple.
pub fn published_rate_model() -> RateModel {
    RateModel {
        rr_hz: REFERENCE_RR_HZ,
        m: 4,
        eta_blinking: 0.36,
        eta_qd: 0.0090,
        eta_routing: 0.84,
        eta_det: 0.68,
        eta_sw: 0.946,
    }
}

/// One-sigma uncertainties of the characterized parameters.
pub fn published_rate_sigma() -> RateModelSigma {
    RateModelSigma {
        eta_blinking: 0.0,
        eta_qd: 0.0009,
        eta_routing: 0.03,
        eta_det: 0.05,
        eta_sw: 0.008,
    }
}

/// What-if projection: a bright non-blinking micropillar-class source
/// (26.1% fiber-coupled efficiency) behind the same demultiplexer.
pub fn micropillar_what_if() -> RateModel {
    RateModel {
        eta_blinking: 1.0,
        eta_qd: 0.261,
        ..published_rate_model()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn calibrated_multiphoton_hits_g2_target() {
        let source = reference_source();
        assert_relative_eq!(source.g2_zero(), 0.016, epsilon = 5e-5);
    }

    #[test]
    fn reference_efficiency_budget_closes() {
        // eta_qd = blinking * population * extraction * optics * coupling
        let s = reference_source();
        let product =
            s.eta_blinking * s.eta_pop * s.eta_extr * s.eta_optics * s.eta_fibercoup;
        assert_relative_eq!(product, s.eta_qd, max_relative = 1e-3);
    }

    #[test]
    fn reference_switching_efficiency_is_0946() {
        let config = four_channel_reference(1000, 1);
        let clock = config.clock.pulse_clock();
        let eta_sw = config.network.expected_switching_efficiency(&clock);
        assert_relative_eq!(eta_sw, 0.946, epsilon = 5e-4);
    }

    #[test]
    fn reference_routing_efficiency() {
        let config = four_channel_reference(1000, 1);
        assert_relative_eq!(config.network.routing_efficiency(), 0.837, epsilon = 1e-9);
    }

    #[test]
    fn boosted_presets_validate() {
        hbt_calibration(1000, 1).validate().unwrap();
        switching_benchmark(1000, 1).validate().unwrap();
        hom_interference(1000, 1).validate().unwrap();
    }

    #[test]
    fn hbt_network_splits_50_50() {
        let config = hbt_calibration(1000, 1);
        let clock = config.clock.pulse_clock();
        for pulse in 0..8 {
            let t = pulse * clock.pulse_period_ps;
            let p = crate::network::eom_switch_probability(t, &config.network.stages[0].drive);
            assert_relative_eq!(p, 0.5, epsilon = 1e-9);
        }
    }

    #[test]
    fn bench_overlap_identity_without_corrections() {
        // at R = 0.5 and g2 = 0 the chain is the identity
        let mut config = hom_interference(1000, 1);
        config.source.multiphoton_prob = 0.0;
        let bench = HomBenchSpec {
            reflectivity: 0.5,
            ..hom_bench(&config, 1, 0.0)
        };
        let overlap = bench_overlap_for_target(&config, &bench, 0.8, 0.0);
        assert_relative_eq!(overlap, 0.8, epsilon = 1e-9);
    }
}
