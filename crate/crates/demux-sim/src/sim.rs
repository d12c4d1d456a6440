//! End-to-end scenario execution: blinking trace, pulsed emission, routing,
//! detection and the beamsplitter bench.
//!
//! Pulses are processed in fixed-size blocks, each drawing from its own RNG
//! stream, so blocks can run on any number of worker threads and still merge
//! into bit-identical output.

use rand::Rng;
use rayon::prelude::*;

use crate::clock::{PulseClock, TimeTag};
use crate::config::{ConfigError, ScenarioConfig};
use crate::detector::{detect, hom_merge, DetectError, HomBenchSpec};
use crate::rng::{streams, RngStreamSpec};
use crate::source::{sample_blinking_trace, sample_emission, SourceError};

/// Pulses per RNG block. Fixed so results never depend on the thread count.
pub const BLOCK_PULSES: u64 = 1 << 20;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("config invalid: {0:?}")]
    Config(Vec<ConfigError>),
    #[error(transparent)]
    Source(#[from] SourceError),
    #[error(transparent)]
    Detect(#[from] DetectError),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimCounters {
    pub pulses: u64,
    pub on_pulses: u64,
    pub photons_emitted: u64,
    pub photons_entered_network: u64,
    pub photons_lost_in_network: u64,
    pub photons_exited: Vec<u64>,
    pub correctly_routed: Vec<u64>,
    pub incorrectly_routed: Vec<u64>,
}

impl SimCounters {
    fn new(channels: usize) -> Self {
        Self {
            photons_exited: vec![0; channels],
            correctly_routed: vec![0; channels],
            incorrectly_routed: vec![0; channels],
            ..Default::default()
        }
    }

    fn merge(&mut self, other: &SimCounters) {
        self.pulses += other.pulses;
        self.on_pulses += other.on_pulses;
        self.photons_emitted += other.photons_emitted;
        self.photons_entered_network += other.photons_entered_network;
        self.photons_lost_in_network += other.photons_lost_in_network;
        for (a, b) in self.photons_exited.iter_mut().zip(&other.photons_exited) {
            *a += b;
        }
        for (a, b) in self.correctly_routed.iter_mut().zip(&other.correctly_routed) {
            *a += b;
        }
        for (a, b) in self
            .incorrectly_routed
            .iter_mut()
            .zip(&other.incorrectly_routed)
        {
            *a += b;
        }
    }
}

/// Photon arrivals at the channel outputs, before detection.
#[derive(Debug, Clone)]
pub struct ArrivalOutput {
    pub arrivals: Vec<Vec<i64>>,
    pub counters: SimCounters,
    pub realized_on_fraction: f64,
    pub clock: PulseClock,
}

/// Detected time tags per channel plus the merged stream.
#[derive(Debug, Clone)]
pub struct SimOutput {
    pub tags: Vec<Vec<TimeTag>>,
    pub counters: SimCounters,
    pub realized_on_fraction: f64,
    pub clock: PulseClock,
}

impl SimOutput {
    /// All channels merged into one time-ordered stream.
    pub fn merged_tags(&self) -> Vec<TimeTag> {
        let mut merged: Vec<TimeTag> = self.tags.iter().flatten().copied().collect();
        merged.sort_by_key(|t| (t.time_ps, t.channel));
        merged
    }
}

/// Run the source and routing stages, producing per-channel arrival streams.
pub fn run_arrivals(config: &ScenarioConfig) -> Result<ArrivalOutput, SimError> {
    config.validate().map_err(SimError::Config)?;
    let clock = config.clock.pulse_clock();
    let channels = config.network.channel_count();
    let seed = config.rng_seed;
    let trace = sample_blinking_trace(
        &clock,
        &config.source,
        RngStreamSpec::new(seed, streams::BLINKING),
    )?;
    let p_pre = config.source.pre_network_survival().min(1.0);

    let n_blocks = clock.n_pulses.div_ceil(BLOCK_PULSES).max(1);
    let blocks: Vec<(Vec<Vec<i64>>, SimCounters)> = (0..n_blocks)
        .into_par_iter()
        .map(|block| {
            let mut rng = RngStreamSpec::new(seed, streams::PULSE_BLOCK_BASE + block).rng();
            let mut arrivals: Vec<Vec<i64>> = vec![Vec::new(); channels];
            let mut counters = SimCounters::new(channels);
            let first = block * BLOCK_PULSES;
            let last = (first + BLOCK_PULSES).min(clock.n_pulses);
            for pulse in first..last {
                counters.pulses += 1;
                let on = trace.is_on(pulse);
                if !on {
                    continue;
                }
                counters.on_pulses += 1;
                let emission = sample_emission(true, &config.source, &mut rng);
                counters.photons_emitted += emission.n_photons as u64;
                let pulse_time = pulse as i64 * clock.pulse_period_ps;
                for &delay in emission.delays() {
                    if p_pre < 1.0 && !rng.gen_bool(p_pre) {
                        continue;
                    }
                    counters.photons_entered_network += 1;
                    let routed =
                        config
                            .network
                            .route_photon(pulse, pulse_time + delay, &clock, &mut rng);
                    match routed.exit_channel {
                        Some(ch) => {
                            counters.photons_exited[ch as usize] += 1;
                            if routed.correctly_routed {
                                counters.correctly_routed[ch as usize] += 1;
                            } else {
                                counters.incorrectly_routed[ch as usize] += 1;
                            }
                            arrivals[ch as usize].push(routed.exit_time_ps);
                        }
                        None => counters.photons_lost_in_network += 1,
                    }
                }
            }
            (arrivals, counters)
        })
        .collect();

    let mut arrivals: Vec<Vec<i64>> = vec![Vec::new(); channels];
    let mut counters = SimCounters::new(channels);
    for (block_arrivals, block_counters) in &blocks {
        for (ch, list) in block_arrivals.iter().enumerate() {
            arrivals[ch].extend_from_slice(list);
        }
        counters.merge(block_counters);
    }
    // emission delays keep each channel stream almost sorted; restore order
    for list in &mut arrivals {
        list.sort();
    }
    Ok(ArrivalOutput {
        arrivals,
        counters,
        realized_on_fraction: trace.on_fraction(),
        clock,
    })
}

/// Full pipeline: arrivals plus per-channel detection.
pub fn run_scenario(config: &ScenarioConfig) -> Result<SimOutput, SimError> {
    let seed = config.rng_seed;
    let arrivals = run_arrivals(config)?;
    let mut tags = Vec::with_capacity(arrivals.arrivals.len());
    for (ch, list) in arrivals.arrivals.iter().enumerate() {
        let mut rng = RngStreamSpec::new(seed, streams::DETECTOR_BASE + ch as u64).rng();
        tags.push(detect(list, ch as u8, &config.detectors[ch], &mut rng)?);
    }
    Ok(SimOutput {
        tags,
        counters: arrivals.counters,
        realized_on_fraction: arrivals.realized_on_fraction,
        clock: arrivals.clock,
    })
}

/// Run a scenario on a bounded worker pool without changing its results.
pub fn run_scenario_with_threads(
    config: &ScenarioConfig,
    threads: Option<usize>,
) -> Result<SimOutput, SimError> {
    match threads {
        None | Some(0) => run_scenario(config),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .expect("thread pool");
            pool.install(|| run_scenario(config))
        }
    }
}

/// Output of one interference run (one polarization configuration).
#[derive(Debug, Clone)]
pub struct HomRunOutput {
    pub histogram: crate::analytics::CorrelationHistogram,
    /// Start (first output) tag count used for normalization.
    pub n_starts: u64,
    /// Center-peak integral per start event.
    pub center_normalized: f64,
    /// Mean uncorrelated-peak integral per start event.
    pub uncorrelated_normalized: f64,
}

/// Route two demultiplexer outputs onto the beamsplitter bench, detect both
/// bench outputs and build their cross-correlation histogram.
pub fn run_hom_bench(
    config: &ScenarioConfig,
    bench: &HomBenchSpec,
) -> Result<HomRunOutput, SimError> {
    let seed = config.rng_seed;
    let arrivals = run_arrivals(config)?;
    let a = &arrivals.arrivals[bench.input_a as usize];
    let b = &arrivals.arrivals[bench.input_b as usize];
    let mut bench_rng = RngStreamSpec::new(seed, streams::HOM_BENCH).rng();
    let (out1, out2) = hom_merge(a, b, bench, &mut bench_rng);

    let det1 = &config.detectors[bench.input_a as usize];
    let det2 = &config.detectors[bench.input_b as usize];
    let mut rng1 = RngStreamSpec::new(seed, streams::DETECTOR_BASE + 100).rng();
    let mut rng2 = RngStreamSpec::new(seed, streams::DETECTOR_BASE + 101).rng();
    let tags1 = detect(&out1, 0, det1, &mut rng1)?;
    let tags2 = detect(&out2, 1, det2, &mut rng2)?;

    let t1: Vec<i64> = tags1.iter().map(|t| t.time_ps).collect();
    let t2: Vec<i64> = tags2.iter().map(|t| t.time_ps).collect();
    let histogram = crate::analytics::build_histogram(
        &t1,
        &t2,
        config.analysis.histogram_bin_width_ps,
        config.analysis.histogram_range_ps,
        1,
        crate::analytics::HistogramMeta::StartStop {
            start_channel: bench.input_a,
            stop_channel: bench.input_b,
        },
    );

    let cycle_ps = arrivals.clock.pulse_period_ps * config.network.channel_count() as i64;
    let half = arrivals.clock.pulse_period_ps / 2;
    let n_starts = t1.len() as u64;
    let center = histogram.integrate_window(0, half) as f64;
    let (lo, hi) = histogram.range_ps();
    let mut unc_sum = 0.0;
    let mut unc_peaks = 0u32;
    let mut k = 1i64;
    loop {
        let mut any = false;
        for center in [k * cycle_ps, -k * cycle_ps] {
            if center - half >= lo && center + half <= hi {
                unc_sum += histogram.integrate_window(center, half) as f64;
                unc_peaks += 1;
                any = true;
            }
        }
        if !any {
            break;
        }
        k += 1;
    }
    let norm = n_starts.max(1) as f64;
    Ok(HomRunOutput {
        histogram,
        n_starts,
        center_normalized: center / norm,
        uncorrelated_normalized: unc_sum / unc_peaks.max(1) as f64 / norm,
    })
}

/// The full interference measurement: a co-polarized and a cross-polarized
/// run plus the estimator chain.
#[derive(Debug, Clone)]
pub struct HomMeasurement {
    pub co: HomRunOutput,
    pub cross: HomRunOutput,
    /// `1 - C_par / C_perp` from the normalized center peaks.
    pub v_raw: f64,
    /// `1 - 2A` from the co-polarized run alone.
    pub v_raw_alternative: f64,
    /// Raw visibility corrected for g2 and the splitting ratio.
    pub v_corrected: f64,
}

/// Run the interference bench in both polarization configurations and apply
/// the visibility estimators. The cross-polarized run (overlap 0) uses the
/// next seed so the two runs are statistically independent.
pub fn measure_hom_visibility(
    config: &ScenarioConfig,
    bench: &HomBenchSpec,
    g2_for_correction: f64,
) -> Result<HomMeasurement, SimError> {
    let co = run_hom_bench(config, bench)?;
    let mut cross_config = config.clone();
    cross_config.rng_seed = config.rng_seed.wrapping_add(1);
    let cross_bench = HomBenchSpec {
        mutual_indistinguishability: 0.0,
        ..*bench
    };
    let cross = run_hom_bench(&cross_config, &cross_bench)?;
    let v_raw = crate::analytics::hom_visibility_raw(
        co.center_normalized,
        cross.center_normalized,
    )
    .unwrap_or(f64::NAN);
    let v_raw_alternative = crate::analytics::hom_visibility_alternative(
        co.center_normalized,
        co.uncorrelated_normalized,
    )
    .unwrap_or(f64::NAN);
    let v_corrected = crate::analytics::hom_visibility_corrected(
        v_raw,
        g2_for_correction,
        bench.reflectivity,
    )
    .unwrap_or(f64::NAN);
    Ok(HomMeasurement {
        co,
        cross,
        v_raw,
        v_raw_alternative,
        v_corrected,
    })
}
