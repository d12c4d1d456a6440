//! The electro-optic routing tree: sinusoidal drives phase-locked to the
//! pulse clock, quarter-wave biasing, Malus-law switching, finite extinction,
//! per-channel transmission and delay compensation.
//!
//! Stages form a binary tree. Layer `j` (1-based) holds `2^(j-1)` stages
//! driven at `RR / 2^j`; the stage phases are chosen so that every pulse
//! reaches each stage on its ideal path at a drive extremum. A photon that
//! takes branch `b_j` at layer `j` exits at channel `sum b_j * 2^(j-1)`,
//! which makes the loss-free pulse-to-channel map the reversal
//! `pulse mod m  ->  m - 1 - (pulse mod m)`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::clock::PulseClock;

/// Sinusoidal drive of one switching stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EomDrive {
    /// Drive frequency; `RR / 2^j` for a stage in layer `j`.
    pub frequency_hz: f64,
    /// Phase offset relative to the pulse clock.
    pub phase_rad: f64,
    /// Drive amplitude as a fraction of half the half-wave voltage.
    pub amplitude_rel: f64,
    /// Quarter-wave plate bias in front of the modulator.
    pub bias_quarter_wave: bool,
}

/// One modulator + polarizing splitter node of the tree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchStage {
    pub drive: EomDrive,
    /// Routing-error odds when the stage should switch: error probability
    /// is `1 / (1 + ER)`.
    pub extinction_ratio_switch: f64,
    /// Same, for the pass state (splitter transmission and reflection can
    /// have different extinction).
    pub extinction_ratio_pass: f64,
}

impl SwitchStage {
    fn error_probability(&self, intended_switch: bool) -> f64 {
        let er = if intended_switch {
            self.extinction_ratio_switch
        } else {
            self.extinction_ratio_pass
        };
        1.0 / (1.0 + er)
    }
}

/// Uniform stage parameters used by the tree builder.
#[derive(Debug, Clone, Copy)]
pub struct StageDefaults {
    pub amplitude_rel: f64,
    pub extinction_ratio_switch: f64,
    pub extinction_ratio_pass: f64,
}

impl Default for StageDefaults {
    fn default() -> Self {
        Self {
            amplitude_rel: 1.0,
            extinction_ratio_switch: 1e15,
            extinction_ratio_pass: 1e15,
        }
    }
}

/// The full routing network.
///
/// `channel_transmissions[c]` is the optical survival probability of the
/// path to channel `c` (splitters, coupling optics and fiber); the
/// time-integrated power fraction measured at that channel with the drives
/// running is `transmission / m`. `channel_delays_ps[c]` is the added
/// delay-compensation fiber, `base + c * period` from the builder so all
/// photons of one switching cycle exit simultaneously.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemuxNetworkSpec {
    pub depth_k: u32,
    pub channel_transmissions: Vec<f64>,
    pub channel_delays_ps: Vec<i64>,
    pub stages: Vec<SwitchStage>,
}

/// Outcome of routing one photon through the tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoutedPhoton {
    pub origin_pulse_index: u64,
    /// Exit channel, or `None` when the photon was lost in transmission.
    pub exit_channel: Option<u8>,
    pub exit_time_ps: i64,
    pub correctly_routed: bool,
}

/// Switching probability of a driven stage at time `t_ps`.
///
/// With the quarter-wave bias the transfer is
/// `sin^2( pi/4 * (1 + A sin(2 pi f t + phase)) )`, fully modulating between
/// 0 and 1 at nominal amplitude with flattened extrema; without the bias the
/// modulation is the unbiased partial `sin^2( pi/4 * A sin(...) )`.
pub fn eom_switch_probability(t_ps: i64, drive: &EomDrive) -> f64 {
    // reduce the argument in integer picoseconds when the drive period is
    // integral, so the phase stays exact over arbitrarily long runs
    let period_ps = 1e12 / drive.frequency_hz;
    let t = if period_ps.fract().abs() < 1e-6 || (period_ps - period_ps.round()).abs() < 1e-6 {
        t_ps.rem_euclid(period_ps.round() as i64) as f64
    } else {
        t_ps as f64
    };
    let theta = 2.0 * PI * drive.frequency_hz * (t * 1e-12) + drive.phase_rad;
    let modulation = drive.amplitude_rel * theta.sin();
    let arg = if drive.bias_quarter_wave {
        FRAC_PI_4 * (1.0 + modulation)
    } else {
        FRAC_PI_4 * modulation
    };
    arg.sin().powi(2)
}

/// Build the routing tree for `2^depth_k` channels.
///
/// Layer `j` runs at `RR / 2^j`. The stage in layer `j` serving the pulse
/// residue class `r (mod 2^(j-1))` gets phase `pi/2 - pi r / 2^(j-1)`, which
/// puts every pulse of that class at a drive extremum.
///
/// Drive frequencies are locked to the realized integer pulse grid
/// (`10^12 / (2^j * period_ps)`), the same thing the phase-locked loop does
/// against the pump laser; deriving them from the nominal repetition rate
/// instead would drift against the picosecond-rounded pulse times.
pub fn build_demux_tree(
    depth_k: u32,
    clock: &PulseClock,
    defaults: &StageDefaults,
    delay_base_ps: i64,
) -> DemuxNetworkSpec {
    let m = 1usize << depth_k;
    let mut stages = Vec::with_capacity(m - 1);
    for layer in 1..=depth_k {
        let class_count = 1u64 << (layer - 1);
        let frequency_hz =
            1e12 / (clock.pulse_period_ps as f64 * (1u64 << layer) as f64);
        for residue in 0..class_count {
            let phase_rad = FRAC_PI_2 - PI * residue as f64 / class_count as f64;
            stages.push(SwitchStage {
                drive: EomDrive {
                    frequency_hz,
                    phase_rad,
                    amplitude_rel: defaults.amplitude_rel,
                    bias_quarter_wave: true,
                },
                extinction_ratio_switch: defaults.extinction_ratio_switch,
                extinction_ratio_pass: defaults.extinction_ratio_pass,
            });
        }
    }
    let channel_delays_ps = (0..m)
        .map(|c| delay_base_ps + c as i64 * clock.pulse_period_ps)
        .collect();
    DemuxNetworkSpec {
        depth_k,
        channel_transmissions: vec![1.0; m],
        channel_delays_ps,
        stages,
    }
}

impl DemuxNetworkSpec {
    pub fn channel_count(&self) -> usize {
        1 << self.depth_k
    }

    /// Stage index of the node in `layer` serving pulse residue `r`.
    fn stage_index(layer: u32, residue: u64) -> usize {
        ((1u64 << (layer - 1)) - 1 + residue) as usize
    }

    /// Combined routing efficiency: the input-power fraction that reaches
    /// any output, `mean(channel transmissions)`.
    pub fn routing_efficiency(&self) -> f64 {
        self.channel_transmissions.iter().sum::<f64>() / self.channel_count() as f64
    }

    /// Channel assigned to a pulse by the loss-free, error-free network,
    /// found by tracing the tree at the pulse time.
    pub fn ideal_channel_for_pulse(&self, pulse_index: u64, clock: &PulseClock) -> u8 {
        let t = pulse_index as i64 * clock.pulse_period_ps;
        let mut channel = 0u8;
        let mut residue = 0u64;
        for layer in 1..=self.depth_k {
            let stage = &self.stages[Self::stage_index(layer, residue)];
            let switch = eom_switch_probability(t, &stage.drive) >= 0.5;
            if switch {
                channel |= 1 << (layer - 1);
            } else {
                residue += 1 << (layer - 1);
            }
        }
        channel
    }

    /// Expected probability that a photon of the given pulse exits its ideal
    /// channel, from the stage transfer functions and extinction ratios.
    pub fn expected_switching_for_pulse(&self, pulse_index: u64, clock: &PulseClock) -> f64 {
        let t = pulse_index as i64 * clock.pulse_period_ps;
        let mut p_correct = 1.0;
        let mut residue = 0u64;
        for layer in 1..=self.depth_k {
            let stage = &self.stages[Self::stage_index(layer, residue)];
            let p_switch = eom_switch_probability(t, &stage.drive);
            let intended_switch = p_switch >= 0.5;
            let q = stage.error_probability(intended_switch);
            let p_intended = if intended_switch {
                p_switch * (1.0 - q) + (1.0 - p_switch) * q
            } else {
                (1.0 - p_switch) * (1.0 - q) + p_switch * q
            };
            p_correct *= p_intended;
            if !intended_switch {
                residue += 1 << (layer - 1);
            }
        }
        p_correct
    }

    /// Mean expected switching efficiency over one cycle of pulses.
    pub fn expected_switching_efficiency(&self, clock: &PulseClock) -> f64 {
        let m = self.channel_count() as u64;
        (0..m)
            .map(|p| self.expected_switching_for_pulse(p, clock))
            .sum::<f64>()
            / m as f64
    }

    /// Route one photon: at each stage the Malus-law branch is sampled at
    /// the photon's arrival time and then flipped with the stage's
    /// extinction-error probability; survival against the exit channel's
    /// transmission is sampled once.
    pub fn route_photon<R: Rng>(
        &self,
        origin_pulse_index: u64,
        photon_time_ps: i64,
        clock: &PulseClock,
        rng: &mut R,
    ) -> RoutedPhoton {
        let mut channel = 0u8;
        let mut residue = 0u64;
        for layer in 1..=self.depth_k {
            let stage = &self.stages[Self::stage_index(layer, residue)];
            let p_switch = eom_switch_probability(photon_time_ps, &stage.drive);
            let mut switch = rng.gen_bool(p_switch.clamp(0.0, 1.0));
            let q = stage.error_probability(p_switch >= 0.5);
            if rng.gen_bool(q) {
                switch = !switch;
            }
            if switch {
                channel |= 1 << (layer - 1);
            } else {
                residue += 1 << (layer - 1);
            }
        }
        let survived = rng.gen_bool(self.channel_transmissions[channel as usize]);
        if !survived {
            return RoutedPhoton {
                origin_pulse_index,
                exit_channel: None,
                exit_time_ps: photon_time_ps,
                correctly_routed: false,
            };
        }
        let exit_time_ps = photon_time_ps + self.channel_delays_ps[channel as usize];
        let correctly_routed = channel == self.ideal_channel_for_pulse(origin_pulse_index, clock);
        RoutedPhoton {
            origin_pulse_index,
            exit_channel: Some(channel),
            exit_time_ps,
            correctly_routed,
        }
    }
}
