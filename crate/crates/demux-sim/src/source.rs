//! Pulsed single-photon emission: Rabi-driven population, slow telegraph
//! blinking, residual two-photon events and exponential emission delay.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::clock::PulseClock;
use crate::rng::RngStreamSpec;

/// Emitter description. Probabilities are per excitation pulse.
///
/// `eta_extr`, `eta_optics` and `eta_fibercoup` are informational loss
/// components; the pipeline applies the composite fiber-coupled efficiency
/// `eta_qd` as a single pre-network survival probability (with blinking
/// handled by the telegraph and the emission split handled by `eta_pop` /
/// `multiphoton_prob`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceParams {
    /// Excited-state population probability at the configured pulse area.
    pub eta_pop: f64,
    /// Excitation pulse area in radians (pi for full inversion).
    pub pulse_area_rad: f64,
    /// Damping constant of the Rabi envelope (dimensionless).
    pub rabi_damping: f64,
    /// Long-run on-time fraction of the emission telegraph.
    pub eta_blinking: f64,
    /// Mean dwell time of the on state, picoseconds.
    pub blink_on_dwell_ps: f64,
    /// Mean dwell time of the off state, picoseconds.
    pub blink_off_dwell_ps: f64,
    /// Probability of a residual second photon per occupied pulse.
    pub multiphoton_prob: f64,
    /// Exponential emission-delay constant, picoseconds.
    pub lifetime_ps: f64,
    /// Extraction efficiency from the sample (metadata).
    pub eta_extr: f64,
    /// Transmission of the collection optics (metadata).
    pub eta_optics: f64,
    /// Fiber-coupling efficiency of the emitter mode (metadata).
    pub eta_fibercoup: f64,
    /// Composite fiber-coupled source efficiency, blinking included.
    pub eta_qd: f64,
}

impl SourceParams {
    /// Mean photons per occupied pulse (first plus residual second photon).
    pub fn mean_photons_per_on_pulse(&self) -> f64 {
        self.eta_pop + self.multiphoton_prob
    }

    /// Survival probability applied to each photon before it enters the
    /// routing network, chosen so the photon flux at the network input is
    /// `eta_qd / eta_blinking` per occupied pulse.
    pub fn pre_network_survival(&self) -> f64 {
        self.eta_qd / (self.eta_blinking * self.mean_photons_per_on_pulse())
    }

    /// Intrinsic second-order correlation at zero delay of the modelled
    /// photon-number distribution, `2 p q / (p + q)^2`.
    pub fn g2_zero(&self) -> f64 {
        let p = self.eta_pop;
        let q = self.multiphoton_prob;
        if p + q == 0.0 {
            return 0.0;
        }
        2.0 * p * q / (p + q).powi(2)
    }
}

/// Excited-state population after a pulse of the given area: a damped Rabi
/// oscillation `sin^2(theta/2) * exp(-theta * damping)`.
pub fn excitation_probability(pulse_area_rad: f64, rabi_damping: f64) -> Result<f64, SourceError> {
    if pulse_area_rad < 0.0 || rabi_damping < 0.0 {
        return Err(SourceError::NegativeInput);
    }
    Ok((pulse_area_rad / 2.0).sin().powi(2) * (-pulse_area_rad * rabi_damping).exp())
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SourceError {
    #[error("pulse area and damping must be non-negative")]
    NegativeInput,
    #[error("blinking dwell times must be positive")]
    NonPositiveDwell,
}

/// Per-pulse on/off sequence of the emission telegraph, stored as a bitset.
#[derive(Debug, Clone)]
pub struct BlinkingTrace {
    words: Vec<u64>,
    n_pulses: u64,
    on_count: u64,
}

impl BlinkingTrace {
    pub fn is_on(&self, pulse_index: u64) -> bool {
        let w = self.words[(pulse_index >> 6) as usize];
        (w >> (pulse_index & 63)) & 1 == 1
    }

    pub fn n_pulses(&self) -> u64 {
        self.n_pulses
    }

    /// Fraction of pulses in the on state.
    pub fn on_fraction(&self) -> f64 {
        if self.n_pulses == 0 {
            return 0.0;
        }
        self.on_count as f64 / self.n_pulses as f64
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.n_pulses).map(move |i| self.is_on(i))
    }
}

/// Sample the two-state telegraph at the pulse grid.
///
/// Dwell times in each state are exponential with the configured means, which
/// makes the process Markov; the state at pulse `i+1` is drawn from the exact
/// one-period propagator, so millisecond dwells and sub-period dwells are
/// equally cheap to sample.
pub fn sample_blinking_trace(
    clock: &PulseClock,
    params: &SourceParams,
    stream: RngStreamSpec,
) -> Result<BlinkingTrace, SourceError> {
    if params.blink_on_dwell_ps <= 0.0 || params.blink_off_dwell_ps <= 0.0 {
        return Err(SourceError::NonPositiveDwell);
    }
    let mut rng = stream.rng();
    let p_on = params.blink_on_dwell_ps / (params.blink_on_dwell_ps + params.blink_off_dwell_ps);
    let rate = 1.0 / params.blink_on_dwell_ps + 1.0 / params.blink_off_dwell_ps;
    let decay = (-rate * clock.pulse_period_ps as f64).exp();
    // P(on -> on) and P(off -> on) over one pulse period.
    let stay_on = p_on + (1.0 - p_on) * decay;
    let flip_on = p_on * (1.0 - decay);

    let n = clock.n_pulses;
    let mut words = vec![0u64; n.div_ceil(64) as usize];
    let mut on_count = 0u64;
    let mut state = rng.gen_bool(p_on);
    for i in 0..n {
        if state {
            words[(i >> 6) as usize] |= 1 << (i & 63);
            on_count += 1;
        }
        let p = if state { stay_on } else { flip_on };
        state = rng.gen_bool(p);
    }
    Ok(BlinkingTrace {
        words,
        n_pulses: n,
        on_count,
    })
}

/// What one excitation pulse produced.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionOutcome {
    /// 0, 1 or 2 photons; triple events are below the modelled residual.
    pub n_photons: u8,
    /// Emission delay of each photon after its pulse, picoseconds.
    pub delays_ps: [i64; 2],
    pub qd_was_on: bool,
}

impl EmissionOutcome {
    pub fn delays(&self) -> &[i64] {
        &self.delays_ps[..self.n_photons as usize]
    }
}

/// Sample the emission of one pulse. An off-state pulse emits nothing; an
/// on-state pulse emits one photon with probability `eta_pop` and,
/// independently, a residual second photon with probability
/// `multiphoton_prob`. The second photon is re-excited after the first, so
/// its delay adds a second exponential draw.
pub fn sample_emission<R: Rng>(
    on: bool,
    params: &SourceParams,
    rng: &mut R,
) -> EmissionOutcome {
    if !on {
        return EmissionOutcome {
            n_photons: 0,
            delays_ps: [0; 2],
            qd_was_on: false,
        };
    }
    let first = rng.gen_bool(params.eta_pop);
    let second = params.multiphoton_prob > 0.0 && rng.gen_bool(params.multiphoton_prob);
    let exp = Exp::new(1.0 / params.lifetime_ps).expect("positive lifetime");
    let mut delays = [0i64; 2];
    let mut n = 0u8;
    let mut t = 0.0;
    if first {
        t += exp.sample(rng);
        delays[n as usize] = t.round() as i64;
        n += 1;
    }
    if second {
        t += exp.sample(rng);
        delays[n as usize] = t.round() as i64;
        n += 1;
    }
    EmissionOutcome {
        n_photons: n,
        delays_ps: delays,
        qd_was_on: true,
    }
}

/// Debug dump of the per-pulse emission record:
/// `pulse_index,on,n_photons,delay_ps` (first-photon delay, empty when no
/// photon was emitted).
pub fn write_emission_debug_csv<W: std::io::Write>(
    mut w: W,
    clock: &PulseClock,
    params: &SourceParams,
    seed: u64,
) -> Result<(), std::io::Error> {
    let trace = sample_blinking_trace(clock, params, RngStreamSpec::new(seed, 0))
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e.to_string()))?;
    let mut rng = RngStreamSpec::new(seed, 1).rng();
    writeln!(w, "pulse_index,on,n_photons,delay_ps")?;
    for pulse in 0..clock.n_pulses {
        let on = trace.is_on(pulse);
        let out = sample_emission(on, params, &mut rng);
        let delay = out
            .delays()
            .first()
            .map(|d| d.to_string())
            .unwrap_or_default();
        writeln!(w, "{pulse},{},{},{delay}", on as u8, out.n_photons)?;
    }
    Ok(())
}
