//! Independent ground truth for the coincidence-rate model: exact
//! enumeration of every emission / routing / detection outcome of one
//! switching cycle, with no Monte Carlo sampling and no shared algebra with
//! the closed-form rate.
//!
//! A detected photon is identified by its exit channel and its time-bin
//! offset: a photon of pulse `i` landing on channel `c` arrives, after delay
//! compensation, in the bin shifted by `(i - pulse_of(c)) mod m` from the
//! common cycle bin. An n-fold coincidence requires every requested channel
//! to click in the same bin, so mixed correct/incorrect patterns never
//! coincide.

use serde::Serialize;

use crate::analytics::RateModel;

/// Routing outcome of one pulse within the enumerated cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PulseOutcome {
    pub emitted: bool,
    /// Exit channel; `None` when the photon was lost (or never emitted).
    pub exit_channel: Option<u8>,
    pub detected: bool,
}

/// One joint outcome of the full cycle with its exact probability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleOutcome {
    pub per_pulse: Vec<PulseOutcome>,
    pub probability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlinkingMode {
    /// The emitter is on or off for the whole cycle (blinking timescale far
    /// above the cycle time).
    Slow,
    /// Independent on/off per pulse (blinking decorrelated below the pulse
    /// period).
    Fast,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("enumeration supports at most 4 channels, got {0}")]
    TooManyChannels(u32),
    #[error("requested coincidence order {n} exceeds channel count {m}")]
    OrderExceedsChannels { n: u32, m: u32 },
}

/// The enumerated outcome space of one switching cycle.
#[derive(Debug, Clone)]
pub struct CycleEnumeration {
    pub m: u32,
    pub outcomes: Vec<CycleOutcome>,
    /// Expected simultaneous-click count per cycle for every channel subset,
    /// indexed by bitmask.
    expected_by_mask: Vec<f64>,
    rr_hz: f64,
}

struct Enumerator {
    m: u32,
    p_emit: f64,
    p_route: f64,
    p_det: f64,
    eta_sw: f64,
    /// per-pulse on probability; `None` means the on/off state is decided
    /// once for the whole cycle (slow mode)
    on_prob_per_pulse: Option<f64>,
    outcomes: Vec<CycleOutcome>,
    expected_by_mask: Vec<f64>,
}

impl Enumerator {
    fn route_prob(&self, pulse: u32, channel: u32) -> f64 {
        if self.m == 1 {
            return 1.0;
        }
        let ideal = self.m - 1 - pulse;
        if channel == ideal {
            self.eta_sw
        } else {
            (1.0 - self.eta_sw) / (self.m - 1) as f64
        }
    }

    fn recurse(&mut self, pulse: u32, acc: &mut Vec<PulseOutcome>, prob: f64) {
        if pulse == self.m {
            self.record(acc, prob);
            return;
        }
        let on = self.on_prob_per_pulse.unwrap_or(1.0);
        let nothing = PulseOutcome { emitted: false, exit_channel: None, detected: false };
        self.push(pulse, acc, prob, nothing, (1.0 - on) + on * (1.0 - self.p_emit));
        let lost = PulseOutcome { emitted: true, exit_channel: None, detected: false };
        self.push(pulse, acc, prob, lost, on * self.p_emit * (1.0 - self.p_route));
        for c in 0..self.m {
            let pr = on * self.p_emit * self.p_route * self.route_prob(pulse, c);
            let hit = PulseOutcome {
                emitted: true,
                exit_channel: Some(c as u8),
                detected: true,
            };
            self.push(pulse, acc, prob, hit, pr * self.p_det);
            let miss = PulseOutcome {
                emitted: true,
                exit_channel: Some(c as u8),
                detected: false,
            };
            self.push(pulse, acc, prob, miss, pr * (1.0 - self.p_det));
        }
    }

    fn push(
        &mut self,
        pulse: u32,
        acc: &mut Vec<PulseOutcome>,
        prob: f64,
        outcome: PulseOutcome,
        p: f64,
    ) {
        if p > 0.0 {
            acc.push(outcome);
            self.recurse(pulse + 1, acc, prob * p);
            acc.pop();
        }
    }

    fn record(&mut self, per_pulse: &[PulseOutcome], probability: f64) {
        let m = self.m;
        // time-bin offsets at which each channel clicked
        let mut offset_mask = [0u8; 4];
        for (pulse, o) in per_pulse.iter().enumerate() {
            if let (true, Some(c)) = (o.detected, o.exit_channel) {
                let pulse_of_channel = m - 1 - c as u32;
                let d = (pulse as u32 + m - pulse_of_channel) % m;
                offset_mask[c as usize] |= 1 << d;
            }
        }
        for mask in 1..self.expected_by_mask.len() {
            let mut simultaneous = 0u32;
            for d in 0..m {
                let all = (0..m).all(|c| {
                    mask & (1 << c) == 0 || offset_mask[c as usize] & (1 << d) != 0
                });
                if all {
                    simultaneous += 1;
                }
            }
            self.expected_by_mask[mask] += probability * simultaneous as f64;
        }
        self.outcomes.push(CycleOutcome {
            per_pulse: per_pulse.to_vec(),
            probability,
        });
    }
}

/// Enumerate every outcome of one cycle of `m` pulses.
///
/// Per on-pulse, a photon enters the network with probability
/// `eta_qd / eta_blinking`, survives routing with `eta_routing`, exits its
/// ideal channel with `eta_sw` or any specific wrong channel with
/// `(1 - eta_sw) / (m - 1)`, and is detected with `eta_det`.
pub fn enumerate_cycle(
    m: u32,
    model: &RateModel,
    mode: BlinkingMode,
) -> Result<CycleEnumeration, OracleError> {
    if m > 4 || m == 0 {
        return Err(OracleError::TooManyChannels(m));
    }
    let mut e = Enumerator {
        m,
        p_emit: (model.eta_qd / model.eta_blinking).min(1.0),
        p_route: model.eta_routing,
        p_det: model.eta_det,
        eta_sw: model.eta_sw,
        on_prob_per_pulse: match mode {
            BlinkingMode::Slow => None,
            BlinkingMode::Fast => Some(model.eta_blinking),
        },
        outcomes: Vec::new(),
        expected_by_mask: vec![0.0; 1 << m],
    };
    let mut acc = Vec::with_capacity(m as usize);
    match mode {
        BlinkingMode::Slow => {
            let off_prob = 1.0 - model.eta_blinking;
            if off_prob > 0.0 {
                let per_pulse = vec![
                    PulseOutcome { emitted: false, exit_channel: None, detected: false };
                    m as usize
                ];
                e.record(&per_pulse, off_prob);
            }
            e.recurse(0, &mut acc, model.eta_blinking);
        }
        BlinkingMode::Fast => e.recurse(0, &mut acc, 1.0),
    }
    Ok(CycleEnumeration {
        m,
        outcomes: e.outcomes,
        expected_by_mask: e.expected_by_mask,
        rr_hz: model.rr_hz,
    })
}

impl CycleEnumeration {
    /// Sum of all outcome probabilities (1 up to rounding).
    pub fn total_probability(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability).sum()
    }

    /// Expected number of simultaneous clicks of the given channels per
    /// cycle.
    pub fn coincidence_probability(&self, channels: &[u8]) -> f64 {
        let mut mask = 0usize;
        for &c in channels {
            mask |= 1 << c;
        }
        self.expected_by_mask[mask]
    }

    /// Detected n-fold rate of channels `{0 .. n-1}` in hertz:
    /// expected clicks per cycle times the cycle rate `RR / m`.
    pub fn nfold_rate_hz(&self, n: u32) -> Result<f64, OracleError> {
        if n > self.m || n == 0 {
            return Err(OracleError::OrderExceedsChannels { n, m: self.m });
        }
        let channels: Vec<u8> = (0..n as u8).collect();
        Ok(self.coincidence_probability(&channels) * self.rr_hz / self.m as f64)
    }

    /// The complete outcome table as JSON.
    pub fn outcomes_json(&self) -> String {
        serde_json::to_string_pretty(&self.outcomes).expect("outcomes serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn model(m: u32) -> RateModel {
        RateModel {
            rr_hz: 76.2e6,
            m,
            eta_blinking: 0.36,
            eta_qd: 0.0090,
            eta_routing: 0.84,
            eta_det: 0.68,
            eta_sw: 0.946,
        }
    }

    #[test]
    fn probabilities_normalize() {
        for mode in [BlinkingMode::Slow, BlinkingMode::Fast] {
            for m in 1..=4 {
                let e = enumerate_cycle(m, &model(m), mode).unwrap();
                assert!((e.total_probability() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn perfect_network_always_coincides() {
        let model = RateModel {
            rr_hz: 76.2e6,
            m: 4,
            eta_blinking: 1.0,
            eta_qd: 1.0,
            eta_routing: 1.0,
            eta_det: 1.0,
            eta_sw: 1.0,
        };
        let e = enumerate_cycle(4, &model, BlinkingMode::Slow).unwrap();
        assert_relative_eq!(
            e.coincidence_probability(&[0, 1, 2, 3]),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn two_channel_hand_enumeration() {
        // eta_sw = 0.9, everything else 1, slow blinking 0.5:
        // P(both click) = 0.5 * (0.9^2 + 0.1^2) = 0.41
        let model = RateModel {
            rr_hz: 76.2e6,
            m: 2,
            eta_blinking: 0.5,
            eta_qd: 0.5,
            eta_routing: 1.0,
            eta_det: 1.0,
            eta_sw: 0.9,
        };
        let e = enumerate_cycle(2, &model, BlinkingMode::Slow).unwrap();
        assert_relative_eq!(e.coincidence_probability(&[0, 1]), 0.41, epsilon = 1e-12);
    }

    #[test]
    fn matches_closed_form_on_published_parameters() {
        let model = model(4);
        let e = enumerate_cycle(4, &model, BlinkingMode::Slow).unwrap();
        for n in 1..=4 {
            let oracle = e.nfold_rate_hz(n).unwrap();
            let closed = crate::analytics::analytic_coincidence_rate(n, &model).unwrap();
            assert_relative_eq!(oracle, closed, max_relative = 1e-9);
        }
        assert_relative_eq!(e.nfold_rate_hz(4).unwrap(), 0.2284, epsilon = 5e-4);
    }

    #[test]
    fn rejects_large_trees() {
        assert!(enumerate_cycle(5, &model(5), BlinkingMode::Slow).is_err());
    }

    #[test]
    fn outcome_table_dumps_as_json() {
        let e = enumerate_cycle(2, &model(2), BlinkingMode::Slow).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&e.outcomes_json()).unwrap();
        assert_eq!(parsed.as_array().unwrap().len(), e.outcomes.len());
    }
}
