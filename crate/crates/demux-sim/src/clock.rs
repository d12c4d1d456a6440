//! Pulse clock and time-tag primitives.
//!
//! All times are integer picoseconds from run start. Pulse times are always
//! computed as `index * period`, never by incremental addition, so a run of
//! 10^8 pulses carries no accumulated drift.

use serde::{Deserialize, Serialize};

/// A single detection event: channel index plus timestamp in picoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TimeTag {
    pub time_ps: i64,
    pub channel: u8,
}

impl TimeTag {
    pub fn new(channel: u8, time_ps: i64) -> Self {
        Self { time_ps, channel }
    }
}

/// The pulsed-excitation clock: repetition rate, rounded pulse period and
/// total pulse count of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseClock {
    pub repetition_rate_hz: f64,
    pub pulse_period_ps: i64,
    pub n_pulses: u64,
}

pub const PS_PER_SECOND: f64 = 1e12;

impl PulseClock {
    /// Build a clock from a repetition rate, rounding the period to the
    /// nearest picosecond (76.2 MHz rounds to 13123 ps).
    pub fn new(repetition_rate_hz: f64, n_pulses: u64) -> Self {
        let pulse_period_ps = (PS_PER_SECOND / repetition_rate_hz).round() as i64;
        Self {
            repetition_rate_hz,
            pulse_period_ps,
            n_pulses,
        }
    }

    /// Emission time of a pulse, `index * period`.
    pub fn pulse_time(&self, pulse_index: u64) -> Result<i64, PulseIndexError> {
        if pulse_index >= self.n_pulses {
            return Err(PulseIndexError {
                index: pulse_index,
                n_pulses: self.n_pulses,
            });
        }
        Ok(pulse_index as i64 * self.pulse_period_ps)
    }

    /// Total run duration in picoseconds.
    pub fn duration_ps(&self) -> i64 {
        self.n_pulses as i64 * self.pulse_period_ps
    }

    pub fn duration_s(&self) -> f64 {
        self.duration_ps() as f64 / PS_PER_SECOND
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("pulse index {index} out of range (run has {n_pulses} pulses)")]
pub struct PulseIndexError {
    pub index: u64,
    pub n_pulses: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_clock() -> PulseClock {
        PulseClock::new(76.2e6, 100)
    }

    #[test]
    fn period_rounds_to_nearest_ps() {
        let clock = paper_clock();
        assert_eq!(clock.pulse_period_ps, 13_123);
        // period * rate stays within 1 ps of 10^12
        let err = clock.pulse_period_ps as f64 * clock.repetition_rate_hz - PS_PER_SECOND;
        assert!(err.abs() < 1.0 * clock.repetition_rate_hz);
    }

    #[test]
    fn pulse_times() {
        let clock = paper_clock();
        assert_eq!(clock.pulse_time(0).unwrap(), 0);
        assert_eq!(clock.pulse_time(1).unwrap(), 13_123);
        // one full four-channel switching cycle, ~52.5 ns
        assert_eq!(clock.pulse_time(4).unwrap(), 52_492);
    }

    #[test]
    fn pulse_index_out_of_range() {
        let clock = paper_clock();
        assert!(clock.pulse_time(100).is_err());
        assert!(clock.pulse_time(99).is_ok());
    }
}
