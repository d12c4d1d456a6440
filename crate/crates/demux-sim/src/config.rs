//! Scenario configuration: schema, validation and TOML round-trip.
//!
//! The on-disk format is TOML with a `schema_version` key. Any key can be
//! overridden from the environment with the `DEMUX_` prefix, double
//! underscores separating nesting levels (`DEMUX_SOURCE__ETA_POP=0.5`).

use serde::{Deserialize, Serialize};

use crate::analytics::RateModel;
use crate::clock::PulseClock;
use crate::detector::DetectorParams;
use crate::network::DemuxNetworkSpec;
use crate::source::SourceParams;

pub const SCHEMA_VERSION: u32 = 1;
pub const ENV_PREFIX: &str = "DEMUX_";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClockSpec {
    pub repetition_rate_hz: f64,
    pub n_pulses: u64,
}

impl ClockSpec {
    pub fn pulse_clock(&self) -> PulseClock {
        PulseClock::new(self.repetition_rate_hz, self.n_pulses)
    }
}

/// Analysis settings shared by the simulate and analyze paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSpec {
    /// n-fold coincidence window.
    pub coincidence_window_ps: i64,
    /// Correlation histogram bin width.
    pub histogram_bin_width_ps: i64,
    /// Correlation histograms span `[-range, +range)`.
    pub histogram_range_ps: i64,
    /// Keep every d-th start in sync histograms (4: one start per cycle).
    pub sync_divider: u32,
    /// Channel pair for a second-order correlation estimate, if any.
    pub g2_channels: Option<(u8, u8)>,
    /// Extract per-channel switching metrics from sync histograms.
    pub switching: bool,
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        Self {
            coincidence_window_ps: 2_000,
            histogram_bin_width_ps: 100,
            histogram_range_ps: 120_000,
            sync_divider: 4,
            g2_channels: None,
            switching: true,
        }
    }
}

/// A complete simulation scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub rng_seed: u64,
    pub clock: ClockSpec,
    pub source: SourceParams,
    pub network: DemuxNetworkSpec,
    pub detectors: Vec<DetectorParams>,
    pub analysis: AnalysisSpec,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("{field}: probability {value} out of range [0, 1]")]
    ProbabilityOutOfRange { field: String, value: f64 },
    #[error("{field}: rate must be positive, got {value}")]
    NonPositiveRate { field: String, value: f64 },
    #[error("channel count must be 2^k; network declares depth {depth} but lists {listed} transmissions")]
    ChannelCountMismatch { depth: u32, listed: usize },
    #[error("detector list has {detectors} entries for {channels} channels")]
    DetectorCountMismatch { detectors: usize, channels: usize },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("unsupported schema_version {0}")]
    SchemaVersion(u32),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigIoError {
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("config invalid:\n{}", list_errors(.0))]
    Invalid(Vec<ConfigError>),
    #[error("io error: {0}")]
    Io(String),
}

fn list_errors(errors: &[ConfigError]) -> String {
    errors
        .iter()
        .map(|e| format!("  - {e}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl ScenarioConfig {
    /// Check every invariant and return the complete list of violations.
    pub fn validate(&self) -> Result<(), Vec<ConfigError>> {
        let mut errors = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            errors.push(ConfigError::SchemaVersion(self.schema_version));
        }
        if self.clock.repetition_rate_hz.is_nan() || self.clock.repetition_rate_hz <= 0.0 {
            errors.push(ConfigError::NonPositiveRate {
                field: "clock.repetition_rate_hz".into(),
                value: self.clock.repetition_rate_hz,
            });
        }
        let mut prob = |field: &str, value: f64| {
            if !(0.0..=1.0).contains(&value) || value.is_nan() {
                errors.push(ConfigError::ProbabilityOutOfRange {
                    field: field.into(),
                    value,
                });
            }
        };
        prob("source.eta_pop", self.source.eta_pop);
        prob("source.eta_blinking", self.source.eta_blinking);
        prob("source.multiphoton_prob", self.source.multiphoton_prob);
        prob("source.eta_extr", self.source.eta_extr);
        prob("source.eta_optics", self.source.eta_optics);
        prob("source.eta_fibercoup", self.source.eta_fibercoup);
        prob("source.eta_qd", self.source.eta_qd);
        for (i, t) in self.network.channel_transmissions.iter().enumerate() {
            prob(&format!("network.channel_transmissions[{i}]"), *t);
        }
        for (i, d) in self.detectors.iter().enumerate() {
            prob(&format!("detectors[{i}].efficiency"), d.efficiency);
        }

        if self.source.multiphoton_prob > self.source.eta_pop {
            errors.push(ConfigError::Invalid {
                field: "source.multiphoton_prob".into(),
                message: format!(
                    "residual two-photon probability {} exceeds eta_pop {}",
                    self.source.multiphoton_prob, self.source.eta_pop
                ),
            });
        }
        if self.source.eta_qd > self.source.eta_blinking {
            errors.push(ConfigError::Invalid {
                field: "source.eta_qd".into(),
                message: format!(
                    "eta_qd {} exceeds eta_blinking {} (blinking is part of eta_qd)",
                    self.source.eta_qd, self.source.eta_blinking
                ),
            });
        }
        let dwell_ratio = self.source.blink_on_dwell_ps
            / (self.source.blink_on_dwell_ps + self.source.blink_off_dwell_ps);
        if self.source.blink_on_dwell_ps <= 0.0 || self.source.blink_off_dwell_ps <= 0.0 {
            errors.push(ConfigError::Invalid {
                field: "source.blink_on_dwell_ps".into(),
                message: "dwell times must be positive".into(),
            });
        } else if (dwell_ratio - self.source.eta_blinking).abs() > 1e-9 {
            errors.push(ConfigError::Invalid {
                field: "source.eta_blinking".into(),
                message: format!(
                    "dwell ratio {dwell_ratio} does not reproduce eta_blinking {}",
                    self.source.eta_blinking
                ),
            });
        }
        if self.source.pre_network_survival() > 1.0 + 1e-12 {
            errors.push(ConfigError::Invalid {
                field: "source.eta_qd".into(),
                message: "eta_qd implies a pre-network survival above 1".into(),
            });
        }
        if self.source.lifetime_ps <= 0.0 {
            errors.push(ConfigError::NonPositiveRate {
                field: "source.lifetime_ps".into(),
                value: self.source.lifetime_ps,
            });
        }

        let channels = 1usize << self.network.depth_k;
        if self.network.channel_transmissions.len() != channels
            || self.network.channel_delays_ps.len() != channels
        {
            errors.push(ConfigError::ChannelCountMismatch {
                depth: self.network.depth_k,
                listed: self.network.channel_transmissions.len(),
            });
        }
        if self.network.stages.len() != channels - 1 {
            errors.push(ConfigError::Invalid {
                field: "network.stages".into(),
                message: format!(
                    "a depth-{} tree needs {} stages, found {}",
                    self.network.depth_k,
                    channels - 1,
                    self.network.stages.len()
                ),
            });
        }
        for (i, s) in self.network.stages.iter().enumerate() {
            if s.extinction_ratio_switch <= 0.0 || s.extinction_ratio_pass <= 0.0 {
                errors.push(ConfigError::Invalid {
                    field: format!("network.stages[{i}]"),
                    message: "extinction ratios must be positive".into(),
                });
            }
        }
        if self.network.routing_efficiency() > 1.0 {
            errors.push(ConfigError::Invalid {
                field: "network.channel_transmissions".into(),
                message: "combined routing efficiency exceeds 1".into(),
            });
        }
        if self.detectors.len() != channels {
            errors.push(ConfigError::DetectorCountMismatch {
                detectors: self.detectors.len(),
                channels,
            });
        }
        for (i, d) in self.detectors.iter().enumerate() {
            if d.dead_time_ps < 0 || d.jitter_sigma_ps < 0.0 {
                errors.push(ConfigError::Invalid {
                    field: format!("detectors[{i}]"),
                    message: "dead time and jitter must be non-negative".into(),
                });
            }
        }
        if self.analysis.coincidence_window_ps <= 0
            || self.analysis.histogram_bin_width_ps <= 0
            || self.analysis.histogram_range_ps <= 0
            || self.analysis.sync_divider == 0
        {
            errors.push(ConfigError::Invalid {
                field: "analysis".into(),
                message: "windows, bins and divider must be positive".into(),
            });
        }

        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }

    /// The rate-model parameters this scenario realizes, for comparing
    /// simulation output against the closed form.
    pub fn rate_model(&self) -> RateModel {
        let clock = self.clock.pulse_clock();
        let eta_det = self.detectors.iter().map(|d| d.efficiency).sum::<f64>()
            / self.detectors.len().max(1) as f64;
        RateModel {
            rr_hz: self.clock.repetition_rate_hz,
            m: 1 << self.network.depth_k,
            eta_blinking: self.source.eta_blinking,
            eta_qd: self.source.eta_qd,
            eta_routing: self.network.routing_efficiency(),
            eta_det,
            eta_sw: self.network.expected_switching_efficiency(&clock),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigIoError> {
        let config: ScenarioConfig =
            toml::from_str(text).map_err(|e| ConfigIoError::Parse(e.to_string()))?;
        Ok(config)
    }

    /// Parse, apply `DEMUX_*` environment overrides, and validate.
    pub fn load(text: &str) -> Result<Self, ConfigIoError> {
        let overrides: Vec<(String, String)> = std::env::vars()
            .filter(|(k, _)| k.starts_with(ENV_PREFIX))
            .collect();
        Self::load_with_overrides(text, &overrides)
    }

    pub fn load_with_overrides(
        text: &str,
        overrides: &[(String, String)],
    ) -> Result<Self, ConfigIoError> {
        let mut value: toml::Value =
            toml::from_str(text).map_err(|e| ConfigIoError::Parse(e.to_string()))?;
        for (key, raw) in overrides {
            let path = match key.strip_prefix(ENV_PREFIX) {
                Some(p) => p,
                None => continue,
            };
            apply_override(&mut value, path, raw)
                .map_err(|m| ConfigIoError::Parse(format!("override {key}: {m}")))?;
        }
        let config: ScenarioConfig = value
            .try_into()
            .map_err(|e: toml::de::Error| ConfigIoError::Parse(e.to_string()))?;
        config.validate().map_err(ConfigIoError::Invalid)?;
        Ok(config)
    }
}

/// Set `value[path] = parsed(raw)` where path segments are separated by
/// double underscores and matched case-insensitively against existing keys.
fn apply_override(value: &mut toml::Value, path: &str, raw: &str) -> Result<(), String> {
    let mut current = value;
    let segments: Vec<&str> = path.split("__").collect();
    for (i, seg) in segments.iter().enumerate() {
        let table = current
            .as_table_mut()
            .ok_or_else(|| format!("segment {seg} is not a table"))?;
        let key = table
            .keys()
            .find(|k| k.eq_ignore_ascii_case(seg))
            .cloned()
            .ok_or_else(|| format!("unknown key {seg}"))?;
        if i == segments.len() - 1 {
            // parse the raw text as a TOML scalar by wrapping it in a document
            let parsed = toml::from_str::<toml::Table>(&format!("v = {raw}"))
                .ok()
                .and_then(|mut t| t.remove("v"))
                .unwrap_or_else(|| toml::Value::String(raw.to_string()));
            table.insert(key, parsed);
            return Ok(());
        }
        current = table.get_mut(&key).expect("key exists");
    }
    Err("empty override path".into())
}
