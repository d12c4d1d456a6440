//! Discrete-event Monte Carlo simulator and analytics toolkit for an
//! actively demultiplexed pulsed single-photon source.
//!
//! A quantum emitter driven at 76.2 MHz produces a train of single photons;
//! a binary tree of resonant electro-optic switches routes `m = 2^k`
//! consecutive time bins into `m` spatial output channels, delay fibers
//! re-align the cycle, and counters click. This crate simulates that chain
//! photon by photon (emission statistics, telegraph blinking, Malus-law
//! switching with finite extinction, per-channel losses, detector
//! efficiency, dead time and jitter), analyzes the resulting time-tag
//! streams (correlation histograms, g2(0), switching efficiency,
//! interference visibilities), and evaluates the closed-form n-fold
//! coincidence-rate model together with a brute-force enumeration oracle
//! that validates it.
//!
//! ## Runnable examples
//!
//! One example per capability:
//!
//! ```bash
//! cargo run --release -p demux-sim --example predict_rates
//! cargo run --release -p demux-sim --example simulate_reference
//! cargo run --release -p demux-sim --example hbt_g2
//! cargo run --release -p demux-sim --example switching_efficiency
//! cargo run --release -p demux-sim --example hom_visibility
//! cargo run --release -p demux-sim --example blinking_scaling
//! cargo run --release -p demux-sim --example transfer_function
//! cargo run --release -p demux-sim --example oracle_vs_closed_form
//! cargo run --release -p demux-sim --example export_scenarios
//! ```
//!
//! The `demux-sim` binary wraps the same library behind `simulate`,
//! `analyze` and `predict` subcommands for batch use.
//!
//! ## Determinism
//!
//! Every stochastic stage draws from a dedicated `(seed, stream_id)` ChaCha
//! stream ([`rng::RngStreamSpec`]); pulse blocks are processed in fixed-size
//! chunks with per-block streams, so a run reproduces bit-for-bit for a given
//! seed regardless of the worker-thread count.

pub mod analytics;
pub mod clock;
pub mod config;
pub mod detector;
pub mod network;
pub mod oracle;
pub mod report;
pub mod rng;
pub mod scenario;
pub mod sim;
pub mod source;
pub mod tags;

pub use analytics::{analytic_coincidence_rate, Measured, RateModel};
pub use clock::{PulseClock, TimeTag};
pub use config::{AnalysisSpec, ScenarioConfig};
pub use detector::{DetectorParams, HomBenchSpec};
pub use network::{build_demux_tree, DemuxNetworkSpec};
pub use sim::{run_scenario, run_scenario_with_threads, SimOutput};
pub use source::SourceParams;
