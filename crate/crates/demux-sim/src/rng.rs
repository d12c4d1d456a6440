//! Deterministic RNG streams.
//!
//! Every stochastic stage of a run draws from a ChaCha stream addressed by
//! `(seed, stream_id)`. Identical addresses reproduce identical sample
//! sequences regardless of execution order or thread count, so pulse blocks
//! can run in parallel and still merge into bit-identical output.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Address of one independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStreamSpec {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStreamSpec {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Instantiate the generator for this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Stream-id allocation for a simulation run. Pulse blocks get low ids so the
/// block count can grow without colliding with the fixed consumers.
pub mod streams {
    /// Blinking telegraph trace (sequential, one per run).
    pub const BLINKING: u64 = 0;
    /// Pulse block `i` (emission + routing) uses `PULSE_BLOCK_BASE + i`.
    pub const PULSE_BLOCK_BASE: u64 = 1;
    /// Detector `c` uses `DETECTOR_BASE + c`.
    pub const DETECTOR_BASE: u64 = 1 << 32;
    /// Beamsplitter bench for two-photon interference runs.
    pub const HOM_BENCH: u64 = 1 << 33;
}
