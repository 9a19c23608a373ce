//! Deterministic random streams.
//!
//! Every chain owns a ChaCha8 stream keyed by the master seed and selected by
//! the chain index through the generator's 64-bit stream counter. Streams are
//! therefore independent of each other and of the order in which worker
//! threads happen to run the chains.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stream type used by every kernel in the crate.
pub type ChainRng = ChaCha8Rng;

/// Stream-id offsets for purposes other than chain evolution, so that e.g.
/// data simulation never shares a stream with chain `l`.
pub const AUX_STREAM_BASE: u64 = 1 << 62;

/// Derive the stream for chain `index` from `master_seed`.
pub fn chain_stream(master_seed: u64, index: u64) -> ChainRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Derive `count` chain streams.
pub fn split_streams(master_seed: u64, count: usize) -> Vec<ChainRng> {
    (0..count as u64).map(|i| chain_stream(master_seed, i)).collect()
}

/// A stream reserved for auxiliary work (simulation, resampling barriers).
pub fn aux_stream(master_seed: u64, purpose: u64) -> ChainRng {
    chain_stream(master_seed, AUX_STREAM_BASE + purpose)
}
