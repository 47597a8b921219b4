//! Seeded deterministic randomness.
//!
//! Every sampling operation in the crate threads an explicit `&mut LabRng`;
//! identical seeds give bit-identical runs on the same platform.

use rand_chacha::ChaCha8Rng;

pub use rand::Rng;
pub use rand::SeedableRng;

/// The one RNG type used throughout.
pub type LabRng = ChaCha8Rng;

/// Root RNG for a run.
pub fn seeded(seed: u64) -> LabRng {
    LabRng::seed_from_u64(seed)
}

/// Derive an independent child stream, e.g. one per episode or per worker.
/// Children with distinct `stream` values never overlap.
pub fn child(seed: u64, stream: u64) -> LabRng {
    let mut rng = LabRng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
