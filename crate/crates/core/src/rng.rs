//! Seed derivation for reproducible, thread-count-independent view streams.
//!
//! Every view owns a ChaCha8 stream whose 256-bit key is
//! `SHA-256(master_seed as u64 LE || len(image_id) as u64 LE || image_id || view_index as u64 LE)`.
//! Streams never depend on scheduling, so batches produce identical bytes
//! regardless of how many worker threads run them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Identifier recorded alongside every generated view.
pub const RNG_ALGORITHM: &str = "chacha8-sha256";

pub type ViewRng = ChaCha8Rng;

pub fn view_seed(master_seed: u64, image_id: &str, view_index: u64) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(master_seed.to_le_bytes());
    hasher.update((image_id.len() as u64).to_le_bytes());
    hasher.update(image_id.as_bytes());
    hasher.update(view_index.to_le_bytes());
    let digest = hasher.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    seed
}

pub fn view_rng(master_seed: u64, image_id: &str, view_index: u64) -> ViewRng {
    ChaCha8Rng::from_seed(view_seed(master_seed, image_id, view_index))
}

/// Plain seeded stream for standalone tools (fixation export, bootstrap).
pub fn seeded_rng(seed: u64) -> ViewRng {
    ChaCha8Rng::seed_from_u64(seed)
}
