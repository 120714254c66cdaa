//! Deterministic seed derivation. All randomness in a run flows from a
//! single root seed; every stage/market/window task derives its own stream
//! from `(root, label)` so results are independent of scheduling order and
//! thread count.

use rand_chacha::ChaCha12Rng;
use rand_chacha::rand_core::SeedableRng;
use sha2::{Digest, Sha256};

/// 32-byte seed derived from the root seed and a task label.
pub fn derive_seed(root: u64, label: &str) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(root.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut out = [0u8; 32];
    out.copy_from_slice(&digest);
    out
}

/// Seeded RNG for the task identified by `label`.
pub fn rng_for(root: u64, label: &str) -> ChaCha12Rng {
    ChaCha12Rng::from_seed(derive_seed(root, label))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn labels_give_distinct_streams() {
        let mut a = rng_for(7, "fit/US/2006-12");
        let mut b = rng_for(7, "fit/DE/2006-12");
        let va: f64 = a.random();
        let vb: f64 = b.random();
        assert_ne!(va, vb);
        let mut a2 = rng_for(7, "fit/US/2006-12");
        let va2: f64 = a2.random();
        assert_eq!(va, va2);
    }
}
