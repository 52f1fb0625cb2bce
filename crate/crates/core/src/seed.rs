//! Stable per-task seeds derived from a master seed.

use sha2::{Digest, Sha256};

use crate::corpus::Method;

/// Seeds are kept below 2^48 so they survive a JSON round trip through
/// consumers that store integers as doubles.
const SEED_MASK: u64 = (1 << 48) - 1;

/// Seed for one (dialogue, turn, method, variant) task. Depends only on its
/// arguments, never on scheduling order.
pub fn sub_seed(master: u64, dialogue_id: &str, turn: usize, method: Method, variant: u32) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update((dialogue_id.len() as u64).to_le_bytes());
    h.update(dialogue_id.as_bytes());
    h.update((turn as u64).to_le_bytes());
    h.update(method.as_str().as_bytes());
    h.update(variant.to_le_bytes());
    let digest = h.finalize();
    let mut word = [0u8; 8];
    word.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(word) & SEED_MASK
}
