//! Deterministic seed derivation.
//!
//! Every source of randomness in this crate is a `ChaCha8Rng` seeded through
//! [`derive`], so a run is a pure function of its master seed: replicate
//! sub-seeds, per-function oracle seeds, and per-subset sampling seeds are all
//! derived from (seed, salts...) rather than from call order. This is what
//! keeps parallel and sequential execution bit-identical.

/// splitmix64 finalizer; good avalanche, stable across platforms.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix a base seed with a sequence of salt words into a new seed.
pub fn derive(base: u64, salts: &[u64]) -> u64 {
    let mut state = splitmix64(base ^ 0x6A09_E667_F3BC_C908);
    for &salt in salts {
        state = splitmix64(state ^ splitmix64(salt));
    }
    state
}
