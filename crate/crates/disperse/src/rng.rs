//! Low-level random variates and seed derivation.
//!
//! Every stochastic routine in this crate takes an explicit generator, so a
//! run is fully determined by its seed. Trial-level streams are derived from
//! a master seed with [`mix_seed`], which is injective in the index for any
//! fixed master seed; distinct indices can therefore never collide.

use rand::Rng;

/// Golden-ratio increment used by the SplitMix64 sequence.
const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer (Stafford mix 13). Bijective on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    z
}

/// Derive the seed for sub-stream `index` of `master`.
///
/// `mix_seed(m, k) = mix64(m XOR ((k+1) * GOLDEN_GAMMA))`. The multiplier is
/// odd, so `k -> (k+1)*GOLDEN_GAMMA` is a bijection on `u64`; combined with
/// the bijective finalizer, two distinct indices always yield distinct seeds.
/// This mapping is part of the output contract and fixed across versions.
#[inline]
pub fn mix_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA))
}

/// Uniform draw on the open interval (0, 1].
///
/// Complements the generator's half-open [0, 1) so that `ln` never sees 0.
#[inline]
pub fn uniform_pos<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Exponential variate with the given rate (mean `1/rate`), by inversion.
#[inline]
pub fn exp_variate<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> f64 {
    debug_assert!(rate > 0.0);
    -uniform_pos(rng).ln() / rate
}

/// Geometric variate: number of failures before the first success, each
/// trial succeeding with probability `success`. Inversion on the tail
/// `P(G >= k) = (1 - success)^k`. Taking the success probability (rather
/// than the decay) keeps `ln(1 - success)` exact even when the decay is
/// within one ulp of 1; a zero `success` saturates at `u64::MAX`.
#[inline]
pub fn geometric_variate<R: Rng + ?Sized>(success: f64, rng: &mut R) -> u64 {
    debug_assert!((0.0..=1.0).contains(&success));
    if success >= 1.0 {
        return 0;
    }
    let k = (uniform_pos(rng).ln() / (-success).ln_1p()).floor();
    if k >= u64::MAX as f64 {
        u64::MAX
    } else {
        k as u64
    }
}
