//! Noise sampling for the code-capacity and phenomenological models, with
//! counter-derived random streams so that any parallel schedule of
//! trajectories reproduces bit-identical results.

pub use rand_chacha::rand_core::RngCore;
pub use rand_chacha::ChaCha8Rng;

use rand_chacha::rand_core::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::lattice::{boundary_plane, BitPlane, EdgeBits, Topology};
use crate::RuleError;

/// Per-step phenomenological error rates: each data qubit flips with
/// probability `eps_d`, each stabilizer readout with probability `eps_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhenomenologicalParams {
    pub eps_d: f64,
    pub eps_m: f64,
}

impl PhenomenologicalParams {
    pub fn new(eps_d: f64, eps_m: f64) -> Result<Self, RuleError> {
        if !(0.0..=1.0).contains(&eps_d) || !(0.0..=1.0).contains(&eps_m) {
            return Err(RuleError::InvalidParam("error probabilities must lie in [0, 1]"));
        }
        Ok(PhenomenologicalParams { eps_d, eps_m })
    }

    /// The common convention `eps_d = eps_m = eps`.
    pub fn symmetric(eps: f64) -> Result<Self, RuleError> {
        Self::new(eps, eps)
    }

    pub fn is_noiseless(&self) -> bool {
        self.eps_d == 0.0 && self.eps_m == 0.0
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// The RNG stream for one trajectory of one experiment. Identical
/// `(seed, experiment, trajectory)` give the identical draw sequence
/// regardless of scheduling.
pub fn trajectory_rng(seed: u64, experiment: u64, trajectory: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(splitmix64(experiment).wrapping_add(trajectory));
    rng
}

/// Stable 64-bit content hash (FNV-1a), used to derive experiment ids and
/// config fingerprints.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// One Bernoulli draw. Exactly never for `p <= 0` and always for `p >= 1`.
#[inline]
pub fn bernoulli<R: RngCore + ?Sized>(rng: &mut R, p: f64) -> bool {
    if p <= 0.0 {
        return false;
    }
    if p >= 1.0 {
        return true;
    }
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    u < p
}

/// Independent error bits with probability `eps`, drawn in ascending edge
/// order.
pub fn sample_code_capacity<R: RngCore + ?Sized>(n: usize, eps: f64, rng: &mut R) -> EdgeBits {
    let mut e = EdgeBits::zeros(n);
    for i in 0..n {
        if bernoulli(rng, eps) {
            e.set(i, true);
        }
    }
    e
}

/// Flip each bit of a plane independently with probability `eps`, in
/// ascending site order.
pub fn flip_bits<R: RngCore + ?Sized>(plane: &mut BitPlane, eps: f64, rng: &mut R) {
    if eps <= 0.0 {
        return;
    }
    for i in 0..plane.len() {
        if bernoulli(rng, eps) {
            plane.flip(i);
        }
    }
}

/// Measured syndrome of a data plane: the true boundary with each bit
/// flipped independently with probability `eps_m`. The result may have odd
/// weight.
pub fn noisy_syndrome<R: RngCore + ?Sized>(
    data: &BitPlane,
    topology: &Topology,
    eps_m: f64,
    rng: &mut R,
) -> BitPlane {
    let mut synd = boundary_plane(data, topology);
    flip_bits(&mut synd, eps_m, rng);
    synd
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::defects_from_error;

    #[test]
    fn extreme_probabilities() {
        let mut rng = trajectory_rng(7, 0, 0);
        let zero = sample_code_capacity(64, 0.0, &mut rng);
        assert_eq!(zero.weight(), 0);
        let one = sample_code_capacity(64, 1.0, &mut rng);
        assert_eq!(one.weight(), 64);
    }

    #[test]
    fn empirical_density_within_binomial_bounds() {
        let n = 100_000usize;
        let eps = 0.1;
        let mut rng = trajectory_rng(12345, 1, 0);
        let e = sample_code_capacity(n, eps, &mut rng);
        let k = e.weight() as f64;
        let mean = n as f64 * eps;
        let sigma = (n as f64 * eps * (1.0 - eps)).sqrt();
        assert!((k - mean).abs() < 3.0 * sigma, "density {k} outside 3 sigma of {mean}");
    }

    #[test]
    fn syndrome_noise_extremes() {
        let top = Topology::Ring { n: 32 };
        let e = EdgeBits::from_edges(32, &[4, 10, 11]);
        let mut rng = trajectory_rng(3, 2, 5);
        let clean = noisy_syndrome(e.plane(), &top, 0.0, &mut rng);
        let expected: alloc::vec::Vec<i64> = defects_from_error(&e)
            .sites()
            .to_vec();
        let got: alloc::vec::Vec<i64> = clean.iter_ones().map(|i| i as i64).collect();
        assert_eq!(expected, got);
        let flipped = noisy_syndrome(e.plane(), &top, 1.0, &mut rng);
        assert_eq!(flipped.count_ones(), 32 - clean.count_ones());
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = trajectory_rng(9, 4, 17);
        let mut b = trajectory_rng(9, 4, 17);
        let mut c = trajectory_rng(9, 4, 18);
        let xs: alloc::vec::Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let ys: alloc::vec::Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        let zs: alloc::vec::Vec<u64> = (0..8).map(|_| c.next_u64()).collect();
        assert_eq!(xs, ys);
        assert_ne!(xs, zs);
    }
}
