//! Gaussian sequence-space observations `Y_{j,k} = d_{j,k} + sigma n^{-1/2} eps_{j,k}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::wavelet::{dyadic_exponent, CoefficientTree};

/// Observed coefficients together with the effective sample size and noise level.
///
/// Simulated observations always carry levels `-1..=J` with `2^J = n`. Observations
/// built from `n` sampled values only reach level `J - 1`, so the shape check
/// accepts any maximal level up to `log2(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyCoefficients {
    y: CoefficientTree,
    n: usize,
    sigma: f64,
}

impl NoisyCoefficients {
    pub fn new(y: CoefficientTree, n: usize, sigma: f64) -> Result<Self> {
        let log_n = dyadic_exponent(n)
            .filter(|&e| e >= 1)
            .ok_or_else(|| Error::Sizing(format!("n must be a power of two >= 2, got {n}")))?;
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Domain(format!("sigma must be finite and > 0, got {sigma}")));
        }
        if y.max_level() > log_n {
            return Err(Error::Structural(format!(
                "observations reach level {} but 2^J = n allows at most {log_n}",
                y.max_level()
            )));
        }
        Ok(NoisyCoefficients { y, n, sigma })
    }

    pub fn y(&self) -> &CoefficientTree {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn into_tree(self) -> CoefficientTree {
        self.y
    }
}

/// Identifies the noise of one Monte Carlo repetition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub repetition: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, repetition: u64) -> Self {
        SeedSpec { master_seed, repetition }
    }

    /// ChaCha8 keyed on `(master_seed, repetition)`, on the stream of level `j`.
    ///
    /// The level's normals are read in index order from that stream, so the value
    /// of `eps_{j,k}` depends only on `(master_seed, repetition, j, k)`.
    fn level_rng(&self, j: i32) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.repetition.to_le_bytes());
        key[16..].copy_from_slice(b"tbt-white-noise\0");
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream((j + 1) as u64);
        rng
    }
}

/// I.i.d. standard normal `eps_{j,k}` for levels `-1..=max_level`.
pub fn standard_noise(seed: SeedSpec, max_level: i32) -> CoefficientTree {
    let mut eps = CoefficientTree::zeros(max_level);
    for j in -1..=max_level {
        let mut rng = seed.level_rng(j);
        for e in eps.level_mut(j) {
            *e = rng.sample(StandardNormal);
        }
    }
    eps
}

/// Observations of `truth` in the white-noise model with `2^J = n`.
///
/// `truth` is cut to (or zero-padded up to) level `J` first.
pub fn simulate(truth: &CoefficientTree, n: usize, sigma: f64, seed: SeedSpec) -> Result<NoisyCoefficients> {
    let j_max = dyadic_exponent(n)
        .ok_or_else(|| Error::Sizing(format!("n must be a power of two, got {n}")))?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!("sigma must be finite and > 0, got {sigma}")));
    }
    let eps = standard_noise(seed, j_max);
    observe(truth, &eps, n, sigma)
}

/// `truth + sigma / sqrt(n) * eps` for a given noise tree.
pub fn observe(truth: &CoefficientTree, eps: &CoefficientTree, n: usize, sigma: f64) -> Result<NoisyCoefficients> {
    let noise_scale = sigma / (n as f64).sqrt();
    let mut y = truth.resized(eps.max_level());
    for (y, e) in y.as_mut_slice().iter_mut().zip(eps.as_slice()) {
        *y += noise_scale * e;
    }
    NoisyCoefficients::new(y, n, sigma)
}

/// Divides the observations by `sigma`, giving the unit-noise problem.
pub fn rescale_for_estimation(obs: &NoisyCoefficients) -> NoisyCoefficients {
    let sigma = obs.sigma;
    let y = CoefficientTree::from_raw(
        obs.y.as_slice().iter().map(|v| v / sigma).collect(),
        obs.y.max_level(),
    );
    NoisyCoefficients { y, n: obs.n, sigma: 1.0 }
}

/// Maps an estimate of `f / sigma` back to an estimate of `f`.
pub fn unscale_estimate(estimate: &CoefficientTree, sigma: f64) -> CoefficientTree {
    estimate.scaled(sigma)
}
