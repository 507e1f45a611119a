//! Regression functions with exactly known Haar coefficients.

use std::f64::consts::{PI, SQRT_2};
use std::path::Path;
use std::sync::Arc;

use super::haar::{analyze, evaluate_expansion};
use super::tree::CoefficientTree;
use crate::blocks::block_len;
use crate::error::{Error, Result};

/// Number of levels above the estimation level whose energy is summed exactly
/// before the analytic remainder bound takes over.
pub const TAIL_EXACT_LEVELS: i32 = 8;

/// A target function on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    /// `f(x) = sqrt(2) sin(2 pi x)`.
    Sine,
    /// Equal-magnitude wavelets on every full-length block of one level.
    BlockSpike(BlockSpike),
    /// Piecewise-constant function with the given values on `2^m` equal cells.
    Samples(Arc<[f64]>),
}

/// `f_j = sum_{k in full blocks} c 2^{-j(2 beta + 1)/2} psi_{j,k}`.
///
/// `c` is found by starting from `Q / (2 ||psi||_proxy)` and halving until the
/// finite-difference Hoelder proxy of `f_j` is at most `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpike {
    pub beta: f64,
    pub q: f64,
    pub level: u32,
    pub block_len: usize,
    /// Certified constant `c(beta, Q)`.
    pub c: f64,
    /// Hoelder proxy of the resulting function (always `<= q`).
    pub holder_proxy: f64,
}

/// Energy of the true coefficients above the estimation level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEnergy {
    /// Exact energy of the levels that were summed.
    pub computed: f64,
    /// Upper bound on everything above the summed levels (zero when exact).
    pub remainder_bound: f64,
}

impl TailEnergy {
    pub fn total(&self) -> f64 {
        self.computed + self.remainder_bound
    }
}

impl BlockSpike {
    /// Builds the spike function at `level` with blocks of `block_len`.
    pub fn new(beta: f64, q: f64, level: u32, block_len: usize) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) || !(q > 0.0 && q.is_finite()) {
            return Err(Error::Configuration(format!(
                "block-spike needs beta > 0 and Q > 0, got beta = {beta}, Q = {q}"
            )));
        }
        if level < 1 {
            return Err(Error::Configuration("block-spike needs level >= 1".into()));
        }
        if level > 30 {
            return Err(Error::Configuration(format!("block-spike level {level} is too fine")));
        }
        if block_len == 0 || (1usize << level) < block_len {
            return Err(Error::Configuration(format!(
                "level {level} has no full block of length {block_len}"
            )));
        }
        let psi_proxy = holder_proxy(&[1.0, -1.0], beta);
        let mut spike = BlockSpike {
            beta,
            q,
            level,
            block_len,
            c: q / (2.0 * psi_proxy),
            holder_proxy: f64::INFINITY,
        };
        for _ in 0..64 {
            let values = evaluate_expansion(&spike.coefficients(level as i32), 1usize << (level + 1))?;
            spike.holder_proxy = holder_proxy(&values, beta);
            if spike.holder_proxy <= q {
                return Ok(spike);
            }
            spike.c *= 0.5;
        }
        Err(Error::Configuration(format!(
            "could not certify a block-spike constant for beta = {beta}, Q = {q}"
        )))
    }

    /// Same construction with the block length derived from the sample size.
    pub fn for_sample_size(beta: f64, q: f64, level: u32, n: usize) -> Result<Self> {
        Self::new(beta, q, level, block_len(n))
    }

    /// Magnitude of every nonzero coefficient.
    pub fn amplitude(&self) -> f64 {
        self.c * 2f64.powf(-(self.level as f64) * (2.0 * self.beta + 1.0) / 2.0)
    }

    /// Indices at `level` belonging to a full-length block.
    pub fn support_len(&self) -> usize {
        let size = 1usize << self.level;
        (size / self.block_len) * self.block_len
    }

    fn coefficients(&self, max_level: i32) -> CoefficientTree {
        let mut tree = CoefficientTree::zeros(max_level);
        if (self.level as i32) <= max_level {
            let amp = self.amplitude();
            let full = self.support_len();
            tree.level_mut(self.level as i32)[..full].fill(amp);
        }
        tree
    }

    fn eval(&self, x: f64) -> f64 {
        let scale = (1u64 << self.level) as f64;
        let pos = x * scale;
        let k = pos.floor();
        if k < 0.0 || k as usize >= self.support_len() {
            return 0.0;
        }
        let sign = if pos - k < 0.5 { 1.0 } else { -1.0 };
        sign * self.amplitude() * scale.sqrt()
    }
}

/// Finite-difference Hoelder norm proxy of grid values on `[0, 1]` midpoints:
/// `max |v| + max_{i != l} |v_i - v_l| / |x_i - x_l|^beta` over lags up to 64.
///
/// Only the fractional part of `beta` enters (`[beta] = 0` for `beta <= 1`);
/// for piecewise-constant functions the largest ratio comes from the shortest lag.
pub fn holder_proxy(values: &[f64], beta: f64) -> f64 {
    let h = 1.0 / values.len() as f64;
    let exponent = beta - (beta.ceil() - 1.0);
    let sup = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut ratio = 0.0f64;
    for lag in 1..values.len().min(65) {
        let dist = (lag as f64 * h).powf(exponent);
        for w in 0..values.len() - lag {
            ratio = ratio.max((values[w + lag] - values[w]).abs() / dist);
        }
    }
    sup + ratio
}

/// Sine Haar coefficient in a cancellation-free form:
/// `d_{j,k} = -2^{j/2} (2 sqrt(2) / pi) cos(2 pi m) sin^2(pi / 2^{j+1})`, `m` the cell midpoint.
fn sine_detail(j: i32, k: usize) -> f64 {
    let scale = (1u64 << j) as f64;
    let mid = (k as f64 + 0.5) / scale;
    let s = (PI / (2.0 * scale)).sin();
    -scale.sqrt() * (2.0 * SQRT_2 / PI) * (2.0 * PI * mid).cos() * s * s
}

/// Closed-form `sum_k d_{j,k}^2` for the sine target.
fn sine_level_energy(j: i32) -> f64 {
    match j {
        -1 | 1 => 0.0,
        0 => 8.0 / (PI * PI),
        _ => {
            let scale = (1u64 << j) as f64;
            let s = (PI / (2.0 * scale)).sin();
            scale * scale * 4.0 / (PI * PI) * s.powi(4)
        }
    }
}

impl FunctionSpec {
    pub fn block_spike(beta: f64, q: f64, level: u32, n: usize) -> Result<Self> {
        BlockSpike::for_sample_size(beta, q, level, n).map(FunctionSpec::BlockSpike)
    }

    pub fn samples(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || !values.len().is_power_of_two() {
            return Err(Error::Sizing(format!(
                "sampled function needs a power-of-two length, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("sampled function has non-finite values".into()));
        }
        Ok(FunctionSpec::Samples(values.into()))
    }

    pub fn samples_from_file(path: &Path) -> Result<Self> {
        Self::samples(crate::signal::read_signal(path)?)
    }

    /// Short label, e.g. `sine` or `block-spike:1:1:5`.
    pub fn label(&self) -> String {
        match self {
            FunctionSpec::Sine => "sine".into(),
            FunctionSpec::BlockSpike(s) => format!("block-spike:{}:{}:{}", s.beta, s.q, s.level),
            FunctionSpec::Samples(v) => format!("samples[{}]", v.len()),
        }
    }

    /// Exact Haar coefficients up to `max_level`.
    pub fn true_coefficients(&self, max_level: i32) -> Result<CoefficientTree> {
        if max_level < -1 || max_level > 30 {
            return Err(Error::Configuration(format!("max_level {max_level} out of range")));
        }
        match self {
            FunctionSpec::Sine => {
                let mut tree = CoefficientTree::zeros(max_level);
                for j in 0..=max_level {
                    for (k, d) in tree.level_mut(j).iter_mut().enumerate() {
                        *d = sine_detail(j, k);
                    }
                }
                Ok(tree)
            }
            FunctionSpec::BlockSpike(s) => Ok(s.coefficients(max_level)),
            FunctionSpec::Samples(values) => Ok(samples_tree(values)?.resized(max_level)),
        }
    }

    /// Energy `sum_k d_{j,k}^2` of level `j`.
    pub fn level_energy(&self, j: i32) -> Result<f64> {
        match self {
            FunctionSpec::Sine => Ok(sine_level_energy(j)),
            FunctionSpec::BlockSpike(s) => Ok(if j == s.level as i32 {
                s.support_len() as f64 * s.amplitude().powi(2)
            } else {
                0.0
            }),
            FunctionSpec::Samples(values) => {
                let tree = samples_tree(values)?;
                Ok(if j <= tree.max_level() {
                    tree.level(j).iter().map(|d| d * d).sum()
                } else {
                    0.0
                })
            }
        }
    }

    /// Energy of all levels strictly above `level`.
    ///
    /// Block-spike and sampled targets have finitely many nonzero levels, so their
    /// tail is exact. For the sine the next [`TAIL_EXACT_LEVELS`] levels are summed
    /// and the rest is bounded by the geometric decay of the level energies.
    pub fn tail_energy(&self, level: i32) -> Result<TailEnergy> {
        match self {
            FunctionSpec::Sine => {
                let last = level + TAIL_EXACT_LEVELS;
                let computed = ((level + 1)..=last).map(sine_level_energy).sum();
                // E_{j+1}/E_j = 1/(4 cos^4(pi/2^{j+2})), decreasing in j.
                let first_skipped = last + 1;
                let ratio = 1.0 / (4.0 * (PI / 2f64.powi(first_skipped + 2)).cos().powi(4));
                let remainder_bound = sine_level_energy(first_skipped.max(2)) / (1.0 - ratio);
                Ok(TailEnergy { computed, remainder_bound })
            }
            FunctionSpec::BlockSpike(s) => Ok(TailEnergy {
                computed: if (s.level as i32) > level { self.level_energy(s.level as i32)? } else { 0.0 },
                remainder_bound: 0.0,
            }),
            FunctionSpec::Samples(values) => {
                let tree = samples_tree(values)?;
                let computed = tree
                    .levels()
                    .filter(|(j, _)| *j > level)
                    .flat_map(|(_, l)| l.iter())
                    .map(|d| d * d)
                    .sum();
                Ok(TailEnergy { computed, remainder_bound: 0.0 })
            }
        }
    }

    /// Point evaluation of `f`.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            FunctionSpec::Sine => SQRT_2 * (2.0 * PI * x).sin(),
            FunctionSpec::BlockSpike(s) => s.eval(x),
            FunctionSpec::Samples(values) => {
                let idx = ((x * values.len() as f64).floor() as usize).min(values.len() - 1);
                values[idx]
            }
        }
    }

    /// `f` at the midpoints of a uniform grid.
    pub fn eval_midpoints(&self, grid_size: usize) -> Vec<f64> {
        let h = 1.0 / grid_size as f64;
        (0..grid_size).map(|i| self.eval((i as f64 + 0.5) * h)).collect()
    }
}

fn samples_tree(values: &[f64]) -> Result<CoefficientTree> {
    let tree = analyze(values)?;
    Ok(tree.scaled(1.0 / (values.len() as f64).sqrt()))
}
