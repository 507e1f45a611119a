//! Wavelet coefficient estimators.
//!
//! Every estimator runs on the unit-noise problem: observations are divided by
//! `sigma`, thresholds are computed as if `sigma = 1`, and the estimate is
//! multiplied back by `sigma`.

use crate::blocks::{compute_l, detection_threshold, truncation_threshold, BlockPartition, LValue, LevelStatistics};
use crate::error::{Error, Result};
use crate::sequence::{rescale_for_estimation, NoisyCoefficients};
use crate::wavelet::CoefficientTree;

/// Default detection constant.
pub const DEFAULT_GAMMA: f64 = 7.0;

/// Levels `j <= KEEP_COARSE_MAX_LEVEL` are passed through when `keep_coarse` is set.
pub const KEEP_COARSE_MAX_LEVEL: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Variant {
    /// Block detection plus clamping of every coefficient at `t_j`.
    TruncatedBlock,
    /// Block detection only: detected levels are kept verbatim.
    PlainBlock,
    /// Known-smoothness projection onto `[-c 2^{-j(2 beta+1)/2}, c 2^{-j(2 beta+1)/2}]`.
    Projection { beta: f64, q: f64 },
    /// Term-by-term hard thresholding at `lambda_mult * sigma * sqrt(2 ln n / n)`.
    Hard { lambda_mult: f64 },
}

impl Variant {
    pub fn label(&self) -> String {
        match self {
            Variant::TruncatedBlock => "truncated-block".into(),
            Variant::PlainBlock => "plain-block".into(),
            Variant::Projection { beta, q } => format!("projection:{beta}:{q}"),
            Variant::Hard { lambda_mult } => format!("hard:{lambda_mult}"),
        }
    }

    pub fn is_block(&self) -> bool {
        matches!(self, Variant::TruncatedBlock | Variant::PlainBlock)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    pub gamma: f64,
    pub variant: Variant,
    /// Zero every coefficient whose own block has `sum Y^2 < gamma ln n / n`.
    pub block_zeroing: bool,
    /// Pass levels `-1..=2` through untouched (block variants only).
    pub keep_coarse: bool,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig::simulation(Variant::TruncatedBlock)
    }
}

impl EstimatorConfig {
    /// Form used in the Monte Carlo experiments: block zeroing on.
    pub fn simulation(variant: Variant) -> Self {
        EstimatorConfig {
            gamma: DEFAULT_GAMMA,
            variant,
            block_zeroing: true,
            keep_coarse: false,
        }
    }

    /// Unmodified form analysed in theory: block zeroing off.
    pub fn theoretical(variant: Variant) -> Self {
        EstimatorConfig {
            block_zeroing: false,
            ..Self::simulation(variant)
        }
    }

    pub fn with_gamma(self, gamma: f64) -> Self {
        EstimatorConfig { gamma, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::Configuration(format!("gamma must be > 0, got {}", self.gamma)));
        }
        match self.variant {
            Variant::Projection { beta, q } if !(beta > 0.0 && q > 0.0 && beta.is_finite() && q.is_finite()) => Err(
                Error::Configuration(format!("projection needs beta, Q > 0, got {beta}, {q}")),
            ),
            Variant::Hard { lambda_mult } if !(lambda_mult >= 0.0 && lambda_mult.is_finite()) => Err(
                Error::Configuration(format!("hard threshold multiplier must be >= 0, got {lambda_mult}")),
            ),
            _ => Ok(()),
        }
    }
}

/// Estimated coefficients with per-level diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    /// Estimate of `d_{j,k}` on the original scale.
    pub coefficients: CoefficientTree,
    /// `(L_j, t_j)` on the unit-noise scale; only for the block estimators.
    pub statistics: Option<LevelStatistics>,
    /// Per level `-1..=J`: coefficients whose magnitude was reduced to the clamp.
    pub clamped: Vec<usize>,
    /// Per level `-1..=J`: coefficients forced to zero.
    pub zeroed: Vec<usize>,
    /// Noise level the estimate was unscaled by; `|d| <= sigma * t_j` on clamped levels.
    pub sigma: f64,
}

impl EstimateResult {
    pub fn total_zeroed(&self) -> usize {
        self.zeroed.iter().sum()
    }

    pub fn total_clamped(&self) -> usize {
        self.clamped.iter().sum()
    }
}

/// `sign(y) * min(|y|, t)`.
#[inline]
pub fn clamp_coefficient(y: f64, t: f64) -> f64 {
    if y.abs() > t {
        t.copysign(y)
    } else {
        y
    }
}

/// Runs whichever estimator `cfg.variant` names.
pub fn estimate(obs: &NoisyCoefficients, cfg: &EstimatorConfig) -> Result<EstimateResult> {
    cfg.validate()?;
    match cfg.variant {
        Variant::TruncatedBlock => Ok(block_threshold(obs, cfg, true)),
        Variant::PlainBlock => Ok(block_threshold(obs, cfg, false)),
        Variant::Projection { beta, q } => projection_estimator(obs, beta, q),
        Variant::Hard { lambda_mult } => hard_threshold(obs, lambda_mult),
    }
}

/// Truncated block thresholding: `d = sign(Y) (|Y| ^ t_j)` on every level.
pub fn truncated_block_threshold(obs: &NoisyCoefficients, cfg: &EstimatorConfig) -> Result<EstimateResult> {
    expect_variant(cfg, Variant::TruncatedBlock)?;
    Ok(block_threshold(obs, cfg, true))
}

/// Plain block thresholding: levels with `L_j < inf` are kept verbatim.
pub fn plain_block_threshold(obs: &NoisyCoefficients, cfg: &EstimatorConfig) -> Result<EstimateResult> {
    expect_variant(cfg, Variant::PlainBlock)?;
    Ok(block_threshold(obs, cfg, false))
}

fn expect_variant(cfg: &EstimatorConfig, variant: Variant) -> Result<()> {
    cfg.validate()?;
    if cfg.variant != variant {
        return Err(Error::Configuration(format!(
            "expected variant {}, got {}",
            variant.label(),
            cfg.variant.label()
        )));
    }
    Ok(())
}

fn block_threshold(obs: &NoisyCoefficients, cfg: &EstimatorConfig, truncate: bool) -> EstimateResult {
    let unit = rescale_for_estimation(obs);
    let y = unit.y();
    let n = obs.n();
    let partition = BlockPartition::for_sample_size(n);
    let threshold = detection_threshold(cfg.gamma, n);
    let levels = (y.max_level() + 2) as usize;

    let mut est = CoefficientTree::zeros(y.max_level());
    let mut stats = LevelStatistics {
        l: Vec::with_capacity(levels),
        t: Vec::with_capacity(levels),
    };
    let mut clamped = vec![0; levels];
    let mut zeroed = vec![0; levels];

    for (j, level) in y.levels() {
        let idx = (j + 1) as usize;
        let l = compute_l(level, &partition, threshold);
        let t = truncation_threshold(l, cfg.gamma, n);
        stats.l.push(l);
        stats.t.push(t);
        let out = est.level_mut(j);

        if cfg.keep_coarse && j <= KEEP_COARSE_MAX_LEVEL {
            out.copy_from_slice(level);
            continue;
        }
        if l == LValue::Infinite {
            // `out` is already zero.
            zeroed[idx] = level.len();
            continue;
        }
        for range in partition.blocks(level.len()) {
            let block = &level[range.clone()];
            if cfg.block_zeroing && block.iter().map(|v| v * v).sum::<f64>() < threshold {
                zeroed[idx] += block.len();
                continue;
            }
            for (o, &v) in out[range].iter_mut().zip(block) {
                if truncate && v.abs() > t {
                    *o = t.copysign(v);
                    clamped[idx] += 1;
                } else {
                    *o = v;
                }
            }
        }
    }

    EstimateResult {
        coefficients: est.scaled(obs.sigma()),
        statistics: Some(stats),
        clamped,
        zeroed,
        sigma: obs.sigma(),
    }
}

/// Highest level kept by the projection estimator: `floor(log2(n) / (2 beta + 1))`,
/// i.e. `2^{J_n} ~ n^{1/(2 beta + 1)}` with constant one.
pub fn projection_cutoff(n: usize, beta: f64) -> i32 {
    ((n as f64).log2() / (2.0 * beta + 1.0)).floor() as i32
}

/// `floor(log2(n / ln n) / (2 beta + 1))`: the level up to which coefficients still
/// carry sup-norm signal, `2^j ~ (n / ln n)^{1/(2 beta + 1)}`.
pub fn sup_norm_cutoff(n: usize, beta: f64) -> i32 {
    let n = n as f64;
    ((n / n.ln()).log2() / (2.0 * beta + 1.0)).floor() as i32
}

/// Constant `c` with `|d_{j,k}| <= c 2^{-j(2 beta + 1)/2}` for Haar coefficients of a
/// function whose Hoelder norm is at most `q`, valid for `0 < beta <= 1`.
///
/// Details satisfy `|d_{j,k}| <= q 2^{-(1+beta)} 2^{-j(2 beta + 1)/2}` and the scaling
/// coefficient `|c_0| <= q`; `q 2^{-beta - 1/2}` covers both.
pub fn haar_coefficient_bound(beta: f64, q: f64) -> f64 {
    q * 2f64.powf(-beta - 0.5)
}

/// Known-smoothness estimator: clamp `Y_{j,k}` at `c 2^{-j(2 beta+1)/2}` for
/// `j <= J_n(beta)` and drop all finer levels.
pub fn projection_estimator(obs: &NoisyCoefficients, beta: f64, q: f64) -> Result<EstimateResult> {
    EstimatorConfig::theoretical(Variant::Projection { beta, q }).validate()?;
    let unit = rescale_for_estimation(obs);
    let y = unit.y();
    let cutoff = projection_cutoff(obs.n(), beta);
    // Bound for the coefficients of f / sigma.
    let c = haar_coefficient_bound(beta, q / obs.sigma());
    let levels = (y.max_level() + 2) as usize;
    let mut est = CoefficientTree::zeros(y.max_level());
    let mut clamped = vec![0; levels];
    let mut zeroed = vec![0; levels];
    for (j, level) in y.levels() {
        let idx = (j + 1) as usize;
        if j > cutoff {
            zeroed[idx] = level.len();
            continue;
        }
        let bound = c * 2f64.powf(-(j as f64) * (2.0 * beta + 1.0) / 2.0);
        for (o, &v) in est.level_mut(j).iter_mut().zip(level) {
            if v.abs() > bound {
                clamped[idx] += 1;
            }
            *o = clamp_coefficient(v, bound);
        }
    }
    Ok(EstimateResult {
        coefficients: est.scaled(obs.sigma()),
        statistics: None,
        clamped,
        zeroed,
        sigma: obs.sigma(),
    })
}

/// Keep `Y_{j,k}` iff `|Y_{j,k}| > lambda_mult * sigma * sqrt(2 ln n / n)`.
pub fn hard_threshold(obs: &NoisyCoefficients, lambda_mult: f64) -> Result<EstimateResult> {
    EstimatorConfig::theoretical(Variant::Hard { lambda_mult }).validate()?;
    let unit = rescale_for_estimation(obs);
    let y = unit.y();
    let n = obs.n() as f64;
    let lambda = lambda_mult * (2.0 * n.ln() / n).sqrt();
    let levels = (y.max_level() + 2) as usize;
    let mut est = CoefficientTree::zeros(y.max_level());
    let mut zeroed = vec![0; levels];
    for (j, level) in y.levels() {
        for (o, &v) in est.level_mut(j).iter_mut().zip(level) {
            if v.abs() > lambda {
                *o = v;
            } else {
                zeroed[(j + 1) as usize] += 1;
            }
        }
    }
    Ok(EstimateResult {
        coefficients: est.scaled(obs.sigma()),
        statistics: None,
        clamped: vec![0; levels],
        zeroed,
        sigma: obs.sigma(),
    })
}
