//! L2 / sup-norm risks and the Monte Carlo harness around them.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::blocks::{check_event_t, compute_l, detection_threshold, BlockPartition, LValue};
use crate::error::{Error, Result};
use crate::estimators::{estimate, EstimatorConfig};
use crate::sequence::{observe, rescale_for_estimation, standard_noise, SeedSpec};
use crate::wavelet::{dyadic_exponent, evaluate_expansion, piecewise_values, CoefficientTree, FunctionSpec, TailEnergy};

/// Smallest grid used for sup-norm risks.
pub const MIN_LINF_GRID: usize = 1 << 14;

/// Losses of one estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskSample {
    /// `||f_hat - f||_2^2`, including the energy of `f` above the estimation level.
    pub l2_sq: f64,
    /// `max |f_hat - f|` over the grid midpoints.
    pub linf: f64,
    /// Whether the per-block noise-energy event held for this draw.
    pub event_t: bool,
}

/// `sum_{j <= J} (d_hat - d)^2 + tail_energy`.
pub fn l2_risk(estimate: &CoefficientTree, truth: &CoefficientTree, tail_energy: f64) -> Result<f64> {
    if estimate.max_level() != truth.max_level() {
        return Err(Error::Structural(format!(
            "estimate reaches level {} but truth reaches {}",
            estimate.max_level(),
            truth.max_level()
        )));
    }
    let sq: f64 = estimate
        .as_slice()
        .iter()
        .zip(truth.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sq + tail_energy)
}

/// Grid used for sup-norm risks at estimation level `max_level`: `max(2^(J+1), 2^14)`.
pub fn linf_grid_size(max_level: i32) -> usize {
    (1usize << (max_level + 1)).max(MIN_LINF_GRID)
}

/// `max_i |f_hat(x_i) - f(x_i)|` over the midpoints `x_i` of a uniform grid.
pub fn linf_risk(estimate: &CoefficientTree, truth: &FunctionSpec, grid_size: usize) -> Result<f64> {
    let fitted = evaluate_expansion(estimate, grid_size)?;
    let target = truth.eval_midpoints(grid_size);
    Ok(fitted
        .iter()
        .zip(&target)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Precomputed per-cell range of `f` on a grid, for repeated sup-norm distances to
/// functions that are constant on `cells` dyadic cells.
///
/// For a constant `v` on a cell, `max_i |v - f(x_i)|` is attained at the cell's
/// smallest or largest `f(x_i)`, so each distance costs `O(cells)` and equals the
/// direct grid maximum exactly.
#[derive(Debug, Clone)]
pub struct SupNormTarget {
    lo: Vec<f64>,
    hi: Vec<f64>,
    grid_size: usize,
}

impl SupNormTarget {
    pub fn new(truth: &FunctionSpec, cells: usize, grid_size: usize) -> Result<Self> {
        if !cells.is_power_of_two() || !grid_size.is_power_of_two() || grid_size < cells {
            return Err(Error::Sizing(format!(
                "need power-of-two grid ({grid_size}) at least as fine as the {cells} cells"
            )));
        }
        let values = truth.eval_midpoints(grid_size);
        let per_cell = grid_size / cells;
        let (lo, hi) = values
            .chunks(per_cell)
            .map(|c| {
                c.iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
            })
            .unzip();
        Ok(SupNormTarget { lo, hi, grid_size })
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn cells(&self) -> usize {
        self.lo.len()
    }

    /// Sup distance between `f` and the piecewise-constant function `values`.
    pub fn distance(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.lo.len(), "cell count mismatch");
        values
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(v, (lo, hi))| (v - lo).abs().max((v - hi).abs()))
            .fold(0.0, f64::max)
    }
}

/// One Monte Carlo experiment: a target, a noise level, an estimator and a γ-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub function: FunctionSpec,
    pub n: usize,
    pub sigma: f64,
    /// Estimator; its `gamma` is used when `gammas` is empty.
    pub config: EstimatorConfig,
    pub gammas: Vec<f64>,
    pub reps: usize,
    pub master_seed: u64,
    /// Sup-norm grid; defaults to [`linf_grid_size`].
    pub grid_size: Option<usize>,
}

impl Scenario {
    pub fn new(function: FunctionSpec, n: usize, sigma: f64, config: EstimatorConfig, reps: usize, master_seed: u64) -> Self {
        Scenario {
            function,
            n,
            sigma,
            config,
            gammas: Vec::new(),
            reps,
            master_seed,
            grid_size: None,
        }
    }

    pub fn with_gammas(mut self, gammas: Vec<f64>) -> Self {
        self.gammas = gammas;
        self
    }

    pub fn gamma_grid(&self) -> Vec<f64> {
        if self.gammas.is_empty() {
            vec![self.config.gamma]
        } else {
            self.gammas.clone()
        }
    }

    fn max_level(&self) -> Result<i32> {
        dyadic_exponent(self.n)
            .filter(|&j| j >= 2)
            .ok_or_else(|| Error::Sizing(format!("n must be a power of two >= 4, got {}", self.n)))
    }

    fn validate(&self) -> Result<()> {
        self.max_level()?;
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Domain(format!("sigma must be > 0, got {}", self.sigma)));
        }
        if self.reps == 0 {
            return Err(Error::Configuration("reps must be >= 1".into()));
        }
        for g in self.gamma_grid() {
            self.config.with_gamma(g).validate()?;
        }
        Ok(())
    }
}

/// Monte Carlo means and standard errors for one γ.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskSummary {
    pub function: String,
    pub n: usize,
    pub sigma: f64,
    pub gamma: f64,
    pub variant: String,
    pub block_zeroing: bool,
    pub reps: usize,
    /// Mean of `||f_hat - f||_2^2`.
    pub l2_mean: f64,
    pub l2_se: f64,
    pub linf_mean: f64,
    pub linf_se: f64,
    /// False when `reps == 1`; the standard errors are then reported as zero.
    pub se_defined: bool,
    /// Repetitions in which some block had noise energy `>= 6.95 ln n`.
    pub event_t_failures: usize,
    pub mean_zeroed: f64,
    /// True-function energy above level `J` included in every `l2_sq`.
    pub tail: TailEnergy,
}

impl RiskSummary {
    /// `E^{1/2} ||f_hat - f||_2^2`.
    pub fn l2_rmse(&self) -> f64 {
        self.l2_mean.sqrt()
    }

    /// Delta-method standard error of [`Self::l2_rmse`].
    pub fn l2_rmse_se(&self) -> f64 {
        if self.l2_mean > 0.0 {
            self.l2_se / (2.0 * self.l2_mean.sqrt())
        } else {
            0.0
        }
    }
}

/// Everything a repetition produces, one entry per γ.
#[derive(Debug, Clone, PartialEq)]
pub struct Repetition {
    pub samples: Vec<RiskSample>,
    pub zeroed: Vec<usize>,
}

/// A scenario with its truth, tail energy and sup-norm target precomputed.
#[derive(Debug, Clone)]
pub struct Harness {
    scenario: Scenario,
    gammas: Vec<f64>,
    max_level: i32,
    truth: CoefficientTree,
    tail: TailEnergy,
    target: SupNormTarget,
    partition: BlockPartition,
}

impl Harness {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let max_level = scenario.max_level()?;
        let truth = scenario.function.true_coefficients(max_level)?;
        let tail = scenario.function.tail_energy(max_level)?;
        let min_grid = linf_grid_size(max_level);
        let grid = scenario.grid_size.unwrap_or(min_grid);
        if grid < min_grid {
            return Err(Error::Sizing(format!("sup-norm grid {grid} is below the minimum {min_grid}")));
        }
        let target = SupNormTarget::new(&scenario.function, truth.resolution(), grid)?;
        Ok(Harness {
            gammas: scenario.gamma_grid(),
            scenario: scenario.clone(),
            max_level,
            truth,
            tail,
            target,
            partition: BlockPartition::for_sample_size(scenario.n),
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn truth(&self) -> &CoefficientTree {
        &self.truth
    }

    pub fn tail(&self) -> TailEnergy {
        self.tail
    }

    /// Runs repetition `rep`. Every γ sees the same noise draw.
    pub fn repetition(&self, rep: usize) -> Result<Repetition> {
        let s = &self.scenario;
        let eps = standard_noise(SeedSpec::new(s.master_seed, rep as u64), self.max_level);
        let obs = observe(&self.truth, &eps, s.n, s.sigma)?;
        let event_t = check_event_t(&eps, &self.partition);
        let mut samples = Vec::with_capacity(self.gammas.len());
        let mut zeroed = Vec::with_capacity(self.gammas.len());
        for &gamma in &self.gammas {
            let res = estimate(&obs, &s.config.with_gamma(gamma))?;
            let l2_sq = l2_risk(&res.coefficients, &self.truth, self.tail.total())?;
            let linf = self.target.distance(&piecewise_values(&res.coefficients));
            samples.push(RiskSample { l2_sq, linf, event_t });
            zeroed.push(res.total_zeroed());
        }
        Ok(Repetition { samples, zeroed })
    }

    /// All repetitions, in repetition order.
    pub fn repetitions(&self) -> Result<Vec<Repetition>> {
        (0..self.scenario.reps)
            .into_par_iter()
            .map(|rep| self.repetition(rep))
            .collect()
    }

    pub fn run(&self) -> Result<Vec<RiskSummary>> {
        let reps = self.repetitions()?;
        Ok(self.summarize(&reps))
    }

    /// Aggregates repetitions sequentially, so the result does not depend on scheduling.
    pub fn summarize(&self, reps: &[Repetition]) -> Vec<RiskSummary> {
        let s = &self.scenario;
        self.gammas
            .iter()
            .enumerate()
            .map(|(g, &gamma)| {
                let l2: Vec<f64> = reps.iter().map(|r| r.samples[g].l2_sq).collect();
                let linf: Vec<f64> = reps.iter().map(|r| r.samples[g].linf).collect();
                let (l2_mean, l2_se) = mean_and_se(&l2);
                let (linf_mean, linf_se) = mean_and_se(&linf);
                RiskSummary {
                    function: s.function.label(),
                    n: s.n,
                    sigma: s.sigma,
                    gamma,
                    variant: s.config.variant.label(),
                    block_zeroing: s.config.block_zeroing,
                    reps: reps.len(),
                    l2_mean,
                    l2_se,
                    linf_mean,
                    linf_se,
                    se_defined: reps.len() > 1,
                    event_t_failures: reps.iter().filter(|r| !r.samples[g].event_t).count(),
                    mean_zeroed: reps.iter().map(|r| r.zeroed[g] as f64).sum::<f64>() / reps.len() as f64,
                    tail: self.tail,
                }
            })
            .collect()
    }
}

/// Sample mean and `sd / sqrt(count)`; the standard error is zero for a single value.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let count = values.len() as f64;
    let mean = values.iter().sum::<f64>() / count;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1.0);
    (mean, (var / count).sqrt())
}

/// Risks over the γ-grid of `scenario`, one summary per γ in grid order.
pub fn monte_carlo(scenario: &Scenario) -> Result<Vec<RiskSummary>> {
    Harness::new(scenario)?.run()
}

/// Empirical law of `L_j` for one level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelDistribution {
    pub level: i32,
    /// Probability of every value in `{1..block_len, inf}`, zeros included.
    pub probabilities: BTreeMap<LValue, f64>,
}

impl LevelDistribution {
    pub fn prob(&self, value: LValue) -> f64 {
        self.probabilities.get(&value).copied().unwrap_or(0.0)
    }

    /// Most likely value (smallest on ties).
    pub fn mode(&self) -> LValue {
        let mut best = (LValue::Infinite, -1.0);
        for (&v, &p) in &self.probabilities {
            if p > best.1 {
                best = (v, p);
            }
        }
        best.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LjDistribution {
    pub n: usize,
    pub sigma: f64,
    pub gamma: f64,
    pub reps: usize,
    pub block_len: usize,
    pub levels: Vec<LevelDistribution>,
}

impl LjDistribution {
    pub fn level(&self, j: i32) -> &LevelDistribution {
        &self.levels[(j + 1) as usize]
    }
}

/// Empirical distribution of `(L_j)_j` under `scenario.config.gamma`.
pub fn lj_distribution(scenario: &Scenario) -> Result<LjDistribution> {
    scenario.validate()?;
    let max_level = scenario.max_level()?;
    let truth = scenario.function.true_coefficients(max_level)?;
    let partition = BlockPartition::for_sample_size(scenario.n);
    let threshold = detection_threshold(scenario.config.gamma, scenario.n);
    let levels = (max_level + 2) as usize;
    let support: Vec<LValue> = (1..=partition.block_len() as u32)
        .map(LValue::Finite)
        .chain([LValue::Infinite])
        .collect();
    let slot = |l: LValue| match l {
        LValue::Finite(v) => v as usize - 1,
        LValue::Infinite => support.len() - 1,
    };

    let draws: Vec<Vec<LValue>> = (0..scenario.reps)
        .into_par_iter()
        .map(|rep| -> Result<Vec<LValue>> {
            let eps = standard_noise(SeedSpec::new(scenario.master_seed, rep as u64), max_level);
            let obs = observe(&truth, &eps, scenario.n, scenario.sigma)?;
            let unit = rescale_for_estimation(&obs);
            Ok(unit.y().levels().map(|(_, y)| compute_l(y, &partition, threshold)).collect())
        })
        .collect::<Result<_>>()?;

    let mut counts = vec![vec![0usize; support.len()]; levels];
    for draw in &draws {
        for (level, &l) in draw.iter().enumerate() {
            counts[level][slot(l)] += 1;
        }
    }
    let reps = scenario.reps as f64;
    Ok(LjDistribution {
        n: scenario.n,
        sigma: scenario.sigma,
        gamma: scenario.config.gamma,
        reps: scenario.reps,
        block_len: partition.block_len(),
        levels: counts
            .into_iter()
            .enumerate()
            .map(|(i, c)| LevelDistribution {
                level: i as i32 - 1,
                probabilities: support.iter().zip(c).map(|(&v, c)| (v, c as f64 / reps)).collect(),
            })
            .collect(),
    })
}

/// What the risk is regressed against on the log scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateAxis {
    /// `log n`: L2 rate `n^{-2 beta/(2 beta + 1)}`.
    N,
    /// `log(n / ln n)`: sup-norm rate `(n / ln n)^{-beta/(2 beta + 1)}`.
    NOverLogN,
}

impl RateAxis {
    pub fn abscissa(&self, n: usize) -> f64 {
        let n = n as f64;
        match self {
            RateAxis::N => n,
            RateAxis::NOverLogN => n / n.ln(),
        }
    }
}

/// Least-squares line through `(log x, log y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; NaN with only two points.
    pub slope_se: f64,
    pub points: usize,
}

pub fn rate_regression(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.len() != ys.len() {
        return Err(Error::Structural(format!("{} abscissas for {} risks", xs.len(), ys.len())));
    }
    if xs.len() < 2 {
        return Err(Error::Degenerate(format!("need at least 2 points, got {}", xs.len())));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Domain("log-log regression needs positive finite values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all abscissas coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_se = if lx.len() > 2 {
        let rss: f64 = lx
            .iter()
            .zip(&ly)
            .map(|(x, y)| {
                let r = y - intercept - slope * x;
                r * r
            })
            .sum();
        (rss / (k - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    Ok(SlopeFit {
        slope,
        intercept,
        slope_se,
        points: lx.len(),
    })
}

/// Fits `log risk` against `log axis(n)`.
pub fn fit_rate(ns: &[usize], risks: &[f64], axis: RateAxis) -> Result<SlopeFit> {
    let xs: Vec<f64> = ns.iter().map(|&n| axis.abscissa(n)).collect();
    rate_regression(&xs, risks)
}
