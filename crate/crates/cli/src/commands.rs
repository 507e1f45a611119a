use std::path::PathBuf;

use tbt::blocks::LValue;
use tbt::estimators::estimate;
use tbt::risk::{fit_rate, lj_distribution, monte_carlo, RateAxis, RiskSummary, Scenario, SlopeFit};
use tbt::signal::{format_f64, read_signal};
use tbt::{analyze, synthesize, CoefficientTree, EstimatorConfig, NoisyCoefficients, Variant};

use crate::args::{Command, DenoiseArgs, GammaSweepArgs, LjDistArgs, RatesArgs};
use crate::CliError;

/// Files to write (in order) and text for stdout.
#[derive(Debug, Default)]
pub struct Output {
    pub files: Vec<(PathBuf, String)>,
    pub stdout: String,
}

/// Consistency constant of the MAD for Gaussian data.
pub const MAD_SCALE: f64 = 1.4826;

pub fn execute(cmd: &Command) -> Result<Output, CliError> {
    match cmd {
        Command::GammaSweep(a) => gamma_sweep(a),
        Command::LjDist(a) => lj_dist(a),
        Command::Rates(a) => rates(a),
        Command::Denoise(a) => denoise(a),
        Command::Replay(_) => Err(CliError::Invariant("replay must be resolved before execution".into())),
    }
}

fn csv_row(fields: &[String]) -> String {
    let mut s = fields.join(",");
    s.push('\n');
    s
}

fn check_finite(values: &[f64], what: &str) -> Result<(), CliError> {
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(CliError::Invariant(format!("{what} produced a negative or non-finite risk")));
    }
    Ok(())
}

fn validate_config(cfg: &EstimatorConfig) -> Result<(), CliError> {
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))
}

fn gamma_sweep(a: &GammaSweepArgs) -> Result<Output, CliError> {
    let gammas = a.gammas();
    if gammas.is_empty() {
        return Err(CliError::Usage(format!(
            "empty gamma grid: gamma-min {} exceeds gamma-max {}",
            a.gamma_min, a.gamma_max
        )));
    }
    let cfg = a.estimator.config(a.variant.0, gammas[0]);
    for &g in &gammas {
        validate_config(&cfg.with_gamma(g))?;
    }
    let function = a.function.build(a.n)?;
    let scenario = Scenario::new(function, a.n, a.sigma, cfg, a.reps as usize, a.seed).with_gammas(gammas);
    let summaries = monte_carlo(&scenario)?;

    let mut csv = csv_row(&["gamma", "n", "sigma", "reps", "l2_rmse", "l2_se", "linf_mean", "linf_se"].map(String::from));
    for s in &summaries {
        check_finite(&[s.l2_mean, s.l2_se, s.linf_mean, s.linf_se], "gamma-sweep")?;
        csv.push_str(&csv_row(&[
            format_f64(s.gamma),
            s.n.to_string(),
            format_f64(s.sigma),
            s.reps.to_string(),
            format_f64(s.l2_rmse()),
            format_f64(s.l2_rmse_se()),
            format_f64(s.linf_mean),
            format_f64(s.linf_se),
        ]));
    }
    let argmin = |key: fn(&RiskSummary) -> f64| {
        summaries
            .iter()
            .min_by(|x, y| key(x).total_cmp(&key(y)))
            .map(|s| s.gamma)
            .unwrap_or(f64::NAN)
    };
    let mut stdout = format!(
        "wrote {} rows to {}; L2 minimal at gamma = {}, Linf minimal at gamma = {}\n",
        summaries.len(),
        a.out.display(),
        argmin(|s| s.l2_mean),
        argmin(|s| s.linf_mean)
    );
    if a.reps == 1 {
        stdout.push_str("note: reps = 1, standard errors are undefined and reported as 0\n");
    }
    Ok(Output {
        files: vec![(a.out.clone(), csv)],
        stdout,
    })
}

fn lj_dist(a: &LjDistArgs) -> Result<Output, CliError> {
    let cfg = EstimatorConfig::default().with_gamma(a.gamma);
    validate_config(&cfg)?;
    let function = a.function.build(a.n)?;
    let scenario = Scenario::new(function, a.n, a.sigma, cfg, a.reps as usize, a.seed);
    let dist = lj_distribution(&scenario)?;

    let mut csv = csv_row(&["level", "L_value", "probability"].map(String::from));
    for level in &dist.levels {
        let total: f64 = level.probabilities.values().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(CliError::Invariant(format!(
                "probabilities of level {} sum to {total}",
                level.level
            )));
        }
        for (value, p) in &level.probabilities {
            csv.push_str(&csv_row(&[level.level.to_string(), value.to_string(), format_f64(*p)]));
        }
    }
    let stdout = format!(
        "wrote {} levels (block length {}) to {}\n",
        dist.levels.len(),
        dist.block_len,
        a.out.display()
    );
    Ok(Output {
        files: vec![(a.out.clone(), csv)],
        stdout,
    })
}

fn fit_row(risk: &str, axis: &str, fit: &SlopeFit) -> String {
    csv_row(&[
        risk.to_string(),
        axis.to_string(),
        format_f64(fit.slope),
        format_f64(fit.slope_se),
        fit.points.to_string(),
    ])
}

fn rates(a: &RatesArgs) -> Result<Output, CliError> {
    let cfg = a.estimator.config(a.variant.0, a.gamma);
    validate_config(&cfg)?;
    let ns = &a.n_grid.0;
    let mut primary = Vec::with_capacity(ns.len());
    let mut plain = Vec::new();
    for &n in ns {
        let function = a.function.build(n)?;
        let scenario = Scenario::new(function, n, a.sigma, cfg, a.reps as usize, a.seed);
        primary.push(monte_carlo(&scenario)?.remove(0));
        if a.compare_plain {
            let scenario = Scenario {
                config: EstimatorConfig { variant: Variant::PlainBlock, ..cfg },
                ..scenario
            };
            plain.push(monte_carlo(&scenario)?.remove(0));
        }
    }

    let mut header: Vec<String> = ["n", "l2_mse", "l2_se", "linf_mean", "linf_se"].map(String::from).to_vec();
    if a.compare_plain {
        header.extend(
            ["plain_l2_mse", "plain_l2_se", "plain_linf_mean", "plain_linf_se", "linf_ratio"].map(String::from),
        );
    }
    let mut csv = csv_row(&header);
    for (i, s) in primary.iter().enumerate() {
        check_finite(&[s.l2_mean, s.l2_se, s.linf_mean, s.linf_se], "rates")?;
        let mut row = vec![
            s.n.to_string(),
            format_f64(s.l2_mean),
            format_f64(s.l2_se),
            format_f64(s.linf_mean),
            format_f64(s.linf_se),
        ];
        if let Some(p) = plain.get(i) {
            check_finite(&[p.l2_mean, p.l2_se, p.linf_mean, p.linf_se], "rates")?;
            row.extend([
                format_f64(p.l2_mean),
                format_f64(p.l2_se),
                format_f64(p.linf_mean),
                format_f64(p.linf_se),
                format_f64(p.linf_mean / s.linf_mean),
            ]);
        }
        csv.push_str(&csv_row(&row));
    }

    let l2: Vec<f64> = primary.iter().map(|s| s.l2_mean).collect();
    let linf: Vec<f64> = primary.iter().map(|s| s.linf_mean).collect();
    let l2_fit = fit_rate(ns, &l2, RateAxis::N)?;
    let linf_fit = fit_rate(ns, &linf, RateAxis::NOverLogN)?;
    let mut fits = csv_row(&["risk", "axis", "slope", "slope_se", "points"].map(String::from));
    fits.push_str(&fit_row("l2_mse", "n", &l2_fit));
    fits.push_str(&fit_row("linf_mean", "n_over_log_n", &linf_fit));
    if a.compare_plain {
        let l2: Vec<f64> = plain.iter().map(|s| s.l2_mean).collect();
        let linf: Vec<f64> = plain.iter().map(|s| s.linf_mean).collect();
        fits.push_str(&fit_row("plain_l2_mse", "n", &fit_rate(ns, &l2, RateAxis::N)?));
        fits.push_str(&fit_row("plain_linf_mean", "n_over_log_n", &fit_rate(ns, &linf, RateAxis::NOverLogN)?));
    }
    let stdout = format!(
        "l2 slope {:.4} (se {:.4}) vs log n; linf slope {:.4} (se {:.4}) vs log(n/ln n)\n",
        l2_fit.slope, l2_fit.slope_se, linf_fit.slope, linf_fit.slope_se
    );
    Ok(Output {
        files: vec![(a.out.clone(), csv), (a.out.with_extension("fit.csv"), fits)],
        stdout,
    })
}

/// `1.4826 * MAD` of the finest-level coefficients, rescaled to a per-sample noise level.
pub fn estimate_sigma(y: &CoefficientTree, n: usize) -> f64 {
    let finest = y.level(y.max_level());
    let med = median(finest.to_vec());
    let dev: Vec<f64> = finest.iter().map(|v| (v - med).abs()).collect();
    MAD_SCALE * median(dev) * (n as f64).sqrt()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn render_signal(values: &[f64]) -> String {
    values.iter().map(|v| format_f64(*v) + "\n").collect()
}

fn denoise(a: &DenoiseArgs) -> Result<Output, CliError> {
    let cfg = a.estimator.config(a.variant.0, a.gamma);
    validate_config(&cfg)?;
    let samples = read_signal(&a.input)?;
    let n = samples.len();
    if n < 2 || !n.is_power_of_two() {
        return Err(CliError::Data(format!(
            "{} holds {n} values; denoising needs a power of two >= 2",
            a.input.display()
        )));
    }
    let root_n = (n as f64).sqrt();
    let y = analyze(&samples)?.scaled(1.0 / root_n);
    let (sigma, estimated) = match a.sigma {
        Some(s) => (s, false),
        None => (estimate_sigma(&y, n), true),
    };
    let source = if estimated { "estimated" } else { "given" };
    let mut diag = csv_row(&["level", "L", "t", "clamped", "zeroed"].map(String::from));
    if sigma == 0.0 {
        return Ok(Output {
            files: vec![(a.out.clone(), render_signal(&samples)), (a.diag_path(), diag)],
            stdout: "estimated sigma is 0; the input is returned unchanged\n".into(),
        });
    }

    let obs = NoisyCoefficients::new(y, n, sigma)?;
    let res = estimate(&obs, &cfg)?;
    let denoised: Vec<f64> = synthesize(&res.coefficients).iter().map(|v| v * root_n).collect();
    let stats = res
        .statistics
        .as_ref()
        .ok_or_else(|| CliError::Invariant("block estimator returned no level statistics".into()))?;
    for (j, _) in res.coefficients.levels() {
        let idx = (j + 1) as usize;
        diag.push_str(&csv_row(&[
            j.to_string(),
            stats.l(j).to_string(),
            format_f64(sigma * stats.t(j)),
            res.clamped[idx].to_string(),
            res.zeroed[idx].to_string(),
        ]));
    }
    let detected = stats.l.iter().filter(|l| **l != LValue::Infinite).count();
    let stdout = format!(
        "sigma = {} ({source}); {detected} of {} levels kept, {} coefficients clamped, {} zeroed\n",
        format_f64(sigma),
        stats.l.len(),
        res.total_clamped(),
        res.total_zeroed()
    );
    Ok(Output {
        files: vec![(a.out.clone(), render_signal(&denoised)), (a.diag_path(), diag)],
        stdout,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_and_mad() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
        let tree = CoefficientTree::from_flat(vec![0.0, 0.0, 1.0, -1.0]).unwrap();
        // finest level [1, -1]: median 0, MAD 1.
        assert!((estimate_sigma(&tree, 4) - MAD_SCALE * 2.0).abs() < 1e-15);
    }
}
