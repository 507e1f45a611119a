#![allow(dead_code)]

use statrs::function::gamma::ln_gamma;

/// `ln P(chi^2_m >= x)` by composite Simpson integration of the density,
/// normalised at the lower limit so that nothing underflows. Needs `x >= m - 2`.
pub fn ln_chi_square_sf(m: u32, x: f64) -> f64 {
    let k = m as f64 / 2.0;
    assert!(x >= 2.0 * (k - 1.0), "integrand must be decreasing past x");
    let ln_density_at_x = (k - 1.0) * x.ln() - x / 2.0 - k * 2f64.ln() - ln_gamma(k);
    // g(u) = ln f(x + u) - ln f(x) <= -u (1/2 - (k - 1)/x), so 400 units reach e^-60 for x >= e m.
    let g = |u: f64| (k - 1.0) * (u / x).ln_1p() - u / 2.0;
    let upper = 400.0;
    let steps = 80_000usize;
    let h = upper / steps as f64;
    let mut sum = g(0.0).exp() + g(upper).exp();
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * g(i as f64 * h).exp();
    }
    ln_density_at_x + (sum * h / 3.0).ln()
}

/// Kolmogorov-Smirnov statistic of `sample` against `cdf`.
pub fn ks_statistic(mut sample: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at level 0.001.
pub fn ks_critical_001(n: usize) -> f64 {
    1.9495 / (n as f64).sqrt()
}

/// Noise level putting the energy of one full spike block exactly at the detection threshold.
pub fn critical_sigma(amplitude: f64, block_len: usize, gamma: f64, n: usize) -> f64 {
    let n = n as f64;
    amplitude * (n * block_len as f64 / (gamma * n.ln())).sqrt()
}

/// True if some window of `window` consecutive steps holds at least `needed` nondecreasing ones.
pub fn mostly_nondecreasing(values: &[f64], window: usize, needed: usize) -> bool {
    let ups: Vec<bool> = values.windows(2).map(|w| w[1] >= w[0]).collect();
    if ups.len() < window {
        return false;
    }
    ups.windows(window).any(|w| w.iter().filter(|&&u| u).count() >= needed)
}
