//! Orthonormal discrete Haar transform.
//!
//! Sign convention: `psi = +1` on `[0, 1/2)` and `-1` on `[1/2, 1)`, so the detail
//! coefficient of a sample pair `(a, b)` is `(a - b) / sqrt(2)`.

use std::f64::consts::FRAC_1_SQRT_2;

use super::tree::CoefficientTree;
use crate::error::{Error, Result};

/// Forward orthonormal Haar transform of `2^J` samples.
///
/// The result has maximal level `J - 1` (one scaling coefficient plus `2^J - 1`
/// details), and preserves the Euclidean norm.
pub fn analyze(samples: &[f64]) -> Result<CoefficientTree> {
    let len = samples.len();
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::Sizing(format!(
            "Haar analysis needs a power-of-two sample count, got {len}"
        )));
    }
    let mut data = samples.to_vec();
    let mut scratch = vec![0.0; len];
    let mut width = len;
    while width > 1 {
        let half = width / 2;
        for i in 0..half {
            let (a, b) = (data[2 * i], data[2 * i + 1]);
            scratch[i] = (a + b) * FRAC_1_SQRT_2;
            scratch[half + i] = (a - b) * FRAC_1_SQRT_2;
        }
        data[..width].copy_from_slice(&scratch[..width]);
        width = half;
    }
    CoefficientTree::from_flat(data)
}

/// Inverse of [`analyze`]: returns `2^(J+1)` samples for a tree of maximal level `J`.
pub fn synthesize(tree: &CoefficientTree) -> Vec<f64> {
    let mut data = tree.as_slice().to_vec();
    let len = data.len();
    let mut scratch = vec![0.0; len];
    let mut width = 2;
    while width <= len {
        let half = width / 2;
        for i in 0..half {
            let (a, d) = (data[i], data[half + i]);
            scratch[2 * i] = (a + d) * FRAC_1_SQRT_2;
            scratch[2 * i + 1] = (a - d) * FRAC_1_SQRT_2;
        }
        data[..width].copy_from_slice(&scratch[..width]);
        width *= 2;
    }
    data
}

/// Values of `sum d_{j,k} psi_{j,k}` on the `2^(J+1)` dyadic cells where the
/// expansion is constant.
pub fn piecewise_values(tree: &CoefficientTree) -> Vec<f64> {
    let scale = (tree.resolution() as f64).sqrt();
    let mut values = synthesize(tree);
    for v in &mut values {
        *v *= scale;
    }
    values
}

/// Evaluates the expansion at the midpoints of a uniform grid of `grid_size` cells.
///
/// Any power of two `>= 2^max_level` is accepted. Grids at least as fine as the
/// tree's resolution are exact piecewise-constant refinements; the one coarser
/// admissible grid samples the half-open cells at their left edge.
pub fn evaluate_expansion(tree: &CoefficientTree, grid_size: usize) -> Result<Vec<f64>> {
    let resolution = tree.resolution();
    if grid_size == 0 || !grid_size.is_power_of_two() {
        return Err(Error::Sizing(format!(
            "grid size must be a power of two, got {grid_size}"
        )));
    }
    if 2 * grid_size < resolution {
        return Err(Error::Sizing(format!(
            "grid of {grid_size} points is coarser than 2^{}",
            tree.max_level()
        )));
    }
    let values = piecewise_values(tree);
    Ok(resample_midpoints(&values, grid_size))
}

/// Looks up piecewise-constant `values` (on equal cells) at the midpoints of a grid.
pub(crate) fn resample_midpoints(values: &[f64], grid_size: usize) -> Vec<f64> {
    let cells = values.len();
    (0..grid_size)
        .map(|i| values[((2 * i + 1) * cells) / (2 * grid_size)])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::SQRT_2;

    fn max_rel_err(a: &[f64], b: &[f64]) -> f64 {
        let scale = b.iter().fold(1e-300f64, |m, x| m.max(x.abs()));
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
            / scale
    }

    #[test]
    fn constant_signal_has_only_scaling_energy() {
        let a = 1.75;
        let tree = analyze(&[a; 16]).unwrap();
        assert!((tree.get(-1, 0) - a * 4.0).abs() < 1e-12);
        assert!(tree.as_slice()[1..].iter().all(|d| d.abs() < 1e-12));
    }

    #[test]
    fn two_point_transform() {
        let tree = analyze(&[1.0, -1.0]).unwrap();
        assert_eq!(tree.max_level(), 0);
        assert_eq!(tree.get(-1, 0), 0.0);
        assert!((tree.get(0, 0) - SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(matches!(analyze(&[1.0, 2.0, 3.0]), Err(Error::Sizing(_))));
        assert!(matches!(analyze(&[]), Err(Error::Sizing(_))));
    }

    #[test]
    fn synthesize_zero_and_scaling_only() {
        assert!(synthesize(&CoefficientTree::zeros(3)).iter().all(|&x| x == 0.0));
        let mut tree = CoefficientTree::zeros(1);
        tree.set(-1, 0, 1.0);
        let out = synthesize(&tree);
        assert_eq!(out.len(), 4);
        for x in out {
            assert!((x - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn malformed_levels_are_rejected() {
        let err = CoefficientTree::from_levels(vec![vec![0.0], vec![0.0, 1.0]]);
        assert!(matches!(err, Err(Error::Structural(_))));
        assert!(CoefficientTree::from_flat(vec![0.0; 6]).is_err());
        assert!(CoefficientTree::from_flat(vec![f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn expansion_of_zero_tree() {
        let out = evaluate_expansion(&CoefficientTree::zeros(4), 64).unwrap();
        assert!(out.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn expansion_matches_scaled_synthesis() {
        let samples: Vec<f64> = (0..32).map(|i| ((i * 7) % 11) as f64 - 3.0).collect();
        let tree = analyze(&samples).unwrap();
        let eval = evaluate_expansion(&tree, 32).unwrap();
        let synth = synthesize(&tree);
        for (e, s) in eval.iter().zip(&synth) {
            assert!((e - s * 32f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn single_level_one_wavelet() {
        let mut tree = CoefficientTree::zeros(1);
        tree.set(1, 0, 1.0);
        let out = evaluate_expansion(&tree, 16).unwrap();
        for (i, v) in out.iter().enumerate() {
            let expected = match i {
                0..=3 => SQRT_2,
                4..=7 => -SQRT_2,
                _ => 0.0,
            };
            assert!((v - expected).abs() < 1e-14, "cell {i}: {v}");
        }
    }

    #[test]
    fn coarse_grids() {
        let mut tree = CoefficientTree::zeros(2);
        tree.set(2, 0, 1.0);
        // 2^max_level is admissible and hits the left edge of odd fine cells.
        let out = evaluate_expansion(&tree, 4).unwrap();
        assert!((out[0] + 2.0).abs() < 1e-14);
        assert!(matches!(evaluate_expansion(&tree, 2), Err(Error::Sizing(_))));
        assert!(matches!(evaluate_expansion(&tree, 12), Err(Error::Sizing(_))));
    }

    #[test]
    fn orthonormality_of_basis_vectors() {
        for j in 0..=5 {
            let len = 1usize << j;
            for idx in 0..len {
                let mut unit = vec![0.0; len];
                unit[idx] = 1.0;
                let tree = CoefficientTree::from_flat(unit.clone()).unwrap();
                let back = analyze(&synthesize(&tree)).unwrap();
                for (a, b) in back.as_slice().iter().zip(&unit) {
                    assert!((a - b).abs() < 1e-13);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn perfect_reconstruction(
            j in 0u32..=16,
            seed in proptest::collection::vec(-1e3f64..1e3, 1..64),
        ) {
            let len = 1usize << j;
            let samples: Vec<f64> = (0..len).map(|i| seed[i % seed.len()] * (1.0 + (i as f64).sin())).collect();
            let tree = analyze(&samples).unwrap();
            let back = synthesize(&tree);
            prop_assert!(max_rel_err(&back, &samples) < 1e-10);
        }

        #[test]
        fn parseval(coeffs in proptest::collection::vec(-10f64..10.0, 1..=9usize).prop_flat_map(|v| {
            let j = v.len() as u32;
            proptest::collection::vec(-10f64..10.0, 1usize << j)
        })) {
            let tree = CoefficientTree::from_flat(coeffs).unwrap();
            let energy = tree.energy();
            let signal = synthesize(&tree);
            let norm: f64 = signal.iter().map(|x| x * x).sum();
            prop_assert!((energy - norm).abs() <= 1e-12 * energy.max(1.0));
            // Function-space version: squared L2 norm of the expansion on its cells.
            let values = piecewise_values(&tree);
            let l2: f64 = values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64;
            prop_assert!((energy - l2).abs() <= 1e-12 * energy.max(1.0));
        }
    }
}
