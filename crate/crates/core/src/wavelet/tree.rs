use std::ops::Range;

use crate::error::{Error, Result};

/// Haar coefficients on `[0, 1]` organized by resolution level.
///
/// Level `-1` holds the single scaling coefficient `c_0`, level `j >= 0` holds the
/// `2^j` detail coefficients `d_{j,k}`. Storage is the flat in-place (Mallat) layout
/// `[c_0, d_{0,0}, d_{1,0}, d_{1,1}, d_{2,0}, ...]`, so a tree with maximal level `J`
/// has exactly `2^(J+1)` entries and level `j` occupies `2^j..2^(j+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTree {
    coeffs: Vec<f64>,
    max_level: i32,
}

/// Flat index range of level `j` (`j >= -1`).
pub fn level_range(j: i32) -> Range<usize> {
    debug_assert!(j >= -1);
    if j < 0 {
        0..1
    } else {
        (1usize << j)..(1usize << (j + 1))
    }
}

impl CoefficientTree {
    pub fn zeros(max_level: i32) -> Self {
        assert!(max_level >= -1, "max_level must be >= -1");
        CoefficientTree {
            coeffs: vec![0.0; 1usize << (max_level + 1)],
            max_level,
        }
    }

    /// Builds a tree from the flat layout. The length must be a power of two.
    pub fn from_flat(coeffs: Vec<f64>) -> Result<Self> {
        let len = coeffs.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::Structural(format!(
                "flat coefficient vector has length {len}, expected a power of two"
            )));
        }
        if let Some(pos) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::Structural(format!(
                "coefficient at flat index {pos} is not finite"
            )));
        }
        let max_level = len.trailing_zeros() as i32 - 1;
        Ok(CoefficientTree { coeffs, max_level })
    }

    /// Builds a tree from per-level arrays, `levels[0]` being level `-1`.
    pub fn from_levels(levels: Vec<Vec<f64>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Structural("no levels given".into()));
        }
        let mut coeffs = Vec::with_capacity(1usize << levels.len().saturating_sub(1));
        for (i, level) in levels.into_iter().enumerate() {
            let j = i as i32 - 1;
            let expected = level_range(j).len();
            if level.len() != expected {
                return Err(Error::Structural(format!(
                    "level {j} has {} coefficients, expected {expected}",
                    level.len()
                )));
            }
            coeffs.extend(level);
        }
        Self::from_flat(coeffs)
    }

    pub fn max_level(&self) -> i32 {
        self.max_level
    }

    /// Number of dyadic cells on which the expansion is piecewise constant, `2^(J+1)`.
    pub fn resolution(&self) -> usize {
        self.coeffs.len()
    }

    pub fn level(&self, j: i32) -> &[f64] {
        assert!(j >= -1 && j <= self.max_level, "level {j} out of range");
        &self.coeffs[level_range(j)]
    }

    pub fn level_mut(&mut self, j: i32) -> &mut [f64] {
        assert!(j >= -1 && j <= self.max_level, "level {j} out of range");
        &mut self.coeffs[level_range(j)]
    }

    /// Iterates `(j, coefficients)` from level `-1` upward.
    pub fn levels(&self) -> impl Iterator<Item = (i32, &[f64])> + '_ {
        (-1..=self.max_level).map(move |j| (j, self.level(j)))
    }

    pub fn get(&self, j: i32, k: usize) -> f64 {
        self.level(j)[k]
    }

    pub fn set(&mut self, j: i32, k: usize, value: f64) {
        self.level_mut(j)[k] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coeffs
    }

    /// Sum of squared coefficients.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// Cuts the tree down to `max_level`, or pads it with zero levels.
    pub fn resized(&self, max_level: i32) -> Self {
        assert!(max_level >= -1);
        let len = 1usize << (max_level + 1);
        let mut coeffs = vec![0.0; len];
        let keep = len.min(self.coeffs.len());
        coeffs[..keep].copy_from_slice(&self.coeffs[..keep]);
        CoefficientTree { coeffs, max_level }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        CoefficientTree {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
            max_level: self.max_level,
        }
    }

    pub(crate) fn from_raw(coeffs: Vec<f64>, max_level: i32) -> Self {
        debug_assert_eq!(coeffs.len(), 1usize << (max_level + 1));
        CoefficientTree { coeffs, max_level }
    }
}
