//! Block partitions, the level statistic `L_j` and the truncation level `t_j`.
//!
//! All logarithms are natural: `n = 2^10` gives blocks of length `ceil(ln 1024) = 7`.

use std::cmp::Ordering;
use std::f64::consts::E;
use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::wavelet::CoefficientTree;

/// Constant of the per-block noise-energy event: `sum eps^2 < 6.95 ln n`.
pub const EVENT_T_CONSTANT: f64 = 6.95;

/// Largest block the exhaustive oracle accepts.
pub const BRUTE_FORCE_MAX_BLOCK: usize = 20;

/// `ceil(ln n)`, never below one.
pub fn block_len(n: usize) -> usize {
    ((n as f64).ln().ceil() as usize).max(1)
}

/// Contiguous blocks of `ceil(ln n)` indices covering `0..level_size`.
pub fn partition(level_size: usize, n: usize) -> Vec<Range<usize>> {
    BlockPartition::for_sample_size(n).blocks(level_size).collect()
}

/// Splits every resolution level into blocks of a fixed length; the last block of
/// a level may be shorter, and a level with fewer coefficients than the block
/// length is one short block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockPartition {
    n: usize,
    block_len: usize,
}

impl BlockPartition {
    pub fn for_sample_size(n: usize) -> Self {
        BlockPartition { n, block_len: block_len(n) }
    }

    /// Partition with an explicit block length (used by tests and the oracle).
    pub fn with_block_len(n: usize, block_len: usize) -> Self {
        assert!(block_len > 0, "block length must be positive");
        BlockPartition { n, block_len }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    /// `ln n`.
    pub fn log_n(&self) -> f64 {
        (self.n as f64).ln()
    }

    pub fn blocks(&self, level_size: usize) -> impl Iterator<Item = Range<usize>> {
        let len = self.block_len;
        (0..level_size)
            .step_by(len)
            .map(move |start| start..(start + len).min(level_size))
    }
}

/// Value of the level statistic: a block-restricted subset size, or `Infinite`
/// when no block of the level reaches the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LValue {
    /// Always `>= 1`.
    Finite(u32),
    Infinite,
}

impl LValue {
    pub fn is_finite(&self) -> bool {
        matches!(self, LValue::Finite(_))
    }
}

impl fmt::Display for LValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LValue::Finite(l) => write!(f, "{l}"),
            LValue::Infinite => f.write_str("inf"),
        }
    }
}

/// Per-level `(L_j, t_j)` for levels `-1..=J`; `t_j` is on the unit-noise scale.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelStatistics {
    pub l: Vec<LValue>,
    pub t: Vec<f64>,
}

impl LevelStatistics {
    pub fn max_level(&self) -> i32 {
        self.l.len() as i32 - 2
    }

    pub fn l(&self, j: i32) -> LValue {
        self.l[(j + 1) as usize]
    }

    pub fn t(&self, j: i32) -> f64 {
        self.t[(j + 1) as usize]
    }
}

/// Squared values of `block`, sorted descending. Stable, so ties keep index order.
fn sorted_squares(block: &[f64], buf: &mut Vec<f64>) {
    buf.clear();
    buf.extend(block.iter().map(|v| v * v));
    buf.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
}

/// Smallest number of entries of one block whose squares sum to at least `threshold`.
///
/// The minimal qualifying subset of a block is always a prefix of its squared
/// values sorted in decreasing order, so each block costs one short sort.
pub fn compute_l(values: &[f64], partition: &BlockPartition, threshold: f64) -> LValue {
    debug_assert!(threshold > 0.0);
    let mut best = usize::MAX;
    let mut buf = Vec::with_capacity(partition.block_len());
    for range in partition.blocks(values.len()) {
        let block = &values[range];
        let total: f64 = block.iter().map(|v| v * v).sum();
        if total < threshold {
            continue;
        }
        sorted_squares(block, &mut buf);
        let mut acc = 0.0;
        let mut found = false;
        for (i, s) in buf.iter().enumerate() {
            if i + 1 >= best {
                found = true;
                break;
            }
            acc += s;
            if acc >= threshold {
                best = i + 1;
                found = true;
                break;
            }
        }
        // The whole block qualifies even if the sorted-order sum rounded below.
        if !found {
            best = best.min(block.len());
        }
        if best == 1 {
            break;
        }
    }
    if best == usize::MAX {
        LValue::Infinite
    } else {
        LValue::Finite(best as u32)
    }
}

/// Reference implementation of [`compute_l`] by enumerating every subset of every block.
pub fn compute_l_bruteforce(values: &[f64], partition: &BlockPartition, threshold: f64) -> Result<LValue> {
    if partition.block_len() > BRUTE_FORCE_MAX_BLOCK {
        return Err(Error::Capability(format!(
            "blocks of length {} exceed the enumeration bound {BRUTE_FORCE_MAX_BLOCK}",
            partition.block_len()
        )));
    }
    let mut best = u32::MAX;
    for range in partition.blocks(values.len()) {
        let block = &values[range];
        for mask in 1u32..(1u32 << block.len()) {
            let size = mask.count_ones();
            if size >= best {
                continue;
            }
            let sum: f64 = block
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, v)| v * v)
                .sum();
            if sum >= threshold {
                best = size;
            }
        }
    }
    Ok(if best == u32::MAX { LValue::Infinite } else { LValue::Finite(best) })
}

/// `t = sqrt(gamma ln n / (n (L - 1)))` with `t = inf` for `L = 1` and `t = 0` for `L = inf`.
pub fn truncation_threshold(l: LValue, gamma: f64, n: usize) -> f64 {
    match l {
        LValue::Infinite => 0.0,
        LValue::Finite(0) | LValue::Finite(1) => f64::INFINITY,
        LValue::Finite(l) => (gamma * (n as f64).ln() / (n as f64 * (l - 1) as f64)).sqrt(),
    }
}

/// The level-detection threshold `gamma ln n / n` on the unit-noise scale.
pub fn detection_threshold(gamma: f64, n: usize) -> f64 {
    gamma * (n as f64).ln() / n as f64
}

/// Chernoff bound `P(chi^2_m >= Q m) <= exp(m (1 - Q + ln Q) / 2)`, valid for `Q >= e`.
pub fn chi_square_tail_bound(m: u32, q: f64) -> Result<f64> {
    Ok(ln_chi_square_tail_bound(m, q)?.exp())
}

/// Natural log of [`chi_square_tail_bound`]; stays accurate where the bound underflows.
pub fn ln_chi_square_tail_bound(m: u32, q: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("degrees of freedom must be >= 1".into()));
    }
    if q.is_nan() || q < E {
        return Err(Error::Domain(format!("tail bound needs Q >= e, got {q}")));
    }
    Ok(m as f64 / 2.0 * (1.0 - q + q.ln()))
}

/// Whether every block on every level has noise energy `sum eps^2 < 6.95 ln n`.
///
/// `residuals` holds the standardized noise `sqrt(n) (Y - d) / sigma`.
pub fn check_event_t(residuals: &CoefficientTree, partition: &BlockPartition) -> bool {
    let bound = EVENT_T_CONSTANT * partition.log_n();
    residuals.levels().all(|(_, level)| {
        partition
            .blocks(level.len())
            .all(|r| level[r].iter().map(|e| e * e).sum::<f64>() < bound)
    })
}
