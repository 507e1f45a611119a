//! Haar multiresolution analysis on `[0, 1]`.

mod haar;
mod target;
mod tree;

pub use haar::{analyze, evaluate_expansion, piecewise_values, synthesize};
pub use target::{holder_proxy, BlockSpike, FunctionSpec, TailEnergy, TAIL_EXACT_LEVELS};
pub use tree::{level_range, CoefficientTree};

/// `log2` of a power of two.
pub(crate) fn dyadic_exponent(n: usize) -> Option<i32> {
    (n > 0 && n.is_power_of_two()).then(|| n.trailing_zeros() as i32)
}
