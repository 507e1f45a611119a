//! Truncated block thresholding for Haar wavelet estimation in the white-noise model.

pub mod blocks;
pub mod error;
pub mod estimators;
pub mod risk;
pub mod sequence;
pub mod signal;
pub mod wavelet;

pub use blocks::{compute_l, BlockPartition, LValue, LevelStatistics};
pub use error::{Error, Result};
pub use estimators::{estimate, EstimateResult, EstimatorConfig, Variant};
pub use risk::{lj_distribution, monte_carlo, RiskSummary, Scenario};
pub use sequence::{simulate, NoisyCoefficients, SeedSpec};
pub use wavelet::{analyze, synthesize, CoefficientTree, FunctionSpec};
