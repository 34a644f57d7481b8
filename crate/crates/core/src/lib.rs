//! Limiting fitness distributions of rank-driven dynamical systems.
//!
//! A population of `n` agents carries fitness values in `[0, 1]`. Each step
//! the agent of rank `i` (counted from the lowest) is replaced with
//! probability `alpha_i`, either by a draw from a fixed driving distribution
//! (exogenous) or by a copy of a current member (endogenous). Under an
//! independence assumption the marginal CDF evolves pointwise through a
//! scalar map of the order-statistic polynomials, which this crate analyses:
//! fixed points, stability, large-`n` thresholds, and a comparison with the
//! exact law of the min-replacement process and with direct simulation.

pub mod asymptotics;
pub mod cli;
pub mod distrib;
pub mod dynamics;
pub mod error;
pub mod exact;
pub mod mc;
pub mod orderstats;
pub mod presets;

pub use distrib::{DistributionSpec, SampledCdf};
pub use dynamics::{FixedPoint, FixedPointReport, Mode, RankSystem, Stability, WeightVector};
pub use error::{Error, Result};
pub use orderstats::OrderStatContext;
