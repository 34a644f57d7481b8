//! Exact stationary law of the min-replacement process.
//!
//! When only the lowest-ranked agent is replaced, by a draw from `N`, the
//! population value `x_t^(i)` of every rank `i > 1` is nondecreasing in time
//! and climbs to `beta = sup { x : N(x) < 1 }`. The stationary marginal is
//! therefore
//!
//! ```text
//! R^(x) = N(x) / n + (n - 1) / n * H_beta(x)
//! ```
//!
//! rather than the solution `R*` of the independence approximation. This
//! module builds that law and the closed-form statistics that contrast the
//! two for a uniform driver.

use std::cell::RefCell;

use serde::Serialize;

use crate::distrib::{uniform_grid, DistributionSpec};
use crate::dynamics::{Mode, RankSystem, WeightVector, DEFAULT_TOL};
use crate::error::{Error, Result};

/// Target absolute error handed to the quadrature routine.
const QUAD_TARGET: f64 = 1e-12;
/// Allowed disagreement between closed forms and quadrature.
pub const QUAD_AGREEMENT: f64 = 1e-8;
/// A tabulated value this close to one counts as one when locating `beta`.
const BETA_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactSolution {
    pub n: usize,
    pub driver: DistributionSpec,
    pub beta: f64,
}

impl ExactSolution {
    pub fn new(n: usize, driver: DistributionSpec) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("exact law needs n >= 2, got {n}")));
        }
        driver.validate()?;
        let beta = upper_support(&driver);
        Ok(ExactSolution { n, driver, beta })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let step = if x >= self.beta { 1.0 } else { 0.0 };
        let n = self.n as f64;
        self.driver.cdf(x) / n + (n - 1.0) / n * step
    }

    /// The law as a distribution. Atomic drivers give an atom mixture,
    /// anything else a two-component mixture.
    pub fn to_spec(&self) -> Result<DistributionSpec> {
        let n = self.n as f64;
        let top = (n - 1.0) / n;
        match &self.driver {
            DistributionSpec::AtomMixture { atoms } => DistributionSpec::atoms(
                atoms
                    .iter()
                    .map(|&(l, w)| (l, w / n))
                    .chain(std::iter::once((self.beta, top))),
            ),
            driver => DistributionSpec::mixture(vec![
                (driver.clone(), 1.0 / n),
                (DistributionSpec::point_mass(self.beta)?, top),
            ]),
        }
    }
}

/// `sup { x : N(x) < 1 }`.
pub fn upper_support(driver: &DistributionSpec) -> f64 {
    match driver {
        DistributionSpec::Uniform | DistributionSpec::PowerLaw { .. } => 1.0,
        DistributionSpec::AtomMixture { atoms } => atoms.last().map_or(0.0, |a| a.0),
        DistributionSpec::PiecewiseLinear { knots, values } => values
            .iter()
            .position(|&v| v >= 1.0 - BETA_SLACK)
            .map_or(1.0, |i| knots[i]),
        DistributionSpec::Tabulated { values } => {
            let m = values.len() - 1;
            let Some(j) = values.iter().position(|&v| v >= 1.0 - BETA_SLACK) else {
                return 1.0;
            };
            if j == 0 {
                return 0.0;
            }
            let (mut lo, mut hi) = ((j - 1) as f64 / m as f64, j as f64 / m as f64);
            for _ in 0..200 {
                let mid = lo + 0.5 * (hi - lo);
                if mid <= lo || mid >= hi {
                    break;
                }
                if driver.cdf(mid) < 1.0 - BETA_SLACK {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            hi
        }
        DistributionSpec::Mixture { components } => {
            components.iter().map(|(c, _)| upper_support(c)).fold(0.0, f64::max)
        }
    }
}

/// Exact stationary marginal of the min-replacement process driven by `N`.
pub fn exact_limit_cdf(n: usize, driver: &DistributionSpec) -> Result<DistributionSpec> {
    ExactSolution::new(n, driver.clone())?.to_spec()
}

fn integrate(f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let failure = RefCell::new(None);
    let out = quadrature::double_exponential::integrate(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        0.0,
        1.0,
        QUAD_TARGET,
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(out.integral),
    }
}

fn min_only_system(n: usize) -> Result<RankSystem> {
    if n < 2 {
        return Err(Error::Domain(format!("need n >= 2, got {n}")));
    }
    RankSystem::new(WeightVector::min_only(n)?)
}

/// Mean of the approximate law for a uniform driver, as `int (1 - R*(x)) dx`
/// with `R*` taken from the fixed-point solver.
pub fn approx_mean_by_quadrature(n: usize) -> Result<f64> {
    let sys = min_only_system(n)?;
    integrate(|x| Ok(1.0 - sys.solve_exo_fixed_point(x, DEFAULT_TOL)?))
}

/// Means of the exact law and of the independence approximation for a
/// uniform driver: `1 - 1/(2n)` and `1 - 1/(n+1)`. The second is checked
/// against [`approx_mean_by_quadrature`].
pub fn compare_means(n: usize) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::Domain(format!("need n >= 2, got {n}")));
    }
    let nf = n as f64;
    let exact = 1.0 - 1.0 / (2.0 * nf);
    let approx = 1.0 - 1.0 / (nf + 1.0);
    let quad = approx_mean_by_quadrature(n)?;
    if (quad - approx).abs() > QUAD_AGREEMENT {
        return Err(Error::Numerical(format!(
            "approximate mean {approx} disagrees with quadrature {quad} for n = {n}"
        )));
    }
    Ok((exact, approx))
}

/// CDF of the second-lowest agent at `x` for a uniform driver: exact law
/// (a unit step at 1) and the independence approximation
/// `1 + (n-1)(1-x) - n (1-x)^((n-1)/n)`.
pub fn compare_second_orderstat(n: usize, x: f64) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::Domain(format!("need n >= 2, got {n}")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x = {x} outside [0,1]")));
    }
    let nf = n as f64;
    let exact = if x >= 1.0 { 1.0 } else { 0.0 };
    let s = 1.0 - x;
    let approx = (1.0 + (nf - 1.0) * s - nf * s.powf((nf - 1.0) / nf)).clamp(0.0, 1.0);
    Ok((exact, approx))
}

/// `(3n - 1) / (2 (2n - 1))`.
pub fn second_orderstat_mean(n: usize) -> f64 {
    let nf = n as f64;
    (3.0 * nf - 1.0) / (2.0 * (2.0 * nf - 1.0))
}

/// Mean of the approximate second-lowest agent, integrating
/// `1 - theta(2, R*(x))` with `R*` from the solver.
pub fn second_orderstat_mean_by_quadrature(n: usize) -> Result<f64> {
    let sys = min_only_system(n)?;
    integrate(|x| {
        let r = sys.solve_exo_fixed_point(x, DEFAULT_TOL)?;
        Ok(1.0 - sys.context().theta(2, r)?)
    })
}

/// Largest residual over `x_grid` (restricted to `x < beta`) of the two
/// identities saying the lowest agent is distributed as the driver:
/// `theta(1, R*(x)) = N(x)` for the approximation and
/// `n R^(x) - (n-1) H_beta(x) = N(x)` for the exact law.
pub fn min_orderstat_identity_check(n: usize, driver: &DistributionSpec, x_grid: &[f64]) -> Result<f64> {
    let sys = min_only_system(n)?;
    let exact = ExactSolution::new(n, driver.clone())?;
    let law = exact.to_spec()?;
    let nf = n as f64;
    let mut worst = 0.0_f64;
    for &x in x_grid {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("grid point {x} outside [0,1]")));
        }
        if x >= exact.beta {
            continue;
        }
        let nu = driver.cdf(x);
        let rstar = sys.solve_exo_fixed_point(nu, DEFAULT_TOL)?;
        let approx_res = (sys.context().theta(1, rstar)? - nu).abs();
        let exact_res = (nf * law.cdf(x) - nu).abs();
        worst = worst.max(approx_res).max(exact_res);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub x: f64,
    pub exact: f64,
    pub approx: f64,
}

/// Exact and approximate stationary CDFs on a uniform grid.
pub fn comparison_table(n: usize, driver: &DistributionSpec, grid: usize) -> Result<Vec<ComparisonRow>> {
    let sys = min_only_system(n)?;
    let law = exact_limit_cdf(n, driver)?;
    let approx = sys.limit_cdf(Mode::Exo, driver, grid)?;
    let xs = uniform_grid(grid)?;
    Ok(xs
        .iter()
        .zip(&approx.cdf)
        .map(|(&x, &a)| ComparisonRow { x, exact: law.cdf(x), approx: a })
        .collect())
}
