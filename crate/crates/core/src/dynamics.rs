//! The induced scalar maps of exogenous and endogenous rank-driven evolution.
//!
//! With `F(R) = sum_i alpha_i theta(i, R)` and `q = sum_i alpha_i`, one update
//! of the marginal CDF value `R` at a fixed `x` is
//!
//! ```text
//! exogenous:   R -> R - F(R)/n + (q/n) N
//! endogenous:  R -> (1 + q/n) R - F(R)/n
//! ```
//!
//! where `N` is the driver's CDF value at the same `x`. The exogenous map has
//! a unique global attractor for every `N`; the endogenous map fixes 0 and 1
//! and has finitely many fixed points, each attracting or repelling.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distrib::{uniform_grid, DistributionSpec, SampledCdf};
use crate::error::{Error, Result};
use crate::orderstats::OrderStatContext;

/// Default tolerance for fixed-point residuals.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Slope band around 1 classified as marginal.
pub const MARGINAL_SLOPE_TOL: f64 = 1e-9;
/// Default number of scan intervals when locating endogenous fixed points.
pub const DEFAULT_SCAN_GRID: usize = 10_000;
/// Default iteration budget near marginal fixed points.
pub const DEFAULT_MAX_ITER: usize = 1_000_000;
/// Distance to a marginal point below which basin lookup is replaced by
/// direct iteration.
pub const MARGINAL_ITERATION_RADIUS: f64 = 1e-6;

/// Replacement probabilities `alpha_1..alpha_n` indexed by rank, lowest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector {
    alphas: Vec<f64>,
    /// `prefix[j] = alpha_1 + ... + alpha_j`, `prefix[0] = 0`.
    prefix: Vec<f64>,
}

impl WeightVector {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        let n = alphas.len();
        if n < 2 {
            return Err(Error::InvalidWeights(format!("need n >= 2 weights, got {n}")));
        }
        if let Some((i, a)) = alphas
            .iter()
            .enumerate()
            .find(|(_, a)| !(0.0..=1.0).contains(*a))
        {
            return Err(Error::InvalidWeights(format!("alpha_{} = {a} outside [0,1]", i + 1)));
        }
        let mut prefix = Vec::with_capacity(n + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for a in &alphas {
            acc += a;
            prefix.push(acc);
        }
        if acc >= n as f64 {
            return Err(Error::InvalidWeights(format!(
                "q = {acc} must be below n = {n}; the maps would be the identity"
            )));
        }
        Ok(WeightVector { alphas, prefix })
    }

    /// `alpha_1 = 1`, every other weight zero.
    pub fn min_only(n: usize) -> Result<Self> {
        let mut alphas = vec![0.0; n];
        if let Some(a) = alphas.first_mut() {
            *a = 1.0;
        }
        Self::new(alphas)
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// Total replacement rate `q`.
    pub fn q(&self) -> f64 {
        self.prefix[self.alphas.len()]
    }

    /// Prefix sums, length `n + 1`, starting at 0.
    pub fn prefix_sums(&self) -> &[f64] {
        &self.prefix
    }

    /// Sum of the weights of the `k` lowest ranks.
    pub fn head_sum(&self, k: usize) -> f64 {
        self.prefix[k.min(self.alphas.len())]
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        WeightVector::new(v)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.alphas
    }
}

/// Exogenous (fixed driver) or endogenous (self-driven) evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exo,
    Endo,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exo" => Ok(Mode::Exo),
            "endo" => Ok(Mode::Endo),
            other => Err(Error::Parse(format!("unknown mode {other:?}, expected exo or endo"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exo => "exo",
            Mode::Endo => "endo",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Attracting,
    Repelling,
    Marginal,
}

impl Stability {
    pub fn from_slope(slope: f64) -> Self {
        if slope < 1.0 - MARGINAL_SLOPE_TOL {
            Stability::Attracting
        } else if slope > 1.0 + MARGINAL_SLOPE_TOL {
            Stability::Repelling
        } else {
            Stability::Marginal
        }
    }
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stability::Attracting => "attracting",
            Stability::Repelling => "repelling",
            Stability::Marginal => "marginal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub location: f64,
    pub slope: f64,
    pub stability: Stability,
}

/// A piece of `[0, 1]` whose points all iterate to `limit`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Basin {
    pub lower: f64,
    pub upper: f64,
    pub lower_closed: bool,
    pub upper_closed: bool,
    pub limit: f64,
}

impl Basin {
    pub fn contains(&self, r: f64) -> bool {
        let above = if self.lower_closed { r >= self.lower } else { r > self.lower };
        let below = if self.upper_closed { r <= self.upper } else { r < self.upper };
        above && below
    }
}

/// Fixed points of the endogenous map with their basins of attraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub points: Vec<FixedPoint>,
    /// Ordered partition of `[0, 1]`.
    pub basins: Vec<Basin>,
    /// Possible missed roots (tangencies, roots closer than the scan grid).
    pub warnings: Vec<String>,
    /// The map is the identity up to rounding: every point is fixed and
    /// `basins` is empty.
    #[serde(default)]
    pub identity: bool,
}

impl FixedPointReport {
    pub fn locations(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.location).collect()
    }

    /// Fixed point within `tol` of `r`, if any.
    pub fn point_near(&self, r: f64, tol: f64) -> Option<&FixedPoint> {
        self.points.iter().find(|p| (p.location - r).abs() <= tol)
    }

    pub fn basin_of(&self, r: f64) -> Option<&Basin> {
        self.basins.iter().find(|b| b.contains(r))
    }

    /// Basin limit values where the limit map jumps: every non-attracting
    /// fixed point that separates two basins.
    pub fn boundaries(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.basins.windows(2).map(|w| w[0].upper).collect();
        b.dedup();
        b
    }
}

/// Limit of the endogenous iteration from one starting value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndoLimit {
    pub value: f64,
    /// The start sat on a repelling or marginal fixed point.
    pub boundary: bool,
}

/// A population size and weight profile, with cached binomial rows.
#[derive(Debug, Clone)]
pub struct RankSystem {
    ctx: OrderStatContext,
    weights: WeightVector,
}

impl RankSystem {
    pub fn new(weights: WeightVector) -> Result<Self> {
        let ctx = OrderStatContext::new(weights.len())?;
        Ok(RankSystem { ctx, weights })
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn q(&self) -> f64 {
        self.weights.q()
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn context(&self) -> &OrderStatContext {
        &self.ctx
    }

    /// `F(R) = sum_i alpha_i theta(i, R)`.
    pub fn weighted_sum(&self, r: f64) -> Result<f64> {
        self.ctx.weighted_theta_sum(&self.weights, r)
    }

    fn unit(name: &str, v: f64) -> Result<()> {
        if (0.0..=1.0).contains(&v) {
            Ok(())
        } else {
            Err(Error::Domain(format!("{name} = {v} outside [0,1]")))
        }
    }

    /// One exogenous step of the CDF value `r` with driver value `nu`.
    pub fn exo_map(&self, r: f64, nu: f64) -> Result<f64> {
        Self::unit("r", r)?;
        Self::unit("nu", nu)?;
        let n = self.n() as f64;
        let value = r - self.weighted_sum(r)? / n + self.q() / n * nu;
        Ok(value.clamp(0.0, 1.0))
    }

    /// One endogenous step; 0 and 1 are returned exactly.
    pub fn endo_map(&self, r: f64) -> Result<f64> {
        Self::unit("r", r)?;
        if r == 0.0 || r == 1.0 {
            return Ok(r);
        }
        Ok((r + self.endo_displacement(r)?).clamp(0.0, 1.0))
    }

    /// `endo_map(r) - r = (q r - F(r)) / n`, without the cancellation.
    pub fn endo_displacement(&self, r: f64) -> Result<f64> {
        Ok((self.q() * r - self.weighted_sum(r)?) / self.n() as f64)
    }

    pub fn exo_slope(&self, r: f64) -> Result<f64> {
        let n = self.n() as f64;
        Ok(1.0 - self.ctx.weighted_theta_sum_deriv(&self.weights, r)? / n)
    }

    pub fn endo_slope(&self, r: f64) -> Result<f64> {
        let n = self.n() as f64;
        Ok(1.0 + self.q() / n - self.ctx.weighted_theta_sum_deriv(&self.weights, r)? / n)
    }

    fn require_dynamics(&self) -> Result<()> {
        if self.q() > 0.0 {
            Ok(())
        } else {
            Err(Error::Config("all weights are zero: nothing is ever replaced".into()))
        }
    }

    /// The unique `R*` with `F(R*) = q nu`: the attracting fixed point of
    /// [`exo_map`](Self::exo_map) for driver value `nu`.
    ///
    /// Bisection runs until the bracket collapses to adjacent floats, so the
    /// result is monotone in `nu`; `tol` bounds the accepted residual
    /// `|F(R*) - q nu| <= q tol`.
    pub fn solve_exo_fixed_point(&self, nu: f64, tol: f64) -> Result<f64> {
        self.require_dynamics()?;
        Self::unit("nu", nu)?;
        if !(tol > 0.0) {
            return Err(Error::Config(format!("tolerance must be positive, got {tol}")));
        }
        if nu == 0.0 {
            return Ok(0.0);
        }
        if nu == 1.0 {
            return Ok(1.0);
        }
        let q = self.q();
        let target = q * nu;
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..2200 {
            let mid = lo + 0.5 * (hi - lo);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.weighted_sum(mid)? < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (flo, fhi) = (self.weighted_sum(lo)?, self.weighted_sum(hi)?);
        let (root, residual) = if (target - flo).abs() <= (fhi - target).abs() {
            (lo, (target - flo).abs())
        } else {
            (hi, (fhi - target).abs())
        };
        if residual > q * tol {
            return Err(Error::Numerical(format!(
                "fixed-point residual {residual:e} exceeds {:e} at nu = {nu}",
                q * tol
            )));
        }
        Ok(root)
    }

    /// `[r0, exo_map(r0), exo_map^2(r0), ...]`, `steps + 1` values.
    pub fn iterate_exo(&self, r0: f64, nu: f64, steps: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(steps + 1);
        let mut r = r0;
        Self::unit("r0", r)?;
        out.push(r);
        for _ in 0..steps {
            r = self.exo_map(r, nu)?;
            out.push(r);
        }
        Ok(out)
    }

    pub fn iterate_endo(&self, r0: f64, steps: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(steps + 1);
        let mut r = r0;
        Self::unit("r0", r)?;
        out.push(r);
        for _ in 0..steps {
            r = self.endo_map(r)?;
            out.push(r);
        }
        Ok(out)
    }

    /// All fixed points of the endogenous map, found by a sign-change scan of
    /// `endo_map(r) - r` over `scan_grid` intervals and refined by bisection
    /// to width `tol`.
    pub fn find_endo_fixed_points(&self, scan_grid: usize, tol: f64) -> Result<FixedPointReport> {
        self.require_dynamics()?;
        if scan_grid < 1000 {
            return Err(Error::Config(format!("scan grid must be >= 1000, got {scan_grid}")));
        }
        let h = 1.0 / scan_grid as f64;
        let rs: Vec<f64> = (0..=scan_grid).map(|j| j as f64 * h).collect();
        let g = rs
            .par_iter()
            .map(|&r| if r == 0.0 || r == 1.0 { Ok(0.0) } else { self.endo_displacement(r) })
            .collect::<Result<Vec<f64>>>()?;

        let noise = 64.0 * f64::EPSILON * self.q().max(1.0) / self.n() as f64;
        if g.iter().all(|v| v.abs() <= noise) {
            let points = [0.0, 1.0]
                .iter()
                .map(|&r| {
                    let slope = self.endo_slope(r)?;
                    Ok(FixedPoint { location: r, slope, stability: Stability::from_slope(slope) })
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(FixedPointReport {
                points,
                basins: Vec::new(),
                warnings: vec!["the endogenous map is the identity up to rounding; every point is fixed".into()],
                identity: true,
            });
        }

        let mut roots = vec![0.0];
        let mut warnings = Vec::new();
        for j in 1..scan_grid {
            if g[j] == 0.0 {
                roots.push(rs[j]);
                continue;
            }
            if j + 1 < scan_grid && g[j + 1] != 0.0 && g[j].signum() != g[j + 1].signum() {
                roots.push(self.refine_root(rs[j], rs[j + 1], g[j], tol)?);
            }
            // A local minimum of |g| without a sign change may hide a
            // tangency or a pair of close roots.
            let (a, b, c) = (g[j - 1].abs(), g[j].abs(), g[j + 1].abs());
            let same_sign = g[j - 1].signum() == g[j].signum() && g[j].signum() == g[j + 1].signum();
            if j > 1 && j + 1 < scan_grid && same_sign && b < a && b < c && b < 1e-3 * h * h {
                warnings.push(format!(
                    "|phi(r) - r| has a near-zero local minimum {b:e} at r = {} without a sign change; a root may be missed",
                    rs[j]
                ));
            }
        }
        roots.push(1.0);
        roots.dedup();
        for w in roots.windows(2) {
            if w[1] - w[0] < 2.0 * h {
                warnings.push(format!(
                    "fixed points {} and {} are closer than the scan resolution",
                    w[0], w[1]
                ));
            }
        }

        let points = roots
            .iter()
            .map(|&r| {
                let slope = self.endo_slope(r)?;
                Ok(FixedPoint { location: r, slope, stability: Stability::from_slope(slope) })
            })
            .collect::<Result<Vec<_>>>()?;
        let basins = self.assign_basins(&roots)?;
        Ok(FixedPointReport { points, basins, warnings, identity: false })
    }

    fn refine_root(&self, mut lo: f64, mut hi: f64, g_lo: f64, tol: f64) -> Result<f64> {
        let lo_sign = g_lo.signum();
        while hi - lo > tol {
            let mid = lo + 0.5 * (hi - lo);
            if mid <= lo || mid >= hi {
                break;
            }
            let gm = self.endo_displacement(mid)?;
            if gm == 0.0 {
                return Ok(mid);
            }
            if gm.signum() == lo_sign {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo + 0.5 * (hi - lo))
    }

    fn assign_basins(&self, roots: &[f64]) -> Result<Vec<Basin>> {
        let mut pieces = Vec::with_capacity(2 * roots.len());
        for (i, &r) in roots.iter().enumerate() {
            pieces.push(Basin { lower: r, upper: r, lower_closed: true, upper_closed: true, limit: r });
            if let Some(&next) = roots.get(i + 1) {
                let mid = r + 0.5 * (next - r);
                let limit = if self.endo_displacement(mid)? > 0.0 { next } else { r };
                pieces.push(Basin {
                    lower: r,
                    upper: next,
                    lower_closed: false,
                    upper_closed: false,
                    limit,
                });
            }
        }
        let mut merged: Vec<Basin> = Vec::with_capacity(pieces.len());
        for p in pieces {
            match merged.last_mut() {
                Some(last) if last.limit == p.limit => {
                    last.upper = p.upper;
                    last.upper_closed = p.upper_closed;
                }
                _ => merged.push(p),
            }
        }
        Ok(merged)
    }

    /// Limit of endogenous iteration from `r0` using a precomputed report.
    pub fn endo_limit_with(
        &self,
        report: &FixedPointReport,
        r0: f64,
        max_iter: usize,
        tol: f64,
    ) -> Result<EndoLimit> {
        Self::unit("r0", r0)?;
        if report.identity {
            return Ok(EndoLimit { value: r0, boundary: false });
        }
        if let Some(p) = report.point_near(r0, tol) {
            return Ok(EndoLimit {
                value: p.location,
                boundary: p.stability != Stability::Attracting,
            });
        }
        let basin = report
            .basin_of(r0)
            .ok_or_else(|| Error::Numerical(format!("no basin contains r0 = {r0}")))?;
        let target = report
            .point_near(basin.limit, 0.0)
            .copied()
            .ok_or_else(|| Error::Numerical("basin limit is not a reported fixed point".into()))?;
        if target.stability == Stability::Marginal
            && (r0 - target.location).abs() < MARGINAL_ITERATION_RADIUS
        {
            let mut r = r0;
            for _ in 0..max_iter {
                r = self.endo_map(r)?;
                if self.endo_displacement(r)?.abs() <= tol {
                    return Ok(EndoLimit { value: r, boundary: false });
                }
            }
            return Err(Error::Numerical(format!(
                "iteration from r0 = {r0} did not settle within {max_iter} steps (near-marginal fixed point {})",
                target.location
            )));
        }
        Ok(EndoLimit { value: basin.limit, boundary: false })
    }

    /// Limit of endogenous iteration from `r0`.
    pub fn endo_limit(&self, r0: f64, max_iter: usize, tol: f64) -> Result<EndoLimit> {
        let report = self.find_endo_fixed_points(DEFAULT_SCAN_GRID, tol)?;
        self.endo_limit_with(&report, r0, max_iter, tol)
    }

    /// Limiting marginal CDF on a uniform grid: the limit map composed with
    /// the driver `N` (exogenous) or the initial CDF `R_0` (endogenous).
    /// Grid points are evaluated in parallel; results do not depend on the
    /// thread count.
    pub fn limit_cdf(&self, mode: Mode, driver: &DistributionSpec, grid: usize) -> Result<SampledCdf> {
        let xs = uniform_grid(grid)?;
        match mode {
            Mode::Exo => {
                let cdf = xs
                    .par_iter()
                    .map(|&x| self.solve_exo_fixed_point(driver.cdf(x), DEFAULT_TOL))
                    .collect::<Result<Vec<f64>>>()?;
                let atoms: Vec<f64> = driver.atom_list().iter().map(|a| a.0).collect();
                SampledCdf::from_grid_values(xs, cdf, &atoms)
            }
            Mode::Endo => {
                let report = self.find_endo_fixed_points(DEFAULT_SCAN_GRID, DEFAULT_TOL)?;
                let eval = |x: f64| -> Result<f64> {
                    Ok(self
                        .endo_limit_with(&report, driver.cdf(x), DEFAULT_MAX_ITER, DEFAULT_TOL)?
                        .value)
                };
                let cdf = xs.par_iter().map(|&x| eval(x)).collect::<Result<Vec<f64>>>()?;
                let mut atoms = Vec::new();
                if cdf[0] > 0.0 {
                    atoms.push(0.0);
                }
                for j in 1..xs.len() {
                    if cdf[j] > cdf[j - 1] {
                        let (mut lo, mut hi) = (xs[j - 1], xs[j]);
                        loop {
                            let mid = lo + 0.5 * (hi - lo);
                            if mid <= lo || mid >= hi {
                                break;
                            }
                            if eval(mid)? >= cdf[j] {
                                hi = mid;
                            } else {
                                lo = mid;
                            }
                        }
                        atoms.push(hi);
                    }
                }
                SampledCdf::from_grid_values(xs, cdf, &atoms)
            }
        }
    }
}
