//! Cumulative distribution functions on `[0, 1]`.
//!
//! A [`DistributionSpec`] is an immutable description of a CDF. Every variant
//! is right-continuous, so at an atom the CDF value already includes the
//! atom's mass; the left limit is available separately through
//! [`DistributionSpec::cdf_left`].
//!
//! [`SampledCdf`] is the grid form used for export and for composing the
//! limit maps with a driver.

use std::io::{BufRead, Write};

use rand::distributions::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of grid points for sampled CDFs.
pub const DEFAULT_GRID: usize = 1001;

/// Slack allowed when checking that masses sum to one.
const MASS_TOL: f64 = 1e-12;

/// A distribution supported on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    /// `F(x) = x`.
    Uniform,
    /// `F(x) = x^exponent`.
    PowerLaw { exponent: f64 },
    /// Finite set of point masses, sorted by location with distinct locations.
    AtomMixture { atoms: Vec<(f64, f64)> },
    /// Linear interpolation through `(knots[i], values[i])`; zero before the
    /// first knot and one after the last.
    PiecewiseLinear { knots: Vec<f64>, values: Vec<f64> },
    /// Values on the uniform grid `j / (len - 1)`, linearly interpolated.
    /// A positive first value is an atom at zero.
    Tabulated { values: Vec<f64> },
    /// Convex combination of other distributions.
    Mixture { components: Vec<(DistributionSpec, f64)> },
}

impl DistributionSpec {
    pub fn uniform() -> Self {
        DistributionSpec::Uniform
    }

    pub fn power_law(exponent: f64) -> Result<Self> {
        let spec = DistributionSpec::PowerLaw { exponent };
        spec.validate()?;
        Ok(spec)
    }

    /// Point masses; duplicate locations are merged and the list is sorted.
    pub fn atoms(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = atoms.into_iter().collect();
        for &(loc, w) in &atoms {
            if !(0.0..=1.0).contains(&loc) || !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidDistribution(format!(
                    "atom ({loc}, {w}) needs location in [0,1] and positive weight"
                )));
            }
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (loc, w) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == loc => last.1 += w,
                _ => merged.push((loc, w)),
            }
        }
        let spec = DistributionSpec::AtomMixture { atoms: merged };
        spec.validate()?;
        Ok(spec)
    }

    /// Unit point mass at `loc`.
    pub fn point_mass(loc: f64) -> Result<Self> {
        Self::atoms([(loc, 1.0)])
    }

    pub fn piecewise_linear(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let spec = DistributionSpec::PiecewiseLinear { knots, values };
        spec.validate()?;
        Ok(spec)
    }

    /// Values on a uniform grid over `[0, 1]`. A final value within `1e-12`
    /// of one is snapped to exactly one.
    pub fn tabulated(mut values: Vec<f64>) -> Result<Self> {
        if let Some(last) = values.last_mut() {
            if (*last - 1.0).abs() <= MASS_TOL {
                *last = 1.0;
            }
        }
        let spec = DistributionSpec::Tabulated { values };
        spec.validate()?;
        Ok(spec)
    }

    /// Convex combination; components with zero weight are dropped.
    pub fn mixture(components: Vec<(DistributionSpec, f64)>) -> Result<Self> {
        let components: Vec<_> = components.into_iter().filter(|c| c.1 != 0.0).collect();
        let spec = DistributionSpec::Mixture { components };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks the construction invariants of the variant.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidDistribution(msg));
        match self {
            DistributionSpec::Uniform => Ok(()),
            DistributionSpec::PowerLaw { exponent } => {
                if *exponent > 0.0 && exponent.is_finite() {
                    Ok(())
                } else {
                    bad(format!("power-law exponent must be positive, got {exponent}"))
                }
            }
            DistributionSpec::AtomMixture { atoms } => {
                if atoms.is_empty() {
                    return bad("atom mixture needs at least one atom".into());
                }
                for pair in atoms.windows(2) {
                    if !(pair[0].0 < pair[1].0) {
                        return bad("atom locations must be strictly increasing".into());
                    }
                }
                if atoms
                    .iter()
                    .any(|&(l, w)| !(0.0..=1.0).contains(&l) || !(w > 0.0))
                {
                    return bad("atoms need locations in [0,1] and positive weights".into());
                }
                let total: f64 = atoms.iter().map(|a| a.1).sum();
                if (total - 1.0).abs() > MASS_TOL {
                    return bad(format!("atom weights sum to {total}, expected 1"));
                }
                Ok(())
            }
            DistributionSpec::PiecewiseLinear { knots, values } => {
                if knots.len() < 2 || knots.len() != values.len() {
                    return bad("piecewise-linear needs >= 2 knots and matching values".into());
                }
                if knots.iter().any(|k| !(0.0..=1.0).contains(k)) {
                    return bad("knots must lie in [0,1]".into());
                }
                if knots.windows(2).any(|p| !(p[0] < p[1])) {
                    return bad("knots must be strictly increasing".into());
                }
                check_monotone_values(values)?;
                if values[0] != 0.0 || *values.last().unwrap() != 1.0 {
                    return bad("piecewise-linear values must run from 0 to 1".into());
                }
                Ok(())
            }
            DistributionSpec::Tabulated { values } => {
                if values.len() < 2 {
                    return bad("tabulated CDF needs at least 2 grid values".into());
                }
                check_monotone_values(values)?;
                if *values.last().unwrap() != 1.0 {
                    return bad("tabulated CDF must end at 1".into());
                }
                Ok(())
            }
            DistributionSpec::Mixture { components } => {
                if components.is_empty() {
                    return bad("mixture needs at least one component".into());
                }
                for (c, w) in components {
                    if !(*w > 0.0) {
                        return bad("mixture weights must be positive".into());
                    }
                    c.validate()?;
                }
                let total: f64 = components.iter().map(|c| c.1).sum();
                if (total - 1.0).abs() > MASS_TOL {
                    return bad(format!("mixture weights sum to {total}, expected 1"));
                }
                Ok(())
            }
        }
    }

    /// CDF value at `x`, which must lie in `[0, 1]`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("x = {x} is outside [0,1]")));
        }
        Ok(self.cdf(x))
    }

    /// CDF value, extended by 0 below the support and 1 above it.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        match self {
            DistributionSpec::Uniform => x,
            DistributionSpec::PowerLaw { exponent } => x.powf(*exponent),
            DistributionSpec::AtomMixture { atoms } => {
                let idx = atoms.partition_point(|a| a.0 <= x);
                if idx == atoms.len() {
                    1.0
                } else {
                    atoms[..idx].iter().map(|a| a.1).sum()
                }
            }
            DistributionSpec::PiecewiseLinear { knots, values } => interp(knots, values, x),
            DistributionSpec::Tabulated { values } => interp_uniform(values, x),
            DistributionSpec::Mixture { components } => {
                components.iter().map(|(c, w)| w * c.cdf(x)).sum::<f64>().min(1.0)
            }
        }
    }

    /// Left limit `F(x-)`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x > 1.0 {
            return 1.0;
        }
        match self {
            DistributionSpec::AtomMixture { atoms } => {
                let idx = atoms.partition_point(|a| a.0 < x);
                atoms[..idx].iter().map(|a| a.1).sum()
            }
            DistributionSpec::Mixture { components } => {
                components.iter().map(|(c, w)| w * c.cdf_left(x)).sum()
            }
            // Only the atom at zero is a discontinuity, and x > 0 here.
            _ => self.cdf(x),
        }
    }

    /// Point masses of the distribution as `(location, mass)`, sorted.
    pub fn atom_list(&self) -> Vec<(f64, f64)> {
        let mut out = match self {
            DistributionSpec::AtomMixture { atoms } => atoms.clone(),
            DistributionSpec::Tabulated { values } if values[0] > 0.0 => vec![(0.0, values[0])],
            DistributionSpec::Mixture { components } => components
                .iter()
                .flat_map(|(c, w)| c.atom_list().into_iter().map(move |(l, m)| (l, m * w)))
                .collect(),
            _ => Vec::new(),
        };
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        out
    }

    /// CDF with the atomic part removed (not renormalized).
    pub fn continuous_part(&self, x: f64) -> f64 {
        let atomic: f64 = self
            .atom_list()
            .iter()
            .take_while(|a| a.0 <= x)
            .map(|a| a.1)
            .sum();
        (self.cdf(x) - atomic).max(0.0)
    }

    /// Generalized inverse `inf { x in [0,1] : F(x) >= u }`.
    pub fn quantile(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let u = u.min(1.0);
        match self {
            DistributionSpec::Uniform => u,
            DistributionSpec::PowerLaw { exponent } => u.powf(1.0 / exponent),
            DistributionSpec::AtomMixture { atoms } => {
                let mut cum = 0.0;
                for &(loc, w) in atoms {
                    cum += w;
                    if cum >= u {
                        return loc;
                    }
                }
                atoms.last().map_or(1.0, |a| a.0)
            }
            DistributionSpec::PiecewiseLinear { knots, values } => {
                inverse_interp(knots.iter().copied(), values, u)
            }
            DistributionSpec::Tabulated { values } => {
                if values[0] >= u {
                    return 0.0;
                }
                let h = 1.0 / (values.len() - 1) as f64;
                inverse_interp((0..values.len()).map(|j| j as f64 * h), values, u)
            }
            DistributionSpec::Mixture { .. } => {
                let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
                if self.cdf(0.0) >= u {
                    return 0.0;
                }
                loop {
                    let mid = lo + 0.5 * (hi - lo);
                    if mid <= lo || mid >= hi {
                        return hi;
                    }
                    if self.cdf(mid) >= u {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
            }
        }
    }

    /// One draw by inverse-CDF sampling; mixtures pick a component first.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            DistributionSpec::Mixture { components } => {
                let u: f64 = rng.sample(Open01);
                let mut cum = 0.0;
                for (c, w) in components {
                    cum += w;
                    if u <= cum {
                        return c.sample(rng);
                    }
                }
                components.last().expect("validated non-empty").0.sample(rng)
            }
            _ => {
                let u: f64 = rng.sample(Open01);
                self.quantile(u)
            }
        }
    }

    /// The CDF on a uniform grid of `grid_size` points with finite-difference
    /// densities; grid points that carry an atom get an infinite density.
    pub fn sample_cdf(&self, grid_size: usize) -> Result<SampledCdf> {
        let xs = uniform_grid(grid_size)?;
        let cdf: Vec<f64> = xs.iter().map(|&x| self.cdf(x)).collect();
        let atoms: Vec<f64> = self.atom_list().iter().map(|a| a.0).collect();
        SampledCdf::from_grid_values(xs, cdf, &atoms)
    }
}

fn check_monotone_values(values: &[f64]) -> Result<()> {
    if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::InvalidDistribution("CDF values must lie in [0,1]".into()));
    }
    if values.windows(2).any(|p| p[1] < p[0]) {
        return Err(Error::InvalidDistribution("CDF values must be nondecreasing".into()));
    }
    Ok(())
}

fn interp(knots: &[f64], values: &[f64], x: f64) -> f64 {
    if x < knots[0] {
        return 0.0;
    }
    let idx = knots.partition_point(|&k| k <= x);
    if idx >= knots.len() {
        return 1.0;
    }
    let (x0, x1) = (knots[idx - 1], knots[idx]);
    let (y0, y1) = (values[idx - 1], values[idx]);
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

fn interp_uniform(values: &[f64], x: f64) -> f64 {
    let m = values.len() - 1;
    let pos = x * m as f64;
    let j = (pos.floor() as usize).min(m - 1);
    let t = pos - j as f64;
    values[j] + (values[j + 1] - values[j]) * t
}

fn inverse_interp(knots: impl Iterator<Item = f64>, values: &[f64], u: f64) -> f64 {
    let knots: Vec<f64> = knots.collect();
    let j = values.partition_point(|&v| v < u);
    if j == 0 {
        return knots[0];
    }
    if j >= values.len() {
        return *knots.last().unwrap();
    }
    let (x0, x1) = (knots[j - 1], knots[j]);
    let (y0, y1) = (values[j - 1], values[j]);
    x0 + (x1 - x0) * (u - y0) / (y1 - y0)
}

/// `grid_size` equally spaced points covering `[0, 1]` with exact endpoints.
pub fn uniform_grid(grid_size: usize) -> Result<Vec<f64>> {
    if grid_size < 2 {
        return Err(Error::Domain(format!("grid size must be >= 2, got {grid_size}")));
    }
    let m = (grid_size - 1) as f64;
    Ok((0..grid_size).map(|j| j as f64 / m).collect())
}

/// A CDF tabulated on a uniform grid over `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledCdf {
    pub xs: Vec<f64>,
    pub cdf: Vec<f64>,
    /// Finite-difference density; `f64::INFINITY` marks atoms.
    pub density: Option<Vec<f64>>,
}

impl SampledCdf {
    pub fn new(xs: Vec<f64>, cdf: Vec<f64>, density: Option<Vec<f64>>) -> Result<Self> {
        if xs.len() != cdf.len() || xs.len() < 2 {
            return Err(Error::InvalidDistribution(
                "sampled CDF needs >= 2 points and matching lengths".into(),
            ));
        }
        if let Some(d) = &density {
            if d.len() != xs.len() {
                return Err(Error::InvalidDistribution("density length mismatch".into()));
            }
        }
        check_monotone_values(&cdf)?;
        Ok(SampledCdf { xs, cdf, density })
    }

    /// Builds the density column from grid values. Points whose nearest
    /// grid index holds an atom are flagged infinite; elsewhere a centered
    /// difference is used unless its window straddles an atom, in which case
    /// the clean one-sided window is used.
    pub fn from_grid_values(xs: Vec<f64>, cdf: Vec<f64>, atoms: &[f64]) -> Result<Self> {
        let m = xs.len();
        let h = if m > 1 { xs[1] - xs[0] } else { 1.0 };
        let jump_in = |a: f64, b: f64| atoms.iter().any(|&l| l > a && l <= b);
        let density = (0..m)
            .map(|j| {
                let x = xs[j];
                if atoms.iter().any(|&l| l > x - 0.5 * h && l <= x + 0.5 * h) {
                    return f64::INFINITY;
                }
                let lo = j.saturating_sub(1);
                let hi = (j + 1).min(m - 1);
                if !jump_in(xs[lo], xs[hi]) {
                    (cdf[hi] - cdf[lo]) / (xs[hi] - xs[lo])
                } else if hi > j && !jump_in(xs[j], xs[hi]) {
                    (cdf[hi] - cdf[j]) / (xs[hi] - xs[j])
                } else if lo < j && !jump_in(xs[lo], xs[j]) {
                    (cdf[j] - cdf[lo]) / (xs[j] - xs[lo])
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        SampledCdf::new(xs, cdf, Some(density))
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Linear interpolation between grid values; 0 below, 1 above.
    pub fn eval(&self, x: f64) -> f64 {
        if x < self.xs[0] {
            return 0.0;
        }
        if x >= *self.xs.last().unwrap() {
            return *self.cdf.last().unwrap();
        }
        let idx = self.xs.partition_point(|&k| k <= x);
        let (x0, x1) = (self.xs[idx - 1], self.xs[idx]);
        let (y0, y1) = (self.cdf[idx - 1], self.cdf[idx]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// Reinterprets the grid values as a tabulated distribution.
    pub fn to_tabulated(&self) -> Result<DistributionSpec> {
        DistributionSpec::tabulated(self.cdf.clone())
    }

    /// Writes `x,cdf,density` (or `x,cdf` without a density column).
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        match &self.density {
            Some(d) => {
                writeln!(out, "x,cdf,density")?;
                for ((x, c), d) in self.xs.iter().zip(&self.cdf).zip(d) {
                    writeln!(out, "{},{},{}", fmt_f64(*x), fmt_f64(*c), fmt_f64(*d))?;
                }
            }
            None => {
                writeln!(out, "x,cdf")?;
                for (x, c) in self.xs.iter().zip(&self.cdf) {
                    writeln!(out, "{},{}", fmt_f64(*x), fmt_f64(*c))?;
                }
            }
        }
        Ok(())
    }

    /// Reads the output of [`SampledCdf::write_csv`]. The density column is
    /// optional and ignored if present.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty CDF table".into()))??;
        let cols: Vec<&str> = header.trim().split(',').collect();
        if cols.len() < 2 || cols[0] != "x" || cols[1] != "cdf" {
            return Err(Error::Parse(format!("expected header starting x,cdf, got {header}")));
        }
        let (mut xs, mut cdf) = (Vec::new(), Vec::new());
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let mut next = |name: &str| -> Result<f64> {
                let field = fields.next().ok_or_else(|| {
                    Error::Parse(format!("line {}: missing {name}", lineno + 2))
                })?;
                parse_f64(field.trim())
                    .map_err(|_| Error::Parse(format!("line {}: bad {name} {field:?}", lineno + 2)))
            };
            xs.push(next("x")?);
            cdf.push(next("cdf")?);
        }
        SampledCdf::new(xs, cdf, None)
    }

    /// True when the grid is uniform on `[0, 1]` within `1e-9`.
    pub fn has_uniform_unit_grid(&self) -> bool {
        let m = (self.xs.len() - 1) as f64;
        self.xs
            .iter()
            .enumerate()
            .all(|(j, &x)| (x - j as f64 / m).abs() <= 1e-9)
    }
}

/// Formats a float with 17 significant digits; infinities as `inf`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{v:.16e}")
    }
}

/// Inverse of [`fmt_f64`].
pub fn parse_f64(s: &str) -> std::result::Result<f64, std::num::ParseFloatError> {
    s.parse::<f64>()
}
