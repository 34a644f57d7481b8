//! Large-population behavior of exogenous systems driven by `(p, q)`
//! weight families.
//!
//! A family assigns a weight vector to every population size `n`. It is a
//! `(p, q)`-family when the lowest `k(n)` ranks carry total weight at most
//! `p` (with the next rank pushing the sum past `p`), the whole vector sums
//! to `q`, `k(n) ln n / n` vanishes, and above rank `k(n)` the weights are
//! flat up to deviations `delta_i(n) = o(1/n)` around
//! `(q - p) / (n - k(n))`. For such families the exogenous limit tends to
//! zero where `N < p/q` and to `(q N - p) / (q - p)` where `N > p/q`.
//!
//! The asymptotic conditions are not decidable from finitely many `n`, so
//! [`validate_pq`] checks the inequalities exactly at each `n` of a ladder and
//! checks the decay conditions as trends across the ladder.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{RankSystem, WeightVector, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::orderstats::OrderStatContext;
use crate::presets::{preset, sqrt_head};

/// Slack on the mass inequalities; sums of `k` equal floats are not exact.
const MASS_SLACK: f64 = 1e-12;
/// Margin `epsilon` in the check `m > (k + epsilon) ln m`.
pub const LOG_BOUND_EPSILON: f64 = 0.5;

type Generator = Arc<dyn Fn(usize) -> Result<WeightVector> + Send + Sync>;

/// How the head length `k(n)` is chosen.
#[derive(Clone)]
pub enum HeadRule {
    Constant(usize),
    /// `floor(sqrt n)`.
    SqrtFloor,
    /// The largest `k` whose head sum does not exceed `p`.
    LargestBelowP,
    Custom(Arc<dyn Fn(usize) -> usize + Send + Sync>),
}

impl fmt::Debug for HeadRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeadRule::Constant(k) => write!(f, "Constant({k})"),
            HeadRule::SqrtFloor => f.write_str("SqrtFloor"),
            HeadRule::LargestBelowP => f.write_str("LargestBelowP"),
            HeadRule::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// A rule `n -> weights` together with the claimed `p`, `q` and `k(n)`.
#[derive(Clone)]
pub struct PQSequenceFamily {
    pub name: String,
    pub p: f64,
    pub q: f64,
    pub head: HeadRule,
    generator: Generator,
}

impl fmt::Debug for PQSequenceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PQSequenceFamily")
            .field("name", &self.name)
            .field("p", &self.p)
            .field("q", &self.q)
            .field("head", &self.head)
            .finish()
    }
}

impl PQSequenceFamily {
    pub fn new(
        name: impl Into<String>,
        p: f64,
        q: f64,
        head: HeadRule,
        generator: impl Fn(usize) -> Result<WeightVector> + Send + Sync + 'static,
    ) -> Self {
        PQSequenceFamily { name: name.into(), p, q, head, generator: Arc::new(generator) }
    }

    /// Families backed by the named presets: `fig5` and `sqrt` with
    /// `p = 2, q = 3`, and `uniform3` (claimed `p = 2, q = 3`, not a valid
    /// family).
    pub fn from_preset(name: &str) -> Result<Self> {
        let owned = name.to_string();
        let head = match name {
            "fig5" => HeadRule::Constant(2),
            "sqrt" => HeadRule::SqrtFloor,
            "uniform3" => HeadRule::LargestBelowP,
            other => {
                return Err(Error::Config(format!(
                    "no (p,q) family for preset {other:?}; use fig5, sqrt or uniform3"
                )))
            }
        };
        Ok(Self::new(name, 2.0, 3.0, head, move |n| preset(&owned, n)))
    }

    /// Same generator and head rule, different claimed `p`.
    pub fn with_p(&self, p: f64) -> Self {
        PQSequenceFamily { p, ..self.clone() }
    }

    pub fn weights(&self, n: usize) -> Result<WeightVector> {
        (self.generator)(n)
    }

    /// `k(n)` for the given weights.
    pub fn k(&self, n: usize, weights: &WeightVector) -> usize {
        match &self.head {
            HeadRule::Constant(k) => *k,
            HeadRule::SqrtFloor => sqrt_head(n),
            HeadRule::LargestBelowP => (0..=weights.len())
                .rev()
                .find(|&k| weights.head_sum(k) <= self.p + MASS_SLACK)
                .unwrap_or(0),
            HeadRule::Custom(f) => f(n),
        }
    }

    /// Flat tail level `(q - p) / (n - k)`.
    pub fn tail_level(&self, n: usize, k: usize) -> f64 {
        (self.q - self.p) / (n - k) as f64
    }
}

/// Which defining condition failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Clause {
    /// `head(k) <= p < head(k + 1)`.
    HeadMass,
    /// Weights sum to `q`.
    TotalMass,
    /// `1 < k(n) < n`.
    HeadRange,
    /// `k(n) ln n / n` shrinking across the ladder.
    HeadGrowth,
    /// `n max |delta_i|` shrinking across the ladder.
    TailFlatness,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Clause::HeadMass => "head mass (sum of lowest k weights <= p < sum of lowest k+1)",
            Clause::TotalMass => "total mass (weights sum to q)",
            Clause::HeadRange => "head range (1 < k < n)",
            Clause::HeadGrowth => "head growth (k ln n / n shrinking)",
            Clause::TailFlatness => "tail flatness (n max|delta| shrinking)",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationRow {
    pub n: usize,
    pub k: usize,
    pub head_sum: f64,
    pub head_next: f64,
    pub total: f64,
    pub k_log_ratio: f64,
    pub scaled_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClauseFailure {
    pub clause: Clause,
    /// Ladder entry, or `None` for trend clauses.
    pub n: Option<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PqValidation {
    pub family: String,
    pub p: f64,
    pub q: f64,
    pub rows: Vec<ValidationRow>,
    pub failures: Vec<ClauseFailure>,
}

impl PqValidation {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn failed_clauses(&self) -> Vec<Clause> {
        let mut c: Vec<Clause> = self.failures.iter().map(|f| f.clause).collect();
        c.dedup();
        c
    }
}

impl fmt::Display for PqValidation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "family {} with p = {}, q = {}", self.family, self.p, self.q)?;
        writeln!(f, "{:>8} {:>6} {:>14} {:>14} {:>14} {:>14} {:>14}", "n", "k", "head", "head+1", "total", "k ln n / n", "n max|delta|")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:>8} {:>6} {:>14.10} {:>14.10} {:>14.10} {:>14.6e} {:>14.6e}",
                r.n, r.k, r.head_sum, r.head_next, r.total, r.k_log_ratio, r.scaled_delta
            )?;
        }
        if self.passed() {
            writeln!(f, "result: PASS")
        } else {
            writeln!(f, "result: FAIL")?;
            for fail in &self.failures {
                match fail.n {
                    Some(n) => writeln!(f, "  {} at n = {}: {}", fail.clause, n, fail.detail)?,
                    None => writeln!(f, "  {}: {}", fail.clause, fail.detail)?,
                }
            }
            Ok(())
        }
    }
}

/// True when the column shrinks along the ladder: nonincreasing within
/// `1e-12`, and strictly smaller at the end unless it is zero throughout.
fn shrinks(col: &[f64]) -> bool {
    if col.iter().all(|v| v.abs() <= 1e-12) {
        return true;
    }
    col.windows(2).all(|w| w[1] <= w[0] + 1e-12) && col.last() < col.first()
}

/// Checks the defining conditions of a `(p, q)`-family on a ladder of sizes.
pub fn validate_pq(family: &PQSequenceFamily, n_ladder: &[usize]) -> Result<PqValidation> {
    if n_ladder.is_empty() {
        return Err(Error::Config("empty n ladder".into()));
    }
    if n_ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("n ladder must be strictly increasing".into()));
    }
    let (p, q) = (family.p, family.q);
    let mut rows = Vec::with_capacity(n_ladder.len());
    let mut failures = Vec::new();
    for &n in n_ladder {
        let w = family.weights(n)?;
        let k = family.k(n, &w);
        if n <= k + 1 {
            return Err(Error::Config(format!("ladder entry n = {n} must exceed k(n) + 1 = {}", k + 1)));
        }
        let head_sum = w.head_sum(k);
        let head_next = w.head_sum(k + 1);
        let total = w.q();
        let level = family.tail_level(n, k);
        let max_delta = w.alphas()[k..]
            .iter()
            .map(|a| (a - level).abs())
            .fold(0.0, f64::max);
        let row = ValidationRow {
            n,
            k,
            head_sum,
            head_next,
            total,
            k_log_ratio: k as f64 * (n as f64).ln() / n as f64,
            scaled_delta: n as f64 * max_delta,
        };
        if !(head_sum <= p + MASS_SLACK && head_next > p + MASS_SLACK) {
            failures.push(ClauseFailure {
                clause: Clause::HeadMass,
                n: Some(n),
                detail: format!("need {head_sum} <= {p} < {head_next}"),
            });
        }
        if (total - q).abs() > MASS_SLACK.max(q * 1e-12) {
            failures.push(ClauseFailure {
                clause: Clause::TotalMass,
                n: Some(n),
                detail: format!("weights sum to {total}, claimed q = {q}"),
            });
        }
        if !(1 < k && k < n) {
            failures.push(ClauseFailure {
                clause: Clause::HeadRange,
                n: Some(n),
                detail: format!("k = {k}"),
            });
        }
        rows.push(row);
    }
    let ratios: Vec<f64> = rows.iter().map(|r| r.k_log_ratio).collect();
    if !shrinks(&ratios) {
        failures.push(ClauseFailure {
            clause: Clause::HeadGrowth,
            n: None,
            detail: format!("k ln n / n along ladder: {ratios:?}"),
        });
    }
    let deltas: Vec<f64> = rows.iter().map(|r| r.scaled_delta).collect();
    if !shrinks(&deltas) {
        failures.push(ClauseFailure {
            clause: Clause::TailFlatness,
            n: None,
            detail: format!("n max|delta| along ladder: {deltas:?}"),
        });
    }
    Ok(PqValidation { family: family.name.clone(), p, q, rows, failures })
}

/// `m(n) = ceil(k ln n)` with its side conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MOfN {
    pub m: usize,
    /// `m / n`, which should vanish along a ladder.
    pub ratio: f64,
    /// Whether `m > (k + 0.5) ln m`.
    pub log_bound_holds: bool,
}

pub fn m_of_n(k: usize, n: usize) -> Result<MOfN> {
    if n < 2 {
        return Err(Error::Domain(format!("m(n) needs n >= 2, got {n}")));
    }
    let m = (k as f64 * (n as f64).ln()).ceil() as usize;
    Ok(MOfN {
        m,
        ratio: m as f64 / n as f64,
        log_bound_holds: m as f64 > (k as f64 + LOG_BOUND_EPSILON) * (m as f64).ln(),
    })
}

/// Lower binomial tail `sum_{i<j} C(n,i) (m/n)^i (1 - m/n)^(n-i)`.
pub fn p_bound(n: usize, j: usize, m: usize) -> Result<f64> {
    if j == 0 || j > n {
        return Err(Error::Domain(format!("j = {j} outside [1, {n}]")));
    }
    if m > n {
        return Err(Error::Domain(format!("m = {m} exceeds n = {n}")));
    }
    OrderStatContext::new(n)?.binomial_lower_tail(j, m as f64 / n as f64)
}

/// `max_{j <= k} p_bound(n, j, m(n))`.
pub fn max_p_bound(n: usize, k: usize) -> Result<f64> {
    let m = m_of_n(k, n)?.m.min(n);
    let ctx = OrderStatContext::new(n)?;
    let r = m as f64 / n as f64;
    (1..=k.min(n)).try_fold(0.0_f64, |acc, j| Ok(acc.max(ctx.binomial_lower_tail(j, r)?)))
}

/// Slopes of the exogenous limit map at `N = 0` and `N = 1`:
/// `q / (n alpha_1)` and `q / (n alpha_n)`, infinite when the weight is zero.
pub fn boundary_slopes(w: &WeightVector) -> (f64, f64) {
    let n = w.len() as f64;
    let a = w.alphas();
    let slope = |alpha: f64| if alpha > 0.0 { w.q() / (n * alpha) } else { f64::INFINITY };
    (slope(a[0]), slope(a[w.len() - 1]))
}

/// Large-`n` limit of the exogenous fixed point for driver value `nu`:
/// 0 up to and including `p/q`, `(q nu - p)/(q - p)` above.
pub fn large_n_limit(p: f64, q: f64, nu: f64) -> Result<f64> {
    large_n_limit_flagged(p, q, nu).map(|v| v.0)
}

/// As [`large_n_limit`], also reporting whether `nu` sits at the threshold.
pub fn large_n_limit_flagged(p: f64, q: f64, nu: f64) -> Result<(f64, bool)> {
    if !(p > 0.0 && p < q) {
        return Err(Error::Config(format!("need 0 < p < q, got p = {p}, q = {q}")));
    }
    if !(0.0..=1.0).contains(&nu) {
        return Err(Error::Domain(format!("nu = {nu} outside [0,1]")));
    }
    let threshold = p / q;
    if nu < threshold {
        Ok((0.0, false))
    } else if nu == threshold {
        Ok((0.0, true))
    } else {
        Ok(((q * nu - p) / (q - p), false))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub nu: f64,
    pub rstar: f64,
    pub limit: f64,
    pub gap: f64,
    pub at_threshold: bool,
}

/// `|R*_n(nu) - limit(nu)|` for every `(n, nu)` cell, rows ordered by `n`
/// then `nu`. The family must pass [`validate_pq`] on the ladder.
pub fn convergence_table(
    family: &PQSequenceFamily,
    n_ladder: &[usize],
    nu_grid: &[f64],
) -> Result<Vec<ConvergenceRow>> {
    let report = validate_pq(family, n_ladder)?;
    if !report.passed() {
        return Err(Error::Config(format!("family is not (p,q) on this ladder:\n{report}")));
    }
    let per_n = n_ladder
        .par_iter()
        .map(|&n| {
            let sys = RankSystem::new(family.weights(n)?)?;
            nu_grid
                .par_iter()
                .map(|&nu| {
                    let rstar = sys.solve_exo_fixed_point(nu, DEFAULT_TOL)?;
                    let (limit, at_threshold) = large_n_limit_flagged(family.p, family.q, nu)?;
                    Ok(ConvergenceRow { n, nu, rstar, limit, gap: (rstar - limit).abs(), at_threshold })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_n.into_iter().flatten().collect())
}
