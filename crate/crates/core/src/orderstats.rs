//! Order-statistic distribution functions as polynomials in the marginal CDF
//! value `R`.
//!
//! For `n` independent draws with marginal CDF value `R` at some point `x`,
//! the `k`-th smallest is below `x` with probability
//! `sum_{i>=k} C(n,i) R^i (1-R)^(n-i)`. Every routine here works on that
//! scalar `R`; composing with an actual CDF happens in the callers.
//!
//! Binomial coefficients are exact integers for `n <= 60` and come from
//! log-factorials above that, so that `n` in the thousands neither overflows
//! nor underflows.

use statrs::function::factorial::ln_binomial;

use crate::distrib::DistributionSpec;
use crate::dynamics::WeightVector;
use crate::error::{Error, Result};

/// Largest row for which binomial coefficients are computed exactly.
pub const EXACT_BINOMIAL_MAX: usize = 60;

/// One row of binomial probabilities `C(n, j) r^j (1-r)^(n-j)`.
#[derive(Debug, Clone)]
struct BinomialRow {
    n: usize,
    exact: Option<Vec<f64>>,
    ln_coeff: Vec<f64>,
}

impl BinomialRow {
    fn new(n: usize) -> Self {
        let exact = (n <= EXACT_BINOMIAL_MAX).then(|| {
            let mut row = Vec::with_capacity(n + 1);
            let mut c: u128 = 1;
            for j in 0..=n as u128 {
                row.push(c as f64);
                c = c * (n as u128 - j) / (j + 1);
            }
            row
        });
        let ln_coeff = (0..=n as u64).map(|j| ln_binomial(n as u64, j)).collect();
        BinomialRow { n, exact, ln_coeff }
    }

    /// Probability of exactly `j` successes; `r` must lie strictly in (0,1).
    fn pmf(&self, j: usize, r: f64, ln_r: f64, ln_s: f64) -> f64 {
        match &self.exact {
            Some(c) => c[j] * r.powi(j as i32) * (1.0 - r).powi((self.n - j) as i32),
            None => (self.ln_coeff[j] + j as f64 * ln_r + (self.n - j) as f64 * ln_s).exp(),
        }
    }

    /// The whole row. Beyond the exact range the row is built outward from
    /// the mode by the ratio recurrence and normalized, so each entry carries
    /// relative error proportional to its distance from the mode.
    fn row(&self, r: f64) -> Vec<f64> {
        if self.exact.is_some() {
            let (ln_r, ln_s) = (r.ln(), (-r).ln_1p());
            return (0..=self.n).map(|j| self.pmf(j, r, ln_r, ln_s)).collect();
        }
        let n = self.n;
        let odds = r / (1.0 - r);
        let mode = (((n + 1) as f64 * r).floor() as usize).min(n);
        let mut row = vec![0.0; n + 1];
        row[mode] = 1.0;
        for j in mode..n {
            let next = row[j] * odds * (n - j) as f64 / (j + 1) as f64;
            if next < f64::MIN_POSITIVE {
                break;
            }
            row[j + 1] = next;
        }
        for j in (1..=mode).rev() {
            let prev = row[j] * j as f64 / ((n - j + 1) as f64 * odds);
            if prev < f64::MIN_POSITIVE {
                break;
            }
            row[j - 1] = prev;
        }
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|p| *p /= total);
        row
    }

    /// `P[X >= k]` for `X ~ Binomial(n, r)`, summing whichever tail lies
    /// away from the mean so values near 0 and 1 keep their accuracy.
    fn upper_tail(&self, k: usize, r: f64) -> f64 {
        if k == 0 {
            return 1.0;
        }
        if k > self.n {
            return 0.0;
        }
        if r <= 0.0 {
            return 0.0;
        }
        if r >= 1.0 {
            return 1.0;
        }
        let row = self.row(r);
        if k as f64 > self.n as f64 * r {
            row[k..].iter().sum::<f64>().min(1.0)
        } else {
            (1.0 - row[..k].iter().sum::<f64>()).clamp(0.0, 1.0)
        }
    }

    fn lower_tail(&self, k: usize, r: f64) -> f64 {
        if k == 0 {
            return 0.0;
        }
        if k > self.n {
            return 1.0;
        }
        if r <= 0.0 {
            return 1.0;
        }
        if r >= 1.0 {
            return 0.0;
        }
        let row = self.row(r);
        if (k as f64) <= self.n as f64 * r {
            row[..k].iter().sum::<f64>().min(1.0)
        } else {
            (1.0 - row[k..].iter().sum::<f64>()).clamp(0.0, 1.0)
        }
    }
}

/// Cached binomial rows for a population of size `n`.
#[derive(Debug, Clone)]
pub struct OrderStatContext {
    n: usize,
    row: BinomialRow,
    /// Row `n - 1`, used by the derivatives.
    prev_row: BinomialRow,
}

impl OrderStatContext {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("population size must be >= 1".into()));
        }
        Ok(OrderStatContext { n, row: BinomialRow::new(n), prev_row: BinomialRow::new(n - 1) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Exact binomial coefficient `C(n, j)` when `n <= 60`.
    pub fn binomial(&self, j: usize) -> Option<f64> {
        self.row.exact.as_ref().and_then(|c| c.get(j).copied())
    }

    /// `ln C(n, j)`, exact up to rounding for `n <= 60` and from log-gamma
    /// beyond.
    pub fn ln_binomial(&self, j: usize) -> Option<f64> {
        match self.binomial(j) {
            Some(c) => Some(c.ln()),
            None => self.row.ln_coeff.get(j).copied(),
        }
    }

    fn check(&self, k: usize, r: f64) -> Result<()> {
        if k == 0 || k > self.n {
            return Err(Error::Domain(format!("rank k = {k} outside [1, {}]", self.n)));
        }
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::Domain(format!("R = {r} outside [0,1]")));
        }
        Ok(())
    }

    /// CDF value of the `k`-th smallest of `n` draws, `k` in `1..=n`.
    pub fn theta(&self, k: usize, r: f64) -> Result<f64> {
        self.check(k, r)?;
        if r == 0.0 {
            return Ok(0.0);
        }
        if r == 1.0 {
            return Ok(1.0);
        }
        Ok(self.row.upper_tail(k, r))
    }

    /// Derivative of [`theta`](Self::theta) with respect to `R`:
    /// `n C(n-1, k-1) R^(k-1) (1-R)^(n-k)`.
    pub fn theta_deriv(&self, k: usize, r: f64) -> Result<f64> {
        self.check(k, r)?;
        let n = self.n as f64;
        if r == 0.0 {
            return Ok(if k == 1 { n } else { 0.0 });
        }
        if r == 1.0 {
            return Ok(if k == self.n { n } else { 0.0 });
        }
        let (ln_r, ln_s) = (r.ln(), (-r).ln_1p());
        Ok(n * self.prev_row.pmf(k - 1, r, ln_r, ln_s))
    }

    /// `P[Binomial(n, r) < j]`, the lower tail complementary to `theta(j, r)`.
    pub fn binomial_lower_tail(&self, j: usize, r: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::Domain(format!("R = {r} outside [0,1]")));
        }
        Ok(self.row.lower_tail(j, r))
    }

    fn check_weights(&self, weights: &WeightVector, r: f64) -> Result<()> {
        if weights.len() != self.n {
            return Err(Error::Domain(format!(
                "weight vector has length {}, context has n = {}",
                weights.len(),
                self.n
            )));
        }
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::Domain(format!("R = {r} outside [0,1]")));
        }
        Ok(())
    }

    /// `sum_i alpha_i theta(i, R)`.
    ///
    /// Evaluated as `sum_j P[X = j] A_j` with `A_j` the prefix sums of the
    /// weights, which needs one binomial row instead of `n` tails.
    pub fn weighted_theta_sum(&self, weights: &WeightVector, r: f64) -> Result<f64> {
        self.check_weights(weights, r)?;
        let q = weights.q();
        if r == 0.0 {
            return Ok(0.0);
        }
        if r == 1.0 {
            return Ok(q);
        }
        let pmf = self.row.row(r);
        let prefix = weights.prefix_sums();
        let value = if r <= 0.5 {
            pmf.iter().zip(prefix).map(|(p, a)| p * a).sum::<f64>()
        } else {
            q - pmf.iter().zip(prefix).map(|(p, a)| p * (q - a)).sum::<f64>()
        };
        Ok(value.clamp(0.0, q))
    }

    /// Derivative of [`weighted_theta_sum`](Self::weighted_theta_sum) in `R`.
    pub fn weighted_theta_sum_deriv(&self, weights: &WeightVector, r: f64) -> Result<f64> {
        self.check_weights(weights, r)?;
        let n = self.n as f64;
        let alphas = weights.alphas();
        if r == 0.0 {
            return Ok(n * alphas[0]);
        }
        if r == 1.0 {
            return Ok(n * alphas[self.n - 1]);
        }
        let pmf = self.prev_row.row(r);
        Ok(n * pmf.iter().zip(alphas).map(|(p, a)| p * a).sum::<f64>())
    }

    /// Distribution of the `k`-th order statistic of `n` draws from `spec`.
    ///
    /// Atom mixtures stay atom mixtures with the masses `theta(F(l)) -
    /// theta(F(l-))`; any other input is tabulated on `grid` points.
    pub fn order_stat_distribution(
        &self,
        k: usize,
        spec: &DistributionSpec,
        grid: usize,
    ) -> Result<DistributionSpec> {
        self.check(k, 0.0)?;
        match spec {
            DistributionSpec::AtomMixture { atoms } => {
                let mut out = Vec::with_capacity(atoms.len());
                for &(loc, _) in atoms {
                    let mass = self.theta(k, spec.cdf(loc))? - self.theta(k, spec.cdf_left(loc))?;
                    if mass > 0.0 {
                        out.push((loc, mass));
                    }
                }
                let total: f64 = out.iter().map(|a| a.1).sum();
                for a in &mut out {
                    a.1 /= total;
                }
                DistributionSpec::atoms(out)
            }
            _ => {
                let xs = crate::distrib::uniform_grid(grid)?;
                let values = xs
                    .iter()
                    .map(|&x| self.theta(k, spec.cdf(x)))
                    .collect::<Result<Vec<_>>>()?;
                DistributionSpec::tabulated(values)
            }
        }
    }
}
