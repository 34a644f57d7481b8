//! Seeded simulation of the agent processes.
//!
//! Three processes are supported: the rank-driven process with exogenous
//! replacements, the same with endogenous replacements (copies of current
//! members), and Bak-Sneppen on a ring. Each replica owns a ChaCha8 stream:
//! the generator is seeded with the master seed and then switched to stream
//! number `replica`, so replicas are independent and reproducible whatever
//! the thread schedule.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distrib::{fmt_f64, uniform_grid, DistributionSpec, SampledCdf};
use crate::dynamics::WeightVector;
use crate::error::{Error, Result};

pub const DEFAULT_STRIDE: usize = 10;
/// Extra evaluation points used by [`ks_distance`].
const KS_GRID: usize = 10_001;

/// Fitness values of `n` agents with the generator that drives them.
#[derive(Debug, Clone)]
pub struct Population {
    pub fitnesses: Vec<f64>,
    pub step_count: u64,
    pub rng: ChaCha8Rng,
}

/// Generator for replica `replica` of master seed `seed`.
pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

impl Population {
    pub fn new(fitnesses: Vec<f64>, rng: ChaCha8Rng) -> Result<Self> {
        if fitnesses.is_empty() {
            return Err(Error::Config("population must be nonempty".into()));
        }
        if let Some(v) = fitnesses.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain(format!("fitness {v} outside [0,1]")));
        }
        Ok(Population { fitnesses, step_count: 0, rng })
    }

    /// `n` independent draws from `initial`.
    pub fn sample(n: usize, initial: &DistributionSpec, mut rng: ChaCha8Rng) -> Result<Self> {
        let fitnesses = (0..n).map(|_| initial.sample(&mut rng)).collect();
        Self::new(fitnesses, rng)
    }

    pub fn len(&self) -> usize {
        self.fitnesses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fitnesses.is_empty()
    }
}

/// Agent indices sorted by `(value, index)`.
pub fn rank_order(values: &[f64], order: &mut Vec<usize>) {
    order.clear();
    order.extend(0..values.len());
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
}

/// One rank-driven step with a caller-supplied replacement rule.
///
/// The agent of rank `i` is replaced with probability `alphas[i]`, by
/// `draw(rng, snapshot)` where `snapshot` holds the values before the step.
pub fn step_rank_with<R, D>(values: &mut [f64], alphas: &[f64], rng: &mut R, mut draw: D)
where
    R: Rng + ?Sized,
    D: FnMut(&mut R, &[f64]) -> f64,
{
    let snapshot = values.to_vec();
    let mut order = Vec::with_capacity(values.len());
    rank_order(&snapshot, &mut order);
    for (rank, &agent) in order.iter().enumerate() {
        if replace(alphas[rank], rng) {
            values[agent] = draw(rng, &snapshot);
        }
    }
}

fn replace<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> bool {
    if alpha >= 1.0 {
        true
    } else if alpha <= 0.0 {
        false
    } else {
        rng.gen::<f64>() < alpha
    }
}

/// Exogenous rank step: replacements are fresh draws from `driver`.
pub fn step_rank_exo(pop: &mut Population, w: &WeightVector, driver: &DistributionSpec) {
    let Population { fitnesses, rng, .. } = pop;
    step_rank_with(fitnesses, w.alphas(), rng, |rng, _| driver.sample(rng));
    pop.step_count += 1;
}

/// Endogenous rank step: replacements copy a uniformly chosen member of the
/// pre-step population.
pub fn step_rank_endo(pop: &mut Population, w: &WeightVector) {
    let Population { fitnesses, rng, .. } = pop;
    step_rank_with(fitnesses, w.alphas(), rng, |rng, snap| snap[rng.gen_range(0..snap.len())]);
    pop.step_count += 1;
}

/// Bak-Sneppen step on a ring: the lowest agent (lowest index on ties) and
/// its two neighbours get fresh draws, left neighbour first.
pub fn step_bs(pop: &mut Population, driver: &DistributionSpec) {
    let n = pop.fitnesses.len();
    let mut min_at = 0;
    for (i, &v) in pop.fitnesses.iter().enumerate() {
        if v < pop.fitnesses[min_at] {
            min_at = i;
        }
    }
    for site in [(min_at + n - 1) % n, min_at, (min_at + 1) % n] {
        pop.fitnesses[site] = driver.sample(&mut pop.rng);
    }
    pop.step_count += 1;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    RankExo,
    RankEndo,
    BakSneppen,
}

impl FromStr for SimMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exo" | "rank_exo" | "rank-exo" => Ok(SimMode::RankExo),
            "endo" | "rank_endo" | "rank-endo" => Ok(SimMode::RankEndo),
            "bs" | "bak_sneppen" | "bak-sneppen" => Ok(SimMode::BakSneppen),
            other => Err(Error::Parse(format!(
                "unknown simulation mode {other:?}; use exo, endo or bak-sneppen"
            ))),
        }
    }
}

impl fmt::Display for SimMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SimMode::RankExo => "exo",
            SimMode::RankEndo => "endo",
            SimMode::BakSneppen => "bak-sneppen",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    /// Rank weights; unused for Bak-Sneppen.
    pub weights: Option<WeightVector>,
    pub mode: SimMode,
    /// Replacement law for exogenous and Bak-Sneppen runs.
    pub driver: Option<DistributionSpec>,
    /// Law of the starting population. Defaults to the driver, or to the
    /// uniform law for endogenous runs.
    pub initial: Option<DistributionSpec>,
    pub burn_in: usize,
    pub measure_steps: usize,
    /// Pool the population every `stride` measured steps.
    pub stride: usize,
    pub seed: u64,
    pub replicas: usize,
}

impl SimConfig {
    /// Rank-driven run with stride 10 and one replica.
    pub fn rank(
        mode: SimMode,
        weights: WeightVector,
        driver: Option<DistributionSpec>,
        burn_in: usize,
        measure_steps: usize,
        seed: u64,
    ) -> Self {
        SimConfig {
            n: weights.len(),
            weights: Some(weights),
            mode,
            driver,
            initial: None,
            burn_in,
            measure_steps,
            stride: DEFAULT_STRIDE,
            seed,
            replicas: 1,
        }
    }

    pub fn bak_sneppen(n: usize, driver: DistributionSpec, burn_in: usize, measure_steps: usize, seed: u64) -> Self {
        SimConfig {
            n,
            weights: None,
            mode: SimMode::BakSneppen,
            driver: Some(driver),
            initial: None,
            burn_in,
            measure_steps,
            stride: DEFAULT_STRIDE,
            seed,
            replicas: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.burn_in == 0 || self.measure_steps == 0 {
            return Err(Error::Config("burn-in and measured steps must both be positive".into()));
        }
        if self.stride == 0 || self.stride > self.measure_steps {
            return Err(Error::Config(format!(
                "stride {} must lie in [1, {}]",
                self.stride, self.measure_steps
            )));
        }
        if self.replicas == 0 {
            return Err(Error::Config("need at least one replica".into()));
        }
        match self.mode {
            SimMode::BakSneppen => {
                if self.n < 3 {
                    return Err(Error::Config(format!("Bak-Sneppen needs n >= 3, got {}", self.n)));
                }
            }
            SimMode::RankExo | SimMode::RankEndo => {
                let w = self
                    .weights
                    .as_ref()
                    .ok_or_else(|| Error::Config("rank modes need a weight vector".into()))?;
                if w.len() != self.n {
                    return Err(Error::Config(format!(
                        "weight vector has length {} but n = {}",
                        w.len(),
                        self.n
                    )));
                }
            }
        }
        if self.mode != SimMode::RankEndo && self.driver.is_none() {
            return Err(Error::Config(format!("mode {} needs a driver", self.mode)));
        }
        for d in self.driver.iter().chain(&self.initial) {
            d.validate()?;
        }
        Ok(())
    }

    fn initial_law(&self) -> DistributionSpec {
        self.initial
            .clone()
            .or_else(|| self.driver.clone().filter(|_| self.mode != SimMode::RankEndo))
            .unwrap_or(DistributionSpec::Uniform)
    }
}

/// A single replica: population plus the configuration that moves it.
#[derive(Debug, Clone)]
pub struct Simulator {
    config: SimConfig,
    pop: Population,
}

impl Simulator {
    pub fn new(config: SimConfig, replica: u64) -> Result<Self> {
        config.validate()?;
        let pop = Population::sample(config.n, &config.initial_law(), replica_rng(config.seed, replica))?;
        Ok(Simulator { config, pop })
    }

    pub fn population(&self) -> &Population {
        &self.pop
    }

    pub fn step(&mut self) {
        let c = &self.config;
        match c.mode {
            SimMode::RankExo => {
                step_rank_exo(&mut self.pop, c.weights.as_ref().unwrap(), c.driver.as_ref().unwrap())
            }
            SimMode::RankEndo => step_rank_endo(&mut self.pop, c.weights.as_ref().unwrap()),
            SimMode::BakSneppen => step_bs(&mut self.pop, c.driver.as_ref().unwrap()),
        }
    }

    /// Burn-in, then the pooled measurement samples (unsorted).
    pub fn run(mut self) -> Vec<f64> {
        for _ in 0..self.config.burn_in {
            self.step();
        }
        let (steps, stride) = (self.config.measure_steps, self.config.stride);
        let mut pooled = Vec::with_capacity(steps / stride * self.config.n);
        for t in 1..=steps {
            self.step();
            if t % stride == 0 {
                pooled.extend_from_slice(&self.pop.fitnesses);
            }
        }
        pooled
    }
}

/// Step-function CDF of pooled samples.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    samples: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn from_samples(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Config("empirical CDF needs at least one sample".into()));
        }
        if samples.iter().any(|v| v.is_nan()) {
            return Err(Error::Numerical("NaN sample".into()));
        }
        samples.sort_by(f64::total_cmp);
        Ok(EmpiricalCdf { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Fraction of samples `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.samples.partition_point(|&v| v <= x) as f64 / self.len() as f64
    }

    /// Fraction of samples `< x`.
    pub fn eval_left(&self, x: f64) -> f64 {
        self.samples.partition_point(|&v| v < x) as f64 / self.len() as f64
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.len() as f64
    }

    /// Location and mass of the most frequent value.
    pub fn largest_atom(&self) -> (f64, f64) {
        let mut best = (self.samples[0], 0usize);
        let mut i = 0;
        while i < self.samples.len() {
            let v = self.samples[i];
            let j = self.samples[i..].partition_point(|&s| s == v) + i;
            if j - i > best.1 {
                best = (v, j - i);
            }
            i = j;
        }
        (best.0, best.1 as f64 / self.len() as f64)
    }

    /// `x,cdf` rows on a uniform grid of `grid` points.
    pub fn write_csv<W: Write>(&self, out: &mut W, grid: usize) -> Result<()> {
        writeln!(out, "x,cdf")?;
        for x in uniform_grid(grid)? {
            writeln!(out, "{},{}", fmt_f64(x), fmt_f64(self.eval(x)))?;
        }
        Ok(())
    }
}

/// Output of [`run_detailed`].
#[derive(Debug, Clone)]
pub struct SimRun {
    pub cdf: EmpiricalCdf,
    /// Mean of the pooled samples of each replica, in replica order.
    pub replica_means: Vec<f64>,
    pub total_steps: u64,
    pub elapsed_secs: f64,
}

impl SimRun {
    /// Standard error of the mean across replicas; `None` with one replica.
    pub fn standard_error(&self) -> Option<f64> {
        let r = self.replica_means.len();
        if r < 2 {
            return None;
        }
        let m = self.replica_means.iter().sum::<f64>() / r as f64;
        let var = self.replica_means.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (r - 1) as f64;
        Some((var / r as f64).sqrt())
    }

    pub fn step_rate(&self) -> f64 {
        self.total_steps as f64 / self.elapsed_secs.max(1e-9)
    }
}

/// Runs all replicas (in parallel) and pools their samples.
pub fn run_detailed(config: &SimConfig) -> Result<SimRun> {
    config.validate()?;
    let start = Instant::now();
    let per_replica = (0..config.replicas as u64)
        .into_par_iter()
        .map(|r| Simulator::new(config.clone(), r).map(Simulator::run))
        .collect::<Result<Vec<_>>>()?;
    let elapsed_secs = start.elapsed().as_secs_f64();
    let replica_means = per_replica
        .iter()
        .map(|s| s.iter().sum::<f64>() / s.len() as f64)
        .collect();
    let cdf = EmpiricalCdf::from_samples(per_replica.concat())?;
    let total_steps = ((config.burn_in + config.measure_steps) * config.replicas) as u64;
    Ok(SimRun { cdf, replica_means, total_steps, elapsed_secs })
}

/// Pooled empirical CDF of the configured run.
pub fn run(config: &SimConfig) -> Result<EmpiricalCdf> {
    run_detailed(config).map(|r| r.cdf)
}

/// Anything with a CDF on `[0, 1]`.
pub trait CdfLike {
    fn cdf_at(&self, x: f64) -> f64;
    fn cdf_left_at(&self, x: f64) -> f64;
    /// Points where the CDF may jump or bend.
    fn breakpoints(&self) -> Vec<f64>;
}

impl CdfLike for DistributionSpec {
    fn cdf_at(&self, x: f64) -> f64 {
        self.cdf(x)
    }

    fn cdf_left_at(&self, x: f64) -> f64 {
        self.cdf_left(x)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.atom_list().into_iter().map(|a| a.0).collect();
        match self {
            DistributionSpec::PiecewiseLinear { knots, .. } => pts.extend(knots),
            DistributionSpec::Tabulated { values } => {
                let m = (values.len() - 1) as f64;
                pts.extend((0..values.len()).map(|j| j as f64 / m));
            }
            DistributionSpec::Mixture { components } => {
                pts.extend(components.iter().flat_map(|(c, _)| c.breakpoints()))
            }
            _ => {}
        }
        pts
    }
}

impl CdfLike for SampledCdf {
    fn cdf_at(&self, x: f64) -> f64 {
        self.eval(x)
    }

    fn cdf_left_at(&self, x: f64) -> f64 {
        self.eval(x)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.xs.clone()
    }
}

impl CdfLike for EmpiricalCdf {
    fn cdf_at(&self, x: f64) -> f64 {
        self.eval(x)
    }

    fn cdf_left_at(&self, x: f64) -> f64 {
        self.eval_left(x)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut pts = self.samples.clone();
        pts.dedup();
        pts
    }
}

/// Kolmogorov-Smirnov distance: the largest gap between the two CDFs, or
/// between their left limits, over both breakpoint sets and a fine grid.
pub fn ks_distance<A: CdfLike + Sync + ?Sized, B: CdfLike + Sync + ?Sized>(a: &A, b: &B) -> f64 {
    let mut pts = a.breakpoints();
    pts.extend(b.breakpoints());
    pts.extend((0..KS_GRID).map(|j| j as f64 / (KS_GRID - 1) as f64));
    pts.par_iter()
        .map(|&x| {
            let right = (a.cdf_at(x) - b.cdf_at(x)).abs();
            let left = (a.cdf_left_at(x) - b.cdf_left_at(x)).abs();
            right.max(left)
        })
        .reduce(|| 0.0, f64::max)
        .min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::preset;

    fn pop(values: &[f64]) -> Population {
        Population::new(values.to_vec(), replica_rng(7, 0)).unwrap()
    }

    #[test]
    fn min_only_exo_replaces_only_minimum() {
        let mut p = pop(&[0.4, 0.1, 0.9, 0.6]);
        let before = p.fitnesses.clone();
        step_rank_exo(&mut p, &WeightVector::min_only(4).unwrap(), &DistributionSpec::uniform());
        let changed: Vec<usize> = (0..4).filter(|&i| p.fitnesses[i] != before[i]).collect();
        assert_eq!(changed, vec![1]);
        assert_eq!(p.step_count, 1);
    }

    #[test]
    fn zero_weights_leave_population() {
        let mut p = pop(&[0.4, 0.1, 0.9]);
        let w = WeightVector::new(vec![0.0; 3]).unwrap();
        step_rank_exo(&mut p, &w, &DistributionSpec::uniform());
        step_rank_endo(&mut p, &w);
        assert_eq!(p.fitnesses, vec![0.4, 0.1, 0.9]);
    }

    #[test]
    fn endo_pinned_draw() {
        let mut values = vec![0.1, 0.5, 0.9];
        let mut rng = replica_rng(1, 0);
        step_rank_with(&mut values, &[1.0, 0.0, 0.0], &mut rng, |_, snap| snap[1]);
        assert_eq!(values, vec![0.5, 0.5, 0.9]);
    }

    #[test]
    fn ties_broken_by_index() {
        let mut values = vec![0.3, 0.2, 0.2];
        let mut rng = replica_rng(1, 0);
        step_rank_with(&mut values, &[1.0, 0.0, 0.0], &mut rng, |_, _| 1.0);
        assert_eq!(values, vec![0.3, 1.0, 0.2]);
    }

    #[test]
    fn bs_neighbourhood() {
        let mut p = pop(&[0.05, 0.5, 0.6, 0.7, 0.8]);
        let before = p.fitnesses.clone();
        step_bs(&mut p, &DistributionSpec::uniform());
        let changed: Vec<usize> = (0..5).filter(|&i| p.fitnesses[i] != before[i]).collect();
        assert_eq!(changed, vec![0, 1, 4]);

        let mut p = pop(&[0.3, 0.2, 0.1]);
        step_bs(&mut p, &DistributionSpec::uniform());
        assert!(p.fitnesses.iter().zip([0.3, 0.2, 0.1]).all(|(a, b)| *a != b));
    }

    #[test]
    fn config_validation() {
        let w = WeightVector::min_only(4).unwrap();
        let mut c = SimConfig::rank(SimMode::RankExo, w.clone(), None, 10, 100, 1);
        assert!(c.validate().is_err());
        c.driver = Some(DistributionSpec::uniform());
        assert!(c.validate().is_ok());
        c.burn_in = 0;
        assert!(c.validate().is_err());
        let endo = SimConfig::rank(SimMode::RankEndo, w, None, 10, 100, 1);
        assert!(endo.validate().is_ok());
        let bs = SimConfig::bak_sneppen(2, DistributionSpec::uniform(), 10, 100, 1);
        assert!(bs.validate().is_err());
    }

    #[test]
    fn runs_are_deterministic() {
        let mut c = SimConfig::rank(
            SimMode::RankExo,
            preset("fig5", 20).unwrap(),
            Some(DistributionSpec::uniform()),
            200,
            2000,
            42,
        );
        c.replicas = 3;
        let a = run(&c).unwrap();
        let b = run(&c).unwrap();
        assert_eq!(a, b);
        c.seed = 43;
        assert_ne!(run(&c).unwrap(), a);
    }

    #[test]
    fn endo_min_only_fixates() {
        let mut c = SimConfig::rank(SimMode::RankEndo, WeightVector::min_only(50).unwrap(), None, 100_000, 1000, 5);
        c.stride = 100;
        let cdf = run(&c).unwrap();
        let (_, mass) = cdf.largest_atom();
        assert!(mass >= 0.99, "largest atom mass {mass}");
    }

    #[test]
    fn ks_examples() {
        let u = DistributionSpec::uniform();
        assert_eq!(ks_distance(&u, &u), 0.0);
        let h0 = DistributionSpec::point_mass(0.0).unwrap();
        let h1 = DistributionSpec::point_mass(1.0).unwrap();
        assert_eq!(ks_distance(&h0, &h1), 1.0);

        let mut rng = replica_rng(11, 0);
        let draws: Vec<f64> = (0..100_000).map(|_| u.sample(&mut rng)).collect();
        let emp = EmpiricalCdf::from_samples(draws).unwrap();
        assert!(ks_distance(&emp, &u) < 0.01);
    }

    #[test]
    fn empirical_cdf_basics() {
        let e = EmpiricalCdf::from_samples(vec![0.5, 0.1, 0.5, 0.9]).unwrap();
        assert_eq!(e.eval(0.5), 0.75);
        assert_eq!(e.eval_left(0.5), 0.25);
        assert_eq!(e.eval(1.0), 1.0);
        assert_eq!(e.largest_atom(), (0.5, 0.5));
        assert!(EmpiricalCdf::from_samples(vec![]).is_err());
        let mut buf = Vec::new();
        e.write_csv(&mut buf, 3).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 4);
    }
}
