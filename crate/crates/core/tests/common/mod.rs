//! Property checks shared by the property suite and the acceptance suite.
//!
//! Each check runs a deterministic proptest runner for [`CASES`] cases and
//! reports the first counterexample as an error string.

#![allow(dead_code)]

use std::collections::HashSet;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRng, TestRunner};

use rankdyn::asymptotics::{
    boundary_slopes, large_n_limit, max_p_bound, validate_pq, Clause, PQSequenceFamily,
};
use rankdyn::cli::{manifest_path, run_cli, DriverSpec};
use rankdyn::distrib::{uniform_grid, DistributionSpec};
use rankdyn::dynamics::{Mode, RankSystem, WeightVector, DEFAULT_MAX_ITER, DEFAULT_TOL};
use rankdyn::exact::exact_limit_cdf;
use rankdyn::mc::{ks_distance, rank_order, replica_rng, run, step_rank_endo, step_rank_exo, EmpiricalCdf, Population, SimConfig, SimMode};
use rankdyn::orderstats::OrderStatContext;
use rankdyn::presets::preset;

pub const CASES: u32 = 1000;

pub type Check = fn() -> Result<(), String>;

pub fn runner() -> TestRunner {
    let config = Config { cases: CASES, failure_persistence: None, ..Config::default() };
    let rng = TestRng::deterministic_rng(config.rng_algorithm);
    TestRunner::new_with_rng(config, rng)
}

fn check<S: Strategy>(
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner().run(&strategy, test).map_err(|e| e.to_string())
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, TestCaseError> {
    r.map_err(|e| TestCaseError::fail(e.to_string()))
}

// ---------------------------------------------------------------- strategies

fn atoms_strategy() -> impl Strategy<Value = DistributionSpec> {
    prop::collection::vec((0.0..=1.0f64, 0.05..1.0f64), 1..5).prop_map(|raw| {
        let total: f64 = raw.iter().map(|a| a.1).sum();
        DistributionSpec::atoms(raw.into_iter().map(|(l, w)| (l, w / total))).unwrap()
    })
}

fn piecewise_strategy() -> impl Strategy<Value = DistributionSpec> {
    (prop::collection::vec(0.01..1.0f64, 2..6), prop::collection::vec(0.0..1.0f64, 1..5)).prop_map(
        |(mut knots, mut inner)| {
            knots.push(0.0);
            knots.push(1.0);
            knots.sort_by(f64::total_cmp);
            knots.dedup();
            inner.resize(knots.len() - 2, 0.5);
            inner.sort_by(f64::total_cmp);
            let mut values = vec![0.0];
            values.extend(inner);
            values.push(1.0);
            DistributionSpec::piecewise_linear(knots, values).unwrap()
        },
    )
}

fn tabulated_strategy() -> impl Strategy<Value = DistributionSpec> {
    prop::collection::vec(0.0..1.0f64, 3..40).prop_map(|steps| {
        let total: f64 = steps.iter().sum::<f64>().max(1e-9);
        let mut acc = 0.0;
        let mut values = vec![0.0];
        for s in steps {
            acc += s / total;
            values.push(acc.min(1.0));
        }
        DistributionSpec::tabulated(values).unwrap()
    })
}

pub fn simple_distribution() -> impl Strategy<Value = DistributionSpec> {
    prop_oneof![
        Just(DistributionSpec::Uniform),
        (0.2..5.0f64).prop_map(|e| DistributionSpec::power_law(e).unwrap()),
        atoms_strategy(),
        piecewise_strategy(),
        tabulated_strategy(),
    ]
}

pub fn any_distribution() -> impl Strategy<Value = DistributionSpec> {
    prop_oneof![
        4 => simple_distribution(),
        1 => (simple_distribution(), simple_distribution(), 0.05..0.95f64)
            .prop_map(|(a, b, w)| DistributionSpec::mixture(vec![(a, w), (b, 1.0 - w)]).unwrap()),
    ]
}

fn continuous_distribution() -> impl Strategy<Value = DistributionSpec> {
    prop_oneof![
        Just(DistributionSpec::Uniform),
        (0.2..5.0f64).prop_map(|e| DistributionSpec::power_law(e).unwrap()),
        piecewise_strategy(),
    ]
}

/// Weights with `alpha_1 > 0` and every entry below one.
pub fn weights(max_n: usize) -> impl Strategy<Value = WeightVector> {
    (2..=max_n)
        .prop_flat_map(|n| (0.01..0.99f64, prop::collection::vec(0.0..0.99f64, n - 1)))
        .prop_map(|(a1, rest)| {
            let mut a = vec![a1];
            a.extend(rest);
            WeightVector::new(a).unwrap()
        })
}

/// Five profiles with positive weight on the lowest and highest ranks.
pub fn contracting_profiles() -> Vec<WeightVector> {
    vec![
        preset("fig5", 10).unwrap(),
        preset("fig7", 12).unwrap(),
        preset("fig6", 10).unwrap(),
        preset("sqrt", 16).unwrap(),
        WeightVector::new(vec![0.9, 0.1, 0.4, 0.2, 0.6, 0.3]).unwrap(),
    ]
}

fn unit_pair() -> impl Strategy<Value = (f64, f64)> {
    (0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(a, b)| if a <= b { (a, b) } else { (b, a) })
}

// --------------------------------------------------------------- distrib

pub fn cdf_monotone() -> Result<(), String> {
    check((any_distribution(), unit_pair()), |(d, (x, y))| {
        prop_assert!(ok(d.eval(x))? <= ok(d.eval(y))?, "{d:?} at {x} and {y}");
        Ok(())
    })
}

pub fn sampling_matches_cdf() -> Result<(), String> {
    let samples = 100_000usize;
    check((simple_distribution(), any::<u64>()), move |(d, seed)| {
        let mut rng = replica_rng(seed, 0);
        let draws: Vec<f64> = (0..samples).map(|_| d.sample(&mut rng)).collect();
        let emp = ok(EmpiricalCdf::from_samples(draws))?;
        let ks = ks_distance(&emp, &d);
        let bound = if d.atom_list().is_empty() { 0.01 } else { 3.0 / (samples as f64).sqrt() };
        prop_assert!(ks < bound, "KS {ks} >= {bound} for {d:?}");
        Ok(())
    })
}

pub fn sampled_round_trip() -> Result<(), String> {
    let strat = (any_distribution(), 11usize..400);
    check(strat, |(d, grid)| {
        let sampled = ok(d.sample_cdf(grid))?;
        let again = ok(ok(sampled.to_tabulated())?.sample_cdf(grid))?;
        let worst = sampled.cdf.iter().zip(&again.cdf).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(worst <= 1.0 / grid as f64, "round trip error {worst} on grid {grid}");
        Ok(())
    })?;
    // Smooth laws also agree off the grid.
    check((1.0..4.0f64, 11usize..400, 0.0..=1.0f64), |(e, grid, x)| {
        let d = ok(DistributionSpec::power_law(e))?;
        let tab = ok(ok(d.sample_cdf(grid))?.to_tabulated())?;
        let err = (tab.cdf(x) - d.cdf(x)).abs();
        prop_assert!(err <= 1.0 / grid as f64, "off-grid error {err} at {x}");
        Ok(())
    })
}

// ------------------------------------------------------------ orderstats

pub fn order_statistics_average_to_identity() -> Result<(), String> {
    check((2usize..=50, 0.0..=1.0f64), |(n, r)| {
        let ctx = ok(OrderStatContext::new(n))?;
        let mut sum = 0.0;
        for i in 1..=n {
            sum += ok(ctx.theta(i, r))?;
        }
        let err = (sum / n as f64 - r).abs();
        prop_assert!(err < 1e-12, "n={n} r={r} err={err:e}");
        Ok(())
    })
}

pub fn theta_monotone_in_rank() -> Result<(), String> {
    check((2usize..=300).prop_flat_map(|n| (Just(n), 1..n, 0.0..=1.0f64)), |(n, k, r)| {
        let ctx = ok(OrderStatContext::new(n))?;
        prop_assert!(ok(ctx.theta(k + 1, r))? <= ok(ctx.theta(k, r))?, "n={n} k={k} r={r}");
        Ok(())
    })
}

pub fn theta_monotone_in_value() -> Result<(), String> {
    check((1usize..=300).prop_flat_map(|n| (Just(n), 1..=n, unit_pair())), |(n, k, (a, b))| {
        let ctx = ok(OrderStatContext::new(n))?;
        prop_assert!(ok(ctx.theta(k, a))? <= ok(ctx.theta(k, b))?, "n={n} k={k} at {a}, {b}");
        Ok(())
    })
}

pub fn theta_derivative_matches_difference() -> Result<(), String> {
    let h = 1e-6;
    check((1usize..=100).prop_flat_map(|n| (Just(n), 1..=n, 0.01..=0.99f64)), move |(n, k, r)| {
        let ctx = ok(OrderStatContext::new(n))?;
        let fd = (ok(ctx.theta(k, r + h))? - ok(ctx.theta(k, r - h))?) / (2.0 * h);
        let d = ok(ctx.theta_deriv(k, r))?;
        prop_assert!((fd - d).abs() < 1e-6, "n={n} k={k} r={r}: {d} vs {fd}");
        Ok(())
    })
}

pub fn weighted_slope_bounded() -> Result<(), String> {
    check((weights(60), 0.0..=1.0f64), |(w, r)| {
        let ctx = ok(OrderStatContext::new(w.len()))?;
        let s = ok(ctx.weighted_theta_sum_deriv(&w, r))? / w.len() as f64;
        prop_assert!(s >= 0.0 && s <= 1.0, "slope {s}");
        if r > 0.0 && r < 1.0 {
            prop_assert!(s < 1.0 - 1e-12, "slope {s} not strictly below one at {r}");
        }
        Ok(())
    })
}

// -------------------------------------------------------------- dynamics

pub fn maps_monotone_into_unit() -> Result<(), String> {
    check((weights(40), unit_pair(), 0.0..=1.0f64), |(w, (a, b), nu)| {
        let sys = ok(RankSystem::new(w))?;
        let (ea, eb) = (ok(sys.exo_map(a, nu))?, ok(sys.exo_map(b, nu))?);
        let (na, nb) = (ok(sys.endo_map(a))?, ok(sys.endo_map(b))?);
        for v in [ea, eb, na, nb] {
            prop_assert!((0.0..=1.0).contains(&v), "value {v} outside [0,1]");
        }
        prop_assert!(ea <= eb && na <= nb, "not monotone: {ea} {eb} {na} {nb}");
        Ok(())
    })
}

pub fn exogenous_iteration_contracts() -> Result<(), String> {
    let systems: Vec<RankSystem> = contracting_profiles().into_iter().map(|w| RankSystem::new(w).unwrap()).collect();
    check((0..systems.len(), 0usize..11, 0.0..=1.0f64), |(p, j, r0)| {
        let sys = &systems[p];
        let nu = j as f64 / 10.0;
        let target = ok(sys.solve_exo_fixed_point(nu, DEFAULT_TOL))?;
        let mut r = r0;
        let mut gap = (r - target).abs();
        for _ in 0..100_000 {
            if gap <= DEFAULT_TOL {
                break;
            }
            r = ok(sys.exo_map(r, nu))?;
            let next = (r - target).abs();
            prop_assert!(next <= gap + 1e-15, "gap grew from {gap:e} to {next:e}");
            gap = next;
        }
        prop_assert!(gap <= DEFAULT_TOL, "profile {p} nu={nu} r0={r0}: final gap {gap:e}");
        Ok(())
    })
}

pub fn fixed_point_residual() -> Result<(), String> {
    check((weights(200), 0.0..=1.0f64), |(w, nu)| {
        let sys = ok(RankSystem::new(w))?;
        let r = ok(sys.solve_exo_fixed_point(nu, DEFAULT_TOL))?;
        let res = (ok(sys.weighted_sum(r))? - sys.q() * nu).abs();
        prop_assert!(res <= sys.q() * DEFAULT_TOL, "residual {res:e}");
        Ok(())
    })
}

pub fn global_attractor() -> Result<(), String> {
    check((weights(12).prop_filter("top weight", |w| w.alphas()[w.len() - 1] > 0.05), 0.0..=1.0f64), |(w, nu)| {
        let sys = ok(RankSystem::new(w))?;
        let settle = |mut r: f64| -> Result<f64, TestCaseError> {
            for _ in 0..200_000 {
                let next = ok(sys.exo_map(r, nu))?;
                if next == r {
                    break;
                }
                r = next;
            }
            Ok(r)
        };
        let (lo, hi) = (settle(0.0)?, settle(1.0)?);
        prop_assert!((lo - hi).abs() < 1e-10, "from 0 -> {lo}, from 1 -> {hi}");
        Ok(())
    })
}

pub fn endogenous_limit_is_fixed_point() -> Result<(), String> {
    let systems: Vec<(RankSystem, _)> = contracting_profiles()
        .into_iter()
        .chain([preset("min-only", 8).unwrap(), WeightVector::new(vec![0.3, 0.0, 0.9, 0.0, 0.5]).unwrap()])
        .map(|w| {
            let sys = RankSystem::new(w).unwrap();
            let rep = sys.find_endo_fixed_points(10_000, DEFAULT_TOL).unwrap();
            (sys, rep)
        })
        .collect();
    check((0..systems.len(), 0.0..=1.0f64), |(p, r0)| {
        let (sys, rep) = &systems[p];
        let v = ok(sys.endo_limit_with(rep, r0, DEFAULT_MAX_ITER, DEFAULT_TOL))?.value;
        let res = (ok(sys.endo_map(v))? - v).abs();
        prop_assert!(res < 10.0 * DEFAULT_TOL, "profile {p} r0={r0}: limit {v} residual {res:e}");
        Ok(())
    })
}

pub fn limit_cdf_monotone() -> Result<(), String> {
    check((weights(20), any_distribution(), prop::bool::ANY), |(w, d, exo)| {
        let sys = ok(RankSystem::new(w))?;
        let mode = if exo { Mode::Exo } else { Mode::Endo };
        let c = ok(sys.limit_cdf(mode, &d, 101))?;
        prop_assert!(c.cdf.windows(2).all(|p| p[0] <= p[1]), "limit CDF decreases");
        Ok(())
    })
}

pub fn endogenous_jumps_at_basin_boundaries() -> Result<(), String> {
    check((weights(12), continuous_distribution()), |(w, d)| {
        let sys = ok(RankSystem::new(w))?;
        let rep = ok(sys.find_endo_fixed_points(10_000, DEFAULT_TOL))?;
        let c = ok(sys.limit_cdf(Mode::Endo, &d, 201))?;
        let bounds = rep.boundaries();
        for v in &c.cdf {
            prop_assert!(rep.point_near(*v, 1e-12).is_some(), "value {v} is not a fixed point");
        }
        for j in 1..c.xs.len() {
            if c.cdf[j] > c.cdf[j - 1] {
                let (a, b) = (d.cdf(c.xs[j - 1]), d.cdf(c.xs[j]));
                prop_assert!(
                    bounds.iter().any(|&z| z >= a - 1e-9 && z <= b + 1e-9),
                    "jump between R0 values {a} and {b} crosses no boundary {bounds:?}"
                );
            }
        }
        Ok(())
    })
}

// ---------------------------------------------------------- asymptotics

pub fn large_n_limit_monotone() -> Result<(), String> {
    check((0.05..2.9f64, unit_pair()), |(p, (a, b))| {
        let q = 3.0;
        let (la, lb) = (ok(large_n_limit(p, q, a))?, ok(large_n_limit(p, q, b))?);
        prop_assert!(la <= lb && (0.0..=1.0).contains(&la), "p={p}: {la} at {a}, {lb} at {b}");
        Ok(())
    })
}

pub fn tail_bound_decreases_along_ladder() -> Result<(), String> {
    let families = [PQSequenceFamily::from_preset("fig5").unwrap(), PQSequenceFamily::from_preset("sqrt").unwrap()];
    let strat = (0..2usize, 20usize..200, prop::collection::vec(2usize..5, 3));
    check(strat, |(f, n0, factors)| {
        let fam = &families[f];
        let mut n = n0;
        let mut prev = f64::INFINITY;
        for step in 0..=factors.len() {
            let w = ok(fam.weights(n))?;
            let k = fam.k(n, &w);
            let bound = ok(max_p_bound(n, k))?;
            prop_assert!(bound < prev, "{}: bound {bound:e} at n={n} not below {prev:e}", fam.name);
            prev = bound;
            if step < factors.len() {
                n *= factors[step];
            }
        }
        Ok(())
    })
}

pub fn boundary_slopes_match_differences() -> Result<(), String> {
    let names = ["fig5", "fig7", "fig6", "sqrt", "uniform3"];
    check((0..names.len(), 10usize..500), |(i, n)| {
        let w = ok(preset(names[i], n))?;
        let (s0, s1) = boundary_slopes(&w);
        let sys = ok(RankSystem::new(w))?;
        let h = 1e-6;
        let fd0 = ok(sys.solve_exo_fixed_point(h, DEFAULT_TOL))? / h;
        let fd1 = (1.0 - ok(sys.solve_exo_fixed_point(1.0 - h, DEFAULT_TOL))?) / h;
        prop_assert!((fd0 / s0 - 1.0).abs() < 0.02, "{} n={n}: {fd0} vs {s0}", names[i]);
        prop_assert!((fd1 / s1 - 1.0).abs() < 0.02, "{} n={n}: {fd1} vs {s1}", names[i]);
        Ok(())
    })
}

pub fn other_p_fails_head_mass() -> Result<(), String> {
    let fam = PQSequenceFamily::from_preset("fig5").unwrap();
    let ladder = [100, 400, 1600, 6400];
    let p_other = prop_oneof![0.05..1.98f64, 2.02..2.95f64];
    check(p_other, |p| {
        let rep = ok(validate_pq(&fam.with_p(p), &ladder))?;
        let failing: Vec<usize> = rep.failures.iter().filter(|f| f.clause == Clause::HeadMass).filter_map(|f| f.n).collect();
        prop_assert!(failing == ladder, "p={p}: head mass fails only at {failing:?}");
        Ok(())
    })
}

// ----------------------------------------------------------------- exact

pub fn exact_law_is_cdf() -> Result<(), String> {
    check((2usize..500, any_distribution()), |(n, d)| {
        let law = ok(exact_limit_cdf(n, &d))?;
        ok(law.validate())?;
        let xs = uniform_grid(501).unwrap();
        let vals: Vec<f64> = xs.iter().map(|&x| law.cdf(x)).collect();
        prop_assert!(vals.windows(2).all(|p| p[0] <= p[1]), "not monotone");
        prop_assert!((law.cdf(1.0) - 1.0).abs() < 1e-12, "total mass {}", law.cdf(1.0));
        Ok(())
    })
}

// -------------------------------------------------------------------- mc

fn small_population() -> impl Strategy<Value = (Vec<f64>, u64)> {
    (prop::collection::vec(0.0..=1.0f64, 3..30), any::<u64>())
}

pub fn simulation_preserves_range() -> Result<(), String> {
    check((small_population(), 0..3usize, 1usize..200, any_distribution()), |((v, seed), mode, steps, d)| {
        let n = v.len();
        let mut pop = ok(Population::new(v, replica_rng(seed, 0)))?;
        let w = ok(preset("fig7", n.max(5)))?;
        let w = ok(WeightVector::new(w.alphas()[..n].iter().map(|a| a.min(0.9)).collect()))?;
        for _ in 0..steps {
            match mode {
                0 => step_rank_exo(&mut pop, &w, &d),
                1 => step_rank_endo(&mut pop, &w),
                _ => rankdyn::mc::step_bs(&mut pop, &d),
            }
            prop_assert!(pop.fitnesses.iter().all(|x| (0.0..=1.0).contains(x)), "left [0,1]");
        }
        Ok(())
    })
}

pub fn endogenous_values_are_copies() -> Result<(), String> {
    check((small_population(), weights(29), 1usize..100), |((v, seed), w, steps)| {
        let n = v.len().min(w.len()).max(2);
        let mut v = v;
        v.resize(n, 0.5);
        let w = ok(WeightVector::new(w.alphas()[..n].to_vec()))?;
        let mut pop = ok(Population::new(v, replica_rng(seed, 0)))?;
        for _ in 0..steps {
            let before: HashSet<u64> = pop.fitnesses.iter().map(|x| x.to_bits()).collect();
            step_rank_endo(&mut pop, &w);
            prop_assert!(pop.fitnesses.iter().all(|x| before.contains(&x.to_bits())), "new value appeared");
        }
        Ok(())
    })
}

pub fn upper_ranks_never_fall() -> Result<(), String> {
    check((small_population(), 1usize..300, simple_distribution()), |((v, seed), steps, d)| {
        let n = v.len();
        let w = ok(WeightVector::min_only(n))?;
        let mut pop = ok(Population::new(v, replica_rng(seed, 0)))?;
        let sorted = |p: &Population| {
            let mut s = p.fitnesses.clone();
            s.sort_by(f64::total_cmp);
            s
        };
        let mut prev = sorted(&pop);
        for _ in 0..steps {
            step_rank_exo(&mut pop, &w, &d);
            let cur = sorted(&pop);
            for i in 1..n {
                prop_assert!(cur[i] >= prev[i], "rank {} fell from {} to {}", i + 1, prev[i], cur[i]);
            }
            prev = cur;
        }
        Ok(())
    })
}

pub fn simulation_deterministic() -> Result<(), String> {
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    check((any::<u64>(), 1usize..5, 0..3usize, 4usize..20), |(seed, replicas, mode, n)| {
        let mode = [SimMode::RankExo, SimMode::RankEndo, SimMode::BakSneppen][mode];
        let mut c = match mode {
            SimMode::BakSneppen => SimConfig::bak_sneppen(n, DistributionSpec::Uniform, 20, 100, seed),
            m => SimConfig::rank(m, ok(preset("fig5", n))?, Some(DistributionSpec::Uniform), 20, 100, seed),
        };
        c.replicas = replicas;
        let a = ok(run(&c))?;
        let b = single.install(|| run(&c));
        prop_assert!(a == ok(b)?, "run differs between thread pools");
        Ok(())
    })
}

pub fn rank_order_is_stable() -> Result<(), String> {
    check(prop::collection::vec(prop_oneof![Just(0.25), Just(0.5), 0.0..=1.0f64], 1..40), |v| {
        let mut order = Vec::new();
        rank_order(&v, &mut order);
        for p in order.windows(2) {
            let (a, b) = (p[0], p[1]);
            prop_assert!(v[a] < v[b] || (v[a] == v[b] && a < b), "order {order:?}");
        }
        Ok(())
    })
}

// ------------------------------------------------------------------- cli

fn driver_spec() -> impl Strategy<Value = DriverSpec> {
    prop_oneof![
        Just(DriverSpec::Uniform),
        (1e-3..50.0f64).prop_map(DriverSpec::Power),
        prop::collection::vec((0.0..=1.0f64, 0.05..1.0f64), 1..5).prop_map(|raw| {
            let total: f64 = raw.iter().map(|a| a.1).sum();
            let mut atoms: Vec<(f64, f64)> = raw.into_iter().map(|(l, w)| (l, w / total)).collect();
            atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
            atoms.dedup_by(|a, b| a.0 == b.0);
            let total: f64 = atoms.iter().map(|a| a.1).sum();
            atoms.iter_mut().for_each(|a| a.1 /= total);
            DriverSpec::Atoms(atoms)
        }),
        "[a-z0-9_/.]{1,20}".prop_map(|p| DriverSpec::Table(p.into())),
    ]
}

pub fn driver_strings_round_trip() -> Result<(), String> {
    check(driver_spec(), |d| {
        let parsed: DriverSpec = ok(d.to_string().parse())?;
        prop_assert_eq!(parsed, d);
        Ok(())
    })
}

pub fn manifest_replay_reproduces_output() -> Result<(), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let names = ["exo", "endo", "bak-sneppen"];
    check((any::<u64>(), 0..3usize, 4usize..30, 1usize..200), |(seed, m, n, steps)| {
        let out = dir.path().join(format!("sim_{seed}_{m}_{n}.csv"));
        let out_s = out.to_string_lossy().into_owned();
        let (n_s, steps_s, seed_s) = (n.to_string(), steps.to_string(), seed.to_string());
        let mut argv = vec!["rankdyn", "simulate", "--mode", names[m], "--n", &n_s];
        if m < 2 {
            argv.extend(["--preset", "fig5"]);
        }
        argv.extend(["--burn-in", "10", "--steps", &steps_s, "--stride", "1", "--seed", &seed_s, "--grid", "51", "--out", &out_s]);
        let (mut so, mut se) = (Vec::new(), Vec::new());
        prop_assert_eq!(run_cli(argv, &mut so, &mut se), 0, "{}", String::from_utf8_lossy(&se));
        let first = std::fs::read(&out).unwrap();
        std::fs::remove_file(&out).unwrap();
        let man = manifest_path(&out).to_string_lossy().into_owned();
        prop_assert_eq!(run_cli(["rankdyn", "replay", man.as_str()], &mut so, &mut se), 0);
        let second = std::fs::read(&out).unwrap();
        prop_assert!(first == second, "replayed output differs");
        Ok(())
    })
}

/// Every randomized property, by name.
pub fn all() -> Vec<(&'static str, Check)> {
    vec![
        ("cdf values are monotone", cdf_monotone as Check),
        ("sampling reproduces the cdf", sampling_matches_cdf),
        ("tabulated round trip", sampled_round_trip),
        ("order statistics average to the identity", order_statistics_average_to_identity),
        ("theta is monotone in rank", theta_monotone_in_rank),
        ("theta is monotone in value", theta_monotone_in_value),
        ("theta derivative matches differences", theta_derivative_matches_difference),
        ("weighted slope lies in [0,1)", weighted_slope_bounded),
        ("scalar maps are monotone into [0,1]", maps_monotone_into_unit),
        ("exogenous iteration contracts", exogenous_iteration_contracts),
        ("exogenous fixed point residual", fixed_point_residual),
        ("exogenous fixed point is a global attractor", global_attractor),
        ("endogenous limit is a fixed point", endogenous_limit_is_fixed_point),
        ("limit cdf is monotone", limit_cdf_monotone),
        ("endogenous jumps sit at basin boundaries", endogenous_jumps_at_basin_boundaries),
        ("large-n limit is monotone", large_n_limit_monotone),
        ("tail bound decreases along ladders", tail_bound_decreases_along_ladder),
        ("boundary slopes match differences", boundary_slopes_match_differences),
        ("other p fails head mass everywhere", other_p_fails_head_mass),
        ("exact law is a cdf", exact_law_is_cdf),
        ("simulation preserves [0,1]", simulation_preserves_range),
        ("endogenous values are copies", endogenous_values_are_copies),
        ("upper ranks never fall under min replacement", upper_ranks_never_fall),
        ("simulation is deterministic across thread pools", simulation_deterministic),
        ("rank order breaks ties by index", rank_order_is_stable),
        ("driver strings round trip", driver_strings_round_trip),
        ("manifest replay reproduces output", manifest_replay_reproduces_output),
    ]
}
