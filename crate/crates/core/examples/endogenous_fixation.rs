//! Endogenous replacement copies surviving values until one value remains.

use rankdyn::mc::{replica_rng, Population, SimMode, SimConfig, Simulator};
use rankdyn::{DistributionSpec, WeightVector};

fn distinct(values: &[f64]) -> usize {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len()
}

fn main() -> rankdyn::Result<()> {
    let n = 50;
    let start = Population::sample(n, &DistributionSpec::Uniform, replica_rng(1, 0))?;
    let max = start.fitnesses.iter().cloned().fold(0.0, f64::max);

    let mut config = SimConfig::rank(SimMode::RankEndo, WeightVector::min_only(n)?, None, 100_000, 1, 1);
    config.initial = Some(DistributionSpec::Uniform);
    config.stride = 1;
    let mut sim = Simulator::new(config, 0)?;
    for t in [0, 100, 1_000, 10_000, 100_000] {
        while sim.population().step_count < t {
            sim.step();
        }
        println!("step {t:>6}: {:>2} distinct values", distinct(&sim.population().fitnesses));
    }
    println!("initial maximum {max:.6}, survivor {:.6}", sim.population().fitnesses[0]);
    Ok(())
}
