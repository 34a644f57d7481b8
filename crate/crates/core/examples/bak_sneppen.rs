//! Bak-Sneppen on a ring of 200 sites.

use rankdyn::mc::{run_detailed, SimConfig};
use rankdyn::DistributionSpec;

fn main() -> rankdyn::Result<()> {
    let mut config = SimConfig::bak_sneppen(200, DistributionSpec::Uniform, 100_000, 900_000, 7);
    config.stride = 100;
    let sim = run_detailed(&config)?;
    println!("{} steps at {:.2e} steps/s", sim.total_steps, sim.step_rate());
    for x in [0.5, 0.6, 0.65, 0.7, 0.8, 0.9] {
        println!("F({x}) = {:.4}", sim.cdf.eval(x));
    }
    Ok(())
}
