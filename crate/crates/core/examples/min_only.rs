//! Replacing only the lowest agent: exogenous and endogenous limits side by side.

use rankdyn::{DistributionSpec, Mode, RankSystem, WeightVector};

fn main() -> rankdyn::Result<()> {
    let n = 4;
    let sys = RankSystem::new(WeightVector::min_only(n)?)?;

    let exo = sys.limit_cdf(Mode::Exo, &DistributionSpec::Uniform, 11)?;
    let endo = sys.limit_cdf(Mode::Endo, &DistributionSpec::Uniform, 11)?;
    println!("{:>5} {:>12} {:>12} {:>6}", "x", "exogenous", "1-(1-x)^1/4", "endo");
    for (i, &x) in exo.xs.iter().enumerate() {
        let closed = 1.0 - (1.0 - x).powf(1.0 / n as f64);
        println!("{x:>5.2} {:>12.9} {closed:>12.9} {:>6}", exo.cdf[i], endo.cdf[i]);
    }

    let report = sys.find_endo_fixed_points(10_000, 1e-12)?;
    for p in &report.points {
        println!("endogenous fixed point {} ({}), slope {:.3}", p.location, p.stability, p.slope);
    }
    Ok(())
}
