//! A two-valued driver: 0.2 with probability 0.3, otherwise 0.8.

use rankdyn::exact::exact_limit_cdf;
use rankdyn::{DistributionSpec, Mode, RankSystem, WeightVector};

fn main() -> rankdyn::Result<()> {
    let coin = DistributionSpec::atoms([(0.2, 0.3), (0.8, 0.7)])?;
    let sys = RankSystem::new(WeightVector::min_only(4)?)?;

    let exo = sys.limit_cdf(Mode::Exo, &coin, 1001)?;
    println!("exogenous: mass {:.6} at 0.2, rest at 0.8", exo.eval(0.2));

    // Starting from the coin, the endogenous dynamics keep only the top value.
    let endo = sys.limit_cdf(Mode::Endo, &coin, 1001)?;
    println!("endogenous: F(0.5) = {}, F(0.8) = {}", endo.eval(0.5), endo.eval(0.8));

    let exact = exact_limit_cdf(4, &coin)?;
    println!("exact stationary law atoms: {:?}", exact.atom_list());
    Ok(())
}
