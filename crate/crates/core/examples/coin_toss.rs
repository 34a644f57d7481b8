//! Order statistics of two fair coin tosses.

use rankdyn::{DistributionSpec, OrderStatContext};

fn main() -> rankdyn::Result<()> {
    let ctx = OrderStatContext::new(2)?;
    println!("P[lower <= x] at R = 1/2: {}", ctx.theta(1, 0.5)?);
    println!("P[upper <= x] at R = 1/2: {}", ctx.theta(2, 0.5)?);

    let coin = DistributionSpec::atoms([(0.0, 0.5), (1.0, 0.5)])?;
    for k in 1..=2 {
        let law = ctx.order_stat_distribution(k, &coin, 1001)?;
        println!("rank {k} of 2 takes values {:?}", law.atom_list());
    }
    Ok(())
}
