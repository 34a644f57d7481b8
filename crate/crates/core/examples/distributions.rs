//! Building drivers, sampling them and round-tripping a sampled CDF through CSV.

use std::io::BufReader;

use rankdyn::mc::{ks_distance, replica_rng, EmpiricalCdf};
use rankdyn::{DistributionSpec, SampledCdf};

fn main() -> rankdyn::Result<()> {
    let laws = [
        ("uniform", DistributionSpec::uniform()),
        ("x^3", DistributionSpec::power_law(3.0)?),
        ("coin", DistributionSpec::atoms([(0.2, 0.3), (0.8, 0.7)])?),
        (
            "mixture",
            DistributionSpec::mixture(vec![
                (DistributionSpec::power_law(0.5)?, 0.6),
                (DistributionSpec::atoms([(0.9, 1.0)])?, 0.4),
            ])?,
        ),
    ];

    let mut rng = replica_rng(42, 0);
    for (name, law) in &laws {
        let draws: Vec<f64> = (0..50_000).map(|_| law.sample(&mut rng)).collect();
        let emp = EmpiricalCdf::from_samples(draws)?;
        println!(
            "{name:>8}: median {:.4}, sample mean {:.4}, KS to law {:.4}",
            law.quantile(0.5),
            emp.mean(),
            ks_distance(&emp, law)
        );
    }

    let table = laws[1].1.sample_cdf(101)?;
    let mut csv = Vec::new();
    table.write_csv(&mut csv)?;
    let back = SampledCdf::read_csv(BufReader::new(csv.as_slice()))?;
    println!("CSV round trip of x^3 on 101 points: x and cdf identical = {}", back.xs == table.xs && back.cdf == table.cdf);
    println!("F(0.5) from the table: {}", back.to_tabulated()?.cdf(0.5));
    Ok(())
}
