//! Exact stationary law of the min-replacement process versus the
//! independence approximation.

use rankdyn::exact::{comparison_table, compare_means, second_orderstat_mean, second_orderstat_mean_by_quadrature};
use rankdyn::DistributionSpec;

fn main() -> rankdyn::Result<()> {
    for n in [2, 4, 10, 100] {
        let (exact, approx) = compare_means(n)?;
        println!(
            "n = {n:>3}: mean exact {exact:.6}, approx {approx:.6}; second lowest {:.6} (quadrature {:.6})",
            second_orderstat_mean(n),
            second_orderstat_mean_by_quadrature(n)?
        );
    }

    println!("\n{:>5} {:>10} {:>10}", "x", "exact", "approx");
    for row in comparison_table(4, &DistributionSpec::Uniform, 11)? {
        println!("{:>5.2} {:>10.6} {:>10.6}", row.x, row.exact, row.approx);
    }
    Ok(())
}
