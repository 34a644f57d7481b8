//! The limiting CDF collapses to zero below p/q as n grows.

use rankdyn::asymptotics::{convergence_table, validate_pq, PQSequenceFamily};

fn main() -> rankdyn::Result<()> {
    let ladder = [100, 400, 1600, 6400];
    for name in ["fig5", "sqrt", "uniform3"] {
        let family = PQSequenceFamily::from_preset(name)?;
        let report = validate_pq(&family, &ladder)?;
        print!("{report}");
        if !report.passed() {
            println!();
            continue;
        }
        let rows = convergence_table(&family, &ladder, &[0.3, 0.6, 0.7, 0.9])?;
        println!("{:>6} {:>5} {:>12} {:>8} {:>10}", "n", "nu", "R*", "limit", "gap");
        for r in rows {
            println!("{:>6} {:>5} {:>12.6e} {:>8.5} {:>10.3e}", r.n, r.nu, r.rstar, r.limit, r.gap);
        }
        println!();
    }
    Ok(())
}
