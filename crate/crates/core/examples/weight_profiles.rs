//! Fixed points for the named weight presets.

use rankdyn::presets::{preset, PRESET_NAMES};
use rankdyn::RankSystem;

fn main() -> rankdyn::Result<()> {
    let n = 100;
    for name in PRESET_NAMES {
        let Ok(w) = preset(name, n) else { continue };
        let sys = RankSystem::new(w)?;
        let rstar: Vec<String> = [0.1, 0.5, 0.9]
            .iter()
            .map(|&nu| sys.solve_exo_fixed_point(nu, 1e-12).map(|r| format!("{r:.5}")))
            .collect::<Result<_, _>>()?;
        let report = sys.find_endo_fixed_points(10_000, 1e-12)?;
        let points: Vec<String> = report
            .points
            .iter()
            .map(|p| format!("{:.4} {}", p.location, p.stability))
            .collect();
        println!("{name:>10}  q = {:>6.3}  R*(0.1, 0.5, 0.9) = {}  endo: {}", sys.q(), rstar.join(", "), points.join("; "));
    }
    Ok(())
}
