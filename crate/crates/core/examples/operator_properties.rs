//! Grid checks of the population operator and radial risk.

use overspec_mda::population::{init_radius, property_report, PopulationSetting};
use overspec_mda::QuadratureRule;

fn main() -> overspec_mda::Result<()> {
    for d in [1, 2, 10] {
        for p in [0.6, 0.8, 0.9] {
            let setting = PopulationSetting::new(d, p, QuadratureRule::default())?;
            let theta0 = 0.9 * init_radius(&setting);
            let report = property_report(&setting, theta0, 200)?;
            println!("d {d:>2}  p {p}  θ₀ {theta0:.4}  ρ {:.5}", report.rho);
            for c in &report.checks {
                println!(
                    "    {:<20} {}  worst margin {:+.3e}",
                    c.name,
                    if c.passed { "ok  " } else { "FAIL" },
                    c.worst_margin
                );
            }
        }
    }
    Ok(())
}
