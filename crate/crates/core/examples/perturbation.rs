//! Uniform gap between the sample and population operators on [0, r].

use overspec_mda::population::PopulationSetting;
use overspec_mda::sample::perturbation_sup;
use overspec_mda::QuadratureRule;

fn main() -> overspec_mda::Result<()> {
    let setting = PopulationSetting::new(1, 0.8, QuadratureRule::default())?;
    for n in [100, 1_000, 10_000] {
        let s = perturbation_sup(&setting, n, 0.2, 41, 50, 1)?;
        println!(
            "n {n:>6}  median {:.4e}  [q10 {:.4e}, q90 {:.4e}]  √n·median {:.3}",
            s.median,
            s.q10,
            s.q90,
            (n as f64).sqrt() * s.median
        );
    }
    Ok(())
}
