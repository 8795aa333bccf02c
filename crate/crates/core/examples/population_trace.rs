//! Population EM from θ₀ = (0.20, 0.05) in d = 2 for several weights.

use overspec_mda::population::{
    init_radius, kl_decay_factor, run_population_em, PopulationSetting, RadiusPolicy,
};
use overspec_mda::QuadratureRule;

fn main() -> overspec_mda::Result<()> {
    let theta0 = (0.20f64.powi(2) + 0.05f64.powi(2)).sqrt();
    for p in [0.6, 0.8, 0.9] {
        let setting = PopulationSetting::new(2, p, QuadratureRule::default())?;
        let radius = init_radius(&setting);
        let policy = if theta0 < radius {
            RadiusPolicy::Enforce
        } else {
            println!("p = {p}: |θ₀| = {theta0:.4} is outside the radius {radius:.4}");
            RadiusPolicy::DomainOnly
        };
        let trace = run_population_em(theta0, 20, &setting, policy)?;
        println!("p = {p}  per-step bound {:.4}", kl_decay_factor(theta0, &setting));
        for e in trace.entries.iter().step_by(4) {
            println!("  t {:>2}  |θ| {:.6e}  σ² {:.8}  KL {:.6e}", e.t, e.theta_norm, e.sigma_sq, e.kl);
        }
    }
    Ok(())
}
