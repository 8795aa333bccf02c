//! Sample EM on standard-normal data: the final KL shrinks like 1/n.

use overspec_mda::mixture::kl_vs_standard_normal;
use overspec_mda::numerics::rng_stream;
use overspec_mda::sample::{fit, IterationBudget, SampleContext};
use overspec_mda::{Matrix, QuadratureRule};

fn main() -> overspec_mda::Result<()> {
    let rule = QuadratureRule::default();
    let budget = IterationBudget::default();
    let theta0 = [0.20, 0.05];
    for n in [100, 1_000, 10_000, 100_000] {
        let mut rng = rng_stream(7, n as u64);
        let mut v = vec![0.0; n * 2];
        rng.fill_normal(&mut v);
        let ctx = SampleContext::new(Matrix::from_vec(n, 2, v)?, 0.8)?;
        let (params, trace) = fit(&ctx, &theta0, &budget, &rule)?;
        let kl = kl_vs_standard_normal(&params, &rule)?;
        println!(
            "n {n:>6}  T {:>2} of {:>2}  |θ̂| {:.5}  σ̂² {:.5}  KL {kl:.3e}  n·KL {:.3}",
            trace.len() - 1,
            budget.iterations(n),
            params.theta_norm(),
            params.sigma_sq(),
            n as f64 * kl,
        );
    }
    Ok(())
}
