//! Two-class MDA: fit on folded data, then compare to the Bayes rule.

use overspec_mda::mda::{
    bayes_risk, classify, estimate_error, estimate_excess_risk, fit_mda, generate_labeled,
    tv_gap_estimate,
};
use overspec_mda::numerics::rng_stream;
use overspec_mda::sample::IterationBudget;
use overspec_mda::QuadratureRule;

fn main() -> overspec_mda::Result<()> {
    let mu = [1.0, 0.0];
    let rule = QuadratureRule::default();
    let budget = IterationBudget::default();
    println!("Bayes risk {:.6}", bayes_risk(1.0));
    for n in [1_000, 10_000, 100_000] {
        let ds = generate_labeled(&mu, n, &mut rng_stream(3, n as u64))?;
        let (model, _) = fit_mda(&ds, 0.8, &[0.20, 0.05], &budget, &rule)?;
        let err = estimate_error(&model, &mu, 200_000, &mut rng_stream(3, 1 << 40))?;
        let ex = estimate_excess_risk(&model, &mu, 200_000, &mut rng_stream(3, 2 << 40))?;
        let tp = tv_gap_estimate(&model, &mu, 1, 100_000, &mut rng_stream(3, 3 << 40))?;
        let tm = tv_gap_estimate(&model, &mu, -1, 100_000, &mut rng_stream(3, 4 << 40))?;
        println!(
            "n {n:>6}  μ̂ ({:+.4}, {:+.4})  error {:.5} ± {:.5}  excess {:.2e} ± {:.1e}  tv {:.2e} + {:.2e}",
            model.mu_hat()[0],
            model.mu_hat()[1],
            err.rate,
            err.ci_half_width,
            ex.value,
            ex.se,
            tp.value,
            tm.value,
        );
        println!("  classify(0.5, 0) = {:+}", classify(&model, &[0.5, 0.0])?);
    }
    Ok(())
}
