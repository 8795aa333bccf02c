//! KL divergence of the unbalanced mixture from N(0, I), and a sanity
//! check of the density against a direct two-term sum.

use overspec_mda::mixture::{kl_vs_standard_normal, log_density, tilt, log_c};
use overspec_mda::{MixtureParams, QuadratureRule};

fn main() -> overspec_mda::Result<()> {
    let rule = QuadratureRule::default();
    println!("tilt(0.8, 0) = {}, log_c(0.8, 0) = {}", tilt(0.8, 0.0), log_c(0.8, 0.0));

    println!("{:>6} {:>6} {:>14}", "p", "|θ|", "KL");
    for p in [0.6, 0.8, 0.9] {
        for r in [0.0, 0.1, 0.2, 0.4] {
            let params = MixtureParams::on_hypersurface(vec![r, 0.0], p)?;
            println!("{p:>6} {r:>6} {:>14.6e}", kl_vs_standard_normal(&params, &rule)?);
        }
    }

    let params = MixtureParams::new(vec![0.7, -0.2], 0.8, 0.75)?;
    let x = [0.3, 1.1];
    let phi = |m: f64| {
        let d: f64 = x.iter().zip(params.theta()).map(|(a, t)| (a - m * t).powi(2)).sum();
        (-d / (2.0 * 0.8)).exp() / (2.0 * std::f64::consts::PI * 0.8)
    };
    let direct = (0.75 * phi(1.0) + 0.25 * phi(-1.0)).ln();
    println!("log f(x) = {:.15}  direct = {direct:.15}", log_density(&x, &params)?);
    Ok(())
}
