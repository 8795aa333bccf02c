//! Gauss–Hermite rules for expectations under N(0, 1).

use overspec_mda::numerics::{expect_std_normal, gauss_hermite_rule};

fn main() -> overspec_mda::Result<()> {
    for order in [4, 16, 64, 256] {
        let rule = gauss_hermite_rule(order)?;
        let m4 = expect_std_normal(|z| z.powi(4), &rule)?;
        let lognormal = expect_std_normal(f64::exp, &rule)?;
        let logcosh = expect_std_normal(|z| (2.0 * z).cosh().ln(), &rule)?;
        println!(
            "order {order:>3}  nodes {:>3}  E[Z^4] = {m4:.15}  E[e^Z] - e^0.5 = {:+.2e}  E[log cosh 2Z] = {logcosh:.12}",
            rule.nodes().len(),
            lognormal - 0.5f64.exp(),
        );
    }
    Ok(())
}
