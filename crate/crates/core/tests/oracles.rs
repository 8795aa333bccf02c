mod common;

use common::*;

use overspec_mda::mda::bayes_risk;
use overspec_mda::mixture::{kl_vs_standard_normal, log_c, tilt};
use overspec_mda::population::{m, PopulationSetting};
use overspec_mda::{MixtureParams, QuadratureRule};

#[test]
fn m_matches_monte_carlo() {
    for (i, case) in oracle_cases().iter().enumerate() {
        let c = m_oracle(case, 1000 + i as u64);
        assert!(c.z() < 3.0, "{}: quad {} mc {} ± {}", c.what, c.quadrature, c.monte_carlo, c.se);
    }
}

#[test]
fn kl_matches_monte_carlo() {
    for (i, case) in oracle_cases().iter().enumerate() {
        let c = kl_oracle(case, 2000 + i as u64);
        assert!(c.z() < 3.0, "{}: quad {} mc {} ± {}", c.what, c.quadrature, c.monte_carlo, c.se);
    }
}

#[test]
fn em_step_matches_naive_reference() {
    let gap = em_step_reference_gap();
    assert!(gap < 1e-12, "gap {gap:e}");
}

#[test]
fn naive_reference_keeps_variance_identity() {
    let data = normal_matrix(500, 2, 5, 0);
    let u = data.as_slice().iter().map(|x| x * x).sum::<f64>() / 1000.0;
    let (t, s) = naive_em_step(&data, &[0.1, 0.2], u - 0.025, 0.7);
    assert!((s + (t[0] * t[0] + t[1] * t[1]) / 2.0 - u).abs() < 1e-12);
}

#[test]
fn anchors() {
    let rule = QuadratureRule::default();
    for d in [1, 2, 5] {
        for p in [0.6, 0.8, 0.9] {
            let s = PopulationSetting::new(d, p, rule.clone()).unwrap();
            assert!(m(0.0, &s).unwrap().abs() < 1e-10);
            let zero = MixtureParams::new(vec![0.0; d], 1.0, p).unwrap();
            assert!(kl_vs_standard_normal(&zero, &rule).unwrap().abs() < 1e-10);
            assert!((tilt(p, 0.0) - (2.0 * p - 1.0)).abs() < 1e-10);
            assert!(log_c(p, 0.0).abs() < 1e-10);
        }
    }
    assert!((bayes_risk(0.0) - 0.5).abs() < 1e-10);
}
