//! Population EM in its one-dimensional radial form.
//!
//! When the data are `N(0, I)` the population EM iterates stay on
//! `σ² = 1 − ‖θ‖²/d` and their norms follow `θₜ₊₁ = m(θₜ)` with
//! `m(θ) = E[t_p(θZ / (1 − θ²/d))·Z]`. The risk on that surface is the
//! radial function `ℓ(θ)`, and `ℓ(θ) − ℓ(0)` is the KL divergence of the
//! fitted mixture from `N(0, I)`.

use std::f64::consts::{PI, SQRT_2};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mixture::{radial_risk, Weight};
use crate::numerics::QuadratureRule;
use crate::trace::{EmTrace, TraceContext, TraceEntry};

/// Step for centered finite differences.
pub const FD_STEP: f64 = 1e-5;
/// Lower grid edge for ratio checks such as `m(θ)/θ`.
pub const GRID_FLOOR: f64 = 1e-4;
/// Traces stop once KL drops below this value.
pub const KL_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone)]
pub struct PopulationSetting {
    d: usize,
    weight: Weight,
    rule: QuadratureRule,
}

impl PopulationSetting {
    pub fn new(d: usize, p: f64, rule: QuadratureRule) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("dimension d must be at least 1".into()));
        }
        Ok(Self {
            d,
            weight: Weight::new(p)?,
            rule,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn p(&self) -> f64 {
        self.weight.value()
    }

    pub fn weight(&self) -> Weight {
        self.weight
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// `1 − (2p−1)²/2`.
    pub fn q(&self) -> f64 {
        self.weight.q()
    }

    fn variance(&self, theta_norm: f64) -> Result<f64> {
        let s = 1.0 - theta_norm * theta_norm / self.d as f64;
        if !(theta_norm >= 0.0) || !(s > 0.0) {
            return Err(Error::NumericalDomain(format!(
                "theta norm {theta_norm} leaves sigma^2 = 1 - theta^2/d = {s} nonpositive (d = {})",
                self.d
            )));
        }
        Ok(s)
    }
}

/// Radius below which the contraction factor `ρ` stays under one:
/// `√(d·(2 + q − √(8q + q²))/2)`.
pub fn contraction_radius(setting: &PopulationSetting) -> f64 {
    let q = setting.q();
    (setting.d as f64 * (2.0 + q - (8.0 * q + q * q).sqrt()) / 2.0).sqrt()
}

/// `1/(√2 + 1/(√2·d))`, the branch used by the classifier guarantees and by
/// the lower bound on `m`.
pub fn classifier_radius_branch(d: usize) -> f64 {
    1.0 / (SQRT_2 + 1.0 / (SQRT_2 * d as f64))
}

/// `1/(1 + √(1 + 1/d))`, the branch used by the finite-sample KL guarantee.
pub fn sample_radius_branch(d: usize) -> f64 {
    1.0 / (1.0 + (1.0 + 1.0 / d as f64).sqrt())
}

/// Initialization radius for population EM and the population classifier.
pub fn init_radius(setting: &PopulationSetting) -> f64 {
    contraction_radius(setting).min(classifier_radius_branch(setting.d))
}

/// Initialization radius for sample EM: the smallest of all three branches.
pub fn sample_init_radius(setting: &PopulationSetting) -> f64 {
    init_radius(setting).min(sample_radius_branch(setting.d))
}

/// `m(θ) = E[t_p(θZ/(1 − θ²/d))·Z]`.
pub fn m(theta_norm: f64, setting: &PopulationSetting) -> Result<f64> {
    let s = setting.variance(theta_norm)?;
    let a = theta_norm / s;
    let w = setting.weight;
    Ok(setting.rule.integrate_unchecked(|z| w.tilt(a * z) * z))
}

/// One population EM step in norm form, returning `(θ′, σ²′)` with
/// `σ²′ = 1 − θ′²/d`.
pub fn pop_em_step(theta_norm: f64, setting: &PopulationSetting) -> Result<(f64, f64)> {
    let next = m(theta_norm, setting)?;
    Ok((next, 1.0 - next * next / setting.d as f64))
}

/// Radial risk `ℓ(θ)` on the hypersurface.
pub fn ell(theta_norm: f64, setting: &PopulationSetting) -> Result<f64> {
    let s = setting.variance(theta_norm)?;
    Ok(radial_risk(setting.d, theta_norm, s, setting.weight, &setting.rule))
}

/// `ℓ(0) = (d/2)·log(2π) + d/2`.
pub fn ell_at_zero(d: usize) -> f64 {
    let d = d as f64;
    0.5 * d * (2.0 * PI).ln() + 0.5 * d
}

/// `ℓ′(θ) = (1 + θ²/d)/(1 − θ²/d)² · (θ − m(θ))`.
pub fn ell_prime(theta_norm: f64, setting: &PopulationSetting) -> Result<f64> {
    let s = setting.variance(theta_norm)?;
    let r = theta_norm * theta_norm / setting.d as f64;
    Ok((1.0 + r) / (s * s) * (theta_norm - m(theta_norm, setting)?))
}

/// `ρ = (1 + θ₀²/d)/(1 − θ₀²/d)² · q`, valid below [`contraction_radius`].
pub fn contraction_rho(theta0_norm: f64, setting: &PopulationSetting) -> Result<f64> {
    let radius = contraction_radius(setting);
    if !(theta0_norm >= 0.0 && theta0_norm < radius) {
        return Err(Error::Radius {
            what: "theta0 must lie below the contraction radius".into(),
            radius,
            value: theta0_norm,
        });
    }
    let r = theta0_norm * theta0_norm / setting.d as f64;
    Ok((1.0 + r) / ((1.0 - r) * (1.0 - r)) * setting.q())
}

/// `c₁(θ₀, d) = (1 − θ₀²/d)²/(1 + θ₀²/d)`.
pub fn decay_c1(theta0_norm: f64, d: usize) -> f64 {
    let r = theta0_norm * theta0_norm / d as f64;
    (1.0 - r) * (1.0 - r) / (1.0 + r)
}

/// `c₂ = c₁(θ₀, d) − q`. May be negative, in which case the per-step
/// factor `1/(1 + c₂)` exceeds one and says nothing.
pub fn decay_c2(theta0_norm: f64, setting: &PopulationSetting) -> f64 {
    decay_c1(theta0_norm, setting.d) - setting.q()
}

/// Per-step KL contraction factor `1/(1 + c₂)`; infinite when `c₂ ≤ −1`.
pub fn kl_decay_factor(theta0_norm: f64, setting: &PopulationSetting) -> f64 {
    let denom = 1.0 + decay_c2(theta0_norm, setting);
    if denom > 0.0 {
        1.0 / denom
    } else {
        f64::INFINITY
    }
}

/// Lower bound `4p(1−p)·(1 − 4θ²/(1 − θ²/d)²)·θ` on `m(θ)`, valid for
/// `θ ∈ [0, 1/(√2 + 1/(√2·d))]`.
pub fn m_lower_bound(theta_norm: f64, setting: &PopulationSetting) -> Result<f64> {
    let limit = classifier_radius_branch(setting.d);
    if !(theta_norm >= 0.0 && theta_norm <= limit) {
        return Err(Error::Radius {
            what: "lower bound on m requires theta in its admissible range".into(),
            radius: limit,
            value: theta_norm,
        });
    }
    let p = setting.p();
    let s = 1.0 - theta_norm * theta_norm / setting.d as f64;
    Ok(4.0 * p * (1.0 - p) * (1.0 - 4.0 * theta_norm * theta_norm / (s * s)) * theta_norm)
}

/// Whether [`run_population_em`] insists on the initialization radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RadiusPolicy {
    /// Reject `θ₀ ≥ init_radius`.
    #[default]
    Enforce,
    /// Only require `θ₀² < d` so the iteration is defined.
    DomainOnly,
}

/// Iterates `θₜ₊₁ = m(θₜ)` for `iterations` steps, recording `‖θₜ‖`, `σₜ²`
/// and `KLₜ = ℓ(θₜ) − ℓ(0)`. Stops early once KL falls below [`KL_FLOOR`].
pub fn run_population_em(
    theta0_norm: f64,
    iterations: usize,
    setting: &PopulationSetting,
    policy: RadiusPolicy,
) -> Result<EmTrace> {
    if iterations == 0 {
        return Err(Error::InvalidArgument("iteration count must be at least 1".into()));
    }
    if policy == RadiusPolicy::Enforce {
        let radius = init_radius(setting);
        if !(theta0_norm < radius) {
            return Err(Error::Radius {
                what: "population EM starting point outside the initialization radius".into(),
                radius,
                value: theta0_norm,
            });
        }
    }
    setting.variance(theta0_norm)?;

    let d = setting.d as f64;
    let base = ell_at_zero(setting.d);
    let mut trace = EmTrace::new(TraceContext::Population {
        d: setting.d,
        p: setting.p(),
    });
    let mut theta = theta0_norm;
    for t in 0..=iterations {
        let kl = ell(theta, setting)? - base;
        trace.push(TraceEntry {
            t,
            theta_norm: theta,
            sigma_sq: 1.0 - theta * theta / d,
            kl,
        });
        if t == iterations || kl < KL_FLOOR {
            break;
        }
        theta = m(theta, setting)?;
    }
    Ok(trace)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Smallest slack observed over the grid; negative means violated.
    pub worst_margin: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub d: usize,
    pub p: f64,
    pub theta0: f64,
    pub rho: f64,
    pub init_radius: f64,
    pub checks: Vec<PropertyCheck>,
}

impl PropertyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub const PROPERTY_TOL: f64 = 1e-8;

/// Numerical check of the contraction, convexity and PL properties of `m`
/// and `ℓ` on a uniform grid over `[1e-4, θ₀]`, plus the lower bound on `m`
/// wherever it applies.
pub fn property_report(
    setting: &PopulationSetting,
    theta0_norm: f64,
    grid_size: usize,
) -> Result<PropertyReport> {
    if grid_size < 3 {
        return Err(Error::InvalidArgument("grid needs at least 3 points".into()));
    }
    let rho = contraction_rho(theta0_norm, setting)?;
    let lo = GRID_FLOOR.min(theta0_norm);
    let grid: Vec<f64> = (0..grid_size)
        .map(|i| lo + (theta0_norm - lo) * i as f64 / (grid_size - 1) as f64)
        .collect();

    let ms: Vec<f64> = grid.iter().map(|&t| m(t, setting)).collect::<Result<_>>()?;
    let ells: Vec<f64> = grid.iter().map(|&t| ell(t, setting)).collect::<Result<_>>()?;
    let ell0 = ell_at_zero(setting.d);

    let mut slope = f64::INFINITY;
    for &t in &grid {
        let fd = (m(t + FD_STEP, setting)? - m((t - FD_STEP).max(0.0), setting)?)
            / (t + FD_STEP - (t - FD_STEP).max(0.0));
        slope = slope.min(1.0 - fd);
    }

    let contraction = grid
        .iter()
        .zip(&ms)
        .map(|(&t, &mt)| rho * t - mt)
        .fold(f64::INFINITY, f64::min);

    let convexity = ells
        .windows(3)
        .map(|w| w[2] - 2.0 * w[1] + w[0])
        .fold(f64::INFINITY, f64::min);

    let mut pl = f64::INFINITY;
    for ((&t, &mt), &lt) in grid.iter().zip(&ms).zip(&ells) {
        let r = t * t / setting.d as f64;
        let deriv = (1.0 + r) / ((1.0 - r) * (1.0 - r)) * (t - mt);
        pl = pl.min(deriv * deriv - (1.0 - rho) * (lt - ell0));
    }

    let limit = classifier_radius_branch(setting.d);
    let mut lower = f64::INFINITY;
    let mut lower_points = 0;
    for (&t, &mt) in grid.iter().zip(&ms) {
        if t <= limit {
            lower = lower.min(mt - m_lower_bound(t, setting)?);
            lower_points += 1;
        }
    }

    let check = |name, margin: f64, strict: bool, points| PropertyCheck {
        name,
        passed: if strict { margin > 0.0 } else { margin >= -PROPERTY_TOL },
        worst_margin: margin,
        points,
    };
    let n = grid.len();
    Ok(PropertyReport {
        d: setting.d,
        p: setting.p(),
        theta0: theta0_norm,
        rho,
        init_radius: init_radius(setting),
        checks: vec![
            check("m_slope_below_one", slope, true, n),
            check("contraction", contraction, false, n),
            check("convexity", convexity, false, n - 2),
            check("pl_inequality", pl, false, n),
            PropertyCheck {
                name: "m_lower_bound",
                passed: lower_points == 0 || lower >= -PROPERTY_TOL,
                worst_margin: if lower_points == 0 { 0.0 } else { lower },
                points: lower_points,
            },
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setting(d: usize, p: f64) -> PopulationSetting {
        PopulationSetting::new(d, p, QuadratureRule::default()).unwrap()
    }

    #[test]
    fn fixed_point_at_zero() {
        let s = setting(2, 0.8);
        assert!(m(0.0, &s).unwrap().abs() < 1e-12);
        let (t, v) = pop_em_step(0.0, &s).unwrap();
        assert!(t.abs() < 1e-12);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn step_lands_on_hypersurface() {
        let s = setting(3, 0.7);
        let (t, v) = pop_em_step(0.3, &s).unwrap();
        assert_eq!(v, 1.0 - t * t / 3.0);
    }

    #[test]
    fn domain_error_when_variance_vanishes() {
        let s = setting(2, 0.8);
        assert!(matches!(m(2f64.sqrt(), &s), Err(Error::NumericalDomain(_))));
        assert!(matches!(ell(1.5, &s), Err(Error::NumericalDomain(_))));
        assert!(ell_prime(2.0, &s).is_err());
    }

    #[test]
    fn m_positive_on_grid() {
        for &(d, p) in &[(1, 0.6), (2, 0.8), (10, 0.9)] {
            let s = setting(d, p);
            for i in 1..=50 {
                let t = 0.6 * i as f64 / 50.0;
                assert!(m(t, &s).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn ell_anchors() {
        for d in [1, 2, 10] {
            let s = setting(d, 0.8);
            assert!((ell(0.0, &s).unwrap() - ell_at_zero(d)).abs() < 1e-12);
            assert!(ell_prime(0.0, &s).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn ell_prime_matches_finite_differences() {
        for &(d, p) in &[(1, 0.6), (2, 0.8), (10, 0.9)] {
            let s = setting(d, p);
            let top = 0.9 * init_radius(&s);
            for i in 0..=40 {
                let t = GRID_FLOOR + (top - GRID_FLOOR) * i as f64 / 40.0;
                let fd = (ell(t + FD_STEP, &s).unwrap() - ell(t - FD_STEP, &s).unwrap())
                    / (2.0 * FD_STEP);
                let closed = ell_prime(t, &s).unwrap();
                assert!((fd - closed).abs() < 1e-6, "d={d} p={p} t={t}: {fd} vs {closed}");
                assert!(closed > 0.0);
            }
        }
    }

    #[test]
    fn ell_minimized_at_zero() {
        let s = setting(2, 0.8);
        let r = init_radius(&s);
        let e0 = ell(0.0, &s).unwrap();
        for i in 1..100 {
            assert!(ell(r * i as f64 / 100.0, &s).unwrap() > e0);
        }
    }

    #[test]
    fn radius_values() {
        // p → 1 gives q → 1/2.
        let s = setting(2, 1.0 - 1e-12);
        let expected = (2.0 * (2.5 - 4.25f64.sqrt()) / 2.0).sqrt();
        assert!((contraction_radius(&s) - expected).abs() < 1e-9);

        let s = setting(2, 0.9);
        assert!((s.q() - 0.68).abs() < 1e-15);
        let first = (2.0 * (2.68 - 5.9024f64.sqrt()) / 2.0).sqrt();
        assert!((contraction_radius(&s) - first).abs() < 1e-12);
        assert!((classifier_radius_branch(2) - 1.0 / (SQRT_2 + 1.0 / (2.0 * SQRT_2))).abs() < 1e-15);
        assert!((init_radius(&s) - first).abs() < 1e-12);
        assert!((init_radius(&s) - 0.50).abs() < 5e-3);
        assert!(sample_init_radius(&s) <= init_radius(&s));
    }

    #[test]
    fn radius_increases_with_p() {
        for d in [1, 2, 10] {
            let mut prev = 0.0;
            for i in 1..100 {
                let p = 0.5 + 0.5 * i as f64 / 100.0;
                let r = contraction_radius(&setting(d, p));
                assert!(r > prev, "d={d} p={p}");
                prev = r;
            }
        }
    }

    #[test]
    fn rho_anchors() {
        let s = setting(2, 0.8);
        assert!((contraction_rho(0.0, &s).unwrap() - 0.82).abs() < 1e-15);
        let radius = contraction_radius(&s);
        for i in 0..100 {
            let rho = contraction_rho(radius * i as f64 / 100.0, &s).unwrap();
            assert!(rho > 0.0 && rho < 1.0);
        }
        assert!(matches!(contraction_rho(radius * 1.001, &s), Err(Error::Radius { .. })));
    }

    #[test]
    fn contraction_bound_on_grid() {
        let s = setting(2, 0.8);
        let t0 = 0.3;
        let rho = contraction_rho(t0, &s).unwrap();
        for i in 0..=100 {
            let t = t0 * i as f64 / 100.0;
            assert!(m(t, &s).unwrap() <= rho * t + 1e-12);
        }
    }

    #[test]
    fn lower_bound_anchors() {
        let s = setting(2, 0.8);
        assert_eq!(m_lower_bound(0.0, &s).unwrap(), 0.0);
        assert!(m_lower_bound(0.01, &s).unwrap() > 0.0);
        assert!(m_lower_bound(0.6, &s).is_err());
        for &(d, p) in &[(1, 0.6), (2, 0.8), (10, 0.9), (10, 0.6), (1, 0.9)] {
            let s = setting(d, p);
            let lim = classifier_radius_branch(d);
            for i in 0..=100 {
                let t = lim * i as f64 / 100.0;
                assert!(m_lower_bound(t, &s).unwrap() <= m(t, &s).unwrap() + 1e-12);
            }
        }
    }

    #[test]
    fn trace_from_zero_is_constant() {
        let s = setting(2, 0.8);
        let tr = run_population_em(0.0, 5, &s, RadiusPolicy::Enforce).unwrap();
        assert_eq!(tr.len(), 1);
        assert!(tr.entries[0].kl.abs() < 1e-12);
    }

    #[test]
    fn trace_decreases() {
        let s = setting(2, 0.8);
        let t0 = (0.2f64 * 0.2 + 0.05 * 0.05).sqrt();
        let tr = run_population_em(t0, 30, &s, RadiusPolicy::Enforce).unwrap();
        for w in tr.entries.windows(2) {
            assert!(w[1].theta_norm < w[0].theta_norm);
            assert!(w[1].kl < w[0].kl);
        }
        let factor = kl_decay_factor(t0, &s);
        for r in tr.kl_ratios(1e-14) {
            assert!(r <= factor + 1e-10);
        }
    }

    #[test]
    fn trace_rejects_outside_radius() {
        let s = setting(2, 0.6);
        let err = run_population_em(0.3, 5, &s, RadiusPolicy::Enforce).unwrap_err();
        assert!(matches!(err, Error::Radius { .. }));
        assert!(run_population_em(0.3, 5, &s, RadiusPolicy::DomainOnly).is_ok());
        assert!(run_population_em(1.5, 5, &s, RadiusPolicy::DomainOnly).is_err());
        assert!(run_population_em(0.1, 0, &s, RadiusPolicy::Enforce).is_err());
    }

    #[test]
    fn property_report_examples() {
        let r = property_report(&setting(1, 0.8), 0.2, 200).unwrap();
        assert!(r.all_passed(), "{r:?}");
        let s = setting(10, 0.6);
        let r = property_report(&s, 0.9 * init_radius(&s), 200).unwrap();
        assert!(r.all_passed(), "{r:?}");
        let above = contraction_radius(&s) * 1.01;
        assert!(matches!(property_report(&s, above, 200), Err(Error::Radius { .. })));
    }
}
