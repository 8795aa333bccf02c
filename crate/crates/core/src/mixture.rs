//! The unbalanced two-component location–scale mixture
//! `G(θ, σ²) = (1−p)·N(−θ, σ²I) + p·N(+θ, σ²I)`.
//!
//! Everything here is written in terms of two link functions of the
//! weight `p`:
//!
//! * `t_p(x) = (p·eˣ − (1−p)·e⁻ˣ) / (p·eˣ + (1−p)·e⁻ˣ)`, the posterior tilt,
//! * `c_p(x) = p·eˣ + (1−p)·e⁻ˣ`.
//!
//! Both are evaluated through `b = ½·log(p/(1−p))`, using
//! `t_p(x) = tanh(x + b)` and `log c_p(x) = ½·log(4p(1−p)) + log cosh(x + b)`,
//! which stay finite for any finite `x`.

use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::matrix::{dot, norm, norm_sq, Matrix};
use crate::numerics::{QuadratureRule, RngStream};

/// Mixture weight `p ∈ (1/2, 1)` with its link-function constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weight {
    p: f64,
    shift: f64,
    half_log_4pq: f64,
}

impl Weight {
    /// Rejects `p ∉ (1/2, 1)`. For `p < 1/2` map `(θ, p) ↦ (−θ, 1−p)` first.
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.5 && p < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "mixture weight p must lie in (1/2, 1), got {p}"
            )));
        }
        Ok(Self {
            p,
            shift: 0.5 * (p / (1.0 - p)).ln(),
            half_log_4pq: 0.5 * (4.0 * p * (1.0 - p)).ln(),
        })
    }

    pub fn value(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn tilt(&self, x: f64) -> f64 {
        (x + self.shift).tanh()
    }

    #[inline]
    pub fn log_c(&self, x: f64) -> f64 {
        self.half_log_4pq + log_cosh(x + self.shift)
    }

    /// `1 − (2p−1)²/2`, the constant written `q` in the convergence radius.
    pub fn q(&self) -> f64 {
        1.0 - 0.5 * (2.0 * self.p - 1.0).powi(2)
    }
}

#[inline]
fn log_cosh(y: f64) -> f64 {
    let a = y.abs();
    a + (-2.0 * a).exp().ln_1p() - LN_2
}

/// `t_p(x)`; `p` must lie in `(1/2, 1)`.
pub fn tilt(p: f64, x: f64) -> f64 {
    debug_assert!(p > 0.5 && p < 1.0);
    (x + 0.5 * (p / (1.0 - p)).ln()).tanh()
}

/// `log c_p(x)`; `p` must lie in `(1/2, 1)`.
pub fn log_c(p: f64, x: f64) -> f64 {
    debug_assert!(p > 0.5 && p < 1.0);
    0.5 * (4.0 * p * (1.0 - p)).ln() + log_cosh(x + 0.5 * (p / (1.0 - p)).ln())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureParams {
    theta: Vec<f64>,
    sigma_sq: f64,
    weight: Weight,
}

impl MixtureParams {
    pub fn new(theta: Vec<f64>, sigma_sq: f64, p: f64) -> Result<Self> {
        Self::with_weight(theta, sigma_sq, Weight::new(p)?)
    }

    pub fn with_weight(theta: Vec<f64>, sigma_sq: f64, weight: Weight) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::InvalidArgument("dimension d must be at least 1".into()));
        }
        if !(sigma_sq > 0.0 && sigma_sq.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sigma_sq must be positive and finite, got {sigma_sq}"
            )));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("theta has non-finite entries".into()));
        }
        Ok(Self {
            theta,
            sigma_sq,
            weight,
        })
    }

    /// Point on the population hypersurface `σ² = 1 − ‖θ‖²/d`.
    pub fn on_hypersurface(theta: Vec<f64>, p: f64) -> Result<Self> {
        let d = theta.len() as f64;
        let s = 1.0 - norm_sq(&theta) / d;
        Self::new(theta, s, p)
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn theta_norm(&self) -> f64 {
        norm(&self.theta)
    }

    pub fn sigma_sq(&self) -> f64 {
        self.sigma_sq
    }

    pub fn p(&self) -> f64 {
        self.weight.p
    }

    pub fn weight(&self) -> Weight {
        self.weight
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }
}

/// `log f(x; θ, σ²) = −(d/2)·log(2πσ²) − (‖x‖² + ‖θ‖²)/(2σ²) + log c_p(θᵀx/σ²)`.
pub fn log_density(x: &[f64], params: &MixtureParams) -> Result<f64> {
    if x.len() != params.dim() {
        return Err(Error::InvalidArgument(format!(
            "point has dimension {}, mixture has {}",
            x.len(),
            params.dim()
        )));
    }
    Ok(log_density_unchecked(x, params))
}

#[inline]
pub(crate) fn log_density_unchecked(x: &[f64], params: &MixtureParams) -> f64 {
    let d = params.dim() as f64;
    let s = params.sigma_sq;
    -0.5 * d * (2.0 * PI * s).ln() - (norm_sq(x) + norm_sq(&params.theta)) / (2.0 * s)
        + params.weight.log_c(dot(&params.theta, x) / s)
}

/// Draws `n` rows from `G(θ, σ²)`: `+θ` with probability `p`, else `−θ`,
/// plus `N(0, σ²I)` noise.
pub fn sample_mixture(params: &MixtureParams, n: usize, rng: &mut RngStream) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    let d = params.dim();
    let sigma = params.sigma_sq.sqrt();
    let mut out = Matrix::zeros(n, d);
    for i in 0..n {
        let sign = if rng.uniform() < params.p() { 1.0 } else { -1.0 };
        let row = out.row_mut(i);
        for (x, &t) in row.iter_mut().zip(&params.theta) {
            *x = sign * t + sigma * rng.normal();
        }
    }
    Ok(out)
}

/// Negative population log-likelihood under `N(0, I)` data, reduced to one
/// dimension: `q(θ, σ²) = (d/2)log(2πσ²) + (d+θ²)/(2σ²) − E[log c_p(θZ/σ²)]`.
pub fn radial_risk(d: usize, theta_norm: f64, sigma_sq: f64, weight: Weight, rule: &QuadratureRule) -> f64 {
    let d = d as f64;
    let scale = theta_norm / sigma_sq;
    let e_log_c = rule.integrate_unchecked(|z| weight.log_c(scale * z));
    0.5 * d * (2.0 * PI * sigma_sq).ln() + (d + theta_norm * theta_norm) / (2.0 * sigma_sq) - e_log_c
}

/// `D_KL[N(0, I) ‖ G(θ, σ²)]` through the radial reduction.
pub fn kl_vs_standard_normal(params: &MixtureParams, rule: &QuadratureRule) -> Result<f64> {
    if !(params.sigma_sq > 0.0) {
        return Err(Error::InvalidArgument("sigma_sq must be positive".into()));
    }
    let d = params.dim();
    let q = radial_risk(d, params.theta_norm(), params.sigma_sq, params.weight, rule);
    Ok(q - 0.5 * d as f64 * (1.0 + (2.0 * PI).ln()))
}
