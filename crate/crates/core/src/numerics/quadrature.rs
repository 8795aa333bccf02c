//! Gauss–Hermite quadrature in the probabilist's normalization, so that
//! `Σ wᵢ f(zᵢ) ≈ E[f(Z)]` for `Z ~ N(0, 1)`.
//!
//! Nodes start from the eigenvalues of the Jacobi matrix of the orthonormal
//! Hermite polynomials (Golub–Welsch) and are then polished with Newton steps
//! on the three-term recurrence. Weights come from the Christoffel function
//! `w = 1 / (n·h_{n-1}(z)²)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub const DEFAULT_ORDER: usize = 64;
pub const MAX_ORDER: usize = 512;

/// Nodes and weights of an `order`-point Gauss–Hermite rule for `N(0, 1)`.
///
/// For large orders the outermost weights underflow to exactly zero in
/// double precision; those nodes contribute nothing and are dropped, so
/// `nodes.len()` can be smaller than `order` (only for `order` ≳ 360).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    order: usize,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Sum of `w·f(z)` without finiteness checks. Used on hot paths where the
    /// integrand is known to be bounded.
    #[inline]
    pub(crate) fn integrate_unchecked(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| w * f(z))
            .sum()
    }
}

impl Default for QuadratureRule {
    fn default() -> Self {
        gauss_hermite_rule(DEFAULT_ORDER).expect("default order is valid")
    }
}

/// Orthonormal probabilist Hermite polynomials `(h_{n-1}(z), h_n(z))`.
fn hermite_pair(n: usize, z: f64) -> (f64, f64) {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..n {
        let kf = k as f64;
        let next = (z * cur - kf.sqrt() * prev) / (kf + 1.0).sqrt();
        prev = cur;
        cur = next;
    }
    (prev, cur)
}

pub fn gauss_hermite_rule(order: usize) -> Result<QuadratureRule> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::InvalidArgument(format!(
            "quadrature order must be in 1..={MAX_ORDER}, got {order}"
        )));
    }
    if order == 1 {
        return Ok(QuadratureRule {
            nodes: vec![0.0],
            weights: vec![1.0],
            order,
        });
    }

    let n = order;
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64).sqrt();
        jacobi[(k - 1, k)] = b;
        jacobi[(k, k - 1)] = b;
    }
    let mut nodes: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
    nodes.sort_by(|a, b| a.total_cmp(b));

    let nf = n as f64;
    for z in nodes.iter_mut() {
        for _ in 0..100 {
            let (h_prev, h_n) = hermite_pair(n, *z);
            let step = h_n / (nf.sqrt() * h_prev);
            if !step.is_finite() {
                break;
            }
            *z -= step;
            if step.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
    }

    // Enforce exact symmetry about zero.
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let a = 0.5 * (nodes[j] - nodes[i]);
        nodes[i] = -a;
        nodes[j] = a;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }

    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&z| {
            let (h_prev, _) = hermite_pair(n, z);
            1.0 / (nf * h_prev * h_prev)
        })
        .collect();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let w = 0.5 * (weights[i] + weights[j]);
        weights[i] = w;
        weights[j] = w;
    }

    let (nodes, weights): (Vec<f64>, Vec<f64>) = nodes
        .into_iter()
        .zip(weights)
        .filter(|&(_, w)| w > 0.0 && w.is_finite())
        .unzip();

    // Renormalize away the last few ulps so that the rule integrates 1 exactly.
    let total: f64 = weights.iter().sum();
    let weights = weights.into_iter().map(|w| w / total).collect();

    Ok(QuadratureRule {
        nodes,
        weights,
        order,
    })
}

/// `E[f(Z)]` for `Z ~ N(0, 1)` under `rule`.
pub fn expect_std_normal(f: impl Fn(f64) -> f64, rule: &QuadratureRule) -> Result<f64> {
    let mut acc = 0.0;
    for (&z, &w) in rule.nodes.iter().zip(&rule.weights) {
        let v = f(z);
        if !v.is_finite() {
            return Err(Error::NumericalDomain(format!(
                "integrand is {v} at quadrature node z = {z}"
            )));
        }
        acc += w * v;
    }
    Ok(acc)
}
