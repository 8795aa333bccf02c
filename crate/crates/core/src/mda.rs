//! Two-class mixture discriminant analysis on `(X, Y)` with `Y` Rademacher
//! and `X | Y = y ~ N(y·μ, I)`.
//!
//! Each class-conditional density is modelled by `G(±μ̂, θ, σ²)`, i.e. the
//! mixture `G(θ, σ²)` shifted to `±μ̂`. Because `XᵢYᵢ ~ N(μ, I)`, one fit on
//! the folded sample serves both classes: `μ̂` is the folded mean and
//! `(θ, σ²)` come from sample EM on the centered residuals `XᵢYᵢ − μ̂`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{dot, norm, Matrix};
use crate::mixture::{log_density_unchecked, MixtureParams};
use crate::numerics::{std_normal_cdf, QuadratureRule, RngStream};
use crate::sample::{fit, IterationBudget, SampleContext};
use crate::trace::EmTrace;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Matrix,
    labels: Vec<f64>,
}

impl LabeledDataset {
    pub fn new(features: Matrix, labels: Vec<f64>) -> Result<Self> {
        if features.rows() < 2 {
            return Err(Error::InvalidArgument("dataset needs at least 2 rows".into()));
        }
        if labels.len() != features.rows() {
            return Err(Error::InvalidArgument(format!(
                "{} labels for {} feature rows",
                labels.len(),
                features.rows()
            )));
        }
        if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
            return Err(Error::InvalidArgument("labels must be exactly +1 or -1".into()));
        }
        Ok(Self { features, labels })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn d(&self) -> usize {
        self.features.cols()
    }

    /// Rows `Xᵢ·Yᵢ`.
    pub fn folded(&self) -> Matrix {
        let mut out = self.features.clone();
        for (i, &y) in self.labels.iter().enumerate() {
            out.row_mut(i).iter_mut().for_each(|x| *x *= y);
        }
        out
    }
}

pub fn generate_labeled(mu: &[f64], n: usize, rng: &mut RngStream) -> Result<LabeledDataset> {
    if n < 2 {
        return Err(Error::InvalidArgument("dataset needs at least 2 rows".into()));
    }
    if mu.is_empty() {
        return Err(Error::InvalidArgument("dimension d must be at least 1".into()));
    }
    let d = mu.len();
    let mut features = Matrix::zeros(n, d);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let y = rng.rademacher();
        labels.push(y);
        for (x, &m) in features.row_mut(i).iter_mut().zip(mu) {
            *x = y * m + rng.normal();
        }
    }
    LabeledDataset::new(features, labels)
}

/// `μ̂ = (1/n)·Σ XᵢYᵢ`.
pub fn estimate_mu(ds: &LabeledDataset) -> Vec<f64> {
    let mut mu = vec![0.0; ds.d()];
    for (row, &y) in ds.features.iter_rows().zip(&ds.labels) {
        for (m, &x) in mu.iter_mut().zip(row) {
            *m += x * y;
        }
    }
    let n = ds.n() as f64;
    mu.iter_mut().for_each(|m| *m /= n);
    mu
}

#[derive(Debug, Clone, PartialEq)]
pub struct MdaModel {
    mu_hat: Vec<f64>,
    mixture: MixtureParams,
}

impl MdaModel {
    pub fn new(mu_hat: Vec<f64>, mixture: MixtureParams) -> Result<Self> {
        if mu_hat.len() != mixture.dim() {
            return Err(Error::InvalidArgument(format!(
                "mu_hat has dimension {}, mixture has {}",
                mu_hat.len(),
                mixture.dim()
            )));
        }
        Ok(Self { mu_hat, mixture })
    }

    pub fn mu_hat(&self) -> &[f64] {
        &self.mu_hat
    }

    pub fn mixture(&self) -> &MixtureParams {
        &self.mixture
    }

    pub fn dim(&self) -> usize {
        self.mu_hat.len()
    }

    /// `log f(x; sign·μ̂, θ, σ²) = log f(x − sign·μ̂; θ, σ²)`.
    fn log_class_density(&self, x: &[f64], sign: f64, buf: &mut Vec<f64>) -> f64 {
        buf.clear();
        buf.extend(x.iter().zip(&self.mu_hat).map(|(a, m)| a - sign * m));
        log_density_unchecked(buf, &self.mixture)
    }

    fn decide(&self, x: &[f64], buf: &mut Vec<f64>) -> f64 {
        if self.log_class_density(x, 1.0, buf) > self.log_class_density(x, -1.0, buf) {
            1.0
        } else {
            -1.0
        }
    }
}

/// Fits `μ̂` and then `(θ, σ²)` by sample EM on `XᵢYᵢ − μ̂`.
pub fn fit_mda(
    ds: &LabeledDataset,
    p: f64,
    theta0: &[f64],
    budget: &IterationBudget,
    rule: &QuadratureRule,
) -> Result<(MdaModel, EmTrace)> {
    let mu_hat = estimate_mu(ds);
    let mut residuals = ds.folded();
    for i in 0..residuals.rows() {
        for (x, m) in residuals.row_mut(i).iter_mut().zip(&mu_hat) {
            *x -= m;
        }
    }
    let ctx = SampleContext::new(residuals, p)?;
    let (mixture, trace) = fit(&ctx, theta0, budget, rule)?;
    Ok((MdaModel::new(mu_hat, mixture)?, trace))
}

/// `+1` when the `+μ̂` class density is strictly larger, `−1` otherwise
/// (ties included). Compared in log space.
pub fn classify(model: &MdaModel, x: &[f64]) -> Result<i8> {
    if x.len() != model.dim() {
        return Err(Error::InvalidArgument(format!(
            "point has dimension {}, model has {}",
            x.len(),
            model.dim()
        )));
    }
    let mut buf = Vec::with_capacity(x.len());
    Ok(model.decide(x, &mut buf) as i8)
}

/// `Φ(−‖μ‖)`.
pub fn bayes_risk(mu_norm: f64) -> f64 {
    std_normal_cdf(-mu_norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorEstimate {
    pub rate: f64,
    /// 95% normal-approximation binomial half-width.
    pub ci_half_width: f64,
    pub n_test: usize,
}

pub const MIN_TEST_SIZE: usize = 1000;
pub const MIN_MC_SIZE: usize = 10_000;

fn draw_pair(mu: &[f64], rng: &mut RngStream, x: &mut [f64]) -> f64 {
    let y = rng.rademacher();
    for (xi, &m) in x.iter_mut().zip(mu) {
        *xi = y * m + rng.normal();
    }
    y
}

/// Misclassification rate on `n_test` fresh draws from the data distribution.
pub fn estimate_error(
    model: &MdaModel,
    mu: &[f64],
    n_test: usize,
    rng: &mut RngStream,
) -> Result<ErrorEstimate> {
    if n_test < MIN_TEST_SIZE {
        return Err(Error::InvalidArgument(format!(
            "test size must be at least {MIN_TEST_SIZE}, got {n_test}"
        )));
    }
    if mu.len() != model.dim() {
        return Err(Error::InvalidArgument("mu has the wrong dimension".into()));
    }
    let mut x = vec![0.0; mu.len()];
    let mut buf = Vec::with_capacity(mu.len());
    let mut errors = 0usize;
    for _ in 0..n_test {
        let y = draw_pair(mu, rng, &mut x);
        if model.decide(&x, &mut buf) != y {
            errors += 1;
        }
    }
    let rate = errors as f64 / n_test as f64;
    Ok(ErrorEstimate {
        rate,
        ci_half_width: 1.96 * (rate * (1.0 - rate) / n_test as f64).sqrt(),
        n_test,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub value: f64,
    /// Monte Carlo standard error.
    pub se: f64,
}

fn mean_and_se(values: &[f64]) -> McEstimate {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    McEstimate {
        value: mean,
        se: (var / n).sqrt(),
    }
}

/// Excess risk `Err[h] − Φ(−‖μ‖)` estimated from `n_test` fresh features.
///
/// Conditionally on `X = x` the two classifiers differ in risk by
/// `|2η(x) − 1| = tanh(|μᵀx|)` where they disagree and by zero elsewhere,
/// so averaging `tanh(|μᵀX|)·1{h(X) ≠ sign(μᵀX)}` is unbiased for the
/// excess risk without the label noise that dominates a raw error count.
pub fn estimate_excess_risk(
    model: &MdaModel,
    mu: &[f64],
    n_test: usize,
    rng: &mut RngStream,
) -> Result<McEstimate> {
    if n_test < MIN_TEST_SIZE {
        return Err(Error::InvalidArgument(format!(
            "test size must be at least {MIN_TEST_SIZE}, got {n_test}"
        )));
    }
    if mu.len() != model.dim() {
        return Err(Error::InvalidArgument("mu has the wrong dimension".into()));
    }
    let mut x = vec![0.0; mu.len()];
    let mut buf = Vec::with_capacity(mu.len());
    let mut terms = Vec::with_capacity(n_test);
    for _ in 0..n_test {
        draw_pair(mu, rng, &mut x);
        let s = dot(mu, &x);
        let bayes = if s > 0.0 { 1.0 } else { -1.0 };
        let term = if model.decide(&x, &mut buf) != bayes {
            s.abs().tanh()
        } else {
            0.0
        };
        terms.push(term);
    }
    Ok(mean_and_se(&terms))
}

/// Total variation distance between the true class conditional
/// `N(sign·μ, I)` and the fitted `G(sign·μ̂, θ, σ²)`, estimated as
/// `½·E[|1 − f̃(X)/φ(X − sign·μ)|]` under `X ~ N(sign·μ, I)`.
pub fn tv_gap_estimate(
    model: &MdaModel,
    mu: &[f64],
    sign: i8,
    n_mc: usize,
    rng: &mut RngStream,
) -> Result<McEstimate> {
    if n_mc < MIN_MC_SIZE {
        return Err(Error::InvalidArgument(format!(
            "Monte Carlo size must be at least {MIN_MC_SIZE}, got {n_mc}"
        )));
    }
    if sign != 1 && sign != -1 {
        return Err(Error::InvalidArgument("sign must be +1 or -1".into()));
    }
    if mu.len() != model.dim() {
        return Err(Error::InvalidArgument("mu has the wrong dimension".into()));
    }
    let s = f64::from(sign);
    let d = mu.len() as f64;
    let log_norm = -0.5 * d * (2.0 * std::f64::consts::PI).ln();
    let mut z = vec![0.0; mu.len()];
    let mut x = vec![0.0; mu.len()];
    let mut buf = Vec::with_capacity(mu.len());
    let mut terms = Vec::with_capacity(n_mc);
    for _ in 0..n_mc {
        rng.fill_normal(&mut z);
        for ((xi, &zi), &m) in x.iter_mut().zip(&z).zip(mu) {
            *xi = s * m + zi;
        }
        let log_phi = log_norm - 0.5 * z.iter().map(|v| v * v).sum::<f64>();
        let log_fit = model.log_class_density(&x, s, &mut buf);
        terms.push(0.5 * (1.0 - (log_fit - log_phi).exp()).abs());
    }
    Ok(mean_and_se(&terms))
}

/// Excess risks, one per model, evaluated in parallel on independent streams.
pub fn excess_risks_parallel(
    models: &[MdaModel],
    mu: &[f64],
    n_test: usize,
    mut stream: impl FnMut(usize) -> RngStream,
) -> Result<Vec<McEstimate>> {
    let streams: Vec<RngStream> = (0..models.len()).map(&mut stream).collect();
    models
        .par_iter()
        .zip(streams.into_par_iter())
        .map(|(m, mut rng)| estimate_excess_risk(m, mu, n_test, &mut rng))
        .collect()
}

pub fn mu_norm(mu: &[f64]) -> f64 {
    norm(mu)
}
