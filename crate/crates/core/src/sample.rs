//! Finite-sample EM for `G(θ, σ²)` fitted to observations `Z₁..Zₙ`.
//!
//! With `U = Σ‖Zᵢ‖²` the updates are
//! `θ′ = (1/n)·Σ t_p(θᵀZᵢ / (U/(nd) − ‖θ‖²/d))·Zᵢ` and
//! `σ²′ = U/(nd) − ‖θ′‖²/d`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{dot, norm, norm_sq, Matrix};
use crate::mixture::{kl_vs_standard_normal, MixtureParams, Weight};
use crate::numerics::{rng_stream, stream_id_for, QuadratureRule, StreamPurpose};
use crate::population::{m, sample_init_radius, PopulationSetting};
use crate::trace::{EmTrace, TraceContext, TraceEntry};

/// Denominators at or below this abort the fit.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-10;

const CHUNK: usize = 4096;

/// Observations together with the cached `U = Σ‖Zᵢ‖²`.
#[derive(Debug, Clone)]
pub struct SampleContext {
    data: Matrix,
    weight: Weight,
    sum_sq: f64,
}

impl SampleContext {
    pub fn new(data: Matrix, p: f64) -> Result<Self> {
        if data.rows() < 2 {
            return Err(Error::InvalidArgument(format!(
                "sample EM needs at least 2 observations, got {}",
                data.rows()
            )));
        }
        if data.cols() == 0 {
            return Err(Error::InvalidArgument("dimension d must be at least 1".into()));
        }
        let weight = Weight::new(p)?;
        let sum_sq = chunked_sum(&data, norm_sq);
        Ok(Self {
            data,
            weight,
            sum_sq,
        })
    }

    pub fn data(&self) -> &Matrix {
        &self.data
    }

    pub fn n(&self) -> usize {
        self.data.rows()
    }

    pub fn d(&self) -> usize {
        self.data.cols()
    }

    pub fn p(&self) -> f64 {
        self.weight.value()
    }

    pub fn weight(&self) -> Weight {
        self.weight
    }

    pub fn sum_sq(&self) -> f64 {
        self.sum_sq
    }

    /// `U/(nd)`.
    pub fn mean_sq(&self) -> f64 {
        self.sum_sq / (self.n() * self.d()) as f64
    }

    fn denominator(&self, theta_norm_sq: f64) -> f64 {
        self.mean_sq() - theta_norm_sq / self.d() as f64
    }
}

/// Row sums evaluated on fixed-size blocks in parallel and combined in
/// block order, so the result does not depend on the thread count.
fn chunked_sum(data: &Matrix, f: impl Fn(&[f64]) -> f64 + Sync) -> f64 {
    let cols = data.cols();
    let partial: Vec<f64> = data
        .as_slice()
        .par_chunks(CHUNK * cols)
        .map(|block| block.chunks_exact(cols).map(&f).sum())
        .collect();
    partial.iter().sum()
}

fn chunked_vec_sum(data: &Matrix, f: impl Fn(&[f64]) -> f64 + Sync) -> Vec<f64> {
    let cols = data.cols();
    let partial: Vec<Vec<f64>> = data
        .as_slice()
        .par_chunks(CHUNK * cols)
        .map(|block| {
            let mut acc = vec![0.0; cols];
            for row in block.chunks_exact(cols) {
                let c = f(row);
                for (a, &x) in acc.iter_mut().zip(row) {
                    *a += c * x;
                }
            }
            acc
        })
        .collect();
    let mut out = vec![0.0; cols];
    for block in &partial {
        for (a, b) in out.iter_mut().zip(block) {
            *a += b;
        }
    }
    out
}

fn step_at(ctx: &SampleContext, params: &MixtureParams, iteration: usize) -> Result<MixtureParams> {
    if params.dim() != ctx.d() {
        return Err(Error::InvalidArgument(format!(
            "theta has dimension {}, data has {}",
            params.dim(),
            ctx.d()
        )));
    }
    if params.p() != ctx.p() {
        return Err(Error::InvalidArgument(format!(
            "mixture weight {} differs from the sample context weight {}",
            params.p(),
            ctx.p()
        )));
    }
    let theta = params.theta();
    let denom = ctx.denominator(norm_sq(theta));
    if !(denom > DEGENERATE_DENOMINATOR) {
        return Err(Error::DegenerateVariance {
            iteration,
            denominator: denom,
        });
    }
    let w = ctx.weight;
    let mut next = chunked_vec_sum(&ctx.data, |row| w.tilt(dot(theta, row) / denom));
    let n = ctx.n() as f64;
    next.iter_mut().for_each(|v| *v /= n);
    let sigma_sq = ctx.denominator(norm_sq(&next));
    if !(sigma_sq > DEGENERATE_DENOMINATOR) {
        return Err(Error::DegenerateVariance {
            iteration: iteration + 1,
            denominator: sigma_sq,
        });
    }
    MixtureParams::with_weight(next, sigma_sq, w)
}

/// One sample EM update. `p` is carried through unchanged.
pub fn em_step(ctx: &SampleContext, params: &MixtureParams) -> Result<MixtureParams> {
    step_at(ctx, params, 0)
}

/// Scalar operator `mₙ(θ)` along a unit `direction`.
pub fn sample_operator(ctx: &SampleContext, theta_norm: f64, direction: &[f64]) -> Result<f64> {
    if direction.len() != ctx.d() {
        return Err(Error::InvalidArgument("direction has the wrong dimension".into()));
    }
    if (norm(direction) - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument("direction must be a unit vector".into()));
    }
    if !(theta_norm >= 0.0) {
        return Err(Error::InvalidArgument("theta norm must be nonnegative".into()));
    }
    let denom = ctx.denominator(theta_norm * theta_norm);
    if !(denom > DEGENERATE_DENOMINATOR) {
        return Err(Error::DegenerateVariance {
            iteration: 0,
            denominator: denom,
        });
    }
    let w = ctx.weight;
    let a = theta_norm / denom;
    let total = chunked_sum(&ctx.data, |row| {
        let z = dot(direction, row);
        w.tilt(a * z) * z
    });
    Ok(total / ctx.n() as f64)
}

/// `T = max(⌈c₂·log(n / log(1/δ))⌉, T_min)` with an early exit once
/// `‖θₜ₊₁ − θₜ‖ < tol`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationBudget {
    pub c2: f64,
    pub delta: f64,
    pub t_min: usize,
    pub tol: f64,
}

impl Default for IterationBudget {
    fn default() -> Self {
        Self {
            c2: 3.0,
            delta: 0.05,
            t_min: 10,
            tol: 1e-12,
        }
    }
}

impl IterationBudget {
    pub fn iterations(&self, n: usize) -> usize {
        let arg = n as f64 / (1.0 / self.delta).ln();
        let t = if arg > 1.0 {
            (self.c2 * arg.ln()).ceil() as usize
        } else {
            0
        };
        t.max(self.t_min)
    }
}

/// Runs sample EM from `theta0`. The start must lie inside the sample-EM
/// initialization radius. The trace logs `‖θₜ‖`, `σₜ²` and the KL
/// divergence of `G(θₜ, σₜ²)` from `N(0, I)`; the starting variance is
/// `U/(nd) − ‖θ₀‖²/d`.
pub fn fit(
    ctx: &SampleContext,
    theta0: &[f64],
    budget: &IterationBudget,
    rule: &QuadratureRule,
) -> Result<(MixtureParams, EmTrace)> {
    if theta0.len() != ctx.d() {
        return Err(Error::InvalidArgument(format!(
            "theta0 has dimension {}, data has {}",
            theta0.len(),
            ctx.d()
        )));
    }
    let setting = PopulationSetting::new(ctx.d(), ctx.p(), rule.clone())?;
    let radius = sample_init_radius(&setting);
    let t0 = norm(theta0);
    if !(t0 < radius) {
        return Err(Error::Radius {
            what: "sample EM starting point outside the initialization radius".into(),
            radius,
            value: t0,
        });
    }
    let s0 = ctx.denominator(t0 * t0);
    if !(s0 > DEGENERATE_DENOMINATOR) {
        return Err(Error::DegenerateVariance {
            iteration: 0,
            denominator: s0,
        });
    }

    let mut params = MixtureParams::with_weight(theta0.to_vec(), s0, ctx.weight)?;
    let mut trace = EmTrace::new(TraceContext::Sample {
        n: ctx.n(),
        d: ctx.d(),
        p: ctx.p(),
    });
    let log = |trace: &mut EmTrace, t: usize, params: &MixtureParams| -> Result<()> {
        trace.push(TraceEntry {
            t,
            theta_norm: params.theta_norm(),
            sigma_sq: params.sigma_sq(),
            kl: kl_vs_standard_normal(params, rule)?,
        });
        Ok(())
    };
    log(&mut trace, 0, &params)?;

    let total = budget.iterations(ctx.n());
    for t in 0..total {
        let next = step_at(ctx, &params, t)?;
        let moved: f64 = next
            .theta()
            .iter()
            .zip(params.theta())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        params = next;
        log(&mut trace, t + 1, &params)?;
        if moved < budget.tol {
            break;
        }
    }
    Ok((params, trace))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationStats {
    pub n: usize,
    pub radius: f64,
    /// `sup_θ |mₙ(θ) − m(θ)|` for each seed, in seed order.
    pub sups: Vec<f64>,
    pub median: f64,
    pub q10: f64,
    pub q90: f64,
}

pub(crate) fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    quantile(&v, 0.5)
}

/// `sup_{θ ∈ [0, r]} |mₙ(θ) − m(θ)|` over a uniform grid of `grid_size`
/// points, for `seeds` independent standard-normal samples of size `n`.
/// The direction is fixed to `e₁`. Seed `i` uses stream
/// `(base_seed, Perturbation/i)`.
pub fn perturbation_sup(
    setting: &PopulationSetting,
    n: usize,
    r: f64,
    grid_size: usize,
    seeds: usize,
    base_seed: u64,
) -> Result<PerturbationStats> {
    let radius = crate::population::init_radius(setting);
    if !(r >= 0.0 && r <= radius) {
        return Err(Error::Radius {
            what: "perturbation radius must not exceed the initialization radius".into(),
            radius,
            value: r,
        });
    }
    if n < 2 || grid_size < 1 || seeds < 1 {
        return Err(Error::InvalidArgument(
            "perturbation study needs n >= 2, grid_size >= 1 and seeds >= 1".into(),
        ));
    }
    let d = setting.d();
    let grid: Vec<f64> = if grid_size == 1 {
        vec![r]
    } else {
        (0..grid_size)
            .map(|j| r * j as f64 / (grid_size - 1) as f64)
            .collect()
    };
    let pop: Vec<f64> = grid.iter().map(|&t| m(t, setting)).collect::<Result<_>>()?;
    let w = setting.weight();

    let sups: Vec<f64> = (0..seeds)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_stream(base_seed, stream_id_for(StreamPurpose::Perturbation, i as u64));
            let mut proj = Vec::with_capacity(n);
            let mut u = 0.0;
            let mut row = vec![0.0; d];
            for _ in 0..n {
                rng.fill_normal(&mut row);
                u += norm_sq(&row);
                proj.push(row[0]);
            }
            let mean_sq = u / (n * d) as f64;
            let mut sup: f64 = 0.0;
            for (&t, &mt) in grid.iter().zip(&pop) {
                let denom = mean_sq - t * t / d as f64;
                let a = t / denom;
                let mn = proj.iter().map(|&z| w.tilt(a * z) * z).sum::<f64>() / n as f64;
                sup = sup.max((mn - mt).abs());
            }
            sup
        })
        .collect();

    let mut sorted = sups.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    Ok(PerturbationStats {
        n,
        radius: r,
        median: quantile(&sorted, 0.5),
        q10: quantile(&sorted, 0.1),
        q90: quantile(&sorted, 0.9),
        sups,
    })
}
