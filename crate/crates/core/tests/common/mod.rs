#![allow(dead_code)]

use rayon::prelude::*;

use overspec_mda::mixture::{kl_vs_standard_normal, log_density, tilt};
use overspec_mda::numerics::rng_stream;
use overspec_mda::population::{init_radius, m, PopulationSetting};
use overspec_mda::sample::{em_step, SampleContext};
use overspec_mda::{Matrix, MixtureParams, QuadratureRule};

pub const ORACLE_DRAWS: usize = 10_000_000;
const ORACLE_CHUNK: usize = 100_000;

pub fn normal_matrix(n: usize, d: usize, seed: u64, stream: u64) -> Matrix {
    let mut rng = rng_stream(seed, stream);
    let mut v = vec![0.0; n * d];
    rng.fill_normal(&mut v);
    Matrix::from_vec(n, d, v).unwrap()
}

/// Mean and standard error of `f` over `draws` vectors from N(0, I_d),
/// each used with its mirror image `−z` (antithetic pairs), split into
/// fixed chunks with their own streams.
pub fn monte_carlo(
    d: usize,
    draws: usize,
    seed: u64,
    f: impl Fn(&[f64]) -> f64 + Sync,
) -> (f64, f64) {
    let chunks = draws.div_ceil(ORACLE_CHUNK);
    let sums: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng_stream(seed, c as u64);
            let len = ORACLE_CHUNK.min(draws - c * ORACLE_CHUNK);
            let mut z = vec![0.0; d];
            let mut neg = vec![0.0; d];
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..len {
                rng.fill_normal(&mut z);
                neg.iter_mut().zip(&z).for_each(|(a, b)| *a = -b);
                let v = 0.5 * (f(&z) + f(&neg));
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = sums.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = draws as f64;
    let mean = s / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone)]
pub struct OracleCase {
    pub d: usize,
    pub p: f64,
    pub theta: Vec<f64>,
    pub sigma_sq: f64,
}

/// Ten fixed pseudo-random parameter points inside the admissible radius.
pub fn oracle_cases() -> Vec<OracleCase> {
    let mut rng = rng_stream(424_242, 0);
    (0..10)
        .map(|i| {
            let d = 1 + i % 3;
            let p = 0.55 + 0.4 * rng.uniform();
            let setting = PopulationSetting::new(d, p, QuadratureRule::default()).unwrap();
            let r = (0.1 + 0.85 * rng.uniform()) * init_radius(&setting);
            let mut dir = vec![0.0; d];
            rng.fill_normal(&mut dir);
            let nd = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
            let theta: Vec<f64> = dir.iter().map(|x| r * x / nd).collect();
            let sigma_sq = 0.7 + 0.6 * rng.uniform();
            OracleCase { d, p, theta, sigma_sq }
        })
        .collect()
}

pub struct OracleComparison {
    pub what: String,
    pub quadrature: f64,
    pub monte_carlo: f64,
    pub se: f64,
}

impl OracleComparison {
    pub fn z(&self) -> f64 {
        (self.quadrature - self.monte_carlo).abs() / self.se
    }
}

pub fn m_oracle(case: &OracleCase, seed: u64) -> OracleComparison {
    let setting = PopulationSetting::new(case.d, case.p, QuadratureRule::default()).unwrap();
    let r = case.theta.iter().map(|x| x * x).sum::<f64>().sqrt();
    let a = r / (1.0 - r * r / case.d as f64);
    let (mc, se) = monte_carlo(1, ORACLE_DRAWS, seed, |z| tilt(case.p, a * z[0]) * z[0]);
    OracleComparison {
        what: format!("m(d={}, p={:.4}, |θ|={:.4})", case.d, case.p, r),
        quadrature: m(r, &setting).unwrap(),
        monte_carlo: mc,
        se,
    }
}

pub fn kl_oracle(case: &OracleCase, seed: u64) -> OracleComparison {
    let params = MixtureParams::new(case.theta.clone(), case.sigma_sq, case.p).unwrap();
    let d = case.d as f64;
    let log_norm = -0.5 * d * (2.0 * std::f64::consts::PI).ln();
    let (mc, se) = monte_carlo(case.d, ORACLE_DRAWS, seed, |z| {
        let log_phi = log_norm - 0.5 * z.iter().map(|x| x * x).sum::<f64>();
        log_phi - log_density(z, &params).unwrap()
    });
    OracleComparison {
        what: format!("KL(d={}, p={:.4}, σ²={:.4})", case.d, case.p, case.sigma_sq),
        quadrature: kl_vs_standard_normal(&params, &QuadratureRule::default()).unwrap(),
        monte_carlo: mc,
        se,
    }
}

/// Textbook EM step with explicit component densities and responsibilities.
pub fn naive_em_step(data: &Matrix, theta: &[f64], sigma_sq: f64, p: f64) -> (Vec<f64>, f64) {
    let (n, d) = (data.rows(), data.cols());
    let mut theta_next = vec![0.0; d];
    for row in data.iter_rows() {
        let sq = |s: f64| -> f64 {
            row.iter().zip(theta).map(|(x, t)| (x - s * t).powi(2)).sum()
        };
        let plus = p * (-sq(1.0) / (2.0 * sigma_sq)).exp();
        let minus = (1.0 - p) * (-sq(-1.0) / (2.0 * sigma_sq)).exp();
        let w = plus / (plus + minus);
        for (t, x) in theta_next.iter_mut().zip(row) {
            *t += (2.0 * w - 1.0) * x / n as f64;
        }
    }
    let mut sigma_next = 0.0;
    for row in data.iter_rows() {
        let sq = |s: f64| -> f64 {
            row.iter().zip(theta).map(|(x, t)| (x - s * t).powi(2)).sum()
        };
        let plus = p * (-sq(1.0) / (2.0 * sigma_sq)).exp();
        let minus = (1.0 - p) * (-sq(-1.0) / (2.0 * sigma_sq)).exp();
        let w = plus / (plus + minus);
        let to = |s: f64| -> f64 {
            row.iter().zip(&theta_next).map(|(x, t)| (x - s * t).powi(2)).sum()
        };
        sigma_next += w * to(1.0) + (1.0 - w) * to(-1.0);
    }
    (theta_next, sigma_next / (n * d) as f64)
}

/// Largest absolute difference between `em_step` and the naive step on a
/// fixed seeded dataset.
pub fn em_step_reference_gap() -> f64 {
    let data = normal_matrix(2_000, 3, 99, 0);
    let p = 0.8;
    let ctx = SampleContext::new(data.clone(), p).unwrap();
    let theta = vec![0.15, -0.07, 0.1];
    let sigma_sq = ctx.mean_sq() - theta.iter().map(|x| x * x).sum::<f64>() / 3.0;
    let params = MixtureParams::new(theta.clone(), sigma_sq, p).unwrap();
    let next = em_step(&ctx, &params).unwrap();
    let (t_ref, s_ref) = naive_em_step(&data, &theta, sigma_sq, p);
    let mut gap = (next.sigma_sq() - s_ref).abs();
    for (a, b) in next.theta().iter().zip(&t_ref) {
        gap = gap.max((a - b).abs());
    }
    gap
}
