use serde::Serialize;

/// Least-squares line `y = intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error from the regression residuals (needs ≥ 3 points).
    pub se_residual: Option<f64>,
    /// Standard error propagated from per-point uncertainties, when given.
    pub se_sampling: Option<f64>,
    pub points: usize,
}

impl SlopeFit {
    /// The propagated error when available, else the residual one.
    pub fn se(&self) -> Option<f64> {
        self.se_sampling.or(self.se_residual)
    }
}

/// Fits `y` on `x`. `y_se` carries optional per-point standard errors of
/// `y`, propagated into `se_sampling`. Returns `None` for fewer than two
/// distinct `x`.
pub fn fit_line(x: &[f64], y: &[f64], y_se: Option<&[f64]>) -> Option<SlopeFit> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return None;
    }
    let xm = x.iter().sum::<f64>() / n as f64;
    let ym = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - xm) * (v - xm)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let se_residual = (n > 2).then(|| {
        let rss: f64 = x
            .iter()
            .zip(y)
            .map(|(a, b)| (b - intercept - slope * a).powi(2))
            .sum();
        (rss / (n - 2) as f64 / sxx).sqrt()
    });
    let se_sampling = y_se.map(|se| {
        let v: f64 = x
            .iter()
            .zip(se)
            .map(|(a, s)| ((a - xm) * s).powi(2))
            .sum();
        v.sqrt() / sxx
    });
    Some(SlopeFit {
        slope,
        intercept,
        se_residual,
        se_sampling,
        points: n,
    })
}

/// Log–log fit of `y` against `n`.
pub fn loglog_slope(n: &[f64], y: &[f64], y_rel_se: Option<&[f64]>) -> Option<SlopeFit> {
    if y.iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = n.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    fit_line(&lx, &ly, y_rel_se)
}
