use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    PopTrace,
    KlVsN,
    MdaError,
    Perturbation,
    Properties,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::PopTrace => "pop-trace",
            ExperimentKind::KlVsN => "kl-vs-n",
            ExperimentKind::MdaError => "mda-error",
            ExperimentKind::Perturbation => "perturbation",
            ExperimentKind::Properties => "properties",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "pop-trace" => ExperimentKind::PopTrace,
            "kl-vs-n" => ExperimentKind::KlVsN,
            "mda-error" => ExperimentKind::MdaError,
            "perturbation" => ExperimentKind::Perturbation,
            "properties" => ExperimentKind::Properties,
            other => return Err(Error::Config(format!("unknown experiment '{other}'"))),
        })
    }
}

/// Everything an experiment run depends on. Lists (`d`, `p`) expand into one
/// block per value where the experiment supports it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub d: Vec<usize>,
    pub p: Vec<f64>,
    /// Starting point; a single value is read as a norm along `e₁`.
    /// Empty means "use the experiment's default" (properties: 0.9 × radius).
    pub theta0: Vec<f64>,
    pub n_list: Vec<usize>,
    pub seeds: usize,
    pub replications: usize,
    pub delta: f64,
    pub alpha: f64,
    pub quadrature_order: usize,
    pub output_dir: PathBuf,
    pub plot: bool,
    pub base_seed: u64,
    /// Population EM iterations for `pop-trace`.
    pub iterations: usize,
    /// Class mean for `mda-error`.
    pub mu: Vec<f64>,
    pub test_size: usize,
    pub mc_size: usize,
    /// Perturbation radius `r`.
    pub radius: f64,
    pub grid_size: usize,
    /// Fraction of the initialization radius used as `θ₀` by `properties`.
    pub radius_fraction: f64,
    /// When set, `pop-trace` rejects any `p` whose radius excludes `θ₀`.
    pub strict_radius: bool,
    /// `c₂` in the sample-EM iteration budget.
    pub budget_c2: f64,
    pub budget_t_min: usize,
}

impl ExperimentConfig {
    pub fn defaults(kind: ExperimentKind) -> Self {
        let base = Self {
            experiment: kind,
            d: vec![2],
            p: vec![0.8],
            theta0: vec![0.20, 0.05],
            n_list: vec![],
            seeds: 10,
            replications: 10,
            delta: 0.05,
            alpha: 0.25,
            quadrature_order: crate::numerics::DEFAULT_ORDER,
            output_dir: PathBuf::from("results").join(kind.name()),
            plot: false,
            base_seed: 20_240_607,
            iterations: 30,
            mu: vec![1.0, 0.0],
            test_size: 200_000,
            mc_size: 100_000,
            radius: 0.2,
            grid_size: 200,
            radius_fraction: 0.9,
            strict_radius: false,
            budget_c2: 3.0,
            budget_t_min: 10,
        };
        match kind {
            ExperimentKind::PopTrace => Self {
                p: vec![0.6, 0.8, 0.9],
                ..base
            },
            ExperimentKind::KlVsN => Self {
                n_list: vec![100, 316, 1000, 3162, 10_000],
                ..base
            },
            ExperimentKind::MdaError => Self {
                n_list: vec![1000, 10_000, 100_000],
                ..base
            },
            ExperimentKind::Perturbation => Self {
                n_list: vec![100, 1000, 10_000],
                seeds: 50,
                grid_size: 41,
                ..base
            },
            ExperimentKind::Properties => Self {
                d: vec![1, 2, 10],
                p: vec![0.6, 0.8, 0.9],
                theta0: vec![],
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.d.is_empty() || self.d.contains(&0) {
            return fail("d must be a non-empty list of positive integers".into());
        }
        if self.p.is_empty() || self.p.iter().any(|&p| !(p > 0.5 && p < 1.0)) {
            return fail("p values must lie in (1/2, 1)".into());
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return fail(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return fail(format!("alpha must lie in (0, 1/2), got {}", self.alpha));
        }
        if self.seeds == 0 || self.replications == 0 || self.iterations == 0 || self.grid_size == 0 {
            return fail("counts (seeds, reps, iterations, grid) must be at least 1".into());
        }
        if self.n_list.iter().any(|&n| n < 2) {
            return fail("sample sizes must be at least 2".into());
        }
        if self.quadrature_order == 0 || self.quadrature_order > crate::numerics::MAX_ORDER {
            return fail(format!("quad-order must be in 1..={}", crate::numerics::MAX_ORDER));
        }
        if self.theta0.iter().any(|t| !t.is_finite()) || self.mu.iter().any(|t| !t.is_finite()) {
            return fail("theta0 and mu must be finite".into());
        }
        if !(self.radius >= 0.0) {
            return fail("radius must be nonnegative".into());
        }
        if !(self.radius_fraction > 0.0 && self.radius_fraction < 1.0) {
            return fail("radius-fraction must lie in (0, 1)".into());
        }
        Ok(())
    }

    /// `θ₀` as a vector in dimension `d`.
    pub fn theta0_for(&self, d: usize) -> Result<Vec<f64>> {
        match self.theta0.len() {
            0 => Err(Error::Config("theta0 is required for this experiment".into())),
            1 => {
                let mut v = vec![0.0; d];
                v[0] = self.theta0[0].abs();
                Ok(v)
            }
            k if k == d => Ok(self.theta0.clone()),
            k => Err(Error::Config(format!("theta0 has {k} entries but d = {d}"))),
        }
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Applies `key = value` settings on top of `self`.
    pub fn apply(&mut self, settings: &BTreeMap<String, String>) -> Result<()> {
        for (key, value) in settings {
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "d" => self.d = parse_list(key, v)?,
            "p" => self.p = parse_list(key, v)?,
            "theta0" => self.theta0 = parse_list(key, v)?,
            "n-list" => self.n_list = parse_list(key, v)?,
            "seeds" => self.seeds = parse_one(key, v)?,
            "reps" => self.replications = parse_one(key, v)?,
            "delta" => self.delta = parse_one(key, v)?,
            "alpha" => self.alpha = parse_one(key, v)?,
            "quad-order" => self.quadrature_order = parse_one(key, v)?,
            "out" => self.output_dir = PathBuf::from(v),
            "plot" => self.plot = parse_one(key, v)?,
            "seed" => self.base_seed = parse_one(key, v)?,
            "iterations" => self.iterations = parse_one(key, v)?,
            "mu" => self.mu = parse_list(key, v)?,
            "test-size" => self.test_size = parse_one(key, v)?,
            "mc-size" => self.mc_size = parse_one(key, v)?,
            "radius" => self.radius = parse_one(key, v)?,
            "grid" => self.grid_size = parse_one(key, v)?,
            "radius-fraction" => self.radius_fraction = parse_one(key, v)?,
            "strict-radius" => self.strict_radius = parse_one(key, v)?,
            "budget-c2" => self.budget_c2 = parse_one(key, v)?,
            "budget-t-min" => self.budget_t_min = parse_one(key, v)?,
            other => return Err(Error::Config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }
}

fn parse_one<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("cannot parse '{v}' for '{key}'")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| parse_one(key, s.trim())).collect()
}

/// Reads a `key = value` file. `#` starts a comment; blank lines are skipped.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_text(&text)
}

/// Built-in defaults, then the config file, then command-line overrides.
pub fn resolve_config(
    kind: ExperimentKind,
    file: Option<&Path>,
    overrides: &BTreeMap<String, String>,
) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::defaults(kind);
    if let Some(path) = file {
        let settings = read_config_file(path)?;
        if let Some(name) = settings.get("experiment") {
            if name.parse::<ExperimentKind>()? != kind {
                return Err(Error::Config(format!(
                    "config file is for '{name}', not '{kind}'"
                )));
            }
        }
        let mut settings = settings;
        settings.remove("experiment");
        cfg.apply(&settings)?;
    }
    cfg.apply(overrides)?;
    cfg.validate()?;
    Ok(cfg)
}
