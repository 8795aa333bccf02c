//! Experiment harness: each runner turns an [`ExperimentConfig`] into result
//! tables plus a list of pass/fail checks, and [`write_outputs`] stores them
//! as CSV, a JSON summary and optional SVG plots.

mod config;
mod regression;
mod runners;
mod svg;
mod table;

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

pub use config::{parse_config_text, read_config_file, resolve_config, ExperimentConfig, ExperimentKind};
pub use regression::{fit_line, loglog_slope, SlopeFit};
pub use runners::{
    run, run_kl_vs_n, run_mda_error, run_perturbation, run_pop_trace, run_properties, KL_SLOPE_BAND,
    PERTURBATION_SLOPE_BAND,
};
pub use svg::{Plot, Series};
pub use table::{Cell, ResultTable};

use crate::error::Result;

pub const ARTIFACT_VERSION: &str = concat!("overspec-mda ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub tables: Vec<ResultTable>,
    pub checks: Vec<Check>,
    pub slopes: BTreeMap<String, Option<SlopeFit>>,
    pub notes: Vec<String>,
    pub plots: Vec<(String, Plot)>,
}

impl ExperimentOutput {
    pub(crate) fn new(config: &ExperimentConfig) -> Self {
        Self {
            config: config.clone(),
            tables: Vec::new(),
            checks: Vec::new(),
            slopes: BTreeMap::new(),
            notes: Vec::new(),
            plots: Vec::new(),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn table(&self, name: &str) -> Option<&ResultTable> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn slope(&self, name: &str) -> Option<SlopeFit> {
        self.slopes.get(name).copied().flatten()
    }

    pub(crate) fn metadata(&self) -> serde_json::Value {
        json!({
            "artifact_version": ARTIFACT_VERSION,
            "config": self.config,
            "config_hash": self.config.hash(),
            "base_seed": self.config.base_seed,
        })
    }

    pub(crate) fn add_table(&mut self, mut table: ResultTable) {
        table.metadata = self.metadata();
        self.tables.push(table);
    }

    pub fn summary_json(&self) -> serde_json::Value {
        let mut v = self.metadata();
        let map = v.as_object_mut().expect("object");
        map.insert("experiment".into(), json!(self.config.experiment.name()));
        map.insert("all_passed".into(), json!(self.all_passed()));
        map.insert("checks".into(), json!(self.checks));
        map.insert("slopes".into(), json!(self.slopes));
        map.insert("notes".into(), json!(self.notes));
        map.insert(
            "tables".into(),
            json!(self.tables.iter().map(|t| &t.name).collect::<Vec<_>>()),
        );
        v
    }
}

/// Writes `<table>.csv` and `<table>.meta.json` per table, `summary.json`,
/// and `<name>.svg` per plot when `config.plot` is set.
pub fn write_outputs(output: &ExperimentOutput, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for t in &output.tables {
        t.write_csv(dir)?;
    }
    let summary = serde_json::to_string_pretty(&output.summary_json())?;
    std::fs::write(dir.join("summary.json"), summary + "\n")?;
    if output.config.plot {
        for (name, plot) in &output.plots {
            std::fs::write(dir.join(format!("{name}.svg")), plot.render())?;
        }
    }
    Ok(())
}
