//! Runs one experiment from a config file and writes its tables.
//!
//! ```text
//! cargo run --example run_experiment -- configs/pop_trace.conf out/
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use overspec_mda::experiments::{read_config_file, resolve_config, run, write_outputs, ExperimentKind};

fn main() -> overspec_mda::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().map(PathBuf::from);
    let out = args.next().unwrap_or_else(|| "target/experiment".into());

    let kind = match &path {
        Some(p) => read_config_file(p)?
            .get("experiment")
            .map(|s| s.parse())
            .transpose()?
            .unwrap_or(ExperimentKind::Properties),
        None => ExperimentKind::Properties,
    };
    let overrides = BTreeMap::from([("out".to_string(), out)]);
    let cfg = resolve_config(kind, path.as_deref(), &overrides)?;
    let output = run(&cfg)?;
    write_outputs(&output, &cfg.output_dir)?;
    for c in &output.checks {
        println!("{} {} ({})", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
    }
    for (name, fit) in &output.slopes {
        match fit {
            Some(f) => println!("{name}: {:.4} ± {:.4}", f.slope, f.se().unwrap_or(f64::NAN)),
            None => println!("{name}: undefined"),
        }
    }
    println!("config hash {}", cfg.hash());
    Ok(())
}
