use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use overspec_mda::experiments::{resolve_config, run, write_outputs, ExperimentKind};

#[derive(Parser)]
#[command(name = "overspec-mda", version, about = "Overspecified mixture EM experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Population EM traces of KL per iteration.
    PopTrace(Flags),
    /// Final sample-EM KL against n.
    KlVsN(Flags),
    /// Excess risk of the mixture discriminant rule.
    MdaError(Flags),
    /// Sup gap between sample and population operators.
    Perturbation(Flags),
    /// Property checks of the population operator and risk.
    Properties(Flags),
}

#[derive(Args)]
struct Flags {
    /// `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    theta0: Option<String>,
    #[arg(long)]
    n_list: Option<String>,
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    reps: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    quad_order: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    plot: bool,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    iterations: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    test_size: Option<String>,
    #[arg(long)]
    mc_size: Option<String>,
    #[arg(long)]
    radius: Option<String>,
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    strict_radius: bool,
}

impl Flags {
    fn overrides(&self) -> BTreeMap<String, String> {
        let pairs = [
            ("d", &self.d),
            ("p", &self.p),
            ("theta0", &self.theta0),
            ("n-list", &self.n_list),
            ("seeds", &self.seeds),
            ("reps", &self.reps),
            ("delta", &self.delta),
            ("alpha", &self.alpha),
            ("quad-order", &self.quad_order),
            ("out", &self.out),
            ("seed", &self.seed),
            ("iterations", &self.iterations),
            ("mu", &self.mu),
            ("test-size", &self.test_size),
            ("mc-size", &self.mc_size),
            ("radius", &self.radius),
            ("grid", &self.grid),
        ];
        let mut map: BTreeMap<String, String> = pairs
            .into_iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k.to_string(), v)))
            .collect();
        if self.plot {
            map.insert("plot".into(), "true".into());
        }
        if self.strict_radius {
            map.insert("strict-radius".into(), "true".into());
        }
        map
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, flags) = match &cli.command {
        Command::PopTrace(f) => (ExperimentKind::PopTrace, f),
        Command::KlVsN(f) => (ExperimentKind::KlVsN, f),
        Command::MdaError(f) => (ExperimentKind::MdaError, f),
        Command::Perturbation(f) => (ExperimentKind::Perturbation, f),
        Command::Properties(f) => (ExperimentKind::Properties, f),
    };
    let result = resolve_config(kind, flags.config.as_deref(), &flags.overrides()).and_then(|cfg| {
        let output = run(&cfg)?;
        write_outputs(&output, &cfg.output_dir)?;
        Ok(output)
    });
    match result {
        Ok(output) => {
            let mut out = std::io::stdout().lock();
            for c in &output.checks {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                let _ = writeln!(out, "{tag} {}: {}", c.name, c.detail);
            }
            for n in &output.notes {
                let _ = writeln!(out, "note: {n}");
            }
            let _ = writeln!(out, "wrote {}", output.config.output_dir.display());
            if output.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
