//! `doob-lab`: verify, transform and simulate martingales on bit arrays and
//! Brownian paths.

mod commands;
mod config;
mod record;
mod simulate;

use clap::{Parser, Subcommand, ValueEnum};
use config::Params;
use record::{sibling, unix_ms, Outputs, RunRecord};
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

/// A bad invocation: exit code 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

#[derive(Debug, Parser)]
#[command(name = "doob-lab", version, about = "Exact martingales on bit arrays, betting games and Brownian experiments")]
struct Cli {
    /// TOML file whose keys are the flag names.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    params: Params,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check that a spec is a martingale. Exit 0 if it is, 1 if not.
    Verify {
        #[arg(long)]
        spec: PathBuf,
        /// Also write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply a transform and verify its output.
    Transform {
        #[arg(value_enum)]
        op: TransformOp,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Lower level of the upcrossing band, as "p/q".
        #[arg(long)]
        a: Option<String>,
        /// Upper level of the upcrossing band, as "p/q".
        #[arg(long)]
        b: Option<String>,
        /// Let convert-oracle skip the halving check on the savings output.
        #[arg(long)]
        skip_savings_check: bool,
        /// Write the trajectory on this sample: rows of 0/1 separated by commas.
        #[arg(long)]
        sample: Option<String>,
    },
    /// Run an experiment and write its outputs into a directory.
    Simulate {
        #[arg(value_enum)]
        kind: SimulateKind,
        #[arg(long)]
        out: PathBuf,
        /// Spec for --martingale spec.
        #[arg(long)]
        spec: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransformOp {
    Repair,
    Upcross,
    Savings,
    Extend,
    Restrict,
    ConvertOracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimulateKind {
    Game,
    Convergence,
    BmExperiment,
    Counterexample,
    IsoRoundtrip,
}

fn value_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

impl Command {
    fn name(&self) -> String {
        match self {
            Command::Verify { .. } => "verify".into(),
            Command::Transform { op, .. } => format!("transform {}", value_name(op)),
            Command::Simulate { kind, .. } => format!("simulate {}", value_name(kind)),
        }
    }

    fn record_path(&self) -> Option<PathBuf> {
        match self {
            Command::Verify { out, .. } => out.as_deref().map(|o| sibling(o, ".run.json")),
            Command::Transform { out, .. } => Some(sibling(out, ".run.json")),
            Command::Simulate { out, .. } => Some(out.join("run.json")),
        }
    }
}

fn run(cli: &Cli, record: &mut RunRecord, outputs: &mut Outputs) -> anyhow::Result<i32> {
    let file = cli.config.as_deref();
    match &cli.command {
        Command::Verify { spec, out } => {
            let p = config::resolve(&cli.params, file, commands::limit_defaults())?;
            record.config = commands::snapshot(&p, &[("spec", Some(spec)), ("out", out.as_ref())]);
            commands::verify(&p, spec, out.as_deref(), record, outputs)
        }
        Command::Transform {
            op,
            spec,
            out,
            a,
            b,
            skip_savings_check,
            sample,
        } => {
            let p = config::resolve(&cli.params, file, commands::limit_defaults())?;
            record.config = commands::snapshot(&p, &[("spec", Some(spec)), ("out", Some(out))]);
            let args = commands::TransformArgs {
                op: *op,
                spec,
                out,
                a: a.as_deref(),
                b: b.as_deref(),
                skip_savings_check: *skip_savings_check,
                sample: sample.as_deref(),
            };
            commands::transform(&p, &args, record, outputs)
        }
        Command::Simulate { kind, out, spec } => {
            let p = config::resolve(&cli.params, file, simulate::defaults(*kind))?;
            record.config = commands::snapshot(&p, &[("out", Some(out)), ("spec", spec.as_ref())]);
            simulate::run(*kind, &p, out, spec.as_deref(), record, outputs)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut record = RunRecord::new(cli.command.name(), cli.params.snapshot(), unix_ms());
    let mut outputs = Outputs::default();
    let code = match run(&cli, &mut record, &mut outputs) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("doob-lab: {e:#}");
            record.result = serde_json::json!({ "error": format!("{e:#}") });
            if e.is::<Usage>() {
                2
            } else {
                1
            }
        }
    };
    record.exit_code = code;
    record.outputs = outputs.files;
    if let Err(e) = record.emit(cli.command.record_path()) {
        eprintln!("doob-lab: {e:#}");
        return ExitCode::from(1);
    }
    ExitCode::from(code as u8)
}
