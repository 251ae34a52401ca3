use std::fs::File;
use std::io::{BufWriter, Write};
use std::panic;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use diffsym::stochastic::export::{write_binary, write_csv};
use diffsym_cli::commands::{self, Outcome, VerifyArgs, VerifyTarget};
use diffsym_cli::model::{Diagnostic, Model};
use diffsym_cli::report::{Envelope, ErrorReport, Meta, SCHEMA_VERSION};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "diffsym", version, about = "Symmetries of diffusions from model files")]
struct Cli {
    /// Model file (JSON).
    #[arg(long, global = true)]
    model: Option<PathBuf>,

    /// Also write the report to this path.
    #[arg(long, global = true)]
    json_out: Option<PathBuf>,

    /// Omit the `meta` block so identical runs give identical bytes.
    #[arg(long, global = true)]
    no_meta: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the model and check its invariants.
    Validate,
    /// Determining equations for one candidate field.
    Check {
        #[arg(long)]
        field: String,
    },
    /// Symmetries within an ansatz basis.
    Find {
        #[arg(long)]
        basis: String,
    },
    /// Monte Carlo martingale test of a candidate.
    Verify(VerifyCli),
    /// Martingale, SDE and Kolmogorov verdicts for one candidate.
    Compare {
        /// A candidate from the `fields` block.
        #[arg(long)]
        transformation: String,
    },
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("target").required(true).args(["field", "transformation"])))]
struct VerifyCli {
    /// Candidate field, moved along its flow for time `--param`.
    #[arg(long)]
    field: Option<String>,
    /// Finite transformation from the `transformations` block.
    #[arg(long)]
    transformation: Option<String>,
    #[arg(long = "n", default_value_t = 10_000)]
    paths: usize,
    #[arg(long, default_value_t = 1.0 / 64.0, allow_negative_numbers = true)]
    dt: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    horizon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Flow time for `--field`.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    param: f64,
    /// Write the simulated ensemble; `.csv` gives CSV, anything else the binary layout.
    #[arg(long)]
    ensemble_out: Option<PathBuf>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Check { .. } => "check",
            Command::Find { .. } => "find",
            Command::Verify(_) => "verify",
            Command::Compare { .. } => "compare",
        }
    }
}

struct Emitter<'a> {
    command: &'a str,
    json_out: Option<&'a Path>,
    meta: bool,
}

impl Emitter<'_> {
    fn emit<T: Serialize>(&self, status: &str, body: T, code: u8) -> ExitCode {
        let meta = self.meta.then(|| Meta {
            tool: "diffsym".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            generated_at: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        });
        let envelope = Envelope {
            schema_version: SCHEMA_VERSION,
            command: self.command.to_string(),
            status: status.to_string(),
            body,
            meta,
        };
        let text = match serde_json::to_string_pretty(&envelope) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot serialize report: {e}");
                return ExitCode::from(2);
            }
        };
        println!("{text}");
        if let Some(path) = self.json_out {
            if let Err(e) = std::fs::write(path, format!("{text}\n")) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        ExitCode::from(code)
    }

    fn ok<T: Serialize>(&self, outcome: Outcome<T>) -> ExitCode {
        self.emit("ok", outcome.body, outcome.code)
    }

    fn fail(&self, diagnostics: Vec<Diagnostic>) -> ExitCode {
        self.emit("error", ErrorReport { diagnostics }, 2)
    }
}

fn write_ensemble(path: &Path, e: &diffsym::stochastic::PathEnsemble) -> Result<(), Diagnostic> {
    let file = File::create(path)
        .map_err(|err| Diagnostic::new("--ensemble-out", format!("cannot create {}: {err}", path.display())))?;
    let mut w = BufWriter::new(file);
    let csv = path.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv"));
    let result = if csv { write_csv(e, &mut w) } else { write_binary(e, &mut w) };
    result
        .and_then(|_| w.flush())
        .map_err(|err| Diagnostic::new("--ensemble-out", format!("cannot write {}: {err}", path.display())))
}

fn run(cli: &Cli) -> ExitCode {
    let out = Emitter {
        command: cli.command.name(),
        json_out: cli.json_out.as_deref(),
        meta: !cli.no_meta,
    };
    let Some(path) = &cli.model else {
        return out.fail(vec![Diagnostic::new("--model", "a model file is required")]);
    };
    let model = match Model::load(path) {
        Ok(m) => m,
        Err(diagnostics) => return out.fail(diagnostics),
    };
    match &cli.command {
        Command::Validate => out.ok(commands::validate(&model)),
        Command::Check { field } => match commands::check(&model, field) {
            Ok(o) => out.ok(o),
            Err(d) => out.fail(vec![d]),
        },
        Command::Find { basis } => match commands::find(&model, basis) {
            Ok(o) => out.ok(o),
            Err(d) => out.fail(vec![d]),
        },
        Command::Compare { transformation } => match commands::compare(&model, transformation) {
            Ok(o) => out.ok(o),
            Err(d) => out.fail(vec![d]),
        },
        Command::Verify(v) => {
            let target = match (&v.field, &v.transformation) {
                (Some(f), _) => VerifyTarget::Field(f),
                (None, Some(t)) => VerifyTarget::Transformation(t),
                (None, None) => return out.fail(vec![Diagnostic::new("verify", "give --field or --transformation")]),
            };
            let args = VerifyArgs {
                target,
                paths: v.paths,
                dt: v.dt,
                horizon: v.horizon,
                seed: v.seed,
                flow_parameter: v.param,
            };
            let (outcome, config) = match commands::verify(&model, &args) {
                Ok(r) => r,
                Err(d) => return out.fail(vec![d]),
            };
            if let Some(path) = &v.ensemble_out {
                let written = commands::source_ensemble(&model, &config).and_then(|e| write_ensemble(path, &e));
                if let Err(d) = written {
                    return out.fail(vec![d]);
                }
            }
            out.ok(outcome)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    panic::set_hook(Box::new(|_| {}));
    match panic::catch_unwind(|| run(&cli)) {
        Ok(code) => code,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown".into());
            let out = Emitter {
                command: cli.command.name(),
                json_out: cli.json_out.as_deref(),
                meta: !cli.no_meta,
            };
            out.fail(vec![Diagnostic::new("internal", format!("internal error: {msg}"))])
        }
    }
}
