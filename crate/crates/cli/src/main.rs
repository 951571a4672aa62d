mod config;
mod examples;
mod tasks;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context as _, Result};
use clap::{Parser, Subcommand};
use divstab::stability::Settings;
use divstab::{Error, ErrorKind};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

const EXIT_SCHEMA: u8 = 2;
const EXIT_GEOMETRY: u8 = 3;
const EXIT_CONVERGENCE: u8 = 4;

#[derive(Parser)]
#[command(name = "divstab", version, about = "Volumes, filtrations and stability invariants from JSON job files")]
struct Cli {
    /// List the bundled example configs (run one with `run @NAME`)
    #[arg(long)]
    list_examples: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every task of a config and write the JSON report array
    Run {
        /// Config path, or `@NAME` for a bundled example
        config: String,
        /// Write the report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override a tolerance, e.g. `--tolerance-override quadrature=1e-10`
        #[arg(long = "tolerance-override", value_name = "KEY=VALUE")]
        tolerance_overrides: Vec<String>,
        /// Override the multi-start seed
        #[arg(long)]
        seed: Option<u64>,
        /// Add per-task wall time to the reports (makes output run-dependent)
        #[arg(long)]
        timings: bool,
    },
}

pub(crate) fn error_json(e: &Error) -> Value {
    let kind = match e.kind() {
        ErrorKind::Input => "input",
        ErrorKind::Geometry => "geometry",
        ErrorKind::Convergence => "convergence",
    };
    json!({ "kind": kind, "message": e.to_string() })
}

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Input => EXIT_SCHEMA,
        ErrorKind::Geometry => EXIT_GEOMETRY,
        ErrorKind::Convergence => EXIT_CONVERGENCE,
    }
}

fn fail(error: Value, code: u8) -> Result<ExitCode> {
    eprintln!("{}", serde_json::to_string_pretty(&json!({ "error": error }))?);
    Ok(ExitCode::from(code))
}

fn load(config: &str) -> Result<String> {
    if let Some(name) = config.strip_prefix('@') {
        match examples::find(name) {
            Some(e) => Ok(e.text.to_string()),
            None => bail!("no bundled example `{name}`; see --list-examples"),
        }
    } else {
        fs::read_to_string(config).with_context(|| format!("reading {config}"))
    }
}

fn run(config: &str, out: Option<PathBuf>, overrides: &[String], seed: Option<u64>, timings: bool) -> Result<ExitCode> {
    let text = load(config)?;
    let mut cfg = match config::parse(&text) {
        Ok(c) => c,
        Err(e) => return fail(json!({ "kind": "schema", "path": e.path, "line": e.line, "column": e.column, "message": e.message }), EXIT_SCHEMA),
    };
    for o in overrides {
        let parsed = o
            .split_once('=')
            .ok_or_else(|| format!("`{o}` is not KEY=VALUE"))
            .and_then(|(k, v)| v.trim().parse::<f64>().map(|v| (k.trim(), v)).map_err(|e| format!("`{o}`: {e}")))
            .and_then(|(k, v)| cfg.tolerances.set(k, v));
        if let Err(message) = parsed {
            return fail(json!({ "kind": "schema", "path": "--tolerance-override", "message": message }), EXIT_SCHEMA);
        }
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }

    let model = match config::build_model(&cfg.model) {
        Ok(m) => m,
        Err(e) => return fail(error_json(&e), exit_code(&e)),
    };
    let line_bundle = match model.class(&cfg.line_bundle) {
        Ok(l) => l,
        Err(e) => return fail(error_json(&e), exit_code(&e)),
    };
    let settings = Settings {
        tolerances: cfg.tolerances.to_tolerances(),
        seed: cfg.seed,
        ..Settings::default()
    };
    let header = json!({
        "toolkit": format!("divstab {}", divstab::VERSION),
        "config_sha256": format!("{:x}", Sha256::digest(text.as_bytes())),
        "model": model.geometry().name(),
        "line_bundle": line_bundle.coeffs().iter().map(divstab::rational::format).collect::<Vec<_>>(),
        "seed": cfg.seed,
        "tolerances": cfg.tolerances,
    });
    let ctx = tasks::Context {
        config: &cfg,
        model: &model,
        line_bundle,
        settings,
    };
    let outcome = tasks::run_all(&ctx, &header, timings);
    let mut body = serde_json::to_string_pretty(&outcome.reports)?;
    body.push('\n');
    match out {
        Some(p) => fs::write(&p, body).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{body}"),
    }
    match outcome.failure {
        None => Ok(ExitCode::SUCCESS),
        Some(e) => fail(error_json(&e), exit_code(&e)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = if cli.list_examples {
        for e in examples::ALL {
            println!("{:<22} {}", e.name, e.description);
        }
        Ok(ExitCode::SUCCESS)
    } else {
        match cli.command {
            Some(Command::Run {
                config,
                out,
                tolerance_overrides,
                seed,
                timings,
            }) => run(&config, out, &tolerance_overrides, seed, timings),
            None => {
                eprintln!("nothing to do; try `divstab run <config>` or `divstab --list-examples`");
                Ok(ExitCode::from(EXIT_SCHEMA))
            }
        }
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::FAILURE
    })
}
