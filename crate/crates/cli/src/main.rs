//! `heis-tube`: distances, projections and tube volumes for surfaces in ℍⁿ.
//!
//! Every run echoes its fully resolved configuration. `heis-tube replay FILE`
//! reruns a configuration taken from an earlier JSON output (or a bare
//! config object) and reproduces it bit for bit.
//!
//! Exit codes: 0 success, 1 domain error, 2 usage error.

mod commands;
mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use config::{Command, Format, RunArgs, RunConfig, SCHEMA};
use output::{csv_document, json_document, Report};

#[derive(Debug, Parser)]
#[command(
    name = "heis-tube",
    version,
    about = "Sub-Riemannian geometry of surfaces in the Heisenberg group"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Carnot–Carathéodory distance and minimizing geodesic between --p and --q.
    Distance(RunArgs),
    /// Points of the geodesic from --p with direction --dir and --curvature.
    Geodesic(RunArgs),
    /// Metric projection of --p onto the surface.
    Project(RunArgs),
    /// Tube volume |U_r| of a patch.
    Tube(RunArgs),
    /// Cubic expansion coefficients of the tube volume and the remainder order.
    Series(RunArgs),
    /// Lower estimate of the reach over the patch lattice.
    Reach(RunArgs),
    /// Pointwise and integral self-checks on a patch.
    Verify(RunArgs),
    /// Points of the patch where the horizontal normal vanishes.
    SingularScan(RunArgs),
    /// Rerun the configuration stored in a previous JSON output.
    Replay { file: PathBuf },
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub kind: String,
    pub message: String,
    /// Extra fields of the JSON error object.
    pub details: Option<Box<Value>>,
    /// Output still written on failure.
    pub report: Option<Box<Report>>,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            kind: "UsageError".into(),
            message: message.into(),
            details: None,
            report: None,
        }
    }

    pub fn domain(kind: &str, message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            kind: kind.into(),
            message: message.into(),
            details: None,
            report: None,
        }
    }
}

impl From<heis_tube::Error> for CliError {
    fn from(e: heis_tube::Error) -> Self {
        use heis_tube::Error::*;
        let code = match e {
            InvalidInput(_) | DimensionMismatch { .. } | WrongDimension { .. } => 2,
            _ => 1,
        };
        CliError {
            code,
            kind: e.kind().into(),
            message: e.to_string(),
            details: None,
            report: None,
        }
    }
}

fn load_replay(path: &PathBuf) -> Result<RunConfig, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("reading {}: {e}", path.display())))?;
    let doc: Value =
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{} is not JSON: {e}", path.display())))?;
    let cfg = match doc.get("schema") {
        Some(v) => {
            if v.as_u64() != Some(SCHEMA as u64) {
                return Err(CliError::usage(format!("unsupported schema {v}, expected {SCHEMA}")));
            }
            doc.get("config")
                .cloned()
                .ok_or_else(|| CliError::usage("document has no 'config'"))?
        }
        None => doc,
    };
    let cfg: RunConfig = serde_json::from_value(cfg).map_err(|e| CliError::usage(format!("invalid config: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Output format requested on the command line, known before resolution.
fn requested_format(cli: &Cli) -> Format {
    match &cli.command {
        Cmd::Distance(a)
        | Cmd::Geodesic(a)
        | Cmd::Project(a)
        | Cmd::Tube(a)
        | Cmd::Series(a)
        | Cmd::Reach(a)
        | Cmd::Verify(a)
        | Cmd::SingularScan(a) => a.format.unwrap_or_default(),
        Cmd::Replay { .. } => Format::Json,
    }
}

fn resolve(cli: Cli) -> Result<RunConfig, CliError> {
    let (command, args) = match cli.command {
        Cmd::Distance(a) => (Command::Distance, a),
        Cmd::Geodesic(a) => (Command::Geodesic, a),
        Cmd::Project(a) => (Command::Project, a),
        Cmd::Tube(a) => (Command::Tube, a),
        Cmd::Series(a) => (Command::Series, a),
        Cmd::Reach(a) => (Command::Reach, a),
        Cmd::Verify(a) => (Command::Verify, a),
        Cmd::SingularScan(a) => (Command::SingularScan, a),
        Cmd::Replay { file } => return load_replay(&file),
    };
    config::resolve(command, &args)
}

fn execute(cfg: &RunConfig) -> Result<Report, CliError> {
    match cfg.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| CliError::usage(format!("thread pool: {e}")))?
            .install(|| commands::run(cfg)),
        None => commands::run(cfg),
    }
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    match &cfg.output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::usage(format!("writing {path}: {e}"))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::usage(format!("writing stdout: {e}")))
        }
    }
}

fn error_body(err: &CliError) -> Value {
    let mut body = json!({ "kind": err.kind, "message": err.message, "exit_code": err.code });
    if let (Some(Value::Object(extra)), Value::Object(map)) = (err.details.as_deref(), &mut body) {
        map.extend(extra.clone());
    }
    body
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = requested_format(&cli);
    let cfg = match resolve(cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            if format == Format::Json {
                print!("{}", json_document(None, None, Some(error_body(&e))));
            }
            eprintln!("error: {}", e.message);
            return ExitCode::from(e.code);
        }
    };
    let result = execute(&cfg);
    let text = match (&result, cfg.format) {
        (Ok(report), Format::Json) => json_document(Some(&cfg), Some(report.json.clone()), None),
        (Ok(report), Format::Csv) => csv_document(&cfg, &report.table),
        (Err(err), Format::Json) => json_document(
            Some(&cfg),
            err.report.as_ref().map(|r| r.json.clone()),
            Some(error_body(err)),
        ),
        (Err(err), Format::Csv) => err
            .report
            .as_ref()
            .map(|r| csv_document(&cfg, &r.table))
            .unwrap_or_default(),
    };
    if !text.is_empty() {
        if let Err(e) = emit(&cfg, &text) {
            eprintln!("error: {}", e.message);
            return ExitCode::from(e.code);
        }
    }
    match result {
        Ok(_) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}: {}", err.kind, err.message);
            ExitCode::from(err.code)
        }
    }
}
