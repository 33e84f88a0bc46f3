use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kostka_cli::commands::{self, OracleArgs, OracleKind, Outcome, Status, SCHEMA};
use kostka_cli::config::{OutputFormat, Overrides, RunConfig};
use kostka_cli::input::{self, InstanceSpec};
use kostka_cli::render;
use kostka_core::rational::parse_rational;
use kostka_core::Rational;
use serde_json::{json, Value};

/// Certified volume brackets for Kostka polytopes.
#[derive(Parser, Debug)]
#[command(name = "kostka", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Optimization accuracy (rational in (0, 1), e.g. "1/1000").
    #[arg(long, global = true, value_parser = rational_arg)]
    eps_opt: Option<Rational>,

    /// Accuracy of the final certified evaluations.
    #[arg(long, global = true, value_parser = rational_arg)]
    delta: Option<Rational>,

    /// Largest working precision, in bits, of the interval evaluation path.
    #[arg(long, global = true)]
    bit_cap: Option<u32>,

    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,

    /// Include wall-clock timings (makes output non-reproducible).
    #[arg(long, global = true)]
    timings: bool,

    /// JSON config file; flags override its fields.
    #[arg(long, global = true, env = "KOSTKA_CONFIG")]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the full pipeline and report the certified bracket.
    Estimate { file: PathBuf },
    /// Exact oracles: Kostka numbers, volumes, scaling limits, log-concavity.
    Oracle {
        file: PathBuf,
        #[arg(long, value_enum)]
        kind: OracleKind,
        /// Scale factor N for `--kind scaling`.
        #[arg(long = "n", default_value_t = 16)]
        scale: u32,
        /// Segment subdivisions for `--kind logconcavity`.
        #[arg(long, default_value_t = 2)]
        steps: usize,
        /// Second endpoint for `--kind logconcavity`, comma separated.
        #[arg(long, value_parser = list_arg)]
        mu_b: Option<RationalList>,
    },
    /// Run the pipeline and check the bracket against the exact volume.
    Certify { file: PathBuf },
    /// Conditioning record only.
    Bounds { file: PathBuf },
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

/// Comma-separated rationals taken as one flag value.
#[derive(Clone, Debug)]
struct RationalList(Vec<Rational>);

fn list_arg(s: &str) -> Result<RationalList, String> {
    input::parse_list(s).map(RationalList)
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Estimate { .. } => "estimate",
            Command::Oracle { .. } => "oracle",
            Command::Certify { .. } => "certify",
            Command::Bounds { .. } => "bounds",
        }
    }

    fn file(&self) -> &PathBuf {
        match self {
            Command::Estimate { file } | Command::Certify { file } | Command::Bounds { file } => file,
            Command::Oracle { file, .. } => file,
        }
    }
}

fn run_one(cmd: &Command, spec: &InstanceSpec, cfg: &RunConfig, timings: bool) -> Outcome {
    match cmd {
        Command::Estimate { .. } => commands::estimate(spec, cfg, timings),
        Command::Certify { .. } => commands::certify(spec, cfg, timings),
        Command::Bounds { .. } => commands::bounds(spec, cfg, timings),
        Command::Oracle { kind, scale, steps, mu_b, .. } => {
            let args = OracleArgs { kind: *kind, scale: *scale, steps: *steps, mu_b: mu_b.as_ref().map(|l| l.0.clone()) };
            commands::oracle(spec, cfg, &args, timings)
        }
    }
}

fn emit(record: &Value, format: OutputFormat) {
    match format {
        OutputFormat::Json => println!("{}", serde_json::to_string_pretty(record).expect("serializable")),
        OutputFormat::Csv => print!("{}", render::to_csv(record)),
    }
}

fn fail(command: &str, status: Status, message: &str, format: OutputFormat) -> ExitCode {
    eprintln!("kostka {command}: {message}");
    emit(&commands::error_record(command, status, message).record, format);
    ExitCode::from(status.code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    let early_format = cli.format.unwrap_or_default();

    let file_cfg = match cli.config.as_ref().map(|p| RunConfig::load_file(&p.to_string_lossy())).transpose() {
        Ok(c) => c,
        Err(e) => return fail(name, Status::Parse, &e, early_format),
    };
    let over = Overrides { eps_opt: cli.eps_opt, delta_eval: cli.delta, precision_bit_cap: cli.bit_cap, output_format: cli.format };
    let cfg = match RunConfig::resolve(file_cfg, over) {
        Ok(c) => c,
        Err(e) => return fail(name, Status::Parse, &e, early_format),
    };

    let path = cli.command.file();
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return fail(name, Status::Parse, &format!("{}: {e}", path.display()), cfg.output_format),
    };
    let specs = match input::parse_instances(&text) {
        Ok(s) => s,
        Err(e) => return fail(name, Status::Parse, &format!("{}: {e}", path.display()), cfg.output_format),
    };

    let outcomes: Vec<Outcome> = specs.iter().map(|s| run_one(&cli.command, s, &cfg, cli.timings)).collect();
    for o in &outcomes {
        if let Some(msg) = o.record["error"]["message"].as_str() {
            eprintln!("kostka {name}: {msg}");
        }
    }
    // A batch exits with the first non-zero status.
    let status = outcomes.iter().map(|o| o.status).find(|s| *s != Status::Ok).unwrap_or(Status::Ok);
    if outcomes.len() == 1 {
        emit(&outcomes[0].record, cfg.output_format);
    } else {
        let results: Vec<Value> = outcomes.into_iter().map(|o| o.record).collect();
        emit(&json!({ "schema": SCHEMA, "command": name, "results": results }), cfg.output_format);
    }
    ExitCode::from(status.code())
}
