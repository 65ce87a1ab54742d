//! `rbsol <command> [--config file.json] [--key value ...] --out dir`
//!
//! Exit codes: 0 when every check passes, 1 when a numeric check fails,
//! 2 for invalid configuration or parameters.

mod config;
mod error;
mod jobs;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{Map, Value};

use config::{expand_sweep, flag_value, load_file, resolve, set_dotted, Command, JobConfig, SweepPoint};
use error::CliError;
use jobs::{job_exit_code, run_job};
use report::{emit_report, Artifact};

const USAGE: &str = "\
usage: rbsol <command> [--config file.json] [--key value ...] --out dir

commands:
  validate         classify the parameters (n, rho, lambda)
  fixture          write a closed-form or shot profile and its residual
  verify           soliton residual and identity defects
  shoot            integrate the profile ODE from the pole for one alpha
  flow             run the flow from a fixture and write snapshots
  selfsim-compare  convergence of the flow against the self-similar solution
  growth           gradient bounds, quadratic growth and rigidity diagnostics
  report           verify hashes and collect checks of earlier runs (input_dir)

Any config key can be set with a dotted flag, e.g. --params.lambda 2 or
--grid.count 401. Flag values are parsed as JSON, falling back to strings.
A \"sweep\" object maps dotted keys to value lists; its cartesian product runs
on a bounded worker pool (\"workers\") with one subdirectory per job.
Without --out or output_dir, the output root comes from RBSOL_OUT_ROOT.";

struct Args {
    command: Option<String>,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    overrides: Vec<(String, String)>,
}

fn parse_args(argv: &[String]) -> Result<Option<Args>, CliError> {
    let mut args = Args { command: None, config: None, out: None, overrides: Vec::new() };
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "-h" || a == "--help" {
            return Ok(None);
        }
        if let Some(key) = a.strip_prefix("--") {
            let value = it.next().ok_or_else(|| CliError::Config(format!("flag --{key} needs a value")))?;
            match key {
                "config" => args.config = Some(PathBuf::from(value)),
                "out" => args.out = Some(PathBuf::from(value)),
                _ => args.overrides.push((key.to_string(), value.clone())),
            }
        } else if args.command.is_none() {
            args.command = Some(a.clone());
        } else {
            return Err(CliError::Config(format!("unexpected argument '{a}'")));
        }
    }
    Ok(Some(args))
}

/// Assembles the JSON object: file, then flags, then the positional command.
fn assemble(args: &Args) -> Result<Value, CliError> {
    let mut root = match &args.config {
        Some(path) => load_file(path)?,
        None => Value::Object(Map::new()),
    };
    for (k, v) in &args.overrides {
        set_dotted(&mut root, k, flag_value(v))?;
    }
    if let Some(cmd) = &args.command {
        Command::parse(cmd)?;
        set_dotted(&mut root, "command", Value::String(cmd.clone()))?;
    }
    if args.out.is_some() {
        // the output location is not part of the job identity
        if let Some(o) = root.as_object_mut() {
            o.remove("output_dir");
        }
    }
    Ok(root)
}

#[derive(Serialize)]
struct SweepEntry {
    dir: String,
    assignments: Map<String, Value>,
    exit_code: i32,
    checks_passed: usize,
    checks_total: usize,
    error: Option<String>,
}

#[derive(Serialize)]
struct SweepSummary {
    jobs: Vec<SweepEntry>,
    exit_code: i32,
}

fn run_single(cfg: &JobConfig) -> Result<(i32, jobs::JobSummary), CliError> {
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    let (rep, err) = run_job(cfg);
    emit_report(&rep, &cfg.output_dir)?;
    let code = job_exit_code(&rep, err.as_ref());
    Ok((code, jobs::JobSummary::of(&rep)))
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get()).min(4)
}

fn run_sweep(root: &Value, points: Vec<SweepPoint>, out: &Path) -> Result<i32, CliError> {
    // resolve every job first so that a bad point fails before any work
    let width = points.len().saturating_sub(1).to_string().len().max(3);
    let mut cfgs = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        let mut v = root.clone();
        for (k, val) in &p.assignments {
            set_dotted(&mut v, k, val.clone())?;
        }
        if let Some(o) = v.as_object_mut() {
            o.remove("output_dir");
        }
        let dir = format!("job_{i:0width$}");
        let cfg = resolve(&v, Some(&out.join(&dir))).map_err(|e| CliError::Config(format!("{dir}: {e}")))?;
        cfgs.push((dir, cfg));
    }
    let workers = cfgs[0].1.workers.unwrap_or_else(default_workers);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    let outcomes: Vec<Result<(i32, jobs::JobSummary), CliError>> =
        pool.install(|| cfgs.par_iter().map(|(_, cfg)| run_single(cfg)).collect());

    let mut entries = Vec::with_capacity(cfgs.len());
    let mut overall = 0;
    for ((dir, _), (p, res)) in cfgs.iter().zip(points.iter().zip(outcomes)) {
        let (code, s) = res?;
        overall = overall.max(code);
        entries.push(SweepEntry {
            dir: dir.clone(),
            assignments: p.assignments.iter().cloned().collect(),
            exit_code: code,
            checks_passed: s.passed,
            checks_total: s.total,
            error: s.error,
        });
    }
    let summary = Artifact::json("summary.json", &SweepSummary { jobs: entries, exit_code: overall });
    let path = out.join(&summary.name);
    std::fs::write(&path, &summary.bytes).map_err(|e| CliError::io(path.display(), e))?;
    Ok(overall)
}

fn run(argv: &[String]) -> Result<i32, CliError> {
    let Some(args) = parse_args(argv)? else {
        println!("{USAGE}");
        return Ok(0);
    };
    if args.command.is_none() && args.config.is_none() {
        return Err(CliError::Config("no command given (see --help)".into()));
    }
    let mut root = assemble(&args)?;
    let points = expand_sweep(&mut root)?;
    if points.len() == 1 && points[0].assignments.is_empty() {
        let cfg = resolve(&root, args.out.as_deref())?;
        let (code, s) = run_single(&cfg)?;
        println!("{}: {}/{} checks passed -> {}", cfg.command, s.passed, s.total, cfg.output_dir.display());
        if let Some(e) = s.error {
            eprintln!("error: {e}");
        }
        return Ok(code);
    }
    // sweeps need a root directory for the per-job subdirectories
    let out = match (&args.out, root.get("output_dir").and_then(Value::as_str)) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) => PathBuf::from(o),
        (None, None) => match std::env::var_os(config::OUT_ROOT_ENV) {
            Some(r) => PathBuf::from(r).join("sweep"),
            None => return Err(CliError::Config("missing required field output_dir".into())),
        },
    };
    std::fs::create_dir_all(&out).map_err(|e| CliError::io(out.display(), e))?;
    let n = points.len();
    let code = run_sweep(&root, points, &out)?;
    println!("sweep: {n} jobs, exit code {code} -> {}", out.display());
    Ok(code)
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match run(&argv) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
