//! `strop` subcommands.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use strop_core::diagnostics::CheckStatus;
use strop_core::problems::spiked_data;

use crate::config::{parse_problem, ConfigError, ExperimentConfig, MethodSpec, RawConfig};
use crate::error::HarnessError;
use crate::experiment::{execute, RunOutput};
use crate::instance::Instance;
use crate::output::{
    data_bytes, epoch_bytes, iterates_bytes, iterates_path, read_iterates, read_trace, trace_bytes,
    write_atomic, Summary,
};
use crate::replay::{diagnose, summarize, StoredPath};

#[derive(Debug, Parser)]
#[command(name = "strop", version, about = "Stochastic trust-region experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment and write its trace, epoch table and summary.
    Run(RunArgs),
    /// Write the spiked-model data matrix described by a config.
    GenData(GenDataArgs),
    /// Replay the diagnostics on a stored trace.
    Check(CheckArgs),
    /// Run several methods on one problem and write an aligned epoch table.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Overrides `run.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write every iterate to `iterates.csv`.
    #[arg(long)]
    pub store_full: bool,
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Overrides `problem.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Trace to replay; defaults to `<out>/trace.csv`.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// One config per method; repeat the flag.
    #[arg(long, required = true)]
    pub config: Vec<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Overrides `run.seed` in every config.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Sets up logging from `STROP_LOG` (`quiet`, `info` or `debug`).
pub fn init_logging() {
    let level = match std::env::var("STROP_LOG").as_deref() {
        Ok("quiet") => log::LevelFilter::Error,
        Ok("debug") => log::LevelFilter::Debug,
        _ => log::LevelFilter::Info,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .try_init();
}

/// Runs a parsed command line and maps the outcome to an exit status.
pub fn main_with(cli: Cli) -> ExitCode {
    let result = match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::GenData(args) => cmd_gen_data(&args),
        Command::Check(args) => cmd_check(&args),
        Command::Compare(args) => cmd_compare(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn create_dir(dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

fn load_config(
    path: &Path,
    seed: Option<u64>,
    store_full: bool,
) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = ExperimentConfig::from_file(path)?;
    if let Some(s) = seed {
        cfg.run.seed = s;
    }
    cfg.run.store_full |= store_full;
    Ok(cfg)
}

/// Writes a run's files into `dir`; reports a numerical failure after
/// writing the clean prefix of the trace.
pub fn write_run(dir: &Path, cfg: &ExperimentConfig, out: &RunOutput) -> Result<(), HarnessError> {
    create_dir(dir)?;
    let is_tr = cfg.method.trust_region().is_some();
    if is_tr {
        write_atomic(&dir.join("trace.csv"), &trace_bytes(&out.trace))?;
    }
    write_atomic(&dir.join("history.csv"), &epoch_bytes(&out.epochs))?;
    if let Some(msg) = &out.nonfinite {
        return Err(HarnessError::NonFinite(msg.clone()));
    }
    if is_tr && cfg.run.store_full {
        let points = out.points.as_deref().unwrap_or(&[]);
        write_atomic(
            &dir.join("iterates.csv"),
            &iterates_bytes(&out.trace, points, &out.x),
        )?;
    }
    write_atomic(&dir.join("summary.txt"), out.summary.to_text().as_bytes())?;
    if let Some(report) = &out.report {
        for check in report.failures() {
            warn!("{check}");
        }
    }
    Ok(())
}

fn cmd_run(args: &RunArgs) -> Result<(), HarnessError> {
    let cfg = load_config(&args.config, args.seed, args.store_full)?;
    let instance = Instance::build(&cfg.problem)?;
    let out = execute(&cfg, &instance)?;
    write_run(&args.out, &cfg, &out)?;
    info!("wrote results to {}", args.out.display());
    Ok(())
}

fn cmd_gen_data(args: &GenDataArgs) -> Result<(), HarnessError> {
    let text = fs::read_to_string(&args.config).map_err(|e| HarnessError::io(&args.config, e))?;
    let mut problem = parse_problem(&RawConfig::parse(&text)?)?;
    if let Some(s) = args.seed {
        problem.seed = s;
    }
    let spec = problem.spiked().ok_or_else(|| {
        HarnessError::invalid(
            "problem.family",
            "gen-data writes spiked-model data; use family = subspace",
        )
    })?;
    let data = spiked_data(&spec)?;
    create_dir(&args.out)?;
    let path = args.out.join("data.csv");
    write_atomic(&path, &data_bytes(&spec, &data))?;
    info!("wrote {}", path.display());
    Ok(())
}

fn cmd_check(args: &CheckArgs) -> Result<(), HarnessError> {
    let cfg = ExperimentConfig::from_file(&args.config)?;
    if cfg.method.trust_region().is_none() {
        return Err(HarnessError::invalid(
            "method",
            "check replays trust-region traces (str or str_penalty)",
        ));
    }
    let instance = Instance::build(&cfg.problem)?;
    let trace_path = args
        .trace
        .clone()
        .unwrap_or_else(|| args.out.join("trace.csv"));
    let penalized = matches!(cfg.method, MethodSpec::StrPenalty(_)) && instance.is_constrained();
    let mut trace = read_trace(&trace_path, penalized)?;
    let sidecar = iterates_path(&trace_path);
    let stored = if sidecar.exists() {
        let it = read_iterates(&sidecar)?;
        if it.points.len() != trace.len() || it.final_x.is_none() {
            return Err(HarnessError::format(
                &sidecar,
                format!(
                    "{} stored iterates for {} trace rows",
                    it.points.len(),
                    trace.len()
                ),
            ));
        }
        for (rec, samples) in trace.iter_mut().zip(&it.samples) {
            rec.samples.clone_from(samples);
        }
        Some(it)
    } else {
        warn!(
            "no stored iterates next to {}; model accuracy is vacuous",
            trace_path.display()
        );
        None
    };
    let path = stored.as_ref().map(|it| StoredPath {
        points: &it.points,
        final_x: it.final_x.as_deref().expect("checked above"),
    });
    let report = diagnose(&instance, &cfg, &trace, path).expect("trust-region method");
    for check in &report.checks {
        if check.status == CheckStatus::Vacuous {
            warn!("{check}");
        }
        println!("{check}");
    }
    let mut summary = Summary::default();
    summary.push("trace", trace_path.display());
    summarize(&report, &mut summary);
    create_dir(&args.out)?;
    write_atomic(&args.out.join("check.txt"), summary.to_text().as_bytes())?;
    let failures: Vec<String> = report
        .failures()
        .map(|c| format!("{} (margin {:e})", c.name, c.margin))
        .collect();
    if failures.is_empty() {
        Ok(())
    } else {
        Err(HarnessError::ChecksFailed(failures.join(", ")))
    }
}

/// First `problem.*` line on which two canonical configs differ.
fn problem_difference(a: &ExperimentConfig, b: &ExperimentConfig) -> Option<String> {
    let problem_lines = |c: &ExperimentConfig| -> Vec<String> {
        c.to_text()
            .lines()
            .filter(|l| l.starts_with("problem."))
            .map(str::to_owned)
            .collect()
    };
    let (la, lb) = (problem_lines(a), problem_lines(b));
    if la == lb {
        return None;
    }
    let diff = la
        .iter()
        .zip(&lb)
        .find(|(x, y)| x != y)
        .map(|(x, _)| x.clone())
        .or_else(|| {
            let longer = if la.len() > lb.len() { &la } else { &lb };
            longer.get(la.len().min(lb.len())).cloned()
        });
    Some(
        diff.and_then(|l| l.split(" = ").next().map(str::to_owned))
            .unwrap_or_else(|| "problem".into()),
    )
}

fn cmd_compare(args: &CompareArgs) -> Result<(), HarnessError> {
    let configs = args
        .config
        .iter()
        .map(|p| load_config(p, args.seed, false))
        .collect::<Result<Vec<_>, _>>()?;
    let first = &configs[0];
    for (path, cfg) in args.config.iter().zip(&configs).skip(1) {
        if let Some(key) = problem_difference(first, cfg) {
            return Err(ConfigError::Invalid {
                key,
                reason: format!(
                    "{} describes a different problem than {}",
                    path.display(),
                    args.config[0].display()
                ),
            }
            .into());
        }
    }
    let instance = Instance::build(&first.problem)?;
    let mut labels: Vec<String> = Vec::new();
    for cfg in &configs {
        let name = cfg.method.name();
        let count = labels
            .iter()
            .filter(|l| l.split('#').next() == Some(name))
            .count();
        labels.push(if count == 0 {
            name.to_owned()
        } else {
            format!("{name}#{}", count + 1)
        });
    }
    let outputs: Vec<Result<RunOutput, HarnessError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|cfg| scope.spawn(|| execute(cfg, &instance)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("experiment thread panicked"))
            .collect()
    });
    create_dir(&args.out)?;
    let mut table = Vec::new();
    let mut first_error = None;
    for ((cfg, label), out) in configs.iter().zip(&labels).zip(outputs) {
        let out = out?;
        let dir = args.out.join(label.replace('#', "_"));
        if let Err(e) = write_run(&dir, cfg, &out) {
            first_error.get_or_insert(e);
        }
        table.extend(out.epochs.into_iter().map(|mut r| {
            r.method.clone_from(label);
            r
        }));
    }
    write_atomic(&args.out.join("compare.csv"), &epoch_bytes(&table))?;
    first_error.map_or(Ok(()), Err)
}
