//! `sailswarm` command-line front end: single runs, γ sweeps and paired analysis.

mod error;
mod manifest;
mod output;
mod report;
mod tables;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use sailswarm::{compare_all, run_sim_recording, run_sweep, SimConfig};

use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::output::write_atomic;

#[derive(Debug, Parser)]
#[command(name = "sailswarm", version, about = "Flocking simulator for wind-driven sailing robots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one seed and write per-tick metrics.
    Run(RunArgs),
    /// Run every environment × controller × seed of the sweep plan.
    Sweep(SweepArgs),
    /// Paired comparison of a summaries CSV against the baseline.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// JSON config; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config field, e.g. `--set flock.zones.r_rep=3.5`. Any
    /// unrecognised `--field.path VALUE` flag is treated the same way.
    #[arg(long = "set", value_name = "FIELD=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Metrics CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Also write every vessel state per tick.
    #[arg(long)]
    trajectory: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Number of seeds (overrides `sweep.seeds`).
    #[arg(long)]
    seeds: Option<u64>,
    /// First seed (overrides `sweep.first_seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory for `summaries.csv` and `manifest.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Summaries CSV produced by `sweep`.
    summaries: PathBuf,
    /// Comparison CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Print the per-environment table for one γ with significance stars.
    #[arg(long)]
    table3: bool,
    /// γ shown by `--table3`.
    #[arg(long, default_value_t = 0.01, allow_hyphen_values = true)]
    gamma: f64,
    /// Write delta-vs-γ panels with IQR bars.
    #[arg(long)]
    svg: Option<PathBuf>,
}

const KNOWN_FLAGS: [&str; 12] = [
    "config", "set", "seed", "seeds", "jobs", "out", "trajectory", "table3", "gamma", "svg", "help", "version",
];

/// Pulls `--field.path VALUE` / `--field.path=VALUE` flags that clap does not
/// know out of argv and turns them into `field.path=VALUE` overrides.
fn split_overrides(args: Vec<String>) -> Result<(Vec<String>, Vec<String>), CliError> {
    let mut kept = Vec::with_capacity(args.len());
    let mut overrides = Vec::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        let Some(flag) = arg.strip_prefix("--").filter(|f| !f.is_empty()) else {
            kept.push(arg);
            continue;
        };
        let (name, inline) = match flag.split_once('=') {
            Some((n, v)) => (n.to_string(), Some(v.to_string())),
            None => (flag.to_string(), None),
        };
        if KNOWN_FLAGS.contains(&name.as_str()) {
            kept.push(arg);
            if inline.is_none() && !matches!(name.as_str(), "table3" | "help" | "version") {
                kept.extend(it.next());
            }
            continue;
        }
        let value = match inline {
            Some(v) => v,
            None => it
                .next()
                .ok_or_else(|| CliError::Usage(format!("flag --{name} needs a value")))?,
        };
        overrides.push(format!("{name}={value}"));
    }
    Ok((kept, overrides))
}

fn load_config(args: &ConfigArgs, extra: &[String]) -> Result<SimConfig, CliError> {
    let overrides: Vec<String> = args.overrides.iter().chain(extra).cloned().collect();
    let cfg = match &args.config {
        Some(path) => SimConfig::load(path, &overrides)?,
        None => SimConfig::with_overrides(&overrides)?,
    };
    Ok(cfg)
}

fn cmd_run(args: &RunArgs, extra: &[String]) -> Result<(), CliError> {
    let cfg = load_config(&args.config, extra)?;
    info!("run: env {} controller {} seed {}", cfg.environment, cfg.flock.controller.name(), args.seed);
    let series = run_sim_recording(&cfg, args.seed, args.trajectory.is_some())?;
    write_atomic(&args.out, &tables::metrics_csv(&series.samples))?;
    if let (Some(path), Some(traj)) = (&args.trajectory, &series.trajectory) {
        let times: Vec<f64> = series.samples.iter().map(|s| s.t).collect();
        write_atomic(path, &tables::trajectory_csv(&times, traj))?;
    }
    info!("wrote {} samples to {}", series.samples.len(), args.out.display());
    Ok(())
}

fn cmd_sweep(args: &SweepArgs, extra: &[String]) -> Result<(), CliError> {
    let mut cfg = load_config(&args.config, extra)?;
    if let Some(n) = args.seeds {
        cfg.sweep.seeds = n;
    }
    if let Some(s) = args.seed {
        cfg.sweep.first_seed = s;
    }
    cfg.validate()?;
    let jobs = args
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let runs = cfg.sweep.environments.len() * (cfg.sweep.gammas.len() + 1) * cfg.sweep.seeds as usize;
    info!("sweep: {runs} runs on {jobs} threads");
    let rows = run_sweep(&cfg, jobs)?;

    let summaries = args.out.join("summaries.csv");
    let manifest_path = args.out.join("manifest.json");
    write_atomic(&summaries, &tables::summaries_csv(&rows))?;
    let manifest = RunManifest::new("sweep", &cfg, cfg.sweep.seed_list(), vec![summaries.clone(), manifest_path.clone()]);
    write_atomic(&manifest_path, manifest.to_json().as_bytes())?;
    info!("wrote {} rows to {}", rows.len(), summaries.display());
    Ok(())
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    let rows = tables::read_summaries(&args.summaries)?;
    let comparison = compare_all(&rows)?;
    write_atomic(&args.out, &tables::comparison_csv(&comparison))?;
    if let Some(path) = &args.svg {
        write_atomic(path, report::svg(&comparison).as_bytes())?;
    }
    if args.table3 {
        match report::table3(&comparison, args.gamma) {
            Some(table) => print!("{table}"),
            None => warn!("no comparison rows for gamma {}", args.gamma),
        }
    }
    Ok(())
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("SAILSWARM_LOG", "warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

fn real_main(argv: Vec<String>) -> Result<(), CliError> {
    let (argv, extra) = split_overrides(argv)?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => return Err(CliError::Usage(e.to_string())),
        Err(e) => {
            let _ = e.print();
            return Ok(());
        }
    };
    match &cli.command {
        Command::Run(args) => cmd_run(args, &extra),
        Command::Sweep(args) => cmd_sweep(args, &extra),
        Command::Analyze(args) => {
            if !extra.is_empty() {
                return Err(CliError::Usage(format!("analyze takes no config overrides: {extra:?}")));
            }
            cmd_analyze(args)
        }
    }
}

fn main() -> ExitCode {
    init_logging();
    match real_main(std::env::args().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod e2e;
