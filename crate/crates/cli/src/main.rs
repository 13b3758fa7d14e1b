//! `tfm`: runs transaction fee mechanism checks from a config file.

mod config;
mod error;
mod plot;
mod report;
mod run;

use clap::{Parser, Subcommand};
use config::ExperimentConfig;
use error::CliError;
use report::RunReport;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "tfm",
    version,
    about = "Check transaction fee mechanisms for incentive properties"
)]
struct Cli {
    /// Experiment config (TOML, or a JSON config or run report).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config's global seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, env = "TFM_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured check and write the JSON report.
    Check,
    /// Write CSV series for the configured mechanism.
    PlotData,
    /// Search miner deviations on one profile, e.g. "(6, 5)".
    Deviate { profile: String },
}

fn load(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    cfg.resolve_seeds(cli.seed);
    Ok(cfg)
}

fn out_dir(cli: &Cli, cfg: &ExperimentConfig) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| {
        PathBuf::from(
            cfg.output
                .as_ref()
                .and_then(|o| o.dir.clone())
                .unwrap_or_else(|| ".".into()),
        )
    })
}

fn cmd_check(cli: &Cli) -> Result<bool, CliError> {
    let cfg = load(cli)?;
    let ctx = run::Context::new(&cfg)?;
    let outcomes: Vec<_> = cfg.checks.iter().map(|c| run::run_check(c, &ctx)).collect();
    for o in &outcomes {
        let status = serde_json::to_value(o.status).unwrap();
        println!(
            "{:<28} {:<14} {:>10.1} ms",
            o.name,
            status.as_str().unwrap_or("?"),
            o.wall_time_ms
        );
    }
    let dir = out_dir(cli, &cfg);
    let name = cfg
        .output
        .as_ref()
        .and_then(|o| o.report.clone())
        .unwrap_or_else(|| "report.json".into());
    let report = RunReport::new(cfg, outcomes);
    std::fs::create_dir_all(&dir)?;
    let path = dir.join(name);
    std::fs::write(&path, report.to_json())?;
    println!("report written to {}", path.display());
    if let Some(o) = report.checks.iter().find(|o| o.error.is_some()) {
        return Err(CliError::Check {
            name: o.name.clone(),
            message: o.error.clone().unwrap(),
        });
    }
    Ok(report.succeeded())
}

fn cmd_plot_data(cli: &Cli) -> Result<bool, CliError> {
    let cfg = load(cli)?;
    let ctx = run::Context::new(&cfg)?;
    let dir = out_dir(cli, &cfg);
    for p in plot::write_all(
        &ctx.mech,
        &ctx.dist,
        &cfg.plot.clone().unwrap_or_default(),
        &dir,
    )? {
        println!("{}", p.display());
    }
    Ok(true)
}

/// Parses `(a, b, ...)`, `[a, b]`, or `a, b`: nonnegative and descending.
fn parse_profile(text: &str) -> Result<Vec<f64>, CliError> {
    let inner = text
        .trim()
        .trim_start_matches(['(', '['])
        .trim_end_matches([')', ']'])
        .trim();
    if inner.is_empty() {
        return Ok(vec![]);
    }
    let bids = inner
        .split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v >= 0.0)
                .ok_or_else(|| {
                    CliError::Config(format!("profile entry `{s}` is not a nonnegative number"))
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if bids.windows(2).any(|w| w[0] < w[1]) {
        return Err(CliError::Config(
            "profile must be in descending order".into(),
        ));
    }
    Ok(bids)
}

fn cmd_deviate(cli: &Cli, profile: &str) -> Result<bool, CliError> {
    let cfg = load(cli)?;
    let bids = parse_profile(profile)?;
    let ctx = run::Context::new(&cfg)?;
    let r = tfm_core::verify::deviation_search(&ctx.mech, &ctx.dist, &bids, &ctx.search).map_err(
        |e| CliError::Check {
            name: "deviate".into(),
            message: e.to_string(),
        },
    )?;
    println!(
        "{}",
        serde_json::to_string_pretty(&r).expect("report serializes")
    );
    Ok(true)
}

fn set_jobs(jobs: Option<usize>) -> Result<(), CliError> {
    if let Some(k) = jobs.filter(|&k| k > 0) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::Run(format!("cannot start {k} workers: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = set_jobs(cli.jobs).and_then(|()| match &cli.command {
        Command::Check => cmd_check(&cli),
        Command::PlotData => cmd_plot_data(&cli),
        Command::Deviate { profile } => cmd_deviate(&cli, profile),
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("tfm: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
