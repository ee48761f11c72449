use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use fedualex::fedsim::{grid_search_with, repeat_seeds, run_experiment, RunRecord, SimConfig};

use crate::config::{parse_config, Overrides, RunSettings};
use crate::csv_io::{read_csv, write_aggregate, write_aggregate_csv, write_csv, write_records};
use crate::error::{CliError, Result};
use crate::summary::summarize;

#[derive(Debug, Parser)]
#[command(name = "fedualex", version, about = "Federated composite saddle-point simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one configuration and write its metric series.
    Run(RunArgs),
    /// Search the (eta_s, eta_c) grid and write the winning series.
    Grid(RunArgs),
    /// Repeat a configuration over consecutive seeds and write mean/std.
    Seeds(RunArgs),
    /// Print the summary of a metric CSV.
    Summarize { path: PathBuf },
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// l1-k1, l1-k10, nuclear-k1 or nuclear-k10.
    #[arg(long)]
    pub preset: Option<String>,
    /// fedualex, fedmip, fedmid, feddualavg, seq_stochastic_de or seq_composite_de.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long)]
    pub local_steps: Option<usize>,
    #[arg(long)]
    pub clients: Option<usize>,
    #[arg(long)]
    pub participation: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub eta_server: Option<f64>,
    #[arg(long)]
    pub eta_client: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Round count or `auto`.
    #[arg(long)]
    pub eval_every: Option<String>,
    /// ergodic or last.
    #[arg(long)]
    pub eval_point: Option<String>,
    /// Report the projection of the server state instead of the shadow sequence.
    #[arg(long)]
    pub deployable_output: bool,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Number of seeds for `seeds`.
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Per-seed series for `seeds`, concatenated.
    #[arg(long)]
    pub runs_output: Option<PathBuf>,
}

impl RunArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            preset: self.preset.clone(),
            method: self.method.clone(),
            clients: self.clients,
            rounds: self.rounds,
            local_steps: self.local_steps,
            eta_s: self.eta_server,
            eta_c: self.eta_client,
            sigma: self.sigma,
            participation: self.participation,
            seed: self.seed,
            eval_every: self.eval_every.clone(),
            eval_point: self.eval_point.clone(),
            deployable_output: self.deployable_output,
            output: self.output.clone(),
            seeds: self.seeds,
        }
    }

    pub fn settings(&self) -> Result<RunSettings> {
        parse_config(self.config.as_deref(), &self.overrides())
    }
}

fn stdio<T>(r: std::io::Result<T>) -> Result<T> {
    r.map_err(|source| CliError::Io {
        path: PathBuf::from("<stdio>"),
        source,
    })
}

fn emit_records(records: &[RunRecord], settings: &RunSettings, out: &mut dyn Write) -> Result<()> {
    match &settings.output {
        Some(p) => write_csv(records, p),
        None => stdio(write_records(out, records)),
    }
}

fn describe(cfg: &SimConfig) -> String {
    format!(
        "{} on {:?} m={} n={} p={}: M={} R={} K={} eta_s={} eta_c={} sigma={} seed={}",
        cfg.method,
        cfg.problem.kind,
        cfg.problem.m,
        cfg.problem.n,
        cfg.problem.p,
        cfg.clients,
        cfg.rounds,
        cfg.local_steps,
        cfg.eta_s,
        cfg.eta_c,
        cfg.sigma,
        cfg.seed
    )
}

/// Runs `cli`. CSV goes to `out` when no output path is set; summaries and
/// progress go to `log`.
pub fn execute(cli: &Cli, out: &mut dyn Write, log: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Run(args) => {
            let s = args.settings()?;
            stdio(writeln!(log, "{}", describe(&s.sim)))?;
            let records = run_experiment(&s.sim)?;
            emit_records(&records, &s, out)?;
            stdio(writeln!(log, "{}", summarize(&records)?))?;
        }
        Command::Grid(args) => {
            let s = args.settings()?;
            stdio(writeln!(log, "{}", describe(&s.sim)))?;
            let mut progress: std::io::Result<()> = Ok(());
            let result = grid_search_with(&s.sim, &s.eta_s_grid, &s.eta_c_grid, |cfg| {
                let r = run_experiment(cfg);
                let line = match &r {
                    Ok(recs) => format!(
                        "eta_s={:<6} eta_c={:<6} gap={:e}",
                        cfg.eta_s,
                        cfg.eta_c,
                        recs.last().map_or(f64::NAN, |x| x.duality_gap)
                    ),
                    Err(e) => format!("eta_s={:<6} eta_c={:<6} {e}", cfg.eta_s, cfg.eta_c),
                };
                if progress.is_ok() {
                    progress = writeln!(log, "{line}");
                }
                r
            })?;
            stdio(progress)?;
            let best = &result.cells[result.best_index];
            stdio(writeln!(log, "best eta_s={} eta_c={}", best.eta_s, best.eta_c))?;
            if let Ok(records) = &best.outcome {
                emit_records(records, &s, out)?;
                stdio(writeln!(log, "{}", summarize(records)?))?;
            }
        }
        Command::Seeds(args) => {
            let s = args.settings()?;
            stdio(writeln!(log, "{} over {} seeds", describe(&s.sim), s.seeds))?;
            let summary = repeat_seeds(&s.sim, s.seeds)?;
            if !summary.diverged.is_empty() {
                stdio(writeln!(
                    log,
                    "warning: {} of {} seeds diverged: {:?}",
                    summary.diverged.len(),
                    s.seeds,
                    summary.diverged
                ))?;
            }
            match &s.output {
                Some(p) => write_aggregate_csv(&summary.aggregate, p)?,
                None => stdio(write_aggregate(&mut *out, &summary.aggregate))?,
            }
            if let Some(p) = &args.runs_output {
                let all: Vec<RunRecord> = summary.runs.concat();
                write_csv(&all, p)?;
            }
            if let Some(last) = summary.aggregate.last() {
                stdio(writeln!(
                    log,
                    "final gap {:e} ± {:e}, sparsity x {:.4} ± {:.4}, rank x {:.2} ± {:.2}",
                    last.gap_mean,
                    last.gap_std,
                    last.sparsity_x_mean,
                    last.sparsity_x_std,
                    last.rank_x_mean,
                    last.rank_x_std
                ))?;
            }
        }
        Command::Summarize { path } => {
            let records = read_csv(path)?;
            stdio(writeln!(out, "{}", summarize(&records)?))?;
        }
    }
    Ok(())
}
