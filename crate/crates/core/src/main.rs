use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use aoi_dpp::harness::aggregate;
use aoi_dpp::{
    load_config, run_episode_with, run_sweep, write_summary, write_trace, EpisodeOptions, Error,
    SweepTable,
};

/// Drift-plus-penalty power minimization under AoI constraints.
#[derive(Debug, Parser)]
#[command(name = "aoi-dpp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a single episode and print its metrics as JSON.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Per-slot trace CSV (overrides `output.trace`).
        #[arg(long)]
        trace_out: Option<PathBuf>,
        /// One-row summary CSV (overrides `output.summary`).
        #[arg(long)]
        summary_out: Option<PathBuf>,
    },
    /// Run every (V, seed) pair and write the per-V summary CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated V values.
        #[arg(long, value_delimiter = ',', required = true)]
        v_list: Vec<f64>,
        /// Episode indices, as a comma list (`0,1,5`) or a range (`0..20`).
        #[arg(long, value_parser = parse_seeds, default_value = "0..20")]
        seeds: SeedList,
        #[arg(long)]
        out: PathBuf,
    },
    /// Load and validate a config file.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Clone)]
struct SeedList(Vec<u64>);

fn parse_seeds(text: &str) -> Result<SeedList, String> {
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: u64 = lo.trim().parse().map_err(|e| format!("{lo}: {e}"))?;
        let hi: u64 = hi.trim().parse().map_err(|e| format!("{hi}: {e}"))?;
        if lo >= hi {
            return Err(format!("empty range {text}"));
        }
        return Ok(SeedList((lo..hi).collect()));
    }
    text.split(',')
        .map(|s| s.trim().parse().map_err(|e| format!("{s}: {e}")))
        .collect::<Result<_, _>>()
        .map(SeedList)
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run {
            config,
            trace_out,
            summary_out,
        } => {
            let config = load_config(&config)?;
            let trace_path = trace_out.or_else(|| config.output.trace.clone());
            let summary_path = summary_out.or_else(|| config.output.summary.clone());
            let mut metrics = run_episode_with(
                &config,
                EpisodeOptions {
                    stream: 0,
                    record_trace: trace_path.is_some(),
                },
            )?;
            if let (Some(path), Some(trace)) = (&trace_path, metrics.trace.take()) {
                write_trace(&trace, path)?;
            }
            if let Some(path) = &summary_path {
                let table = SweepTable {
                    sensors: config.sensors(),
                    rows: vec![aggregate(
                        config.v,
                        &config.aoi_caps(),
                        std::slice::from_ref(&metrics),
                    )],
                };
                write_summary(&table, path)?;
            }
            println!(
                "{}",
                serde_json::to_string_pretty(&metrics).expect("metrics serialize")
            );
        }
        Command::Sweep {
            config,
            v_list,
            seeds,
            out,
        } => {
            let config = load_config(&config)?;
            let table = run_sweep(&config, &v_list, &seeds.0)?;
            write_summary(&table, &out)?;
            for row in &table.rows {
                eprintln!(
                    "V={} aoi={:?} power_w={:.6e} bound_violations={}",
                    row.v, row.aoi_mean, row.power_mean_w, row.bound_violations
                );
            }
        }
        Command::Validate { config } => {
            let config = load_config(&config)?;
            println!(
                "ok: {} sensors, {} subchannels, horizon {} slots",
                config.sensors(),
                config.subchannels(),
                config.horizon_slots
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
