//! V sweeps over several seeds, seed aggregation, and CSV output.
//!
//! Trace CSV, one row per (slot, sensor):
//!
//! ```text
//! slot,sensor,delta_before,q_before,b,assigned_subchannels,power_w,objective_contribution
//! ```
//!
//! `assigned_subchannels` is a bitmask (bit `n` = subchannel `n`).
//!
//! Summary CSV, one row per V with per-sensor columns numbered from 1:
//!
//! ```text
//! v,seeds,aoi_mean_1,aoi_std_1,...,power_mean_w,power_std_w,slack_1,...
//! ```
//!
//! Standard deviations are sample deviations across seeds (zero for a
//! single seed). Slack is `aoi_max_slots - aoi_mean`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::config::ScenarioConfig;
use crate::controller::{run_episode_with, EpisodeMetrics, EpisodeOptions, SlotRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub v: f64,
    pub seeds: usize,
    pub aoi_mean: Vec<f64>,
    pub aoi_std: Vec<f64>,
    pub power_mean_w: f64,
    pub power_std_w: f64,
    pub slack: Vec<f64>,
    pub bound_violations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub sensors: usize,
    pub rows: Vec<SweepRow>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Aggregates episodes that share one V.
pub fn aggregate(v: f64, caps: &[f64], episodes: &[EpisodeMetrics]) -> SweepRow {
    let sensors = caps.len();
    let (mut aoi_mean, mut aoi_std) = (Vec::new(), Vec::new());
    for k in 0..sensors {
        let column: Vec<f64> = episodes.iter().map(|e| e.avg_aoi[k]).collect();
        let (m, s) = mean_std(&column);
        aoi_mean.push(m);
        aoi_std.push(s);
    }
    let powers: Vec<f64> = episodes.iter().map(|e| e.avg_total_power_w).collect();
    let (power_mean_w, power_std_w) = mean_std(&powers);
    let slack = caps.iter().zip(&aoi_mean).map(|(c, a)| c - a).collect();
    SweepRow {
        v,
        seeds: episodes.len(),
        aoi_mean,
        aoi_std,
        power_mean_w,
        power_std_w,
        slack,
        bound_violations: episodes.iter().map(|e| e.bound_violations).sum(),
    }
}

/// Runs every (V, seed) cell and aggregates per V.
///
/// Seeds are episode indices: cell `(V, s)` draws channels from stream
/// `base.seed ^ s`, so all V values see the same channel sequences. Seeds
/// are sorted and rows come out sorted by V, so the table does not depend
/// on the order of either list or on execution order.
pub fn run_sweep(base: &ScenarioConfig, v_values: &[f64], seeds: &[u64]) -> Result<SweepTable> {
    if v_values.is_empty() || seeds.is_empty() {
        return Err(Error::Invalid(vec![crate::error::FieldError::new(
            if v_values.is_empty() {
                "v_values"
            } else {
                "seeds"
            },
            "must not be empty",
        )]));
    }
    let mut v_sorted = v_values.to_vec();
    v_sorted.sort_by(f64::total_cmp);
    let mut seeds = seeds.to_vec();
    seeds.sort_unstable();

    let cells: Vec<(f64, u64)> = v_sorted
        .iter()
        .flat_map(|&v| seeds.iter().map(move |&s| (v, s)))
        .collect();
    let episodes: Vec<EpisodeMetrics> = cells
        .par_iter()
        .map(|&(v, seed)| {
            let mut config = base.clone();
            config.v = v;
            run_episode_with(
                &config,
                EpisodeOptions {
                    stream: seed,
                    record_trace: false,
                },
            )
            .map_err(|e| Error::Episode {
                v,
                seed,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let caps = base.aoi_caps();
    let rows = v_sorted
        .iter()
        .zip(episodes.chunks(seeds.len()))
        .map(|(&v, chunk)| aggregate(v, &caps, chunk))
        .collect();
    Ok(SweepTable {
        sensors: caps.len(),
        rows,
    })
}

fn csv_error(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

pub fn summary_header(sensors: usize) -> Vec<String> {
    let mut header = vec!["v".to_string(), "seeds".to_string()];
    for k in 1..=sensors {
        header.push(format!("aoi_mean_{k}"));
        header.push(format!("aoi_std_{k}"));
    }
    header.push("power_mean_w".into());
    header.push("power_std_w".into());
    header.extend((1..=sensors).map(|k| format!("slack_{k}")));
    header
}

pub fn write_summary(table: &SweepTable, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error(path))?;
    w.write_record(summary_header(table.sensors))
        .map_err(csv_error(path))?;
    for row in &table.rows {
        let mut record = vec![row.v.to_string(), row.seeds.to_string()];
        for k in 0..table.sensors {
            record.push(row.aoi_mean[k].to_string());
            record.push(row.aoi_std[k].to_string());
        }
        record.push(row.power_mean_w.to_string());
        record.push(row.power_std_w.to_string());
        record.extend(row.slack.iter().map(ToString::to_string));
        w.write_record(&record).map_err(csv_error(path))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub const TRACE_HEADER: [&str; 8] = [
    "slot",
    "sensor",
    "delta_before",
    "q_before",
    "b",
    "assigned_subchannels",
    "power_w",
    "objective_contribution",
];

pub fn write_trace(records: &[SlotRecord], path: &Path) -> Result<()> {
    let io_error = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_error)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{}", TRACE_HEADER.join(",")).map_err(io_error)?;
    for r in records {
        for k in 0..r.state_before.sensors() {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                r.slot,
                k,
                r.state_before.ages.ages[k],
                r.state_before.queues.backlogs[k],
                u8::from(r.decision.sampled[k]),
                r.decision.assigned_mask(k),
                r.decision.sensor_power(k),
                r.decision.sensor_objective[k],
            )
            .map_err(io_error)?;
        }
    }
    w.flush().map_err(io_error)
}
