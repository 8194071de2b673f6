//! Closed-loop drift-plus-penalty controller.
//!
//! Each slot: draw channels, solve the slot subproblem on the realized
//! channels, apply the decision (transmissions always succeed), then advance
//! ages and virtual queues to the next slot.
//!
//! Every slot is also audited against the quadratic bound on the
//! Lyapunov drift. The bound comes from
//! `(max(A - B, 0) + C)^2 <= A^2 + B^2 + C^2 + 2A(C - B)` applied to the
//! queue update, which holds for every realization, so the realized
//! drift-plus-penalty must never exceed it.

use serde::Serialize;

use crate::aoi::{step_aoi, AoiAverage, AoiVector};
use crate::channel::{ChannelModel, ChannelStream};
use crate::config::ScenarioConfig;
use crate::error::Result;
use crate::optimizer::{solve_slot, SlotDecision};
use crate::queues::{
    lyapunov_drift, lyapunov_value, update_queue, QueueVector, StabilityDiagnostic,
};

/// Float slack allowed when auditing the drift bound.
pub const BOUND_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkState {
    pub ages: AoiVector,
    pub queues: QueueVector,
}

impl NetworkState {
    pub fn initial(aoi_caps: Vec<f64>) -> Self {
        Self {
            ages: AoiVector::initial(aoi_caps.len()),
            queues: QueueVector::new(aoi_caps),
        }
    }

    pub fn sensors(&self) -> usize {
        self.ages.len()
    }

    pub fn slot_index(&self) -> u64 {
        self.ages.slot_index
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlotRecord {
    pub slot: u64,
    pub v: f64,
    pub decision: SlotDecision,
    pub state_before: NetworkState,
    pub state_after: NetworkState,
    pub total_power_w: f64,
    pub lyapunov_before: f64,
    pub lyapunov_after: f64,
    pub bound_value: f64,
    pub dpp_value: f64,
}

/// Right-hand side of the per-slot bound at the realized actions:
///
/// ```text
/// V * P + 1/2 * sum_k [ a_k^2 + d_k'^2 + 2 Q_k (d_k' - a_k) ]
/// ```
///
/// with `a_k = cap_k - 1/2` and `d_k' = b_k + (1 - b_k)(d_k + 1)`.
pub fn drift_plus_penalty_bound(
    before: &NetworkState,
    sampled: &[bool],
    total_power_w: f64,
    v: f64,
) -> f64 {
    let q = &before.queues;
    let quadratic: f64 = (0..before.sensors())
        .map(|k| {
            let a = q.service(k);
            let b = f64::from(u8::from(sampled[k]));
            let next_age = b + (1.0 - b) * (before.ages.ages[k] as f64 + 1.0);
            a * a + next_age * next_age + 2.0 * q.backlogs[k] * (next_age - a)
        })
        .sum();
    v * total_power_w + 0.5 * quadratic
}

/// Same bound, split into the decision-independent constant plus the
/// optimizer's objective `V * P + sum_k b_k * w_k`.
pub fn bound_constant(before: &NetworkState) -> f64 {
    let q = &before.queues;
    0.5 * (0..before.sensors())
        .map(|k| {
            let a = q.service(k);
            let d1 = before.ages.ages[k] as f64 + 1.0;
            a * a + d1 * d1 + 2.0 * q.backlogs[k] * d1 - 2.0 * q.backlogs[k] * a
        })
        .sum::<f64>()
}

/// Realized drift-plus-penalty is within [`BOUND_TOLERANCE`] of the bound.
pub fn audit_bound(record: &SlotRecord) -> bool {
    let dpp = lyapunov_drift(&record.state_before.queues, &record.state_after.queues)
        + record.v * record.total_power_w;
    let bound = drift_plus_penalty_bound(
        &record.state_before,
        &record.decision.sampled,
        record.total_power_w,
        record.v,
    );
    dpp <= bound + BOUND_TOLERANCE
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeMetrics {
    pub v: f64,
    pub stream_seed: u64,
    pub horizon_slots: u64,
    /// `1/2 + mean(delta_k)` over the horizon.
    pub avg_aoi: Vec<f64>,
    pub avg_total_power_w: f64,
    pub mean_backlog: Vec<f64>,
    pub sampling_frequency: Vec<f64>,
    pub final_backlog: Vec<f64>,
    pub bound_violations: u64,
    /// Largest `dpp - bound` seen; negative when the bound always held with room.
    pub max_bound_excess: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<SlotRecord>>,
}

impl EpisodeMetrics {
    pub fn constraint_slack(&self, caps: &[f64]) -> Vec<f64> {
        caps.iter().zip(&self.avg_aoi).map(|(c, a)| c - a).collect()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EpisodeOptions {
    /// Episode index; the channel stream is seeded with `seed ^ stream`.
    pub stream: u64,
    pub record_trace: bool,
}

/// Runs one episode on stream 0, keeping the trace when the config names a
/// trace output.
pub fn run_episode(config: &ScenarioConfig) -> Result<EpisodeMetrics> {
    run_episode_with(
        config,
        EpisodeOptions {
            stream: 0,
            record_trace: config.output.trace.is_some(),
        },
    )
}

pub fn run_episode_with(
    config: &ScenarioConfig,
    options: EpisodeOptions,
) -> Result<EpisodeMetrics> {
    config.validate()?;
    let sensors = config.sensors();
    let constants = config.radio_constants();
    let p_max = config.p_max();
    let v = config.v;
    let model = ChannelModel::new(&config.topology(), config.subchannels());
    let stream_seed = config.seed ^ options.stream;
    let mut stream = ChannelStream::new(stream_seed);

    let mut state = NetworkState::initial(config.aoi_caps());
    let mut averages = vec![AoiAverage::default(); sensors];
    let mut stability = StabilityDiagnostic::new(sensors);
    let mut samples = vec![0u64; sensors];
    let mut energy = 0.0;
    let mut violations = 0;
    let mut max_excess = f64::NEG_INFINITY;
    let mut trace = options.record_trace.then(Vec::new);

    for t in 1..=config.horizon_slots {
        let channels = model.draw(t, &mut stream);
        let decision = solve_slot(&state, &channels, v, &p_max, &constants)?;

        for (avg, &age) in averages.iter_mut().zip(&state.ages.ages) {
            avg.accumulate(age);
        }
        stability.observe(&state.queues);
        for (n, &b) in samples.iter_mut().zip(&decision.sampled) {
            *n += u64::from(b);
        }

        let ages = step_aoi(&state.ages, &decision.sampled);
        let queues = update_queue(&state.queues, &ages);
        let next = NetworkState { ages, queues };

        let power = decision.total_power();
        energy += power;
        let dpp = lyapunov_drift(&state.queues, &next.queues) + v * power;
        let bound = drift_plus_penalty_bound(&state, &decision.sampled, power, v);
        if dpp > bound + BOUND_TOLERANCE {
            violations += 1;
        }
        max_excess = max_excess.max(dpp - bound);

        if let Some(records) = trace.as_mut() {
            records.push(SlotRecord {
                slot: t,
                v,
                lyapunov_before: lyapunov_value(&state.queues),
                lyapunov_after: lyapunov_value(&next.queues),
                decision,
                state_before: state.clone(),
                state_after: next.clone(),
                total_power_w: power,
                bound_value: bound,
                dpp_value: dpp,
            });
        }
        state = next;
    }

    let horizon = config.horizon_slots as f64;
    Ok(EpisodeMetrics {
        v,
        stream_seed,
        horizon_slots: config.horizon_slots,
        avg_aoi: averages.iter().map(|a| a.value().unwrap()).collect(),
        avg_total_power_w: energy / horizon,
        mean_backlog: stability.running_means(),
        sampling_frequency: samples.iter().map(|&n| n as f64 / horizon).collect(),
        final_backlog: state.queues.backlogs,
        bound_violations: violations,
        max_bound_excess: max_excess,
        trace,
    })
}
