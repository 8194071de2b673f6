//! Virtual queues enforcing the time-average AoI constraint.
//!
//! Each queue accumulates the new age and drains `aoi_cap - 1/2` per slot,
//! so a queue that stays bounded on average implies
//! `mean(delta) <= aoi_cap - 1/2`.

use serde::{Deserialize, Serialize};

use crate::aoi::{AoiAverage, AoiVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueVector {
    pub backlogs: Vec<f64>,
    pub aoi_caps: Vec<f64>,
}

impl QueueVector {
    /// Zero backlog for every sensor. Each cap must exceed 1/2.
    pub fn new(aoi_caps: Vec<f64>) -> Self {
        assert!(
            aoi_caps.iter().all(|&c| c > 0.5),
            "AoI caps must exceed 1/2"
        );
        Self {
            backlogs: vec![0.0; aoi_caps.len()],
            aoi_caps,
        }
    }

    pub fn len(&self) -> usize {
        self.backlogs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.backlogs.is_empty()
    }

    /// Per-slot service `aoi_cap - 1/2`.
    pub fn service(&self, sensor: usize) -> f64 {
        self.aoi_caps[sensor] - 0.5
    }
}

/// `Q <- max(Q - (cap - 1/2), 0) + delta(t+1)`.
pub fn update_queue(q: &QueueVector, next_ages: &AoiVector) -> QueueVector {
    assert_eq!(q.len(), next_ages.len(), "queue/age length mismatch");
    let backlogs = q
        .backlogs
        .iter()
        .enumerate()
        .map(|(k, &backlog)| (backlog - q.service(k)).max(0.0) + next_ages.ages[k] as f64)
        .collect();
    QueueVector {
        backlogs,
        aoi_caps: q.aoi_caps.clone(),
    }
}

/// Quadratic Lyapunov function `1/2 * sum Q^2`.
pub fn lyapunov_value(q: &QueueVector) -> f64 {
    0.5 * q.backlogs.iter().map(|b| b * b).sum::<f64>()
}

/// `L(next) - L(prev)`, evaluated as `1/2 * sum (Q' - Q)(Q' + Q)` to avoid
/// cancellation when backlogs are large.
pub fn lyapunov_drift(prev: &QueueVector, next: &QueueVector) -> f64 {
    0.5 * prev
        .backlogs
        .iter()
        .zip(&next.backlogs)
        .map(|(q, q1)| (q1 - q) * (q1 + q))
        .sum::<f64>()
}

/// `cap_k - average AoI_k`; nonnegative means the constraint holds.
pub fn constraint_slack(averages: &[AoiAverage], caps: &[f64]) -> Vec<f64> {
    assert_eq!(averages.len(), caps.len(), "average/cap length mismatch");
    averages
        .iter()
        .zip(caps)
        .map(|(avg, cap)| cap - avg.value().expect("no slots counted"))
        .collect()
}

/// Finite-horizon view of strong stability: per-sensor running mean of the
/// backlog over the observed window.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StabilityDiagnostic {
    sums: Vec<f64>,
    pub window: u64,
}

impl StabilityDiagnostic {
    pub fn new(sensors: usize) -> Self {
        Self {
            sums: vec![0.0; sensors],
            window: 0,
        }
    }

    pub fn observe(&mut self, q: &QueueVector) {
        for (s, b) in self.sums.iter_mut().zip(&q.backlogs) {
            *s += b;
        }
        self.window += 1;
    }

    pub fn running_means(&self) -> Vec<f64> {
        let n = self.window.max(1) as f64;
        self.sums.iter().map(|s| s / n).collect()
    }
}
