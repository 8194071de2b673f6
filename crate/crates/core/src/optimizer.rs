//! Per-slot drift-plus-penalty subproblem.
//!
//! For a fixed subchannel map the sensors decouple: sensor `k` holding a
//! nonempty usable set pays `c_k = V * P*_k + w_k` if it samples and nothing
//! otherwise, so it samples exactly when `c_k < 0`. The optimizer enumerates
//! every map of subchannels to a sensor or to idle, thresholds each sensor,
//! and keeps the best map.
//!
//! Ties within [`TIE_TOLERANCE`] of the minimum go to the lexicographically
//! smallest canonical assignment (idle before sensor 0 before sensor 1...),
//! then the smallest sampling vector. In the canonical assignment a
//! subchannel is idle unless its sensor samples and its gain is usable.

use crate::channel::{ChannelRealization, RadioConstants};
use crate::controller::NetworkState;
use crate::error::{Error, Result};
use crate::power::{is_usable_gain, min_power_capped, AllocationResult};

/// Upper bound on the number of assignment maps `(K + 1)^N`.
pub const MAX_ASSIGNMENT_MAPS: u64 = 1_000_000;

/// Objectives this close to the minimum are treated as ties.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SlotDecision {
    pub sampled: Vec<bool>,
    /// Per subchannel: the sensor it serves, or `None` when idle.
    pub assignment: Vec<Option<usize>>,
    /// `powers[k][n]`.
    pub powers: Vec<Vec<f64>>,
    /// `V * P_k + w_k` for sampling sensors, zero otherwise.
    pub sensor_objective: Vec<f64>,
    pub objective_value: f64,
}

impl SlotDecision {
    pub fn idle(sensors: usize, subchannels: usize) -> Self {
        Self {
            sampled: vec![false; sensors],
            assignment: vec![None; subchannels],
            powers: vec![vec![0.0; subchannels]; sensors],
            sensor_objective: vec![0.0; sensors],
            objective_value: 0.0,
        }
    }

    pub fn sensor_power(&self, sensor: usize) -> f64 {
        self.powers[sensor].iter().sum()
    }

    pub fn total_power(&self) -> f64 {
        (0..self.powers.len()).map(|k| self.sensor_power(k)).sum()
    }

    /// Bit `n` set when subchannel `n` serves `sensor`.
    pub fn assigned_mask(&self, sensor: usize) -> u64 {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, a)| **a == Some(sensor))
            .fold(0, |m, (n, _)| m | (1 << n))
    }
}

/// `1/2 * (1 - (age + 1)^2 - 2 * backlog * age)`, the per-sensor gain in the
/// bound from sampling this slot.
pub fn sensor_weight(age: u64, backlog: f64) -> f64 {
    let a = age as f64;
    0.5 * (1.0 - (a + 1.0) * (a + 1.0) - 2.0 * backlog * a)
}

/// Number of assignment maps, or an error when it exceeds
/// [`MAX_ASSIGNMENT_MAPS`].
pub fn assignment_map_count(sensors: usize, subchannels: usize) -> Result<u64> {
    let too_complex = || Error::TooComplex {
        sensors,
        subchannels,
        maps: (sensors as f64 + 1.0).powf(subchannels as f64),
        limit: MAX_ASSIGNMENT_MAPS,
    };
    let exp = u32::try_from(subchannels).map_err(|_| too_complex())?;
    match (sensors as u64 + 1).checked_pow(exp) {
        Some(m) if m <= MAX_ASSIGNMENT_MAPS && subchannels < 64 => Ok(m),
        _ => Err(too_complex()),
    }
}

/// Gains of the subchannels in `mask`, in subchannel order.
pub(crate) fn masked_gains(channels: &ChannelRealization, sensor: usize, mask: u64) -> Vec<f64> {
    channels
        .row(sensor)
        .iter()
        .enumerate()
        .filter(|(n, _)| mask >> n & 1 == 1)
        .map(|(_, &g)| g)
        .collect()
}

/// Bitmask of subchannels whose gain can carry rate for `sensor`.
pub fn usable_mask(
    channels: &ChannelRealization,
    sensor: usize,
    constants: &RadioConstants,
) -> u64 {
    channels
        .row(sensor)
        .iter()
        .enumerate()
        .filter(|(_, &g)| is_usable_gain(g, constants))
        .fold(0, |m, (n, _)| m | (1 << n))
}

enum Offer {
    Infeasible,
    Feasible { alloc: AllocationResult, cost: f64 },
}

/// Lazily filled table of per-(sensor, usable subset) offers.
struct OfferTable<'a> {
    channels: &'a ChannelRealization,
    constants: &'a RadioConstants,
    p_max: &'a [f64],
    weights: &'a [f64],
    v: f64,
    table: Vec<Vec<Option<Offer>>>,
}

impl<'a> OfferTable<'a> {
    fn offer(&mut self, sensor: usize, mask: u64) -> &Offer {
        let slot = &mut self.table[sensor][mask as usize];
        if slot.is_none() {
            let gains = masked_gains(self.channels, sensor, mask);
            let alloc = min_power_capped(&gains, self.constants, self.p_max[sensor])
                .expect("usable gains only");
            *slot = Some(match alloc {
                Some(alloc) => {
                    let cost = self.v * alloc.total_power_w + self.weights[sensor];
                    Offer::Feasible { alloc, cost }
                }
                None => Offer::Infeasible,
            });
        }
        slot.as_ref().unwrap()
    }

    /// Cost `c_k` if sensor samples with this subset, `None` if it should not.
    fn sampling_cost(&mut self, sensor: usize, mask: u64) -> Option<f64> {
        if mask == 0 {
            return None;
        }
        match self.offer(sensor, mask) {
            Offer::Feasible { cost, .. } if *cost < 0.0 => Some(*cost),
            _ => None,
        }
    }
}

/// Decodes map index `m` into per-subchannel digits, most significant digit
/// first. Digit 0 is idle, digit `j` is sensor `j - 1`, so index order is
/// lexicographic order of the raw assignment.
fn decode_map(mut m: u64, base: u64, digits: &mut [u64]) {
    for d in digits.iter_mut().rev() {
        *d = m % base;
        m /= base;
    }
}

fn sensor_masks(digits: &[u64], usable: &[u64], masks: &mut [u64]) {
    masks.iter_mut().for_each(|m| *m = 0);
    for (n, &d) in digits.iter().enumerate() {
        if d > 0 {
            masks[d as usize - 1] |= 1 << n;
        }
    }
    for (m, u) in masks.iter_mut().zip(usable) {
        *m &= u;
    }
}

pub fn solve_slot(
    state: &NetworkState,
    channels: &ChannelRealization,
    v: f64,
    p_max: &[f64],
    constants: &RadioConstants,
) -> Result<SlotDecision> {
    let sensors = state.sensors();
    let subchannels = channels.subchannels();
    assert_eq!(channels.sensors(), sensors, "channel/state sensor mismatch");
    assert_eq!(p_max.len(), sensors, "power cap length mismatch");
    let maps = assignment_map_count(sensors, subchannels)?;

    let weights: Vec<f64> = (0..sensors)
        .map(|k| sensor_weight(state.ages.ages[k], state.queues.backlogs[k]))
        .collect();
    let usable: Vec<u64> = (0..sensors)
        .map(|k| usable_mask(channels, k, constants))
        .collect();
    let mut offers = OfferTable {
        channels,
        constants,
        p_max,
        weights: &weights,
        v,
        table: (0..sensors)
            .map(|_| (0..1usize << subchannels).map(|_| None).collect())
            .collect(),
    };

    let base = sensors as u64 + 1;
    let mut digits = vec![0u64; subchannels];
    let mut masks = vec![0u64; sensors];

    let mut objectives = Vec::with_capacity(maps as usize);
    let mut best = 0.0f64;
    for m in 0..maps {
        decode_map(m, base, &mut digits);
        sensor_masks(&digits, &usable, &mut masks);
        let mut objective = 0.0;
        for (k, &mask) in masks.iter().enumerate() {
            if let Some(cost) = offers.sampling_cost(k, mask) {
                objective += cost;
            }
        }
        best = best.min(objective);
        objectives.push(objective);
    }

    // (canonical assignment, sampling vector, usable masks)
    type Candidate = (Vec<Option<usize>>, Vec<bool>, Vec<u64>);
    let mut winner: Option<Candidate> = None;
    for (m, &objective) in objectives.iter().enumerate() {
        if objective > best + TIE_TOLERANCE {
            continue;
        }
        decode_map(m as u64, base, &mut digits);
        sensor_masks(&digits, &usable, &mut masks);
        let sampled: Vec<bool> = masks
            .iter()
            .enumerate()
            .map(|(k, &mask)| offers.sampling_cost(k, mask).is_some())
            .collect();
        let assignment: Vec<Option<usize>> = (0..subchannels)
            .map(|n| (0..sensors).find(|&k| sampled[k] && masks[k] >> n & 1 == 1))
            .collect();
        let better = match &winner {
            None => true,
            Some((a, s, _)) => (&assignment, &sampled) < (a, s),
        };
        if better {
            winner = Some((assignment, sampled, masks.clone()));
        }
    }

    let (assignment, sampled, masks) = winner.expect("at least one map");
    let mut decision = SlotDecision::idle(sensors, subchannels);
    decision.assignment = assignment;
    decision.sampled = sampled;
    for (k, &mask) in masks.iter().enumerate() {
        if !decision.sampled[k] {
            continue;
        }
        let Offer::Feasible { alloc, cost } = offers.offer(k, mask) else {
            unreachable!("sampling sensor without a feasible offer");
        };
        let active = (0..subchannels).filter(|n| mask >> n & 1 == 1);
        for (n, &p) in active.zip(&alloc.powers_w) {
            decision.powers[k][n] = p;
        }
        decision.sensor_objective[k] = *cost;
    }
    decision.objective_value = decision.sensor_objective.iter().sum();
    Ok(decision)
}
