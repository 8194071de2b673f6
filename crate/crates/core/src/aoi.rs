//! Age-of-information bookkeeping.
//!
//! Ages are integer slot counts. During slot `t` the age rises linearly from
//! `delta(t)` to `delta(t) + 1`, so the area under the age curve for that slot
//! is `delta(t) + 1/2`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AoiVector {
    pub ages: Vec<u64>,
    pub slot_index: u64,
}

impl AoiVector {
    /// All ages zero at slot 1.
    pub fn initial(sensors: usize) -> Self {
        Self {
            ages: vec![0; sensors],
            slot_index: 1,
        }
    }

    pub fn len(&self) -> usize {
        self.ages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ages.is_empty()
    }
}

/// Age at the beginning of the next slot: reset to one on a sample,
/// otherwise incremented.
pub fn step_aoi(ages: &AoiVector, sampled: &[bool]) -> AoiVector {
    assert_eq!(ages.len(), sampled.len(), "sampling vector length mismatch");
    AoiVector {
        ages: ages
            .ages
            .iter()
            .zip(sampled)
            .map(|(&age, &b)| if b { 1 } else { age + 1 })
            .collect(),
        slot_index: ages.slot_index + 1,
    }
}

/// Same recursion written as `b + (1 - b)(delta + 1)`.
pub fn step_aoi_algebraic(ages: &AoiVector, sampled: &[bool]) -> AoiVector {
    assert_eq!(ages.len(), sampled.len(), "sampling vector length mismatch");
    AoiVector {
        ages: ages
            .ages
            .iter()
            .zip(sampled)
            .map(|(&age, &b)| {
                let b = u64::from(b);
                b + (1 - b) * (age + 1)
            })
            .collect(),
        slot_index: ages.slot_index + 1,
    }
}

/// Running time-average AoI, `1/2 + mean(delta)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AoiAverage {
    pub running_sum: u64,
    pub slots_counted: u64,
}

impl AoiAverage {
    pub fn accumulate(&mut self, age_at_slot: u64) {
        self.running_sum += age_at_slot;
        self.slots_counted += 1;
    }

    /// `None` until at least one slot has been counted.
    pub fn value(&self) -> Option<f64> {
        (self.slots_counted > 0).then(|| 0.5 + self.running_sum as f64 / self.slots_counted as f64)
    }
}

pub fn accumulate_average(avg: AoiAverage, age_at_slot: u64) -> AoiAverage {
    let mut next = avg;
    next.accumulate(age_at_slot);
    next
}
