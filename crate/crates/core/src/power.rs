//! Minimum transmit power for delivering exactly one packet over a set of
//! subchannels.
//!
//! With per-channel noise floors `c_n = W * N0 / g_n`, the problem
//!
//! ```text
//! minimize   sum p_n
//! subject to sum T * W * log2(1 + p_n / c_n) = eta,   p_n >= 0
//! ```
//!
//! is solved by water-filling, `p_n = max(0, mu - c_n)`. The active set is a
//! prefix of the channels sorted by floor, and on an active set of size `m`
//! the water level has the closed form
//!
//! ```text
//! log2 mu = (eta / (T * W) + sum_{active} log2 c_n) / m
//! ```
//!
//! The prefix grows until the level no longer clears the next floor.

use thiserror::Error;

use crate::channel::{rate_bits_per_slot, RadioConstants};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AllocationError {
    #[error("no subchannels to allocate over")]
    EmptyGains,
    #[error("subchannel {index} has unusable gain {gain}")]
    UnusableGain { index: usize, gain: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    /// Power per subchannel, aligned with the input gains.
    pub powers_w: Vec<f64>,
    pub total_power_w: f64,
    pub achieved_rate_bits: f64,
    /// Common value of `c_n + p_n` over active subchannels.
    pub water_level: f64,
}

/// A gain can carry rate only if it is positive and its noise floor
/// `W * N0 / g` is finite.
pub fn is_usable_gain(gain: f64, constants: &RadioConstants) -> bool {
    gain.is_finite() && gain > 0.0 && (constants.noise_power_w() / gain).is_finite()
}

pub fn min_power_for_rate(
    gains: &[f64],
    constants: &RadioConstants,
) -> Result<AllocationResult, AllocationError> {
    if gains.is_empty() {
        return Err(AllocationError::EmptyGains);
    }
    if let Some((index, &gain)) = gains
        .iter()
        .enumerate()
        .find(|(_, g)| !is_usable_gain(**g, constants))
    {
        return Err(AllocationError::UnusableGain { index, gain });
    }

    let noise = constants.noise_power_w();
    let ln_floor: Vec<f64> = gains.iter().map(|g| (noise / g).ln()).collect();
    let mut order: Vec<usize> = (0..gains.len()).collect();
    order.sort_by(|&a, &b| ln_floor[a].total_cmp(&ln_floor[b]));

    let ln_load = constants.packet_load() * std::f64::consts::LN_2;
    let mut sum_ln_floor = 0.0;
    let mut active = 0;
    let ln_level = loop {
        sum_ln_floor += ln_floor[order[active]];
        active += 1;
        let level = (ln_load + sum_ln_floor) / active as f64;
        if active == order.len() || level <= ln_floor[order[active]] {
            break level;
        }
    };

    let mut powers_w = vec![0.0; gains.len()];
    for &n in &order[..active] {
        // c_n * (mu / c_n - 1), accurate when mu is close to the floor
        powers_w[n] = ln_floor[n].exp() * (ln_level - ln_floor[n]).exp_m1();
    }
    let total_power_w = powers_w.iter().sum();
    let achieved_rate_bits = powers_w
        .iter()
        .zip(gains)
        .map(|(&p, &g)| rate_bits_per_slot(p, g, constants))
        .sum();

    Ok(AllocationResult {
        powers_w,
        total_power_w,
        achieved_rate_bits,
        water_level: ln_level.exp(),
    })
}

/// As [`min_power_for_rate`], but `Ok(None)` when the minimum exceeds
/// `p_max`. The cap is inclusive.
pub fn min_power_capped(
    gains: &[f64],
    constants: &RadioConstants,
    p_max: f64,
) -> Result<Option<AllocationResult>, AllocationError> {
    let alloc = min_power_for_rate(gains, constants)?;
    Ok((alloc.total_power_w <= p_max).then_some(alloc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit(eta: u64) -> RadioConstants {
        RadioConstants {
            bandwidth_per_subchannel_hz: 1.0,
            noise_psd_w_per_hz: 1.0,
            slot_duration_s: 1.0,
            packet_size_bits: eta,
        }
    }

    /// Brute-force minimum over the rate split between two channels.
    fn grid_two(gains: [f64; 2], c: &RadioConstants) -> f64 {
        let eta = c.packet_size_bits as f64;
        let cost = |r: f64| {
            let inv = |r: f64, g: f64| {
                (2f64.powf(r / (c.slot_duration_s * c.bandwidth_per_subchannel_hz)) - 1.0)
                    * c.noise_power_w()
                    / g
            };
            inv(r, gains[0]) + inv(eta - r, gains[1])
        };
        let (mut lo, mut hi) = (0.0, eta);
        let mut best = f64::INFINITY;
        for _ in 0..8 {
            let step = (hi - lo) / 1000.0;
            let mut arg = lo;
            for i in 0..=1000 {
                let r = lo + step * i as f64;
                let v = cost(r);
                if v < best {
                    best = v;
                    arg = r;
                }
            }
            lo = (arg - step).max(0.0);
            hi = (arg + step).min(eta);
        }
        best
    }

    #[test]
    fn single_channel_inversion() {
        let a = min_power_for_rate(&[1.0], &unit(1)).unwrap();
        assert!((a.total_power_w - 1.0).abs() < 1e-14);
        assert!((a.achieved_rate_bits - 1.0).abs() < 1e-12);
    }

    #[test]
    fn strong_channel_needs_almost_nothing() {
        let a = min_power_for_rate(&[1e12], &unit(1)).unwrap();
        assert!(a.total_power_w < 1e-9);
    }

    #[test]
    fn symmetric_split() {
        let a = min_power_for_rate(&[1.0, 1.0], &unit(2)).unwrap();
        assert!((a.powers_w[0] - 1.0).abs() < 1e-12 && (a.powers_w[1] - 1.0).abs() < 1e-12);
        assert!((a.total_power_w - grid_two([1.0, 1.0], &unit(2))).abs() < 1e-6);
    }

    #[test]
    fn weak_channel_is_shut_off() {
        let c = unit(1);
        let a = min_power_for_rate(&[1.0, 0.01], &c).unwrap();
        // level 2 is below the weak channel's floor of 100
        assert_eq!(a.powers_w[1], 0.0);
        assert!((a.water_level - 2.0).abs() < 1e-12);
        let grid = grid_two([1.0, 0.01], &c);
        assert!((a.total_power_w - grid).abs() / grid < 1e-6);
    }

    #[test]
    fn contract_violations() {
        assert_eq!(
            min_power_for_rate(&[], &unit(1)),
            Err(AllocationError::EmptyGains)
        );
        assert_eq!(
            min_power_for_rate(&[1.0, 0.0], &unit(1)),
            Err(AllocationError::UnusableGain {
                index: 1,
                gain: 0.0
            })
        );
    }

    #[test]
    fn cap_is_inclusive() {
        let c = unit(2);
        assert!(min_power_capped(&[1.0, 1.0], &c, 2.0).unwrap().is_some());
        assert!(min_power_capped(&[1.0, 1.0], &c, 1.9).unwrap().is_none());
        let single = min_power_for_rate(&[1.0], &c).unwrap();
        assert!((single.total_power_w - 3.0).abs() < 1e-14);
        let at_cap = min_power_capped(&[1.0], &c, single.total_power_w).unwrap();
        assert_eq!(at_cap, Some(single));
    }

    proptest! {
        #[test]
        fn kkt_and_rate_audit(gains in prop::collection::vec(1e-3f64..1e3, 1..5), eta in 1u64..20) {
            let c = unit(eta);
            let a = min_power_for_rate(&gains, &c).unwrap();
            let target = eta as f64;
            prop_assert!((a.achieved_rate_bits - target).abs() <= 1e-9 * target);
            let sum: f64 = a.powers_w.iter().sum();
            prop_assert!((sum - a.total_power_w).abs() <= 1e-12 * a.total_power_w);
            for (p, g) in a.powers_w.iter().zip(&gains) {
                prop_assert!(*p >= 0.0);
                let floor = c.noise_power_w() / g;
                if *p > 0.0 {
                    prop_assert!(((floor + p) - a.water_level).abs() <= 1e-9 * a.water_level);
                } else {
                    prop_assert!(floor >= a.water_level * (1.0 - 1e-12));
                }
            }
        }

        #[test]
        fn monotone_in_channels_and_rate(gains in prop::collection::vec(1e-3f64..1e3, 1..4), extra in 1e-3f64..1e3, eta in 1u64..20) {
            let base = min_power_for_rate(&gains, &unit(eta)).unwrap().total_power_w;
            let mut more = gains.clone();
            more.push(extra);
            let with_extra = min_power_for_rate(&more, &unit(eta)).unwrap().total_power_w;
            prop_assert!(with_extra <= base * (1.0 + 1e-12));
            let higher = min_power_for_rate(&gains, &unit(eta + 1)).unwrap().total_power_w;
            prop_assert!(higher >= base);
        }
    }
}
