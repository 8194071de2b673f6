//! Brute-force oracles shared by the integration tests. None of these call
//! into the water-filling or optimizer code paths they are compared against.
#![allow(dead_code)]

use aoi_dpp::channel::{ChannelRealization, RadioConstants};
use aoi_dpp::controller::NetworkState;
use aoi_dpp::optimizer::sensor_weight;
use aoi_dpp::power::{is_usable_gain, min_power_capped};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        (lo.ln() + (hi.ln() - lo.ln()) * self.unit()).exp()
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.0.next_u64() % n
    }

    pub fn coin(&mut self, p: f64) -> bool {
        self.unit() < p
    }
}

/// Power to push `bits` through one channel: `c * (2^(bits / (T W)) - 1)`.
fn inverse_rate(bits: f64, gain: f64, c: &RadioConstants) -> f64 {
    let floor = c.bandwidth_per_subchannel_hz * c.noise_psd_w_per_hz / gain;
    floor * (2f64.powf(bits / (c.slot_duration_s * c.bandwidth_per_subchannel_hz)) - 1.0)
}

/// Minimum total power over a refined grid of rate splits (1 to 3 channels).
pub fn grid_min_power(gains: &[f64], c: &RadioConstants) -> f64 {
    let eta = c.packet_size_bits as f64;
    match gains.len() {
        1 => inverse_rate(eta, gains[0], c),
        2 => {
            let cost = |r: f64| inverse_rate(r, gains[0], c) + inverse_rate(eta - r, gains[1], c);
            let (mut lo, mut hi) = (0.0, eta);
            let mut best = f64::INFINITY;
            for _ in 0..40 {
                let step = (hi - lo) / 200.0;
                let mut arg = lo;
                for i in 0..=200 {
                    let r = (lo + step * i as f64).min(eta);
                    let v = cost(r);
                    if v < best {
                        best = v;
                        arg = r;
                    }
                }
                lo = (arg - 2.0 * step).max(0.0);
                hi = (arg + 2.0 * step).min(eta);
            }
            best
        }
        3 => {
            let cost = |r1: f64, r2: f64| {
                inverse_rate(r1, gains[0], c)
                    + inverse_rate(r2, gains[1], c)
                    + inverse_rate((eta - r1 - r2).max(0.0), gains[2], c)
            };
            let (mut x0, mut x1, mut y0, mut y1) = (0.0, eta, 0.0, eta);
            let mut best = f64::INFINITY;
            let (mut bx, mut by) = (0.0, 0.0);
            let steps = 60;
            for _ in 0..40 {
                let (dx, dy) = ((x1 - x0) / steps as f64, (y1 - y0) / steps as f64);
                for i in 0..=steps {
                    let r1 = x0 + dx * i as f64;
                    for j in 0..=steps {
                        let r2 = y0 + dy * j as f64;
                        if r1 + r2 > eta {
                            continue;
                        }
                        let v = cost(r1, r2);
                        if v < best {
                            best = v;
                            bx = r1;
                            by = r2;
                        }
                    }
                }
                x0 = (bx - 3.0 * dx).max(0.0);
                x1 = (bx + 3.0 * dx).min(eta);
                y0 = (by - 3.0 * dy).max(0.0);
                y1 = (by + 3.0 * dy).min(eta);
            }
            best
        }
        n => panic!("grid oracle supports 1 to 3 channels, got {n}"),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleDecision {
    pub objective: f64,
    pub assignment: Vec<Option<usize>>,
    pub sampled: Vec<bool>,
}

fn all_maps(sensors: usize, subchannels: usize) -> Vec<Vec<Option<usize>>> {
    let choices: Vec<Option<usize>> = std::iter::once(None)
        .chain((0..sensors).map(Some))
        .collect();
    let mut maps = vec![Vec::new()];
    for _ in 0..subchannels {
        maps = maps
            .into_iter()
            .flat_map(|prefix| {
                choices.iter().map(move |&c| {
                    let mut m = prefix.clone();
                    m.push(c);
                    m
                })
            })
            .collect();
    }
    maps
}

/// Joint enumeration over subchannel maps and sampling vectors, with the
/// documented tie-break.
pub fn brute_force_slot(
    state: &NetworkState,
    channels: &ChannelRealization,
    v: f64,
    p_max: &[f64],
    c: &RadioConstants,
) -> OracleDecision {
    let sensors = state.ages.ages.len();
    let subchannels = channels.subchannels();
    let mut candidates = Vec::new();
    for map in all_maps(sensors, subchannels) {
        let held: Vec<Vec<usize>> = (0..sensors)
            .map(|k| {
                (0..subchannels)
                    .filter(|&n| map[n] == Some(k) && is_usable_gain(channels.gain(k, n), c))
                    .collect()
            })
            .collect();
        for bits in 0..1u32 << sensors {
            let sampled: Vec<bool> = (0..sensors).map(|k| bits >> k & 1 == 1).collect();
            let mut objective = 0.0;
            let mut feasible = true;
            for k in 0..sensors {
                if !sampled[k] {
                    objective += 0.0;
                    continue;
                }
                if held[k].is_empty() {
                    feasible = false;
                    break;
                }
                let gains: Vec<f64> = held[k].iter().map(|&n| channels.gain(k, n)).collect();
                match min_power_capped(&gains, c, p_max[k]).unwrap() {
                    Some(a) => {
                        objective += v * a.total_power_w
                            + sensor_weight(state.ages.ages[k], state.queues.backlogs[k])
                    }
                    None => {
                        feasible = false;
                        break;
                    }
                }
            }
            if feasible {
                let assignment = (0..subchannels)
                    .map(|n| (0..sensors).find(|&k| sampled[k] && held[k].contains(&n)))
                    .collect();
                candidates.push(OracleDecision {
                    objective,
                    assignment,
                    sampled,
                });
            }
        }
    }
    let best = candidates
        .iter()
        .map(|d| d.objective)
        .fold(f64::INFINITY, f64::min);
    candidates
        .into_iter()
        .filter(|d| d.objective <= best + 1e-12)
        .min_by(|a, b| (&a.assignment, &a.sampled).cmp(&(&b.assignment, &b.sampled)))
        .map(|mut d| {
            d.objective = best;
            d
        })
        .unwrap()
}

/// Random slot instance with O(1) powers under unit radio constants.
pub fn random_slot(
    rng: &mut Rng,
    sensors: usize,
    subchannels: usize,
) -> (
    NetworkState,
    ChannelRealization,
    f64,
    Vec<f64>,
    RadioConstants,
) {
    let mut state = NetworkState::initial(vec![4.0; sensors]);
    for k in 0..sensors {
        state.ages.ages[k] = rng.below(12);
        state.queues.backlogs[k] = if state.ages.ages[k] == 0 {
            0.0
        } else {
            rng.uniform(0.0, 60.0)
        };
    }
    let rows: Vec<Vec<f64>> = (0..sensors)
        .map(|_| {
            (0..subchannels)
                .map(|_| {
                    if rng.coin(0.05) {
                        0.0
                    } else {
                        rng.log_uniform(1e-2, 1e2)
                    }
                })
                .collect()
        })
        .collect();
    let channels = ChannelRealization::from_rows(&rows, 1);
    let v = if rng.coin(0.1) {
        0.0
    } else {
        rng.log_uniform(1e-2, 1e3)
    };
    let p_max = (0..sensors).map(|_| rng.log_uniform(0.05, 50.0)).collect();
    let c = RadioConstants {
        bandwidth_per_subchannel_hz: 1.0,
        noise_psd_w_per_hz: 1.0,
        slot_duration_s: 1.0,
        packet_size_bits: 1 + rng.below(4),
    };
    (state, channels, v, p_max, c)
}
