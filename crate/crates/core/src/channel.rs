//! Channel model: path loss times Rayleigh small-scale fading, plus the
//! SNR and achievable-rate formulas used by every other module.
//!
//! Gains are stored as power gains `|h|^2`, with
//! `h = (d / d0)^xi * c` and `c ~ Rayleigh(sigma)`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Per-subchannel radio parameters shared by all sensors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioConstants {
    pub bandwidth_per_subchannel_hz: f64,
    pub noise_psd_w_per_hz: f64,
    pub slot_duration_s: f64,
    pub packet_size_bits: u64,
}

impl RadioConstants {
    /// Noise power over one subchannel, `W * N0`.
    pub fn noise_power_w(&self) -> f64 {
        self.bandwidth_per_subchannel_hz * self.noise_psd_w_per_hz
    }

    /// Spectral load of one packet in bits per Hz of one subchannel-slot.
    pub fn packet_load(&self) -> f64 {
        self.packet_size_bits as f64 / (self.slot_duration_s * self.bandwidth_per_subchannel_hz)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub sensor_positions: Vec<[f64; 2]>,
    pub sink_position: [f64; 2],
    pub path_loss_exponent: f64,
    pub reference_distance_m: f64,
    pub rayleigh_scale: f64,
}

impl Topology {
    pub fn sensors(&self) -> usize {
        self.sensor_positions.len()
    }

    pub fn distance_m(&self, sensor: usize) -> f64 {
        let [x, y] = self.sensor_positions[sensor];
        let [sx, sy] = self.sink_position;
        (x - sx).hypot(y - sy)
    }

    /// Large-scale amplitude factor `(d_k / d0)^xi`.
    pub fn large_scale_factor(&self, sensor: usize) -> f64 {
        (self.distance_m(sensor) / self.reference_distance_m).powf(self.path_loss_exponent)
    }
}

/// Channel power gains for one slot, sensor-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    sensors: usize,
    subchannels: usize,
    gains: Vec<f64>,
    pub slot_index: u64,
}

impl ChannelRealization {
    /// Builds a realization from explicit rows. Panics on ragged rows or
    /// negative/non-finite entries.
    pub fn from_rows(rows: &[Vec<f64>], slot_index: u64) -> Self {
        let sensors = rows.len();
        let subchannels = rows.first().map_or(0, Vec::len);
        assert!(
            rows.iter().all(|r| r.len() == subchannels),
            "ragged channel gain matrix"
        );
        let gains: Vec<f64> = rows.iter().flatten().copied().collect();
        assert!(
            gains.iter().all(|g| g.is_finite() && *g >= 0.0),
            "channel gains must be finite and nonnegative"
        );
        Self {
            sensors,
            subchannels,
            gains,
            slot_index,
        }
    }

    pub fn sensors(&self) -> usize {
        self.sensors
    }

    pub fn subchannels(&self) -> usize {
        self.subchannels
    }

    #[inline]
    pub fn gain(&self, sensor: usize, subchannel: usize) -> f64 {
        self.gains[sensor * self.subchannels + subchannel]
    }

    pub fn row(&self, sensor: usize) -> &[f64] {
        &self.gains[sensor * self.subchannels..(sensor + 1) * self.subchannels]
    }
}

/// Seeded random stream dedicated to channel draws.
///
/// ChaCha8 has a fixed, platform-independent output sequence, and the
/// Rayleigh variate is produced by inverse-CDF from raw 64-bit words, so
/// traces depend only on the seed.
#[derive(Debug, Clone)]
pub struct ChannelStream {
    rng: ChaCha8Rng,
}

impl ChannelStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Uniform variate in `(0, 1]` with 53 bits of resolution.
    pub fn unit_open_closed(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Rayleigh(scale) amplitude via `scale * sqrt(-2 ln u)`.
    pub fn rayleigh(&mut self, scale: f64) -> f64 {
        scale * (-2.0 * self.unit_open_closed().ln()).sqrt()
    }
}

/// Precomputed per-sensor path loss for repeated draws.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    large_scale_power: Vec<f64>,
    subchannels: usize,
    rayleigh_scale: f64,
}

impl ChannelModel {
    pub fn new(topology: &Topology, subchannels: usize) -> Self {
        let large_scale_power = (0..topology.sensors())
            .map(|k| topology.large_scale_factor(k))
            .collect();
        Self {
            large_scale_power,
            subchannels,
            rayleigh_scale: topology.rayleigh_scale,
        }
    }

    /// Draws one slot. Entries are filled sensor-major, subchannel-minor.
    pub fn draw(&self, slot: u64, stream: &mut ChannelStream) -> ChannelRealization {
        let mut gains = Vec::with_capacity(self.large_scale_power.len() * self.subchannels);
        for &large in &self.large_scale_power {
            for _ in 0..self.subchannels {
                let h = large * stream.rayleigh(self.rayleigh_scale);
                gains.push(h * h);
            }
        }
        ChannelRealization {
            sensors: self.large_scale_power.len(),
            subchannels: self.subchannels,
            gains,
            slot_index: slot,
        }
    }
}

pub fn draw_channels(
    topology: &Topology,
    subchannels: usize,
    slot: u64,
    stream: &mut ChannelStream,
) -> ChannelRealization {
    ChannelModel::new(topology, subchannels).draw(slot, stream)
}

/// `p * g / (W * N0)`.
#[inline]
pub fn snr(power_w: f64, gain: f64, constants: &RadioConstants) -> f64 {
    power_w * gain / constants.noise_power_w()
}

/// Bits delivered in one slot: `T_slot * W * log2(1 + snr)`.
#[inline]
pub fn rate_bits_per_slot(power_w: f64, gain: f64, constants: &RadioConstants) -> f64 {
    constants.slot_duration_s
        * constants.bandwidth_per_subchannel_hz
        * snr(power_w, gain, constants).ln_1p()
        / std::f64::consts::LN_2
}
