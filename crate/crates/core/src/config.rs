//! Scenario configuration file.
//!
//! TOML, with units in key names. Everything except `radio.slot_duration_s`
//! and the `[output]` table is required. See `configs/default.toml` for the
//! bundled two-sensor scenario.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{RadioConstants, Topology};
use crate::error::{Error, FieldError, Result};
use crate::optimizer::assignment_map_count;

/// Thermal noise density at 290 K, -174 dBm/Hz.
pub const THERMAL_NOISE_W_PER_HZ: f64 = 3.981_071_705_534_972e-21;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub horizon_slots: u64,
    /// Drift-plus-penalty weight on power.
    pub v: f64,
    pub radio: RadioConfig,
    pub topology: TopologyConfig,
    pub sensors: Vec<SensorConfig>,
    #[serde(default, skip_serializing_if = "OutputConfig::is_empty")]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioConfig {
    pub subchannels: usize,
    pub bandwidth_hz: f64,
    pub noise_psd_w_per_hz: f64,
    #[serde(default = "one_second")]
    pub slot_duration_s: f64,
    pub packet_bytes: u64,
}

fn one_second() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyConfig {
    pub sink_position_m: [f64; 2],
    /// Signed exponent applied as `(d / d0)^xi`.
    pub path_loss_exponent: f64,
    pub reference_distance_m: f64,
    pub rayleigh_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorConfig {
    pub position_m: [f64; 2],
    pub p_max_w: f64,
    pub aoi_max_slots: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
}

impl OutputConfig {
    fn is_empty(&self) -> bool {
        self.trace.is_none() && self.summary.is_none()
    }
}

impl ScenarioConfig {
    /// Two sensors 300 m from the sink on orthogonal axes, two 180 kHz
    /// subchannels, 600-byte packets, AoI cap 4.
    pub fn default_scenario() -> Self {
        let sensor = |x, y| SensorConfig {
            position_m: [x, y],
            p_max_w: 1.0,
            aoi_max_slots: 4.0,
        };
        Self {
            seed: 1,
            horizon_slots: 100_000,
            v: 100.0,
            radio: RadioConfig {
                subchannels: 2,
                bandwidth_hz: 180_000.0,
                noise_psd_w_per_hz: THERMAL_NOISE_W_PER_HZ,
                slot_duration_s: 1.0,
                packet_bytes: 600,
            },
            topology: TopologyConfig {
                sink_position_m: [0.0, 0.0],
                path_loss_exponent: -3.0,
                reference_distance_m: 1.0,
                rayleigh_scale: 0.5,
            },
            sensors: vec![sensor(0.0, 300.0), sensor(300.0, 0.0)],
            output: OutputConfig::default(),
        }
    }

    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            message: e.to_string().trim_end().to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn sensors(&self) -> usize {
        self.sensors.len()
    }

    pub fn subchannels(&self) -> usize {
        self.radio.subchannels
    }

    pub fn radio_constants(&self) -> RadioConstants {
        RadioConstants {
            bandwidth_per_subchannel_hz: self.radio.bandwidth_hz,
            noise_psd_w_per_hz: self.radio.noise_psd_w_per_hz,
            slot_duration_s: self.radio.slot_duration_s,
            packet_size_bits: self.radio.packet_bytes * 8,
        }
    }

    pub fn topology(&self) -> Topology {
        Topology {
            sensor_positions: self.sensors.iter().map(|s| s.position_m).collect(),
            sink_position: self.topology.sink_position_m,
            path_loss_exponent: self.topology.path_loss_exponent,
            reference_distance_m: self.topology.reference_distance_m,
            rayleigh_scale: self.topology.rayleigh_scale,
        }
    }

    pub fn p_max(&self) -> Vec<f64> {
        self.sensors.iter().map(|s| s.p_max_w).collect()
    }

    pub fn aoi_caps(&self) -> Vec<f64> {
        self.sensors.iter().map(|s| s.aoi_max_slots).collect()
    }

    /// Checks every field and reports all offenders at once.
    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        let mut positive = |field: String, value: f64| {
            if !(value.is_finite() && value > 0.0) {
                errors.push(FieldError::new(
                    field,
                    format!("must be positive, got {value}"),
                ));
            }
        };
        positive("radio.bandwidth_hz".into(), self.radio.bandwidth_hz);
        positive(
            "radio.noise_psd_w_per_hz".into(),
            self.radio.noise_psd_w_per_hz,
        );
        positive("radio.slot_duration_s".into(), self.radio.slot_duration_s);
        positive(
            "topology.reference_distance_m".into(),
            self.topology.reference_distance_m,
        );
        positive(
            "topology.rayleigh_scale".into(),
            self.topology.rayleigh_scale,
        );
        for (k, s) in self.sensors.iter().enumerate() {
            positive(format!("sensors[{k}].p_max_w"), s.p_max_w);
        }

        if self.radio.packet_bytes == 0 {
            errors.push(FieldError::new("radio.packet_bytes", "must be at least 1"));
        }
        if self.horizon_slots == 0 {
            errors.push(FieldError::new("horizon_slots", "must be at least 1"));
        }
        if !(self.v.is_finite() && self.v >= 0.0) {
            errors.push(FieldError::new(
                "v",
                format!("must be nonnegative, got {}", self.v),
            ));
        }
        if !self.topology.path_loss_exponent.is_finite() {
            errors.push(FieldError::new(
                "topology.path_loss_exponent",
                "must be finite",
            ));
        }
        let sink = self.topology.sink_position_m;
        if !sink.iter().all(|c| c.is_finite()) {
            errors.push(FieldError::new(
                "topology.sink_position_m",
                "must be finite",
            ));
        }
        if self.sensors.is_empty() {
            errors.push(FieldError::new(
                "sensors",
                "at least one sensor is required",
            ));
        }
        for (k, s) in self.sensors.iter().enumerate() {
            let [x, y] = s.position_m;
            if !(x.is_finite() && y.is_finite()) {
                errors.push(FieldError::new(
                    format!("sensors[{k}].position_m"),
                    "must be finite",
                ));
            } else if (x - sink[0]).hypot(y - sink[1]) <= 0.0 {
                errors.push(FieldError::new(
                    format!("sensors[{k}].position_m"),
                    "coincides with the sink",
                ));
            }
            if !(s.aoi_max_slots.is_finite() && s.aoi_max_slots > 0.5) {
                errors.push(FieldError::new(
                    format!("sensors[{k}].aoi_max_slots"),
                    format!("must exceed 1/2, got {}", s.aoi_max_slots),
                ));
            }
        }
        if self.radio.subchannels == 0 {
            errors.push(FieldError::new("radio.subchannels", "must be at least 1"));
        } else if let Err(e) = assignment_map_count(self.sensors.len(), self.radio.subchannels) {
            errors.push(FieldError::new("radio.subchannels", e.to_string()));
        }

        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(errors))
        }
    }
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ScenarioConfig::from_toml_str(&text, path)
}

pub fn save_config(config: &ScenarioConfig, path: &Path) -> Result<()> {
    fs::write(path, config.to_toml_string()).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
