//! Transmit-power minimization for status-update sensor networks under
//! time-average Age-of-Information constraints.
//!
//! A slotted network of sensors shares orthogonal subchannels to a sink.
//! Each slot the controller decides which sensors sample, how subchannels are
//! assigned, and how much power each subchannel carries, by minimizing a
//! drift-plus-penalty bound over virtual queues that enforce the AoI caps.
//!
//! Module map:
//!
//! - [`channel`]: path loss, Rayleigh fading, SNR and rate
//! - [`aoi`]: age recursion and time-average AoI
//! - [`queues`]: virtual queues and the Lyapunov function
//! - [`power`]: minimum-power water-filling for one packet per slot
//! - [`optimizer`]: exhaustive per-slot subproblem
//! - [`controller`]: the closed loop and the per-slot bound audit
//! - [`config`], [`harness`]: scenario files, sweeps and CSV output

pub mod aoi;
pub mod channel;
pub mod config;
pub mod controller;
pub mod error;
pub mod harness;
pub mod optimizer;
pub mod power;
pub mod queues;

pub use config::{load_config, save_config, ScenarioConfig};
pub use controller::{run_episode, run_episode_with, EpisodeMetrics, EpisodeOptions};
pub use error::{Error, Result};
pub use harness::{run_sweep, write_summary, write_trace, SweepTable};
