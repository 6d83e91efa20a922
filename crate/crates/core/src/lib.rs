//! Downlink simulator for a user-centric cell-free massive-MIMO OFDMA
//! network whose serving clusters are formed by an rApp/xApp pair.
//!
//! The pipeline of a drop is: [`topology::build_deployment`] →
//! [`channel::LargeScaleTable`] and RSRP reports → [`ric::xapp_form_clusters`]
//! → per TTI [`scheduler`], [`phy`] ZF precoding and rates → [`power`]
//! energy accounting → O1 KPI aggregation. [`harness`] runs drops and
//! cluster-size sweeps and writes the result files.

pub mod channel;
pub mod config;
pub mod engine;
pub mod error;
pub mod harness;
pub mod phy;
pub mod power;
pub mod ric;
pub mod rng;
pub mod scheduler;
pub mod topology;

pub use config::{RappMode, ScenarioConfig};
pub use engine::{run_drop, run_drop_traced, DropResult, DropTrace};
pub use error::{Error, Result};
pub use harness::{run_sweep, RunConfig, SweepOutcome};
