//! Scaling laws, a discrete-event simulator and bandwidth scenarios for
//! hierarchical detect-and-respond networks.
//!
//! Detectors roam draining regions and report to a hub; the hub that
//! detects a threat recruits responders from peer hubs until it holds
//! `B_crit`, then the responders expand clonally until they meet an
//! antibody target proportional to system mass. How many hubs a system
//! has, and how big each one is, sets the balance between the local
//! (detection) and global (recruitment) costs.

pub mod cli;
pub mod config;
pub mod error;
pub mod output;
pub mod scaling;
pub mod scenario;
pub mod stats;

pub use error::{ModelError, Result};
pub use scaling::{
    ArchitectureSpec, DetectionMode, HubCount, ModelKind, ModelParams, RecruitmentMode,
    TimingBreakdown,
};
pub mod sim;
