//! Discrete-event realisation of one architecture.
//!
//! The domain is a `d`-cube of volume `c_v * M`, tiled by a near-square grid
//! into as many equal draining regions as the rounded hub count. An infection
//! loads detectors at a site; the first detector to reach its hub starts
//! recruitment, and the last peer contact starts clonal expansion. All three
//! phases run off one time-ordered event queue so the log is globally
//! ordered.

mod log;
mod queue;
mod world;

pub use log::{EventKind, EventLog, EventRecord};
pub use queue::EventQueue;
pub use world::{
    grid_shape, simulate, Detector, DetectorState, Hub, Movement, Point, Region, SimConfig,
    SimWorld, DEFAULT_WALK_STEP_FRACTION,
};
