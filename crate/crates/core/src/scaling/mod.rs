//! Closed-form scaling laws for hub-and-region detection networks.
//!
//! A single exponent `a` fixes how a system of mass `M` splits its hub
//! tissue: `N(M) = n0 * M^a` hubs, each of size `S(M) = s0 * M^(1 - a)`.
//! `a = 1` is the fully modular network, `a = 0` the non-modular one and
//! anything in between is sub-modular. Every latency below is a pure
//! function of `(M, ArchitectureSpec, ModelParams)`.

mod geometry;
mod laws;
mod optimize;

use std::fmt;
use std::str::FromStr;

use crate::error::{ModelError, Result};

pub use geometry::{estimate_mean_center_distance, mean_center_distance, GEOMETRY_SAMPLES};
pub use laws::{
    activated_pool, antibody_requirement, bcrit, check_feasible, detection_time, dr_extent,
    expansion_time, hub_count, hub_size, local_cognate_pool, per_hub_contribution,
    recruitment_demand, recruitment_time, region_volume, total_response_time,
};
pub use optimize::{exponent_grid, optimal_exponent, optimal_submodular_exponent, sweep, SweepRow};

/// Time for `B_crit` responders to reach the antibody target under the
/// default calibration, in units of the doubling time's time unit.
pub const BASELINE_EXPANSION_TIME: f64 = 4.0;

/// How the hub count and hub size of a system grow with its mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArchitectureSpec {
    exponent: f64,
    base_hub_count: f64,
    base_hub_size: f64,
    dimension: u8,
}

impl ArchitectureSpec {
    pub fn new(
        exponent: f64,
        base_hub_count: f64,
        base_hub_size: f64,
        dimension: u8,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&exponent) {
            return Err(ModelError::invalid(
                "exponent",
                format!("{exponent} not in [0, 1]"),
            ));
        }
        if !(base_hub_count >= 1.0 && base_hub_count.is_finite()) {
            return Err(ModelError::invalid(
                "base_hub_count",
                format!("{base_hub_count} must be >= 1"),
            ));
        }
        if !(base_hub_size > 0.0 && base_hub_size.is_finite()) {
            return Err(ModelError::invalid(
                "base_hub_size",
                format!("{base_hub_size} must be > 0"),
            ));
        }
        if !(1..=3).contains(&dimension) {
            return Err(ModelError::invalid(
                "dimension",
                format!("{dimension} not in {{1, 2, 3}}"),
            ));
        }
        Ok(Self {
            exponent,
            base_hub_count,
            base_hub_size,
            dimension,
        })
    }

    /// Same baseline, different exponent.
    pub fn with_exponent(&self, exponent: f64) -> Result<Self> {
        Self::new(
            exponent,
            self.base_hub_count,
            self.base_hub_size,
            self.dimension,
        )
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn base_hub_count(&self) -> f64 {
        self.base_hub_count
    }

    pub fn base_hub_size(&self) -> f64 {
        self.base_hub_size
    }

    pub fn dimension(&self) -> u8 {
        self.dimension
    }

    pub fn model(&self) -> ModelKind {
        ModelKind::from_exponent(self.exponent)
    }
}

impl Default for ArchitectureSpec {
    fn default() -> Self {
        Self {
            exponent: 0.5,
            base_hub_count: 1.0,
            base_hub_size: 1e6,
            dimension: 2,
        }
    }
}

/// The three named architectures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    /// Hub count grows linearly, hub size fixed (`a = 1`).
    FullyModular,
    /// Hub count fixed, hub size grows linearly (`a = 0`).
    NonModular,
    /// Both grow sublinearly (`0 < a < 1`).
    SubModular,
}

impl ModelKind {
    pub fn from_exponent(a: f64) -> Self {
        if a >= 1.0 {
            ModelKind::FullyModular
        } else if a <= 0.0 {
            ModelKind::NonModular
        } else {
            ModelKind::SubModular
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ModelKind::FullyModular => "model1",
            ModelKind::NonModular => "model2",
            ModelKind::SubModular => "model3",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Which local cost the detection phase pays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetectionMode {
    /// Travel time from a uniform point of the draining region to its hub.
    Spatial,
    /// Congestion of the detector-to-hub channel, proportional to the
    /// number of detectors sharing a hub.
    Contention,
}

impl DetectionMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DetectionMode::Spatial => "spatial",
            DetectionMode::Contention => "contention",
        }
    }
}

impl FromStr for DetectionMode {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spatial" => Ok(DetectionMode::Spatial),
            "contention" => Ok(DetectionMode::Contention),
            other => Err(ModelError::invalid(
                "mode",
                format!("unknown mode `{other}` (expected spatial|contention)"),
            )),
        }
    }
}

impl fmt::Display for DetectionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How the infected hub's peer contacts compose in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RecruitmentMode {
    /// Contacts queue on the infected hub's outbound channel: `lambda * k`.
    #[default]
    Serial,
    /// Contacted hubs forward the request, doubling each round: `lambda * log2(k + 1)`.
    Tree,
}

impl RecruitmentMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            RecruitmentMode::Serial => "serial",
            RecruitmentMode::Tree => "tree",
        }
    }
}

impl FromStr for RecruitmentMode {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "serial" => Ok(RecruitmentMode::Serial),
            "tree" => Ok(RecruitmentMode::Tree),
            other => Err(ModelError::invalid(
                "recruitment",
                format!("unknown recruitment mode `{other}` (expected serial|tree)"),
            )),
        }
    }
}

/// Rate constants shared by every architecture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Fraction of hub cells specific to a given antigen.
    pub cognate_frequency: f64,
    /// Required activated responders per unit mass.
    pub bcrit_coefficient: f64,
    /// Antibody units required per unit mass.
    pub antibody_coefficient: f64,
    /// Antibody units produced per responder.
    pub plasma_yield: f64,
    pub doubling_time: f64,
    pub detector_speed: f64,
    /// Latency per peer hub contacted. Zero means unlimited hub bandwidth.
    pub contact_latency: f64,
    /// Latency per detector sharing a hub. Zero means unlimited detector bandwidth.
    pub contention_coefficient: f64,
    /// Domain volume per unit mass.
    pub body_volume_coefficient: f64,
    /// Weight of the distance travelled by recruited cells; zero by default.
    pub transit_coefficient: f64,
    pub recruitment: RecruitmentMode,
}

impl ModelParams {
    /// Antibody coefficient for which expansion from `B_crit` takes exactly
    /// `BASELINE_EXPANSION_TIME` at every mass.
    pub fn calibrated_antibody_coefficient(
        bcrit_coefficient: f64,
        plasma_yield: f64,
        doubling_time: f64,
    ) -> f64 {
        plasma_yield * bcrit_coefficient * (BASELINE_EXPANSION_TIME / doubling_time).exp2()
    }

    /// Re-derives `antibody_coefficient` from the other constants.
    pub fn recalibrated(mut self) -> Self {
        self.antibody_coefficient = Self::calibrated_antibody_coefficient(
            self.bcrit_coefficient,
            self.plasma_yield,
            self.doubling_time,
        );
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("cognate_frequency", self.cognate_frequency),
            ("bcrit_coefficient", self.bcrit_coefficient),
            ("plasma_yield", self.plasma_yield),
            ("doubling_time", self.doubling_time),
            ("detector_speed", self.detector_speed),
            ("body_volume_coefficient", self.body_volume_coefficient),
            // derived from the three above by default, so checked after them
            ("antibody_coefficient", self.antibody_coefficient),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ModelError::invalid(name, format!("{value} must be > 0")));
            }
        }
        let non_negative = [
            ("contact_latency", self.contact_latency),
            ("contention_coefficient", self.contention_coefficient),
            ("transit_coefficient", self.transit_coefficient),
        ];
        for (name, value) in non_negative {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(ModelError::invalid(name, format!("{value} must be >= 0")));
            }
        }
        if self.cognate_frequency > 1.0 {
            return Err(ModelError::invalid(
                "cognate_frequency",
                format!("{} must be <= 1", self.cognate_frequency),
            ));
        }
        Ok(())
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            cognate_frequency: 1e-6,
            bcrit_coefficient: 0.5,
            antibody_coefficient: 0.0,
            plasma_yield: 1.0,
            doubling_time: 1.0,
            detector_speed: 1.0,
            contact_latency: 0.5,
            contention_coefficient: 1.0,
            body_volume_coefficient: 1.0,
            transit_coefficient: 0.0,
            recruitment: RecruitmentMode::Serial,
        }
        .recalibrated()
    }
}

/// Hub count as a real number and as the integer the simulator builds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HubCount {
    pub continuous: f64,
    pub rounded: u64,
}

/// Detect, recruit and expand latencies. `total` is always their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingBreakdown {
    detect: f64,
    recruit: f64,
    expand: f64,
    total: f64,
}

impl TimingBreakdown {
    pub fn new(detect: f64, recruit: f64, expand: f64) -> Result<Self> {
        for (name, v) in [
            ("t_detect", detect),
            ("t_recruit", recruit),
            ("t_expand", expand),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ModelError::Domain(format!(
                    "{name} = {v} must be finite and >= 0"
                )));
            }
        }
        Ok(Self {
            detect,
            recruit,
            expand,
            total: detect + recruit + expand,
        })
    }

    pub fn t_detect(&self) -> f64 {
        self.detect
    }

    pub fn t_recruit(&self) -> f64 {
        self.recruit
    }

    pub fn t_expand(&self) -> f64 {
        self.expand
    }

    pub fn t_total(&self) -> f64 {
        self.total
    }
}
