//! The four bandwidth regimes: detector-to-hub and hub-to-hub channels,
//! each limited or unlimited. Each regime is scored by evaluating the fully
//! modular, non-modular and sub-modular architectures in contention mode.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{ModelError, Result};
use crate::scaling::{
    optimal_submodular_exponent, total_response_time, ArchitectureSpec, DetectionMode, ModelKind,
    ModelParams, TimingBreakdown,
};

/// Relative spread below which all three architectures are declared tied.
pub const TIE_EPSILON: f64 = 1e-9;

pub const DEFAULT_LIMITED_RHO: f64 = 1.0;
pub const DEFAULT_LIMITED_LAMBDA: f64 = 1.0;
pub const DEFAULT_MODEL3_INTERVALS: u32 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    Limited,
    Unlimited,
}

impl Channel {
    fn as_str(&self) -> &'static str {
        match self {
            Channel::Limited => "limited",
            Channel::Unlimited => "unlimited",
        }
    }
}

/// Which channels are bandwidth-limited, and what a limited channel costs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioProfile {
    pub detector_channel: Channel,
    pub hub_channel: Channel,
    limited_rho: f64,
    limited_lambda: f64,
}

impl ScenarioProfile {
    pub fn new(
        detector_channel: Channel,
        hub_channel: Channel,
        limited_rho: f64,
        limited_lambda: f64,
    ) -> Result<Self> {
        if !(limited_rho > 0.0 && limited_rho.is_finite()) {
            return Err(ModelError::invalid(
                "limited_rho",
                format!("{limited_rho} must be > 0"),
            ));
        }
        if !(limited_lambda > 0.0 && limited_lambda.is_finite()) {
            return Err(ModelError::invalid(
                "limited_lambda",
                format!("{limited_lambda} must be > 0"),
            ));
        }
        Ok(Self {
            detector_channel,
            hub_channel,
            limited_rho,
            limited_lambda,
        })
    }

    /// The four regimes in canonical order: both unlimited, detector
    /// channel limited, hub channel limited, both limited.
    pub fn all(limited_rho: f64, limited_lambda: f64) -> Result<[Self; 4]> {
        use Channel::*;
        Ok([
            Self::new(Unlimited, Unlimited, limited_rho, limited_lambda)?,
            Self::new(Limited, Unlimited, limited_rho, limited_lambda)?,
            Self::new(Unlimited, Limited, limited_rho, limited_lambda)?,
            Self::new(Limited, Limited, limited_rho, limited_lambda)?,
        ])
    }

    pub fn limited_rho(&self) -> f64 {
        self.limited_rho
    }

    pub fn limited_lambda(&self) -> f64 {
        self.limited_lambda
    }

    pub fn with_coefficients(&self, limited_rho: f64, limited_lambda: f64) -> Result<Self> {
        Self::new(
            self.detector_channel,
            self.hub_channel,
            limited_rho,
            limited_lambda,
        )
    }

    /// `detector-hub` naming, e.g. `limited-unlimited`.
    pub fn name(&self) -> String {
        format!(
            "{}-{}",
            self.detector_channel.as_str(),
            self.hub_channel.as_str()
        )
    }

    /// `params` with rho and lambda set by the channel limits.
    pub fn apply(&self, params: &ModelParams) -> ModelParams {
        ModelParams {
            contention_coefficient: match self.detector_channel {
                Channel::Limited => self.limited_rho,
                Channel::Unlimited => 0.0,
            },
            contact_latency: match self.hub_channel {
                Channel::Limited => self.limited_lambda,
                Channel::Unlimited => 0.0,
            },
            ..*params
        }
    }
}

impl Default for ScenarioProfile {
    fn default() -> Self {
        Self {
            detector_channel: Channel::Limited,
            hub_channel: Channel::Limited,
            limited_rho: DEFAULT_LIMITED_RHO,
            limited_lambda: DEFAULT_LIMITED_LAMBDA,
        }
    }
}

impl fmt::Display for ScenarioProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for ScenarioProfile {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        let parse = |part: &str| match part {
            "limited" => Ok(Channel::Limited),
            "unlimited" => Ok(Channel::Unlimited),
            _ => Err(ModelError::invalid(
                "profile",
                format!("unknown profile `{s}` (expected <limited|unlimited>-<limited|unlimited>)"),
            )),
        };
        let (detector, hub) = s
            .split_once('-')
            .ok_or_else(|| ModelError::invalid("profile", format!("unknown profile `{s}`")))?;
        Self::new(
            parse(detector)?,
            parse(hub)?,
            DEFAULT_LIMITED_RHO,
            DEFAULT_LIMITED_LAMBDA,
        )
    }
}

/// Exponent used for the sub-modular architecture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model3Exponent {
    /// Best strictly sub-modular exponent on a grid with this many intervals,
    /// re-optimised at every mass.
    Auto {
        intervals: u32,
    },
    Fixed(f64),
}

impl Default for Model3Exponent {
    fn default() -> Self {
        Model3Exponent::Auto {
            intervals: DEFAULT_MODEL3_INTERVALS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Winner {
    Model(ModelKind),
    Tie,
}

impl Winner {
    pub fn label(&self) -> &'static str {
        match self {
            Winner::Model(kind) => kind.label(),
            Winner::Tie => "tie",
        }
    }
}

impl fmt::Display for Winner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassVerdict {
    pub mass: f64,
    pub winner: Winner,
    pub model1: TimingBreakdown,
    pub model2: TimingBreakdown,
    pub model3: TimingBreakdown,
    pub model3_exponent: f64,
}

impl MassVerdict {
    pub fn timing(&self, kind: ModelKind) -> &TimingBreakdown {
        match kind {
            ModelKind::FullyModular => &self.model1,
            ModelKind::NonModular => &self.model2,
            ModelKind::SubModular => &self.model3,
        }
    }

    pub fn exponent(&self, kind: ModelKind) -> f64 {
        match kind {
            ModelKind::FullyModular => 1.0,
            ModelKind::NonModular => 0.0,
            ModelKind::SubModular => self.model3_exponent,
        }
    }

    /// 1-based rank of `kind` by total time; equal totals share a rank.
    pub fn rank(&self, kind: ModelKind) -> usize {
        let own = self.timing(kind).t_total();
        1 + [self.model1, self.model2, self.model3]
            .iter()
            .filter(|t| t.t_total() < own)
            .count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioVerdict {
    pub profile: ScenarioProfile,
    pub per_mass: Vec<MassVerdict>,
    /// Winner at the largest mass evaluated.
    pub overall: Winner,
}

/// All three within `TIE_EPSILON` relative spread is a tie. Otherwise the
/// minimum wins; equal minima go to the smaller exponent.
fn pick_winner(candidates: [(ModelKind, f64, f64); 3]) -> Winner {
    let totals = candidates.map(|(_, _, t)| t);
    let min = totals.iter().copied().fold(f64::INFINITY, f64::min);
    let max = totals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max - min <= TIE_EPSILON * max.abs().max(f64::MIN_POSITIVE) {
        return Winner::Tie;
    }
    let mut best = candidates
        .iter()
        .filter(|(_, _, t)| *t == min)
        .collect::<Vec<_>>();
    best.sort_by(|x, y| x.1.total_cmp(&y.1));
    Winner::Model(best[0].0)
}

fn evaluate_mass(
    mass: f64,
    profile: &ScenarioProfile,
    template: &ArchitectureSpec,
    params: &ModelParams,
    model3: Model3Exponent,
) -> Result<MassVerdict> {
    let params = profile.apply(params);
    let mode = DetectionMode::Contention;
    let model1 = total_response_time(mass, &template.with_exponent(1.0)?, &params, mode)?;
    let model2 = total_response_time(mass, &template.with_exponent(0.0)?, &params, mode)?;
    let (model3_exponent, model3) = match model3 {
        Model3Exponent::Auto { intervals } => {
            optimal_submodular_exponent(mass, template, &params, mode, intervals)?
        }
        Model3Exponent::Fixed(a) => {
            if !(a > 0.0 && a < 1.0) {
                return Err(ModelError::invalid(
                    "model3_exponent",
                    format!("{a} must lie strictly between 0 and 1"),
                ));
            }
            (
                a,
                total_response_time(mass, &template.with_exponent(a)?, &params, mode)?,
            )
        }
    };
    let winner = pick_winner([
        (ModelKind::FullyModular, 1.0, model1.t_total()),
        (ModelKind::NonModular, 0.0, model2.t_total()),
        (ModelKind::SubModular, model3_exponent, model3.t_total()),
    ]);
    Ok(MassVerdict {
        mass,
        winner,
        model1,
        model2,
        model3,
        model3_exponent,
    })
}

/// Ranks the three architectures at every mass under one bandwidth regime.
pub fn evaluate_scenario(
    profile: &ScenarioProfile,
    masses: &[f64],
    template: &ArchitectureSpec,
    params: &ModelParams,
    model3: Model3Exponent,
) -> Result<ScenarioVerdict> {
    if masses.is_empty() {
        return Err(ModelError::invalid("masses", "mass list must be non-empty"));
    }
    let per_mass: Vec<MassVerdict> = masses
        .par_iter()
        .map(|&m| evaluate_mass(m, profile, template, params, model3))
        .collect::<Result<_>>()?;
    let overall = per_mass
        .iter()
        .max_by(|a, b| a.mass.total_cmp(&b.mass))
        .map(|v| v.winner)
        .unwrap_or(Winner::Tie);
    Ok(ScenarioVerdict {
        profile: *profile,
        per_mass,
        overall,
    })
}

/// Overall winner of each of the four regimes, in canonical order.
pub fn scenario_table(
    params: &ModelParams,
    masses: &[f64],
    template: &ArchitectureSpec,
    limited_rho: f64,
    limited_lambda: f64,
    model3: Model3Exponent,
) -> Result<Vec<ScenarioVerdict>> {
    ScenarioProfile::all(limited_rho, limited_lambda)?
        .iter()
        .map(|p| evaluate_scenario(p, masses, template, params, model3))
        .collect()
}
