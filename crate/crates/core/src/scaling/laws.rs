use super::{
    mean_center_distance, ArchitectureSpec, DetectionMode, HubCount, ModelParams, RecruitmentMode,
    TimingBreakdown,
};
use crate::error::{ModelError, Result};

const FEASIBILITY_SLACK: f64 = 1e-12;
const CEIL_SLACK: f64 = 1e-9;

fn check_mass(m: f64) -> Result<()> {
    if m > 0.0 && m.is_finite() {
        Ok(())
    } else {
        Err(ModelError::Domain(format!(
            "mass M = {m} must be finite and > 0"
        )))
    }
}

/// `ceil` that ignores excess below `CEIL_SLACK` relative, so `1 + 1e-16`
/// counts as one.
fn ceil_tolerant(x: f64) -> f64 {
    (x - CEIL_SLACK * x.abs().max(1.0)).ceil()
}

pub fn antibody_requirement(m: f64, params: &ModelParams) -> Result<f64> {
    check_mass(m)?;
    Ok(params.antibody_coefficient * m)
}

/// Required activated responders, `B_crit(M) = beta * M`.
pub fn bcrit(m: f64, params: &ModelParams) -> Result<f64> {
    check_mass(m)?;
    Ok(params.bcrit_coefficient * m)
}

pub fn hub_count(m: f64, arch: &ArchitectureSpec) -> Result<HubCount> {
    check_mass(m)?;
    let continuous = arch.base_hub_count() * m.powf(arch.exponent());
    let rounded = continuous.round().max(1.0) as u64;
    Ok(HubCount {
        continuous,
        rounded,
    })
}

pub fn hub_size(m: f64, arch: &ArchitectureSpec) -> Result<f64> {
    check_mass(m)?;
    Ok(arch.base_hub_size() * m.powf(1.0 - arch.exponent()))
}

/// Volume of one draining region: `c_v * M / N(M)`.
///
/// Written as `(c_v / n0) * M^(1 - a)` so that the fully modular case is
/// bit-identical at every mass.
pub fn region_volume(m: f64, arch: &ArchitectureSpec, params: &ModelParams) -> Result<f64> {
    check_mass(m)?;
    Ok(params.body_volume_coefficient / arch.base_hub_count() * m.powf(1.0 - arch.exponent()))
}

/// Linear extent of one draining region.
pub fn dr_extent(m: f64, arch: &ArchitectureSpec, params: &ModelParams) -> Result<f64> {
    let volume = region_volume(m, arch, params)?;
    Ok(root(volume, arch.dimension()))
}

fn root(x: f64, dimension: u8) -> f64 {
    match dimension {
        1 => x,
        2 => x.sqrt(),
        _ => x.cbrt(),
    }
}

pub fn detection_time(
    m: f64,
    arch: &ArchitectureSpec,
    params: &ModelParams,
    mode: DetectionMode,
) -> Result<f64> {
    match mode {
        DetectionMode::Spatial => {
            let extent = dr_extent(m, arch, params)?;
            Ok(mean_center_distance(arch.dimension()) * extent / params.detector_speed)
        }
        DetectionMode::Contention => {
            check_mass(m)?;
            // detectors per hub = M / N(M); detector density is folded into rho
            let per_hub = m.powf(1.0 - arch.exponent()) / arch.base_hub_count();
            Ok(params.contention_coefficient * per_hub)
        }
    }
}

/// Cognate responders resident in a single hub.
pub fn local_cognate_pool(m: f64, arch: &ArchitectureSpec, params: &ModelParams) -> Result<f64> {
    Ok(params.cognate_frequency * hub_size(m, arch)?)
}

/// Cognate responders a recruited peer hub contributes. Hubs are uniform, so
/// this equals the local pool.
pub fn per_hub_contribution(m: f64, arch: &ArchitectureSpec, params: &ModelParams) -> Result<f64> {
    local_cognate_pool(m, arch, params)
}

/// Fails when the whole system holds fewer cognate responders than `B_crit`.
pub fn check_feasible(arch: &ArchitectureSpec, params: &ModelParams) -> Result<()> {
    params.validate()?;
    let pool = params.cognate_frequency * arch.base_hub_count() * arch.base_hub_size();
    if pool < params.bcrit_coefficient * (1.0 - FEASIBILITY_SLACK) {
        return Err(ModelError::Infeasible {
            pool,
            required: params.bcrit_coefficient,
        });
    }
    Ok(())
}

/// Number of peer hubs the infected hub must contact to reach `B_crit`.
pub fn recruitment_demand(m: f64, arch: &ArchitectureSpec, params: &ModelParams) -> Result<u64> {
    check_feasible(arch, params)?;
    let per_hub = per_hub_contribution(m, arch, params)?;
    let shortfall_in_hubs = bcrit(m, params)? / per_hub - 1.0;
    let k = ceil_tolerant(shortfall_in_hubs).max(0.0) as u64;
    let peers = hub_count(m, arch)?.rounded - 1;
    Ok(k.min(peers))
}

pub fn recruitment_time(m: f64, arch: &ArchitectureSpec, params: &ModelParams) -> Result<f64> {
    let k = recruitment_demand(m, arch, params)?;
    let contacts = match params.recruitment {
        RecruitmentMode::Serial => k as f64,
        RecruitmentMode::Tree => (k as f64 + 1.0).log2(),
    };
    let mut t = params.contact_latency * contacts;
    if params.transit_coefficient > 0.0 && k > 0 {
        // radius of the ball holding k regions around the infected hub
        let reach = dr_extent(m, arch, params)? * root(k as f64, arch.dimension());
        t += params.transit_coefficient * reach / params.detector_speed;
    }
    Ok(t)
}

/// Continuous doubling time to grow `initial` responders into `target`.
pub fn expansion_time(initial: f64, target: f64, doubling_time: f64) -> Result<f64> {
    if !(initial > 0.0 && target > 0.0) {
        return Err(ModelError::Domain(format!(
            "populations must be > 0 (initial {initial}, target {target})"
        )));
    }
    if doubling_time.is_nan() || doubling_time <= 0.0 {
        return Err(ModelError::Domain(format!(
            "doubling time {doubling_time} must be > 0"
        )));
    }
    Ok((doubling_time * (target / initial).log2()).max(0.0))
}

/// Responders that start clonal expansion: everything the local and recruited
/// hubs can supply, saturating at `B_crit`.
pub fn activated_pool(m: f64, arch: &ArchitectureSpec, params: &ModelParams) -> Result<f64> {
    let k = recruitment_demand(m, arch, params)?;
    let per_hub = per_hub_contribution(m, arch, params)?;
    let available = per_hub * (k as f64 + 1.0);
    Ok(available.min(bcrit(m, params)?))
}

pub fn total_response_time(
    m: f64,
    arch: &ArchitectureSpec,
    params: &ModelParams,
    mode: DetectionMode,
) -> Result<TimingBreakdown> {
    check_feasible(arch, params)?;
    let detect = detection_time(m, arch, params, mode)?;
    let recruit = recruitment_time(m, arch, params)?;
    let target = antibody_requirement(m, params)? / params.plasma_yield;
    let expand = expansion_time(
        activated_pool(m, arch, params)?,
        target,
        params.doubling_time,
    )?;
    TimingBreakdown::new(detect, recruit, expand)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arch(a: f64, n0: f64, s0: f64, d: u8) -> ArchitectureSpec {
        ArchitectureSpec::new(a, n0, s0, d).unwrap()
    }

    #[test]
    fn antibody_is_linear_in_mass() {
        let p = ModelParams {
            antibody_coefficient: 1.0,
            ..ModelParams::default()
        };
        assert_eq!(antibody_requirement(1.0, &p).unwrap(), 1.0);
        assert_eq!(antibody_requirement(25000.0, &p).unwrap(), 25000.0);
        let p = ModelParams {
            antibody_coefficient: 2.5,
            ..p
        };
        assert_eq!(antibody_requirement(4.0, &p).unwrap(), 10.0);
        assert!(antibody_requirement(0.0, &p).is_err());
        assert!(antibody_requirement(-3.0, &p).is_err());
    }

    #[test]
    fn hub_count_examples() {
        let c = hub_count(4.0, &arch(1.0, 2.0, 1.0, 2)).unwrap();
        assert_eq!(c.continuous, 8.0);
        assert_eq!(c.rounded, 8);
        let c = hub_count(1000.0, &arch(0.0, 2.0, 1.0, 2)).unwrap();
        assert_eq!(c.continuous, 2.0);
        assert_eq!(
            hub_count(16.0, &arch(0.5, 1.0, 1.0, 2)).unwrap().continuous,
            4.0
        );
        // sub-baseline masses still get one hub
        assert_eq!(hub_count(0.01, &arch(1.0, 1.0, 1.0, 2)).unwrap().rounded, 1);
    }

    #[test]
    fn hub_size_examples() {
        let s = 7.0;
        assert_eq!(hub_size(4.0, &arch(0.0, 1.0, s, 2)).unwrap(), 4.0 * s);
        assert_eq!(hub_size(1000.0, &arch(1.0, 1.0, s, 2)).unwrap(), s);
        assert_eq!(hub_size(16.0, &arch(0.5, 1.0, 3.0, 2)).unwrap(), 12.0);
    }

    #[test]
    fn dr_extent_examples() {
        let p = ModelParams::default();
        assert_eq!(dr_extent(100.0, &arch(0.0, 1.0, 1e6, 2), &p).unwrap(), 10.0);
        assert_eq!(dr_extent(16.0, &arch(0.5, 1.0, 1e6, 2), &p).unwrap(), 2.0);
        let p = ModelParams {
            body_volume_coefficient: 3.0,
            ..p
        };
        let modular = arch(1.0, 2.0, 1e6, 3);
        let base = dr_extent(1.0, &modular, &p).unwrap();
        assert!((base - 1.5f64.cbrt()).abs() < 1e-15);
        for m in [0.5, 10.0, 1e6] {
            assert_eq!(dr_extent(m, &modular, &p).unwrap(), base);
        }
    }

    #[test]
    fn contention_detection_is_per_hub_load() {
        let p = ModelParams {
            contention_coefficient: 1.0,
            ..ModelParams::default()
        };
        let t = detection_time(
            100.0,
            &arch(0.0, 2.0, 1e6, 2),
            &p,
            DetectionMode::Contention,
        )
        .unwrap();
        assert_eq!(t, 50.0);
    }

    #[test]
    fn local_pool_examples() {
        let p = ModelParams::default();
        assert_eq!(
            local_cognate_pool(1.0, &arch(0.5, 1.0, 1e6, 2), &p).unwrap(),
            1e-6 * 1e6
        );
        let non_modular = arch(0.0, 1.0, 1e6, 2);
        let ratio = local_cognate_pool(4.0, &non_modular, &p).unwrap()
            / local_cognate_pool(1.0, &non_modular, &p).unwrap();
        assert!((ratio - 4.0).abs() < 1e-12);
        let modular = arch(1.0, 1.0, 1e6, 2);
        assert_eq!(
            local_cognate_pool(1.0, &modular, &p).unwrap(),
            local_cognate_pool(1e4, &modular, &p).unwrap()
        );
    }

    #[test]
    fn demand_is_zero_when_local_pool_suffices() {
        let p = ModelParams::default();
        // beta * M = 0.5 * M <= f * s0 * M
        for m in [1.0, 10.0, 1e4] {
            assert_eq!(
                recruitment_demand(m, &arch(0.0, 1.0, 1e6, 2), &p).unwrap(),
                0
            );
        }
        assert_eq!(
            recruitment_time(1e4, &arch(0.0, 1.0, 1e6, 2), &p).unwrap(),
            0.0
        );
    }

    #[test]
    fn demand_is_capped_by_available_peers() {
        let p = ModelParams {
            bcrit_coefficient: 1.0,
            ..ModelParams::default()
        };
        // continuous 2.3 hubs -> rounded 2 -> at most one peer
        let m = 2.3f64.powi(2);
        let k = recruitment_demand(m, &arch(0.5, 1.0, 1e6, 2), &p).unwrap();
        assert_eq!(k, 1);
    }

    #[test]
    fn infeasible_parameters_are_typed() {
        let p = ModelParams {
            bcrit_coefficient: 2.0,
            ..ModelParams::default()
        };
        let err = recruitment_demand(10.0, &arch(1.0, 1.0, 1e6, 2), &p).unwrap_err();
        assert!(err.is_infeasible());
        assert!(
            total_response_time(10.0, &arch(1.0, 1.0, 1e6, 2), &p, DetectionMode::Spatial)
                .unwrap_err()
                .is_infeasible()
        );
    }

    #[test]
    fn expansion_examples() {
        assert_eq!(expansion_time(5.0, 5.0, 1.0).unwrap(), 0.0);
        assert_eq!(expansion_time(1000.0, 2000.0, 1.0).unwrap(), 1.0);
        assert_eq!(expansion_time(2000.0, 1000.0, 1.0).unwrap(), 0.0);
        assert!(expansion_time(0.0, 1.0, 1.0).is_err());
        assert!(expansion_time(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn zero_latency_means_free_recruitment() {
        let p = ModelParams {
            contact_latency: 0.0,
            ..ModelParams::default()
        };
        for a in [0.0, 0.5, 1.0] {
            assert_eq!(
                recruitment_time(1e4, &arch(a, 1.0, 1e6, 2), &p).unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn tree_recruitment_is_logarithmic() {
        let p = ModelParams {
            recruitment: RecruitmentMode::Tree,
            contact_latency: 1.0,
            ..ModelParams::default()
        };
        let a = arch(1.0, 1.0, 1e6, 2);
        let k = recruitment_demand(64.0, &a, &p).unwrap();
        assert_eq!(k, 31);
        assert_eq!(recruitment_time(64.0, &a, &p).unwrap(), 5.0);
    }

    #[test]
    fn transit_term_adds_distance() {
        let base = ModelParams::default();
        let p = ModelParams {
            transit_coefficient: 1.0,
            ..base
        };
        let a = arch(1.0, 1.0, 1e6, 2);
        let with = recruitment_time(64.0, &a, &p).unwrap();
        let without = recruitment_time(64.0, &a, &base).unwrap();
        // k = 31 regions of unit extent
        assert!((with - without - 31f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn default_breakdown_at_baseline() {
        let t = total_response_time(
            1.0,
            &ArchitectureSpec::default(),
            &ModelParams::default(),
            DetectionMode::Spatial,
        )
        .unwrap();
        assert_eq!(t.t_recruit(), 0.0);
        assert!((t.t_expand() - 4.0).abs() < 1e-12);
        assert_eq!(t.t_detect(), mean_center_distance(2));
    }
}
