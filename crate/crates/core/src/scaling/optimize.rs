use rayon::prelude::*;

use super::{total_response_time, ArchitectureSpec, DetectionMode, ModelParams, TimingBreakdown};
use crate::error::{ModelError, Result};

/// `{0, 1/n, 2/n, ..., 1}`, computed by division so endpoints are exact.
pub fn exponent_grid(intervals: u32) -> Result<Vec<f64>> {
    if intervals == 0 {
        return Err(ModelError::invalid("grid_resolution", "must be > 0"));
    }
    let n = intervals as f64;
    Ok((0..=intervals).map(|i| i as f64 / n).collect())
}

fn argmin_over(
    exponents: &[f64],
    m: f64,
    template: &ArchitectureSpec,
    params: &ModelParams,
    mode: DetectionMode,
) -> Result<(f64, TimingBreakdown)> {
    let mut best: Option<(f64, TimingBreakdown)> = None;
    for &a in exponents {
        let t = total_response_time(m, &template.with_exponent(a)?, params, mode)?;
        // strict comparison keeps the smallest exponent on ties
        if best.is_none_or(|(_, b)| t.t_total() < b.t_total()) {
            best = Some((a, t));
        }
    }
    best.ok_or_else(|| ModelError::invalid("grid_resolution", "empty exponent grid"))
}

/// Exponent on the uniform grid with `intervals` steps minimising total
/// response time at mass `m`. The template supplies `n0`, `s0` and `d`.
pub fn optimal_exponent(
    m: f64,
    template: &ArchitectureSpec,
    params: &ModelParams,
    mode: DetectionMode,
    intervals: u32,
) -> Result<(f64, TimingBreakdown)> {
    argmin_over(&exponent_grid(intervals)?, m, template, params, mode)
}

/// Like [`optimal_exponent`] but restricted to strictly sub-modular grid
/// points `1/n ..= (n-1)/n`.
pub fn optimal_submodular_exponent(
    m: f64,
    template: &ArchitectureSpec,
    params: &ModelParams,
    mode: DetectionMode,
    intervals: u32,
) -> Result<(f64, TimingBreakdown)> {
    if intervals < 2 {
        return Err(ModelError::invalid(
            "grid_resolution",
            "need at least 2 intervals for an interior exponent",
        ));
    }
    let grid = exponent_grid(intervals)?;
    argmin_over(&grid[1..grid.len() - 1], m, template, params, mode)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub mass: f64,
    pub exponent: f64,
    pub timing: TimingBreakdown,
}

/// Evaluates every `(M, a)` pair. Rows come back mass-major, exponent-minor
/// regardless of evaluation order.
pub fn sweep(
    masses: &[f64],
    exponents: &[f64],
    template: &ArchitectureSpec,
    params: &ModelParams,
    mode: DetectionMode,
) -> Result<Vec<SweepRow>> {
    if masses.is_empty() || exponents.is_empty() {
        return Err(ModelError::invalid(
            "sweep",
            "mass and exponent lists must be non-empty",
        ));
    }
    let points: Vec<(f64, f64)> = masses
        .iter()
        .flat_map(|&m| exponents.iter().map(move |&a| (m, a)))
        .collect();
    points
        .par_iter()
        .map(|&(mass, exponent)| {
            let arch = template.with_exponent(exponent)?;
            Ok(SweepRow {
                mass,
                exponent,
                timing: total_response_time(mass, &arch, params, mode)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_has_exact_endpoints() {
        let g = exponent_grid(20).unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[20], 1.0);
        assert!(exponent_grid(0).is_err());
    }

    #[test]
    fn free_communication_prefers_full_modularity() {
        let params = ModelParams {
            contact_latency: 0.0,
            contention_coefficient: 0.0,
            ..ModelParams::default()
        };
        let (a, _) = optimal_exponent(
            1e4,
            &ArchitectureSpec::default(),
            &params,
            DetectionMode::Spatial,
            20,
        )
        .unwrap();
        assert_eq!(a, 1.0);
    }

    #[test]
    fn ties_resolve_to_smallest_exponent() {
        // at M = 1 every architecture is identical
        let (a, _) = optimal_exponent(
            1.0,
            &ArchitectureSpec::default(),
            &ModelParams::default(),
            DetectionMode::Spatial,
            10,
        )
        .unwrap();
        assert_eq!(a, 0.0);
        let (a, _) = optimal_submodular_exponent(
            1.0,
            &ArchitectureSpec::default(),
            &ModelParams::default(),
            DetectionMode::Spatial,
            10,
        )
        .unwrap();
        assert_eq!(a, 0.1);
    }

    #[test]
    fn sweep_order_and_consistency() {
        let arch = ArchitectureSpec::default();
        let params = ModelParams::default();
        let masses = [1.0, 10.0, 100.0];
        let exps = [0.0, 0.5, 1.0];
        let rows = sweep(&masses, &exps, &arch, &params, DetectionMode::Spatial).unwrap();
        assert_eq!(rows.len(), 9);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.mass, masses[i / 3]);
            assert_eq!(row.exponent, exps[i % 3]);
            let direct = total_response_time(
                row.mass,
                &arch.with_exponent(row.exponent).unwrap(),
                &params,
                DetectionMode::Spatial,
            )
            .unwrap();
            assert_eq!(row.timing, direct);
        }
        assert!(sweep(&[], &exps, &arch, &params, DetectionMode::Spatial).is_err());
    }
}
