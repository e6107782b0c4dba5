//! Minimisation of the efficiency threshold over the four polarizer angles.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::inequalities::{min_efficiency, Threshold};
use crate::model::{Angles, BeamSplitter};
use crate::simplex::{self, SimplexOptions};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizerOptions {
    /// Grid points per angle axis for the seeding pass.
    pub grid_points: usize,
    pub n_seeds: usize,
    pub max_iterations: usize,
    pub diameter_tol: f64,
    /// Refine seeds worst-first instead of best-first.
    pub reverse_seed_order: bool,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            grid_points: 24,
            n_seeds: 8,
            max_iterations: 500,
            diameter_tol: 1e-10,
            reverse_seed_order: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdResult {
    /// `None` when no probed angle set violates.
    pub eta_min: Option<f64>,
    pub angles: Option<Angles>,
    pub converged: bool,
    /// Simplex iterations summed over all refinements.
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub v: f64,
    pub rho: f64,
    pub reflectivity: f64,
    pub eta_min: Option<f64>,
    pub angles: Option<Angles>,
}

fn angles_of(x: &[f64; 4]) -> Angles {
    Angles::from_radians(x[0], x[1], x[2], x[3])
}

fn check_inputs(v: f64, rho: f64) -> Result<()> {
    if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
        return Err(Error::InvalidParameter {
            name: "v",
            reason: format!("{v} is outside [0, 1]"),
        });
    }
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::InvalidParameter {
            name: "rho",
            reason: format!("{rho} must be positive"),
        });
    }
    Ok(())
}

/// Coarse grid followed by simplex refinement of the best seeds.
pub fn minimize_threshold(v: f64, rho: f64) -> Result<ThresholdResult> {
    minimize_threshold_with(v, rho, &OptimizerOptions::default())
}

pub fn minimize_threshold_with(
    v: f64,
    rho: f64,
    opts: &OptimizerOptions,
) -> Result<ThresholdResult> {
    check_inputs(v, rho)?;
    let bs = BeamSplitter::from_rho(rho)?;
    let r = bs.reflectivity();
    assert!(
        (rho - r / (1.0 - r)).abs() <= 1e-12 * rho.max(1.0),
        "ρ = R/T and ρ = R/(1 − R) disagree for a lossless splitter"
    );
    let objective = |x: &[f64; 4]| min_efficiency(&angles_of(x), &bs, v).objective();

    let n = opts.grid_points.max(1);
    let step = std::f64::consts::PI / n as f64;
    let mut seeds: Vec<(f64, [f64; 4])> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let x = [i, j, k, l].map(|m| m as f64 * step);
                    let y = objective(&x);
                    if y.is_finite() {
                        seeds.push((y, x));
                    }
                }
            }
        }
    }
    seeds.sort_by(|a, b| a.0.total_cmp(&b.0));
    seeds.truncate(opts.n_seeds);
    if opts.reverse_seed_order {
        seeds.reverse();
    }

    let simplex_opts = SimplexOptions {
        max_iterations: opts.max_iterations,
        diameter_tol: opts.diameter_tol,
        ..Default::default()
    };
    let mut iterations = 0;
    let mut best: Option<(f64, [f64; 4], bool)> = None;
    for (_, x0) in seeds {
        let mut r = simplex::minimize(objective, x0, step / 2.0, &simplex_opts);
        iterations += r.iterations;
        // one restart guards against a collapsed simplex
        let again = simplex::minimize(objective, r.x, step / 20.0, &simplex_opts);
        iterations += again.iterations;
        if again.value <= r.value {
            r = again;
        }
        if best.is_none_or(|(b, _, _)| r.value < b) {
            best = Some((r.value, r.x, r.converged));
        }
    }

    Ok(match best {
        Some((_, x, converged)) => {
            let angles = angles_of(&x);
            match min_efficiency(&angles, &bs, v) {
                Threshold::Eta(eta) => ThresholdResult {
                    eta_min: Some(eta),
                    angles: Some(angles),
                    converged,
                    iterations,
                },
                Threshold::NoViolation => ThresholdResult {
                    eta_min: None,
                    angles: None,
                    converged: false,
                    iterations,
                },
            }
        }
        None => ThresholdResult {
            eta_min: None,
            angles: None,
            converged: false,
            iterations,
        },
    })
}

/// One row per `(v, rho)` pair, `v` outer. Points are evaluated in parallel
/// on the current rayon pool.
pub fn sweep_surface(v_grid: &[f64], rho_grid: &[f64]) -> Result<Vec<SweepRow>> {
    sweep_surface_with(v_grid, rho_grid, &OptimizerOptions::default())
}

pub fn sweep_surface_with(
    v_grid: &[f64],
    rho_grid: &[f64],
    opts: &OptimizerOptions,
) -> Result<Vec<SweepRow>> {
    if v_grid.is_empty() || rho_grid.is_empty() {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: "sweep grids must be non-empty".into(),
        });
    }
    let points: Vec<(f64, f64)> = v_grid
        .iter()
        .flat_map(|&v| rho_grid.iter().map(move |&rho| (v, rho)))
        .collect();
    for &(v, rho) in &points {
        check_inputs(v, rho)?;
    }
    points
        .par_iter()
        .map(|&(v, rho)| {
            let result = minimize_threshold_with(v, rho, opts)?;
            Ok(SweepRow {
                v,
                rho,
                reflectivity: rho / (1.0 + rho),
                eta_min: result.eta_min,
                angles: result.angles,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_full_visibility() {
        let r = minimize_threshold(1.0, 1.0).unwrap();
        let eta = r.eta_min.unwrap();
        assert!((eta - 2.0 * (2f64.sqrt() - 1.0)).abs() < 1e-6, "{eta}");
        assert!(r.converged);
    }

    #[test]
    fn strongly_asymmetric_splitter() {
        let eta = minimize_threshold(1.0, 0.01).unwrap().eta_min.unwrap();
        assert!(eta > 0.666 && eta < 0.680, "{eta}");
    }

    #[test]
    fn no_interference_no_result() {
        let r = minimize_threshold(0.0, 1.0).unwrap();
        assert_eq!(r.eta_min, None);
        assert_eq!(r.angles, None);
        assert!(!r.converged);
    }

    #[test]
    fn reported_angles_reproduce_the_threshold() {
        for (v, rho) in [(0.9, 0.3), (0.75, 0.8)] {
            let r = minimize_threshold(v, rho).unwrap();
            let bs = BeamSplitter::from_rho(rho).unwrap();
            let again = min_efficiency(&r.angles.unwrap(), &bs, v).eta().unwrap();
            assert!((again - r.eta_min.unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn seed_order_does_not_matter() {
        let forward = minimize_threshold(0.85, 0.4).unwrap().eta_min.unwrap();
        let opts = OptimizerOptions {
            reverse_seed_order: true,
            ..Default::default()
        };
        let backward = minimize_threshold_with(0.85, 0.4, &opts)
            .unwrap()
            .eta_min
            .unwrap();
        assert!((forward - backward).abs() < 1e-6, "{forward} vs {backward}");
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(minimize_threshold(1.5, 1.0).is_err());
        assert!(minimize_threshold(1.0, 0.0).is_err());
        assert!(minimize_threshold(f64::NAN, 1.0).is_err());
        assert!(sweep_surface(&[], &[1.0]).is_err());
        assert!(sweep_surface(&[1.0], &[-1.0]).is_err());
    }

    #[test]
    fn sweep_is_row_major_and_matches_single_runs() {
        let rows = sweep_surface(&[0.8, 1.0], &[0.5, 1.0]).unwrap();
        let order: Vec<(f64, f64)> = rows.iter().map(|r| (r.v, r.rho)).collect();
        assert_eq!(order, vec![(0.8, 0.5), (0.8, 1.0), (1.0, 0.5), (1.0, 1.0)]);
        let single = minimize_threshold(1.0, 1.0).unwrap();
        assert_eq!(rows[3].eta_min, single.eta_min);
        for row in &rows {
            assert!((row.rho - row.reflectivity / (1.0 - row.reflectivity)).abs() < 1e-12);
        }
    }

    #[test]
    fn threshold_rises_with_reflectivity() {
        let etas: Vec<f64> = sweep_surface(&[1.0], &[0.1, 0.25, 0.5, 1.0])
            .unwrap()
            .iter()
            .map(|r| r.eta_min.unwrap())
            .collect();
        assert!(etas.windows(2).all(|w| w[0] < w[1]), "{etas:?}");
    }

    #[test]
    fn asymmetry_beats_visibility() {
        let rho = |r: f64| r / (1.0 - r);
        let low_v = minimize_threshold(0.7, rho(0.2)).unwrap().eta_min.unwrap();
        let balanced = minimize_threshold(1.0, rho(0.5)).unwrap().eta_min.unwrap();
        assert!(low_v < balanced, "{low_v} vs {balanced}");
    }
}
