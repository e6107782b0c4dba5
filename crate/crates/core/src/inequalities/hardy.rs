//! Hardy's equalities for the preselected Bell pair:
//!
//! ```text
//! P(θ1,θ2')/P(θ1) = 1    P(θ1',θ2)/P(θ2) = 1    P(θ1',θ2') = 0    P(θ1,θ2) > 0
//! ```
//!
//! Each equality is accepted within a tolerance ε.

use crate::angle::Angle;
use crate::error::{Error, Result};
use crate::model::{bell_pair_p, singles_p_d1, singles_p_d2, Angles, BeamSplitter};
use crate::simplex::{self, SimplexOptions};

pub const DEFAULT_HARDY_EPSILON: f64 = 1e-6;

/// Search targets this fraction of ε so that reported settings pass the
/// check with some room to spare.
const SEARCH_MARGIN: f64 = 0.99;
const SEED_GRID: usize = 180;
const SEEDS_KEPT: usize = 8;
const RESTARTS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HardySettings {
    pub theta1: Angle,
    pub theta1p: Angle,
    pub theta2: Angle,
    pub theta2p: Angle,
    pub reflectivity: f64,
    pub epsilon: f64,
}

impl HardySettings {
    pub fn new(angles: Angles, reflectivity: f64, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                reason: format!("{epsilon} must be positive"),
            });
        }
        if !(reflectivity > 0.0 && reflectivity < 1.0) {
            return Err(Error::InvalidParameter {
                name: "R",
                reason: format!("{reflectivity} is outside (0, 1)"),
            });
        }
        Ok(Self {
            theta1: angles.theta1,
            theta1p: angles.theta1p,
            theta2: angles.theta2,
            theta2p: angles.theta2p,
            reflectivity,
            epsilon,
        })
    }

    pub fn angles(&self) -> Angles {
        Angles {
            theta1: self.theta1,
            theta2: self.theta2,
            theta1p: self.theta1p,
            theta2p: self.theta2p,
        }
    }

    fn beam_splitter(&self) -> BeamSplitter {
        BeamSplitter::isotropic(self.reflectivity).expect("reflectivity validated on construction")
    }
}

/// A unit-ratio constraint. `ratio` is `None` when its singles denominator
/// vanishes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstraintResidual {
    pub ratio: Option<f64>,
}

impl ConstraintResidual {
    fn new(numerator: f64, denominator: f64) -> Self {
        Self {
            ratio: (denominator > 0.0).then(|| numerator / denominator),
        }
    }

    /// `|ratio − 1|`.
    pub fn residual(&self) -> Option<f64> {
        self.ratio.map(|r| (r - 1.0).abs())
    }

    fn within(&self, epsilon: f64) -> bool {
        self.residual().is_some_and(|r| r < epsilon)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HardyReport {
    /// `P(θ1,θ2') / P(θ1)`
    pub ratio1: ConstraintResidual,
    /// `P(θ1',θ2) / P(θ2)`
    pub ratio2: ConstraintResidual,
    pub p11: f64,
    /// `P(θ1',θ2')`, which should vanish.
    pub p22: f64,
    pub violating: bool,
}

/// Evaluate the four conditions with the η-free model probabilities.
pub fn hardy_check(settings: &HardySettings, visibility: f64) -> HardyReport {
    let bs = settings.beam_splitter();
    let HardySettings {
        theta1,
        theta1p,
        theta2,
        theta2p,
        epsilon,
        ..
    } = *settings;
    let pair = |a, b| bell_pair_p(&bs, visibility, a, b);
    let ratio1 = ConstraintResidual::new(pair(theta1, theta2p), singles_p_d1(&bs, theta1));
    let ratio2 = ConstraintResidual::new(pair(theta1p, theta2), singles_p_d2(&bs, theta2));
    let p11 = pair(theta1, theta2);
    let p22 = pair(theta1p, theta2p);
    let violating =
        ratio1.within(epsilon) && ratio2.within(epsilon) && p22 < epsilon && p11 > epsilon;
    HardyReport {
        ratio1,
        ratio2,
        p11,
        p22,
        violating,
    }
}

/// Worst of the four conditions on a log scale relative to the target
/// `margin·ε`; negative means every condition holds.
fn feasibility(report: &HardyReport, epsilon: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let target = SEARCH_MARGIN * epsilon;
    let log_excess = |x: f64| (x.max(TINY) / target).ln();
    let r1 = report.ratio1.residual().unwrap_or(f64::INFINITY);
    let r2 = report.ratio2.residual().unwrap_or(f64::INFINITY);
    log_excess(r1)
        .max(log_excess(r2))
        .max(log_excess(report.p22))
        .max((epsilon / (SEARCH_MARGIN * report.p11.max(TINY))).ln())
}

/// Angle minimising the quadratic form `[[a, b], [b, c]]` over unit vectors
/// `(cos x, sin x)`.
fn min_eigen_angle(a: f64, b: f64, c: f64) -> f64 {
    // the major axis sits at ½·atan2(2b, a − c); the minor one is 90° away
    0.5 * (2.0 * b).atan2(a - c) + std::f64::consts::FRAC_PI_2
}

fn settings_from(x: &[f64; 4], reflectivity: f64, epsilon: f64) -> HardySettings {
    HardySettings {
        theta1: Angle::from_radians(x[0]),
        theta2: Angle::from_radians(x[1]),
        theta1p: Angle::from_radians(x[2]),
        theta2p: Angle::from_radians(x[3]),
        reflectivity,
        epsilon,
    }
}

/// Seeds on a grid over (θ1, θ2); θ2' and θ1' are chosen so that the two
/// unit-ratio conditions hold as well as the form allows.
fn seeds(reflectivity: f64, visibility: f64, epsilon: f64) -> Vec<(f64, [f64; 4])> {
    let rho = reflectivity / (1.0 - reflectivity);
    let step = std::f64::consts::PI / SEED_GRID as f64;
    let mut out = Vec::with_capacity(SEED_GRID * SEED_GRID);
    for i in 0..SEED_GRID {
        let t1 = i as f64 * step;
        let (s1, c1) = t1.sin_cos();
        // P(θ1, θ2'⊥) as a form in (cos θ2', sin θ2')
        let t2p = min_eigen_angle(c1 * c1, visibility * rho * c1 * s1, rho * rho * s1 * s1);
        for j in 0..SEED_GRID {
            let t2 = j as f64 * step;
            let (s2, c2) = t2.sin_cos();
            // P(θ1'⊥, θ2) as a form in (cos θ1', sin θ1')
            let t1p = min_eigen_angle(rho * rho * c2 * c2, visibility * rho * c2 * s2, s2 * s2);
            let x = [t1, t2, t1p, t2p];
            let score = feasibility(
                &hardy_check(&settings_from(&x, reflectivity, epsilon), visibility),
                epsilon,
            );
            out.push((score, x));
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out.truncate(SEEDS_KEPT);
    out
}

fn refine<F: FnMut(&[f64; 4]) -> f64>(mut f: F, x0: [f64; 4]) -> (f64, [f64; 4]) {
    let opts = SimplexOptions {
        max_iterations: 3000,
        diameter_tol: 1e-13,
        ..Default::default()
    };
    let mut r = simplex::minimize(&mut f, x0, 0.05, &opts);
    for _ in 0..RESTARTS {
        r = simplex::minimize(&mut f, r.x, 0.01, &opts);
    }
    (r.value, r.x)
}

/// Settings meeting all four conditions within ε with the largest `P(θ1,θ2)`
/// found, or `None` if no feasible point turns up.
pub fn hardy_search(reflectivity: f64, visibility: f64, epsilon: f64) -> Option<HardySettings> {
    if !(reflectivity > 0.0 && reflectivity < 1.0 && epsilon > 0.0) {
        return None;
    }
    let score = |x: &[f64; 4]| {
        feasibility(
            &hardy_check(&settings_from(x, reflectivity, epsilon), visibility),
            epsilon,
        )
    };

    let mut best: Option<[f64; 4]> = None;
    let mut best_p11 = f64::NEG_INFINITY;
    for (_, x0) in seeds(reflectivity, visibility, epsilon) {
        let (value, x) = refine(score, x0);
        if value >= 0.0 {
            continue;
        }
        // second stage: push P(θ1,θ2) up while staying feasible
        let (neg_p11, x) = refine(
            |y: &[f64; 4]| {
                let report = hardy_check(&settings_from(y, reflectivity, epsilon), visibility);
                if feasibility(&report, epsilon) < 0.0 {
                    -report.p11
                } else {
                    f64::INFINITY
                }
            },
            x,
        );
        if -neg_p11 > best_p11 {
            best_p11 = -neg_p11;
            best = Some(x);
        }
    }
    best.map(|x| settings_from(&x, reflectivity, epsilon))
}

/// Smallest visibility at which [`hardy_search`] succeeds, by bisection to
/// within `tol`. `None` if even `v = 1` is infeasible.
pub fn hardy_visibility_threshold(reflectivity: f64, epsilon: f64, tol: f64) -> Option<f64> {
    hardy_search(reflectivity, 1.0, epsilon)?;
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if hardy_search(reflectivity, mid, epsilon).is_some() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}
