//! Clauser–Horne forms, the detection-efficiency threshold, and Hardy's
//! conditions.
//!
//! With local hidden variables the loophole-free combination
//!
//! ```text
//! S = p(a₁,a₂) − p(a₁,a₂') + p(a₁',a₂') + p(a₁',a₂) − p(a₁') − p(a₂)
//! ```
//!
//! lies in `[−1, 0]`. The ratio form divides every term by `p(∞,∞)` and
//! replaces the singles by `p(a₁',∞)`, `p(∞,a₂)`; it holds only under the
//! no-enhancement assumption.

mod hardy;

pub use hardy::{
    hardy_check, hardy_search, hardy_visibility_threshold, ConstraintResidual, HardyReport,
    HardySettings, DEFAULT_HARDY_EPSILON,
};

use crate::error::{Error, Result};
use crate::model::{bell_pair_p, singles_p_d1, singles_p_d2, Angles, BeamSplitter};

/// Probabilities entering the Clauser–Horne combinations.
///
/// `p11 = P(a₁,a₂)`, `p12 = P(a₁,a₂')`, `p21 = P(a₁',a₂)`, `p22 = P(a₁',a₂')`,
/// `s1 = P(a₁')` on D1 and `s2 = P(a₂)` on D2.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ChProbabilities {
    pub p11: f64,
    pub p12: f64,
    pub p21: f64,
    pub p22: f64,
    pub s1: f64,
    pub s2: f64,
    /// Both detectors fire with the polarizers removed.
    pub pinf: Option<f64>,
    /// D1 at a₁' fires, D2 with no polarizer fires.
    pub p1inf: Option<f64>,
    /// D1 with no polarizer fires, D2 at a₂ fires.
    pub pinf2: Option<f64>,
}

impl ChProbabilities {
    /// Model probabilities for the four Bell-pair settings at efficiency `eta`.
    /// Coincidences scale as η², singles as η.
    pub fn analytic(angles: &Angles, bs: &BeamSplitter, visibility: f64, eta: f64) -> Self {
        let Angles {
            theta1,
            theta2,
            theta1p,
            theta2p,
        } = *angles;
        let pair = |a, b| eta * eta * bell_pair_p(bs, visibility, a, b);
        let s1 = eta * singles_p_d1(bs, theta1p);
        let s2 = eta * singles_p_d2(bs, theta2);
        Self {
            p11: pair(theta1, theta2),
            p12: pair(theta1, theta2p),
            p21: pair(theta1p, theta2),
            p22: pair(theta1p, theta2p),
            s1,
            s2,
            // the four outcomes of the Bell pair sum to η² and the
            // single-filter sums reduce to η × singles
            pinf: Some(eta * eta),
            p1inf: Some(eta * s1),
            pinf2: Some(eta * s2),
        }
    }

    fn coincidence_sum(&self) -> f64 {
        self.p11 - self.p12 + self.p22 + self.p21
    }
}

/// Loophole-free Clauser–Horne value; `S > 0` is a violation.
pub fn ch_loopholefree(p: &ChProbabilities) -> f64 {
    p.coincidence_sum() - p.s1 - p.s2
}

/// No-enhancement (ratio) Clauser–Horne value.
pub fn ch_ratio(p: &ChProbabilities) -> Result<f64> {
    let (pinf, p1inf, pinf2) = match (p.pinf, p.p1inf, p.pinf2) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(Error::UndefinedRatio),
    };
    if pinf <= 0.0 {
        return Err(Error::UndefinedRatio);
    }
    Ok((p.coincidence_sum() - p1inf - pinf2) / pinf)
}

const SATURATION_TOL: f64 = 1e-12;

/// Result of the minimal-efficiency functional.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Threshold {
    /// Smallest detector efficiency at which these settings violate the
    /// loophole-free inequality.
    Eta(f64),
    NoViolation,
}

impl Threshold {
    pub fn eta(self) -> Option<f64> {
        match self {
            Threshold::Eta(e) => Some(e),
            Threshold::NoViolation => None,
        }
    }

    /// Objective value for minimisation: the threshold, or +∞.
    pub fn objective(self) -> f64 {
        self.eta().unwrap_or(f64::INFINITY)
    }
}

/// Efficiency at which the loophole-free form is saturated,
///
/// ```text
/// η = [p(θ₁') + p(θ₂)] / [p(θ₁,θ₂) − p(θ₁,θ₂') + p(θ₁',θ₂') + p(θ₁',θ₂)]
/// ```
///
/// from `η²·(coincidences) − η·(singles) = 0`, using the η-free Bell-pair and
/// singles probabilities. Above this efficiency the settings violate.
pub fn min_efficiency(angles: &Angles, bs: &BeamSplitter, visibility: f64) -> Threshold {
    let Angles {
        theta1,
        theta2,
        theta1p,
        theta2p,
    } = *angles;
    let pair = |a, b| bell_pair_p(bs, visibility, a, b);
    let denominator = pair(theta1, theta2) - pair(theta1, theta2p)
        + pair(theta1p, theta2p)
        + pair(theta1p, theta2);
    if denominator <= 0.0 {
        return Threshold::NoViolation;
    }
    let numerator = singles_p_d1(bs, theta1p) + singles_p_d2(bs, theta2);
    let eta = numerator / denominator;
    // η = 1 only saturates the bound; rounding there must not pass for a
    // violation
    if eta > 0.0 && eta <= 1.0 - SATURATION_TOL {
        Threshold::Eta(eta)
    } else {
        Threshold::NoViolation
    }
}
