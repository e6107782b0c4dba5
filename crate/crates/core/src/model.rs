//! Closed-form probability model of the two-crystal / beam-splitter apparatus.
//!
//! Two type-II down-converters each emit a singlet-like pair. One photon of
//! each pair meets the other at a beam splitter whose outputs pass polarizers
//! P1', P2' to detectors D1', D2' (the preselector). The two remaining photons
//! go to D1 and D2 through polarizers P1, P2 and form the Bell pair.
//!
//! Four-fold detection:
//!
//! ```text
//! P(θ1', θ2', θ1, θ2) = η²/4 · (A² + B² − 2·v·A·B·cos φ)
//! A = Q(t)₁₁' · Q(t)₂₂'      B = Q(r)₁₂' · Q(r)₂₁'
//! Q(q)ᵢⱼ = q_x sin θᵢ cos θⱼ − q_y cos θᵢ sin θⱼ
//! ```
//!
//! With the preselector fixed at θ1' = 90°, θ2' = 0°, φ = 0 and the result
//! renormalised over the four preselector outcomes and over same-side events,
//! the Bell pair is detected with
//!
//! ```text
//! P(θ1, θ2) = η² s (cos²θ1 sin²θ2 − 2vρ cosθ1 sinθ1 cosθ2 sinθ2 + ρ² cos²θ2 sin²θ1)
//! s = T² / (R² + T²),  ρ = R / T
//! ```

use std::f64::consts::PI;

use crate::angle::Angle;
use crate::error::{check_unit_interval, Error, Result};

const LOSSLESS_TOL: f64 = 1e-12;

/// Beam splitter amplitudes. `t²` is transmittance and `r²` reflectance for
/// each polarization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamSplitter {
    t_x: f64,
    t_y: f64,
    r_x: f64,
    r_y: f64,
}

impl BeamSplitter {
    /// General (possibly polarization-dependent) lossless splitter.
    pub fn new(t_x: f64, t_y: f64, r_x: f64, r_y: f64) -> Result<Self> {
        for (name, q) in [("t_x", t_x), ("t_y", t_y), ("r_x", r_x), ("r_y", r_y)] {
            if !(q.is_finite() && (0.0..=1.0).contains(&q)) {
                return Err(Error::InvalidBeamSplitter(format!(
                    "{name} = {q} is outside [0, 1]"
                )));
            }
        }
        for (pol, t, r) in [("x", t_x, r_x), ("y", t_y, r_y)] {
            if (t * t + r * r - 1.0).abs() > LOSSLESS_TOL {
                return Err(Error::InvalidBeamSplitter(format!(
                    "t_{pol}² + r_{pol}² = {} (must be 1)",
                    t * t + r * r
                )));
            }
        }
        Ok(Self { t_x, t_y, r_x, r_y })
    }

    /// Polarization-isotropic splitter (near-normal incidence) with
    /// reflectivity `R = r²`.
    pub fn isotropic(reflectivity: f64) -> Result<Self> {
        if !(reflectivity.is_finite() && (0.0..=1.0).contains(&reflectivity)) {
            return Err(Error::InvalidBeamSplitter(format!(
                "reflectivity {reflectivity} is outside [0, 1]"
            )));
        }
        let r = reflectivity.sqrt();
        let t = (1.0 - reflectivity).sqrt();
        Ok(Self {
            t_x: t,
            t_y: t,
            r_x: r,
            r_y: r,
        })
    }

    /// Isotropic splitter with asymmetry `ρ = R/T = R/(1−R)`.
    pub fn from_rho(rho: f64) -> Result<Self> {
        if !(rho.is_finite() && rho >= 0.0) {
            return Err(Error::InvalidBeamSplitter(format!(
                "rho {rho} must be finite and non-negative"
            )));
        }
        Self::isotropic(rho / (1.0 + rho))
    }

    pub fn t_x(&self) -> f64 {
        self.t_x
    }

    pub fn t_y(&self) -> f64 {
        self.t_y
    }

    pub fn r_x(&self) -> f64 {
        self.r_x
    }

    pub fn r_y(&self) -> f64 {
        self.r_y
    }

    pub fn is_isotropic(&self) -> bool {
        self.t_x == self.t_y && self.r_x == self.r_y
    }

    /// `R = r_x²`; the splitter-wide value when isotropic.
    pub fn reflectivity(&self) -> f64 {
        self.r_x * self.r_x
    }

    /// `T = t_x²`.
    pub fn transmittance(&self) -> f64 {
        self.t_x * self.t_x
    }

    /// `ρ = R/T`, infinite for a perfect mirror.
    pub fn rho(&self) -> f64 {
        self.reflectivity() / self.transmittance()
    }

    /// `s = T²/(R² + T²)`.
    pub fn s(&self) -> f64 {
        let (r, t) = (self.reflectivity(), self.transmittance());
        t * t / (r * r + t * t)
    }
}

/// Transverse detector placement for the preselector detectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Geometry {
    pub z1: f64,
    pub z2: f64,
    /// Fringe spacing `L`.
    pub fringe_spacing: f64,
    /// Detector opening width `Δz`.
    pub opening: f64,
}

impl Geometry {
    fn validate(&self) -> Result<()> {
        if !(self.fringe_spacing.is_finite() && self.fringe_spacing > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "fringe spacing L = {} must be positive",
                self.fringe_spacing
            )));
        }
        if !(self.opening.is_finite() && self.opening >= 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "opening Δz = {} must be non-negative",
                self.opening
            )));
        }
        if !(self.z1.is_finite() && self.z2.is_finite()) {
            return Err(Error::InvalidGeometry(
                "detector positions must be finite".into(),
            ));
        }
        Ok(())
    }

    /// φ = 2π(z₂ − z₁)/L.
    pub fn phase(&self) -> Result<f64> {
        self.validate()?;
        Ok(2.0 * PI * (self.z2 - self.z1) / self.fringe_spacing)
    }
}

/// Coincidence visibility `[sin(πΔz/L) / (πΔz/L)]²` of finite detector openings.
pub fn visibility(geometry: &Geometry) -> Result<f64> {
    geometry.validate()?;
    let x = PI * geometry.opening / geometry.fringe_spacing;
    if x == 0.0 {
        return Ok(1.0);
    }
    let sinc = x.sin() / x;
    Ok(sinc * sinc)
}

/// Where the visibility and phase of the interference term come from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Fringe {
    Geometry(Geometry),
    Explicit { visibility: f64, phase: f64 },
}

impl Default for Fringe {
    fn default() -> Self {
        Fringe::Explicit {
            visibility: 1.0,
            phase: 0.0,
        }
    }
}

/// The four polarizer angles. For the four-fold probability the primed
/// angles belong to the preselector polarizers P1', P2'; for the Clauser–Horne
/// and Hardy analyses they are the alternative Bell-pair settings.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Angles {
    pub theta1: Angle,
    pub theta2: Angle,
    pub theta1p: Angle,
    pub theta2p: Angle,
}

impl Angles {
    pub fn from_degrees(theta1: f64, theta2: f64, theta1p: f64, theta2p: f64) -> Self {
        Self {
            theta1: Angle::from_degrees(theta1),
            theta2: Angle::from_degrees(theta2),
            theta1p: Angle::from_degrees(theta1p),
            theta2p: Angle::from_degrees(theta2p),
        }
    }

    pub fn from_radians(theta1: f64, theta2: f64, theta1p: f64, theta2p: f64) -> Self {
        Self {
            theta1: Angle::from_radians(theta1),
            theta2: Angle::from_radians(theta2),
            theta1p: Angle::from_radians(theta1p),
            theta2p: Angle::from_radians(theta2p),
        }
    }

    /// `[θ1, θ2, θ1', θ2']` in radians.
    pub fn to_radians(&self) -> [f64; 4] {
        [
            self.theta1.radians(),
            self.theta2.radians(),
            self.theta1p.radians(),
            self.theta2p.radians(),
        ]
    }

    pub fn to_degrees(&self) -> [f64; 4] {
        self.to_radians().map(f64::to_degrees)
    }
}

/// Full description of one apparatus setting.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub bs: BeamSplitter,
    pub fringe: Fringe,
    pub angles: Angles,
    /// Detector efficiency η ∈ (0, 1].
    pub eta: f64,
}

impl ExperimentConfig {
    pub fn new(bs: BeamSplitter, fringe: Fringe, angles: Angles, eta: f64) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "eta",
                reason: format!("{eta} is outside (0, 1]"),
            });
        }
        match fringe {
            Fringe::Geometry(g) => g.validate()?,
            Fringe::Explicit { visibility, phase } => {
                check_unit_interval("visibility", visibility)?;
                if !phase.is_finite() {
                    return Err(Error::InvalidParameter {
                        name: "phase",
                        reason: "must be finite".into(),
                    });
                }
            }
        }
        Ok(Self {
            bs,
            fringe,
            angles,
            eta,
        })
    }

    pub fn visibility(&self) -> f64 {
        match self.fringe {
            Fringe::Geometry(g) => visibility(&g).expect("validated on construction"),
            Fringe::Explicit { visibility, .. } => visibility,
        }
    }

    pub fn phase(&self) -> f64 {
        match self.fringe {
            Fringe::Geometry(g) => g.phase().expect("validated on construction"),
            Fringe::Explicit { phase, .. } => phase,
        }
    }
}

/// `Q(q)ᵢⱼ = q_x sin θᵢ cos θⱼ − q_y cos θᵢ sin θⱼ`.
pub fn q_factor(q_x: f64, q_y: f64, theta_i: Angle, theta_j: Angle) -> f64 {
    q_x * theta_i.sin() * theta_j.cos() - q_y * theta_i.cos() * theta_j.sin()
}

/// The transmitted (`a`) and reflected (`b`) two-photon amplitudes whose
/// interference gives the four-fold probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterferenceTerms {
    pub a: f64,
    pub b: f64,
}

impl InterferenceTerms {
    pub fn new(bs: &BeamSplitter, angles: &Angles) -> Self {
        let Angles {
            theta1,
            theta2,
            theta1p,
            theta2p,
        } = *angles;
        let a =
            q_factor(bs.t_x, bs.t_y, theta1, theta1p) * q_factor(bs.t_x, bs.t_y, theta2, theta2p);
        let b =
            q_factor(bs.r_x, bs.r_y, theta1, theta2p) * q_factor(bs.r_x, bs.r_y, theta2, theta1p);
        Self { a, b }
    }

    /// `η²/4 (A² + B² − 2vAB cos φ)`, evaluated as a sum of non-negative parts.
    pub fn probability(&self, visibility: f64, phase: f64, eta: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        let (s, c) = phase.sin_cos();
        let coherent = (a - b * c).powi(2) + (b * s).powi(2);
        let incoherent = a * a + b * b;
        eta * eta / 4.0 * (visibility * coherent + (1.0 - visibility) * incoherent)
    }
}

/// Probability that all four photons are detected.
pub fn fourfold_probability(config: &ExperimentConfig) -> f64 {
    InterferenceTerms::new(&config.bs, &config.angles).probability(
        config.visibility(),
        config.phase(),
        config.eta,
    )
}

/// Four-fold probability for a 50:50 splitter at full visibility:
/// `(1/16) sin²(θ1' − θ2') sin²(θ1 − θ2)`.
pub fn symmetric_probability(theta1p: Angle, theta2p: Angle, theta1: Angle, theta2: Angle) -> f64 {
    let pre = (theta1p.radians() - theta2p.radians()).sin();
    let bell = (theta1.radians() - theta2.radians()).sin();
    pre * pre * bell * bell / 16.0
}

/// Bell-pair detection with the preselector polarizers removed:
/// `(1/4)[(T − R)² + 2TR sin²(θ1 − θ2)]`.
pub fn partial_entanglement_probability(bs: &BeamSplitter, theta1: Angle, theta2: Angle) -> f64 {
    debug_assert!(bs.is_isotropic());
    let (r, t) = (bs.reflectivity(), bs.transmittance());
    let d = (theta1.radians() - theta2.radians()).sin();
    0.25 * ((t - r).powi(2) + 2.0 * t * r * d * d)
}

/// Weights `(T², RT, R²)/(R² + T²)`, i.e. `(s, sρ, sρ²)` without dividing by T.
fn bell_weights(bs: &BeamSplitter) -> (f64, f64, f64) {
    let (r, t) = (bs.reflectivity(), bs.transmittance());
    let norm = r * r + t * t;
    (t * t / norm, r * t / norm, r * r / norm)
}

/// η-free Bell-pair probability `p(θ1, θ2)`, so that `P = η² p`.
///
/// Written as `v·(T x − R y)² + (1 − v)·(T² x² + R² y²)` over `R² + T²`
/// with `x = cos θ1 sin θ2`, `y = sin θ1 cos θ2`, which is the same quadratic
/// form but never rounds below zero.
pub fn bell_pair_p(bs: &BeamSplitter, visibility: f64, theta1: Angle, theta2: Angle) -> f64 {
    debug_assert!(bs.is_isotropic());
    let (r, t) = (bs.reflectivity(), bs.transmittance());
    let norm = r * r + t * t;
    let x = theta1.cos() * theta2.sin();
    let y = theta1.sin() * theta2.cos();
    let coherent = (t * x - r * y).powi(2);
    let incoherent = (t * x).powi(2) + (r * y).powi(2);
    (visibility * coherent + (1.0 - visibility) * incoherent) / norm
}

/// Bell-pair coincidence probability with the preselector at θ1' = 90°,
/// θ2' = 0°, φ = 0.
pub fn bell_pair_probability(
    bs: &BeamSplitter,
    visibility: f64,
    theta1: Angle,
    theta2: Angle,
    eta: f64,
) -> f64 {
    eta * eta * bell_pair_p(bs, visibility, theta1, theta2)
}

/// η-free D1 singles probability `s (cos²θ1 + ρ² sin²θ1)`.
pub fn singles_p_d1(bs: &BeamSplitter, theta1: Angle) -> f64 {
    let (w_t, _, w_r) = bell_weights(bs);
    w_t * theta1.cos().powi(2) + w_r * theta1.sin().powi(2)
}

/// η-free D2 singles probability `s (sin²θ2 + ρ² cos²θ2)`.
pub fn singles_p_d2(bs: &BeamSplitter, theta2: Angle) -> f64 {
    let (w_t, _, w_r) = bell_weights(bs);
    w_t * theta2.sin().powi(2) + w_r * theta2.cos().powi(2)
}

pub fn singles_probability_d1(bs: &BeamSplitter, theta1: Angle, eta: f64) -> f64 {
    eta * singles_p_d1(bs, theta1)
}

pub fn singles_probability_d2(bs: &BeamSplitter, theta2: Angle, eta: f64) -> f64 {
    eta * singles_p_d2(bs, theta2)
}

/// Joint polarization outcome of the Bell pair for a two-channel analyzer on
/// each side: `(θ1 or θ1⊥) × (θ2 or θ2⊥)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    PlusPlus,
    PlusPerp,
    PerpPlus,
    PerpPerp,
}

impl Outcome {
    pub const ALL: [Outcome; 4] = [
        Outcome::PlusPlus,
        Outcome::PlusPerp,
        Outcome::PerpPlus,
        Outcome::PerpPerp,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Short key used in record output.
    pub fn key(self) -> &'static str {
        match self {
            Outcome::PlusPlus => "pp",
            Outcome::PlusPerp => "pm",
            Outcome::PerpPlus => "mp",
            Outcome::PerpPerp => "mm",
        }
    }

    /// Whether D1 / D2 report the unrotated channel.
    pub fn channels(self) -> (bool, bool) {
        match self {
            Outcome::PlusPlus => (true, true),
            Outcome::PlusPerp => (true, false),
            Outcome::PerpPlus => (false, true),
            Outcome::PerpPerp => (false, false),
        }
    }

    pub fn angles(self, theta1: Angle, theta2: Angle) -> (Angle, Angle) {
        let (c1, c2) = self.channels();
        (
            if c1 { theta1 } else { theta1.perpendicular() },
            if c2 { theta2 } else { theta2.perpendicular() },
        )
    }
}

/// η-free probabilities of the four outcomes, indexed by [`Outcome::index`].
/// They sum to one for every setting.
pub fn bell_pair_distribution(
    bs: &BeamSplitter,
    visibility: f64,
    theta1: Angle,
    theta2: Angle,
) -> [f64; 4] {
    Outcome::ALL.map(|o| {
        let (a, b) = o.angles(theta1, theta2);
        bell_pair_p(bs, visibility, a, b)
    })
}

/// Fraction `2R(1 − R)` of photon pairs leaving the splitter on the same side.
pub fn same_side_fraction(reflectivity: f64) -> f64 {
    2.0 * reflectivity * (1.0 - reflectivity)
}
