//! Brute-force Fock-space oracle for the four-fold detection probability.
//!
//! Builds the two-singlet input state explicitly, applies the four detector
//! field operators as annihilators on a sparse superposition of occupation
//! vectors, and takes the squared norm of what is left. Nothing here shares
//! code with the closed form in [`crate::model`] beyond the beam-splitter and
//! angle types.

use std::collections::BTreeMap;
use std::ops::Add;

use num_complex::Complex64;

use crate::angle::Angle;
use crate::error::{Error, Result};
use crate::model::{Angles, BeamSplitter};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Port {
    One,
    OnePrime,
    Two,
    TwoPrime,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarization {
    X,
    Y,
}

/// One of the eight single-photon modes (spatial port × polarization).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeLabel {
    pub port: Port,
    pub pol: Polarization,
}

impl ModeLabel {
    pub const fn new(port: Port, pol: Polarization) -> Self {
        Self { port, pol }
    }

    pub const ALL: [ModeLabel; 8] = [
        ModeLabel::new(Port::One, Polarization::X),
        ModeLabel::new(Port::One, Polarization::Y),
        ModeLabel::new(Port::OnePrime, Polarization::X),
        ModeLabel::new(Port::OnePrime, Polarization::Y),
        ModeLabel::new(Port::Two, Polarization::X),
        ModeLabel::new(Port::Two, Polarization::Y),
        ModeLabel::new(Port::TwoPrime, Polarization::X),
        ModeLabel::new(Port::TwoPrime, Polarization::Y),
    ];

    pub fn index(self) -> usize {
        self.port as usize * 2 + self.pol as usize
    }
}

/// Photon number in each of the eight modes, capped at one.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Occupation([u8; 8]);

impl Occupation {
    pub fn new(counts: [u8; 8]) -> Result<Self> {
        match counts.iter().find(|&&n| n > 1) {
            Some(&n) => Err(Error::OccupationOverflow(n)),
            None => Ok(Self(counts)),
        }
    }

    pub fn from_modes(modes: &[ModeLabel]) -> Result<Self> {
        let mut counts = [0u8; 8];
        for m in modes {
            counts[m.index()] += 1;
        }
        Self::new(counts)
    }

    pub fn get(&self, mode: ModeLabel) -> u8 {
        self.0[mode.index()]
    }

    pub fn total(&self) -> u32 {
        self.0.iter().map(|&n| n as u32).sum()
    }

    pub fn port_total(&self, port: Port) -> u8 {
        self.get(ModeLabel::new(port, Polarization::X))
            + self.get(ModeLabel::new(port, Polarization::Y))
    }

    pub fn is_vacuum(&self) -> bool {
        self.0.iter().all(|&n| n == 0)
    }

    /// Remove one photon from `mode`; `None` when the mode is empty.
    fn annihilate(mut self, mode: ModeLabel) -> Option<Self> {
        let slot = &mut self.0[mode.index()];
        if *slot == 0 {
            return None;
        }
        *slot -= 1;
        Some(self)
    }
}

/// Sparse superposition of occupation vectors.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Ket {
    terms: BTreeMap<Occupation, Complex64>,
}

impl Ket {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn basis(occupation: Occupation, amplitude: Complex64) -> Self {
        let mut k = Self::zero();
        k.accumulate(occupation, amplitude);
        k
    }

    fn accumulate(&mut self, occupation: Occupation, amplitude: Complex64) {
        let entry = self
            .terms
            .entry(occupation)
            .or_insert(Complex64::new(0.0, 0.0));
        *entry += amplitude;
        if *entry == Complex64::new(0.0, 0.0) {
            self.terms.remove(&occupation);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Occupation, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn amplitude(&self, occupation: &Occupation) -> Complex64 {
        self.terms.get(occupation).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn scale(&self, factor: Complex64) -> Ket {
        let mut out = Ket::zero();
        for (occ, amp) in &self.terms {
            out.accumulate(*occ, amp * factor);
        }
        out
    }

    /// Apply a linear combination of single-mode annihilators. Photon
    /// numbers never exceed one, so every surviving term carries factor √1.
    pub fn apply(&self, op: &DetectionOperator) -> Ket {
        let mut out = Ket::zero();
        for (occ, amp) in &self.terms {
            for &(mode, coeff) in &op.terms {
                if let Some(next) = occ.annihilate(mode) {
                    out.accumulate(next, amp * coeff);
                }
            }
        }
        out
    }
}

impl Add for &Ket {
    type Output = Ket;

    fn add(self, rhs: &Ket) -> Ket {
        let mut out = self.clone();
        for (occ, amp) in &rhs.terms {
            out.accumulate(*occ, *amp);
        }
        out
    }
}

/// Linear combination `Σ cᵢ âᵢ` of annihilators.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DetectionOperator {
    terms: Vec<(ModeLabel, Complex64)>,
}

impl DetectionOperator {
    pub fn new(terms: impl IntoIterator<Item = (ModeLabel, Complex64)>) -> Self {
        let mut merged: BTreeMap<ModeLabel, Complex64> = BTreeMap::new();
        for (m, c) in terms {
            *merged.entry(m).or_default() += c;
        }
        Self {
            terms: merged
                .into_iter()
                .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
                .collect(),
        }
    }

    pub fn terms(&self) -> &[(ModeLabel, Complex64)] {
        &self.terms
    }

    pub fn coefficient(&self, mode: ModeLabel) -> Complex64 {
        self.terms
            .iter()
            .find(|(m, _)| *m == mode)
            .map(|(_, c)| *c)
            .unwrap_or_default()
    }
}

/// Two independent singlet-like pairs, `(1/2)(|x⟩₁|y⟩₁' − |y⟩₁|x⟩₁')(|x⟩₂|y⟩₂' − |y⟩₂|x⟩₂')`.
pub fn build_state() -> Ket {
    use Polarization::{X, Y};
    let singlet = |a: Port, b: Port| {
        [
            (ModeLabel::new(a, X), ModeLabel::new(b, Y), 1.0),
            (ModeLabel::new(a, Y), ModeLabel::new(b, X), -1.0),
        ]
    };
    let mut ket = Ket::zero();
    for (m1, m1p, s1) in singlet(Port::One, Port::OnePrime) {
        for (m2, m2p, s2) in singlet(Port::Two, Port::TwoPrime) {
            let occ = Occupation::from_modes(&[m1, m1p, m2, m2p]).expect("distinct modes");
            ket.accumulate(occ, Complex64::new(0.5 * s1 * s2, 0.0));
        }
    }
    ket
}

/// Preselector detectors behind the beam splitter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrimedDetector {
    D1p,
    D2p,
}

/// Bell-pair detectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlainDetector {
    D1,
    D2,
}

/// Field operator for a preselector detector behind polarizer `theta`.
///
/// The detector sees its own input port transmitted and the other port
/// reflected with a factor `i`. Only the relative path phase is physical;
/// all of it is carried by the reflected branch of D2'.
pub fn detection_operator_primed(
    which: PrimedDetector,
    theta: Angle,
    bs: &BeamSplitter,
    phase: f64,
) -> DetectionOperator {
    use Polarization::{X, Y};
    let (own, other, reflected_phase) = match which {
        PrimedDetector::D1p => (Port::OnePrime, Port::TwoPrime, Complex64::new(0.0, 1.0)),
        PrimedDetector::D2p => (
            Port::TwoPrime,
            Port::OnePrime,
            Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, phase),
        ),
    };
    let (c, s) = (theta.cos(), theta.sin());
    DetectionOperator::new([
        (ModeLabel::new(own, X), Complex64::new(bs.t_x() * c, 0.0)),
        (ModeLabel::new(own, Y), Complex64::new(bs.t_y() * s, 0.0)),
        (ModeLabel::new(other, X), reflected_phase * (bs.r_x() * c)),
        (ModeLabel::new(other, Y), reflected_phase * (bs.r_y() * s)),
    ])
}

/// Field operator for a Bell-pair detector behind polarizer `theta`. The
/// global time-dependent phase is dropped.
pub fn detection_operator_plain(which: PlainDetector, theta: Angle) -> DetectionOperator {
    let port = match which {
        PlainDetector::D1 => Port::One,
        PlainDetector::D2 => Port::Two,
    };
    DetectionOperator::new([
        (
            ModeLabel::new(port, Polarization::X),
            Complex64::new(theta.cos(), 0.0),
        ),
        (
            ModeLabel::new(port, Polarization::Y),
            Complex64::new(theta.sin(), 0.0),
        ),
    ])
}

/// `η² ‖E₁ E₂ E₁' E₂' |ψ⟩‖²` with `ops = [E₁, E₂, E₁', E₂']`, applied right
/// to left.
pub fn fourfold_expectation(state: &Ket, ops: &[DetectionOperator; 4], eta: f64) -> f64 {
    let out = ops.iter().rev().fold(state.clone(), |k, op| k.apply(op));
    eta * eta * out.norm_sqr()
}

/// The four detector operators for one apparatus setting, in the order
/// expected by [`fourfold_expectation`].
pub fn detector_operators(
    bs: &BeamSplitter,
    angles: &Angles,
    phase: f64,
) -> [DetectionOperator; 4] {
    [
        detection_operator_plain(PlainDetector::D1, angles.theta1),
        detection_operator_plain(PlainDetector::D2, angles.theta2),
        detection_operator_primed(PrimedDetector::D1p, angles.theta1p, bs, 0.0),
        detection_operator_primed(PrimedDetector::D2p, angles.theta2p, bs, phase),
    ]
}

/// Oracle value of the four-fold probability at full visibility.
pub fn oracle_fourfold(bs: &BeamSplitter, angles: &Angles, phase: f64, eta: f64) -> f64 {
    fourfold_expectation(&build_state(), &detector_operators(bs, angles, phase), eta)
}
