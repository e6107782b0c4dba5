use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

/// Plane-polarization orientation in radians, kept in `[0, π)`.
///
/// Every probability in the model is π-periodic in each polarizer angle, so
/// the canonical range loses nothing.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);
    pub const RIGHT: Angle = Angle(FRAC_PI_2);

    /// Panics on non-finite input.
    pub fn from_radians(rad: f64) -> Self {
        assert!(rad.is_finite(), "angle must be finite, got {rad}");
        let mut r = rad.rem_euclid(PI);
        // rem_euclid may round up to exactly π for tiny negative inputs
        if r >= PI {
            r = 0.0;
        }
        Angle(r)
    }

    pub fn from_degrees(deg: f64) -> Self {
        Self::from_radians(deg.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }

    /// The orthogonal polarization, θ + π/2 mod π.
    pub fn perpendicular(self) -> Self {
        Self::from_radians(self.0 + FRAC_PI_2)
    }

    pub fn cos(self) -> f64 {
        self.0.cos()
    }

    pub fn sin(self) -> f64 {
        self.0.sin()
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}°", self.degrees())
    }
}
