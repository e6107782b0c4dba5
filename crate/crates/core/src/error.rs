use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid beam splitter: {0}")]
    InvalidBeamSplitter(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("ratio form undefined: P(inf, inf) is zero or missing")]
    UndefinedRatio,

    #[error("mode occupation {0} exceeds the single-photon cap")]
    OccupationOverflow(u8),

    #[error("empty tally: no emitted systems")]
    EmptyTally,

    #[error("no coincidence data for setting pair {0}")]
    NoCoincidences(&'static str),

    #[error("tally settings do not match the requested Hardy settings")]
    SettingsMismatch,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_unit_interval(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("{x} is outside [0, 1]"),
        })
    }
}
