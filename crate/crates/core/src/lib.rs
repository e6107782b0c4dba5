//! Event-ready Bell-pair model: detection probabilities, a Fock-space
//! oracle, Clauser–Horne and Hardy tests, efficiency-threshold optimisation
//! and a Monte Carlo event simulator.

pub mod angle;
pub mod error;
pub mod event_sim;
pub mod fock;
pub mod inequalities;
pub mod model;
pub mod optimizer;
pub mod simplex;

pub use angle::Angle;
pub use error::{Error, Result};
pub use model::{Angles, BeamSplitter, ExperimentConfig, Fringe, Geometry, Outcome};
