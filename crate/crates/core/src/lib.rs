//! Multi-round LOCC protocols on three-qubit W-class states.
//!
//! The numerical layers ([`state`], [`entanglement`], [`measurement`]) are
//! generic over [`Real`]; the f64 aliases below cover the common case.
//! [`protocol`], [`engine`] and [`analysis`] work in f64.

pub mod analysis;
pub mod engine;
pub mod entanglement;
pub mod error;
pub mod linalg;
pub mod measurement;
pub mod protocol;
pub mod scalar;
pub mod state;

pub use error::{Error, Result};
pub use scalar::Real;
pub use state::Party;

pub type PureState3Q = state::PureState3Q<f64>;
pub type WClassState = state::WClassState<f64>;
pub type LocalUnitary = state::LocalUnitary<f64>;
pub type LocalMeasurement = measurement::LocalMeasurement<f64>;
pub type KrausOp = measurement::KrausOp<f64>;
pub type SchmidtPair = entanglement::SchmidtPair<f64>;
pub type OutcomeBranch = measurement::OutcomeBranch<f64>;
