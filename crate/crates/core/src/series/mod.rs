//! Truncated series arithmetic and solvers for shift functional equations.

pub mod jet;
pub mod laurent;
pub(crate) mod powser;
pub mod solvers;

pub use jet::{shift_jet, Jet, Param};
pub use laurent::{pairing, LaurentSeries};
