//! Elliptic theta functions, dynamical R-matrices on `(C^2)^{⊗n}`, formal
//! series solvers for shift functional equations, and a seeded verification
//! harness for the dynamical Yang-Baxter, RLL and related identities.
//!
//! Everything is double-precision complex. The building blocks are:
//!
//! * [`theta`]: the odd theta function normalised by `θ'(0) = 1`, its
//!   derivatives, `θ'/θ` and `℘ = -(θ'/θ)'`.
//! * [`series`]: truncated Laurent series, jets in the formal step
//!   parameter, and order-by-order solvers for `φ`, `f_K` and `A`.
//! * [`kernels`]: the spaces `L_λ`, dual bases under the residue pairing
//!   and the projection onto `L_{-μ}` along regular series.
//! * [`rmatrix`]: the explicit R-matrices `R⁻`, `R⁺`, `R̄`, the classical
//!   r-matrix and the `φ`-gauge.
//! * [`dybe`]: dynamical shifts on tensor powers and residuals for every
//!   matrix identity.
//! * [`verify`]: seeded suites, records and JSON-serialisable reports.

pub mod dybe;
pub mod error;
pub mod kernels;
pub mod linalg;
pub mod params;
pub mod rmatrix;
pub mod series;
pub mod tensor;
pub mod theta;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use params::ModularParams;
pub use theta::{Theta, ThetaConfig};
