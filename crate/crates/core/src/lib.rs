//! Pseudo-spectral solver and adjoint-based optimal control for the
//! two-dimensional convective Brinkman–Forchheimer equations
//!
//! ```text
//! ∂t u + μAu + B(u) + αu + βC(u) = f + DU,   u(0) = u0
//! ```
//!
//! on the periodic square, together with the linearized and adjoint systems,
//! distributed and initial-data optimal control, and runtime checks for the
//! operator identities and inequalities the theory relies on.

pub mod adjoint;
pub mod assimilation;
pub mod control;
pub mod error;
pub mod forward;
pub mod linearized;
pub mod operators;
pub mod spectral;
pub mod stats;
pub mod verify;

pub use error::{CbfError, Result};
