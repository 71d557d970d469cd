//! Galerkin difference discretisations of the second-order wave equation.

pub mod analysis;
pub mod basis;
pub mod error;
pub mod fastpath;
pub mod harness;
pub mod linalg;
pub mod operators;
pub mod quadrature;
pub mod semidisc;
pub mod tensor;
pub mod timestep;

pub use basis::{GdBasis, Side};
pub use error::{Error, Result};
