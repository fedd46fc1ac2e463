//! Effective-velocity formulation of the viscous shallow-water system in 1D and
//! radial symmetry: grids and operators, constitutive laws, heat-semigroup norms,
//! time integration and diagnostics.

#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod caloric;
pub mod diagnostics;
pub mod error;
pub mod evolution;
pub(crate) mod fft;
pub mod grid;
pub mod initial;
pub mod law;
pub(crate) mod linalg;
pub mod ops;
pub(crate) mod special;
pub mod state;
pub mod trajectory;

pub use error::{AbortKind, Error, Result};
pub use evolution::{Scheme, SolverConfig};
pub use grid::{Boundary, Grid, GridKind, GridSpec, Parity, ScalarField};
pub use initial::{InitialDataSpec, Mollification, MollifyVariant, Piece, Profile};
pub use law::PressureLaw;
pub use state::{AugmentedState, DENSITY_FLOOR};
pub use trajectory::{StepRecord, Trajectory};
