//! Numerical laboratory for spin Calogero-Moser systems, the symmetric-space
//! spin Ruijsenaars-Schneider model and the affine Toda soliton
//! correspondence.
//!
//! The crate is organised bottom-up:
//!
//! * [`lie`] - gl(N) primitives: the real trace pairing, projections onto the
//!   real subspaces used throughout, involutions and seeded sampling.
//! * [`rmatrix`] - spectral functions, the hyperbolic dynamical r-matrix and
//!   its Yang-Baxter residual, the trigonometric Lax matrix and its Lax
//!   connection.
//! * [`poisson`] - finite-difference Poisson brackets on the phase spaces,
//!   Jacobi and Poisson-map residuals, and the frozen sign conventions.
//! * [`cm`] - spin Calogero-Moser flows in compact and normal forms.
//! * [`integrals`] - conserved quantities from the spectral curve.
//! * [`rs`] - spin Ruijsenaars-Schneider flow on Hermitian matrices.
//! * [`toda`] - affine Toda solitons and the tau-function frame.
//! * [`ode`] - fixed-step and embedded Runge-Kutta integrators.

pub mod cm;
pub mod error;
pub mod integrals;
pub mod lie;
pub mod ode;
pub mod poisson;
pub mod rmatrix;
pub mod rs;
pub mod toda;

pub use error::{Error, Result};
pub use lie::{Matrix, SubspaceTag, C64};
pub use cm::{CmState, Form};
pub use rs::RsState;
pub use toda::{SolitonSpec, TodaFrame};
pub use integrals::IntegralsTable;
