//! Dynamical r-matrices and Lax matrices.
//!
//! Two kernels live here. The hyperbolic `R(q)` acts on gl(N) and drives the
//! groupoid Poisson structure and the spin RS flow. The trigonometric kernel
//! with spectral parameter builds the spin CM Lax matrix `L(z)` and the
//! matching connection `B(z)` with `dL/dt = [L, B]`.

mod hyperbolic;
mod lax;
mod spectral;

pub use hyperbolic::{dr_hyp_apply, mdybe_residual, r_hyp_apply, r_hyp_apply_real, MdybeResidual};
pub use hyperbolic::HypKernel;
pub use lax::{lax_cm, lax_cm_tilde, lax_connection, laurent_m1, CmLax, MOMENTUM_TOL};
pub use spectral::{c_of_z, c_prime, check_pole, d_of_z, d_prime, POLE_CUTOFF};

use crate::error::{Error, Result};
use crate::lie::C64;

/// Kernel cutoff shared by the trigonometric and hyperbolic kernels.
pub const KERNEL_CUTOFF: f64 = 1e-8;

/// Checks `|sinh((q_i - q_j)/2)| > KERNEL_CUTOFF` for all pairs.
pub fn check_hyperbolic(q: &[C64]) -> Result<()> {
    for i in 0..q.len() {
        for j in (i + 1)..q.len() {
            let s = ((q[i] - q[j]) * 0.5).sinh().norm();
            if !(s > KERNEL_CUTOFF) {
                return Err(Error::Collision { i, j, gap: s });
            }
        }
    }
    Ok(())
}

/// Checks `|sin((q_i - q_j)/2)| > KERNEL_CUTOFF` for all pairs.
pub fn check_trigonometric(q: &[f64]) -> Result<()> {
    for i in 0..q.len() {
        for j in (i + 1)..q.len() {
            let s = ((q[i] - q[j]) * 0.5).sin().abs();
            if !(s > KERNEL_CUTOFF) {
                return Err(Error::Collision { i, j, gap: s });
            }
        }
    }
    Ok(())
}
