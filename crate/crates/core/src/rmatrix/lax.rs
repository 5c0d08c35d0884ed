use crate::error::{Error, Result};
use crate::lie::{self, Matrix, C64};

use super::check_trigonometric;
use super::spectral::{c_of_z, c_prime, d_of_z, d_prime};

/// Diagonal entries of the spin variable above this size (relative to
/// `1 + max|xi|`) violate the momentum-zero condition.
pub const MOMENTUM_TOL: f64 = 1e-10;

/// Spin Calogero-Moser Lax data at a phase point, sampled in `z` on demand.
#[derive(Debug, Clone)]
pub struct CmLax {
    q: Vec<f64>,
    p: Vec<f64>,
    xi: Matrix,
    /// `c(q_i - q_j)` off the diagonal.
    cq: Vec<Vec<f64>>,
}

impl CmLax {
    pub fn new(q: &[f64], p: &[f64], xi: &Matrix) -> Result<Self> {
        let n = lie::check_element(xi)?;
        for len in [q.len(), p.len()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, got: len });
            }
        }
        check_trigonometric(q)?;
        let cq = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { 0.0 } else { c_real(q[i] - q[j]) })
                    .collect()
            })
            .collect();
        Ok(CmLax {
            q: q.to_vec(),
            p: p.to_vec(),
            xi: xi.clone(),
            cq,
        })
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn is_momentum_zero(&self) -> bool {
        let scale = 1.0 + lie::max_abs(&self.xi);
        (0..self.n()).all(|i| self.xi[(i, i)].norm() <= MOMENTUM_TOL * scale)
    }

    fn build(&self, z: C64, twisted: bool) -> Result<Matrix> {
        let cz = c_of_z(z)?;
        let dz = d_of_z(z)?;
        let n = self.n();
        Ok(Matrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(self.p[i], 0.0) + dz * self.xi[(i, i)]
            } else {
                let a = self.q[i] - self.q[j];
                let mut v = (cz + self.cq[i][j]) * self.xi[(i, j)];
                if twisted {
                    v *= (z * a / 12.0).exp();
                }
                v
            }
        }))
    }

    /// `L(z) = p + d(z) P xi + sum_{i != j} (c(z) + c(q_i - q_j)) e^{z (q_i - q_j)/12} xi_ij e_ij`.
    pub fn l(&self, z: C64) -> Result<Matrix> {
        self.build(z, true)
    }

    /// `L(z)` conjugated by `exp(-z q / 12)`; same characteristic polynomial.
    pub fn l_tilde(&self, z: C64) -> Result<Matrix> {
        self.build(z, false)
    }

    /// Coefficient of `z^{-1}` in the Laurent expansion of `L(z)/z` at zero,
    /// i.e. the constant term of `L(z)` once the pole `xi / z` is removed.
    pub fn m_minus1(&self) -> Matrix {
        let n = self.n();
        Matrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(self.p[i], 0.0)
            } else {
                let a = self.q[i] - self.q[j];
                (self.cq[i][j] + a / 12.0) * self.xi[(i, j)]
            }
        })
    }

    /// Kernel contraction `F(q, w)[eta]` and its `w`-derivative.
    fn contract(&self, w: C64, eta: &Matrix, derivative: bool) -> Result<Matrix> {
        let n = self.n();
        let (cw, dw) = if derivative {
            (c_prime(w)?, d_prime(w)?)
        } else {
            (c_of_z(w)?, d_of_z(w)?)
        };
        let c0 = c_of_z(w)?;
        Ok(Matrix::from_fn(n, n, |r, s| {
            if r == s {
                dw * eta[(r, r)]
            } else {
                // slot (r, s) pairs with the kernel term e_sr (x) e_rs
                let a = self.q[s] - self.q[r];
                let e = (w * a / 12.0).exp();
                let coeff = if derivative {
                    (cw + (c0 + self.cq[s][r]) * (a / 12.0)) * e
                } else {
                    (cw + self.cq[s][r]) * e
                };
                coeff * eta[(r, s)]
            }
        }))
    }

    /// Lax connection `B(z)` with `dL(z)/dt = [L(z), B(z)]` along the
    /// momentum-zero spin CM flow.
    pub fn connection(&self, z: C64) -> Result<Matrix> {
        if !self.is_momentum_zero() {
            return Err(Error::Precondition(
                "Lax connection requires a momentum-zero spin (vanishing diagonal)".into(),
            ));
        }
        let l = self.l(z)?;
        let w = -z;
        let b = l / (2.0 * z) + self.contract(w, &self.m_minus1(), false)? + self.contract(w, &self.xi, true)?;
        Ok(b)
    }
}

/// `c(x)` for real `x`.
pub(crate) fn c_real(x: f64) -> f64 {
    0.5 / (0.5 * x).tan()
}

pub fn lax_cm(q: &[f64], p: &[f64], xi: &Matrix, z: C64) -> Result<Matrix> {
    CmLax::new(q, p, xi)?.l(z)
}

pub fn lax_cm_tilde(q: &[f64], p: &[f64], xi: &Matrix, z: C64) -> Result<Matrix> {
    CmLax::new(q, p, xi)?.l_tilde(z)
}

pub fn lax_connection(q: &[f64], p: &[f64], xi: &Matrix, z: C64) -> Result<Matrix> {
    CmLax::new(q, p, xi)?.connection(z)
}

pub fn laurent_m1(q: &[f64], p: &[f64], xi: &Matrix) -> Result<Matrix> {
    Ok(CmLax::new(q, p, xi)?.m_minus1())
}
