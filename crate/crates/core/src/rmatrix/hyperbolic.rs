use crate::error::{Error, Result};
use crate::lie::{self, Matrix, C64};

use super::check_hyperbolic;

/// Precomputed hyperbolic kernel `-coth((q_i - q_j)/2) / 2` at a point `q`.
#[derive(Debug, Clone)]
pub struct HypKernel {
    q: Vec<C64>,
    coth: Matrix,
    csch2: Matrix,
}

impl HypKernel {
    pub fn new(q: &[C64]) -> Result<Self> {
        check_hyperbolic(q)?;
        let n = q.len();
        let mut coth = Matrix::zeros(n, n);
        let mut csch2 = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let h = (q[i] - q[j]) * 0.5;
                    let s = h.sinh();
                    coth[(i, j)] = h.cosh() / s;
                    csch2[(i, j)] = 1.0 / (s * s);
                }
            }
        }
        Ok(HypKernel {
            q: q.to_vec(),
            coth,
            csch2,
        })
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    /// `R(q) x = -1/2 sum_{i != j} coth((q_i - q_j)/2) x_ij e_ij`.
    pub fn apply(&self, x: &Matrix) -> Matrix {
        let n = self.n();
        Matrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::default()
            } else {
                -0.5 * self.coth[(i, j)] * x[(i, j)]
            }
        })
    }

    /// Directional derivative `dR(q)(h) x`.
    pub fn apply_derivative(&self, h: &[C64], x: &Matrix) -> Matrix {
        let n = self.n();
        Matrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::default()
            } else {
                0.25 * (h[i] - h[j]) * self.csch2[(i, j)] * x[(i, j)]
            }
        })
    }

    /// The diagonal element `<dR(q)(.) x, y>` defined by
    /// `(Z, lambda) = (dR(q)(lambda) x, y)` for every complex diagonal lambda.
    pub fn derivative_pairing(&self, x: &Matrix, y: &Matrix) -> Matrix {
        let n = self.n();
        let mut z = vec![C64::default(); n];
        for (k, zk) in z.iter_mut().enumerate() {
            let mut e = vec![C64::default(); n];
            e[k] = C64::new(1.0, 0.0);
            let a = lie::pair_unchecked(&self.apply_derivative(&e, x), y);
            e[k] = lie::I;
            let b = lie::pair_unchecked(&self.apply_derivative(&e, x), y);
            // (Z, e_kk) = 2 Re Z_k and (Z, i e_kk) = -2 Im Z_k
            *zk = C64::new(0.5 * a, -0.5 * b);
        }
        lie::diag(&z)
    }
}

fn check_dims(q: usize, x: &Matrix) -> Result<()> {
    let n = lie::check_element(x)?;
    if n != q {
        return Err(Error::DimensionMismatch { expected: q, got: n });
    }
    Ok(())
}

pub fn r_hyp_apply(q: &[C64], x: &Matrix) -> Result<Matrix> {
    check_dims(q.len(), x)?;
    Ok(HypKernel::new(q)?.apply(x))
}

pub fn r_hyp_apply_real(q: &[f64], x: &Matrix) -> Result<Matrix> {
    let qc: Vec<C64> = q.iter().map(|&v| C64::new(v, 0.0)).collect();
    r_hyp_apply(&qc, x)
}

pub fn dr_hyp_apply(q: &[C64], h: &[C64], x: &Matrix) -> Result<Matrix> {
    check_dims(q.len(), x)?;
    if h.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: q.len(),
            got: h.len(),
        });
    }
    Ok(HypKernel::new(q)?.apply_derivative(h, x))
}

/// Outcome of evaluating the modified dynamical Yang-Baxter equation.
#[derive(Debug, Clone)]
pub struct MdybeResidual {
    /// Left-hand side before the constant term is removed.
    pub lhs: Matrix,
    /// `lhs + c^2 [x, y]` with the fitted constant.
    pub residual: Matrix,
    /// Least-squares `c^2`; zero when `[x, y]` vanishes.
    pub fitted_c2: f64,
}

impl MdybeResidual {
    pub fn residual_norm(&self) -> f64 {
        lie::frobenius(&self.residual)
    }
}

/// Evaluates
///
/// ```text
/// [Rx, Ry] - R([Rx, y] + [x, Ry]) + dR(q)(P x)(y) - dR(q)(P y)(x) + <dR(q)(.) x, y>
/// ```
///
/// where `P` is the projection onto diagonals, and fits `-c^2 [x, y]` to it.
pub fn mdybe_residual(q: &[C64], x: &Matrix, y: &Matrix) -> Result<MdybeResidual> {
    check_dims(q.len(), x)?;
    check_dims(q.len(), y)?;
    let k = HypKernel::new(q)?;
    let rx = k.apply(x);
    let ry = k.apply(y);
    let mut lhs = lie::bracket(&rx, &ry) - k.apply(&(lie::bracket(&rx, y) + lie::bracket(x, &ry)));
    lhs += k.apply_derivative(&lie::diagonal(x), y);
    lhs -= k.apply_derivative(&lie::diagonal(y), x);
    lhs += k.derivative_pairing(x, y);

    let c = lie::bracket(x, y);
    let cc = lie::pair_unchecked(&c, &c);
    let scale = lie::frobenius(&c);
    let fitted_c2 = if scale > 1e-300 && cc.abs() > 1e-14 * scale * scale {
        -lie::pair_unchecked(&lhs, &c) / cc
    } else {
        0.0
    };
    let residual = &lhs + c.scale(fitted_c2);
    Ok(MdybeResidual {
        lhs,
        residual,
        fitted_c2,
    })
}
