//! gl(N, C) viewed as a real Lie algebra.
//!
//! Elements are plain `N x N` complex matrices. All pairings use the real
//! trace form `(x, y) = 2 Re tr(xy)`, which is nondegenerate on gl(N, C) and
//! on every subspace listed in [`SubspaceTag`].

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Matrix = DMatrix<Complex64>;

pub const I: C64 = C64::new(0.0, 1.0);

/// Default absolute tolerance for subspace membership.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Real subspaces of gl(N, C) used by the phase spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubspaceTag {
    Full,
    /// Real diagonal matrices.
    DiagReal,
    /// Purely imaginary diagonal matrices (the Lie algebra of the torus).
    DiagImag,
    /// Complex diagonal matrices.
    Diag,
    SkewHermitian,
    SkewSymmetricReal,
    Hermitian,
    /// Matrices with vanishing diagonal.
    DiagFree,
}

impl SubspaceTag {
    pub const ALL: [SubspaceTag; 8] = [
        SubspaceTag::Full,
        SubspaceTag::DiagReal,
        SubspaceTag::DiagImag,
        SubspaceTag::Diag,
        SubspaceTag::SkewHermitian,
        SubspaceTag::SkewSymmetricReal,
        SubspaceTag::Hermitian,
        SubspaceTag::DiagFree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SubspaceTag::Full => "full",
            SubspaceTag::DiagReal => "diag_real",
            SubspaceTag::DiagImag => "diag_imag",
            SubspaceTag::Diag => "diag",
            SubspaceTag::SkewHermitian => "skew_hermitian",
            SubspaceTag::SkewSymmetricReal => "skew_symmetric_real",
            SubspaceTag::Hermitian => "hermitian",
            SubspaceTag::DiagFree => "diag_free",
        }
    }

    /// Real dimension of the subspace inside gl(n, C).
    pub fn dim(self, n: usize) -> usize {
        match self {
            SubspaceTag::Full => 2 * n * n,
            SubspaceTag::DiagReal | SubspaceTag::DiagImag => n,
            SubspaceTag::Diag => 2 * n,
            SubspaceTag::SkewHermitian | SubspaceTag::Hermitian => n * n,
            SubspaceTag::SkewSymmetricReal => n * (n - 1) / 2,
            SubspaceTag::DiagFree => 2 * n * (n - 1),
        }
    }
}

/// Which involution of gl(N, C) to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Involution {
    /// Conjugation with respect to u(N): `x -> -x*`.
    Tau,
    /// The anti-morphism `x -> x*`.
    S,
    /// Cartan involution of gl(N, R): `x -> -x^T`.
    Theta,
}

pub fn check_square(x: &Matrix) -> Result<usize> {
    if x.nrows() != x.ncols() {
        return Err(Error::InvalidInput(format!(
            "element must be square, got {}x{}",
            x.nrows(),
            x.ncols()
        )));
    }
    if x.nrows() == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    Ok(x.nrows())
}

/// Validates an algebra element: square, nonempty, finite entries.
pub fn check_element(x: &Matrix) -> Result<usize> {
    let n = check_square(x)?;
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput("non-finite matrix entry".into()));
    }
    Ok(n)
}

fn check_same(x: &Matrix, y: &Matrix) -> Result<()> {
    if x.shape() != y.shape() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            got: y.nrows(),
        });
    }
    Ok(())
}

/// Matrix unit `e_ij`.
pub fn unit(n: usize, i: usize, j: usize) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

pub fn diag(entries: &[C64]) -> Matrix {
    Matrix::from_diagonal(&nalgebra::DVector::from_column_slice(entries))
}

pub fn diag_real(entries: &[f64]) -> Matrix {
    let v: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
    diag(&v)
}

pub fn diagonal(x: &Matrix) -> Vec<C64> {
    (0..x.nrows()).map(|i| x[(i, i)]).collect()
}

/// `(x, y) = 2 Re tr(xy)` without forming the product.
pub fn pair_unchecked(x: &Matrix, y: &Matrix) -> f64 {
    let n = x.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let a = x[(i, j)];
            let b = y[(j, i)];
            acc += a.re * b.re - a.im * b.im;
        }
    }
    2.0 * acc
}

pub fn pair(x: &Matrix, y: &Matrix) -> Result<f64> {
    check_same(x, y)?;
    Ok(pair_unchecked(x, y))
}

pub fn bracket(x: &Matrix, y: &Matrix) -> Matrix {
    x * y - y * x
}

pub fn frobenius(x: &Matrix) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(x: &Matrix) -> f64 {
    x.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn proj(x: &Matrix, tag: SubspaceTag) -> Matrix {
    let n = x.nrows();
    match tag {
        SubspaceTag::Full => x.clone(),
        SubspaceTag::DiagReal => Matrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(x[(i, i)].re, 0.0)
            } else {
                C64::default()
            }
        }),
        SubspaceTag::DiagImag => Matrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(0.0, x[(i, i)].im)
            } else {
                C64::default()
            }
        }),
        SubspaceTag::Diag => {
            Matrix::from_fn(n, n, |i, j| if i == j { x[(i, i)] } else { C64::default() })
        }
        SubspaceTag::SkewHermitian => (x - x.adjoint()).scale(0.5),
        SubspaceTag::Hermitian => (x + x.adjoint()).scale(0.5),
        SubspaceTag::SkewSymmetricReal => {
            Matrix::from_fn(n, n, |i, j| C64::new(0.5 * (x[(i, j)].re - x[(j, i)].re), 0.0))
        }
        SubspaceTag::DiagFree => {
            Matrix::from_fn(n, n, |i, j| if i == j { C64::default() } else { x[(i, j)] })
        }
    }
}

/// Frobenius distance from `x` to the subspace `tag`.
pub fn defect(x: &Matrix, tag: SubspaceTag) -> f64 {
    frobenius(&(x - proj(x, tag)))
}

pub fn membership(x: &Matrix, tag: SubspaceTag, tol: f64) -> Result<bool> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    Ok(defect(x, tag) < tol)
}

pub fn involution(x: &Matrix, which: Involution) -> Matrix {
    match which {
        Involution::Tau => -x.adjoint(),
        Involution::S => x.adjoint(),
        Involution::Theta => -x.transpose(),
    }
}

/// A real basis of the subspace, orthogonal for the trace pairing.
///
/// Every basis vector has `(b, b) = +-2` or `+-4`, so gradients can be read off
/// directional derivatives without a Gram solve.
pub fn basis(tag: SubspaceTag, n: usize) -> Vec<Matrix> {
    let one = C64::new(1.0, 0.0);
    let hermitian = || {
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            out.push(unit(n, i, i));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let mut a = Matrix::zeros(n, n);
                a[(i, j)] = one;
                a[(j, i)] = one;
                out.push(a);
                let mut b = Matrix::zeros(n, n);
                b[(i, j)] = -I;
                b[(j, i)] = I;
                out.push(b);
            }
        }
        out
    };
    match tag {
        SubspaceTag::Hermitian => hermitian(),
        SubspaceTag::SkewHermitian => hermitian().into_iter().map(|h| h * I).collect(),
        SubspaceTag::Full => {
            let h = hermitian();
            let k: Vec<Matrix> = h.iter().map(|m| m * I).collect();
            h.into_iter().chain(k).collect()
        }
        SubspaceTag::DiagReal => (0..n).map(|i| unit(n, i, i)).collect(),
        SubspaceTag::DiagImag => (0..n).map(|i| unit(n, i, i) * I).collect(),
        SubspaceTag::Diag => (0..n)
            .map(|i| unit(n, i, i))
            .chain((0..n).map(|i| unit(n, i, i) * I))
            .collect(),
        SubspaceTag::SkewSymmetricReal => {
            let mut out = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    out.push(unit(n, i, j) - unit(n, j, i));
                }
            }
            out
        }
        SubspaceTag::DiagFree => {
            let mut out = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    let s = unit(n, i, j) + unit(n, j, i);
                    let a = unit(n, i, j) - unit(n, j, i);
                    out.push(s.clone());
                    out.push(a.clone() * I);
                    out.push(s * I);
                    out.push(a);
                }
            }
            out
        }
    }
}

/// Pairing-dual of a linear functional given by its values on `basis(tag)`.
///
/// Returns the unique element `g` of the subspace with `(g, b_k) = values[k]`.
pub fn dual_from_basis(n: usize, basis: &[Matrix], values: &[f64]) -> Matrix {
    debug_assert_eq!(basis.len(), values.len());
    let mut g = Matrix::zeros(n, n);
    for (b, &v) in basis.iter().zip(values) {
        let norm = pair_unchecked(b, b);
        g += b.scale(v / norm);
    }
    g
}

/// Eigenvalues of a general complex matrix (complex Schur form).
pub fn eigenvalues(x: &Matrix) -> Result<Vec<C64>> {
    check_square(x)?;
    let schur = nalgebra::Schur::try_new(x.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::InvalidInput("Schur iteration did not converge".into()))?;
    let ev = schur
        .eigenvalues()
        .ok_or_else(|| Error::InvalidInput("Schur form is not triangular".into()))?;
    Ok(ev.iter().copied().collect())
}

/// Distance between two eigenvalue multisets of equal size: the smallest
/// largest-pairwise gap over all matchings (exhaustive, for small sizes).
pub fn spectrum_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len(), "spectra of different sizes");
    fn go(a: &[C64], b: &mut Vec<C64>, k: usize, cur: f64, best: &mut f64) {
        if cur >= *best {
            return;
        }
        if k == a.len() {
            *best = cur;
            return;
        }
        for i in k..b.len() {
            b.swap(k, i);
            go(a, b, k + 1, cur.max((a[k] - b[k]).norm()), best);
            b.swap(k, i);
        }
    }
    let mut best = f64::INFINITY;
    go(a, &mut b.to_vec(), 0, 0.0, &mut best);
    if a.is_empty() { 0.0 } else { best }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream derived from a base seed, for per-trial sampling.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(trial.wrapping_add(1));
    r
}

pub fn gaussian<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

pub fn random_matrix<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(n, n, |_, _| C64::new(gaussian(rng), gaussian(rng)))
}

/// Random element of `tag` drawn from a standard Gaussian on the ambient space.
pub fn random_element_with<R: rand::Rng + ?Sized>(tag: SubspaceTag, n: usize, rng: &mut R) -> Matrix {
    proj(&random_matrix(n, rng), tag)
}

pub fn random_element(tag: SubspaceTag, n: usize, seed: u64) -> Matrix {
    random_element_with(tag, n, &mut rng(seed))
}
