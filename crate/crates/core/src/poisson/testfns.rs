use rand::Rng;

use super::{Gradient, Observable, Point, Space, StablePoint, AmbientCmPoint, GroupoidPoint};
use crate::error::Result;
use crate::lie::{self, Matrix, SubspaceTag, C64};

fn cdiag<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> Matrix {
    let d: Vec<C64> = (0..n)
        .map(|_| C64::new(scale * lie::gaussian(rng), scale * lie::gaussian(rng)))
        .collect();
    lie::diag(&d)
}

/// Minimal pairwise distance of sampled Cartan coordinates. Closer to the
/// walls the kernels blow up and finite-difference brackets lose accuracy.
pub const MIN_SEPARATION: f64 = 0.3;

fn chamber<R: Rng + ?Sized>(n: usize, imag: f64, rng: &mut R) -> Vec<C64> {
    loop {
        let u: Vec<C64> = (0..n)
            .map(|i| C64::new(1.1 * i as f64 + 0.25 * lie::gaussian(rng), imag * lie::gaussian(rng)))
            .collect();
        let separated = (0..n).all(|i| (i + 1..n).all(|j| (u[i] - u[j]).norm() >= MIN_SEPARATION));
        if separated {
            return u;
        }
    }
}

pub fn random_groupoid_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> GroupoidPoint {
    let u = chamber(n, 0.3, rng);
    let v = chamber(n, 0.3, rng);
    let g = Matrix::identity(n, n) + lie::random_matrix(n, rng).scale(0.4);
    GroupoidPoint { u, g, v }
}

pub fn random_stable_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> StablePoint {
    let u = chamber(n, 0.3, rng);
    let g = lie::random_element_with(SubspaceTag::Hermitian, n, rng);
    StablePoint { u, g }
}

pub fn random_ambient_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> AmbientCmPoint {
    let q = (0..n).map(|_| C64::new(lie::gaussian(rng), lie::gaussian(rng))).collect();
    let p = (0..n).map(|_| C64::new(lie::gaussian(rng), lie::gaussian(rng))).collect();
    let xi = lie::random_matrix(n, rng).scale(0.7);
    AmbientCmPoint { q, p, xi }
}

/// `phi(x, y, z) = (a, x) + (b, z) + (A, y) + (B y C y) + sin((a2, x) + (b2, z) + (A2, y))`
/// with `x, z` diagonal and `y` a matrix, where `(B y C y) = 2 Re tr(B y C y)`.
#[derive(Debug, Clone)]
struct TestFn {
    a: Matrix,
    b: Matrix,
    a2: Matrix,
    b2: Matrix,
    m: Matrix,
    m2: Matrix,
    qb: Matrix,
    qc: Matrix,
}

impl TestFn {
    fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        TestFn {
            a: cdiag(n, 0.5, rng),
            b: cdiag(n, 0.5, rng),
            a2: cdiag(n, 0.3, rng),
            b2: cdiag(n, 0.3, rng),
            m: lie::random_matrix(n, rng).scale(0.5),
            m2: lie::random_matrix(n, rng).scale(0.3),
            qb: lie::random_matrix(n, rng).scale(0.3),
            qc: lie::random_matrix(n, rng).scale(0.3),
        }
    }

    fn value(&self, x: &Matrix, y: &Matrix, z: &Matrix) -> f64 {
        let p = lie::pair_unchecked;
        let quad = 2.0 * (&self.qb * y * &self.qc * y).trace().re;
        p(&self.a, x) + p(&self.b, z) + p(&self.m, y) + quad + (p(&self.a2, x) + p(&self.b2, z) + p(&self.m2, y)).sin()
    }

    /// Additive gradients in `x`, `z` and `y`.
    fn gradient(&self, x: &Matrix, y: &Matrix, z: &Matrix) -> (Matrix, Matrix, Matrix) {
        let p = lie::pair_unchecked;
        let c = C64::new((p(&self.a2, x) + p(&self.b2, z) + p(&self.m2, y)).cos(), 0.0);
        let gx = &self.a + &self.a2 * c;
        let gz = &self.b + &self.b2 * c;
        let gy = &self.m + &self.qc * y * &self.qb + &self.qb * y * &self.qc + &self.m2 * c;
        (gx, gz, gy)
    }

    fn groupoid_gradient(&self, s: &GroupoidPoint) -> Gradient {
        let (gx, gz, gy) = self.gradient(&lie::diag(&s.u), &s.g, &lie::diag(&s.v));
        Gradient {
            d1: gx,
            d2: gz,
            left: &s.g * &gy,
            right: &gy * &s.g,
        }
    }
}

fn conj_diag(d: &Matrix) -> Matrix {
    d.map(|z| z.conj())
}

/// A random smooth observable on `space` with analytic gradients, built from
/// linear, quadratic and oscillatory terms so that brackets are nontrivial.
pub fn random_test_function<R: Rng + ?Sized>(space: Space, n: usize, rng: &mut R) -> Observable {
    let t = TestFn::random(n, rng);
    match space {
        Space::GroupoidFull => {
            let t2 = t.clone();
            Observable::new(space, move |x| {
                let s = x.as_groupoid().expect("space checked by Observable");
                Ok(t.value(&lie::diag(&s.u), &s.g, &lie::diag(&s.v)))
            })
            .with_gradient(move |x| Ok(t2.groupoid_gradient(x.as_groupoid().expect("space checked by Observable"))))
        }
        Space::RsStable => {
            let t2 = t.clone();
            Observable::new(space, move |x| {
                let s = x.as_stable().expect("space checked by Observable");
                let u = lie::diag(&s.u);
                Ok(t.value(&u, &s.g, &conj_diag(&u)))
            })
            .with_gradient(move |x| {
                let s = x.as_stable().expect("space checked by Observable");
                let full = t2.groupoid_gradient(&super::stable_to_groupoid(s));
                let n = s.u.len();
                // symmetrized gradients of the restriction
                Ok(Gradient {
                    d1: (&full.d1 + conj_diag(&full.d2)).scale(0.5),
                    d2: Matrix::zeros(n, n),
                    left: (&full.left + full.right.adjoint()).scale(0.5),
                    right: Matrix::zeros(n, n),
                })
            })
        }
        Space::CmStable | Space::CmAmbient => {
            let t2 = t.clone();
            let eval = move |x: &Point| -> Result<f64> {
                Ok(match x {
                    Point::Cm(s) => t.value(&lie::diag_real(&s.q), &s.xi, &lie::diag_real(&s.p)),
                    Point::CmAmbient(s) => t.value(&lie::diag(&s.q), &s.xi, &lie::diag(&s.p)),
                    _ => unreachable!("space checked by Observable"),
                })
            };
            Observable::new(space, eval).with_gradient(move |x| {
                let (gq, gp, gxi) = match x {
                    Point::Cm(s) => {
                        let (a, b, c) = t2.gradient(&lie::diag_real(&s.q), &s.xi, &lie::diag_real(&s.p));
                        (
                            lie::proj(&a, SubspaceTag::DiagReal),
                            lie::proj(&b, SubspaceTag::DiagReal),
                            lie::proj(&c, s.form.spin_tag()),
                        )
                    }
                    Point::CmAmbient(s) => t2.gradient(&lie::diag(&s.q), &s.xi, &lie::diag(&s.p)),
                    _ => unreachable!("space checked by Observable"),
                };
                let n = gq.nrows();
                Ok(Gradient {
                    d1: gq,
                    d2: gp,
                    left: gxi,
                    right: Matrix::zeros(n, n),
                })
            })
        }
    }
}
