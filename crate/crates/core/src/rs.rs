//! Symmetric-space spin Ruijsenaars-Schneider flow on real diagonal `q` and
//! Hermitian `g`:
//!
//! ```text
//! q' = diag(g),    g' = g (R(q) g) - (R(q) g) g
//! ```
//!
//! with the hyperbolic `R(q) x = -1/2 sum_{i != j} coth((q_i - q_j)/2) x_ij e_ij`.
//! Entrywise the diagonal reads `g'_ii = sum_{k != i} coth((q_i - q_k)/2) |g_ik|^2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{self, Matrix, SubspaceTag, C64};
use crate::ode::{self, AdaptiveOptions, Scheme};
use crate::poisson::{self, Point, StablePoint};
use crate::rmatrix::HypKernel;

/// The integrator aborts once some `|q_i - q_j|` drops below this.
pub const COLLISION_THRESHOLD: f64 = 1e-6;

/// Largest condition number of `g` accepted at initialization.
pub const MAX_CONDITION: f64 = 1e12;

/// Tolerance of the per-call validation in [`central_flow`].
pub const CENTRAL_FLOW_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct RsState {
    pub q: Vec<f64>,
    pub g: Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RsTangent {
    pub q: Vec<f64>,
    pub g: Matrix,
}

/// How the diagonal of `g'` is formed. `Matrix` is the commutator form;
/// `HalfDiagonal` halves the diagonal entries, as a competing reading of the
/// component equations would.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalConvention {
    Matrix,
    HalfDiagonal,
}

fn min_separation(q: &[f64]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..q.len() {
        for j in (i + 1)..q.len() {
            m = m.min((q[i] - q[j]).abs());
        }
    }
    m
}

impl RsState {
    pub fn new(q: Vec<f64>, g: Matrix) -> Result<Self> {
        let n = lie::check_element(&g)?;
        if q.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: q.len() });
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite coordinate".into()));
        }
        let scale = 1.0 + lie::max_abs(&g);
        if !lie::membership(&g, SubspaceTag::Hermitian, lie::MEMBERSHIP_TOL * scale)? {
            return Err(Error::InvalidInput("g must be Hermitian".into()));
        }
        let gap = min_separation(&q);
        if !(gap > COLLISION_THRESHOLD) {
            let (i, j) = closest_pair(&q);
            return Err(Error::Collision { i, j, gap });
        }
        let sv = g.clone().singular_values();
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(smin * MAX_CONDITION > smax) {
            return Err(Error::InvalidInput(format!(
                "g is numerically singular (condition {:.3e})",
                smax / smin
            )));
        }
        Ok(RsState { q, g })
    }

    /// Random state with well separated `q` and a Gaussian Hermitian `g`.
    pub fn random_with<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let q = (0..n).map(|i| 1.2 * i as f64 + 0.3 * lie::gaussian(rng)).collect();
        let g = lie::random_element_with(SubspaceTag::Hermitian, n, rng);
        RsState { q, g }
    }

    pub fn random(n: usize, seed: u64) -> Self {
        Self::random_with(n, &mut lie::rng(seed))
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn pack(&self) -> Vec<f64> {
        let mut y = self.q.clone();
        y.extend(self.g.iter().map(|z| z.re));
        y.extend(self.g.iter().map(|z| z.im));
        y
    }

    pub fn unpack(n: usize, y: &[f64]) -> Self {
        let m = n * n;
        let g = Matrix::from_iterator(n, n, (0..m).map(|k| C64::new(y[n + k], y[n + m + k])));
        RsState { q: y[..n].to_vec(), g }
    }
}

impl RsTangent {
    pub fn pack(&self) -> Vec<f64> {
        let mut y = self.q.clone();
        y.extend(self.g.iter().map(|z| z.re));
        y.extend(self.g.iter().map(|z| z.im));
        y
    }
}

fn closest_pair(q: &[f64]) -> (usize, usize) {
    let mut best = (0, 1, f64::INFINITY);
    for i in 0..q.len() {
        for j in (i + 1)..q.len() {
            let d = (q[i] - q[j]).abs();
            if d < best.2 {
                best = (i, j, d);
            }
        }
    }
    (best.0, best.1)
}

fn kernel(q: &[f64]) -> Result<HypKernel> {
    let qc: Vec<C64> = q.iter().map(|&v| C64::new(v, 0.0)).collect();
    HypKernel::new(&qc)
}

/// `(Re diag(m), [g, R(q) m])` — the flow generated by a central function
/// whose symmetrized gradient is `m`.
fn central_field(x: &RsState, k: &HypKernel, m: &Matrix) -> RsTangent {
    let rm = k.apply(m);
    RsTangent {
        q: lie::diagonal(m).iter().map(|z| z.re).collect(),
        g: lie::bracket(&x.g, &rm),
    }
}

pub fn vector_field(x: &RsState) -> Result<RsTangent> {
    vector_field_variant(x, DiagonalConvention::Matrix)
}

pub fn vector_field_variant(x: &RsState, conv: DiagonalConvention) -> Result<RsTangent> {
    let k = kernel(&x.q)?;
    let mut t = central_field(x, &k, &x.g);
    if conv == DiagonalConvention::HalfDiagonal {
        for i in 0..x.n() {
            t.g[(i, i)] *= 0.5;
        }
    }
    Ok(t)
}

/// Flow of `f_k(g) = 2 Re tr(g^k) / k`: `q' = diag(g^k)`, `g' = [g, R(q) g^k]`.
///
/// Every call is checked against the bracket-generated flow of `f_k`
/// (finite-difference gradients); a mismatch above [`CENTRAL_FLOW_TOL`] is an
/// error rather than a silently wrong vector field.
pub fn central_flow(x: &RsState, k: u32) -> Result<RsTangent> {
    if k == 0 {
        return Err(Error::InvalidInput("central flow index must be at least 1".into()));
    }
    let kern = kernel(&x.q)?;
    let t = central_field(x, &kern, &poisson::matrix_power(&x.g, k));
    let h = poisson::rs_trace_power(k).with_fd(poisson::DEFAULT_FD_STEP, poisson::FdOrder::Second);
    let vf = Point::Rs(StablePoint {
        u: t.q.iter().map(|&v| C64::new(v, 0.0)).collect(),
        g: t.g.clone(),
    });
    let scale = 1.0 + lie::max_abs(&t.g);
    let residual = poisson::hamiltonian_flow_residual(&h, &vf, &Point::from(x))? / scale;
    if !(residual < CENTRAL_FLOW_TOL) {
        return Err(Error::FlowValidation {
            residual,
            tolerance: CENTRAL_FLOW_TOL,
        });
    }
    Ok(t)
}

/// Conserved quantities: `2 Re tr(g^k) / k` for `k = 1..=k_max` and the sorted
/// eigenvalues of `g`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RsInvariants {
    pub traces: Vec<f64>,
    pub eigenvalues: Vec<f64>,
}

pub fn invariants(x: &RsState, k_max: u32) -> RsInvariants {
    let mut traces = Vec::with_capacity(k_max as usize);
    let mut pw = Matrix::identity(x.n(), x.n());
    for k in 1..=k_max {
        pw = &pw * &x.g;
        traces.push(2.0 * pw.trace().re / k as f64);
    }
    RsInvariants {
        traces,
        eigenvalues: sorted_eigenvalues(&x.g),
    }
}

pub fn sorted_eigenvalues(g: &Matrix) -> Vec<f64> {
    let h = lie::proj(g, SubspaceTag::Hermitian);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().cloned().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

#[derive(Debug, Clone)]
pub struct RsTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<RsState>,
    pub hermiticity_defect: Vec<f64>,
    pub eigenvalues: Vec<Vec<f64>>,
    /// `2 Re tr(g^k) / k` for `k = 1..=N`.
    pub traces: Vec<Vec<f64>>,
}

impl RsTrajectory {
    pub fn max_hermiticity_defect(&self) -> f64 {
        self.hermiticity_defect.iter().cloned().fold(0.0, f64::max)
    }

    pub fn max_eigenvalue_drift(&self) -> f64 {
        max_drift(&self.eigenvalues)
    }

    pub fn max_trace_drift(&self) -> f64 {
        max_drift(&self.traces)
    }

    /// `max |q_i'' - (g_ii)'|` over interior samples, both derivatives from
    /// fourth-order stencils on the (uniform) output grid.
    pub fn acceleration_residual(&self) -> f64 {
        let s = &self.states;
        if s.len() < 5 {
            return 0.0;
        }
        let h = self.times[1] - self.times[0];
        let mut worst: f64 = 0.0;
        for k in 2..s.len() - 2 {
            for i in 0..s[k].n() {
                let q = |j: usize| s[j].q[i];
                let g = |j: usize| s[j].g[(i, i)].re;
                let qdd = (-q(k - 2) + 16.0 * q(k - 1) - 30.0 * q(k) + 16.0 * q(k + 1) - q(k + 2)) / (12.0 * h * h);
                let gd = (g(k - 2) - 8.0 * g(k - 1) + 8.0 * g(k + 1) - g(k + 2)) / (12.0 * h);
                worst = worst.max((qdd - gd).abs());
            }
        }
        worst
    }
}

fn max_drift(rows: &[Vec<f64>]) -> f64 {
    let first = &rows[0];
    rows.iter()
        .flat_map(|r| r.iter().zip(first).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}

pub fn integrate(x0: &RsState, t_final: f64, dt: f64, scheme: Scheme) -> Result<RsTrajectory> {
    integrate_with(x0, t_final, dt, scheme, &AdaptiveOptions::default())
}

pub fn integrate_with(
    x0: &RsState,
    t_final: f64,
    dt: f64,
    scheme: Scheme,
    opts: &AdaptiveOptions,
) -> Result<RsTrajectory> {
    let n = x0.n();
    kernel(&x0.q)?;
    let mut traj = RsTrajectory {
        times: Vec::new(),
        states: Vec::new(),
        hermiticity_defect: Vec::new(),
        eigenvalues: Vec::new(),
        traces: Vec::new(),
    };
    let rhs = |t: f64, y: &[f64]| {
        let x = RsState::unpack(n, y);
        let gap = min_separation(&x.q);
        if gap < COLLISION_THRESHOLD {
            return Err(Error::CollisionAbort { time: t, min_gap: gap });
        }
        Ok(vector_field(&x)?.pack())
    };
    ode::integrate(rhs, &x0.pack(), t_final, dt, scheme, opts, |t, y| {
        let x = RsState::unpack(n, y);
        let inv = invariants(&x, n as u32);
        traj.times.push(t);
        traj.hermiticity_defect.push(lie::defect(&x.g, SubspaceTag::Hermitian));
        traj.eigenvalues.push(inv.eigenvalues);
        traj.traces.push(inv.traces);
        traj.states.push(x);
        Ok(())
    })?;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_g_is_stationary() {
        let g = lie::diag_real(&[1.0, -2.0, 0.5]);
        let x = RsState::new(vec![0.0, 1.0, 2.5], g.clone()).unwrap();
        let v = vector_field(&x).unwrap();
        assert_eq!(v.q, vec![1.0, -2.0, 0.5]);
        assert!(lie::frobenius(&v.g) == 0.0);
        let traj = integrate(&x, 1.0, 0.01, Scheme::Rk4).unwrap();
        let last = traj.states.last().unwrap();
        assert!((last.q[1] - (1.0 - 2.0)).abs() < 1e-13);
        assert!(lie::frobenius(&(&last.g - g)) < 1e-15);
    }

    #[test]
    fn two_by_two_off_diagonal_component() {
        let g = Matrix::from_row_slice(2, 2, &[C64::new(1.5, 0.0), C64::new(0.3, 0.4), C64::new(0.3, -0.4), C64::new(-0.7, 0.0)]);
        let q = vec![0.8, -0.4];
        let x = RsState::new(q.clone(), g.clone()).unwrap();
        let v = vector_field(&x).unwrap();
        let coth = 1.0 / (0.5 * (q[0] - q[1])).tanh();
        let expected = 0.5 * coth * g[(0, 1)] * (g[(1, 1)] - g[(0, 0)]);
        assert!((v.g[(0, 1)] - expected).norm() < 1e-14);
    }

    #[test]
    fn component_expansion() {
        let x = RsState::random(4, 3);
        let v = vector_field(&x).unwrap();
        let n = 4;
        let coth = |a: f64| 1.0 / (0.5 * a).tanh();
        for i in 0..n {
            let diag: f64 = (0..n)
                .filter(|&k| k != i)
                .map(|k| coth(x.q[i] - x.q[k]) * x.g[(i, k)].norm_sqr())
                .sum();
            assert!((v.g[(i, i)].re - diag).abs() < 1e-13);
            assert!(v.g[(i, i)].im.abs() < 1e-14);
            for j in 0..n {
                if i == j {
                    continue;
                }
                let mut e = 0.5 * coth(x.q[i] - x.q[j]) * x.g[(i, j)] * (x.g[(j, j)] - x.g[(i, i)]);
                for k in 0..n {
                    if k != i && k != j {
                        e += 0.5 * (coth(x.q[i] - x.q[k]) - coth(x.q[k] - x.q[j])) * x.g[(i, k)] * x.g[(k, j)];
                    }
                }
                assert!((v.g[(i, j)] - e).norm() < 1e-13);
            }
        }
        assert!(lie::defect(&v.g, SubspaceTag::Hermitian) < 1e-14);
    }

    #[test]
    fn half_diagonal_variant_differs_only_on_diagonal() {
        let x = RsState::random(3, 4);
        let a = vector_field(&x).unwrap();
        let b = vector_field_variant(&x, DiagonalConvention::HalfDiagonal).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { a.g[(i, i)] * 0.5 } else { a.g[(i, j)] };
                assert_eq!(b.g[(i, j)], expected);
            }
        }
    }

    #[test]
    fn invariants_examples() {
        let x = RsState::new(vec![0.0, 1.0, 2.0], Matrix::identity(3, 3)).unwrap();
        let inv = invariants(&x, 3);
        assert_eq!(inv.traces[0], 6.0);
        assert_eq!(inv.eigenvalues, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn central_flow_examples() {
        let x = RsState::random(3, 5);
        let a = central_flow(&x, 1).unwrap();
        let b = vector_field(&x).unwrap();
        assert_eq!(a.q, b.q);
        assert!(lie::frobenius(&(a.g - b.g)) < 1e-15);
        for k in 2..4 {
            central_flow(&x, k).unwrap();
        }
        let d = RsState::new(vec![0.0, 1.0], lie::diag_real(&[2.0, -1.0])).unwrap();
        let f = central_flow(&d, 2).unwrap();
        assert_eq!(f.q, vec![4.0, 1.0]);
        assert!(lie::frobenius(&f.g) == 0.0);
        assert!(central_flow(&x, 0).is_err());
    }

    #[test]
    fn rejects_invalid_states() {
        assert!(RsState::new(vec![0.0, 1.0], lie::unit(2, 0, 1)).is_err());
        assert!(matches!(
            RsState::new(vec![1.0, 1.0], Matrix::identity(2, 2)),
            Err(Error::Collision { .. })
        ));
        assert!(RsState::new(vec![0.0, 1.0], Matrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn translation_equivariance() {
        let x = RsState::random(3, 6);
        let shifted = RsState {
            q: x.q.iter().map(|v| v + 0.7).collect(),
            g: x.g.clone(),
        };
        let a = vector_field(&x).unwrap();
        let b = vector_field(&shifted).unwrap();
        assert!(lie::frobenius(&(a.g - b.g)) < 1e-13);
    }
}
