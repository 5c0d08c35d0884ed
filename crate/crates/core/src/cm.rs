//! Spin Calogero-Moser flows for gl(N) in compact (`xi` skew-Hermitian) and
//! normal (`xi` real skew-symmetric) forms.
//!
//! The phase point is `(q, p, xi)` with `q, p` real and `xi` in the spin
//! subspace of the form. The Hamiltonian is
//!
//! ```text
//! H = 1/2 sum p_i^2 + 1/8 sum_{i != j} (1 / sin^2((q_i - q_j)/2) - 1/3) |xi_ij|^2
//! ```
//!
//! and on the momentum-zero level (vanishing diagonal of `xi`) its flow is
//!
//! ```text
//! q' = p,
//! p'_i = 1/4 sum_k cos((q_i - q_k)/2) / sin^3((q_i - q_k)/2) |xi_ik|^2,
//! xi' = [xi, -1/4 sum_{i != j} xi_ij / sin^2((q_i - q_j)/2) e_ij].
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{self, Matrix, SubspaceTag, C64};
use crate::ode::{self, AdaptiveOptions, Scheme};
use crate::rmatrix::{check_trigonometric, CmLax, MOMENTUM_TOL};

/// The integrator aborts once some `|sin((q_i - q_j)/2)|` drops below this.
pub const COLLISION_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    Compact,
    Normal,
}

impl Form {
    pub fn spin_tag(self) -> SubspaceTag {
        match self {
            Form::Compact => SubspaceTag::SkewHermitian,
            Form::Normal => SubspaceTag::SkewSymmetricReal,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Form::Compact => "compact",
            Form::Normal => "normal",
        }
    }
}

impl std::str::FromStr for Form {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "compact" => Ok(Form::Compact),
            "normal" => Ok(Form::Normal),
            other => Err(Error::InvalidInput(format!("unknown form '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CmState {
    pub form: Form,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub xi: Matrix,
}

/// Velocity `(q', p', xi')` at a phase point.
#[derive(Debug, Clone, PartialEq)]
pub struct CmTangent {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub xi: Matrix,
}

impl CmState {
    /// Validates dimensions, finiteness, the collision guard and membership
    /// of `xi` in the spin subspace of `form`.
    pub fn new(form: Form, q: Vec<f64>, p: Vec<f64>, xi: Matrix) -> Result<Self> {
        let n = lie::check_element(&xi)?;
        for v in [&q, &p] {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: v.len() });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput("non-finite coordinate".into()));
            }
        }
        check_trigonometric(&q)?;
        let scale = 1.0 + lie::max_abs(&xi);
        if !lie::membership(&xi, form.spin_tag(), lie::MEMBERSHIP_TOL * scale)? {
            return Err(Error::InvalidInput(format!(
                "spin variable is not in the {} subspace",
                form.spin_tag().name()
            )));
        }
        Ok(CmState { form, q, p, xi })
    }

    /// Random momentum-zero state in the ordered chamber `q_1 > ... > q_N`
    /// with `q_1 - q_N < 2 pi`.
    pub fn random_with<R: rand::Rng + ?Sized>(form: Form, n: usize, rng: &mut R) -> Self {
        let s = 2.0 * std::f64::consts::PI / (n as f64 + 0.5);
        let q = (0..n)
            .map(|i| (n - 1 - i) as f64 * s + 0.15 * s * (2.0 * rng.random::<f64>() - 1.0))
            .collect();
        let p = (0..n).map(|_| lie::gaussian(rng)).collect();
        let xi = lie::proj(&lie::random_element_with(form.spin_tag(), n, rng), SubspaceTag::DiagFree);
        CmState { form, q, p, xi }
    }

    pub fn random(form: Form, n: usize, seed: u64) -> Self {
        Self::random_with(form, n, &mut lie::rng(seed))
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn is_momentum_zero(&self) -> bool {
        momentum(self).iter().all(|z| z.norm() <= MOMENTUM_TOL * (1.0 + lie::max_abs(&self.xi)))
    }

    /// Smallest `|sin((q_i - q_j)/2)|` over pairs; infinite for `N = 1`.
    pub fn min_gap(&self) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..self.n() {
            for j in (i + 1)..self.n() {
                m = m.min((0.5 * (self.q[i] - self.q[j])).sin().abs());
            }
        }
        m
    }

    /// Flat real coordinates `(q, p, Re xi, Im xi)` in column-major order.
    pub fn pack(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(2 * self.n() + 2 * self.xi.len());
        y.extend_from_slice(&self.q);
        y.extend_from_slice(&self.p);
        y.extend(self.xi.iter().map(|z| z.re));
        y.extend(self.xi.iter().map(|z| z.im));
        y
    }

    pub fn unpack(form: Form, n: usize, y: &[f64]) -> Self {
        let m = n * n;
        let q = y[..n].to_vec();
        let p = y[n..2 * n].to_vec();
        let xi = Matrix::from_iterator(n, n, (0..m).map(|k| C64::new(y[2 * n + k], y[2 * n + m + k])));
        CmState { form, q, p, xi }
    }

    /// `xi -> d xi d*` for a unitary diagonal `d`.
    pub fn conjugate_spin(&self, d: &[C64]) -> Self {
        let dm = lie::diag(d);
        CmState {
            xi: &dm * &self.xi * dm.adjoint(),
            ..self.clone()
        }
    }
}

impl CmTangent {
    pub fn pack(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(2 * self.q.len() + 2 * self.xi.len());
        y.extend_from_slice(&self.q);
        y.extend_from_slice(&self.p);
        y.extend(self.xi.iter().map(|z| z.re));
        y.extend(self.xi.iter().map(|z| z.im));
        y
    }
}

fn spin_weight(a: f64) -> f64 {
    1.0 / (0.5 * a).sin().powi(2) - 1.0 / 3.0
}

pub fn hamiltonian(x: &CmState) -> Result<f64> {
    check_trigonometric(&x.q)?;
    Ok(hamiltonian_unchecked(x))
}

fn hamiltonian_unchecked(x: &CmState) -> f64 {
    let n = x.n();
    let kinetic: f64 = 0.5 * x.p.iter().map(|v| v * v).sum::<f64>();
    let mut spin = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                spin += spin_weight(x.q[i] - x.q[j]) * x.xi[(i, j)].norm_sqr();
            }
        }
    }
    kinetic + spin / 8.0
}

/// Partial derivatives of `H` in `q`, `p` and the pairing-dual of its
/// `xi`-derivative inside the spin subspace.
pub fn hamiltonian_partials(x: &CmState) -> Result<(Vec<f64>, Vec<f64>, Matrix)> {
    check_trigonometric(&x.q)?;
    let n = x.n();
    let mut dq = vec![0.0; n];
    let mut dxi = Matrix::zeros(n, n);
    for i in 0..n {
        for k in 0..n {
            if i != k {
                let h = 0.5 * (x.q[i] - x.q[k]);
                dq[i] -= 0.25 * h.cos() / h.sin().powi(3) * x.xi[(i, k)].norm_sqr();
                dxi[(i, k)] = -0.125 * spin_weight(x.q[i] - x.q[k]) * x.xi[(i, k)];
            }
        }
    }
    Ok((dq, x.p.clone(), dxi))
}

/// Right-hand side of the momentum-zero equations of motion.
pub fn vector_field(x: &CmState) -> Result<CmTangent> {
    if !x.is_momentum_zero() {
        return Err(Error::Precondition(
            "the spin CM equations of motion require momentum zero (vanishing diagonal of xi)".into(),
        ));
    }
    check_trigonometric(&x.q)?;
    Ok(vector_field_unchecked(x))
}

fn vector_field_unchecked(x: &CmState) -> CmTangent {
    let n = x.n();
    let mut pd = vec![0.0; n];
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for k in 0..n {
            if i != k {
                let h = 0.5 * (x.q[i] - x.q[k]);
                let s = h.sin();
                pd[i] += 0.25 * h.cos() / (s * s * s) * x.xi[(i, k)].norm_sqr();
                a[(i, k)] = x.xi[(i, k)] * (-0.25 / (s * s));
            }
        }
    }
    CmTangent {
        q: x.p.clone(),
        p: pd,
        xi: lie::bracket(&x.xi, &a),
    }
}

/// Momentum map of the diagonal torus action: `-diag(xi)`.
pub fn momentum(x: &CmState) -> Vec<C64> {
    lie::diagonal(&x.xi).into_iter().map(|z| -z).collect()
}

/// Unique unitary diagonal `h` with `h_1 = 1` such that `h* xi h` has a
/// positive real superdiagonal. Returns `(diag(h), h* xi h)`.
pub fn gauge_fix(xi: &Matrix) -> Result<(Vec<C64>, Matrix)> {
    let n = lie::check_element(xi)?;
    let scale = 1.0 + lie::max_abs(xi);
    let mut d = vec![C64::new(1.0, 0.0); n];
    for i in 0..n.saturating_sub(1) {
        let e = xi[(i, i + 1)];
        if e.norm() <= 1e-12 * scale {
            return Err(Error::Precondition(format!(
                "superdiagonal entry ({}, {}) vanishes",
                i + 1,
                i + 2
            )));
        }
        d[i + 1] = d[i] * e.conj() / e.norm();
    }
    let h = lie::diag(&d);
    let red = h.adjoint() * xi * &h;
    Ok((d, red))
}

/// Eigenvalues of the Lax matrix `L(z)` at `x`.
pub fn lax_spectrum(x: &CmState, z: C64) -> Result<Vec<C64>> {
    lie::eigenvalues(&CmLax::new(&x.q, &x.p, &x.xi)?.l(z)?)
}

/// `|dL(z)/dt - (L B - B L)|` (Frobenius) at `x`, with `dL/dt` the
/// derivative of `L(z)` along the flow by a fourth-order stencil of step `h`.
pub fn lax_residual(x: &CmState, z: C64, h: f64) -> Result<f64> {
    let v = vector_field(x)?;
    let at = |t: f64| -> Result<Matrix> {
        let q: Vec<f64> = x.q.iter().zip(&v.q).map(|(a, b)| a + t * b).collect();
        let p: Vec<f64> = x.p.iter().zip(&v.p).map(|(a, b)| a + t * b).collect();
        CmLax::new(&q, &p, &(&x.xi + v.xi.scale(t)))?.l(z)
    };
    let ld = (at(-2.0 * h)? - at(-h)?.scale(8.0) + at(h)?.scale(8.0) - at(2.0 * h)?).unscale(12.0 * h);
    let lax = CmLax::new(&x.q, &x.p, &x.xi)?;
    let l = lax.l(z)?;
    let b = lax.connection(z)?;
    Ok(lie::frobenius(&(ld - (&l * &b - &b * &l))))
}

/// Trajectory sampled at multiples of the output step.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CmState>,
    pub energy: Vec<f64>,
    pub momentum_norm: Vec<f64>,
    /// Distance of `xi` from the spin subspace of the form.
    pub subspace_defect: Vec<f64>,
}

impl Trajectory {
    /// `max_t |H(t) - H(0)| / max(|H(0)|, 1e-300)`.
    pub fn relative_energy_drift(&self) -> f64 {
        let h0 = self.energy[0];
        let scale = h0.abs().max(1e-300);
        self.energy.iter().map(|h| (h - h0).abs() / scale).fold(0.0, f64::max)
    }

    pub fn max_momentum_norm(&self) -> f64 {
        self.momentum_norm.iter().cloned().fold(0.0, f64::max)
    }

    pub fn max_subspace_defect(&self) -> f64 {
        self.subspace_defect.iter().cloned().fold(0.0, f64::max)
    }
}

/// Integrates the momentum-zero flow on `[0, t_final]`, sampling every `dt`.
pub fn integrate(x0: &CmState, t_final: f64, dt: f64, scheme: Scheme) -> Result<Trajectory> {
    integrate_with(x0, t_final, dt, scheme, &AdaptiveOptions::default())
}

pub fn integrate_with(
    x0: &CmState,
    t_final: f64,
    dt: f64,
    scheme: Scheme,
    opts: &AdaptiveOptions,
) -> Result<Trajectory> {
    vector_field(x0)?;
    let (form, n) = (x0.form, x0.n());
    let tag = form.spin_tag();
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        energy: Vec::new(),
        momentum_norm: Vec::new(),
        subspace_defect: Vec::new(),
    };
    let rhs = |t: f64, y: &[f64]| {
        let x = CmState::unpack(form, n, y);
        let gap = x.min_gap();
        if gap < COLLISION_THRESHOLD {
            return Err(Error::CollisionAbort { time: t, min_gap: gap });
        }
        Ok(vector_field_unchecked(&x).pack())
    };
    ode::integrate(rhs, &x0.pack(), t_final, dt, scheme, opts, |t, y| {
        let x = CmState::unpack(form, n, y);
        traj.times.push(t);
        traj.energy.push(hamiltonian_unchecked(&x));
        traj.momentum_norm.push(momentum(&x).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt());
        traj.subspace_defect.push(lie::defect(&x.xi, tag));
        traj.states.push(x);
        Ok(())
    })?;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn free_hamiltonian() {
        let x = CmState::new(Form::Compact, vec![0.0, 1.0], vec![1.0, -1.0], Matrix::zeros(2, 2)).unwrap();
        assert_eq!(hamiltonian(&x).unwrap(), 1.0);
    }

    #[test]
    fn two_body_value() {
        let xi = (lie::unit(2, 0, 1) + lie::unit(2, 1, 0)) * lie::I;
        let x = CmState::new(Form::Compact, vec![0.0, PI], vec![0.0, 0.0], xi).unwrap();
        assert!((hamiltonian(&x).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        let v = vector_field(&x).unwrap();
        assert!(v.p.iter().all(|a| a.abs() < 1e-15));
        // N = 2: the connection is proportional to xi, so |xi_12| is frozen
        assert!(lie::frobenius(&v.xi) < 1e-15);
    }

    #[test]
    fn torus_invariance_of_h() {
        let x = CmState::random(Form::Compact, 4, 3);
        let mut r = lie::rng(4);
        let d: Vec<C64> = (0..4).map(|_| C64::from_polar(1.0, lie::gaussian(&mut r))).collect();
        let h0 = hamiltonian(&x).unwrap();
        let h1 = hamiltonian(&x.conjugate_spin(&d)).unwrap();
        assert!((h0 - h1).abs() < 1e-13 * h0.abs());
    }

    #[test]
    fn free_flow() {
        let mut x = CmState::random(Form::Compact, 3, 5);
        x.xi = Matrix::zeros(3, 3);
        let v = vector_field(&x).unwrap();
        assert_eq!(v.q, x.p);
        assert!(v.p.iter().all(|a| *a == 0.0));
        assert_eq!(v.xi, Matrix::zeros(3, 3));
        let traj = integrate(&x, 2.0, 0.01, Scheme::Rk4).unwrap();
        let last = traj.states.last().unwrap();
        for i in 0..3 {
            assert!((last.q[i] - (x.q[i] + 2.0 * x.p[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn partials_match_finite_differences() {
        for form in [Form::Compact, Form::Normal] {
            let x = CmState::random(form, 3, 6);
            let (dq, dp, dxi) = hamiltonian_partials(&x).unwrap();
            let h = 1e-6;
            for i in 0..3 {
                let mut a = x.clone();
                let mut b = x.clone();
                a.q[i] += h;
                b.q[i] -= h;
                let fd = (hamiltonian(&a).unwrap() - hamiltonian(&b).unwrap()) / (2.0 * h);
                assert!((fd - dq[i]).abs() < 1e-7);
                assert_eq!(dp[i], x.p[i]);
            }
            for bvec in lie::basis(form.spin_tag(), 3) {
                let mut a = x.clone();
                let mut b = x.clone();
                a.xi += bvec.scale(h);
                b.xi -= bvec.scale(h);
                let fd = (hamiltonian(&a).unwrap() - hamiltonian(&b).unwrap()) / (2.0 * h);
                assert!((fd - lie::pair_unchecked(&dxi, &bvec)).abs() < 1e-7);
            }
            assert!(lie::defect(&dxi, form.spin_tag()) < 1e-15);
        }
    }

    #[test]
    fn vector_field_keeps_momentum_zero_and_form() {
        for seed in 0..100 {
            for form in [Form::Compact, Form::Normal] {
                let x = CmState::random(form, 4, seed);
                let v = vector_field(&x).unwrap();
                assert!(lie::diagonal(&v.xi).iter().all(|z| z.norm() < 1e-14));
                assert!(lie::defect(&v.xi, form.spin_tag()) < 1e-13);
            }
        }
    }

    #[test]
    fn momentum_examples() {
        let x = CmState::random(Form::Normal, 3, 7);
        assert!(momentum(&x).iter().all(|z| *z == C64::default()));
        let xi = lie::unit(2, 0, 0) * lie::I;
        let y = CmState::new(Form::Compact, vec![1.0, 0.0], vec![0.0, 0.0], xi).unwrap();
        assert_eq!(momentum(&y)[0], C64::new(0.0, -1.0));
        assert!(matches!(vector_field(&y), Err(Error::Precondition(_))));
    }

    #[test]
    fn rejects_invalid_states() {
        let xi = lie::unit(2, 0, 1);
        assert!(CmState::new(Form::Compact, vec![0.0, 1.0], vec![0.0, 0.0], xi).is_err());
        let xi = lie::unit(2, 0, 1) - lie::unit(2, 1, 0);
        assert!(matches!(
            CmState::new(Form::Normal, vec![0.0, 0.0], vec![0.0, 0.0], xi),
            Err(Error::Collision { .. })
        ));
    }

    #[test]
    fn gauge_fix_examples() {
        let xi = (lie::unit(2, 0, 1) + lie::unit(2, 1, 0)) * lie::I;
        let (h, red) = gauge_fix(&xi).unwrap();
        assert!((h[1] - C64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((red[(0, 1)] - C64::new(1.0, 0.0)).norm() < 1e-15);

        let x = CmState::random(Form::Compact, 4, 8);
        let (_, red) = gauge_fix(&x.xi).unwrap();
        let (h2, red2) = gauge_fix(&red).unwrap();
        assert!(h2.iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-14));
        assert!(lie::frobenius(&(red2 - &red)) < 1e-14);
        let mut r = lie::rng(9);
        for _ in 0..20 {
            let d: Vec<C64> = (0..4).map(|_| C64::from_polar(1.0, lie::gaussian(&mut r))).collect();
            let (_, red3) = gauge_fix(&x.conjugate_spin(&d).xi).unwrap();
            assert!(lie::frobenius(&(red3 - &red)) < 1e-13);
        }
        assert!(gauge_fix(&Matrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn collision_aborts() {
        // free particles driven through each other
        let x = CmState::new(Form::Normal, vec![1.0, 0.0], vec![-5.0, 5.0], Matrix::zeros(2, 2)).unwrap();
        let err = integrate(&x, 5.0, 1e-3, Scheme::Rk4).unwrap_err();
        assert!(matches!(err, Error::CollisionAbort { .. }), "{err}");
    }
}
