//! Affine Toda solitons and the spin RS frame.
//!
//! An `N`-soliton of the `A_n^(1)` theory with imaginary coupling is encoded
//! by a skew-Hermitian `V(x+, x-)` with `dV/dx± = (Λ± V + V Λ±)/2`. Tau
//! functions are `tau_j = det(1 + e^{ijΘ/2} V e^{ijΘ/2})` and fields
//! `e^{iβ phi_j} = tau_{j+1} / tau_j`. Diagonalizing `i e^q = U V U*` and
//! setting `g± = U Λ± U*` gives a solution of the spin RS flow along each
//! light-cone direction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{self, Matrix, SubspaceTag, C64, I};
use crate::rs::{self, DiagonalConvention, RsState};

/// Smallest accepted spacing of `q`.
pub const COLLISION_GAP: f64 = 1e-10;

/// `|tau_j|` below this is a zero of the tau function.
pub const TAU_ZERO: f64 = 1e-12;

/// Largest accepted `|(Λ+ x+ + Λ- x-)/2|` entry.
pub const MAX_EXPONENT: f64 = 300.0;

/// Required residual gap between the two variants in [`adjudicate`].
pub const ADJUDICATION_RATIO: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// JSON form of a complex matrix: real and imaginary parts as row lists.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MatrixRepr {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&Matrix> for MatrixRepr {
    fn from(m: &Matrix) -> Self {
        let rows = |f: fn(&C64) -> f64| (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect();
        MatrixRepr {
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }
}

impl TryFrom<&MatrixRepr> for Matrix {
    type Error = Error;

    fn try_from(r: &MatrixRepr) -> Result<Matrix> {
        let n = r.re.len();
        if r.im.len() != n || r.re.iter().chain(&r.im).any(|row| row.len() != n) {
            return Err(Error::InvalidInput("matrix must be square with matching re/im parts".into()));
        }
        Ok(Matrix::from_fn(n, n, |i, j| C64::new(r.re[i][j], r.im[i][j])))
    }
}

/// Soliton data. `rank` is the Toda rank `n` (fields `phi_0..phi_n`);
/// the matrix size is the number of solitons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SolitonSpecRepr", into = "SolitonSpecRepr")]
pub struct SolitonSpec {
    pub rank: usize,
    pub m: f64,
    pub beta: f64,
    pub theta: Vec<f64>,
    pub eta: Vec<f64>,
    pub v0: Matrix,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SolitonSpecRepr {
    rank: usize,
    m: f64,
    beta: f64,
    theta: Vec<f64>,
    eta: Vec<f64>,
    v0: MatrixRepr,
}

impl TryFrom<SolitonSpecRepr> for SolitonSpec {
    type Error = Error;

    fn try_from(r: SolitonSpecRepr) -> Result<Self> {
        SolitonSpec::new(r.rank, r.m, r.beta, r.theta, r.eta, Matrix::try_from(&r.v0)?)
    }
}

impl From<SolitonSpec> for SolitonSpecRepr {
    fn from(s: SolitonSpec) -> Self {
        SolitonSpecRepr {
            rank: s.rank,
            m: s.m,
            beta: s.beta,
            theta: s.theta,
            eta: s.eta,
            v0: MatrixRepr::from(&s.v0),
        }
    }
}

/// `2 pi k / (n + 1)` for `k = 1..=n`.
pub fn theta_lattice(rank: usize) -> Vec<f64> {
    (1..=rank)
        .map(|k| 2.0 * std::f64::consts::PI * k as f64 / (rank + 1) as f64)
        .collect()
}

impl SolitonSpec {
    pub fn new(rank: usize, m: f64, beta: f64, theta: Vec<f64>, eta: Vec<f64>, v0: Matrix) -> Result<Self> {
        let n = lie::check_element(&v0)?;
        if rank == 0 {
            return Err(Error::InvalidInput("Toda rank must be at least 1".into()));
        }
        if !(m > 0.0 && m.is_finite() && beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidInput("mass and coupling must be positive".into()));
        }
        for len in [theta.len(), eta.len()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, got: len });
            }
        }
        let lattice = theta_lattice(rank);
        for &t in &theta {
            if !lattice.iter().any(|l| (l - t).abs() <= 1e-12) {
                return Err(Error::InvalidInput(format!("theta = {t} is not of the form 2 pi k / (n + 1)")));
            }
        }
        if eta.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidInput("non-finite rapidity".into()));
        }
        let scale = 1.0 + lie::max_abs(&v0);
        if !lie::membership(&v0, SubspaceTag::SkewHermitian, lie::MEMBERSHIP_TOL * scale)? {
            return Err(Error::InvalidInput("V0 must be skew-Hermitian".into()));
        }
        let h = lie::proj(&(-&v0 * I), SubspaceTag::Hermitian);
        let lo = h.symmetric_eigenvalues().min();
        if !(lo > 0.0) {
            return Err(Error::SpectrumCone(format!("-i V0 has eigenvalue {lo:.3e} <= 0")));
        }
        Ok(SolitonSpec { rank, m, beta, theta, eta, v0 })
    }

    /// A single soliton with `theta = 2 pi k / (n + 1)` and `V0 = i a`.
    pub fn one_soliton(rank: usize, k: usize, m: f64, beta: f64, eta: f64, a: f64) -> Result<Self> {
        if k == 0 || k > rank {
            return Err(Error::InvalidInput(format!("soliton index k = {k} outside 1..={rank}")));
        }
        let theta = theta_lattice(rank)[k - 1];
        Self::new(rank, m, beta, vec![theta], vec![eta], Matrix::from_element(1, 1, C64::new(0.0, a)))
    }

    /// `N` solitons with random lattice angles, rapidities and
    /// `V0 = i (A A* + 1)`.
    pub fn random_with<R: rand::Rng + ?Sized>(rank: usize, n: usize, rng: &mut R) -> Self {
        let lattice = theta_lattice(rank);
        let theta = (0..n).map(|_| lattice[rng.random_range(0..lattice.len())]).collect();
        let eta = (0..n).map(|_| 0.3 * lie::gaussian(rng)).collect();
        let a = lie::random_matrix(n, rng);
        let p = &a * a.adjoint() + Matrix::identity(n, n);
        SolitonSpec {
            rank,
            m: 1.0,
            beta: 1.0,
            theta,
            eta,
            v0: lie::proj(&(p * I), SubspaceTag::SkewHermitian),
        }
    }

    pub fn random(rank: usize, n: usize, seed: u64) -> Self {
        Self::random_with(rank, n, &mut lie::rng(seed))
    }

    pub fn size(&self) -> usize {
        self.theta.len()
    }
}

/// Diagonal of `Λ± = diag(±sqrt(2) m e^{∓eta_j} sin(theta_j / 2))`.
pub fn lambda(spec: &SolitonSpec, sign: Sign) -> Vec<f64> {
    let s = sign.value();
    spec.theta
        .iter()
        .zip(&spec.eta)
        .map(|(t, e)| s * std::f64::consts::SQRT_2 * spec.m * (-s * e).exp() * (0.5 * t).sin())
        .collect()
}

/// `V(x+, x-) = E V0 E`, `E = exp((Λ+ x+ + Λ- x-)/2)`.
pub fn evolve_v(spec: &SolitonSpec, x_plus: f64, x_minus: f64) -> Result<Matrix> {
    let (lp, lm) = (lambda(spec, Sign::Plus), lambda(spec, Sign::Minus));
    let mut e = Vec::with_capacity(spec.size());
    for (a, b) in lp.iter().zip(&lm) {
        let x = 0.5 * (a * x_plus + b * x_minus);
        if !(x.abs() <= MAX_EXPONENT) {
            return Err(Error::Overflow(x.abs()));
        }
        e.push(x.exp());
    }
    let n = spec.size();
    Ok(Matrix::from_fn(n, n, |i, j| spec.v0[(i, j)] * (e[i] * e[j])))
}

/// `i e^{diag q} = U V U*` with `q` ascending. The residual diagonal phase
/// of each eigenvector (row of `U`) is fixed against `u_prev` by making the
/// overlap with the previous eigenvector real positive, or, without a
/// previous frame, by making its largest-modulus entry real positive.
pub fn diagonalize_gauge(v: &Matrix, u_prev: Option<&Matrix>) -> Result<(Vec<f64>, Matrix)> {
    let n = lie::check_element(v)?;
    let h = lie::proj(&(-v * I), SubspaceTag::Hermitian);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let w: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    if let Some(&lo) = w.first() {
        if !(lo > 0.0) {
            return Err(Error::SpectrumCone(format!("-i V has eigenvalue {lo:.3e} <= 0")));
        }
    }
    let q: Vec<f64> = w.iter().map(|x| x.ln()).collect();
    for pair in q.windows(2) {
        let gap = pair[1] - pair[0];
        if gap < COLLISION_GAP {
            return Err(Error::EigenvalueCollision(gap));
        }
    }
    let mut cols: Vec<nalgebra::DVector<C64>> = order.iter().map(|&k| eig.eigenvectors.column(k).into_owned()).collect();
    for (k, col) in cols.iter_mut().enumerate() {
        let anchor = match u_prev {
            Some(up) => {
                let prev = up.row(k).adjoint();
                prev.dotc(col)
            }
            None => {
                let j = (0..n).max_by(|&a, &b| col[a].norm().total_cmp(&col[b].norm())).unwrap_or(0);
                col[j]
            }
        };
        if anchor.norm() > 0.0 {
            *col *= anchor.conj() / anchor.norm();
        }
    }
    let wmat = Matrix::from_columns(&cols);
    Ok((q, wmat.adjoint()))
}

#[derive(Debug, Clone)]
pub struct TodaFrame {
    pub x_plus: f64,
    pub x_minus: f64,
    pub v: Matrix,
    pub q: Vec<f64>,
    pub u: Matrix,
    pub g_plus: Matrix,
    pub g_minus: Matrix,
    /// `tau_0..tau_n`.
    pub tau: Vec<C64>,
    /// `phi_0..phi_n`.
    pub phi: Vec<C64>,
}

/// `tau_j = det(1 + e^{ijΘ/2} V e^{ijΘ/2})`, `j = 0..=n`.
pub fn tau_functions(spec: &SolitonSpec, v: &Matrix) -> Vec<C64> {
    let n = spec.size();
    (0..=spec.rank)
        .map(|j| {
            let ph: Vec<C64> = spec.theta.iter().map(|t| (I * (0.5 * j as f64 * t)).exp()).collect();
            let m = Matrix::from_fn(n, n, |a, b| {
                let d = if a == b { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                d + ph[a] * v[(a, b)] * ph[b]
            });
            m.determinant()
        })
        .collect()
}

fn conjugate_by(u: &Matrix, d: &[f64]) -> Matrix {
    let g = u * lie::diag_real(d) * u.adjoint();
    lie::proj(&g, SubspaceTag::Hermitian)
}

/// The full frame at `(x+, x-)`, continuing gauge and field branches from
/// `prev` when given.
pub fn rs_frame(spec: &SolitonSpec, x_plus: f64, x_minus: f64, prev: Option<&TodaFrame>) -> Result<TodaFrame> {
    let v = evolve_v(spec, x_plus, x_minus)?;
    let (q, u) = diagonalize_gauge(&v, prev.map(|p| &p.u))?;
    let tau = tau_functions(spec, &v);
    for (j, t) in tau.iter().enumerate() {
        if t.norm() < TAU_ZERO {
            return Err(Error::TauZero {
                index: j,
                x_plus,
                x_minus,
                modulus: t.norm(),
            });
        }
    }
    let np1 = spec.rank + 1;
    let two_pi = 2.0 * std::f64::consts::PI;
    let phi = (0..np1)
        .map(|j| {
            let mut log = (tau[(j + 1) % np1] / tau[j]).ln();
            if let Some(p) = prev {
                // continue the branch: nearest 2 pi shift to the previous value
                let prev_log = p.phi[j] * I * spec.beta;
                log.im += two_pi * ((prev_log.im - log.im) / two_pi).round();
            }
            log / (I * spec.beta)
        })
        .collect();
    Ok(TodaFrame {
        x_plus,
        x_minus,
        g_plus: conjugate_by(&u, &lambda(spec, Sign::Plus)),
        g_minus: conjugate_by(&u, &lambda(spec, Sign::Minus)),
        v,
        q,
        u,
        tau,
        phi,
    })
}

/// Residuals of the RS equations along one light-cone direction, for the
/// matrix form of `g'` and for the variant with halved diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RsResidual {
    pub matrix: f64,
    pub half_diagonal: f64,
}

/// `max(|dq/dx± - diag g±|, |dg±/dx± - [g±, R(q) g±]|)` with fourth-order
/// differences, stencil frames gauge-continued from the centre frame.
pub fn rs_residual(spec: &SolitonSpec, x_plus: f64, x_minus: f64, direction: Sign, fd_step: f64) -> Result<RsResidual> {
    if !(fd_step > 1e-12) {
        return Err(Error::StepTooSmall(fd_step));
    }
    let centre = rs_frame(spec, x_plus, x_minus, None)?;
    let pick = |f: &TodaFrame| match direction {
        Sign::Plus => f.g_plus.clone(),
        Sign::Minus => f.g_minus.clone(),
    };
    let mut stencil = Vec::with_capacity(4);
    for k in [-2.0, -1.0, 1.0, 2.0] {
        let (xp, xm) = match direction {
            Sign::Plus => (x_plus + k * fd_step, x_minus),
            Sign::Minus => (x_plus, x_minus + k * fd_step),
        };
        stencil.push(rs_frame(spec, xp, xm, Some(&centre))?);
    }
    let d = |a: f64, b: f64, c: f64, e: f64| (a - 8.0 * b + 8.0 * c - e) / (12.0 * fd_step);
    let n = spec.size();
    let dq: Vec<f64> = (0..n)
        .map(|i| d(stencil[0].q[i], stencil[1].q[i], stencil[2].q[i], stencil[3].q[i]))
        .collect();
    let gs: Vec<Matrix> = stencil.iter().map(pick).collect();
    let dg = (&gs[0] - gs[1].scale(8.0) + gs[2].scale(8.0) - &gs[3]).unscale(12.0 * fd_step);
    let x = RsState {
        q: centre.q.clone(),
        g: pick(&centre),
    };
    let mut out = [0.0f64; 2];
    for (slot, conv) in [DiagonalConvention::Matrix, DiagonalConvention::HalfDiagonal].into_iter().enumerate() {
        let vf = rs::vector_field_variant(&x, conv)?;
        let eq = dq.iter().zip(&vf.q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        out[slot] = eq.max(lie::max_abs(&(&dg - &vf.g)));
    }
    Ok(RsResidual {
        matrix: out[0],
        half_diagonal: out[1],
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Adjudication {
    pub matrix_max: f64,
    pub half_diagonal_max: f64,
    /// The variant whose residual is below `tol` while the other's is at least
    /// [`ADJUDICATION_RATIO`] times larger; `None` if neither qualifies.
    pub selected: Option<DiagonalConvention>,
}

/// Compares the two diagonal conventions over the given points and both
/// light-cone directions.
pub fn adjudicate(spec: &SolitonSpec, points: &[(f64, f64)], fd_step: f64, tol: f64) -> Result<Adjudication> {
    let (mut a, mut b) = (0.0f64, 0.0f64);
    for &(xp, xm) in points {
        for dir in [Sign::Plus, Sign::Minus] {
            let r = rs_residual(spec, xp, xm, dir, fd_step)?;
            a = a.max(r.matrix);
            b = b.max(r.half_diagonal);
        }
    }
    let selected = if a < tol && b >= ADJUDICATION_RATIO * a {
        Some(DiagonalConvention::Matrix)
    } else if b < tol && a >= ADJUDICATION_RATIO * b {
        Some(DiagonalConvention::HalfDiagonal)
    } else {
        None
    };
    Ok(Adjudication {
        matrix_max: a,
        half_diagonal_max: b,
        selected,
    })
}

/// Rectangular grid in `(x+, x-)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_plus: Vec<f64>,
    pub x_minus: Vec<f64>,
}

impl Grid {
    /// `count x count` nodes evenly covering `[lo, hi]` in both directions.
    pub fn square(lo: f64, hi: f64, count: usize) -> Self {
        let pts: Vec<f64> = if count <= 1 {
            vec![lo]
        } else {
            (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect()
        };
        Grid {
            x_plus: pts.clone(),
            x_minus: pts,
        }
    }
}

/// Per-node residual of the Toda equations,
/// `max_j |d+ d- phi_j + (m^2 / 2 i beta)(e^{i beta (phi_j - phi_{j+1})} - e^{i beta (phi_{j-1} - phi_j)})|`,
/// with the mixed derivative from the four-point centred stencil; indexed
/// `[i_plus][i_minus]`.
pub fn pde_residual(spec: &SolitonSpec, grid: &Grid, fd_step: f64) -> Result<Vec<Vec<f64>>> {
    if !(fd_step > 1e-12) {
        return Err(Error::StepTooSmall(fd_step));
    }
    let np1 = spec.rank + 1;
    let tau_at = |xp: f64, xm: f64| -> Result<Vec<C64>> {
        let tau = tau_functions(spec, &evolve_v(spec, xp, xm)?);
        for (j, t) in tau.iter().enumerate() {
            if t.norm() < TAU_ZERO {
                return Err(Error::TauZero {
                    index: j,
                    x_plus: xp,
                    x_minus: xm,
                    modulus: t.norm(),
                });
            }
        }
        Ok(tau)
    };
    let coupling = spec.m * spec.m / (2.0 * I * spec.beta);
    let h = fd_step;
    let mut out = Vec::with_capacity(grid.x_plus.len());
    for &xp in &grid.x_plus {
        let mut row = Vec::with_capacity(grid.x_minus.len());
        for &xm in &grid.x_minus {
            let c = tau_at(xp, xm)?;
            let corners = [
                (tau_at(xp + h, xm + h)?, 1.0),
                (tau_at(xp + h, xm - h)?, -1.0),
                (tau_at(xp - h, xm + h)?, -1.0),
                (tau_at(xp - h, xm - h)?, 1.0),
            ];
            let mut worst: f64 = 0.0;
            for j in 0..np1 {
                let (jp, jpp, jm) = ((j + 1) % np1, (j + 2) % np1, (j + np1 - 1) % np1);
                // i beta phi_j relative to the centre: no branch ambiguity for small h
                let rel = |t: &[C64]| (t[jp] / c[jp]).ln() - (t[j] / c[j]).ln();
                let mixed: C64 = corners.iter().map(|(t, s)| rel(t) * *s).sum::<C64>() / (4.0 * h * h) / (I * spec.beta);
                let e1 = c[jp] * c[jp] / (c[j] * c[jpp]);
                let e0 = c[j] * c[j] / (c[jm] * c[jp]);
                worst = worst.max((mixed + coupling * (e1 - e0)).norm());
            }
            row.push(worst);
        }
        out.push(row);
    }
    Ok(out)
}

/// Frames over a grid, row-major from the origin; each row continues from
/// the first node of the previous row, each node from its left neighbour.
pub fn scan(spec: &SolitonSpec, grid: &Grid) -> Result<Vec<Vec<TodaFrame>>> {
    let mut out: Vec<Vec<TodaFrame>> = Vec::with_capacity(grid.x_plus.len());
    for &xp in &grid.x_plus {
        let mut row: Vec<TodaFrame> = Vec::with_capacity(grid.x_minus.len());
        for &xm in &grid.x_minus {
            let prev = row.last().or_else(|| out.last().map(|r| &r[0]));
            let f = rs_frame(spec, xp, xm, prev)?;
            row.push(f);
        }
        out.push(row);
    }
    Ok(out)
}
