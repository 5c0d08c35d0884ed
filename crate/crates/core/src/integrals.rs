//! Conserved quantities of the spin CM flow from the spectral curve
//! `det(L~(z) - w) = sum_r a_r(z) w^{N-r}`.
//!
//! On the momentum-zero set each `a_r` is a polynomial of degree `r` in
//! `c(z)`, `a_r(z) = sum_k I_rk c(z)^k`; the `I_rk` are the integrals. In the
//! normal form only even powers of `c(z)` occur.
//!
//! Coefficients follow `det(L~ - w)` literally, so `I_00 = (-1)^N`; the monic
//! polynomial `det(w - L~)` has coefficients `(-1)^N I_rk` ([`IntegralsTable::monic`]).

use nalgebra::DMatrix;
use serde::Serialize;

use crate::cm::{CmState, Form};
use crate::error::{Error, Result};
use crate::lie::{self, Matrix, SubspaceTag, C64};
use crate::poisson::{self, Observable, Point, Space};
use crate::rmatrix::{c_of_z, CmLax};

/// Largest accepted condition number of the column-scaled Vandermonde system.
pub const MAX_CONDITION: f64 = 1e10;

/// Relative singular-value cutoff of [`independence_rank`].
pub const RANK_THRESHOLD: f64 = 1e-8;

/// Step of the fourth-order stencil used for Jacobians.
pub const JACOBIAN_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Serialize)]
pub struct IntegralsTable {
    pub form: Form,
    pub n: usize,
    /// `values[r][k]`: coefficient of `c(z)^k` (compact) or `c(z)^{2k}`
    /// (normal) in `a_r`.
    pub values: Vec<Vec<C64>>,
    /// Largest odd-power coefficient dropped in the normal form; zero for the
    /// compact form.
    pub odd_defect: f64,
    /// Condition number of the column-scaled Vandermonde matrix.
    pub conditioning: f64,
    /// Largest relative least-squares residual over `r`.
    pub residual: f64,
}

impl IntegralsTable {
    pub fn get(&self, r: usize, k: usize) -> Option<C64> {
        self.values.get(r).and_then(|row| row.get(k)).copied()
    }

    /// Coefficients of the monic polynomial `det(w - L~(z))`.
    pub fn monic(&self) -> Vec<Vec<C64>> {
        let s = if self.n % 2 == 0 { 1.0 } else { -1.0 };
        self.values.iter().map(|row| row.iter().map(|v| v * s).collect()).collect()
    }
}

/// Default `z` samples for size `n`: `n + 3` points `z = iy`, `y` evenly
/// spaced in `[0.5, 3]`, plus two generic complex points.
pub fn default_samples(n: usize) -> Vec<C64> {
    let m = n + 3;
    let mut out: Vec<C64> = (0..m)
        .map(|k| C64::new(0.0, 0.5 + 2.5 * k as f64 / (m - 1) as f64))
        .collect();
    out.push(C64::new(0.7, 0.9));
    out.push(C64::new(-1.1, 0.6));
    out
}

/// Signed elementary symmetric functions: `a_r = (-1)^{N-r} e_r(a)`, the
/// coefficient of `w^{N-r}` in `det(a - w)`, via principal minors.
pub fn char_coefficients(a: &Matrix) -> Vec<C64> {
    let n = a.nrows();
    let mut e = vec![C64::new(0.0, 0.0); n + 1];
    e[0] = C64::new(1.0, 0.0);
    for mask in 1u32..(1u32 << n) {
        let idx: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let sub = Matrix::from_fn(idx.len(), idx.len(), |i, j| a[(idx[i], idx[j])]);
        e[idx.len()] += sub.determinant();
    }
    (0..=n)
        .map(|r| if (n - r) % 2 == 0 { e[r] } else { -e[r] })
        .collect()
}

/// Least squares `V x = b` with unit-norm columns; returns `(x, cond, rel_residual)`.
fn scaled_lstsq(v: &DMatrix<C64>, b: &[C64]) -> Result<(Vec<C64>, f64, f64)> {
    let cols = v.ncols();
    let norms: Vec<f64> = (0..cols).map(|k| v.column(k).norm()).collect();
    let scaled = DMatrix::from_fn(v.nrows(), cols, |i, k| v[(i, k)] / norms[k]);
    let svd = scaled.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let cond = smax / smin;
    if !(cond <= MAX_CONDITION) {
        return Err(Error::IllConditioned(cond));
    }
    let rhs = nalgebra::DVector::from_column_slice(b);
    let y = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let res = (&scaled * &y - &rhs).norm() / (1.0 + rhs.norm());
    Ok(((0..cols).map(|k| y[k] / norms[k]).collect(), cond, res))
}

/// Fits `I_rk` at `x` from the given `z` samples.
pub fn extract(x: &CmState, z_samples: &[C64]) -> Result<IntegralsTable> {
    let n = x.n();
    if !x.is_momentum_zero() {
        return Err(Error::Precondition(
            "integrals require a momentum-zero spin (vanishing diagonal)".into(),
        ));
    }
    if z_samples.len() < n + 1 {
        return Err(Error::InvalidInput(format!(
            "need at least {} z samples, got {}",
            n + 1,
            z_samples.len()
        )));
    }
    let lax = CmLax::new(&x.q, &x.p, &x.xi)?;
    let mut cs = Vec::with_capacity(z_samples.len());
    let mut coeffs = Vec::with_capacity(z_samples.len());
    for &z in z_samples {
        cs.push(c_of_z(z)?);
        coeffs.push(char_coefficients(&lax.l_tilde(z)?));
    }
    let (mut conditioning, mut residual, mut odd_defect) = (0.0f64, 0.0f64, 0.0f64);
    let mut values = Vec::with_capacity(n + 1);
    for r in 0..=n {
        let v = DMatrix::from_fn(cs.len(), r + 1, |m, k| cs[m].powu(k as u32));
        let b: Vec<C64> = coeffs.iter().map(|a| a[r]).collect();
        let (sol, cond, res) = scaled_lstsq(&v, &b)?;
        conditioning = conditioning.max(cond);
        residual = residual.max(res);
        values.push(match x.form {
            Form::Compact => sol,
            Form::Normal => {
                for k in (1..=r).step_by(2) {
                    odd_defect = odd_defect.max(sol[k].norm());
                }
                sol.into_iter().step_by(2).collect()
            }
        });
    }
    Ok(IntegralsTable {
        form: x.form,
        n,
        values,
        odd_defect,
        conditioning,
        residual,
    })
}

fn odd_alternating_sum(tbl: &IntegralsTable, weight: f64) -> Result<Vec<f64>> {
    if tbl.form != Form::Compact {
        return Err(Error::Precondition("sum rules hold in the compact form".into()));
    }
    Ok((1..=tbl.n)
        .map(|r| {
            let row = &tbl.values[r];
            let mut s = C64::new(0.0, 0.0);
            let mut w = 1.0;
            for k in (1..=r).step_by(2) {
                s += row[k] * w;
                w *= -weight;
            }
            s.norm()
        })
        .collect())
}

/// `|sum_k (-1)^k I_{r,2k+1}|` for `r = 1..=N` (compact form only), the
/// relation as usually quoted. With `c(z) = cot(z/2)/2` it only holds for
/// `r <= 2`; see [`sum_rule_residual_weighted`].
pub fn sum_rule_residual(tbl: &IntegralsTable) -> Result<Vec<f64>> {
    odd_alternating_sum(tbl, 1.0)
}

/// `|sum_k (-1)^k 4^{-k} I_{r,2k+1}|` for `r = 1..=N`: the odd part of
/// `a_r` at `c = i/2`. Since `c(-+i infinity) = +-i/2` and `L~(i infinity)`,
/// `L~(-i infinity)` are conjugate, `a_r` takes equal values at `c = +-i/2`.
pub fn sum_rule_residual_weighted(tbl: &IntegralsTable) -> Result<Vec<f64>> {
    odd_alternating_sum(tbl, 0.25)
}

/// Largest violation of the compact reality pattern (`I_{r,2k}` real,
/// `I_{r,2k+1}` imaginary), relative to `1 + |I_rk|`.
pub fn reality_defect(tbl: &IntegralsTable) -> f64 {
    let mut worst: f64 = 0.0;
    for row in &tbl.values {
        for (k, v) in row.iter().enumerate() {
            let bad = if k % 2 == 0 { v.im } else { v.re };
            worst = worst.max(bad.abs() / (1.0 + v.norm()));
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Re,
    Im,
}

/// One real-valued integral: `Re I_rk` or `Im I_rk`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Member {
    pub r: usize,
    pub k: usize,
    pub part: Part,
}

impl Member {
    pub fn label(&self) -> String {
        match self.part {
            Part::Re => format!("I{}{}", self.r, self.k),
            Part::Im => format!("Im I{}{}", self.r, self.k),
        }
    }

    pub fn value(&self, tbl: &IntegralsTable) -> f64 {
        let v = tbl.values[self.r][self.k];
        match self.part {
            Part::Re => v.re,
            Part::Im => v.im,
        }
    }
}

/// The independent nontrivial integrals: Casimirs and sum-rule dependencies
/// removed. Sizes are `1 + N(N-1)/2` (compact) and `N + floor((N-1)^2/4)`
/// (normal).
pub fn nontrivial_family(form: Form, n: usize) -> Vec<Member> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    match form {
        Form::Compact => {
            out.push(Member { r: 1, k: 0, part: Part::Re });
            for r in 2..=n {
                // k = r is a Casimir; one odd k < r is fixed by the sum rule
                let dropped = if (r - 1) % 2 == 1 { r - 1 } else { r - 2 };
                for k in 0..r {
                    if k == dropped {
                        continue;
                    }
                    let part = if k % 2 == 0 { Part::Re } else { Part::Im };
                    out.push(Member { r, k, part });
                }
            }
        }
        Form::Normal => {
            for r in 1..=n {
                for k in 0..=r / 2 {
                    // I_{2k,k} are Casimirs
                    if r == 2 * k && k > 0 {
                        continue;
                    }
                    out.push(Member { r, k, part: Part::Re });
                }
            }
        }
    }
    out
}

/// Evaluates the members at `x`, extending off the momentum-zero set through
/// the torus-invariant projection `xi -> offdiag(xi)`.
pub fn family_values(x: &CmState, family: &[Member]) -> Result<Vec<f64>> {
    let y = CmState {
        xi: lie::proj(&x.xi, SubspaceTag::DiagFree),
        ..x.clone()
    };
    let tbl = extract(&y, &default_samples(x.n()))?;
    Ok(family.iter().map(|m| m.value(&tbl)).collect())
}

/// A family member as an observable on the CM phase space (finite-difference
/// gradients).
pub fn observable(member: Member) -> Observable {
    Observable::new(Space::CmStable, move |p| match p {
        Point::Cm(x) => Ok(family_values(x, &[member])?[0]),
        _ => unreachable!("space checked by Observable"),
    })
}

/// Momentum-zero tangent directions: `q`, `p` and the off-diagonal spin
/// subspace.
fn tangent_directions(x: &CmState) -> Vec<CmState> {
    let n = x.n();
    let zero = Matrix::zeros(n, n);
    let mut out = Vec::new();
    for i in 0..n {
        let mut q = vec![0.0; n];
        q[i] = 1.0;
        out.push(CmState { form: x.form, q, p: vec![0.0; n], xi: zero.clone() });
    }
    for i in 0..n {
        let mut p = vec![0.0; n];
        p[i] = 1.0;
        out.push(CmState { form: x.form, q: vec![0.0; n], p, xi: zero.clone() });
    }
    for b in lie::basis(x.form.spin_tag(), n) {
        let b = lie::proj(&b, SubspaceTag::DiagFree);
        if lie::frobenius(&b) > 0.0 {
            out.push(CmState { form: x.form, q: vec![0.0; n], p: vec![0.0; n], xi: b });
        }
    }
    out
}

fn shifted(x: &CmState, d: &CmState, t: f64) -> CmState {
    CmState {
        form: x.form,
        q: x.q.iter().zip(&d.q).map(|(a, b)| a + t * b).collect(),
        p: x.p.iter().zip(&d.p).map(|(a, b)| a + t * b).collect(),
        xi: &x.xi + d.xi.scale(t),
    }
}

/// Jacobian of the family values along the momentum-zero tangent
/// directions, rows indexed by family member.
pub fn jacobian(x: &CmState, family: &[Member]) -> Result<DMatrix<f64>> {
    let dirs = tangent_directions(x);
    let h = JACOBIAN_STEP;
    let mut jac = DMatrix::zeros(family.len(), dirs.len());
    for (c, d) in dirs.iter().enumerate() {
        let f = |t: f64| family_values(&shifted(x, d, t), family);
        let (m2, m1, p1, p2) = (f(-2.0 * h)?, f(-h)?, f(h)?, f(2.0 * h)?);
        for r in 0..family.len() {
            jac[(r, c)] = (m2[r] - 8.0 * m1[r] + 8.0 * p1[r] - p2[r]) / (12.0 * h);
        }
    }
    Ok(jac)
}

/// Numerical rank of the family Jacobian at a generic state: rows normalized,
/// singular values cut at [`RANK_THRESHOLD`] relative to the largest.
pub fn independence_rank(x: &CmState, family: &[Member]) -> Result<usize> {
    let n = x.n();
    let scale = 1.0 + lie::max_abs(&x.xi);
    for i in 0..n.saturating_sub(1) {
        if x.xi[(i, i + 1)].norm() <= 1e-8 * scale {
            return Err(Error::Precondition(format!(
                "degenerate sample point: spin entry ({}, {}) vanishes; resample",
                i + 1,
                i + 2
            )));
        }
    }
    let mut jac = jacobian(x, family)?;
    for mut row in jac.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
    }
    let sv = jac.singular_values();
    let smax = sv.max();
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > RANK_THRESHOLD * smax).count())
}

/// `|{F, G}(x)|` on the CM phase space with finite-difference gradients.
pub fn involution_residual(x: &CmState, f: &Observable, g: &Observable) -> Result<f64> {
    if !x.is_momentum_zero() {
        return Err(Error::Precondition("involution test requires momentum zero".into()));
    }
    Ok(poisson::bracket(f, g, &Point::Cm(x.clone()))?.abs())
}
