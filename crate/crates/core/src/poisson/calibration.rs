//! Sign and scale conventions of the brackets.
//!
//! The weights are not guessed: [`calibrate`] fits them by least squares so
//! that `F' = {F, H}` reproduces the explicit spin CM equations of motion and
//! the matrix form `q' = diag(g)`, `g' = g (R(q) g) - (R(q) g) g` of the spin RS
//! flow, and so that the groupoid bracket of `Sigma`-symmetrized functions
//! restricts to the stable-locus bracket. The fitted values are frozen in
//! [`CONVENTIONS`]; a test asserts the two agree.
//!
//! | space | weights | effect |
//! |---|---|---|
//! | cm | `s1 = -2`, `s2 = -2` | `{q_i, p_j} = delta_ij` |
//! | groupoid | `-1` | overall sign of the coboundary expression |
//! | rs | `-1` | overall sign of the stable-locus expression |

use serde::Serialize;

use super::{
    bracket_gradients_with, bracket_terms, coordinate_probes, random_stable_point,
    random_test_function, restrict, stable_to_groupoid, symmetrize, Point, Space, StablePoint,
};
use crate::cm::{self, CmState, Form};
use crate::error::Result;
use crate::lie::{self, C64};
use crate::rs::{self, RsState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Conventions {
    pub cm_s1: f64,
    pub cm_s2: f64,
    pub groupoid: f64,
    pub rs: f64,
}

pub const CONVENTIONS: Conventions = Conventions {
    cm_s1: -2.0,
    cm_s2: -2.0,
    groupoid: -1.0,
    rs: -1.0,
};

#[derive(Debug, Clone, Serialize)]
pub struct Calibration {
    pub fitted: Conventions,
    /// Largest absolute misfit of the fitted model on the calibration rows.
    pub cm_misfit: f64,
    pub rs_misfit: f64,
    pub groupoid_misfit: f64,
}

fn fit_one(rows: &[(f64, f64)]) -> f64 {
    let num: f64 = rows.iter().map(|(t, y)| t * y).sum();
    let den: f64 = rows.iter().map(|(t, _)| t * t).sum();
    num / den
}

fn fit_two(rows: &[([f64; 2], f64)]) -> [f64; 2] {
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ([t1, t2], y) in rows {
        a11 += t1 * t1;
        a12 += t1 * t2;
        a22 += t2 * t2;
        b1 += t1 * y;
        b2 += t2 * y;
    }
    let det = a11 * a22 - a12 * a12;
    [(a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det]
}

fn round_to(v: f64, quantum: f64) -> f64 {
    (v / quantum).round() * quantum
}

/// Fits the bracket weights from `trials` random states of size `n`.
pub fn calibrate(n: usize, trials: usize, seed: u64) -> Result<Calibration> {
    let mut rng = lie::rng(seed);

    // spin CM: coordinate probes against the explicit vector field
    let h = super::cm_hamiltonian();
    let mut cm_rows = Vec::new();
    for k in 0..trials {
        let form = if k % 2 == 0 { Form::Compact } else { Form::Normal };
        let x = CmState::random_with(form, n, &mut rng);
        let vf = cm::vector_field(&x)?;
        let pt = Point::Cm(x.clone());
        let vpt = Point::Cm(CmState {
            form,
            q: vf.q,
            p: vf.p,
            xi: vf.xi,
        });
        let gh = h.gradient(&pt)?;
        for (probe, rate) in coordinate_probes(&pt) {
            let t = bracket_terms(&pt, &probe.gradient(&pt)?, &gh)?;
            cm_rows.push(([t[0], t[1]], rate(&vpt)));
        }
    }
    let [s1, s2] = fit_two(&cm_rows);
    let cm_misfit = cm_rows
        .iter()
        .map(|([a, b], y)| (s1 * a + s2 * b - y).abs())
        .fold(0.0, f64::max);

    // spin RS: the flow of 2 Re tr g
    let f = super::rs_trace_power(1);
    let mut rs_rows = Vec::new();
    for _ in 0..trials {
        let x = RsState::random_with(n, &mut rng);
        let vf = rs::vector_field(&x)?;
        let pt = Point::from(&x);
        let vpt = Point::Rs(StablePoint {
            u: vf.q.iter().map(|&v| C64::new(v, 0.0)).collect(),
            g: vf.g,
        });
        let gf = f.gradient(&pt)?;
        for (probe, rate) in coordinate_probes(&pt) {
            let t = bracket_terms(&pt, &probe.gradient(&pt)?, &gf)?;
            rs_rows.push((t[0], rate(&vpt)));
        }
    }
    let rs_sign = fit_one(&rs_rows);
    let rs_misfit = rs_rows.iter().map(|(t, y)| (rs_sign * t - y).abs()).fold(0.0, f64::max);

    // groupoid: restriction of symmetrized functions to the stable locus
    let fitted_rs = Conventions {
        rs: round_to(rs_sign, 0.5),
        ..CONVENTIONS
    };
    let mut g_rows = Vec::new();
    for _ in 0..trials {
        let x = random_stable_point(n, &mut rng);
        let phi = random_test_function(Space::GroupoidFull, n, &mut rng);
        let psi = random_test_function(Space::GroupoidFull, n, &mut rng);
        let sp = Point::Rs(x.clone());
        let target = bracket_gradients_with(
            &sp,
            &restrict(&phi).gradient(&sp)?,
            &restrict(&psi).gradient(&sp)?,
            &fitted_rs,
        )?;
        let gp = Point::Groupoid(stable_to_groupoid(&x));
        let t = bracket_terms(&gp, &symmetrize(&phi).gradient(&gp)?, &symmetrize(&psi).gradient(&gp)?)?;
        g_rows.push((t[0], target));
    }
    let g_sign = fit_one(&g_rows);
    let groupoid_misfit = g_rows.iter().map(|(t, y)| (g_sign * t - y).abs()).fold(0.0, f64::max);

    Ok(Calibration {
        fitted: Conventions {
            cm_s1: s1,
            cm_s2: s2,
            groupoid: g_sign,
            rs: rs_sign,
        },
        cm_misfit,
        rs_misfit,
        groupoid_misfit,
    })
}
