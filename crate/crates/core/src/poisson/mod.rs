//! Finite-difference Poisson geometry on the finite-dimensional phase spaces.
//!
//! Four spaces are supported:
//!
//! * `CmStable` - the spin CM phase space `(q, p, xi)` with `q, p` real and
//!   `xi` in the spin subspace of its form, with the Lie-Poisson bracket
//!   `s1 ((d2 F, d1 G) - (d1 F, d2 G)) + s2 (xi, [dF, dG])`.
//! * `CmAmbient` - the same bracket on `(q, p, xi)` with `q, p` complex
//!   diagonal and `xi` in all of gl(N); home of the involution `kappa`.
//! * `GroupoidFull` - triples `(u, g, v)` with the coboundary dynamical
//!   bracket built from the hyperbolic `R`.
//! * `RsStable` - the stable locus `(u, g, conj(u))`, `g` Hermitian, of the
//!   involution `Sigma(u, g, v) = (conj(v), g*, conj(u))`.
//!
//! Signs follow [`CONVENTIONS`], chosen so that `F' = {F, H}` reproduces the
//! explicit equations of motion (see [`calibrate`]).

mod calibration;
mod testfns;

use std::sync::Arc;

use serde::Serialize;

use crate::cm::CmState;
use crate::error::{Error, Result};
use crate::lie::{self, Matrix, SubspaceTag, C64};
use crate::rmatrix::HypKernel;
use crate::rs::RsState;

pub use calibration::{calibrate, Calibration, Conventions, CONVENTIONS};
pub use testfns::{
    random_ambient_point, random_groupoid_point, random_stable_point, random_test_function, MIN_SEPARATION,
};

/// Central-difference step used when an observable supplies no gradient.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Step of the fourth-order stencil differentiating inner brackets.
pub const DEFAULT_OUTER_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    CmStable,
    CmAmbient,
    GroupoidFull,
    RsStable,
}

impl Space {
    pub fn name(self) -> &'static str {
        match self {
            Space::CmStable => "cm_stable",
            Space::CmAmbient => "cm_ambient",
            Space::GroupoidFull => "groupoid_full",
            Space::RsStable => "rs_stable",
        }
    }
}

/// `(q, p, xi)` with complex diagonal `q, p` and arbitrary `xi`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientCmPoint {
    pub q: Vec<C64>,
    pub p: Vec<C64>,
    pub xi: Matrix,
}

/// `(u, g, v)` in `U x GL(N, C) x U`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupoidPoint {
    pub u: Vec<C64>,
    pub g: Matrix,
    pub v: Vec<C64>,
}

/// Point `(u, g, conj(u))` of the stable locus; `g` Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct StablePoint {
    pub u: Vec<C64>,
    pub g: Matrix,
}

/// A point of one of the phase spaces. Tangent vectors are represented by
/// the same type, holding velocities of the linear coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    Cm(CmState),
    CmAmbient(AmbientCmPoint),
    Groupoid(GroupoidPoint),
    Rs(StablePoint),
}

impl Point {
    pub fn space(&self) -> Space {
        match self {
            Point::Cm(_) => Space::CmStable,
            Point::CmAmbient(_) => Space::CmAmbient,
            Point::Groupoid(_) => Space::GroupoidFull,
            Point::Rs(_) => Space::RsStable,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Point::Cm(x) => x.n(),
            Point::CmAmbient(x) => x.q.len(),
            Point::Groupoid(x) => x.u.len(),
            Point::Rs(x) => x.u.len(),
        }
    }

    pub fn as_cm(&self) -> Option<&CmState> {
        match self {
            Point::Cm(x) => Some(x),
            _ => None,
        }
    }

    pub fn as_groupoid(&self) -> Option<&GroupoidPoint> {
        match self {
            Point::Groupoid(x) => Some(x),
            _ => None,
        }
    }

    pub fn as_stable(&self) -> Option<&StablePoint> {
        match self {
            Point::Rs(x) => Some(x),
            _ => None,
        }
    }

    pub fn as_ambient(&self) -> Option<&AmbientCmPoint> {
        match self {
            Point::CmAmbient(x) => Some(x),
            _ => None,
        }
    }
}

impl From<CmState> for Point {
    fn from(x: CmState) -> Self {
        Point::Cm(x)
    }
}

impl From<&RsState> for Point {
    fn from(x: &RsState) -> Self {
        Point::Rs(StablePoint {
            u: x.q.iter().map(|&v| C64::new(v, 0.0)).collect(),
            g: x.g.clone(),
        })
    }
}

/// Pairing-duals of the partial derivatives of an observable.
///
/// | space | `d1` | `d2` | `left` | `right` |
/// |---|---|---|---|---|
/// | cm | in `q` | in `p` | in `xi` | unused |
/// | groupoid | in `u` | in `v` | left gradient `D` | right gradient `D'` |
/// | rs | symmetrized `u`-gradient | unused | symmetrized `D` | unused |
///
/// All entries are `N x N` matrices; diagonal slots hold diagonal matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub d1: Matrix,
    pub d2: Matrix,
    pub left: Matrix,
    pub right: Matrix,
}

impl Gradient {
    pub fn zeros(n: usize) -> Self {
        Gradient {
            d1: Matrix::zeros(n, n),
            d2: Matrix::zeros(n, n),
            left: Matrix::zeros(n, n),
            right: Matrix::zeros(n, n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    First,
    Second,
    Left,
    Right,
}

/// Directions along which gradients are probed, with the slot each one
/// feeds.
fn chart(x: &Point) -> Vec<(Slot, SubspaceTag)> {
    match x {
        Point::Cm(s) => vec![
            (Slot::First, SubspaceTag::DiagReal),
            (Slot::Second, SubspaceTag::DiagReal),
            (Slot::Left, s.form.spin_tag()),
        ],
        Point::CmAmbient(_) => vec![
            (Slot::First, SubspaceTag::Diag),
            (Slot::Second, SubspaceTag::Diag),
            (Slot::Left, SubspaceTag::Full),
        ],
        Point::Groupoid(_) => vec![
            (Slot::First, SubspaceTag::Diag),
            (Slot::Second, SubspaceTag::Diag),
            (Slot::Left, SubspaceTag::Full),
            (Slot::Right, SubspaceTag::Full),
        ],
        Point::Rs(_) => vec![(Slot::First, SubspaceTag::Diag), (Slot::Left, SubspaceTag::Full)],
    }
}

fn shift_real(v: &[f64], b: &Matrix, t: f64) -> Vec<f64> {
    v.iter().enumerate().map(|(i, a)| a + t * b[(i, i)].re).collect()
}

fn shift_complex(v: &[C64], b: &Matrix, t: f64) -> Vec<C64> {
    v.iter().enumerate().map(|(i, a)| a + b[(i, i)] * t).collect()
}

/// Moves `x` along the curve whose tangent is `b` in `slot`. Group
/// directions use the first-order curves `g + t X g`, `g + t g X` and, on the
/// stable locus, `g + t (X g + g X*)`; their tangents at `t = 0` are those of
/// `exp(tX) g`, `g exp(tX)` and `exp(tX) g exp(tX*)`.
fn displace(x: &Point, slot: Slot, b: &Matrix, t: f64) -> Point {
    let tc = C64::new(t, 0.0);
    match (x, slot) {
        (Point::Cm(s), Slot::First) => Point::Cm(CmState {
            q: shift_real(&s.q, b, t),
            ..s.clone()
        }),
        (Point::Cm(s), Slot::Second) => Point::Cm(CmState {
            p: shift_real(&s.p, b, t),
            ..s.clone()
        }),
        (Point::Cm(s), _) => Point::Cm(CmState {
            xi: &s.xi + b * tc,
            ..s.clone()
        }),
        (Point::CmAmbient(s), Slot::First) => Point::CmAmbient(AmbientCmPoint {
            q: shift_complex(&s.q, b, t),
            ..s.clone()
        }),
        (Point::CmAmbient(s), Slot::Second) => Point::CmAmbient(AmbientCmPoint {
            p: shift_complex(&s.p, b, t),
            ..s.clone()
        }),
        (Point::CmAmbient(s), _) => Point::CmAmbient(AmbientCmPoint {
            xi: &s.xi + b * tc,
            ..s.clone()
        }),
        (Point::Groupoid(s), Slot::First) => Point::Groupoid(GroupoidPoint {
            u: shift_complex(&s.u, b, t),
            ..s.clone()
        }),
        (Point::Groupoid(s), Slot::Second) => Point::Groupoid(GroupoidPoint {
            v: shift_complex(&s.v, b, t),
            ..s.clone()
        }),
        (Point::Groupoid(s), Slot::Left) => Point::Groupoid(GroupoidPoint {
            g: &s.g + b * &s.g * tc,
            ..s.clone()
        }),
        (Point::Groupoid(s), Slot::Right) => Point::Groupoid(GroupoidPoint {
            g: &s.g + &s.g * b * tc,
            ..s.clone()
        }),
        (Point::Rs(s), Slot::First) => Point::Rs(StablePoint {
            u: shift_complex(&s.u, b, t),
            ..s.clone()
        }),
        (Point::Rs(s), _) => Point::Rs(StablePoint {
            g: &s.g + (b * &s.g + &s.g * b.adjoint()) * tc,
            ..s.clone()
        }),
    }
}

/// Finite-difference stencil order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdOrder {
    Second,
    Fourth,
}

pub type EvalFn = Arc<dyn Fn(&Point) -> Result<f64> + Send + Sync>;
pub type GradFn = Arc<dyn Fn(&Point) -> Result<Gradient> + Send + Sync>;
pub type PointMap = Arc<dyn Fn(&Point) -> Result<Point> + Send + Sync>;

/// A smooth real function on one of the spaces, with analytic or
/// finite-difference gradients.
#[derive(Clone)]
pub struct Observable {
    space: Space,
    eval: EvalFn,
    grad: Option<GradFn>,
    step: f64,
    order: FdOrder,
}

impl std::fmt::Debug for Observable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Observable")
            .field("space", &self.space)
            .field("analytic", &self.grad.is_some())
            .field("step", &self.step)
            .field("order", &self.order)
            .finish()
    }
}

impl Observable {
    pub fn new<F>(space: Space, eval: F) -> Self
    where
        F: Fn(&Point) -> Result<f64> + Send + Sync + 'static,
    {
        Observable {
            space,
            eval: Arc::new(eval),
            grad: None,
            step: DEFAULT_FD_STEP,
            order: FdOrder::Second,
        }
    }

    pub fn with_gradient<G>(mut self, grad: G) -> Self
    where
        G: Fn(&Point) -> Result<Gradient> + Send + Sync + 'static,
    {
        self.grad = Some(Arc::new(grad));
        self
    }

    /// Finite-difference step and stencil; drops any analytic gradient.
    pub fn with_fd(mut self, step: f64, order: FdOrder) -> Self {
        self.grad = None;
        self.step = step;
        self.order = order;
        self
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn is_analytic(&self) -> bool {
        self.grad.is_some()
    }

    fn check(&self, x: &Point) -> Result<()> {
        if x.space() != self.space {
            return Err(Error::SpaceMismatch {
                expected: self.space.name().into(),
                got: x.space().name().into(),
            });
        }
        Ok(())
    }

    pub fn value(&self, x: &Point) -> Result<f64> {
        self.check(x)?;
        (self.eval)(x)
    }

    pub fn gradient(&self, x: &Point) -> Result<Gradient> {
        self.check(x)?;
        match &self.grad {
            Some(g) => g(x),
            None => self.fd_gradient(x),
        }
    }

    /// Derivative of the observable along `b` in `slot` at `x`.
    fn directional(&self, x: &Point, slot: Slot, b: &Matrix) -> Result<f64> {
        let h = self.step;
        let f = |t: f64| (self.eval)(&displace(x, slot, b, t));
        match self.order {
            FdOrder::Second => Ok((f(h)? - f(-h)?) / (2.0 * h)),
            FdOrder::Fourth => Ok((f(-2.0 * h)? - 8.0 * f(-h)? + 8.0 * f(h)? - f(2.0 * h)?) / (12.0 * h)),
        }
    }

    fn fd_gradient(&self, x: &Point) -> Result<Gradient> {
        if !(self.step > 1e-12) {
            return Err(Error::StepTooSmall(self.step));
        }
        let n = x.n();
        let mut out = Gradient::zeros(n);
        let half = matches!(x, Point::Rs(_));
        for (slot, tag) in chart(x) {
            let basis = lie::basis(tag, n);
            let vals = basis
                .iter()
                .map(|b| self.directional(x, slot, b))
                .collect::<Result<Vec<f64>>>()?;
            let mut dual = lie::dual_from_basis(n, &basis, &vals);
            if half {
                // stable-locus gradients are half the gradients along the locus
                dual = dual.scale(0.5);
            }
            match slot {
                Slot::First => out.d1 = dual,
                Slot::Second => out.d2 = dual,
                Slot::Left => out.left = dual,
                Slot::Right => out.right = dual,
            }
        }
        Ok(out)
    }

    /// `x -> self(phi(x))` on `space`, with finite-difference gradients.
    pub fn compose(&self, space: Space, phi: PointMap) -> Observable {
        let inner = self.clone();
        Observable::new(space, move |x| inner.value(&phi(x)?))
    }
}

fn pair(a: &Matrix, b: &Matrix) -> f64 {
    lie::pair_unchecked(a, b)
}

/// The unsigned constituents of the bracket; the bracket is their
/// combination with the weights of [`Conventions`].
///
/// * cm spaces: `[(d2 F, d1 G) - (d1 F, d2 G), (xi, [dF, dG])]`
/// * groupoid: the six-term coboundary expression
///   `-(d1 F, D G) - (d2 F, D' G) + (d1 G, D F) + (d2 G, D' F) + (R(v) D' F, D' G) - (R(u) D F, D G)`
/// * rs: `-2 (d1 F, D G) + 2 (d1 G, D F) - 2 (R(u) D F, D G)`
pub fn bracket_terms(x: &Point, f: &Gradient, g: &Gradient) -> Result<Vec<f64>> {
    match x {
        Point::Cm(s) => Ok(vec![
            pair(&f.d2, &g.d1) - pair(&f.d1, &g.d2),
            pair(&s.xi, &lie::bracket(&f.left, &g.left)),
        ]),
        Point::CmAmbient(s) => Ok(vec![
            pair(&f.d2, &g.d1) - pair(&f.d1, &g.d2),
            pair(&s.xi, &lie::bracket(&f.left, &g.left)),
        ]),
        Point::Groupoid(s) => {
            let ru = HypKernel::new(&s.u)?;
            let rv = HypKernel::new(&s.v)?;
            // (u, [d1 F, d1 G]) vanishes: the diagonal algebra is abelian
            Ok(vec![
                -pair(&f.d1, &g.left) - pair(&f.d2, &g.right)
                    + pair(&g.d1, &f.left)
                    + pair(&g.d2, &f.right)
                    + pair(&rv.apply(&f.right), &g.right)
                    - pair(&ru.apply(&f.left), &g.left),
            ])
        }
        Point::Rs(s) => {
            let ru = HypKernel::new(&s.u)?;
            Ok(vec![
                -2.0 * pair(&f.d1, &g.left) + 2.0 * pair(&g.d1, &f.left) - 2.0 * pair(&ru.apply(&f.left), &g.left),
            ])
        }
    }
}

fn weights(space: Space, c: &Conventions) -> Vec<f64> {
    match space {
        Space::CmStable | Space::CmAmbient => vec![c.cm_s1, c.cm_s2],
        Space::GroupoidFull => vec![c.groupoid],
        Space::RsStable => vec![c.rs],
    }
}

/// Bracket of two gradients at `x` under the given conventions.
pub fn bracket_gradients_with(x: &Point, f: &Gradient, g: &Gradient, c: &Conventions) -> Result<f64> {
    let terms = bracket_terms(x, f, g)?;
    Ok(terms.iter().zip(weights(x.space(), c)).map(|(t, w)| t * w).sum())
}

pub fn bracket_gradients(x: &Point, f: &Gradient, g: &Gradient) -> Result<f64> {
    bracket_gradients_with(x, f, g, &CONVENTIONS)
}

/// `{F, G}(x)`.
pub fn bracket(f: &Observable, g: &Observable, x: &Point) -> Result<f64> {
    if f.space != g.space {
        return Err(Error::SpaceMismatch {
            expected: f.space.name().into(),
            got: g.space.name().into(),
        });
    }
    let gf = f.gradient(x)?;
    let gg = g.gradient(x)?;
    bracket_gradients(x, &gf, &gg)
}

/// The observable `x -> {F, G}(x)`, differentiated by a fourth-order stencil.
pub fn bracket_observable(f: &Observable, g: &Observable, step: f64) -> Observable {
    let (f, g) = (f.clone(), g.clone());
    let space = f.space;
    Observable::new(space, move |x| bracket(&f, &g, x)).with_fd(step, FdOrder::Fourth)
}

/// `|{F, {G, H}} + {G, {H, F}} + {H, {F, G}}|` at `x`, differentiating the
/// inner brackets with a fourth-order stencil of step `outer_step`.
pub fn jacobi_residual(f: &Observable, g: &Observable, h: &Observable, x: &Point, outer_step: f64) -> Result<f64> {
    let a = bracket(f, &bracket_observable(g, h, outer_step), x)?;
    let b = bracket(g, &bracket_observable(h, f, outer_step), x)?;
    let c = bracket(h, &bracket_observable(f, g, outer_step), x)?;
    Ok((a + b + c).abs())
}

/// `|{F o phi, G o phi}_src(x) - {F, G}_dst(phi(x))|`.
pub fn poisson_map_residual(
    src: Space,
    phi: PointMap,
    f: &Observable,
    g: &Observable,
    x: &Point,
) -> Result<f64> {
    let fc = f.compose(src, phi.clone());
    let gc = g.compose(src, phi.clone());
    let lhs = bracket(&fc, &gc, x)?;
    let rhs = bracket(f, g, &phi(x)?)?;
    Ok((lhs - rhs).abs())
}

/// Coordinate slots of the linear coordinates of each space, with the
/// subspace their probes range over.
fn coordinates(x: &Point) -> Vec<(usize, SubspaceTag)> {
    match x {
        Point::Cm(s) => vec![(0, SubspaceTag::DiagReal), (1, SubspaceTag::DiagReal), (2, s.form.spin_tag())],
        Point::CmAmbient(_) => vec![(0, SubspaceTag::Diag), (1, SubspaceTag::Diag), (2, SubspaceTag::Full)],
        Point::Groupoid(_) => vec![(0, SubspaceTag::Diag), (1, SubspaceTag::Diag), (2, SubspaceTag::Full)],
        Point::Rs(_) => vec![(0, SubspaceTag::Diag), (2, SubspaceTag::Hermitian)],
    }
}

fn component(x: &Point, slot: usize) -> Matrix {
    match (x, slot) {
        (Point::Cm(s), 0) => lie::diag_real(&s.q),
        (Point::Cm(s), 1) => lie::diag_real(&s.p),
        (Point::Cm(s), _) => s.xi.clone(),
        (Point::CmAmbient(s), 0) => lie::diag(&s.q),
        (Point::CmAmbient(s), 1) => lie::diag(&s.p),
        (Point::CmAmbient(s), _) => s.xi.clone(),
        (Point::Groupoid(s), 0) => lie::diag(&s.u),
        (Point::Groupoid(s), 1) => lie::diag(&s.v),
        (Point::Groupoid(s), _) => s.g.clone(),
        (Point::Rs(s), 0) => lie::diag(&s.u),
        (Point::Rs(s), _) => s.g.clone(),
    }
}

/// Linear coordinate functions `x -> (b, component)` probing every
/// direction of the space at `x`.
pub fn coordinate_probes(x: &Point) -> Vec<(Observable, Box<dyn Fn(&Point) -> f64>)> {
    let n = x.n();
    let mut out: Vec<(Observable, Box<dyn Fn(&Point) -> f64>)> = Vec::new();
    for (slot, tag) in coordinates(x) {
        for b in lie::basis(tag, n) {
            let b2 = b.clone();
            let obs = Observable::new(x.space(), move |y| Ok(pair(&b2, &component(y, slot))));
            out.push((obs, Box::new(move |v: &Point| pair(&b, &component(v, slot)))));
        }
    }
    out
}

/// `max_F |{F, H}(x) - dF(x)[vf]|` over the coordinate probes of the space.
pub fn hamiltonian_flow_residual(h: &Observable, vf: &Point, x: &Point) -> Result<f64> {
    hamiltonian_flow_residual_with(h, vf, x, &CONVENTIONS)
}

pub fn hamiltonian_flow_residual_with(h: &Observable, vf: &Point, x: &Point, c: &Conventions) -> Result<f64> {
    if vf.space() != x.space() {
        return Err(Error::SpaceMismatch {
            expected: x.space().name().into(),
            got: vf.space().name().into(),
        });
    }
    let gh = h.gradient(x)?;
    let mut worst: f64 = 0.0;
    for (probe, rate) in coordinate_probes(x) {
        let gp = probe.gradient(x)?;
        let lhs = bracket_gradients_with(x, &gp, &gh, c)?;
        worst = worst.max((lhs - rate(vf)).abs());
    }
    Ok(worst)
}

/// `Sigma(u, g, v) = (conj(v), g*, conj(u))` on the groupoid.
pub fn sigma(x: &Point) -> Result<Point> {
    match x {
        Point::Groupoid(s) => Ok(Point::Groupoid(GroupoidPoint {
            u: s.v.iter().map(|z| z.conj()).collect(),
            g: s.g.adjoint(),
            v: s.u.iter().map(|z| z.conj()).collect(),
        })),
        other => Err(Error::SpaceMismatch {
            expected: Space::GroupoidFull.name().into(),
            got: other.space().name().into(),
        }),
    }
}

/// `kappa(q, p, xi) = (conj(q), conj(p), -xi*)` on the ambient CM space.
pub fn kappa(x: &Point) -> Result<Point> {
    match x {
        Point::CmAmbient(s) => Ok(Point::CmAmbient(AmbientCmPoint {
            q: s.q.iter().map(|z| z.conj()).collect(),
            p: s.p.iter().map(|z| z.conj()).collect(),
            xi: -s.xi.adjoint(),
        })),
        other => Err(Error::SpaceMismatch {
            expected: Space::CmAmbient.name().into(),
            got: other.space().name().into(),
        }),
    }
}

/// Embeds a stable point `(u, g)` as `(u, g, conj(u))`.
pub fn stable_to_groupoid(x: &StablePoint) -> GroupoidPoint {
    GroupoidPoint {
        u: x.u.clone(),
        g: x.g.clone(),
        v: x.u.iter().map(|z| z.conj()).collect(),
    }
}

/// The restriction of a groupoid observable to the stable locus.
pub fn restrict(f: &Observable) -> Observable {
    let f = f.clone();
    Observable::new(Space::RsStable, move |x| match x {
        Point::Rs(s) => f.value(&Point::Groupoid(stable_to_groupoid(s))),
        other => Err(Error::SpaceMismatch {
            expected: Space::RsStable.name().into(),
            got: other.space().name().into(),
        }),
    })
}

/// `(F + F o Sigma) / 2` on the groupoid.
pub fn symmetrize(f: &Observable) -> Observable {
    let f = f.clone();
    Observable::new(Space::GroupoidFull, move |x| Ok(0.5 * (f.value(x)? + f.value(&sigma(x)?)?)))
}

/// `|{F~, G~}_stable(x) - {F^Sigma, G^Sigma}_groupoid(x)|` for groupoid
/// observables `F, G` and a stable point `x`.
pub fn restriction_residual(f: &Observable, g: &Observable, x: &StablePoint) -> Result<f64> {
    let stable = bracket(&restrict(f), &restrict(g), &Point::Rs(x.clone()))?;
    let full = bracket(&symmetrize(f), &symmetrize(g), &Point::Groupoid(stable_to_groupoid(x)))?;
    Ok((stable - full).abs())
}

/// `H = 1/2 sum p^2 + spin term` on `CmStable` with its analytic gradient.
pub fn cm_hamiltonian() -> Observable {
    Observable::new(Space::CmStable, |x| match x {
        Point::Cm(s) => crate::cm::hamiltonian(s),
        _ => unreachable!("space checked by Observable"),
    })
    .with_gradient(|x| match x {
        Point::Cm(s) => {
            let (dq, dp, dxi) = crate::cm::hamiltonian_partials(s)?;
            let n = s.n();
            Ok(Gradient {
                d1: lie::diag_real(&dq).scale(0.5),
                d2: lie::diag_real(&dp).scale(0.5),
                left: dxi,
                right: Matrix::zeros(n, n),
            })
        }
        _ => unreachable!("space checked by Observable"),
    })
}

/// `2 Re tr(g^k) / k` on `RsStable`; its symmetrized gradient is `g^k`.
pub fn rs_trace_power(k: u32) -> Observable {
    let kk = k.max(1);
    Observable::new(Space::RsStable, move |x| match x {
        Point::Rs(s) => Ok(2.0 * matrix_power(&s.g, kk).trace().re / kk as f64),
        _ => unreachable!("space checked by Observable"),
    })
    .with_gradient(move |x| match x {
        Point::Rs(s) => {
            let mut out = Gradient::zeros(s.u.len());
            out.left = matrix_power(&s.g, kk);
            Ok(out)
        }
        _ => unreachable!("space checked by Observable"),
    })
}

pub(crate) fn matrix_power(g: &Matrix, k: u32) -> Matrix {
    let mut out = Matrix::identity(g.nrows(), g.ncols());
    for _ in 0..k {
        out = &out * g;
    }
    out
}
