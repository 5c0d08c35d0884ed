//! Verification suites. Every trial draws from its own stream derived from
//! the seed, so results do not depend on scheduling.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use spinlab_core::integrals::{self, nontrivial_family};
use spinlab_core::lie::{self, C64};
use spinlab_core::poisson::{
    self, random_ambient_point, random_groupoid_point, random_stable_point, random_test_function, rs_trace_power,
    Point, Space, StablePoint,
};
use spinlab_core::rmatrix::mdybe_residual;
use spinlab_core::rs::{self, DiagonalConvention, RsTangent};
use spinlab_core::{cm, CmState, Error, Form, RsState};

use crate::config::{require_seed, Suite, VerifyConfig};
use crate::report::{Check, Report};
use crate::Failure;

/// Spectral parameters at which the Lax spectrum is tracked.
pub const SPECTRAL_SAMPLES: [C64; 3] = [C64::new(0.3, 0.4), C64::new(-0.9, 0.6), C64::new(1.1, -0.5)];

type Res<T> = std::result::Result<T, Error>;

fn stream(check: u64, trial: usize) -> u64 {
    (check << 32) | trial as u64
}

fn par_trials<T: Send>(count: usize, f: impl Fn(usize) -> Res<T> + Sync) -> Res<Vec<T>> {
    (0..count).into_par_iter().map(&f).collect()
}

fn max_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |a: f64, b| if b.is_nan() { f64::NAN } else { a.max(b) })
}

/// The config as written into reports, with the per-suite trial counts
/// resolved.
#[derive(Serialize)]
struct Effective<'a> {
    #[serde(flatten)]
    config: &'a VerifyConfig,
    resolved_trials: BTreeMap<&'static str, usize>,
}

pub fn run(cfg: &VerifyConfig) -> Result<Report, Failure> {
    let seed = require_seed(cfg.seed)?;
    if cfg.n < 2 {
        return Err(Failure::Invalid(format!("n must be at least 2, got {}", cfg.n)));
    }
    if cfg.tol.is_some_and(|t| !(t > 0.0)) {
        return Err(Failure::Invalid("tolerance must be positive".into()));
    }
    if !(cfg.t_final > 0.0 && cfg.dt > 0.0 && cfg.dt <= cfg.t_final) {
        return Err(Failure::Invalid("need 0 < dt <= t_final".into()));
    }
    let suites: Vec<Suite> = if cfg.suite == Suite::All {
        Suite::EACH.to_vec()
    } else {
        vec![cfg.suite]
    };
    let effective = Effective {
        config: cfg,
        resolved_trials: suites.iter().map(|s| (s.name(), cfg.trials_for(*s))).collect(),
    };
    let mut report = Report::new(&format!("verify {}", cfg.suite.name()), Some(seed), &effective);
    for s in suites {
        let mut part = Report::new(s.name(), Some(seed), cfg);
        run_suite(s, cfg, seed, &mut part)?;
        let prefix = if cfg.suite == Suite::All { format!("{}.", s.name()) } else { String::new() };
        for mut c in part.checks {
            c.name = format!("{prefix}{}", c.name);
            report.check(c);
        }
        for (k, v) in part.measurements {
            report.measurements.insert(format!("{prefix}{k}"), v);
        }
    }
    Ok(report)
}

fn run_suite(s: Suite, cfg: &VerifyConfig, seed: u64, r: &mut Report) -> Res<()> {
    let trials = cfg.trials_for(s);
    match s {
        Suite::Mdybe => mdybe(cfg, seed, trials, r),
        Suite::Jacobi => jacobi(cfg, seed, trials, r),
        Suite::Involution => involution(cfg, seed, trials, r),
        Suite::Commute => commute(cfg, seed, trials, r),
        Suite::Lax => lax(cfg, seed, trials, r),
        Suite::Counts => counts(cfg, seed, trials, r),
        Suite::All => unreachable!("expanded by run"),
    }
}

fn mdybe(cfg: &VerifyConfig, seed: u64, trials: usize, r: &mut Report) -> Res<()> {
    let n = cfg.n;
    let out = par_trials(trials, |t| {
        let mut rng = lie::trial_rng(seed, stream(0, t));
        let q: Vec<C64> = (0..n)
            .map(|i| C64::new(1.3 * i as f64 + 0.3 * lie::gaussian(&mut rng), 0.4 * lie::gaussian(&mut rng)))
            .collect();
        let x = lie::random_matrix(n, &mut rng);
        let y = lie::random_matrix(n, &mut rng);
        let m = mdybe_residual(&q, &x, &y)?;
        Ok((m.residual_norm(), m.fitted_c2))
    })?;
    let c2: Vec<f64> = out.iter().map(|o| o.1).collect();
    let (lo, hi) = c2.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &c| (a.min(c), b.max(c)));
    r.check(Check::below(
        "residual_after_fit",
        "the hyperbolic R satisfies the modified dynamical Yang-Baxter equation with a constant -c^2 [X, Y] term",
        trials,
        max_of(out.iter().map(|o| o.0)),
        cfg.tol_or(1e-9),
    ));
    r.check(Check::below(
        "c2_constant",
        "the fitted c^2 does not depend on q, X, Y",
        trials,
        hi - lo,
        cfg.tol_or(1e-6),
    ));
    r.measure("fitted_c2", c2.iter().sum::<f64>() / c2.len().max(1) as f64);
    r.measure("fitted_c2_min", lo);
    r.measure("fitted_c2_max", hi);
    Ok(())
}

fn jacobi(cfg: &VerifyConfig, seed: u64, trials: usize, r: &mut Report) -> Res<()> {
    let n = cfg.n;
    let step = poisson::DEFAULT_OUTER_STEP;
    let cyclic = |check: u64, space: Space| {
        par_trials(trials, move |t| {
            let mut rng = lie::trial_rng(seed, stream(check, t));
            let x = match space {
                Space::GroupoidFull => Point::Groupoid(random_groupoid_point(n, &mut rng)),
                _ => Point::Rs(random_stable_point(n, &mut rng)),
            };
            let f = random_test_function(space, n, &mut rng);
            let g = random_test_function(space, n, &mut rng);
            let h = random_test_function(space, n, &mut rng);
            poisson::jacobi_residual(&f, &g, &h, &x, step)
        })
    };
    let groupoid = cyclic(1, Space::GroupoidFull)?;
    r.check(Check::below(
        "jacobi_groupoid",
        "the groupoid bracket satisfies the Jacobi identity (cyclic sum, finite-difference limited)",
        trials,
        max_of(groupoid),
        cfg.tol_or(1e-5),
    ));
    let stable = cyclic(2, Space::RsStable)?;
    r.check(Check::below(
        "jacobi_rs_stable",
        "the RS bracket on the stable locus satisfies the Jacobi identity",
        trials,
        max_of(stable),
        cfg.tol_or(1e-5),
    ));

    let sig = par_trials(trials, |t| {
        let mut rng = lie::trial_rng(seed, stream(3, t));
        let x = Point::Groupoid(random_groupoid_point(n, &mut rng));
        let f = random_test_function(Space::GroupoidFull, n, &mut rng);
        let g = random_test_function(Space::GroupoidFull, n, &mut rng);
        poisson::poisson_map_residual(Space::GroupoidFull, Arc::new(poisson::sigma), &f, &g, &x)
    })?;
    r.check(Check::below(
        "poisson_map_sigma",
        "Sigma(u, g, v) = (conj v, g*, conj u) is a Poisson map of the groupoid",
        trials,
        max_of(sig),
        cfg.tol_or(1e-6),
    ));
    let kap = par_trials(trials, |t| {
        let mut rng = lie::trial_rng(seed, stream(4, t));
        let x = Point::CmAmbient(random_ambient_point(n, &mut rng));
        let f = random_test_function(Space::CmAmbient, n, &mut rng);
        let g = random_test_function(Space::CmAmbient, n, &mut rng);
        poisson::poisson_map_residual(Space::CmAmbient, Arc::new(poisson::kappa), &f, &g, &x)
    })?;
    r.check(Check::below(
        "poisson_map_kappa",
        "kappa(q, p, xi) = (conj q, conj p, -xi*) is a Poisson map of the CM phase space",
        trials,
        max_of(kap),
        cfg.tol_or(1e-6),
    ));
    let res = par_trials(trials, |t| {
        let mut rng = lie::trial_rng(seed, stream(5, t));
        let x = random_stable_point(n, &mut rng);
        let f = random_test_function(Space::GroupoidFull, n, &mut rng);
        let g = random_test_function(Space::GroupoidFull, n, &mut rng);
        poisson::restriction_residual(&f, &g, &x)
    })?;
    r.check(Check::below(
        "restriction",
        "the stable-locus bracket of restrictions equals the groupoid bracket of Sigma-symmetrized functions",
        trials,
        max_of(res),
        cfg.tol_or(1e-6),
    ));
    Ok(())
}

fn form_streams(form: Form) -> u64 {
    match form {
        Form::Compact => 10,
        Form::Normal => 20,
    }
}

fn involution(cfg: &VerifyConfig, seed: u64, trials: usize, r: &mut Report) -> Res<()> {
    let n = cfg.n;
    for form in [Form::Compact, Form::Normal] {
        let base = form_streams(form);
        let name = form.name();
        let tables = par_trials(trials, |t| {
            let x = CmState::random_with(form, n, &mut lie::trial_rng(seed, stream(base, t)));
            integrals::extract(&x, &integrals::default_samples(n))
        })?;
        if form == Form::Compact {
            r.check(Check::below(
                "compact_reality",
                "I_{r,2k} are real and I_{r,2k+1} purely imaginary",
                trials,
                max_of(tables.iter().map(integrals::reality_defect)),
                cfg.tol_or(1e-10),
            ));
            let weighted = tables
                .iter()
                .map(|t| integrals::sum_rule_residual_weighted(t).map(max_of))
                .collect::<Res<Vec<_>>>()?;
            r.check(Check::below(
                "compact_sum_rule",
                "sum_k (-1/4)^k I_{r,2k+1} = 0, from the isospectrality of the Lax matrix at z = +-i infinity",
                trials,
                max_of(weighted),
                cfg.tol_or(1e-10),
            ));
            // the unweighted alternating sum is reported, not asserted
            let literal = tables
                .iter()
                .map(|t| integrals::sum_rule_residual(t).map(max_of))
                .collect::<Res<Vec<_>>>()?;
            r.measure("compact_unweighted_sum_rule_max", max_of(literal));
        } else {
            let imag = tables
                .iter()
                .map(|t| max_of(t.values.iter().flatten().map(|v| v.im.abs() / (1.0 + v.norm()))));
            r.check(Check::below(
                "normal_reality",
                "all I_rk are real in the normal form",
                trials,
                max_of(imag),
                cfg.tol_or(1e-10),
            ));
        }

        let family = nontrivial_family(form, n);
        let obs: Vec<_> = family.iter().map(|m| integrals::observable(*m)).collect();
        let pairs = par_trials(trials, |t| {
            let x = CmState::random_with(form, n, &mut lie::trial_rng(seed, stream(base + 1, t)));
            let mut worst: f64 = 0.0;
            for i in 0..obs.len() {
                for j in i + 1..obs.len() {
                    worst = worst.max(integrals::involution_residual(&x, &obs[i], &obs[j])?);
                }
            }
            Ok(worst)
        })?;
        r.check(Check::below(
            &format!("{name}_involution"),
            "the nontrivial integrals Poisson-commute on the momentum-zero set",
            trials,
            max_of(pairs),
            cfg.tol_or(1e-5),
        ));

        let x0 = CmState::random_with(form, n, &mut lie::trial_rng(seed, stream(base + 2, 0)));
        let traj = cm::integrate(&x0, cfg.t_final, cfg.dt, cfg.scheme)?;
        let stride = (traj.states.len() / 20).max(1);
        let v0 = integrals::family_values(&x0, &family)?;
        let drifts = traj
            .states
            .par_iter()
            .step_by(stride)
            .map(|x| {
                let v = integrals::family_values(x, &family)?;
                Ok(max_of(v.iter().zip(&v0).map(|(a, b)| (a - b).abs() / (1.0 + b.abs()))))
            })
            .collect::<Res<Vec<_>>>()?;
        r.check(Check::below(
            &format!("{name}_flow_drift"),
            "every integral is conserved by the CM flow",
            1,
            max_of(drifts),
            cfg.tol_or(1e-6),
        ));
    }
    Ok(())
}

fn min_gap(q: &[f64]) -> f64 {
    let mut s = q.to_vec();
    s.sort_by(f64::total_cmp);
    s.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

fn tangent_point(t: &RsTangent) -> Point {
    Point::Rs(StablePoint {
        u: t.q.iter().map(|&v| C64::new(v, 0.0)).collect(),
        g: t.g.clone(),
    })
}

fn commute(cfg: &VerifyConfig, seed: u64, trials: usize, r: &mut Report) -> Res<()> {
    let n = cfg.n;
    let k_max = n as u32;
    let out = par_trials(trials, |t| {
        let x = RsState::random_with(n, &mut lie::trial_rng(seed, stream(30, t)));
        let p = Point::from(&x);
        let mut bracket: f64 = 0.0;
        for j in 1..=k_max {
            for k in j + 1..=k_max {
                bracket = bracket.max(poisson::bracket(&rs_trace_power(j), &rs_trace_power(k), &p)?.abs());
            }
        }
        let mut flows: f64 = 0.0;
        for k in 1..=k_max {
            let res = match rs::central_flow(&x, k) {
                Ok(v) => poisson::hamiltonian_flow_residual(&rs_trace_power(k), &tangent_point(&v), &p)?,
                Err(Error::FlowValidation { residual, .. }) => residual,
                Err(e) => return Err(e),
            };
            flows = flows.max(res);
        }
        let half = rs::vector_field_variant(&x, DiagonalConvention::HalfDiagonal)?;
        let half = poisson::hamiltonian_flow_residual(&rs_trace_power(1), &tangent_point(&half), &p)?;
        Ok((bracket, flows, half))
    })?;
    r.check(Check::below(
        "rs_central_brackets",
        "the functions 2 Re tr(g^k) / k Poisson-commute at Hermitian points",
        trials,
        max_of(out.iter().map(|o| o.0)),
        cfg.tol_or(1e-6),
    ));
    r.check(Check::below(
        "rs_central_flows",
        "each 2 Re tr(g^k) / k generates q' = diag(g^k), g' = [g, R(q) g^k]",
        trials,
        max_of(out.iter().map(|o| o.1)),
        cfg.tol_or(1e-6),
    ));
    r.measure(
        "half_diagonal_flow_residual_min",
        out.iter().map(|o| o.2).fold(f64::INFINITY, f64::min),
    );
    Ok(())
}

fn lax(cfg: &VerifyConfig, seed: u64, trials: usize, r: &mut Report) -> Res<()> {
    let n = cfg.n;
    let runs = par_trials(trials, |t| {
        let x0 = CmState::random_with(Form::Compact, n, &mut lie::trial_rng(seed, stream(40, t)));
        let traj = cm::integrate(&x0, cfg.t_final, cfg.dt, cfg.scheme)?;
        let spectra0 = SPECTRAL_SAMPLES
            .iter()
            .map(|&z| cm::lax_spectrum(&x0, z))
            .collect::<Res<Vec<_>>>()?;
        let stride = (traj.states.len() / 10).max(1);
        let (mut spec, mut lax): (f64, f64) = (0.0, 0.0);
        for x in traj.states.iter().step_by(stride).chain(traj.states.last()) {
            for (z, s0) in SPECTRAL_SAMPLES.iter().zip(&spectra0) {
                spec = spec.max(lie::spectrum_distance(&cm::lax_spectrum(x, *z)?, s0));
                lax = lax.max(cm::lax_residual(x, *z, 1e-4)?);
            }
        }
        let y0 = RsState::random_with(n, &mut lie::trial_rng(seed, stream(41, t)));
        let rs_traj = rs::integrate(&y0, cfg.t_final, cfg.dt, cfg.scheme)?;
        let gap = rs_traj.states.iter().map(|s| min_gap(&s.q)).fold(f64::INFINITY, f64::min);
        Ok([
            traj.relative_energy_drift(),
            traj.max_momentum_norm(),
            traj.max_subspace_defect(),
            spec,
            lax,
            rs_traj.max_hermiticity_defect(),
            rs_traj.max_eigenvalue_drift(),
            rs_traj.max_trace_drift(),
            rs_traj.acceleration_residual(),
            gap,
        ])
    })?;
    let col = |i: usize| max_of(runs.iter().map(|r| r[i]));
    let checks: [(&str, &str, f64); 9] = [
        ("cm_energy_drift", "the CM Hamiltonian is conserved (relative drift)", 1e-8),
        ("cm_momentum", "the flow stays on the momentum-zero set", 1e-10),
        ("cm_spin_subspace", "the spin stays in the real form", 1e-10),
        ("cm_lax_spectrum", "the spectrum of L(z) is conserved at three spectral parameters", 1e-6),
        ("cm_lax_equation", "dL/dt = LB - BL along the flow", 1e-6),
        ("rs_hermiticity", "g stays Hermitian under the RS flow", 1e-10),
        ("rs_eigenvalue_drift", "the eigenvalues of g are conserved", 1e-8),
        ("rs_trace_drift", "tr(g^k) are conserved", 1e-8),
        ("rs_acceleration", "q'' equals d(g_ii)/dt (fourth-order differences)", 1e-6),
    ];
    for (i, (name, claim, tol)) in checks.into_iter().enumerate() {
        r.check(Check::below(name, claim, trials, col(i), cfg.tol_or(tol)));
    }
    // close encounters dominate the truncation error of the acceleration check
    r.measure("rs_min_gap", runs.iter().map(|r| r[9]).fold(f64::INFINITY, f64::min));
    Ok(())
}

pub fn expected_rank(form: Form, n: usize) -> usize {
    match form {
        Form::Compact => 1 + n * (n - 1) / 2,
        Form::Normal => n + (n - 1) * (n - 1) / 4,
    }
}

fn counts(cfg: &VerifyConfig, seed: u64, trials: usize, r: &mut Report) -> Res<()> {
    let n = cfg.n;
    for form in [Form::Compact, Form::Normal] {
        let family = nontrivial_family(form, n);
        let expected = expected_rank(form, n);
        let ranks = par_trials(trials, |t| {
            let x = CmState::random_with(form, n, &mut lie::trial_rng(seed, stream(50 + form_streams(form), t)));
            integrals::independence_rank(&x, &family)
        })?;
        let worst = ranks.iter().map(|&k| k.abs_diff(expected)).max().unwrap_or(0);
        r.check(Check::below(
            &format!("{}_rank", form.name()),
            &format!(
                "the nontrivial integrals are functionally independent: Jacobian rank {expected} = {}",
                match form {
                    Form::Compact => "1 + N(N-1)/2",
                    Form::Normal => "N + floor((N-1)^2/4)",
                }
            ),
            trials,
            worst as f64,
            // ranks are integers: any mismatch fails whatever the override
            0.5,
        ));
        r.measure(&format!("{}_ranks", form.name()), &ranks);
        r.measure(&format!("{}_family", form.name()), family.iter().map(|m| m.label()).collect::<Vec<_>>());
    }
    Ok(())
}
