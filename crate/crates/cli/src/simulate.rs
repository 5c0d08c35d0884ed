use std::path::Path;

use rayon::prelude::*;
use spinlab_core::integrals::{self, nontrivial_family};
use spinlab_core::{cm, rs, CmState, Matrix, RsState};

use crate::config::{check_run, require_seed, CmConfig, RsConfig};
use crate::report::{write_csv, Report};
use crate::Failure;

fn sample_indices(len: usize, every: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..len).step_by(every).collect();
    if idx.last() != Some(&(len - 1)) {
        idx.push(len - 1);
    }
    idx
}

fn upper_header(prefix: &str, n: usize) -> Vec<String> {
    let mut h = Vec::new();
    for i in 0..n {
        for j in i..n {
            h.push(format!("re_{prefix}_{}_{}", i + 1, j + 1));
            h.push(format!("im_{prefix}_{}_{}", i + 1, j + 1));
        }
    }
    h
}

fn upper_values(m: &Matrix, row: &mut Vec<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in i..n {
            row.push(m[(i, j)].re);
            row.push(m[(i, j)].im);
        }
    }
}

fn indexed(name: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |i| format!("{name}_{i}"))
}

pub fn initial_cm(cfg: &CmConfig) -> Result<CmState, Failure> {
    match &cfg.initial {
        Some(init) => {
            let x = CmState::new(cfg.form, init.q.clone(), init.p.clone(), Matrix::try_from(&init.xi)?)?;
            if x.n() != cfg.n {
                return Err(Failure::Invalid(format!("initial state has N = {}, config says n = {}", x.n(), cfg.n)));
            }
            Ok(x)
        }
        None => Ok(CmState::random(cfg.form, cfg.n, require_seed(cfg.seed)?)),
    }
}

/// Integrates the spin CM system and writes the sampled trajectory to `out`.
pub fn simulate_cm(cfg: &CmConfig, out: Option<&Path>) -> Result<Report, Failure> {
    check_run(cfg.n, cfg.t_final, cfg.dt, cfg.every)?;
    let x0 = initial_cm(cfg)?;
    let traj = cm::integrate(&x0, cfg.t_final, cfg.dt, cfg.scheme)?;
    let family = nontrivial_family(cfg.form, cfg.n);
    let idx = sample_indices(traj.states.len(), cfg.every);
    let values: Vec<Vec<f64>> = idx
        .par_iter()
        .map(|&k| integrals::family_values(&traj.states[k], &family))
        .collect::<Result<_, _>>()?;

    let v0 = integrals::family_values(&x0, &family)?;
    let mut integral_drift = vec![0.0f64; family.len()];
    for v in &values {
        for (d, (a, b)) in integral_drift.iter_mut().zip(v.iter().zip(&v0)) {
            *d = d.max((a - b).abs() / (1.0 + b.abs()));
        }
    }

    if let Some(path) = out {
        let n = cfg.n;
        let mut header = vec!["t".to_string()];
        header.extend(indexed("q", n));
        header.extend(indexed("p", n));
        header.extend(upper_header("xi", n));
        header.push("H".into());
        header.push("J_norm".into());
        header.extend(family.iter().map(|m| m.label().replace("Im ", "im_")));
        let rows: Vec<Vec<f64>> = idx
            .iter()
            .zip(&values)
            .map(|(&k, v)| {
                let x = &traj.states[k];
                let mut row = vec![traj.times[k]];
                row.extend(&x.q);
                row.extend(&x.p);
                upper_values(&x.xi, &mut row);
                row.push(traj.energy[k]);
                row.push(traj.momentum_norm[k]);
                row.extend(v);
                row
            })
            .collect();
        write_csv(path, &header, &rows)?;
    }

    let mut report = Report::new("simulate cm", cfg.seed, cfg);
    report.measure("steps", traj.states.len() - 1);
    report.measure("relative_energy_drift", traj.relative_energy_drift());
    report.measure("max_momentum_norm", traj.max_momentum_norm());
    report.measure("max_subspace_defect", traj.max_subspace_defect());
    report.measure(
        "integral_drift",
        family
            .iter()
            .zip(&integral_drift)
            .map(|(m, d)| (m.label(), *d))
            .collect::<std::collections::BTreeMap<_, _>>(),
    );
    Ok(report)
}

pub fn initial_rs(cfg: &RsConfig) -> Result<RsState, Failure> {
    match &cfg.initial {
        Some(init) => {
            let x = RsState::new(init.q.clone(), Matrix::try_from(&init.g)?)?;
            if x.n() != cfg.n {
                return Err(Failure::Invalid(format!("initial state has N = {}, config says n = {}", x.n(), cfg.n)));
            }
            Ok(x)
        }
        None => Ok(RsState::random(cfg.n, require_seed(cfg.seed)?)),
    }
}

/// Integrates the spin RS system and writes the sampled trajectory to `out`.
pub fn simulate_rs(cfg: &RsConfig, out: Option<&Path>) -> Result<Report, Failure> {
    check_run(cfg.n, cfg.t_final, cfg.dt, cfg.every)?;
    let x0 = initial_rs(cfg)?;
    let traj = rs::integrate(&x0, cfg.t_final, cfg.dt, cfg.scheme)?;

    if let Some(path) = out {
        let n = cfg.n;
        let mut header = vec!["t".to_string()];
        header.extend(indexed("q", n));
        header.extend(upper_header("g", n));
        header.extend(indexed("eig", n));
        header.extend(indexed("trace", n));
        header.push("hermiticity_defect".into());
        let rows: Vec<Vec<f64>> = sample_indices(traj.states.len(), cfg.every)
            .into_iter()
            .map(|k| {
                let x = &traj.states[k];
                let mut row = vec![traj.times[k]];
                row.extend(&x.q);
                upper_values(&x.g, &mut row);
                row.extend(&traj.eigenvalues[k]);
                row.extend(&traj.traces[k]);
                row.push(traj.hermiticity_defect[k]);
                row
            })
            .collect();
        write_csv(path, &header, &rows)?;
    }

    let mut report = Report::new("simulate rs", cfg.seed, cfg);
    report.measure("steps", traj.states.len() - 1);
    report.measure("max_hermiticity_defect", traj.max_hermiticity_defect());
    report.measure("max_eigenvalue_drift", traj.max_eigenvalue_drift());
    report.measure("max_trace_drift", traj.max_trace_drift());
    report.measure("acceleration_residual", traj.acceleration_residual());
    Ok(report)
}
