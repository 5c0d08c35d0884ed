use std::path::Path;

use rayon::prelude::*;
use spinlab_core::rs::DiagonalConvention;
use spinlab_core::toda::{self, Grid, Sign, ADJUDICATION_RATIO};
use spinlab_core::SolitonSpec;

use crate::config::{require_seed, SolitonConfig};
use crate::report::{write_csv, Check, Report};
use crate::Failure;

pub fn resolve_spec(cfg: &SolitonConfig) -> Result<SolitonSpec, Failure> {
    if let Some(s) = &cfg.spec {
        return Ok(s.clone());
    }
    if let Some(p) = &cfg.spec_path {
        let text = std::fs::read_to_string(p).map_err(|e| Failure::Invalid(format!("{}: {e}", p.display())))?;
        return serde_json::from_str(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", p.display())));
    }
    if cfg.rank == 0 || cfg.n == 0 {
        return Err(Failure::Invalid("rank and n must be at least 1".into()));
    }
    Ok(SolitonSpec::random(cfg.rank, cfg.n, require_seed(cfg.seed)?))
}

fn max_of<'a>(it: impl IntoIterator<Item = &'a f64>) -> f64 {
    it.into_iter().cloned().fold(0.0, f64::max)
}

/// Scans the soliton frame over the grid, checks the RS equations along both
/// light-cone directions and the field equation, and adjudicates between the
/// two diagonal conventions.
pub fn run(cfg: &SolitonConfig, out: Option<&Path>) -> Result<Report, Failure> {
    let spec = resolve_spec(cfg)?;
    let g = &cfg.grid;
    if g.count == 0 || !(g.hi > g.lo) || !g.lo.is_finite() || !g.hi.is_finite() {
        return Err(Failure::Invalid("grid needs count >= 1 and finite lo < hi".into()));
    }
    let grid = Grid::square(g.lo, g.hi, g.count);
    let frames = toda::scan(&spec, &grid)?;

    let nodes: Vec<(f64, f64)> = grid
        .x_plus
        .iter()
        .flat_map(|&xp| grid.x_minus.iter().map(move |&xm| (xp, xm)))
        .collect();
    let rs: Vec<[toda::RsResidual; 2]> = nodes
        .par_iter()
        .map(|&(xp, xm)| {
            Ok([
                toda::rs_residual(&spec, xp, xm, Sign::Plus, cfg.rs_fd_step)?,
                toda::rs_residual(&spec, xp, xm, Sign::Minus, cfg.rs_fd_step)?,
            ])
        })
        .collect::<Result<_, spinlab_core::Error>>()?;
    let pde: Vec<f64> = grid
        .x_plus
        .par_iter()
        .map(|&xp| {
            let line = Grid {
                x_plus: vec![xp],
                x_minus: grid.x_minus.clone(),
            };
            toda::pde_residual(&spec, &line, cfg.pde_fd_step).map(|mut r| r.remove(0))
        })
        .collect::<Result<Vec<_>, _>>()?
        .concat();
    if let Some(path) = out {
        let n = spec.size();
        let mut header = vec!["x_plus".to_string(), "x_minus".to_string()];
        header.extend((1..=n).map(|i| format!("q_{i}")));
        for j in 0..=spec.rank {
            header.push(format!("re_tau_{j}"));
            header.push(format!("im_tau_{j}"));
        }
        for j in 0..=spec.rank {
            header.push(format!("re_phi_{j}"));
            header.push(format!("im_phi_{j}"));
        }
        for s in ["rs_plus", "rs_minus", "rs_half_plus", "rs_half_minus", "pde"] {
            header.push(s.into());
        }
        let rows: Vec<Vec<f64>> = frames
            .iter()
            .flatten()
            .zip(rs.iter().zip(&pde))
            .map(|(f, (r, p))| {
                let mut row = vec![f.x_plus, f.x_minus];
                row.extend(&f.q);
                for t in &f.tau {
                    row.extend([t.re, t.im]);
                }
                for v in &f.phi {
                    row.extend([v.re, v.im]);
                }
                row.extend([r[0].matrix, r[1].matrix, r[0].half_diagonal, r[1].half_diagonal, *p]);
                row
            })
            .collect();
        write_csv(path, &header, &rows)?;
    }

    let mut report = Report::new("soliton", cfg.seed, cfg);
    report.measure("spec", &spec);
    let plus = max_of(rs.iter().map(|r| &r[0].matrix));
    let minus = max_of(rs.iter().map(|r| &r[1].matrix));
    report.check(Check::below(
        "rs_flow_plus",
        "q and g+ solve the RS equations along x+",
        nodes.len(),
        plus,
        cfg.tol,
    ));
    report.check(Check::below(
        "rs_flow_minus",
        "q and g- solve the RS equations along x-",
        nodes.len(),
        minus,
        cfg.tol,
    ));
    // with a single soliton both conventions coincide
    if spec.size() > 1 {
        let adj = toda::adjudicate(&spec, &cfg.adjudication_points, cfg.rs_fd_step, cfg.tol)?;
        let (lo, hi) = if adj.matrix_max <= adj.half_diagonal_max {
            (adj.matrix_max, adj.half_diagonal_max)
        } else {
            (adj.half_diagonal_max, adj.matrix_max)
        };
        report.check(Check {
            name: "adjudication".into(),
            claim: "exactly one diagonal convention solves the RS equations, the other misses by 1e3 or more".into(),
            trials: 2 * cfg.adjudication_points.len(),
            max_residual: lo / hi,
            tolerance: 1.0 / ADJUDICATION_RATIO,
            pass: adj.selected.is_some(),
        });
        report.measure(
            "selected_convention",
            match adj.selected {
                Some(DiagonalConvention::Matrix) => "matrix",
                Some(DiagonalConvention::HalfDiagonal) => "half_diagonal",
                None => "none",
            },
        );
        report.measure("adjudication", &adj);
    }
    let pde_max = max_of(&pde);
    report.measure("max_pde_residual", pde_max);
    // the field equation is only claimed for single solitons
    if spec.size() == 1 {
        report.check(Check::below(
            "field_equation",
            "phi solves the affine Toda field equation",
            nodes.len(),
            pde_max,
            cfg.pde_tol,
        ));
    }
    Ok(report)
}
