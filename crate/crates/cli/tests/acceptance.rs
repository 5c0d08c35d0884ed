//! Acceptance run: one PASS/FAIL line per criterion, at the stated
//! tolerances. Run with `cargo test -p spinlab-cli --test acceptance -- --nocapture`.
//!
//! Two sub-checks are expected to fail because the stated target contradicts
//! the definitions it is derived from (see `KNOWN_DEVIATIONS`); they are
//! printed as FAIL but do not abort the run. Any other failure does.

use std::process::Command;
use std::time::Instant;

use spinlab_cli::config::{GridConfig, SolitonConfig, Suite, VerifyConfig};
use spinlab_cli::report::Report;
use spinlab_cli::{soliton, verify};
use spinlab_core::toda::{self, Grid, Sign};
use spinlab_core::{SolitonSpec, C64};
use tempfile::TempDir;

const SEED: u64 = 20240611;

/// (criterion, sub-check, reason).
const KNOWN_DEVIATIONS: [(u32, &str, &str); 2] = [
    (
        1,
        "c2 = 0.0625",
        "with R = -1/2 coth(q_ij/2) the fitted constant is exactly 1/4; 0.0625 would need the kernel halved again",
    ),
    (
        5,
        "unweighted sum rule",
        "c(+-i inf) = -+i/2, so the odd coefficients obey sum_k (-1/4)^k I_{r,2k+1} = 0; the unweighted sum fails from r = 3 on",
    ),
];

struct Part {
    label: String,
    value: f64,
    tol: f64,
    pass: bool,
}

impl Part {
    fn below(label: &str, value: f64, tol: f64) -> Self {
        Part {
            label: label.into(),
            value,
            tol,
            pass: value < tol,
        }
    }
}

fn residual(r: &Report, name: &str) -> f64 {
    r.checks
        .iter()
        .find(|c| c.name == name)
        .unwrap_or_else(|| panic!("report {} has no check {name}", r.command))
        .max_residual
}

fn measurement(r: &Report, name: &str) -> f64 {
    r.measurements[name].as_f64().unwrap()
}

fn run_verify(suite: Suite, n: usize, trials: Option<usize>) -> (Report, f64) {
    let cfg = VerifyConfig {
        suite,
        n,
        trials,
        seed: Some(SEED),
        ..VerifyConfig::default()
    };
    let t = Instant::now();
    let r = verify::run(&cfg).expect("suite runs");
    (r, t.elapsed().as_secs_f64())
}

fn criterion_1() -> Vec<Part> {
    let (r, secs) = run_verify(Suite::Mdybe, 3, Some(100));
    let c2 = measurement(&r, "fitted_c2");
    vec![
        Part::below("residual after fit", residual(&r, "residual_after_fit"), 1e-9),
        Part::below("c2 = 0.0625", (c2 - 0.0625).abs(), 1e-6),
        Part::below(&format!("c2 constant (fitted {c2:.12})"), residual(&r, "c2_constant"), 1e-6),
        Part::below("runtime [s]", secs, 5.0),
    ]
}

fn criteria_2_3() -> (Vec<Part>, Vec<Part>) {
    let (r, secs) = run_verify(Suite::Jacobi, 3, Some(100));
    (
        vec![
            Part::below("groupoid cyclic sum", residual(&r, "jacobi_groupoid"), 1e-5),
            Part::below("RS stable cyclic sum", residual(&r, "jacobi_rs_stable"), 1e-5),
            Part::below("runtime [s]", secs, 30.0),
        ],
        vec![
            Part::below("Sigma", residual(&r, "poisson_map_sigma"), 1e-6),
            Part::below("kappa", residual(&r, "poisson_map_kappa"), 1e-6),
        ],
    )
}

fn criteria_4_7() -> (Vec<Part>, Vec<Part>) {
    let mut four = Vec::new();
    let mut seven = Vec::new();
    for n in [3, 4] {
        let (r, secs) = run_verify(Suite::Lax, n, Some(1));
        four.push(Part::below(&format!("N={n} energy drift"), residual(&r, "cm_energy_drift"), 1e-8));
        four.push(Part::below(&format!("N={n} momentum"), residual(&r, "cm_momentum"), 1e-10));
        four.push(Part::below(&format!("N={n} spectrum drift"), residual(&r, "cm_lax_spectrum"), 1e-6));
        four.push(Part::below(&format!("N={n} Lax residual"), residual(&r, "cm_lax_equation"), 1e-6));
        four.push(Part::below(&format!("N={n} runtime [s]"), secs, 60.0));
        if n == 3 {
            seven.push(Part::below("Hermiticity", residual(&r, "rs_hermiticity"), 1e-10));
            seven.push(Part::below("eigenvalue drift", residual(&r, "rs_eigenvalue_drift"), 1e-8));
            seven.push(Part::below("q'' vs (g_ii)'", residual(&r, "rs_acceleration"), 1e-6));
        }
    }
    let (c, _) = run_verify(Suite::Commute, 3, Some(20));
    seven.push(Part::below("central brackets", residual(&c, "rs_central_brackets"), 1e-6));
    (four, seven)
}

fn criterion_5() -> Vec<Part> {
    let (r, _) = run_verify(Suite::Involution, 3, Some(20));
    vec![
        Part::below("reality pattern", residual(&r, "compact_reality"), 1e-10),
        Part::below("unweighted sum rule", measurement(&r, "compact_unweighted_sum_rule_max"), 1e-10),
        Part::below("weighted sum rule", residual(&r, "compact_sum_rule"), 1e-10),
        Part::below("flow drift compact", residual(&r, "compact_flow_drift"), 1e-6),
        Part::below("flow drift normal", residual(&r, "normal_flow_drift"), 1e-6),
        Part::below("involution compact", residual(&r, "compact_involution"), 1e-5),
        Part::below("involution normal", residual(&r, "normal_involution"), 1e-5),
    ]
}

fn criterion_6() -> Vec<Part> {
    let mut parts = Vec::new();
    for (n, form, expected) in [(2, "compact", 2), (3, "compact", 4), (3, "normal", 4)] {
        let (r, _) = run_verify(Suite::Counts, n, Some(3));
        let ranks: Vec<u64> = r.measurements[&format!("{form}_ranks")]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_u64().unwrap())
            .collect();
        let worst = ranks.iter().map(|k| k.abs_diff(expected)).max().unwrap();
        parts.push(Part {
            label: format!("{form} N={n} rank {ranks:?} = {expected}"),
            value: worst as f64,
            tol: 0.5,
            pass: worst == 0,
        });
    }
    parts
}

fn criterion_8() -> Vec<Part> {
    let spec = SolitonSpec::one_soliton(1, 1, 1.0, 1.0, 0.0, 1.0).unwrap();
    let grid = Grid::square(-2.0, 2.0, 50);
    let res = toda::pde_residual(&spec, &grid, 1e-3).unwrap();
    let worst = res.iter().flatten().cloned().fold(0.0, f64::max);

    // substitution oracle: tau_j = 1 + i a e^{i j theta} e^{l+ x+ + l- x-} with
    // l+- = +-sqrt(2) m e^{-+eta} sin(theta/2)
    let (a, theta) = (1.0, std::f64::consts::PI);
    let lp = 2f64.sqrt() * (theta / 2.0).sin();
    let mut oracle: f64 = 0.0;
    for &xp in &grid.x_plus {
        for &xm in &grid.x_minus {
            let tau = toda::tau_functions(&spec, &toda::evolve_v(&spec, xp, xm).unwrap());
            for (j, t) in tau.iter().enumerate() {
                let e = C64::new(0.0, j as f64 * theta).exp() * (lp * xp - lp * xm).exp();
                let want = C64::new(1.0, 0.0) + C64::new(0.0, a) * e;
                oracle = oracle.max((t - want).norm() / want.norm());
            }
        }
    }
    vec![
        Part::below("50x50 field-equation residual", worst, 1e-5),
        Part::below("tau matches the closed form", oracle, 1e-12),
    ]
}

fn criterion_9() -> Vec<Part> {
    let cfg = SolitonConfig {
        rank: 3,
        n: 3,
        seed: Some(SEED),
        grid: GridConfig {
            lo: -1.0,
            hi: 1.0,
            count: 10,
        },
        ..SolitonConfig::default()
    };
    let r = soliton::run(&cfg, None).expect("soliton scan runs");
    let adj = &r.measurements["adjudication"];
    let (m, h) = (adj["matrix_max"].as_f64().unwrap(), adj["half_diagonal_max"].as_f64().unwrap());
    // spot check of one direction away from the grid, continuing from a neighbour
    let spec = toda::SolitonSpec::random(3, 3, SEED);
    let spot = toda::rs_residual(&spec, 0.37, -0.81, Sign::Minus, 1e-4).unwrap().matrix;
    vec![
        Part::below("x+ residual", residual(&r, "rs_flow_plus"), 1e-6),
        Part::below("x- residual", residual(&r, "rs_flow_minus"), 1e-6),
        Part::below("off-grid residual", spot, 1e-6),
        Part {
            label: format!(
                "adjudication selects {} (half-diagonal / matrix = {:.1e})",
                r.measurements["selected_convention"].as_str().unwrap(),
                h / m
            ),
            value: m / h,
            tol: 1e-3,
            pass: r.checks.iter().any(|c| c.name == "adjudication" && c.pass),
        },
    ]
}

fn criterion_10() -> Vec<Part> {
    let d = TempDir::new().unwrap();
    let p = |s: &str| d.path().join(s).to_str().unwrap().to_string();
    let spec = p("spec.json");
    std::fs::write(
        &spec,
        r#"{"rank": 1, "m": 1.0, "beta": 1.0, "theta": [3.141592653589793], "eta": [0.0], "v0": {"re": [[0.0]], "im": [[1.0]]}}"#,
    )
    .unwrap();
    let seed = SEED.to_string();
    let runs: Vec<(&str, Vec<String>)> = vec![
        ("simulate cm", vec!["simulate".into(), "cm".into(), "--seed".into(), seed.clone(), "--t-final".into(), "2".into()]),
        ("simulate rs", vec!["simulate".into(), "rs".into(), "--seed".into(), seed.clone(), "--t-final".into(), "2".into()]),
        ("soliton", vec!["soliton".into(), "--spec".into(), spec.clone(), "--grid-count".into(), "12".into()]),
        ("verify all", vec!["verify".into(), "all".into(), "--seed".into(), seed.clone(), "--trials".into(), "10".into()]),
    ];
    let mut parts = Vec::new();
    for (name, args) in runs {
        let mut bytes = Vec::new();
        for k in 0..2 {
            let (csv, rep) = (p(&format!("{k}.csv")), p(&format!("{k}.json")));
            let mut full = args.clone();
            full.extend(["--report".into(), rep.clone()]);
            if !name.starts_with("verify") {
                full.extend(["--out".into(), csv.clone()]);
            }
            let o = Command::new(env!("CARGO_BIN_EXE_spinlab")).args(&full).output().unwrap();
            // verification outcomes are beside the point here, only crashes are not
            let code = o.status.code().unwrap();
            assert!(code <= 1, "{name}: {}", String::from_utf8_lossy(&o.stderr));
            let csv_bytes = std::fs::read(&csv).unwrap_or_default();
            bytes.push((code, csv_bytes, std::fs::read(&rep).unwrap()));
            let _ = std::fs::remove_file(&csv);
        }
        let same = bytes[0] == bytes[1];
        parts.push(Part {
            label: format!("{name} byte-identical"),
            value: if same { 0.0 } else { 1.0 },
            tol: 0.5,
            pass: same,
        });
    }
    parts
}

fn known(criterion: u32, label: &str) -> Option<&'static str> {
    KNOWN_DEVIATIONS
        .iter()
        .find(|(c, l, _)| *c == criterion && *l == label)
        .map(|(_, _, why)| *why)
}

#[test]
fn acceptance() {
    let (c2, c3) = criteria_2_3();
    let (c4, c7) = criteria_4_7();
    let criteria: Vec<(u32, &str, Vec<Part>)> = vec![
        (1, "mDYBE for the hyperbolic R, N=3, 100 trials", criterion_1()),
        (2, "Jacobi identity, groupoid and RS stable brackets, 100 triples", c2),
        (3, "Sigma and kappa are Poisson maps, 100 trials", c3),
        (4, "spin CM compact N=3,4 on [0,10], dt=1e-3, rk4", c4),
        (5, "integrals: reality, sum rules, conservation, involution", criterion_5()),
        (6, "independence ranks", criterion_6()),
        (7, "spin RS N=3 on [0,10]", c7),
        (8, "Toda 1-soliton field equation", criterion_8()),
        (9, "Toda generic V0 N=3: RS residuals and adjudication", criterion_9()),
        (10, "determinism", criterion_10()),
    ];

    let mut unexpected = Vec::new();
    for (id, title, parts) in &criteria {
        let pass = parts.iter().all(|p| p.pass);
        let detail: Vec<String> = parts
            .iter()
            .map(|p| {
                format!(
                    "{} {} {:.3e} < {:.0e}",
                    if p.pass { "ok" } else { "FAILED" },
                    p.label,
                    p.value,
                    p.tol
                )
            })
            .collect();
        println!("[{}] {id:>2} {title}: {}", if pass { "PASS" } else { "FAIL" }, detail.join("; "));
        for p in parts.iter().filter(|p| !p.pass) {
            match known(*id, &p.label) {
                Some(why) => println!("       known deviation ({}): {why}", p.label),
                None => unexpected.push(format!("criterion {id}: {}", p.label)),
            }
        }
        for p in parts.iter().filter(|p| p.pass) {
            if known(*id, &p.label).is_some() {
                println!("       note: documented deviation '{}' now passes", p.label);
            }
        }
    }
    assert!(unexpected.is_empty(), "unexpected failures: {unexpected:?}");
}
