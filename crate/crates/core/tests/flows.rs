use spinlab_core::cm::{self, CmState, Form};
use spinlab_core::integrals::{self, nontrivial_family};
use spinlab_core::lie::{self, Matrix, C64};
use spinlab_core::ode::Scheme;
use spinlab_core::rs::{self, RsState};

const Z0: [C64; 3] = [C64::new(0.3, 0.4), C64::new(-0.9, 0.6), C64::new(1.1, -0.5)];

#[test]
fn cm_long_run_conserves_everything() {
    for (n, seed) in [(3, 1), (4, 2)] {
        let x0 = CmState::random(Form::Compact, n, seed);
        let traj = cm::integrate(&x0, 10.0, 1e-3, Scheme::Rk4).unwrap();
        assert!(traj.relative_energy_drift() < 1e-8, "N={n}: {:e}", traj.relative_energy_drift());
        assert!(traj.max_momentum_norm() < 1e-10);
        assert!(traj.max_subspace_defect() < 1e-10);

        let spectra0: Vec<Vec<C64>> = Z0.iter().map(|&z| cm::lax_spectrum(&x0, z).unwrap()).collect();
        for (k, x) in traj.states.iter().enumerate().step_by(1000) {
            for (z, s0) in Z0.iter().zip(&spectra0) {
                let s = cm::lax_spectrum(x, *z).unwrap();
                assert!(lie::spectrum_distance(&s, s0) < 1e-6, "N={n} sample {k}");
                assert!(cm::lax_residual(x, *z, 1e-4).unwrap() < 1e-6);
            }
        }
    }
}

#[test]
fn normal_form_flow_stays_real() {
    let x0 = CmState::random(Form::Normal, 3, 5);
    let traj = cm::integrate(&x0, 5.0, 1e-3, Scheme::Dopri).unwrap();
    assert!(traj.relative_energy_drift() < 1e-8);
    assert!(traj.max_subspace_defect() < 1e-10);
    assert!(traj.max_momentum_norm() < 1e-10);
}

#[test]
fn cm_flow_is_torus_equivariant() {
    let x0 = CmState::random(Form::Compact, 3, 6);
    let d: Vec<C64> = [0.0, 1.3, -0.4].iter().map(|&a| C64::from_polar(1.0, a)).collect();
    let a = cm::integrate(&x0, 5.0, 1e-2, Scheme::Rk4).unwrap();
    let b = cm::integrate(&x0.conjugate_spin(&d), 5.0, 1e-2, Scheme::Rk4).unwrap();
    let (xa, xb) = (a.states.last().unwrap(), b.states.last().unwrap());
    let moved = xa.conjugate_spin(&d);
    assert!(lie::max_abs(&(&moved.xi - &xb.xi)) < 1e-9);
    for (p, q) in xa.q.iter().zip(&xb.q) {
        assert!((p - q).abs() < 1e-9);
    }
}

#[test]
fn reduced_trajectory_is_gauge_independent() {
    let x0 = CmState::random(Form::Compact, 3, 7);
    let d: Vec<C64> = [0.7, -2.0, 0.4].iter().map(|&a| C64::from_polar(1.0, a)).collect();
    let a = cm::integrate(&x0, 2.0, 0.5, Scheme::Rk4).unwrap();
    let b = cm::integrate(&x0.conjugate_spin(&d), 2.0, 0.5, Scheme::Rk4).unwrap();
    for (xa, xb) in a.states.iter().zip(&b.states) {
        let (_, ra) = cm::gauge_fix(&xa.xi).unwrap();
        let (_, rb) = cm::gauge_fix(&xb.xi).unwrap();
        assert!(lie::max_abs(&(ra - rb)) < 1e-9);
    }
}

#[test]
fn integrals_are_conserved_along_the_flow() {
    for form in [Form::Compact, Form::Normal] {
        let x0 = CmState::random(form, 3, 8);
        let fam = nontrivial_family(form, 3);
        let traj = cm::integrate(&x0, 10.0, 1e-3, Scheme::Rk4).unwrap();
        let v0 = integrals::family_values(&x0, &fam).unwrap();
        for x in traj.states.iter().step_by(500) {
            let v = integrals::family_values(x, &fam).unwrap();
            for (a, b) in v.iter().zip(&v0) {
                assert!((a - b).abs() / (1.0 + b.abs()) < 1e-6, "{form:?}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn rs_long_run() {
    let x0 = RsState::random(3, 9);
    let traj = rs::integrate(&x0, 10.0, 1e-3, Scheme::Rk4).unwrap();
    assert!(traj.max_hermiticity_defect() < 1e-10);
    assert!(traj.max_eigenvalue_drift() < 1e-8, "{:e}", traj.max_eigenvalue_drift());
    assert!(traj.max_trace_drift() < 1e-8);
    assert!(traj.acceleration_residual() < 1e-6, "{:e}", traj.acceleration_residual());
    // sum of q' is tr g, a constant: sum q is linear in t
    let s = |k: usize| traj.states[k].q.iter().sum::<f64>();
    let rate = x0.g.trace().re;
    let last = traj.states.len() - 1;
    assert!((s(last) - s(0) - rate * 10.0).abs() < 1e-8);
}

#[test]
fn rs_flow_is_translation_equivariant() {
    let x0 = RsState::random(3, 10);
    let shifted = RsState {
        q: x0.q.iter().map(|v| v + 2.5).collect(),
        g: x0.g.clone(),
    };
    let a = rs::integrate(&x0, 2.0, 1e-2, Scheme::Rk4).unwrap();
    let b = rs::integrate(&shifted, 2.0, 1e-2, Scheme::Rk4).unwrap();
    let (xa, xb) = (a.states.last().unwrap(), b.states.last().unwrap());
    assert!(lie::max_abs(&(&xa.g - &xb.g)) < 1e-12);
    for (p, q) in xa.q.iter().zip(&xb.q) {
        assert!((p + 2.5 - q).abs() < 1e-12);
    }
}

#[test]
fn rs_diagonal_run_is_free() {
    let g = lie::diag_real(&[1.0, -0.5, 2.0]);
    let x0 = RsState::new(vec![0.0, 3.0, 6.0], g.clone()).unwrap();
    let traj = rs::integrate(&x0, 1.0, 0.1, Scheme::Dopri).unwrap();
    let last = traj.states.last().unwrap();
    assert_eq!(last.g, g);
    assert!((last.q[2] - 8.0).abs() < 1e-12);
}

#[test]
fn cm_collision_is_reported() {
    // two particles released towards each other with no spin
    let x0 = CmState::new(Form::Compact, vec![0.5, 0.0], vec![-1.0, 1.0], Matrix::zeros(2, 2)).unwrap();
    let err = cm::integrate(&x0, 1.0, 1e-3, Scheme::Rk4).unwrap_err();
    assert!(matches!(err, spinlab_core::Error::CollisionAbort { .. }), "{err}");
}
