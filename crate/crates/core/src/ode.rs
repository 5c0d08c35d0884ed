//! Explicit Runge-Kutta integrators on flat real state vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Rk4,
    Dopri,
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(Scheme::Rk4),
            "dopri" => Ok(Scheme::Dopri),
            other => Err(Error::InvalidInput(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Tolerances for the adaptive Dormand-Prince scheme.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AdaptiveOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions {
            rtol: 1e-11,
            atol: 1e-12,
            h_min: 1e-12,
        }
    }
}

fn axpy(y: &[f64], h: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = y.to_vec();
    for (c, k) in terms {
        let s = h * c;
        for (o, v) in out.iter_mut().zip(k.iter()) {
            *o += s * v;
        }
    }
    out
}

/// One classical fourth-order Runge-Kutta step.
pub fn rk4_step<F>(f: &mut F, t: f64, y: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, &axpy(y, h, &[(0.5, &k1)]))?;
    let k3 = f(t + 0.5 * h, &axpy(y, h, &[(0.5, &k2)]))?;
    let k4 = f(t + h, &axpy(y, h, &[(1.0, &k3)]))?;
    Ok(axpy(y, h, &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)]))
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// One Dormand-Prince 5(4) step; returns the fifth-order solution and the
/// scaled error norm.
pub fn dopri_step<F>(f: &mut F, t: f64, y: &[f64], h: f64, opts: &AdaptiveOptions) -> Result<(Vec<f64>, f64)>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    let k1 = f(t, y)?;
    let k2 = f(t + h / 5.0, &axpy(y, h, &[(A21, &k1)]))?;
    let k3 = f(t + 0.3 * h, &axpy(y, h, &[(A31, &k1), (A32, &k2)]))?;
    let k4 = f(t + 0.8 * h, &axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = f(
        t + 8.0 / 9.0 * h,
        &axpy(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    )?;
    let k6 = f(
        t + h,
        &axpy(y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    )?;
    let y5 = axpy(y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(t + h, &y5)?;
    let mut err = 0.0f64;
    for i in 0..y.len() {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = opts.atol + opts.rtol * y[i].abs().max(y5[i].abs());
        err += (e / sc).powi(2);
    }
    let err = (err / y.len().max(1) as f64).sqrt();
    Ok((y5, err))
}

/// Integrates from `t = 0` to `t_final`, calling `observe` at `t = 0` and at
/// every multiple of `dt` (the last sample lands exactly on `t_final`).
///
/// With [`Scheme::Rk4`] `dt` is also the step size; with [`Scheme::Dopri`]
/// the steps between samples are chosen adaptively.
pub fn integrate<F, O>(
    mut f: F,
    y0: &[f64],
    t_final: f64,
    dt: f64,
    scheme: Scheme,
    opts: &AdaptiveOptions,
    mut observe: O,
) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
    O: FnMut(f64, &[f64]) -> Result<()>,
{
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
    }
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(Error::InvalidInput(format!("final time must be non-negative, got {t_final}")));
    }
    let steps = ((t_final / dt) - 1e-9).ceil().max(0.0) as usize;
    let mut y = y0.to_vec();
    let mut t = 0.0;
    observe(t, &y)?;
    let mut h_try = dt;
    for s in 1..=steps {
        let t_next = if s == steps { t_final } else { s as f64 * dt };
        match scheme {
            Scheme::Rk4 => {
                y = rk4_step(&mut f, t, &y, t_next - t)?;
            }
            Scheme::Dopri => {
                let mut tc = t;
                while tc < t_next {
                    let remaining = t_next - tc;
                    let last = h_try >= remaining;
                    let h = if last { remaining } else { h_try };
                    let (y_new, err) = dopri_step(&mut f, tc, &y, h, opts)?;
                    let err = if err.is_finite() { err } else { f64::INFINITY };
                    let factor = if err == 0.0 {
                        5.0
                    } else {
                        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    if err <= 1.0 {
                        tc = if last { t_next } else { tc + h };
                        y = y_new;
                        if !last {
                            h_try = h * factor;
                        }
                    } else {
                        h_try = h * factor;
                        if h_try < opts.h_min {
                            return Err(Error::StepUnderflow { time: tc, step: h_try });
                        }
                    }
                }
            }
        }
        t = t_next;
        observe(t, &y)?;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator(_t: f64, y: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![y[1], -y[0]])
    }

    #[test]
    fn rk4_is_fourth_order() {
        let err = |dt: f64| {
            let y = integrate(oscillator, &[1.0, 0.0], 1.0, dt, Scheme::Rk4, &AdaptiveOptions::default(), |_, _| Ok(()))
                .unwrap();
            (y[0] - 1f64.cos()).abs()
        };
        let ratio = err(0.02) / err(0.01);
        assert!((ratio - 16.0).abs() < 1.0, "{ratio}");
    }

    #[test]
    fn dopri_meets_tolerance() {
        let y = integrate(oscillator, &[1.0, 0.0], 10.0, 0.5, Scheme::Dopri, &AdaptiveOptions::default(), |_, _| Ok(()))
            .unwrap();
        assert!((y[0] - 10f64.cos()).abs() < 1e-9);
        assert!((y[1] + 10f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn samples_land_on_grid() {
        let mut ts = Vec::new();
        integrate(oscillator, &[1.0, 0.0], 1.05, 0.25, Scheme::Rk4, &AdaptiveOptions::default(), |t, _| {
            ts.push(t);
            Ok(())
        })
        .unwrap();
        assert_eq!(ts, vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.05]);
    }

    #[test]
    fn linear_flow_is_exact() {
        let y = integrate(|_, _| Ok(vec![2.0]), &[1.0], 3.0, 0.1, Scheme::Rk4, &AdaptiveOptions::default(), |_, _| Ok(()))
            .unwrap();
        assert!((y[0] - 7.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_step() {
        let r = integrate(oscillator, &[1.0, 0.0], 1.0, 0.0, Scheme::Rk4, &AdaptiveOptions::default(), |_, _| Ok(()));
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn stiff_blowup_underflows() {
        let opts = AdaptiveOptions {
            h_min: 1e-6,
            ..AdaptiveOptions::default()
        };
        let r = integrate(|_, y| Ok(vec![y[0] * y[0]]), &[1.0], 2.0, 0.5, Scheme::Dopri, &opts, |_, _| Ok(()));
        assert!(r.is_err());
    }
}
