use crate::error::{Error, Result};
use crate::lie::C64;

/// Minimal `|sin(z/2)|` accepted by [`c_of_z`].
pub const POLE_CUTOFF: f64 = 1e-8;

pub fn check_pole(z: C64) -> Result<()> {
    let dist = (z * 0.5).sin().norm();
    if dist > POLE_CUTOFF {
        Ok(())
    } else {
        Err(Error::PoleProximity {
            z: format!("{z}"),
            dist,
        })
    }
}

/// `c(z) = cot(z/2) / 2`.
pub fn c_of_z(z: C64) -> Result<C64> {
    check_pole(z)?;
    Ok(cot_half(z))
}

/// `d(z) = c(z) + z/12`.
pub fn d_of_z(z: C64) -> Result<C64> {
    Ok(c_of_z(z)? + z / 12.0)
}

/// `c'(z) = -1 / (4 sin^2(z/2))`.
pub fn c_prime(z: C64) -> Result<C64> {
    check_pole(z)?;
    let s = (z * 0.5).sin();
    Ok(-0.25 / (s * s))
}

pub fn d_prime(z: C64) -> Result<C64> {
    Ok(c_prime(z)? + 1.0 / 12.0)
}

pub(crate) fn cot_half(z: C64) -> C64 {
    let h = z * 0.5;
    0.5 * h.cos() / h.sin()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_vanishes_at_pi() {
        assert!(c_of_z(C64::new(std::f64::consts::PI, 0.0)).unwrap().norm() < 1e-16);
    }

    #[test]
    fn laurent_expansion_near_zero() {
        // cot(z/2)/2 = 1/z - z/12 - z^3/720 - ...
        let z = C64::new(1e-4, 0.0);
        let got = c_of_z(z).unwrap() - 1.0 / z;
        let series = -z / 12.0 - z * z * z / 720.0;
        // c(1e-4) ~ 1e4 is itself only representable to ~1e-12
        assert!((got - series).norm() < 2e-12);
        assert!((got.re - (-8.333333333333333e-6)).abs() < 2e-12);
    }

    #[test]
    fn c_is_odd() {
        let mut r = crate::lie::rng(4);
        for _ in 0..100 {
            let z = C64::new(crate::lie::gaussian(&mut r), crate::lie::gaussian(&mut r));
            let a = c_of_z(z).unwrap();
            let b = c_of_z(-z).unwrap();
            assert!((a + b).norm() < 1e-12 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn pole_rejected() {
        assert!(matches!(c_of_z(C64::new(0.0, 0.0)), Err(Error::PoleProximity { .. })));
        assert!(c_of_z(C64::new(2.0 * std::f64::consts::PI, 0.0)).is_err());
        assert!(d_of_z(C64::new(1e-12, 0.0)).is_err());
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let z = C64::new(0.7, -0.4);
        let h = 1e-5;
        let fd = (c_of_z(z + h).unwrap() - c_of_z(z - h).unwrap()) / (2.0 * h);
        assert!((fd - c_prime(z).unwrap()).norm() < 1e-9);
        let fd = (d_of_z(z + h).unwrap() - d_of_z(z - h).unwrap()) / (2.0 * h);
        assert!((fd - d_prime(z).unwrap()).norm() < 1e-9);
    }
}
