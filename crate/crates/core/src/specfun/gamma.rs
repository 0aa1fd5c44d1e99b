use num_complex::Complex64;

use crate::error::{Error, Result};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// B_{2k} / (2k (2k-1)) for k = 1..=8.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// Below this modulus the argument is shifted up before the Stirling series.
const STIRLING_MIN_ABS: f64 = 15.0;

const MAX_SHIFT_RE: f64 = 1e6;

fn is_nonpositive_integer(re: f64, im: f64) -> bool {
    im == 0.0 && re <= 0.0 && re == re.round()
}

/// Principal branch of log Γ(z).
///
/// Uses Γ(z+1) = zΓ(z) to move the argument into the region where the
/// Stirling series is accurate to full double precision, accumulating the
/// principal logarithms of the shifts. That recurrence preserves the branch
/// that is analytic on the plane cut along the non-positive real axis.
pub fn ln_gamma(z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!(
            "ln_gamma of non-finite argument {z}"
        )));
    }
    if is_nonpositive_integer(z.re, z.im) {
        return Err(Error::Domain(format!("ln_gamma pole at {}", z.re)));
    }
    if z.re < -MAX_SHIFT_RE {
        return Err(Error::Domain(format!(
            "ln_gamma argument too far along the negative axis: {z}"
        )));
    }
    let mut w = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while w.re < 0.5 || w.norm() < STIRLING_MIN_ABS {
        shift += w.ln();
        w += 1.0;
    }
    Ok(stirling(w) - shift)
}

fn stirling(w: Complex64) -> Complex64 {
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    for &c in STIRLING.iter().rev() {
        series = series * inv2 + c;
    }
    (w - 0.5) * w.ln() - w + HALF_LN_2PI + series * inv
}

/// log Γ(x) for real x > 0.
pub fn ln_gamma_real(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "ln_gamma_real requires a positive finite argument, got {x}"
        )));
    }
    let mut w = x;
    let mut shift = 0.0;
    while w < STIRLING_MIN_ABS {
        shift += w.ln();
        w += 1.0;
    }
    let inv = 1.0 / w;
    let inv2 = inv * inv;
    let mut series = 0.0;
    for &c in STIRLING.iter().rev() {
        series = series * inv2 + c;
    }
    Ok((w - 0.5) * w.ln() - w + HALF_LN_2PI + series * inv - shift)
}

/// Γ(x) for real x > 0.
pub fn gamma(x: f64) -> Result<f64> {
    let lg = ln_gamma_real(x)?;
    if lg > 709.7 {
        return Err(Error::Overflow(format!("gamma({x})")));
    }
    Ok(lg.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ln_gamma_of_one_is_zero() {
        let v = ln_gamma(c(1.0, 0.0)).unwrap();
        assert!(v.norm() < 1e-15, "{v}");
    }

    #[test]
    fn ln_gamma_factorial() {
        let v = ln_gamma(c(5.0, 0.0)).unwrap();
        assert!((v.re - 24f64.ln()).abs() < 1e-14);
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn ln_gamma_half_is_ln_sqrt_pi() {
        let v = ln_gamma(c(0.5, 0.0)).unwrap();
        assert!((v.re - 0.5 * PI.ln()).abs() < 1e-14);
    }

    #[test]
    fn ln_gamma_poles_are_domain_errors() {
        for x in [0.0, -1.0, -7.0] {
            assert!(matches!(ln_gamma(c(x, 0.0)), Err(Error::Domain(_))));
        }
        assert!(ln_gamma(c(-1.0, 1e-3)).is_ok());
    }

    #[test]
    fn ln_gamma_negative_noninteger_matches_reflection() {
        // Γ(-1.5) = 4√π/3
        let v = ln_gamma(c(-1.5, 0.0)).unwrap().exp();
        assert!((v.re - 4.0 * PI.sqrt() / 3.0).abs() < 1e-13);
        assert!(v.im.abs() < 1e-13);
    }

    #[test]
    fn ln_gamma_imaginary_axis_modulus() {
        // |Γ(iy)|² = π / (y sinh πy)
        for y in [0.3, 2.0, 11.0, 40.0] {
            let v = ln_gamma(c(0.0, y)).unwrap();
            let expect = 0.5 * (PI / (y * (PI * y).sinh())).ln();
            assert!(
                (v.re - expect).abs() < 1e-12 * expect.abs().max(1.0),
                "y={y}"
            );
        }
    }

    #[test]
    fn ln_gamma_recurrence_in_complex_plane() {
        for z in [c(0.3, 0.7), c(-2.4, 5.0), c(7.0, -13.0), c(0.1, 120.0)] {
            let lhs = ln_gamma(z + 1.0).unwrap();
            let rhs = ln_gamma(z).unwrap() + z.ln();
            assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0), "z={z}");
        }
    }

    #[test]
    fn ln_gamma_real_agrees_with_complex() {
        for x in [1e-3, 0.37, 2.5, 14.9, 15.1, 256.0, 1e4] {
            let r = ln_gamma_real(x).unwrap();
            let z = ln_gamma(c(x, 0.0)).unwrap();
            assert!((r - z.re).abs() < 1e-13 * r.abs().max(1.0));
        }
        assert!((gamma(6.0).unwrap() - 120.0).abs() < 1e-12);
        assert!(ln_gamma_real(0.0).is_err());
    }
}
