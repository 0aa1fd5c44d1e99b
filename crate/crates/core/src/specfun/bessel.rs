//! Modified Bessel functions of the second kind, integer order.
//!
//! K₀ and K₁ come from the ascending series for x ≤ 2 and from Steed's
//! continued fraction (Temme's CF2) above that; higher orders use the
//! upward recurrence, which is stable for K. Everything is carried in the
//! exponentially scaled form eˣK so large arguments do not underflow early.

use super::Evaluated;
use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_MAX_X: f64 = 2.0;
const MAX_ITER: usize = 10_000;
const RESCALE: f64 = 1e250;

fn check_x(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "bessel_k requires a positive finite argument, got {x}"
        )));
    }
    Ok(())
}

/// (eˣK₀(x), eˣK₁(x))
fn k01_scaled(x: f64) -> (f64, f64) {
    if x <= SERIES_MAX_X {
        let (k0, k1) = k01_series(x);
        let e = x.exp();
        (k0 * e, k1 * e)
    } else {
        k01_steed(x)
    }
}

fn k01_series(x: f64) -> (f64, f64) {
    let t = 0.25 * x * x;
    let ln_half = (0.5 * x).ln();

    // I0 and the harmonic-weighted tail of K0
    let mut term = 1.0;
    let mut i0 = 1.0;
    let mut tail0 = 0.0;
    let mut harmonic = 0.0;
    // I1/(x/2) and the digamma-weighted tail of K1
    let mut term1 = 1.0;
    let mut i1 = 1.0;
    let mut tail1 = -2.0 * EULER_GAMMA + 1.0;
    let mut h_k = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= t / (kf * kf);
        harmonic += 1.0 / kf;
        i0 += term;
        tail0 += term * harmonic;

        term1 *= t / (kf * (kf + 1.0));
        h_k += 1.0 / kf;
        let h_k1 = h_k + 1.0 / (kf + 1.0);
        i1 += term1;
        tail1 += term1 * (-2.0 * EULER_GAMMA + h_k + h_k1);
        if term < 1e-18 * i0 && term1 < 1e-18 * i1 {
            break;
        }
    }
    let k0 = -(ln_half + EULER_GAMMA) * i0 + tail0;
    let k1 = 1.0 / x + 0.5 * x * i1 * ln_half - 0.25 * x * tail1;
    (k0, k1)
}

fn k01_steed(x: f64) -> (f64, f64) {
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

/// eˣK_n(x) as a mantissa and a count of `RESCALE` factors.
fn scaled_with_exponent(order: u32, x: f64) -> (f64, i32) {
    let (k0, k1) = k01_scaled(x);
    match order {
        0 => (k0, 0),
        1 => (k1, 0),
        _ => {
            let mut prev = k0;
            let mut cur = k1;
            let mut exp = 0;
            let two_over_x = 2.0 / x;
            for n in 1..order {
                let next = prev + (n as f64) * two_over_x * cur;
                prev = cur;
                cur = next;
                if cur > RESCALE {
                    cur /= RESCALE;
                    prev /= RESCALE;
                    exp += 1;
                }
            }
            (cur, exp)
        }
    }
}

/// eˣ·K_order(x). Errors with `Overflow` when the scaled value exceeds `f64`.
pub fn bessel_k_scaled(order: u32, x: f64) -> Result<f64> {
    check_x(x)?;
    let (m, e) = scaled_with_exponent(order, x);
    if e == 0 && m.is_finite() {
        return Ok(m);
    }
    let ln = m.ln() + e as f64 * RESCALE.ln();
    if ln > 709.7 {
        return Err(Error::Overflow(format!("exp(x)·K_{order}({x})")));
    }
    Ok(ln.exp())
}

/// ln K_order(x), finite for every order and x > 0.
pub fn ln_bessel_k(order: u32, x: f64) -> Result<f64> {
    check_x(x)?;
    let (m, e) = scaled_with_exponent(order, x);
    Ok(m.ln() + e as f64 * RESCALE.ln() - x)
}

/// K_order(x) with an error estimate. Values below the `f64` range come
/// back as `+0.0` with the underflow flag set; values above it are an
/// `Overflow` error (use [`ln_bessel_k`] there).
pub fn bessel_k(order: u32, x: f64) -> Result<Evaluated> {
    check_x(x)?;
    let (m, e) = scaled_with_exponent(order, x);
    let rel = f64::EPSILON * (16.0 + 2.0 * order as f64);
    let ln = m.ln() + e as f64 * RESCALE.ln() - x;
    if ln > 709.7 {
        return Err(Error::Overflow(format!("K_{order}({x})")));
    }
    let value = if e == 0 && ln > -700.0 {
        m * (-x).exp()
    } else {
        ln.exp()
    };
    if value == 0.0 {
        return Ok(Evaluated {
            value: 0.0,
            abs_err: f64::MIN_POSITIVE,
            underflow: true,
        });
    }
    Ok(Evaluated::new(value, value * rel))
}
