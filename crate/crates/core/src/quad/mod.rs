//! Adaptive Gauss–Kronrod quadrature and the defining-integral oracles.
//!
//! The integrator is a globally adaptive G10/K21 scheme: the interval with
//! the largest error estimate is bisected until the summed estimate meets
//! the tolerance. Semi-infinite ranges are mapped onto `[0, 1)` with
//! `x = lo + s·t/(1 − t)`.

mod oracle;

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::specfun::Evaluated;

pub use oracle::{
    cdf_gamma_e_by_conditioning, pdf_gamma_e_by_conditioning, pnz_by_integral, sop_by_integral,
    sop_lower_by_integral,
};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_021_811_165,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// 10-point Gauss weights for the odd-indexed Kronrod nodes.
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Stopping rule and budget for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
    /// Length scale `s` of the map used for an infinite upper limit.
    pub scale: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 0.0,
            max_intervals: 2000,
            scale: 1.0,
        }
    }
}

impl QuadOptions {
    pub fn abs(tol: f64) -> Self {
        Self {
            abs_tol: tol,
            ..Self::default()
        }
    }

    pub fn rel(tol: f64) -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol: tol,
            ..Self::default()
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn gk21<F>(f: &mut F, a: f64, b: f64) -> Result<Segment>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |f: &mut F, x: f64| -> Result<f64> {
        let v = f(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation(format!("integrand is {v} at x={x}")))
        }
    };
    let fc = eval(f, center)?;
    let mut res_g = 0.0;
    let mut res_k = WGK[10] * fc;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = eval(f, center - dx)?;
        let f2 = eval(f, center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let h = half.abs();
    let value = res_k * half;
    res_abs *= h;
    res_asc *= h;
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Segment { a, b, value, err })
}

/// Integrates `f` over `[lo, hi]`; `hi` may be `+∞`.
///
/// Succeeds once the summed error estimate is at most
/// `max(abs_tol, rel_tol·|value|)`; otherwise returns
/// [`Error::ToleranceNotMet`] carrying the best value and its estimate.
pub fn integrate<F>(mut f: F, lo: f64, hi: f64, opts: &QuadOptions) -> Result<Evaluated>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(opts.abs_tol >= 0.0 && opts.rel_tol >= 0.0) || opts.abs_tol + opts.rel_tol == 0.0 {
        return Err(Error::InvalidParams(
            "quadrature needs a positive tolerance".into(),
        ));
    }
    if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || lo == f64::NEG_INFINITY {
        return Err(Error::InvalidParams(format!(
            "bad integration range [{lo}, {hi}]"
        )));
    }
    if hi == f64::INFINITY {
        let s = opts.scale;
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidParams(format!("bad transform scale {s}")));
        }
        let mapped = move |t: f64| -> Result<f64> {
            let one_minus = 1.0 - t;
            let x = lo + s * t / one_minus;
            if x == f64::INFINITY {
                return Ok(0.0);
            }
            let v = f(x)?;
            if v == 0.0 {
                return Ok(0.0);
            }
            Ok(v * s / (one_minus * one_minus))
        };
        return integrate_finite(mapped, 0.0, 1.0, opts);
    }
    if hi < lo {
        let r = integrate_finite(f, hi, lo, opts)?;
        return Ok(Evaluated::new(-r.value, r.abs_err));
    }
    integrate_finite(f, lo, hi, opts)
}

fn integrate_finite<F>(mut f: F, lo: f64, hi: f64, opts: &QuadOptions) -> Result<Evaluated>
where
    F: FnMut(f64) -> Result<f64>,
{
    if lo == hi {
        return Ok(Evaluated::new(0.0, 0.0));
    }
    let first = gk21(&mut f, lo, hi)?;
    let mut total = first.value;
    let mut total_err = first.err;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let max = opts.max_intervals.max(1);
    while total_err > opts.target(total) {
        if heap.len() >= max {
            break;
        }
        let worst = heap.pop().expect("heap never empties");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            heap.push(worst);
            break;
        }
        let left = gk21(&mut f, worst.a, mid)?;
        let right = gk21(&mut f, mid, worst.b)?;
        total += left.value + right.value - worst.value;
        total_err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
    }
    // re-sum to shed drift from the running updates
    let mut sum = crate::specfun::CompensatedSum::default();
    let mut err = 0.0;
    for seg in heap.iter() {
        sum.add(seg.value);
        err += seg.err;
    }
    let value = sum.value();
    if err > opts.target(value) {
        return Err(Error::ToleranceNotMet {
            value,
            err,
            tol: opts.target(value),
        });
    }
    Ok(Evaluated::new(value, err))
}

/// `∫₀^∞ f` split at the ascending `knots`: finite pieces up to the last
/// knot, then a mapped tail with `opts.scale`. The tolerance is shared
/// evenly between pieces. Use it when `f` has features far from the tail
/// scale that a single panel would step over.
pub fn integrate_half_line<F>(mut f: F, knots: &[f64], opts: &QuadOptions) -> Result<Evaluated>
where
    F: FnMut(f64) -> Result<f64>,
{
    let pieces = knots.len() + 1;
    let piece_opts = QuadOptions {
        abs_tol: opts.abs_tol / pieces as f64,
        ..*opts
    };
    let mut sum = crate::specfun::CompensatedSum::default();
    let mut err = 0.0;
    let mut lo = 0.0;
    for &k in knots {
        if !(k > lo) || !k.is_finite() {
            return Err(Error::InvalidParams(format!(
                "knots must ascend from 0, got {k}"
            )));
        }
        let r = integrate(&mut f, lo, k, &piece_opts)?;
        sum.add(r.value);
        err += r.abs_err;
        lo = k;
    }
    let r = integrate(&mut f, lo, f64::INFINITY, &piece_opts)?;
    sum.add(r.value);
    err += r.abs_err;
    Ok(Evaluated::new(sum.value(), err))
}

/// Geometric knots (ratio 8) covering `[min(a, b), max(a, b)]`.
pub fn bridging_knots(a: f64, b: f64) -> Vec<f64> {
    let (lo, hi) = (a.min(b).max(1e-290), a.max(b).min(1e290));
    let mut k = vec![lo];
    let mut x = lo;
    while x * 8.0 < hi && k.len() < 200 {
        x *= 8.0;
        k.push(x);
    }
    if hi > lo {
        k.push(hi);
    }
    k
}

/// `(value, err)` of `∫_lo^hi f` with absolute tolerance `tol`.
pub fn integrate_adaptive<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let r = integrate(f, lo, hi, &QuadOptions::abs(tol))?;
    Ok((r.value, r.abs_err))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_weights_sum_to_two() {
        let k: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((k - 2.0).abs() < 1e-15 && (g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn exponential_on_half_line() {
        let (v, e) = integrate_adaptive(|x| Ok((-x).exp()), 0.0, f64::INFINITY, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-12 && e <= 1e-12);
        let (v, _) = integrate_adaptive(|x| Ok(x * (-x).exp()), 0.0, f64::INFINITY, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn polynomial_is_exact() {
        let (v, _) = integrate_adaptive(|x| Ok(x.powi(9) - 3.0 * x), -1.0, 2.0, 1e-10).unwrap();
        let expect = (2f64.powi(10) - 1.0) / 10.0 - 1.5 * (4.0 - 1.0);
        assert!((v - expect).abs() < 1e-12);
    }

    #[test]
    fn log_endpoint_singularity() {
        // ∫₀¹ ln x dx = −1
        let (v, _) = integrate_adaptive(|x| Ok(x.ln()), 0.0, 1.0, 1e-11).unwrap();
        assert!((v + 1.0).abs() < 1e-11);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let (v, _) = integrate_adaptive(Ok, 1.0, 0.0, 1e-12).unwrap();
        assert!((v + 0.5).abs() < 1e-15);
    }

    #[test]
    fn budget_exhaustion_reports_best_value() {
        let opts = QuadOptions {
            max_intervals: 3,
            ..QuadOptions::abs(1e-15)
        };
        let r = integrate(|x: f64| Ok((50.0 * x).sin().abs()), 0.0, 10.0, &opts);
        match r {
            Err(Error::ToleranceNotMet { value, err, .. }) => {
                assert!(value.is_finite() && err > 1e-15)
            }
            other => panic!("expected ToleranceNotMet, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        assert!(integrate_adaptive(|_| Ok(f64::NAN), 0.0, 1.0, 1e-8).is_err());
    }
}
