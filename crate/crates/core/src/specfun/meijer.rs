//! Meijer G-function for real parameters and positive real argument,
//! evaluated from its Mellin–Barnes integral
//!
//! ```text
//! G(z) = 1/(2πi) ∫ Π_{j≤m} Γ(b_j − s) Π_{k≤n} Γ(1 − a_k + s)
//!                  / (Π_{j>m} Γ(1 − b_j + s) Π_{k>n} Γ(a_k − s)) · z^s ds
//! ```
//!
//! along the vertical line Re s = c that leaves every pole of Γ(b_j − s)
//! on the right and every pole of Γ(1 − a_k + s) on the left. On that line
//! the integrand is conjugate-symmetric, so
//! G(z) = (1/π) ∫₀^∞ Re f(c + it) dt, and the trapezoid rule converges
//! geometrically with a rate set by the distance from c to the nearest
//! pole. The step is halved until two successive sums agree; the
//! difference is reported as the error. Nothing here relies on residue
//! sums, so bottom parameters that differ by integers (logarithmic cases)
//! need no special treatment.

use num_complex::Complex64;

use super::{gamma::ln_gamma, Evaluated, PrecisionPolicy};
use crate::error::{Error, Result};

const INTEGER_TOL: f64 = 1e-12;
/// Smallest allowed distance between the contour and a pole, as a cap on
/// the quarter-width of the strip.
const MIN_POLE_DISTANCE: f64 = 0.02;
const MAX_FIRST_STEP: f64 = 0.5;
const TAIL_RUN: usize = 4;
const MIN_CONTOUR_HEIGHT: f64 = 2.0;

/// Parameter block `G^{m,n}_{p,q}[· | a; b]` with `p = a.len()`, `q = b.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeijerGSpec {
    m: usize,
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl MeijerGSpec {
    /// Validates the index ranges and that the two pole families can be
    /// separated by a vertical line.
    pub fn new(m: usize, n: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let (p, q) = (a.len(), b.len());
        if m > q || n > p {
            return Err(Error::MeijerConstruction(format!(
                "need m <= q and n <= p, got m={m}, n={n}, p={p}, q={q}"
            )));
        }
        if p > q {
            return Err(Error::MeijerConstruction(format!(
                "only p <= q is supported, got p={p}, q={q}"
            )));
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::MeijerConstruction("non-finite parameter".into()));
        }
        for (k, &ak) in a[..n].iter().enumerate() {
            for (j, &bj) in b[..m].iter().enumerate() {
                let d = ak - bj;
                let r = d.round();
                if r >= 1.0 && (d - r).abs() <= INTEGER_TOL * r.max(1.0) {
                    return Err(Error::MeijerConstruction(format!(
                        "pole of Γ(b_{} - s) coincides with a pole of Γ(1 - a_{} + s) \
                         (a_{} - b_{} = {d})",
                        j + 1,
                        k + 1,
                        k + 1,
                        j + 1
                    )));
                }
            }
        }
        let spec = Self { m, n, a, b };
        let (lo, hi) = spec.strip();
        if !(lo < hi) {
            return Err(Error::MeijerConstruction(format!(
                "no vertical contour separates the pole families (left poles up to {lo}, \
                 right poles from {hi})"
            )));
        }
        Ok(spec)
    }

    pub fn m(&self) -> usize {
        self.m
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn p(&self) -> usize {
        self.a.len()
    }
    pub fn q(&self) -> usize {
        self.b.len()
    }
    pub fn a(&self) -> &[f64] {
        &self.a
    }
    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// Open interval of admissible contour abscissae.
    fn strip(&self) -> (f64, f64) {
        let lo = self.a[..self.n]
            .iter()
            .map(|a| a - 1.0)
            .fold(f64::NEG_INFINITY, f64::max);
        let hi = self.b[..self.m]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        (lo, hi)
    }

    /// Exponential decay rate of the integrand along the contour, in units of π|t|.
    fn decay_rate(&self) -> f64 {
        (self.m + self.n) as f64 - 0.5 * (self.p() + self.q()) as f64
    }

    /// log of the Gamma-ratio kernel at `s`; `None` where a denominator Γ
    /// has a pole and the kernel vanishes.
    fn ln_kernel(&self, s: Complex64) -> Result<Option<Complex64>> {
        let mut acc = Complex64::new(0.0, 0.0);
        for &bj in &self.b[..self.m] {
            acc += ln_gamma(Complex64::new(bj, 0.0) - s)?;
        }
        for &ak in &self.a[..self.n] {
            acc += ln_gamma(s + (1.0 - ak))?;
        }
        for &bj in &self.b[self.m..] {
            match ln_gamma(s + (1.0 - bj)) {
                Ok(v) => acc -= v,
                Err(Error::Domain(_)) => return Ok(None),
                Err(e) => return Err(e),
            }
        }
        for &ak in &self.a[self.n..] {
            match ln_gamma(Complex64::new(ak, 0.0) - s) {
                Ok(v) => acc -= v,
                Err(Error::Domain(_)) => return Ok(None),
                Err(e) => return Err(e),
            }
        }
        Ok(Some(acc))
    }
}

/// G^{m,n}_{p,q}[z | a; b] for z > 0.
pub fn meijer_g(spec: &MeijerGSpec, z: f64, policy: &PrecisionPolicy) -> Result<Evaluated> {
    meijer_g_scaled(spec, z, 0.0, policy)
}

/// exp(`ln_scale`) · G^{m,n}_{p,q}[z | a; b].
///
/// The scale is folded into the integrand before exponentiation, so
/// instances whose Gamma factors alone would overflow (large orders) can
/// be evaluated together with their normalising constants.
pub fn meijer_g_scaled(
    spec: &MeijerGSpec,
    z: f64,
    ln_scale: f64,
    policy: &PrecisionPolicy,
) -> Result<Evaluated> {
    policy.validate()?;
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("meijer_g requires z > 0, got {z}")));
    }
    let kappa = spec.decay_rate();
    if kappa <= 0.0 {
        return Err(Error::Evaluation(format!(
            "Mellin-Barnes integrand of G^{{{},{}}}_{{{},{}}} does not decay along a vertical \
             line (m + n - (p + q)/2 = {kappa})",
            spec.m,
            spec.n,
            spec.p(),
            spec.q()
        )));
    }
    let ln_z = z.ln();
    let c = choose_abscissa(spec, ln_z)?;
    let (lo, hi) = spec.strip();
    let pole_distance = (hi - c).min(c - lo);
    Contour {
        spec,
        c,
        ln_z,
        ln_scale,
        kappa,
    }
    .integrate(pole_distance, policy)
}

struct Contour<'a> {
    spec: &'a MeijerGSpec,
    c: f64,
    ln_z: f64,
    ln_scale: f64,
    kappa: f64,
}

struct Node {
    re: f64,
    modulus: f64,
    ln_modulus: f64,
}

impl Contour<'_> {
    fn node(&self, t: f64) -> Result<Node> {
        let s = Complex64::new(self.c, t);
        match self.spec.ln_kernel(s)? {
            None => Ok(Node {
                re: 0.0,
                modulus: 0.0,
                ln_modulus: f64::NEG_INFINITY,
            }),
            Some(lk) => {
                let w = lk + s * self.ln_z + self.ln_scale;
                if w.re > 709.0 {
                    return Err(Error::Overflow(format!(
                        "Mellin-Barnes integrand magnitude e^{:.1} at t={t}; \
                         pass a normalising ln_scale",
                        w.re
                    )));
                }
                let modulus = w.re.exp();
                Ok(Node {
                    re: modulus * w.im.cos(),
                    modulus,
                    ln_modulus: w.re,
                })
            }
        }
    }

    fn integrate(&self, pole_distance: f64, policy: &PrecisionPolicy) -> Result<Evaluated> {
        let tol = policy.rel_tol;
        let h0 = (pole_distance / 4.0).min(MAX_FIRST_STEP);
        let mut nodes = 0usize;
        let mut max_ln = 0f64;

        // march up the contour at the coarse step until the envelope is negligible
        let first = self.node(0.0)?;
        nodes += 1;
        max_ln = max_ln.max(first.ln_modulus.abs());
        let mut sum = 0.5 * first.re;
        let mut abs_sum = 0.5 * first.modulus;
        let mut last_modulus = first.modulus;
        let mut run = 0usize;
        let mut k = 0usize;
        let tail_factor = h0 + 1.0 / (self.kappa * std::f64::consts::PI);
        loop {
            k += 1;
            let t = k as f64 * h0;
            let nd = self.node(t)?;
            nodes += 1;
            if nd.ln_modulus.is_finite() {
                max_ln = max_ln.max(nd.ln_modulus.abs());
            }
            sum += nd.re;
            abs_sum += nd.modulus;
            let scale = sum.abs().max(f64::EPSILON * abs_sum);
            let negligible = nd.modulus * tail_factor <= 1e-3 * tol * scale * h0;
            if t >= MIN_CONTOUR_HEIGHT && negligible && nd.modulus <= last_modulus {
                run += 1;
            } else {
                run = 0;
            }
            last_modulus = nd.modulus;
            if run >= TAIL_RUN {
                break;
            }
            if nodes >= policy.max_nodes {
                return Err(Error::Evaluation(format!(
                    "Mellin-Barnes integrand still significant at t={t} after {nodes} nodes"
                )));
            }
        }
        let k_max = k;
        let height = k_max as f64 * h0;
        let tail = last_modulus * tail_factor;

        // halve the step until successive trapezoid sums agree
        let mut h = h0;
        let mut estimate = sum * h;
        let mut count = k_max; // intervals at the current step
        loop {
            let half = 0.5 * h;
            let mut odd = 0.0;
            for i in 0..count {
                let t = (2 * i + 1) as f64 * half;
                let nd = self.node(t)?;
                if nd.ln_modulus.is_finite() {
                    max_ln = max_ln.max(nd.ln_modulus.abs());
                }
                odd += nd.re;
                abs_sum += nd.modulus;
            }
            nodes += count;
            let refined = 0.5 * estimate + half * odd;
            let change = (refined - estimate).abs();
            h = half;
            count *= 2;
            estimate = refined;

            let abs_integral = abs_sum * h;
            let rounding = f64::EPSILON * abs_integral * (8.0 + max_ln);
            let err = change + tail + rounding;
            let value = estimate / std::f64::consts::PI;
            let abs_err = err / std::f64::consts::PI;
            if abs_err <= tol * value.abs() {
                return Ok(Evaluated::new(value, abs_err));
            }
            if nodes + count > policy.max_nodes {
                return Err(Error::Evaluation(format!(
                    "Mellin-Barnes quadrature did not reach relative tolerance {tol:e} \
                     (value {value:e}, error {abs_err:e}, {nodes} nodes, contour height \
                     {height:.1})"
                )));
            }
        }
    }
}

/// Picks the contour abscissa that keeps the integrand small relative to
/// the result, staying a safe distance from both pole families.
fn choose_abscissa(spec: &MeijerGSpec, ln_z: f64) -> Result<f64> {
    let (lo, hi) = spec.strip();
    let objective = |c: f64| -> f64 {
        let dist = (hi - c).min(c - lo).min(1.0);
        // the denominators oscillate along the real axis when their argument
        // is negative; sampling slightly off the axis smooths that out
        let t = if has_negative_denominator(spec, c) {
            1.0
        } else {
            0.0
        };
        match spec.ln_kernel(Complex64::new(c, t)) {
            Ok(Some(v)) => v.re + c * ln_z - dist.ln(),
            _ => f64::INFINITY,
        }
    };

    if lo.is_finite() && hi.is_finite() {
        let margin = (0.25 * (hi - lo)).min(MIN_POLE_DISTANCE);
        let (left, right) = (lo + margin, hi - margin);
        return Ok(grid_then_golden(&objective, left, right, 48));
    }
    if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
        // m = n = 0 is not used by any instance; pick a bracket around 0
        return Ok(grid_then_golden(&objective, -8.0, 8.0, 64));
    }

    // one side unbounded: walk away from the pole family until the objective rises
    let (start, dir) = if lo == f64::NEG_INFINITY {
        (hi - MIN_POLE_DISTANCE.max(0.25), -1.0)
    } else {
        (lo + MIN_POLE_DISTANCE.max(0.25), 1.0)
    };
    let mut step = 0.5;
    let mut best_c = start;
    let mut best = objective(start);
    let mut far = start;
    for _ in 0..64 {
        let cand = best_c + dir * step;
        if cand.abs() > 1e5 {
            break;
        }
        let v = objective(cand);
        far = cand;
        if v < best {
            best = v;
            best_c = cand;
            step *= 2.0;
        } else {
            break;
        }
    }
    let (a, b) = if dir < 0.0 {
        (far.min(best_c - step), (best_c + step).min(start))
    } else {
        ((best_c - step).max(start), far.max(best_c + step))
    };
    if !best.is_finite() {
        return Err(Error::Evaluation(
            "could not place a Mellin-Barnes contour: kernel not finite in the strip".into(),
        ));
    }
    Ok(grid_then_golden(&objective, a, b, 24))
}

fn has_negative_denominator(spec: &MeijerGSpec, c: f64) -> bool {
    spec.b[spec.m..].iter().any(|&bj| 1.0 - bj + c <= 0.0)
        || spec.a[spec.n..].iter().any(|&ak| ak - c <= 0.0)
}

fn grid_then_golden(f: &impl Fn(f64) -> f64, left: f64, right: f64, n: usize) -> f64 {
    let width = right - left;
    if !(width > 0.0) {
        return 0.5 * (left + right);
    }
    let step = width / n as f64;
    let mut best_i = 0;
    let mut best = f64::INFINITY;
    for i in 0..=n {
        let v = f(left + i as f64 * step);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let mut a = left + best_i.saturating_sub(1) as f64 * step;
    let mut b = (left + (best_i + 1) as f64 * step).min(right);
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..40 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
        if (b - a).abs() < 1e-6 * (1.0 + a.abs()) {
            break;
        }
    }
    let mid = 0.5 * (a + b);
    if f(mid) <= best {
        mid
    } else {
        left + best_i as f64 * step
    }
}
