//! Closed-form secrecy metrics: SOP, its lower bound, and the probability
//! of non-zero secrecy capacity (PNZ), for both phase designs.
//!
//! Every closed form is a difference of two Meijer G values evaluated at
//! the annulus radii. The G instances carry `Γ(L)²`-sized factors, so they
//! are evaluated pre-divided by `Γ(L)²` to stay in range for large `L`.

use std::fmt;

use crate::channel::{clamp_probability, PhaseDesign, SecrecyThreshold, SystemParams};
use crate::error::{Error, Result, ResultExt};
use crate::quad;
use crate::specfun::{
    ln_gamma_real, meijer_g_scaled, CompensatedSum, Evaluated, MeijerGSpec, PrecisionPolicy,
};

/// How a metric value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ClosedForm => "closed-form",
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which secrecy metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricKind {
    Sop,
    SopLower,
    Pnz,
}

impl MetricKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MetricKind::Sop => "sop",
            MetricKind::SopLower => "sop_lower",
            MetricKind::Pnz => "pnz",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MetricKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sop" => Ok(MetricKind::Sop),
            "sop_lower" | "sop-lower" => Ok(MetricKind::SopLower),
            "pnz" => Ok(MetricKind::Pnz),
            other => Err(Error::InvalidParams(format!("unknown metric '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricResult {
    pub value: f64,
    pub method: Method,
    pub error_estimate: f64,
    pub series_terms_used: Option<usize>,
}

impl MetricResult {
    pub fn new(value: f64, method: Method, error_estimate: f64) -> Self {
        Self {
            value,
            method,
            error_estimate,
            series_terms_used: None,
        }
    }
}

/// Truncation rule for the `k`-sums of the SOP closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPolicy {
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl Default for SeriesPolicy {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_terms: 200,
        }
    }
}

impl SeriesPolicy {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(rel_tol > 0.0) || !rel_tol.is_finite() || max_terms == 0 {
            return Err(Error::InvalidParams(format!(
                "series policy needs tol > 0 and max_terms >= 1, got ({rel_tol}, {max_terms})"
            )));
        }
        Ok(Self { rel_tol, max_terms })
    }
}

/// Consecutive negligible terms required before a series is cut.
const QUIET_TERMS: usize = 3;

/// `max(0, log₂(1 + γ_B) − log₂(1 + γ_E))`
pub fn secrecy_capacity(gamma_b: f64, gamma_e: f64) -> f64 {
    ((gamma_b.ln_1p() - gamma_e.ln_1p()) / std::f64::consts::LN_2).max(0.0)
}

fn policy() -> PrecisionPolicy {
    PrecisionPolicy::default().with_rel_tol(1e-12)
}

/// `w2·G(z2) − w1·G(z1)` with propagated error.
fn radial_difference(
    spec: &MeijerGSpec,
    (w1, z1): (f64, f64),
    (w2, z2): (f64, f64),
    ln_scale: f64,
) -> Result<Evaluated> {
    let p = policy();
    let g2 = meijer_g_scaled(spec, z2, ln_scale, &p).context(|| format!("G at z={z2:e}"))?;
    let g1 = meijer_g_scaled(spec, z1, ln_scale, &p).context(|| format!("G at z={z1:e}"))?;
    let value = w2 * g2.value - w1 * g1.value;
    let err = w2 * g2.abs_err
        + w1 * g1.abs_err
        + 4.0 * f64::EPSILON * (w2 * g2.value.abs() + w1 * g1.value.abs());
    Ok(Evaluated::new(value, err))
}

/// `1 − pref·d` clamped to `[0, 1]` within its error.
fn one_minus(pref: f64, d: Evaluated) -> Result<(f64, f64)> {
    let value = 1.0 - pref * d.value;
    let err = pref.abs() * d.abs_err + 2.0 * f64::EPSILON;
    Ok((clamp_probability(value, err)?, err))
}

fn closed(value: f64, err: f64, terms: Option<usize>) -> MetricResult {
    MetricResult {
        value,
        method: Method::ClosedForm,
        error_estimate: err,
        series_terms_used: terms,
    }
}

/// Sums `Σ_k c_k T_k` with `c_k = (−x)^k/k!` until `QUIET_TERMS`
/// consecutive terms fall below `rel_tol` of the partial sum. `term(k, ln|c_k|)`
/// returns `|c_k|·T_k` with its error; `None` stops the series as undefined
/// from that index on.
fn alternating_series<F>(x: f64, policy: &SeriesPolicy, mut term: F) -> Result<(Evaluated, usize)>
where
    F: FnMut(usize, f64) -> Result<Option<Evaluated>>,
{
    let mut sum = CompensatedSum::default();
    let mut err = 0.0;
    let mut largest: f64 = 0.0;
    let mut quiet = 0;
    let ln_x = x.ln();
    for k in 0..policy.max_terms {
        let ln_c = if k == 0 {
            0.0
        } else {
            k as f64 * ln_x - ln_gamma_real(k as f64 + 1.0)?
        };
        let t = match term(k, ln_c)? {
            Some(t) => t,
            None => {
                return Err(Error::SeriesNonConvergence {
                    terms: k,
                    reason: format!(
                        "term {k} is undefined (colliding gamma poles) before the sum settled"
                    ),
                })
            }
        };
        let signed = if k % 2 == 1 { -t.value } else { t.value };
        sum.add(signed);
        err += t.abs_err;
        largest = largest.max(signed.abs());
        if x == 0.0 {
            return Ok((Evaluated::new(sum.value(), err), 1));
        }
        let partial = sum.value();
        if signed.abs() <= policy.rel_tol * partial.abs() {
            quiet += 1;
            if quiet >= QUIET_TERMS {
                // cancellation among large early terms costs their ulps
                err += 4.0 * f64::EPSILON * largest;
                return Ok((Evaluated::new(partial, err), k + 1));
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::SeriesNonConvergence {
        terms: policy.max_terms,
        reason: format!("partial sums still moving at x={x:e}"),
    })
}

/// Exact SOP from the closed-form `k`-series. Fails with
/// [`Error::SeriesNonConvergence`] when the series does not settle; see
/// [`sop_exact_or_quadrature`] for the fallback.
pub fn sop_exact(
    design: PhaseDesign,
    params: &SystemParams,
    thr: &SecrecyThreshold,
    policy: &SeriesPolicy,
) -> Result<MetricResult> {
    match design {
        PhaseDesign::CoherentImperfect => sop_exact_coherent(params, thr, policy),
        PhaseDesign::DiscreteRandom { .. } => sop_exact_discrete(params, thr, policy),
    }
    .context(|| format!("closed-form SOP ({})", design.name()))
}

fn sop_exact_coherent(
    params: &SystemParams,
    thr: &SecrecyThreshold,
    policy: &SeriesPolicy,
) -> Result<MetricResult> {
    let l = params.l() as f64;
    let alpha = params.alpha();
    let delta = params.delta();
    let (gb, ge) = (params.gamma_bar_b(), params.gamma_bar_e());
    let (r_s, w) = (thr.r_s(), thr.w());
    let ln_gl2 = 2.0 * ln_gamma_real(l)?;
    let pref = 2.0 * gb / (r_s * delta * ge * params.annulus_area());
    let z = |r: f64| r.powf(delta) * gb / (ge * r_s);
    let (w1, w2) = (params.r1().powf(2.0 + delta), params.r2().powf(2.0 + delta));
    let (z1, z2) = (z(params.r1()), z(params.r2()));

    let x = w / (4.0 * gb);
    let (sum, terms) = alternating_series(x, policy, |k, ln_c| {
        let spec = match MeijerGSpec::new(
            2,
            3,
            vec![0.0, -alpha, k as f64 - l],
            vec![l - 1.0, 0.0, -1.0 - alpha],
        ) {
            Ok(s) => s,
            Err(Error::MeijerConstruction(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        radial_difference(&spec, (w1, z1), (w2, z2), ln_c - ln_gl2).map(Some)
    })?;
    let (value, err) = one_minus(pref, sum)?;
    Ok(closed(value, err, Some(terms)))
}

/// `G^{1,2}_{2,2}[z | a, 1; a, 0]` difference shared by the discrete forms.
fn discrete_bracket(params: &SystemParams, a: f64, kappa: f64) -> Result<Evaluated> {
    let spec = MeijerGSpec::new(1, 2, vec![a, 1.0], vec![a, 0.0])?;
    let delta = params.delta();
    let z1 = params.r1().powf(delta) / kappa;
    let z2 = params.r2().powf(delta) / kappa;
    radial_difference(&spec, (1.0, z1), (1.0, z2), 0.0)
}

fn sop_exact_discrete(
    params: &SystemParams,
    thr: &SecrecyThreshold,
    policy: &SeriesPolicy,
) -> Result<MetricResult> {
    let alpha = params.alpha();
    let kappa = thr.r_s() * params.gamma_bar_e() / params.gamma_bar_b();
    let pref = 2.0 / (params.delta() * params.annulus_area()) * kappa.powf(alpha);
    let bracket = discrete_bracket(params, 1.0 + alpha, kappa)?;
    let x = thr.w() / (params.l() as f64 * params.gamma_bar_b());
    let (sum, terms) = alternating_series(x, policy, |_, ln_c| {
        let c = ln_c.exp();
        Ok(Some(Evaluated::new(c * bracket.value, c * bracket.abs_err)))
    })?;
    let (value, err) = one_minus(pref, sum)?;
    Ok(closed(value, err, Some(terms)))
}

/// SOP lower bound (`W` dropped from the outage event).
///
/// For the coherent design this is `1 − PNZ` evaluated at `γ̄_B/R_s`; the
/// printed closed form differs from it by a stray `1/γ̄_E` factor, which
/// [`sop_lower_as_printed`] keeps for comparison.
pub fn sop_lower(
    design: PhaseDesign,
    params: &SystemParams,
    thr: &SecrecyThreshold,
) -> Result<MetricResult> {
    match design {
        PhaseDesign::CoherentImperfect => {
            let (pref, d) = coherent_lower_parts(params, thr.r_s())?;
            let (value, err) = one_minus(pref, d)?;
            Ok(closed(value, err, None))
        }
        PhaseDesign::DiscreteRandom { .. } => {
            let alpha = params.alpha();
            let kappa = thr.r_s() * params.gamma_bar_e() / params.gamma_bar_b();
            let pref = 2.0 / (params.delta() * params.annulus_area()) * kappa.powf(alpha);
            let d = discrete_bracket(params, 1.0 + alpha, kappa)?;
            let (value, err) = one_minus(pref, d)?;
            Ok(closed(value, err, None))
        }
    }
    .context(|| format!("closed-form SOP lower bound ({})", design.name()))
}

/// `(2/(δ(R₂²−R₁²))`, `R₂²G(z₂) − R₁²G(z₁)` pre-divided by `Γ(L)²`) with
/// `z = R^δ γ̄_B/(R_s γ̄_E)`.
fn coherent_lower_parts(params: &SystemParams, r_s: f64) -> Result<(f64, Evaluated)> {
    let l = params.l() as f64;
    let alpha = params.alpha();
    let delta = params.delta();
    let spec = MeijerGSpec::new(2, 3, vec![1.0, 1.0 - alpha, 1.0 - l], vec![l, 1.0, -alpha])?;
    let ratio = params.gamma_bar_b() / (r_s * params.gamma_bar_e());
    let z = |r: f64| r.powf(delta) * ratio;
    let (r1, r2) = (params.r1(), params.r2());
    let d = radial_difference(
        &spec,
        (r1 * r1, z(r1)),
        (r2 * r2, z(r2)),
        -2.0 * ln_gamma_real(l)?,
    )?;
    Ok((2.0 / (delta * params.annulus_area()), d))
}

/// The coherent SOP lower bound exactly as printed, including the extra
/// `1/γ̄_E` in the prefactor. Unclamped: it can leave `[0, 1]`. Only the
/// discrepancy report uses it.
pub fn sop_lower_as_printed(params: &SystemParams, thr: &SecrecyThreshold) -> Result<Evaluated> {
    let (pref, d) = coherent_lower_parts(params, thr.r_s())?;
    let pref = pref / params.gamma_bar_e();
    Ok(Evaluated::new(
        1.0 - pref * d.value,
        pref * d.abs_err + 2.0 * f64::EPSILON,
    ))
}

/// Probability of non-zero secrecy capacity, `Pr(γ_B > γ_E)`.
pub fn pnz(design: PhaseDesign, params: &SystemParams) -> Result<MetricResult> {
    match design {
        PhaseDesign::CoherentImperfect => {
            let (pref, d) = coherent_lower_parts(params, 1.0)?;
            let value = pref * d.value;
            let err = pref * d.abs_err + 2.0 * f64::EPSILON;
            Ok(closed(clamp_probability(value, err)?, err, None))
        }
        PhaseDesign::DiscreteRandom { .. } => {
            let alpha = params.alpha();
            let kappa = params.gamma_bar_e() / params.gamma_bar_b();
            let pref = 2.0 / (params.delta() * params.annulus_area()) * kappa.powf(alpha);
            let d = discrete_bracket(params, alpha, kappa)?;
            let (value, err) = one_minus(pref, d)?;
            Ok(closed(value, err, None))
        }
    }
    .context(|| format!("closed-form PNZ ({})", design.name()))
}

/// Closed-form SOP, or the defining integral at `tol` when the series
/// does not settle. The method tag says which one answered.
pub fn sop_exact_or_quadrature(
    design: PhaseDesign,
    params: &SystemParams,
    thr: &SecrecyThreshold,
    policy: &SeriesPolicy,
    tol: f64,
) -> Result<MetricResult> {
    match sop_exact(design, params, thr, policy) {
        Ok(r) => Ok(r),
        Err(e) if matches!(e.root(), Error::SeriesNonConvergence { .. }) => {
            log::info!("{e}; falling back to quadrature");
            quad::sop_by_integral(design, params, thr, tol)
        }
        Err(e) => Err(e),
    }
}

/// One metric by closed form (with the SOP quadrature fallback).
pub fn closed_form(
    kind: MetricKind,
    design: PhaseDesign,
    params: &SystemParams,
    thr: &SecrecyThreshold,
    tol: f64,
) -> Result<MetricResult> {
    match kind {
        MetricKind::Sop => {
            sop_exact_or_quadrature(design, params, thr, &SeriesPolicy::default(), tol)
        }
        MetricKind::SopLower => sop_lower(design, params, thr),
        MetricKind::Pnz => pnz(design, params),
    }
}

/// One metric by its defining integral.
pub fn by_quadrature(
    kind: MetricKind,
    design: PhaseDesign,
    params: &SystemParams,
    thr: &SecrecyThreshold,
    tol: f64,
) -> Result<MetricResult> {
    match kind {
        MetricKind::Sop => quad::sop_by_integral(design, params, thr, tol),
        MetricKind::SopLower => quad::sop_lower_by_integral(design, params, thr, tol),
        MetricKind::Pnz => quad::pnz_by_integral(design, params, tol),
    }
}
