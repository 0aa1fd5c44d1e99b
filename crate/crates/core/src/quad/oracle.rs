//! Metrics and Eve's law straight from their defining integrals.
//!
//! Nothing here touches the Meijer G evaluator. Eve's position enters
//! through the area fraction `v ∈ [0, 1]` (so `f_Y(y) dy = dv`), and every
//! link SNR is written as `γ = γ̄ X / Y` with `X` the cascade power whose
//! law is a Bessel-K product density or an exponential.

use super::{bridging_knots, integrate, integrate_half_line, QuadOptions};
use crate::channel::{clamp_probability, CascadeLaw, PhaseDesign, SecrecyThreshold, SystemParams};
use crate::error::{Result, ResultExt};
use crate::metrics::{Method, MetricResult};
use crate::specfun::Evaluated;

/// Relative accuracy of the single-point density and cdf oracles.
const POINT_REL_TOL: f64 = 1e-11;

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(crate::Error::InvalidParams(format!(
            "quadrature tolerance must be positive, got {tol}"
        )))
    }
}

/// `f_E(γ) = (1/γ̄_E) ∫ y f_X(γy/γ̄_E) f_Y(y) dy`, conditioning on Eve's
/// distance.
pub fn pdf_gamma_e_by_conditioning(
    design: PhaseDesign,
    params: &SystemParams,
    gamma: f64,
) -> Result<Evaluated> {
    if gamma < 0.0 {
        return Ok(Evaluated::new(0.0, 0.0));
    }
    let law = design.cascade_law(params.l());
    let ge = params.gamma_bar_e();
    if gamma == 0.0 {
        let v = params.distance_power_moment(1.0) * law.pdf(0.0)? / ge;
        return Ok(Evaluated::new(v, 0.0));
    }
    let opts = QuadOptions {
        abs_tol: f64::MIN_POSITIVE,
        ..QuadOptions::rel(POINT_REL_TOL)
    };
    let r = integrate(
        |v| {
            let y = params.distance_power_at_area_fraction(v);
            Ok(y * law.pdf(gamma * y / ge)?)
        },
        0.0,
        1.0,
        &opts,
    )
    .context(|| format!("Eve density by conditioning at γ={gamma:e}"))?;
    Ok(Evaluated::new(r.value / ge, r.abs_err / ge))
}

/// `F_E(γ) = ∫ F_X(γy/γ̄_E) f_Y(y) dy`.
pub fn cdf_gamma_e_by_conditioning(
    design: PhaseDesign,
    params: &SystemParams,
    gamma: f64,
) -> Result<Evaluated> {
    if gamma <= 0.0 {
        return Ok(Evaluated::new(0.0, 0.0));
    }
    let law = design.cascade_law(params.l());
    let ge = params.gamma_bar_e();
    let opts = QuadOptions {
        abs_tol: 1e-15,
        ..QuadOptions::rel(POINT_REL_TOL)
    };
    integrate(
        |v| law.cdf(gamma * params.distance_power_at_area_fraction(v) / ge),
        0.0,
        1.0,
        &opts,
    )
    .context(|| format!("Eve cdf by conditioning at γ={gamma:e}"))
}

/// `E_v[ ∫₀^∞ g(x, y(v)) f_X(x) dx ]` with the inner integral at `tol/4`
/// and the outer at `tol/2`. `feature(y)` is where `g` switches on or off;
/// the inner range gets knots bridging it to the scale of `X`.
fn average_over_eve<S, G>(
    law: CascadeLaw,
    params: &SystemParams,
    tol: f64,
    feature: S,
    g: G,
) -> Result<Evaluated>
where
    S: Fn(f64) -> f64,
    G: Fn(f64, f64) -> Result<f64>,
{
    let mean = law.mean();
    let inner_opts = QuadOptions::abs(0.25 * tol).with_scale(mean);
    let outer_opts = QuadOptions::abs(0.5 * tol);
    let mut inner_err: f64 = 0.0;
    let outer = integrate(
        |v| {
            let y = params.distance_power_at_area_fraction(v);
            let knots = bridging_knots(feature(y), mean);
            let r = integrate_half_line(|x| Ok(g(x, y)? * law.pdf(x)?), &knots, &inner_opts)?;
            inner_err = inner_err.max(r.abs_err);
            Ok(r.value)
        },
        0.0,
        1.0,
        &outer_opts,
    )?;
    Ok(Evaluated::new(outer.value, outer.abs_err + inner_err))
}

fn sop_parts(
    design: PhaseDesign,
    params: &SystemParams,
    r_s: f64,
    w: f64,
    tol: f64,
) -> Result<MetricResult> {
    check_tol(tol)?;
    let law = design.cascade_law(params.l());
    let (gb, ge) = (params.gamma_bar_b(), params.gamma_bar_e());
    // Pr(γ_B < R_s γ_E + W) averaged over Eve's cascade and position
    let mean = law.mean();
    let r = average_over_eve(
        law,
        params,
        tol,
        |y| gb * mean * y / (r_s * ge),
        |x, y| law.cdf((r_s * ge * x / y + w) / gb),
    )?;
    let value = clamp_probability(r.value, r.abs_err)?;
    Ok(MetricResult::new(value, Method::Quadrature, r.abs_err))
}

/// SOP from `∫ F_B(R_s γ + W) f_E(γ) dγ`, with `f_E` taken by conditioning
/// on Eve's distance.
pub fn sop_by_integral(
    design: PhaseDesign,
    params: &SystemParams,
    thr: &SecrecyThreshold,
    tol: f64,
) -> Result<MetricResult> {
    sop_parts(design, params, thr.r_s(), thr.w(), tol).context(|| "SOP by quadrature".into())
}

/// The SOP lower bound: the same integral with `W` dropped.
pub fn sop_lower_by_integral(
    design: PhaseDesign,
    params: &SystemParams,
    thr: &SecrecyThreshold,
    tol: f64,
) -> Result<MetricResult> {
    sop_parts(design, params, thr.r_s(), 0.0, tol)
        .context(|| "SOP lower bound by quadrature".into())
}

/// PNZ from `∫ f_B(γ) F_E(γ) dγ`: Bob's cascade is integrated against the
/// probability that Eve's cascade stays below it.
pub fn pnz_by_integral(
    design: PhaseDesign,
    params: &SystemParams,
    tol: f64,
) -> Result<MetricResult> {
    check_tol(tol)?;
    let law = design.cascade_law(params.l());
    let ratio = params.gamma_bar_b() / params.gamma_bar_e();
    let mean = law.mean();
    let r = average_over_eve(
        law,
        params,
        tol,
        |y| mean / (ratio * y),
        |u, y| law.cdf(ratio * u * y),
    )
    .context(|| "PNZ by quadrature".into())?;
    let value = clamp_probability(r.value, r.abs_err)?;
    Ok(MetricResult::new(value, Method::Quadrature, r.abs_err))
}
