//! SNR laws for the legitimate receiver (Bob) and the eavesdropper (Eve).
//!
//! Both links see `γ = γ̄ · X / Y`, where `X = |ε_L|²` is the power of the
//! RIS cascade (sum of `L` per-element products of Rayleigh gains) and `Y`
//! is a path-loss factor: fixed (folded into `γ̄_B`) for Bob, and
//! `d_RE^δ` with Eve placed area-uniformly in an annulus for Eve.
//!
//! Two per-element normalisations are in play. The imperfect-coherent laws
//! are written for per-quadrature unit-variance gains (E|h|² = 2 per hop,
//! so E[X] = 4L); the random-discrete laws use unit-variance complex gains
//! (E[X] = L). [`PhaseDesign::hop_gain_power`] exposes the choice and the
//! simulator follows it, so each closed form is checked against the model
//! it describes.
//!
//! Conventions for the secrecy threshold: `R_s = 2^{R_t}`, `W = 2^{R_t} − 1`.

use crate::error::{Error, Result, ResultExt};
use crate::specfun::{
    ln_bessel_k, ln_gamma_real, lower_incomplete_gamma, meijer_g_scaled, upper_incomplete_gamma,
    Evaluated, MeijerGSpec, PrecisionPolicy,
};

/// Physical layout shared by every link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    /// Path-loss exponent δ.
    pub delta: f64,
    /// Inner radius of Eve's annulus around the RIS.
    pub r1: f64,
    /// Outer radius of Eve's annulus.
    pub r2: f64,
    /// Alice–RIS distance.
    pub d_ar: f64,
    /// RIS–Bob distance.
    pub d_rb: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            delta: 3.7,
            r1: 0.1,
            r2: 1.0,
            d_ar: 1.0,
            d_rb: 0.8,
        }
    }
}

impl Geometry {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        positive("delta", self.delta)?;
        positive("r1", self.r1)?;
        positive("r2", self.r2)?;
        positive("d_ar", self.d_ar)?;
        positive("d_rb", self.d_rb)?;
        if !(self.r1 < self.r2) {
            return Err(Error::InvalidParams(format!(
                "annulus needs r1 < r2, got r1={}, r2={}",
                self.r1, self.r2
            )));
        }
        let area = self.r2 * self.r2 - self.r1 * self.r1;
        if area < 1e-6 * self.r2 * self.r2 {
            log::warn!(
                "near-degenerate annulus (r2² - r1² = {area:e}); Eve densities are ill-conditioned"
            );
        }
        Ok(())
    }
}

/// Full configuration at the level of the SNR laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    l: u32,
    geometry: Geometry,
    gamma_bar_b: f64,
    gamma_bar_e: f64,
}

impl SystemParams {
    /// `gamma_bar_b` and `gamma_bar_e` are linear average SNRs exactly as
    /// they enter the SNR laws (Bob's already includes the RIS–Bob loss).
    pub fn new(l: u32, geometry: Geometry, gamma_bar_b: f64, gamma_bar_e: f64) -> Result<Self> {
        if l == 0 {
            return Err(Error::InvalidParams(
                "RIS element count L must be >= 1".into(),
            ));
        }
        geometry.validate()?;
        for (name, v) in [("gamma_bar_b", gamma_bar_b), ("gamma_bar_e", gamma_bar_e)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(Self {
            l,
            geometry,
            gamma_bar_b,
            gamma_bar_e,
        })
    }

    /// Builds the link-level averages from transmit SNRs `P/N₀` (linear):
    /// `γ̄_B = P_B / (N₀ d_AR^δ d_RB^δ)` and `γ̄_E = P_E / (N₀ d_AR^δ)`;
    /// Eve's own distance stays random.
    pub fn from_transmit_snrs(l: u32, geometry: Geometry, snr_b: f64, snr_e: f64) -> Result<Self> {
        geometry.validate()?;
        let d = geometry.delta;
        let gb = snr_b / (geometry.d_ar.powf(d) * geometry.d_rb.powf(d));
        let ge = snr_e / geometry.d_ar.powf(d);
        Self::new(l, geometry, gb, ge)
    }

    pub fn l(&self) -> u32 {
        self.l
    }
    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }
    pub fn delta(&self) -> f64 {
        self.geometry.delta
    }
    pub fn r1(&self) -> f64 {
        self.geometry.r1
    }
    pub fn r2(&self) -> f64 {
        self.geometry.r2
    }
    pub fn gamma_bar_b(&self) -> f64 {
        self.gamma_bar_b
    }
    pub fn gamma_bar_e(&self) -> f64 {
        self.gamma_bar_e
    }

    pub fn with_l(self, l: u32) -> Result<Self> {
        Self::new(l, self.geometry, self.gamma_bar_b, self.gamma_bar_e)
    }

    pub fn with_gamma_bar_b(self, gamma_bar_b: f64) -> Result<Self> {
        Self::new(self.l, self.geometry, gamma_bar_b, self.gamma_bar_e)
    }

    pub fn with_gamma_bar_e(self, gamma_bar_e: f64) -> Result<Self> {
        Self::new(self.l, self.geometry, self.gamma_bar_b, gamma_bar_e)
    }

    /// Degenerate copy with arbitrary (possibly zero) SNRs for simulator
    /// edge cases. Analytical routines may reject the result.
    #[doc(hidden)]
    pub fn with_raw_snrs(mut self, gamma_bar_b: f64, gamma_bar_e: f64) -> Self {
        self.gamma_bar_b = gamma_bar_b;
        self.gamma_bar_e = gamma_bar_e;
        self
    }

    /// 2/δ
    pub fn alpha(&self) -> f64 {
        2.0 / self.geometry.delta
    }

    pub(crate) fn annulus_area(&self) -> f64 {
        let g = &self.geometry;
        g.r2 * g.r2 - g.r1 * g.r1
    }

    /// `Y = d_RE^δ` for the point whose squared radius sits at fraction
    /// `v ∈ [0, 1]` of the annulus area. `v ~ U(0,1)` gives Eve's law.
    pub fn distance_power_at_area_fraction(&self, v: f64) -> f64 {
        let g = &self.geometry;
        let r_sq = g.r1 * g.r1 + v * self.annulus_area();
        r_sq.powf(0.5 * g.delta)
    }

    /// E[Y^k] for Eve's distance power.
    pub fn distance_power_moment(&self, k: f64) -> f64 {
        let g = &self.geometry;
        // E[d^{δk}] with d² uniform on [r1², r2²]
        let e = 0.5 * g.delta * k + 1.0;
        let area = self.annulus_area();
        if e.abs() < 1e-12 {
            (g.r2 * g.r2 / (g.r1 * g.r1)).ln() / area
        } else {
            ((g.r2 * g.r2).powf(e) - (g.r1 * g.r1).powf(e)) / (e * area)
        }
    }
}

/// Phase-shifting design of the RIS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseDesign {
    /// Phases track the cascaded channel up to an error uniform on (−π, π).
    CoherentImperfect,
    /// Phases drawn uniformly from a 2^q-point grid, no channel knowledge.
    DiscreteRandom { q: u32 },
}

impl PhaseDesign {
    pub const MAX_RESOLUTION_BITS: u32 = 16;

    pub fn discrete(q: u32) -> Result<Self> {
        if q == 0 || q > Self::MAX_RESOLUTION_BITS {
            return Err(Error::InvalidParams(format!(
                "phase resolution q must be in 1..={}, got {q}",
                Self::MAX_RESOLUTION_BITS
            )));
        }
        Ok(PhaseDesign::DiscreteRandom { q })
    }

    pub fn name(&self) -> &'static str {
        match self {
            PhaseDesign::CoherentImperfect => "coherent",
            PhaseDesign::DiscreteRandom { .. } => "discrete",
        }
    }

    /// E|h|² per hop assumed by this design's SNR laws.
    pub fn hop_gain_power(&self) -> f64 {
        match self {
            PhaseDesign::CoherentImperfect => 2.0,
            PhaseDesign::DiscreteRandom { .. } => 1.0,
        }
    }

    pub fn cascade_law(&self, l: u32) -> CascadeLaw {
        match self {
            PhaseDesign::CoherentImperfect => CascadeLaw::ProductBessel { l },
            PhaseDesign::DiscreteRandom { .. } => CascadeLaw::Exponential { mean: l as f64 },
        }
    }
}

/// Secrecy target rate with the derived constants `R_s` and `W`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecrecyThreshold {
    r_t: f64,
}

impl SecrecyThreshold {
    pub fn new(r_t: f64) -> Result<Self> {
        if !(r_t >= 0.0) || !r_t.is_finite() {
            return Err(Error::InvalidParams(format!(
                "target secrecy rate must be finite and >= 0, got {r_t}"
            )));
        }
        Ok(Self { r_t })
    }

    pub fn r_t(&self) -> f64 {
        self.r_t
    }

    /// R_s = 2^{R_t}
    pub fn r_s(&self) -> f64 {
        self.r_t.exp2()
    }

    /// W = 2^{R_t} − 1
    pub fn w(&self) -> f64 {
        (self.r_t * std::f64::consts::LN_2).exp_m1()
    }
}

/// Law of the cascade power `X = |ε_L|²` under one design's normalisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CascadeLaw {
    /// `X = 4·A·B` with `A ~ Gamma(L, 1)`, `B ~ Exp(1)`: the exact law of
    /// the sum of `L` products of independent circular Gaussian gains with
    /// E|h|² = 2, independent of how the phases are chosen.
    ProductBessel { l: u32 },
    /// `X ~ Exp(mean)`: the large-L Gaussian limit of the cascade.
    Exponential { mean: f64 },
}

impl CascadeLaw {
    pub fn mean(&self) -> f64 {
        match *self {
            CascadeLaw::ProductBessel { l } => 4.0 * l as f64,
            CascadeLaw::Exponential { mean } => mean,
        }
    }

    /// Pr(X > x)
    pub fn ccdf(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(1.0);
        }
        match *self {
            CascadeLaw::ProductBessel { l } => {
                // 2^{1−L}/Γ(L) · u^L K_L(u), u = √x
                let u = x.sqrt();
                let lf = l as f64;
                let ln = (1.0 - lf) * std::f64::consts::LN_2 - ln_gamma_real(lf)?
                    + lf * u.ln()
                    + ln_bessel_k(l, u)?;
                Ok(ln.exp().min(1.0))
            }
            CascadeLaw::Exponential { mean } => Ok((-x / mean).exp()),
        }
    }

    /// Pr(X ≤ x)
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        match *self {
            CascadeLaw::Exponential { mean } => Ok(-(-x / mean).exp_m1()),
            CascadeLaw::ProductBessel { .. } => Ok(1.0 - self.ccdf(x)?),
        }
    }

    /// Density of X; `+∞` at the origin for the single-element Bessel law.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Ok(0.0);
        }
        match *self {
            CascadeLaw::ProductBessel { l } => {
                if x == 0.0 {
                    return Ok(if l == 1 {
                        f64::INFINITY
                    } else {
                        1.0 / (4.0 * (l as f64 - 1.0))
                    });
                }
                // u^{L−1} K_{L−1}(u) / (2^L Γ(L))
                let u = x.sqrt();
                let lf = l as f64;
                let ln = -lf * std::f64::consts::LN_2 - ln_gamma_real(lf)?
                    + (lf - 1.0) * u.ln()
                    + ln_bessel_k(l - 1, u)?;
                Ok(ln.exp())
            }
            CascadeLaw::Exponential { mean } => Ok((-x / mean).exp() / mean),
        }
    }
}

/// Density of Eve's distance power `Y = d_RE^δ`.
pub fn eve_distance_power_pdf(y: f64, params: &SystemParams) -> f64 {
    let g = params.geometry();
    let (lo, hi) = (g.r1.powf(g.delta), g.r2.powf(g.delta));
    if !(y >= lo && y <= hi) {
        return 0.0;
    }
    2.0 * y.powf(params.alpha() - 1.0) / (g.delta * params.annulus_area())
}

/// Folds a probability that drifted outside `[0, 1]` back in when the
/// excursion is within `err`; larger excursions are errors.
pub(crate) fn clamp_probability(value: f64, err: f64) -> Result<f64> {
    let slack = err + 4.0 * f64::EPSILON;
    if !value.is_finite() {
        return Err(Error::OutOfRange { value, err });
    }
    if value < 0.0 {
        if value >= -slack {
            return Ok(0.0);
        }
        return Err(Error::OutOfRange { value, err });
    }
    if value > 1.0 {
        if value <= 1.0 + slack {
            return Ok(1.0);
        }
        return Err(Error::OutOfRange { value, err });
    }
    Ok(value)
}

fn clamp_density(value: f64, err: f64) -> Result<f64> {
    if value < 0.0 {
        if value >= -(err + f64::MIN_POSITIVE) {
            return Ok(0.0);
        }
        return Err(Error::OutOfRange { value, err });
    }
    Ok(value)
}

/// SNR law of one link under one design: an evaluable (pdf, cdf) pair on
/// `[0, ∞)`.
#[derive(Debug, Clone)]
pub struct Distribution {
    law: Law,
}

#[derive(Debug, Clone)]
enum Law {
    /// `γ = γ̄ X`
    Scaled {
        cascade: CascadeLaw,
        gamma_bar: f64,
    },
    CoherentEve(CoherentEve),
    DiscreteEve(DiscreteEve),
}

/// Bob's SNR law: the Bessel form for the coherent design, the
/// exponential (large-L) law for the discrete design.
pub fn dist_gamma_b(design: PhaseDesign, params: &SystemParams) -> Distribution {
    Distribution {
        law: Law::Scaled {
            cascade: design.cascade_law(params.l()),
            gamma_bar: params.gamma_bar_b(),
        },
    }
}

/// Eve's SNR law averaged over her position in the annulus: Meijer-G
/// differences for the coherent design, incomplete-gamma differences for
/// the discrete design.
pub fn dist_gamma_e(design: PhaseDesign, params: &SystemParams) -> Result<Distribution> {
    let law = match design {
        PhaseDesign::CoherentImperfect => Law::CoherentEve(CoherentEve::new(params)?),
        PhaseDesign::DiscreteRandom { .. } => Law::DiscreteEve(DiscreteEve::new(params)?),
    };
    Ok(Distribution { law })
}

impl Distribution {
    /// Lower end of the support.
    pub fn support_lower(&self) -> f64 {
        0.0
    }

    /// Mean SNR, useful as a length scale for integration over the support.
    pub fn mean(&self) -> f64 {
        match &self.law {
            Law::Scaled { cascade, gamma_bar } => gamma_bar * cascade.mean(),
            Law::CoherentEve(e) => e.gamma_bar_e * 4.0 * e.l as f64 * e.inv_y_mean,
            Law::DiscreteEve(e) => e.gamma_bar_e * e.l as f64 * e.inv_y_mean,
        }
    }

    pub fn pdf(&self, gamma: f64) -> Result<Evaluated> {
        if gamma < 0.0 {
            return Ok(Evaluated::new(0.0, 0.0));
        }
        match &self.law {
            Law::Scaled { cascade, gamma_bar } => {
                let v = cascade.pdf(gamma / gamma_bar)? / gamma_bar;
                Ok(Evaluated::new(v, 64.0 * f64::EPSILON * v))
            }
            Law::CoherentEve(e) => e.pdf(gamma),
            Law::DiscreteEve(e) => e.pdf(gamma),
        }
    }

    pub fn cdf(&self, gamma: f64) -> Result<Evaluated> {
        if gamma <= 0.0 {
            return Ok(Evaluated::new(0.0, 0.0));
        }
        match &self.law {
            Law::Scaled { cascade, gamma_bar } => {
                let v = cascade.cdf(gamma / gamma_bar)?;
                Ok(Evaluated::new(v, 64.0 * f64::EPSILON))
            }
            Law::CoherentEve(e) => e.cdf(gamma),
            Law::DiscreteEve(e) => e.cdf(gamma),
        }
    }
}

#[derive(Debug, Clone)]
struct CoherentEve {
    l: u32,
    delta: f64,
    r1: f64,
    r2: f64,
    gamma_bar_e: f64,
    area: f64,
    y_mean: f64,
    inv_y_mean: f64,
    ln_gamma_l: f64,
    pdf_spec: MeijerGSpec,
    cdf_spec: MeijerGSpec,
    policy: PrecisionPolicy,
}

impl CoherentEve {
    fn new(params: &SystemParams) -> Result<Self> {
        let l = params.l() as f64;
        let alpha = params.alpha();
        let pdf_spec = MeijerGSpec::new(2, 1, vec![-alpha], vec![l - 1.0, 0.0, -1.0 - alpha])?;
        let cdf_spec = MeijerGSpec::new(2, 2, vec![1.0, 1.0 - alpha], vec![l, 1.0, -alpha, 0.0])?;
        Ok(Self {
            l: params.l(),
            delta: params.delta(),
            r1: params.r1(),
            r2: params.r2(),
            gamma_bar_e: params.gamma_bar_e(),
            area: params.annulus_area(),
            y_mean: params.distance_power_moment(1.0),
            inv_y_mean: params.distance_power_moment(-1.0),
            ln_gamma_l: ln_gamma_real(l)?,
            pdf_spec,
            cdf_spec,
            policy: PrecisionPolicy::default(),
        })
    }

    fn g(&self, spec: &MeijerGSpec, r: f64, gamma: f64) -> Result<Evaluated> {
        let z = r.powf(self.delta) * gamma / (4.0 * self.gamma_bar_e);
        meijer_g_scaled(spec, z, -self.ln_gamma_l, &self.policy)
            .context(|| format!("Eve SNR law (coherent), z={z:e}"))
    }

    fn pdf(&self, gamma: f64) -> Result<Evaluated> {
        if gamma == 0.0 {
            let v = if self.l == 1 {
                f64::INFINITY
            } else {
                self.y_mean / (4.0 * (self.l as f64 - 1.0) * self.gamma_bar_e)
            };
            return Ok(Evaluated::new(v, 0.0));
        }
        let pref = 1.0 / (2.0 * self.delta * self.gamma_bar_e * self.area);
        let g2 = self.g(&self.pdf_spec, self.r2, gamma)?;
        let g1 = self.g(&self.pdf_spec, self.r1, gamma)?;
        let w2 = self.r2.powf(2.0 + self.delta);
        let w1 = self.r1.powf(2.0 + self.delta);
        let value = pref * (w2 * g2.value - w1 * g1.value);
        let err = pref * (w2 * g2.abs_err + w1 * g1.abs_err)
            + 4.0 * f64::EPSILON * pref * (w2 * g2.value.abs() + w1 * g1.value.abs());
        Ok(Evaluated::new(clamp_density(value, err)?, err))
    }

    fn cdf(&self, gamma: f64) -> Result<Evaluated> {
        let pref = 2.0 / (self.delta * self.area);
        let g2 = self.g(&self.cdf_spec, self.r2, gamma)?;
        let g1 = self.g(&self.cdf_spec, self.r1, gamma)?;
        let w2 = self.r2 * self.r2;
        let w1 = self.r1 * self.r1;
        let value = pref * (w2 * g2.value - w1 * g1.value);
        let err = pref * (w2 * g2.abs_err + w1 * g1.abs_err)
            + 4.0 * f64::EPSILON * pref * (w2 * g2.value.abs() + w1 * g1.value.abs());
        Ok(Evaluated::new(clamp_probability(value, err)?, err))
    }
}

#[derive(Debug, Clone)]
struct DiscreteEve {
    l: u32,
    delta: f64,
    alpha: f64,
    r1_pow: f64,
    r2_pow: f64,
    gamma_bar_e: f64,
    area: f64,
    y_mean: f64,
    inv_y_mean: f64,
}

/// ∫_{x1}^{x2} t^{a−1} e^{−t} dt through whichever incomplete gamma keeps
/// the subtraction well conditioned.
fn incomplete_gamma_difference(a: f64, x1: f64, x2: f64) -> Result<Evaluated> {
    if x1 >= a + 1.0 {
        let u1 = upper_incomplete_gamma(a, x1)?;
        let u2 = upper_incomplete_gamma(a, x2)?;
        Ok(Evaluated::new(u1.value - u2.value, u1.abs_err + u2.abs_err))
    } else {
        let l1 = lower_incomplete_gamma(a, x1)?;
        let l2 = lower_incomplete_gamma(a, x2)?;
        Ok(Evaluated::new(l2.value - l1.value, l1.abs_err + l2.abs_err))
    }
}

impl DiscreteEve {
    fn new(params: &SystemParams) -> Result<Self> {
        Ok(Self {
            l: params.l(),
            delta: params.delta(),
            alpha: params.alpha(),
            r1_pow: params.r1().powf(params.delta()),
            r2_pow: params.r2().powf(params.delta()),
            gamma_bar_e: params.gamma_bar_e(),
            area: params.annulus_area(),
            y_mean: params.distance_power_moment(1.0),
            inv_y_mean: params.distance_power_moment(-1.0),
        })
    }

    fn pdf(&self, gamma: f64) -> Result<Evaluated> {
        let lg = self.l as f64 * self.gamma_bar_e;
        if gamma == 0.0 {
            return Ok(Evaluated::new(self.y_mean / lg, 0.0));
        }
        let a = 1.0 + self.alpha;
        let diff =
            incomplete_gamma_difference(a, self.r1_pow * gamma / lg, self.r2_pow * gamma / lg)?;
        let pref = 2.0 / (self.delta * lg * self.area) * (lg / gamma).powf(a);
        let value = pref * diff.value;
        let err = pref * diff.abs_err + 4.0 * f64::EPSILON * value.abs();
        Ok(Evaluated::new(clamp_density(value, err)?, err))
    }

    fn cdf(&self, gamma: f64) -> Result<Evaluated> {
        let lg = self.l as f64 * self.gamma_bar_e;
        let a = self.alpha;
        let diff =
            incomplete_gamma_difference(a, self.r1_pow * gamma / lg, self.r2_pow * gamma / lg)?;
        let pref = 2.0 / (self.delta * self.area) * (lg / gamma).powf(a);
        let value = 1.0 - pref * diff.value;
        let err = pref * diff.abs_err + 4.0 * f64::EPSILON * (pref * diff.value).abs().max(1.0);
        Ok(Evaluated::new(clamp_probability(value, err)?, err))
    }
}
