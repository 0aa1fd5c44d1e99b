//! Monte-Carlo simulation of the physical channel.
//!
//! Samples are grouped in blocks of [`BLOCK`]; block `b` draws from a
//! ChaCha8 generator seeded with the user seed on stream `b`, and block
//! partials are reduced in block order. Results therefore depend only on
//! `(seed, n)`, never on how many workers ran the blocks.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::{PhaseDesign, SecrecyThreshold, SystemParams};
use crate::error::{Error, Result};
use crate::metrics::MetricKind;

/// Samples per RNG stream.
pub const BLOCK: usize = 4096;

/// Smallest sample count accepted by [`estimate_metric`].
pub const MIN_SAMPLES: u64 = 1000;

/// How sample blocks are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon's current pool; same as `Sequential` without the `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateResult {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
    pub seed: u64,
}

/// One full draw of both links, kept for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Alice–RIS amplitudes towards Bob.
    pub h_b: Vec<f64>,
    /// RIS–Bob amplitudes.
    pub g_b: Vec<f64>,
    pub h_e: Vec<f64>,
    pub g_e: Vec<f64>,
    /// Residual phase of each element on Bob's path, wrapped to (−π, π].
    pub eps_b: Vec<f64>,
    pub eps_e: Vec<f64>,
    pub eps_l_b: Complex64,
    pub eps_l_e: Complex64,
    /// RIS–Eve distance.
    pub d_re: f64,
    pub gamma_b: f64,
    pub gamma_e: f64,
}

/// Stream for block `b` of a run seeded with `seed`.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// Annulus radius at area fraction `u`.
pub fn eve_distance_from_uniform(params: &SystemParams, u: f64) -> f64 {
    let (r1, r2) = (params.r1(), params.r2());
    (r1 * r1 + u * (r2 * r2 - r1 * r1)).sqrt()
}

/// Area-uniform distance of Eve from the RIS.
pub fn sample_eve_distance<R: Rng + ?Sized>(params: &SystemParams, rng: &mut R) -> f64 {
    eve_distance_from_uniform(params, rng.random::<f64>())
}

fn wrap_phase(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y == -PI {
        PI
    } else {
        y
    }
}

/// Complex gain with `E|h|² = power` from two standard normals.
fn complex_gain<R: Rng + ?Sized>(rng: &mut R, power: f64) -> Complex64 {
    let s = (0.5 * power).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

#[derive(Default)]
struct Trace {
    h: Vec<f64>,
    g: Vec<f64>,
    eps: Vec<f64>,
}

/// `ε_L = Σ 𝔥_l 𝔤_l e^{jε_l}` for one link.
fn cascade<R: Rng + ?Sized>(
    design: PhaseDesign,
    l: u32,
    rng: &mut R,
    forced_phase: Option<f64>,
    mut trace: Option<&mut Trace>,
) -> Complex64 {
    let power = design.hop_gain_power();
    let mut sum = Complex64::new(0.0, 0.0);
    for _ in 0..l {
        let h = complex_gain(rng, power);
        let g = complex_gain(rng, power);
        let (amp_h, amp_g) = (h.norm(), g.norm());
        let eps = match design {
            // the RIS cancels the channel phases up to a uniform error
            PhaseDesign::CoherentImperfect => {
                let e = PI * (2.0 * rng.random::<f64>() - 1.0);
                forced_phase.unwrap_or(e)
            }
            // a blind grid phase adds to the channel phases
            PhaseDesign::DiscreteRandom { q } => {
                let k = rng.random_range(0..1u64 << q);
                let theta = 2.0 * PI * k as f64 / (1u64 << q) as f64;
                forced_phase.unwrap_or_else(|| wrap_phase(theta + h.arg() + g.arg()))
            }
        };
        sum += Complex64::from_polar(amp_h * amp_g, eps);
        if let Some(t) = trace.as_deref_mut() {
            t.h.push(amp_h);
            t.g.push(amp_g);
            t.eps.push(eps);
        }
    }
    sum
}

fn realization<R: Rng + ?Sized>(
    design: PhaseDesign,
    params: &SystemParams,
    rng: &mut R,
    forced_phase: Option<f64>,
) -> ChannelRealization {
    let mut tb = Trace::default();
    let mut te = Trace::default();
    let eb = cascade(design, params.l(), rng, forced_phase, Some(&mut tb));
    let ee = cascade(design, params.l(), rng, forced_phase, Some(&mut te));
    let d_re = sample_eve_distance(params, rng);
    ChannelRealization {
        gamma_b: params.gamma_bar_b() * eb.norm_sqr(),
        gamma_e: params.gamma_bar_e() * ee.norm_sqr() / d_re.powf(params.delta()),
        h_b: tb.h,
        g_b: tb.g,
        eps_b: tb.eps,
        h_e: te.h,
        g_e: te.g,
        eps_e: te.eps,
        eps_l_b: eb,
        eps_l_e: ee,
        d_re,
    }
}

/// Full realization of both links and Eve's position.
pub fn sample_realization<R: Rng + ?Sized>(
    design: PhaseDesign,
    params: &SystemParams,
    rng: &mut R,
) -> ChannelRealization {
    realization(design, params, rng, None)
}

/// As [`sample_realization`] with every element phase pinned to `phase`.
#[doc(hidden)]
pub fn sample_realization_forced<R: Rng + ?Sized>(
    design: PhaseDesign,
    params: &SystemParams,
    rng: &mut R,
    phase: f64,
) -> ChannelRealization {
    realization(design, params, rng, Some(phase))
}

/// `(γ_B, γ_E)` for one independent draw of Bob's cascade, Eve's cascade
/// and Eve's position.
pub fn sample_gamma_pair<R: Rng + ?Sized>(
    design: PhaseDesign,
    params: &SystemParams,
    rng: &mut R,
) -> (f64, f64) {
    let eb = cascade(design, params.l(), rng, None, None);
    let ee = cascade(design, params.l(), rng, None, None);
    let d = sample_eve_distance(params, rng);
    (
        params.gamma_bar_b() * eb.norm_sqr(),
        params.gamma_bar_e() * ee.norm_sqr() / d.powf(params.delta()),
    )
}

/// Runs `per_block(rng, len)` for every block and returns the partials in
/// block order.
fn run_blocks<T, F>(n: u64, seed: u64, exec: Execution, per_block: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    let blocks = n.div_ceil(BLOCK as u64);
    let job = |b: u64| {
        let len = (n - b * BLOCK as u64).min(BLOCK as u64) as usize;
        per_block(&mut block_rng(seed, b), len)
    };
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..blocks).into_par_iter().map(job).collect()
        }
        _ => (0..blocks).map(job).collect(),
    }
}

/// Running mean and sum of squared deviations, merged pairwise.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if self.n == 0 {
            return o;
        }
        if o.n == 0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * o.n as f64 / n as f64,
            m2: self.m2 + o.m2 + d * d * (self.n as f64 * o.n as f64) / n as f64,
        }
    }
}

fn check_n(n: u64) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(Error::InvalidParams(format!(
            "Monte-Carlo needs at least {MIN_SAMPLES} samples, got {n}"
        )));
    }
    Ok(())
}

/// Event indicator for one metric on a sampled pair.
pub fn metric_event(kind: MetricKind, thr: &SecrecyThreshold, gamma_b: f64, gamma_e: f64) -> bool {
    match kind {
        MetricKind::Sop => gamma_b < thr.r_s() * gamma_e + thr.w(),
        MetricKind::SopLower => gamma_b < thr.r_s() * gamma_e,
        MetricKind::Pnz => gamma_b > gamma_e,
    }
}

/// Fraction of `n` simulated pairs in the metric's event, with its
/// standard error.
pub fn estimate_metric(
    kind: MetricKind,
    design: PhaseDesign,
    params: &SystemParams,
    thr: &SecrecyThreshold,
    n: u64,
    seed: u64,
) -> Result<EstimateResult> {
    estimate_metric_with(kind, design, params, thr, n, seed, Execution::default())
}

pub fn estimate_metric_with(
    kind: MetricKind,
    design: PhaseDesign,
    params: &SystemParams,
    thr: &SecrecyThreshold,
    n: u64,
    seed: u64,
    exec: Execution,
) -> Result<EstimateResult> {
    let mut r = estimate_metrics(&[kind], design, params, thr, n, seed, exec)?;
    Ok(r.remove(0))
}

/// Several metrics from the same `n` draws, in the order of `kinds`. Each
/// entry equals what [`estimate_metric_with`] gives for that kind alone.
pub fn estimate_metrics(
    kinds: &[MetricKind],
    design: PhaseDesign,
    params: &SystemParams,
    thr: &SecrecyThreshold,
    n: u64,
    seed: u64,
    exec: Execution,
) -> Result<Vec<EstimateResult>> {
    check_n(n)?;
    let counts = run_blocks(n, seed, exec, |rng, len| {
        let mut hits = vec![0u64; kinds.len()];
        for _ in 0..len {
            let (gb, ge) = sample_gamma_pair(design, params, rng);
            for (h, &kind) in hits.iter_mut().zip(kinds) {
                *h += metric_event(kind, thr, gb, ge) as u64;
            }
        }
        hits
    });
    let nf = n as f64;
    Ok((0..kinds.len())
        .map(|i| {
            let hits: u64 = counts.iter().map(|c| c[i]).sum();
            let p = hits as f64 / nf;
            // sample variance of a 0/1 variable
            let var = (p * (1.0 - p) * nf / (nf - 1.0)).max(0.0);
            EstimateResult {
                mean: p,
                stderr: (var / nf).sqrt(),
                n,
                seed,
            }
        })
        .collect())
}

/// Mean of `f(γ_B, γ_E)` over `n` draws with its standard error.
pub fn estimate_mean<F>(
    design: PhaseDesign,
    params: &SystemParams,
    n: u64,
    seed: u64,
    exec: Execution,
    f: F,
) -> Result<EstimateResult>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    check_n(n)?;
    let parts = run_blocks(n, seed, exec, |rng, len| {
        let mut m = Moments::default();
        for _ in 0..len {
            let (gb, ge) = sample_gamma_pair(design, params, rng);
            m.push(f(gb, ge));
        }
        m
    });
    let m = parts.into_iter().fold(Moments::default(), Moments::merge);
    let var = m.m2 / (m.n as f64 - 1.0);
    Ok(EstimateResult {
        mean: m.mean,
        stderr: (var / m.n as f64).sqrt(),
        n,
        seed,
    })
}

/// `n` draws of `(γ_B, γ_E)` in deterministic order.
pub fn sample_pairs(
    design: PhaseDesign,
    params: &SystemParams,
    n: u64,
    seed: u64,
    exec: Execution,
) -> Vec<(f64, f64)> {
    run_blocks(n, seed, exec, |rng, len| {
        (0..len)
            .map(|_| sample_gamma_pair(design, params, rng))
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

/// `n` draws of Eve's distance power `d_RE^δ`.
pub fn sample_distance_powers(
    params: &SystemParams,
    n: u64,
    seed: u64,
    exec: Execution,
) -> Vec<f64> {
    run_blocks(n, seed, exec, |rng, len| {
        (0..len)
            .map(|_| sample_eve_distance(params, rng).powf(params.delta()))
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}
