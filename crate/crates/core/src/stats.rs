//! One-sample Kolmogorov–Smirnov tests against an analytical cdf.

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    /// `sup |F_n − F|`, or an upper bound on it when `bounded` is set.
    pub d: f64,
    pub n: usize,
    pub p_value: f64,
    pub bounded: bool,
}

impl KsResult {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value > alpha
    }
}

/// Asymptotic Kolmogorov tail `Pr(D_n > d)` with the Stephens small-sample
/// correction.
pub fn kolmogorov_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let jf = j as f64;
        let t = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += if j % 2 == 1 { t } else { -t };
        if t < 1e-16 * sum.abs() {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Exact statistic: `cdf` is evaluated at every sample. `sorted` must be
/// ascending.
pub fn ks_test<F>(sorted: &[f64], mut cdf: F) -> Result<KsResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    let n = sorted.len();
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x)?;
        d = d.max(f - i as f64 / nf).max((i + 1) as f64 / nf - f);
    }
    Ok(KsResult {
        d,
        n,
        p_value: kolmogorov_p_value(d, n),
        bounded: false,
    })
}

/// Upper bound on the statistic from `cdf` evaluated only at `knots`
/// sample quantiles. Between two knots both the empirical and the true cdf
/// are monotone, so the gap is bracketed by their values at the ends; the
/// bound overshoots by at most the cdf increment between knots plus
/// `1/knots`.
pub fn ks_test_bracketed<F>(sorted: &[f64], knots: usize, mut cdf: F) -> Result<KsResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    let n = sorted.len();
    if knots >= n {
        return ks_test(sorted, cdf);
    }
    let nf = n as f64;
    // knot j sits at sample index idx[j]; x below sorted[0] has F_n = 0
    let mut idx: Vec<usize> = (1..=knots).map(|j| (j * n) / knots - 1).collect();
    idx.dedup();
    let mut d: f64 = 0.0;
    // empirical cdf just below the left knot, true cdf at the left knot
    let mut fn_left = 0.0;
    let mut f_left = 0.0;
    for &i in &idx {
        let x = sorted[i];
        // ties: the empirical cdf at x counts every sample equal to x
        let mut last = i;
        while last + 1 < n && sorted[last + 1] == x {
            last += 1;
        }
        let f = cdf(x)?;
        let fn_at = (last + 1) as f64 / nf;
        d = d.max(fn_at - f_left).max(f - fn_left);
        fn_left = fn_at;
        f_left = f;
    }
    d = d.max(1.0 - f_left);
    Ok(KsResult {
        d,
        n,
        p_value: kolmogorov_p_value(d, n),
        bounded: true,
    })
}

/// Sorts in place (NaN-free input) and returns it.
pub fn sorted(mut xs: Vec<f64>) -> Vec<f64> {
    xs.sort_by(|a, b| a.total_cmp(b));
    xs
}
