//! Corank counting for finite-level quotients and extraction of the
//! integer growth coefficients from a sampled count series.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flats::zero_count;
use crate::ring::IwasawaElement;

/// A sampled corank series: counts s_n at strictly increasing levels n.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthSeries {
    pub p: u64,
    pub d: usize,
    pub samples: Vec<(u32, u64)>,
}

impl GrowthSeries {
    pub fn new(p: u64, d: usize, samples: Vec<(u32, u64)>) -> Result<GrowthSeries> {
        if p < 2 {
            return Err(Error::Range("p must be at least 2".into()));
        }
        if d == 0 {
            return Err(Error::Range("dimension must be at least 1".into()));
        }
        if samples.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Validation("sample levels must be strictly increasing".into()));
        }
        Ok(GrowthSeries { p, d, samples })
    }
}

/// Rank of the level-n quotient by the ideal the generators span, computed
/// as the number of level-n characters killing every generator.
pub fn rank_quotient(generators: &[IwasawaElement], n: u32, budget: u128) -> Result<u64> {
    if generators.iter().any(|g| g.is_zero()) {
        return Err(Error::ZeroInput("quotient rank needs nonzero generators".into()));
    }
    Ok(zero_count(generators, n, budget)?.zeros)
}

/// Fitted growth coefficients: s_n = kappa1·p^{nd} + kappa2·p^{n(d-1)}
/// plus a residual measured against the comparison scale.
#[derive(Debug, Clone, Serialize)]
pub struct KappaFit {
    pub kappa1: u64,
    pub kappa2: u64,
    /// Per-sample leftovers: (level, s_n - kappa1·p^{nd} - kappa2·p^{n(d-1)},
    /// comparison scale at that level).
    pub residuals: Vec<(u32, i128, u64)>,
    /// First level from which both coefficient estimates hold unchanged.
    pub stabilized_at: u32,
    /// Whether the full series stays within a fixed multiple of the
    /// comparison scale over the sampled tail.  A finite sample can only
    /// be consistent with the asymptotic statement, never prove it.
    pub pseudo_null_consistent: bool,
}

fn round_div(num: i128, den: i128) -> i128 {
    // round half up; den > 0
    (2 * num + den).div_euclid(2 * den)
}

fn power(p: u64, exp: u32, what: &str) -> Result<i128> {
    (p as i128)
        .checked_pow(exp)
        .ok_or_else(|| Error::Range(format!("{what}: p^{exp} overflows the working integers")))
}

// Nearest-nonnegative-integer estimates of s_n / p^{n·exp}, and the start
// of the longest constant tail (needs at least two samples to count as
// agreement).
fn stabilized(samples: &[(u32, i128)], p: u64, exp: u32) -> Result<(u64, usize)> {
    let mut estimates = Vec::with_capacity(samples.len());
    for &(n, s) in samples {
        let h = power(p, n * exp, "growth scale")?;
        estimates.push(round_div(s, h).max(0));
    }
    let mut start = estimates.len() - 1;
    while start > 0 && estimates[start - 1] == estimates[start] {
        start -= 1;
    }
    if start + 2 > estimates.len() {
        return Err(Error::NotStabilized(format!(
            "estimates at exponent {exp} end as {estimates:?} without two agreeing tail samples"
        )));
    }
    Ok((estimates[start] as u64, start))
}

/// Extract the two leading growth coefficients by ratio stabilization:
/// each coefficient is the rounded ratio once it holds constant through
/// the end of the sample range.  The true coefficients are integers, so
/// rounding is exact on clean data and refuses to settle on dirty data.
pub fn fit_kappas(series: &GrowthSeries) -> Result<KappaFit> {
    let (p, d) = (series.p, series.d);
    if series.samples.len() < 3 {
        return Err(Error::Validation("fitting needs at least 3 samples".into()));
    }
    let wide: Vec<(u32, i128)> =
        series.samples.iter().map(|&(n, s)| (n, i128::from(s))).collect();
    let (kappa1, at1) = stabilized(&wide, p, d as u32)?;
    let rem1: Vec<(u32, i128)> = wide
        .iter()
        .map(|&(n, s)| Ok((n, s - i128::from(kappa1) * power(p, n * d as u32, "leading term")?)))
        .collect::<Result<_>>()?;
    let (kappa2, at2) = stabilized(&rem1, p, (d - 1) as u32)?;

    let mut residuals = Vec::with_capacity(wide.len());
    for &(n, r) in &rem1 {
        let sub = i128::from(kappa2) * power(p, n * (d - 1) as u32, "second term")?;
        let scale = if d >= 2 { power(p, n * (d - 2) as u32, "comparison scale")? } else { 1 };
        residuals.push((n, r - sub, scale as u64));
    }

    // bounded-ratio reading of "the series itself is small": both leading
    // coefficients vanish and s_n / scale never grows past its early range
    let ratios: Vec<(u128, u128)> = wide
        .iter()
        .zip(&residuals)
        .map(|(&(_, s), &(_, _, scale))| (s.unsigned_abs(), u128::from(scale)))
        .collect();
    let half = ratios.len() / 2;
    let cap = ratios[..half.max(1)]
        .iter()
        .cloned()
        .fold((1u128, 1u128), |acc, r| if r.0 * acc.1 > acc.0 * r.1 { r } else { acc });
    let bounded = ratios[half..].iter().all(|r| r.0 * cap.1 <= cap.0 * r.1);
    let pseudo_null_consistent = kappa1 == 0 && kappa2 == 0 && bounded;

    Ok(KappaFit {
        kappa1,
        kappa2,
        residuals,
        stabilized_at: wide[at1.max(at2)].0,
        pseudo_null_consistent,
    })
}
