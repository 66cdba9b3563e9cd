//! Stress-strength reliability `theta = P(X < Y)` from paired data.
//!
//! The differences `z = x - y` are modeled as skew-symmetric, so
//! `theta = P(Z < 0)` is the model CDF at zero. Posterior draws of
//! `(mu, sigma, lambda)` map to draws of `theta`.
//!
//! Only complete samples are supported: a censored pair has no usable
//! difference, and joint modeling of `(X, Y)` is out of scope.

use crate::dist::{SkewFamily, SkewSymmetric};
use crate::error::{Error, Result};
use crate::inference::{
    credible_interval, sample_posterior, McmcConfig, PosteriorDraws, PriorSpec,
};
use crate::propriety::{check_exact, Dataset, ProprietyReport};
use crate::stats;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSample {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl PairedSample {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::domain(format!(
                "x has {} values but y has {}",
                x.len(),
                y.len()
            )));
        }
        if x.len() < 2 {
            return Err(Error::domain(format!(
                "need at least 2 pairs, got {}",
                x.len()
            )));
        }
        if let Some(i) = x.iter().chain(&y).position(|v| !v.is_finite()) {
            return Err(Error::domain(format!(
                "pair {} is not finite; censored or missing pairs are not supported",
                i % x.len() + 1
            )));
        }
        Ok(PairedSample { x, y })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// `x_i - y_i`.
    pub fn differences(&self) -> Vec<f64> {
        self.x.iter().zip(&self.y).map(|(a, b)| a - b).collect()
    }
}

/// `P(X < Y)` under skew-symmetric differences: the model CDF at 0.
///
/// Values are clamped to the open unit interval; the clamp only bites when
/// the CDF underflows.
pub fn theta_from_params(mu: f64, sigma: f64, lambda: f64, family: SkewFamily) -> Result<f64> {
    let p = SkewSymmetric::new(mu, sigma, lambda, family)?.cdf(0.0)?;
    Ok(p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    /// Normalized so the histogram integrates to 1.
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaPosterior {
    pub draws: Vec<f64>,
    pub level: f64,
    pub interval: (f64, f64),
    pub mean: f64,
    pub median: f64,
    pub sd: f64,
}

impl ThetaPosterior {
    /// Maps every row `(mu, sigma, lambda)` of `draws` to `theta`.
    pub fn from_draws(draws: &PosteriorDraws, family: SkewFamily, level: f64) -> Result<Self> {
        let theta: Vec<f64> = draws
            .draws
            .par_iter()
            .map(|r| theta_from_params(r[0], r[1], r[2], family))
            .collect::<Result<_>>()?;
        Self::from_theta(theta, level)
    }

    pub fn from_theta(draws: Vec<f64>, level: f64) -> Result<Self> {
        let interval = credible_interval(&draws, level)?;
        let sorted = stats::sorted(&draws);
        Ok(ThetaPosterior {
            level,
            interval,
            mean: stats::mean(&draws),
            median: stats::quantile_sorted(&sorted, 0.5),
            sd: stats::variance(&draws).sqrt(),
            draws,
        })
    }

    /// Equal-width histogram over the range of the draws.
    pub fn histogram(&self, bins: usize) -> Vec<HistogramBin> {
        let bins = bins.max(1);
        let lo = self.draws.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.draws.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let width = if hi > lo {
            (hi - lo) / bins as f64
        } else {
            1.0
        };
        let mut counts = vec![0usize; bins];
        for &t in &self.draws {
            let k = (((t - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        let total = self.draws.len() as f64;
        counts
            .into_iter()
            .enumerate()
            .map(|(k, count)| HistogramBin {
                lo: lo + k as f64 * width,
                hi: lo + (k + 1) as f64 * width,
                count,
                density: count as f64 / (total * width),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StressFit {
    pub propriety: ProprietyReport,
    /// True when the fit went ahead despite a failed propriety check.
    pub forced: bool,
    pub params: PosteriorDraws,
    pub theta: ThetaPosterior,
}

/// Fits the differences and maps the draws to `theta`.
///
/// Refuses to run unless the propriety check passes or `force` is set.
pub fn posterior_theta(
    sample: &PairedSample,
    family: SkewFamily,
    prior: &PriorSpec,
    mcmc: &McmcConfig,
    level: f64,
    force: bool,
) -> Result<StressFit> {
    let data = Dataset::exact(sample.differences())?;
    let propriety = check_exact(&data, family.base);
    if !propriety.is_proper() && !force {
        return Err(Error::NotProper(propriety.reasons.join("; ")));
    }
    let params = sample_posterior(&data, family, prior, mcmc)?;
    let theta = ThetaPosterior::from_draws(&params, family, level)?;
    Ok(StressFit {
        forced: !propriety.is_proper(),
        propriety,
        params,
        theta,
    })
}
