//! Log posteriors, adaptive Metropolis sampling, credible intervals, maximum
//! likelihood and importance-sampled marginal likelihoods.
//!
//! The sampler works in unconstrained coordinates `(mu, ln sigma, asinh lambda)`.
//! The `asinh` map tames the `|lambda|^{-3/2}` posterior tail that a plain
//! random walk on `lambda` explores very slowly.

use crate::dist::SkewFamily;
use crate::error::{Error, Result};
use crate::jeffreys::{JeffreysTable, StudentTApprox};
use crate::optimize::{hessian, nelder_mead, NelderMeadOptions};
use crate::propriety::Dataset;
use crate::special::{ln_add_exp, ln_gamma_fn, ln_sum_exp, norm_ln_pdf};
use crate::stats;
use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};
use std::sync::Arc;

pub const PARAM_NAMES: [&str; 3] = ["mu", "sigma", "lambda"];

/// MLE search range for `lambda`; the likelihood can increase without bound.
pub const LAMBDA_MAX: f64 = 500.0;

/// Density of `lambda` in a prior `sigma^{-1} p(lambda)`.
#[derive(Debug, Clone)]
pub enum LambdaPrior {
    Jeffreys(Arc<JeffreysTable>),
    StudentT(StudentTApprox),
}

impl LambdaPrior {
    pub fn ln_density(&self, lambda: f64) -> f64 {
        match self {
            LambdaPrior::Jeffreys(t) => t.ln_density(lambda),
            LambdaPrior::StudentT(t) => t.ln_pdf(lambda),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorKind {
    IndependenceJeffreys,
    Benchmark,
}

/// A prior `pi(mu, sigma, lambda) ∝ sigma^{-1} p(lambda)`.
#[derive(Debug, Clone)]
pub struct PriorSpec {
    pub kind: PriorKind,
    pub lambda_prior: LambdaPrior,
}

impl PriorSpec {
    pub fn independence_jeffreys(table: Arc<JeffreysTable>) -> Self {
        PriorSpec {
            kind: PriorKind::IndependenceJeffreys,
            lambda_prior: LambdaPrior::Jeffreys(table),
        }
    }

    /// Any proper density for `lambda`: the Student-t approximation or a
    /// (normalized) table.
    pub fn benchmark(lambda_prior: LambdaPrior) -> Self {
        PriorSpec {
            kind: PriorKind::Benchmark,
            lambda_prior,
        }
    }

    /// The independence Jeffreys prior must come from the sampling family.
    pub fn check_family(&self, family: SkewFamily) -> Result<()> {
        if let (PriorKind::IndependenceJeffreys, LambdaPrior::Jeffreys(t)) =
            (self.kind, &self.lambda_prior)
        {
            if t.family != family {
                return Err(Error::domain(format!(
                    "Jeffreys table was built for {} but the model is {}",
                    t.family.name(),
                    family.name()
                )));
            }
        }
        if self.kind == PriorKind::IndependenceJeffreys
            && !matches!(self.lambda_prior, LambdaPrior::Jeffreys(_))
        {
            return Err(Error::domain(
                "the independence Jeffreys prior needs a Jeffreys table",
            ));
        }
        Ok(())
    }

    pub fn ln_density(&self, mu: f64, sigma: f64, lambda: f64) -> f64 {
        if !(sigma > 0.0) || !mu.is_finite() || !lambda.is_finite() {
            return f64::NEG_INFINITY;
        }
        -sigma.ln() + self.lambda_prior.ln_density(lambda)
    }
}

/// A log-density value with the reason it became `-inf`, if it did.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub diagnostic: Option<String>,
}

impl Evaluation {
    fn ok(value: f64) -> Self {
        Evaluation {
            value,
            diagnostic: None,
        }
    }

    fn fail(msg: String) -> Self {
        Evaluation {
            value: f64::NEG_INFINITY,
            diagnostic: Some(msg),
        }
    }
}

/// Log-likelihood of `(mu, sigma, lambda)`: log densities of the exact
/// observations plus log probabilities of the censoring intervals.
pub fn log_likelihood(params: [f64; 3], data: &Dataset, family: SkewFamily) -> Evaluation {
    let [mu, sigma, lambda] = params;
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Evaluation::fail(format!("sigma = {sigma} is outside (0, inf)"));
    }
    if !mu.is_finite() || !lambda.is_finite() {
        return Evaluation::fail("non-finite mu or lambda".into());
    }
    let inv = 1.0 / sigma;
    let mut total = -(data.exact.len() as f64) * sigma.ln();
    for &y in &data.exact {
        total += family.std_ln_density((y - mu) * inv, lambda);
    }
    for iv in &data.censored {
        if iv.is_whole_line() {
            continue;
        }
        match family.std_interval_mass((iv.lo - mu) * inv, (iv.hi - mu) * inv, lambda) {
            Ok(p) if p > 0.0 => total += p.ln(),
            Ok(_) => return Evaluation::fail(format!("interval {iv} has zero probability")),
            Err(e) => return Evaluation::fail(format!("interval {iv}: {e}")),
        }
    }
    if total.is_nan() {
        return Evaluation::fail("log-likelihood is NaN".into());
    }
    Evaluation::ok(total)
}

pub fn log_posterior_eval(
    params: [f64; 3],
    data: &Dataset,
    family: SkewFamily,
    prior: &PriorSpec,
) -> Evaluation {
    let [mu, sigma, lambda] = params;
    let lp = prior.ln_density(mu, sigma, lambda);
    if lp == f64::NEG_INFINITY {
        return Evaluation::fail(format!(
            "prior density is zero at ({mu}, {sigma}, {lambda})"
        ));
    }
    let mut e = log_likelihood(params, data, family);
    e.value += lp;
    e
}

/// `ln L(mu, sigma, lambda) + ln pi(mu, sigma, lambda)`, `-inf` off the support.
pub fn log_posterior(
    params: [f64; 3],
    data: &Dataset,
    family: SkewFamily,
    prior: &PriorSpec,
) -> f64 {
    log_posterior_eval(params, data, family, prior).value
}

/// `(mu, sigma, lambda) -> (mu, ln sigma, asinh lambda)`.
pub fn to_sampling(params: [f64; 3]) -> [f64; 3] {
    [params[0], params[1].ln(), params[2].asinh()]
}

pub fn from_sampling(x: &[f64]) -> [f64; 3] {
    [x[0], x[1].exp(), x[2].sinh()]
}

/// `ln |d(mu, sigma, lambda) / d(mu, s, u)| = s + ln cosh u`.
pub fn ln_jacobian(x: &[f64]) -> f64 {
    let u = x[2].abs();
    x[1] + u + (-2.0 * u).exp().ln_1p() - LN_2
}

/// Log posterior density of the sampling coordinates.
pub fn log_posterior_sampling(
    x: &[f64],
    data: &Dataset,
    family: SkewFamily,
    prior: &PriorSpec,
) -> f64 {
    let v = log_posterior(from_sampling(x), data, family, prior);
    if v == f64::NEG_INFINITY {
        v
    } else {
        v + ln_jacobian(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McmcConfig {
    pub total_iterations: usize,
    pub burn_in: usize,
    pub thinning: usize,
    /// Starting point in the target's own coordinates. When absent, callers
    /// that know the model start from the posterior mode.
    #[serde(default)]
    pub initial_point: Option<Vec<f64>>,
    #[serde(default = "yes")]
    pub adaptation: bool,
    pub seed: u64,
}

fn yes() -> bool {
    true
}

impl McmcConfig {
    /// Burn-in 10,000, thinning 50, 1,000 retained draws.
    pub fn simulation(seed: u64) -> Self {
        McmcConfig {
            total_iterations: 60_000,
            burn_in: 10_000,
            thinning: 50,
            initial_point: None,
            adaptation: true,
            seed,
        }
    }

    /// Burn-in 50,000, thinning 100, 1,000 retained draws.
    pub fn application(seed: u64) -> Self {
        McmcConfig {
            total_iterations: 150_000,
            burn_in: 50_000,
            thinning: 100,
            initial_point: None,
            adaptation: true,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.total_iterations {
            return Err(Error::domain(format!(
                "burn-in ({}) must be smaller than the total number of iterations ({})",
                self.burn_in, self.total_iterations
            )));
        }
        if self.thinning == 0 {
            return Err(Error::domain("thinning must be at least 1"));
        }
        Ok(())
    }

    pub fn retained(&self) -> usize {
        (self.total_iterations - self.burn_in) / self.thinning
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorDraws {
    /// One row per retained iteration.
    pub draws: Vec<Vec<f64>>,
    pub param_names: Vec<String>,
    /// Acceptance rate after burn-in.
    pub acceptance_rate: f64,
    pub burn_in: usize,
    pub thinning: usize,
    pub seed: u64,
}

impl PosteriorDraws {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.draws.iter().map(|r| r[j]).collect()
    }

    pub fn column_by_name(&self, name: &str) -> Option<Vec<f64>> {
        self.param_names
            .iter()
            .position(|n| n == name)
            .map(|j| self.column(j))
    }

    pub fn means(&self) -> Vec<f64> {
        (0..self.param_names.len())
            .map(|j| stats::mean(&self.column(j)))
            .collect()
    }

    /// Applies `f` to every row, keeping the bookkeeping.
    pub fn map_rows<F: Fn(&[f64]) -> Vec<f64>>(&self, names: &[&str], f: F) -> PosteriorDraws {
        PosteriorDraws {
            draws: self.draws.iter().map(|r| f(r)).collect(),
            param_names: names.iter().map(|s| s.to_string()).collect(),
            ..self.clone()
        }
    }
}

/// Adaptive random-walk Metropolis.
///
/// The proposal is Gaussian with covariance `s^2 C`, `C` starting at
/// `initial_cov` (identity when `None`). During burn-in `C` tracks the
/// empirical covariance of the chain and `ln s` follows a Robbins–Monro
/// recursion toward 23.4% acceptance; both are frozen afterwards, so the
/// retained draws come from a fixed Metropolis kernel.
pub fn mcmc_sample<F>(
    target: F,
    config: &McmcConfig,
    initial_cov: Option<&DMatrix<f64>>,
) -> Result<PosteriorDraws>
where
    F: Fn(&[f64]) -> f64,
{
    config.validate()?;
    let x0 = config
        .initial_point
        .clone()
        .ok_or_else(|| Error::Initialization("no initial point".into()))?;
    let d = x0.len();
    if d == 0 {
        return Err(Error::Initialization("empty parameter vector".into()));
    }
    let mut lp = target(&x0);
    if !lp.is_finite() {
        return Err(Error::Initialization(format!(
            "target is {lp} at the initial point {x0:?}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut chol = initial_cov
        .and_then(|c| Cholesky::new(c.clone()))
        .map(|c| c.l())
        .unwrap_or_else(|| DMatrix::identity(d, d));
    let mut ln_scale = (2.38 / (d as f64).sqrt()).ln();

    let mut x = DVector::from_vec(x0);
    let mut mean = x.clone();
    let mut cov_acc = DMatrix::<f64>::zeros(d, d);
    let mut n_seen = 1usize;

    let mut draws = Vec::with_capacity(config.retained());
    let mut accepted_after = 0usize;
    let mut z = DVector::<f64>::zeros(d);
    let mut prop = DVector::<f64>::zeros(d);

    for t in 0..config.total_iterations {
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        prop.copy_from(&x);
        prop.gemv(ln_scale.exp(), &chol, &z, 1.0);
        let lp_prop = target(prop.as_slice());
        let log_alpha = if lp_prop.is_nan() {
            f64::NEG_INFINITY
        } else {
            lp_prop - lp
        };
        let u: f64 = rng.random();
        let accept = u.ln() < log_alpha;
        if accept {
            std::mem::swap(&mut x, &mut prop);
            lp = lp_prop;
        }
        let burning = t < config.burn_in;
        if burning && config.adaptation {
            let alpha = log_alpha.min(0.0).exp();
            ln_scale += (alpha - 0.234) / ((t + 1) as f64).powf(0.6);
            ln_scale = ln_scale.clamp(-15.0, 5.0);
            // Welford update of the running mean and scatter matrix.
            n_seen += 1;
            let delta = &x - &mean;
            mean += &delta / n_seen as f64;
            let delta2 = &x - &mean;
            cov_acc.ger(1.0, &delta, &delta2, 1.0);
            if t >= 1000 && t % 200 == 0 {
                let mut c = &cov_acc / (n_seen - 1) as f64;
                let jitter = 1e-10 * (1.0 + c.diagonal().amax());
                for i in 0..d {
                    c[(i, i)] += jitter;
                }
                if let Some(ch) = Cholesky::new(c) {
                    // Hand the empirical covariance the optimal scale and let
                    // Robbins–Monro correct it from there.
                    if t == 1000 {
                        ln_scale = (2.38 / (d as f64).sqrt()).ln();
                    }
                    chol = ch.l();
                }
            }
        }
        if !burning {
            if accept {
                accepted_after += 1;
            }
            if (t - config.burn_in + 1).is_multiple_of(config.thinning) {
                draws.push(x.as_slice().to_vec());
            }
        }
    }
    let kept = config.total_iterations - config.burn_in;
    Ok(PosteriorDraws {
        draws,
        param_names: (0..d).map(|i| format!("x{i}")).collect(),
        acceptance_rate: accepted_after as f64 / kept as f64,
        burn_in: config.burn_in,
        thinning: config.thinning,
        seed: config.seed,
    })
}

/// Maximizes `f` over several starts; returns the best point and value.
pub fn find_mode<F: Fn(&[f64]) -> f64>(
    f: F,
    starts: &[Vec<f64>],
    step: &[f64],
) -> Option<(Vec<f64>, f64)> {
    let opts = NelderMeadOptions {
        max_evals: 4000,
        f_tol: 1e-10,
        x_tol: 1e-7,
    };
    let neg = |x: &[f64]| -f(x);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for s in starts {
        if !f(s).is_finite() {
            continue;
        }
        let mut m = nelder_mead(neg, s, step, &opts);
        // One restart from the optimum guards against early simplex collapse.
        let m2 = nelder_mead(neg, &m.x, step, &opts);
        if m2.value < m.value {
            m = m2;
        }
        let v = -m.value;
        if v.is_finite() && best.as_ref().is_none_or(|b| v > b.1) {
            best = Some((m.x, v));
        }
    }
    best
}

/// Inverse of the negative Hessian of `f` at `x`, if positive definite.
pub fn laplace_covariance<F: Fn(&[f64]) -> f64>(f: F, x: &[f64]) -> Option<DMatrix<f64>> {
    let d = x.len();
    let h = hessian(|p| -f(p), x);
    let m = DMatrix::from_fn(d, d, |i, j| h[i][j]);
    if m.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let ch = Cholesky::new(m)?;
    Some(ch.inverse())
}

fn data_starts(data: &Dataset) -> (f64, f64) {
    let mut pts: Vec<f64> = data.exact.clone();
    for iv in &data.censored {
        pts.push(match (iv.lo.is_finite(), iv.hi.is_finite()) {
            (true, true) => 0.5 * (iv.lo + iv.hi),
            (true, false) => iv.lo,
            (false, true) => iv.hi,
            (false, false) => continue,
        });
    }
    if pts.is_empty() {
        return (0.0, 1.0);
    }
    let s = stats::sorted(&pts);
    let med = stats::quantile_sorted(&s, 0.5);
    let sd = if pts.len() > 1 {
        stats::variance(&pts).sqrt()
    } else {
        1.0
    };
    (med, if sd > 0.0 && sd.is_finite() { sd } else { 1.0 })
}

/// Samples the posterior of `(mu, sigma, lambda)`. Without an initial point
/// in `config` the chain starts at the posterior mode, with the Laplace
/// covariance as the initial proposal shape.
pub fn sample_posterior(
    data: &Dataset,
    family: SkewFamily,
    prior: &PriorSpec,
    config: &McmcConfig,
) -> Result<PosteriorDraws> {
    prior.check_family(family)?;
    let target = |x: &[f64]| log_posterior_sampling(x, data, family, prior);
    let mut cfg = config.clone();
    let start = match &config.initial_point {
        Some(p) => {
            if p.len() != 3 {
                return Err(Error::Initialization(format!(
                    "expected 3 parameters, got {}",
                    p.len()
                )));
            }
            if !(p[1] > 0.0) {
                return Err(Error::Initialization(format!(
                    "initial sigma must be positive, got {}",
                    p[1]
                )));
            }
            to_sampling([p[0], p[1], p[2]]).to_vec()
        }
        None => {
            let (med, sd) = data_starts(data);
            let starts: Vec<Vec<f64>> = [-1.0, 0.0, 1.0]
                .iter()
                .map(|&u| vec![med, sd.ln(), u])
                .collect();
            find_mode(target, &starts, &[0.5 * sd, 0.3, 0.5])
                .map(|(x, _)| x)
                .ok_or_else(|| {
                    Error::Initialization("no start with a finite log posterior".into())
                })?
        }
    };
    let cov = laplace_covariance(target, &start);
    cfg.initial_point = Some(start);
    let raw = mcmc_sample(target, &cfg, cov.as_ref())?;
    Ok(raw.map_rows(&PARAM_NAMES, |r| from_sampling(r).to_vec()))
}

/// Equal-tailed interval from empirical percentiles (linear interpolation
/// between order statistics).
pub fn credible_interval(column: &[f64], level: f64) -> Result<(f64, f64)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(format!(
            "level must lie in (0, 1), got {level}"
        )));
    }
    if column.len() < 100 {
        return Err(Error::domain(format!(
            "need at least 100 draws, got {}",
            column.len()
        )));
    }
    if column.iter().any(|v| v.is_nan()) {
        return Err(Error::domain("draws contain NaN"));
    }
    let s = stats::sorted(column);
    let a = 0.5 * (1.0 - level);
    Ok((
        stats::quantile_sorted(&s, a),
        stats::quantile_sorted(&s, 1.0 - a),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleFit {
    /// `(mu, sigma, lambda)`.
    pub params: [f64; 3],
    pub max_loglik: f64,
    /// `lambda` hit the `±LAMBDA_MAX` clamp: the likelihood is still
    /// increasing toward infinite skewness.
    pub boundary: bool,
    pub aic: f64,
    pub bic: f64,
    pub n: usize,
}

pub fn aic(loglik: f64, k: usize) -> f64 {
    2.0 * k as f64 - 2.0 * loglik
}

pub fn bic(loglik: f64, k: usize, n: usize) -> f64 {
    k as f64 * (n as f64).ln() - 2.0 * loglik
}

/// Maximum likelihood by Nelder–Mead in `(mu, ln sigma, lambda)` from
/// several starts, with `lambda` clamped to `±LAMBDA_MAX`.
pub fn mle_fit(data: &Dataset, family: SkewFamily) -> Result<MleFit> {
    let n = data.len();
    if n < 2 {
        return Err(Error::domain(format!(
            "maximum likelihood needs at least 2 observations, got {n}"
        )));
    }
    let ll = |x: &[f64]| {
        let lambda = x[2].clamp(-LAMBDA_MAX, LAMBDA_MAX);
        let v = log_likelihood([x[0], x[1].exp(), lambda], data, family).value;
        // Keep the simplex inside the box.
        v - if x[2].abs() > LAMBDA_MAX {
            x[2].abs() - LAMBDA_MAX
        } else {
            0.0
        }
    };
    let (med, sd) = data_starts(data);
    let starts: Vec<Vec<f64>> = [-5.0, -1.0, 0.0, 1.0, 5.0]
        .iter()
        .map(|&l| vec![med, sd.ln(), l])
        .collect();
    let (x, v) = find_mode(ll, &starts, &[0.5 * sd, 0.3, 1.0])
        .ok_or_else(|| Error::Numerical("log-likelihood is not finite at any start".into()))?;
    let mut lambda = x[2].clamp(-LAMBDA_MAX, LAMBDA_MAX);
    let boundary = lambda.abs() >= LAMBDA_MAX * (1.0 - 1e-6);
    if boundary {
        lambda = LAMBDA_MAX.copysign(lambda);
    }
    Ok(MleFit {
        params: [x[0], x[1].exp(), lambda],
        max_loglik: v,
        boundary,
        aic: aic(v, 3),
        bic: bic(v, 3, n),
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginalLikelihood {
    pub log_value: f64,
    /// Monte-Carlo standard error of `log_value` (delta method).
    pub std_error: f64,
    /// Effective sample size of the importance weights.
    pub ess: f64,
    pub draws: usize,
}

/// An importance density that can be sampled and evaluated.
pub trait Proposal {
    fn ln_pdf(&self, x: &[f64]) -> f64;
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64>;
}

/// Multivariate Student-t with 4 degrees of freedom, moment-matched to a
/// set of draws.
#[derive(Debug, Clone)]
pub struct TProposal {
    mean: DVector<f64>,
    chol: DMatrix<f64>,
    log_norm: f64,
    dof: f64,
}

impl TProposal {
    pub const DOF: f64 = 4.0;

    /// Mean and covariance of the rows; the covariance is rescaled so the
    /// t has the same covariance as the draws.
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.len() <= d + 1 {
            return Err(Error::domain("too few draws to fit an importance proposal"));
        }
        let n = rows.len() as f64;
        let mean = DVector::from_fn(d, |i, _| rows.iter().map(|r| r[i]).sum::<f64>() / n);
        let mut cov = DMatrix::<f64>::zeros(d, d);
        for r in rows {
            let v = DVector::from_column_slice(r) - &mean;
            cov.ger(1.0 / (n - 1.0), &v, &v, 1.0);
        }
        TProposal::new(mean, cov * ((Self::DOF - 2.0) / Self::DOF), Self::DOF)
    }

    pub fn new(mean: DVector<f64>, shape: DMatrix<f64>, dof: f64) -> Result<Self> {
        let d = mean.len();
        let chol = Cholesky::new(shape)
            .ok_or_else(|| Error::Numerical("proposal covariance is not positive definite".into()))?
            .l();
        let log_det: f64 = chol.diagonal().iter().map(|v| v.ln()).sum();
        let df = d as f64;
        let log_norm = ln_gamma_fn(0.5 * (dof + df))
            - ln_gamma_fn(0.5 * dof)
            - 0.5 * df * (dof * PI).ln()
            - log_det;
        Ok(TProposal {
            mean,
            chol,
            log_norm,
            dof,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

impl Proposal for TProposal {
    fn ln_pdf(&self, x: &[f64]) -> f64 {
        let v = DVector::from_column_slice(x) - &self.mean;
        let z = self
            .chol
            .solve_lower_triangular(&v)
            .expect("Cholesky factor has a positive diagonal");
        let q = z.norm_squared();
        self.log_norm - 0.5 * (self.dof + self.dim() as f64) * (q / self.dof).ln_1p()
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let d = self.dim();
        let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let w: f64 = ChiSquared::new(self.dof).expect("positive dof").sample(rng);
        let x = &self.mean + (&self.chol * z) * (self.dof / w).sqrt();
        x.as_slice().to_vec()
    }
}

/// Proposal for posteriors that bend along their last coordinate `u`:
/// `q(u) q(x | u)`, where `q(u)` is a kernel density estimate of the `u`
/// draws mixed with a wide t, and `x | u` is a t(4) whose mean is
/// quadratic in `u`, fitted to the draws by least squares.
#[derive(Debug, Clone)]
pub struct ConditionalProposal {
    u_draws: Vec<f64>,
    bandwidth: f64,
    wide: TProposal,
    coef: DMatrix<f64>,
    rest: Option<TProposal>,
}

impl ConditionalProposal {
    const DEFENSIVE: f64 = 0.2;

    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map(|r| r.len()).unwrap_or(0);
        let n = rows.len();
        if d == 0 || n < 20 {
            return Err(Error::domain("too few draws to fit an importance proposal"));
        }
        let u: Vec<f64> = rows.iter().map(|r| r[d - 1]).collect();
        let sd = stats::variance(&u).sqrt();
        if !(sd > 0.0) {
            return Err(Error::Numerical(
                "conditioning coordinate has no spread".into(),
            ));
        }
        // Silverman's rule, widened: the proposal should be the heavier one.
        let bandwidth = 1.5 * 1.06 * sd * (n as f64).powf(-0.2);
        let wide = TProposal::new(
            DVector::from_element(1, stats::mean(&u)),
            DMatrix::from_element(1, 1, 4.0 * sd * sd),
            TProposal::DOF,
        )?;
        if d == 1 {
            return Ok(ConditionalProposal {
                u_draws: u,
                bandwidth,
                wide,
                coef: DMatrix::zeros(3, 0),
                rest: None,
            });
        }
        let z = DMatrix::from_fn(n, 3, |i, j| u[i].powi(j as i32));
        let y = DMatrix::from_fn(n, d - 1, |i, j| rows[i][j]);
        let ztz = z.transpose() * &z;
        let coef = Cholesky::new(ztz)
            .ok_or_else(|| Error::Numerical("degenerate conditioning coordinate".into()))?
            .solve(&(z.transpose() * &y));
        let resid = &y - &z * &coef;
        let cov = resid.transpose() * &resid / (n as f64 - 3.0);
        let shape = cov * (1.5 * (TProposal::DOF - 2.0) / TProposal::DOF);
        let rest = TProposal::new(DVector::zeros(d - 1), shape, TProposal::DOF)?;
        Ok(ConditionalProposal {
            u_draws: u,
            bandwidth,
            wide,
            coef,
            rest: Some(rest),
        })
    }

    fn ln_pdf_u(&self, u: f64) -> f64 {
        let h = self.bandwidth;
        let terms: Vec<f64> = self
            .u_draws
            .iter()
            .map(|&c| norm_ln_pdf((u - c) / h))
            .collect();
        let kde = ln_sum_exp(&terms) - (self.u_draws.len() as f64).ln() - h.ln();
        ln_add_exp(
            (1.0 - Self::DEFENSIVE).ln() + kde,
            Self::DEFENSIVE.ln() + self.wide.ln_pdf(&[u]),
        )
    }

    fn conditional_mean(&self, u: f64) -> Vec<f64> {
        let basis = [1.0, u, u * u];
        (0..self.coef.ncols())
            .map(|j| (0..3).map(|k| basis[k] * self.coef[(k, j)]).sum())
            .collect()
    }
}

impl Proposal for ConditionalProposal {
    fn ln_pdf(&self, x: &[f64]) -> f64 {
        let d = x.len();
        let u = x[d - 1];
        let mut v = self.ln_pdf_u(u);
        if let Some(rest) = &self.rest {
            let m = self.conditional_mean(u);
            let r: Vec<f64> = x[..d - 1].iter().zip(&m).map(|(a, b)| a - b).collect();
            v += rest.ln_pdf(&r);
        }
        v
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let wide: f64 = rng.random();
        let u = if wide < Self::DEFENSIVE {
            self.wide.sample(rng)[0]
        } else {
            let c = self.u_draws[rng.random_range(0..self.u_draws.len())];
            c + self.bandwidth * rng.sample::<f64, _>(StandardNormal)
        };
        let mut x = match &self.rest {
            Some(rest) => {
                let m = self.conditional_mean(u);
                rest.sample(rng)
                    .iter()
                    .zip(&m)
                    .map(|(a, b)| a + b)
                    .collect()
            }
            None => Vec::new(),
        };
        x.push(u);
        x
    }
}

/// `ln ∫ exp(target)` by importance sampling from `proposal`.
pub fn importance_log_integral<F, P, R>(
    target: F,
    proposal: &P,
    n: usize,
    rng: &mut R,
) -> Result<MarginalLikelihood>
where
    F: Fn(&[f64]) -> f64,
    P: Proposal,
    R: Rng + ?Sized,
{
    if n < 2 {
        return Err(Error::domain("importance sampling needs at least 2 draws"));
    }
    let logw: Vec<f64> = (0..n)
        .map(|_| {
            let x = proposal.sample(rng);
            let t = target(&x);
            if t.is_nan() {
                f64::NEG_INFINITY
            } else {
                t - proposal.ln_pdf(&x)
            }
        })
        .collect();
    let lse = ln_sum_exp(&logw);
    if !lse.is_finite() {
        return Err(Error::Numerical("all importance weights are zero".into()));
    }
    let w: Vec<f64> = logw.iter().map(|l| (l - lse).exp()).collect();
    let ess = 1.0 / w.iter().map(|v| v * v).sum::<f64>();
    if ess < 0.05 * n as f64 {
        return Err(Error::UnreliableEstimate { ess, draws: n });
    }
    let nf = n as f64;
    // Normalized weights have mean 1/n; relative s.e. of the mean weight.
    let var = w.iter().map(|v| (v * nf - 1.0).powi(2)).sum::<f64>() / (nf - 1.0);
    Ok(MarginalLikelihood {
        log_value: lse - nf.ln(),
        std_error: (var / nf).sqrt(),
        ess,
        draws: n,
    })
}

/// Log marginal likelihood `ln ∫ L(theta) pi(theta) d theta` of a posterior
/// fit, using a t(4) proposal matched to the draws in sampling coordinates.
/// With the improper `sigma^{-1}` factor the value is defined up to a
/// constant shared by every model with the same prior structure.
pub fn marginal_likelihood(
    data: &Dataset,
    family: SkewFamily,
    prior: &PriorSpec,
    draws: &PosteriorDraws,
    n: usize,
    seed: u64,
) -> Result<MarginalLikelihood> {
    let rows: Vec<Vec<f64>> = draws
        .draws
        .iter()
        .map(|r| to_sampling([r[0], r[1], r[2]]).to_vec())
        .collect();
    let proposal = ConditionalProposal::fit(&rows)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    importance_log_integral(
        |x| log_posterior_sampling(x, data, family, prior),
        &proposal,
        n,
        &mut rng,
    )
}
