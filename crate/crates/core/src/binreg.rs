//! Binomial regression with skew-symmetric links.
//!
//! `y_i ~ Binomial(n_i, S(x_i' beta; lambda))` where `S` is the standardized
//! skew-symmetric CDF. The prior is `pi(beta | lambda) pi(lambda)` with
//! `pi(beta | lambda) ∝ det[X' W X]^{1/2}`, `w_i = n_i s^2 / (S (1 - S))`, and
//! `pi(lambda)` the Jeffreys prior of the link family. Logit and probit links
//! pin `lambda = 0` and keep only the determinant prior.

use crate::dist::{SkewFamily, SkewingCdf, SymmetricBase};
use crate::error::{Error, Result};
use crate::inference::{
    aic, bic, find_mode, importance_log_integral, laplace_covariance, mcmc_sample,
    ConditionalProposal, MarginalLikelihood, McmcConfig, PosteriorDraws, TProposal,
};
use crate::jeffreys::JeffreysTable;
use crate::special::ln_gamma_fn;
use nalgebra::{Cholesky, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;
use std::fmt;
use std::sync::Arc;

/// Grouped binomial data with an intercept column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlmData {
    /// Design rows `(1, x_i1, ..., x_ik)`.
    pub x: Vec<Vec<f64>>,
    pub n: Vec<u64>,
    pub y: Vec<u64>,
    /// Names of the non-intercept columns.
    pub covariates: Vec<String>,
}

impl GlmData {
    pub fn new(
        x: Vec<Vec<f64>>,
        n: Vec<u64>,
        y: Vec<u64>,
        covariates: Vec<String>,
    ) -> Result<Self> {
        let m = x.len();
        if m == 0 {
            return Err(Error::domain("binomial regression needs at least one row"));
        }
        if n.len() != m || y.len() != m {
            return Err(Error::domain(format!(
                "{m} design rows but {} counts and {} successes",
                n.len(),
                y.len()
            )));
        }
        let p = x[0].len();
        if p == 0 || covariates.len() + 1 != p {
            return Err(Error::domain(format!(
                "design has {p} columns but {} covariate names",
                covariates.len()
            )));
        }
        for (i, row) in x.iter().enumerate() {
            if row.len() != p {
                return Err(Error::domain(format!(
                    "row {i} has {} columns, expected {p}",
                    row.len()
                )));
            }
            if row[0] != 1.0 {
                return Err(Error::domain(format!(
                    "row {i}: the first design column must be 1"
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::domain(format!("row {i} has a non-finite covariate")));
            }
            if y[i] > n[i] {
                return Err(Error::domain(format!(
                    "row {i}: {} successes out of {} trials",
                    y[i], n[i]
                )));
            }
        }
        Ok(GlmData {
            x,
            n,
            y,
            covariates,
        })
    }

    /// Prepends the intercept to each covariate row.
    pub fn from_covariates(
        covariates: Vec<String>,
        rows: Vec<Vec<f64>>,
        n: Vec<u64>,
        y: Vec<u64>,
    ) -> Result<Self> {
        let x = rows
            .into_iter()
            .map(|r| std::iter::once(1.0).chain(r).collect())
            .collect();
        GlmData::new(x, n, y, covariates)
    }

    /// Beetle mortality after five hours' exposure to carbon disulphide
    /// (Bliss, 1935): log dose, insects exposed, insects killed.
    pub fn bliss() -> Self {
        const DOSE: [f64; 8] = [
            1.6907, 1.7242, 1.7552, 1.7842, 1.8113, 1.8369, 1.8610, 1.8839,
        ];
        const N: [u64; 8] = [59, 60, 62, 56, 63, 59, 62, 60];
        const Y: [u64; 8] = [6, 13, 18, 28, 52, 53, 61, 60];
        GlmData::from_covariates(
            vec!["dose".into()],
            DOSE.iter().map(|&d| vec![d]).collect(),
            N.to_vec(),
            Y.to_vec(),
        )
        .expect("fixture is valid")
    }

    pub fn rows(&self) -> usize {
        self.x.len()
    }

    /// Number of regression coefficients `k + 1`.
    pub fn coefficients(&self) -> usize {
        self.x[0].len()
    }

    pub fn eta(&self, beta: &[f64]) -> Vec<f64> {
        self.x
            .iter()
            .map(|r| r.iter().zip(beta).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// The design `X V` for `V = diag(1, v_1, ..., v_k)`.
    pub fn scale_columns(&self, v: &[f64]) -> Result<GlmData> {
        if v.len() != self.coefficients() - 1 || v.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::domain("need one positive scale per covariate"));
        }
        let x = self
            .x
            .iter()
            .map(|r| {
                std::iter::once(1.0)
                    .chain(r[1..].iter().zip(v).map(|(a, s)| a * s))
                    .collect()
            })
            .collect();
        Ok(GlmData { x, ..self.clone() })
    }

    /// `sum_i ln C(n_i, y_i)`.
    pub fn binomial_constant(&self) -> f64 {
        self.n
            .iter()
            .zip(&self.y)
            .map(|(&n, &y)| {
                ln_gamma_fn(n as f64 + 1.0)
                    - ln_gamma_fn(y as f64 + 1.0)
                    - ln_gamma_fn((n - y) as f64 + 1.0)
            })
            .sum()
    }
}

/// Link `S^{-1}` from a standardized skew-symmetric CDF.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkewLink {
    pub family: SkewFamily,
    /// `false` pins `lambda = 0` (logit, probit).
    pub free_lambda: bool,
}

impl SkewLink {
    pub fn skew_logistic() -> Self {
        SkewLink {
            family: SkewFamily::skew_logistic(),
            free_lambda: true,
        }
    }

    pub fn skew_normal() -> Self {
        SkewLink {
            family: SkewFamily::skew_normal(),
            free_lambda: true,
        }
    }

    pub fn logit() -> Self {
        SkewLink {
            family: SkewFamily::new(SymmetricBase::Logistic, SkewingCdf::Logistic),
            free_lambda: false,
        }
    }

    pub fn probit() -> Self {
        SkewLink {
            family: SkewFamily::new(SymmetricBase::Normal, SkewingCdf::Normal),
            free_lambda: false,
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "skew-logistic" | "skew_logistic" => Ok(Self::skew_logistic()),
            "skew-normal" | "skew_normal" => Ok(Self::skew_normal()),
            "logit" => Ok(Self::logit()),
            "probit" => Ok(Self::probit()),
            other => Err(Error::domain(format!(
                "unknown link '{other}' (expected skew-logistic, skew-normal, logit or probit)"
            ))),
        }
    }

    pub fn name(&self) -> String {
        match (self.free_lambda, self.family.base) {
            (false, SymmetricBase::Logistic) => "logit".into(),
            (false, SymmetricBase::Normal) => "probit".into(),
            (false, _) => format!("{}(lambda=0)", self.family.name()),
            (true, _) => self.family.name(),
        }
    }

    /// `(S, 1 - S)` at `eta`, both with full relative accuracy.
    pub fn cdf_pair(&self, eta: f64, lambda: f64) -> Result<(f64, f64)> {
        self.family.std_cdf_pair(eta, lambda)
    }

    pub fn density(&self, eta: f64, lambda: f64) -> f64 {
        self.family.std_density(eta, lambda)
    }

    /// Number of free parameters for a design with `p` coefficients.
    pub fn parameters(&self, p: usize) -> usize {
        p + usize::from(self.free_lambda)
    }
}

impl fmt::Display for SkewLink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// `sum_i y_i ln S_i + (n_i - y_i) ln(1 - S_i)`, without the binomial
/// coefficients. `-inf` when a row has probability 0 of its observed count.
pub fn glm_loglik(beta: &[f64], lambda: f64, data: &GlmData, link: &SkewLink) -> f64 {
    if beta.len() != data.coefficients()
        || !lambda.is_finite()
        || beta.iter().any(|b| !b.is_finite())
    {
        return f64::NEG_INFINITY;
    }
    let mut total = 0.0;
    for (i, eta) in data.eta(beta).into_iter().enumerate() {
        let Ok((p, q)) = link.cdf_pair(eta, lambda) else {
            return f64::NEG_INFINITY;
        };
        let (y, f) = (data.y[i] as f64, (data.n[i] - data.y[i]) as f64);
        if y > 0.0 {
            total += y * p.ln();
        }
        if f > 0.0 {
            total += f * q.ln();
        }
    }
    if total.is_nan() {
        f64::NEG_INFINITY
    } else {
        total
    }
}

/// Weights `w_i = n_i s_i^2 / (S_i (1 - S_i))`; zero where `S (1 - S)`
/// underflows (the ratio vanishes there).
fn weights(beta: &[f64], lambda: f64, data: &GlmData, link: &SkewLink) -> Option<Vec<f64>> {
    data.eta(beta)
        .into_iter()
        .zip(&data.n)
        .map(|(eta, &n)| {
            let (p, q) = link.cdf_pair(eta, lambda).ok()?;
            let s = link.density(eta, lambda);
            let pq = p * q;
            Some(if pq > 0.0 && s > 0.0 {
                n as f64 * (s / p) * (s / q)
            } else {
                0.0
            })
        })
        .collect()
}

/// `(1/2) ln det[X' W(beta, lambda) X]`, `-inf` when singular.
pub fn half_log_det_information(beta: &[f64], lambda: f64, data: &GlmData, link: &SkewLink) -> f64 {
    let p = data.coefficients();
    if beta.len() != p || data.rows() < p {
        return f64::NEG_INFINITY;
    }
    let Some(w) = weights(beta, lambda, data, link) else {
        return f64::NEG_INFINITY;
    };
    let mut m = DMatrix::<f64>::zeros(p, p);
    for (row, wi) in data.x.iter().zip(&w) {
        let r = DVector::from_column_slice(row);
        m.ger(*wi, &r, &r, 1.0);
    }
    match Cholesky::new(m) {
        Some(ch) => {
            let v: f64 = ch.l().diagonal().iter().map(|d| d.ln()).sum();
            if v.is_finite() {
                v
            } else {
                f64::NEG_INFINITY
            }
        }
        None => f64::NEG_INFINITY,
    }
}

/// Log of the hierarchical prior `det[X' W X]^{1/2} pi(lambda)` (up to the
/// normalizing constant of the determinant factor). Pinned links ignore
/// `lambda_prior` and require `lambda = 0`.
pub fn cik_logprior(
    beta: &[f64],
    lambda: f64,
    data: &GlmData,
    link: &SkewLink,
    lambda_prior: Option<&JeffreysTable>,
) -> f64 {
    let lp_lambda = if link.free_lambda {
        match lambda_prior {
            Some(t) => t.ln_density(lambda),
            None => return f64::NEG_INFINITY,
        }
    } else if lambda == 0.0 {
        0.0
    } else {
        return f64::NEG_INFINITY;
    };
    let d = half_log_det_information(beta, lambda, data, link);
    if d == f64::NEG_INFINITY {
        return d;
    }
    d + lp_lambda
}

/// Full parameter vector `(beta_0, ..., beta_k[, lambda])`.
fn split<'a>(theta: &'a [f64], link: &SkewLink, p: usize) -> (&'a [f64], f64) {
    if link.free_lambda {
        (&theta[..p], theta[p])
    } else {
        (&theta[..p], 0.0)
    }
}

/// Sampling coordinates: `lambda` enters as `asinh lambda`.
fn theta_from_sampling(x: &[f64], link: &SkewLink, p: usize) -> Vec<f64> {
    let mut t = x.to_vec();
    if link.free_lambda {
        t[p] = x[p].sinh();
    }
    t
}

fn ln_cosh(u: f64) -> f64 {
    let a = u.abs();
    a + (-2.0 * a).exp().ln_1p() - LN_2
}

/// Everything needed to evaluate the posterior of one link.
#[derive(Debug, Clone)]
pub struct GlmModel {
    pub data: GlmData,
    pub link: SkewLink,
    pub lambda_prior: Option<Arc<JeffreysTable>>,
}

impl GlmModel {
    pub fn new(
        data: GlmData,
        link: SkewLink,
        lambda_prior: Option<Arc<JeffreysTable>>,
    ) -> Result<Self> {
        if link.free_lambda {
            match &lambda_prior {
                Some(t) if t.family == link.family => {}
                Some(t) => {
                    return Err(Error::domain(format!(
                        "Jeffreys table for {} does not match the {} link",
                        t.family.name(),
                        link.name()
                    )))
                }
                None => {
                    return Err(Error::domain(format!(
                        "the {} link needs a Jeffreys table for lambda",
                        link.name()
                    )))
                }
            }
        }
        Ok(GlmModel {
            data,
            link,
            lambda_prior,
        })
    }

    pub fn dim(&self) -> usize {
        self.link.parameters(self.data.coefficients())
    }

    pub fn param_names(&self) -> Vec<String> {
        let mut v: Vec<String> = (0..self.data.coefficients())
            .map(|j| format!("beta{j}"))
            .collect();
        if self.link.free_lambda {
            v.push("lambda".into());
        }
        v
    }

    pub fn loglik(&self, theta: &[f64]) -> f64 {
        let (beta, lambda) = split(theta, &self.link, self.data.coefficients());
        glm_loglik(beta, lambda, &self.data, &self.link)
    }

    pub fn log_prior(&self, theta: &[f64]) -> f64 {
        let (beta, lambda) = split(theta, &self.link, self.data.coefficients());
        cik_logprior(
            beta,
            lambda,
            &self.data,
            &self.link,
            self.lambda_prior.as_deref(),
        )
    }

    pub fn log_posterior(&self, theta: &[f64]) -> f64 {
        let pr = self.log_prior(theta);
        if pr == f64::NEG_INFINITY {
            return pr;
        }
        pr + self.loglik(theta)
    }

    /// Log prior density in sampling coordinates, Jacobian included.
    pub fn log_prior_sampling(&self, x: &[f64]) -> f64 {
        let p = self.data.coefficients();
        let v = self.log_prior(&theta_from_sampling(x, &self.link, p));
        if self.link.free_lambda && v.is_finite() {
            v + ln_cosh(x[p])
        } else {
            v
        }
    }

    /// Log posterior density in sampling coordinates, Jacobian included.
    pub fn log_posterior_sampling(&self, x: &[f64]) -> f64 {
        let p = self.data.coefficients();
        let v = self.log_posterior(&theta_from_sampling(x, &self.link, p));
        if self.link.free_lambda && v.is_finite() {
            v + ln_cosh(x[p])
        } else {
            v
        }
    }

    /// Starting coefficients from a least-squares fit to empirical logits.
    fn start_beta(&self) -> Vec<f64> {
        let p = self.data.coefficients();
        let m = self.data.rows();
        let x = DMatrix::from_fn(m, p, |i, j| self.data.x[i][j]);
        let z = DVector::from_fn(m, |i, _| {
            let (y, n) = (self.data.y[i] as f64, self.data.n[i] as f64);
            ((y + 0.5) / (n - y + 0.5)).ln()
        });
        let xtx = x.transpose() * &x;
        match Cholesky::new(xtx) {
            Some(ch) => ch.solve(&(x.transpose() * z)).as_slice().to_vec(),
            None => vec![0.0; p],
        }
    }

    fn starts(&self) -> Vec<Vec<f64>> {
        let beta = self.start_beta();
        // Probit coefficients are about 1/1.7 of logit ones.
        let scaled: Vec<f64> = beta.iter().map(|b| b / 1.7).collect();
        let mut out = Vec::new();
        for b in [beta, scaled] {
            if self.link.free_lambda {
                for u in [-1.5, 0.0, 1.5] {
                    let mut v = b.clone();
                    v.push(u);
                    out.push(v);
                }
            } else {
                out.push(b);
            }
        }
        out
    }

    fn steps(&self, start: &[f64]) -> Vec<f64> {
        start.iter().map(|v| 0.1 * (1.0 + v.abs())).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlmMle {
    pub params: Vec<f64>,
    pub max_loglik: f64,
    pub aic: f64,
    /// Uses the number of design rows as the sample size.
    pub bic: f64,
    /// `true` when the binomial coefficients are included in the
    /// log-likelihood (and hence in AIC/BIC).
    pub with_constants: bool,
}

/// Maximum likelihood over `(beta, lambda)`.
pub fn glm_mle(model: &GlmModel, with_constants: bool) -> Result<GlmMle> {
    let p = model.data.coefficients();
    let f = |x: &[f64]| {
        let mut t = x.to_vec();
        if model.link.free_lambda {
            t[p] = t[p].clamp(-crate::inference::LAMBDA_MAX, crate::inference::LAMBDA_MAX);
        }
        model.loglik(&t)
    };
    let starts: Vec<Vec<f64>> = model
        .starts()
        .into_iter()
        .map(|mut s| {
            if model.link.free_lambda {
                s[p] = s[p].sinh();
            }
            s
        })
        .collect();
    let step = model.steps(&starts[0]);
    let (x, v) = find_mode(f, &starts, &step)
        .ok_or_else(|| Error::Numerical("log-likelihood is not finite at any start".into()))?;
    let k = model.dim();
    let ll = if with_constants {
        v + model.data.binomial_constant()
    } else {
        v
    };
    Ok(GlmMle {
        params: x,
        max_loglik: ll,
        aic: aic(ll, k),
        bic: bic(ll, k, model.data.rows()),
        with_constants,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GlmPosterior {
    pub link: SkewLink,
    pub data: GlmData,
    /// Columns `beta0, ..., betak[, lambda]`.
    pub draws: PosteriorDraws,
    /// Posterior mean success probability per design row.
    pub predicted_prob: Vec<f64>,
    pub mle: GlmMle,
    pub log_marginal: Option<MarginalLikelihood>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlmFitOptions {
    pub mcmc: McmcConfig,
    /// Importance draws for the marginal likelihood; 0 skips it.
    pub importance_draws: usize,
    /// Include binomial coefficients in the reported log-likelihood.
    pub with_constants: bool,
}

impl GlmFitOptions {
    pub fn new(mcmc: McmcConfig) -> Self {
        GlmFitOptions {
            mcmc,
            importance_draws: 20_000,
            with_constants: false,
        }
    }
}

/// Posterior sampling for one link, started at the posterior mode.
pub fn glm_fit(model: &GlmModel, opts: &GlmFitOptions) -> Result<GlmPosterior> {
    let p = model.data.coefficients();
    let target = |x: &[f64]| model.log_posterior_sampling(x);
    let starts = model.starts();
    let step = model.steps(&starts[0]);
    let start = match &opts.mcmc.initial_point {
        Some(x) => {
            if x.len() != model.dim() {
                return Err(Error::Initialization(format!(
                    "expected {} parameters, got {}",
                    model.dim(),
                    x.len()
                )));
            }
            let mut s = x.clone();
            if model.link.free_lambda {
                s[p] = s[p].asinh();
            }
            s
        }
        None => {
            find_mode(target, &starts, &step)
                .ok_or_else(|| {
                    Error::Initialization(
                        "posterior is zero at every start: is X'WX singular?".into(),
                    )
                })?
                .0
        }
    };
    let cov = laplace_covariance(target, &start);
    let mut cfg = opts.mcmc.clone();
    cfg.initial_point = Some(start);
    let raw = mcmc_sample(target, &cfg, cov.as_ref())?;
    let log_marginal = if opts.importance_draws > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.mcmc.seed ^ 0x5eed);
        // With a free λ the coefficients drift with asinh λ; condition on it.
        Some(if model.link.free_lambda {
            importance_log_integral(
                target,
                &ConditionalProposal::fit(&raw.draws)?,
                opts.importance_draws,
                &mut rng,
            )?
        } else {
            importance_log_integral(
                target,
                &TProposal::fit(&raw.draws)?,
                opts.importance_draws,
                &mut rng,
            )?
        })
    } else {
        None
    };
    let names = model.param_names();
    let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let draws = raw.map_rows(&name_refs, |r| theta_from_sampling(r, &model.link, p));
    let predicted_prob = posterior_mean_prob(&draws, &model.data, &model.link)?;
    let mle = glm_mle(model, opts.with_constants)?;
    Ok(GlmPosterior {
        link: model.link,
        data: model.data.clone(),
        draws,
        predicted_prob,
        mle,
        log_marginal,
    })
}

fn posterior_mean_prob(
    draws: &PosteriorDraws,
    data: &GlmData,
    link: &SkewLink,
) -> Result<Vec<f64>> {
    let p = data.coefficients();
    if draws.param_names.len() != link.parameters(p) {
        return Err(Error::domain("posterior draws do not match the design"));
    }
    let mut sums = vec![0.0; data.rows()];
    for row in &draws.draws {
        let (beta, lambda) = split(row, link, p);
        for (i, eta) in data.eta(beta).into_iter().enumerate() {
            sums[i] += link.cdf_pair(eta, lambda)?.0;
        }
    }
    let k = draws.len() as f64;
    Ok(sums.into_iter().map(|s| s / k).collect())
}

/// Expected counts `n_j E[S(x_j' beta; lambda)]` for each row of `data`.
pub fn glm_predict(posterior: &GlmPosterior, data: &GlmData) -> Result<Vec<f64>> {
    let probs = if data == &posterior.data {
        posterior.predicted_prob.clone()
    } else {
        posterior_mean_prob(&posterior.draws, data, &posterior.link)?
    };
    Ok(probs
        .iter()
        .zip(&data.n)
        .map(|(p, &n)| p * n as f64)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub link: String,
    pub aic: f64,
    pub bic: f64,
    pub log_marginal: Option<f64>,
    /// Marginal likelihood relative to the reference link.
    pub bayes_factor: Option<f64>,
}

/// AIC, BIC and Bayes factors against the fit whose link is named `reference`.
pub fn glm_compare(fits: &[GlmPosterior], reference: &str) -> Result<Vec<ComparisonRow>> {
    let first = fits
        .first()
        .ok_or_else(|| Error::domain("nothing to compare"))?;
    if fits.iter().any(|f| f.data != first.data) {
        return Err(Error::domain("all fits must use the same data"));
    }
    let ref_ml = fits
        .iter()
        .find(|f| f.link.name() == reference)
        .ok_or_else(|| Error::domain(format!("no fit with link '{reference}'")))?
        .log_marginal
        .map(|m| m.log_value);
    Ok(fits
        .iter()
        .map(|f| {
            let lm = f.log_marginal.map(|m| m.log_value);
            ComparisonRow {
                link: f.link.name(),
                aic: f.mle.aic,
                bic: f.mle.bic,
                log_marginal: lm,
                bayes_factor: match (lm, ref_ml) {
                    (Some(a), Some(b)) => Some((a - b).exp()),
                    _ => None,
                },
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jeffreys::GridSpec;
    use crate::special::sigmoid;
    use rand::Rng;
    use std::sync::OnceLock;

    fn sl_table() -> Arc<JeffreysTable> {
        static T: OnceLock<Arc<JeffreysTable>> = OnceLock::new();
        T.get_or_init(|| {
            Arc::new(
                JeffreysTable::build(SkewFamily::skew_logistic(), &GridSpec::default()).unwrap(),
            )
        })
        .clone()
    }

    #[test]
    fn data_validation() {
        assert!(GlmData::new(vec![vec![2.0, 1.0]], vec![3], vec![1], vec!["x".into()]).is_err());
        assert!(GlmData::new(vec![vec![1.0, 1.0]], vec![3], vec![4], vec!["x".into()]).is_err());
        assert!(GlmData::new(vec![], vec![], vec![], vec![]).is_err());
        let b = GlmData::bliss();
        assert_eq!(b.rows(), 8);
        assert_eq!(b.n.iter().sum::<u64>(), 481);
    }

    #[test]
    fn loglik_anchors() {
        let b = GlmData::bliss();
        let all: f64 = b.n.iter().map(|&n| n as f64).sum();
        for link in [
            SkewLink::logit(),
            SkewLink::probit(),
            SkewLink::skew_logistic(),
            SkewLink::skew_normal(),
        ] {
            let v = glm_loglik(&[0.0, 0.0], 0.0, &b, &link);
            assert!((v - all * 0.5f64.ln()).abs() < 1e-9, "{link}");
        }
        // Logistic link at lambda = 0 is the logit likelihood.
        let beta = [-60.0, 34.0];
        let direct: f64 = b
            .eta(&beta)
            .iter()
            .enumerate()
            .map(|(i, &e)| {
                b.y[i] as f64 * sigmoid(e).ln() + (b.n[i] - b.y[i]) as f64 * sigmoid(-e).ln()
            })
            .sum();
        let v = glm_loglik(&beta, 0.0, &b, &SkewLink::skew_logistic());
        assert!((v - direct).abs() < 1e-12 * direct.abs());
        // Saturated row: contribution -> 0.
        let d = GlmData::new(vec![vec![1.0, 1.0]], vec![5], vec![5], vec!["x".into()]).unwrap();
        let v = glm_loglik(&[0.0, 40.0], 0.0, &d, &SkewLink::logit());
        assert!(v <= 0.0 && v > -1e-15);
    }

    #[test]
    fn constants_shift_aic_uniformly() {
        let m = GlmModel::new(GlmData::bliss(), SkewLink::logit(), None).unwrap();
        let a = glm_mle(&m, false).unwrap();
        let b = glm_mle(&m, true).unwrap();
        let c = m.data.binomial_constant();
        assert!((b.aic - (a.aic - 2.0 * c)).abs() < 1e-9);
        // Logit MLE on the beetle data.
        assert!(
            (a.params[0] + 60.717).abs() < 0.01 && (a.params[1] - 34.270).abs() < 0.01,
            "{:?}",
            a.params
        );
    }

    #[test]
    fn determinant_prior_properties() {
        let b = GlmData::bliss();
        let link = SkewLink::skew_logistic();
        let t = sl_table();
        // Brute-force 2x2 determinant.
        let (beta, lambda) = ([-40.0, 22.0], 1.3);
        let w = weights(&beta, lambda, &b, &link).unwrap();
        let (mut a, mut c, mut d) = (0.0, 0.0, 0.0);
        for (r, wi) in b.x.iter().zip(&w) {
            a += wi * r[0] * r[0];
            c += wi * r[0] * r[1];
            d += wi * r[1] * r[1];
        }
        let brute = 0.5 * (a * d - c * c).ln();
        let chol = half_log_det_information(&beta, lambda, &b, &link);
        assert!(
            (brute - chol).abs() < 1e-10 * (1.0 + brute.abs()),
            "{brute} vs {chol}"
        );
        // Rank deficient with fewer rows than coefficients.
        let one = GlmData::new(vec![vec![1.0, 2.0]], vec![10], vec![3], vec!["x".into()]).unwrap();
        assert_eq!(
            cik_logprior(&[0.0, 0.0], 0.0, &one, &SkewLink::logit(), None),
            f64::NEG_INFINITY
        );
        // Decay along a ray.
        let mut last = f64::INFINITY;
        for r in [1.0, 10.0, 100.0, 1000.0, 10000.0] {
            let v = cik_logprior(&[-0.3 * r, 0.2 * r], 0.5, &b, &link, Some(&t));
            assert!(v < last);
            last = v;
        }
        assert!(last < -100.0);
        // Free links need a prior for lambda; pinned links reject lambda != 0.
        assert_eq!(cik_logprior(&beta, 0.0, &b, &link, None), f64::NEG_INFINITY);
        assert_eq!(
            cik_logprior(&beta, 0.5, &b, &SkewLink::logit(), None),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn scale_map_identity() {
        let b = GlmData::bliss();
        let link = SkewLink::skew_logistic();
        let t = sl_table();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let v: f64 = (rng.random::<f64>() * 4.0 - 2.0).exp();
            let beta = [
                rng.random::<f64>() * 20.0 - 40.0,
                rng.random::<f64>() * 10.0 + 18.0,
            ];
            let lambda = rng.random::<f64>() * 6.0 - 3.0;
            let bv = b.scale_columns(&[v]).unwrap();
            let lhs = cik_logprior(&[beta[0], beta[1] / v], lambda, &bv, &link, Some(&t));
            let rhs = cik_logprior(&beta, lambda, &b, &link, Some(&t)) + v.ln();
            assert!((lhs - rhs).abs() < 1e-8, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn links_by_name() {
        for n in ["logit", "probit", "skew-logistic", "skew-normal"] {
            assert_eq!(SkewLink::from_name(n).unwrap().name(), n);
        }
        assert!(SkewLink::from_name("cloglog").is_err());
        assert!(
            GlmModel::new(GlmData::bliss(), SkewLink::skew_normal(), Some(sl_table())).is_err()
        );
        assert!(GlmModel::new(GlmData::bliss(), SkewLink::skew_normal(), None).is_err());
    }

    #[test]
    fn predictions_of_a_point_mass() {
        let b = GlmData::bliss();
        let post = GlmPosterior {
            link: SkewLink::skew_logistic(),
            data: b.clone(),
            draws: PosteriorDraws {
                draws: vec![vec![0.0, 0.0, 0.0]; 5],
                param_names: vec!["beta0".into(), "beta1".into(), "lambda".into()],
                acceptance_rate: 0.0,
                burn_in: 0,
                thinning: 1,
                seed: 0,
            },
            predicted_prob: vec![],
            mle: GlmMle {
                params: vec![],
                max_loglik: 0.0,
                aic: 0.0,
                bic: 0.0,
                with_constants: false,
            },
            log_marginal: None,
        };
        let mut other = b.clone();
        other.n[0] += 2;
        let pred = glm_predict(&post, &other).unwrap();
        for (p, &n) in pred.iter().zip(&other.n) {
            assert!((p - n as f64 / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn compare_requires_same_data() {
        let m = GlmModel::new(GlmData::bliss(), SkewLink::logit(), None).unwrap();
        let mut opts = GlmFitOptions::new(McmcConfig {
            total_iterations: 4000,
            burn_in: 1000,
            thinning: 3,
            initial_point: None,
            adaptation: true,
            seed: 1,
        });
        opts.importance_draws = 2000;
        let a = glm_fit(&m, &opts).unwrap();
        let rows = glm_compare(&[a.clone(), a.clone()], "logit").unwrap();
        assert_eq!(rows[0].bayes_factor, Some(1.0));
        let mut b = a.clone();
        b.data.y[0] += 1;
        assert!(glm_compare(&[a, b], "logit").is_err());
    }
}
