//! Symmetric base densities, skewing CDFs and the skew-symmetric family
//!
//! ```text
//! s(y; mu, sigma, lambda) = (2 / sigma) f(z) G(lambda z),   z = (y - mu) / sigma.
//! ```

use crate::error::{Error, Result};
use crate::optimize::brent_root;
use crate::quadrature::{integrate, integrate_to_inf, QuadOptions};
use crate::special::{
    ln_gamma_fn, ln_sigmoid, logistic_ln_pdf, logistic_pdf, norm_cdf, norm_ln_cdf, norm_ln_pdf,
    norm_pdf, sigmoid, student_t_cdf, student_t_ln_cdf, student_t_ln_pdf,
};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_ur;
use std::f64::consts::{LN_2, PI};
use std::fmt;

/// Quadrature tolerances for CDFs and interval probabilities.
pub(crate) const CDF_QUAD: QuadOptions = QuadOptions {
    abs_tol: 1e-15,
    rel_tol: 1e-12,
    max_intervals: 2000,
};

/// A symmetric, unimodal density on the real line with mode 0.
///
/// The exponential-power density is parameterized so that `delta = 2` is the
/// standard normal: `f(x) ∝ exp(-|x|^delta / delta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ShapedRepr<BaseKind>", into = "ShapedRepr<BaseKind>")]
pub enum SymmetricBase {
    Normal,
    Logistic,
    StudentT { nu: f64 },
    ExpPower { delta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseKind {
    Normal,
    Logistic,
    StudentT,
    ExpPower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkewKind {
    #[serde(alias = "normal")]
    NormalCdf,
    #[serde(alias = "logistic")]
    LogisticCdf,
    #[serde(alias = "student_t")]
    StudentTCdf,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapedRepr<K> {
    kind: K,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shape: Option<f64>,
}

fn positive_shape(kind: &str, shape: Option<f64>) -> Result<f64> {
    match shape {
        Some(s) if s.is_finite() && s > 0.0 => Ok(s),
        Some(s) => Err(Error::domain(format!(
            "{kind} shape must be a positive finite number, got {s}"
        ))),
        None => Err(Error::domain(format!("{kind} requires a shape parameter"))),
    }
}

impl TryFrom<ShapedRepr<BaseKind>> for SymmetricBase {
    type Error = Error;
    fn try_from(r: ShapedRepr<BaseKind>) -> Result<Self> {
        match r.kind {
            BaseKind::Normal => Ok(SymmetricBase::Normal),
            BaseKind::Logistic => Ok(SymmetricBase::Logistic),
            BaseKind::StudentT => SymmetricBase::student_t(positive_shape("student_t", r.shape)?),
            BaseKind::ExpPower => SymmetricBase::exp_power(positive_shape("exp_power", r.shape)?),
        }
    }
}

impl From<SymmetricBase> for ShapedRepr<BaseKind> {
    fn from(b: SymmetricBase) -> Self {
        let (kind, shape) = match b {
            SymmetricBase::Normal => (BaseKind::Normal, None),
            SymmetricBase::Logistic => (BaseKind::Logistic, None),
            SymmetricBase::StudentT { nu } => (BaseKind::StudentT, Some(nu)),
            SymmetricBase::ExpPower { delta } => (BaseKind::ExpPower, Some(delta)),
        };
        ShapedRepr { kind, shape }
    }
}

impl SymmetricBase {
    pub fn student_t(nu: f64) -> Result<Self> {
        positive_shape("student_t", Some(nu)).map(|nu| SymmetricBase::StudentT { nu })
    }

    pub fn exp_power(delta: f64) -> Result<Self> {
        positive_shape("exp_power", Some(delta)).map(|delta| SymmetricBase::ExpPower { delta })
    }

    pub fn kind(&self) -> BaseKind {
        match self {
            SymmetricBase::Normal => BaseKind::Normal,
            SymmetricBase::Logistic => BaseKind::Logistic,
            SymmetricBase::StudentT { .. } => BaseKind::StudentT,
            SymmetricBase::ExpPower { .. } => BaseKind::ExpPower,
        }
    }

    pub fn shape(&self) -> Option<f64> {
        match *self {
            SymmetricBase::StudentT { nu } => Some(nu),
            SymmetricBase::ExpPower { delta } => Some(delta),
            _ => None,
        }
    }

    fn exp_power_ln_norm(delta: f64) -> f64 {
        (1.0 - 1.0 / delta) * delta.ln() - LN_2 - ln_gamma_fn(1.0 / delta)
    }

    #[inline]
    pub fn ln_pdf(&self, x: f64) -> f64 {
        match *self {
            SymmetricBase::Normal => norm_ln_pdf(x),
            SymmetricBase::Logistic => logistic_ln_pdf(x),
            SymmetricBase::StudentT { nu } => student_t_ln_pdf(x, nu),
            SymmetricBase::ExpPower { delta } => {
                Self::exp_power_ln_norm(delta) - x.abs().powf(delta) / delta
            }
        }
    }

    #[inline]
    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            SymmetricBase::Normal => norm_pdf(x),
            SymmetricBase::Logistic => logistic_pdf(x),
            _ => self.ln_pdf(x).exp(),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            SymmetricBase::Normal => norm_cdf(x),
            SymmetricBase::Logistic => sigmoid(x),
            SymmetricBase::StudentT { nu } => student_t_cdf(x, nu),
            SymmetricBase::ExpPower { delta } => {
                let r = x.abs().powf(delta) / delta;
                let upper = if r == 0.0 {
                    0.5
                } else if r.is_infinite() {
                    0.0
                } else {
                    0.5 * gamma_ur(1.0 / delta, r)
                };
                if x <= 0.0 {
                    upper
                } else {
                    1.0 - upper
                }
            }
        }
    }

    /// `f'(x) / f(x)`.
    pub fn score(&self, x: f64) -> f64 {
        match *self {
            SymmetricBase::Normal => -x,
            SymmetricBase::Logistic => -(0.5 * x).tanh(),
            SymmetricBase::StudentT { nu } => -(nu + 1.0) * x / (nu + x * x),
            SymmetricBase::ExpPower { delta } => -x.signum() * x.abs().powf(delta - 1.0),
        }
    }

    /// The bound `M = sup f = f(0)`.
    pub fn density_bound(&self) -> f64 {
        self.pdf(0.0)
    }

    /// `E[X^2]` under `f`, `+inf` when it does not exist.
    pub fn second_moment(&self) -> f64 {
        match *self {
            SymmetricBase::Normal => 1.0,
            SymmetricBase::Logistic => PI * PI / 3.0,
            SymmetricBase::StudentT { nu } if nu > 2.0 => nu / (nu - 2.0),
            SymmetricBase::StudentT { .. } => f64::INFINITY,
            SymmetricBase::ExpPower { delta } => {
                ((2.0 / delta) * delta.ln() + ln_gamma_fn(3.0 / delta) - ln_gamma_fn(1.0 / delta))
                    .exp()
            }
        }
    }

    /// Whether `f` is claimed to be a scale mixture of normals. Exponential
    /// power densities qualify for `1 <= delta <= 2` only.
    pub fn is_scale_mixture_of_normals(&self) -> bool {
        match *self {
            SymmetricBase::Normal | SymmetricBase::Logistic | SymmetricBase::StudentT { .. } => {
                true
            }
            SymmetricBase::ExpPower { delta } => (1.0..=2.0).contains(&delta),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            SymmetricBase::Normal => rng.sample(StandardNormal),
            SymmetricBase::Logistic => {
                let u: f64 = rng.random();
                // u in [0, 1); u = 0 maps to -inf, resample.
                if u == 0.0 {
                    return self.sample(rng);
                }
                (u / (1.0 - u)).ln()
            }
            SymmetricBase::StudentT { nu } => StudentT::new(nu).expect("validated nu").sample(rng),
            SymmetricBase::ExpPower { delta } => {
                let g: f64 = Gamma::new(1.0 / delta, 1.0)
                    .expect("validated delta")
                    .sample(rng);
                let r = (delta * g).powf(1.0 / delta);
                if rng.random::<bool>() {
                    r
                } else {
                    -r
                }
            }
        }
    }
}

impl fmt::Display for SymmetricBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymmetricBase::Normal => write!(f, "normal"),
            SymmetricBase::Logistic => write!(f, "logistic"),
            SymmetricBase::StudentT { nu } => write!(f, "student_t(nu={nu})"),
            SymmetricBase::ExpPower { delta } => write!(f, "exp_power(delta={delta})"),
        }
    }
}

/// The skewing CDF `G` with symmetric density `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ShapedRepr<SkewKind>", into = "ShapedRepr<SkewKind>")]
pub enum SkewingCdf {
    Normal,
    Logistic,
    StudentT { nu: f64 },
}

impl TryFrom<ShapedRepr<SkewKind>> for SkewingCdf {
    type Error = Error;
    fn try_from(r: ShapedRepr<SkewKind>) -> Result<Self> {
        match r.kind {
            SkewKind::NormalCdf => Ok(SkewingCdf::Normal),
            SkewKind::LogisticCdf => Ok(SkewingCdf::Logistic),
            SkewKind::StudentTCdf => Ok(SkewingCdf::StudentT {
                nu: positive_shape("student_t_cdf", r.shape)?,
            }),
        }
    }
}

impl From<SkewingCdf> for ShapedRepr<SkewKind> {
    fn from(s: SkewingCdf) -> Self {
        let (kind, shape) = match s {
            SkewingCdf::Normal => (SkewKind::NormalCdf, None),
            SkewingCdf::Logistic => (SkewKind::LogisticCdf, None),
            SkewingCdf::StudentT { nu } => (SkewKind::StudentTCdf, Some(nu)),
        };
        ShapedRepr { kind, shape }
    }
}

impl SkewingCdf {
    #[inline]
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            SkewingCdf::Normal => norm_cdf(x),
            SkewingCdf::Logistic => sigmoid(x),
            SkewingCdf::StudentT { nu } => student_t_cdf(x, nu),
        }
    }

    #[inline]
    pub fn ln_cdf(&self, x: f64) -> f64 {
        match *self {
            SkewingCdf::Normal => norm_ln_cdf(x),
            SkewingCdf::Logistic => ln_sigmoid(x),
            SkewingCdf::StudentT { nu } => student_t_ln_cdf(x, nu),
        }
    }

    #[inline]
    pub fn ln_pdf(&self, x: f64) -> f64 {
        match *self {
            SkewingCdf::Normal => norm_ln_pdf(x),
            SkewingCdf::Logistic => logistic_ln_pdf(x),
            SkewingCdf::StudentT { nu } => student_t_ln_pdf(x, nu),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    /// `ln[g(u)^2 / (G(u) (1 - G(u)))]`, the weight inside the Fisher
    /// information of the skewness parameter.
    ///
    /// For the logistic CDF `g = G (1 - G)`, so the weight is `g(u)` itself.
    pub fn ln_info_weight(&self, u: f64) -> f64 {
        match self {
            SkewingCdf::Logistic => logistic_ln_pdf(u),
            _ => self.ln_info_weight_generic(u),
        }
    }

    pub(crate) fn ln_info_weight_generic(&self, u: f64) -> f64 {
        2.0 * self.ln_pdf(u) - self.ln_cdf(u) - self.ln_cdf(-u)
    }

    /// `g(u) / G(u)`, the derivative of `ln G`.
    pub fn inverse_mills(&self, u: f64) -> f64 {
        (self.ln_pdf(u) - self.ln_cdf(u)).exp()
    }
}

impl fmt::Display for SkewingCdf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkewingCdf::Normal => write!(f, "normal_cdf"),
            SkewingCdf::Logistic => write!(f, "logistic_cdf"),
            SkewingCdf::StudentT { nu } => write!(f, "student_t_cdf(nu={nu})"),
        }
    }
}

/// A `(f, G)` pair: the skew-symmetric family without location, scale and
/// skewness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkewFamily {
    pub base: SymmetricBase,
    pub skew: SkewingCdf,
}

impl SkewFamily {
    pub fn new(base: SymmetricBase, skew: SkewingCdf) -> Self {
        SkewFamily { base, skew }
    }

    pub fn skew_normal() -> Self {
        SkewFamily::new(SymmetricBase::Normal, SkewingCdf::Normal)
    }

    pub fn skew_logistic() -> Self {
        SkewFamily::new(SymmetricBase::Logistic, SkewingCdf::Logistic)
    }

    /// Parses `skew-normal` and `skew-logistic`.
    pub fn from_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().replace('_', "-").as_str() {
            "skew-normal" | "sn" => Ok(Self::skew_normal()),
            "skew-logistic" | "sl" => Ok(Self::skew_logistic()),
            other => Err(Error::domain(format!(
                "unknown model family '{other}' (expected skew-normal or skew-logistic)"
            ))),
        }
    }

    pub fn name(&self) -> String {
        if *self == Self::skew_normal() {
            "skew-normal".into()
        } else if *self == Self::skew_logistic() {
            "skew-logistic".into()
        } else {
            format!("skew[{}, {}]", self.base, self.skew)
        }
    }

    /// Standardized density `2 f(z) G(lambda z)`.
    #[inline]
    pub fn std_density(&self, z: f64, lambda: f64) -> f64 {
        2.0 * self.base.pdf(z) * self.skew.cdf(lambda * z)
    }

    /// `ln[2 f(z) G(lambda z)]`.
    #[inline]
    pub fn std_ln_density(&self, z: f64, lambda: f64) -> f64 {
        if let (SymmetricBase::Logistic, SkewingCdf::Logistic) = (self.base, self.skew) {
            // -|z| - 2 ln(1 + e^{-|z|}) + min(u, 0) - ln(1 + e^{-|u|}), one log.
            let a = z.abs();
            let u = lambda * z;
            let e1 = 1.0 + (-a).exp();
            let e2 = 1.0 + (-u.abs()).exp();
            return LN_2 - a + u.min(0.0) - (e1 * e1 * e2).ln();
        }
        LN_2 + self.base.ln_pdf(z) + self.skew.ln_cdf(lambda * z)
    }

    /// Standardized CDF and survival function `(P(Z <= z), P(Z > z))`, each
    /// computed directly so that both tails keep relative accuracy.
    pub fn std_cdf_pair(&self, z: f64, lambda: f64) -> Result<(f64, f64)> {
        if z.is_nan() {
            return Err(Error::domain("cdf argument is NaN"));
        }
        if z == f64::INFINITY {
            return Ok((1.0, 0.0));
        }
        if z == f64::NEG_INFINITY {
            return Ok((0.0, 1.0));
        }
        if lambda == 0.0 {
            return Ok((self.base.cdf(z), self.base.cdf(-z)));
        }
        if z <= 0.0 {
            let lower = integrate_to_inf(|t| self.std_density(z - t, lambda), 0.0, CDF_QUAD)?.value;
            Ok((lower, 1.0 - lower))
        } else {
            let upper = integrate_to_inf(|t| self.std_density(z + t, lambda), 0.0, CDF_QUAD)?.value;
            Ok((1.0 - upper, upper))
        }
    }

    /// Probability of the standardized interval `(za, zb]`.
    pub fn std_interval_mass(&self, za: f64, zb: f64, lambda: f64) -> Result<f64> {
        if za >= zb {
            return Ok(0.0);
        }
        match (za.is_finite(), zb.is_finite()) {
            (false, false) => Ok(1.0),
            (false, true) => Ok(self.std_cdf_pair(zb, lambda)?.0),
            (true, false) => Ok(self.std_cdf_pair(za, lambda)?.1),
            (true, true) => {
                if lambda == 0.0 && (zb <= 0.0 || za >= 0.0) {
                    // Same-tail differences of a closed-form CDF.
                    return Ok(if zb <= 0.0 {
                        self.base.cdf(zb) - self.base.cdf(za)
                    } else {
                        self.base.cdf(-za) - self.base.cdf(-zb)
                    });
                }
                Ok(integrate(|t| self.std_density(t, lambda), za, zb, CDF_QUAD)?.value)
            }
        }
    }
}

/// A skew-symmetric distribution with location `mu`, scale `sigma` and
/// skewness `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelRepr")]
pub struct SkewSymmetric {
    pub base: SymmetricBase,
    pub skew: SkewingCdf,
    pub mu: f64,
    pub sigma: f64,
    pub lambda: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelRepr {
    base: SymmetricBase,
    skew: SkewingCdf,
    #[serde(default)]
    mu: f64,
    #[serde(default = "one")]
    sigma: f64,
    #[serde(default)]
    lambda: f64,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<ModelRepr> for SkewSymmetric {
    type Error = Error;
    fn try_from(r: ModelRepr) -> Result<Self> {
        SkewSymmetric::new(r.mu, r.sigma, r.lambda, SkewFamily::new(r.base, r.skew))
    }
}

impl SkewSymmetric {
    pub fn new(mu: f64, sigma: f64, lambda: f64, family: SkewFamily) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::domain(format!(
                "sigma must be positive and finite, got {sigma}"
            )));
        }
        if !mu.is_finite() || !lambda.is_finite() {
            return Err(Error::domain(format!(
                "mu and lambda must be finite, got mu={mu}, lambda={lambda}"
            )));
        }
        Ok(SkewSymmetric {
            base: family.base,
            skew: family.skew,
            mu,
            sigma,
            lambda,
        })
    }

    pub fn family(&self) -> SkewFamily {
        SkewFamily::new(self.base, self.skew)
    }

    fn standardize(&self, y: f64) -> f64 {
        (y - self.mu) / self.sigma
    }

    pub fn density(&self, y: f64) -> Result<f64> {
        if !y.is_finite() {
            return Err(Error::domain(format!(
                "density requires a finite argument, got {y}"
            )));
        }
        let z = self.standardize(y);
        Ok(self.family().std_density(z, self.lambda) / self.sigma)
    }

    /// `ln 2 - ln sigma + ln f(z) + ln G(lambda z)`.
    pub fn ln_density(&self, y: f64) -> Result<f64> {
        if !y.is_finite() {
            return Err(Error::domain(format!(
                "density requires a finite argument, got {y}"
            )));
        }
        Ok(self
            .family()
            .std_ln_density(self.standardize(y), self.lambda)
            - self.sigma.ln())
    }

    pub fn cdf(&self, y: f64) -> Result<f64> {
        Ok(self
            .family()
            .std_cdf_pair(self.standardize(y), self.lambda)?
            .0)
    }

    /// `P(Y > y)`.
    pub fn sf(&self, y: f64) -> Result<f64> {
        Ok(self
            .family()
            .std_cdf_pair(self.standardize(y), self.lambda)?
            .1)
    }

    /// `P(a < Y <= b)`; either end may be infinite.
    pub fn interval_mass(&self, a: f64, b: f64) -> Result<f64> {
        if a.is_nan() || b.is_nan() {
            return Err(Error::domain("interval end is NaN"));
        }
        self.family()
            .std_interval_mass(self.standardize(a), self.standardize(b), self.lambda)
    }

    /// Inverse CDF by bracketed root search, `|cdf(q) - p| <= 1e-9`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!(
                "quantile level must lie in (0, 1), got {p}"
            )));
        }
        let fam = self.family();
        let lambda = self.lambda;
        let target = |z: f64| -> Result<f64> {
            let (lo, hi) = fam.std_cdf_pair(z, lambda)?;
            // Compare in the tail where the value is small to keep precision.
            Ok(if p <= 0.5 { lo - p } else { (1.0 - p) - hi })
        };
        let (mut a, mut b) = (-1.0, 1.0);
        while target(a)? > 0.0 {
            b = a;
            a *= 2.0;
            if a < -1e300 {
                return Err(Error::Numerical("quantile bracket search diverged".into()));
            }
        }
        while target(b)? < 0.0 {
            a = b;
            b *= 2.0;
            if b > 1e300 {
                return Err(Error::Numerical("quantile bracket search diverged".into()));
            }
        }
        let z = brent_root(target, a, b, 1e-13, 200)?;
        Ok(self.mu + self.sigma * z)
    }

    /// Draws `n` i.i.d. values: `X ~ f` is kept with probability `G(lambda X)`
    /// and reflected otherwise.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n)
            .map(|_| {
                let x = self.base.sample(rng);
                let u: f64 = rng.random();
                let z = if u < self.skew.cdf(self.lambda * x) {
                    x
                } else {
                    -x
                };
                self.mu + self.sigma * z
            })
            .collect()
    }
}

/// Closed-form skew-logistic density
/// `(1 / (4 sigma)) sech^2(z / 2) (1 + tanh(lambda z / 2))`, `z = (y - mu) / sigma`.
pub fn skew_logistic_density(mu: f64, sigma: f64, lambda: f64, y: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::domain(format!(
            "sigma must be positive and finite, got {sigma}"
        )));
    }
    if !y.is_finite() {
        return Err(Error::domain(format!(
            "density requires a finite argument, got {y}"
        )));
    }
    let z = (y - mu) / sigma;
    let sech = 1.0 / (0.5 * z).cosh();
    // 1 + tanh(u) = 2 e^{2u} / (1 + e^{2u}) avoids cancellation for u << 0.
    let u = 0.5 * lambda * z;
    let one_plus_tanh = if u >= 0.0 {
        1.0 + u.tanh()
    } else {
        let e = (2.0 * u).exp();
        2.0 * e / (1.0 + e)
    };
    Ok(sech * sech * one_plus_tanh / (4.0 * sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_real_line;
    use crate::stats::{ks_critical, ks_statistic, skewness};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn skew_logistic_log_density_shortcut() {
        let fam = SkewFamily::skew_logistic();
        for &l in &[-40.0, -3.0, -0.2, 0.0, 0.7, 5.0, 300.0] {
            for i in -120..=120 {
                let z = i as f64 * 0.5;
                let generic = LN_2 + fam.base.ln_pdf(z) + fam.skew.ln_cdf(l * z);
                let fast = fam.std_ln_density(z, l);
                assert!(
                    (fast - generic).abs() < 1e-13 * (1.0 + generic.abs()),
                    "z={z} l={l}: {fast} vs {generic}"
                );
            }
        }
    }

    fn all_bases() -> Vec<SymmetricBase> {
        vec![
            SymmetricBase::Normal,
            SymmetricBase::Logistic,
            SymmetricBase::StudentT { nu: 5.0 },
            SymmetricBase::ExpPower { delta: 1.5 },
        ]
    }

    #[test]
    fn base_invariants_on_grid() {
        for b in all_bases().into_iter().chain([
            SymmetricBase::StudentT { nu: 1.0 },
            SymmetricBase::ExpPower { delta: 3.0 },
        ]) {
            let m = b.density_bound();
            let mut prev = f64::INFINITY;
            for i in 0..=400 {
                let x = i as f64 * 0.05;
                let v = b.pdf(x);
                let lv = b.ln_pdf(x);
                assert_eq!(v, b.pdf(-x), "{b} not symmetric at {x}");
                assert!(lv.is_finite() && v <= m, "{b} bound violated at {x}");
                assert!(lv <= prev, "{b} not unimodal at {x}");
                prev = lv;
            }
            let total = integrate_real_line(|x| b.pdf(x), QuadOptions::default())
                .unwrap()
                .value;
            assert!((total - 1.0).abs() < 1e-9, "{b} integrates to {total}");
        }
    }

    #[test]
    fn second_moments_match_quadrature() {
        for b in all_bases() {
            let q = integrate_real_line(|x| x * x * b.pdf(x), QuadOptions::default())
                .unwrap()
                .value;
            assert!(
                (q - b.second_moment()).abs() < 1e-8,
                "{b}: {q} vs {}",
                b.second_moment()
            );
        }
        assert!(SymmetricBase::StudentT { nu: 2.0 }
            .second_moment()
            .is_infinite());
        assert!(SymmetricBase::ExpPower { delta: 2.0 }.second_moment() - 1.0 < 1e-14);
    }

    #[test]
    fn scale_mixture_flags() {
        assert!(SymmetricBase::Normal.is_scale_mixture_of_normals());
        assert!(SymmetricBase::StudentT { nu: 0.7 }.is_scale_mixture_of_normals());
        assert!(SymmetricBase::ExpPower { delta: 1.0 }.is_scale_mixture_of_normals());
        assert!(SymmetricBase::ExpPower { delta: 2.0 }.is_scale_mixture_of_normals());
        assert!(!SymmetricBase::ExpPower { delta: 2.5 }.is_scale_mixture_of_normals());
    }

    #[test]
    fn base_cdf_matches_density() {
        for b in all_bases() {
            for &x in &[-3.0, -0.4, 0.0, 1.1, 6.0] {
                let q = crate::quadrature::integrate_to_inf(
                    |t| b.pdf(x - t),
                    0.0,
                    QuadOptions::default(),
                )
                .unwrap()
                .value;
                assert!(
                    (q - b.cdf(x)).abs() < 1e-10,
                    "{b} at {x}: {q} vs {}",
                    b.cdf(x)
                );
            }
        }
    }

    #[test]
    fn skewing_cdf_invariants() {
        for g in [
            SkewingCdf::Normal,
            SkewingCdf::Logistic,
            SkewingCdf::StudentT { nu: 3.0 },
        ] {
            let mut prev = 0.0;
            for i in -200..=200 {
                let x = i as f64 * 0.1;
                assert!((g.cdf(-x) - (1.0 - g.cdf(x))).abs() < 1e-14);
                assert!((g.pdf(x) - g.pdf(-x)).abs() < 1e-15);
                assert!(g.cdf(x) >= prev);
                prev = g.cdf(x);
            }
            assert_eq!(g.cdf(f64::NEG_INFINITY), 0.0);
            assert_eq!(g.cdf(f64::INFINITY), 1.0);
        }
    }

    #[test]
    fn logistic_info_weight_shortcut_matches_generic() {
        for i in -300..=300 {
            let u = i as f64 * 0.1;
            let a = SkewingCdf::Logistic.ln_info_weight(u);
            let b = SkewingCdf::Logistic.ln_info_weight_generic(u);
            assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()), "u={u}: {a} vs {b}");
        }
    }

    #[test]
    fn density_examples() {
        let sn = SkewSymmetric::new(0.0, 1.0, 3.7, SkewFamily::skew_normal()).unwrap();
        assert!((sn.density(0.0).unwrap() - 0.398_942_280_401_432_7).abs() < 1e-15);
        let sl = SkewSymmetric::new(0.0, 1.0, -2.0, SkewFamily::skew_logistic()).unwrap();
        assert_eq!(sl.density(0.0).unwrap(), 0.25);

        // Closed form (1/4) sech^2(1/2) (1 + tanh(1)) evaluated independently.
        let sech = 1.0 / 0.5f64.cosh();
        let closed = 0.25 * sech * sech * (1.0 + 1.0f64.tanh());
        let sl2 = SkewSymmetric::new(0.0, 1.0, 2.0, SkewFamily::skew_logistic()).unwrap();
        let product =
            2.0 * (-1.0f64).exp() / (1.0 + (-1.0f64).exp()).powi(2) / (1.0 + (-2.0f64).exp());
        assert!((sl2.density(1.0).unwrap() - closed).abs() < 1e-15);
        assert!((product - closed).abs() < 1e-15);

        assert!(sn.density(f64::NAN).is_err());
        assert!(sn.ln_density(f64::INFINITY).is_err());
    }

    #[test]
    fn ln_density_is_stable_far_in_the_tail() {
        let sn = SkewSymmetric::new(0.0, 1.0, 10.0, SkewFamily::skew_normal()).unwrap();
        let v = sn.ln_density(-5.0).unwrap();
        // ln 2 + ln phi(-5) + ln Phi(-50)
        let expect = LN_2 + norm_ln_pdf(-5.0) + norm_ln_cdf(-50.0);
        assert!(v.is_finite() && (v - expect).abs() < 1e-12);
        assert_eq!(sn.density(-5.0).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_skew_logistic_agrees_with_generic() {
        let m = SkewSymmetric::new(1.0, 2.0, 3.0, SkewFamily::skew_logistic()).unwrap();
        let a = skew_logistic_density(1.0, 2.0, 3.0, 2.0).unwrap();
        let b = m.density(2.0).unwrap();
        assert!(((a - b) / b).abs() < 1e-12);
        for i in 0..100 {
            let y = -15.0 + 0.3 * i as f64;
            let a = skew_logistic_density(1.0, 2.0, 3.0, y).unwrap();
            let b = m.density(y).unwrap();
            assert!(((a - b) / b).abs() < 1e-12, "y={y}: {a} vs {b}");
        }
        assert!(skew_logistic_density(0.0, 0.0, 1.0, 0.0).is_err());
        assert_eq!(skew_logistic_density(0.0, 1.0, 0.0, 0.0).unwrap(), 0.25);
        let r1 = skew_logistic_density(0.0, 1.0, 1.7, 0.9).unwrap();
        let r2 = skew_logistic_density(0.0, 1.0, -1.7, -0.9).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn reflection_identity() {
        for fam in [SkewFamily::skew_normal(), SkewFamily::skew_logistic()] {
            let a = SkewSymmetric::new(0.0, 1.5, 2.5, fam).unwrap();
            let b = SkewSymmetric::new(0.0, 1.5, -2.5, fam).unwrap();
            let c = SkewSymmetric::new(0.5, 1.5, 2.5, fam).unwrap();
            let d = SkewSymmetric::new(0.5, 1.5, -2.5, fam).unwrap();
            for i in 0..50 {
                let y = -4.0 + 0.17 * i as f64;
                assert_eq!(a.density(y).unwrap(), b.density(-y).unwrap(), "{y}");
                // 2 mu - y rounds differently from mu - (y - mu).
                let dc = c.density(y).unwrap();
                let dd = d.density(2.0 * 0.5 - y).unwrap();
                assert!((dc - dd).abs() <= 1e-13 * dc, "{y}");
            }
        }
    }

    #[test]
    fn normalization_grid() {
        let bases = all_bases();
        for base in bases {
            for skew in [SkewingCdf::Normal, SkewingCdf::Logistic] {
                for &lambda in &[0.0, 0.5, -0.5, 10.0, -10.0] {
                    let m =
                        SkewSymmetric::new(-1.0, 0.7, lambda, SkewFamily::new(base, skew)).unwrap();
                    let total =
                        integrate_real_line(|y| m.density(y).unwrap(), QuadOptions::default())
                            .unwrap()
                            .value;
                    assert!(
                        (total - 1.0).abs() < 1e-8,
                        "{base}/{skew} lambda={lambda}: {total}"
                    );
                    assert!((m.cdf(f64::INFINITY).unwrap() - 1.0).abs() < 1e-8);
                    assert!((m.cdf(1e6).unwrap() - 1.0).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn cdf_examples() {
        let sl = SkewSymmetric::new(2.0, 3.0, 0.0, SkewFamily::skew_logistic()).unwrap();
        assert!((sl.cdf(2.0).unwrap() - 0.5).abs() < 1e-15);
        let t = SkewSymmetric::new(
            0.0,
            1.0,
            0.0,
            SkewFamily::new(SymmetricBase::StudentT { nu: 3.0 }, SkewingCdf::Normal),
        )
        .unwrap();
        assert!((t.cdf(0.0).unwrap() - 0.5).abs() < 1e-15);
        for &lambda in &[-4.0, -0.3, 0.8, 5.0] {
            let sn = SkewSymmetric::new(0.0, 1.0, lambda, SkewFamily::skew_normal()).unwrap();
            // Oracle: fixed high-resolution composite Simpson on [-12, 0]
            // with compensated summation.
            let n = 100_000;
            let h = 12.0 / n as f64;
            let f = |x: f64| 2.0 * norm_pdf(x) * norm_cdf(lambda * x);
            let (mut s, mut comp) = (f(-12.0) + f(0.0), 0.0);
            for i in 1..n {
                let x = -12.0 + i as f64 * h;
                let term = if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) } - comp;
                let t = s + term;
                comp = (t - s) - term;
                s = t;
            }
            let oracle = s * h / 3.0;
            let closed = 0.5 - lambda.atan() / PI;
            assert!((oracle - closed).abs() < 1e-12);
            assert!((sn.cdf(0.0).unwrap() - oracle).abs() < 1e-11);
        }
    }

    #[test]
    fn cdf_is_monotone_and_tails_are_accurate() {
        let m = SkewSymmetric::new(0.0, 1.0, 3.0, SkewFamily::skew_normal()).unwrap();
        let mut prev = 0.0;
        for i in -80..=80 {
            let c = m.cdf(i as f64 * 0.1).unwrap();
            assert!(c >= prev);
            prev = c;
        }
        // Far lower tail keeps relative accuracy.
        let tiny = m.cdf(-3.0).unwrap();
        assert!(tiny > 0.0 && tiny < 1e-20);
        let direct = m.interval_mass(f64::NEG_INFINITY, -3.0).unwrap();
        assert!(((tiny - direct) / tiny).abs() < 1e-12);
        let mid = m.interval_mass(-0.5, 1.5).unwrap();
        let diff = m.cdf(1.5).unwrap() - m.cdf(-0.5).unwrap();
        assert!((mid - diff).abs() < 1e-12);
        assert_eq!(
            m.interval_mass(f64::NEG_INFINITY, f64::INFINITY).unwrap(),
            1.0
        );
    }

    #[test]
    fn quantile_round_trips() {
        for fam in [SkewFamily::skew_normal(), SkewFamily::skew_logistic()] {
            let m = SkewSymmetric::new(1.0, 2.0, 1.5, fam).unwrap();
            for &p in &[1e-6, 0.01, 0.5, 0.99, 1.0 - 1e-6] {
                let q = m.quantile(p).unwrap();
                let c = m.cdf(q).unwrap();
                assert!((c - p).abs() <= 1e-9, "{p}: {c}");
                let back = m.quantile(m.cdf(0.3).unwrap()).unwrap();
                assert!((back - 0.3).abs() < 1e-8);
            }
            assert!(m.quantile(0.0).is_err());
            assert!(m.quantile(1.0).is_err());
        }
        let sym = SkewSymmetric::new(3.0, 2.0, 0.0, SkewFamily::skew_logistic()).unwrap();
        assert!((sym.quantile(0.5).unwrap() - 3.0).abs() < 1e-12);
        let sl = SkewSymmetric::new(0.0, 1.0, 1.0, SkewFamily::skew_logistic()).unwrap();
        let med = sl.quantile(0.5).unwrap();
        assert!(med > 0.0);
        assert!((sl.cdf(med).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn sampler_law_and_skewness_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 20_000;
        for &lambda in &[0.0, 5.0] {
            let m = SkewSymmetric::new(0.0, 1.0, lambda, SkewFamily::skew_logistic()).unwrap();
            let xs = m.sample(n, &mut rng);
            let d = ks_statistic(&xs, |y| m.cdf(y).unwrap());
            assert!(d < ks_critical(n, 0.01), "lambda={lambda}: D={d}");
        }
        let pos = SkewSymmetric::new(0.0, 1.0, 2.0, SkewFamily::skew_normal())
            .unwrap()
            .sample(n, &mut rng);
        let neg = SkewSymmetric::new(0.0, 1.0, -2.0, SkewFamily::skew_normal())
            .unwrap()
            .sample(n, &mut rng);
        assert!(skewness(&pos) > 0.0 && skewness(&neg) < 0.0);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let json = r#"{"base":{"kind":"student_t","shape":4},"skew":{"kind":"logistic_cdf"},"mu":1,"sigma":2,"lambda":-1}"#;
        let m: SkewSymmetric = serde_json::from_str(json).unwrap();
        assert_eq!(m.base, SymmetricBase::StudentT { nu: 4.0 });
        let back: SkewSymmetric =
            serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
        let defaulted: SkewSymmetric =
            serde_json::from_str(r#"{"base":{"kind":"normal"},"skew":{"kind":"normal_cdf"}}"#)
                .unwrap();
        assert_eq!(
            (defaulted.mu, defaulted.sigma, defaulted.lambda),
            (0.0, 1.0, 0.0)
        );
        assert!(serde_json::from_str::<SkewSymmetric>(
            r#"{"base":{"kind":"normal"},"skew":{"kind":"normal_cdf"},"sigma":-1}"#
        )
        .is_err());
        assert!(serde_json::from_str::<SkewSymmetric>(
            r#"{"base":{"kind":"student_t"},"skew":{"kind":"normal_cdf"}}"#
        )
        .is_err());
        assert!(SkewFamily::from_name("skew-cauchy").is_err());
        assert_eq!(
            SkewFamily::from_name("skew-logistic").unwrap(),
            SkewFamily::skew_logistic()
        );
    }
}
