//! Fisher information of the skewness parameter and the Jeffreys prior of
//! `lambda`.
//!
//! With `(mu, sigma) = (0, 1)` the information is
//!
//! ```text
//! I(lambda) = 2 ∫_0^∞ x² f(x) g(λx)² / (G(λx) [1 - G(λx)]) dx
//! ```
//!
//! and `pi(lambda) ∝ sqrt(I(lambda))`. The prior is symmetric, has
//! `|lambda|^{-3/2}` tails and is proper whenever `I` is finite.

use crate::dist::{SkewFamily, SkewSymmetric, SkewingCdf, SymmetricBase};
use crate::error::{Error, Result};
use crate::optimize::golden_section;
use crate::quadrature::{integrate, integrate_real_line, integrate_to_inf, QuadOptions};
use crate::special::ln_gamma_fn;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const FISHER_QUAD: QuadOptions = QuadOptions {
    abs_tol: 1e-300,
    rel_tol: 1e-12,
    max_intervals: 4000,
};

/// Fisher information `I(lambda)` of the skewness parameter at `(mu, sigma) = (0, 1)`.
///
/// Returns `+inf` at `lambda = 0` when the base density has no second moment.
pub fn fisher_lambda(base: SymmetricBase, skew: SkewingCdf, lambda: f64) -> Result<f64> {
    if !lambda.is_finite() {
        return Err(Error::domain(format!(
            "lambda must be finite, got {lambda}"
        )));
    }
    let a = lambda.abs();
    if a == 0.0 && base.second_moment().is_infinite() {
        return Ok(f64::INFINITY);
    }
    let value = if a <= 1.0 {
        let integrand = |x: f64| {
            if x == 0.0 {
                return 0.0;
            }
            (2.0 * x.ln() + base.ln_pdf(x) + skew.ln_info_weight(a * x)).exp()
        };
        2.0 * integrate_to_inf(integrand, 0.0, FISHER_QUAD)?.value
    } else {
        // u = lambda x keeps the integrand's support of unit width.
        let integrand = |u: f64| {
            if u == 0.0 {
                return 0.0;
            }
            (2.0 * u.ln() + base.ln_pdf(u / a) + skew.ln_info_weight(u)).exp()
        };
        2.0 / (a * a * a) * integrate_to_inf(integrand, 0.0, FISHER_QUAD)?.value
    };
    Ok(value)
}

/// `I(lambda)` with the integral restricted to `[0, cutoff]`.
///
/// Finite for every cutoff; when the base has no second moment, the value
/// at `lambda = 0` grows without bound as the cutoff increases.
pub fn fisher_lambda_truncated(
    base: SymmetricBase,
    skew: SkewingCdf,
    lambda: f64,
    cutoff: f64,
) -> Result<f64> {
    if !lambda.is_finite() || !(cutoff > 0.0 && cutoff.is_finite()) {
        return Err(Error::domain(format!(
            "need finite lambda and a positive finite cutoff, got {lambda}, {cutoff}"
        )));
    }
    let a = lambda.abs();
    let integrand = |x: f64| {
        if x == 0.0 {
            return 0.0;
        }
        (2.0 * x.ln() + base.ln_pdf(x) + skew.ln_info_weight(a * x)).exp()
    };
    // Decade-wide pieces keep each quadrature well scaled.
    let mut total = 0.0;
    let mut lo = 0.0;
    let mut hi = cutoff.min(1.0);
    while lo < cutoff {
        total += integrate(integrand, lo, hi, FISHER_QUAD)?.value;
        lo = hi;
        hi = (hi * 10.0).min(cutoff);
    }
    Ok(2.0 * total)
}

/// Unnormalized Jeffreys prior `sqrt(I(lambda))`.
pub fn jeffreys_lambda(base: SymmetricBase, skew: SkewingCdf, lambda: f64) -> Result<f64> {
    let info = fisher_lambda(base, skew, lambda)?;
    if info.is_infinite() {
        return Err(Error::UndefinedAtZero);
    }
    Ok(info.sqrt())
}

/// Symmetric tabulation grid: `{0} ∪ ±[min_abs, max_abs]`, log-spaced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points_per_side: usize,
    pub min_abs: f64,
    pub max_abs: f64,
    pub include_zero: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            points_per_side: 400,
            min_abs: 1e-3,
            max_abs: 200.0,
            include_zero: true,
        }
    }
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<f64>> {
        if self.points_per_side < 2 || !(self.min_abs > 0.0 && self.max_abs > self.min_abs) {
            return Err(Error::domain(format!(
                "invalid grid specification {self:?}"
            )));
        }
        let (lo, hi) = (self.min_abs.ln(), self.max_abs.ln());
        let m = self.points_per_side;
        let mut pos: Vec<f64> = (0..m)
            .map(|i| (lo + (hi - lo) * i as f64 / (m - 1) as f64).exp())
            .collect();
        pos[0] = self.min_abs;
        pos[m - 1] = self.max_abs;
        let mut grid: Vec<f64> = pos.iter().rev().map(|x| -x).collect();
        if self.include_zero {
            grid.push(0.0);
        }
        grid.extend_from_slice(&pos);
        Ok(grid)
    }
}

/// Normalized, interpolated Jeffreys prior of `lambda` for one family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JeffreysTable {
    pub family: SkewFamily,
    pub lambda_grid: Vec<f64>,
    /// Unnormalized `sqrt(I(lambda))` on the grid.
    pub values: Vec<f64>,
    pub norm_constant: f64,
    /// Estimate of `lim lambda^3 I(lambda)`.
    pub tail_constant: f64,
    #[serde(skip)]
    interp: Option<LogLogInterp>,
}

/// Monotone cubic (PCHIP) interpolation of `ln pi` against `ln |lambda|` on
/// the positive half of the grid.
#[derive(Debug, Clone, PartialEq)]
struct LogLogInterp {
    zero_value: Option<f64>,
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
    /// Beyond the grid, `I(lambda) = (A + B / lambda^2) / lambda^3` with
    /// `(A, B)` fitted on the outer fifth of the grid.
    tail_a: f64,
    tail_b: f64,
}

fn pchip_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
    let mut d = vec![0.0; n];
    if n == 2 {
        d[0] = delta[0];
        d[1] = delta[0];
        return d;
    }
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    let edge = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let mut s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s * d0 <= 0.0 {
            s = 0.0;
        } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
            s = 3.0 * d0;
        }
        s
    };
    d[0] = edge(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = edge(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

impl LogLogInterp {
    fn new(grid: &[f64], values: &[f64]) -> Self {
        let mut zero_value = None;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (&l, &v) in grid.iter().zip(values) {
            if l == 0.0 {
                zero_value = Some(v.ln());
            } else if l > 0.0 {
                xs.push(l.ln());
                ys.push(v.ln());
            }
        }
        let slopes = pchip_slopes(&xs, &ys);
        let (tail_a, tail_b) = fit_tail(&xs, &ys);
        LogLogInterp {
            zero_value,
            xs,
            ys,
            slopes,
            tail_a,
            tail_b,
        }
    }

    /// `ln pi` beyond the last grid point; the log-slope tends to `-3/2`.
    fn ln_tail(&self, la: f64) -> f64 {
        let n = self.xs.len();
        let edge = self.xs[n - 1];
        let shape = |l: f64| (self.tail_a + self.tail_b * (-2.0 * l).exp()).ln();
        self.ys[n - 1] - 1.5 * (la - edge) + 0.5 * (shape(la) - shape(edge))
    }

    /// Interpolated `ln pi(|lambda|)` (unnormalized).
    fn ln_value(&self, lambda: f64) -> f64 {
        let a = lambda.abs();
        let n = self.xs.len();
        let first = self.xs[0].exp();
        if a < first {
            // Linear in lambda between 0 and the first grid point.
            return match self.zero_value {
                Some(z0) => {
                    let t = a / first;
                    ((1.0 - t) * z0.exp() + t * self.ys[0].exp()).ln()
                }
                None => self.ys[0],
            };
        }
        let la = a.ln();
        if la >= self.xs[n - 1] {
            return self.ln_tail(la);
        }
        let k = match self.xs.binary_search_by(|x| x.total_cmp(&la)) {
            Ok(i) => return self.ys[i],
            Err(i) => i - 1,
        };
        let h = self.xs[k + 1] - self.xs[k];
        let t = (la - self.xs[k]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[k]
            + h10 * h * self.slopes[k]
            + h01 * self.ys[k + 1]
            + h11 * h * self.slopes[k + 1]
    }

    fn edge(&self) -> f64 {
        self.xs[self.xs.len() - 1].exp()
    }
}

/// Least-squares fit of `lambda^3 I(lambda) = A + B lambda^{-2}` over the
/// outer fifth of the positive grid. Falls back to `B = 0` when the fit
/// would make the tail non-positive.
fn fit_tail(ln_grid: &[f64], ln_values: &[f64]) -> (f64, f64) {
    let n = ln_grid.len();
    let k = (n / 5).max(2);
    let pts: Vec<(f64, f64)> = (n - k..n)
        .map(|i| {
            (
                (-2.0 * ln_grid[i]).exp(),
                (3.0 * ln_grid[i] + 2.0 * ln_values[i]).exp(),
            )
        })
        .collect();
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let edge_x = (-2.0 * ln_grid[n - 1]).exp();
    if a > 0.0 && a + b * edge_x > 0.0 {
        (a, b)
    } else {
        (1.0, 0.0)
    }
}

fn check_symmetric_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 5 {
        return Err(Error::domain(
            "grid needs at least two positive points per side",
        ));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("grid must be strictly increasing"));
    }
    let n = grid.len();
    if (0..n).any(|i| grid[i] != -grid[n - 1 - i]) {
        return Err(Error::domain("grid must be symmetric about 0"));
    }
    Ok(())
}

impl JeffreysTable {
    pub fn build(family: SkewFamily, spec: &GridSpec) -> Result<Self> {
        Self::build_on_grid(family, spec.points()?)
    }

    pub fn build_on_grid(family: SkewFamily, grid: Vec<f64>) -> Result<Self> {
        check_symmetric_grid(&grid)?;
        let n = grid.len();
        // Evaluate the nonnegative half and mirror it.
        let half: Vec<f64> = grid[n / 2..]
            .iter()
            .map(|&l| jeffreys_lambda(family.base, family.skew, l))
            .collect::<Result<_>>()?;
        let mut values = Vec::with_capacity(n);
        let skip = if n % 2 == 1 { 1 } else { 0 };
        values.extend(half.iter().skip(skip).rev());
        values.extend_from_slice(&half);
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Numerical(
                "non-positive or non-finite prior value on the grid".into(),
            ));
        }

        let interp = LogLogInterp::new(&grid, &values);
        let norm_constant = 2.0 * positive_mass(&interp)?;

        let positive: Vec<(f64, f64)> = grid
            .iter()
            .zip(&values)
            .filter(|(l, _)| **l > 0.0)
            .map(|(l, v)| (*l, *v))
            .collect();
        let outer = &positive[positive.len() - (positive.len() / 5).max(1)..];
        let mut scaled: Vec<f64> = outer.iter().map(|(l, v)| l.powi(3) * v * v).collect();
        scaled.sort_by(f64::total_cmp);
        let tail_constant = scaled[scaled.len() / 2];

        Ok(JeffreysTable {
            family,
            lambda_grid: grid,
            values,
            norm_constant,
            tail_constant,
            interp: Some(interp),
        })
    }

    fn interp(&self) -> std::borrow::Cow<'_, LogLogInterp> {
        match &self.interp {
            Some(i) => std::borrow::Cow::Borrowed(i),
            None => std::borrow::Cow::Owned(LogLogInterp::new(&self.lambda_grid, &self.values)),
        }
    }

    /// Rebuilds the interpolant after deserialization.
    pub fn restore(mut self) -> Self {
        self.interp = Some(LogLogInterp::new(&self.lambda_grid, &self.values));
        self
    }

    /// Normalized log density of `lambda`. Beyond the grid the density
    /// follows `sqrt(A / lambda^3 + B / lambda^5)`, matched to the edge value.
    pub fn ln_density(&self, lambda: f64) -> f64 {
        self.interp().ln_value(lambda) - self.norm_constant.ln()
    }

    pub fn density(&self, lambda: f64) -> f64 {
        self.ln_density(lambda).exp()
    }

    /// Normalized values on the grid.
    pub fn normalized_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v / self.norm_constant).collect()
    }
}

/// `∫_0^∞` of the interpolated unnormalized prior.
fn positive_mass(interp: &LogLogInterp) -> Result<f64> {
    let opts = QuadOptions::with_tol(1e-300, 1e-13);
    let f = |l: f64| interp.ln_value(l).exp();
    let first = interp.xs[0].exp();
    let mut total = integrate(f, 0.0, first, opts)?.value;
    for w in interp.xs.windows(2) {
        total += integrate(f, w[0].exp(), w[1].exp(), opts)?.value;
    }
    let edge = interp.edge();
    // lambda = edge / s^2 turns the lambda^{-3/2} tail into a smooth integrand on (0, 1].
    let tail = |s: f64| {
        if s <= 0.0 {
            return 0.0;
        }
        let l = edge / (s * s);
        2.0 * edge / (s * s * s) * interp.ln_value(l).exp()
    };
    total += integrate(tail, 0.0, 1.0, opts)?.value;
    Ok(total)
}

/// Student-t approximation to the normalized Jeffreys prior, centered at 0
/// with half a degree of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudentTApprox {
    pub dof: f64,
    pub scale: f64,
    pub center: f64,
    /// Sup-norm distance to the normalized table on its grid.
    pub sup_distance: f64,
}

impl StudentTApprox {
    pub fn new(scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::domain(format!(
                "scale must be positive, got {scale}"
            )));
        }
        Ok(StudentTApprox {
            dof: 0.5,
            scale,
            center: 0.0,
            sup_distance: f64::NAN,
        })
    }

    pub fn ln_pdf(&self, lambda: f64) -> f64 {
        student_t_ln_pdf_scaled(lambda, self.dof, self.center, self.scale)
    }

    pub fn pdf(&self, lambda: f64) -> f64 {
        self.ln_pdf(lambda).exp()
    }
}

fn student_t_ln_pdf_scaled(x: f64, nu: f64, center: f64, scale: f64) -> f64 {
    let z = (x - center) / scale;
    ln_gamma_fn(0.5 * (nu + 1.0))
        - ln_gamma_fn(0.5 * nu)
        - 0.5 * (nu * PI).ln()
        - scale.ln()
        - 0.5 * (nu + 1.0) * (z * z / nu).ln_1p()
}

/// Fits the scale of a Student-t(1/2) density to the table by minimizing the
/// sup-norm distance over the grid.
pub fn fit_t_approx(table: &JeffreysTable) -> StudentTApprox {
    let target = table.normalized_values();
    let sup = |scale: f64| {
        table
            .lambda_grid
            .iter()
            .zip(&target)
            .map(|(&l, &p)| (p - student_t_ln_pdf_scaled(l, 0.5, 0.0, scale).exp()).abs())
            .fold(0.0, f64::max)
    };
    // Coarse log-scale scan, then golden-section refinement around the best cell.
    let scan: Vec<f64> = (0..=200)
        .map(|i| (0.05f64.ln() + (20f64.ln() - 0.05f64.ln()) * i as f64 / 200.0).exp())
        .collect();
    let best = (0..scan.len())
        .min_by(|&i, &j| sup(scan[i]).total_cmp(&sup(scan[j])))
        .expect("non-empty scan");
    let lo = scan[best.saturating_sub(1)];
    let hi = scan[(best + 1).min(scan.len() - 1)];
    let (scale, dist) = golden_section(sup, lo, hi, 1e-9);
    StudentTApprox {
        dof: 0.5,
        scale,
        center: 0.0,
        sup_distance: dist,
    }
}

/// `ln pi_I(mu, sigma, lambda) = -ln sigma + ln pi(lambda)`.
pub fn independence_prior_logdensity(
    mu: f64,
    sigma: f64,
    lambda: f64,
    table: &JeffreysTable,
) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::domain(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    if !mu.is_finite() || !lambda.is_finite() {
        return Err(Error::domain("mu and lambda must be finite"));
    }
    Ok(-sigma.ln() + table.ln_density(lambda))
}

/// Diagonal of the Fisher information matrix of `(mu, sigma, lambda)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FisherDiag {
    pub mu_mu: f64,
    pub sigma_sigma: f64,
    pub lambda_lambda: f64,
}

pub fn fisher_diag(model: &SkewSymmetric) -> Result<FisherDiag> {
    let (f, g, lambda, sigma) = (model.base, model.skew, model.lambda, model.sigma);
    let opts = FISHER_QUAD;
    // f(t) G(lambda t) and g(lambda t) / G(lambda t), both from logs.
    let weight = |t: f64| (f.ln_pdf(t) + g.ln_cdf(lambda * t)).exp();
    let mills = |t: f64| g.inverse_mills(lambda * t);

    let mu_mu = integrate_real_line(
        |t| {
            let w = weight(t);
            if w == 0.0 {
                return 0.0;
            }
            let s = f.score(t) + lambda * mills(t);
            s * s * w
        },
        opts,
    )?
    .value;
    let sigma_sigma = integrate_real_line(
        |t| {
            let w = weight(t);
            if w == 0.0 {
                return 0.0;
            }
            let s = 1.0 + t * f.score(t) + lambda * t * mills(t);
            s * s * w
        },
        opts,
    )?
    .value;
    let lambda_lambda = integrate_real_line(
        |t| {
            if t == 0.0 {
                return 0.0;
            }
            (2.0 * t.abs().ln() + f.ln_pdf(t) + 2.0 * g.ln_pdf(lambda * t) - g.ln_cdf(lambda * t))
                .exp()
        },
        opts,
    )?
    .value;
    Ok(FisherDiag {
        mu_mu: 2.0 * mu_mu / (sigma * sigma),
        sigma_sigma: 2.0 * sigma_sigma / (sigma * sigma),
        lambda_lambda: 2.0 * lambda_lambda,
    })
}
