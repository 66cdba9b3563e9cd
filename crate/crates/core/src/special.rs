//! Scalar special functions with attention to the tails.
//!
//! Log-CDFs are evaluated without forming the CDF first whenever the CDF
//! would underflow: the normal log-CDF switches to its asymptotic (Mills
//! ratio) expansion below `-30`, and the logistic functions branch on sign so
//! that `exp` never overflows.

use libm::erfc;
use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// `ln(sqrt(2 pi))`
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

pub fn norm_ln_pdf(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// `ln Phi(x)`, accurate in both tails.
pub fn norm_ln_cdf(x: f64) -> f64 {
    if x > 0.0 {
        (-0.5 * erfc(x * FRAC_1_SQRT_2)).ln_1p()
    } else if x >= -30.0 {
        (0.5 * erfc(-x * FRAC_1_SQRT_2)).ln()
    } else {
        // Phi(x) = phi(x)/|x| * (1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8 - ...)
        let z2 = 1.0 / (x * x);
        let series = 1.0 - z2 * (1.0 - z2 * (3.0 - z2 * (15.0 - z2 * (105.0 - z2 * 945.0))));
        norm_ln_pdf(x) - (-x).ln() + series.ln()
    }
}

/// Logistic sigmoid `1 / (1 + e^{-x})` without overflow.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln sigmoid(x) = -ln(1 + e^{-x})`.
pub fn ln_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Standard logistic density `e^{-x} / (1 + e^{-x})^2`.
pub fn logistic_pdf(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    e / ((1.0 + e) * (1.0 + e))
}

pub fn logistic_ln_pdf(x: f64) -> f64 {
    let a = x.abs();
    -a - 2.0 * (-a).exp().ln_1p()
}

/// Log normalizing constant of the Student-t density with `nu` degrees of freedom.
pub fn student_t_ln_norm(nu: f64) -> f64 {
    ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (nu * PI).ln()
}

pub fn student_t_ln_pdf(x: f64, nu: f64) -> f64 {
    student_t_ln_norm(nu) - 0.5 * (nu + 1.0) * (x * x / nu).ln_1p()
}

pub fn student_t_pdf(x: f64, nu: f64) -> f64 {
    student_t_ln_pdf(x, nu).exp()
}

/// Lower tail `P(T <= -|x|)` via the regularized incomplete beta function.
fn student_t_lower_tail(x: f64, nu: f64) -> f64 {
    if x == 0.0 {
        return 0.5;
    }
    if x.is_infinite() {
        return 0.0;
    }
    0.5 * beta_reg(0.5 * nu, 0.5, nu / (nu + x * x))
}

pub fn student_t_cdf(x: f64, nu: f64) -> f64 {
    let tail = student_t_lower_tail(x, nu);
    if x <= 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

pub fn student_t_ln_cdf(x: f64, nu: f64) -> f64 {
    let tail = student_t_lower_tail(x, nu);
    if x <= 0.0 {
        tail.ln()
    } else {
        (-tail).ln_1p()
    }
}

pub fn ln_gamma_fn(x: f64) -> f64 {
    ln_gamma(x)
}

/// `ln(e^a + e^b)`
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `ln sum exp(x_i)`, `-inf` for an empty slice.
pub fn ln_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}
