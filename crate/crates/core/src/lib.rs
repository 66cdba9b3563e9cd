//! Objective Bayesian inference for scalar skew-symmetric distributions.
//!
//! A skew-symmetric model has density
//!
//! ```text
//! s(y; mu, sigma, lambda) = (2 / sigma) f((y - mu) / sigma) G(lambda (y - mu) / sigma)
//! ```
//!
//! where `f` is a symmetric unimodal density and `G` is the CDF of a symmetric
//! density `g`. This crate provides:
//!
//! * [`dist`]: base densities, skewing CDFs and the skew-symmetric family
//!   (density, CDF, quantile, exact sampling);
//! * [`jeffreys`]: Fisher information of the skewness parameter, the Jeffreys
//!   prior of `lambda`, its tabulation and Student-t approximation;
//! * [`propriety`]: sufficient conditions for posterior propriety under the
//!   independence Jeffreys prior, for exact and interval-censored data;
//! * [`inference`]: log posteriors, adaptive Metropolis sampling, credible
//!   intervals, maximum likelihood and importance-sampled marginal likelihoods;
//! * [`coverage`]: the frequentist coverage harness;
//! * [`binreg`]: binomial regression with skew-symmetric links;
//! * [`stress`]: stress-strength estimation of `P(X < Y)`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod binreg;
pub mod coverage;
pub mod dist;
pub mod error;
pub mod inference;
pub mod jeffreys;
pub mod optimize;
pub mod propriety;
pub mod quadrature;
pub mod special;
pub mod stats;
pub mod stress;

pub use dist::{SkewFamily, SkewSymmetric, SkewingCdf, SymmetricBase};
pub use error::{Error, Result};

pub use inference::{McmcConfig, PosteriorDraws, PriorSpec};
pub use jeffreys::{GridSpec, JeffreysTable, StudentTApprox};
pub use propriety::{Dataset, Interval, ProprietyReport, Verdict};
pub use stress::{PairedSample, ThetaPosterior};
