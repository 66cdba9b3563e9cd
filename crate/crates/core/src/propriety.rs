//! Sufficient conditions for posterior propriety under the independence
//! Jeffreys prior.
//!
//! The rules only ever certify propriety. A `NotGuaranteed` verdict means no
//! sufficient condition applies, not that the posterior is improper.

use crate::dist::SymmetricBase;
use crate::error::{Error, Result};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// A censored observation `y in [lo, hi]`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(serialize_with = "ser_ext", deserialize_with = "de_ext")]
    pub lo: f64,
    #[serde(serialize_with = "ser_ext", deserialize_with = "de_ext")]
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(Error::domain(format!("invalid interval [{lo}, {hi}]")));
        }
        if !(lo < hi) {
            return Err(Error::domain(format!(
                "interval [{lo}, {hi}] must have positive length"
            )));
        }
        Ok(Interval { lo, hi })
    }

    pub fn is_whole_line(&self) -> bool {
        self.lo == f64::NEG_INFINITY && self.hi == f64::INFINITY
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

// JSON has no infinities; write them as the strings "-inf" / "inf".
fn ser_ext<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

fn de_ext<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Ext {
        Num(f64),
        Str(String),
    }
    match Ext::deserialize(d)? {
        Ext::Num(x) => Ok(x),
        Ext::Str(s) => s.parse::<f64>().map_err(serde::de::Error::custom),
    }
}

/// Observations: exact values plus censoring sets.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    #[serde(default)]
    pub exact: Vec<f64>,
    #[serde(default)]
    pub censored: Vec<Interval>,
}

impl Dataset {
    pub fn new(exact: Vec<f64>, censored: Vec<Interval>) -> Result<Self> {
        if let Some(bad) = exact.iter().find(|y| !y.is_finite()) {
            return Err(Error::domain(format!(
                "exact observation {bad} is not finite"
            )));
        }
        for iv in &censored {
            Interval::new(iv.lo, iv.hi)?;
        }
        Ok(Dataset { exact, censored })
    }

    pub fn exact(exact: Vec<f64>) -> Result<Self> {
        Dataset::new(exact, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.exact.len() + self.censored.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Proper,
    NotGuaranteed,
    PriorUndefinedAtZero,
}

/// Evidence behind a verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Detail {
    /// Exact sample of `n >= 2` pairwise distinct values.
    DistinctObservations {
        n: usize,
    },
    /// Two observation sets a positive distance apart. Exact points appear
    /// as degenerate intervals.
    SeparatedPair {
        first: Interval,
        second: Interval,
        gap: f64,
    },
    RepeatedObservation {
        value: f64,
        count: usize,
    },
    TooFewObservations {
        n: usize,
    },
    NoSeparatedPair,
    NotScaleMixture {
        base: SymmetricBase,
    },
    InfiniteSecondMoment {
        base: SymmetricBase,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProprietyReport {
    pub verdict: Verdict,
    pub reasons: Vec<String>,
    pub details: Vec<Detail>,
    /// Pairs of distinct exact values closer than 1e-12 relative.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub near_ties: Vec<(f64, f64)>,
}

impl ProprietyReport {
    pub fn is_proper(&self) -> bool {
        self.verdict == Verdict::Proper
    }
}

/// The Jeffreys prior for `lambda` exists at 0 exactly when the base has a
/// finite second moment.
pub fn prior_defined_at_zero(base: SymmetricBase) -> bool {
    base.second_moment().is_finite()
}

/// Checks shared by both rules. Returns a finished report when the model
/// alone decides the verdict.
fn model_gate(base: SymmetricBase) -> std::result::Result<(), ProprietyReport> {
    if !prior_defined_at_zero(base) {
        return Err(ProprietyReport {
            verdict: Verdict::PriorUndefinedAtZero,
            reasons: vec![format!(
                "{base} has an infinite second moment, so the Jeffreys prior for lambda has a pole at 0"
            )],
            details: vec![Detail::InfiniteSecondMoment { base }],
            near_ties: Vec::new(),
        });
    }
    if !base.is_scale_mixture_of_normals() {
        return Err(ProprietyReport {
            verdict: Verdict::NotGuaranteed,
            reasons: vec![format!(
                "{base} is not a scale mixture of normals; no sufficient condition applies"
            )],
            details: vec![Detail::NotScaleMixture { base }],
            near_ties: Vec::new(),
        });
    }
    Ok(())
}

/// Exact observations: proper when `n >= 2` and all values differ, for
/// bases that are scale mixtures of normals. Datasets with censored entries
/// are passed on to [`check_censored`].
pub fn check_exact(data: &Dataset, base: SymmetricBase) -> ProprietyReport {
    if !data.censored.is_empty() {
        return check_censored(data, base);
    }
    let mut report = match model_gate(base) {
        Ok(()) => exact_rule(&data.exact),
        Err(r) => r,
    };
    report.near_ties = near_ties(&data.exact);
    report
}

fn exact_rule(ys: &[f64]) -> ProprietyReport {
    let n = ys.len();
    let mut details = Vec::new();
    let mut reasons = Vec::new();
    if n < 2 {
        details.push(Detail::TooFewObservations { n });
        reasons.push(format!("only {n} observation(s); at least 2 are needed"));
    }
    let s = sorted_copy(ys);
    let mut i = 0;
    while i < s.len() {
        let mut j = i + 1;
        while j < s.len() && s[j] == s[i] {
            j += 1;
        }
        if j - i > 1 {
            details.push(Detail::RepeatedObservation {
                value: s[i],
                count: j - i,
            });
            reasons.push(format!(
                "value {} occurs {} times; repeated observations may destroy the existence of the posterior",
                s[i],
                j - i
            ));
        }
        i = j;
    }
    if details.is_empty() {
        ProprietyReport {
            verdict: Verdict::Proper,
            reasons: vec![format!(
                "{n} pairwise distinct exact observations from a scale mixture of normals"
            )],
            details: vec![Detail::DistinctObservations { n }],
            near_ties: Vec::new(),
        }
    } else {
        ProprietyReport {
            verdict: Verdict::NotGuaranteed,
            reasons,
            details,
            near_ties: Vec::new(),
        }
    }
}

/// Set-valued observations: proper when two of the sets lie a positive
/// distance apart. Exact values count as degenerate intervals.
pub fn check_censored(data: &Dataset, base: SymmetricBase) -> ProprietyReport {
    let mut report = match model_gate(base) {
        Ok(()) => gap_rule(data),
        Err(r) => r,
    };
    report.near_ties = near_ties(&data.exact);
    report
}

fn gap_rule(data: &Dataset) -> ProprietyReport {
    let n = data.len();
    if n < 2 {
        return ProprietyReport {
            verdict: Verdict::NotGuaranteed,
            reasons: vec![format!("only {n} observation(s); at least 2 are needed")],
            details: vec![Detail::TooFewObservations { n }],
            near_ties: Vec::new(),
        };
    }
    // The widest gap between any two sets is max(lo) - min(hi); if that is
    // positive the two attaining sets are distinct and separated.
    let sets = data
        .exact
        .iter()
        .map(|&y| Interval { lo: y, hi: y })
        .chain(data.censored.iter().copied());
    let mut lowest_hi = Interval {
        lo: f64::NAN,
        hi: f64::INFINITY,
    };
    let mut highest_lo = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::NAN,
    };
    let mut first = true;
    for s in sets {
        if first || s.hi < lowest_hi.hi {
            lowest_hi = s;
        }
        if first || s.lo > highest_lo.lo {
            highest_lo = s;
        }
        first = false;
    }
    let gap = highest_lo.lo - lowest_hi.hi;
    if gap > 0.0 {
        ProprietyReport {
            verdict: Verdict::Proper,
            reasons: vec![format!(
                "observation sets {lowest_hi} and {highest_lo} are separated by {gap}"
            )],
            details: vec![Detail::SeparatedPair {
                first: lowest_hi,
                second: highest_lo,
                gap,
            }],
            near_ties: Vec::new(),
        }
    } else {
        ProprietyReport {
            verdict: Verdict::NotGuaranteed,
            reasons: vec!["no two observation sets are a positive distance apart".to_string()],
            details: vec![Detail::NoSeparatedPair],
            near_ties: Vec::new(),
        }
    }
}

/// Adjacent distinct exact values closer than 1e-12 relative.
pub fn near_ties(ys: &[f64]) -> Vec<(f64, f64)> {
    let s = sorted_copy(ys);
    s.windows(2)
        .filter(|w| {
            let (a, b) = (w[0], w[1]);
            let scale = a.abs().max(b.abs());
            a != b && (b - a) <= 1e-12 * scale
        })
        .map(|w| (w[0], w[1]))
        .collect()
}

fn sorted_copy(ys: &[f64]) -> Vec<f64> {
    let mut s = ys.to_vec();
    s.sort_by(f64::total_cmp);
    s
}
