//! Frequentist coverage of posterior credible intervals under the
//! independence Jeffreys prior.
//!
//! Replication `i` draws its data from ChaCha stream `i` of the master seed
//! and seeds its chain from a hash of `(seed, i)`, so results do not depend
//! on how replications are scheduled across threads.

use crate::dist::{SkewFamily, SkewSymmetric};
use crate::error::{Error, Result};
use crate::inference::{credible_interval, sample_posterior, McmcConfig, PriorSpec, PARAM_NAMES};
use crate::jeffreys::JeffreysTable;
use crate::propriety::Dataset;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageSpec {
    pub n: usize,
    pub lambda0: f64,
    #[serde(default)]
    pub mu0: f64,
    #[serde(default = "one")]
    pub sigma0: f64,
    pub replications: usize,
    #[serde(default = "default_level")]
    pub level: f64,
    pub mcmc: McmcConfig,
    pub seed: u64,
}

fn one() -> f64 {
    1.0
}

fn default_level() -> f64 {
    0.95
}

impl CoverageSpec {
    /// Simulation-study defaults: `mu0 = 0`, `sigma0 = 1`, 95% intervals,
    /// burn-in 10,000 and thinning 50.
    pub fn new(n: usize, lambda0: f64, replications: usize, seed: u64) -> Self {
        CoverageSpec {
            n,
            lambda0,
            mu0: 0.0,
            sigma0: 1.0,
            replications,
            level: 0.95,
            mcmc: McmcConfig::simulation(seed),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::domain("at least one replication is required"));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::domain(format!(
                "level must lie in (0, 1), got {}",
                self.level
            )));
        }
        if self.n < 2 {
            return Err(Error::domain(format!(
                "sample size must be at least 2, got {}",
                self.n
            )));
        }
        self.mcmc.validate()?;
        if self.mcmc.retained() < 100 {
            return Err(Error::domain("MCMC settings retain fewer than 100 draws"));
        }
        SkewSymmetric::new(
            self.mu0,
            self.sigma0,
            self.lambda0,
            SkewFamily::skew_normal(),
        )?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamCoverage {
    pub param: String,
    pub proportion: f64,
    /// `sqrt(p (1 - p) / N)` over completed replications.
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    pub level: f64,
    pub params: Vec<ParamCoverage>,
    pub completed: usize,
    pub failed: usize,
}

impl CoverageResult {
    pub fn proportion(&self, param: &str) -> Option<f64> {
        self.params
            .iter()
            .find(|p| p.param == param)
            .map(|p| p.proportion)
    }
}

/// Intervals from one replication, one `(lo, hi)` per parameter and level.
type Intervals = Vec<Vec<(f64, f64)>>;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Data RNG for replication `rep`.
pub fn replication_rng(seed: u64, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep as u64);
    rng
}

/// Chain seed for replication `rep`.
pub fn replication_chain_seed(seed: u64, rep: usize) -> u64 {
    splitmix64(seed ^ splitmix64(rep as u64 + 1))
}

fn run_replication(
    spec: &CoverageSpec,
    family: SkewFamily,
    prior: &PriorSpec,
    levels: &[f64],
    rep: usize,
) -> Result<Intervals> {
    let truth = SkewSymmetric::new(spec.mu0, spec.sigma0, spec.lambda0, family)?;
    let ys = truth.sample(spec.n, &mut replication_rng(spec.seed, rep));
    let data = Dataset::exact(ys)?;
    let mut cfg = spec.mcmc.clone();
    cfg.seed = replication_chain_seed(spec.seed, rep);
    cfg.initial_point = None;
    let draws = sample_posterior(&data, family, prior, &cfg)?;
    (0..PARAM_NAMES.len())
        .map(|j| {
            let col = draws.column(j);
            levels.iter().map(|&l| credible_interval(&col, l)).collect()
        })
        .collect()
}

/// Coverage at each of `levels`, all computed from the same chains.
pub fn run_coverage_levels(
    spec: &CoverageSpec,
    family: SkewFamily,
    table: Arc<JeffreysTable>,
    levels: &[f64],
) -> Result<Vec<CoverageResult>> {
    spec.validate()?;
    for &l in levels {
        if !(l > 0.0 && l < 1.0) {
            return Err(Error::domain(format!("level must lie in (0, 1), got {l}")));
        }
    }
    let prior = PriorSpec::independence_jeffreys(table);
    prior.check_family(family)?;
    let outcomes: Vec<Result<Intervals>> = (0..spec.replications)
        .into_par_iter()
        .map(|rep| run_replication(spec, family, &prior, levels, rep))
        .collect();
    let failed = outcomes.iter().filter(|o| o.is_err()).count();
    if failed * 20 > spec.replications {
        return Err(Error::Harness {
            failed,
            total: spec.replications,
        });
    }
    let ok: Vec<&Intervals> = outcomes.iter().filter_map(|o| o.as_ref().ok()).collect();
    let completed = ok.len();
    let truth = [spec.mu0, spec.sigma0, spec.lambda0];
    Ok(levels
        .iter()
        .enumerate()
        .map(|(li, &level)| {
            let params = PARAM_NAMES
                .iter()
                .enumerate()
                .map(|(j, name)| {
                    let hits = ok
                        .iter()
                        .filter(|iv| {
                            let (lo, hi) = iv[j][li];
                            lo <= truth[j] && truth[j] <= hi
                        })
                        .count();
                    let p = hits as f64 / completed as f64;
                    ParamCoverage {
                        param: name.to_string(),
                        proportion: p,
                        std_error: (p * (1.0 - p) / completed as f64).sqrt(),
                    }
                })
                .collect();
            CoverageResult {
                level,
                params,
                completed,
                failed,
            }
        })
        .collect())
}

pub fn run_coverage(
    spec: &CoverageSpec,
    family: SkewFamily,
    table: Arc<JeffreysTable>,
) -> Result<CoverageResult> {
    Ok(run_coverage_levels(spec, family, table, &[spec.level])?.remove(0))
}
