use crate::args::*;
use crate::io::{
    envelope, num, print_json, read_dataset, read_glm, read_pairs, CliError, CliResult, Output,
};
use crate::reference;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use skewjeff_core::binreg::{
    glm_compare, glm_fit, glm_predict, GlmData, GlmFitOptions, GlmModel, GlmPosterior, SkewLink,
};
use skewjeff_core::coverage::{run_coverage_levels, CoverageSpec};
use skewjeff_core::inference::{
    credible_interval, marginal_likelihood, mle_fit, sample_posterior, LambdaPrior, MleFit,
};
use skewjeff_core::jeffreys::fit_t_approx;
use skewjeff_core::propriety::check_exact;
use skewjeff_core::stress::{posterior_theta, StressFit};
use skewjeff_core::{GridSpec, JeffreysTable, McmcConfig, PairedSample, PriorSpec, SkewFamily};
use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

#[derive(Deserialize)]
#[serde(untagged)]
enum ModelFile {
    Named { family: String },
    Explicit(SkewFamily),
}

/// A family name, or a JSON file holding `{"family": name}` or an explicit
/// `{"base": ..., "skew": ...}` pair.
pub fn parse_model(spec: &str) -> CliResult<SkewFamily> {
    let path = Path::new(spec);
    if !(spec.ends_with(".json") || path.is_file()) {
        return SkewFamily::from_name(spec).map_err(|e| CliError::Usage(e.to_string()));
    }
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: spec.into(),
        source,
    })?;
    // Syntax errors carry a position; shape errors from the untagged enum do not.
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: spec.into(),
        line: e.line() as u64,
        column: e.column(),
        name: "model".into(),
        msg: e.to_string(),
    })?;
    let parsed: ModelFile = serde_json::from_value(value).map_err(|_| CliError::Input {
        path: spec.into(),
        msg: "expected {\"family\": name} or {\"base\": ..., \"skew\": ...}".into(),
    })?;
    match parsed {
        ModelFile::Named { family } => {
            SkewFamily::from_name(&family).map_err(|e| CliError::Input {
                path: spec.into(),
                msg: e.to_string(),
            })
        }
        ModelFile::Explicit(f) => Ok(f),
    }
}

/// Applies `key=value` overrides to `base`.
pub fn parse_mcmc(args: &McmcArgs, base: fn(u64) -> McmcConfig) -> CliResult<McmcConfig> {
    let mut cfg = base(args.seed);
    let Some(spec) = &args.mcmc else {
        return Ok(cfg);
    };
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--mcmc: expected key=value, got '{item}'")))?;
        let parse = |v: &str| -> CliResult<u64> {
            v.trim().replace('_', "").parse().map_err(|_| {
                CliError::Usage(format!(
                    "--mcmc: '{v}' is not a non-negative integer for {key}"
                ))
            })
        };
        match key.trim() {
            "total" => cfg.total_iterations = parse(value)? as usize,
            "burnin" | "burn_in" => cfg.burn_in = parse(value)? as usize,
            "thin" | "thinning" => cfg.thinning = parse(value)? as usize,
            "seed" => cfg.seed = parse(value)?,
            other => {
                return Err(CliError::Usage(format!(
                    "--mcmc: unknown key '{other}' (expected total, burnin, thin, seed)"
                )))
            }
        }
    }
    cfg.validate()
        .map_err(|e| CliError::Usage(format!("--mcmc: {e}")))?;
    Ok(cfg)
}

fn grid_spec(g: &GridArgs) -> GridSpec {
    GridSpec {
        points_per_side: g.points,
        max_abs: g.max_abs,
        ..GridSpec::default()
    }
}

fn build_table(family: SkewFamily, g: &GridArgs) -> CliResult<Arc<JeffreysTable>> {
    Ok(Arc::new(JeffreysTable::build(family, &grid_spec(g))?))
}

fn prior_spec(choice: PriorChoice, table: Arc<JeffreysTable>) -> PriorSpec {
    match choice {
        PriorChoice::Jeffreys => PriorSpec::independence_jeffreys(table),
        PriorChoice::Benchmark => PriorSpec::benchmark(LambdaPrior::StudentT(fit_t_approx(&table))),
    }
}

fn level_ok(level: f64) -> CliResult<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "level must lie in (0, 1), got {level}"
        )))
    }
}

fn finish(out: &Output, name: &str, doc: Value) -> CliResult<()> {
    out.write_json(name, &doc)?;
    print_json(&doc)
}

pub fn prior_tab(a: &PriorTabArgs) -> CliResult<()> {
    let out = Output::prepare(
        a.output.out.as_deref(),
        a.output.force,
        &["prior_table.csv", "prior_table.json"],
    )?;
    let family = parse_model(&a.model)?;
    let table = build_table(family, &a.grid)?;
    let t = fit_t_approx(&table);
    let rows: Vec<Vec<String>> = table
        .lambda_grid
        .iter()
        .zip(table.normalized_values())
        .map(|(&l, p)| {
            let q = t.pdf(l);
            vec![num(l), num(p), num(q), num((p - q).abs())]
        })
        .collect();
    out.write_csv(
        "prior_table.csv",
        &["lambda", "jeffreys", "student_t", "abs_diff"],
        &rows,
    )?;
    let result = json!({
        "family": family.name(),
        "grid": grid_spec(&a.grid),
        "norm_constant": table.norm_constant,
        "tail_constant": table.tail_constant,
        "student_t": t,
    });
    finish(&out, "prior_table.json", envelope("prior-tab", a, &result))
}

#[derive(Serialize)]
struct ParamSummary {
    name: String,
    mean: f64,
    lower: f64,
    upper: f64,
}

fn summarize(draws: &skewjeff_core::PosteriorDraws, level: f64) -> CliResult<Vec<ParamSummary>> {
    draws
        .param_names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let col = draws.column(j);
            let (lower, upper) = credible_interval(&col, level)?;
            Ok(ParamSummary {
                name: name.clone(),
                mean: col.iter().sum::<f64>() / col.len() as f64,
                lower,
                upper,
            })
        })
        .collect()
}

fn draws_rows(draws: &skewjeff_core::PosteriorDraws) -> Vec<Vec<String>> {
    draws
        .draws
        .iter()
        .map(|r| r.iter().map(|&v| num(v)).collect())
        .collect()
}

/// Marginal likelihood, or the reason it is unavailable.
fn marginal_json(r: skewjeff_core::Result<skewjeff_core::inference::MarginalLikelihood>) -> Value {
    match r {
        Ok(m) => json!(m),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

pub fn fit(a: &FitArgs) -> CliResult<()> {
    level_ok(a.level)?;
    let out = Output::prepare(
        a.output.out.as_deref(),
        a.output.force,
        &["draws.csv", "fit.json"],
    )?;
    let family = parse_model(&a.model)?;
    let mcmc = parse_mcmc(&a.mcmc, McmcConfig::application)?;
    let data = read_dataset(&a.data)?;
    let propriety = check_exact(&data, family.base);
    if !propriety.is_proper() && !a.force_improper {
        return Err(skewjeff_core::Error::NotProper(propriety.reasons.join("; ")).into());
    }
    let table = build_table(family, &a.grid)?;
    let prior = prior_spec(a.prior, table);
    let draws = sample_posterior(&data, family, &prior, &mcmc)?;
    let summary = summarize(&draws, a.level)?;
    let mle = mle_fit(&data, family)?;
    let marginal = (a.marginal_draws > 0).then(|| {
        marginal_json(marginal_likelihood(
            &data,
            family,
            &prior,
            &draws,
            a.marginal_draws,
            mcmc.seed ^ 0x5eed,
        ))
    });
    let header: Vec<&str> = draws.param_names.iter().map(String::as_str).collect();
    out.write_csv("draws.csv", &header, &draws_rows(&draws))?;
    let result = json!({
        "family": family.name(),
        "n": data.len(),
        "propriety": propriety,
        "level": a.level,
        "params": summary,
        "acceptance_rate": draws.acceptance_rate,
        "retained": draws.len(),
        "mle": mle,
        "log_marginal": marginal,
    });
    finish(
        &out,
        "fit.json",
        envelope("fit", &json!({ "args": a, "mcmc": mcmc }), &result),
    )
}

#[derive(Serialize)]
struct CoverageRow {
    n: usize,
    lambda0: f64,
    level: f64,
    param: String,
    proportion: f64,
    std_error: f64,
    completed: usize,
    failed: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference: Option<f64>,
}

#[allow(clippy::too_many_arguments)]
fn coverage_cells(
    family: SkewFamily,
    n: usize,
    lambdas: &[f64],
    reps: usize,
    levels: &[f64],
    mcmc: &McmcConfig,
    g: &GridArgs,
    seed: u64,
) -> CliResult<Vec<CoverageRow>> {
    let table = build_table(family, g)?;
    let mut rows = Vec::new();
    for &lambda0 in lambdas {
        let mut spec = CoverageSpec::new(n, lambda0, reps, seed);
        spec.mcmc = mcmc.clone();
        let results = run_coverage_levels(&spec, family, table.clone(), levels)?;
        let published = (family == SkewFamily::skew_logistic())
            .then(|| reference::coverage(n, lambda0))
            .flatten();
        for r in results {
            for (j, p) in r.params.iter().enumerate() {
                rows.push(CoverageRow {
                    n,
                    lambda0,
                    level: r.level,
                    param: p.param.clone(),
                    proportion: p.proportion,
                    std_error: p.std_error,
                    completed: r.completed,
                    failed: r.failed,
                    reference: published.filter(|_| r.level == 0.95).map(|v| v[j]),
                });
            }
        }
    }
    Ok(rows)
}

fn coverage_csv(rows: &[CoverageRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                num(r.lambda0),
                num(r.level),
                r.param.clone(),
                num(r.proportion),
                num(r.std_error),
                r.completed.to_string(),
                r.failed.to_string(),
                r.reference.map(num).unwrap_or_default(),
            ]
        })
        .collect()
}

const COVERAGE_HEADER: [&str; 9] = [
    "n",
    "lambda0",
    "level",
    "param",
    "proportion",
    "std_error",
    "completed",
    "failed",
    "reference",
];

pub fn coverage(a: &CoverageArgs) -> CliResult<()> {
    for &l in &a.levels {
        level_ok(l)?;
    }
    let out = Output::prepare(
        a.output.out.as_deref(),
        a.output.force,
        &["coverage.csv", "coverage.json"],
    )?;
    let family = parse_model(&a.model)?;
    let mcmc = parse_mcmc(&a.mcmc, McmcConfig::simulation)?;
    let rows = coverage_cells(
        family,
        a.n,
        &a.lambda0,
        a.reps,
        &a.levels,
        &mcmc,
        &a.grid,
        a.mcmc.seed,
    )?;
    out.write_csv("coverage.csv", &COVERAGE_HEADER, &coverage_csv(&rows))?;
    finish(
        &out,
        "coverage.json",
        envelope(
            "coverage",
            &json!({ "args": a, "mcmc": mcmc }),
            &json!({ "family": family.name(), "cells": rows }),
        ),
    )
}

/// Fits each link in parallel; tables are shared between links of one family.
fn fit_links(
    data: &GlmData,
    links: &[SkewLink],
    opts: &GlmFitOptions,
    g: &GridArgs,
) -> CliResult<Vec<GlmPosterior>> {
    let mut tables: HashMap<String, Arc<JeffreysTable>> = HashMap::new();
    for l in links.iter().filter(|l| l.free_lambda) {
        let key = l.family.name();
        if let std::collections::hash_map::Entry::Vacant(e) = tables.entry(key) {
            e.insert(build_table(l.family, g)?);
        }
    }
    let models: Vec<GlmModel> = links
        .iter()
        .map(|l| {
            GlmModel::new(
                data.clone(),
                *l,
                l.free_lambda.then(|| tables[&l.family.name()].clone()),
            )
        })
        .collect::<skewjeff_core::Result<_>>()?;
    Ok(models
        .par_iter()
        .map(|m| glm_fit(m, opts))
        .collect::<skewjeff_core::Result<Vec<_>>>()?)
}

fn parse_links(names: &[String]) -> CliResult<Vec<SkewLink>> {
    let names: Vec<&str> = if names.is_empty() {
        reference::BLISS_LINKS.to_vec()
    } else {
        names.iter().map(String::as_str).collect()
    };
    names
        .iter()
        .map(|n| SkewLink::from_name(n).map_err(|e| CliError::Usage(e.to_string())))
        .collect()
}

fn glm_outputs(out: &Output, data: &GlmData, fits: &[GlmPosterior]) -> CliResult<Vec<Value>> {
    let mut header: Vec<String> = data.covariates.clone();
    header.extend(["n".into(), "y".into()]);
    let preds: Vec<Vec<f64>> = fits
        .iter()
        .map(|f| glm_predict(f, data))
        .collect::<skewjeff_core::Result<_>>()?;
    header.extend(fits.iter().map(|f| f.link.name()));
    let rows: Vec<Vec<String>> = (0..data.rows())
        .map(|i| {
            let mut r: Vec<String> = data.x[i][1..].iter().map(|&v| num(v)).collect();
            r.push(data.n[i].to_string());
            r.push(data.y[i].to_string());
            r.extend(preds.iter().map(|p| num(p[i])));
            r
        })
        .collect();
    let hdr: Vec<&str> = header.iter().map(String::as_str).collect();
    out.write_csv("predictions.csv", &hdr, &rows)?;
    for f in fits {
        let names: Vec<&str> = f.draws.param_names.iter().map(String::as_str).collect();
        out.write_csv(
            &format!("draws_{}.csv", f.link.name()),
            &names,
            &draws_rows(&f.draws),
        )?;
    }
    Ok(fits
        .iter()
        .zip(preds)
        .map(|(f, p)| {
            json!({
                "link": f.link.name(),
                "predicted": p,
                "predicted_prob": f.predicted_prob,
                "mle": f.mle,
                "log_marginal": f.log_marginal,
                "acceptance_rate": f.draws.acceptance_rate,
            })
        })
        .collect())
}

fn link_files(links: &[SkewLink], extra: &[&str]) -> Vec<String> {
    let mut v: Vec<String> = links
        .iter()
        .map(|l| format!("draws_{}.csv", l.name()))
        .collect();
    v.push("predictions.csv".into());
    v.extend(extra.iter().map(|s| s.to_string()));
    v
}

pub fn binreg(a: &BinregArgs) -> CliResult<()> {
    let links = parse_links(&a.links)?;
    if !links.iter().any(|l| l.name() == a.reference) {
        return Err(CliError::Usage(format!(
            "--reference '{}' is not among the fitted links",
            a.reference
        )));
    }
    let files = link_files(&links, &["binreg.json"]);
    let file_refs: Vec<&str> = files.iter().map(String::as_str).collect();
    let out = Output::prepare(a.output.out.as_deref(), a.output.force, &file_refs)?;
    let data = match &a.data {
        Some(p) => read_glm(p)?,
        None => GlmData::bliss(),
    };
    let mcmc = parse_mcmc(&a.mcmc, McmcConfig::application)?;
    let opts = GlmFitOptions {
        mcmc: mcmc.clone(),
        importance_draws: a.importance_draws,
        with_constants: a.with_constants,
    };
    let fits = fit_links(&data, &links, &opts, &a.grid)?;
    let per_link = glm_outputs(&out, &data, &fits)?;
    let comparison = glm_compare(&fits, &a.reference)?;
    let result = json!({ "reference": a.reference, "comparison": comparison, "links": per_link });
    finish(
        &out,
        "binreg.json",
        envelope("binreg", &json!({ "args": a, "mcmc": mcmc }), &result),
    )
}

fn stress_fit(
    sample: &PairedSample,
    family: SkewFamily,
    choice: PriorChoice,
    mcmc: &McmcConfig,
    level: f64,
    force: bool,
    g: &GridArgs,
) -> CliResult<StressFit> {
    let prior = prior_spec(choice, build_table(family, g)?);
    Ok(posterior_theta(sample, family, &prior, mcmc, level, force)?)
}

fn theta_rows(fit: &StressFit) -> Vec<Vec<String>> {
    fit.theta
        .draws
        .iter()
        .zip(&fit.params.draws)
        .map(|(&t, r)| vec![num(t), num(r[0]), num(r[1]), num(r[2])])
        .collect()
}

fn stress_json(fit: &StressFit, family: SkewFamily, mle: &MleFit, bins: usize) -> Value {
    json!({
        "family": family.name(),
        "propriety": fit.propriety,
        "forced": fit.forced,
        "level": fit.theta.level,
        "interval": [fit.theta.interval.0, fit.theta.interval.1],
        "mean": fit.theta.mean,
        "median": fit.theta.median,
        "sd": fit.theta.sd,
        "acceptance_rate": fit.params.acceptance_rate,
        "mle": mle,
        "histogram": fit.theta.histogram(bins),
    })
}

pub fn stress(a: &StressArgs) -> CliResult<()> {
    level_ok(a.level)?;
    let out = Output::prepare(
        a.output.out.as_deref(),
        a.output.force,
        &["theta.csv", "stress.json"],
    )?;
    let family = parse_model(&a.model)?;
    let mcmc = parse_mcmc(&a.mcmc, McmcConfig::application)?;
    let sample = read_pairs(&a.data)?;
    let fit = stress_fit(
        &sample,
        family,
        a.prior,
        &mcmc,
        a.level,
        a.force_improper,
        &a.grid,
    )?;
    let mle = mle_fit(
        &skewjeff_core::Dataset::exact(sample.differences())?,
        family,
    )?;
    out.write_csv(
        "theta.csv",
        &["theta", "mu", "sigma", "lambda"],
        &theta_rows(&fit),
    )?;
    finish(
        &out,
        "stress.json",
        envelope(
            "stress",
            &json!({ "args": a, "mcmc": mcmc }),
            &stress_json(&fit, family, &mle, a.bins),
        ),
    )
}

pub fn check_propriety(a: &ProprietyArgs) -> CliResult<()> {
    let out = Output::prepare(a.output.out.as_deref(), a.output.force, &["propriety.json"])?;
    let family = parse_model(&a.model)?;
    let data = read_dataset(&a.data)?;
    let report = check_exact(&data, family.base);
    finish(
        &out,
        "propriety.json",
        envelope(
            "check-propriety",
            a,
            &json!({ "family": family.name(), "n": data.len(), "report": report }),
        ),
    )
}

pub fn reproduce(a: &ReproduceArgs) -> CliResult<()> {
    match a.target {
        Target::Table1 | Target::Table2 | Target::Table3 | Target::Table4 => reproduce_coverage(a),
        Target::Table6 | Target::Table7 => reproduce_bliss(a),
        Target::Fig2 => reproduce_fig2(a),
        Target::Table8 => reproduce_melanoma(a),
    }
}

fn reproduce_coverage(a: &ReproduceArgs) -> CliResult<()> {
    let out = Output::prepare(
        a.output.out.as_deref(),
        a.output.force,
        &["coverage.csv", "coverage.json"],
    )?;
    let n = match a.target {
        Target::Table1 => 10,
        Target::Table2 => 30,
        Target::Table3 => 100,
        _ => 1000,
    };
    let lambdas = if a.lambda0.is_empty() {
        reference::COVERAGE_LAMBDAS.to_vec()
    } else {
        a.lambda0.clone()
    };
    let reps = if a.full { 1000 } else { a.reps };
    let mcmc = parse_mcmc(&a.mcmc, McmcConfig::simulation)?;
    let rows = coverage_cells(
        SkewFamily::skew_logistic(),
        n,
        &lambdas,
        reps,
        &[0.95],
        &mcmc,
        &a.grid,
        a.mcmc.seed,
    )?;
    out.write_csv("coverage.csv", &COVERAGE_HEADER, &coverage_csv(&rows))?;
    let within: Vec<Value> = rows
        .iter()
        .filter_map(|r| {
            let p = r.reference?;
            let se = (p * (1.0 - p) / r.completed as f64).sqrt();
            Some(json!({ "lambda0": r.lambda0, "param": r.param, "z": (r.proportion - p) / se, "within_3se": (r.proportion - p).abs() <= 3.0 * se }))
        })
        .collect();
    let run = json!({ "seed": a.mcmc.seed, "replications": reps, "n": n, "tolerance": "3 binomial standard errors of the reference value" });
    finish(
        &out,
        "coverage.json",
        envelope(
            "reproduce",
            &json!({ "args": a, "mcmc": mcmc, "run": run }),
            &json!({ "cells": rows, "comparison": within }),
        ),
    )
}

fn reproduce_bliss(a: &ReproduceArgs) -> CliResult<()> {
    let table7 = a.target == Target::Table7;
    let links = if table7 {
        parse_links(&[])?
    } else {
        parse_links(&a.links)?
    };
    let name = if table7 { "table7.json" } else { "table6.json" };
    let files = link_files(&links, &[name]);
    let file_refs: Vec<&str> = files.iter().map(String::as_str).collect();
    let out = Output::prepare(a.output.out.as_deref(), a.output.force, &file_refs)?;
    let data = GlmData::bliss();
    let mcmc = parse_mcmc(&a.mcmc, McmcConfig::application)?;
    let mut opts = GlmFitOptions::new(mcmc.clone());
    if !table7 {
        opts.importance_draws = 0;
    }
    let fits = fit_links(&data, &links, &opts, &a.grid)?;
    let per_link = glm_outputs(&out, &data, &fits)?;
    let run = json!({ "seed": mcmc.seed, "data": "Bliss beetle mortality", "tolerance": if table7 { "AIC within 1.0; Bayes factors within 50% relative" } else { "predicted counts within 1.0" } });
    let result = if table7 {
        let rows = glm_compare(&fits, "skew-logistic")?;
        let cmp: Vec<Value> = rows
            .iter()
            .map(|r| {
                let (aic, bic, bf) = reference::BLISS_COMPARISON[reference::bliss_index(&r.link).expect("four standard links")];
                json!({ "link": r.link, "aic": r.aic, "bic": r.bic, "bayes_factor": r.bayes_factor, "log_marginal": r.log_marginal,
                        "reference": { "aic": aic, "bic": bic, "bayes_factor": bf } })
            })
            .collect();
        json!({ "comparison": cmp, "links": per_link })
    } else {
        let cmp: Vec<Value> = fits
            .iter()
            .filter_map(|f| {
                let i = reference::bliss_index(&f.link.name())?;
                let pred = glm_predict(f, &data).ok()?;
                let max_dev = pred.iter().zip(&reference::BLISS_PREDICTED[i]).map(|(p, r)| (p - r).abs()).fold(0.0, f64::max);
                Some(json!({ "link": f.link.name(), "predicted": pred, "reference": reference::BLISS_PREDICTED[i], "max_abs_deviation": max_dev }))
            })
            .collect();
        json!({ "comparison": cmp, "links": per_link })
    };
    finish(
        &out,
        name,
        envelope(
            "reproduce",
            &json!({ "args": a, "mcmc": mcmc, "run": run }),
            &result,
        ),
    )
}

fn reproduce_fig2(a: &ReproduceArgs) -> CliResult<()> {
    let out = Output::prepare(
        a.output.out.as_deref(),
        a.output.force,
        &["fig2.csv", "fig2.json"],
    )?;
    let family = parse_model(&a.model)?;
    let table = build_table(family, &a.grid)?;
    let t = fit_t_approx(&table);
    let rows: Vec<Vec<String>> = (-400..=400)
        .map(|k| {
            let l = k as f64 * 0.05;
            let (p, q) = (table.density(l), t.pdf(l));
            vec![num(l), num(p), num(q), num((p - q).abs())]
        })
        .collect();
    out.write_csv(
        "fig2.csv",
        &["lambda", "jeffreys", "student_t", "abs_diff"],
        &rows,
    )?;
    let result = json!({
        "family": family.name(),
        "student_t": t,
        "values": rows.iter().step_by(40).cloned().collect::<Vec<_>>(),
    });
    finish(&out, "fig2.json", envelope("reproduce", a, &result))
}

fn reproduce_melanoma(a: &ReproduceArgs) -> CliResult<()> {
    let path = a
        .data
        .as_ref()
        .ok_or_else(|| CliError::Usage("table8 needs --data with the paired lesion scores (x, y columns); the dataset is not bundled".into()))?;
    let out = Output::prepare(
        a.output.out.as_deref(),
        a.output.force,
        &[
            "theta_skew-logistic.csv",
            "theta_skew-normal.csv",
            "table8.json",
        ],
    )?;
    let sample = read_pairs(path)?;
    let mcmc = parse_mcmc(&a.mcmc, McmcConfig::application)?;
    let data = skewjeff_core::Dataset::exact(sample.differences())?;
    let families = [SkewFamily::skew_logistic(), SkewFamily::skew_normal()];
    let fits: Vec<(StressFit, MleFit, Value)> = families
        .par_iter()
        .map(|&fam| -> CliResult<_> {
            let table = build_table(fam, &a.grid)?;
            let prior = PriorSpec::independence_jeffreys(table);
            let fit = posterior_theta(&sample, fam, &prior, &mcmc, 0.95, false)?;
            let mle = mle_fit(&data, fam)?;
            let ml =
                marginal_likelihood(&data, fam, &prior, &fit.params, 20_000, mcmc.seed ^ 0x5eed);
            Ok((fit, mle, marginal_json(ml)))
        })
        .collect::<CliResult<_>>()?;
    let ref_lm = fits[0].2.get("log_value").and_then(Value::as_f64);
    let mut rows = Vec::new();
    for ((fam, (fit, mle, ml)), published) in families.iter().zip(&fits).zip(reference::MELANOMA) {
        out.write_csv(
            &format!("theta_{}.csv", fam.name()),
            &["theta", "mu", "sigma", "lambda"],
            &theta_rows(fit),
        )?;
        let bf = match (ml.get("log_value").and_then(Value::as_f64), ref_lm) {
            (Some(x), Some(r)) => Some((x - r).exp()),
            _ => None,
        };
        let mut v = stress_json(fit, *fam, mle, 30);
        v["log_marginal"] = ml.clone();
        v["bayes_factor"] = json!(bf);
        v["reference"] = json!({
            "model": published.model,
            "aic": published.aic,
            "bic": published.bic,
            "bayes_factor": published.bayes_factor,
            "interval": [published.interval.0, published.interval.1],
        });
        rows.push(v);
    }
    let run = json!({ "seed": mcmc.seed, "n": sample.len(), "tolerance": "interval endpoints within 0.02" });
    finish(
        &out,
        "table8.json",
        envelope(
            "reproduce",
            &json!({ "args": a, "mcmc": mcmc, "run": run }),
            &json!({ "models": rows }),
        ),
    )
}
