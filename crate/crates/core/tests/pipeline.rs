use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use skewjeff_core::inference::{
    credible_interval, marginal_likelihood, mle_fit, sample_posterior, LambdaPrior,
};
use skewjeff_core::jeffreys::fit_t_approx;
use skewjeff_core::propriety::{check_censored, check_exact};
use skewjeff_core::stress::{posterior_theta, theta_from_params, PairedSample};
use skewjeff_core::{
    Dataset, Error, GridSpec, Interval, JeffreysTable, McmcConfig, PriorSpec, SkewFamily,
    SkewSymmetric, Verdict,
};
use std::sync::Arc;

fn short_chain(seed: u64) -> McmcConfig {
    McmcConfig {
        total_iterations: 20_000,
        burn_in: 5_000,
        thinning: 10,
        ..McmcConfig::simulation(seed)
    }
}

fn jeffreys(family: SkewFamily) -> PriorSpec {
    PriorSpec::independence_jeffreys(Arc::new(
        JeffreysTable::build(family, &GridSpec::default()).unwrap(),
    ))
}

#[test]
fn simulate_check_fit_and_summarize() {
    let family = SkewFamily::skew_logistic();
    let truth = SkewSymmetric::new(1.0, 2.0, 3.0, family).unwrap();
    let ys = truth.sample(400, &mut ChaCha8Rng::seed_from_u64(21));
    let data = Dataset::exact(ys).unwrap();
    assert_eq!(check_exact(&data, family.base).verdict, Verdict::Proper);

    let draws = sample_posterior(&data, family, &jeffreys(family), &short_chain(4)).unwrap();
    assert_eq!(draws.len(), 1500);
    let mle = mle_fit(&data, family).unwrap();
    for (j, (t, m)) in [1.0, 2.0, 3.0].iter().zip(mle.params).enumerate() {
        let (lo, hi) = credible_interval(&draws.column(j), 0.99).unwrap();
        assert!(lo < *t && *t < hi, "param {j}: ({lo}, {hi}) misses {t}");
        assert!(lo < m && m < hi, "param {j}: MLE {m} outside ({lo}, {hi})");
    }
}

#[test]
fn censored_data_flow() {
    let family = SkewFamily::skew_normal();
    let truth = SkewSymmetric::new(0.0, 1.0, 2.0, family).unwrap();
    let ys = truth.sample(150, &mut ChaCha8Rng::seed_from_u64(8));
    // Round to a 0.5 grid: every value becomes the interval it fell into.
    let censored: Vec<Interval> = ys
        .iter()
        .map(|y| {
            let lo = (y * 2.0).floor() / 2.0;
            Interval::new(lo, lo + 0.5).unwrap()
        })
        .collect();
    let data = Dataset::new(vec![], censored).unwrap();
    assert_eq!(check_censored(&data, family.base).verdict, Verdict::Proper);

    let draws = sample_posterior(&data, family, &jeffreys(family), &short_chain(9)).unwrap();
    let means = draws.means();
    assert!(means.iter().all(|m| m.is_finite()));
    assert!((means[1] - 1.0).abs() < 0.4, "sigma mean {}", means[1]);
}

#[test]
fn jeffreys_and_benchmark_priors_agree_on_large_samples() {
    let family = SkewFamily::skew_logistic();
    let table = JeffreysTable::build(family, &GridSpec::default()).unwrap();
    let approx = fit_t_approx(&table);
    let benchmark = PriorSpec::benchmark(LambdaPrior::StudentT(approx));
    let ys = SkewSymmetric::new(0.0, 1.0, 1.0, family)
        .unwrap()
        .sample(300, &mut ChaCha8Rng::seed_from_u64(2));
    let data = Dataset::exact(ys).unwrap();
    let a = sample_posterior(
        &data,
        family,
        &PriorSpec::independence_jeffreys(Arc::new(table)),
        &short_chain(1),
    )
    .unwrap();
    let b = sample_posterior(&data, family, &benchmark, &short_chain(1)).unwrap();
    for j in 0..3 {
        let (ma, mb) = (a.means()[j], b.means()[j]);
        assert!((ma - mb).abs() < 0.15, "param {j}: {ma} vs {mb}");
    }
}

#[test]
fn marginal_likelihood_prefers_the_generating_family() {
    let truth = SkewSymmetric::new(0.0, 1.0, 4.0, SkewFamily::skew_normal()).unwrap();
    let ys = truth.sample(2000, &mut ChaCha8Rng::seed_from_u64(14));
    let data = Dataset::exact(ys).unwrap();
    let log_ml = |family: SkewFamily| {
        let prior = jeffreys(family);
        let draws = sample_posterior(&data, family, &prior, &short_chain(3)).unwrap();
        marginal_likelihood(&data, family, &prior, &draws, 5_000, 17)
            .unwrap()
            .log_value
    };
    // The two families separate by about 0.007 nats per observation here.
    assert!(log_ml(SkewFamily::skew_normal()) > log_ml(SkewFamily::skew_logistic()) + 5.0);
}

#[test]
fn stress_strength_tracks_the_plug_in_value() {
    let family = SkewFamily::skew_logistic();
    let z = SkewSymmetric::new(0.5, 1.0, -1.0, family)
        .unwrap()
        .sample(300, &mut ChaCha8Rng::seed_from_u64(30));
    let y: Vec<f64> = (0..z.len()).map(|i| i as f64 * 0.01).collect();
    let x: Vec<f64> = z.iter().zip(&y).map(|(a, b)| a + b).collect();
    let sample = PairedSample::new(x, y).unwrap();
    let fit = posterior_theta(
        &sample,
        family,
        &jeffreys(family),
        &short_chain(5),
        0.95,
        false,
    )
    .unwrap();
    let mle = mle_fit(&Dataset::exact(sample.differences()).unwrap(), family).unwrap();
    let [mu, sigma, lambda] = mle.params;
    let plug_in = theta_from_params(mu, sigma, lambda, family).unwrap();
    assert!(fit.theta.interval.0 < plug_in && plug_in < fit.theta.interval.1);
    assert!(!fit.forced);
}

#[test]
fn improper_inputs_are_refused() {
    let family = SkewFamily::skew_normal();
    let sample = PairedSample::new(vec![1.0, 2.0, 3.0], vec![0.0, 1.0, 2.0]).unwrap();
    let err = posterior_theta(
        &sample,
        family,
        &jeffreys(family),
        &short_chain(1),
        0.95,
        false,
    )
    .unwrap_err();
    assert!(matches!(err, Error::NotProper(_)));
}
