use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use survkit::dataset::{Covariate, EventPolicy};
use survkit::logodds::{
    log_odds_distribution, logistic_cohort, logistic_fit, logistic_fit_cohort, logistic_loglik, LogisticOptions,
};
use survkit::synth::{generate_cohort, Baseline, Censoring, Generator, SplitMix64, SynthCovariate, SynthSpec};

fn logistic_data(n: usize, seed: u64, b0: f64, b1: f64) -> (Vec<Vec<f64>>, Vec<bool>) {
    let mut rng = SplitMix64::new(seed);
    (0..n)
        .map(|_| {
            let x = 2.0 * rng.next_open01() - 1.0;
            let p = 1.0 / (1.0 + (-(b0 + b1 * x)).exp());
            (vec![x], rng.next_open01() < p)
        })
        .unzip()
}

#[test]
fn recovers_known_coefficients() {
    let (x, y) = logistic_data(5000, 31, -1.0, 2.0);
    let fit = logistic_fit(&x, &y, &["x".into()], &LogisticOptions::default()).unwrap();
    assert!(fit.converged);
    assert!((fit.intercept + 1.0).abs() < 0.1, "{}", fit.intercept);
    assert!((fit.beta[0] - 2.0).abs() < 0.1, "{}", fit.beta[0]);
    let g = logistic_loglik(&x, &y, &[fit.intercept, fit.beta[0]], 0.0).unwrap().gradient;
    assert!(g.amax() < 1e-8, "{}", g.amax());
}

#[test]
fn null_feature_within_three_standard_errors() {
    let (x, y) = logistic_data(2000, 5, 0.3, 0.0);
    let fit = logistic_fit(&x, &y, &["x".into()], &LogisticOptions::default()).unwrap();
    let se = fit.std_errors();
    assert!(fit.beta[0].abs() < 3.0 * se[1], "{} vs se {}", fit.beta[0], se[1]);
    for a in 0..2 {
        for b in 0..2 {
            assert_eq!(fit.covariance[a][b], fit.covariance[b][a]);
        }
        assert!(fit.covariance[a][a] >= 0.0);
    }
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = StdRng::seed_from_u64(4);
    for _ in 0..10 {
        let x: Vec<Vec<f64>> = (0..30).map(|_| vec![rng.random_range(30.0..80.0), rng.random_range(0.0..1.0f64).round()]).collect();
        let y: Vec<bool> = (0..30).map(|_| rng.random_bool(0.5)).collect();
        for _ in 0..10 {
            let theta = [rng.random_range(-2.0..2.0), rng.random_range(-0.05..0.05), rng.random_range(-1.0..1.0)];
            let at = logistic_loglik(&x, &y, &theta, 0.0).unwrap();
            for j in 0..3 {
                let h = 1e-6 * theta[j].abs().max(1e-2);
                let mut up = theta;
                let mut dn = theta;
                up[j] += h;
                dn[j] -= h;
                let fd = (logistic_loglik(&x, &y, &up, 0.0).unwrap().value - logistic_loglik(&x, &y, &dn, 0.0).unwrap().value) / (2.0 * h);
                assert!((fd - at.gradient[j]).abs() <= 1e-6 * at.gradient[j].abs().max(1.0), "{fd} vs {}", at.gradient[j]);
            }
        }
    }
}

#[test]
fn extra_iteration_is_a_fixed_point() {
    let (x, y) = logistic_data(800, 9, 0.5, -1.0);
    let fit = logistic_fit(&x, &y, &["x".into()], &LogisticOptions::default()).unwrap();
    let theta = [fit.intercept, fit.beta[0]];
    let ll = logistic_loglik(&x, &y, &theta, 0.0).unwrap();
    let step = (-&ll.hessian).cholesky().unwrap().solve(&ll.gradient);
    assert!(step.amax() < 1e-9, "{}", step.amax());
}

#[test]
fn balanced_cohort_scores_centre_on_zero() {
    // exponential baseline with median 60 months: half survive the horizon
    let spec = SynthSpec {
        n: 3000,
        seed: 2718,
        baseline: Baseline::Exponential { lambda: 60.0 / std::f64::consts::LN_2 },
        censoring: Censoring::None,
        covariates: vec![
            SynthCovariate { name: "age_years".into(), beta: 0.0, generator: Generator::Uniform { lo: 30.0, hi: 85.0 } },
            SynthCovariate { name: "her2_status".into(), beta: 0.0, generator: Generator::Bernoulli { p: 0.3 } },
        ],
        breast_cancer_death_fraction: 1.0,
    };
    let records = generate_cohort(&spec).unwrap();
    let covs = [Covariate::AgeYears, Covariate::Her2Status];
    let cohort = logistic_cohort(&records, &covs, 60.0, EventPolicy::Overall).unwrap();
    assert_eq!(cohort.excluded_censored, 0);
    let fit = logistic_fit_cohort(&cohort, &LogisticOptions::default()).unwrap();
    let dist = log_odds_distribution(&fit, &records, EventPolicy::Overall, 20).unwrap();
    assert_eq!(dist.histogram.counts.iter().sum::<u64>(), 3000);
    assert!(dist.histogram.mean.abs() < 0.1, "{}", dist.histogram.mean);
    assert!(dist.subjects.iter().all(|s| s.probability > 0.0 && s.probability < 1.0));
}
