//! Acceptance suite. Every criterion runs, prints `criterion N: PASS` or
//! `criterion N: FAIL`, and the process exits non-zero if any failed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use survkit::cox::{cox_fit, cox_fit_data, hazard_ratios, partial_loglik, CoxFit, CoxOptions, Ties};
use survkit::dataset::SurvivalSample;
use survkit::eval::concordance_index;
use survkit::km::{km_fit, logrank_test};
use survkit::logodds::{log_odds_score, logistic_loglik, LogisticFit};
use survkit::parametric::{fit_parametric, log_likelihood, survival_function, Family, Params};
use survkit::synth::{generate_samples, Baseline, Censoring, Generator, SplitMix64, SynthCovariate, SynthSpec};

/// Collects failed checks so a criterion reports all of them at once.
#[derive(Default)]
struct Checks {
    failures: Vec<String>,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn close(&mut self, got: f64, want: f64, tol: f64, what: &str) {
        self.check((got - want).abs() <= tol, || format!("{what}: got {got}, want {want} (tol {tol:e})"));
    }
}

fn uniform(rng: &mut SplitMix64, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.next_open01()
}

fn names(p: usize) -> Vec<String> {
    (0..p).map(|j| format!("x{j}")).collect()
}

/// Small cohort with covariates in (-2, 2); `distinct` gives every subject
/// its own time, otherwise times fall on a coarse integer grid.
fn small_cohort(rng: &mut SplitMix64, n: usize, p: usize, distinct: bool) -> Vec<SurvivalSample> {
    (0..n)
        .map(|i| {
            let t = if distinct { i as f64 + rng.next_open01() } else { 1.0 + (rng.next_open01() * 7.0).floor() };
            let event = rng.next_open01() < 0.7;
            let x = (0..p).map(|_| uniform(rng, -2.0, 2.0)).collect();
            SurvivalSample::with_covariates(t, event, x)
        })
        .collect()
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

// ---------------------------------------------------------------------------

fn criterion_1(c: &mut Checks) {
    // Published rows: (variable, coefficient, printed hazard ratio).
    let rows = [
        ("age_years", 0.046, 1.047),
        ("tumor_size_mm", 0.011, 1.011),
        ("er_status", -0.127, 0.881),
        ("her2_status", 0.464, 1.591),
        ("hormone_therapy", 0.015, 1.016),
        ("radiotherapy", -0.011, 0.989),
        ("chemotherapy", 0.580, 1.786),
        ("mastectomy_flag", 0.292, 1.339),
    ];
    let fit = CoxFit::from_coefficients(
        rows.iter().map(|r| r.0.to_string()).collect(),
        rows.iter().map(|r| r.1).collect(),
    );
    let table = hazard_ratios(&fit).expect("hazard ratio table");
    c.check(table.rows.len() == 8, || format!("{} rows", table.rows.len()));
    for (row, (name, coef, printed)) in table.rows.iter().zip(rows) {
        c.check((row.hazard_ratio - printed).abs() < 0.002, || {
            format!("{name}: exp({coef}) = {} vs printed {printed}", row.hazard_ratio)
        });
        c.check(row.hazard_ratio == f64::exp(coef), || format!("{name}: HR is not exp(coef)"));
    }
}

fn criterion_2(c: &mut Checks) {
    let fit = LogisticFit::from_coefficients(
        vec!["age_years".into(), "tumor_size_mm".into(), "her2_status".into()],
        -2.23,
        vec![0.04, 0.0112, 0.46],
        60.0,
    );
    let s = log_odds_score(&fit, &[62.0, 25.0, 1.0]).expect("score");
    c.close(s.log_odds, 0.99, 1e-12, "log-odds");
    let oracle = 1.0 / (1.0 + (-0.99f64).exp());
    c.close(s.probability, oracle, 1e-15, "probability vs logistic function");
    c.close(s.probability, 0.7293, 1e-4, "probability vs stated 0.7293");
}

fn criterion_3(c: &mut Checks) {
    let five: Vec<SurvivalSample> = [(1.0, true), (2.0, false), (3.0, true), (4.0, false), (5.0, true)]
        .iter()
        .map(|&(t, e)| SurvivalSample::new(t, e))
        .collect();
    let curve = km_fit(&five).expect("km");
    c.check(curve.event_times == [1.0, 3.0, 5.0], || format!("event times {:?}", curve.event_times));
    for (got, want) in curve.survival.iter().zip([0.8, 0.8 * 2.0 / 3.0, 0.0]) {
        c.close(*got, want, 1e-12, "five-subject survival");
    }

    let mut rng = SplitMix64::new(3);
    for cohort in 0..100 {
        let n = 1 + (rng.next_u64() % 200) as usize;
        // Integer times on a short grid so that ties occur.
        let times: Vec<f64> = (0..n).map(|_| 1.0 + (rng.next_u64() % 40) as f64).collect();
        let samples: Vec<_> = times.iter().map(|&t| SurvivalSample::new(t, true)).collect();
        let curve = km_fit(&samples).expect("km");
        for (t, s) in curve.event_times.iter().zip(&curve.survival) {
            let empirical = times.iter().filter(|&&u| u > *t).count() as f64 / n as f64;
            c.check(*s == empirical, || format!("cohort {cohort}, t = {t}: {s} vs empirical {empirical}"));
        }
    }
}

fn criterion_4(c: &mut Checks) {
    let spec = SynthSpec {
        n: 2000,
        seed: 1001,
        baseline: Baseline::Exponential { lambda: 1.0 },
        censoring: Censoring::Exponential { rate: 0.54 },
        covariates: vec![
            SynthCovariate { name: "x1".into(), beta: 0.5, generator: Generator::Bernoulli { p: 0.5 } },
            SynthCovariate { name: "x2".into(), beta: -0.3, generator: Generator::Uniform { lo: -1.0, hi: 1.0 } },
        ],
        breast_cancer_death_fraction: 1.0,
    };
    let data = generate_samples(&spec).expect("synth");
    let censored = data.samples.iter().filter(|s| !s.event).count() as f64 / spec.n as f64;
    c.check((censored - 0.30).abs() < 0.03, || format!("censoring fraction {censored}"));
    let fit = cox_fit_data(&data, &CoxOptions::default()).expect("cox fit");
    c.check(fit.converged, || "not converged".into());
    let se = fit.std_errors();
    for (j, truth) in [0.5, -0.3].into_iter().enumerate() {
        c.check((fit.beta[j] - truth).abs() < 0.1, || format!("beta[{j}] = {}", fit.beta[j]));
        let (lo, hi) = (fit.beta[j] - 1.96 * se[j], fit.beta[j] + 1.96 * se[j]);
        c.check(lo <= truth && truth <= hi, || format!("truth {truth} outside [{lo}, {hi}]"));
    }
}

fn criterion_5(c: &mut Checks) {
    const H: f64 = 1e-5;
    let mut rng = SplitMix64::new(5);
    for cohort in 0..10 {
        let samples = small_cohort(&mut rng, 30, 2, false);
        let features: Vec<Vec<f64>> = samples.iter().map(|s| s.covariates.clone()).collect();
        let labels: Vec<bool> = samples.iter().map(|s| s.event).collect();
        for _ in 0..10 {
            let beta = [uniform(&mut rng, -1.0, 1.0), uniform(&mut rng, -1.0, 1.0)];
            for ties in [Ties::Efron, Ties::Breslow] {
                let at = partial_loglik(&samples, &beta, ties).expect("partial loglik");
                for j in 0..2 {
                    let (mut up, mut dn) = (beta, beta);
                    up[j] += H;
                    dn[j] -= H;
                    let fd = (partial_loglik(&samples, &up, ties).unwrap().value
                        - partial_loglik(&samples, &dn, ties).unwrap().value)
                        / (2.0 * H);
                    let g = at.gradient[j];
                    c.check(relative_gap(g, fd) < 1e-6, || format!("cox {ties} cohort {cohort}, d{j}: {g} vs {fd}"));
                }
            }

            let theta = [uniform(&mut rng, -1.0, 1.0), uniform(&mut rng, -1.0, 1.0), uniform(&mut rng, -1.0, 1.0)];
            let at = logistic_loglik(&features, &labels, &theta, 0.0).expect("logistic loglik");
            for j in 0..3 {
                let (mut up, mut dn) = (theta, theta);
                up[j] += H;
                dn[j] -= H;
                let fd = (logistic_loglik(&features, &labels, &up, 0.0).unwrap().value
                    - logistic_loglik(&features, &labels, &dn, 0.0).unwrap().value)
                    / (2.0 * H);
                let g = at.gradient[j];
                c.check(relative_gap(g, fd) < 1e-6, || format!("logistic cohort {cohort}, d{j}: {g} vs {fd}"));
            }
        }
    }
}

fn criterion_6(c: &mut Checks) {
    let mut rng = SplitMix64::new(6);
    for cohort in 0..20 {
        let samples = small_cohort(&mut rng, 60, 2, true);
        let fit = |ties| cox_fit(&samples, &names(2), &CoxOptions { ties, ..CoxOptions::default() }).expect("cox fit");
        let (e, b) = (fit(Ties::Efron), fit(Ties::Breslow));
        for j in 0..2 {
            c.check((e.beta[j] - b.beta[j]).abs() < 1e-10, || {
                format!("cohort {cohort}, beta[{j}]: efron {} vs breslow {}", e.beta[j], b.beta[j])
            });
        }
    }
}

fn criterion_7(c: &mut Checks) {
    let mut rng = SplitMix64::new(7);
    let opts = CoxOptions::default();
    for cohort in 0..10 {
        let samples = small_cohort(&mut rng, 80, 2, false);
        let base = cox_fit(&samples, &names(2), &opts).expect("cox fit");
        let transformed = |shift: f64, scale: f64| -> Vec<f64> {
            let moved: Vec<SurvivalSample> = samples
                .iter()
                .map(|s| SurvivalSample::with_covariates(s.time, s.event, vec![s.covariates[0] * scale + shift, s.covariates[1]]))
                .collect();
            cox_fit(&moved, &names(2), &opts).expect("cox fit").beta
        };
        let shifted = transformed(37.5, 1.0);
        let scaled = transformed(0.0, 4.0);
        for (j, (s, b)) in shifted.iter().zip(&base.beta).enumerate() {
            c.check((s - b).abs() < 1e-8, || format!("cohort {cohort}: shift moved beta[{j}]"));
        }
        c.check((scaled[0] * 4.0 - base.beta[0]).abs() < 1e-8, || format!("cohort {cohort}: scale gave {}", scaled[0]));
        c.check((scaled[1] - base.beta[1]).abs() < 1e-8, || format!("cohort {cohort}: scale moved beta[1]"));
    }

    for v in 0..10 {
        let n = 60;
        let times: Vec<f64> = (0..n).map(|_| 1.0 + (rng.next_u64() % 25) as f64).collect();
        let events: Vec<bool> = (0..n).map(|_| rng.next_open01() < 0.6).collect();
        let scores: Vec<f64> = (0..n).map(|_| (uniform(&mut rng, -3.0, 3.0) * 4.0).round() / 4.0).collect();
        let base = concordance_index(&times, &events, &scores).expect("c-index");
        for (name, f) in [("exp", f64::exp as fn(f64) -> f64), ("cube", |x: f64| x * x * x), ("affine", |x: f64| 3.0 * x + 11.0)] {
            let mapped: Vec<f64> = scores.iter().map(|&x| f(x)).collect();
            let r = concordance_index(&times, &events, &mapped).expect("c-index");
            c.check(r == base, || format!("vector {v}: {name} changed C from {} to {}", base.c_index, r.c_index));
        }
    }
}

fn criterion_8(c: &mut Checks) {
    let spec = SynthSpec {
        n: 2000,
        seed: 808,
        baseline: Baseline::Weibull { lambda: 10.0, gamma: 1.5 },
        censoring: Censoring::Uniform { max: 36.1 },
        covariates: Vec::new(),
        breast_cancer_death_fraction: 1.0,
    };
    let data = generate_samples(&spec).expect("synth");
    let censored = data.samples.iter().filter(|s| !s.event).count() as f64 / spec.n as f64;
    c.check((censored - 0.25).abs() < 0.03, || format!("censoring fraction {censored}"));
    let fit = fit_parametric(&data.samples, Family::Weibull).expect("weibull fit");
    c.check(fit.converged, || "weibull not converged".into());
    c.check((fit.params.lambda / 10.0 - 1.0).abs() <= 0.10, || format!("lambda {}", fit.params.lambda));
    let gamma = fit.params.gamma.unwrap_or(f64::NAN);
    c.check((gamma / 1.5 - 1.0).abs() <= 0.10, || format!("gamma {gamma}"));

    let mut rng = SplitMix64::new(8);
    let times: Vec<f64> = (0..300).map(|_| uniform(&mut rng, 0.5, 80.0)).collect();
    let samples: Vec<_> = times.iter().map(|&t| SurvivalSample::new(t, true)).collect();
    let closed = times.iter().sum::<f64>() / times.len() as f64;
    let fit = fit_parametric(&samples, Family::Exponential).expect("exponential fit");
    c.check((fit.params.lambda - closed).abs() < 1e-8 * closed, || format!("{} vs closed form {closed}", fit.params.lambda));

    for (lambda, gamma) in [(10.0, 1.5), (3.0, 0.7), (120.0, 4.0)] {
        let s = survival_function(Family::Loglogistic, Params { lambda, gamma: Some(gamma) }, lambda).expect("S");
        c.check(s == 0.5, || format!("log-logistic S(lambda) = {s} for ({lambda}, {gamma})"));
    }
}

fn criterion_9(c: &mut Checks) {
    let mut rng = SplitMix64::new(9);
    for cohort in 0..20 {
        let n = 50 + (rng.next_u64() % 150) as usize;
        let shape = uniform(&mut rng, 0.6, 2.5);
        let samples: Vec<SurvivalSample> = (0..n)
            .map(|_| {
                let t = 20.0 * (-rng.next_open01().ln()).powf(1.0 / shape);
                let cens = uniform(&mut rng, 5.0, 80.0);
                SurvivalSample::new(t.min(cens), t <= cens)
            })
            .collect();
        let mut ll = Vec::new();
        for family in Family::ALL {
            let fit = fit_parametric(&samples, family).expect("fit");
            let k = match family {
                Family::Exponential => 1.0,
                Family::Weibull | Family::Loglogistic => 2.0,
            };
            let aic = -2.0 * fit.loglik + 2.0 * k;
            let bic = -2.0 * fit.loglik + k * (n as f64).ln();
            c.close(fit.aic, aic, 1e-10, &format!("cohort {cohort} {family} AIC"));
            c.close(fit.bic, bic, 1e-10, &format!("cohort {cohort} {family} BIC"));
            let again = log_likelihood(&samples, family, fit.params).expect("loglik");
            c.close(fit.loglik, again, 1e-9 * again.abs().max(1.0), &format!("cohort {cohort} {family} loglik"));
            ll.push((family, fit.loglik));
        }
        let get = |f| ll.iter().find(|(g, _)| *g == f).map(|p| p.1).unwrap();
        let (w, e) = (get(Family::Weibull), get(Family::Exponential));
        c.check(w >= e - 1e-9, || format!("cohort {cohort}: weibull {w} < exponential {e}"));
    }
}

/// Harrell pairs counted by direct enumeration of every ordered pair.
fn brute_force_c(times: &[f64], events: &[bool], scores: &[f64]) -> (u64, u64, u64) {
    let (mut conc, mut disc, mut tied) = (0, 0, 0);
    for i in 0..times.len() {
        for j in 0..times.len() {
            if i == j || !events[i] {
                continue;
            }
            let earlier = times[i] < times[j] || (times[i] == times[j] && !events[j]);
            if !earlier {
                continue;
            }
            match scores[i].partial_cmp(&scores[j]).unwrap() {
                std::cmp::Ordering::Greater => conc += 1,
                std::cmp::Ordering::Less => disc += 1,
                std::cmp::Ordering::Equal => tied += 1,
            }
        }
    }
    (conc, disc, tied)
}

fn criterion_10(c: &mut Checks) {
    let mut rng = SplitMix64::new(10);
    let times: Vec<f64> = (0..50).map(|i| 1.0 + i as f64 + rng.next_open01() * 0.5).collect();
    let events: Vec<bool> = (0..50).map(|_| rng.next_open01() < 0.7).collect();
    let perfect: Vec<f64> = times.iter().map(|t| -t).collect();
    let r = concordance_index(&times, &events, &perfect).expect("c-index");
    c.check(r.c_index == 1.0, || format!("perfect ranking gave {}", r.c_index));
    let r = concordance_index(&times, &events, &vec![2.5; 50]).expect("c-index");
    c.check(r.c_index == 0.5, || format!("constant scores gave {}", r.c_index));

    for inst in 0..50 {
        let n = 2 + (rng.next_u64() % 99) as usize;
        let times: Vec<f64> = (0..n).map(|_| 1.0 + (rng.next_u64() % 20) as f64).collect();
        let mut events: Vec<bool> = (0..n).map(|_| rng.next_open01() < 0.6).collect();
        events[0] = true;
        let scores: Vec<f64> = (0..n).map(|_| (rng.next_u64() % 10) as f64).collect();
        let (conc, disc, tied) = brute_force_c(&times, &events, &scores);
        match concordance_index(&times, &events, &scores) {
            Ok(r) => {
                c.check((r.concordant, r.discordant, r.tied_risk) == (conc, disc, tied), || {
                    format!("instance {inst}: {:?} vs oracle {:?}", (r.concordant, r.discordant, r.tied_risk), (conc, disc, tied))
                });
                let want = (conc as f64 + 0.5 * tied as f64) / (conc + disc + tied) as f64;
                c.check(r.c_index == want, || format!("instance {inst}: C {} vs {want}", r.c_index));
            }
            Err(e) => c.check(conc + disc + tied == 0, || format!("instance {inst}: {e}")),
        }
    }
}

/// Two-group log-rank statistic tabulated over distinct event times.
fn logrank_oracle(a: &[(f64, bool)], b: &[(f64, bool)]) -> f64 {
    let mut event_times: Vec<f64> = a.iter().chain(b).filter(|s| s.1).map(|s| s.0).collect();
    event_times.sort_by(f64::total_cmp);
    event_times.dedup();
    let (mut o_minus_e, mut var) = (0.0, 0.0);
    for t in event_times {
        let at_risk = |g: &[(f64, bool)]| g.iter().filter(|s| s.0 >= t).count() as f64;
        let deaths = |g: &[(f64, bool)]| g.iter().filter(|s| s.0 == t && s.1).count() as f64;
        let (n1, n) = (at_risk(a), at_risk(a) + at_risk(b));
        let (d1, d) = (deaths(a), deaths(a) + deaths(b));
        o_minus_e += d1 - d * n1 / n;
        if n > 1.0 {
            var += d * (n1 / n) * (1.0 - n1 / n) * (n - d) / (n - 1.0);
        }
    }
    o_minus_e * o_minus_e / var
}

fn criterion_11(c: &mut Checks) {
    let mut rng = SplitMix64::new(11);
    let base: Vec<SurvivalSample> = (0..40)
        .map(|_| SurvivalSample::new(1.0 + (rng.next_u64() % 12) as f64, rng.next_open01() < 0.7))
        .collect();
    let doubled: Vec<SurvivalSample> = base.iter().chain(&base).cloned().collect();
    let labels: Vec<&str> = (0..80).map(|i| if i < 40 { "a" } else { "b" }).collect();
    let r = logrank_test(&doubled, &labels).expect("log-rank");
    c.close(r.chi_square, 0.0, 1e-9, "duplicated groups statistic");
    c.close(r.p_value, 1.0, 1e-9, "duplicated groups p-value");

    let a = [(1.0, true), (3.0, true), (5.0, true)];
    let b = [(2.0, true), (4.0, true), (6.0, false)];
    let samples: Vec<SurvivalSample> = a.iter().chain(&b).map(|&(t, e)| SurvivalSample::new(t, e)).collect();
    let labels = ["A", "A", "A", "B", "B", "B"];
    let r = logrank_test(&samples, &labels).expect("log-rank");
    let oracle = logrank_oracle(&a, &b);
    c.close(r.chi_square, oracle, 1e-9, "six-subject statistic");
    c.check(r.degrees_of_freedom == 1, || format!("df {}", r.degrees_of_freedom));
}

// ---------------------------------------------------------------------------

const SYNTH_SPEC: &str = r#"{
  "n": 400,
  "seed": 20240611,
  "baseline": {"family": "weibull", "lambda": 400.0, "gamma": 1.2},
  "censoring": {"kind": "uniform", "max": 200.0},
  "covariates": [
    {"name": "age_years", "beta": 0.046, "generator": {"dist": "uniform", "lo": 30, "hi": 80}},
    {"name": "tumor_size_mm", "beta": 0.011, "generator": {"dist": "uniform", "lo": 5, "hi": 60}},
    {"name": "er_status", "beta": -0.127, "generator": {"dist": "bernoulli", "p": 0.6}},
    {"name": "her2_status", "beta": 0.464, "generator": {"dist": "bernoulli", "p": 0.3}},
    {"name": "hormone_therapy", "beta": 0.015, "generator": {"dist": "bernoulli", "p": 0.5}},
    {"name": "radiotherapy", "beta": -0.011, "generator": {"dist": "bernoulli", "p": 0.5}},
    {"name": "chemotherapy", "beta": 0.58, "generator": {"dist": "bernoulli", "p": 0.5}},
    {"name": "mastectomy_flag", "beta": 0.292, "generator": {"dist": "bernoulli", "p": 0.4}}
  ],
  "breast_cancer_death_fraction": 0.8
}"#;

fn survkit(dir: &Path, args: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_survkit"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .output()
        .expect("spawn survkit");
    assert!(out.status.success(), "survkit {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
}

/// Synthesize a cohort, then run every analysis command into `dir`.
fn pipeline(root: &Path, dir: &Path) {
    let spec = root.join("spec.json");
    std::fs::write(&spec, SYNTH_SPEC).unwrap();
    let spec = spec.to_str().unwrap();
    survkit(dir, &["synth", "--spec", spec, "--seed", "77"]);
    let cohort = dir.join("cohort.csv");
    let cohort = cohort.to_str().unwrap();
    survkit(dir, &["summarize", "--input", cohort]);
    survkit(dir, &["km", "--input", cohort]);
    survkit(dir, &["km", "--input", cohort, "--strata", "age_years", "--cut", "60"]);
    survkit(dir, &["km", "--input", cohort, "--strata", "treatment"]);
    survkit(dir, &["cox", "--input", cohort]);
    survkit(dir, &["compare", "--input", cohort]);
    let logistic = dir.join("logistic_fit.json");
    survkit(dir, &["score", "--input", cohort, "--model", logistic.to_str().unwrap()]);
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn criterion_12(c: &mut Checks) {
    let root = tempfile::tempdir().expect("tempdir");
    let (a, b) = (root.path().join("a"), root.path().join("b"));
    pipeline(root.path(), &a);
    pipeline(root.path(), &b);
    let (ta, tb) = (tree(&a), tree(&b));
    c.check(ta.len() == tb.len(), || format!("{} files vs {}", ta.len(), tb.len()));
    c.check(ta.iter().any(|(n, _)| n.ends_with(".svg")), || "no SVG written".into());
    for ((na, ba), (nb, bb)) in ta.iter().zip(&tb) {
        c.check(na == nb && ba == bb, || format!("{na} differs between runs"));
    }
}

// ---------------------------------------------------------------------------

fn main() {
    let criteria: [fn(&mut Checks); 12] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
        criterion_11,
        criterion_12,
    ];
    let mut failed = Vec::new();
    for (i, run) in criteria.iter().enumerate() {
        let number = i + 1;
        let start = Instant::now();
        let mut checks = Checks::default();
        if let Err(panic) = catch_unwind(AssertUnwindSafe(|| run(&mut checks))) {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            checks.failures.push(msg);
        }
        let elapsed = start.elapsed().as_secs_f64();
        if checks.failures.is_empty() {
            println!("criterion {number}: PASS ({elapsed:.2} s)");
        } else {
            println!("criterion {number}: FAIL ({elapsed:.2} s)");
            for f in checks.failures.iter().take(10) {
                println!("    {f}");
            }
            if checks.failures.len() > 10 {
                println!("    ... {} more", checks.failures.len() - 10);
            }
            failed.push(number);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
