//! Log odds of survival at a fixed horizon.
//!
//! `p` is the probability of surviving to the horizon, so a higher log
//! odds means a better prognosis. Models quoted on the death scale (where
//! positive coefficients mean worse outcomes) correspond to the negated
//! score; see [`LogOddsScore::death_log_odds`].

use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::dataset::{Covariate, EventPolicy, Outcome, PatientRecord};
use crate::error::{Error, Result};

pub const DEFAULT_HORIZON_MONTHS: f64 = 60.0;

/// A standardized coefficient beyond this is treated as separation.
const SEPARATION_BOUND: f64 = 30.0;
/// Largest Newton step (standardized units) tolerated at convergence.
const RIDGE_STEP: f64 = 1e-4;

/// Outcome at the horizon for each record: `labels[i]` is `true` for
/// survival past the horizon; `included[i]` is `false` for records
/// censored before it.
#[derive(Clone, Debug, PartialEq)]
pub struct Binarized {
    pub labels: Vec<bool>,
    pub included: Vec<bool>,
}

impl Binarized {
    pub fn n_included(&self) -> usize {
        self.included.iter().filter(|&&m| m).count()
    }
}

/// Survived past the horizon (`Some(true)`), had an event before it
/// (`Some(false)`), or censored before it (`None`).
pub fn horizon_label(survival_months: f64, outcome: Outcome, horizon_months: f64, policy: EventPolicy) -> Option<bool> {
    if survival_months >= horizon_months {
        Some(true)
    } else if policy.is_event(outcome) {
        Some(false)
    } else {
        None
    }
}

pub fn binarize_outcome(records: &[PatientRecord], horizon_months: f64, policy: EventPolicy) -> Result<Binarized> {
    if !(horizon_months > 0.0 && horizon_months.is_finite()) {
        return Err(Error::Domain(format!("horizon must be positive, got {horizon_months}")));
    }
    let mut out = Binarized { labels: Vec::with_capacity(records.len()), included: Vec::with_capacity(records.len()) };
    for r in records {
        let label = horizon_label(r.survival_months, r.outcome, horizon_months, policy);
        out.labels.push(label.unwrap_or(false));
        out.included.push(label.is_some());
    }
    if out.n_included() == 0 {
        return Err(Error::Degenerate(format!("no subjects have a known outcome at {horizon_months} months")));
    }
    Ok(out)
}

/// Complete-case design for the logistic model.
#[derive(Clone, Debug, PartialEq)]
pub struct LogisticCohort {
    pub covariate_names: Vec<String>,
    pub ids: Vec<String>,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<bool>,
    pub horizon_months: f64,
    /// Censored before the horizon.
    pub excluded_censored: usize,
    /// Missing a covariate.
    pub excluded_missing: usize,
}

pub fn logistic_cohort(
    records: &[PatientRecord],
    covariates: &[Covariate],
    horizon_months: f64,
    policy: EventPolicy,
) -> Result<LogisticCohort> {
    let b = binarize_outcome(records, horizon_months, policy)?;
    let mut c = LogisticCohort {
        covariate_names: covariates.iter().map(|c| c.name().to_string()).collect(),
        ids: Vec::new(),
        features: Vec::new(),
        labels: Vec::new(),
        horizon_months,
        excluded_censored: 0,
        excluded_missing: 0,
    };
    for (i, r) in records.iter().enumerate() {
        if !b.included[i] {
            c.excluded_censored += 1;
            continue;
        }
        match covariates.iter().map(|cov| cov.value(r)).collect::<Option<Vec<f64>>>() {
            Some(x) => {
                c.ids.push(r.id.clone());
                c.features.push(x);
                c.labels.push(b.labels[i]);
            }
            None => c.excluded_missing += 1,
        }
    }
    if c.ids.is_empty() {
        return Err(Error::Degenerate("no complete subjects with a known outcome at the horizon".into()));
    }
    Ok(c)
}

#[derive(Clone, Copy, Debug)]
pub struct LogisticOptions {
    /// Penalty `ridge / 2 * |beta|^2` on the slopes (never the intercept).
    pub ridge: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    pub horizon_months: f64,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        Self { ridge: 0.0, tol: 1e-9, max_iter: 100, max_halvings: 20, horizon_months: DEFAULT_HORIZON_MONTHS }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    pub intercept: f64,
    pub beta: Vec<f64>,
    /// Inverse observed information over `(intercept, beta...)`.
    pub covariance: Vec<Vec<f64>>,
    pub loglik: f64,
    pub n_used: usize,
    pub horizon_months: f64,
    pub converged: bool,
    pub covariate_names: Vec<String>,
    #[serde(default)]
    pub ridge: f64,
    #[serde(skip)]
    pub iterations: usize,
}

impl LogisticFit {
    /// Model with externally supplied coefficients, for scoring only.
    pub fn from_coefficients(covariate_names: Vec<String>, intercept: f64, beta: Vec<f64>, horizon_months: f64) -> Self {
        let p = beta.len() + 1;
        Self {
            intercept,
            beta,
            covariance: vec![vec![0.0; p]; p],
            loglik: f64::NAN,
            n_used: 0,
            horizon_months,
            converged: true,
            covariate_names,
            ridge: 0.0,
            iterations: 0,
        }
    }

    pub fn std_errors(&self) -> Vec<f64> {
        (0..self.covariance.len()).map(|j| self.covariance[j][j].max(0.0).sqrt()).collect()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

#[derive(Clone, Debug)]
pub struct LogisticLikelihood {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

fn check_shapes(features: &[Vec<f64>], labels: &[bool], p: usize) -> Result<()> {
    if features.len() != labels.len() {
        return Err(Error::Domain(format!("{} feature rows but {} labels", features.len(), labels.len())));
    }
    if let Some(row) = features.iter().find(|r| r.len() != p) {
        return Err(Error::Domain(format!("feature row has {} values, expected {p}", row.len())));
    }
    Ok(())
}

/// Bernoulli log-likelihood over `theta = (intercept, beta...)`, minus
/// the ridge penalty on `beta`.
pub fn logistic_loglik(features: &[Vec<f64>], labels: &[bool], theta: &[f64], ridge: f64) -> Result<LogisticLikelihood> {
    let k = theta.len();
    if k == 0 {
        return Err(Error::Domain("theta must hold at least the intercept".into()));
    }
    check_shapes(features, labels, k - 1)?;
    let mut value = 0.0;
    let mut gradient = DVector::zeros(k);
    let mut hessian = DMatrix::zeros(k, k);
    let mut z = vec![1.0; k];
    for (x, &y) in features.iter().zip(labels) {
        z[1..].copy_from_slice(x);
        let eta: f64 = z.iter().zip(theta).map(|(a, b)| a * b).sum();
        let yv = if y { 1.0 } else { 0.0 };
        value += yv * eta - softplus(eta);
        let p = sigmoid(eta);
        let w = p * (1.0 - p);
        for a in 0..k {
            gradient[a] += (yv - p) * z[a];
            for b in 0..=a {
                hessian[(a, b)] -= w * z[a] * z[b];
            }
        }
    }
    for a in 1..k {
        value -= 0.5 * ridge * theta[a] * theta[a];
        gradient[a] -= ridge * theta[a];
        hessian[(a, a)] -= ridge;
    }
    for a in 0..k {
        for b in (a + 1)..k {
            hessian[(a, b)] = hessian[(b, a)];
        }
    }
    Ok(LogisticLikelihood { value, gradient, hessian })
}

fn column_stats(features: &[Vec<f64>], names: &[String]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = features.len() as f64;
    let p = names.len();
    let mut mean = vec![0.0; p];
    let mut sd = vec![0.0; p];
    for j in 0..p {
        let col = features.iter().map(|r| r[j]);
        let (lo, hi) = col.clone().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
        if !(hi > lo) {
            return Err(Error::ConstantColumn(names[j].clone()));
        }
        mean[j] = col.clone().sum::<f64>() / n;
        sd[j] = (col.map(|v| (v - mean[j]).powi(2)).sum::<f64>() / n).sqrt();
    }
    Ok((mean, sd))
}

/// Labels of the parameters loading on the near-null direction of `info`.
fn involved(info: &DMatrix<f64>, labels: &[String]) -> Vec<String> {
    let eig = SymmetricEigen::new(info.clone());
    let v = eig.eigenvectors.column(eig.eigenvalues.imin());
    let out: Vec<String> = v.iter().zip(labels).filter(|(c, _)| c.abs() > 0.1).map(|(_, l)| l.clone()).collect();
    if out.is_empty() {
        labels.to_vec()
    } else {
        out
    }
}

/// Reciprocal condition number of the unit-diagonal rescaling below 1e-12.
fn ill_conditioned(info: &DMatrix<f64>) -> bool {
    let d: Vec<f64> = info.diagonal().iter().map(|v| 1.0 / v.max(f64::MIN_POSITIVE).sqrt()).collect();
    let scaled = DMatrix::from_fn(info.nrows(), info.ncols(), |a, b| info[(a, b)] * d[a] * d[b]);
    let eig = SymmetricEigen::new(scaled).eigenvalues;
    eig.min() < 1e-12 * eig.max()
}

/// Maximum-likelihood logistic regression by Newton iterations (IRLS).
pub fn logistic_fit(features: &[Vec<f64>], labels: &[bool], names: &[String], options: &LogisticOptions) -> Result<LogisticFit> {
    let p = names.len();
    check_shapes(features, labels, p)?;
    let positives = labels.iter().filter(|&&y| y).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::Degenerate(format!(
            "logistic model needs both outcomes, found {positives} survivors among {}",
            labels.len()
        )));
    }
    if !(options.ridge >= 0.0 && options.ridge.is_finite()) {
        return Err(Error::Config(format!("ridge must be non-negative, got {}", options.ridge)));
    }
    let (mean, sd) = column_stats(features, names)?;
    let param_labels: Vec<String> = std::iter::once("intercept".to_string()).chain(names.iter().cloned()).collect();

    // Linear predictor at the covariate means, in standardized units.
    let separated = |theta: &[f64]| -> Vec<String> {
        let centre = theta[0] + (0..p).map(|j| theta[j + 1] * mean[j]).sum::<f64>();
        let mut bad: Vec<String> = (0..p)
            .filter(|&j| (theta[j + 1] * sd[j]).abs() > SEPARATION_BOUND)
            .map(|j| names[j].clone())
            .collect();
        if centre.abs() > SEPARATION_BOUND {
            bad.insert(0, "intercept".into());
        }
        bad
    };

    let mut theta = vec![0.0; p + 1];
    let mut cur = logistic_loglik(features, labels, &theta, options.ridge)?;
    // At the start every weight is 1/4, so the information is the scaled
    // cross-product matrix and collinear columns show up here exactly.
    if ill_conditioned(&-&cur.hessian) {
        return Err(Error::Singular(involved(&-&cur.hessian, &param_labels)));
    }
    let mut converged = false;
    let mut iterations = 0;
    for iter in 1..=options.max_iter {
        if cur.gradient.amax() < options.tol {
            converged = true;
            break;
        }
        let info = -&cur.hessian;
        let Some(chol) = info.clone().cholesky() else {
            return Err(Error::Singular(involved(&info, &param_labels)));
        };
        let mut step = chol.solve(&cur.gradient);
        let mut candidate: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, s)| t + s).collect();
        let mut next = logistic_loglik(features, labels, &candidate, options.ridge)?;
        if cur.gradient.dot(&step) <= 1e-12 * cur.value.abs() {
            theta = candidate;
            cur = next;
            iterations = iter;
            converged = true;
            break;
        }
        let mut halvings = 0;
        while !(next.value >= cur.value) && halvings < options.max_halvings {
            step *= 0.5;
            candidate = theta.iter().zip(step.iter()).map(|(t, s)| t + s).collect();
            next = logistic_loglik(features, labels, &candidate, options.ridge)?;
            halvings += 1;
        }
        if !(next.value >= cur.value) {
            break;
        }
        let change = (next.value - cur.value).abs();
        theta = candidate;
        cur = next;
        iterations = iter;
        let bad = separated(&theta);
        if !bad.is_empty() {
            return Err(Error::Divergence(bad));
        }
        if change <= 1e-12 * cur.value.abs() {
            converged = true;
            break;
        }
    }

    let info = -&cur.hessian;
    let Some(chol) = info.clone().cholesky() else {
        return Err(Error::Singular(involved(&info, &param_labels)));
    };
    if converged {
        // A likelihood still climbing along a ridge is separation, even
        // when the per-iteration change has become tiny.
        let step = chol.solve(&cur.gradient);
        let bad: Vec<String> = (0..p)
            .filter(|&j| (step[j + 1] * sd[j]).abs() > RIDGE_STEP)
            .map(|j| names[j].clone())
            .collect();
        if !bad.is_empty() {
            return Err(Error::Divergence(bad));
        }
    }
    let cov = chol.inverse();
    Ok(LogisticFit {
        intercept: theta[0],
        beta: theta[1..].to_vec(),
        covariance: (0..=p).map(|a| (0..=p).map(|b| cov[(a, b)]).collect()).collect(),
        loglik: cur.value,
        n_used: labels.len(),
        horizon_months: options.horizon_months,
        converged,
        covariate_names: names.to_vec(),
        ridge: options.ridge,
        iterations,
    })
}

pub fn logistic_fit_cohort(cohort: &LogisticCohort, options: &LogisticOptions) -> Result<LogisticFit> {
    let options = LogisticOptions { horizon_months: cohort.horizon_months, ..*options };
    logistic_fit(&cohort.features, &cohort.labels, &cohort.covariate_names, &options)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogOddsScore {
    pub log_odds: f64,
    pub probability: f64,
}

impl LogOddsScore {
    /// Log odds of death by the horizon.
    pub fn death_log_odds(&self) -> f64 {
        -self.log_odds
    }
}

pub fn log_odds_score(fit: &LogisticFit, x: &[f64]) -> Result<LogOddsScore> {
    if x.len() != fit.beta.len() {
        return Err(Error::Domain(format!("model has {} covariates, got {} values", fit.beta.len(), x.len())));
    }
    let log_odds = fit.intercept + fit.beta.iter().zip(x).map(|(b, v)| b * v).sum::<f64>();
    Ok(LogOddsScore { log_odds, probability: sigmoid(log_odds) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredSubject {
    pub id: String,
    pub log_odds: f64,
    pub probability: f64,
    pub label_used: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogOddsHistogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub mean: f64,
    /// Sample standard deviation; zero for a single subject.
    pub sd: f64,
}

impl LogOddsHistogram {
    /// Equal-width bins over `[min, max]`. When every value is the same
    /// the bins span one unit centred on it.
    pub fn new(values: &[f64], bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::Config("histogram needs at least one bin".into()));
        }
        if values.is_empty() {
            return Err(Error::Degenerate("no scores to summarize".into()));
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        let width = (hi - lo) / bins as f64;
        let mut bin_edges: Vec<f64> = (0..bins).map(|i| lo + width * i as f64).collect();
        bin_edges.push(hi);
        let mut counts = vec![0u64; bins];
        for &v in values {
            let i = (((v - lo) / width).floor() as usize).min(bins - 1);
            counts[i] += 1;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Ok(Self { bin_edges, counts, mean, sd })
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["bin_lower", "bin_upper", "count"])?;
        for (i, c) in self.counts.iter().enumerate() {
            w.write_record([self.bin_edges[i].to_string(), self.bin_edges[i + 1].to_string(), c.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogOddsDistribution {
    pub subjects: Vec<ScoredSubject>,
    pub histogram: LogOddsHistogram,
    pub excluded_censored: usize,
    pub excluded_missing: usize,
}

impl LogOddsDistribution {
    pub fn write_scores_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["id", "log_odds", "probability", "label_used"])?;
        for s in &self.subjects {
            w.write_record([
                s.id.clone(),
                s.log_odds.to_string(),
                s.probability.to_string(),
                (s.label_used as u8).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Score every subject with a known outcome at the fit's horizon and
/// complete covariates.
pub fn log_odds_distribution(
    fit: &LogisticFit,
    records: &[PatientRecord],
    policy: EventPolicy,
    bins: usize,
) -> Result<LogOddsDistribution> {
    let covariates = fit
        .covariate_names
        .iter()
        .map(|n| n.parse::<Covariate>())
        .collect::<Result<Vec<_>>>()?;
    let cohort = logistic_cohort(records, &covariates, fit.horizon_months, policy)?;
    let subjects = cohort
        .ids
        .iter()
        .zip(&cohort.features)
        .zip(&cohort.labels)
        .map(|((id, x), &label)| {
            let s = log_odds_score(fit, x)?;
            Ok(ScoredSubject { id: id.clone(), log_odds: s.log_odds, probability: s.probability, label_used: label })
        })
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = subjects.iter().map(|s| s.log_odds).collect();
    Ok(LogOddsDistribution {
        histogram: LogOddsHistogram::new(&values, bins)?,
        subjects,
        excluded_censored: cohort.excluded_censored,
        excluded_missing: cohort.excluded_missing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::record;

    fn published() -> LogisticFit {
        LogisticFit::from_coefficients(
            vec!["age_years".into(), "tumor_size_mm".into(), "her2_status".into()],
            -2.23,
            vec![0.04, 0.0112, 0.46],
            60.0,
        )
    }

    #[test]
    fn published_model_plug_in() {
        let s = log_odds_score(&published(), &[62.0, 25.0, 1.0]).unwrap();
        assert!((s.log_odds - 0.99).abs() < 1e-12, "{}", s.log_odds);
        assert!((s.probability - 0.99f64.exp() / (1.0 + 0.99f64.exp())).abs() < 1e-15);
        assert_eq!(s.death_log_odds(), -s.log_odds);
    }

    #[test]
    fn score_edge_cases() {
        let fit = published();
        assert_eq!(log_odds_score(&fit, &[0.0; 3]).unwrap().log_odds, -2.23);
        let mid = LogisticFit::from_coefficients(vec!["x".into()], 0.0, vec![1.0], 60.0);
        assert_eq!(log_odds_score(&mid, &[0.0]).unwrap().probability, 0.5);
        assert!(log_odds_score(&fit, &[1.0]).is_err());
        let far = log_odds_score(&mid, &[800.0]).unwrap().probability;
        let near = log_odds_score(&mid, &[-800.0]).unwrap().probability;
        assert!(far == 1.0 && near == 0.0 && far.is_finite());
        for z in [-30.0, -3.0, 0.5, 12.0, 30.0] {
            let p = log_odds_score(&mid, &[z]).unwrap().probability;
            assert!((p - z.exp() / (1.0 + z.exp())).abs() < 1e-12);
        }
    }

    #[test]
    fn binarize_examples() {
        let recs = vec![
            record("a", Outcome::Alive, 80.0),
            record("b", Outcome::DiedBreastCancer, 30.0),
            record("c", Outcome::Alive, 40.0),
            record("d", Outcome::DiedOther, 20.0),
        ];
        let b = binarize_outcome(&recs, 60.0, EventPolicy::Overall).unwrap();
        assert_eq!(b.labels, [true, false, false, false]);
        assert_eq!(b.included, [true, true, false, true]);
        let cs = binarize_outcome(&recs, 60.0, EventPolicy::CauseSpecific).unwrap();
        assert_eq!(cs.included, [true, true, false, false]);
        assert!(binarize_outcome(&recs[2..3], 60.0, EventPolicy::Overall).is_err());
        assert!(binarize_outcome(&recs, 0.0, EventPolicy::Overall).is_err());
    }

    #[test]
    fn histogram_edge_cases() {
        let one = LogOddsHistogram::new(&[0.3], 5).unwrap();
        assert_eq!(one.counts.iter().filter(|&&c| c > 0).count(), 1);
        assert_eq!(one.sd, 0.0);
        let two = LogOddsHistogram::new(&[1.5, 1.5], 4).unwrap();
        assert!(two.counts.contains(&2));
        let h = LogOddsHistogram::new(&[-1.0, 0.0, 0.5, 1.0], 2).unwrap();
        assert_eq!(h.counts, [1, 3]);
        assert_eq!(h.bin_edges, [-1.0, 0.0, 1.0]);
        assert!(LogOddsHistogram::new(&[], 3).is_err());
    }

    #[test]
    fn single_class_is_rejected() {
        let x = vec![vec![1.0], vec![2.0], vec![3.0]];
        let err = logistic_fit(&x, &[true; 3], &["x".into()], &LogisticOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)));
    }

    #[test]
    fn separation_is_detected() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let y: Vec<bool> = (0..20).map(|i| i >= 10).collect();
        let err = logistic_fit(&x, &y, &["x".into()], &LogisticOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Divergence(ref v) if v.contains(&"x".to_string())), "{err:?}");
        // ridge rescues it
        let fit = logistic_fit(&x, &y, &["x".into()], &LogisticOptions { ridge: 1.0, ..Default::default() }).unwrap();
        assert!(fit.converged && fit.beta[0] > 0.0);
    }

    #[test]
    fn collinear_columns_are_singular() {
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![(i % 7) as f64, 2.0 * (i % 7) as f64]).collect();
        let y: Vec<bool> = (0..30).map(|i| i % 3 == 0).collect();
        let err = logistic_fit(&x, &y, &["a".into(), "b".into()], &LogisticOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Singular(ref v) if v.contains(&"a".to_string()) && v.contains(&"b".to_string())), "{err:?}");
    }

    #[test]
    fn intercept_only_matches_empirical_logit() {
        let x: Vec<Vec<f64>> = (0..40).map(|i| vec![(i % 5) as f64]).collect();
        // label independent of x within each residue class: 1 of every 4
        let y: Vec<bool> = (0..40).map(|i| (i / 5) % 4 == 0).collect();
        let fit = logistic_fit(&x, &y, &["x".into()], &LogisticOptions::default()).unwrap();
        assert!(fit.beta[0].abs() < 1e-8);
        assert!((fit.intercept - (0.25f64 / 0.75).ln()).abs() < 1e-8);
    }
}
