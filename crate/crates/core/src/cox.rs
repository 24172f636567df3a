//! Cox proportional-hazards regression.
//!
//! The log partial likelihood is maximized by Newton-Raphson from
//! `beta = 0` with step-halving. Covariates are centered (and non-binary
//! ones scaled to unit variance) before fitting; coefficients and their
//! covariance are mapped back to the original scale for every output.
//! Tied event times use the Efron approximation unless Breslow is
//! requested; with distinct event times both give the same numbers.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::dataset::{Covariate, SurvivalData, SurvivalSample};
use crate::error::{Error, Result};
use crate::km::Z_95;
use crate::report::{format_coef, format_p_value};
use crate::special::{chi_square_sf, normal_two_sided_p};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ties {
    #[default]
    Efron,
    Breslow,
}

impl FromStr for Ties {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "efron" => Ok(Ties::Efron),
            "breslow" => Ok(Ties::Breslow),
            other => Err(Error::Config(format!("unknown ties method `{other}`"))),
        }
    }
}

impl fmt::Display for Ties {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ties::Efron => "efron",
            Ties::Breslow => "breslow",
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CoxOptions {
    pub ties: Ties,
    /// Gradient max-norm at which iteration stops.
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    /// Bound on |beta| (standardized scale) beyond which the likelihood is
    /// declared monotone.
    pub divergence_bound: f64,
}

impl Default for CoxOptions {
    fn default() -> Self {
        Self { ties: Ties::Efron, tol: 1e-9, max_iter: 100, max_halvings: 20, divergence_bound: 50.0 }
    }
}

/// Relative log-likelihood change treated as convergence.
const REL_LOGLIK_TOL: f64 = 1e-12;
/// A converged fit whose next Newton step is still this large is sliding
/// along a flat, still-rising ridge.
const RIDGE_STEP: f64 = 1e-4;

/// Value, gradient and Hessian of the log partial likelihood.
#[derive(Clone, Debug)]
pub struct PartialLikelihood {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

/// Covariate rows sorted by time with tied-time blocks.
struct RiskSets {
    p: usize,
    x: Vec<f64>,
    event: Vec<bool>,
    /// `[start, end)` ranges of equal times, ascending.
    blocks: Vec<(usize, usize)>,
    time: Vec<f64>,
}

impl RiskSets {
    fn new(samples: &[SurvivalSample], transform: impl Fn(usize, f64) -> f64) -> Self {
        let p = samples.first().map_or(0, |s| s.covariates.len());
        let mut order: Vec<usize> = (0..samples.len()).collect();
        order.sort_by(|&a, &b| samples[a].time.total_cmp(&samples[b].time));
        let mut x = Vec::with_capacity(samples.len() * p);
        for &i in &order {
            x.extend(samples[i].covariates.iter().enumerate().map(|(j, &v)| transform(j, v)));
        }
        let time: Vec<f64> = order.iter().map(|&i| samples[i].time).collect();
        let event = order.iter().map(|&i| samples[i].event).collect();
        let mut blocks = Vec::new();
        let mut start = 0;
        for i in 1..=time.len() {
            if i == time.len() || time[i] != time[start] {
                blocks.push((start, i));
                start = i;
            }
        }
        Self { p, x, event, blocks, time }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.p..(i + 1) * self.p]
    }

    fn linear_predictors(&self, beta: &[f64]) -> Vec<f64> {
        (0..self.time.len()).map(|i| self.row(i).iter().zip(beta).map(|(a, b)| a * b).sum()).collect()
    }

    fn evaluate(&self, beta: &[f64], ties: Ties) -> PartialLikelihood {
        let p = self.p;
        let eta = self.linear_predictors(beta);
        let offset = eta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = eta.iter().map(|e| (e - offset).exp()).collect();

        let mut value = 0.0;
        let mut grad = vec![0.0; p];
        let mut hess = vec![0.0; p * p];
        let (mut s0, mut s1, mut s2) = (0.0, vec![0.0; p], vec![0.0; p * p]);
        let mut tmp1 = vec![0.0; p];
        let mut tmp2 = vec![0.0; p * p];

        for &(start, end) in self.blocks.iter().rev() {
            let (mut d0, mut d1, mut d2) = (0.0, vec![0.0; p], vec![0.0; p * p]);
            let mut deaths = 0usize;
            for i in start..end {
                let xi = self.row(i);
                let wi = w[i];
                s0 += wi;
                for a in 0..p {
                    s1[a] += wi * xi[a];
                    for b in 0..=a {
                        s2[a * p + b] += wi * xi[a] * xi[b];
                    }
                }
                if self.event[i] {
                    deaths += 1;
                    value += eta[i];
                    d0 += wi;
                    for a in 0..p {
                        grad[a] += xi[a];
                        d1[a] += wi * xi[a];
                        for b in 0..=a {
                            d2[a * p + b] += wi * xi[a] * xi[b];
                        }
                    }
                }
            }
            if deaths == 0 {
                continue;
            }
            let df = deaths as f64;
            for l in 0..deaths {
                let frac = match ties {
                    Ties::Efron => l as f64 / df,
                    Ties::Breslow => 0.0,
                };
                let r0 = s0 - frac * d0;
                for a in 0..p {
                    tmp1[a] = s1[a] - frac * d1[a];
                    for b in 0..=a {
                        tmp2[a * p + b] = s2[a * p + b] - frac * d2[a * p + b];
                    }
                }
                value -= r0.ln() + offset;
                for a in 0..p {
                    let ma = tmp1[a] / r0;
                    grad[a] -= ma;
                    for b in 0..=a {
                        hess[a * p + b] -= tmp2[a * p + b] / r0 - ma * tmp1[b] / r0;
                    }
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                hess[b * p + a] = hess[a * p + b];
            }
        }
        PartialLikelihood {
            value,
            gradient: DVector::from_vec(grad),
            hessian: DMatrix::from_row_slice(p, p, &hess),
        }
    }
}

fn validate(samples: &[SurvivalSample], p: usize) -> Result<()> {
    if let Some(s) = samples.iter().find(|s| s.covariates.len() != p) {
        return Err(Error::Domain(format!("sample has {} covariates, expected {p}", s.covariates.len())));
    }
    if let Some(s) = samples.iter().find(|s| !(s.time > 0.0) || !s.time.is_finite()) {
        return Err(Error::Domain(format!("survival times must be positive and finite, got {}", s.time)));
    }
    if let Some(s) = samples.iter().find(|s| s.covariates.iter().any(|v| !v.is_finite())) {
        return Err(Error::Domain(format!("non-finite covariate in sample at time {}", s.time)));
    }
    Ok(())
}

/// Log partial likelihood with first and second derivatives at `beta`,
/// on the covariates exactly as given.
pub fn partial_loglik(samples: &[SurvivalSample], beta: &[f64], ties: Ties) -> Result<PartialLikelihood> {
    validate(samples, beta.len())?;
    if !samples.iter().any(|s| s.event) {
        return Err(Error::Degenerate("partial likelihood undefined without events".into()));
    }
    Ok(RiskSets::new(samples, |_, v| v).evaluate(beta, ties))
}

/// Centering and scaling applied to each covariate column before fitting.
#[derive(Clone, Debug, PartialEq)]
struct Standardization {
    center: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardization {
    fn new(samples: &[SurvivalSample], names: &[String]) -> Result<Self> {
        let p = names.len();
        let n = samples.len() as f64;
        let mut center = vec![0.0; p];
        let mut scale = vec![1.0; p];
        for j in 0..p {
            let col = samples.iter().map(|s| s.covariates[j]);
            let (lo, hi) = col.clone().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
            if !(hi > lo) {
                return Err(Error::ConstantColumn(names[j].clone()));
            }
            center[j] = col.clone().sum::<f64>() / n;
            let binary = col.clone().all(|v| v == 0.0 || v == 1.0);
            if !binary {
                let var = col.map(|v| (v - center[j]).powi(2)).sum::<f64>() / n;
                scale[j] = var.sqrt();
            }
        }
        let std = Self { center, scale };
        for a in 0..p {
            for b in 0..a {
                let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
                for s in samples {
                    let (za, zb) = (std.apply(a, s.covariates[a]), std.apply(b, s.covariates[b]));
                    sab += za * zb;
                    saa += za * za;
                    sbb += zb * zb;
                }
                if (sab.abs() / (saa * sbb).sqrt()) > 1.0 - 1e-12 {
                    return Err(Error::Collinear(names[b].clone(), names[a].clone()));
                }
            }
        }
        Ok(std)
    }

    fn apply(&self, j: usize, v: f64) -> f64 {
        (v - self.center[j]) / self.scale[j]
    }
}

/// Names of covariates loading on the near-null direction of `m`.
fn involved(m: &DMatrix<f64>, names: &[String]) -> Vec<String> {
    let eig = SymmetricEigen::new(m.clone());
    let k = eig.eigenvalues.imin();
    let v = eig.eigenvectors.column(k);
    let out: Vec<String> = v.iter().zip(names).filter(|(c, _)| c.abs() > 0.1).map(|(_, n)| n.clone()).collect();
    if out.is_empty() {
        names.to_vec()
    } else {
        out
    }
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// A fitted Cox model. Serializes to the exported fit schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoxFit {
    pub beta: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub loglik_null: f64,
    pub loglik_full: f64,
    pub n: usize,
    pub n_events: usize,
    pub ties_method: Ties,
    pub converged: bool,
    pub covariate_names: Vec<String>,
    #[serde(skip)]
    pub iterations: usize,
    /// Gradient max-norm at the returned coefficients (standardized scale).
    #[serde(skip)]
    pub gradient_max_norm: f64,
}

impl CoxFit {
    /// Model with externally supplied coefficients (zero covariance), for
    /// scoring only.
    pub fn from_coefficients(covariate_names: Vec<String>, beta: Vec<f64>) -> Self {
        let p = beta.len();
        Self {
            covariance: vec![vec![0.0; p]; p],
            beta,
            loglik_null: f64::NAN,
            loglik_full: f64::NAN,
            n: 0,
            n_events: 0,
            ties_method: Ties::Efron,
            converged: true,
            covariate_names,
            iterations: 0,
            gradient_max_norm: 0.0,
        }
    }

    pub fn std_errors(&self) -> Vec<f64> {
        (0..self.beta.len()).map(|j| self.covariance[j][j].max(0.0).sqrt()).collect()
    }

    fn covariance_matrix(&self) -> DMatrix<f64> {
        let p = self.beta.len();
        DMatrix::from_fn(p, p, |a, b| self.covariance[a][b])
    }
}

pub fn cox_fit_data(data: &SurvivalData, options: &CoxOptions) -> Result<CoxFit> {
    cox_fit(&data.samples, &data.covariate_names, options)
}

/// Fit the proportional-hazards model.
///
/// Running out of iterations returns a fit with `converged = false`;
/// degenerate designs and monotone likelihoods are errors.
pub fn cox_fit(samples: &[SurvivalSample], names: &[String], options: &CoxOptions) -> Result<CoxFit> {
    let p = names.len();
    if p == 0 {
        return Err(Error::Config("Cox model needs at least one covariate".into()));
    }
    validate(samples, p)?;
    let n_events = samples.iter().filter(|s| s.event).count();
    if n_events < 2 {
        return Err(Error::Degenerate(format!("Cox model needs at least two events, found {n_events}")));
    }
    let std = Standardization::new(samples, names)?;
    let risk = RiskSets::new(samples, |j, v| std.apply(j, v));

    let mut beta = vec![0.0; p];
    let mut cur = risk.evaluate(&beta, options.ties);
    let loglik_null = cur.value;
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=options.max_iter {
        if max_abs(cur.gradient.iter().copied()) < options.tol {
            converged = true;
            break;
        }
        let info = -&cur.hessian;
        let Some(chol) = info.clone().cholesky() else {
            if max_abs(beta.iter().copied()) > 10.0 {
                return Err(Error::Divergence(involved(&info, names)));
            }
            return Err(Error::Singular(involved(&info, names)));
        };
        let mut step = chol.solve(&cur.gradient);
        let mut candidate: Vec<f64> = beta.iter().zip(step.iter()).map(|(b, s)| b + s).collect();
        let mut next = risk.evaluate(&candidate, options.ties);
        // Predicted gain below rounding of the log-likelihood: the step
        // cannot be judged by its value, so take it and stop.
        if cur.gradient.dot(&step) <= REL_LOGLIK_TOL * cur.value.abs() {
            beta = candidate;
            cur = next;
            iterations = iter;
            converged = true;
            break;
        }
        let mut halvings = 0;
        while !(next.value >= cur.value) && halvings < options.max_halvings {
            step *= 0.5;
            candidate = beta.iter().zip(step.iter()).map(|(b, s)| b + s).collect();
            next = risk.evaluate(&candidate, options.ties);
            halvings += 1;
        }
        if !(next.value >= cur.value) {
            break;
        }
        let change = (next.value - cur.value).abs();
        beta = candidate;
        cur = next;
        iterations = iter;
        if max_abs(beta.iter().copied()) > options.divergence_bound {
            let bad = names
                .iter()
                .zip(&beta)
                .filter(|(_, b)| b.abs() > options.divergence_bound)
                .map(|(n, _)| n.clone())
                .collect();
            return Err(Error::Divergence(bad));
        }
        if change <= REL_LOGLIK_TOL * cur.value.abs() {
            converged = true;
            break;
        }
    }

    let info = -&cur.hessian;
    let Some(chol) = info.clone().cholesky() else {
        return Err(Error::Singular(involved(&info, names)));
    };
    if converged {
        let step = chol.solve(&cur.gradient);
        if max_abs(step.iter().copied()) > RIDGE_STEP {
            let bad = names
                .iter()
                .zip(step.iter())
                .filter(|(_, s)| s.abs() > RIDGE_STEP)
                .map(|(n, _)| n.clone())
                .collect();
            return Err(Error::Divergence(bad));
        }
    }
    let cov_std = chol.inverse();
    let beta_orig: Vec<f64> = beta.iter().zip(&std.scale).map(|(b, s)| b / s).collect();
    let covariance = (0..p)
        .map(|a| (0..p).map(|b| cov_std[(a, b)] / (std.scale[a] * std.scale[b])).collect())
        .collect();

    Ok(CoxFit {
        beta: beta_orig,
        covariance,
        loglik_null,
        loglik_full: cur.value,
        n: samples.len(),
        n_events,
        ties_method: options.ties,
        converged,
        covariate_names: names.to_vec(),
        iterations,
        gradient_max_norm: max_abs(cur.gradient.iter().copied()),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HazardRatioRow {
    pub variable: String,
    pub coefficient: f64,
    pub se: f64,
    pub hazard_ratio: f64,
    pub p_value: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HazardRatioTable {
    pub rows: Vec<HazardRatioRow>,
}

impl HazardRatioTable {
    /// CSV in the published table layout: three-decimal coefficients, HRs
    /// and limits; p-values below 0.001 printed as `< 0.001`.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["variable", "coefficient", "hazard_ratio", "p_value", "ci_lower", "ci_upper"])?;
        for r in &self.rows {
            w.write_record([
                r.variable.clone(),
                format_coef(r.coefficient),
                format_coef(r.hazard_ratio),
                format_p_value(r.p_value),
                format_coef(r.ci_lower),
                format_coef(r.ci_upper),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Display label for a covariate column name.
pub fn covariate_label(name: &str) -> String {
    name.parse::<Covariate>().map(|c| c.label().to_string()).unwrap_or_else(|_| name.to_string())
}

pub fn hazard_ratios(fit: &CoxFit) -> Result<HazardRatioTable> {
    if !fit.converged {
        return Err(Error::NotConverged(format!("Cox fit stopped after {} iterations", fit.iterations)));
    }
    let rows = fit
        .covariate_names
        .iter()
        .zip(fit.beta.iter().zip(fit.std_errors()))
        .map(|(name, (&coef, se))| HazardRatioRow {
            variable: covariate_label(name),
            coefficient: coef,
            se,
            hazard_ratio: coef.exp(),
            p_value: if se > 0.0 { normal_two_sided_p(coef / se) } else { f64::NAN },
            ci_lower: (coef - Z_95 * se).exp(),
            ci_upper: (coef + Z_95 * se).exp(),
        })
        .collect();
    Ok(HazardRatioTable { rows })
}

/// Breslow cumulative baseline hazard, i.e. for the all-zero covariate vector.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BaselineHazard {
    pub times: Vec<f64>,
    pub increments: Vec<f64>,
    pub cumulative: Vec<f64>,
}

impl BaselineHazard {
    /// Right-continuous step value at `t`.
    pub fn cumulative_at(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&x| x <= t);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }
}

pub fn breslow_baseline(fit: &CoxFit, samples: &[SurvivalSample]) -> Result<BaselineHazard> {
    if !fit.converged {
        return Err(Error::NotConverged("baseline hazard needs a converged fit".into()));
    }
    validate(samples, fit.beta.len())?;
    let risk = RiskSets::new(samples, |_, v| v);
    let w: Vec<f64> = risk.linear_predictors(&fit.beta).into_iter().map(f64::exp).collect();
    let mut out = BaselineHazard { times: Vec::new(), increments: Vec::new(), cumulative: Vec::new() };
    let mut s0 = 0.0;
    let mut steps = Vec::new();
    for &(start, end) in risk.blocks.iter().rev() {
        s0 += w[start..end].iter().sum::<f64>();
        let d = risk.event[start..end].iter().filter(|&&e| e).count();
        if d > 0 {
            steps.push((risk.time[start], d as f64 / s0));
        }
    }
    let mut total = 0.0;
    for (t, inc) in steps.into_iter().rev() {
        total += inc;
        out.times.push(t);
        out.increments.push(inc);
        out.cumulative.push(total);
    }
    Ok(out)
}

/// Predicted cumulative hazard `Lambda0(t) * exp(beta'x)`.
pub fn predict_cumulative_hazard(fit: &CoxFit, baseline: &BaselineHazard, x: &[f64], t: f64) -> Result<f64> {
    Ok(baseline.cumulative_at(t) * predict_risk(fit, x)?.relative_hazard)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TestStatistic {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

impl TestStatistic {
    fn chi_square(statistic: f64, df: usize) -> Self {
        Self { statistic, df, p_value: chi_square_sf(statistic, df as f64) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GofReport {
    pub likelihood_ratio: TestStatistic,
    pub wald: TestStatistic,
    /// `None` when the information matrix at zero is singular.
    pub score: Option<TestStatistic>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score_unavailable: Option<String>,
}

/// Likelihood-ratio, Wald and score tests of `beta = 0`.
pub fn gof_tests(fit: &CoxFit, samples: &[SurvivalSample]) -> Result<GofReport> {
    if !fit.converged {
        return Err(Error::NotConverged("goodness-of-fit tests need a converged fit".into()));
    }
    let p = fit.beta.len();
    validate(samples, p)?;
    let std = Standardization::new(samples, &fit.covariate_names)?;

    let lr = (2.0 * (fit.loglik_full - fit.loglik_null)).max(0.0);

    let beta_std = DVector::from_iterator(p, fit.beta.iter().zip(&std.scale).map(|(b, s)| b * s));
    let cov = fit.covariance_matrix();
    let cov_std = DMatrix::from_fn(p, p, |a, b| cov[(a, b)] * std.scale[a] * std.scale[b]);
    let wald = cov_std
        .cholesky()
        .map(|c| beta_std.dot(&c.solve(&beta_std)).max(0.0))
        .ok_or_else(|| Error::Singular(fit.covariate_names.clone()))?;

    let at_zero = RiskSets::new(samples, |j, v| std.apply(j, v)).evaluate(&vec![0.0; p], fit.ties_method);
    let (score, score_unavailable) = match (-&at_zero.hessian).cholesky() {
        Some(c) => {
            let u = &at_zero.gradient;
            (Some(TestStatistic::chi_square(u.dot(&c.solve(u)).max(0.0), p)), None)
        }
        None => (None, Some("information matrix at beta = 0 is singular".to_string())),
    };

    Ok(GofReport {
        likelihood_ratio: TestStatistic::chi_square(lr, p),
        wald: TestStatistic::chi_square(wald, p),
        score,
        score_unavailable,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RiskPrediction {
    pub linear_predictor: f64,
    pub relative_hazard: f64,
}

pub fn predict_risk(fit: &CoxFit, x: &[f64]) -> Result<RiskPrediction> {
    if x.len() != fit.beta.len() {
        return Err(Error::Domain(format!("covariate vector has length {}, model expects {}", x.len(), fit.beta.len())));
    }
    let linear_predictor: f64 = fit.beta.iter().zip(x).map(|(b, v)| b * v).sum();
    Ok(RiskPrediction { linear_predictor, relative_hazard: linear_predictor.exp() })
}
