//! Parametric survival curves fitted by censored maximum likelihood.
//!
//! All three families are written through `u = gamma * (ln t - ln lambda)`:
//!
//! | family       | S(t)                      | log S        |
//! |--------------|---------------------------|--------------|
//! | exponential  | exp(-t/lambda)            | -e^u (gamma = 1) |
//! | weibull      | exp(-(t/lambda)^gamma)    | -e^u         |
//! | log-logistic | 1/(1 + (t/lambda)^gamma)  | -ln(1 + e^u) |
//!
//! and optimized over `(ln lambda, ln gamma)` by damped Newton iterations.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dataset::SurvivalSample;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Exponential,
    Weibull,
    Loglogistic,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Exponential, Family::Weibull, Family::Loglogistic];

    /// Number of free parameters.
    pub fn k(self) -> usize {
        match self {
            Family::Exponential => 1,
            _ => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Exponential => "exponential",
            Family::Weibull => "weibull",
            Family::Loglogistic => "loglogistic",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "exponential" => Ok(Family::Exponential),
            "weibull" => Ok(Family::Weibull),
            "loglogistic" => Ok(Family::Loglogistic),
            other => Err(Error::Config(format!("unknown parametric family `{other}`"))),
        }
    }
}

/// Scale `lambda` and shape `gamma` (absent for the exponential).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gamma: Option<f64>,
}

impl Params {
    fn shape(&self, family: Family) -> Result<f64> {
        let gamma = match family {
            Family::Exponential => 1.0,
            _ => self.gamma.ok_or_else(|| Error::Domain(format!("{family} needs a shape parameter")))?,
        };
        if !(self.lambda > 0.0 && self.lambda.is_finite() && gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Domain(format!("parameters must be positive, got lambda={} gamma={gamma}", self.lambda)));
        }
        Ok(gamma)
    }
}

fn softplus(u: f64) -> f64 {
    if u > 0.0 {
        u + (-u).exp().ln_1p()
    } else {
        u.exp().ln_1p()
    }
}

fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("time must be non-negative, got {t}")))
    }
}

/// `S(t)` for the family.
pub fn survival_function(family: Family, params: Params, t: f64) -> Result<f64> {
    let gamma = params.shape(family)?;
    check_time(t)?;
    if t == 0.0 {
        return Ok(1.0);
    }
    let z = (t / params.lambda).powf(gamma);
    Ok(match family {
        Family::Exponential | Family::Weibull => (-z).exp(),
        Family::Loglogistic => 1.0 / (1.0 + z),
    })
}

/// Density `f(t) = -dS/dt`.
pub fn density(family: Family, params: Params, t: f64) -> Result<f64> {
    Ok(hazard(family, params, t)? * survival_function(family, params, t)?)
}

/// Hazard `h(t) = f(t) / S(t)`.
pub fn hazard(family: Family, params: Params, t: f64) -> Result<f64> {
    let gamma = params.shape(family)?;
    check_time(t)?;
    let lambda = params.lambda;
    let base = gamma / lambda * (t / lambda).powf(gamma - 1.0);
    Ok(match family {
        Family::Exponential | Family::Weibull => base,
        Family::Loglogistic => base / (1.0 + (t / lambda).powf(gamma)),
    })
}

/// Censored log-likelihood with gradient and Hessian in
/// `theta = (ln lambda)` or `(ln lambda, ln gamma)`.
#[derive(Clone, Debug)]
pub struct LogLikelihood {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

pub fn loglik_derivatives(samples: &[SurvivalSample], family: Family, theta: &[f64]) -> Result<LogLikelihood> {
    if theta.len() != family.k() {
        return Err(Error::Domain(format!("{family} takes {} parameters, got {}", family.k(), theta.len())));
    }
    validate(samples)?;
    let a = theta[0];
    let (b, gamma) = match family {
        Family::Exponential => (0.0, 1.0),
        _ => (theta[1], theta[1].exp()),
    };
    let (mut value, mut ga, mut gb, mut haa, mut hab, mut hbb) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for s in samples {
        let d = if s.event { 1.0 } else { 0.0 };
        let log_t = s.time.ln();
        let u = gamma * (log_t - a);
        let (g, g1, g2) = match family {
            Family::Exponential | Family::Weibull => {
                let e = u.exp();
                (d * u - e, d - e, -e)
            }
            Family::Loglogistic => {
                let p = sigmoid(u);
                (d * u - (1.0 + d) * softplus(u), d - (1.0 + d) * p, -(1.0 + d) * p * (1.0 - p))
            }
        };
        value += d * (b - log_t) + g;
        ga -= g1 * gamma;
        haa += g2 * gamma * gamma;
        if family != Family::Exponential {
            gb += d + g1 * u;
            hab -= gamma * (g2 * u + g1);
            hbb += g2 * u * u + g1 * u;
        }
    }
    Ok(match family {
        Family::Exponential => LogLikelihood {
            value,
            gradient: DVector::from_vec(vec![ga]),
            hessian: DMatrix::from_vec(1, 1, vec![haa]),
        },
        _ => LogLikelihood {
            value,
            gradient: DVector::from_vec(vec![ga, gb]),
            hessian: DMatrix::from_row_slice(2, 2, &[haa, hab, hab, hbb]),
        },
    })
}

/// Censored log-likelihood at natural-scale parameters.
pub fn log_likelihood(samples: &[SurvivalSample], family: Family, params: Params) -> Result<f64> {
    let gamma = params.shape(family)?;
    let theta = match family {
        Family::Exponential => vec![params.lambda.ln()],
        _ => vec![params.lambda.ln(), gamma.ln()],
    };
    Ok(loglik_derivatives(samples, family, &theta)?.value)
}

fn validate(samples: &[SurvivalSample]) -> Result<()> {
    if let Some(s) = samples.iter().find(|s| !(s.time > 0.0) || !s.time.is_finite()) {
        return Err(Error::Domain(format!("survival times must be positive and finite, got {}", s.time)));
    }
    Ok(())
}

/// `(AIC, BIC) = (2k - 2 ln L, ln(n) k - 2 ln L)`.
pub fn information_criteria(loglik: f64, k: usize, n: f64) -> (f64, f64) {
    let k = k as f64;
    (2.0 * k - 2.0 * loglik, n.ln() * k - 2.0 * loglik)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParametricFit {
    pub family: Family,
    pub params: Params,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub converged: bool,
    pub n: usize,
    pub n_events: usize,
    #[serde(skip)]
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct FitOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 100, max_halvings: 20 }
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    crate::dataset::quantile_type7(&v, 0.5)
}

/// Newton direction, damped toward gradient ascent when the negative
/// Hessian is not positive definite.
fn ascent_direction(ll: &LogLikelihood) -> DVector<f64> {
    let info = -&ll.hessian;
    if let Some(c) = info.clone().cholesky() {
        return c.solve(&ll.gradient);
    }
    let k = info.nrows();
    let mut mu = 1e-3 * (1.0 + info.diagonal().amax());
    loop {
        if let Some(c) = (&info + DMatrix::identity(k, k) * mu).cholesky() {
            return c.solve(&ll.gradient);
        }
        mu *= 10.0;
    }
}

pub fn fit_parametric(samples: &[SurvivalSample], family: Family) -> Result<ParametricFit> {
    fit_parametric_with(samples, family, &FitOptions::default())
}

pub fn fit_parametric_with(samples: &[SurvivalSample], family: Family, options: &FitOptions) -> Result<ParametricFit> {
    validate(samples)?;
    let n_events = samples.iter().filter(|s| s.event).count();
    if n_events == 0 {
        return Err(Error::Degenerate(format!("{family} fit needs at least one event")));
    }
    let start = median(samples.iter().map(|s| s.time).collect()).ln();
    let mut theta = match family {
        Family::Exponential => vec![start],
        _ => vec![start, 0.0],
    };
    let mut cur = loglik_derivatives(samples, family, &theta)?;
    let mut converged = false;
    let mut iterations = 0;
    for iter in 1..=options.max_iter {
        if cur.gradient.amax() < options.tol {
            converged = true;
            break;
        }
        let mut step = ascent_direction(&cur);
        let mut candidate: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, s)| t + s).collect();
        let mut next = loglik_derivatives(samples, family, &candidate)?;
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
            next = loglik_derivatives(samples, family, &candidate)?;
            halvings += 1;
        }
        if !(next.value >= cur.value) {
            break;
        }
        let change = (next.value - cur.value).abs();
        theta = candidate;
        cur = next;
        iterations = iter;
        if change <= 1e-12 * cur.value.abs() {
            converged = true;
            break;
        }
    }
    let params = Params { lambda: theta[0].exp(), gamma: theta.get(1).map(|b| b.exp()) };
    let (aic, bic) = information_criteria(cur.value, family.k(), samples.len() as f64);
    Ok(ParametricFit {
        family,
        params,
        loglik: cur.value,
        aic,
        bic,
        converged,
        n: samples.len(),
        n_events,
        iterations,
    })
}
