//! Seeded synthetic cohorts with known ground truth.
//!
//! Event times follow a proportional-hazards construction: a subject with
//! linear predictor `eta` has survival `S0(t)^exp(eta)`, sampled by
//! inverting the baseline survival function. Censoring times are drawn
//! independently and the observed time is the minimum of the two.
//!
//! Every subject draws from its own SplitMix64 stream keyed by
//! `(seed, subject index)`, so a cohort is identical whatever the
//! generation order or thread count. Transcendental functions come from
//! `libm` so that the bits do not depend on the platform's math library.

use serde::{Deserialize, Serialize};

use crate::dataset::{Covariate, Outcome, PatientRecord, Surgery, SurvivalData, SurvivalSample};
use crate::error::{Error, Result};
use crate::exec;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// SplitMix64: 64-bit state, Weyl increment plus the variant-13 finalizer.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Independent stream for one subject of a seeded cohort.
    pub fn for_stream(seed: u64, index: u64) -> Self {
        Self::new(mix64(seed) ^ mix64(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Baseline {
    /// Mean (scale) `lambda`.
    Exponential { lambda: f64 },
    Weibull { lambda: f64, gamma: f64 },
    Loglogistic { lambda: f64, gamma: f64 },
}

impl Baseline {
    /// Time at which the baseline cumulative hazard equals `h`.
    fn invert_cumulative_hazard(&self, h: f64) -> f64 {
        match *self {
            Baseline::Exponential { lambda } => lambda * h,
            Baseline::Weibull { lambda, gamma } => lambda * libm::pow(h, 1.0 / gamma),
            // S0 = 1 / (1 + (t/lambda)^gamma)  =>  H0 = log(1 + (t/lambda)^gamma)
            Baseline::Loglogistic { lambda, gamma } => lambda * libm::pow(libm::expm1(h), 1.0 / gamma),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Censoring {
    None,
    Uniform { max: f64 },
    Exponential { rate: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum Generator {
    Bernoulli { p: f64 },
    Uniform { lo: f64, hi: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthCovariate {
    pub name: String,
    pub beta: f64,
    pub generator: Generator,
}

fn default_fraction() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n: usize,
    pub seed: u64,
    pub baseline: Baseline,
    pub censoring: Censoring,
    #[serde(default)]
    pub covariates: Vec<SynthCovariate>,
    /// Share of events labeled breast-cancer deaths in cohort mode; the rest
    /// are deaths from other causes.
    #[serde(default = "default_fraction")]
    pub breast_cancer_death_fraction: f64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        match self.baseline {
            Baseline::Exponential { lambda } if !positive(lambda) => return bad("baseline lambda must be > 0".into()),
            Baseline::Weibull { lambda, gamma } | Baseline::Loglogistic { lambda, gamma }
                if !positive(lambda) || !positive(gamma) =>
            {
                return bad("baseline lambda and gamma must be > 0".into())
            }
            _ => {}
        }
        match self.censoring {
            Censoring::Uniform { max } if !positive(max) => return bad("censoring max must be > 0".into()),
            Censoring::Exponential { rate } if !positive(rate) => return bad("censoring rate must be > 0".into()),
            _ => {}
        }
        if !(0.0..=1.0).contains(&self.breast_cancer_death_fraction) {
            return bad("breast_cancer_death_fraction must lie in [0, 1]".into());
        }
        for (i, c) in self.covariates.iter().enumerate() {
            if !c.beta.is_finite() {
                return bad(format!("beta for `{}` must be finite", c.name));
            }
            if self.covariates[..i].iter().any(|o| o.name == c.name) {
                return bad(format!("covariate `{}` listed twice", c.name));
            }
            match c.generator {
                Generator::Bernoulli { p } if !(0.0..=1.0).contains(&p) => {
                    return bad(format!("bernoulli p for `{}` must lie in [0, 1]", c.name))
                }
                Generator::Uniform { lo, hi } if !(lo.is_finite() && hi.is_finite() && lo < hi) => {
                    return bad(format!("uniform bounds for `{}` must satisfy lo < hi", c.name))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Check that every covariate maps onto a cohort-file field with a
    /// generator that respects the field's range.
    fn validate_for_cohort(&self) -> Result<Vec<Covariate>> {
        self.covariates
            .iter()
            .map(|c| {
                let cov: Covariate = c.name.parse()?;
                match (&c.generator, cov) {
                    (Generator::Uniform { lo, hi }, Covariate::AgeYears) if *lo >= 0.0 && *hi <= 130.0 => Ok(cov),
                    (Generator::Uniform { lo, hi }, Covariate::TumorSizeMm) if *lo >= 0.0 && *hi <= 500.0 => Ok(cov),
                    (Generator::Bernoulli { .. }, c) if c.is_binary() => Ok(cov),
                    _ => Err(Error::Config(format!("generator for `{}` does not fit the cohort field", c.name))),
                }
            })
            .collect()
    }
}

struct Subject {
    x: Vec<f64>,
    time: f64,
    event: bool,
    cause_u: f64,
}

fn draw_subject(spec: &SynthSpec, index: usize) -> Subject {
    let mut rng = SplitMix64::for_stream(spec.seed, index as u64);
    let x: Vec<f64> = spec
        .covariates
        .iter()
        .map(|c| {
            let u = rng.next_open01();
            match c.generator {
                Generator::Bernoulli { p } => {
                    if u < p {
                        1.0
                    } else {
                        0.0
                    }
                }
                Generator::Uniform { lo, hi } => lo + (hi - lo) * u,
            }
        })
        .collect();
    let u_event = rng.next_open01();
    let u_censor = rng.next_open01();
    let cause_u = rng.next_open01();

    let eta: f64 = spec.covariates.iter().zip(&x).map(|(c, v)| c.beta * v).sum();
    let h = -libm::log(u_event) / libm::exp(eta);
    let event_time = spec.baseline.invert_cumulative_hazard(h).max(f64::MIN_POSITIVE);
    let censor_time = match spec.censoring {
        Censoring::None => f64::INFINITY,
        Censoring::Uniform { max } => max * u_censor,
        Censoring::Exponential { rate } => -libm::log(u_censor) / rate,
    };
    Subject { x, time: event_time.min(censor_time), event: event_time <= censor_time, cause_u }
}

fn into_data(spec: &SynthSpec, subjects: Vec<Subject>) -> SurvivalData {
    let ids = (0..subjects.len()).map(subject_id).collect();
    SurvivalData {
        covariate_names: spec.covariates.iter().map(|c| c.name.clone()).collect(),
        samples: subjects.into_iter().map(|s| SurvivalSample::with_covariates(s.time, s.event, s.x)).collect(),
        ids,
        excluded: Vec::new(),
    }
}

fn subject_id(i: usize) -> String {
    format!("S{:06}", i + 1)
}

/// Abstract-mode cohort: samples carrying the spec's covariates.
pub fn generate_samples(spec: &SynthSpec) -> Result<SurvivalData> {
    spec.validate()?;
    Ok(into_data(spec, exec::map_indexed(spec.n, |i| draw_subject(spec, i))))
}

pub fn generate_samples_sequential(spec: &SynthSpec) -> Result<SurvivalData> {
    spec.validate()?;
    Ok(into_data(spec, exec::map_indexed_sequential(spec.n, |i| draw_subject(spec, i))))
}

#[cfg(feature = "parallel")]
pub fn generate_samples_parallel(spec: &SynthSpec) -> Result<SurvivalData> {
    spec.validate()?;
    Ok(into_data(spec, exec::map_indexed_parallel(spec.n, |i| draw_subject(spec, i))))
}

/// Cohort-mode generation. Covariate names must be cohort fields; fields
/// not in the spec take fixed values (age 60, tumor 20 mm, binary flags
/// negative, breast-conserving surgery).
pub fn generate_cohort(spec: &SynthSpec) -> Result<Vec<PatientRecord>> {
    spec.validate()?;
    let fields = spec.validate_for_cohort()?;
    let subjects = exec::map_indexed(spec.n, |i| draw_subject(spec, i));
    Ok(subjects
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let mut r = PatientRecord {
                id: subject_id(i),
                age_years: Some(60.0),
                tumor_size_mm: Some(20.0),
                er_status: Some(false),
                her2_status: Some(false),
                hormone_therapy: Some(false),
                radiotherapy: Some(false),
                chemotherapy: Some(false),
                surgery: Some(Surgery::BreastConserving),
                survival_months: s.time,
                outcome: if !s.event {
                    Outcome::Alive
                } else if s.cause_u < spec.breast_cancer_death_fraction {
                    Outcome::DiedBreastCancer
                } else {
                    Outcome::DiedOther
                },
            };
            for (cov, &v) in fields.iter().zip(&s.x) {
                let flag = Some(v == 1.0);
                match cov {
                    Covariate::AgeYears => r.age_years = Some(v),
                    Covariate::TumorSizeMm => r.tumor_size_mm = Some(v),
                    Covariate::ErStatus => r.er_status = flag,
                    Covariate::Her2Status => r.her2_status = flag,
                    Covariate::HormoneTherapy => r.hormone_therapy = flag,
                    Covariate::Radiotherapy => r.radiotherapy = flag,
                    Covariate::Chemotherapy => r.chemotherapy = flag,
                    Covariate::MastectomyFlag => {
                        r.surgery = Some(if v == 1.0 { Surgery::Mastectomy } else { Surgery::BreastConserving })
                    }
                }
            }
            r
        })
        .collect())
}

/// Sidecar document recording the full generating spec.
#[derive(Serialize)]
pub struct GroundTruth<'a> {
    pub generator: &'static str,
    pub spec: &'a SynthSpec,
}

impl<'a> GroundTruth<'a> {
    pub fn new(spec: &'a SynthSpec) -> Self {
        Self { generator: "splitmix64 per-subject streams, proportional-hazards inverse transform", spec }
    }
}

/// Run `f` once per replicate seed derived from `base_seed`, results in
/// replicate order.
pub fn replicate<T, F>(replicates: usize, base_seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    exec::map_indexed(replicates, |i| f(mix64(base_seed ^ mix64(i as u64 + 1))))
}
