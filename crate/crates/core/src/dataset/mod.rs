//! Clinical cohort records and their conversion into analysis-ready samples.
//!
//! A cohort file holds one [`PatientRecord`] per row. An [`EventPolicy`]
//! decides which outcome classes count as events, and a covariate list
//! picks the model columns. Covariate cells may be missing; such records
//! are kept and dropped only from analyses that need the missing field
//! (complete-case exclusion).

mod parse;
mod summary;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use parse::{
    parse_cohort, parse_patients, read_cohort, write_cohort, ParseOptions, ParsedCohort, PatientRow, RowReject, COHORT_COLUMNS,
};
pub use summary::{quantile_type7, summarize, Cell, CohortSummary, GroupInfo, TestKind, VariableRow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Surgery {
    Mastectomy,
    BreastConserving,
    None,
}

impl Surgery {
    pub fn as_str(self) -> &'static str {
        match self {
            Surgery::Mastectomy => "mastectomy",
            Surgery::BreastConserving => "breast_conserving",
            Surgery::None => "none",
        }
    }
}

impl FromStr for Surgery {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mastectomy" => Ok(Surgery::Mastectomy),
            "breast_conserving" => Ok(Surgery::BreastConserving),
            "none" => Ok(Surgery::None),
            other => Err(Error::Domain(format!("unknown surgery `{other}`"))),
        }
    }
}

/// Clinical outcome class at last follow-up, in reporting order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    DiedBreastCancer,
    DiedOther,
    Alive,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::DiedBreastCancer, Outcome::DiedOther, Outcome::Alive];

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::DiedBreastCancer => "died_breast_cancer",
            Outcome::DiedOther => "died_other",
            Outcome::Alive => "alive",
        }
    }

    /// Human-readable group heading.
    pub fn label(self) -> &'static str {
        match self {
            Outcome::DiedBreastCancer => "Died of breast cancer",
            Outcome::DiedOther => "Died of other causes",
            Outcome::Alive => "Alive",
        }
    }
}

impl FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "alive" => Ok(Outcome::Alive),
            "died_breast_cancer" => Ok(Outcome::DiedBreastCancer),
            "died_other" => Ok(Outcome::DiedOther),
            other => Err(Error::Domain(format!("unknown outcome `{other}`"))),
        }
    }
}

/// One cohort row. `None` marks a missing covariate cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatientRecord {
    pub id: String,
    pub age_years: Option<f64>,
    pub tumor_size_mm: Option<f64>,
    pub er_status: Option<bool>,
    pub her2_status: Option<bool>,
    pub hormone_therapy: Option<bool>,
    pub radiotherapy: Option<bool>,
    pub chemotherapy: Option<bool>,
    pub surgery: Option<Surgery>,
    pub survival_months: f64,
    pub outcome: Outcome,
}

impl PatientRecord {
    /// Names of covariate fields with missing values.
    pub fn missing_fields(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.age_years.is_none() {
            out.push("age_years");
        }
        if self.tumor_size_mm.is_none() {
            out.push("tumor_size_mm");
        }
        for (name, v) in [
            ("er_status", self.er_status),
            ("her2_status", self.her2_status),
            ("hormone_therapy", self.hormone_therapy),
            ("radiotherapy", self.radiotherapy),
            ("chemotherapy", self.chemotherapy),
        ] {
            if v.is_none() {
                out.push(name);
            }
        }
        if self.surgery.is_none() {
            out.push("surgery");
        }
        out
    }

    pub fn is_complete(&self) -> bool {
        self.missing_fields().is_empty()
    }
}

/// Mapping from outcome class to the event indicator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventPolicy {
    /// Death from any cause is the event.
    #[default]
    Overall,
    /// Only breast-cancer death is the event; other deaths are censored.
    CauseSpecific,
}

impl EventPolicy {
    pub fn is_event(self, outcome: Outcome) -> bool {
        match self {
            EventPolicy::Overall => outcome != Outcome::Alive,
            EventPolicy::CauseSpecific => outcome == Outcome::DiedBreastCancer,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EventPolicy::Overall => "overall",
            EventPolicy::CauseSpecific => "cause_specific",
        }
    }
}

impl FromStr for EventPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "overall" => Ok(EventPolicy::Overall),
            "cause_specific" => Ok(EventPolicy::CauseSpecific),
            other => Err(Error::Config(format!("unknown event policy `{other}`"))),
        }
    }
}

/// Model covariates that can be derived from a [`PatientRecord`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Covariate {
    AgeYears,
    TumorSizeMm,
    ErStatus,
    Her2Status,
    HormoneTherapy,
    Radiotherapy,
    Chemotherapy,
    MastectomyFlag,
}

impl Covariate {
    /// Every covariate, in the order of the published regression table.
    pub const ALL: [Covariate; 8] = [
        Covariate::AgeYears,
        Covariate::TumorSizeMm,
        Covariate::ErStatus,
        Covariate::Her2Status,
        Covariate::HormoneTherapy,
        Covariate::Radiotherapy,
        Covariate::Chemotherapy,
        Covariate::MastectomyFlag,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Covariate::AgeYears => "age_years",
            Covariate::TumorSizeMm => "tumor_size_mm",
            Covariate::ErStatus => "er_status",
            Covariate::Her2Status => "her2_status",
            Covariate::HormoneTherapy => "hormone_therapy",
            Covariate::Radiotherapy => "radiotherapy",
            Covariate::Chemotherapy => "chemotherapy",
            Covariate::MastectomyFlag => "mastectomy_flag",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Covariate::AgeYears => "Age (years)",
            Covariate::TumorSizeMm => "Tumor size (mm)",
            Covariate::ErStatus => "ER status",
            Covariate::Her2Status => "HER2 status",
            Covariate::HormoneTherapy => "Hormone therapy",
            Covariate::Radiotherapy => "Radiotherapy",
            Covariate::Chemotherapy => "Chemotherapy",
            Covariate::MastectomyFlag => "Mastectomy",
        }
    }

    /// The cohort-file column the covariate is read from.
    pub fn source_column(self) -> &'static str {
        match self {
            Covariate::MastectomyFlag => "surgery",
            other => other.name(),
        }
    }

    pub fn is_binary(self) -> bool {
        !matches!(self, Covariate::AgeYears | Covariate::TumorSizeMm)
    }

    pub fn value(self, r: &PatientRecord) -> Option<f64> {
        let flag = |b: Option<bool>| b.map(|b| if b { 1.0 } else { 0.0 });
        match self {
            Covariate::AgeYears => r.age_years,
            Covariate::TumorSizeMm => r.tumor_size_mm,
            Covariate::ErStatus => flag(r.er_status),
            Covariate::Her2Status => flag(r.her2_status),
            Covariate::HormoneTherapy => flag(r.hormone_therapy),
            Covariate::Radiotherapy => flag(r.radiotherapy),
            Covariate::Chemotherapy => flag(r.chemotherapy),
            Covariate::MastectomyFlag => r.surgery.map(|s| if s == Surgery::Mastectomy { 1.0 } else { 0.0 }),
        }
    }
}

impl fmt::Display for Covariate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Covariate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Covariate::ALL
            .into_iter()
            .find(|c| c.name() == key)
            .ok_or_else(|| Error::Config(format!("unknown covariate `{}`", s.trim())))
    }
}

/// Parse a comma-separated covariate list. Duplicates and unknown names are
/// configuration errors.
pub fn parse_covariate_list(list: &str) -> Result<Vec<Covariate>> {
    let mut out = Vec::new();
    for part in list.split(',').filter(|p| !p.trim().is_empty()) {
        let c: Covariate = part.parse()?;
        if out.contains(&c) {
            return Err(Error::Config(format!("covariate `{c}` listed twice")));
        }
        out.push(c);
    }
    if out.is_empty() {
        return Err(Error::Config("covariate list is empty".into()));
    }
    Ok(out)
}

/// Analysis-ready observation: follow-up time, event flag and covariates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalSample {
    pub time: f64,
    pub event: bool,
    pub covariates: Vec<f64>,
}

impl SurvivalSample {
    pub fn new(time: f64, event: bool) -> Self {
        Self { time, event, covariates: Vec::new() }
    }

    pub fn with_covariates(time: f64, event: bool, covariates: Vec<f64>) -> Self {
        Self { time, event, covariates }
    }
}

/// A record left out of an analysis because a needed field is missing.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Exclusion {
    pub id: String,
    pub missing: Vec<&'static str>,
}

/// Samples produced from a cohort under one event policy.
#[derive(Clone, Debug)]
pub struct SurvivalData {
    pub covariate_names: Vec<String>,
    pub samples: Vec<SurvivalSample>,
    /// Record ids aligned with `samples`.
    pub ids: Vec<String>,
    pub excluded: Vec<Exclusion>,
}

impl SurvivalData {
    pub fn n_events(&self) -> usize {
        self.samples.iter().filter(|s| s.event).count()
    }
}

/// Convert records into survival samples. Times pass through unchanged;
/// records missing any requested covariate are excluded and listed.
pub fn apply_event_policy(records: &[PatientRecord], policy: EventPolicy, covariates: &[Covariate]) -> SurvivalData {
    let mut data = SurvivalData {
        covariate_names: covariates.iter().map(|c| c.name().to_string()).collect(),
        samples: Vec::with_capacity(records.len()),
        ids: Vec::with_capacity(records.len()),
        excluded: Vec::new(),
    };
    for r in records {
        let values: Option<Vec<f64>> = covariates.iter().map(|c| c.value(r)).collect();
        match values {
            Some(x) => {
                data.samples
                    .push(SurvivalSample::with_covariates(r.survival_months, policy.is_event(r.outcome), x));
                data.ids.push(r.id.clone());
            }
            None => data.excluded.push(Exclusion {
                id: r.id.clone(),
                missing: covariates
                    .iter()
                    .filter(|c| c.value(r).is_none())
                    .map(|c| c.source_column())
                    .collect(),
            }),
        }
    }
    data
}

/// Row-major covariate matrix with its column map.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignMatrix {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Index into the input records for each row.
    pub record_index: Vec<usize>,
    /// Records dropped for missing values.
    pub dropped: Vec<usize>,
}

impl DesignMatrix {
    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

pub fn design_matrix(records: &[PatientRecord], covariates: &[Covariate]) -> DesignMatrix {
    let mut m = DesignMatrix {
        columns: covariates.iter().map(|c| c.name().to_string()).collect(),
        rows: Vec::with_capacity(records.len()),
        record_index: Vec::with_capacity(records.len()),
        dropped: Vec::new(),
    };
    for (i, r) in records.iter().enumerate() {
        match covariates.iter().map(|c| c.value(r)).collect::<Option<Vec<f64>>>() {
            Some(row) => {
                m.rows.push(row);
                m.record_index.push(i);
            }
            None => m.dropped.push(i),
        }
    }
    m
}

#[cfg(test)]
pub(crate) fn record(id: &str, outcome: Outcome, months: f64) -> PatientRecord {
    PatientRecord {
        id: id.into(),
        age_years: Some(62.0),
        tumor_size_mm: Some(25.0),
        er_status: Some(true),
        her2_status: Some(false),
        hormone_therapy: Some(true),
        radiotherapy: Some(false),
        chemotherapy: Some(false),
        surgery: Some(Surgery::BreastConserving),
        survival_months: months,
        outcome,
    }
}
