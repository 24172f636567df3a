use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::{Covariate, Outcome, PatientRecord, Surgery};
use crate::error::{Error, Result};

/// Cohort file header, in canonical order.
pub const COHORT_COLUMNS: [&str; 11] = [
    "id",
    "age_years",
    "tumor_size_mm",
    "er_status",
    "her2_status",
    "hormone_therapy",
    "radiotherapy",
    "chemotherapy",
    "surgery",
    "survival_months",
    "outcome",
];

#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// Reject rows with missing cells and fail on any unusable row.
    pub strict: bool,
}

/// A row that was not loaded, with its 1-based line number in the file.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowReject {
    pub line: u64,
    pub reason: String,
}

#[derive(Clone, Debug, Default)]
pub struct ParsedCohort {
    pub records: Vec<PatientRecord>,
    pub rejects: Vec<RowReject>,
}

enum RowProblem {
    /// Missing covariate cell (only a problem in strict mode).
    Missing(String),
    Invalid(String),
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell.eq_ignore_ascii_case("na")
}

fn parse_binary(cell: &str) -> Option<bool> {
    match cell.to_ascii_lowercase().as_str() {
        "1" | "true" | "pos" | "positive" => Some(true),
        "0" | "false" | "neg" | "negative" => Some(false),
        _ => None,
    }
}

fn parse_real(column: &str, cell: &str) -> std::result::Result<f64, RowProblem> {
    cell.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| RowProblem::Invalid(format!("{column}: cannot parse `{cell}`")))
}

fn in_range(column: &str, v: f64, lo: f64, hi: f64) -> std::result::Result<f64, RowProblem> {
    if v > lo && v < hi {
        Ok(v)
    } else {
        Err(RowProblem::Invalid(format!("{column} out of range")))
    }
}

struct Columns(HashMap<&'static str, usize>);

impl Columns {
    fn cell<'a>(&self, row: &'a csv::StringRecord, column: &str) -> &'a str {
        row.get(self.0[column]).unwrap_or("").trim()
    }
}

fn parse_row(cols: &Columns, row: &csv::StringRecord, strict: bool) -> std::result::Result<PatientRecord, RowProblem> {
    let cell = |c: &str| cols.cell(row, c);
    let mandatory = |c: &str| {
        let v = cell(c);
        if is_missing(v) {
            Err(RowProblem::Invalid(format!("missing {c}")))
        } else {
            Ok(v)
        }
    };
    let optional = |c: &str| {
        let v = cell(c);
        if !is_missing(v) {
            Ok(Some(v))
        } else if strict {
            Err(RowProblem::Missing(format!("missing {c}")))
        } else {
            Ok(None)
        }
    };
    let binary = |c: &str| -> std::result::Result<Option<bool>, RowProblem> {
        optional(c)?
            .map(|v| parse_binary(v).ok_or_else(|| RowProblem::Invalid(format!("{c}: cannot parse `{v}`"))))
            .transpose()
    };

    let id = cell("id");
    if id.is_empty() {
        return Err(RowProblem::Invalid("missing id".into()));
    }
    let id = id.to_string();
    let age_years = optional("age_years")?
        .map(|v| parse_real("age_years", v).and_then(|x| in_range("age_years", x, 0.0, 130.0)))
        .transpose()?;
    let tumor_size_mm = optional("tumor_size_mm")?
        .map(|v| parse_real("tumor_size_mm", v).and_then(|x| in_range("tumor_size_mm", x, 0.0, 500.0)))
        .transpose()?;
    let er_status = binary("er_status")?;
    let her2_status = binary("her2_status")?;
    let hormone_therapy = binary("hormone_therapy")?;
    let radiotherapy = binary("radiotherapy")?;
    let chemotherapy = binary("chemotherapy")?;
    let surgery = optional("surgery")?
        .map(|v| v.parse::<Surgery>().map_err(|_| RowProblem::Invalid(format!("surgery: cannot parse `{v}`"))))
        .transpose()?;
    let survival_months = parse_real("survival_months", mandatory("survival_months")?)?;
    if survival_months <= 0.0 {
        return Err(RowProblem::Invalid("survival_months out of range".into()));
    }
    let outcome_cell = mandatory("outcome")?;
    let outcome = outcome_cell
        .parse::<Outcome>()
        .map_err(|_| RowProblem::Invalid(format!("outcome: cannot parse `{outcome_cell}`")))?;

    Ok(PatientRecord {
        id,
        age_years,
        tumor_size_mm,
        er_status,
        her2_status,
        hormone_therapy,
        radiotherapy,
        chemotherapy,
        surgery,
        survival_months,
        outcome,
    })
}

/// Parse a cohort CSV. Header names must include every column in
/// [`COHORT_COLUMNS`]; extra columns are ignored. Unusable rows are
/// returned as rejects, or fail the whole parse in strict mode.
pub fn parse_cohort(input: &[u8], options: ParseOptions) -> Result<ParsedCohort> {
    let input = input.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(input);
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let header = reader.headers()?.clone();
    let mut map = HashMap::new();
    for name in COHORT_COLUMNS {
        let pos = header
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
        map.insert(name, pos);
    }
    let cols = Columns(map);

    let mut out = ParsedCohort::default();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        if row.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        match parse_row(&cols, &row, options.strict) {
            Ok(r) => out.records.push(r),
            Err(RowProblem::Invalid(reason)) if options.strict => return Err(Error::InvalidRow { row: line, reason }),
            Err(RowProblem::Invalid(reason) | RowProblem::Missing(reason)) => out.rejects.push(RowReject { line, reason }),
        }
    }
    Ok(out)
}

pub fn read_cohort(path: impl AsRef<Path>, options: ParseOptions) -> Result<ParsedCohort> {
    let bytes = std::fs::read(path)?;
    parse_cohort(&bytes, options)
}

/// Write records in the canonical column order. Missing cells are empty;
/// binary fields are written as 0/1.
pub fn write_cohort<W: Write>(records: &[PatientRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(COHORT_COLUMNS)?;
    let real = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let flag = |v: Option<bool>| v.map(|b| if b { "1" } else { "0" }.to_string()).unwrap_or_default();
    for r in records {
        w.write_record([
            r.id.clone(),
            real(r.age_years),
            real(r.tumor_size_mm),
            flag(r.er_status),
            flag(r.her2_status),
            flag(r.hormone_therapy),
            flag(r.radiotherapy),
            flag(r.chemotherapy),
            r.surgery.map(|s| s.as_str().to_string()).unwrap_or_default(),
            r.survival_months.to_string(),
            r.outcome.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row of a patient file prepared for scoring.
#[derive(Clone, Debug, PartialEq)]
pub struct PatientRow {
    pub id: String,
    /// Covariate values in the requested order; `None` if any is missing.
    pub values: Option<Vec<f64>>,
    /// Follow-up, when the file carries `survival_months` and `outcome`.
    pub follow_up: Option<(f64, Outcome)>,
}

fn covariate_cell(cov: Covariate, cell: &str) -> Option<f64> {
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    match cov {
        Covariate::MastectomyFlag => cell.parse::<Surgery>().ok().map(|s| flag(s == Surgery::Mastectomy)),
        c if c.is_binary() => parse_binary(cell).map(flag),
        _ => cell.parse::<f64>().ok().filter(|v| v.is_finite()),
    }
}

/// Read a patient file for scoring. Only `id` and the columns behind
/// `covariates` are required; an empty file yields no rows. Missing cells
/// leave the row unscored, unparseable cells are errors.
pub fn parse_patients(input: &[u8], covariates: &[Covariate]) -> Result<Vec<PatientRow>> {
    let input = input.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(input);
    if input.iter().all(u8::is_ascii_whitespace) {
        return Ok(Vec::new());
    }
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let header = reader.headers()?.clone();
    let find = |name: &str| header.iter().position(|h| h.trim().eq_ignore_ascii_case(name));
    let id_col = find("id").ok_or_else(|| Error::MissingColumn("id".into()))?;
    let mut missing: Vec<String> = Vec::new();
    let mut cols = Vec::with_capacity(covariates.len());
    for c in covariates {
        match find(c.source_column()) {
            Some(i) => cols.push(i),
            None => {
                if !missing.iter().any(|m| m == c.source_column()) {
                    missing.push(c.source_column().to_string());
                }
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::CovariateMismatch(missing));
    }
    let follow_cols = find("survival_months").zip(find("outcome"));

    let mut out = Vec::new();
    for row in reader.records() {
        let row = row?;
        if row.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        let line = row.position().map_or(0, |p| p.line());
        let cell = |i: usize| row.get(i).unwrap_or("").trim();
        let mut values = Some(Vec::with_capacity(cols.len()));
        for (&c, &i) in covariates.iter().zip(&cols) {
            let v = cell(i);
            if is_missing(v) {
                values = None;
                continue;
            }
            let x = covariate_cell(c, v)
                .ok_or_else(|| Error::InvalidRow { row: line, reason: format!("{}: cannot parse `{v}`", c.source_column()) })?;
            if let Some(vals) = values.as_mut() {
                vals.push(x);
            }
        }
        let follow_up = follow_cols.and_then(|(t, o)| {
            let time = cell(t).parse::<f64>().ok().filter(|v| *v > 0.0 && v.is_finite())?;
            Some((time, cell(o).parse::<Outcome>().ok()?))
        });
        out.push(PatientRow { id: cell(id_col).to_string(), values, follow_up });
    }
    Ok(out)
}
