use std::fmt;

use serde::Serialize;
use survkit::dataset::{apply_event_policy, Covariate, EventPolicy, PatientRecord, SurvivalSample};
use survkit::km::{km_stratified, logrank_test, KmCurve, LogRankResult, Stratified};
use survkit::report::{format_number, format_p_value};
use survkit::{Error, Result};

use super::{load_cohort, start};
use crate::output::Run;
use crate::svg::{km_figure, KmPanel, KmSeries};
use crate::{CutRule, GlobalArgs};

/// Stratum label ordered by position rather than text.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Level {
    order: u8,
    label: String,
    slug: String,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

fn level(order: u8, label: impl Into<String>, slug: impl Into<String>) -> Level {
    Level { order, label: label.into(), slug: slug.into() }
}

struct Stratification {
    /// File-name stem, e.g. `age_years` or `overall`.
    key: String,
    title: String,
    samples: Vec<SurvivalSample>,
    levels: Vec<Level>,
    excluded_missing: usize,
    cut: Option<f64>,
    cut_rule: Option<CutRule>,
}

fn title(c: Covariate) -> &'static str {
    match c {
        Covariate::AgeYears => "Age",
        Covariate::TumorSizeMm => "Tumor size",
        Covariate::MastectomyFlag => "Surgery",
        other => other.label(),
    }
}

fn binary_levels(c: Covariate) -> [&'static str; 2] {
    match c {
        Covariate::ErStatus => ["ER-negative", "ER-positive"],
        Covariate::Her2Status => ["HER2-negative", "HER2-positive"],
        Covariate::HormoneTherapy => ["No hormone therapy", "Hormone therapy"],
        Covariate::Radiotherapy => ["No radiotherapy", "Radiotherapy"],
        Covariate::Chemotherapy => ["No chemotherapy", "Chemotherapy"],
        Covariate::MastectomyFlag => ["Breast-conserving surgery", "Mastectomy"],
        Covariate::AgeYears | Covariate::TumorSizeMm => unreachable!("numeric covariate"),
    }
}

fn cut_levels(c: Covariate, cut: f64, rule: CutRule) -> [Level; 2] {
    let unit = if c == Covariate::AgeYears { "years" } else { "mm" };
    let v = format_number(cut);
    let s = v.replace('.', "p").replace('-', "m");
    match rule {
        CutRule::Below => [level(0, format!("< {v} {unit}"), format!("lt{s}")), level(1, format!("≥ {v} {unit}"), format!("ge{s}"))],
        CutRule::AtOrBelow => [level(0, format!("≤ {v} {unit}"), format!("le{s}")), level(1, format!("> {v} {unit}"), format!("gt{s}"))],
    }
}

fn stratify(
    run: &mut Run,
    records: &[PatientRecord],
    policy: EventPolicy,
    cov: Covariate,
    cut: Option<f64>,
    rule: Option<CutRule>,
) -> Result<Stratification> {
    let data = apply_event_policy(records, policy, &[cov]);
    let (levels, cut, rule): (Vec<Level>, _, _) = if cov.is_binary() {
        if cut.is_some() {
            run.note(format!("--cut ignored for binary variable {}", cov.name()));
        }
        let names = binary_levels(cov);
        let lv = data.samples.iter().map(|s| {
            let k = s.covariates[0] as usize;
            level(k as u8, names[k], k.to_string())
        });
        (lv.collect(), None, None)
    } else {
        let cut = cut.ok_or_else(|| Error::Config(format!("--cut is required to stratify by {}", cov.name())))?;
        if !cut.is_finite() {
            return Err(Error::Config("--cut must be finite".into()));
        }
        let rule = rule.unwrap_or(if cov == Covariate::AgeYears { CutRule::Below } else { CutRule::AtOrBelow });
        let [lo, hi] = cut_levels(cov, cut, rule);
        let lv = data.samples.iter().map(|s| {
            let x = s.covariates[0];
            let low = match rule {
                CutRule::Below => x < cut,
                CutRule::AtOrBelow => x <= cut,
            };
            if low {
                lo.clone()
            } else {
                hi.clone()
            }
        });
        (lv.collect(), Some(cut), Some(rule))
    };
    Ok(Stratification {
        key: cov.name().to_string(),
        title: title(cov).to_string(),
        samples: data.samples,
        levels,
        excluded_missing: data.excluded.len(),
        cut,
        cut_rule: rule,
    })
}

#[derive(Serialize)]
struct StratumOut {
    label: String,
    file: String,
    n: usize,
    events: usize,
}

#[derive(Serialize)]
struct KmReport {
    variable: String,
    cut: Option<f64>,
    cut_rule: Option<CutRule>,
    excluded_missing: usize,
    strata: Vec<StratumOut>,
    logrank: Option<LogRankResult>,
    note: Option<String>,
}

struct Analysed {
    title: String,
    curves: Stratified<Level>,
    logrank: Option<LogRankResult>,
}

fn analyse(run: &mut Run, s: Stratification) -> Result<Analysed> {
    if s.samples.is_empty() {
        return Err(Error::Degenerate(format!("no records with a recorded {}", s.key)));
    }
    let curves = km_stratified(&s.samples, &s.levels, &[])?;
    let mut strata = Vec::new();
    for (lv, curve) in &curves.curves {
        let stem = if s.key == "overall" { "km_overall".to_string() } else { format!("km_{}_{}", s.key, lv.slug) };
        write_curve(run, &stem, curve)?;
        strata.push(StratumOut { label: lv.label.clone(), file: format!("{stem}.csv"), n: curve.n, events: curve.n_events });
    }
    let (logrank, note) = if curves.curves.len() < 2 {
        (None, Some("only one stratum present; log-rank test skipped".to_string()))
    } else {
        match logrank_test(&s.samples, &s.levels) {
            Ok(r) => (Some(r), None),
            Err(Error::Degenerate(m)) => (None, Some(format!("log-rank test skipped: {m}"))),
            Err(e) => return Err(e),
        }
    };
    if let Some(n) = &note {
        if s.key != "overall" {
            run.note(format!("{}: {n}", s.key));
        }
    }
    if s.key != "overall" {
        let report = KmReport {
            variable: s.key.clone(),
            cut: s.cut,
            cut_rule: s.cut_rule,
            excluded_missing: s.excluded_missing,
            strata,
            logrank: logrank.clone(),
            note,
        };
        run.json(&format!("logrank_{}.json", s.key), &report)?;
    }
    if let Some(r) = &logrank {
        println!("{}: chi-square {:.3} on {} df, {}", s.title, r.chi_square, r.degrees_of_freedom, p_phrase(r.p_value));
    }
    Ok(Analysed { title: s.title, curves, logrank })
}

fn write_curve(run: &mut Run, stem: &str, curve: &KmCurve) -> Result<()> {
    run.write_with(&format!("{stem}.csv"), |buf| curve.write_csv(buf))?;
    run.json(&format!("{stem}.json"), &curve.rows())
}

/// `p = 0.123` or `p < 0.001`.
fn p_phrase(p: f64) -> String {
    let p = format_p_value(p);
    if p.starts_with('<') {
        format!("p {p}")
    } else {
        format!("p = {p}")
    }
}

fn panel(a: &Analysed) -> KmPanel<'_> {
    KmPanel {
        title: a.title.clone(),
        series: a.curves.curves.iter().map(|(lv, c)| KmSeries { label: lv.label.clone(), curve: c }).collect(),
        fitted: Vec::new(),
        note: a.logrank.as_ref().map(|r| format!("Log-rank {}", p_phrase(r.p_value))),
    }
}

pub fn run(g: &GlobalArgs, strata: Option<&str>, cut: Option<f64>, rule: Option<CutRule>) -> Result<()> {
    let mut run = start(g, "km")?;
    run.flag("strata", strata.unwrap_or("none"));
    run.flag("cut", cut);
    run.flag("cut_rule", rule);
    let records = load_cohort(g, &mut run)?;

    match strata.map(str::trim) {
        None | Some("none") => {
            let data = apply_event_policy(&records, g.policy, &[]);
            let n = data.samples.len();
            let s = Stratification {
                key: "overall".into(),
                title: "All patients".into(),
                samples: data.samples,
                levels: vec![level(0, "All patients", "all"); n],
                excluded_missing: 0,
                cut: None,
                cut_rule: None,
            };
            let a = analyse(&mut run, s)?;
            run.svg("km_overall.svg", || km_figure(&[panel(&a)]))?;
        }
        Some("treatment") => {
            let mut done = Vec::new();
            for cov in [Covariate::Radiotherapy, Covariate::HormoneTherapy, Covariate::Chemotherapy] {
                let s = stratify(&mut run, &records, g.policy, cov, None, None)?;
                done.push(analyse(&mut run, s)?);
            }
            run.svg("km_treatment.svg", || km_figure(&done.iter().map(panel).collect::<Vec<_>>()))?;
        }
        Some(name) => {
            let cov: Covariate = name.parse()?;
            let s = stratify(&mut run, &records, g.policy, cov, cut, rule)?;
            let a = analyse(&mut run, s)?;
            run.svg(&format!("km_{}.svg", cov.name()), || km_figure(&[panel(&a)]))?;
        }
    }
    run.finish()
}
