use std::path::Path;

use serde::Deserialize;
use survkit::cox::{predict_risk, CoxFit};
use survkit::dataset::{parse_patients, Covariate, PatientRow};
use survkit::logodds::{horizon_label, log_odds_score, LogOddsHistogram, LogisticFit, DEFAULT_HORIZON_MONTHS};
use survkit::{Error, Result};

use super::start;
use crate::output::Run;
use crate::svg::histogram;
use crate::GlobalArgs;

/// The fields scoring needs from `logistic_fit.json`.
#[derive(Deserialize)]
struct LogisticModel {
    intercept: f64,
    beta: Vec<f64>,
    covariate_names: Vec<String>,
    #[serde(default = "default_horizon")]
    horizon_months: f64,
}

fn default_horizon() -> f64 {
    DEFAULT_HORIZON_MONTHS
}

/// The fields scoring needs from `cox_fit.json`.
#[derive(Deserialize)]
struct CoxModel {
    beta: Vec<f64>,
    covariate_names: Vec<String>,
}

enum Model {
    Logistic(LogisticFit),
    Cox(CoxFit),
}

impl Model {
    fn covariate_names(&self) -> &[String] {
        match self {
            Model::Logistic(f) => &f.covariate_names,
            Model::Cox(f) => &f.covariate_names,
        }
    }
}

fn load_model(bytes: &[u8]) -> Result<Model> {
    let value: serde_json::Value = serde_json::from_slice(bytes)?;
    let has = |k: &str| value.get(k).is_some();
    let model = if has("intercept") {
        let m: LogisticModel = serde_json::from_value(value)?;
        Model::Logistic(LogisticFit::from_coefficients(m.covariate_names, m.intercept, m.beta, m.horizon_months))
    } else if has("ties_method") || has("beta") {
        let m: CoxModel = serde_json::from_value(value)?;
        Model::Cox(CoxFit::from_coefficients(m.covariate_names, m.beta))
    } else {
        return Err(Error::Config("model file is neither a Cox nor a log-odds fit".into()));
    };
    let names = model.covariate_names();
    let p = match &model {
        Model::Logistic(f) => f.beta.len(),
        Model::Cox(f) => f.beta.len(),
    };
    if names.len() != p {
        return Err(Error::Config(format!("model lists {} covariates but {} coefficients", names.len(), p)));
    }
    Ok(model)
}

pub fn run(g: &GlobalArgs, model_path: &Path, patients: Option<&Path>, bins: usize) -> Result<()> {
    if bins == 0 {
        return Err(Error::Config("--bins must be at least 1".into()));
    }
    let mut run = start(g, "score")?;
    run.flag("bins", bins);
    let model = load_model(&run.read_input(model_path)?)?;
    let covs = model
        .covariate_names()
        .iter()
        .map(|n| n.parse::<Covariate>())
        .collect::<Result<Vec<_>>>()?;
    let path = patients
        .or(g.input.as_deref())
        .ok_or_else(|| Error::Config("--patients or --input is required".into()))?;
    let rows = parse_patients(&run.read_input(path)?, &covs)?;
    let unscored = rows.iter().filter(|r| r.values.is_none()).count();
    if unscored > 0 {
        run.note(format!("{unscored} patients not scored for missing covariates"));
    }

    match model {
        Model::Logistic(fit) => {
            run.flag("model", "log_odds");
            score_logistic(g, &mut run, &fit, &rows, bins)?
        }
        Model::Cox(fit) => {
            run.flag("model", "cox");
            score_cox(&mut run, &fit, &rows)?
        }
    }
    run.finish()
}

fn score_logistic(g: &GlobalArgs, run: &mut Run, fit: &LogisticFit, rows: &[PatientRow], bins: usize) -> Result<()> {
    let mut values = Vec::new();
    run.write_with("scores.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["id", "log_odds", "probability", "label_used"])?;
        for r in rows {
            let Some(x) = &r.values else { continue };
            let s = log_odds_score(fit, x)?;
            let label = r
                .follow_up
                .and_then(|(t, o)| horizon_label(t, o, fit.horizon_months, g.policy))
                .map(|l| (l as u8).to_string())
                .unwrap_or_default();
            w.write_record([r.id.clone(), s.log_odds.to_string(), s.probability.to_string(), label])?;
            values.push(s.log_odds);
        }
        w.flush()?;
        Ok(())
    })?;
    if values.is_empty() {
        run.note("no patients scored; histogram skipped");
        return Ok(());
    }
    let h = LogOddsHistogram::new(&values, bins)?;
    run.write_with("histogram.csv", |buf| h.write_csv(buf))?;
    run.svg("log_odds_histogram.svg", || {
        histogram("Predicted log odds of survival", "Log odds", &h.bin_edges, &h.counts, h.mean, h.sd)
    })?;
    println!("scored {} patients, mean log odds {:.3}, sd {:.3}", values.len(), h.mean, h.sd);
    Ok(())
}

fn score_cox(run: &mut Run, fit: &CoxFit, rows: &[PatientRow]) -> Result<()> {
    let mut n = 0usize;
    run.write_with("scores.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["id", "linear_predictor", "relative_hazard"])?;
        for r in rows {
            let Some(x) = &r.values else { continue };
            let p = predict_risk(fit, x)?;
            w.write_record([r.id.clone(), p.linear_predictor.to_string(), p.relative_hazard.to_string()])?;
            n += 1;
        }
        w.flush()?;
        Ok(())
    })?;
    println!("scored {n} patients");
    Ok(())
}
