use serde::Serialize;
use survkit::cox::{breslow_baseline, cox_fit_data, gof_tests, hazard_ratios, predict_risk, CoxOptions, Ties};
use survkit::dataset::apply_event_policy;
use survkit::eval::{concordance_index, ConcordanceResult};
use survkit::logodds::{logistic_cohort, logistic_fit_cohort, LogisticOptions};
use survkit::report::{format_coef, format_p_value};
use survkit::{Error, Result};

use super::{covariates, load_cohort, print_table, start};
use crate::svg::{forest_plot, ForestRow};
use crate::GlobalArgs;

#[derive(Serialize)]
struct Concordance<'a> {
    score: &'static str,
    #[serde(flatten)]
    result: &'a ConcordanceResult,
}

pub fn run(g: &GlobalArgs, list: Option<&str>, ties: Ties, horizon: f64, ridge: f64) -> Result<()> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::Config("--horizon must be positive".into()));
    }
    if !(ridge.is_finite() && ridge >= 0.0) {
        return Err(Error::Config("--ridge must be non-negative".into()));
    }
    let covs = covariates(list)?;
    let mut run = start(g, "cox")?;
    run.flag("covariates", covs.iter().map(|c| c.name()).collect::<Vec<_>>());
    run.flag("ties", ties.to_string());
    run.flag("horizon_months", horizon);
    run.flag("ridge", ridge);
    let records = load_cohort(g, &mut run)?;

    let data = apply_event_policy(&records, g.policy, &covs);
    if !data.excluded.is_empty() {
        run.note(format!("{} records excluded for missing covariates", data.excluded.len()));
    }
    if data.samples.is_empty() {
        return Err(Error::Degenerate("no complete records for the Cox model".into()));
    }
    let fit = cox_fit_data(&data, &CoxOptions { ties, ..CoxOptions::default() })?;
    run.json("cox_fit.json", &fit)?;
    if !fit.converged {
        run.finish()?;
        return Err(Error::NotConverged(format!(
            "Cox fit stopped after {} iterations with gradient max-norm {:.3e}",
            fit.iterations, fit.gradient_max_norm
        )));
    }

    let table = hazard_ratios(&fit)?;
    run.write_with("hazard_ratios.csv", |buf| table.write_csv(buf))?;
    run.json("gof.json", &gof_tests(&fit, &data.samples)?)?;
    let rows: Vec<ForestRow> = table
        .rows
        .iter()
        .map(|r| ForestRow {
            label: r.variable.clone(),
            hazard_ratio: r.hazard_ratio,
            ci_lower: r.ci_lower,
            ci_upper: r.ci_upper,
            p_value: r.p_value,
        })
        .collect();
    run.svg("forest.svg", || forest_plot("Hazard ratios (95% CI)", &rows))?;

    let lp = data
        .samples
        .iter()
        .map(|s| predict_risk(&fit, &s.covariates).map(|r| r.linear_predictor))
        .collect::<Result<Vec<_>>>()?;
    let times: Vec<f64> = data.samples.iter().map(|s| s.time).collect();
    let events: Vec<bool> = data.samples.iter().map(|s| s.event).collect();
    match concordance_index(&times, &events, &lp) {
        Ok(c) => run.json("concordance.json", &Concordance { score: "linear_predictor", result: &c })?,
        Err(e) => run.note(format!("concordance not computed: {e}")),
    }

    match breslow_baseline(&fit, &data.samples) {
        Ok(b) => run.write_with("baseline_hazard.csv", |buf| {
            let mut w = csv::Writer::from_writer(buf);
            w.write_record(["time", "increment", "cumulative_hazard"])?;
            for ((t, d), c) in b.times.iter().zip(&b.increments).zip(&b.cumulative) {
                w.write_record([t.to_string(), d.to_string(), c.to_string()])?;
            }
            w.flush()?;
            Ok(())
        })?,
        Err(e) => run.note(format!("baseline hazard not computed: {e}")),
    }

    let logistic = logistic_cohort(&records, &covs, horizon, g.policy).and_then(|cohort| {
        logistic_fit_cohort(&cohort, &LogisticOptions { ridge, horizon_months: horizon, ..LogisticOptions::default() })
    });
    match logistic {
        Ok(l) => run.json("logistic_fit.json", &l)?,
        Err(e) => run.note(format!("log-odds model not fitted: {e}")),
    }

    println!("n = {}, events = {}, ties = {}", fit.n, fit.n_events, fit.ties_method);
    let header: Vec<String> = ["Variable", "Coef", "HR", "95% CI", "p"].map(String::from).to_vec();
    let body: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            vec![
                r.variable.clone(),
                format_coef(r.coefficient),
                format_coef(r.hazard_ratio),
                format!("{} to {}", format_coef(r.ci_lower), format_coef(r.ci_upper)),
                format_p_value(r.p_value),
            ]
        })
        .collect();
    print_table(&header, &body);
    run.finish()
}
