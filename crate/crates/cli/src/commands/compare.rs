use survkit::cox::{cox_fit_data, CoxOptions, Ties};
use survkit::dataset::apply_event_policy;
use survkit::eval::{compare_models, ModelEntry};
use survkit::km::km_fit;
use survkit::parametric::{fit_parametric, survival_function, Family, ParametricFit};
use survkit::report::format_number;
use survkit::{Error, Result};

use super::{covariates, load_cohort, print_table, start};
use crate::svg::{km_figure, FittedCurve, KmPanel, KmSeries};
use crate::GlobalArgs;

const COX_LABEL: &str = "cox (partial likelihood)";
const CURVE_POINTS: usize = 120;

enum Model {
    Parametric(Family),
    Cox,
}

fn parse_models(list: &str) -> Result<Vec<Model>> {
    let mut out: Vec<Model> = Vec::new();
    for token in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let m = if token.eq_ignore_ascii_case("cox") { Model::Cox } else { Model::Parametric(token.parse()?) };
        let dup = out.iter().any(|o| match (o, &m) {
            (Model::Cox, Model::Cox) => true,
            (Model::Parametric(a), Model::Parametric(b)) => a == b,
            _ => false,
        });
        if dup {
            return Err(Error::Config(format!("model `{token}` listed twice")));
        }
        out.push(m);
    }
    if out.is_empty() {
        return Err(Error::Config("--models is empty".into()));
    }
    Ok(out)
}

fn suffix(label: &str, converged: bool) -> String {
    if converged {
        label.to_string()
    } else {
        format!("{label} [unconverged]")
    }
}

pub fn run(g: &GlobalArgs, models: &str, list: Option<&str>, ties: Ties) -> Result<()> {
    let models = parse_models(models)?;
    let with_cox = models.iter().any(|m| matches!(m, Model::Cox));
    let covs = if with_cox { covariates(list)? } else { Vec::new() };
    let mut run = start(g, "compare")?;
    run.flag("models", models.iter().map(|m| match m {
        Model::Cox => "cox",
        Model::Parametric(f) => f.as_str(),
    }).collect::<Vec<_>>());
    run.flag("covariates", covs.iter().map(|c| c.name()).collect::<Vec<_>>());
    run.flag("ties", ties.to_string());
    let records = load_cohort(g, &mut run)?;

    // All models see the same complete-case sample so that AIC is comparable.
    let data = apply_event_policy(&records, g.policy, &covs);
    if !data.excluded.is_empty() {
        run.note(format!("{} records excluded for missing covariates", data.excluded.len()));
    }
    if data.samples.is_empty() {
        return Err(Error::Degenerate("no complete records to compare models on".into()));
    }
    let n = data.samples.len();

    let mut entries = Vec::new();
    let mut fits: Vec<ParametricFit> = Vec::new();
    let mut failures = Vec::new();
    for m in &models {
        match m {
            Model::Parametric(family) => match fit_parametric(&data.samples, *family) {
                Ok(f) => {
                    entries.push(ModelEntry { label: suffix(family.as_str(), f.converged), loglik: f.loglik, k: family.k(), n });
                    fits.push(f);
                }
                Err(e) => failures.push(format!("{family}: {e}")),
            },
            Model::Cox => match cox_fit_data(&data, &CoxOptions { ties, ..CoxOptions::default() }) {
                Ok(f) => entries.push(ModelEntry { label: suffix(COX_LABEL, f.converged), loglik: f.loglik_full, k: f.beta.len(), n }),
                Err(e) => failures.push(format!("cox: {e}")),
            },
        }
    }
    for f in &failures {
        run.note(format!("fit failed, {f}"));
    }
    if entries.is_empty() {
        run.finish()?;
        return Err(Error::NotConverged(format!("every model failed to fit ({})", failures.join("; "))));
    }

    let ranking = compare_models(&entries)?;
    run.write_with("model_comparison.csv", |buf| ranking.write_csv(buf))?;
    run.json("parametric_fits.json", &fits)?;

    if run.figures() && !fits.is_empty() {
        let curve = km_fit(&data.samples)?;
        let t_max = curve.max_time();
        let fitted = fits
            .iter()
            .map(|f| {
                let points = (0..=CURVE_POINTS)
                    .map(|i| {
                        let t = t_max * i as f64 / CURVE_POINTS as f64;
                        survival_function(f.family, f.params, t).map(|s| (t, s))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(FittedCurve { label: f.family.to_string(), points })
            })
            .collect::<Result<Vec<_>>>()?;
        let panel = KmPanel {
            title: "Kaplan-Meier and fitted parametric survival".into(),
            series: vec![KmSeries { label: "Kaplan-Meier".into(), curve: &curve }],
            fitted,
            note: None,
        };
        run.svg("parametric_fits.svg", || km_figure(&[panel]))?;
    }

    println!("n = {n}");
    let header: Vec<String> = ["Rank", "Model", "k", "Log-lik", "AIC", "BIC", "dAIC"].map(String::from).to_vec();
    let rows: Vec<Vec<String>> = ranking
        .models
        .iter()
        .map(|m| {
            vec![
                m.rank.to_string(),
                m.label.clone(),
                m.k.to_string(),
                format_number(m.loglik),
                format_number(m.aic),
                format_number(m.bic),
                format_number(m.delta_aic),
            ]
        })
        .collect();
    print_table(&header, &rows);
    run.finish()
}
