pub mod compare;
pub mod cox;
pub mod km;
pub mod score;
pub mod summarize;
pub mod synth;

use survkit::dataset::{parse_cohort, parse_covariate_list, Covariate, ParseOptions, PatientRecord};
use survkit::{Error, Result};

use crate::output::Run;
use crate::GlobalArgs;

/// Start a run and record the global flags.
pub fn start(g: &GlobalArgs, command: &'static str) -> Result<Run> {
    let mut run = Run::new(&g.out_dir, command, !g.no_figures)?;
    run.flag("policy", g.policy.as_str());
    run.flag("strict", g.strict);
    run.flag("figures", !g.no_figures);
    Ok(run)
}

/// Parse `--input`, writing `rejects.csv` when rows were skipped.
pub fn load_cohort(g: &GlobalArgs, run: &mut Run) -> Result<Vec<PatientRecord>> {
    let path = g.input.as_ref().ok_or_else(|| Error::Config("--input is required".into()))?;
    let bytes = run.read_input(path)?;
    let parsed = parse_cohort(&bytes, ParseOptions { strict: g.strict })?;
    if !parsed.rejects.is_empty() {
        run.note(format!("{} rows skipped, see rejects.csv", parsed.rejects.len()));
        run.write_with("rejects.csv", |buf| {
            let mut w = csv::Writer::from_writer(buf);
            w.write_record(["line", "reason"])?;
            for r in &parsed.rejects {
                w.write_record([r.line.to_string(), r.reason.clone()])?;
            }
            w.flush()?;
            Ok(())
        })?;
    }
    if parsed.records.is_empty() {
        return Err(Error::Degenerate("the cohort file has no usable records".into()));
    }
    Ok(parsed.records)
}

pub fn covariates(list: Option<&str>) -> Result<Vec<Covariate>> {
    match list {
        Some(l) => parse_covariate_list(l),
        None => Ok(Covariate::ALL.to_vec()),
    }
}

/// Plain-text table with columns padded to a common width.
pub fn print_table(header: &[String], rows: &[Vec<String>]) {
    let width = |s: &str| s.chars().count();
    let mut widths: Vec<usize> = header.iter().map(|h| width(h)).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(width(c));
        }
    }
    let line = |cells: &[String]| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c}{}", " ".repeat(w - width(c))))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    println!("{}", line(header));
    for r in rows {
        println!("{}", line(r));
    }
}
