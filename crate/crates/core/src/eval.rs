//! Discrimination (Harrell's C-index) and AIC/BIC model ranking.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::parametric::information_criteria;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcordanceResult {
    pub c_index: f64,
    pub concordant: u64,
    pub discordant: u64,
    pub tied_risk: u64,
    pub comparable_pairs: u64,
}

fn check_lengths(times: &[f64], events: &[bool], scores: &[f64]) -> Result<()> {
    if times.len() != events.len() || times.len() != scores.len() {
        return Err(Error::Domain(format!(
            "length mismatch: {} times, {} events, {} scores",
            times.len(),
            events.len(),
            scores.len()
        )));
    }
    if scores.iter().chain(times).any(|v| v.is_nan()) {
        return Err(Error::Domain("times and scores must not be NaN".into()));
    }
    Ok(())
}

/// Pairs anchored at subject `i`: `[concordant, discordant, tied]`.
///
/// Subject `i` anchors a pair with `j` when `i` has an event and either
/// fails strictly first or shares the time with a censored `j`.
fn pair_tally(times: &[f64], events: &[bool], scores: &[f64], i: usize) -> [u64; 3] {
    let mut tally = [0u64; 3];
    if !events[i] {
        return tally;
    }
    let (ti, si) = (times[i], scores[i]);
    for j in 0..times.len() {
        let comparable = ti < times[j] || (ti == times[j] && !events[j]);
        if !comparable {
            continue;
        }
        let slot = if si > scores[j] {
            0
        } else if si < scores[j] {
            1
        } else {
            2
        };
        tally[slot] += 1;
    }
    tally
}

fn finish(t: [u64; 3]) -> Result<ConcordanceResult> {
    let [concordant, discordant, tied_risk] = t;
    let comparable_pairs = concordant + discordant + tied_risk;
    if comparable_pairs == 0 {
        return Err(Error::Degenerate("no comparable pairs for the concordance index".into()));
    }
    Ok(ConcordanceResult {
        c_index: (concordant as f64 + 0.5 * tied_risk as f64) / comparable_pairs as f64,
        concordant,
        discordant,
        tied_risk,
        comparable_pairs,
    })
}

/// Harrell's C: share of comparable pairs in which the subject failing
/// first has the higher risk score, score ties counting one half. Pairs
/// with tied times where both failed are not comparable.
pub fn concordance_index(times: &[f64], events: &[bool], scores: &[f64]) -> Result<ConcordanceResult> {
    check_lengths(times, events, scores)?;
    finish(exec::sum_tallies(times.len(), |i| pair_tally(times, events, scores, i)))
}

pub fn concordance_index_sequential(times: &[f64], events: &[bool], scores: &[f64]) -> Result<ConcordanceResult> {
    check_lengths(times, events, scores)?;
    finish(exec::sum_tallies_sequential(times.len(), |i| pair_tally(times, events, scores, i)))
}

#[cfg(feature = "parallel")]
pub fn concordance_index_parallel(times: &[f64], events: &[bool], scores: &[f64]) -> Result<ConcordanceResult> {
    check_lengths(times, events, scores)?;
    finish(exec::sum_tallies_parallel(times.len(), |i| pair_tally(times, events, scores, i)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    pub label: String,
    pub loglik: f64,
    pub k: usize,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedModel {
    pub label: String,
    pub loglik: f64,
    pub k: usize,
    pub aic: f64,
    pub bic: f64,
    pub delta_aic: f64,
    pub rank: usize,
    pub bic_rank: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelRanking {
    pub n: usize,
    pub models: Vec<RankedModel>,
}

impl ModelRanking {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["label", "loglik", "k", "aic", "bic", "delta_aic", "rank"])?;
        for m in &self.models {
            w.write_record([
                m.label.clone(),
                m.loglik.to_string(),
                m.k.to_string(),
                m.aic.to_string(),
                m.bic.to_string(),
                m.delta_aic.to_string(),
                m.rank.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Rank models by AIC (ties broken by label), reporting each model's BIC
/// rank alongside.
pub fn compare_models(entries: &[ModelEntry]) -> Result<ModelRanking> {
    let first = entries.first().ok_or_else(|| Error::Domain("no models to compare".into()))?;
    if let Some(bad) = entries.iter().find(|e| e.n != first.n) {
        return Err(Error::Domain(format!(
            "models fitted on different sample sizes ({} has n = {}, {} has n = {}); BIC is not comparable",
            first.label, first.n, bad.label, bad.n
        )));
    }
    if let Some(bad) = entries.iter().find(|e| !e.loglik.is_finite()) {
        return Err(Error::Domain(format!("model {} has a non-finite log-likelihood", bad.label)));
    }
    let mut models: Vec<RankedModel> = entries
        .iter()
        .map(|e| {
            let (aic, bic) = information_criteria(e.loglik, e.k, e.n as f64);
            RankedModel { label: e.label.clone(), loglik: e.loglik, k: e.k, aic, bic, delta_aic: 0.0, rank: 0, bic_rank: 0 }
        })
        .collect();

    let mut by_bic: Vec<usize> = (0..models.len()).collect();
    by_bic.sort_by(|&a, &b| models[a].bic.total_cmp(&models[b].bic).then_with(|| models[a].label.cmp(&models[b].label)));
    for (r, &i) in by_bic.iter().enumerate() {
        models[i].bic_rank = r + 1;
    }

    models.sort_by(|a, b| a.aic.total_cmp(&b.aic).then_with(|| a.label.cmp(&b.label)));
    let best = models[0].aic;
    for (r, m) in models.iter_mut().enumerate() {
        m.rank = r + 1;
        m.delta_aic = m.aic - best;
    }
    Ok(ModelRanking { n: first.n, models })
}
