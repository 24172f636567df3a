//! Product-limit survival curves and the log-rank test.
//!
//! At a time with both events and censorings, the events are processed
//! first: censored subjects still count as at risk at their own time.
//! Confidence bands use the complementary log-log transform with
//! z = 1.96, which keeps them inside [0, 1].

use std::collections::BTreeMap;
use std::fmt::Display;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::dataset::SurvivalSample;
use crate::error::{Error, Result};
use crate::special::chi_square_sf;

pub const Z_95: f64 = 1.96;

#[derive(Clone, Debug, PartialEq)]
pub struct KmCurve {
    pub event_times: Vec<f64>,
    pub survival: Vec<f64>,
    pub at_risk: Vec<usize>,
    pub deaths: Vec<usize>,
    /// Greenwood standard error; `None` once the curve has dropped to 0.
    pub se: Vec<Option<f64>>,
    pub ci_lower: Vec<f64>,
    pub ci_upper: Vec<f64>,
    pub n: usize,
    pub n_events: usize,
    /// All observed times, ascending (used for risk tables).
    observed: Vec<f64>,
}

/// One exported curve step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KmRow {
    pub time: f64,
    pub at_risk: usize,
    pub deaths: usize,
    pub survival: f64,
    pub se: Option<f64>,
    pub ci_lower: f64,
    pub ci_upper: f64,
}

/// Curve value at a query time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurvivalReadout {
    pub survival: f64,
    /// The query lies past the last observed time.
    pub extrapolated: bool,
}

impl KmCurve {
    pub fn rows(&self) -> Vec<KmRow> {
        (0..self.event_times.len())
            .map(|k| KmRow {
                time: self.event_times[k],
                at_risk: self.at_risk[k],
                deaths: self.deaths[k],
                survival: self.survival[k],
                se: self.se[k],
                ci_lower: self.ci_lower[k],
                ci_upper: self.ci_upper[k],
            })
            .collect()
    }

    /// Number of subjects with observed time >= `t`.
    pub fn at_risk_at(&self, t: f64) -> usize {
        self.observed.len() - self.observed.partition_point(|&x| x < t)
    }

    pub fn max_time(&self) -> f64 {
        self.observed.last().copied().unwrap_or(0.0)
    }

    /// Write the curve as CSV with columns
    /// `time,at_risk,deaths,survival,se,ci_lower,ci_upper`.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["time", "at_risk", "deaths", "survival", "se", "ci_lower", "ci_upper"])?;
        for r in self.rows() {
            w.write_record([
                r.time.to_string(),
                r.at_risk.to_string(),
                r.deaths.to_string(),
                r.survival.to_string(),
                r.se.map(|s| s.to_string()).unwrap_or_default(),
                r.ci_lower.to_string(),
                r.ci_upper.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Sorted `(time, events, censored)` per distinct observed time.
fn tabulate<'a>(samples: impl Iterator<Item = &'a SurvivalSample>) -> Vec<(f64, usize, usize)> {
    let mut pairs: Vec<(f64, bool)> = samples.map(|s| (s.time, s.event)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, usize, usize)> = Vec::new();
    for (t, e) in pairs {
        match out.last_mut() {
            Some(last) if last.0 == t => {
                if e {
                    last.1 += 1
                } else {
                    last.2 += 1
                }
            }
            _ => out.push((t, e as usize, (!e) as usize)),
        }
    }
    out
}

fn validate_times(samples: &[SurvivalSample]) -> Result<()> {
    if let Some(s) = samples.iter().find(|s| !(s.time > 0.0) || !s.time.is_finite()) {
        return Err(Error::Domain(format!("survival times must be positive and finite, got {}", s.time)));
    }
    Ok(())
}

/// Kaplan-Meier estimate with Greenwood standard errors.
pub fn km_fit(samples: &[SurvivalSample]) -> Result<KmCurve> {
    if samples.is_empty() {
        return Err(Error::Degenerate("Kaplan-Meier needs at least one sample".into()));
    }
    validate_times(samples)?;
    let mut observed: Vec<f64> = samples.iter().map(|s| s.time).collect();
    observed.sort_by(f64::total_cmp);

    let mut curve = KmCurve {
        event_times: Vec::new(),
        survival: Vec::new(),
        at_risk: Vec::new(),
        deaths: Vec::new(),
        se: Vec::new(),
        ci_lower: Vec::new(),
        ci_upper: Vec::new(),
        n: samples.len(),
        n_events: 0,
        observed,
    };
    let mut remaining = samples.len();
    let mut censored_so_far = false;
    let mut s = 1.0_f64;
    // Greenwood sum; None after S reaches zero.
    let mut greenwood = Some(0.0_f64);
    for (t, d, c) in tabulate(samples.iter()) {
        if d > 0 {
            let n = remaining;
            // Before any censoring the product telescopes to survivors / n,
            // which is computed directly to avoid accumulated rounding.
            s = if censored_so_far { s * (1.0 - d as f64 / n as f64) } else { (n - d) as f64 / curve.n as f64 };
            greenwood = greenwood.and_then(|g| (n > d).then(|| g + d as f64 / (n as f64 * (n - d) as f64)));
            let (se, lo, hi) = match greenwood {
                Some(g) if s > 0.0 => {
                    let (lo, hi) = cloglog_band(s, g);
                    (Some(s * g.sqrt()), lo, hi)
                }
                _ => (None, 0.0, 0.0),
            };
            curve.event_times.push(t);
            curve.survival.push(s);
            curve.at_risk.push(n);
            curve.deaths.push(d);
            curve.se.push(se);
            curve.ci_lower.push(lo);
            curve.ci_upper.push(hi);
            curve.n_events += d;
        }
        remaining -= d + c;
        censored_so_far |= c > 0;
    }
    Ok(curve)
}

/// Complementary log-log band around `s` given the Greenwood sum.
fn cloglog_band(s: f64, greenwood: f64) -> (f64, f64) {
    if s >= 1.0 || greenwood <= 0.0 {
        return (s, s);
    }
    let log_s = s.ln();
    let se_theta = greenwood.sqrt() / log_s.abs();
    let lo = s.powf((Z_95 * se_theta).exp());
    let hi = s.powf((-Z_95 * se_theta).exp());
    (lo.clamp(0.0, 1.0), hi.clamp(0.0, 1.0))
}

/// Right-continuous evaluation of the step function.
pub fn survival_at(curve: &KmCurve, t: f64) -> Result<SurvivalReadout> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("query time must be non-negative, got {t}")));
    }
    let k = curve.event_times.partition_point(|&x| x <= t);
    let survival = if k == 0 { 1.0 } else { curve.survival[k - 1] };
    Ok(SurvivalReadout { survival, extrapolated: t > curve.max_time() })
}

#[derive(Clone, Debug)]
pub struct Stratified<L> {
    pub curves: BTreeMap<L, KmCurve>,
    /// Declared levels that had no members.
    pub empty_levels: Vec<L>,
}

/// One curve per label. `levels` optionally declares the expected labels
/// so that empty ones can be reported; pass `&[]` to infer them.
pub fn km_stratified<L: Ord + Clone + Display>(
    samples: &[SurvivalSample],
    labels: &[L],
    levels: &[L],
) -> Result<Stratified<L>> {
    if samples.len() != labels.len() {
        return Err(Error::Domain(format!("{} samples but {} labels", samples.len(), labels.len())));
    }
    let mut groups: BTreeMap<L, Vec<SurvivalSample>> = BTreeMap::new();
    for (s, l) in samples.iter().zip(labels) {
        if !levels.is_empty() && !levels.contains(l) {
            return Err(Error::Config(format!("label `{l}` is not a declared level")));
        }
        groups.entry(l.clone()).or_default().push(s.clone());
    }
    let mut curves = BTreeMap::new();
    for (l, g) in groups {
        curves.insert(l, km_fit(&g)?);
    }
    let empty_levels = levels.iter().filter(|l| !curves.contains_key(*l)).cloned().collect();
    Ok(Stratified { curves, empty_levels })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupEvents {
    pub label: String,
    pub n: usize,
    pub observed: f64,
    pub expected: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogRankResult {
    pub chi_square: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    pub groups: Vec<GroupEvents>,
}

/// K-sample log-rank test with the hypergeometric covariance.
pub fn logrank_test<L: Ord + Clone + Display>(samples: &[SurvivalSample], labels: &[L]) -> Result<LogRankResult> {
    if samples.len() != labels.len() {
        return Err(Error::Domain(format!("{} samples but {} labels", samples.len(), labels.len())));
    }
    validate_times(samples)?;
    let levels: Vec<L> = {
        let mut v = labels.to_vec();
        v.sort();
        v.dedup();
        v
    };
    let k = levels.len();
    if k < 2 {
        return Err(Error::Config("log-rank test needs at least two groups".into()));
    }
    let group_of: Vec<usize> = labels.iter().map(|l| levels.binary_search(l).unwrap()).collect();
    if !samples.iter().any(|s| s.event) {
        return Err(Error::Degenerate("log-rank statistic undefined without events".into()));
    }

    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by(|&a, &b| samples[a].time.total_cmp(&samples[b].time));

    let mut at_risk = vec![0usize; k];
    for &g in &group_of {
        at_risk[g] += 1;
    }
    let sizes = at_risk.clone();
    let mut observed = vec![0.0; k];
    let mut expected = vec![0.0; k];
    let mut cov = DMatrix::<f64>::zeros(k, k);

    let mut i = 0;
    while i < order.len() {
        let t = samples[order[i]].time;
        let mut j = i;
        let mut deaths = vec![0usize; k];
        let mut leaving = vec![0usize; k];
        while j < order.len() && samples[order[j]].time == t {
            let g = group_of[order[j]];
            leaving[g] += 1;
            if samples[order[j]].event {
                deaths[g] += 1;
            }
            j += 1;
        }
        let d: usize = deaths.iter().sum();
        if d > 0 {
            let n: usize = at_risk.iter().sum();
            let (nf, df) = (n as f64, d as f64);
            for g in 0..k {
                let share = at_risk[g] as f64 / nf;
                observed[g] += deaths[g] as f64;
                expected[g] += df * share;
            }
            if n > 1 {
                let factor = df * (nf - df) / (nf - 1.0);
                for g in 0..k {
                    let sg = at_risk[g] as f64 / nf;
                    for h in 0..k {
                        let sh = at_risk[h] as f64 / nf;
                        let delta = if g == h { 1.0 } else { 0.0 };
                        cov[(g, h)] += factor * sg * (delta - sh);
                    }
                }
            }
        }
        for g in 0..k {
            at_risk[g] -= leaving[g];
        }
        i = j;
    }

    let m = k - 1;
    let diff = DVector::from_iterator(m, (0..m).map(|g| observed[g] - expected[g]));
    let v = cov.view((0, 0), (m, m)).into_owned();
    let chi_square = if diff.iter().all(|x| x.abs() < 1e-12) {
        0.0
    } else {
        let chol = v
            .cholesky()
            .ok_or_else(|| Error::Degenerate("log-rank variance matrix is singular".into()))?;
        diff.dot(&chol.solve(&diff)).max(0.0)
    };
    Ok(LogRankResult {
        chi_square,
        degrees_of_freedom: m,
        p_value: chi_square_sf(chi_square, m as f64),
        groups: levels
            .iter()
            .enumerate()
            .map(|(g, l)| GroupEvents { label: l.to_string(), n: sizes[g], observed: observed[g], expected: expected[g] })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn samples(data: &[(f64, bool)]) -> Vec<SurvivalSample> {
        data.iter().map(|&(t, e)| SurvivalSample::new(t, e)).collect()
    }

    fn five() -> Vec<SurvivalSample> {
        samples(&[(1.0, true), (2.0, false), (3.0, true), (4.0, false), (5.0, true)])
    }

    #[test]
    fn all_censored_is_flat() {
        let c = km_fit(&samples(&[(1.0, false), (2.0, false), (3.0, false), (4.0, false), (5.0, false)])).unwrap();
        assert!(c.event_times.is_empty());
        assert_eq!(survival_at(&c, 4.0).unwrap().survival, 1.0);
    }

    #[test]
    fn five_subject_hand_values() {
        let c = km_fit(&five()).unwrap();
        assert_eq!(c.event_times, vec![1.0, 3.0, 5.0]);
        assert_eq!(c.at_risk, vec![5, 3, 1]);
        let hand = [4.0 / 5.0, 4.0 / 5.0 * 2.0 / 3.0, 0.0];
        for (s, h) in c.survival.iter().zip(hand) {
            assert!((s - h).abs() < 1e-12);
        }
        // Greenwood at t = 1: S^2 * 1/(5*4)
        assert!((c.se[0].unwrap() - 0.8 * (1.0f64 / 20.0).sqrt()).abs() < 1e-12);
        assert_eq!(c.se[2], None);
        assert_eq!((c.ci_lower[2], c.ci_upper[2]), (0.0, 0.0));
    }

    #[test]
    fn step_evaluation() {
        let c = km_fit(&five()).unwrap();
        assert_eq!(survival_at(&c, 0.0).unwrap().survival, 1.0);
        assert_eq!(survival_at(&c, 2.5).unwrap().survival, 0.8);
        assert_eq!(survival_at(&c, 3.0).unwrap().survival, c.survival[1]);
        let late = survival_at(&c, 9.0).unwrap();
        assert!(late.extrapolated);
        assert_eq!(late.survival, 0.0);
        assert!(survival_at(&c, -1.0).is_err());
    }

    #[test]
    fn events_before_censorings_at_tied_time() {
        let c = km_fit(&samples(&[(2.0, true), (2.0, false), (3.0, true)])).unwrap();
        assert_eq!(c.at_risk, vec![3, 1]);
        assert!((c.survival[0] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn at_risk_table() {
        let c = km_fit(&five()).unwrap();
        assert_eq!(c.at_risk_at(0.0), 5);
        assert_eq!(c.at_risk_at(2.5), 3);
        assert_eq!(c.at_risk_at(6.0), 0);
    }

    #[test]
    fn stratified_partition() {
        let s = five();
        let one = km_stratified(&s, &["all"; 5], &[]).unwrap();
        assert_eq!(one.curves["all"], km_fit(&s).unwrap());
        let labels = ["a", "b", "a", "b", "b"];
        let two = km_stratified(&s, &labels, &["a", "b", "c"]).unwrap();
        let events: usize = two.curves.values().map(|c| c.n_events).sum();
        assert_eq!(events, 3);
        assert_eq!(two.empty_levels, vec!["c"]);
    }

    /// Direct O - E / V tabulation for two groups, written independently.
    fn two_group_oracle(a: &[(f64, bool)], b: &[(f64, bool)]) -> f64 {
        let mut times: Vec<f64> = a.iter().chain(b).filter(|x| x.1).map(|x| x.0).collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        let (mut o_minus_e, mut var) = (0.0, 0.0);
        for t in times {
            let n1 = a.iter().filter(|x| x.0 >= t).count() as f64;
            let n2 = b.iter().filter(|x| x.0 >= t).count() as f64;
            let d1 = a.iter().filter(|x| x.0 == t && x.1).count() as f64;
            let d2 = b.iter().filter(|x| x.0 == t && x.1).count() as f64;
            let (n, d) = (n1 + n2, d1 + d2);
            o_minus_e += d1 - d * n1 / n;
            if n > 1.0 {
                var += d * (n1 / n) * (1.0 - n1 / n) * (n - d) / (n - 1.0);
            }
        }
        o_minus_e * o_minus_e / var
    }

    #[test]
    fn six_subject_fixture() {
        let a = [(1.0, true), (3.0, true), (5.0, true)];
        let b = [(2.0, true), (4.0, true), (6.0, false)];
        let all: Vec<(f64, bool)> = a.iter().chain(&b).copied().collect();
        let labels = ["A", "A", "A", "B", "B", "B"];
        let r = logrank_test(&samples(&all), &labels).unwrap();
        assert!((r.chi_square - two_group_oracle(&a, &b)).abs() < 1e-9);
        assert_eq!(r.degrees_of_freedom, 1);
        let o: f64 = r.groups.iter().map(|g| g.observed).sum();
        let e: f64 = r.groups.iter().map(|g| g.expected).sum();
        assert!((o - e).abs() < 1e-9);
    }

    #[test]
    fn identical_groups_and_errors() {
        let base = [(1.0, true), (2.0, false), (2.0, true), (4.0, true)];
        let all: Vec<(f64, bool)> = base.iter().chain(&base).copied().collect();
        let labels = ["x", "x", "x", "x", "y", "y", "y", "y"];
        let r = logrank_test(&samples(&all), &labels).unwrap();
        assert!(r.chi_square.abs() < 1e-9);
        assert!((r.p_value - 1.0).abs() < 1e-9);
        assert!(matches!(logrank_test(&samples(&base), &["x"; 4]), Err(Error::Config(_))));
        let censored = samples(&[(1.0, false), (2.0, false)]);
        assert!(matches!(logrank_test(&censored, &["x", "y"]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn three_groups_have_two_df() {
        let s = samples(&[(1.0, true), (2.0, true), (3.0, false), (4.0, true), (5.0, true), (6.0, true)]);
        let r = logrank_test(&s, &[0, 1, 2, 0, 1, 2]).unwrap();
        assert_eq!(r.degrees_of_freedom, 2);
        assert!(r.chi_square >= 0.0 && (0.0..=1.0).contains(&r.p_value));
    }

    fn arb_samples() -> impl Strategy<Value = Vec<(f64, bool)>> {
        proptest::collection::vec(((1u32..40).prop_map(|t| t as f64), any::<bool>()), 1..60)
    }

    proptest! {
        #[test]
        fn curve_invariants(data in arb_samples()) {
            let c = km_fit(&samples(&data)).unwrap();
            let mut prod = 1.0;
            for k in 0..c.event_times.len() {
                prod *= 1.0 - c.deaths[k] as f64 / c.at_risk[k] as f64;
                prop_assert!((c.survival[k] - prod).abs() < 1e-12);
                prop_assert!(c.ci_lower[k] <= c.survival[k] + 1e-15 && c.survival[k] <= c.ci_upper[k] + 1e-15);
                prop_assert!((0.0..=1.0).contains(&c.ci_lower[k]) && (0.0..=1.0).contains(&c.ci_upper[k]));
                if k > 0 {
                    prop_assert!(c.survival[k] <= c.survival[k - 1]);
                    prop_assert!(c.at_risk[k] < c.at_risk[k - 1]);
                    prop_assert!(c.event_times[k] > c.event_times[k - 1]);
                }
            }
        }

        #[test]
        fn merging_strata_equals_pooled_fit(a in arb_samples(), b in arb_samples()) {
            let all: Vec<(f64, bool)> = a.iter().chain(&b).copied().collect();
            let labels: Vec<u8> = a.iter().map(|_| 0).chain(b.iter().map(|_| 1)).collect();
            let strata = km_stratified(&samples(&all), &labels, &[]).unwrap();
            let merged: Vec<SurvivalSample> = samples(&a).into_iter().chain(samples(&b)).collect();
            prop_assert_eq!(km_fit(&merged).unwrap(), km_fit(&samples(&all)).unwrap());
            prop_assert_eq!(strata.curves.len(), 2);
        }

        #[test]
        fn logrank_label_symmetry(data in arb_samples(), flips in proptest::collection::vec(any::<bool>(), 60)) {
            let labels: Vec<u8> = (0..data.len()).map(|i| flips[i] as u8).collect();
            let swapped: Vec<u8> = labels.iter().map(|l| 1 - l).collect();
            let s = samples(&data);
            match (logrank_test(&s, &labels), logrank_test(&s, &swapped)) {
                (Ok(a), Ok(b)) => prop_assert!((a.chi_square - b.chi_square).abs() <= 1e-9 * (1.0 + a.chi_square)),
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "symmetry broken"),
            }
        }
    }
}
