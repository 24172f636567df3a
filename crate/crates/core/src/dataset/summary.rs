//! Per-outcome-group descriptive statistics with cross-group tests.
//!
//! Continuous variables get median and quartiles (type-7 interpolation)
//! and a Kruskal-Wallis test; binary variables get proportions and a
//! Pearson chi-square test on the 2 x k table.

use serde::Serialize;

use super::{Covariate, Outcome, PatientRecord};
use crate::report::{format_p_value, format_number, format_percent};
use crate::special::chi_square_sf;

#[derive(Clone, Debug, Serialize)]
pub struct GroupInfo {
    pub outcome: Outcome,
    pub n: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    KruskalWallis,
    ChiSquare,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Cell {
    Continuous { n: usize, median: f64, q1: f64, q3: f64 },
    Binary { n: usize, positives: usize, proportion: f64 },
    /// No non-missing values in the group.
    Empty,
}

impl Cell {
    pub fn display(&self) -> String {
        match self {
            Cell::Continuous { median, q1, q3, .. } => {
                format!("{} ({} - {})", format_number(*median), format_number(*q1), format_number(*q3))
            }
            Cell::Binary { proportion, .. } => format_percent(*proportion),
            Cell::Empty => "-".into(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VariableRow {
    pub variable: String,
    pub label: String,
    pub test: TestKind,
    /// Aligned with [`CohortSummary::groups`].
    pub cells: Vec<Cell>,
    pub statistic: Option<f64>,
    pub df: Option<usize>,
    /// `None` when fewer than two groups carry data.
    pub p_value: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CohortSummary {
    pub n: usize,
    /// Non-empty outcome groups in reporting order.
    pub groups: Vec<GroupInfo>,
    /// Outcome classes with no records; left out of every comparison.
    pub empty_groups: Vec<Outcome>,
    pub variables: Vec<VariableRow>,
}

impl CohortSummary {
    /// Header and body of the printed table.
    pub fn table(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let mut header = vec!["Variable".to_string()];
        header.extend(self.groups.iter().map(|g| format!("{} (n = {})", g.outcome.label(), g.n)));
        header.push("P-value".into());
        let rows = self
            .variables
            .iter()
            .map(|v| {
                let label = match v.test {
                    TestKind::KruskalWallis => v.label.clone(),
                    TestKind::ChiSquare => format!("{} (%)", v.label),
                };
                let mut row = vec![label];
                row.extend(v.cells.iter().map(Cell::display));
                row.push(v.p_value.map(format_p_value).unwrap_or_else(|| "-".into()));
                row
            })
            .collect();
        (header, rows)
    }

    /// Compact `n = a / b / c` line for the group sizes.
    pub fn size_line(&self) -> String {
        let sizes: Vec<String> = self.groups.iter().map(|g| g.n.to_string()).collect();
        format!("n = {}", sizes.join(" / "))
    }
}

/// Type-7 sample quantile (linear interpolation between order statistics).
/// `sorted` must be ascending and non-empty.
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Kruskal-Wallis H with tie correction. Returns `(H, df)`; `H = 0` when
/// every value is tied.
pub(crate) fn kruskal_wallis(groups: &[Vec<f64>]) -> Option<(f64, usize)> {
    let groups: Vec<&Vec<f64>> = groups.iter().filter(|g| !g.is_empty()).collect();
    if groups.len() < 2 {
        return None;
    }
    let mut pooled: Vec<(f64, usize)> =
        groups.iter().enumerate().flat_map(|(g, v)| v.iter().map(move |&x| (x, g))).collect();
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = pooled.len();
    let mut rank_sums = vec![0.0; groups.len()];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && pooled[j + 1].0 == pooled[i].0 {
            j += 1;
        }
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        for &(_, g) in &pooled[i..=j] {
            rank_sums[g] += avg_rank;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let nf = n as f64;
    let correction = 1.0 - tie_term / (nf * nf * nf - nf);
    let df = groups.len() - 1;
    if correction <= 0.0 {
        return Some((0.0, df));
    }
    let h = 12.0 / (nf * (nf + 1.0))
        * rank_sums.iter().zip(&groups).map(|(r, g)| r * r / g.len() as f64).sum::<f64>()
        - 3.0 * (nf + 1.0);
    Some(((h / correction).max(0.0), df))
}

/// Pearson chi-square on a 2 x k table given per-group (positives, n).
pub(crate) fn chi_square_2xk(groups: &[(usize, usize)]) -> Option<(f64, usize)> {
    let groups: Vec<(usize, usize)> = groups.iter().copied().filter(|g| g.1 > 0).collect();
    if groups.len() < 2 {
        return None;
    }
    let total: usize = groups.iter().map(|g| g.1).sum();
    let pos: usize = groups.iter().map(|g| g.0).sum();
    let df = groups.len() - 1;
    if pos == 0 || pos == total {
        return Some((0.0, df));
    }
    let (total, pos) = (total as f64, pos as f64);
    let stat = groups
        .iter()
        .map(|&(p, n)| {
            let n = n as f64;
            let e_pos = n * pos / total;
            let e_neg = n - e_pos;
            let o_pos = p as f64;
            let o_neg = n - o_pos;
            (o_pos - e_pos).powi(2) / e_pos + (o_neg - e_neg).powi(2) / e_neg
        })
        .sum();
    Some((stat, df))
}

/// Group records by outcome and summarize every covariate.
pub fn summarize(records: &[PatientRecord]) -> CohortSummary {
    let grouped: Vec<(Outcome, Vec<&PatientRecord>)> = Outcome::ALL
        .iter()
        .map(|&o| (o, records.iter().filter(|r| r.outcome == o).collect()))
        .collect();
    let empty_groups = grouped.iter().filter(|(_, rs)| rs.is_empty()).map(|(o, _)| *o).collect();
    let grouped: Vec<(Outcome, Vec<&PatientRecord>)> = grouped.into_iter().filter(|(_, rs)| !rs.is_empty()).collect();

    let variables = Covariate::ALL
        .iter()
        .map(|&cov| {
            let values: Vec<Vec<f64>> =
                grouped.iter().map(|(_, rs)| rs.iter().filter_map(|r| cov.value(r)).collect()).collect();
            let (test, cells, result) = if cov.is_binary() {
                let counts: Vec<(usize, usize)> =
                    values.iter().map(|v| (v.iter().filter(|&&x| x == 1.0).count(), v.len())).collect();
                let cells = counts
                    .iter()
                    .map(|&(p, n)| {
                        if n == 0 {
                            Cell::Empty
                        } else {
                            Cell::Binary { n, positives: p, proportion: p as f64 / n as f64 }
                        }
                    })
                    .collect();
                (TestKind::ChiSquare, cells, chi_square_2xk(&counts))
            } else {
                let cells = values
                    .iter()
                    .map(|v| {
                        if v.is_empty() {
                            return Cell::Empty;
                        }
                        let mut s = v.clone();
                        s.sort_by(f64::total_cmp);
                        Cell::Continuous {
                            n: s.len(),
                            median: quantile_type7(&s, 0.5),
                            q1: quantile_type7(&s, 0.25),
                            q3: quantile_type7(&s, 0.75),
                        }
                    })
                    .collect();
                (TestKind::KruskalWallis, cells, kruskal_wallis(&values))
            };
            VariableRow {
                variable: cov.name().to_string(),
                label: match cov {
                    Covariate::ErStatus => "ER Positive".into(),
                    Covariate::Her2Status => "HER2 Positive".into(),
                    other => other.label().to_string(),
                },
                test,
                cells,
                statistic: result.map(|r| r.0),
                df: result.map(|r| r.1),
                p_value: result.map(|(stat, df)| chi_square_sf(stat, df as f64)),
            }
        })
        .collect();

    CohortSummary {
        n: records.len(),
        groups: grouped.iter().map(|(o, rs)| GroupInfo { outcome: *o, n: rs.len() }).collect(),
        empty_groups,
        variables,
    }
}
