//! Hold-out model selection and the Wilcoxon signed-rank comparison.

use rayon::prelude::*;

use crate::baselines::{train_stagewise, BoostingRun, Learner};
use crate::data::Dataset;
use crate::engine::{train, TrainConfig};
use crate::ensemble::error_from_values;
use crate::error::{Error, Result};

/// Candidate values of the desired margin, strictly increasing inside (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct EGrid {
    values: Vec<f64>,
}

impl EGrid {
    /// Sorts `values`; rejects duplicates and anything outside (0, 1).
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("E grid is empty".into()));
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
            return Err(Error::InvalidParameter(format!(
                "E grid value {v} must lie in (0, 1)"
            )));
        }
        values.sort_by(f64::total_cmp);
        if values.windows(2).any(|p| p[0] == p[1]) {
            return Err(Error::InvalidParameter("E grid has duplicate values".into()));
        }
        Ok(Self { values })
    }

    /// 0.05, 0.10, ..., 0.95.
    pub fn default_grid() -> Self {
        Self {
            values: (1..=19).map(|k| k as f64 / 20.0).collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvRow<C> {
    pub candidate: C,
    /// `None` when training failed for this candidate.
    pub validation_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult<C> {
    pub chosen: C,
    pub table: Vec<CvRow<C>>,
    pub rule: &'static str,
}

impl<C: Copy + PartialEq + std::fmt::Display> CvResult<C> {
    /// Rows of `candidate,validation_error,chosen`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("candidate,validation_error,chosen\n");
        for row in &self.table {
            let err = row
                .validation_error
                .map_or_else(|| "failed".to_string(), |e| e.to_string());
            let chosen = u8::from(row.candidate == self.chosen);
            out.push_str(&format!("{},{err},{chosen}\n", row.candidate));
        }
        out
    }
}

/// Index of the last minimum (ties go to the largest candidate).
pub fn last_argmin(errors: &[Option<f64>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, e) in errors.iter().enumerate() {
        if let Some(e) = *e {
            if best.is_none_or(|(_, b)| e <= b) {
                best = Some((i, e));
            }
        }
    }
    best.map(|(i, _)| i)
}

/// Index of the first minimum (ties go to the smallest candidate).
pub fn first_argmin(errors: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &e) in errors.iter().enumerate() {
        if best.is_none_or(|(_, b)| e < b) {
            best = Some((i, e));
        }
    }
    best.map(|(i, _)| i)
}

/// Trains one model per grid value on `train` and keeps the largest `E`
/// reaching the minimum validation error. Candidates are trained in parallel
/// and reported in grid order.
pub fn select_e(
    train_set: &Dataset,
    valid: &Dataset,
    grid: &EGrid,
    template: &TrainConfig,
) -> Result<CvResult<f64>> {
    let table: Vec<CvRow<f64>> = grid
        .values
        .par_iter()
        .map(|&e| {
            let config = template.with_target(e);
            let validation_error = train(train_set, &config)
                .and_then(|res| res.ensemble.error_rate(valid))
                .ok();
            CvRow {
                candidate: e,
                validation_error,
            }
        })
        .collect();
    let errors: Vec<Option<f64>> = table.iter().map(|r| r.validation_error).collect();
    let idx = last_argmin(&errors).ok_or_else(|| {
        Error::InvalidData("training failed for every E candidate".into())
    })?;
    Ok(CvResult {
        chosen: table[idx].candidate,
        table,
        rule: "largest E attaining the minimum validation error",
    })
}

/// Validation error after every prefix of one stagewise run.
pub fn prefix_errors(run: &BoostingRun, valid: &Dataset) -> Result<Vec<f64>> {
    if let Some(needed) = run.rounds.iter().map(|r| r.stump.feature + 1).max() {
        if valid.n_features() < needed {
            return Err(Error::DimensionMismatch {
                expected: needed,
                actual: valid.n_features(),
            });
        }
    }
    let mut values = vec![0.0; valid.len()];
    let mut errors = Vec::with_capacity(run.n_rounds());
    for round in &run.rounds {
        for (f, x) in values.iter_mut().zip(valid.rows()) {
            *f += round.step * f64::from(round.stump.output(x));
        }
        errors.push(error_from_values(&values, valid.labels()));
    }
    Ok(errors)
}

/// Picks the number of rounds for a stagewise learner: the smallest prefix
/// length reaching the minimum validation error. `trainer` is called once.
pub fn select_rounds_with<F>(
    train_set: &Dataset,
    valid: &Dataset,
    max_rounds: usize,
    mut trainer: F,
) -> Result<CvResult<usize>>
where
    F: FnMut(&Dataset, usize) -> Result<BoostingRun>,
{
    if max_rounds == 0 {
        return Err(Error::InvalidParameter("max rounds must be at least 1".into()));
    }
    let run = trainer(train_set, max_rounds)?;
    let errors = prefix_errors(&run, valid)?;
    let idx = first_argmin(&errors)
        .ok_or_else(|| Error::InvalidData("training produced no rounds".into()))?;
    Ok(CvResult {
        chosen: idx + 1,
        table: errors
            .iter()
            .enumerate()
            .map(|(i, &e)| CvRow {
                candidate: i + 1,
                validation_error: Some(e),
            })
            .collect(),
        rule: "smallest round count attaining the minimum validation error",
    })
}

pub fn select_rounds(
    train_set: &Dataset,
    valid: &Dataset,
    max_rounds: usize,
    learner: Learner,
) -> Result<CvResult<usize>> {
    select_rounds_with(train_set, valid, max_rounds, |d, n| {
        train_stagewise(learner, d, n)
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wilcoxon {
    pub n_effective: usize,
    /// Rank sum of the differences favouring the first method.
    pub w: f64,
    pub z: f64,
}

/// Two values closer than this (relative) count as tied, so decimal inputs
/// such as `27.1 - 26.5` and `4.5 - 3.9` rank together.
const TIE_TOLERANCE: f64 = 1e-9;

fn nearly_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

/// One-tailed Wilcoxon signed-rank statistic for "method `a` has lower error
/// than method `b`" over paired per-dataset errors.
///
/// Zero differences are dropped, tied magnitudes share their average rank, and
/// no tie correction is applied to the variance:
/// `z = (W - n(n+1)/4) / sqrt(n(n+1)(2n+1)/24)`.
pub fn wilcoxon_z(errors_a: &[f64], errors_b: &[f64]) -> Result<Wilcoxon> {
    if errors_a.len() != errors_b.len() {
        return Err(Error::DimensionMismatch {
            expected: errors_a.len(),
            actual: errors_b.len(),
        });
    }
    let diffs: Vec<f64> = errors_a
        .iter()
        .zip(errors_b)
        .filter(|(a, b)| !nearly_equal(**a, **b))
        .map(|(a, b)| b - a)
        .collect();
    let n = diffs.len();
    if n < 5 {
        return Err(Error::TooFewDifferences(n));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diffs[i].abs().total_cmp(&diffs[j].abs()));
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && nearly_equal(diffs[order[start]].abs(), diffs[order[end]].abs()) {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }

    let w: f64 = (0..n).filter(|&i| diffs[i] > 0.0).map(|i| ranks[i]).sum();
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let sd = (nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0).sqrt();
    Ok(Wilcoxon {
        n_effective: n,
        w,
        z: (w - mean) / sd,
    })
}
