//! Normalized margins, their statistics, and cumulative-distribution exports.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::data::Dataset;
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};

/// Number of points in the default CDF grid over [-1, 1].
pub const DEFAULT_GRID_POINTS: usize = 201;

/// `rho_i = y_i F(x_i) / sum(w)`.
pub fn normalized_margins(ensemble: &Ensemble, data: &Dataset) -> Result<Vec<f64>> {
    let total = ensemble.total_weight();
    if total <= 0.0 {
        return Err(Error::InvalidParameter("ensemble weights are all zero".into()));
    }
    Ok(unnormalized_margins(ensemble, data)?
        .into_iter()
        .map(|m| (m / total).clamp(-1.0, 1.0))
        .collect())
}

/// `y_i F(x_i)` without rescaling.
pub fn unnormalized_margins(ensemble: &Ensemble, data: &Dataset) -> Result<Vec<f64>> {
    Ok(ensemble
        .decision_values(data)?
        .into_iter()
        .zip(data.labels())
        .map(|(f, &y)| f * f64::from(y))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginStats {
    pub mean: f64,
    /// Population variance (divisor `M`).
    pub variance: f64,
}

pub fn margin_stats(rho: &[f64]) -> Result<MarginStats> {
    if rho.is_empty() {
        return Err(Error::InvalidData("no margins".into()));
    }
    let m = rho.len() as f64;
    let mean = rho.iter().sum::<f64>() / m;
    let variance = rho.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / m;
    Ok(MarginStats { mean, variance })
}

/// Both sides of `(1/M) sum (rho_i - E)^2 = var(rho) + (mean - E)^2`,
/// each computed by its own summation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    pub lhs: f64,
    pub rhs: f64,
    pub abs_diff: f64,
}

pub fn decomposition_check(rho: &[f64], target: f64) -> Result<Decomposition> {
    let stats = margin_stats(rho)?;
    let m = rho.len() as f64;
    let lhs = rho.iter().map(|r| (r - target) * (r - target)).sum::<f64>() / m;
    let rhs = stats.variance + (stats.mean - target) * (stats.mean - target);
    Ok(Decomposition {
        lhs,
        rhs,
        abs_diff: (lhs - rhs).abs(),
    })
}

/// `sum_i (rho_i - mean)(mean - E)`, which vanishes identically.
pub fn cross_term(rho: &[f64], target: f64) -> Result<f64> {
    let stats = margin_stats(rho)?;
    Ok(rho
        .iter()
        .map(|r| (r - stats.mean) * (stats.mean - target))
        .sum())
}

/// The expansion `var - 2 E mean + mean^2 + E^2` of the per-example objective.
pub fn expanded_objective(rho: &[f64], target: f64) -> Result<f64> {
    let s = margin_stats(rho)?;
    Ok(s.variance - 2.0 * target * s.mean + s.mean * s.mean + target * target)
}

/// 201 evenly spaced thresholds on [-1, 1].
pub fn default_grid() -> Vec<f64> {
    let n = DEFAULT_GRID_POINTS - 1;
    (0..=n).map(|k| -1.0 + 2.0 * k as f64 / n as f64).collect()
}

/// Fraction of margins `<= theta` at each grid point (right-continuous).
pub fn cumulative_distribution(rho: &[f64], grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if rho.is_empty() {
        return Err(Error::InvalidData("no margins".into()));
    }
    if grid.windows(2).any(|p| !(p[0] <= p[1])) || grid.iter().any(|t| t.is_nan()) {
        return Err(Error::InvalidParameter("CDF grid must be ascending".into()));
    }
    let mut sorted = rho.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    Ok(grid
        .iter()
        .map(|&t| (t, sorted.partition_point(|&r| r <= t) as f64 / m))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginReport {
    pub rho: Vec<f64>,
    pub stats: MarginStats,
    pub cdf: Vec<(f64, f64)>,
}

impl MarginReport {
    pub fn new(rho: Vec<f64>, grid: &[f64]) -> Result<Self> {
        let stats = margin_stats(&rho)?;
        let cdf = cumulative_distribution(&rho, grid)?;
        Ok(Self { rho, stats, cdf })
    }

    pub fn for_ensemble(ensemble: &Ensemble, data: &Dataset) -> Result<Self> {
        Self::new(normalized_margins(ensemble, data)?, &default_grid())
    }

    /// Writes `margins.csv`, `margin_cdf.csv` and `margin_stats.csv` into `dir`,
    /// each name prefixed with `prefix`.
    pub fn write_all(&self, dir: &Path, prefix: &str, target: Option<f64>) -> Result<()> {
        write_margins_csv(&dir.join(format!("{prefix}margins.csv")), &self.rho)?;
        write_cdf_csv(&dir.join(format!("{prefix}margin_cdf.csv")), &self.cdf)?;
        write_stats_csv(&dir.join(format!("{prefix}margin_stats.csv")), &self.stats, target)
    }
}

fn write_lines(path: &Path, header: &str, lines: impl Iterator<Item = String>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let body = || -> std::io::Result<()> {
        writeln!(out, "{header}")?;
        for l in lines {
            writeln!(out, "{l}")?;
        }
        out.flush()
    };
    body().map_err(|e| Error::io(path, e))
}

pub fn write_cdf_csv(path: &Path, cdf: &[(f64, f64)]) -> Result<()> {
    write_lines(
        path,
        "threshold,cumulative_fraction",
        cdf.iter().map(|(t, f)| format!("{t},{f}")),
    )
}

pub fn write_margins_csv(path: &Path, rho: &[f64]) -> Result<()> {
    write_lines(
        path,
        "index,margin",
        rho.iter().enumerate().map(|(i, r)| format!("{i},{r}")),
    )
}

pub fn write_stats_csv(path: &Path, stats: &MarginStats, target: Option<f64>) -> Result<()> {
    let e = target.map_or(String::new(), |e| e.to_string());
    write_lines(
        path,
        "mean,variance,E",
        std::iter::once(format!("{},{},{e}", stats.mean, stats.variance)),
    )
}
