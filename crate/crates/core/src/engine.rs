//! Totally corrective training by column generation.
//!
//! Each iteration asks the stump oracle for the column with the largest edge
//! under the current dual weights `u`, stops when that edge no longer beats
//! `r + epsilon`, and otherwise re-solves the restricted master over all
//! columns so far. Every past weight is re-optimised at every step.

use std::fmt;
use std::str::FromStr;

use crate::data::Dataset;
use crate::ensemble::{error_from_values, Ensemble};
use crate::error::{Error, Result};
use crate::master::MasterSolver;
use crate::stump::{Stump, StumpOracle};

pub const DEFAULT_EPSILON: f64 = 1e-5;
pub const DEFAULT_MAX_ITERATIONS: usize = 1000;
/// Weights at or below this are dropped when a model is written out.
pub const PRUNE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    /// Desired margin `E`, strictly inside (0, 1).
    pub target: f64,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub trace: bool,
}

impl TrainConfig {
    pub fn new(target: f64) -> Self {
        Self {
            target,
            epsilon: DEFAULT_EPSILON,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            trace: false,
        }
    }

    pub fn with_target(self, target: f64) -> Self {
        Self { target, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.target > 0.0 && self.target < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "desired margin E = {} must lie in (0, 1)",
                self.target
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon = {} must be positive",
                self.epsilon
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max iterations must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The best stump's edge fell below `r + epsilon`.
    EdgeBelowThreshold,
    /// The oracle returned a stump already in the ensemble.
    DuplicateColumn,
    /// `max_iterations` columns were generated.
    IterationCap,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::EdgeBelowThreshold => "edge_below_r_plus_eps",
            Termination::DuplicateColumn => "duplicate_column",
            Termination::IterationCap => "n_max_reached",
        }
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Termination {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edge_below_r_plus_eps" => Ok(Termination::EdgeBelowThreshold),
            "duplicate_column" => Ok(Termination::DuplicateColumn),
            "n_max_reached" => Ok(Termination::IterationCap),
            _ => Err(Error::InvalidParameter(format!("unknown termination reason {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub stump: Stump,
    /// Edge of the new column under the previous dual weights.
    pub edge: f64,
    /// `r` after the master solve.
    pub r: f64,
    pub primal_objective: f64,
    pub gap: f64,
    pub active: usize,
    pub train_error: f64,
}

#[derive(Debug, Clone)]
pub struct TrainResult {
    /// Normalized; columns are in generation order and may carry zero weight.
    pub ensemble: Ensemble,
    pub iterations: usize,
    pub termination: Termination,
    pub final_edge: f64,
    pub final_r: f64,
    /// Dual weights at exit.
    pub final_u: Vec<f64>,
    /// Restricted primal objective after every master solve.
    pub objectives: Vec<f64>,
    pub trace: Option<Vec<IterationRecord>>,
}

impl TrainResult {
    /// The ensemble as it is written to a model file.
    pub fn model_ensemble(&self) -> Result<Ensemble> {
        self.ensemble.pruned(PRUNE_TOLERANCE)
    }
}

/// Runs column generation on `data`.
pub fn train(data: &Dataset, config: &TrainConfig) -> Result<TrainResult> {
    config.validate()?;
    data.require_both_classes()?;
    let m = data.len();
    let oracle = StumpOracle::new(data);
    let mut solver = MasterSolver::new(m, config.target)?;

    let mut u = vec![1.0 / m as f64; m];
    // Only read once a master solve has set it; the first break test is skipped.
    let mut r = f64::INFINITY;
    let mut w: Vec<f64> = Vec::new();
    let mut stumps: Vec<Stump> = Vec::new();
    let mut objectives = Vec::new();
    let mut trace = config.trace.then(Vec::new);
    let mut termination = Termination::IterationCap;
    let mut final_edge = f64::NAN;

    for t in 1..=config.max_iterations {
        let (stump, edge) = oracle.best(&u)?;
        final_edge = edge;
        if t > 1 && edge < r + config.epsilon {
            termination = Termination::EdgeBelowThreshold;
            break;
        }
        if stumps.iter().any(|s| s.same_rule(&stump)) {
            termination = Termination::DuplicateColumn;
            break;
        }
        solver.push_column(stump.margin_column(data))?;
        let sol = solver.solve().map_err(|e| Error::Training {
            iteration: t,
            source: Box::new(e),
        })?;
        stumps.push(stump);
        objectives.push(sol.primal_objective);
        if let Some(trace) = trace.as_mut() {
            let values: Vec<f64> = sol
                .rho
                .iter()
                .zip(data.labels())
                .map(|(rho, &y)| rho * f64::from(y))
                .collect();
            trace.push(IterationRecord {
                iteration: t,
                stump,
                edge,
                r: sol.r,
                primal_objective: sol.primal_objective,
                gap: sol.gap(),
                active: sol.active,
                train_error: error_from_values(&values, data.labels()),
            });
        }
        u = sol.u;
        r = sol.r;
        w = sol.w;
    }

    let iterations = stumps.len();
    let ensemble = Ensemble::new(stumps, w)?;
    Ok(TrainResult {
        ensemble,
        iterations,
        termination,
        final_edge,
        final_r: r,
        final_u: u,
        objectives,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stump::weighted_edge;

    fn pair() -> Dataset {
        Dataset::from_rows(&[vec![0.0], vec![1.0]], vec![-1, 1]).unwrap()
    }

    #[test]
    fn separable_pair() {
        let res = train(&pair(), &TrainConfig::new(0.3)).unwrap();
        assert_eq!(res.ensemble.error_rate(&pair()).unwrap(), 0.0);
        let rho = crate::margins::normalized_margins(&res.ensemble, &pair()).unwrap();
        // the constant stumps let the hull reach (E, E) exactly
        assert!(rho.iter().all(|&r| (r - 0.3).abs() < 1e-9), "{rho:?}");
    }

    #[test]
    fn config_validation() {
        let d = pair();
        assert!(train(&d, &TrainConfig::new(0.0)).is_err());
        assert!(train(&d, &TrainConfig::new(1.0)).is_err());
        let mut c = TrainConfig::new(0.5);
        c.epsilon = 0.0;
        assert!(train(&d, &c).is_err());
        c.epsilon = 1e-5;
        c.max_iterations = 0;
        assert!(train(&d, &c).is_err());
    }

    #[test]
    fn first_iteration_is_never_a_break() {
        // Balanced classes on a constant feature: every stump has zero edge
        // under uniform u, which would trip the break test if it ran at t = 1.
        let d = Dataset::from_rows(
            &[vec![1.0], vec![1.0], vec![1.0], vec![1.0]],
            vec![1, -1, 1, -1],
        )
        .unwrap();
        let res = train(&d, &TrainConfig::new(0.5)).unwrap();
        assert!(res.iterations >= 1);
        assert_eq!(res.objectives.len(), res.iterations);
    }

    #[test]
    fn iteration_cap_is_respected() {
        let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64, ((i * 7) % 5) as f64]).collect();
        let labels = (0..12).map(|i| if (i * 3) % 4 < 2 { 1 } else { -1 }).collect();
        let d = Dataset::from_rows(&rows, labels).unwrap();
        let mut c = TrainConfig::new(0.1);
        c.max_iterations = 2;
        let res = train(&d, &c).unwrap();
        assert!(res.iterations <= 2);
    }

    #[test]
    fn dual_feasible_at_exit() {
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.91).cos()])
            .collect();
        let labels = (0..20).map(|i| if (i * 5) % 7 < 3 { 1 } else { -1 }).collect();
        let d = Dataset::from_rows(&rows, labels).unwrap();
        let res = train(&d, &TrainConfig::new(0.2)).unwrap();
        for s in res.ensemble.stumps() {
            let e = weighted_edge(s, &d, &res.final_u).unwrap();
            assert!(e <= res.final_r + 1e-8, "{e} > {}", res.final_r);
        }
        if res.termination == Termination::EdgeBelowThreshold {
            assert!(res.final_edge < res.final_r + 1e-5);
        }
    }

    #[test]
    fn termination_names_round_trip() {
        for t in [
            Termination::EdgeBelowThreshold,
            Termination::DuplicateColumn,
            Termination::IterationCap,
        ] {
            assert_eq!(t.as_str().parse::<Termination>().unwrap(), t);
        }
    }
}
