//! Stagewise reference boosters over the same stump space: discrete AdaBoost
//! and two-class L2Boost.
//!
//! Both record one entry per round, so any prefix of a run is itself the run
//! that would have been produced with fewer rounds.

use std::fmt;
use std::str::FromStr;

use crate::data::Dataset;
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::stump::{Stump, StumpOracle};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Learner {
    McBoost,
    AdaBoost,
    L2Boost,
}

impl Learner {
    pub fn as_str(self) -> &'static str {
        match self {
            Learner::McBoost => "mcboost",
            Learner::AdaBoost => "adaboost",
            Learner::L2Boost => "l2boost",
        }
    }

    pub fn is_stagewise(self) -> bool {
        !matches!(self, Learner::McBoost)
    }
}

impl fmt::Display for Learner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Learner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mcboost" => Ok(Learner::McBoost),
            "adaboost" => Ok(Learner::AdaBoost),
            "l2boost" => Ok(Learner::L2Boost),
            _ => Err(Error::InvalidParameter(format!("unknown learner {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Completed,
    /// AdaBoost found a stump with zero weighted error.
    PerfectStump,
    /// AdaBoost's best weighted error reached 1/2.
    NoEdge,
    /// Every L2Boost step would be clipped to zero.
    Stationary,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Completed => "completed",
            StopReason::PerfectStump => "perfect_stump",
            StopReason::NoEdge => "no_edge",
            StopReason::Stationary => "stationary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RoundDiagnostic {
    AdaBoost {
        weighted_error: f64,
        /// Total mass of the distribution the stump was chosen under.
        distribution_mass: f64,
    },
    L2Boost {
        /// `sum_i (1 - y_i F(x_i))^2` after the step.
        loss: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Round {
    pub stump: Stump,
    pub step: f64,
    pub diagnostic: RoundDiagnostic,
}

#[derive(Debug, Clone)]
pub struct BoostingRun {
    pub learner: Learner,
    pub rounds: Vec<Round>,
    pub stop: StopReason,
}

impl BoostingRun {
    pub fn n_rounds(&self) -> usize {
        self.rounds.len()
    }

    /// Unnormalized ensemble of the first `t` rounds; repeated stumps share
    /// one entry carrying the summed step.
    pub fn prefix_ensemble(&self, t: usize) -> Result<Ensemble> {
        let mut stumps: Vec<Stump> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for round in &self.rounds[..t.min(self.rounds.len())] {
            match stumps.iter().position(|s| s.same_rule(&round.stump)) {
                Some(j) => weights[j] += round.step,
                None => {
                    stumps.push(round.stump);
                    weights.push(round.step);
                }
            }
        }
        Ensemble::new(stumps, weights)
    }

    pub fn ensemble(&self) -> Result<Ensemble> {
        self.prefix_ensemble(self.rounds.len())
    }
}

fn check_rounds(n_rounds: usize) -> Result<()> {
    if n_rounds == 0 {
        return Err(Error::InvalidParameter("number of rounds must be at least 1".into()));
    }
    Ok(())
}

/// Discrete AdaBoost with `alpha_t = 1/2 ln((1 - eps_t) / eps_t)`.
///
/// A zero-error stump in round 1 ends training with that stump at weight 1;
/// in a later round (possible only once the distribution has underflowed to
/// zero on some examples) training stops without adding it.
pub fn adaboost_train(data: &Dataset, n_rounds: usize) -> Result<BoostingRun> {
    check_rounds(n_rounds)?;
    data.require_both_classes()?;
    let m = data.len();
    let oracle = StumpOracle::new(data);
    let mut dist = vec![1.0 / m as f64; m];
    let mut rounds = Vec::with_capacity(n_rounds);
    let mut stop = StopReason::Completed;

    for t in 0..n_rounds {
        let (stump, _) = oracle.best(&dist)?;
        let outputs: Vec<i8> = data.rows().map(|x| stump.output(x)).collect();
        let mass: f64 = dist.iter().sum();
        let err: f64 = dist
            .iter()
            .zip(&outputs)
            .zip(data.labels())
            .filter(|((_, h), y)| *h != *y)
            .map(|((d, _), _)| d)
            .sum();
        let diagnostic = RoundDiagnostic::AdaBoost {
            weighted_error: err,
            distribution_mass: mass,
        };
        if err <= 0.0 {
            stop = StopReason::PerfectStump;
            if t == 0 {
                rounds.push(Round {
                    stump,
                    step: 1.0,
                    diagnostic,
                });
            }
            break;
        }
        if err >= 0.5 {
            stop = StopReason::NoEdge;
            break;
        }
        let alpha = 0.5 * ((1.0 - err) / err).ln();
        rounds.push(Round {
            stump,
            step: alpha,
            diagnostic,
        });
        for ((d, &h), &y) in dist.iter_mut().zip(&outputs).zip(data.labels()) {
            *d *= (-alpha * f64::from(h * y)).exp();
        }
        let total: f64 = dist.iter().sum();
        dist.iter_mut().for_each(|d| *d /= total);
    }
    Ok(BoostingRun {
        learner: Learner::AdaBoost,
        rounds,
        stop,
    })
}

/// Stagewise least squares on `sum_i (1 - y_i F(x_i))^2` with exact line search
/// and non-negative steps.
///
/// For a fixed stump the best step is `sum_i r_i y_i h(x_i) / M` with
/// residual `r_i = 1 - y_i F(x_i)`; the oracle maximises that numerator over
/// both polarities, so a step is clipped only when no stump has positive edge.
pub fn l2boost_train(data: &Dataset, n_rounds: usize) -> Result<BoostingRun> {
    check_rounds(n_rounds)?;
    data.require_both_classes()?;
    let m = data.len() as f64;
    let oracle = StumpOracle::new(data);
    let mut margins = vec![0.0; data.len()];
    let mut rounds = Vec::with_capacity(n_rounds);
    let mut stop = StopReason::Completed;

    for _ in 0..n_rounds {
        let residual: Vec<f64> = margins.iter().map(|rho| 1.0 - rho).collect();
        let (stump, edge) = oracle.best(&residual)?;
        if edge <= 0.0 {
            stop = StopReason::Stationary;
            break;
        }
        let step = edge / m;
        for ((rho, x), &y) in margins.iter_mut().zip(data.rows()).zip(data.labels()) {
            *rho += step * f64::from(y * stump.output(x));
        }
        let loss = margins.iter().map(|rho| (1.0 - rho) * (1.0 - rho)).sum();
        rounds.push(Round {
            stump,
            step,
            diagnostic: RoundDiagnostic::L2Boost { loss },
        });
    }
    Ok(BoostingRun {
        learner: Learner::L2Boost,
        rounds,
        stop,
    })
}

/// Dispatches to the stagewise trainer for `learner`.
pub fn train_stagewise(learner: Learner, data: &Dataset, n_rounds: usize) -> Result<BoostingRun> {
    match learner {
        Learner::AdaBoost => adaboost_train(data, n_rounds),
        Learner::L2Boost => l2boost_train(data, n_rounds),
        Learner::McBoost => Err(Error::InvalidParameter(
            "mcboost is not a stagewise learner".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stump::Polarity;

    fn pair() -> Dataset {
        Dataset::from_rows(&[vec![0.0], vec![1.0]], vec![-1, 1]).unwrap()
    }

    fn noisy(m: usize) -> Dataset {
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|i| vec![(i as f64 * 0.731).sin(), (i as f64 * 1.37).cos()])
            .collect();
        let labels = rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let clean = if r[0] + 0.5 * r[1] > 0.0 { 1 } else { -1 };
                if i % 7 == 0 {
                    -clean
                } else {
                    clean
                }
            })
            .collect();
        Dataset::from_rows(&rows, labels).unwrap()
    }

    #[test]
    fn alpha_closed_form() {
        // 3 examples correct, 1 wrong under uniform weights: eps = 1/4.
        let d = Dataset::from_rows(
            &[vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
            vec![-1, 1, -1, 1],
        )
        .unwrap();
        let run = adaboost_train(&d, 1).unwrap();
        let r = run.rounds[0];
        match r.diagnostic {
            RoundDiagnostic::AdaBoost { weighted_error, .. } => assert_eq!(weighted_error, 0.25),
            _ => unreachable!(),
        }
        assert!((r.step - 0.5 * 3f64.ln()).abs() < 1e-12);
        assert!((r.step - 0.549306).abs() < 1e-6);
    }

    #[test]
    fn adaboost_separable_pair() {
        let run = adaboost_train(&pair(), 1).unwrap();
        assert_eq!(run.stop, StopReason::PerfectStump);
        let e = run.ensemble().unwrap();
        assert_eq!(e.weights(), &[1.0]);
        assert_eq!(e.error_rate(&pair()).unwrap(), 0.0);
    }

    #[test]
    fn adaboost_distribution_and_errors() {
        let d = noisy(60);
        let run = adaboost_train(&d, 50).unwrap();
        assert_eq!(run.n_rounds(), 50);
        for r in &run.rounds {
            let RoundDiagnostic::AdaBoost {
                weighted_error,
                distribution_mass,
            } = r.diagnostic
            else {
                unreachable!()
            };
            assert!((distribution_mass - 1.0).abs() <= 1e-12);
            assert!(weighted_error < 0.5);
        }
    }

    #[test]
    fn l2boost_first_step() {
        let run = l2boost_train(&pair(), 1).unwrap();
        let r = run.rounds[0];
        assert_eq!(r.stump, Stump::new(0, 0.5, Polarity::Positive));
        assert_eq!(r.step, 1.0);
        assert_eq!(r.diagnostic, RoundDiagnostic::L2Boost { loss: 0.0 });

        let d = noisy(40);
        let run = l2boost_train(&d, 1).unwrap();
        let (best, edge) = crate::stump::best_stump(&d, &vec![1.0; 40]).unwrap();
        assert_eq!(run.rounds[0].stump, best);
        assert_eq!(run.rounds[0].step, edge / 40.0);
    }

    #[test]
    fn l2boost_loss_non_increasing_and_weights_non_negative() {
        let d = noisy(50);
        let run = l2boost_train(&d, 80).unwrap();
        let mut last = d.len() as f64;
        for r in &run.rounds {
            let RoundDiagnostic::L2Boost { loss } = r.diagnostic else {
                unreachable!()
            };
            assert!(loss <= last + 1e-12);
            assert!(r.step >= 0.0);
            last = loss;
        }
        assert!(run.ensemble().unwrap().weights().iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn runs_are_reproducible() {
        let d = noisy(45);
        let a = adaboost_train(&d, 30).unwrap();
        let b = adaboost_train(&d, 30).unwrap();
        assert_eq!(a.rounds, b.rounds);
        let a = l2boost_train(&d, 30).unwrap();
        let b = l2boost_train(&d, 30).unwrap();
        assert_eq!(a.rounds, b.rounds);
    }

    #[test]
    fn learner_names() {
        for l in [Learner::McBoost, Learner::AdaBoost, Learner::L2Boost] {
            assert_eq!(l.as_str().parse::<Learner>().unwrap(), l);
        }
        assert!("lpboost".parse::<Learner>().is_err());
        assert!(adaboost_train(&pair(), 0).is_err());
    }
}
