use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::stump::Stump;

/// Weighted vote `F(x) = sum_j w_j h_j(x)` with `w >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    stumps: Vec<Stump>,
    weights: Vec<f64>,
}

impl Ensemble {
    pub fn new(stumps: Vec<Stump>, weights: Vec<f64>) -> Result<Self> {
        if stumps.is_empty() {
            return Err(Error::InvalidParameter("ensemble needs at least one stump".into()));
        }
        if stumps.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: stumps.len(),
                actual: weights.len(),
            });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidParameter(
                "ensemble weights must be finite and non-negative".into(),
            ));
        }
        Ok(Self { stumps, weights })
    }

    pub fn stumps(&self) -> &[Stump] {
        &self.stumps
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.stumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stumps.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.total_weight() - 1.0).abs() <= 1e-10
    }

    /// Same vote with weights rescaled to sum to one.
    pub fn normalized(&self) -> Result<Ensemble> {
        let total = self.total_weight();
        if total <= 0.0 {
            return Err(Error::InvalidParameter("ensemble weights are all zero".into()));
        }
        Ok(Ensemble {
            stumps: self.stumps.clone(),
            weights: self.weights.iter().map(|w| w / total).collect(),
        })
    }

    /// Drops members with weight at or below `tol`; a normalized input stays normalized.
    pub fn pruned(&self, tol: f64) -> Result<Ensemble> {
        let keep: Vec<usize> = (0..self.len()).filter(|&j| self.weights[j] > tol).collect();
        let pruned = Ensemble::new(
            keep.iter().map(|&j| self.stumps[j]).collect(),
            keep.iter().map(|&j| self.weights[j]).collect(),
        )?;
        if self.is_normalized() {
            pruned.normalized()
        } else {
            Ok(pruned)
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        let needed = self.stumps.iter().map(|s| s.feature + 1).max().unwrap_or(0);
        if x.len() < needed {
            return Err(Error::DimensionMismatch {
                expected: needed,
                actual: x.len(),
            });
        }
        Ok(())
    }

    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.decision_value_unchecked(x))
    }

    pub(crate) fn decision_value_unchecked(&self, x: &[f64]) -> f64 {
        self.stumps
            .iter()
            .zip(&self.weights)
            .map(|(s, w)| w * f64::from(s.output(x)))
            .sum()
    }

    /// Sign of the decision value; an exact zero predicts `+1`.
    pub fn predict(&self, x: &[f64]) -> Result<i8> {
        Ok(sign(self.decision_value(x)?))
    }

    pub fn decision_values(&self, data: &Dataset) -> Result<Vec<f64>> {
        if data.len() > 0 {
            self.check_dim(data.row(0))?;
        }
        Ok(data.rows().map(|x| self.decision_value_unchecked(x)).collect())
    }

    /// Fraction of examples whose prediction differs from the label.
    pub fn error_rate(&self, data: &Dataset) -> Result<f64> {
        let values = self.decision_values(data)?;
        Ok(error_from_values(&values, data.labels()))
    }
}

pub(crate) fn sign(v: f64) -> i8 {
    if v >= 0.0 {
        1
    } else {
        -1
    }
}

pub(crate) fn error_from_values(values: &[f64], labels: &[i8]) -> f64 {
    let wrong = values
        .iter()
        .zip(labels)
        .filter(|(v, y)| sign(**v) != **y)
        .count();
    wrong as f64 / labels.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stump::Polarity;

    fn up() -> Stump {
        Stump::new(0, 0.0, Polarity::Positive)
    }

    #[test]
    fn decision_values() {
        let e = Ensemble::new(vec![up(), up().negated()], vec![0.5, 0.5]).unwrap();
        assert_eq!(e.decision_value(&[1.0]).unwrap(), 0.0);
        assert_eq!(e.predict(&[1.0]).unwrap(), 1);

        let all = Ensemble::new(vec![up(), Stump::new(0, -5.0, Polarity::Positive)], vec![0.25, 0.75])
            .unwrap();
        assert_eq!(all.decision_value(&[1.0]).unwrap(), 1.0);

        let scaled = Ensemble::new(all.stumps().to_vec(), vec![0.75, 2.25]).unwrap();
        assert_eq!(scaled.decision_value(&[1.0]).unwrap(), 3.0);
        assert!(!scaled.is_normalized());
        assert!(scaled.normalized().unwrap().is_normalized());
    }

    #[test]
    fn predict_sign_convention() {
        let e = Ensemble::new(vec![up(), up().negated()], vec![0.65, 0.35]).unwrap();
        assert_eq!(e.predict(&[1.0]).unwrap(), 1);
        assert_eq!(e.predict(&[-1.0]).unwrap(), -1);
        assert!(e.predict(&[]).is_err());
    }

    #[test]
    fn error_rates() {
        let d = Dataset::from_rows(
            &[vec![-2.0], vec![-1.0], vec![1.0], vec![2.0]],
            vec![-1, -1, 1, -1],
        )
        .unwrap();
        let e = Ensemble::new(vec![up()], vec![1.0]).unwrap();
        assert_eq!(e.error_rate(&d).unwrap(), 0.25);
        let flipped = Ensemble::new(vec![up().negated()], vec![1.0]).unwrap();
        assert_eq!(flipped.error_rate(&d).unwrap(), 0.75);
        let perfect = Dataset::from_rows(&[vec![-1.0], vec![1.0]], vec![-1, 1]).unwrap();
        assert_eq!(e.error_rate(&perfect).unwrap(), 0.0);
        assert_eq!(flipped.error_rate(&perfect).unwrap(), 1.0);
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(Ensemble::new(vec![up()], vec![-0.1]).is_err());
        assert!(Ensemble::new(vec![], vec![]).is_err());
        assert!(Ensemble::new(vec![up()], vec![0.0]).unwrap().normalized().is_err());
    }

    #[test]
    fn pruning_keeps_normalization() {
        let e = Ensemble::new(vec![up(), up().negated()], vec![1.0 - 1e-13, 1e-13]).unwrap();
        let p = e.pruned(1e-12).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.weights(), &[1.0]);
    }
}
