//! Decision stumps and the exact edge-maximising oracle.
//!
//! The stump space is negation closed: every threshold is available with both
//! polarities. The oracle accepts signed example weights, which appear once the
//! restricted master has pushed some margins above the target.

use std::cmp::Ordering;
use std::fmt;

use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn sign(self) -> i8 {
        match self {
            Polarity::Positive => 1,
            Polarity::Negative => -1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }

    pub fn from_sign(s: i64) -> Option<Self> {
        match s {
            1 => Some(Polarity::Positive),
            -1 => Some(Polarity::Negative),
            _ => None,
        }
    }
}

/// Outputs `polarity` when `x[feature] >= threshold`, otherwise `-polarity`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub polarity: Polarity,
}

impl Stump {
    pub fn new(feature: usize, threshold: f64, polarity: Polarity) -> Self {
        Self {
            feature,
            threshold,
            polarity,
        }
    }

    /// Unchecked evaluation; panics if `x` is too short.
    #[inline]
    pub fn output(&self, x: &[f64]) -> i8 {
        if x[self.feature] >= self.threshold {
            self.polarity.sign()
        } else {
            -self.polarity.sign()
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<i8> {
        if self.feature >= x.len() {
            return Err(Error::DimensionMismatch {
                expected: self.feature + 1,
                actual: x.len(),
            });
        }
        Ok(self.output(x))
    }

    pub fn negated(&self) -> Self {
        Self {
            polarity: self.polarity.flip(),
            ..*self
        }
    }

    /// Same feature, polarity, and bit-identical threshold.
    pub fn same_rule(&self, other: &Stump) -> bool {
        self.feature == other.feature
            && self.polarity == other.polarity
            && self.threshold.to_bits() == other.threshold.to_bits()
    }

    /// Column of the margin matrix: `y_i * h(x_i)` for every example.
    pub fn margin_column(&self, data: &Dataset) -> Vec<f64> {
        data.rows()
            .zip(data.labels())
            .map(|(x, &y)| f64::from(y * self.output(x)))
            .collect()
    }
}

impl fmt::Display for Stump {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "x[{}] >= {} ? {:+} : {:+}",
            self.feature,
            self.threshold,
            self.polarity.sign(),
            -self.polarity.sign()
        )
    }
}

/// A threshold strictly below `min`.
fn below(min: f64) -> f64 {
    min - 1.0 - min.abs()
}

/// Candidate thresholds for one feature: one value below the minimum, then the
/// midpoint of every pair of consecutive distinct values, ascending.
///
/// Each midpoint `t` satisfies `lo < t <= hi`, so together they realise every
/// labelling an axis threshold can produce on these values.
pub fn candidate_thresholds(values: &[f64]) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let Some(&min) = sorted.first() else {
        return Vec::new();
    };
    let mut out = Vec::with_capacity(sorted.len());
    out.push(below(min));
    for pair in sorted.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let mid = lo + (hi - lo) / 2.0;
        out.push(if mid > lo { mid } else { hi });
    }
    out
}

fn check_weights(data: &Dataset, u: &[f64]) -> Result<()> {
    if u.len() != data.len() {
        return Err(Error::DimensionMismatch {
            expected: data.len(),
            actual: u.len(),
        });
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("edge weights must be finite".into()));
    }
    Ok(())
}

/// `sum_i u_i * y_i * h(x_i)`, accumulated in example order.
pub fn weighted_edge(stump: &Stump, data: &Dataset, u: &[f64]) -> Result<f64> {
    check_weights(data, u)?;
    if stump.feature >= data.n_features() {
        return Err(Error::DimensionMismatch {
            expected: stump.feature + 1,
            actual: data.n_features(),
        });
    }
    Ok(edge_unchecked(stump, data, u))
}

fn edge_unchecked(stump: &Stump, data: &Dataset, u: &[f64]) -> f64 {
    let mut sum = 0.0;
    for (i, x) in data.rows().enumerate() {
        sum += u[i] * f64::from(data.label(i) * stump.output(x));
    }
    sum
}

struct FeatureIndex {
    /// Example indices sorted by feature value.
    order: Vec<usize>,
    thresholds: Vec<f64>,
    /// `cuts[k]`: number of sorted examples strictly below `thresholds[k]`.
    cuts: Vec<usize>,
}

/// Strong oracle over the full stump space of a fixed dataset.
///
/// Sorting is done once at construction; each query is a prefix-sum scan per
/// feature. Candidates that come within rounding distance of the scan maximum
/// are re-scored with [`weighted_edge`]'s exact summation so the returned edge
/// and the tie-break do not depend on the scan's accumulation order.
pub struct StumpOracle<'a> {
    data: &'a Dataset,
    features: Vec<FeatureIndex>,
}

impl<'a> StumpOracle<'a> {
    pub fn new(data: &'a Dataset) -> Self {
        let features = (0..data.n_features())
            .map(|f| {
                let values = data.column(f);
                let mut order: Vec<usize> = (0..values.len()).collect();
                order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
                let thresholds = candidate_thresholds(&values);
                let cuts = thresholds
                    .iter()
                    .map(|&t| order.partition_point(|&i| values[i] < t))
                    .collect();
                FeatureIndex {
                    order,
                    thresholds,
                    cuts,
                }
            })
            .collect();
        Self { data, features }
    }

    pub fn data(&self) -> &Dataset {
        self.data
    }

    /// Number of distinct (feature, threshold, polarity) triples.
    pub fn space_size(&self) -> usize {
        self.features.iter().map(|f| 2 * f.thresholds.len()).sum()
    }

    /// Stump maximising the edge under `u`. Ties go to the lowest feature, then
    /// the lowest threshold, then positive polarity.
    pub fn best(&self, u: &[f64]) -> Result<(Stump, f64)> {
        check_weights(self.data, u)?;
        if self.features.is_empty() {
            return Err(Error::InvalidData("dataset has no features".into()));
        }
        let signed: Vec<f64> = u
            .iter()
            .zip(self.data.labels())
            .map(|(&w, &y)| w * f64::from(y))
            .collect();
        let total: f64 = signed.iter().sum();
        let abs_sum: f64 = u.iter().map(|w| w.abs()).sum();
        let slack = 8.0 * (u.len() as f64 + 2.0) * f64::EPSILON * abs_sum;

        // Scan: approximate edge of every candidate.
        let mut scores: Vec<Vec<f64>> = Vec::with_capacity(self.features.len());
        let mut best_approx = f64::NEG_INFINITY;
        for fi in &self.features {
            let mut prefix = 0.0;
            let mut pos = 0;
            let mut s = Vec::with_capacity(fi.thresholds.len());
            for &cut in &fi.cuts {
                while pos < cut {
                    prefix += signed[fi.order[pos]];
                    pos += 1;
                }
                let plus = total - 2.0 * prefix;
                best_approx = best_approx.max(plus.abs());
                s.push(plus);
            }
            scores.push(s);
        }

        // Exact re-scoring of the near-maximal candidates, in tie-break order.
        let mut best: Option<(Stump, f64)> = None;
        for (f, (fi, s)) in self.features.iter().zip(&scores).enumerate() {
            for (k, &plus) in s.iter().enumerate() {
                for (pol, approx) in [(Polarity::Positive, plus), (Polarity::Negative, -plus)] {
                    if approx < best_approx - slack {
                        continue;
                    }
                    let stump = Stump::new(f, fi.thresholds[k], pol);
                    let edge = edge_unchecked(&stump, self.data, u);
                    if best.as_ref().is_none_or(|(_, e)| edge > *e) {
                        best = Some((stump, edge));
                    }
                }
            }
        }
        Ok(best.expect("at least one candidate attains the scan maximum"))
    }

    /// Every stump in the space, in tie-break order.
    pub fn enumerate(&self) -> impl Iterator<Item = Stump> + '_ {
        self.features.iter().enumerate().flat_map(|(f, fi)| {
            fi.thresholds.iter().flat_map(move |&t| {
                [
                    Stump::new(f, t, Polarity::Positive),
                    Stump::new(f, t, Polarity::Negative),
                ]
            })
        })
    }
}

/// One-shot form of [`StumpOracle::best`].
pub fn best_stump(data: &Dataset, u: &[f64]) -> Result<(Stump, f64)> {
    StumpOracle::new(data).best(u)
}

/// Total order used for tie-breaking: feature, threshold, then `+` before `-`.
pub fn tie_break_order(a: &Stump, b: &Stump) -> Ordering {
    a.feature
        .cmp(&b.feature)
        .then(a.threshold.total_cmp(&b.threshold))
        .then(a.polarity.cmp(&b.polarity))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> Dataset {
        Dataset::from_rows(&[vec![0.0], vec![1.0]], vec![-1, 1]).unwrap()
    }

    #[test]
    fn predict_rule() {
        let s = Stump::new(0, 0.5, Polarity::Positive);
        assert_eq!(s.predict(&[0.7]).unwrap(), 1);
        assert_eq!(s.predict(&[0.3]).unwrap(), -1);
        assert_eq!(s.predict(&[0.5]).unwrap(), 1);
        assert_eq!(s.negated().predict(&[0.7]).unwrap(), -1);
        assert!(Stump::new(2, 0.0, Polarity::Positive).predict(&[1.0]).is_err());
    }

    #[test]
    fn thresholds() {
        let t = candidate_thresholds(&[1.0, 2.0, 4.0]);
        assert_eq!(t.len(), 3);
        assert!(t[0] < 1.0);
        assert_eq!(&t[1..], &[1.5, 3.0]);

        let c = candidate_thresholds(&[3.0, 3.0, 3.0]);
        assert_eq!(c.len(), 1);
        assert!(c[0] < 3.0);

        assert_eq!(candidate_thresholds(&[2.0, 1.0]), candidate_thresholds(&[1.0, 2.0]));
    }

    #[test]
    fn thresholds_between_adjacent_floats() {
        let lo = 1.0f64;
        let hi = f64::from_bits(lo.to_bits() + 1);
        let t = candidate_thresholds(&[lo, hi]);
        assert!(t[1] > lo && t[1] <= hi);
    }

    #[test]
    fn edge_arithmetic() {
        let d = pair();
        let s = Stump::new(0, 0.5, Polarity::Positive);
        assert_eq!(weighted_edge(&s, &d, &[0.5, 0.5]).unwrap(), 1.0);

        let d2 = Dataset::from_rows(&[vec![1.0], vec![2.0]], vec![1, 1]).unwrap();
        let all_pos = Stump::new(0, 0.0, Polarity::Positive);
        let e = weighted_edge(&all_pos, &d2, &[0.3, -0.2]).unwrap();
        assert!((e - 0.1).abs() < 1e-15);
        assert_eq!(weighted_edge(&all_pos.negated(), &d2, &[0.3, -0.2]).unwrap(), -e);
        assert!(weighted_edge(&s, &d, &[1.0]).is_err());
    }

    #[test]
    fn separable_pair_oracle() {
        let (s, e) = best_stump(&pair(), &[0.5, 0.5]).unwrap();
        assert_eq!(s, Stump::new(0, 0.5, Polarity::Positive));
        assert_eq!(e, 1.0);
    }

    #[test]
    fn zero_weights_pick_first_candidate() {
        let d = pair();
        let (s, e) = best_stump(&d, &[0.0, 0.0]).unwrap();
        assert_eq!(e, 0.0);
        assert_eq!(s.feature, 0);
        assert_eq!(s.polarity, Polarity::Positive);
        assert!(s.threshold < 0.0);
    }

    #[test]
    fn space_size_counts_both_polarities() {
        let d = Dataset::from_rows(&[vec![0.0, 5.0], vec![1.0, 5.0], vec![2.0, 5.0]], vec![1, -1, 1])
            .unwrap();
        let oracle = StumpOracle::new(&d);
        assert_eq!(oracle.space_size(), 2 * 3 + 2);
        assert_eq!(oracle.enumerate().count(), oracle.space_size());
    }
}
