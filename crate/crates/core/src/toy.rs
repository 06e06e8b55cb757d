//! Seeded two-class synthetic data in the plane.
//!
//! Each class is an equal-weight mixture of isotropic Gaussians. The class
//! centres alternate along a diagonal band, so the classes interleave and no
//! single threshold separates them; `spread` sets the per-component standard
//! deviation and therefore the overlap. Points are drawn class-balanced and
//! then shuffled. An optional fraction of labels is flipped.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Component centres of the positive class.
const POSITIVE_CENTRES: [(f64, f64); 3] = [(-2.0, -1.0), (0.0, 0.5), (2.0, -1.0)];
/// Component centres of the negative class.
const NEGATIVE_CENTRES: [(f64, f64); 3] = [(-1.0, 1.0), (1.0, -1.5), (1.0, 2.0)];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyConfig {
    pub n_points: usize,
    pub spread: f64,
    /// Fraction of labels flipped after sampling, in [0, 0.5).
    pub label_noise: f64,
    pub seed: u64,
}

impl ToyConfig {
    /// 800 points with moderate overlap and no label noise.
    pub fn standard(seed: u64) -> Self {
        Self {
            n_points: 800,
            spread: 0.7,
            label_noise: 0.0,
            seed,
        }
    }

    pub fn noisy(seed: u64) -> Self {
        Self {
            label_noise: 0.1,
            ..Self::standard(seed)
        }
    }
}

pub fn toy_dataset(config: &ToyConfig) -> Result<Dataset> {
    if config.n_points < 2 {
        return Err(Error::InvalidParameter("toy data needs at least 2 points".into()));
    }
    if !(config.spread > 0.0 && config.spread.is_finite()) {
        return Err(Error::InvalidParameter("spread must be positive".into()));
    }
    if !(0.0..0.5).contains(&config.label_noise) {
        return Err(Error::InvalidParameter("label noise must lie in [0, 0.5)".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let noise = Normal::new(0.0, config.spread).expect("positive spread");

    let mut points: Vec<(f64, f64, i8)> = Vec::with_capacity(config.n_points);
    for i in 0..config.n_points {
        let (label, centres) = if i % 2 == 0 {
            (1i8, &POSITIVE_CENTRES)
        } else {
            (-1i8, &NEGATIVE_CENTRES)
        };
        let (cx, cy) = centres[rng.random_range(0..centres.len())];
        points.push((cx + noise.sample(&mut rng), cy + noise.sample(&mut rng), label));
    }
    points.shuffle(&mut rng);

    let n_flip = (config.label_noise * config.n_points as f64).round() as usize;
    let mut idx: Vec<usize> = (0..config.n_points).collect();
    idx.shuffle(&mut rng);
    for &i in &idx[..n_flip] {
        points[i].2 = -points[i].2;
    }

    let features = points.iter().flat_map(|&(x, y, _)| [x, y]).collect();
    let labels = points.iter().map(|p| p.2).collect();
    Dataset::new(features, 2, labels, Some(vec!["x0".into(), "x1".into()]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_balanced() {
        let a = toy_dataset(&ToyConfig::standard(7)).unwrap();
        let b = toy_dataset(&ToyConfig::standard(7)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 800);
        assert_eq!(a.count_positive(), 400);
        assert_ne!(a, toy_dataset(&ToyConfig::standard(8)).unwrap());
    }

    #[test]
    fn label_noise_flips_exact_count() {
        let clean = toy_dataset(&ToyConfig::standard(3)).unwrap();
        let noisy = toy_dataset(&ToyConfig::noisy(3)).unwrap();
        let flipped = clean
            .labels()
            .iter()
            .zip(noisy.labels())
            .filter(|(a, b)| a != b)
            .count();
        assert_eq!(flipped, 80);
    }

    #[test]
    fn rejects_bad_config() {
        let mut c = ToyConfig::standard(0);
        c.spread = 0.0;
        assert!(toy_dataset(&c).is_err());
        c.spread = 1.0;
        c.label_noise = 0.5;
        assert!(toy_dataset(&c).is_err());
    }
}
