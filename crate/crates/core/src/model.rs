//! Plain-text model files.
//!
//! ```text
//! format_version=1
//! learner=mcboost
//! E=0.3
//! iterations=14
//! termination=edge_below_r_plus_eps
//! n_features=2
//! stumps=3
//! feature,threshold,polarity,weight
//! 0,0.4125,1,0.5
//! ...
//! ```
//!
//! Floats are written in Rust's shortest round-trip form, so a reloaded model
//! reproduces decision values bit for bit. `E` is present only for mcboost.

use std::fs;
use std::path::Path;

use crate::baselines::Learner;
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::stump::{Polarity, Stump};

pub const FORMAT_VERSION: u32 = 1;
const TABLE_HEADER: &str = "feature,threshold,polarity,weight";

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub learner: Learner,
    pub target: Option<f64>,
    pub iterations: usize,
    pub termination: String,
    pub n_features: usize,
    pub ensemble: Ensemble,
}

impl ModelFile {
    pub fn to_text(&self) -> String {
        let mut out = format!("format_version={FORMAT_VERSION}\nlearner={}\n", self.learner);
        if let Some(e) = self.target {
            out.push_str(&format!("E={e}\n"));
        }
        out.push_str(&format!(
            "iterations={}\ntermination={}\nn_features={}\nstumps={}\n{TABLE_HEADER}\n",
            self.iterations,
            self.termination,
            self.n_features,
            self.ensemble.len()
        ));
        for (s, w) in self.ensemble.stumps().iter().zip(self.ensemble.weights()) {
            out.push_str(&format!(
                "{},{},{},{}\n",
                s.feature,
                s.threshold,
                s.polarity.sign(),
                w
            ));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Model { line, message };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));

        let mut learner = None;
        let mut target = None;
        let mut iterations = None;
        let mut termination = None;
        let mut n_features = None;
        let mut n_stumps = None;
        let mut version = None;
        for (no, line) in lines.by_ref() {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line == TABLE_HEADER {
                break;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(no, format!("expected key=value, got {line:?}")))?;
            let bad = |what: &str| err(no, format!("bad {what} {value:?}"));
            match key {
                "format_version" => version = Some(value.parse::<u32>().map_err(|_| bad("version"))?),
                "learner" => learner = Some(value.parse::<Learner>().map_err(|_| bad("learner"))?),
                "E" => target = Some(value.parse::<f64>().map_err(|_| bad("E"))?),
                "iterations" => iterations = Some(value.parse().map_err(|_| bad("iterations"))?),
                "termination" => termination = Some(value.to_string()),
                "n_features" => n_features = Some(value.parse().map_err(|_| bad("n_features"))?),
                "stumps" => n_stumps = Some(value.parse::<usize>().map_err(|_| bad("stumps"))?),
                _ => return Err(err(no, format!("unknown key {key:?}"))),
            }
        }
        if version != Some(FORMAT_VERSION) {
            return Err(err(1, format!("unsupported format version {version:?}")));
        }
        let missing = |k: &str| err(0, format!("missing {k}"));
        let n_stumps = n_stumps.ok_or_else(|| missing("stumps"))?;
        let n_features: usize = n_features.ok_or_else(|| missing("n_features"))?;

        let mut stumps = Vec::with_capacity(n_stumps);
        let mut weights = Vec::with_capacity(n_stumps);
        for (no, line) in lines {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(err(no, format!("expected 4 fields, got {}", fields.len())));
            }
            let feature: usize = fields[0].parse().map_err(|_| err(no, "bad feature".into()))?;
            if feature >= n_features {
                return Err(err(no, format!("feature {feature} >= n_features {n_features}")));
            }
            let threshold: f64 = fields[1]
                .parse()
                .ok()
                .filter(|t: &f64| t.is_finite())
                .ok_or_else(|| err(no, "bad threshold".into()))?;
            let polarity = fields[2]
                .parse::<i64>()
                .ok()
                .and_then(Polarity::from_sign)
                .ok_or_else(|| err(no, "polarity must be 1 or -1".into()))?;
            let weight: f64 = fields[3].parse().map_err(|_| err(no, "bad weight".into()))?;
            stumps.push(Stump::new(feature, threshold, polarity));
            weights.push(weight);
        }
        if stumps.len() != n_stumps {
            return Err(err(0, format!("header says {n_stumps} stumps, found {}", stumps.len())));
        }
        Ok(ModelFile {
            learner: learner.ok_or_else(|| missing("learner"))?,
            target,
            iterations: iterations.ok_or_else(|| missing("iterations"))?,
            termination: termination.ok_or_else(|| missing("termination"))?,
            n_features,
            ensemble: Ensemble::new(stumps, weights)?,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ModelFile {
        let ensemble = Ensemble::new(
            vec![
                Stump::new(0, 0.1 + 0.2, Polarity::Positive),
                Stump::new(1, -1.0 / 3.0, Polarity::Negative),
            ],
            vec![1.0 / 3.0, 2.0 / 3.0],
        )
        .unwrap();
        ModelFile {
            learner: Learner::McBoost,
            target: Some(0.3),
            iterations: 7,
            termination: "edge_below_r_plus_eps".into(),
            n_features: 2,
            ensemble,
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let m = sample();
        let back = ModelFile::parse(&m.to_text()).unwrap();
        assert_eq!(back, m);
        let x = [0.3, -0.2];
        assert_eq!(
            back.ensemble.decision_value(&x).unwrap().to_bits(),
            m.ensemble.decision_value(&x).unwrap().to_bits()
        );
    }

    #[test]
    fn baseline_header_has_no_target() {
        let mut m = sample();
        m.learner = Learner::AdaBoost;
        m.target = None;
        let text = m.to_text();
        assert!(!text.contains("E="));
        assert_eq!(ModelFile::parse(&text).unwrap().learner, Learner::AdaBoost);
    }

    #[test]
    fn rejects_corruption() {
        let text = sample().to_text();
        assert!(ModelFile::parse(&text.replace("stumps=2", "stumps=3")).is_err());
        assert!(ModelFile::parse(&text.replace("format_version=1", "format_version=9")).is_err());
        assert!(ModelFile::parse(&text.replace(",-1,", ",0,")).is_err());
        assert!(ModelFile::parse(&text.replace("n_features=2", "n_features=1")).is_err());
    }
}
