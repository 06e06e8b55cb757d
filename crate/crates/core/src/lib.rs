//! Margin-distribution controlled boosting.
//!
//! MCBoost pulls every normalized margin `y_i F(x_i) / ||w||_1` of the training
//! set towards a user-chosen desired margin `E`, by minimising
//! `sum_i (rho_i - E)^2` over convex combinations of decision stumps. Training
//! is totally corrective: column generation alternates an exact stump oracle
//! with a re-solve of the restricted master over every stump chosen so far.
//!
//! The crate also provides discrete AdaBoost and L2Boost over the same stump
//! space, margin statistics and CDF export, hold-out selection of `E` and of
//! round counts, and a Wilcoxon signed-rank comparison.
//!
//! ```
//! use mcboost::{train, Dataset, TrainConfig};
//!
//! let data = Dataset::from_rows(
//!     &[vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
//!     vec![-1, -1, 1, 1],
//! )
//! .unwrap();
//! let result = train(&data, &TrainConfig::new(0.3)).unwrap();
//! assert_eq!(result.ensemble.error_rate(&data).unwrap(), 0.0);
//! ```

pub mod baselines;
pub mod cli;
pub mod data;
pub mod engine;
pub mod ensemble;
pub mod error;
pub mod margins;
pub mod master;
pub mod model;
pub mod select;
pub mod stump;
pub mod toy;

pub use baselines::{adaboost_train, l2boost_train, BoostingRun, Learner, StopReason};
pub use data::{load_csv, load_libsvm, split, Dataset, LabelColumn, SplitSpec};
pub use engine::{train, Termination, TrainConfig, TrainResult};
pub use ensemble::Ensemble;
pub use error::{Error, Result};
pub use margins::{margin_stats, normalized_margins, MarginReport, MarginStats};
pub use master::{solve_restricted, MasterSolution, MasterSolver, RestrictedMaster};
pub use model::ModelFile;
pub use select::{select_e, select_rounds, wilcoxon_z, CvResult, EGrid};
pub use stump::{best_stump, weighted_edge, Polarity, Stump, StumpOracle};
