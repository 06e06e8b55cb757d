mod common;

use common::{max_edge_by_cuts, random_dataset};
use mcboost::master::TOL_FEAS;
use mcboost::{train, Termination, TrainConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn column_generation_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for case in 0..30 {
        let m = rng.random_range(4..=60);
        let d = rng.random_range(1..=4);
        let data = random_dataset(&mut rng, m, d, (case % 2 == 0).then_some(6));
        let target = rng.random_range(0.05..0.95);
        let mut config = TrainConfig::new(target);
        config.trace = true;
        let res = train(&data, &config).unwrap();

        assert!(res.iterations >= 1 && res.iterations <= config.max_iterations);
        let w = res.ensemble.weights();
        assert!((w.iter().sum::<f64>() - 1.0).abs() <= TOL_FEAS);
        assert!(w.iter().all(|&x| x >= 0.0));
        if res.termination == Termination::EdgeBelowThreshold {
            assert!(res.final_edge < res.final_r + config.epsilon);
            // the final duals are feasible for every stump, up to epsilon
            assert!(max_edge_by_cuts(&data, &res.final_u) < res.final_r + config.epsilon);
        }
        for pair in res.objectives.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9 * (1.0 + pair[0].abs()), "{pair:?}");
        }
        let trace = res.trace.unwrap();
        assert_eq!(trace.len(), res.iterations);
        assert!(trace.iter().all(|r| r.gap <= 1e-8 * (1.0 + r.primal_objective.abs())));
        // the reported training error is the model's
        assert_eq!(trace.last().unwrap().train_error, res.ensemble.error_rate(&data).unwrap());
    }
}

#[test]
fn deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let data = random_dataset(&mut rng, 50, 3, None);
    let a = train(&data, &TrainConfig::new(0.4)).unwrap();
    let b = train(&data, &TrainConfig::new(0.4)).unwrap();
    assert_eq!(a.ensemble, b.ensemble);
    assert_eq!(a.objectives, b.objectives);
}

#[test]
fn model_file_drops_zero_weights_only() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let data = random_dataset(&mut rng, 80, 2, None);
    let res = train(&data, &TrainConfig::new(0.2)).unwrap();
    let pruned = res.model_ensemble().unwrap();
    assert!(pruned.len() <= res.ensemble.len());
    let full = res.ensemble.decision_values(&data).unwrap();
    let kept = pruned.decision_values(&data).unwrap();
    for (a, b) in full.iter().zip(&kept) {
        assert!((a - b).abs() <= 1e-9);
    }
}
