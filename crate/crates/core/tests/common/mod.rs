//! Independent reference implementations shared by the integration tests.
//! Nothing here calls into the solver, the oracle scan or the rank code.
#![allow(dead_code)]

use mcboost::{Dataset, Polarity, Stump};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_dataset(rng: &mut ChaCha8Rng, m: usize, d: usize, levels: Option<i32>) -> Dataset {
    loop {
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                (0..d)
                    .map(|_| match levels {
                        Some(k) => f64::from(rng.random_range(0..k)) * 0.5 - 1.0,
                        None => rng.random_range(-3.0..3.0),
                    })
                    .collect()
            })
            .collect();
        let labels: Vec<i8> = (0..m)
            .map(|_| if rng.random_bool(0.5) { 1 } else { -1 })
            .collect();
        if labels.contains(&1) && labels.contains(&-1) {
            return Dataset::from_rows(&rows, labels).unwrap();
        }
    }
}

/// `sum_i u_i y_i h(x_i)` by direct evaluation of the rule, in index order.
pub fn naive_edge(data: &Dataset, u: &[f64], feature: usize, threshold: f64, sign: i8) -> f64 {
    let mut sum = 0.0;
    for i in 0..data.len() {
        let h = if data.row(i)[feature] >= threshold { sign } else { -sign };
        sum += u[i] * f64::from(data.label(i) * h);
    }
    sum
}

/// Largest edge over every labelling an axis threshold can induce, found by
/// cutting between distinct values; no thresholds are involved.
pub fn max_edge_by_cuts(data: &Dataset, u: &[f64]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for f in 0..data.n_features() {
        let mut values: Vec<f64> = (0..data.len()).map(|i| data.row(i)[f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for &cut in &values {
            for sign in [1i8, -1] {
                let mut sum = 0.0;
                for i in 0..data.len() {
                    let h = if data.row(i)[f] >= cut { sign } else { -sign };
                    sum += u[i] * f64::from(data.label(i) * h);
                }
                best = best.max(sum);
            }
        }
    }
    best
}

/// Exhaustive search over (feature, threshold, polarity) with the documented
/// tie-break: the first maximum in feature, threshold, `+`-before-`-` order.
pub fn brute_force_best(data: &Dataset, u: &[f64], thresholds: &[Vec<f64>]) -> (Stump, f64) {
    let mut best: Option<(Stump, f64)> = None;
    for (f, ts) in thresholds.iter().enumerate() {
        for &t in ts {
            for polarity in [Polarity::Positive, Polarity::Negative] {
                let e = naive_edge(data, u, f, t, polarity.sign());
                if best.is_none_or(|(_, b)| e > b) {
                    best = Some((Stump::new(f, t, polarity), e));
                }
            }
        }
    }
    best.unwrap()
}

/// Euclidean projection onto the probability simplex (sort-and-threshold).
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &x) in s.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (k + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Minimises `||A w||^2 - 2E 1'A w` over the simplex with accelerated
/// projected gradient, at most `max_steps` steps. `columns[t]` is column `t`.
/// Returns `(w, objective)`.
pub fn projected_gradient_qp(columns: &[Vec<f64>], target: f64, max_steps: usize) -> (Vec<f64>, f64) {
    let t = columns.len();
    let gram: Vec<Vec<f64>> = (0..t)
        .map(|a| (0..t).map(|b| dot(&columns[a], &columns[b])).collect())
        .collect();
    let sums: Vec<f64> = columns.iter().map(|c| c.iter().sum()).collect();
    let objective = |w: &[f64]| {
        let mut q = 0.0;
        for a in 0..t {
            for b in 0..t {
                q += w[a] * gram[a][b] * w[b];
            }
        }
        q - 2.0 * target * dot(w, &sums)
    };
    // Frobenius norm bounds the largest eigenvalue.
    let lipschitz = 2.0 * gram.iter().flatten().map(|g| g * g).sum::<f64>().sqrt();
    let step = 1.0 / lipschitz.max(1e-12);

    let mut w = vec![1.0 / t as f64; t];
    let mut y = w.clone();
    let mut momentum = 1.0f64;
    for _ in 0..max_steps {
        let grad: Vec<f64> = (0..t)
            .map(|a| 2.0 * (dot(&gram[a], &y) - target * sums[a]))
            .collect();
        let next = project_simplex(&y.iter().zip(&grad).map(|(y, g)| y - step * g).collect::<Vec<_>>());
        let next_m = (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt()) / 2.0;
        let beta = (momentum - 1.0) / next_m;
        let moved = next.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        y = next.iter().zip(&w).map(|(n, o)| n + beta * (n - o)).collect();
        // restart momentum whenever the objective goes up
        if objective(&next) > objective(&w) {
            momentum = 1.0;
            y = next.clone();
        } else {
            momentum = next_m;
        }
        w = next;
        if moved == 0.0 {
            break;
        }
    }
    let obj = objective(&w);
    (w, obj)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `A w` for column-major `columns`.
pub fn combine(columns: &[Vec<f64>], w: &[f64]) -> Vec<f64> {
    let m = columns[0].len();
    (0..m)
        .map(|i| columns.iter().zip(w).map(|(c, wt)| c[i] * wt).sum())
        .collect()
}

/// Wilcoxon signed-rank W for "a lower than b", ranking by counting: the rank
/// of a difference is 1 + (#strictly smaller) + (#equal others) / 2.
pub fn rank_sum_by_counting(a: &[f64], b: &[f64]) -> (usize, f64) {
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| y - x)
        .filter(|d| *d != 0.0)
        .collect();
    let mut w = 0.0;
    for (i, d) in diffs.iter().enumerate() {
        if *d > 0.0 {
            let smaller = diffs.iter().filter(|o| o.abs() < d.abs()).count() as f64;
            let equal = diffs
                .iter()
                .enumerate()
                .filter(|(j, o)| *j != i && o.abs() == d.abs())
                .count() as f64;
            w += 1.0 + smaller + equal / 2.0;
        }
    }
    (diffs.len(), w)
}
