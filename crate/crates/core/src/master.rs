//! The restricted master problem and its dual.
//!
//! Over the columns generated so far (column `t` holds `y_i h_t(x_i)`), the
//! master minimises `rho'rho - 2E 1'rho` subject to `rho = A w`, `1'w = 1`,
//! `w >= 0`. Up to the constant `M E^2` this is `||A w - E 1||^2`: the squared
//! distance from `E 1` to the convex hull of the columns. [`MasterSolver`] solves
//! it with Wolfe's minimum-norm-point method, an active-set scheme that keeps an
//! affinely independent "corral" of columns and an incrementally updated
//! triangular factor, so a new column costs one rank-one extension rather than a
//! fresh solve.
//!
//! Dual sign convention: [`dual_objective`] is the minimisation form
//! `r + 1/4 ||u - 2E 1||^2`. At optimality it equals the *negated* primal
//! minimum, so [`MasterSolution::dual_objective`] stores `-dual_objective(u, r, E)`
//! and the duality gap is `primal_objective - dual_objective >= 0`.

use crate::error::{Error, Result};

/// Relative KKT tolerance the active-set loop stops at.
pub const TOL_KKT: f64 = 1e-9;
/// Relative duality gap every returned solution satisfies.
pub const TOL_GAP: f64 = 1e-8;
/// Simplex feasibility of the returned weights.
pub const TOL_FEAS: f64 = 1e-10;
/// Weights above this count as active.
pub const TOL_ACTIVE: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct RestrictedMaster {
    target: f64,
    n_examples: usize,
    columns: Vec<Vec<f64>>,
}

impl RestrictedMaster {
    /// An empty master for `n_examples` rows and desired margin `target`.
    pub fn new(n_examples: usize, target: f64) -> Result<Self> {
        if !(target > 0.0 && target < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "desired margin E = {target} must lie in (0, 1)"
            )));
        }
        if n_examples == 0 {
            return Err(Error::InvalidParameter("master needs at least one row".into()));
        }
        Ok(Self {
            target,
            n_examples,
            columns: Vec::new(),
        })
    }

    pub fn from_columns(columns: Vec<Vec<f64>>, target: f64) -> Result<Self> {
        let m = columns.first().map_or(0, Vec::len);
        let mut master = Self::new(m, target)?;
        for c in columns {
            master.push_column(c)?;
        }
        Ok(master)
    }

    pub fn push_column(&mut self, column: Vec<f64>) -> Result<()> {
        if column.len() != self.n_examples {
            return Err(Error::DimensionMismatch {
                expected: self.n_examples,
                actual: column.len(),
            });
        }
        if column.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("master column has non-finite entries".into()));
        }
        self.columns.push(column);
        Ok(())
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    pub fn n_examples(&self) -> usize {
        self.n_examples
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, t: usize) -> &[f64] {
        &self.columns[t]
    }

    /// `A w`.
    pub fn margins(&self, w: &[f64]) -> Vec<f64> {
        let mut rho = vec![0.0; self.n_examples];
        for (col, &wt) in self.columns.iter().zip(w) {
            if wt != 0.0 {
                for (r, &a) in rho.iter_mut().zip(col) {
                    *r += wt * a;
                }
            }
        }
        rho
    }

    /// `max_t u' A_t` over the current columns.
    pub fn max_column_score(&self, u: &[f64]) -> f64 {
        self.columns
            .iter()
            .map(|c| dot(u, c))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct MasterSolution {
    pub w: Vec<f64>,
    pub rho: Vec<f64>,
    pub primal_objective: f64,
    pub u: Vec<f64>,
    pub r: f64,
    /// Lagrangian dual value, `-(r + 1/4 ||u - 2E 1||^2)`.
    pub dual_objective: f64,
    /// Number of columns in the final corral.
    pub active: usize,
    /// Major iterations of the active-set loop.
    pub iterations: usize,
}

impl MasterSolution {
    pub fn gap(&self) -> f64 {
        self.primal_objective - self.dual_objective
    }
}

/// `rho'rho - 2E sum(rho)`.
pub fn primal_objective(rho: &[f64], target: f64) -> f64 {
    let sq: f64 = rho.iter().map(|r| r * r).sum();
    let sum: f64 = rho.iter().sum();
    sq - 2.0 * target * sum
}

/// `r + 1/4 ||u - 2E 1||^2`, the minimisation form of the dual objective.
pub fn dual_objective(u: &[f64], r: f64, target: f64) -> f64 {
    let sq: f64 = u.iter().map(|v| (v - 2.0 * target).powi(2)).sum();
    r + 0.25 * sq
}

/// Dual variables from the optimal margins: `u = 2(E 1 - rho)` and
/// `r = max_t u' A_t`.
pub fn recover_dual(rho: &[f64], master: &RestrictedMaster) -> (Vec<f64>, f64) {
    let u: Vec<f64> = rho.iter().map(|r| 2.0 * (master.target - r)).collect();
    let r = master.max_column_score(&u);
    (u, r)
}

/// Solves the master from scratch, optionally seeding the active set from
/// the support of `warm_start`.
pub fn solve_restricted(
    master: &RestrictedMaster,
    warm_start: Option<&[f64]>,
) -> Result<MasterSolution> {
    let mut solver = MasterSolver::from_master(master.clone());
    if let Some(w) = warm_start {
        solver.seed(w)?;
    }
    solver.solve()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Incremental solver: columns are appended between solves and the active set
/// carries over, which is how column generation warm starts.
#[derive(Debug, Clone)]
pub struct MasterSolver {
    master: RestrictedMaster,
    col_sums: Vec<f64>,
    corral: Vec<usize>,
    lambda: Vec<f64>,
    /// Upper-triangular factor of `11' + P'P` over the corral, by columns.
    factor: Vec<Vec<f64>>,
    max_major: Option<usize>,
}

impl MasterSolver {
    pub fn new(n_examples: usize, target: f64) -> Result<Self> {
        Ok(Self::from_master(RestrictedMaster::new(n_examples, target)?))
    }

    pub fn from_master(master: RestrictedMaster) -> Self {
        let col_sums = master.columns.iter().map(|c| c.iter().sum()).collect();
        Self {
            master,
            col_sums,
            corral: Vec::new(),
            lambda: Vec::new(),
            factor: Vec::new(),
            max_major: None,
        }
    }

    /// Caps the number of major iterations per solve.
    pub fn with_iteration_limit(mut self, limit: usize) -> Self {
        self.max_major = Some(limit);
        self
    }

    pub fn master(&self) -> &RestrictedMaster {
        &self.master
    }

    pub fn push_column(&mut self, column: Vec<f64>) -> Result<()> {
        let sum = column.iter().sum();
        self.master.push_column(column)?;
        self.col_sums.push(sum);
        Ok(())
    }

    // Shifted points p_j = a_j - E 1; inner products go through the raw columns.
    fn gram(&self, i: usize, j: usize) -> f64 {
        let e = self.master.target;
        let m = self.master.n_examples as f64;
        dot(&self.master.columns[i], &self.master.columns[j]) - e * (self.col_sums[i] + self.col_sums[j])
            + m * e * e
    }

    fn point(&self) -> Vec<f64> {
        let mut x = vec![-self.master.target; self.master.n_examples];
        for (&j, &l) in self.corral.iter().zip(&self.lambda) {
            for (xi, &a) in x.iter_mut().zip(&self.master.columns[j]) {
                *xi += l * a;
            }
        }
        x
    }

    /// Appends `j` to the corral. Returns false if it is affinely dependent on it.
    fn extend_corral(&mut self, j: usize) -> bool {
        let k = self.corral.len();
        let mut col = Vec::with_capacity(k + 1);
        for q in 0..k {
            let g = 1.0 + self.gram(self.corral[q], j);
            let mut s = g;
            for (p, c) in col.iter().enumerate() {
                s -= self.factor[q][p] * c;
            }
            col.push(s / self.factor[q][q]);
        }
        let diag = 1.0 + self.gram(j, j);
        let rest = diag - col.iter().map(|c| c * c).sum::<f64>();
        if rest <= 1e-10 * diag {
            return false;
        }
        col.push(rest.sqrt());
        self.factor.push(col);
        self.corral.push(j);
        self.lambda.push(0.0);
        true
    }

    /// Removes corral entry `k` and re-triangularises with Givens rotations.
    fn drop_from_corral(&mut self, k: usize) {
        self.corral.remove(k);
        self.lambda.remove(k);
        self.factor.remove(k);
        let n = self.factor.len();
        for c in k..n {
            let a = self.factor[c][c];
            let b = self.factor[c][c + 1];
            let h = a.hypot(b);
            let (cs, sn) = if h == 0.0 { (1.0, 0.0) } else { (a / h, b / h) };
            for q in c..n {
                let x = self.factor[q][c];
                let y = self.factor[q][c + 1];
                self.factor[q][c] = cs * x + sn * y;
                self.factor[q][c + 1] = -sn * x + cs * y;
            }
            self.factor[c].truncate(c + 1);
        }
    }

    /// Affine minimiser of the corral, as barycentric coefficients.
    fn affine_minimizer(&self) -> Vec<f64> {
        let n = self.corral.len();
        // R' z = 1
        let mut z = vec![0.0; n];
        for i in 0..n {
            let mut s = 1.0;
            for p in 0..i {
                s -= self.factor[i][p] * z[p];
            }
            z[i] = s / self.factor[i][i];
        }
        // R v = z
        let mut v = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = z[i];
            for q in i + 1..n {
                s -= self.factor[q][i] * v[q];
            }
            v[i] = s / self.factor[i][i];
        }
        let total: f64 = v.iter().sum();
        v.iter().map(|x| x / total).collect()
    }

    /// Moves to the affine minimiser of the corral, shrinking the corral until
    /// that minimiser has strictly positive weights.
    fn minor_cycles(&mut self) {
        let limit = self.corral.len() + 2;
        for _ in 0..limit {
            let alpha = self.affine_minimizer();
            if alpha.iter().all(|&a| a > 0.0) {
                self.lambda = alpha;
                return;
            }
            let mut theta = 1.0;
            let mut leaving = 0;
            for (k, (&l, &a)) in self.lambda.iter().zip(&alpha).enumerate() {
                if a <= 0.0 && l - a > 0.0 {
                    let t = l / (l - a);
                    if t < theta {
                        theta = t;
                        leaving = k;
                    }
                }
            }
            for (l, &a) in self.lambda.iter_mut().zip(&alpha) {
                *l = (1.0 - theta) * *l + theta * a;
            }
            self.lambda[leaving] = 0.0;
            for k in (0..self.corral.len()).rev() {
                if self.lambda[k] <= 0.0 && self.corral.len() > 1 {
                    self.drop_from_corral(k);
                }
            }
            let total: f64 = self.lambda.iter().sum();
            for l in &mut self.lambda {
                *l /= total;
            }
        }
    }

    /// Restarts from the support of `w`, largest weights first.
    pub fn seed(&mut self, w: &[f64]) -> Result<()> {
        let t = self.master.n_columns();
        if w.len() > t {
            return Err(Error::DimensionMismatch {
                expected: t,
                actual: w.len(),
            });
        }
        if w.iter().any(|&v| !(v >= -TOL_FEAS)) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidParameter("warm start is not on the simplex".into()));
        }
        self.corral.clear();
        self.lambda.clear();
        self.factor.clear();
        let mut support: Vec<usize> = (0..w.len()).filter(|&j| w[j] > 0.0).collect();
        support.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
        for j in support {
            self.extend_corral(j);
        }
        if !self.corral.is_empty() {
            let n = self.corral.len() as f64;
            self.lambda.iter_mut().for_each(|l| *l = 1.0 / n);
            self.minor_cycles();
        }
        Ok(())
    }

    pub fn solve(&mut self) -> Result<MasterSolution> {
        let t_count = self.master.n_columns();
        if t_count == 0 {
            return Err(Error::InvalidParameter("master has no columns".into()));
        }
        let m = self.master.n_examples as f64;
        let e = self.master.target;
        let const_term = m * e * e;

        if self.corral.is_empty() {
            let j0 = (0..t_count)
                .min_by(|&a, &b| self.gram(a, a).total_cmp(&self.gram(b, b)))
                .expect("non-empty");
            self.extend_corral(j0);
            self.lambda[0] = 1.0;
        }

        let max_major = self
            .max_major
            .unwrap_or(10 * (t_count + self.master.n_examples) + 100);
        let mut iterations = 0;
        let mut last_norm = f64::INFINITY;
        loop {
            let x = self.point();
            let xx = dot(&x, &x);
            let x_sum: f64 = x.iter().sum();
            let (j_star, xp_min) = (0..t_count)
                .map(|j| (j, dot(&x, &self.master.columns[j]) - e * x_sum))
                .fold((0, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best });
            let primal = xx - const_term;
            let gap = 2.0 * (xx - xp_min);
            if gap <= TOL_KKT * (1.0 + primal.abs()) {
                break;
            }
            if self.corral.contains(&j_star) || xx >= last_norm || iterations >= max_major {
                // Numerical stall; the gap is checked against TOL_GAP below.
                break;
            }
            last_norm = xx;
            iterations += 1;
            if !self.extend_corral(j_star) {
                break;
            }
            self.minor_cycles();
        }

        let solution = self.finish(iterations);
        let scale = 1.0 + solution.primal_objective.abs();
        let sum: f64 = solution.w.iter().sum();
        if solution.gap().abs() > TOL_GAP * scale {
            return Err(Error::SolverIterationLimit {
                iterations,
                gap: solution.gap(),
                feasibility: (sum - 1.0).abs(),
            });
        }
        Ok(solution)
    }

    fn finish(&self, iterations: usize) -> MasterSolution {
        let mut w = vec![0.0; self.master.n_columns()];
        for (&j, &l) in self.corral.iter().zip(&self.lambda) {
            w[j] = l.max(0.0);
        }
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= total);
        let rho = self.master.margins(&w);
        let primal = primal_objective(&rho, self.master.target);
        let (u, r) = recover_dual(&rho, &self.master);
        let dual = -dual_objective(&u, r, self.master.target);
        MasterSolution {
            active: self.corral.len(),
            w,
            rho,
            primal_objective: primal,
            u,
            r,
            dual_objective: dual,
            iterations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_column_forces_weight() {
        let master = RestrictedMaster::from_columns(vec![vec![1.0, 1.0]], 0.5).unwrap();
        let sol = solve_restricted(&master, None).unwrap();
        assert_eq!(sol.w, vec![1.0]);
        assert_eq!(sol.rho, vec![1.0, 1.0]);
        assert_eq!(sol.primal_objective, 0.0);
        assert_eq!(sol.u, vec![-1.0, -1.0]);
        assert_eq!(sol.r, -2.0);
        assert_eq!(dual_objective(&sol.u, sol.r, 0.5), 0.0);
        assert_eq!(sol.gap(), 0.0);
    }

    #[test]
    fn opposite_columns_balance() {
        let master =
            RestrictedMaster::from_columns(vec![vec![1.0, -1.0], vec![-1.0, 1.0]], 0.3).unwrap();
        let sol = solve_restricted(&master, None).unwrap();
        assert!((sol.w[0] - 0.5).abs() < 1e-12 && (sol.w[1] - 0.5).abs() < 1e-12);
        assert!(sol.rho.iter().all(|r| r.abs() < 1e-12));
        assert!(sol.primal_objective.abs() < 1e-12);
        assert!((sol.u[0] - 0.6).abs() < 1e-12 && (sol.u[1] - 0.6).abs() < 1e-12);
        assert!(sol.r.abs() < 1e-12);
        assert!(sol.gap().abs() < 1e-12);
    }

    #[test]
    fn objectives() {
        assert_eq!(primal_objective(&[0.0, 0.0], 0.4), 0.0);
        assert_eq!(primal_objective(&[1.0, 0.0], 0.5), 0.0);
        assert_eq!(dual_objective(&[0.6, 0.6], 0.0, 0.3), 0.0);
        assert_eq!(dual_objective(&[-1.0, -1.0], -2.0, 0.5), 0.0);
        assert_eq!(dual_objective(&[1.0, 1.0, 1.0], 0.0, 0.5), 0.0);
    }

    #[test]
    fn primal_objective_matches_centered_form() {
        let rho = [0.3, -0.7, 0.9, 0.1, 0.25];
        let e = 0.35;
        let m = rho.len() as f64;
        let centered: f64 = rho.iter().map(|r| (r - e) * (r - e)).sum::<f64>() / m;
        let expected = m * centered - m * e * e;
        assert!((primal_objective(&rho, e) - expected).abs() < 1e-12);
    }

    #[test]
    fn recover_dual_cases() {
        let master = RestrictedMaster::from_columns(vec![vec![1.0, -1.0, 1.0]], 0.4).unwrap();
        let (u, r) = recover_dual(&[0.4, 0.4, 0.4], &master);
        assert!(u.iter().all(|&v| v == 0.0));
        assert_eq!(r, 0.0);

        let master = RestrictedMaster::from_columns(vec![vec![1.0, -1.0]], 0.3).unwrap();
        let (u, _) = recover_dual(&[0.0, 0.0], &master);
        assert!((u[0] - 0.6).abs() < 1e-15 && (u[1] - 0.6).abs() < 1e-15);

        let master = RestrictedMaster::from_columns(vec![vec![1.0, 1.0]], 0.5).unwrap();
        assert_eq!(recover_dual(&[1.0, 1.0], &master), (vec![-1.0, -1.0], -2.0));
    }

    #[test]
    fn rejects_bad_target_and_shapes() {
        assert!(RestrictedMaster::new(3, 0.0).is_err());
        assert!(RestrictedMaster::new(3, 1.0).is_err());
        let mut m = RestrictedMaster::new(2, 0.5).unwrap();
        assert!(m.push_column(vec![1.0]).is_err());
        assert!(solve_restricted(&m, None).is_err());
    }

    #[test]
    fn duplicate_and_negated_columns() {
        let a = vec![1.0, 1.0, -1.0, 1.0];
        let b = vec![-1.0, 1.0, 1.0, 1.0];
        let neg_a: Vec<f64> = a.iter().map(|v| -v).collect();
        let master =
            RestrictedMaster::from_columns(vec![a.clone(), b, a, neg_a], 0.5).unwrap();
        let sol = solve_restricted(&master, None).unwrap();
        assert!(sol.gap() <= TOL_GAP * (1.0 + sol.primal_objective.abs()));
        assert!((sol.w.iter().sum::<f64>() - 1.0).abs() <= TOL_FEAS);
    }

    #[test]
    fn incremental_matches_fresh_solve() {
        let cols = vec![
            vec![1.0, 1.0, -1.0, -1.0, 1.0],
            vec![1.0, -1.0, 1.0, -1.0, 1.0],
            vec![-1.0, 1.0, 1.0, 1.0, 1.0],
            vec![1.0, 1.0, 1.0, -1.0, -1.0],
        ];
        let mut inc = MasterSolver::new(5, 0.25).unwrap();
        let mut last = f64::INFINITY;
        for c in &cols {
            inc.push_column(c.clone()).unwrap();
            let s = inc.solve().unwrap();
            assert!(s.primal_objective <= last + 1e-12);
            last = s.primal_objective;
        }
        let fresh = solve_restricted(&RestrictedMaster::from_columns(cols, 0.25).unwrap(), None)
            .unwrap();
        assert!((fresh.primal_objective - last).abs() < 1e-10);
    }

    #[test]
    fn warm_start_validation() {
        let master =
            RestrictedMaster::from_columns(vec![vec![1.0, -1.0], vec![-1.0, 1.0]], 0.3).unwrap();
        assert!(solve_restricted(&master, Some(&[0.7, 0.7])).is_err());
        let sol = solve_restricted(&master, Some(&[0.0, 1.0])).unwrap();
        assert!(sol.rho.iter().all(|r| r.abs() < 1e-12));
    }
}
