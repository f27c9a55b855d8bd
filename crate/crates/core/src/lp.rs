//! Small dense linear programs.
//!
//! Two-phase tableau simplex with Bland's anti-cycling rule. Every variable
//! is nonnegative. Problems here have at most a few hundred columns, so the
//! dense tableau is the simplest thing that works.

use alloc::vec;
use alloc::vec::Vec;

use crate::FEAS_TOLERANCE;

const PIVOT_TOLERANCE: f64 = 1e-11;
const COST_TOLERANCE: f64 = 1e-11;
const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("infeasible")]
    Infeasible,
    #[error("unbounded")]
    Unbounded,
    #[error("pivot limit reached")]
    IterationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<f64>,
    relation: Relation,
    rhs: f64,
}

/// `min/max c·x` subject to linear rows and `x ≥ 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<f64>,
    rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![0.0; num_vars],
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn set_objective(&mut self, objective: &[f64]) {
        assert_eq!(objective.len(), self.num_vars, "objective length");
        self.objective.copy_from_slice(objective);
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        assert_eq!(coeffs.len(), self.num_vars, "row length");
        self.rows.push(Row {
            coeffs,
            relation,
            rhs,
        });
    }

    /// Adds `Σ_{(j, c)} c·x_j (rel) rhs` from sparse terms.
    pub fn add_sparse_row(&mut self, terms: &[(usize, f64)], relation: Relation, rhs: f64) {
        let mut coeffs = vec![0.0; self.num_vars];
        for &(j, c) in terms {
            coeffs[j] += c;
        }
        self.add_row(coeffs, relation, rhs);
    }

    pub fn minimize(&self) -> Result<LpSolution, LpError> {
        Tableau::build(self).solve(&self.objective)
    }

    pub fn maximize(&self) -> Result<LpSolution, LpError> {
        let negated: Vec<f64> = self.objective.iter().map(|c| -c).collect();
        let mut sol = Tableau::build(self).solve(&negated)?;
        sol.objective = -sol.objective;
        Ok(sol)
    }

    /// Any feasible point (phase one only).
    pub fn feasible_point(&self) -> Result<Vec<f64>, LpError> {
        let zero = vec![0.0; self.num_vars];
        Tableau::build(self).solve(&zero).map(|s| s.x)
    }
}

struct Tableau {
    num_vars: usize,
    /// Columns: original vars, then slack/surplus, then artificials.
    num_cols: usize,
    first_artificial: usize,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_vars;
        let mut slack_count = 0;
        let mut art_count = 0;
        let mut normalized = Vec::with_capacity(lp.rows.len());
        for row in &lp.rows {
            let (coeffs, rel, rhs) = if row.rhs < 0.0 {
                let rel = match row.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (row.coeffs.iter().map(|c| -c).collect(), rel, -row.rhs)
            } else {
                (row.coeffs.clone(), row.relation, row.rhs)
            };
            match rel {
                Relation::Le => slack_count += 1,
                Relation::Ge => {
                    slack_count += 1;
                    art_count += 1;
                }
                Relation::Eq => art_count += 1,
            }
            normalized.push((coeffs, rel, rhs));
        }
        let first_artificial = n + slack_count;
        let num_cols = first_artificial + art_count;
        let m = normalized.len();
        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let (mut next_slack, mut next_art) = (n, first_artificial);
        for (coeffs, rel, b) in normalized {
            let mut r = vec![0.0; num_cols];
            r[..n].copy_from_slice(&coeffs);
            match rel {
                Relation::Le => {
                    r[next_slack] = 1.0;
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    r[next_slack] = -1.0;
                    next_slack += 1;
                    r[next_art] = 1.0;
                    basis.push(next_art);
                    next_art += 1;
                }
                Relation::Eq => {
                    r[next_art] = 1.0;
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            rows.push(r);
            rhs.push(b);
        }
        Self {
            num_vars: n,
            num_cols,
            first_artificial,
            rows,
            rhs,
            basis,
        }
    }

    fn solve(mut self, cost: &[f64]) -> Result<LpSolution, LpError> {
        if self.first_artificial < self.num_cols {
            let mut phase1 = vec![0.0; self.num_cols];
            phase1[self.first_artificial..]
                .iter_mut()
                .for_each(|c| *c = 1.0);
            let value = self.optimize(&phase1, self.num_cols)?;
            let scale = 1.0 + self.rhs.iter().fold(0.0f64, |a, &b| a.max(b));
            if value > FEAS_TOLERANCE * scale {
                return Err(LpError::Infeasible);
            }
            self.drive_out_artificials();
        }
        let mut full_cost = vec![0.0; self.num_cols];
        full_cost[..self.num_vars].copy_from_slice(cost);
        let objective = self.optimize(&full_cost, self.first_artificial)?;
        let mut x = vec![0.0; self.num_vars];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.num_vars {
                x[b] = self.rhs[i].max(0.0);
            }
        }
        Ok(LpSolution { x, objective })
    }

    /// Minimizes `cost` using only columns `< allowed`; returns the optimum.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<f64, LpError> {
        let mut reduced: Vec<f64> = cost.to_vec();
        let mut value = 0.0;
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                for (r, a) in reduced.iter_mut().zip(&self.rows[i]) {
                    *r -= cb * a;
                }
                value += cb * self.rhs[i];
            }
        }
        for _ in 0..MAX_PIVOTS {
            // Bland: lowest-index improving column.
            let Some(enter) = (0..allowed).find(|&j| reduced[j] < -COST_TOLERANCE) else {
                return Ok(value);
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[enter];
                if a > PIVOT_TOLERANCE {
                    let ratio = self.rhs[i] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-14
                                || (ratio <= lr + 1e-14 && self.basis[i] < self.basis[li])
                            {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((leave, _)) = leave else {
                return Err(LpError::Unbounded);
            };
            self.pivot(leave, enter);
            let factor = reduced[enter];
            for (r, a) in reduced.iter_mut().zip(&self.rows[leave]) {
                *r -= factor * a;
            }
            value += factor * self.rhs[leave];
        }
        Err(LpError::IterationLimit)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col];
        self.rows[row].iter_mut().for_each(|a| *a /= p);
        self.rhs[row] /= p;
        let pivot_row = self.rows[row].clone();
        let pivot_rhs = self.rhs[row];
        for i in 0..self.rows.len() {
            if i == row {
                continue;
            }
            let f = self.rows[i][col];
            if f != 0.0 {
                for (a, b) in self.rows[i].iter_mut().zip(&pivot_row) {
                    *a -= f * b;
                }
                self.rhs[i] -= f * pivot_rhs;
                if self.rhs[i] < 0.0 && self.rhs[i] > -1e-12 {
                    self.rhs[i] = 0.0;
                }
            }
        }
        self.basis[row] = col;
    }

    fn drive_out_artificials(&mut self) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= self.first_artificial {
                let col = (0..self.first_artificial)
                    .filter(|&j| self.rows[i][j].abs() > 1e-9)
                    .max_by(|&a, &b| {
                        self.rows[i][a]
                            .abs()
                            .partial_cmp(&self.rows[i][b].abs())
                            .unwrap_or(core::cmp::Ordering::Equal)
                    });
                match col {
                    Some(j) => self.pivot(i, j),
                    None => {
                        // Redundant row.
                        self.rows.remove(i);
                        self.rhs.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18  → (2, 6), 36
        let mut lp = LinearProgram::new(2);
        lp.set_objective(&[3.0, 5.0]);
        lp.add_row(vec![1.0, 0.0], Relation::Le, 4.0);
        lp.add_row(vec![0.0, 2.0], Relation::Le, 12.0);
        lp.add_row(vec![3.0, 2.0], Relation::Le, 18.0);
        let sol = lp.maximize().unwrap();
        assert!((sol.objective - 36.0).abs() < 1e-9);
        assert!((sol.x[0] - 2.0).abs() < 1e-9 && (sol.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + 2y s.t. x + y = 1, x ≥ 0.25, y ≥ 0.25 → x = 0.75
        let mut lp = LinearProgram::new(2);
        lp.set_objective(&[1.0, 2.0]);
        lp.add_row(vec![1.0, 1.0], Relation::Eq, 1.0);
        lp.add_row(vec![1.0, 0.0], Relation::Ge, 0.25);
        lp.add_row(vec![0.0, 1.0], Relation::Ge, 0.25);
        let sol = lp.minimize().unwrap();
        assert!((sol.objective - 1.25).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.add_row(vec![1.0], Relation::Le, 1.0);
        lp.add_row(vec![1.0], Relation::Ge, 2.0);
        assert_eq!(lp.minimize(), Err(LpError::Infeasible));

        let mut lp = LinearProgram::new(2);
        lp.set_objective(&[1.0, 0.0]);
        lp.add_row(vec![1.0, -1.0], Relation::Le, 1.0);
        assert_eq!(lp.maximize(), Err(LpError::Unbounded));
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(3);
        lp.set_objective(&[1.0, 1.0, 1.0]);
        lp.add_row(vec![1.0, 1.0, 1.0], Relation::Eq, 1.0);
        lp.add_row(vec![2.0, 2.0, 2.0], Relation::Eq, 2.0);
        lp.add_row(vec![1.0, -1.0, 0.0], Relation::Eq, 0.0);
        let sol = lp.minimize().unwrap();
        assert!((sol.objective - 1.0).abs() < 1e-9);
        assert!((sol.x[0] - sol.x[1]).abs() < 1e-9);
    }

    #[test]
    fn negative_rhs_is_flipped() {
        // -x ≤ -3  ⇔  x ≥ 3
        let mut lp = LinearProgram::new(1);
        lp.set_objective(&[1.0]);
        lp.add_row(vec![-1.0], Relation::Le, -3.0);
        let sol = lp.minimize().unwrap();
        assert!((sol.x[0] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Classic cycling example for the largest-coefficient rule.
        let mut lp = LinearProgram::new(4);
        lp.set_objective(&[-0.75, 150.0, -0.02, 6.0]);
        lp.add_row(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0);
        lp.add_row(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0);
        lp.add_row(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0);
        let sol = lp.minimize().unwrap();
        assert!((sol.objective + 0.05).abs() < 1e-9);
    }
}
