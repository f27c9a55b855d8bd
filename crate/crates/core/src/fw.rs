//! Frank–Wolfe (conditional gradient) maximization of concave functions
//! over polytopes described by linear programs.
//!
//! The linear maximization oracle is [`LinearProgram`]. Steps use an exact
//! line search together with away steps over the active vertex set, which
//! gives linear convergence on polytopes for the strongly concave entropy
//! objectives used in this crate.

use alloc::vec;
use alloc::vec::Vec;

use crate::lp::{LinearProgram, LpError};

/// A differentiable concave function on the first `dim` LP variables.
pub trait ConcaveObjective {
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], grad: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FwOptions {
    pub max_iterations: usize,
    /// Stop once the Frank–Wolfe duality gap is at most this.
    pub gap_tolerance: f64,
}

impl Default for FwOptions {
    fn default() -> Self {
        Self {
            max_iterations: 50_000,
            gap_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FwResult {
    pub x: Vec<f64>,
    pub value: f64,
    /// Upper bound on `max f − f(x)` at the last iterate.
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// The feasible region: the LP's constraints, projected onto the first
/// `dim` variables. Extra LP variables may act as auxiliaries.
#[derive(Debug, Clone)]
pub struct Polytope {
    lp: LinearProgram,
    dim: usize,
}

impl Polytope {
    pub fn new(lp: LinearProgram, dim: usize) -> Self {
        assert!(dim <= lp.num_vars(), "projection larger than the LP");
        Self { lp, dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// A vertex maximizing `direction · x` (zero-padded over auxiliaries).
    pub fn linear_max(&self, direction: &[f64]) -> Result<Vec<f64>, LpError> {
        let mut lp = self.lp.clone();
        let mut objective = vec![0.0; lp.num_vars()];
        objective[..self.dim].copy_from_slice(direction);
        lp.set_objective(&objective);
        let sol = lp.maximize()?;
        Ok(sol.x[..self.dim].to_vec())
    }
}

struct Atom {
    point: Vec<f64>,
    weight: f64,
}

/// Maximizes `objective` over `polytope` starting from the feasible `start`.
pub fn maximize<O: ConcaveObjective>(
    objective: &O,
    polytope: &Polytope,
    start: Vec<f64>,
    options: &FwOptions,
) -> Result<FwResult, LpError> {
    let dim = polytope.dim();
    assert_eq!(start.len(), dim, "start point dimension");
    let mut x = start.clone();
    let mut atoms = vec![Atom {
        point: start,
        weight: 1.0,
    }];
    let mut grad = vec![0.0; dim];
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    let mut direction = vec![0.0; dim];

    while iterations < options.max_iterations {
        objective.gradient(&x, &mut grad);
        let s = polytope.linear_max(&grad)?;
        gap = dot(&grad, &s) - dot(&grad, &x);
        if gap <= options.gap_tolerance {
            break;
        }
        iterations += 1;

        let (away_idx, away_val) = atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (i, dot(&grad, &a.point)))
            .fold(
                (0, f64::INFINITY),
                |best, cur| if cur.1 < best.1 { cur } else { best },
            );
        let away_gap = dot(&grad, &x) - away_val;

        let fw_step = gap >= away_gap || atoms.len() == 1;
        let max_step = if fw_step {
            for ((d, si), xi) in direction.iter_mut().zip(&s).zip(&x) {
                *d = si - xi;
            }
            1.0
        } else {
            let a = &atoms[away_idx];
            for ((d, xi), vi) in direction.iter_mut().zip(&x).zip(&a.point) {
                *d = xi - vi;
            }
            a.weight / (1.0 - a.weight)
        };

        let step = line_search(objective, &x, &direction, max_step);
        if step <= 0.0 {
            // No progress along the chosen direction; fall back to a tiny
            // FW step so the loop cannot stall on a zero away step.
            if !fw_step {
                atoms.remove(away_idx);
                renormalize(&mut atoms, &mut x);
            }
            continue;
        }
        for (xi, d) in x.iter_mut().zip(&direction) {
            *xi += step * d;
        }

        if fw_step {
            for a in atoms.iter_mut() {
                a.weight *= 1.0 - step;
            }
            match atoms.iter_mut().find(|a| same_point(&a.point, &s)) {
                Some(a) => a.weight += step,
                None => atoms.push(Atom {
                    point: s,
                    weight: step,
                }),
            }
            if step >= 1.0 {
                atoms.retain(|a| a.weight > 0.0);
            }
        } else {
            for a in atoms.iter_mut() {
                a.weight *= 1.0 + step;
            }
            atoms[away_idx].weight -= step;
            if step >= max_step * (1.0 - 1e-12) {
                atoms.remove(away_idx);
            }
        }
        atoms.retain(|a| a.weight > 1e-15);
    }

    let value = objective.value(&x);
    Ok(FwResult {
        x,
        value,
        gap,
        iterations,
        converged: gap <= options.gap_tolerance,
    })
}

fn renormalize(atoms: &mut [Atom], x: &mut [f64]) {
    let total: f64 = atoms.iter().map(|a| a.weight).sum();
    x.iter_mut().for_each(|v| *v = 0.0);
    for a in atoms.iter_mut() {
        a.weight /= total;
        for (v, p) in x.iter_mut().zip(&a.point) {
            *v += a.weight * p;
        }
    }
}

/// Maximizes the concave `γ ↦ f(x + γ·d)` on `[0, max_step]` by bisection
/// on the (decreasing) directional derivative.
fn line_search<O: ConcaveObjective>(objective: &O, x: &[f64], d: &[f64], max_step: f64) -> f64 {
    let mut probe = vec![0.0; x.len()];
    let mut grad = vec![0.0; x.len()];
    let mut slope = |gamma: f64| {
        for ((p, xi), di) in probe.iter_mut().zip(x).zip(d) {
            *p = (xi + gamma * di).max(0.0);
        }
        objective.gradient(&probe, &mut grad);
        dot(&grad, d)
    };
    if slope(max_step) >= 0.0 {
        return max_step;
    }
    if slope(0.0) <= 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, max_step);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * max_step.max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn same_point(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::Relation;

    /// `−Σ (x_i − c_i)²`.
    struct Quadratic(Vec<f64>);

    impl ConcaveObjective for Quadratic {
        fn value(&self, x: &[f64]) -> f64 {
            -x.iter()
                .zip(&self.0)
                .map(|(a, c)| (a - c) * (a - c))
                .sum::<f64>()
        }
        fn gradient(&self, x: &[f64], grad: &mut [f64]) {
            for ((g, a), c) in grad.iter_mut().zip(x).zip(&self.0) {
                *g = -2.0 * (a - c);
            }
        }
    }

    fn simplex(n: usize) -> Polytope {
        let mut lp = LinearProgram::new(n);
        lp.add_row(vec![1.0; n], Relation::Eq, 1.0);
        Polytope::new(lp, n)
    }

    #[test]
    fn projects_onto_simplex() {
        // Projection of (0.6, 0.6, -0.2) onto the simplex is (0.5, 0.5, 0).
        let f = Quadratic(vec![0.6, 0.6, -0.2]);
        let res = maximize(&f, &simplex(3), vec![0.0, 0.0, 1.0], &FwOptions::default()).unwrap();
        assert!(res.converged);
        assert!((res.x[0] - 0.5).abs() < 1e-4 && (res.x[1] - 0.5).abs() < 1e-4);
        assert!(res.x[2].abs() < 1e-4);
    }

    #[test]
    fn interior_optimum() {
        let f = Quadratic(vec![0.2, 0.3, 0.5]);
        let res = maximize(&f, &simplex(3), vec![1.0, 0.0, 0.0], &FwOptions::default()).unwrap();
        assert!(res.converged);
        for (a, b) in res.x.iter().zip(&[0.2, 0.3, 0.5]) {
            assert!((a - b).abs() < 1e-4);
        }
    }

    #[test]
    fn iteration_cap_is_reported() {
        let f = Quadratic(vec![0.2, 0.3, 0.5]);
        let opts = FwOptions {
            max_iterations: 1,
            gap_tolerance: 1e-12,
        };
        let res = maximize(&f, &simplex(3), vec![1.0, 0.0, 0.0], &opts).unwrap();
        assert!(!res.converged);
        assert_eq!(res.iterations, 1);
    }
}
