//! Independence-entropy lower bounds.
//!
//! A product measure `μ` on `Σ^{F_n^d}` is feasible for `Γ` when its
//! averaged marginal `π̂_S(μ)` lies in `B_ε(Γ)`; its entropy rate is then a
//! lower bound on the independence entropy, hence on the capacity. The
//! optimizer here is block-coordinate ascent: with all other sites fixed,
//! `π̂_S(μ)` is affine in one site's distribution, so each update is an
//! entropy maximization over a polytope slice. Binary problems also move
//! pairs of sites, which lets the iterate slide along curved boundaries
//! such as `xy = p` where single-site moves are stuck.
//!
//! Returned values are lower bounds: every witness is re-checked with an
//! LP distance computation before it is reported.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::count::PRUNED_LIMIT_BITS;
use crate::fw::{self, ConcaveObjective, FwOptions, Polytope};
use crate::lattice::{
    cell_coords, entropy_of, normalize_site, pattern_digits, PatternDistribution, Shape,
    SiteProductMeasure, Symbol,
};
use crate::lp::{LinearProgram, LpError, Relation};
use crate::scs::{tv_distance_to_set, within_eps, ConstraintSet, ForbiddenSet, Sense};
use crate::{binary_entropy, Error, Result};

/// Slack allowed on the LP-verified distance of a returned witness.
pub const CERTIFICATE_TOLERANCE: f64 = 1e-8;

/// A 1-D product measure with period `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicProductMeasure {
    sites: Vec<Vec<f64>>,
}

impl PeriodicProductMeasure {
    pub fn new(mut sites: Vec<Vec<f64>>) -> Result<Self> {
        let q = sites.first().map_or(0, Vec::len);
        if q == 0 {
            return Err(Error::invalid(
                "need at least one nonempty site distribution",
            ));
        }
        for site in sites.iter_mut() {
            if site.len() != q {
                return Err(Error::ShapeMismatch);
            }
            normalize_site(site)?;
        }
        Ok(Self { sites })
    }

    pub fn period(&self) -> usize {
        self.sites.len()
    }

    pub fn sites(&self) -> &[Vec<f64>] {
        &self.sites
    }

    pub fn entropy_rate(&self) -> f64 {
        self.sites.iter().map(|s| entropy_of(s)).sum::<f64>() / self.period() as f64
    }

    /// The measure on `Σ^{F_n}`, `n` a multiple of the period.
    pub fn tile(&self, side: usize) -> Result<SiteProductMeasure> {
        if side == 0 || !side.is_multiple_of(self.period()) {
            return Err(Error::invalid(format!(
                "side {side} is not a positive multiple of the period {}",
                self.period()
            )));
        }
        let sites = (0..side)
            .map(|i| self.sites[i % self.period()].clone())
            .collect();
        SiteProductMeasure::new(1, side, sites)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HindOptions {
    /// Random starts on top of the warm starts.
    pub restarts: usize,
    pub seed: u64,
    pub max_sweeps: usize,
    /// A sweep gaining less total entropy than this ends the ascent.
    pub tolerance: f64,
}

impl Default for HindOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            seed: 0,
            max_sweeps: 200,
            tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HindResult {
    /// Entropy per site of `measure`.
    pub value: f64,
    pub measure: SiteProductMeasure,
    /// LP-verified `d_TV(π̂_S(measure), Γ)`.
    pub distance: f64,
    pub eps: f64,
}

impl HindResult {
    pub fn certified(&self) -> bool {
        self.distance <= self.eps + CERTIFICATE_TOLERANCE
    }
}

/// Product-measure optimization of `Γ` on `F_n^d`.
#[derive(Debug, Clone)]
pub struct HindProblem {
    gamma: ConstraintSet,
    dim: usize,
    side: usize,
    eps: f64,
    q: usize,
    m: usize,
    windows: Vec<Vec<usize>>,
    digits: Vec<Vec<Symbol>>,
    /// Windows containing each site, with the slot the site occupies.
    site_windows: Vec<Vec<(usize, usize)>>,
}

enum SiteLp {
    /// `π̂ ∈ B_ε(Γ)` as constraints.
    Feasible,
    /// Minimize `d_TV(π̂, Γ)`.
    Distance,
}

impl HindProblem {
    pub fn new(gamma: &ConstraintSet, side: usize, eps: f64) -> Result<Self> {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::invalid("eps must be a nonnegative number"));
        }
        let shape = gamma.shape();
        let dim = shape.dim();
        let num_sites = side
            .checked_pow(dim as u32)
            .filter(|&c| c > 0 && c <= 1 << 16)
            .ok_or_else(|| Error::invalid("window side out of range"))?;
        let q = gamma.alphabet().size();
        let m = gamma.num_patterns();
        let mut windows = Vec::with_capacity(num_sites);
        let mut site_windows = vec![Vec::new(); num_sites];
        for v in 0..num_sites {
            let cells = shape.wrapped_cells(&cell_coords(v, dim, side), side);
            for (slot, &c) in cells.iter().enumerate() {
                if cells[..slot].contains(&c) {
                    return Err(Error::invalid(format!(
                        "side {side} is too small: a window wraps onto itself"
                    )));
                }
                site_windows[c].push((v, slot));
            }
            windows.push(cells);
        }
        let digits = (0..m)
            .map(|a| {
                let mut d = vec![0; shape.len()];
                pattern_digits(q, a, &mut d);
                d
            })
            .collect();
        if gamma.is_empty() {
            return Err(Error::EmptyConstraintSet);
        }
        Ok(Self {
            gamma: gamma.clone(),
            dim,
            side,
            eps,
            q,
            m,
            windows,
            digits,
            site_windows,
        })
    }

    pub fn num_sites(&self) -> usize {
        self.windows.len()
    }

    /// Warm starts (best i.i.d., period 2, constant) followed by
    /// `options.restarts` random starts.
    pub fn starts(&self, options: &HindOptions) -> Result<Vec<Vec<Vec<f64>>>> {
        let n = self.num_sites();
        let q = self.q;
        let mut out = vec![vec![self.best_iid()?; n]];
        let mut point = vec![0.0; q];
        point[0] = 1.0;
        let uniform = vec![1.0 / q as f64; q];
        out.push(
            (0..n)
                .map(|v| {
                    let parity: usize = cell_coords(v, self.dim, self.side).iter().sum();
                    if parity.is_multiple_of(2) {
                        uniform.clone()
                    } else {
                        point.clone()
                    }
                })
                .collect(),
        );
        out.push(vec![point; n]);
        for r in 0..options.restarts {
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed ^ r as u64);
            out.push(
                (0..n)
                    .map(|_| {
                        let raw: Vec<f64> = (0..q).map(|_| rng.gen::<f64>() + 1e-3).collect();
                        let total: f64 = raw.iter().sum();
                        raw.into_iter().map(|x| x / total).collect()
                    })
                    .collect(),
            );
        }
        Ok(out)
    }

    /// Restores feasibility from `start`, then ascends. `None` when the
    /// start cannot be made feasible.
    pub fn solve_from(
        &self,
        start: Vec<Vec<f64>>,
        options: &HindOptions,
    ) -> Result<Option<HindResult>> {
        if start.len() != self.num_sites() || start.iter().any(|s| s.len() != self.q) {
            return Err(Error::ShapeMismatch);
        }
        let mut sites = start;
        if !self.restore(&mut sites, options)? {
            return Ok(None);
        }
        for _ in 0..options.max_sweeps {
            let before: f64 = sites.iter().map(|s| entropy_of(s)).sum();
            for i in 0..sites.len() {
                self.improve_site(&mut sites, i)?;
            }
            if self.q == 2 {
                for i in 0..sites.len() {
                    for j in i + 1..sites.len() {
                        self.improve_pair(&mut sites, i, j)?;
                    }
                }
            }
            let after: f64 = sites.iter().map(|s| entropy_of(s)).sum();
            if after - before <= options.tolerance {
                break;
            }
        }
        let result = self.certify(sites)?;
        Ok(result.certified().then_some(result))
    }

    /// Packages `sites` with its LP-verified distance.
    pub fn certify(&self, mut sites: Vec<Vec<f64>>) -> Result<HindResult> {
        for s in sites.iter_mut() {
            clean_site(s);
        }
        let measure = SiteProductMeasure::new(self.dim, self.side, sites)?;
        let marginal = measure.averaged_marginal(self.gamma.shape())?;
        let distance = tv_distance_to_set(&marginal, &self.gamma)?;
        Ok(HindResult {
            value: measure.entropy_rate(),
            measure,
            distance,
            eps: self.eps,
        })
    }

    fn averaged(&self, sites: &[Vec<f64>]) -> Vec<f64> {
        let mut acc = vec![0.0; self.m];
        for w in &self.windows {
            for (a, d) in self.digits.iter().enumerate() {
                acc[a] += w
                    .iter()
                    .zip(d)
                    .map(|(&c, &s)| sites[c][usize::from(s)])
                    .product::<f64>();
            }
        }
        let scale = 1.0 / self.windows.len() as f64;
        acc.iter_mut().for_each(|x| *x *= scale);
        acc
    }

    fn feasible(&self, sites: &[Vec<f64>]) -> Result<bool> {
        within_eps(&self.averaged(sites), &self.gamma, self.eps)
    }

    fn distance(&self, sites: &[Vec<f64>]) -> Result<f64> {
        let pd =
            PatternDistribution::new(self.gamma.shape().clone(), self.q, self.averaged(sites))?;
        tv_distance_to_set(&pd, &self.gamma)
    }

    /// `π̂ = A·s_i + b` with `A` stored row-major as `m × q`.
    fn affine(&self, sites: &[Vec<f64>], i: usize) -> (Vec<f64>, Vec<f64>) {
        let (q, m) = (self.q, self.m);
        let mut a_mat = vec![0.0; m * q];
        let mut b = vec![0.0; m];
        let scale = 1.0 / self.windows.len() as f64;
        let mut inside = vec![false; self.windows.len()];
        for &(w, slot) in &self.site_windows[i] {
            inside[w] = true;
            let cells = &self.windows[w];
            for (a, d) in self.digits.iter().enumerate() {
                let rest: f64 = cells
                    .iter()
                    .zip(d)
                    .enumerate()
                    .filter(|&(l, _)| l != slot)
                    .map(|(_, (&c, &s))| sites[c][usize::from(s)])
                    .product();
                a_mat[a * q + usize::from(d[slot])] += rest * scale;
            }
        }
        for (w, cells) in self.windows.iter().enumerate() {
            if inside[w] {
                continue;
            }
            for (a, d) in self.digits.iter().enumerate() {
                b[a] += cells
                    .iter()
                    .zip(d)
                    .map(|(&c, &s)| sites[c][usize::from(s)])
                    .product::<f64>()
                    * scale;
            }
        }
        (a_mat, b)
    }

    /// LP over `s_i` (first `q` variables) plus auxiliaries.
    fn site_lp(&self, a_mat: &[f64], b: &[f64], kind: SiteLp) -> LinearProgram {
        let (q, m) = (self.q, self.m);
        let direct = matches!(kind, SiteLp::Feasible) && self.eps == 0.0;
        let vars = if direct { q } else { q + 2 * m };
        let mut lp = LinearProgram::new(vars);
        let mut simplex = vec![0.0; vars];
        simplex[..q].iter_mut().for_each(|c| *c = 1.0);
        lp.add_row(simplex, Relation::Eq, 1.0);
        if direct {
            for c in self.gamma.constraints() {
                let mut row = vec![0.0; q];
                for (a, &ca) in c.coeffs.iter().enumerate() {
                    for (r, x) in row.iter_mut().enumerate() {
                        *x += ca * a_mat[a * q + r];
                    }
                }
                let rhs = c.bound - c.coeffs.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
                let rel = match c.sense {
                    Sense::Le => Relation::Le,
                    Sense::Eq => Relation::Eq,
                };
                lp.add_row(row, rel, rhs);
            }
            return lp;
        }
        // ν on q..q+m, t on q+m..q+2m with t ≥ |A s + b − ν|.
        self.gamma.add_to_lp(&mut lp, q);
        for a in 0..m {
            let mut plus = vec![0.0; vars];
            let mut minus = vec![0.0; vars];
            for r in 0..q {
                plus[r] = -a_mat[a * q + r];
                minus[r] = a_mat[a * q + r];
            }
            plus[q + a] = 1.0;
            minus[q + a] = -1.0;
            plus[q + m + a] = 1.0;
            minus[q + m + a] = 1.0;
            lp.add_row(plus, Relation::Ge, b[a]);
            lp.add_row(minus, Relation::Ge, -b[a]);
        }
        let mut budget = vec![0.0; vars];
        budget[q + m..].iter_mut().for_each(|c| *c = 0.5);
        match kind {
            SiteLp::Feasible => lp.add_row(budget, Relation::Le, self.eps),
            SiteLp::Distance => lp.set_objective(&budget),
        }
        lp
    }

    /// Coordinate descent on the distance to `Γ`.
    fn restore(&self, sites: &mut [Vec<f64>], options: &HindOptions) -> Result<bool> {
        if self.feasible(sites)? {
            return Ok(true);
        }
        let mut last = self.distance(sites)?;
        for _ in 0..options.max_sweeps {
            for i in 0..sites.len() {
                let (a_mat, b) = self.affine(sites, i);
                let lp = self.site_lp(&a_mat, &b, SiteLp::Distance);
                match lp.minimize() {
                    Ok(sol) => {
                        sites[i].copy_from_slice(&sol.x[..self.q]);
                        clean_site(&mut sites[i]);
                    }
                    Err(LpError::Infeasible) => return Err(Error::EmptyConstraintSet),
                    Err(e) => return Err(e.into()),
                }
            }
            if self.feasible(sites)? {
                return Ok(true);
            }
            let d = self.distance(sites)?;
            if d >= last - 1e-12 {
                return Ok(false);
            }
            last = d;
        }
        Ok(false)
    }

    fn improve_site(&self, sites: &mut [Vec<f64>], i: usize) -> Result<()> {
        let (a_mat, b) = self.affine(sites, i);
        let lp = self.site_lp(&a_mat, &b, SiteLp::Feasible);
        let current = entropy_of(&sites[i]);
        if self.q == 2 {
            if let Some((lo, hi)) = interval(&lp)? {
                let x = 0.5f64.clamp(lo, hi);
                if binary_entropy(x) > current {
                    sites[i] = vec![1.0 - x, x];
                }
            }
            return Ok(());
        }
        let polytope = Polytope::new(lp, self.q);
        let options = FwOptions {
            max_iterations: 2_000,
            gap_tolerance: 1e-10,
        };
        match fw::maximize(&SiteEntropy, &polytope, sites[i].clone(), &options) {
            Ok(res) if res.value > current => {
                sites[i] = res.x;
                clean_site(&mut sites[i]);
            }
            Ok(_) | Err(LpError::Infeasible) => {}
            Err(e) => return Err(e.into()),
        }
        Ok(())
    }

    /// Binary only: jointly moves sites `i` and `j`, scanning `x_i` and
    /// taking the best feasible `x_j` for each value.
    fn improve_pair(&self, sites: &mut [Vec<f64>], i: usize, j: usize) -> Result<()> {
        let current = entropy_of(&sites[i]) + entropy_of(&sites[j]);
        let mut trial = sites.to_vec();
        let mut eval = |x: f64| -> Result<Option<(f64, f64)>> {
            trial[i] = vec![1.0 - x, x];
            let (a_mat, b) = self.affine(&trial, j);
            let lp = self.site_lp(&a_mat, &b, SiteLp::Feasible);
            Ok(interval(&lp)?.map(|(lo, hi)| {
                let y = 0.5f64.clamp(lo, hi);
                (binary_entropy(x) + binary_entropy(y), y)
            }))
        };
        let score = |r: &Option<(f64, f64)>| r.map_or(f64::NEG_INFINITY, |(v, _)| v);

        const GRID: usize = 32;
        let mut best_x = sites[i][1];
        let mut best = eval(best_x)?;
        for g in 0..=GRID {
            let x = g as f64 / GRID as f64;
            let r = eval(x)?;
            if score(&r) > score(&best) {
                best = r;
                best_x = x;
            }
        }
        // Golden-section refinement around the best grid point.
        let h = 1.0 / GRID as f64;
        let (mut lo, mut hi) = ((best_x - h).max(0.0), (best_x + h).min(1.0));
        let ratio = 0.5 * (libm::sqrt(5.0) - 1.0);
        let mut x1 = hi - ratio * (hi - lo);
        let mut x2 = lo + ratio * (hi - lo);
        let mut f1 = eval(x1)?;
        let mut f2 = eval(x2)?;
        for _ in 0..60 {
            if score(&f1) >= score(&f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - ratio * (hi - lo);
                f1 = eval(x1)?;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + ratio * (hi - lo);
                f2 = eval(x2)?;
            }
        }
        for (x, r) in [(x1, f1), (x2, f2)] {
            if score(&r) > score(&best) {
                best = r;
                best_x = x;
            }
        }
        if let Some((v, y)) = best {
            if v > current + 1e-15 {
                sites[i] = vec![1.0 - best_x, best_x];
                sites[j] = vec![1.0 - y, y];
                // The pair was optimized jointly; guard against LP slack.
                if !self.feasible(sites)? {
                    let (a_mat, b) = self.affine(sites, j);
                    let lp = self.site_lp(&a_mat, &b, SiteLp::Distance);
                    if let Ok(sol) = lp.minimize() {
                        sites[j].copy_from_slice(&sol.x[..2]);
                        clean_site(&mut sites[j]);
                    }
                }
            }
        }
        Ok(())
    }

    /// The highest-entropy feasible i.i.d. measure: a grid scan plus
    /// bisection toward the uniform point for binary alphabets; uniform
    /// otherwise (restoration fixes it if infeasible).
    fn best_iid(&self) -> Result<Vec<f64>> {
        let q = self.q;
        if q != 2 {
            return Ok(vec![1.0 / q as f64; q]);
        }
        let n = self.num_sites();
        let ok = |x: f64| self.feasible(&vec![vec![1.0 - x, x]; n]);
        const GRID: usize = 100;
        let mut best: Option<f64> = None;
        for g in 0..=GRID {
            let x = g as f64 / GRID as f64;
            if ok(x)? && best.is_none_or(|b| binary_entropy(x) > binary_entropy(b)) {
                best = Some(x);
            }
        }
        let Some(x0) = best else {
            return Ok(vec![0.5, 0.5]);
        };
        if x0 == 0.5 {
            return Ok(vec![0.5, 0.5]);
        }
        let step = if x0 < 0.5 { 1.0 } else { -1.0 } / GRID as f64;
        let (mut good, mut bad) = (x0, x0 + step);
        if ok(bad)? {
            return Ok(vec![1.0 - bad, bad]);
        }
        for _ in 0..60 {
            let mid = 0.5 * (good + bad);
            if ok(mid)? {
                good = mid;
            } else {
                bad = mid;
            }
        }
        Ok(vec![1.0 - good, good])
    }
}

/// Range of `s_i(1)` over a binary site LP, or `None` when infeasible.
fn interval(lp: &LinearProgram) -> Result<Option<(f64, f64)>> {
    let mut objective = vec![0.0; lp.num_vars()];
    objective[1] = 1.0;
    let mut lp = lp.clone();
    lp.set_objective(&objective);
    let lo = match lp.minimize() {
        Ok(sol) => sol.x[1],
        Err(LpError::Infeasible) => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let hi = lp.maximize()?.x[1];
    Ok(Some((
        lo.clamp(0.0, 1.0),
        hi.clamp(lo.clamp(0.0, 1.0), 1.0),
    )))
}

fn clean_site(site: &mut [f64]) {
    site.iter_mut().for_each(|p| *p = p.max(0.0));
    let total: f64 = site.iter().sum();
    site.iter_mut().for_each(|p| *p /= total);
}

struct SiteEntropy;

impl ConcaveObjective for SiteEntropy {
    fn value(&self, s: &[f64]) -> f64 {
        entropy_of(s)
    }

    fn gradient(&self, s: &[f64], grad: &mut [f64]) {
        // The constant −1/ln 2 is invisible along the simplex.
        for (g, &x) in grad.iter_mut().zip(s) {
            *g = -libm::log2(x.max(f64::MIN_POSITIVE));
        }
    }
}

/// Deterministic reduction: highest value, ties to the lexicographically
/// smallest measure.
pub fn best_result(results: impl IntoIterator<Item = HindResult>) -> Option<HindResult> {
    results.into_iter().fold(None, |best, r| match best {
        None => Some(r),
        Some(b) => {
            let better = r.value > b.value
                || (r.value == b.value
                    && r.measure.sites().partial_cmp(b.measure.sites())
                        == Some(core::cmp::Ordering::Less));
            Some(if better { r } else { b })
        }
    })
}

/// Best product measure found for `Γ` on `F_n^d` at relaxation `ε`.
pub fn hind_fixed_n(
    gamma: &ConstraintSet,
    n: usize,
    eps: f64,
    options: &HindOptions,
) -> Result<HindResult> {
    let problem = HindProblem::new(gamma, n, eps)?;
    let mut results = Vec::new();
    for start in problem.starts(options)? {
        if let Some(r) = problem.solve_from(start, options)? {
            results.push(r);
        }
    }
    best_result(results).ok_or(Error::NoFeasibleMeasure)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    /// `(H₂(x) + H₂(y)) / 2`.
    pub value: f64,
    pub x: f64,
    pub y: f64,
}

/// Maximizes `(H₂(x) + H₂(y))/2` subject to `xy ≤ p`. The optimum with
/// `x ≥ y` is returned; `(y, x)` is the symmetric twin.
pub fn curve_optimum_01p(p: f64) -> Result<CurvePoint> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("p = {p} outside [0, 1]")));
    }
    if p == 0.0 {
        // One coordinate is forced to 0; the other is free.
        return Ok(CurvePoint {
            value: 0.5,
            x: 0.5,
            y: 0.0,
        });
    }
    if p >= 0.25 {
        return Ok(CurvePoint {
            value: 1.0,
            x: 0.5,
            y: 0.5,
        });
    }
    // Below 1/4 the maximum sits on xy = p; search x ∈ [√p, 1].
    let f = |x: f64| 0.5 * (binary_entropy(x) + binary_entropy(p / x));
    let lo = libm::sqrt(p);
    const GRID: usize = 2_000;
    let at = |g: usize| lo + (1.0 - lo) * g as f64 / GRID as f64;
    let g_best = (0..=GRID)
        .max_by(|&a, &b| f(at(a)).total_cmp(&f(at(b))))
        .expect("nonempty grid");
    let (mut a, mut b) = (at(g_best.saturating_sub(1)), at((g_best + 1).min(GRID)));
    let ratio = 0.5 * (libm::sqrt(5.0) - 1.0);
    for _ in 0..200 {
        let x1 = b - ratio * (b - a);
        let x2 = a + ratio * (b - a);
        if f(x1) >= f(x2) {
            b = x2;
        } else {
            a = x1;
        }
        if b - a < 1e-15 {
            break;
        }
    }
    let x = 0.5 * (a + b);
    Ok(CurvePoint {
        value: f(x),
        x,
        y: p / x,
    })
}

/// Entropy of the best i.i.d. measure for `Γ_{k,p}`: `H₂(min(p^{1/(k+1)}, 1/2))`.
pub fn iid_rll_bound(k: usize, p: f64) -> f64 {
    let x = libm::pow(p.max(0.0), 1.0 / (k + 1) as f64);
    binary_entropy(x.min(0.5))
}

/// Lifts a 1-D measure on `F_n` to `F_n^d`: the site at `v` copies site
/// `(Σ v_i) mod n`. Every axis-parallel row is a rotation of `mu_hat`.
pub fn axial_lift(mu_hat: &SiteProductMeasure, dim: usize) -> Result<SiteProductMeasure> {
    if mu_hat.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: mu_hat.dim(),
        });
    }
    if dim == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let n = mu_hat.side();
    let cells = n
        .checked_pow(dim as u32)
        .ok_or_else(|| Error::invalid("lifted measure too large"))?;
    let sites = (0..cells)
        .map(|v| {
            let s: usize = cell_coords(v, dim, n).iter().sum();
            mu_hat.site(s % n).to_vec()
        })
        .collect();
    SiteProductMeasure::new(dim, n, sites)
}

/// An array of nonempty symbol sets on `F_n^d`, stored as bit masks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiChoiceWord {
    dim: usize,
    side: usize,
    alphabet_size: usize,
    cells: Vec<u64>,
}

impl MultiChoiceWord {
    pub fn new(dim: usize, side: usize, alphabet_size: usize, cells: Vec<u64>) -> Result<Self> {
        if alphabet_size == 0 || alphabet_size > 64 {
            return Err(Error::invalid("alphabet size must be in 1..=64"));
        }
        let expected = side
            .checked_pow(dim as u32)
            .ok_or_else(|| Error::invalid("word too large"))?;
        if cells.len() != expected {
            return Err(Error::invalid(format!(
                "expected {expected} cells, got {}",
                cells.len()
            )));
        }
        let full = full_mask(alphabet_size);
        if let Some(c) = cells.iter().find(|&&c| c == 0 || c & !full != 0) {
            return Err(Error::invalid(format!(
                "cell mask {c:#b} is not a nonempty subset of Σ"
            )));
        }
        Ok(Self {
            dim,
            side,
            alphabet_size,
            cells,
        })
    }

    /// Builds a word from explicit symbol lists per cell.
    pub fn from_sets(
        dim: usize,
        side: usize,
        alphabet_size: usize,
        sets: &[&[Symbol]],
    ) -> Result<Self> {
        let cells = sets
            .iter()
            .map(|set| {
                set.iter().fold(0u64, |m, &s| {
                    m | 1u64.checked_shl(u32::from(s)).unwrap_or(0)
                })
            })
            .collect();
        Self::new(dim, side, alphabet_size, cells)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn cells(&self) -> &[u64] {
        &self.cells
    }

    pub fn cell_symbols(&self, index: usize) -> Vec<Symbol> {
        let mask = self.cells[index];
        (0..self.alphabet_size as u8)
            .filter(|&s| mask >> s & 1 == 1)
            .collect()
    }

    /// `∏_v |cell_v|`, or `None` on `u128` overflow.
    pub fn fillings_count(&self) -> Option<u128> {
        self.cells
            .iter()
            .try_fold(1u128, |acc, c| acc.checked_mul(u128::from(c.count_ones())))
    }

    pub fn log2_fillings(&self) -> f64 {
        self.cells
            .iter()
            .map(|c| libm::log2(f64::from(c.count_ones())))
            .sum()
    }

    /// `(1/n^d)·log₂ |fillings|`.
    pub fn entropy_rate(&self) -> f64 {
        self.log2_fillings() / self.cells.len() as f64
    }

    /// The product measure that is uniform on each cell's set.
    pub fn uniform_measure(&self) -> Result<SiteProductMeasure> {
        let q = self.alphabet_size;
        let sites = self
            .cells
            .iter()
            .map(|&c| {
                let size = f64::from(c.count_ones());
                (0..q)
                    .map(|s| if c >> s & 1 == 1 { 1.0 / size } else { 0.0 })
                    .collect()
            })
            .collect();
        SiteProductMeasure::new(self.dim, self.side, sites)
    }
}

fn full_mask(q: usize) -> u64 {
    if q == 64 {
        u64::MAX
    } else {
        (1u64 << q) - 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HindComResult {
    /// `(1/n^d)·log₂ |fillings(word)|`.
    pub value: f64,
    pub word: MultiChoiceWord,
}

/// Branch-and-bound over multi-choice words whose fillings all avoid the
/// forbidden patterns at every cyclic offset. Cells are assigned in
/// storage order, larger sets first; a branch dies as soon as a completed
/// window can be filled with a forbidden pattern.
#[derive(Debug, Clone)]
pub struct CombinatorialSearch {
    dim: usize,
    side: usize,
    q: usize,
    num_cells: usize,
    /// `(cells, forbidden patterns)` per window.
    windows: Vec<(Vec<usize>, usize)>,
    sets: Vec<Vec<Vec<Symbol>>>,
    completes_at: Vec<Vec<usize>>,
    masks: Vec<u64>,
    log2_max: f64,
}

impl CombinatorialSearch {
    pub fn new(forbidden: &[ForbiddenSet], side: usize) -> Result<Self> {
        let first = forbidden
            .first()
            .ok_or_else(|| Error::invalid("no forbidden sets given"))?;
        let (dim, q) = (first.dim(), first.alphabet().size());
        if forbidden
            .iter()
            .any(|f| f.dim() != dim || f.alphabet().size() != q)
        {
            return Err(Error::ShapeMismatch);
        }
        if q > 16 {
            return Err(Error::invalid("alphabet too large for subset search"));
        }
        let num_cells = side
            .checked_pow(dim as u32)
            .filter(|&c| c > 0)
            .ok_or_else(|| Error::invalid("window side out of range"))?;
        let bits = num_cells as f64 * libm::log2(((1u64 << q) - 1) as f64);
        if bits > f64::from(PRUNED_LIMIT_BITS) {
            return Err(Error::SearchSpaceTooLarge {
                bits,
                limit: PRUNED_LIMIT_BITS,
            });
        }
        let mut windows = Vec::new();
        let mut completes_at = vec![Vec::new(); num_cells];
        for (g, f) in forbidden.iter().enumerate() {
            if f.patterns().is_empty() {
                continue;
            }
            for v in 0..num_cells {
                let cells = f.shape().wrapped_cells(&cell_coords(v, dim, side), side);
                let last = *cells.iter().max().expect("nonempty shape");
                completes_at[last].push(windows.len());
                windows.push((cells, g));
            }
        }
        let mut masks: Vec<u64> = (1..=full_mask(q)).collect();
        masks.sort_by_key(|m| (core::cmp::Reverse(m.count_ones()), *m));
        Ok(Self {
            dim,
            side,
            q,
            num_cells,
            windows,
            sets: forbidden.iter().map(|f| f.patterns().to_vec()).collect(),
            completes_at,
            masks,
            log2_max: libm::log2(q as f64),
        })
    }

    /// Candidate sets for the first cell, in search order.
    pub fn first_cell_choices(&self) -> &[u64] {
        &self.masks
    }

    /// Best word whose first cell is `first`, if it beats `floor` (a total
    /// `log₂` score).
    pub fn best_with_first(&self, first: u64, floor: f64) -> Option<HindComResult> {
        let mut cells = vec![0u64; self.num_cells];
        cells[0] = first;
        if !self.windows_ok(&cells, 0) {
            return None;
        }
        let mut best = (floor, None);
        let score = libm::log2(f64::from(first.count_ones()));
        self.search(&mut cells, 1, score, &mut best);
        best.1.map(|cells| self.finish(cells))
    }

    pub fn best(&self) -> Result<HindComResult> {
        let mut best: Option<HindComResult> = None;
        for &m in &self.masks {
            let floor = best
                .as_ref()
                .map_or(-1.0, |b| b.value * self.num_cells as f64);
            if let Some(r) = self.best_with_first(m, floor) {
                best = Some(r);
            }
        }
        best.ok_or(Error::EmptyLanguage)
    }

    fn finish(&self, cells: Vec<u64>) -> HindComResult {
        let word = MultiChoiceWord {
            dim: self.dim,
            side: self.side,
            alphabet_size: self.q,
            cells,
        };
        HindComResult {
            value: word.entropy_rate(),
            word,
        }
    }

    fn search(
        &self,
        cells: &mut [u64],
        cell: usize,
        score: f64,
        best: &mut (f64, Option<Vec<u64>>),
    ) {
        let remaining = (self.num_cells - cell) as f64;
        if score + remaining * self.log2_max <= best.0 + 1e-12 {
            return;
        }
        if cell == self.num_cells {
            *best = (score, Some(cells.to_vec()));
            return;
        }
        for &m in &self.masks {
            cells[cell] = m;
            if self.windows_ok(cells, cell) {
                self.search(
                    cells,
                    cell + 1,
                    score + libm::log2(f64::from(m.count_ones())),
                    best,
                );
            }
        }
        cells[cell] = 0;
    }

    /// No window completed at `cell` admits a forbidden filling.
    fn windows_ok(&self, cells: &[u64], cell: usize) -> bool {
        self.completes_at[cell].iter().all(|&w| {
            let (win, g) = &self.windows[w];
            !self.sets[*g].iter().any(|phi| fillable(cells, win, phi))
        })
    }
}

/// Whether some filling of the window cells reads `phi` (a cell visited
/// twice must read the same symbol both times).
fn fillable(cells: &[u64], window: &[usize], phi: &[Symbol]) -> bool {
    window.iter().zip(phi).enumerate().all(|(l, (&c, &s))| {
        cells[c] >> s & 1 == 1
            && window[..l]
                .iter()
                .zip(phi)
                .all(|(&c2, &s2)| c2 != c || s2 == s)
    })
}

/// Combinatorial independence entropy at side `n`.
pub fn hind_com_fixed_n(forbidden: &ForbiddenSet, n: usize) -> Result<HindComResult> {
    CombinatorialSearch::new(core::slice::from_ref(forbidden), n)?.best()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HindRow {
    pub n: usize,
    /// `None` when no feasible product measure was found at this `n`.
    pub result: Option<HindResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HindBoundReport {
    pub dim: usize,
    pub eps: f64,
    pub rows: Vec<HindRow>,
    pub best_n: usize,
    pub best: HindResult,
    /// `axial_lift(best.measure, dim)`.
    pub lift: SiteProductMeasure,
    pub lift_rate: f64,
    /// Largest entrywise gap between an axis marginal of the lift and the
    /// 1-D averaged marginal.
    pub lift_axis_gap: f64,
    /// `H₂(min(p^{1/(k+1)}, 1/2))` when `Γ = Γ_{k,p}`.
    pub iid_closed_form: Option<f64>,
    /// The two-parameter optimum when `Γ = Γ_{1,p}`.
    pub curve: Option<CurvePoint>,
    /// Certified lower bound on the capacity of `Γ^{⊗d}`.
    pub lower_bound: f64,
}

/// Best product measure over `n_list` and its lift to dimension `dim`.
/// Sides shorter than the window are skipped.
pub fn hind_bound_report(
    gamma: &ConstraintSet,
    dim: usize,
    eps: f64,
    n_list: &[usize],
    options: &HindOptions,
) -> Result<HindBoundReport> {
    // Sides shorter than the window would wrap it onto itself.
    let rows = n_list
        .iter()
        .filter(|&&n| n >= gamma.shape().len())
        .map(|&n| match hind_fixed_n(gamma, n, eps, options) {
            Ok(r) => Ok(HindRow { n, result: Some(r) }),
            Err(Error::NoFeasibleMeasure) => Ok(HindRow { n, result: None }),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>>>()?;
    assemble_report(gamma, dim, eps, rows)
}

/// Builds the report from precomputed rows (used by parallel drivers).
pub fn assemble_report(
    gamma: &ConstraintSet,
    dim: usize,
    eps: f64,
    rows: Vec<HindRow>,
) -> Result<HindBoundReport> {
    let (best_n, best) = rows
        .iter()
        .filter_map(|r| r.result.as_ref().map(|res| (r.n, res)))
        .fold(None::<(usize, &HindResult)>, |acc, (n, r)| match acc {
            Some((_, b)) if b.value >= r.value => acc,
            _ => Some((n, r)),
        })
        .ok_or(Error::NoFeasibleMeasure)?;
    let best = best.clone();
    if gamma.shape().dim() != 1 {
        return Err(Error::invalid("the lift needs a 1-D Γ"));
    }
    let lift = axial_lift(&best.measure, dim)?;
    let lift_rate = lift.entropy_rate();
    let k = gamma.shape().len();
    let base = best.measure.averaged_marginal(gamma.shape())?;
    let mut lift_axis_gap = 0.0f64;
    for axis in 0..dim {
        let along = lift.averaged_marginal(&Shape::axis_segment(dim, axis, k))?;
        for (a, b) in along.probs().iter().zip(base.probs()) {
            lift_axis_gap = lift_axis_gap.max((a - b).abs());
        }
    }
    let rll = gamma.as_rll();
    let iid_closed_form = rll.map(|(k, p)| iid_rll_bound(k, p));
    let curve = match rll {
        Some((1, p)) => Some(curve_optimum_01p(p)?),
        _ => None,
    };
    Ok(HindBoundReport {
        dim,
        eps,
        rows,
        best_n,
        lower_bound: best.value,
        best,
        lift,
        lift_rate,
        lift_axis_gap,
        iid_closed_form,
        curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Alphabet;
    use crate::scs::rll_constraint;

    fn quick() -> HindOptions {
        HindOptions {
            restarts: 4,
            ..HindOptions::default()
        }
    }

    #[test]
    fn full_simplex_gives_one_bit() {
        let g = ConstraintSet::simplex(Alphabet::binary(), Shape::segment(3)).unwrap();
        let r = hind_fixed_n(&g, 4, 0.0, &quick()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!(r.certified());
        for s in r.measure.sites() {
            assert!((s[0] - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn iid_rll_example() {
        let g = rll_constraint(2, 0.05).unwrap();
        let r = hind_fixed_n(&g, 3, 0.0, &quick()).unwrap();
        let iid = binary_entropy(libm::pow(0.05, 1.0 / 3.0));
        assert!(r.value >= iid - 1e-9, "{} < {iid}", r.value);
        assert!(r.certified());
        assert!(r.distance <= CERTIFICATE_TOLERANCE);
    }

    #[test]
    fn symmetric_curve_point() {
        let g = rll_constraint(1, 0.2).unwrap();
        let r = hind_fixed_n(&g, 2, 0.0, &quick()).unwrap();
        let x = libm::sqrt(0.2);
        assert!((r.value - binary_entropy(x)).abs() < 1e-6, "{}", r.value);
        for s in r.measure.sites() {
            assert!((s[1] - x).abs() < 1e-3);
        }
    }

    #[test]
    fn matches_curve_optimum_for_two_sites() {
        for p in [0.01, 0.05, 0.1, 0.2] {
            let g = rll_constraint(1, p).unwrap();
            let r = hind_fixed_n(&g, 2, 0.0, &quick()).unwrap();
            let c = curve_optimum_01p(p).unwrap();
            assert!(
                (r.value - c.value).abs() < 1e-4,
                "p {p}: {} vs {}",
                r.value,
                c.value
            );
        }
    }

    #[test]
    fn fully_constrained_rll_gives_half() {
        let g = rll_constraint(1, 0.0).unwrap();
        let r = hind_fixed_n(&g, 2, 0.0, &quick()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-9);
    }

    #[test]
    fn eps_monotone() {
        let g = rll_constraint(1, 0.1).unwrap();
        let mut last = 0.0;
        for eps in [0.0, 0.01, 0.05, 0.2] {
            let r = hind_fixed_n(&g, 2, eps, &quick()).unwrap();
            assert!(r.certified());
            assert!(r.value >= last - 1e-9, "eps {eps}");
            last = r.value;
        }
        assert!((last - 1.0).abs() < 1e-9);
    }

    #[test]
    fn restoration_reaches_periodic_targets() {
        // μ(01) = μ(10) = 1/2 forces alternation; odd n cannot host it.
        let mut c01 = vec![0.0; 4];
        c01[1] = 1.0;
        let mut c10 = vec![0.0; 4];
        c10[2] = 1.0;
        let g = ConstraintSet::new(
            Alphabet::binary(),
            Shape::segment(2),
            vec![
                crate::scs::LinearConstraint::eq(c01, 0.5),
                crate::scs::LinearConstraint::eq(c10, 0.5),
            ],
        )
        .unwrap();
        let r = hind_fixed_n(&g, 4, 0.0, &quick()).unwrap();
        assert!(r.certified());
        assert!(r.value.abs() < 1e-6, "{r:?}");
        assert_eq!(
            hind_fixed_n(&g, 3, 0.0, &quick()),
            Err(Error::NoFeasibleMeasure)
        );
    }

    #[test]
    fn ternary_sites_use_frank_wolfe() {
        // Forbid "22" on a ternary alphabet with n = 2: a₂·b₂ = 0, so the
        // best is one site uniform on Σ and the other uniform on {0, 1}.
        let f =
            ForbiddenSet::new(Alphabet::with_size(3), Shape::segment(2), vec![vec![2, 2]]).unwrap();
        let g = f.to_constraint_set().unwrap();
        let r = hind_fixed_n(&g, 2, 0.0, &quick()).unwrap();
        let want = 0.5 * (libm::log2(3.0) + 1.0);
        assert!(r.certified());
        assert!((r.value - want).abs() < 1e-4, "{}", r.value);
    }

    #[test]
    fn curve_examples() {
        let c = curve_optimum_01p(0.2).unwrap();
        assert!((c.x - libm::sqrt(0.2)).abs() < 1e-6 && (c.y - libm::sqrt(0.2)).abs() < 1e-6);
        let c = curve_optimum_01p(0.01).unwrap();
        assert!(
            (c.x - 0.454).abs() < 2e-3 && (c.y - 0.022).abs() < 2e-3,
            "{c:?}"
        );
        assert!(c.x >= c.y);
        let c = curve_optimum_01p(1e-6).unwrap();
        assert!((0.499..=0.502).contains(&c.value));
        assert_eq!(curve_optimum_01p(0.25).unwrap().value, 1.0);
        assert_eq!(curve_optimum_01p(0.0).unwrap().value, 0.5);
        assert!(curve_optimum_01p(-0.1).is_err());
    }

    #[test]
    fn curve_value_is_nondecreasing() {
        let mut last = 0.0;
        for i in 1..=250 {
            let v = curve_optimum_01p(i as f64 / 1000.0).unwrap().value;
            assert!(v >= last - 1e-12);
            last = v;
        }
    }

    #[test]
    fn lift_examples() {
        let mu = SiteProductMeasure::bernoulli(&[0.1, 0.2, 0.3]).unwrap();
        let lift = axial_lift(&mu, 2).unwrap();
        // Cell (1, 2) has index 1 + 2·3 = 7.
        assert_eq!(lift.site(7), mu.site(0));
        assert!((lift.entropy_rate() - mu.entropy_rate()).abs() < 1e-12);
        let constant = SiteProductMeasure::bernoulli(&[0.3; 4]).unwrap();
        let lifted = axial_lift(&constant, 3).unwrap();
        assert!(lifted.sites().iter().all(|s| s == constant.site(0)));
    }

    #[test]
    fn fillings() {
        let w = MultiChoiceWord::from_sets(1, 4, 2, &[&[0], &[0, 1], &[0], &[0, 1]]).unwrap();
        assert_eq!(w.fillings_count(), Some(4));
        let single = MultiChoiceWord::new(2, 3, 2, vec![1; 9]).unwrap();
        assert_eq!(single.fillings_count(), Some(1));
        let full = MultiChoiceWord::new(2, 3, 3, vec![7; 9]).unwrap();
        assert_eq!(full.fillings_count(), Some(3u128.pow(9)));
        assert!(MultiChoiceWord::new(1, 2, 2, vec![0, 1]).is_err());
        assert!(MultiChoiceWord::new(1, 2, 2, vec![4, 1]).is_err());
    }

    #[test]
    fn combinatorial_examples() {
        let f = ForbiddenSet::binary_1d(&["11"]).unwrap();
        let r = hind_com_fixed_n(&f, 4).unwrap();
        assert_eq!(r.value, 0.5);
        let sizes: Vec<u32> = r.word.cells().iter().map(|c| c.count_ones()).collect();
        assert!(sizes == [2, 1, 2, 1] || sizes == [1, 2, 1, 2], "{sizes:?}");
        assert!(hind_com_fixed_n(&f, 5).unwrap().value < 0.5);
        let none = ForbiddenSet::new(Alphabet::with_size(3), Shape::segment(2), vec![]).unwrap();
        let r = hind_com_fixed_n(&none, 3).unwrap();
        assert!((r.value - libm::log2(3.0)).abs() < 1e-12);
        assert!(r.word.cells().iter().all(|&c| c == 7));
    }

    #[test]
    fn combinatorial_matches_brute_force() {
        let f = ForbiddenSet::binary_1d(&["101", "111"]).unwrap();
        for n in 3..=6 {
            let search = CombinatorialSearch::new(core::slice::from_ref(&f), n).unwrap();
            let got = search.best().unwrap().value;
            // Brute force over all 3^n words.
            let mut best = f64::NEG_INFINITY;
            for code in 0..3usize.pow(n as u32) {
                let mut c = code;
                let cells: Vec<u64> = (0..n)
                    .map(|_| {
                        let m = (c % 3) as u64 + 1;
                        c /= 3;
                        m
                    })
                    .collect();
                let ok = (0..n).all(|v| search.windows_ok(&cells, v));
                if ok {
                    let w = MultiChoiceWord::new(1, n, 2, cells).unwrap();
                    best = best.max(w.entropy_rate());
                }
            }
            assert!((got - best).abs() < 1e-12, "n {n}");
        }
    }

    #[test]
    fn report_for_rll() {
        let g = rll_constraint(1, 0.01).unwrap();
        let r = hind_bound_report(&g, 2, 0.0, &[2], &quick()).unwrap();
        let c = curve_optimum_01p(0.01).unwrap();
        assert!((r.lower_bound - c.value).abs() < 1e-4);
        assert!((r.lift_rate - r.best.value).abs() < 1e-12);
        assert!(r.lift_axis_gap < 1e-12);
        assert_eq!(r.curve.map(|c| c.x), Some(c.x));
    }
}
