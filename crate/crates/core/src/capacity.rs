//! Capacity of one-dimensional semiconstrained systems.
//!
//! For a convex `Γ ⊆ P(Σ^k)` the capacity is the largest conditional
//! entropy `H(η) − H(η restricted to the first k−1 symbols)` over
//! shift-invariant `η ∈ Γ`. This equals `log₂|Σ| − H(η | μ_η)` with
//! `μ_η(φa) = |Σ|^{-1}·Σ_{a'} η(φa')`:
//!
//! ```text
//! H(η|μ_η) = Σ η(φa)·log₂ η(φa) − Σ η(φa)·log₂(P(φ)/|Σ|)
//!          = −H(η) + H(P) + log₂|Σ|
//! ```
//!
//! where `P` is the prefix marginal. The conditional-entropy form is the
//! one optimized; [`relative_entropy_form`] evaluates the other for tests.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::count::Counter;
use crate::fw::{self, ConcaveObjective, FwOptions, Polytope};
use crate::lattice::{pattern_count, PatternDistribution, Shape};
use crate::lp::{LinearProgram, LpError, Relation};
use crate::scs::{ConstraintSet, ForbiddenSet, System};
use crate::{xlog2x, Error, Result};

/// The linear equations cutting out shift-invariant `η ∈ P(Σ^k)`, `d = 1`:
/// `Σ_a η(a φ) = Σ_a η(φ a)` for every `φ ∈ Σ^{k-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftInvariancePolytope {
    k: usize,
    alphabet_size: usize,
    equations: Vec<Vec<f64>>,
}

impl ShiftInvariancePolytope {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    /// One coefficient row per `φ`, each meaning `row · η = 0`.
    pub fn equations(&self) -> &[Vec<f64>] {
        &self.equations
    }

    pub fn contains(&self, probs: &[f64], tol: f64) -> bool {
        self.equations
            .iter()
            .all(|row| fw::dot(row, probs).abs() <= tol)
    }

    pub fn add_to_lp(&self, lp: &mut LinearProgram, offset: usize) {
        let total = lp.num_vars();
        for eq in &self.equations {
            let mut row = vec![0.0; total];
            row[offset..offset + eq.len()].copy_from_slice(eq);
            lp.add_row(row, Relation::Eq, 0.0);
        }
    }
}

pub fn shift_invariant_equations(
    k: usize,
    alphabet_size: usize,
) -> Result<ShiftInvariancePolytope> {
    if k == 0 {
        return Err(Error::invalid("window length must be positive"));
    }
    let q = alphabet_size;
    let m = pattern_count(q, k)?;
    let mut equations = Vec::new();
    if k >= 2 {
        let inner = pattern_count(q, k - 1)?;
        for phi in 0..inner {
            let mut row = vec![0.0; m];
            for a in 0..q {
                // a·φ  (a is the leading digit)
                row[a * inner + phi] += 1.0;
                // φ·a
                row[phi * q + a] -= 1.0;
            }
            equations.push(row);
        }
    }
    Ok(ShiftInvariancePolytope {
        k,
        alphabet_size: q,
        equations,
    })
}

/// `f(η) = H(η) − H(prefix marginal of η)` on `Σ^k`.
#[derive(Debug, Clone)]
pub struct ConditionalEntropy {
    alphabet_size: usize,
    k: usize,
}

impl ConditionalEntropy {
    pub fn new(alphabet_size: usize, k: usize) -> Self {
        Self { alphabet_size, k }
    }

    fn prefix_marginal(&self, eta: &[f64]) -> Vec<f64> {
        let inner = eta.len() / self.alphabet_size;
        let mut p = vec![0.0; inner.max(1)];
        if self.k == 1 {
            p[0] = eta.iter().sum();
        } else {
            for (i, &e) in eta.iter().enumerate() {
                p[i / self.alphabet_size] += e;
            }
        }
        p
    }
}

impl ConcaveObjective for ConditionalEntropy {
    fn value(&self, eta: &[f64]) -> f64 {
        let h: f64 = -eta.iter().map(|&e| xlog2x(e)).sum::<f64>();
        if self.k == 1 {
            return h;
        }
        let hp: f64 = -self
            .prefix_marginal(eta)
            .iter()
            .map(|&e| xlog2x(e))
            .sum::<f64>();
        h - hp
    }

    fn gradient(&self, eta: &[f64], grad: &mut [f64]) {
        // ∂f/∂η(φa) = log₂ P(φ) − log₂ η(φa); zero entries are clamped.
        let floor = f64::MIN_POSITIVE;
        let p = self.prefix_marginal(eta);
        for (i, (g, &e)) in grad.iter_mut().zip(eta).enumerate() {
            // For k = 1 this is ∂H/∂η up to the constant −1/ln 2, which no
            // feasible direction can see.
            let prefix = if self.k == 1 {
                1.0
            } else {
                p[i / self.alphabet_size]
            };
            *g = libm::log2(prefix.max(floor)) - libm::log2(e.max(floor));
        }
    }
}

/// `log₂|Σ| − H(η | μ_η)` with `μ_η(φa) = |Σ|^{-1}·Σ_{a'} η(φa')`.
pub fn relative_entropy_form(eta: &[f64], alphabet_size: usize) -> f64 {
    let q = alphabet_size;
    let mut rel = 0.0;
    for (i, &e) in eta.iter().enumerate() {
        if e <= 0.0 {
            continue;
        }
        let base = i - i % q;
        let prefix: f64 = eta[base..base + q].iter().sum();
        let mu = prefix / q as f64;
        rel += e * libm::log2(e / mu);
    }
    libm::log2(q as f64) - rel
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityResult {
    /// Bits per symbol.
    pub value: f64,
    pub optimizer: PatternDistribution,
    pub iterations: usize,
    pub duality_gap: f64,
    /// False when the iteration cap was hit before the gap target.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityOptions {
    pub fw: FwOptions,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for CapacityOptions {
    fn default() -> Self {
        Self {
            fw: FwOptions::default(),
            restarts: 5,
            seed: 0,
        }
    }
}

/// Capacity of a 1-D `Γ` over the window `[k]`.
pub fn capacity_1d(gamma: &ConstraintSet) -> Result<CapacityResult> {
    capacity_1d_with(gamma, &CapacityOptions::default())
}

pub fn capacity_1d_with(
    gamma: &ConstraintSet,
    options: &CapacityOptions,
) -> Result<CapacityResult> {
    let k = gamma.shape().len();
    if gamma.shape() != &Shape::segment(k) {
        return Err(Error::invalid("capacity_1d needs Γ over a 1-D segment [k]"));
    }
    let q = gamma.alphabet().size();
    let m = gamma.num_patterns();
    let shift = shift_invariant_equations(k, q)?;
    let mut lp = LinearProgram::new(m);
    gamma.add_to_lp(&mut lp, 0);
    shift.add_to_lp(&mut lp, 0);
    let polytope = Polytope::new(lp, m);
    let objective = ConditionalEntropy::new(q, k);

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut best: Option<fw::FwResult> = None;
    for _ in 0..options.restarts.max(1) {
        let direction: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() - 0.5).collect();
        let start = polytope.linear_max(&direction).map_err(|e| match e {
            LpError::Infeasible => Error::EmptyConstraintSet,
            e => Error::Lp(e),
        })?;
        let res = fw::maximize(&objective, &polytope, start, &options.fw)?;
        let better = match &best {
            None => true,
            Some(b) => res.value > b.value,
        };
        if better {
            best = Some(res);
        }
    }
    let best = best.expect("at least one restart");
    let mut probs = best.x;
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p = p.max(0.0) / total);
    Ok(CapacityResult {
        value: best.value,
        optimizer: PatternDistribution::new(gamma.shape().clone(), q, probs)?,
        iterations: best.iterations,
        duality_gap: best.gap,
        converged: best.converged,
    })
}

/// `log₂ ρ(A)` for the de Bruijn transfer matrix on `(k−1)`-grams with the
/// forbidden `k`-words removed.
pub fn transfer_matrix_capacity(forbidden: &ForbiddenSet) -> Result<f64> {
    if forbidden.dim() != 1 || forbidden.shape() != &Shape::segment(forbidden.shape().len()) {
        return Err(Error::invalid(
            "transfer matrix needs 1-D patterns over a segment",
        ));
    }
    let q = forbidden.alphabet().size();
    let k = forbidden.shape().len();
    let states = pattern_count(q, k.saturating_sub(1))?;
    let words = pattern_count(q, k)?;
    let mut banned = vec![false; words];
    for p in forbidden.patterns() {
        banned[crate::lattice::pattern_index(q, p)] = true;
    }
    // edges[u] lists successors v (with multiplicity for k = 1).
    let mut edges: Vec<Vec<usize>> = vec![Vec::new(); states];
    for (w, _) in banned.iter().enumerate().filter(|(_, &b)| !b) {
        let (u, v) = if k == 1 { (0, 0) } else { (w / q, w % states) };
        edges[u].push(v);
    }
    spectral_radius(&edges).map(libm::log2)
}

/// Perron root by power iteration on `A + I`, which is aperiodic. The
/// Collatz–Wielandt ratios `min/max ((A+I)x)_i / x_i` bracket the root.
fn spectral_radius(edges: &[Vec<usize>]) -> Result<f64> {
    let n = edges.len();
    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    let mut upper = f64::INFINITY;
    for _ in 0..1_000_000 {
        y.copy_from_slice(&x);
        for (u, succ) in edges.iter().enumerate() {
            for &v in succ {
                y[u] += x[v];
            }
        }
        let (lower, hi) = x
            .iter()
            .zip(&y)
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), (&xi, &yi)| {
                (lo.min(yi / xi), hi.max(yi / xi))
            });
        upper = hi;
        let norm = y.iter().fold(0.0f64, |a, &b| a.max(b));
        y.iter_mut().for_each(|v| *v /= norm);
        let moved = x
            .iter()
            .zip(&y)
            .fold(0.0f64, |a, (xi, yi)| a.max((xi - yi).abs()));
        core::mem::swap(&mut x, &mut y);
        if upper - lower <= 1e-12 * upper || moved <= 1e-15 {
            break;
        }
    }
    let rho = upper - 1.0;
    if rho < 1.0 - 1e-9 {
        // Perron roots of nonzero 0/1 matrices are either 0 or ≥ 1.
        return Err(Error::EmptyLanguage);
    }
    Ok(rho)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityRow {
    pub n: usize,
    pub count: u128,
    /// `n^{-d}·log₂ count`, or `-∞` when the count is zero.
    pub rate: f64,
}

/// Counts `|B_n(B_ε(Γ))|` for each `n` and normalizes.
pub fn internal_capacity_sequence(
    system: &System,
    eps: f64,
    ns: impl IntoIterator<Item = usize>,
) -> Result<Vec<CapacityRow>> {
    let mut rows = Vec::new();
    for n in ns {
        let count = Counter::cyclic(n, system, eps)?.count();
        rows.push(capacity_row(n, system.dim(), count));
    }
    Ok(rows)
}

pub fn capacity_row(n: usize, dim: usize, count: u128) -> CapacityRow {
    let cells = libm::pow(n as f64, dim as f64);
    let rate = if count == 0 {
        f64::NEG_INFINITY
    } else {
        log2_u128(count) / cells
    };
    CapacityRow { n, count, rate }
}

pub(crate) fn log2_u128(x: u128) -> f64 {
    // Exact for powers of two; otherwise as accurate as the f64 conversion.
    let lz = x.leading_zeros();
    if x.is_power_of_two() {
        return f64::from(127 - lz);
    }
    libm::log2(x as f64)
}

/// The prior-work lower bound `1 + d·(cap − 1)` for axial RLL products.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionBound {
    pub value: f64,
    /// Set when the bound has dropped below zero and says nothing.
    pub degenerate: bool,
}

pub fn product_capacity_lower_bound(cap1: f64, dim: usize) -> DimensionBound {
    let value = 1.0 + dim as f64 * (cap1 - 1.0);
    DimensionBound {
        value,
        degenerate: value < 0.0,
    }
}
