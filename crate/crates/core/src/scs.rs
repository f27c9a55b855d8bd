//! Semiconstrained systems as polytopes of pattern distributions.
//!
//! A [`ConstraintSet`] is the intersection of the probability simplex over
//! `Σ^S` with finitely many linear constraints, so it is always convex.
//! [`AxialSystem`] imposes 1-D constraint sets along the coordinate axes of
//! a `d`-dimensional word, either one per axis (strict product) or on the
//! average over the axes (weak product).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::lattice::{
    empirical_distribution, pattern_count, pattern_index, Alphabet, PatternDistribution, Shape,
    Symbol, Word,
};
use crate::lp::{LinearProgram, LpError, Relation};
use crate::{Error, Result, FEAS_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Eq,
}

/// `coeffs·μ ≤ bound` or `coeffs·μ = bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub coeffs: Vec<f64>,
    pub bound: f64,
    pub sense: Sense,
}

impl LinearConstraint {
    pub fn le(coeffs: Vec<f64>, bound: f64) -> Self {
        Self {
            coeffs,
            bound,
            sense: Sense::Le,
        }
    }

    pub fn eq(coeffs: Vec<f64>, bound: f64) -> Self {
        Self {
            coeffs,
            bound,
            sense: Sense::Eq,
        }
    }

    /// `μ(pattern) = 0`.
    pub fn forbid(num_patterns: usize, index: usize) -> Self {
        let mut coeffs = vec![0.0; num_patterns];
        coeffs[index] = 1.0;
        Self::eq(coeffs, 0.0)
    }

    /// True for caps `c·μ ≤ b` with `c ≥ 0`: partial counts can only grow
    /// toward such a bound. Zero-equalities with `c ≥ 0` qualify as well.
    pub fn is_cap(&self) -> bool {
        let nonneg = self.coeffs.iter().all(|&c| c >= 0.0);
        match self.sense {
            Sense::Le => nonneg,
            Sense::Eq => nonneg && self.bound == 0.0,
        }
    }

    pub fn value(&self, probs: &[f64]) -> f64 {
        self.coeffs.iter().zip(probs).map(|(c, p)| c * p).sum()
    }

    pub fn is_satisfied(&self, probs: &[f64], tol: f64) -> bool {
        let v = self.value(probs);
        match self.sense {
            Sense::Le => v <= self.bound + tol,
            Sense::Eq => (v - self.bound).abs() <= tol,
        }
    }

    fn relation(&self) -> Relation {
        match self.sense {
            Sense::Le => Relation::Le,
            Sense::Eq => Relation::Eq,
        }
    }
}

/// A polytope `Γ ⊆ P(Σ^S)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    alphabet: Alphabet,
    shape: Shape,
    constraints: Vec<LinearConstraint>,
}

impl ConstraintSet {
    pub fn new(
        alphabet: Alphabet,
        shape: Shape,
        constraints: Vec<LinearConstraint>,
    ) -> Result<Self> {
        let m = pattern_count(alphabet.size(), shape.len())?;
        for (i, c) in constraints.iter().enumerate() {
            if c.coeffs.len() != m {
                return Err(Error::invalid(format!(
                    "constraint {i} has {} coefficients, expected {m}",
                    c.coeffs.len()
                )));
            }
            if !c.bound.is_finite() || c.coeffs.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid(format!(
                    "constraint {i} has non-finite entries"
                )));
            }
        }
        Ok(Self {
            alphabet,
            shape,
            constraints,
        })
    }

    /// The whole simplex `P(Σ^S)`.
    pub fn simplex(alphabet: Alphabet, shape: Shape) -> Result<Self> {
        Self::new(alphabet, shape, Vec::new())
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn num_patterns(&self) -> usize {
        pattern_count(self.alphabet.size(), self.shape.len()).expect("checked at construction")
    }

    /// Membership of a probability vector, within `tol` per constraint.
    pub fn contains_probs(&self, probs: &[f64], tol: f64) -> bool {
        self.constraints.iter().all(|c| c.is_satisfied(probs, tol))
    }

    pub fn contains(&self, mu: &PatternDistribution) -> Result<bool> {
        self.check_distribution(mu)?;
        Ok(self.contains_probs(mu.probs(), FEAS_TOLERANCE))
    }

    /// Adds `ν ∈ Γ` (simplex row included) on variables `offset..offset+m`.
    pub fn add_to_lp(&self, lp: &mut LinearProgram, offset: usize) {
        let m = self.num_patterns();
        let total = lp.num_vars();
        let mut simplex = vec![0.0; total];
        simplex[offset..offset + m]
            .iter_mut()
            .for_each(|c| *c = 1.0);
        lp.add_row(simplex, Relation::Eq, 1.0);
        for c in &self.constraints {
            let mut row = vec![0.0; total];
            row[offset..offset + m].copy_from_slice(&c.coeffs);
            lp.add_row(row, c.relation(), c.bound);
        }
    }

    /// Whether the polytope has no points (LP feasibility).
    pub fn is_empty(&self) -> bool {
        let mut lp = LinearProgram::new(self.num_patterns());
        self.add_to_lp(&mut lp, 0);
        matches!(lp.feasible_point(), Err(LpError::Infeasible))
    }

    /// Some point of `Γ`, if there is one.
    pub fn feasible_point(&self) -> Result<PatternDistribution> {
        let mut lp = LinearProgram::new(self.num_patterns());
        self.add_to_lp(&mut lp, 0);
        let x = lp.feasible_point().map_err(|e| match e {
            LpError::Infeasible => Error::EmptyConstraintSet,
            e => Error::Lp(e),
        })?;
        PatternDistribution::new(self.shape.clone(), self.alphabet.size(), x)
    }

    /// Largest minus smallest coefficient; bounds how far a TV move of size
    /// `ε` can shift `c·μ`.
    pub(crate) fn coefficient_span(constraint: &LinearConstraint) -> f64 {
        let (lo, hi) = constraint
            .coeffs
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| {
                (lo.min(c), hi.max(c))
            });
        if lo.is_finite() {
            hi - lo
        } else {
            0.0
        }
    }

    /// `Some((k, p))` when this set is exactly `Γ_{k,p}`.
    pub fn as_rll(&self) -> Option<(usize, f64)> {
        let len = self.shape.len();
        if self.alphabet.size() != 2 || len < 2 || self.shape != Shape::segment(len) {
            return None;
        }
        let [c] = self.constraints.as_slice() else {
            return None;
        };
        let m = c.coeffs.len();
        let is_top = c.coeffs[..m - 1].iter().all(|&x| x == 0.0) && c.coeffs[m - 1] == 1.0;
        (is_top && c.sense == Sense::Le).then_some((len - 1, c.bound))
    }

    fn check_distribution(&self, mu: &PatternDistribution) -> Result<()> {
        if mu.shape() != &self.shape || mu.alphabet_size() != self.alphabet.size() {
            return Err(Error::ShapeMismatch);
        }
        Ok(())
    }
}

/// The `(0,k,p)`-RLL system: binary, window `[k+1]`, `μ(1^{k+1}) ≤ p`.
pub fn rll_constraint(k: usize, p: f64) -> Result<ConstraintSet> {
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("p = {p} outside [0, 1]")));
    }
    let shape = Shape::segment(k + 1);
    let m = pattern_count(2, k + 1)?;
    let mut coeffs = vec![0.0; m];
    coeffs[m - 1] = 1.0;
    ConstraintSet::new(
        Alphabet::binary(),
        shape,
        vec![LinearConstraint::le(coeffs, p)],
    )
}

/// `Γ = {μ : μ(a) = 0 for every forbidden a}`. Forbidding every pattern
/// yields an empty set; check with [`ConstraintSet::is_empty`].
pub fn fully_constrained(
    alphabet: Alphabet,
    shape: Shape,
    forbidden: &[Vec<Symbol>],
) -> Result<ConstraintSet> {
    let q = alphabet.size();
    let m = pattern_count(q, shape.len())?;
    let mut indices = Vec::with_capacity(forbidden.len());
    for pattern in forbidden {
        if pattern.len() != shape.len() || pattern.iter().any(|&a| usize::from(a) >= q) {
            return Err(Error::invalid(format!(
                "forbidden pattern {pattern:?} is not in Σ^S"
            )));
        }
        indices.push(pattern_index(q, pattern));
    }
    indices.sort_unstable();
    indices.dedup();
    let constraints = indices
        .into_iter()
        .map(|i| LinearConstraint::forbid(m, i))
        .collect();
    ConstraintSet::new(alphabet, shape, constraints)
}

/// A list of forbidden patterns over a window shape, typically `F_k^d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForbiddenSet {
    alphabet: Alphabet,
    shape: Shape,
    patterns: Vec<Vec<Symbol>>,
}

impl ForbiddenSet {
    pub fn new(alphabet: Alphabet, shape: Shape, patterns: Vec<Vec<Symbol>>) -> Result<Self> {
        let q = alphabet.size();
        for p in &patterns {
            if p.len() != shape.len() || p.iter().any(|&a| usize::from(a) >= q) {
                return Err(Error::invalid(format!(
                    "forbidden pattern {p:?} is not in Σ^S"
                )));
            }
        }
        let mut patterns = patterns;
        patterns.sort();
        patterns.dedup();
        Ok(Self {
            alphabet,
            shape,
            patterns,
        })
    }

    /// Binary 1-D patterns written as strings, e.g. `["11"]`.
    pub fn binary_1d(patterns: &[&str]) -> Result<Self> {
        let alphabet = Alphabet::binary();
        let k = patterns.first().map_or(1, |p| p.chars().count());
        let parsed = patterns
            .iter()
            .map(|p| alphabet.parse_chars(p))
            .collect::<Result<Vec<_>>>()?;
        Self::new(alphabet, Shape::segment(k), parsed)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn patterns(&self) -> &[Vec<Symbol>] {
        &self.patterns
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    /// The fully constrained SCS `Γ_Φ`.
    pub fn to_constraint_set(&self) -> Result<ConstraintSet> {
        fully_constrained(self.alphabet.clone(), self.shape.clone(), &self.patterns)
    }
}

/// `inf_{ν ∈ Γ} ‖μ − ν‖_TV`, solved as a linear program.
pub fn tv_distance_to_set(mu: &PatternDistribution, gamma: &ConstraintSet) -> Result<f64> {
    gamma.check_distribution(mu)?;
    if gamma.contains_probs(mu.probs(), FEAS_TOLERANCE) {
        return Ok(0.0);
    }
    distance_lp(mu.probs(), gamma)
}

pub(crate) fn distance_lp(probs: &[f64], gamma: &ConstraintSet) -> Result<f64> {
    let m = gamma.num_patterns();
    // Variables: ν (0..m), t (m..2m) with t ≥ |μ − ν|.
    let mut lp = LinearProgram::new(2 * m);
    let mut objective = vec![0.0; 2 * m];
    objective[m..].iter_mut().for_each(|c| *c = 0.5);
    lp.set_objective(&objective);
    gamma.add_to_lp(&mut lp, 0);
    for (a, &p) in probs.iter().enumerate() {
        lp.add_sparse_row(&[(m + a, 1.0), (a, -1.0)], Relation::Ge, -p);
        lp.add_sparse_row(&[(m + a, 1.0), (a, 1.0)], Relation::Ge, p);
    }
    match lp.minimize() {
        Ok(sol) => Ok(sol.objective.max(0.0)),
        Err(LpError::Infeasible) => Err(Error::EmptyConstraintSet),
        Err(e) => Err(Error::Lp(e)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AxialMode {
    /// `Γ_1 ⊗ … ⊗ Γ_d`: each axis separately.
    Strict,
    /// `Γ^⊠d`: the axis-averaged distribution.
    Weak,
}

/// A `d`-dimensional system built from 1-D constraint sets along the axes.
#[derive(Debug, Clone, PartialEq)]
pub struct AxialSystem {
    factors: Vec<ConstraintSet>,
    mode: AxialMode,
}

impl AxialSystem {
    /// `Γ_1 ⊗ … ⊗ Γ_d`; every factor is 1-D over a shape containing 0.
    pub fn strict(factors: Vec<ConstraintSet>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::invalid("axial product needs at least one factor"));
        }
        for f in &factors {
            if f.shape().dim() != 1 {
                return Err(Error::DimensionMismatch {
                    expected: 1,
                    found: f.shape().dim(),
                });
            }
            if f.shape().position(&[0]).is_none() {
                return Err(Error::invalid("axial factor shapes must contain 0"));
            }
            if f.alphabet() != factors[0].alphabet() {
                return Err(Error::invalid("axial factors must share the alphabet"));
            }
        }
        Ok(Self {
            factors,
            mode: AxialMode::Strict,
        })
    }

    /// `Γ^⊗d`.
    pub fn strict_power(gamma: ConstraintSet, dim: usize) -> Result<Self> {
        Self::strict(vec![gamma; dim])
    }

    /// `Γ^⊠d`; `Γ` must live on a segment `[k]`.
    pub fn weak(gamma: ConstraintSet, dim: usize) -> Result<Self> {
        if gamma.shape() != &Shape::segment(gamma.shape().len()) {
            return Err(Error::invalid(
                "the weak axial product needs a 1-D constraint set over a segment [k]",
            ));
        }
        let mut sys = Self::strict(vec![gamma; dim])?;
        sys.mode = AxialMode::Weak;
        Ok(sys)
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn mode(&self) -> AxialMode {
        self.mode
    }

    pub fn factors(&self) -> &[ConstraintSet] {
        &self.factors
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.factors[0].alphabet()
    }

    /// `S = ∪ S_i·e_i`.
    pub fn shape(&self) -> Shape {
        let parts: Vec<Shape> = self.factors.iter().map(|f| f.shape().clone()).collect();
        Shape::axial_union(&parts).expect("factors are 1-D")
    }

    /// `S_i·e_i`.
    pub fn axis_shape(&self, axis: usize) -> Shape {
        self.factors[axis]
            .shape()
            .along_axis(self.dim(), axis)
            .expect("factors are 1-D")
    }
}

/// Either a plain constraint set or an axial product.
#[derive(Debug, Clone, PartialEq)]
pub enum System {
    Plain(ConstraintSet),
    Axial(AxialSystem),
}

impl System {
    pub fn dim(&self) -> usize {
        match self {
            System::Plain(g) => g.shape().dim(),
            System::Axial(a) => a.dim(),
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        match self {
            System::Plain(g) => g.alphabet(),
            System::Axial(a) => a.alphabet(),
        }
    }
}

impl From<ConstraintSet> for System {
    fn from(g: ConstraintSet) -> Self {
        System::Plain(g)
    }
}

impl From<AxialSystem> for System {
    fn from(a: AxialSystem) -> Self {
        System::Axial(a)
    }
}

/// Membership of `probs` in `B_ε(Γ)`.
pub(crate) fn within_eps(probs: &[f64], gamma: &ConstraintSet, eps: f64) -> Result<bool> {
    if gamma.contains_probs(probs, FEAS_TOLERANCE) {
        return Ok(true);
    }
    if eps <= 0.0 {
        return Ok(false);
    }
    Ok(distance_lp(probs, gamma)? <= eps + FEAS_TOLERANCE)
}

/// Whether `word` is an admissible block of `B_ε(system)`.
pub fn is_admissible(word: &Word, system: &System, eps: f64) -> Result<bool> {
    if eps < 0.0 || !eps.is_finite() {
        return Err(Error::invalid("eps must be a nonnegative number"));
    }
    if word.dim() != system.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.dim(),
            found: word.dim(),
        });
    }
    if word.alphabet_size() != system.alphabet().size() {
        return Err(Error::ShapeMismatch);
    }
    match system {
        System::Plain(gamma) => {
            let fr = empirical_distribution(word, gamma.shape())?;
            within_eps(fr.probs(), gamma, eps)
        }
        System::Axial(axial) => match axial.mode() {
            AxialMode::Strict => {
                for (i, gamma) in axial.factors().iter().enumerate() {
                    let fr = empirical_distribution(word, &axial.axis_shape(i))?;
                    if !within_eps(fr.probs(), gamma, eps)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            AxialMode::Weak => {
                let gamma = &axial.factors()[0];
                let mut avg = vec![0.0; gamma.num_patterns()];
                for i in 0..axial.dim() {
                    let fr = empirical_distribution(word, &axial.axis_shape(i))?;
                    for (a, p) in avg.iter_mut().zip(fr.probs()) {
                        *a += p / axial.dim() as f64;
                    }
                }
                within_eps(&avg, gamma, eps)
            }
        },
    }
}
