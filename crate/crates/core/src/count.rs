//! Exact counting of admissible blocks.
//!
//! [`Counter`] assigns cells in storage order with a depth-first search.
//! Whenever the last cell of a window gets a symbol, the window's pattern is
//! added to the running counts. Constraints of the form `c·μ ≤ b` with
//! `c ≥ 0` (caps) can only get closer to violation as counts grow, so a
//! branch whose partial counts already exceed `(b + ε·span(c))·N` is cut.
//! Everything else, including `B_ε` membership for `ε > 0`, is decided at
//! the leaves.
//!
//! The exhaustive counter is a separate path built on
//! [`is_admissible`](crate::scs::is_admissible) and serves as its oracle.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::lattice::{cell_coords, Shape, Symbol, Word};
use crate::scs::{
    is_admissible, within_eps, AxialMode, ConstraintSet, ForbiddenSet, Sense, System,
};
use crate::{Error, Result, FEAS_TOLERANCE};

/// Size limit for exhaustive enumeration, in bits of search space.
pub const EXHAUSTIVE_LIMIT_BITS: u32 = 34;
/// Size limit when every constraint is a prunable cap.
pub const PRUNED_LIMIT_BITS: u32 = 48;

/// Which offsets count as windows in non-cyclic counting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WindowConvention {
    /// Every `v` with `v + S ⊆ F_n^d` (for `S = F_k^d`: `v ∈ F_{n-k+1}^d`).
    Tiling,
    /// `v ∈ F_{n-k}^d`, one offset fewer per axis.
    Shortened,
}

#[derive(Debug, Clone)]
struct Group {
    gamma: ConstraintSet,
    /// Number of windows feeding this group (the frequency denominator).
    norm: u64,
    caps: Vec<usize>,
    needs_leaf: bool,
}

#[derive(Debug, Clone)]
struct Cap {
    constraint: usize,
    budget: f64,
}

#[derive(Debug, Clone)]
struct Window {
    cells: Vec<usize>,
    group: usize,
}

/// A prepared admissible-block search.
#[derive(Debug, Clone)]
pub struct Counter {
    alphabet_size: usize,
    num_cells: usize,
    eps: f64,
    groups: Vec<Group>,
    caps: Vec<Cap>,
    windows: Vec<Window>,
    completes_at: Vec<Vec<usize>>,
}

struct State {
    cells: Vec<Symbol>,
    counts: Vec<Vec<u32>>,
    window_pattern: Vec<usize>,
    cap_sums: Vec<f64>,
    cache: BTreeMap<(usize, Vec<u32>), bool>,
}

impl Counter {
    /// Cyclic counting of `B_n(B_ε(system))`.
    pub fn cyclic(side: usize, system: &System, eps: f64) -> Result<Self> {
        check_eps(eps)?;
        let dim = system.dim();
        let num_cells = checked_cells(side, dim)?;
        let mut families: Vec<(Shape, usize)> = Vec::new();
        let mut groups: Vec<(ConstraintSet, u64)> = Vec::new();
        match system {
            System::Plain(gamma) => {
                families.push((gamma.shape().clone(), 0));
                groups.push((gamma.clone(), num_cells as u64));
            }
            System::Axial(axial) => match axial.mode() {
                AxialMode::Strict => {
                    for (i, gamma) in axial.factors().iter().enumerate() {
                        families.push((axial.axis_shape(i), i));
                        groups.push((gamma.clone(), num_cells as u64));
                    }
                }
                AxialMode::Weak => {
                    for i in 0..axial.dim() {
                        families.push((axial.axis_shape(i), 0));
                    }
                    groups.push((axial.factors()[0].clone(), (axial.dim() * num_cells) as u64));
                }
            },
        }
        let mut windows = Vec::new();
        for (shape, group) in &families {
            for v in 0..num_cells {
                windows.push(Window {
                    cells: shape.wrapped_cells(&cell_coords(v, dim, side), side),
                    group: *group,
                });
            }
        }
        Self::assemble(system.alphabet().size(), num_cells, eps, groups, windows)
    }

    /// Cyclic counting of words avoiding every pattern of every set, each
    /// set over its own shape (e.g. one per axis).
    pub fn cyclic_forbidden(side: usize, sets: &[ForbiddenSet]) -> Result<Self> {
        let (dim, alphabet_size) = common_frame(sets)?;
        let num_cells = checked_cells(side, dim)?;
        let mut windows = Vec::new();
        let mut groups = Vec::new();
        for (g, set) in sets.iter().enumerate() {
            for v in 0..num_cells {
                windows.push(Window {
                    cells: set.shape().wrapped_cells(&cell_coords(v, dim, side), side),
                    group: g,
                });
            }
            groups.push((set.to_constraint_set()?, num_cells as u64));
        }
        Self::assemble(alphabet_size, num_cells, 0.0, groups, windows)
    }

    /// Non-cyclic counting: no forbidden pattern at any window that fits
    /// inside `F_n^d` without wrapping.
    pub fn noncyclic(
        side: usize,
        forbidden: &ForbiddenSet,
        convention: WindowConvention,
    ) -> Result<Self> {
        Self::noncyclic_all(side, core::slice::from_ref(forbidden), convention)
    }

    /// [`Counter::noncyclic`] for several forbidden sets at once.
    pub fn noncyclic_all(
        side: usize,
        sets: &[ForbiddenSet],
        convention: WindowConvention,
    ) -> Result<Self> {
        let (dim, alphabet_size) = common_frame(sets)?;
        let num_cells = checked_cells(side, dim)?;
        let mut windows = Vec::new();
        let mut groups = Vec::new();
        for (g, set) in sets.iter().enumerate() {
            let shape = set.shape();
            if shape.points().iter().flatten().any(|&c| c < 0) {
                return Err(Error::invalid(
                    "non-cyclic windows need nonnegative shape coordinates",
                ));
            }
            let extent: Vec<usize> = (0..dim)
                .map(|i| {
                    shape
                        .points()
                        .iter()
                        .map(|p| p[i] as usize + 1)
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let k = extent.iter().copied().max().unwrap_or(0);
            let before = windows.len();
            for v in 0..num_cells {
                let offset = cell_coords(v, dim, side);
                let fits = match convention {
                    WindowConvention::Tiling => {
                        offset.iter().zip(&extent).all(|(&o, &e)| o + e <= side)
                    }
                    WindowConvention::Shortened => offset.iter().all(|&o| o + k < side),
                };
                if fits {
                    windows.push(Window {
                        cells: shape.wrapped_cells(&offset, side),
                        group: g,
                    });
                }
            }
            groups.push((set.to_constraint_set()?, (windows.len() - before) as u64));
        }
        Self::assemble(alphabet_size, num_cells, 0.0, groups, windows)
    }

    fn assemble(
        alphabet_size: usize,
        num_cells: usize,
        eps: f64,
        groups: Vec<(ConstraintSet, u64)>,
        windows: Vec<Window>,
    ) -> Result<Self> {
        let mut caps = Vec::new();
        let groups: Vec<Group> = groups
            .into_iter()
            .map(|(gamma, norm)| {
                let mut group_caps = Vec::new();
                let mut all_caps = true;
                for (ci, c) in gamma.constraints().iter().enumerate() {
                    if c.is_cap() {
                        let bound = match c.sense {
                            Sense::Le => c.bound,
                            Sense::Eq => 0.0,
                        };
                        let slack = eps * ConstraintSet::coefficient_span(c) + FEAS_TOLERANCE;
                        group_caps.push(caps.len());
                        caps.push(Cap {
                            constraint: ci,
                            budget: (bound + slack) * norm as f64,
                        });
                    } else {
                        all_caps = false;
                    }
                }
                Group {
                    gamma,
                    norm,
                    caps: group_caps,
                    needs_leaf: norm > 0 && (eps > 0.0 || !all_caps),
                }
            })
            .collect();

        let bits = num_cells as f64 * libm::log2(alphabet_size as f64);
        let prunable = groups
            .iter()
            .all(|g| g.caps.len() == g.gamma.constraints().len());
        let unconstrained = groups.iter().all(|g| g.gamma.constraints().is_empty());
        let limit = if unconstrained {
            // Counted in closed form; only the u128 result limits the size.
            127
        } else if prunable {
            PRUNED_LIMIT_BITS
        } else {
            EXHAUSTIVE_LIMIT_BITS
        };
        if bits > f64::from(limit) {
            return Err(Error::SearchSpaceTooLarge { bits, limit });
        }

        let mut completes_at = vec![Vec::new(); num_cells];
        for (wi, w) in windows.iter().enumerate() {
            if let Some(&last) = w.cells.iter().max() {
                completes_at[last].push(wi);
            }
        }
        Ok(Self {
            alphabet_size,
            num_cells,
            eps,
            groups,
            caps,
            windows,
            completes_at,
        })
    }

    pub fn num_cells(&self) -> usize {
        self.num_cells
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    /// Counts all admissible words.
    pub fn count(&self) -> u128 {
        self.count_with_prefix(&[])
    }

    /// Counts admissible words whose first cells equal `prefix`.
    pub fn count_with_prefix(&self, prefix: &[Symbol]) -> u128 {
        assert!(
            prefix.len() <= self.num_cells,
            "prefix longer than the word"
        );
        if self.groups.iter().all(|g| g.gamma.constraints().is_empty()) {
            // Γ is the whole simplex, so B_ε(Γ) admits every word.
            return (self.alphabet_size as u128).pow((self.num_cells - prefix.len()) as u32);
        }
        let mut st = State {
            cells: vec![0; self.num_cells],
            counts: self
                .groups
                .iter()
                .map(|g| vec![0; g.gamma.num_patterns()])
                .collect(),
            window_pattern: vec![0; self.windows.len()],
            cap_sums: vec![0.0; self.caps.len()],
            cache: BTreeMap::new(),
        };
        for (cell, &s) in prefix.iter().enumerate() {
            if !self.assign(&mut st, cell, s) {
                return 0;
            }
        }
        self.search(&mut st, prefix.len())
    }

    /// All prefixes of `depth` cells, for splitting the work.
    pub fn prefixes(&self, depth: usize) -> Vec<Vec<Symbol>> {
        let depth = depth.min(self.num_cells);
        let total = self.alphabet_size.pow(depth as u32);
        (0..total)
            .map(|mut i| {
                let mut p = vec![0; depth];
                for slot in p.iter_mut() {
                    *slot = (i % self.alphabet_size) as Symbol;
                    i /= self.alphabet_size;
                }
                p
            })
            .collect()
    }

    fn search(&self, st: &mut State, cell: usize) -> u128 {
        if cell == self.num_cells {
            return u128::from(self.leaf_ok(st));
        }
        let mut total = 0;
        for s in 0..self.alphabet_size as Symbol {
            if self.assign(st, cell, s) {
                total += self.search(st, cell + 1);
            }
            self.unassign(st, cell);
        }
        total
    }

    /// Assigns `s` to `cell`, updating completed windows. Returns false if a
    /// cap is exceeded; the caller must still call `unassign`.
    fn assign(&self, st: &mut State, cell: usize, s: Symbol) -> bool {
        st.cells[cell] = s;
        let mut ok = true;
        for &wi in &self.completes_at[cell] {
            let w = &self.windows[wi];
            let idx = w.cells.iter().fold(0, |acc, &c| {
                acc * self.alphabet_size + usize::from(st.cells[c])
            });
            st.window_pattern[wi] = idx;
            st.counts[w.group][idx] += 1;
            let group = &self.groups[w.group];
            for &ci in &group.caps {
                let cap = &self.caps[ci];
                st.cap_sums[ci] += group.gamma.constraints()[cap.constraint].coeffs[idx];
                if st.cap_sums[ci] > cap.budget {
                    ok = false;
                }
            }
        }
        ok
    }

    fn unassign(&self, st: &mut State, cell: usize) {
        for &wi in &self.completes_at[cell] {
            let w = &self.windows[wi];
            let idx = st.window_pattern[wi];
            st.counts[w.group][idx] -= 1;
            let group = &self.groups[w.group];
            for &ci in &group.caps {
                let cap = &self.caps[ci];
                st.cap_sums[ci] -= group.gamma.constraints()[cap.constraint].coeffs[idx];
            }
        }
    }

    fn leaf_ok(&self, st: &mut State) -> bool {
        for (gi, g) in self.groups.iter().enumerate() {
            if !g.needs_leaf {
                continue;
            }
            let key = (gi, st.counts[gi].clone());
            let ok = match st.cache.get(&key) {
                Some(&ok) => ok,
                None => {
                    let norm = g.norm as f64;
                    let probs: Vec<f64> = key.1.iter().map(|&c| f64::from(c) / norm).collect();
                    let ok = within_eps(&probs, &g.gamma, self.eps).unwrap_or(false);
                    st.cache.insert(key, ok);
                    ok
                }
            };
            if !ok {
                return false;
            }
        }
        true
    }
}

fn common_frame(sets: &[ForbiddenSet]) -> Result<(usize, usize)> {
    let first = sets
        .first()
        .ok_or_else(|| Error::invalid("no forbidden sets given"))?;
    let frame = (first.dim(), first.alphabet().size());
    if sets.iter().any(|s| (s.dim(), s.alphabet().size()) != frame) {
        return Err(Error::ShapeMismatch);
    }
    Ok(frame)
}

fn check_eps(eps: f64) -> Result<()> {
    if eps < 0.0 || !eps.is_finite() {
        return Err(Error::invalid("eps must be a nonnegative number"));
    }
    Ok(())
}

fn checked_cells(side: usize, dim: usize) -> Result<usize> {
    if side == 0 {
        return Err(Error::invalid("side must be positive"));
    }
    side.checked_pow(dim as u32)
        .filter(|&c| c <= 1 << 20)
        .ok_or(Error::SearchSpaceTooLarge {
            bits: f64::INFINITY,
            limit: PRUNED_LIMIT_BITS,
        })
}

/// `|B_n(B_ε(system))|` with cyclic windows.
pub fn count_admissible(side: usize, system: &System, eps: f64) -> Result<u128> {
    Ok(Counter::cyclic(side, system, eps)?.count())
}

/// Non-cyclic count of words avoiding `forbidden`, tagged with the
/// window convention that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoncyclicCount {
    pub count: u128,
    pub convention: WindowConvention,
}

pub fn count_admissible_noncyclic(
    side: usize,
    forbidden: &ForbiddenSet,
    convention: WindowConvention,
) -> Result<NoncyclicCount> {
    Ok(NoncyclicCount {
        count: Counter::noncyclic(side, forbidden, convention)?.count(),
        convention,
    })
}

/// Brute-force count: every word in `Σ^{F_n^d}` filtered by
/// [`is_admissible`].
pub fn count_admissible_exhaustive(side: usize, system: &System, eps: f64) -> Result<u128> {
    check_eps(eps)?;
    let dim = system.dim();
    let q = system.alphabet().size();
    let cells = checked_cells(side, dim)?;
    let bits = cells as f64 * libm::log2(q as f64);
    if bits > f64::from(EXHAUSTIVE_LIMIT_BITS) {
        return Err(Error::SearchSpaceTooLarge {
            bits,
            limit: EXHAUSTIVE_LIMIT_BITS,
        });
    }
    let mut word = vec![0 as Symbol; cells];
    let mut total = 0u128;
    loop {
        let w = Word::new(dim, side, q, word.clone())?;
        if is_admissible(&w, system, eps)? {
            total += 1;
        }
        // Mixed-radix increment.
        let mut i = 0;
        loop {
            if i == cells {
                return Ok(total);
            }
            word[i] += 1;
            if usize::from(word[i]) < q {
                break;
            }
            word[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Alphabet;
    use crate::scs::{rll_constraint, AxialSystem, LinearConstraint};

    fn lucas(n: usize) -> u128 {
        let (mut a, mut b) = (2u128, 1u128);
        for _ in 0..n {
            (a, b) = (b, a + b);
        }
        a
    }

    fn fibonacci(n: usize) -> u128 {
        let (mut a, mut b) = (0u128, 1u128);
        for _ in 0..n {
            (a, b) = (b, a + b);
        }
        a
    }

    #[test]
    fn cyclic_rll_1_0_is_lucas() {
        let sys: System = rll_constraint(1, 0.0).unwrap().into();
        assert_eq!(count_admissible(5, &sys, 0.0).unwrap(), 11);
        for n in 2..=14 {
            assert_eq!(count_admissible(n, &sys, 0.0).unwrap(), lucas(n), "n = {n}");
        }
    }

    #[test]
    fn noncyclic_forbid_11_is_fibonacci() {
        let f = ForbiddenSet::binary_1d(&["11"]).unwrap();
        let c = count_admissible_noncyclic(5, &f, WindowConvention::Tiling).unwrap();
        assert_eq!(c.count, 13);
        assert_eq!(c.convention, WindowConvention::Tiling);
        for n in 1..=14 {
            let c = count_admissible_noncyclic(n, &f, WindowConvention::Tiling).unwrap();
            assert_eq!(c.count, fibonacci(n + 2));
        }
        // Dropping the last window leaves the final cell free.
        let c = count_admissible_noncyclic(5, &f, WindowConvention::Shortened).unwrap();
        assert_eq!(c.count, 2 * fibonacci(6));
    }

    #[test]
    fn empty_constraints_count_everything() {
        let sys: System = ConstraintSet::simplex(Alphabet::with_size(3), Shape::cube(2, 2))
            .unwrap()
            .into();
        assert_eq!(count_admissible(2, &sys, 0.0).unwrap(), 81);
        let f = ForbiddenSet::new(Alphabet::binary(), Shape::cube(2, 2), vec![]).unwrap();
        let c = count_admissible_noncyclic(3, &f, WindowConvention::Tiling).unwrap();
        assert_eq!(c.count, 512);
    }

    #[test]
    fn strict_axial_matches_exhaustive() {
        let sys: System = AxialSystem::strict_power(rll_constraint(1, 0.0).unwrap(), 2)
            .unwrap()
            .into();
        let pruned = count_admissible(3, &sys, 0.0).unwrap();
        let brute = count_admissible_exhaustive(3, &sys, 0.0).unwrap();
        assert_eq!(pruned, brute);
        // Independent sets of the 3×3 torus: 1 + 9 + 18 + 6.
        assert_eq!(pruned, 34);
    }

    #[test]
    fn eps_relaxation_is_monotone_and_matches_exhaustive() {
        let sys: System = rll_constraint(2, 0.05).unwrap().into();
        let mut last = 0;
        for eps in [0.0, 0.05, 0.1, 0.2, 0.5] {
            let c = count_admissible(8, &sys, eps).unwrap();
            assert_eq!(
                c,
                count_admissible_exhaustive(8, &sys, eps).unwrap(),
                "eps {eps}"
            );
            assert!(c >= last);
            last = c;
        }
        assert_eq!(count_admissible(8, &sys, 1.0).unwrap(), 256);
    }

    #[test]
    fn non_cap_constraints_are_checked_at_leaves() {
        // μ(01) ≥ 0.2 written as −μ(01) ≤ −0.2.
        let g = ConstraintSet::new(
            Alphabet::binary(),
            Shape::segment(2),
            vec![LinearConstraint::le(vec![0.0, -1.0, 0.0, 0.0], -0.2)],
        )
        .unwrap();
        let sys: System = g.into();
        for n in 3..=9 {
            assert_eq!(
                count_admissible(n, &sys, 0.0).unwrap(),
                count_admissible_exhaustive(n, &sys, 0.0).unwrap()
            );
        }
    }

    #[test]
    fn prefixes_partition_the_count() {
        let sys: System = rll_constraint(1, 0.1).unwrap().into();
        let counter = Counter::cyclic(12, &sys, 0.0).unwrap();
        let whole = counter.count();
        let split: u128 = counter
            .prefixes(3)
            .iter()
            .map(|p| counter.count_with_prefix(p))
            .sum();
        assert_eq!(whole, split);
    }

    #[test]
    fn size_guard() {
        let sys: System = ConstraintSet::new(
            Alphabet::binary(),
            Shape::segment(2),
            vec![LinearConstraint::eq(vec![0.0, 1.0, -1.0, 0.0], 0.0)],
        )
        .unwrap()
        .into();
        assert!(matches!(
            Counter::cyclic(40, &sys, 0.0),
            Err(Error::SearchSpaceTooLarge { .. })
        ));
        let rll: System = rll_constraint(1, 0.0).unwrap().into();
        assert!(Counter::cyclic(40, &rll, 0.0).is_ok());
        assert!(matches!(
            count_admissible_exhaustive(40, &rll, 0.0),
            Err(Error::SearchSpaceTooLarge { .. })
        ));
    }
}
