//! Monte Carlo concentration checks, inequality-chain reports and
//! cyclic/non-cyclic comparisons.
//!
//! Sampling uses ChaCha8 (`rand_chacha::ChaCha8Rng`, seeded with
//! `seed_from_u64`); trial `t` of a run seeded with `s` uses seed `s ^ t`.
//! Each cell draws one `f64` uniform in `[0, 1)` in storage order and picks
//! the first symbol whose cumulative probability exceeds it.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::capacity::{
    capacity_1d_with, internal_capacity_sequence, log2_u128, product_capacity_lower_bound,
    CapacityOptions, CapacityRow, DimensionBound,
};
use crate::count::{Counter, WindowConvention};
use crate::indentropy::{hind_bound_report, HindBoundReport, HindOptions};
use crate::lattice::{cell_coords, empirical_distribution, SiteProductMeasure, Symbol, Word};
use crate::scs::{tv_distance_to_set, ConstraintSet, ForbiddenSet, System};
use crate::{Error, Result, FEAS_TOLERANCE};

/// Repeats a measure on `F_n^d` periodically to side `big_side`.
pub fn tile_measure(mu: &SiteProductMeasure, big_side: usize) -> Result<SiteProductMeasure> {
    let (n, d) = (mu.side(), mu.dim());
    if big_side == 0 || !big_side.is_multiple_of(n) {
        return Err(Error::invalid(format!(
            "side {big_side} is not a positive multiple of {n}"
        )));
    }
    let cells = big_side
        .checked_pow(d as u32)
        .filter(|&c| c <= 1 << 24)
        .ok_or_else(|| Error::invalid("tiled measure too large"))?;
    let sites = (0..cells)
        .map(|v| {
            let small = cell_coords(v, d, big_side)
                .iter()
                .rev()
                .fold(0, |acc, &c| acc * n + c % n);
            mu.site(small).to_vec()
        })
        .collect();
    SiteProductMeasure::new(d, big_side, sites)
}

/// Draws one word from `mu`, reproducibly for a given seed.
pub fn sample_word(mu: &SiteProductMeasure, seed: u64) -> Result<Word> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = mu.alphabet_size();
    let cells: Vec<Symbol> = mu
        .sites()
        .iter()
        .map(|site| {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            for (s, &p) in site.iter().enumerate() {
                acc += p;
                if u < acc {
                    return s as Symbol;
                }
            }
            // Rounding left `acc` just under 1: take the last supported symbol.
            site.iter().rposition(|&p| p > 0.0).unwrap_or(q - 1) as Symbol
        })
        .collect();
    Word::new(mu.dim(), mu.side(), q, cells)
}

/// `d_TV(fr_w, Γ)` for the word sampled from `tiled` with `seed`.
pub fn trial_distance(tiled: &SiteProductMeasure, gamma: &ConstraintSet, seed: u64) -> Result<f64> {
    let word = sample_word(tiled, seed)?;
    let fr = empirical_distribution(&word, gamma.shape())?;
    tv_distance_to_set(&fr, gamma)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationRow {
    pub side: usize,
    pub eps: f64,
    pub inside: usize,
    pub fraction: f64,
    /// `−ln(1 − fraction) / side^d`, when some trials fell outside.
    pub decay: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationReport {
    pub trials: usize,
    /// `d_TV(π̂_S(μ), Γ)` of the base measure.
    pub base_distance: f64,
    /// The base distance is below every tested `ε`.
    pub base_ok: bool,
    pub rows: Vec<ConcentrationRow>,
    pub monotone_in_eps: bool,
    pub monotone_in_side: bool,
}

impl ConcentrationReport {
    /// Tabulates per-side lists of trial distances (`distances[i]` belongs
    /// to `sides[i]`).
    pub fn from_distances(
        dim: usize,
        base_distance: f64,
        sides: &[usize],
        eps_list: &[f64],
        distances: &[Vec<f64>],
    ) -> Self {
        let trials = distances.first().map_or(0, Vec::len);
        let mut rows = Vec::new();
        for (&side, ds) in sides.iter().zip(distances) {
            for &eps in eps_list {
                let inside = ds.iter().filter(|&&d| d <= eps + FEAS_TOLERANCE).count();
                let fraction = inside as f64 / ds.len().max(1) as f64;
                let decay = (fraction < 1.0 && fraction > 0.0)
                    .then(|| -libm::log(1.0 - fraction) / libm::pow(side as f64, dim as f64));
                rows.push(ConcentrationRow {
                    side,
                    eps,
                    inside,
                    fraction,
                    decay,
                });
            }
        }
        let at = |si: usize, ei: usize| rows[si * eps_list.len() + ei].fraction;
        let mut order: Vec<usize> = (0..eps_list.len()).collect();
        order.sort_by(|&a, &b| eps_list[a].total_cmp(&eps_list[b]));
        let monotone_in_eps =
            (0..sides.len()).all(|si| order.windows(2).all(|w| at(si, w[0]) <= at(si, w[1])));
        let mut side_order: Vec<usize> = (0..sides.len()).collect();
        side_order.sort_by_key(|&i| sides[i]);
        let monotone_in_side = (0..eps_list.len())
            .all(|ei| side_order.windows(2).all(|w| at(w[0], ei) <= at(w[1], ei)));
        let min_eps = eps_list.iter().copied().fold(f64::INFINITY, f64::min);
        Self {
            trials,
            base_distance,
            base_ok: base_distance < min_eps,
            rows,
            monotone_in_eps,
            monotone_in_side,
        }
    }

    pub fn fraction(&self, side: usize, eps: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.side == side && r.eps == eps)
            .map(|r| r.fraction)
    }
}

/// Fraction of words sampled from `mu` (tiled to each side in `sides`)
/// whose empirical distribution lies in `B_ε(Γ)`. Every `ε` reuses the same
/// sampled words.
pub fn concentration_check(
    mu: &SiteProductMeasure,
    gamma: &ConstraintSet,
    eps_list: &[f64],
    sides: &[usize],
    trials: usize,
    seed: u64,
) -> Result<ConcentrationReport> {
    if eps_list.is_empty() || sides.is_empty() || trials == 0 {
        return Err(Error::invalid(
            "need eps values, sides and at least one trial",
        ));
    }
    let base = tv_distance_to_set(&mu.averaged_marginal(gamma.shape())?, gamma)?;
    let mut distances = Vec::with_capacity(sides.len());
    for &side in sides {
        let tiled = tile_measure(mu, side)?;
        distances.push(
            (0..trials)
                .map(|t| trial_distance(&tiled, gamma, seed ^ t as u64))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok(ConcentrationReport::from_distances(
        mu.dim(),
        base,
        sides,
        eps_list,
        &distances,
    ))
}

/// What a reported number is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantityKind {
    /// Certified by an explicit witness.
    LowerBound,
    /// Optimizer output, accurate to its reported gap.
    Computed,
    /// Closed-form expression.
    ClosedForm,
    /// Finite-size estimate without a guaranteed direction.
    Estimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quantity {
    pub name: String,
    pub value: f64,
    pub kind: QuantityKind,
}

/// A checked inequality `lhs ≤ rhs + tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub lower: String,
    pub upper: String,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
}

impl Edge {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HasseParams {
    pub eps: f64,
    /// Window sides for the product-measure search.
    pub n_list: Vec<usize>,
    /// Sides for the 1-D internal capacity estimates.
    pub count_ns: Vec<usize>,
    pub hind: HindOptions,
    pub capacity: CapacityOptions,
}

impl Default for HasseParams {
    fn default() -> Self {
        Self {
            eps: 0.0,
            n_list: alloc::vec![2, 3, 4],
            count_ns: alloc::vec![4, 8, 12],
            hind: HindOptions::default(),
            capacity: CapacityOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HasseReport {
    pub dim: usize,
    pub quantities: Vec<Quantity>,
    pub edges: Vec<Edge>,
    pub hind: HindBoundReport,
    pub capacity_1d: f64,
    pub product_bound: DimensionBound,
    pub counts: Vec<CapacityRow>,
    /// The lifted product measure beats `1 + d·(cap − 1)`.
    pub lift_beats_product_bound: bool,
}

impl HasseReport {
    pub fn quantity(&self, name: &str) -> Option<f64> {
        self.quantities
            .iter()
            .find(|q| q.name == name)
            .map(|q| q.value)
    }
}

/// Assembles the bounds for `Γ` and `Γ^{⊗d}` and checks the inequalities
/// that can be verified at this scale. A violated edge is an error.
pub fn hasse_report(
    gamma: &ConstraintSet,
    dim: usize,
    params: &HasseParams,
) -> Result<HasseReport> {
    let hind = hind_bound_report(gamma, dim, params.eps, &params.n_list, &params.hind)?;
    let cap = capacity_1d_with(gamma, &params.capacity)?;
    let counts = internal_capacity_sequence(
        &System::Plain(gamma.clone()),
        params.eps,
        params.count_ns.iter().copied(),
    )?;
    finish_hasse(dim, hind, cap.value, cap.duality_gap, counts)
}

/// Checks and packages precomputed parts (used by parallel drivers).
pub fn finish_hasse(
    dim: usize,
    hind: HindBoundReport,
    capacity_1d: f64,
    capacity_gap: f64,
    counts: Vec<CapacityRow>,
) -> Result<HasseReport> {
    let product_bound = product_capacity_lower_bound(capacity_1d, dim);
    let mut quantities = alloc::vec![
        q("hind_1d", hind.best.value, QuantityKind::LowerBound),
        q("hind_lift", hind.lift_rate, QuantityKind::LowerBound),
        q("capacity_1d", capacity_1d, QuantityKind::Computed),
        q(
            "product_bound",
            product_bound.value,
            QuantityKind::ClosedForm
        ),
    ];
    if let Some(v) = hind.iid_closed_form {
        quantities.push(q("iid_closed_form", v, QuantityKind::ClosedForm));
    }
    if let Some(c) = hind.curve {
        quantities.push(q("curve_optimum", c.value, QuantityKind::ClosedForm));
    }
    for row in &counts {
        quantities.push(q(
            &format!("count_rate_n{}", row.n),
            row.rate,
            QuantityKind::Estimate,
        ));
    }

    let alphabet_bits = libm::log2(hind.best.measure.alphabet_size() as f64);
    let cap_tol = capacity_gap.max(0.0) + 1e-9;
    let mut edges = alloc::vec![
        edge(
            "hind_1d",
            "capacity_1d",
            hind.best.value,
            capacity_1d,
            cap_tol
        ),
        edge(
            "hind_lift",
            "hind_1d",
            hind.lift_rate,
            hind.best.value,
            1e-12
        ),
        edge(
            "hind_1d",
            "hind_lift",
            hind.best.value,
            hind.lift_rate,
            1e-12
        ),
        edge("lift_axis_gap", "zero", hind.lift_axis_gap, 0.0, 1e-12),
        edge("hind_lift", "log2|Σ|", hind.lift_rate, alphabet_bits, 1e-12),
        edge(
            "product_bound",
            "capacity_1d",
            product_bound.value,
            capacity_1d,
            1e-12
        ),
    ];
    if let Some(v) = hind.iid_closed_form {
        // The i.i.d. measure is feasible at every admissible n, so the
        // search must do at least as well.
        edges.push(edge("iid_closed_form", "hind_1d", v, hind.best.value, 1e-6));
    }
    if let Some(bad) = edges.iter().find(|e| !e.holds()) {
        return Err(Error::InequalityViolated(format!(
            "{} = {} exceeds {} = {} (tolerance {:e})",
            bad.lower, bad.lhs, bad.upper, bad.rhs, bad.tolerance
        )));
    }
    Ok(HasseReport {
        dim,
        quantities,
        edges,
        lift_beats_product_bound: hind.lift_rate > product_bound.value,
        hind,
        capacity_1d,
        product_bound,
        counts,
    })
}

fn q(name: &str, value: f64, kind: QuantityKind) -> Quantity {
    Quantity {
        name: name.into(),
        value,
        kind,
    }
}

fn edge(lower: &str, upper: &str, lhs: f64, rhs: f64, tolerance: f64) -> Edge {
    Edge {
        lower: lower.into(),
        upper: upper.into(),
        lhs,
        rhs,
        tolerance,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CyclicRow {
    pub n: usize,
    pub cyclic: u128,
    pub noncyclic: u128,
    /// `cyclic ≤ noncyclic`.
    pub contained: bool,
    /// `n^{-d}·(log₂ noncyclic − log₂ cyclic)`; infinite if `cyclic = 0`.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CyclicTable {
    pub convention: WindowConvention,
    pub rows: Vec<CyclicRow>,
    /// Gaps are nonincreasing over the tested sides.
    pub gap_decreasing: bool,
}

pub fn cyclic_row(n: usize, dim: usize, cyclic: u128, noncyclic: u128) -> CyclicRow {
    let cells = libm::pow(n as f64, dim as f64);
    let gap = if cyclic == 0 {
        f64::INFINITY
    } else {
        (log2_u128(noncyclic) - log2_u128(cyclic)) / cells
    };
    CyclicRow {
        n,
        cyclic,
        noncyclic,
        contained: cyclic <= noncyclic,
        gap,
    }
}

pub fn cyclic_table(convention: WindowConvention, rows: Vec<CyclicRow>) -> CyclicTable {
    let gap_decreasing = rows.windows(2).all(|w| w[1].gap <= w[0].gap + 1e-15);
    CyclicTable {
        convention,
        rows,
        gap_decreasing,
    }
}

/// Cyclic versus non-cyclic counts of words avoiding every set in
/// `forbidden` (each over its own shape).
pub fn cyclic_vs_noncyclic(
    forbidden: &[ForbiddenSet],
    ns: impl IntoIterator<Item = usize>,
    convention: WindowConvention,
) -> Result<CyclicTable> {
    let dim = forbidden
        .first()
        .ok_or_else(|| Error::invalid("no forbidden sets given"))?
        .dim();
    let mut rows = Vec::new();
    for n in ns {
        let cyclic = Counter::cyclic_forbidden(n, forbidden)?.count();
        let noncyclic = Counter::noncyclic_all(n, forbidden, convention)?.count();
        rows.push(cyclic_row(n, dim, cyclic, noncyclic));
    }
    Ok(cyclic_table(convention, rows))
}
