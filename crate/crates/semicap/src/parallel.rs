//! Rayon drivers. Every driver splits work into independent pieces and
//! combines them in a fixed order, so results do not depend on the thread
//! count.

use rayon::prelude::*;

use semicap_core::capacity::{capacity_row, CapacityRow};
use semicap_core::count::{Counter, WindowConvention};
use semicap_core::indentropy::{
    best_result, CombinatorialSearch, HindComResult, HindOptions, HindProblem, HindResult,
};
use semicap_core::lattice::SiteProductMeasure;
use semicap_core::scs::{ConstraintSet, ForbiddenSet, System};
use semicap_core::validation::{
    cyclic_row, cyclic_table, tile_measure, trial_distance, ConcentrationReport, CyclicTable,
};
use semicap_core::{Error, Result};

/// Cells fixed per work item when splitting a count.
const SPLIT_DEPTH: usize = 3;

/// Number of admissible words, split over first-cell prefixes.
pub fn count(counter: &Counter) -> u128 {
    counter
        .prefixes(SPLIT_DEPTH)
        .par_iter()
        .map(|p| counter.count_with_prefix(p))
        .sum()
}

pub fn internal_capacity_sequence(
    system: &System,
    eps: f64,
    ns: &[usize],
) -> Result<Vec<CapacityRow>> {
    ns.iter()
        .map(|&n| {
            let counter = Counter::cyclic(n, system, eps)?;
            Ok(capacity_row(n, system.dim(), count(&counter)))
        })
        .collect()
}

/// Best certified product measure on `F_n`, restarts in parallel.
pub fn hind_fixed_n(
    gamma: &ConstraintSet,
    n: usize,
    eps: f64,
    options: &HindOptions,
) -> Result<HindResult> {
    let problem = HindProblem::new(gamma, n, eps)?;
    let results = problem
        .starts(options)?
        .into_par_iter()
        .map(|s| problem.solve_from(s, options))
        .collect::<Result<Vec<_>>>()?;
    best_result(results.into_iter().flatten()).ok_or(Error::NoFeasibleMeasure)
}

/// Combinatorial independence entropy on `F_n^d`, one task per first-cell
/// choice.
pub fn hind_com(forbidden: &[ForbiddenSet], n: usize) -> Result<HindComResult> {
    let search = CombinatorialSearch::new(forbidden, n)?;
    let found: Vec<Option<HindComResult>> = search
        .first_cell_choices()
        .par_iter()
        .map(|&m| search.best_with_first(m, -1.0))
        .collect();
    // Earliest choice wins ties, as in the sequential search.
    found
        .into_iter()
        .flatten()
        .fold(None::<HindComResult>, |best, r| match best {
            Some(b) if b.value >= r.value - 1e-12 => Some(b),
            _ => Some(r),
        })
        .ok_or(Error::EmptyLanguage)
}

/// Monte Carlo concentration check with trials in parallel. Trial `t` uses
/// seed `seed ^ t`, as in the sequential version.
pub fn concentration(
    mu: &SiteProductMeasure,
    gamma: &ConstraintSet,
    eps_list: &[f64],
    sides: &[usize],
    trials: usize,
    seed: u64,
) -> Result<ConcentrationReport> {
    if eps_list.is_empty() || sides.is_empty() || trials == 0 {
        return Err(Error::InvalidParameter(
            "need eps values, sides and at least one trial".into(),
        ));
    }
    let base = semicap_core::scs::tv_distance_to_set(&mu.averaged_marginal(gamma.shape())?, gamma)?;
    let distances = sides
        .iter()
        .map(|&side| {
            let tiled = tile_measure(mu, side)?;
            (0..trials)
                .into_par_iter()
                .map(|t| trial_distance(&tiled, gamma, seed ^ t as u64))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConcentrationReport::from_distances(
        mu.dim(),
        base,
        sides,
        eps_list,
        &distances,
    ))
}

pub fn cyclic_vs_noncyclic(
    forbidden: &[ForbiddenSet],
    ns: &[usize],
    convention: WindowConvention,
) -> Result<CyclicTable> {
    let dim = forbidden
        .first()
        .ok_or_else(|| Error::InvalidParameter("no forbidden sets given".into()))?
        .dim();
    let rows = ns
        .iter()
        .map(|&n| {
            let cyclic = count(&Counter::cyclic_forbidden(n, forbidden)?);
            let noncyclic = count(&Counter::noncyclic_all(n, forbidden, convention)?);
            Ok(cyclic_row(n, dim, cyclic, noncyclic))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(cyclic_table(convention, rows))
}
