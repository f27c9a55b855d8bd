//! Alphabets, shapes, words and distributions over shaped patterns.
//!
//! Conventions used throughout the crate:
//!
//! * Symbols are stored as their index (`u8`) in the [`Alphabet`].
//! * A [`Shape`] keeps its points deduplicated and sorted lexicographically.
//!   A pattern `a ∈ Σ^S` is the tuple of symbols at the sorted points, and
//!   its index is the base-`|Σ|` number with the first point as the most
//!   significant digit. So over `{0,1}` with `S = {0,1}` the order is
//!   `00, 01, 10, 11`.
//! * A [`Word`] on the cube `F_n^d` stores cell `v` at `Σ v_i·n^i`, i.e. the
//!   first coordinate varies fastest. For `d = 2` the cells read like the
//!   rows of a matrix, with coordinate 0 as the column and coordinate 1 as
//!   the row.
//! * Every window wraps modulo `n` in every axis.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::{xlog2x, Error, Result, NEG_TOLERANCE, SUM_TOLERANCE};

/// Hard limit on the number of patterns `|Σ|^|S|`.
pub const MAX_PATTERNS: u128 = 1 << 40;

pub type Symbol = u8;

/// A finite, ordered alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<I, T>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::invalid("alphabet must contain at least one symbol"));
        }
        if symbols.len() > usize::from(Symbol::MAX) + 1 {
            return Err(Error::invalid("alphabet has more than 256 symbols"));
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(Error::invalid(format!("duplicate symbol {s:?}")));
            }
        }
        Ok(Self { symbols })
    }

    /// The alphabet `{0, 1}`.
    pub fn binary() -> Self {
        Self::with_size(2)
    }

    /// The alphabet `{0, 1, …, q-1}` with decimal labels.
    pub fn with_size(q: usize) -> Self {
        assert!((1..=256).contains(&q), "alphabet size must be in 1..=256");
        Self {
            symbols: (0..q).map(|i| i.to_string()).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn index_of(&self, label: &str) -> Option<Symbol> {
        self.symbols
            .iter()
            .position(|s| s == label)
            .map(|i| i as Symbol)
    }

    /// Parses a string of single-character labels into symbol indices.
    pub fn parse_chars(&self, text: &str) -> Result<Vec<Symbol>> {
        text.chars()
            .map(|c| {
                let mut buf = [0u8; 4];
                self.index_of(c.encode_utf8(&mut buf))
                    .ok_or_else(|| Error::invalid(format!("symbol {c:?} not in alphabet")))
            })
            .collect()
    }
}

/// A finite set of lattice points `S ⊆ Z^d`, deduplicated and sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Shape {
    dim: usize,
    points: Vec<Vec<i64>>,
}

impl Shape {
    pub fn new(dim: usize, points: impl IntoIterator<Item = Vec<i64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("shape dimension must be positive"));
        }
        let mut points: Vec<Vec<i64>> = points.into_iter().collect();
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.len(),
            });
        }
        points.sort();
        points.dedup();
        Ok(Self { dim, points })
    }

    /// The 1-D window `[k] = {0, …, k-1}`.
    pub fn segment(k: usize) -> Self {
        Self::axis_segment(1, 0, k)
    }

    /// The cube `F_k^d = {0, …, k-1}^d`.
    pub fn cube(dim: usize, k: usize) -> Self {
        assert!(dim > 0, "shape dimension must be positive");
        let total = k.pow(dim as u32);
        let points: Vec<Vec<i64>> = (0..total)
            .map(|i| {
                cell_coords(i, dim, k)
                    .into_iter()
                    .map(|c| c as i64)
                    .collect()
            })
            .collect();
        Self::new(dim, points).expect("cube points are well formed")
    }

    /// The segment `[k]·e_axis` in dimension `dim`.
    pub fn axis_segment(dim: usize, axis: usize, k: usize) -> Self {
        assert!(axis < dim, "axis out of range");
        let points = (0..k as i64).map(|j| {
            let mut p = vec![0; dim];
            p[axis] = j;
            p
        });
        Self::new(dim, points).expect("segment points are well formed")
    }

    /// Places the 1-D shape `parts[i]` along axis `i` and takes the union.
    pub fn axial_union(parts: &[Shape]) -> Result<Self> {
        let dim = parts.len();
        let mut points = Vec::new();
        for (axis, part) in parts.iter().enumerate() {
            if part.dim != 1 {
                return Err(Error::DimensionMismatch {
                    expected: 1,
                    found: part.dim,
                });
            }
            for p in &part.points {
                let mut q = vec![0; dim];
                q[axis] = p[0];
                points.push(q);
            }
        }
        Self::new(dim, points)
    }

    /// Re-embeds a 1-D shape along `axis` of dimension `dim`.
    pub fn along_axis(&self, dim: usize, axis: usize) -> Result<Self> {
        if self.dim != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: self.dim,
            });
        }
        Self::new(
            dim,
            self.points.iter().map(|p| {
                let mut q = vec![0; dim];
                q[axis] = p[0];
                q
            }),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    pub fn position(&self, point: &[i64]) -> Option<usize> {
        self.points
            .binary_search_by(|p| p.as_slice().cmp(point))
            .ok()
    }

    pub fn is_subset_of(&self, other: &Shape) -> bool {
        self.dim == other.dim && self.points.iter().all(|p| other.position(p).is_some())
    }

    /// Cell indices of the window `S + v` inside `F_n^d`, wrapping modulo `n`.
    pub fn wrapped_cells(&self, offset: &[usize], side: usize) -> Vec<usize> {
        self.points
            .iter()
            .map(|p| wrapped_index(p, offset, side))
            .collect()
    }
}

/// Number of patterns `q^m`, rejecting anything above [`MAX_PATTERNS`].
pub fn pattern_count(alphabet_size: usize, len: usize) -> Result<usize> {
    let mut count: u128 = 1;
    for _ in 0..len {
        count = count.saturating_mul(alphabet_size as u128);
        if count > MAX_PATTERNS {
            return Err(Error::TooManyPatterns { count });
        }
    }
    Ok(count as usize)
}

/// Index of a pattern in lexicographic order.
pub fn pattern_index(alphabet_size: usize, pattern: &[Symbol]) -> usize {
    pattern
        .iter()
        .fold(0, |acc, &a| acc * alphabet_size + usize::from(a))
}

/// Writes the digits of pattern `index` into `out` (most significant first).
pub fn pattern_digits(alphabet_size: usize, mut index: usize, out: &mut [Symbol]) {
    for slot in out.iter_mut().rev() {
        *slot = (index % alphabet_size) as Symbol;
        index /= alphabet_size;
    }
}

/// All patterns of `Σ^S` in index order.
pub fn enumerate_patterns(alphabet: &Alphabet, shape: &Shape) -> Result<Vec<Vec<Symbol>>> {
    if shape.is_empty() {
        return Err(Error::invalid("shape must contain at least one point"));
    }
    let q = alphabet.size();
    let total = pattern_count(q, shape.len())?;
    Ok((0..total)
        .map(|i| {
            let mut p = vec![0; shape.len()];
            pattern_digits(q, i, &mut p);
            p
        })
        .collect())
}

pub(crate) fn cell_coords(mut index: usize, dim: usize, side: usize) -> Vec<usize> {
    let mut coords = vec![0; dim];
    for c in coords.iter_mut() {
        *c = index % side;
        index /= side;
    }
    coords
}

pub(crate) fn wrapped_index(point: &[i64], offset: &[usize], side: usize) -> usize {
    let n = side as i64;
    point
        .iter()
        .zip(offset)
        .rev()
        .fold(0usize, |acc, (&p, &v)| {
            acc * side + (p + v as i64).rem_euclid(n) as usize
        })
}

/// A word over the cube `F_n^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    dim: usize,
    side: usize,
    alphabet_size: usize,
    cells: Vec<Symbol>,
}

impl Word {
    pub fn new(dim: usize, side: usize, alphabet_size: usize, cells: Vec<Symbol>) -> Result<Self> {
        if dim == 0 || side == 0 {
            return Err(Error::invalid("word dimension and side must be positive"));
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
        if let Some(&c) = cells.iter().find(|&&c| usize::from(c) >= alphabet_size) {
            return Err(Error::invalid(format!(
                "cell symbol {c} outside alphabet of size {alphabet_size}"
            )));
        }
        Ok(Self {
            dim,
            side,
            alphabet_size,
            cells,
        })
    }

    /// A 1-D word from single-character labels, e.g. `"0010111001"`.
    pub fn parse_1d(alphabet: &Alphabet, text: &str) -> Result<Self> {
        let cells = alphabet.parse_chars(text)?;
        Self::new(1, cells.len(), alphabet.size(), cells)
    }

    /// A 2-D word from matrix rows; row `r`, column `c` is the cell `(c, r)`.
    pub fn parse_2d(alphabet: &Alphabet, rows: &[&str]) -> Result<Self> {
        let side = rows.len();
        let mut cells = Vec::with_capacity(side * side);
        for row in rows {
            let parsed = alphabet.parse_chars(row)?;
            if parsed.len() != side {
                return Err(Error::invalid("2-D word rows must form a square"));
            }
            cells.extend(parsed);
        }
        Self::new(2, side, alphabet.size(), cells)
    }

    pub fn constant(dim: usize, side: usize, alphabet_size: usize, symbol: Symbol) -> Result<Self> {
        Self::new(dim, side, alphabet_size, vec![symbol; side.pow(dim as u32)])
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

    pub fn cells(&self) -> &[Symbol] {
        &self.cells
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    /// Symbol of the periodic extension at an arbitrary lattice point.
    pub fn get(&self, point: &[i64]) -> Symbol {
        let zero = vec![0; self.dim];
        self.cells[wrapped_index(point, &zero, self.side)]
    }
}

/// Exact pattern counts of a word; frequencies are `counts[i] / total`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternCounts {
    shape: Shape,
    alphabet_size: usize,
    counts: Vec<u64>,
    total: u64,
}

impl PatternCounts {
    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// The frequency of `pattern` as a `(numerator, denominator)` pair.
    pub fn frequency(&self, pattern: &[Symbol]) -> (u64, u64) {
        (
            self.counts[pattern_index(self.alphabet_size, pattern)],
            self.total,
        )
    }

    /// Exact marginal onto `sub ⊆ shape`.
    pub fn marginal(&self, sub: &Shape) -> Result<PatternCounts> {
        let map = marginal_index_map(&self.shape, sub, self.alphabet_size)?;
        let mut counts = vec![0u64; pattern_count(self.alphabet_size, sub.len())?];
        for (i, &c) in self.counts.iter().enumerate() {
            counts[map[i]] += c;
        }
        Ok(PatternCounts {
            shape: sub.clone(),
            alphabet_size: self.alphabet_size,
            counts,
            total: self.total,
        })
    }

    pub fn to_distribution(&self) -> PatternDistribution {
        let total = self.total as f64;
        PatternDistribution {
            shape: self.shape.clone(),
            alphabet_size: self.alphabet_size,
            probs: self.counts.iter().map(|&c| c as f64 / total).collect(),
        }
    }
}

/// A probability vector over `Σ^S` in pattern-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternDistribution {
    shape: Shape,
    alphabet_size: usize,
    probs: Vec<f64>,
}

impl PatternDistribution {
    /// Validates and normalizes tiny negative entries to zero.
    pub fn new(shape: Shape, alphabet_size: usize, mut probs: Vec<f64>) -> Result<Self> {
        let expected = pattern_count(alphabet_size, shape.len())?;
        if probs.len() != expected {
            return Err(Error::InvalidDistribution(format!(
                "expected {expected} entries, got {}",
                probs.len()
            )));
        }
        for p in probs.iter_mut() {
            if !p.is_finite() || *p < -NEG_TOLERANCE {
                return Err(Error::InvalidDistribution(format!(
                    "entry {p} is not a probability"
                )));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
        }
        Ok(Self {
            shape,
            alphabet_size,
            probs,
        })
    }

    pub fn uniform(shape: Shape, alphabet_size: usize) -> Result<Self> {
        let m = pattern_count(alphabet_size, shape.len())?;
        Ok(Self {
            shape,
            alphabet_size,
            probs: vec![1.0 / m as f64; m],
        })
    }

    pub fn point_mass(shape: Shape, alphabet_size: usize, index: usize) -> Result<Self> {
        let m = pattern_count(alphabet_size, shape.len())?;
        if index >= m {
            return Err(Error::invalid("pattern index out of range"));
        }
        let mut probs = vec![0.0; m];
        probs[index] = 1.0;
        Ok(Self {
            shape,
            alphabet_size,
            probs,
        })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, pattern: &[Symbol]) -> f64 {
        self.probs[pattern_index(self.alphabet_size, pattern)]
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    /// `λ·self + (1-λ)·other`.
    pub fn mix(&self, other: &PatternDistribution, lambda: f64) -> Result<PatternDistribution> {
        self.check_compatible(other)?;
        Ok(PatternDistribution {
            shape: self.shape.clone(),
            alphabet_size: self.alphabet_size,
            probs: self
                .probs
                .iter()
                .zip(&other.probs)
                .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
                .collect(),
        })
    }

    fn check_compatible(&self, other: &PatternDistribution) -> Result<()> {
        if self.shape != other.shape || self.alphabet_size != other.alphabet_size {
            return Err(Error::ShapeMismatch);
        }
        Ok(())
    }
}

/// For each pattern of `shape`, the index of its restriction to `sub`.
pub fn marginal_index_map(shape: &Shape, sub: &Shape, alphabet_size: usize) -> Result<Vec<usize>> {
    if !sub.is_subset_of(shape) {
        return Err(Error::NotASubset);
    }
    let positions: Vec<usize> = sub
        .points()
        .iter()
        .map(|p| shape.position(p).expect("subset checked"))
        .collect();
    let total = pattern_count(alphabet_size, shape.len())?;
    let mut digits = vec![0; shape.len()];
    Ok((0..total)
        .map(|i| {
            pattern_digits(alphabet_size, i, &mut digits);
            positions
                .iter()
                .fold(0, |acc, &j| acc * alphabet_size + usize::from(digits[j]))
        })
        .collect())
}

/// Exact cyclic pattern counts of `word` with respect to `shape`.
pub fn empirical_counts(word: &Word, shape: &Shape) -> Result<PatternCounts> {
    if shape.dim() != word.dim() {
        return Err(Error::DimensionMismatch {
            expected: word.dim(),
            found: shape.dim(),
        });
    }
    let q = word.alphabet_size();
    let mut counts = vec![0u64; pattern_count(q, shape.len())?];
    for v in 0..word.num_cells() {
        let offset = cell_coords(v, word.dim(), word.side());
        let idx = shape.points().iter().fold(0, |acc, p| {
            acc * q + usize::from(word.cells()[wrapped_index(p, &offset, word.side())])
        });
        counts[idx] += 1;
    }
    Ok(PatternCounts {
        shape: shape.clone(),
        alphabet_size: q,
        counts,
        total: word.num_cells() as u64,
    })
}

/// The cyclic empirical distribution `fr_w^S`.
pub fn empirical_distribution(word: &Word, shape: &Shape) -> Result<PatternDistribution> {
    empirical_counts(word, shape).map(|c| c.to_distribution())
}

/// The restriction `π_S(μ)` onto `sub ⊆ μ.shape`.
pub fn marginal(mu: &PatternDistribution, sub: &Shape) -> Result<PatternDistribution> {
    let map = marginal_index_map(mu.shape(), sub, mu.alphabet_size())?;
    let mut probs = vec![0.0; pattern_count(mu.alphabet_size(), sub.len())?];
    for (i, &p) in mu.probs().iter().enumerate() {
        probs[map[i]] += p;
    }
    Ok(PatternDistribution {
        shape: sub.clone(),
        alphabet_size: mu.alphabet_size(),
        probs,
    })
}

/// Total variation distance `½·Σ|μ(x) − ν(x)|`.
pub fn tv_distance(mu: &PatternDistribution, nu: &PatternDistribution) -> Result<f64> {
    mu.check_compatible(nu)?;
    Ok(0.5
        * mu.probs()
            .iter()
            .zip(nu.probs())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>())
}

/// Shannon entropy in bits.
pub fn entropy(mu: &PatternDistribution) -> f64 {
    entropy_of(mu.probs())
}

pub(crate) fn entropy_of(probs: &[f64]) -> f64 {
    -probs.iter().map(|&p| xlog2x(p)).sum::<f64>()
}

/// A product measure on `Σ^{F_n^d}`: one symbol distribution per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteProductMeasure {
    dim: usize,
    side: usize,
    alphabet_size: usize,
    sites: Vec<Vec<f64>>,
}

impl SiteProductMeasure {
    pub fn new(dim: usize, side: usize, sites: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 || side == 0 {
            return Err(Error::invalid("dimension and side must be positive"));
        }
        if sites.len() != side.pow(dim as u32) {
            return Err(Error::invalid(format!(
                "expected {} site distributions, got {}",
                side.pow(dim as u32),
                sites.len()
            )));
        }
        let alphabet_size = sites[0].len();
        if alphabet_size == 0 {
            return Err(Error::invalid("site distributions must be nonempty"));
        }
        let mut sites = sites;
        for site in sites.iter_mut() {
            if site.len() != alphabet_size {
                return Err(Error::ShapeMismatch);
            }
            normalize_site(site)?;
        }
        Ok(Self {
            dim,
            side,
            alphabet_size,
            sites,
        })
    }

    /// Every site carries the same distribution.
    pub fn iid(dim: usize, side: usize, site: Vec<f64>) -> Result<Self> {
        Self::new(dim, side, vec![site; side.pow(dim as u32)])
    }

    /// Every site carries the uniform distribution on `q` symbols.
    pub fn uniform(dim: usize, side: usize, alphabet_size: usize) -> Result<Self> {
        Self::iid(dim, side, vec![1.0 / alphabet_size as f64; alphabet_size])
    }

    /// 1-D binary measure with `P(site i = 1) = ones[i]`.
    pub fn bernoulli(ones: &[f64]) -> Result<Self> {
        Self::new(
            1,
            ones.len(),
            ones.iter().map(|&x| vec![1.0 - x, x]).collect(),
        )
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

    pub fn sites(&self) -> &[Vec<f64>] {
        &self.sites
    }

    pub fn site(&self, index: usize) -> &[f64] {
        &self.sites[index]
    }

    /// Sum of the per-site entropies (the entropy of the product measure).
    pub fn product_entropy(&self) -> f64 {
        self.sites.iter().map(|s| entropy_of(s)).sum()
    }

    /// Entropy per site, `product_entropy / n^d`.
    pub fn entropy_rate(&self) -> f64 {
        self.product_entropy() / self.sites.len() as f64
    }

    /// The averaged marginal `π̂_S(μ) = n^{-d}·Σ_v π_{S+v}(μ)`.
    pub fn averaged_marginal(&self, shape: &Shape) -> Result<PatternDistribution> {
        if shape.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: shape.dim(),
            });
        }
        let q = self.alphabet_size;
        let m = pattern_count(q, shape.len())?;
        let mut acc = vec![0.0; m];
        let mut buf = Vec::with_capacity(m);
        let mut next = Vec::with_capacity(m);
        for v in 0..self.sites.len() {
            let offset = cell_coords(v, self.dim, self.side);
            buf.clear();
            buf.push(1.0);
            for p in shape.points() {
                let site = &self.sites[wrapped_index(p, &offset, self.side)];
                next.clear();
                for &b in &buf {
                    next.extend(site.iter().map(|&s| b * s));
                }
                core::mem::swap(&mut buf, &mut next);
            }
            for (a, b) in acc.iter_mut().zip(&buf) {
                *a += b;
            }
        }
        let scale = 1.0 / self.sites.len() as f64;
        acc.iter_mut().for_each(|a| *a *= scale);
        Ok(PatternDistribution {
            shape: shape.clone(),
            alphabet_size: q,
            probs: acc,
        })
    }
}

pub(crate) fn normalize_site(site: &mut [f64]) -> Result<()> {
    for p in site.iter_mut() {
        if !p.is_finite() || *p < -NEG_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("site entry {p}")));
        }
        if *p < 0.0 {
            *p = 0.0;
        }
    }
    let sum: f64 = site.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::InvalidDistribution(format!("site sums to {sum}")));
    }
    Ok(())
}
