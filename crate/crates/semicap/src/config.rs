//! System definitions in TOML.
//!
//! ```toml
//! alphabet = ["0", "1"]   # single-character labels; default binary
//! dim = 1                 # d ≥ 2 imposes the constraint along every axis
//! mode = "strict"         # or "weak" (average over axes)
//! eps = [0.0]
//!
//! [constraint]
//! kind = "rll"            # rll | forbidden | linear | simplex
//! k = 2
//! p = 0.05
//!
//! [solver]                # all optional
//! seed = 0
//! restarts = 20
//! capacity_restarts = 5
//! max_iterations = 50000
//! gap_tolerance = 1e-6
//! max_sweeps = 200
//! hind_n = [2, 3, 4]
//!
//! [report]                # all optional
//! sides = [30, 100, 300]
//! trials = 2000
//! eps = [0.01]
//! count_n = [4, 8, 12]
//! ```
//!
//! Other constraint kinds:
//!
//! ```toml
//! [constraint]
//! kind = "forbidden"
//! patterns = ["11"]
//!
//! [constraint]
//! kind = "linear"
//! window = 2
//! [[constraint.rows]]
//! coeffs = { "01" = 1.0, "10" = -1.0 }
//! sense = "eq"            # le | ge | eq
//! bound = 0.0
//!
//! [constraint]
//! kind = "simplex"
//! window = 3
//! ```
//!
//! Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use semicap_core::lattice::{pattern_count, pattern_index, Alphabet, Shape};
use semicap_core::scs::{
    rll_constraint, AxialSystem, ConstraintSet, ForbiddenSet, LinearConstraint, System,
};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] semicap_core::Error),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(default = "default_alphabet")]
    pub alphabet: Vec<String>,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    pub constraint: ConstraintConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub report: ReportConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Strict,
    Weak,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ConstraintConfig {
    Rll { k: usize, p: f64 },
    Forbidden { patterns: Vec<String> },
    Linear { window: usize, rows: Vec<RowConfig> },
    Simplex { window: usize },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowConfig {
    /// Pattern → coefficient; missing patterns have coefficient 0.
    pub coeffs: BTreeMap<String, f64>,
    pub sense: RowSense,
    pub bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub seed: u64,
    /// Random restarts of the product-measure search.
    pub restarts: usize,
    pub capacity_restarts: usize,
    pub max_iterations: usize,
    pub gap_tolerance: f64,
    pub max_sweeps: usize,
    pub hind_n: Vec<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: 20,
            capacity_restarts: 5,
            max_iterations: 50_000,
            gap_tolerance: 1e-6,
            max_sweeps: 200,
            hind_n: vec![2, 3, 4],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportConfig {
    /// Word sides for the concentration check (rounded up to a multiple
    /// of the witness period).
    pub sides: Vec<usize>,
    pub trials: usize,
    pub eps: Vec<f64>,
    pub count_n: Vec<usize>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            sides: vec![30, 100, 300],
            trials: 2000,
            eps: vec![0.01],
            count_n: vec![4, 8, 12],
        }
    }
}

fn default_alphabet() -> Vec<String> {
    vec!["0".into(), "1".into()]
}

fn default_dim() -> usize {
    1
}

fn default_eps() -> Vec<f64> {
    vec![0.0]
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct Model {
    pub config: SystemConfig,
    pub alphabet: Alphabet,
    /// The 1-D constraint over `[k]`.
    pub gamma: ConstraintSet,
    /// `gamma` itself for `d = 1`, its axial product otherwise.
    pub system: System,
    /// SHA-256 of the source text, hex.
    pub hash: String,
}

impl SystemConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }
}

impl Model {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let mut model = Self::new(SystemConfig::from_toml(text)?)?;
        model.hash = hash_text(text);
        Ok(model)
    }

    pub fn new(config: SystemConfig) -> Result<Self, ConfigError> {
        if let Some(bad) = config.alphabet.iter().find(|s| s.chars().count() != 1) {
            return Err(invalid(format!(
                "alphabet label {bad:?} must be one character"
            )));
        }
        let alphabet = Alphabet::new(config.alphabet.iter().cloned())?;
        if config.dim == 0 {
            return Err(invalid("dim must be at least 1"));
        }
        if config.eps.is_empty() {
            return Err(invalid("eps list is empty"));
        }
        for &e in config.eps.iter().chain(&config.report.eps) {
            if !(e >= 0.0 && e.is_finite()) {
                return Err(invalid(format!("eps {e} must be a nonnegative number")));
            }
        }
        if config.solver.gap_tolerance <= 0.0 {
            return Err(invalid("gap_tolerance must be positive"));
        }
        let gamma = build_gamma(&config.constraint, &alphabet)?;
        let system = lift(&gamma, config.dim, config.mode)?;
        Ok(Self {
            config,
            alphabet,
            gamma,
            system,
            hash: String::new(),
        })
    }

    pub fn with_dim(&self, dim: usize) -> Result<Self, ConfigError> {
        let mut config = self.config.clone();
        config.dim = dim;
        let mut model = Self::new(config)?;
        model.hash.clone_from(&self.hash);
        Ok(model)
    }

    /// Forbidden patterns of a fully constrained system, one set per axis.
    pub fn forbidden_sets(&self) -> Result<Vec<ForbiddenSet>, ConfigError> {
        let patterns = match &self.config.constraint {
            ConstraintConfig::Forbidden { patterns } => patterns
                .iter()
                .map(|p| self.alphabet.parse_chars(p))
                .collect::<Result<Vec<_>, _>>()?,
            ConstraintConfig::Rll { k, p } if *p == 0.0 => vec![vec![1; k + 1]],
            ConstraintConfig::Simplex { .. } => Vec::new(),
            _ => {
                return Err(invalid(
                    "this command needs a fully constrained system (forbidden patterns, rll with p = 0 or simplex)",
                ))
            }
        };
        let k = self.gamma.shape().len();
        let dim = self.config.dim;
        (0..dim)
            .map(|axis| {
                ForbiddenSet::new(
                    self.alphabet.clone(),
                    Shape::axis_segment(dim, axis, k),
                    patterns.clone(),
                )
                .map_err(ConfigError::from)
            })
            .collect()
    }
}

pub fn hash_text(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn build_gamma(c: &ConstraintConfig, alphabet: &Alphabet) -> Result<ConstraintSet, ConfigError> {
    match c {
        ConstraintConfig::Rll { k, p } => {
            if alphabet.size() != 2 {
                return Err(invalid("rll needs a binary alphabet"));
            }
            Ok(rll_constraint(*k, *p)?)
        }
        ConstraintConfig::Forbidden { patterns } => {
            let k = patterns
                .first()
                .ok_or_else(|| invalid("forbidden pattern list is empty"))?
                .chars()
                .count();
            if k == 0 || patterns.iter().any(|p| p.chars().count() != k) {
                return Err(invalid(
                    "forbidden patterns must be nonempty and of equal length",
                ));
            }
            let parsed = patterns
                .iter()
                .map(|p| alphabet.parse_chars(p))
                .collect::<Result<Vec<_>, _>>()?;
            let set = ForbiddenSet::new(alphabet.clone(), Shape::segment(k), parsed)?;
            Ok(set.to_constraint_set()?)
        }
        ConstraintConfig::Linear { window, rows } => {
            if *window == 0 {
                return Err(invalid("window must be at least 1"));
            }
            let m = pattern_count(alphabet.size(), *window)?;
            let constraints = rows
                .iter()
                .map(|row| {
                    let mut coeffs = vec![0.0; m];
                    for (pattern, &c) in &row.coeffs {
                        let digits = alphabet.parse_chars(pattern)?;
                        if digits.len() != *window {
                            return Err(invalid(format!(
                                "pattern {pattern:?} does not have length {window}"
                            )));
                        }
                        coeffs[pattern_index(alphabet.size(), &digits)] = c;
                    }
                    Ok(match row.sense {
                        RowSense::Le => LinearConstraint::le(coeffs, row.bound),
                        RowSense::Ge => {
                            LinearConstraint::le(coeffs.iter().map(|c| -c).collect(), -row.bound)
                        }
                        RowSense::Eq => LinearConstraint::eq(coeffs, row.bound),
                    })
                })
                .collect::<Result<Vec<_>, ConfigError>>()?;
            Ok(ConstraintSet::new(
                alphabet.clone(),
                Shape::segment(*window),
                constraints,
            )?)
        }
        ConstraintConfig::Simplex { window } => {
            if *window == 0 {
                return Err(invalid("window must be at least 1"));
            }
            Ok(ConstraintSet::simplex(
                alphabet.clone(),
                Shape::segment(*window),
            )?)
        }
    }
}

fn lift(gamma: &ConstraintSet, dim: usize, mode: Mode) -> Result<System, ConfigError> {
    if dim == 1 {
        return Ok(gamma.clone().into());
    }
    let axial = match mode {
        Mode::Strict => AxialSystem::strict_power(gamma.clone(), dim)?,
        Mode::Weak => AxialSystem::weak(gamma.clone(), dim)?,
    };
    Ok(axial.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rll_defaults() {
        let m = Model::from_toml("[constraint]\nkind = \"rll\"\nk = 2\np = 0.05\n").unwrap();
        assert_eq!(m.gamma.as_rll(), Some((2, 0.05)));
        assert_eq!(m.config.eps, vec![0.0]);
        assert_eq!(m.config.solver, SolverConfig::default());
        assert_eq!(m.hash.len(), 64);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for text in [
            "[constraint]\nkind = \"rll\"\nk = 2\np = 0.05\nq = 1\n",
            "colour = 1\n[constraint]\nkind = \"simplex\"\nwindow = 2\n",
            "[constraint]\nkind = \"simplex\"\nwindow = 2\n[solver]\nseeds = 3\n",
        ] {
            assert!(Model::from_toml(text).is_err(), "{text}");
        }
    }

    #[test]
    fn empty_file_is_an_error() {
        assert!(matches!(Model::from_toml(""), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn linear_rows() {
        let text = r#"
            [constraint]
            kind = "linear"
            window = 2
            [[constraint.rows]]
            coeffs = { "01" = 1.0 }
            sense = "ge"
            bound = 0.2
        "#;
        let m = Model::from_toml(text).unwrap();
        let c = &m.gamma.constraints()[0];
        assert_eq!(c.coeffs, vec![0.0, -1.0, 0.0, 0.0]);
        assert_eq!(c.bound, -0.2);
    }

    #[test]
    fn forbidden_sets_per_axis() {
        let text = "dim = 2\n[constraint]\nkind = \"forbidden\"\npatterns = [\"11\"]\n";
        let m = Model::from_toml(text).unwrap();
        let sets = m.forbidden_sets().unwrap();
        assert_eq!(sets.len(), 2);
        assert_eq!(sets[1].shape(), &Shape::axis_segment(2, 1, 2));
        let rll = Model::from_toml("[constraint]\nkind = \"rll\"\nk = 1\np = 0.1\n").unwrap();
        assert!(rll.forbidden_sets().is_err());
    }

    #[test]
    fn bad_values() {
        assert!(
            Model::from_toml("eps = [-0.1]\n[constraint]\nkind = \"simplex\"\nwindow = 2\n")
                .is_err()
        );
        assert!(Model::from_toml(
            "alphabet = [\"ab\"]\n[constraint]\nkind = \"simplex\"\nwindow = 2\n"
        )
        .is_err());
        assert!(Model::from_toml(
            "[constraint]\nkind = \"forbidden\"\npatterns = [\"1\", \"00\"]\n"
        )
        .is_err());
    }
}
