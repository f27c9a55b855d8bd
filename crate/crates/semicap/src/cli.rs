//! Command-line front end.
//!
//! Exit codes: 0 success, 1 other failure, 2 config or usage error,
//! 3 size guard tripped, 4 optimizer did not converge (output still
//! written, flagged in the `converged` field).

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use semicap_core::capacity::{
    capacity_1d_with, product_capacity_lower_bound, transfer_matrix_capacity, CapacityOptions,
};
use semicap_core::count::WindowConvention;
use semicap_core::fw::FwOptions;
use semicap_core::indentropy::{
    assemble_report, axial_lift, curve_optimum_01p, HindOptions, HindRow, MultiChoiceWord,
};
use semicap_core::lattice::{pattern_digits, Alphabet, SiteProductMeasure};
use semicap_core::scs::System;
use semicap_core::validation::finish_hasse;
use semicap_core::Error;

use crate::config::{ConfigError, Model};
use crate::output::{Cell, Format, Meta, Table};
use crate::parallel;

/// Concentration target at the largest tested side. Not a derived
/// constant: an arbitrary pass mark for the Monte Carlo check.
pub const CONCENTRATION_TARGET: f64 = 0.95;

#[derive(Debug, Parser)]
#[command(
    name = "semicap",
    version,
    about = "Capacity bounds for semiconstrained systems"
)]
pub struct Cli {
    /// System definition (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides `solver.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, env = "SEMICAP_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t)]
    pub format: Format,
    /// Write the table here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Comma-separated ε values; overrides `eps` in the config.
    #[arg(long, global = true, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Overrides `dim` in the config.
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cyclic admissible-word counts and rates (1/n^d)·log₂ count.
    Count(Sides),
    /// 1-D capacity by concave maximization, with the optimizer.
    Capacity,
    /// Product-measure lower bounds for each window side.
    Indentropy {
        /// Comma-separated sides; defaults to `solver.hind_n`.
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
    },
    /// Best point on xy = p for the (1, p) system.
    Curve {
        /// Comma-separated values of p.
        #[arg(long, value_delimiter = ',', conflicts_with = "p_grid")]
        p: Vec<f64>,
        /// Evenly spaced grid `START:END:POINTS`.
        #[arg(long)]
        p_grid: Option<Grid>,
    },
    /// Inequality chain and concentration check.
    Report,
    /// Cyclic against non-cyclic counts for forbidden-pattern systems.
    CyclicVsNoncyclic {
        #[command(flatten)]
        sides: Sides,
        #[arg(long, value_enum, default_value_t = Convention::Tiling)]
        convention: Convention,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Sides {
    /// Comma-separated sides.
    #[arg(long, value_delimiter = ',', conflicts_with = "n_range")]
    pub n: Vec<usize>,
    /// Inclusive range `A..B` (or `A:B`).
    #[arg(long)]
    pub n_range: Option<Range>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Convention {
    /// Every offset whose window fits inside the box.
    Tiling,
    /// Offsets in F_{n-k}^d, one fewer per axis.
    Shortened,
}

impl From<Convention> for WindowConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Tiling => WindowConvention::Tiling,
            Convention::Shortened => WindowConvention::Shortened,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Range {
    pub start: usize,
    pub end: usize,
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s
            .split_once("..")
            .or_else(|| s.split_once(':'))
            .ok_or_else(|| format!("expected A..B, got {s:?}"))?;
        let start = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
        let end = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
        if start > end {
            return Err(format!("empty range {s:?}"));
        }
        Ok(Self { start, end })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let step = (self.end - self.start) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.end
                } else {
                    self.start + step * i as f64
                }
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, c] = parts[..] else {
            return Err(format!("expected START:END:POINTS, got {s:?}"));
        };
        let grid = Self {
            start: a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?,
            end: b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?,
            points: c.trim().parse().map_err(|e| format!("{c:?}: {e}"))?,
        };
        if grid.points == 0 || grid.start > grid.end {
            return Err(format!("empty grid {s:?}"));
        }
        Ok(grid)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(ConfigError::Model(e)) | CliError::Core(e) => match e {
                Error::SearchSpaceTooLarge { .. } | Error::TooManyPatterns { .. } => 3,
                _ if matches!(self, CliError::Config(_)) => 2,
                _ => 1,
            },
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Io(_) | CliError::Pool(_) => 1,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// A finished command: the table, its provenance line and a few
/// human-readable lines for stderr.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: Table,
    pub meta: Meta,
    pub summary: Vec<String>,
    pub converged: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.converged {
            0
        } else {
            4
        }
    }
}

/// Parses `args`, runs the command, writes the table and returns the exit
/// code.
pub fn run_from<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = execute(&cli).and_then(|outcome| {
        match &cli.out {
            Some(path) => {
                let mut f = BufWriter::new(File::create(path)?);
                outcome.table.write(cli.format, &outcome.meta, &mut f)?;
                f.flush()?;
            }
            None => outcome.table.write(cli.format, &outcome.meta, stdout)?,
        }
        Ok(outcome)
    });
    match result {
        Ok(outcome) => {
            for line in &outcome.summary {
                let _ = writeln!(stderr, "{line}");
            }
            if !outcome.converged {
                let _ = writeln!(stderr, "warning: optimizer did not reach its gap tolerance");
            }
            outcome.exit_code()
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run() -> i32 {
    run_from(
        std::env::args_os(),
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
    )
}

/// Runs the parsed command on a pool of `--threads` workers.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    if cli.threads == Some(0) {
        return Err(usage("--threads must be positive"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()?;
    pool.install(|| dispatch(cli))
}

fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    if let Command::Curve { p, p_grid } = &cli.command {
        return curve(cli, p, p_grid.as_ref());
    }
    let model = load(cli)?;
    let seed = cli.seed.unwrap_or(model.config.solver.seed);
    let meta = Meta {
        command: command_name(&cli.command).into(),
        config_hash: model.hash.clone(),
        seed,
    };
    let eps = cli.eps.clone().unwrap_or_else(|| model.config.eps.clone());
    if eps.is_empty() || eps.iter().any(|e| !(*e >= 0.0 && e.is_finite())) {
        return Err(usage("--eps values must be nonnegative numbers"));
    }
    let ctx = Ctx {
        model,
        seed,
        eps,
        meta,
    };
    match &cli.command {
        Command::Count(sides) => count(&ctx, sides),
        Command::Capacity => capacity(&ctx),
        Command::Indentropy { n } => indentropy(&ctx, n),
        Command::Report => report(&ctx),
        Command::CyclicVsNoncyclic { sides, convention } => {
            cyclic_vs_noncyclic(&ctx, sides, (*convention).into())
        }
        Command::Curve { .. } => unreachable!("handled above"),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Count(_) => "count",
        Command::Capacity => "capacity",
        Command::Indentropy { .. } => "indentropy",
        Command::Curve { .. } => "curve",
        Command::Report => "report",
        Command::CyclicVsNoncyclic { .. } => "cyclic-vs-noncyclic",
    }
}

fn load(cli: &Cli) -> Result<Model, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| usage("this command needs --config"))?;
    let model = Model::load(path)?;
    Ok(match cli.dim {
        Some(d) => model.with_dim(d)?,
        None => model,
    })
}

struct Ctx {
    model: Model,
    seed: u64,
    eps: Vec<f64>,
    meta: Meta,
}

impl Ctx {
    fn dim(&self) -> usize {
        self.model.config.dim
    }

    fn window(&self) -> usize {
        self.model.gamma.shape().len()
    }

    fn hind_options(&self) -> HindOptions {
        let s = &self.model.config.solver;
        HindOptions {
            restarts: s.restarts,
            seed: self.seed,
            max_sweeps: s.max_sweeps,
            ..HindOptions::default()
        }
    }

    fn capacity_options(&self) -> CapacityOptions {
        let s = &self.model.config.solver;
        CapacityOptions {
            fw: FwOptions {
                max_iterations: s.max_iterations,
                gap_tolerance: s.gap_tolerance,
            },
            restarts: s.capacity_restarts,
            seed: self.seed,
        }
    }

    fn outcome(&self, table: Table, summary: Vec<String>, converged: bool) -> Outcome {
        Outcome {
            table,
            meta: self.meta.clone(),
            summary,
            converged,
        }
    }

    /// Product-measure rows for each side, skipping sides shorter than
    /// the window.
    fn hind_rows(&self, ns: &[usize], eps: f64) -> Result<Vec<HindRow>, CliError> {
        let options = self.hind_options();
        ns.iter()
            .filter(|&&n| n >= self.window())
            .map(
                |&n| match parallel::hind_fixed_n(&self.model.gamma, n, eps, &options) {
                    Ok(r) => Ok(HindRow { n, result: Some(r) }),
                    Err(Error::NoFeasibleMeasure) => Ok(HindRow { n, result: None }),
                    Err(e) => Err(e.into()),
                },
            )
            .collect()
    }
}

fn resolve_sides(sides: &Sides, default: &[usize]) -> Vec<usize> {
    match sides.n_range {
        Some(r) => (r.start..=r.end).collect(),
        None if sides.n.is_empty() => default.to_vec(),
        None => sides.n.clone(),
    }
}

fn count(ctx: &Ctx, sides: &Sides) -> Result<Outcome, CliError> {
    let ns = resolve_sides(sides, &ctx.model.config.report.count_n);
    if ns.contains(&0) {
        return Err(usage("sides must be positive"));
    }
    let mut table = Table::new(&["n", "count", "rate", "eps"]);
    let mut summary = Vec::new();
    for &eps in &ctx.eps {
        let rows = parallel::internal_capacity_sequence(&ctx.model.system, eps, &ns)?;
        if let Some(last) = rows.last() {
            summary.push(format!(
                "eps = {eps}: rate at n = {} is {}",
                last.n, last.rate
            ));
        }
        for r in rows {
            table.push(vec![r.n.into(), r.count.into(), r.rate.into(), eps.into()]);
        }
    }
    Ok(ctx.outcome(table, summary, true))
}

fn capacity(ctx: &Ctx) -> Result<Outcome, CliError> {
    let gamma = &ctx.model.gamma;
    let result = capacity_1d_with(gamma, &ctx.capacity_options())?;
    let mut table = Table::new(&["key", "value"]);
    let mut summary = vec![format!(
        "capacity {} (duality gap {:e}, {} iterations)",
        result.value, result.duality_gap, result.iterations
    )];
    table.push(vec!["capacity".into(), result.value.into()]);
    table.push(vec!["duality_gap".into(), result.duality_gap.into()]);
    table.push(vec!["iterations".into(), result.iterations.into()]);
    table.push(vec!["converged".into(), result.converged.into()]);
    let oracle = ctx
        .model
        .with_dim(1)
        .ok()
        .and_then(|m| m.forbidden_sets().ok())
        .and_then(|sets| transfer_matrix_capacity(&sets[0]).ok());
    if let Some(v) = oracle {
        table.push(vec!["transfer_matrix".into(), v.into()]);
        summary.push(format!("transfer-matrix capacity {v}"));
    }
    if ctx.dim() > 1 {
        let bound = product_capacity_lower_bound(result.value, ctx.dim());
        table.push(vec!["product_bound".into(), bound.value.into()]);
        table.push(vec![
            "product_bound_degenerate".into(),
            bound.degenerate.into(),
        ]);
    }
    let labels = gamma.alphabet();
    let k = gamma.shape().len();
    let mut digits = vec![0; k];
    for (i, &p) in result.optimizer.probs().iter().enumerate() {
        pattern_digits(labels.size(), i, &mut digits);
        table.push(vec![
            format!("mu[{}]", label(labels, &digits)).into(),
            p.into(),
        ]);
    }
    Ok(ctx.outcome(table, summary, result.converged))
}

fn label(alphabet: &Alphabet, digits: &[u8]) -> String {
    digits
        .iter()
        .map(|&d| alphabet.symbols()[usize::from(d)].as_str())
        .collect()
}

fn sites_text(mu: &SiteProductMeasure) -> String {
    mu.sites()
        .iter()
        .map(|s| {
            s.iter()
                .map(|p| format!("{p:?}"))
                .collect::<Vec<_>>()
                .join("/")
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn word_text(alphabet: &Alphabet, w: &MultiChoiceWord) -> String {
    (0..w.cells().len())
        .map(|i| {
            let set: Vec<&str> = w
                .cell_symbols(i)
                .iter()
                .map(|&s| alphabet.symbols()[usize::from(s)].as_str())
                .collect();
            format!("{{{}}}", set.join(","))
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn indentropy(ctx: &Ctx, ns: &[usize]) -> Result<Outcome, CliError> {
    let ns = if ns.is_empty() {
        ctx.model.config.solver.hind_n.clone()
    } else {
        ns.to_vec()
    };
    let mut table = Table::new(&[
        "method",
        "n",
        "eps",
        "value",
        "distance",
        "certified",
        "lift_rate",
        "status",
        "witness",
    ]);
    let mut summary = Vec::new();
    let dim = ctx.dim();
    for &eps in &ctx.eps {
        let rows = ctx.hind_rows(&ns, eps)?;
        for &n in ns.iter().filter(|&&n| n < ctx.window()) {
            table.push(vec![
                "product".into(),
                n.into(),
                eps.into(),
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                "skipped: window longer than n".into(),
                Cell::Empty,
            ]);
        }
        for row in &rows {
            let cells = match &row.result {
                Some(r) => {
                    let lift = axial_lift(&r.measure, dim)?;
                    vec![
                        r.value.into(),
                        r.distance.into(),
                        r.certified().into(),
                        lift.entropy_rate().into(),
                        "ok".into(),
                        sites_text(&r.measure).into(),
                    ]
                }
                None => vec![
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                    "no feasible product measure".into(),
                    Cell::Empty,
                ],
            };
            let mut line = vec!["product".into(), row.n.into(), eps.into()];
            line.extend(cells);
            table.push(line);
        }
        if let Ok(report) = assemble_report(&ctx.model.gamma, dim, eps, rows) {
            summary.push(format!(
                "eps = {eps}: best product-measure bound {} at n = {}",
                report.best.value, report.best_n
            ));
        }
        if eps == 0.0 {
            if let Ok(sets) = ctx.model.forbidden_sets() {
                for &n in &ns {
                    let (cells, status) = match parallel::hind_com(&sets, n) {
                        Ok(r) => (
                            vec![
                                r.value.into(),
                                word_text(&ctx.model.alphabet, &r.word).into(),
                            ],
                            "ok".into(),
                        ),
                        Err(e @ (Error::SearchSpaceTooLarge { .. } | Error::EmptyLanguage)) => {
                            (vec![Cell::Empty, Cell::Empty], format!("skipped: {e}"))
                        }
                        Err(e) => return Err(e.into()),
                    };
                    let [value, witness]: [Cell; 2] = cells.try_into().expect("two cells");
                    table.push(vec![
                        "combinatorial".into(),
                        n.into(),
                        eps.into(),
                        value,
                        Cell::Empty,
                        Cell::Empty,
                        Cell::Empty,
                        status.into(),
                        witness,
                    ]);
                }
            }
        }
    }
    Ok(ctx.outcome(table, summary, true))
}

fn curve(cli: &Cli, ps: &[f64], grid: Option<&Grid>) -> Result<Outcome, CliError> {
    let ps = match grid {
        Some(g) => g.values(),
        None if ps.is_empty() => return Err(usage("curve needs --p or --p-grid")),
        None => ps.to_vec(),
    };
    let mut table = Table::new(&["p", "value", "x", "y"]);
    for p in ps {
        let c = curve_optimum_01p(p).map_err(|e| usage(e.to_string()))?;
        table.push(vec![p.into(), c.value.into(), c.x.into(), c.y.into()]);
    }
    Ok(Outcome {
        table,
        meta: Meta {
            command: "curve".into(),
            config_hash: String::new(),
            seed: cli.seed.unwrap_or(0),
        },
        summary: Vec::new(),
        converged: true,
    })
}

fn report(ctx: &Ctx) -> Result<Outcome, CliError> {
    let cfg = &ctx.model.config;
    let dim = ctx.dim();
    let gamma = &ctx.model.gamma;
    let mut table = Table::new(&["section", "name", "eps", "value", "note"]);
    let mut summary = Vec::new();
    let mut converged = true;
    let cap = capacity_1d_with(gamma, &ctx.capacity_options())?;
    converged &= cap.converged;
    for &eps in &ctx.eps {
        let rows = ctx.hind_rows(&cfg.solver.hind_n, eps)?;
        let hind = assemble_report(gamma, dim, eps, rows)?;
        let counts = parallel::internal_capacity_sequence(
            &System::Plain(gamma.clone()),
            eps,
            &cfg.report.count_n,
        )?;
        let hasse = finish_hasse(dim, hind, cap.value, cap.duality_gap, counts)?;
        for q in &hasse.quantities {
            table.push(vec![
                "quantity".into(),
                q.name.as_str().into(),
                eps.into(),
                q.value.into(),
                format!("{:?}", q.kind).to_lowercase().into(),
            ]);
        }
        for e in &hasse.edges {
            table.push(vec![
                "edge".into(),
                format!("{} <= {}", e.lower, e.upper).into(),
                eps.into(),
                (e.lhs - e.rhs).into(),
                if e.holds() { "holds" } else { "violated" }.into(),
            ]);
        }
        table.push(vec![
            "flag".into(),
            "product_bound_degenerate".into(),
            eps.into(),
            hasse.product_bound.degenerate.into(),
            Cell::Empty,
        ]);
        table.push(vec![
            "flag".into(),
            "lift_beats_product_bound".into(),
            eps.into(),
            hasse.lift_beats_product_bound.into(),
            Cell::Empty,
        ]);
        summary.push(format!(
            "eps = {eps}: hind {} <= capacity {} (d = {dim}: lift {}, product bound {})",
            hasse.hind.best.value,
            hasse.capacity_1d,
            hasse.hind.lift_rate,
            hasse.product_bound.value
        ));

        // Words are sampled from the best witness, tiled to each side.
        let mu = &hasse.hind.best.measure;
        let period = mu.side();
        let sides: Vec<usize> = cfg
            .report
            .sides
            .iter()
            .map(|&s| s.div_ceil(period) * period)
            .collect();
        let conc = parallel::concentration(
            mu,
            gamma,
            &cfg.report.eps,
            &sides,
            cfg.report.trials,
            ctx.seed,
        )?;
        table.push(vec![
            "concentration".into(),
            "base_distance".into(),
            eps.into(),
            conc.base_distance.into(),
            format!("witness period {period}").into(),
        ]);
        for r in &conc.rows {
            table.push(vec![
                "concentration".into(),
                format!("inside_fraction N={} eps={}", r.side, r.eps).into(),
                eps.into(),
                r.fraction.into(),
                format!("{}/{} trials", r.inside, conc.trials).into(),
            ]);
        }
        table.push(vec![
            "concentration".into(),
            "monotone_in_side".into(),
            eps.into(),
            conc.monotone_in_side.into(),
            Cell::Empty,
        ]);
        table.push(vec![
            "concentration".into(),
            "monotone_in_eps".into(),
            eps.into(),
            conc.monotone_in_eps.into(),
            Cell::Empty,
        ]);
        let largest = sides.iter().copied().max().unwrap_or(0);
        let min_fraction = conc
            .rows
            .iter()
            .filter(|r| r.side == largest)
            .map(|r| r.fraction)
            .fold(f64::INFINITY, f64::min);
        table.push(vec![
            "concentration".into(),
            format!("fraction >= {CONCENTRATION_TARGET} at N={largest}").into(),
            eps.into(),
            (min_fraction >= CONCENTRATION_TARGET).into(),
            "arbitrary threshold, not a derived constant".into(),
        ]);
        summary.push(format!(
            "eps = {eps}: inside fraction at N = {largest} is {min_fraction}; monotone in N: {}",
            conc.monotone_in_side
        ));
    }
    Ok(ctx.outcome(table, summary, converged))
}

fn cyclic_vs_noncyclic(
    ctx: &Ctx,
    sides: &Sides,
    convention: WindowConvention,
) -> Result<Outcome, CliError> {
    let sets = ctx.model.forbidden_sets()?;
    let ns = resolve_sides(sides, &ctx.model.config.report.count_n);
    if ns.contains(&0) {
        return Err(usage("sides must be positive"));
    }
    let t = parallel::cyclic_vs_noncyclic(&sets, &ns, convention)?;
    let name = match convention {
        WindowConvention::Tiling => "tiling",
        WindowConvention::Shortened => "shortened",
    };
    let mut table = Table::new(&["n", "cyclic", "noncyclic", "contained", "gap", "convention"]);
    for r in &t.rows {
        table.push(vec![
            r.n.into(),
            r.cyclic.into(),
            r.noncyclic.into(),
            r.contained.into(),
            r.gap.into(),
            name.into(),
        ]);
    }
    let summary = vec![format!(
        "{name} convention: gap nonincreasing over the tested sides: {}",
        t.gap_decreasing
    )];
    Ok(ctx.outcome(table, summary, true))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!("4..7".parse::<Range>().unwrap(), Range { start: 4, end: 7 });
        assert_eq!("4:7".parse::<Range>().unwrap(), Range { start: 4, end: 7 });
        assert!("7..4".parse::<Range>().is_err());
        assert!("7".parse::<Range>().is_err());
    }

    #[test]
    fn grids() {
        let g: Grid = "0:0.25:6".parse().unwrap();
        let v = g.values();
        assert_eq!(v.len(), 6);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[5], 0.25);
        assert!("0:1".parse::<Grid>().is_err());
        assert!("0:1:0".parse::<Grid>().is_err());
    }

    #[test]
    fn exit_codes() {
        let guard = CliError::Core(Error::SearchSpaceTooLarge {
            bits: 60.0,
            limit: 48,
        });
        assert_eq!(guard.exit_code(), 3);
        assert_eq!(CliError::Core(Error::EmptyLanguage).exit_code(), 1);
        assert_eq!(usage("x").exit_code(), 2);
        let bad = CliError::Config(ConfigError::Model(Error::EmptyConstraintSet));
        assert_eq!(bad.exit_code(), 2);
    }
}
