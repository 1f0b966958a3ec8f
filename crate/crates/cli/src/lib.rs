//! `igs-lab`: validate iterated graph systems, solve their capacity problems,
//! classify energy measures and export replacement graphs.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use igs_core::igs::{parse_spec, preset, Igs};
use igs_core::measures::{singularity_report, DoublingReport, DEFAULT_ALPHA, DEFAULT_TOL};
use igs_core::pharmonic::{constants_from, solve_built_level, Profile, SolverOptions, DEFAULT_P_GRID};
use igs_core::replacement::LevelTower;

pub mod layout;
pub mod report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] igs_core::Error),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error("validation failed: {0}")]
    Invalid(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_input_error() => EXIT_INPUT,
            CliError::Core(_) => EXIT_NUMERIC,
            CliError::Read { .. } | CliError::Usage(_) | CliError::Invalid(_) => EXIT_INPUT,
            CliError::Write { .. } => EXIT_IO,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// println! that tolerates a closed stdout (e.g. piped into `head`).
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

/// The serialised (kebab-case) name of a verdict.
fn label<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => "?".into(),
    }
}

#[derive(Debug, Parser)]
#[command(name = "igs-lab", version, about = "Iterated graph systems: capacities, energy measures and singularity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a generator and gluing rules against the standing assumptions.
    Validate(Common),
    /// Solve the capacity problem for each exponent and report constants.
    Solve(Common),
    /// Energy-measure weights and the singularity classifiers.
    Classify(Common),
    /// Write G_n as DOT, SVG, CSV or JSON.
    Export(Common),
    /// Run the whole pipeline and write one JSON bundle.
    Report(Common),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Dot,
    Svg,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Spec file; same as --spec.
    #[arg(value_name = "SPEC", conflicts_with_all = ["preset", "spec"])]
    file: Option<PathBuf>,
    /// Built-in generator: path2, diamond, theta22, theta(k,L), pendant, lopsided.
    #[arg(long, conflicts_with = "spec")]
    preset: Option<String>,
    /// TOML spec file.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Exponent p > 1; repeatable.
    #[arg(long = "p", value_name = "X")]
    p: Vec<f64>,
    #[arg(long, value_name = "N")]
    level: Option<usize>,
    #[arg(long, value_name = "S", default_value_t = 0)]
    seed: u64,
    /// Tolerance override, e.g. weights=1e-8; repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tol: Vec<String>,
    /// Output format; repeatable.
    #[arg(long = "format", value_enum, value_name = "F")]
    format: Vec<Format>,
    #[arg(long, value_name = "DIR", default_value = "igs-out")]
    out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    /// Solver: max interior divergence of the unit flow.
    pub residual: f64,
    /// Conductive uniformity.
    pub uniformity: f64,
    /// Weight equality, flow invariance and gradient tests.
    pub weights: f64,
    /// Significance of the likelihood-ratio test.
    pub alpha: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            residual: SolverOptions::default().residual_tol,
            uniformity: 1e-7,
            weights: DEFAULT_TOL,
            alpha: DEFAULT_ALPHA,
        }
    }
}

impl Tolerances {
    fn apply(&mut self, spec: &str) -> CliResult<()> {
        let (name, value) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--tol expects NAME=VALUE, got {spec:?}")))?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("tolerance {name} is not a number: {value:?}")))?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::Usage(format!("tolerance {name} must be positive, got {v}")));
        }
        match name.trim() {
            "residual" => self.residual = v,
            "uniformity" => self.uniformity = v,
            "weights" => self.weights = v,
            "alpha" if v < 0.5 => self.alpha = v,
            "alpha" => return Err(CliError::Usage(format!("alpha must be below 0.5, got {v}"))),
            other => {
                return Err(CliError::Usage(format!(
                    "unknown tolerance {other:?} (known: residual, uniformity, weights, alpha)"
                )))
            }
        }
        Ok(())
    }

    pub fn solver(&self) -> SolverOptions {
        SolverOptions {
            residual_tol: self.residual,
            ..SolverOptions::default()
        }
    }
}

/// Everything that determines a run's output apart from the output path.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub source: String,
    pub p_list: Vec<f64>,
    pub level: Option<usize>,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub formats: Vec<Format>,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    spec_text: Option<String>,
}

impl RunConfig {
    fn from_common(c: Common) -> CliResult<Self> {
        let (source, spec_text) = match (c.preset, c.spec.or(c.file)) {
            (Some(name), None) => (format!("preset:{name}"), None),
            (None, Some(path)) => {
                let text = fs::read_to_string(&path).map_err(|source| CliError::Read {
                    path: path.clone(),
                    source,
                })?;
                (format!("spec:{}", path.display()), Some(text))
            }
            (None, None) => ("preset:path2".to_string(), None),
            (Some(_), Some(_)) => return Err(CliError::Usage("give either --preset or --spec".into())),
        };
        for &p in &c.p {
            if !(p.is_finite() && p > 1.0) {
                return Err(igs_core::Error::ExponentOutOfRange(p).into());
            }
        }
        let mut tolerances = Tolerances::default();
        for t in &c.tol {
            tolerances.apply(t)?;
        }
        let mut formats = c.format;
        formats.sort();
        formats.dedup();
        Ok(RunConfig {
            source,
            p_list: c.p,
            level: c.level,
            seed: c.seed,
            tolerances,
            formats,
            out: c.out,
            spec_text,
        })
    }

    pub fn load_igs(&self) -> CliResult<Igs> {
        match &self.spec_text {
            Some(text) => Ok(parse_spec(text)?),
            None => Ok(preset(self.source.trim_start_matches("preset:"))?),
        }
    }

    fn formats_or(&self, default: Format) -> Vec<Format> {
        if self.formats.is_empty() {
            vec![default]
        } else {
            self.formats.clone()
        }
    }

    /// Requested exponents, or the default grid.
    pub fn exponents(&self) -> Vec<f64> {
        if self.p_list.is_empty() {
            DEFAULT_P_GRID.to_vec()
        } else {
            self.p_list.clone()
        }
    }

    pub fn write(&self, name: &str, contents: &str) -> CliResult<PathBuf> {
        write_file(&self.out, name, contents)
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    let path = dir.join(name);
    fs::create_dir_all(dir)
        .and_then(|_| fs::write(&path, contents))
        .map_err(|source| CliError::Write {
            path: path.clone(),
            source,
        })?;
    Ok(path)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialise");
    s.push('\n');
    s
}

fn to_csv<T: Serialize>(rows: &[T]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)
            .map_err(|e| CliError::Usage(format!("csv encoding: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Usage(format!("csv encoding: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Text for a p value in file names: 2, 1.5, 1.25.
fn p_tag(p: f64) -> String {
    format!("{p}").replace('.', "_")
}

/// Exponent grid used for the hypotheses: the default grid plus requests.
fn union_grid(requested: &[f64]) -> Vec<f64> {
    let mut grid: Vec<f64> = DEFAULT_P_GRID.to_vec();
    grid.extend_from_slice(requested);
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    grid
}

pub fn cmd_validate(cfg: &RunConfig) -> CliResult<()> {
    let igs = cfg.load_igs()?;
    let rep = igs.validate();
    for c in &rep.checks.checks {
        say!("{} {:<20} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    for f in cfg.formats_or(Format::Json) {
        if f == Format::Json {
            cfg.write("validate.json", &to_json(&rep))?;
        }
    }
    if rep.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = rep.checks.failures().map(|c| c.name.as_str()).collect();
        Err(CliError::Invalid(failed.join(", ")))
    }
}

#[derive(Serialize)]
struct SolveResult {
    p: f64,
    constants: igs_core::pharmonic::ConstantsReport,
    uniformity_residuals: Vec<f64>,
    level: usize,
    /// Cap at `level` divided by M_p^level.
    scaling_ratio: f64,
    solution: igs_core::pharmonic::PotentialSolution,
}

#[derive(Serialize)]
struct EdgeRow {
    p: f64,
    edge: usize,
    word: String,
    plus: String,
    minus: String,
    gradient: f64,
    flow: f64,
}

pub fn cmd_solve(cfg: &RunConfig) -> CliResult<()> {
    let mut tower = LevelTower::new(cfg.load_igs()?)?;
    let level = cfg.level.unwrap_or(1);
    tower.ensure(level.max(1))?;
    let opts = cfg.tolerances.solver();
    let mut results = Vec::new();
    for p in cfg.exponents() {
        let prof = Profile::with_options(&tower, p, &opts)?;
        let constants = constants_from(&tower, &prof, cfg.tolerances.weights)?;
        let solution = if level == 1 {
            prof.solution.clone()
        } else {
            solve_built_level(&tower, level, p, &opts)?
        };
        let scaling_ratio = solution.capacity / prof.m_p.powi(level as i32);
        say!(
            "p = {p}: M_p = {:.12}, d_wp = {:.9}, Q = {:.9}, Cap(G_{level}) = {:.12e}",
            constants.m_p, constants.d_wp, constants.q, solution.capacity
        );
        results.push(SolveResult {
            p,
            uniformity_residuals: prof.uniformity_residuals(),
            constants,
            level,
            scaling_ratio,
            solution,
        });
    }
    for f in cfg.formats_or(Format::Json) {
        match f {
            Format::Json => {
                cfg.write("solve.json", &to_json(&results))?;
                let constants: Vec<_> = results.iter().map(|r| &r.constants).collect();
                cfg.write("constants.json", &to_json(&constants))?;
            }
            Format::Csv => {
                let lvl = tower.level(level)?;
                let letters = tower.letters();
                let constants: Vec<_> = results.iter().map(|r| &r.constants).collect();
                cfg.write("constants.csv", &to_csv(&constants)?)?;
                for r in &results {
                    let rows: Vec<EdgeRow> = (0..lvl.edge_count())
                        .map(|e| EdgeRow {
                            p: r.p,
                            edge: e,
                            word: igs_core::replacement::word_text(&igs_core::replacement::word_of(e, level, letters)),
                            plus: lvl.graph.label(lvl.plus(e)).to_string(),
                            minus: lvl.graph.label(lvl.minus(e)).to_string(),
                            gradient: r.solution.gradient[e],
                            flow: r.solution.flow[e],
                        })
                        .collect();
                    cfg.write(&format!("solve_p{}.csv", p_tag(r.p)), &to_csv(&rows)?)?;
                }
            }
            other => eprintln!("solve: format {other:?} not produced by this command"),
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct WeightRow {
    p: f64,
    edge: usize,
    weight: f64,
}

pub fn cmd_classify(cfg: &RunConfig) -> CliResult<()> {
    let tower = LevelTower::new(cfg.load_igs()?)?;
    let selected = cfg.exponents();
    let grid = union_grid(&selected);
    let opts = cfg.tolerances.solver();
    let profiles = grid
        .iter()
        .map(|&p| Profile::with_options(&tower, p, &opts))
        .collect::<igs_core::Result<Vec<_>>>()?;
    let rep = singularity_report(&tower, &profiles, &selected, cfg.tolerances.weights)?;
    for e in &rep.per_p {
        let doubling = match &e.doubling {
            DoublingReport::Doubling { constant, .. } => format!("doubling constant {constant:.6}"),
            DoublingReport::SigmaPorous { zero_edges, .. } => format!("sigma-porous, zero-energy edges {zero_edges:?}"),
        };
        say!("p = {}: {} vs reference, {doubling}", e.p, label(&e.vs_reference));
    }
    for (c, s) in rep.cross_p.iter().zip(&rep.sobolev) {
        say!(
            "({}, {}): energy measures {}, Sobolev spaces {}",
            c.p1,
            c.p2,
            if c.singular { "mutually singular" } else { "coincide" },
            label(&s.verdict)
        );
    }
    for f in cfg.formats_or(Format::Json) {
        match f {
            Format::Json => {
                cfg.write("classify.json", &to_json(&rep))?;
            }
            Format::Csv => {
                let rows: Vec<WeightRow> = rep
                    .per_p
                    .iter()
                    .flat_map(|e| {
                        e.weights.iter().enumerate().map(move |(edge, &weight)| WeightRow {
                            p: e.p,
                            edge,
                            weight,
                        })
                    })
                    .collect();
                cfg.write("weights.csv", &to_csv(&rows)?)?;
            }
            other => eprintln!("classify: format {other:?} not produced by this command"),
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct AddressRow<'a> {
    edge: usize,
    word: String,
    plus: &'a str,
    minus: &'a str,
}

pub fn cmd_export(cfg: &RunConfig) -> CliResult<()> {
    let mut tower = LevelTower::new(cfg.load_igs()?)?;
    let n = cfg.level.unwrap_or(2);
    tower.ensure(n)?;
    let lvl = tower.level(n)?;
    let letters = tower.letters();
    for f in cfg.formats_or(Format::Dot) {
        let path = match f {
            Format::Dot => cfg.write(&format!("g{n}.dot"), &lvl.to_dot(letters))?,
            Format::Svg => cfg.write(&format!("g{n}.svg"), &layout::svg(&tower, n)?)?,
            Format::Json => cfg.write(&format!("g{n}.json"), &to_json(&tower.address_table(n)?))?,
            Format::Csv => {
                let rows: Vec<AddressRow> = (0..lvl.edge_count())
                    .map(|e| AddressRow {
                        edge: e,
                        word: igs_core::replacement::word_text(&igs_core::replacement::word_of(e, n, letters)),
                        plus: lvl.graph.label(lvl.plus(e)),
                        minus: lvl.graph.label(lvl.minus(e)),
                    })
                    .collect();
                cfg.write(&format!("g{n}.csv"), &to_csv(&rows)?)?
            }
        };
        say!(
            "wrote {} ({} vertices, {} edges)",
            path.display(),
            lvl.vertex_count(),
            lvl.edge_count()
        );
    }
    Ok(())
}

pub fn cmd_report(cfg: &RunConfig) -> CliResult<()> {
    let bundle = report::build(cfg)?;
    let path = cfg.write("report.json", &to_json(&bundle))?;
    say!("wrote {}", path.display());
    Ok(())
}

fn configure_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("IGS_LAB_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("IGS_LAB_THREADS must be a positive integer, got {v:?}")))?;
        // a pool may already exist when called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let result = configure_threads().and_then(|_| {
        let (common, cmd): (Common, fn(&RunConfig) -> CliResult<()>) = match cli.command {
            Command::Validate(c) => (c, cmd_validate),
            Command::Solve(c) => (c, cmd_solve),
            Command::Classify(c) => (c, cmd_classify),
            Command::Export(c) => (c, cmd_export),
            Command::Report(c) => (c, cmd_report),
        };
        cmd(&RunConfig::from_common(common)?)
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("igs-lab: {e}");
            e.exit_code()
        }
    }
}
