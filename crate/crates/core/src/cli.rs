//! Command-line surface: JSON run configuration, the derivation pipeline,
//! CSV field export and figure-data generation.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{
    construct_raw, construct_solution, BranchSign, ConstructOptions, Family, FamilyInputs, SolutionDescriptor,
    TurningRoot,
};
use crate::grid::Grid;
use crate::params::{derive_coefficients, DerivedCoefficients, ProblemParams};
use crate::quartic::{build_quartic, classify_roots, find_roots, QuarticPoly, RootClassification, DEFAULT_CLUSTER_TOL};
use crate::verify::{ode_identity_residual, pde_residual_with, verify_samples, FieldSample, PdeOptions, DEFAULT_EXCLUSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Header of exported field grids.
pub const FIELD_HEADER: [&str; 6] = ["x", "y", "t", "re_q", "im_q", "abs_q"];
/// Header of the fixed-`t` figure slice.
pub const SLICE_HEADER: [&str; 5] = ["x", "y", "re_q", "im_q", "abs_q"];

/// `Γ` samples for the identity check reported by `verify`.
const IDENTITY_SAMPLES: [f64; 8] = [-2.0, -1.0, -0.5, 0.0, 0.3, 1.0, 2.0, 3.5];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Derive,
    Roots,
    Solve,
    Eval,
    Verify,
    Figure,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Derive => "derive",
            Mode::Roots => "roots",
            Mode::Solve => "solve",
            Mode::Eval => "eval",
            Mode::Verify => "verify",
            Mode::Figure => "figure",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunOptions {
    pub reduced: bool,
    pub eta0: f64,
    pub branch_sign: BranchSign,
    pub turning_root: TurningRoot,
    pub real_only: bool,
    pub cluster_tol: f64,
    pub stencil_order: u32,
    pub fd_step: f64,
    pub exclusion: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            reduced: false,
            eta0: 0.0,
            branch_sign: BranchSign::Plus,
            turning_root: TurningRoot::Auto,
            real_only: false,
            cluster_tol: DEFAULT_CLUSTER_TOL,
            stencil_order: 4,
            fd_step: 0.05,
            exclusion: DEFAULT_EXCLUSION,
        }
    }
}

impl RunOptions {
    pub fn construct(&self) -> ConstructOptions {
        ConstructOptions {
            reduced: self.reduced,
            eta0: self.eta0,
            branch_sign: self.branch_sign,
            turning_root: self.turning_root,
            real_only: self.real_only,
        }
    }

    pub fn pde(&self) -> PdeOptions {
        PdeOptions {
            step: self.fd_step,
            stencil_order: self.stencil_order,
            exclusion: self.exclusion,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub params: Option<ProblemParams>,
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub grid: Option<Grid>,
    #[serde(default)]
    pub options: RunOptions,
    #[serde(default)]
    pub figure_id: Option<u8>,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks the cross-field invariants for `mode`.
    pub fn validate(&self, mode: Mode) -> Result<()> {
        if let Some(m) = self.mode {
            if m != mode {
                return Err(Error::Config(format!(
                    "config mode {} conflicts with subcommand {}",
                    m.name(),
                    mode.name()
                )));
            }
        }
        match (mode, self.figure_id) {
            (Mode::Figure, None) => return Err(Error::Config("figure mode needs figure_id".into())),
            (Mode::Figure, Some(id)) if !(1..=6).contains(&id) => {
                return Err(Error::Config(format!("figure_id must be 1-6, got {id}")))
            }
            (Mode::Figure, _) => {}
            (_, Some(_)) => return Err(Error::Config("figure_id is only valid in figure mode".into())),
            (_, None) => {}
        }
        if mode != Mode::Figure && self.params.is_none() {
            return Err(Error::Config(format!("{} mode needs params", mode.name())));
        }
        if matches!(mode, Mode::Eval | Mode::Verify) {
            self.grid
                .as_ref()
                .ok_or_else(|| Error::Config(format!("{} mode needs a grid", mode.name())))?
                .validate()?;
        }
        if let Some(g) = &self.grid {
            g.validate()?;
        }
        let o = &self.options;
        if !(o.cluster_tol > 0.0) {
            return Err(Error::Config(format!("cluster_tol must be positive, got {}", o.cluster_tol)));
        }
        if !(o.fd_step > 0.0 && o.fd_step.is_finite()) {
            return Err(Error::Config(format!("fd_step must be positive, got {}", o.fd_step)));
        }
        if !matches!(o.stencil_order, 2 | 4) {
            return Err(Error::Config(format!("stencil_order must be 2 or 4, got {}", o.stencil_order)));
        }
        Ok(())
    }
}

/// Result of a run: the text report and any files written.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    pub report: String,
    pub files: Vec<PathBuf>,
}

/// Everything computed from the parameters up to the family descriptor.
pub struct Pipeline {
    pub params: ProblemParams,
    pub derived: DerivedCoefficients,
    pub quartic: QuarticPoly,
    pub classification: RootClassification,
}

impl Pipeline {
    pub fn new(params: &ProblemParams, cluster_tol: f64) -> Result<Self> {
        let derived = derive_coefficients(params)?;
        let quartic = build_quartic(params, &derived);
        let classification = classify_roots(&find_roots(&quartic), cluster_tol)?;
        Ok(Self {
            params: *params,
            derived,
            quartic,
            classification,
        })
    }

    pub fn solution(&self, options: &ConstructOptions) -> Result<SolutionDescriptor> {
        construct_solution(&self.classification, &self.params, &self.derived, options)
    }
}

fn push_kv(out: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{key}={value}");
}

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_c(z: Complex64) -> String {
    format!("{:.16e}{:+.16e}i", z.re, z.im)
}

pub fn derived_key_values(d: &DerivedCoefficients) -> Vec<(&'static str, String)> {
    vec![
        ("xi0", d.xi0.to_string()),
        ("xi2", d.xi2.to_string()),
        ("zeta0", d.zeta0.to_string()),
        ("tau1", d.tau1.to_string()),
        ("chi3", d.chi3.to_string()),
        ("omega3", d.omega3.to_string()),
        ("upsilon", d.upsilon.to_string()),
        ("a_squared", d.a_squared.to_string()),
        ("a_re", d.a_const.re.to_string()),
        ("a_im", d.a_const.im.to_string()),
    ]
}

fn roots_report(pipe: &Pipeline) -> String {
    let mut out = String::new();
    let q = &pipe.quartic;
    for (key, v) in [("c3", q.c3), ("c2", q.c2), ("c1", q.c1), ("c0", q.c0)] {
        push_kv(&mut out, key, fmt_f(v));
    }
    for (i, r) in pipe.classification.roots_raw.iter().enumerate() {
        push_kv(&mut out, &format!("root{}", i + 1), fmt_c(*r));
    }
    let pattern = &pipe.classification.pattern;
    push_kv(&mut out, "pattern", pattern.name());
    if let Some(ms) = pattern.multiset() {
        let joined: Vec<String> = ms.iter().map(|r| fmt_f(*r)).collect();
        push_kv(&mut out, "alphas", joined.join(","));
    }
    if let Some(l2) = pipe.classification.modulus_sq() {
        push_kv(&mut out, "l_squared", fmt_f(l2));
    }
    push_kv(&mut out, "cluster_tol", pipe.classification.cluster_tol);
    out
}

fn descriptor_report(desc: &SolutionDescriptor) -> String {
    let mut out = String::new();
    for (k, v) in desc.key_values() {
        push_kv(&mut out, &k, v);
    }
    out
}

/// Field rows for `points`; singular points are written as NaN.
fn field_rows(desc: &SolutionDescriptor, points: &[[f64; 3]]) -> Result<Vec<([f64; 3], Complex64)>> {
    points
        .iter()
        .map(|&p| match desc.evaluate_field(p[0], p[1], p[2]) {
            Ok(q) => Ok((p, q)),
            Err(Error::SingularPoint { .. }) => Ok((p, Complex64::new(f64::NAN, f64::NAN))),
            Err(e) => Err(e),
        })
        .collect()
}

pub fn write_field_csv(path: &Path, rows: &[([f64; 3], Complex64)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(FIELD_HEADER)?;
    for (p, q) in rows {
        w.write_record([fmt_f(p[0]), fmt_f(p[1]), fmt_f(p[2]), fmt_f(q.re), fmt_f(q.im), fmt_f(q.norm())])?;
    }
    w.flush()?;
    Ok(())
}

fn write_slice_csv(path: &Path, rows: &[([f64; 3], Complex64)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SLICE_HEADER)?;
    for (p, q) in rows {
        w.write_record([fmt_f(p[0]), fmt_f(p[1]), fmt_f(q.re), fmt_f(q.im), fmt_f(q.norm())])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a field CSV written by `eval`.
pub fn read_field_csv(path: &Path) -> Result<Vec<FieldSample>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != FIELD_HEADER {
        return Err(Error::Config(format!("unexpected field header {header:?}")));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad number {:?}: {e}", &rec[i])))
        };
        out.push(([num(0)?, num(1)?, num(2)?], Complex64::new(num(3)?, num(4)?)));
    }
    Ok(out)
}

/// Caption parameters of one figure.
#[derive(Clone, Debug, PartialEq)]
pub struct FigureSpec {
    pub id: u8,
    pub family: Family,
    pub roots: Vec<f64>,
    /// Which part of `q` the caption plots.
    pub plotted: &'static str,
    pub inputs: FamilyInputs,
    pub xi3: f64,
    pub xi4: f64,
}

/// Constants from the six figure captions. Every caption fixes
/// `m = k = τ₀ = τ₁ = ξ₃ = ξ₄ = ω₂ = χ₁ = 1`, `ω₃ = χ₂ = 2`, `χ₃ = 3`,
/// `ω₁ = −1`; the roots and the plotted part vary.
pub fn figure_spec(id: u8) -> Result<FigureSpec> {
    let (family, roots) = match id {
        1 | 2 => (Family::Q3, vec![2.0, 1.0]),
        3 | 4 => (Family::Q4, vec![1.0, 2.0, 3.0]),
        5 | 6 => (Family::Q5, vec![1.0, 2.0, 3.0, 4.0]),
        _ => return Err(Error::Config(format!("figure_id must be 1-6, got {id}"))),
    };
    let (m, k, tau0, xi3, xi4) = (1.0, 1.0, 1.0, 1.0, 1.0);
    let (omega1, omega2): (f64, f64) = (-1.0, 1.0);
    let w = omega1 * omega1 + omega2 * omega2;
    let upsilon = 1.0 + 2.0 * m + 4.0 * k * (1.0 + m) * tau0;
    // amplitude constant as printed for the captions
    let a2 = k * (1.0 + m) * (1.0 + m) * (1.0 + 2.0 * m) * w * xi3 * xi3 / (8.0 * m * m * xi4 * xi4 * upsilon * upsilon);
    Ok(FigureSpec {
        id,
        family,
        roots,
        plotted: if id % 2 == 1 { "imaginary" } else { "real" },
        inputs: FamilyInputs {
            m,
            k,
            tau0,
            tau1: 1.0,
            a_const: Complex64::new(a2.sqrt(), 0.0),
            phase: [1.0, 2.0, 3.0],
            wave: [omega1, omega2, 2.0],
        },
        xi3,
        xi4,
    })
}

/// Default figure grid. The `y` axis is offset by half a cell from `x` so
/// that `η = −x + y + 2t` stays off the Q3 pole line.
pub fn default_figure_grid() -> Grid {
    Grid {
        x_min: -3.0,
        x_max: 3.0,
        nx: 61,
        y_min: -2.95,
        y_max: 2.95,
        ny: 60,
        t_min: 0.0,
        t_max: 2.0,
        nt: 3,
    }
}

pub fn figure_descriptor(id: u8, options: &RunOptions) -> Result<SolutionDescriptor> {
    let spec = figure_spec(id)?;
    let opts = ConstructOptions {
        reduced: true,
        ..options.construct()
    };
    construct_raw(spec.family, &spec.roots, &spec.inputs, &opts)
}

/// Path of the `t = 1` slice next to the 3D grid file.
pub fn slice_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = out.extension().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
    out.with_file_name(format!("{stem}_t1.{ext}"))
}

fn require_out(config: &RunConfig, mode: Mode) -> Result<PathBuf> {
    config
        .output_path
        .clone()
        .ok_or_else(|| Error::Config(format!("{} mode needs an output path", mode.name())))
}

/// Runs one mode. Text reports are returned; grids are written to disk.
pub fn run(config: &RunConfig, mode: Mode) -> Result<Outcome> {
    run_with_samples(config, mode, None)
}

/// Like [`run`]; in `verify` mode, `samples` names a field CSV to re-verify
/// instead of the configured grid.
pub fn run_with_samples(config: &RunConfig, mode: Mode, samples: Option<&Path>) -> Result<Outcome> {
    config.validate(mode)?;
    let opts = &config.options;
    let mut out = Outcome::default();

    if mode == Mode::Figure {
        let id = config.figure_id.expect("validated");
        let spec = figure_spec(id)?;
        let desc = figure_descriptor(id, opts)?;
        let grid = config.grid.unwrap_or_else(default_figure_grid);
        if !grid.ts().contains(&1.0) {
            return Err(Error::Config("figure grid must contain t = 1 exactly".into()));
        }
        let path = require_out(config, mode)?;
        let rows = field_rows(&desc, &grid.points())?;
        write_field_csv(&path, &rows)?;
        let plane: Vec<[f64; 3]> = grid
            .xs()
            .iter()
            .flat_map(|&x| grid.ys().into_iter().map(move |y| [x, y, 1.0]))
            .collect();
        let slice = slice_path(&path);
        write_slice_csv(&slice, &field_rows(&desc, &plane)?)?;
        push_kv(&mut out.report, "figure_id", id);
        push_kv(&mut out.report, "family", desc.family);
        push_kv(&mut out.report, "plotted", spec.plotted);
        push_kv(&mut out.report, "grid_file", path.display());
        push_kv(&mut out.report, "slice_file", slice.display());
        out.report.push_str(&descriptor_report(&desc));
        out.files = vec![path, slice];
        return Ok(out);
    }

    let params = config.params.as_ref().expect("validated");
    if mode == Mode::Derive {
        let d = derive_coefficients(params)?;
        for (k, v) in derived_key_values(&d) {
            push_kv(&mut out.report, k, v);
        }
        return Ok(out);
    }

    let pipe = Pipeline::new(params, opts.cluster_tol)?;
    match mode {
        Mode::Roots => out.report = roots_report(&pipe),
        Mode::Solve => out.report = descriptor_report(&pipe.solution(&opts.construct())?),
        Mode::Eval => {
            let desc = pipe.solution(&opts.construct())?;
            let grid = config.grid.expect("validated");
            let path = require_out(config, mode)?;
            write_field_csv(&path, &field_rows(&desc, &grid.points())?)?;
            push_kv(&mut out.report, "family", desc.family);
            push_kv(&mut out.report, "n_points", grid.len());
            push_kv(&mut out.report, "grid_file", path.display());
            out.files.push(path);
        }
        Mode::Verify => {
            let desc = pipe.solution(&opts.construct())?;
            let identity = ode_identity_residual(&pipe.params, &pipe.derived, &IDENTITY_SAMPLES);
            push_kv(&mut out.report, "family", desc.family);
            push_kv(&mut out.report, "identity_residual", format!("{identity:.6e}"));
            let report = match samples {
                Some(path) => {
                    let rows = read_field_csv(path)?;
                    let (report, mismatch) = verify_samples(&desc, &rows, &opts.pde())?;
                    push_kv(&mut out.report, "sample_mismatch", format!("{mismatch:.6e}"));
                    report
                }
                None => pde_residual_with(&desc, config.grid.as_ref().expect("validated"), &opts.pde())?,
            };
            for (k, v) in report.key_values() {
                push_kv(&mut out.report, &k, v);
            }
            if let Some(path) = &config.output_path {
                fs::write(path, &out.report)?;
                out.files.push(path.clone());
            }
        }
        Mode::Derive | Mode::Figure => unreachable!(),
    }
    Ok(out)
}

/// Machine-readable error document.
pub fn error_document(err: &Error) -> String {
    serde_json::json!({
        "error": err.kind(),
        "module": err.module(),
        "message": err.to_string(),
        "exit_code": exit_code(err),
    })
    .to_string()
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_validation() {
        EXIT_VALIDATION
    } else {
        EXIT_NUMERIC
    }
}

#[derive(Debug, Parser)]
#[command(name = "dualnls", version, about = "Trial-equation solutions of the dual-power NLSE")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output path (overrides the configured one).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub cluster_tol: Option<f64>,
    #[arg(long, global = true)]
    pub fd_step: Option<f64>,
    #[arg(long, global = true)]
    pub stencil_order: Option<u32>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the derived coefficients.
    Derive,
    /// Print the quartic, its roots and the multiplicity pattern.
    Roots,
    /// Print the solution descriptor.
    Solve,
    /// Write the field on the configured grid as CSV.
    Eval,
    /// Report identity and finite-difference residuals.
    Verify {
        /// Re-verify the points of a previously exported field CSV.
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Write figure data (3D grid and t = 1 slice) for a caption parameter set.
    Figure {
        /// Figure number, 1-6 (overrides the configured one).
        #[arg(long)]
        id: Option<u8>,
    },
}

impl Cli {
    /// Merges the flags into the configuration.
    pub fn resolve(&self) -> Result<(RunConfig, Mode, Option<PathBuf>)> {
        let mut config = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(o) = &self.out {
            config.output_path = Some(o.clone());
        }
        if let Some(v) = self.cluster_tol {
            config.options.cluster_tol = v;
        }
        if let Some(v) = self.fd_step {
            config.options.fd_step = v;
        }
        if let Some(v) = self.stencil_order {
            config.options.stencil_order = v;
        }
        let (mode, samples) = match &self.command {
            Command::Derive => (Mode::Derive, None),
            Command::Roots => (Mode::Roots, None),
            Command::Solve => (Mode::Solve, None),
            Command::Eval => (Mode::Eval, None),
            Command::Verify { samples } => (Mode::Verify, samples.clone()),
            Command::Figure { id } => {
                if id.is_some() {
                    config.figure_id = *id;
                }
                (Mode::Figure, None)
            }
        };
        Ok((config, mode, samples))
    }
}

/// Parses `args`, runs, prints, and returns the process exit code.
pub fn main_entry<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    let result = cli
        .resolve()
        .and_then(|(config, mode, samples)| run_with_samples(&config, mode, samples.as_deref()));
    match result {
        Ok(outcome) => {
            print!("{}", outcome.report);
            EXIT_OK
        }
        Err(err) => {
            eprintln!("{}", error_document(&err));
            exit_code(&err)
        }
    }
}
