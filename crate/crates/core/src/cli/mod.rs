//! Command-line front end: `solve`, `analyze`, `profile` and `scan`.
//!
//! Every command reads its parameters from flags or a JSON file and writes CSV tables plus JSON
//! reports into an output directory. Exit status is 0 on success, 1 for usage, configuration
//! and artifact errors, and 2 when a numerical method fails.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::blowup::{blowup_sequence, dyadic_sup};
use crate::error::{Error, Result};
use crate::io::{self, ProfileSummary};
use crate::polar::PolarField;
use crate::profiles::{
    closed_form_p0, cone_angles, ode_integrate, quadrature_profile, rigidity_scan, ConeAngles,
};
use crate::solver::{solve, solve_pinned, IterationRecord, ResidualReport, Solution, SolveConfig, StageReport};
use crate::solver::{FreeBoundaryRow, PinStep};
use crate::spruck::{energy_identity_residual, spruck_functional};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "freebound", version, about = "Polar free-boundary solver and blow-up analysis")]
pub struct Cli {
    /// Upper bound on worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the penalized problem described by a JSON run configuration.
    Solve {
        config: PathBuf,
        /// Output directory; overrides `output_dir` in the configuration.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analyze a solution written by `solve`.
    Analyze {
        #[arg(value_enum)]
        analysis: Analysis,
        /// Field CSV; its JSON sidecar must sit next to it.
        solution: PathBuf,
        /// Defaults to the directory holding the solution.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Smallest dyadic level of the blow-up sequence.
        #[arg(long, default_value_t = 1)]
        k_min: u32,
        /// Largest dyadic level; defaults to the deepest level the grid resolves.
        #[arg(long)]
        k_max: Option<u32>,
    },
    /// Build a homogeneous profile.
    Profile {
        #[arg(value_enum)]
        method: ProfileKind,
        #[arg(long, allow_negative_numbers = true)]
        p: f64,
        #[arg(long, allow_negative_numbers = true)]
        epsilon: f64,
        /// Integration step of the `ode` method.
        #[arg(long, default_value_t = 1e-4)]
        step: f64,
        /// Number of levels of the `quadrature` method.
        #[arg(long, default_value_t = 2048)]
        levels: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Integrality scan of `ω_ε` over an ε-grid.
    Scan {
        #[arg(long, default_value_t = -0.4, allow_negative_numbers = true)]
        lo: f64,
        #[arg(long, default_value_t = 0.4, allow_negative_numbers = true)]
        hi: f64,
        #[arg(long, default_value_t = 1e-4)]
        spacing: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Analysis {
    Blowup,
    Growth,
    Spruck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileKind {
    Closed,
    Ode,
    Quadrature,
}

/// Contents of the file passed to `solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub solver: SolveConfig,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Recorded in the report; the solver itself draws no random numbers.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Rescale the boundary data so the free boundary passes through the origin.
    #[serde(default)]
    pub pin: Option<PinConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PinConfig {
    pub probe: f64,
    /// Blow-up mean of `v/r^β`; defaults to the angular mean of the boundary trace.
    #[serde(default)]
    pub target: Option<f64>,
    #[serde(default = "default_pin_tol")]
    pub tol: f64,
    #[serde(default = "default_pin_solves")]
    pub max_solves: usize,
}

fn default_pin_tol() -> f64 {
    1e-6
}
fn default_pin_solves() -> usize {
    30
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.solver.validate()?;
        Ok(config)
    }
}

/// A solution, with the amplitude and search history when the data were pinned.
type SolveOutcome = (Solution, Option<(f64, Vec<PinStep>)>);

#[derive(Debug, Serialize)]
struct SolveReport<'a> {
    converged: bool,
    seed: Option<u64>,
    config: &'a SolveConfig,
    amplitude: Option<f64>,
    pin_history: Option<&'a [PinStep]>,
    stages: &'a [StageReport],
    monotone_continuation: bool,
    positivity_fraction: f64,
    residual: ResidualReport,
    warnings: &'a [String],
    free_boundary: &'a [FreeBoundaryRow],
    iterations: &'a [IterationRecord],
}

#[derive(Debug, Serialize)]
struct FailureReport<'a> {
    converged: bool,
    seed: Option<u64>,
    config: &'a SolveConfig,
    error: String,
    stage: Option<usize>,
    delta: Option<f64>,
    stages: &'a [StageReport],
    iterations: &'a [IterationRecord],
}

#[derive(Debug, Serialize)]
struct ProfileReport<'a> {
    #[serde(flatten)]
    summary: &'a ProfileSummary,
    cone: Option<ConeAngles>,
}

/// Exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NonConvergence(_) | Error::LinearSolve(_) | Error::Quadrature { .. } | Error::NonReturn => {
            EXIT_NUMERICAL
        }
        _ => EXIT_CONFIG,
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let run = || match &cli.command {
        Command::Solve { config, out } => cmd_solve(config, out.as_deref()),
        Command::Analyze {
            analysis,
            solution,
            out,
            k_min,
            k_max,
        } => cmd_analyze(solution, *analysis, out.as_deref(), *k_min, *k_max),
        Command::Profile {
            method,
            p,
            epsilon,
            step,
            levels,
            out,
        } => cmd_profile(*p, *epsilon, *method, *step, *levels, out),
        Command::Scan { lo, hi, spacing, out } => cmd_scan(*lo, *hi, *spacing, out),
    };
    match cli.threads {
        Some(0) => Err(Error::Config("--threads must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

fn read_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    // serde_json reports the line and column of syntax and schema errors.
    RunConfig::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Writes `solution.csv` (+ sidecar), `free_boundary.csv` and `report.json`; on solver failure
/// writes `diagnostics.json` and, when available, the last iterate as `partial.csv`.
pub fn cmd_solve(config_path: &Path, out: Option<&Path>) -> Result<()> {
    let run = read_config(config_path)?;
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| run.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    let cfg = &run.solver;

    let outcome: Result<SolveOutcome> = match &run.pin {
        None => solve(cfg).map(|s| (s, None)),
        Some(pin) => {
            let target = match pin.target {
                Some(t) => t,
                None => {
                    let trace = cfg.boundary_trace()?;
                    trace.iter().sum::<f64>() / trace.len() as f64 / cfg.grid.r_max().powf(cfg.beta())
                }
            };
            solve_pinned(cfg, pin.probe, target, pin.tol, pin.max_solves)
                .map(|p| (p.solution, Some((p.amplitude, p.history))))
        }
    };
    let (solution, pinned) = match outcome {
        Ok(v) => v,
        Err(err) => {
            write_failure(&dir, &run, &err)?;
            return Err(err);
        }
    };
    io::write_field(&dir.join("solution.csv"), &solution.field)?;
    io::write_free_boundary_csv(&dir.join("free_boundary.csv"), &solution.free_boundary)?;
    let report = SolveReport {
        converged: true,
        seed: run.seed,
        config: cfg,
        amplitude: pinned.as_ref().map(|p| p.0),
        pin_history: pinned.as_ref().map(|p| p.1.as_slice()),
        stages: &solution.stages,
        monotone_continuation: solution.monotone_continuation,
        positivity_fraction: solution.positivity_fraction,
        residual: solution.residual_report(&cfg.model, cfg.p)?,
        warnings: &solution.warnings,
        free_boundary: &solution.free_boundary,
        iterations: &solution.log,
    };
    io::write_json(&dir.join("report.json"), &report)
}

fn write_failure(dir: &Path, run: &RunConfig, err: &Error) -> Result<()> {
    let failure = match err {
        Error::NonConvergence(f) => Some(f.as_ref()),
        _ => None,
    };
    let report = FailureReport {
        converged: false,
        seed: run.seed,
        config: &run.solver,
        error: err.to_string(),
        stage: failure.map(|f| f.stage),
        delta: failure.map(|f| f.delta),
        stages: failure.map_or(&[], |f| f.stages.as_slice()),
        iterations: failure.map_or(&[], |f| f.log.as_slice()),
    };
    io::write_json(&dir.join("diagnostics.json"), &report)?;
    if let Some(partial) = failure.and_then(|f| f.partial.as_ref()) {
        io::write_field(&dir.join("partial.csv"), partial)?;
    }
    Ok(())
}

/// Deepest dyadic level with `2^{-k}` still above the innermost valid radius.
fn deepest_level(field: &PolarField) -> u32 {
    let r_in = field.grid().r_values()[field.valid_rows().start];
    let mut k = 0;
    while 2f64.powi(-(k as i32 + 1)) >= r_in * (1.0 - 1e-12) {
        k += 1;
    }
    k
}

pub fn cmd_analyze(solution: &Path, analysis: Analysis, out: Option<&Path>, k_min: u32, k_max: Option<u32>) -> Result<()> {
    let field = io::read_field(solution)?;
    let beta = field.beta()?;
    let dir = match out {
        Some(d) => d.to_path_buf(),
        None => solution.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(".")),
    };
    fs::create_dir_all(&dir)?;
    let deepest = deepest_level(&field);
    match analysis {
        Analysis::Growth => {
            let report = dyadic_sup(&field, k_max.unwrap_or(deepest))?;
            io::write_dyadic_csv(&dir.join("dyadic.csv"), &report)?;
            io::write_json(&dir.join("growth.json"), &report)
        }
        Analysis::Blowup => {
            // The deviation window [1/2, 1] of the last rescaling must stay resolved.
            let k_hi = k_max.unwrap_or(deepest.saturating_sub(1));
            if k_hi < k_min {
                return Err(Error::Coverage(format!("empty blow-up range {k_min}..={k_hi}")));
            }
            let report = blowup_sequence(&field, beta, k_min..=k_hi)?;
            io::write_deviation_csv(&dir.join("deviations.csv"), &report)?;
            io::write_json(&dir.join("blowup.json"), &report)
        }
        Analysis::Spruck => {
            let report = spruck_functional(&field, beta)?;
            io::write_annuli_csv(&dir.join("annuli.csv"), &report)?;
            io::write_json(&dir.join("spruck.json"), &report)
        }
    }
}

/// Writes `profile.csv` and `profile.json`.
pub fn cmd_profile(p: f64, epsilon: f64, method: ProfileKind, step: f64, levels: usize, out: &Path) -> Result<()> {
    let profile = match method {
        ProfileKind::Closed => {
            if p != 0.0 {
                return Err(Error::ParameterRange(format!("the closed form exists for p = 0 only, got p = {p}")));
            }
            closed_form_p0(epsilon)?
        }
        ProfileKind::Ode => ode_integrate(p, epsilon, step)?,
        ProfileKind::Quadrature => quadrature_profile(p, epsilon, levels)?,
    };
    let residual = energy_identity_residual(&profile);
    let path = out.join("profile.csv");
    io::write_profile(&path, &profile, residual)?;
    // Overwrite the plain summary with one that also carries the cone geometry.
    let summary = ProfileSummary::new(&profile, residual);
    let cone = if p == 0.0 { Some(cone_angles(epsilon)?) } else { None };
    io::write_json(&io::sidecar_path(&path), &ProfileReport { summary: &summary, cone })
}

/// ε-grid `{i·spacing}` inside `[lo, hi]`, so that `ε = 0` is hit exactly when it is in range.
pub fn scan_grid(lo: f64, hi: f64, spacing: f64) -> Result<Vec<f64>> {
    if !(spacing > 0.0 && lo <= hi && lo.is_finite() && hi.is_finite()) {
        return Err(Error::ParameterRange(format!("bad scan range [{lo}, {hi}] with spacing {spacing}")));
    }
    let first = (lo / spacing - 1e-9).ceil() as i64;
    let last = (hi / spacing + 1e-9).floor() as i64;
    if last - first > 100_000_000 {
        return Err(Error::ParameterRange("scan grid exceeds 10^8 points".into()));
    }
    Ok((first..=last).map(|i| i as f64 * spacing).collect())
}

/// Writes `rigidity.json` and `rigidity.csv`.
pub fn cmd_scan(lo: f64, hi: f64, spacing: f64, out: &Path) -> Result<()> {
    let grid = scan_grid(lo, hi, spacing)?;
    let report = rigidity_scan(&grid)?;
    fs::create_dir_all(out)?;
    io::write_table(
        &out.join("rigidity.csv"),
        &["epsilon", "omega", "distance"],
        report.rows.iter().map(|r| vec![r.epsilon, r.omega, r.distance]),
    )?;
    io::write_json(&out.join("rigidity.json"), &report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scan_grid_hits_zero_exactly() {
        let g = scan_grid(-0.4, 0.4, 1e-4).unwrap();
        assert_eq!(g.len(), 8001);
        assert_eq!(g[4000], 0.0);
        assert!((g[0] + 0.4).abs() < 1e-12 && (g[8000] - 0.4).abs() < 1e-12);
        assert!(scan_grid(0.4, -0.4, 1e-4).is_err());
    }

    #[test]
    fn usage_errors_exit_with_one() {
        assert_eq!(run(["freebound", "frobnicate"]), EXIT_CONFIG);
        assert_eq!(run(["freebound", "profile", "closed", "--p", "0"]), EXIT_CONFIG);
        assert_eq!(run(["freebound", "--help"]), EXIT_OK);
    }

    #[test]
    fn closed_form_needs_p_zero() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        let args = ["freebound", "profile", "closed", "--p", "0.5", "--epsilon", "0.1", "--out", out];
        assert_eq!(run(args), EXIT_CONFIG);
    }

    #[test]
    fn run_config_rejects_unknown_keys() {
        let text = r#"{"solver": {"model": {"kind": "planar2d", "epsilon": 0.1}, "p": 0.0,
            "grid": {"spacing": "uniform", "r_min": 0.01, "n_r": 20, "n_theta": 16},
            "boundary": {"kind": "zero"}}, "colour": "blue"}"#;
        let err = RunConfig::from_json(text).unwrap_err().to_string();
        assert!(err.contains("colour") && err.contains("line 3"), "{err}");
    }

    #[test]
    fn zero_threads_rejected() {
        assert_eq!(run(["freebound", "--threads", "0", "scan", "--lo", "0", "--hi", "0.01"]), EXIT_CONFIG);
    }
}
