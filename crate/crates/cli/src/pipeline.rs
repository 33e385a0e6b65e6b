//! The profile -> solve -> verify -> stability pipeline.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use saddle_core::estimates::{
    default_slack, modica_check, modica_check_profile, pointwise_bound_check, supersolution_check, EstimateReport,
};
use saddle_core::nonlinearity::{HypothesisReport, Nonlinearity};
use saddle_core::profile1d::{Profile1D, ProfileSummary};
use saddle_core::solver::{
    energy_growth_study, reflect_odd, solve, Boundary, BoundaryMode, EnergyGrowth, Field, SaddleField, SolveReport,
};
use saddle_core::stability::{
    asymptotic_functional, cone_vanishing_stability_probe, hardy_margin, instability_sweep, linearized_spectrum,
    quadratic_form_yz, separable_form, wedge_constant, Background, FormOptions, InstabilitySweep, ProbeReport,
    QuadraticFormReport, Separable, SpectrumOptions, SpectrumReport,
};
use serde::Serialize;

use crate::config::{ConfigError, ExperimentConfig, StabilityMode, Stage};
use crate::report::{write_csv, write_json, SCHEMA};

#[derive(Debug)]
pub enum PipelineError {
    Config(ConfigError),
    Solver(saddle_core::Error),
    Io(String),
}

impl PipelineError {
    /// 2 for configuration problems, 3 for numerical failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Solver(_) => 3,
            PipelineError::Io(_) => 1,
        }
    }
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PipelineError::Config(e) => write!(f, "{e}"),
            PipelineError::Solver(e) => write!(f, "solver failure: {e}"),
            PipelineError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for PipelineError {}

impl From<ConfigError> for PipelineError {
    fn from(e: ConfigError) -> Self {
        PipelineError::Config(e)
    }
}

impl From<saddle_core::Error> for PipelineError {
    fn from(e: saddle_core::Error) -> Self {
        PipelineError::Solver(e)
    }
}

impl From<std::io::Error> for PipelineError {
    fn from(e: std::io::Error) -> Self {
        PipelineError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub artifacts: Vec<PathBuf>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// 0 when every enabled check passed, 4 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            4
        }
    }
}

#[derive(Serialize)]
struct ProfileDoc<'a> {
    nonlinearity: &'a str,
    hypotheses: HypothesisReport,
    summary: ProfileSummary,
    pass: bool,
}

#[derive(Serialize)]
struct ProfileRow {
    tau: f64,
    u0: f64,
    u0dot: f64,
}

#[derive(Serialize)]
struct GridInfo {
    m: usize,
    radius: f64,
    h: f64,
    nodes: usize,
    boundary: BoundaryMode,
}

#[derive(Serialize)]
struct SolveDoc<'a> {
    grid: GridInfo,
    report: &'a SolveReport,
    pass: bool,
}

#[derive(Serialize)]
struct FieldRow {
    i: usize,
    j: usize,
    s: f64,
    t: f64,
    class: &'static str,
    u: f64,
}

#[derive(Serialize)]
struct GrowthDoc {
    growth: EnergyGrowth,
    expected_slope: f64,
    window: f64,
    pass: bool,
}

#[derive(Serialize)]
struct VerifyDoc {
    slack: f64,
    checks: Vec<EstimateReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    energy_growth: Option<GrowthDoc>,
    pass: bool,
}

#[derive(Serialize)]
struct HardyDoc {
    margin: f64,
    asymptotic_functional: f64,
    asymptotic_functional_exact: f64,
    kinetic_integral: f64,
}

#[derive(Serialize)]
struct FormPoint {
    a: f64,
    separable: QuadraticFormReport,
    direct: QuadraticFormReport,
    /// `c_m` times the direct value: the full-space second variation.
    full_space: f64,
}

#[derive(Serialize)]
struct SweepRow {
    a: f64,
    value: f64,
    gradient_term: f64,
    potential_term: f64,
    boundary_term: f64,
}

#[derive(Default, Serialize)]
struct StabilityDoc {
    m: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    hardy: Option<HardyDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<InstabilitySweep>,
    #[serde(skip_serializing_if = "Option::is_none")]
    form: Option<Vec<FormPoint>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    spectrum: Option<SpectrumReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    annuli: Vec<SpectrumReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    probe: Option<ProbeReport>,
    pass: bool,
}

#[derive(Serialize)]
struct StageTime {
    stage: String,
    wall_seconds: f64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema: u32,
    tool: &'static str,
    version: &'static str,
    config_sha256: String,
    seed: u64,
    stages: Vec<StageTime>,
    artifacts: Vec<String>,
    checks: &'a [Check],
    exit_code: i32,
}

/// Worker cap from `SADDLE_LAB_THREADS`, else the available parallelism.
pub fn worker_count() -> usize {
    std::env::var("SADDLE_LAB_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

struct Run<'a> {
    cfg: &'a ExperimentConfig,
    out: &'a Path,
    artifacts: Vec<PathBuf>,
    checks: Vec<Check>,
    times: Vec<StageTime>,
}

impl Run<'_> {
    fn json<R: Serialize>(&mut self, name: &str, kind: &str, body: &R) -> Result<(), PipelineError> {
        let path = self.out.join(name);
        write_json(&path, kind, body)?;
        self.artifacts.push(path);
        Ok(())
    }

    fn csv<R: Serialize>(&mut self, name: &str, rows: impl IntoIterator<Item = R>) -> Result<(), PipelineError> {
        let path = self.out.join(name);
        write_csv(&path, rows)?;
        self.artifacts.push(path);
        Ok(())
    }

    fn check(&mut self, name: &str, pass: bool) {
        self.checks.push(Check { name: name.to_string(), pass });
    }

    fn time(&mut self, stage: &str, start: Instant) {
        self.times.push(StageTime { stage: stage.to_string(), wall_seconds: start.elapsed().as_secs_f64() });
    }
}

/// Runs the enabled stages in order and writes reports under `cfg.output`.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<Outcome, PipelineError> {
    cfg.validate()?;
    let nl = cfg.build_nonlinearity()?;
    fs::create_dir_all(&cfg.output)?;
    let mut run = Run { cfg, out: &cfg.output, artifacts: Vec::new(), checks: Vec::new(), times: Vec::new() };
    let result = run_stages(&mut run, &nl);
    let code = match &result {
        Ok(()) => {
            if run.checks.iter().all(|c| c.pass) {
                0
            } else {
                4
            }
        }
        Err(e) => e.exit_code(),
    };
    write_manifest(&mut run, code)?;
    result?;
    Ok(Outcome { checks: run.checks, artifacts: run.artifacts })
}

fn write_manifest(run: &mut Run<'_>, code: i32) -> Result<(), PipelineError> {
    let path = run.out.join("manifest.json");
    let artifacts = run
        .artifacts
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    let m = Manifest {
        schema: SCHEMA,
        tool: "saddle-lab",
        version: env!("CARGO_PKG_VERSION"),
        config_sha256: run.cfg.hash(),
        seed: run.cfg.seed,
        stages: std::mem::take(&mut run.times),
        artifacts,
        checks: &run.checks,
        exit_code: code,
    };
    let mut text = serde_json::to_string_pretty(&m).map_err(|e| PipelineError::Io(e.to_string()))?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(())
}

fn run_stages(run: &mut Run<'_>, nl: &Nonlinearity<f64>) -> Result<(), PipelineError> {
    let cfg = run.cfg;
    let path = run.out.join("config.toml");
    fs::write(&path, cfg.to_toml())?;
    run.artifacts.push(path);

    let boundary_mode = cfg.boundary_mode()?;
    let field_modes = cfg.has(Stage::Stability) && cfg.stability.modes.iter().any(|m| m.needs_field());
    let needs_field = cfg.has(Stage::Solve) || cfg.has(Stage::Verify) || field_modes;
    let needs_profile = cfg.has(Stage::Profile)
        || cfg.has(Stage::Verify)
        || (needs_field && boundary_mode == BoundaryMode::Profile)
        || (cfg.has(Stage::Stability)
            && cfg.stability.modes.iter().any(|m| matches!(m, StabilityMode::Sweep | StabilityMode::Form)));

    let profile = if needs_profile {
        let start = Instant::now();
        let p = Profile1D::build(nl, cfg.profile.tau_max, cfg.profile.n_nodes)?;
        if cfg.has(Stage::Profile) {
            profile_stage(run, nl, &p)?;
        }
        run.time("profile", start);
        Some(p)
    } else {
        None
    };

    let field = if needs_field {
        let start = Instant::now();
        let boundary = match boundary_mode {
            BoundaryMode::Dirichlet => Boundary::Dirichlet,
            BoundaryMode::Profile => Boundary::Profile(profile.as_ref().expect("profile built")),
        };
        let g = &cfg.grid;
        let (fld, report) = solve(nl, g.m, g.radius, g.h, &boundary, &cfg.solve_options()?)?;
        solve_stage(run, &fld, &report, boundary_mode)?;
        run.time("solve", start);
        Some(reflect_odd(&fld))
    } else {
        None
    };

    if cfg.has(Stage::Verify) {
        let start = Instant::now();
        verify_stage(run, nl, profile.as_ref().expect("profile built"), field.as_ref().expect("field solved"))?;
        run.time("verify", start);
    }

    if cfg.has(Stage::Stability) {
        let start = Instant::now();
        stability_stage(run, nl, profile.as_ref(), field.as_ref())?;
        run.time("stability", start);
    }
    Ok(())
}

fn profile_stage(run: &mut Run<'_>, nl: &Nonlinearity<f64>, p: &Profile1D<f64>) -> Result<(), PipelineError> {
    let summary = p.summary(nl);
    let pass = summary.max_hamiltonian_residual < 1e-10;
    run.check("profile.hamiltonian", pass);
    let doc = ProfileDoc { nonlinearity: &run.cfg.nonlinearity.kind, hypotheses: nl.check_hypotheses(2001)?, summary, pass };
    run.json("profile.json", "profile", &doc)?;
    let rows: Vec<ProfileRow> = p
        .tau()
        .iter()
        .zip(p.u0().iter().zip(p.u0dot()))
        .map(|(t, (u, d))| ProfileRow { tau: *t, u0: *u, u0dot: *d })
        .collect();
    run.csv("profile.csv", rows)
}

fn solve_stage(
    run: &mut Run<'_>,
    fld: &Field<f64>,
    report: &SolveReport,
    boundary: BoundaryMode,
) -> Result<(), PipelineError> {
    let grid = fld.grid();
    let pass = report.converged && report.positivity_min > 0.0;
    run.check("solve.converged", pass);
    let doc = SolveDoc {
        grid: GridInfo { m: grid.m(), radius: grid.radius(), h: grid.h(), nodes: grid.len(), boundary },
        report,
        pass,
    };
    run.json("solve.json", "solve", &doc)?;
    let rows: Vec<FieldRow> = grid
        .nodes()
        .iter()
        .zip(fld.values())
        .map(|(n, u)| FieldRow { i: n.i, j: n.j, s: n.s, t: n.t, class: n.class.as_str(), u: *u })
        .collect();
    run.csv("field.csv", rows)
}

fn verify_stage(
    run: &mut Run<'_>,
    nl: &Nonlinearity<f64>,
    p: &Profile1D<f64>,
    fld: &SaddleField<f64>,
) -> Result<(), PipelineError> {
    let cfg = run.cfg;
    let grid = fld.grid();
    let slack = cfg.verify.slack.unwrap_or_else(|| default_slack(grid.h()));
    let checks = vec![
        pointwise_bound_check(fld, p, slack),
        modica_check(fld, nl, slack),
        modica_check_profile(p, nl, grid, 1e-9),
        supersolution_check(p, nl, grid, 1e-12),
    ];
    for c in &checks {
        run.check(&format!("verify.{}", c.name), c.pass);
    }
    let energy_growth = if cfg.verify.growth_radii.is_empty() {
        None
    } else {
        let h = cfg.verify.growth_h.unwrap_or(cfg.grid.h);
        let boundary = match cfg.growth_boundary_mode()? {
            BoundaryMode::Dirichlet => Boundary::Dirichlet,
            BoundaryMode::Profile => Boundary::Profile(p),
        };
        let m = cfg.grid.m;
        let growth = energy_growth_study(nl, m, &cfg.verify.growth_radii, h, &boundary, &cfg.solve_options()?)?;
        let expected = (2 * m - 1) as f64;
        let pass = (growth.slope - expected).abs() <= 0.3;
        run.check("verify.energy_growth", pass);
        Some(GrowthDoc { growth, expected_slope: expected, window: 0.3, pass })
    };
    let pass = checks.iter().all(|c| c.pass) && energy_growth.as_ref().is_none_or(|g| g.pass);
    run.json("verify.json", "verify", &VerifyDoc { slack, checks, energy_growth, pass })
}

fn stability_stage(
    run: &mut Run<'_>,
    nl: &Nonlinearity<f64>,
    profile: Option<&Profile1D<f64>>,
    field: Option<&SaddleField<f64>>,
) -> Result<(), PipelineError> {
    let cfg = run.cfg;
    let s = &cfg.stability;
    let m = cfg.grid.m;
    let mut doc = StabilityDoc { m, pass: true, ..Default::default() };
    for mode in &s.modes {
        match mode {
            StabilityMode::Hardy => {
                let fam = cfg.eta_family()?;
                let kinetic = profile.map(|p| p.kinetic_integral()).unwrap_or(f64::NAN);
                doc.hardy = Some(HardyDoc {
                    margin: hardy_margin(m)?,
                    asymptotic_functional: asymptotic_functional(&fam, m),
                    asymptotic_functional_exact: fam.asymptotic_functional_exact(m),
                    kinetic_integral: kinetic,
                });
            }
            StabilityMode::Sweep => {
                let p = profile.expect("profile built");
                let sweep = instability_sweep(p, nl, m, &cfg.eta_family()?, &s.a_list)?;
                let rows: Vec<SweepRow> = sweep
                    .points
                    .iter()
                    .map(|pt| SweepRow {
                        a: pt.a,
                        value: pt.value,
                        gradient_term: pt.report.gradient_term,
                        potential_term: pt.report.potential_term,
                        boundary_term: pt.report.boundary_term,
                    })
                    .collect();
                run.csv("sweep.csv", rows)?;
                doc.sweep = Some(sweep);
            }
            StabilityMode::Form => {
                let p = profile.expect("profile built");
                let fam = cfg.eta_family()?;
                let opts = FormOptions::default();
                let mut points = Vec::new();
                for a in &s.a_list {
                    let separable = separable_form(p, m, &fam, *a, &opts)?;
                    let xi = Separable { eta: &fam, a: *a, profile: p };
                    let direct = quadratic_form_yz(Background::Profile(p), &xi, nl, m, &opts)?;
                    let full_space = wedge_constant::<f64>(m) * direct.value;
                    points.push(FormPoint { a: *a, separable, direct, full_space });
                }
                doc.form = Some(points);
            }
            StabilityMode::Spectrum => {
                let fld = field.expect("field solved");
                let class = cfg.symmetry_class()?;
                let base = SpectrumOptions { k: s.k, class, ..Default::default() };
                doc.spectrum = Some(linearized_spectrum(fld, nl, &base)?.report);
                doc.annuli = annulus_spectra(fld, nl, base, &s.annuli)?;
            }
            StabilityMode::Probe => {
                let fld = field.expect("field solved");
                let probe = cone_vanishing_stability_probe(fld, nl, s.trials, cfg.seed)?;
                run.check("stability.probe", probe.pass);
                doc.pass &= probe.pass;
                doc.probe = Some(probe);
            }
        }
    }
    run.json("stability.json", "stability", &doc)
}

// independent eigen-solves, fanned out in chunks of the worker count
fn annulus_spectra(
    fld: &SaddleField<f64>,
    nl: &Nonlinearity<f64>,
    base: SpectrumOptions,
    annuli: &[[f64; 2]],
) -> Result<Vec<SpectrumReport>, PipelineError> {
    let workers = worker_count().max(1);
    let mut out = Vec::with_capacity(annuli.len());
    for chunk in annuli.chunks(workers) {
        let results: Vec<_> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|[a, b]| {
                    let opts = SpectrumOptions { annulus: Some((*a, *b)), ..base };
                    scope.spawn(move || linearized_spectrum(fld, nl, &opts).map(|s| s.report))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("eigen worker panicked")).collect()
        });
        for r in results {
            out.push(r?);
        }
    }
    Ok(out)
}
