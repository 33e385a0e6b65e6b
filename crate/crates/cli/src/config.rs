//! Experiment configuration: TOML with dotted keys, e.g.
//!
//! ```toml
//! seed = 7
//! stages = ["profile", "solve", "verify", "stability"]
//! nonlinearity.kind = "allen_cahn"
//! grid.m = 2
//! grid.R = 16.0
//! grid.h = 0.125
//! solver.boundary = "dirichlet"
//! stability.modes = ["spectrum", "probe"]
//! stability.annuli = [[0.0, 8.0], [8.0, 16.0]]
//! ```
//!
//! Every key has a default, so an empty file is a valid configuration.

use std::fmt;
use std::path::{Path, PathBuf};

use saddle_core::nonlinearity::{Nonlinearity, NonlinearityKind};
use saddle_core::solver::{BoundaryMode, Method, SolveOptions};
use saddle_core::stability::{EtaFamily, SymmetryClass};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Profile,
    Solve,
    Verify,
    Stability,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Profile => "profile",
            Stage::Solve => "solve",
            Stage::Verify => "verify",
            Stage::Stability => "stability",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StabilityMode {
    Form,
    Sweep,
    Spectrum,
    Hardy,
    Probe,
}

impl StabilityMode {
    pub fn needs_field(self) -> bool {
        matches!(self, StabilityMode::Spectrum | StabilityMode::Probe)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub output: PathBuf,
    pub seed: u64,
    pub stages: Vec<Stage>,
    pub nonlinearity: NonlinearityConfig,
    pub profile: ProfileConfig,
    pub grid: GridConfig,
    pub solver: SolverConfig,
    pub verify: VerifyConfig,
    pub stability: StabilityConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            output: PathBuf::from("out"),
            seed: 0,
            stages: vec![Stage::Profile, Stage::Solve, Stage::Verify, Stage::Stability],
            nonlinearity: NonlinearityConfig::default(),
            profile: ProfileConfig::default(),
            grid: GridConfig::default(),
            solver: SolverConfig::default(),
            verify: VerifyConfig::default(),
            stability: StabilityConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NonlinearityConfig {
    /// `allen_cahn`, `sine` or `custom`.
    pub kind: String,
    /// Odd coefficients `c0 u + c1 u^3 + ...` for `custom`.
    pub coeffs: Vec<f64>,
    /// Positive zero of `f` for `custom`.
    #[serde(rename = "M", alias = "well")]
    pub well: f64,
}

impl Default for NonlinearityConfig {
    fn default() -> Self {
        Self { kind: "allen_cahn".into(), coeffs: Vec::new(), well: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileConfig {
    pub tau_max: f64,
    pub n_nodes: usize,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self { tau_max: 20.0, n_nodes: 4001 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub m: usize,
    #[serde(rename = "R", alias = "radius")]
    pub radius: f64,
    pub h: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { m: 2, radius: 16.0, h: 0.125 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub method: String,
    pub boundary: String,
    pub max_iter: usize,
    pub tol: f64,
    pub step: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let o = SolveOptions::default();
        Self { method: o.method.to_string(), boundary: "dirichlet".into(), max_iter: o.max_iter, tol: o.tol, step: o.step }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Slack for the pointwise and gradient bounds; `10 h^2` when absent.
    pub slack: Option<f64>,
    /// Radii for the energy growth fit; skipped when empty.
    pub growth_radii: Vec<f64>,
    /// Mesh width for the growth solve; `grid.h` when absent.
    pub growth_h: Option<f64>,
    /// Boundary mode for the growth solve.
    pub growth_boundary: String,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { slack: None, growth_radii: Vec::new(), growth_h: None, growth_boundary: "profile".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityConfig {
    pub modes: Vec<StabilityMode>,
    pub k: usize,
    pub class: String,
    pub annuli: Vec<[f64; 2]>,
    pub trials: usize,
    pub rho1: f64,
    pub rho2: f64,
    pub alpha: f64,
    pub a_list: Vec<f64>,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        Self {
            modes: vec![StabilityMode::Hardy, StabilityMode::Sweep, StabilityMode::Spectrum, StabilityMode::Probe],
            k: 4,
            class: "even".into(),
            annuli: Vec::new(),
            trials: 200,
            rho1: 0.05,
            rho2: 100.0,
            alpha: 0.75,
            a_list: vec![5.0, 10.0, 20.0, 40.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = text.parse().map_err(|e| ConfigError(format!("config parse error: {e}")))?;
        Self::from_table(table)
    }

    pub fn from_table(table: toml::Table) -> Result<Self, ConfigError> {
        table.try_into().map_err(|e| ConfigError(format!("config error: {e}")))
    }

    /// Reads `path` (or starts from defaults) and applies `key=value`
    /// overrides; values are parsed as TOML and fall back to plain strings.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| ConfigError(format!("cannot read {}: {e}", p.display())))?;
                text.parse::<toml::Table>().map_err(|e| ConfigError(format!("config parse error: {e}")))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        Self::from_table(table)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical serialization of the resolved config.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        format!("{digest:x}")
    }

    pub fn build_nonlinearity(&self) -> Result<Nonlinearity<f64>, ConfigError> {
        let kind: NonlinearityKind = self.nonlinearity.kind.parse().map_err(|e| ConfigError(format!("{e}")))?;
        let nl = match kind {
            NonlinearityKind::Custom => Nonlinearity::odd_polynomial(self.nonlinearity.coeffs.clone(), self.nonlinearity.well),
            k => Nonlinearity::builtin(k),
        };
        nl.map_err(|e| ConfigError(format!("nonlinearity: {e}")))
    }

    pub fn solve_options(&self) -> Result<SolveOptions, ConfigError> {
        let method: Method = self.solver.method.parse().map_err(|e| ConfigError(format!("solver.method: {e}")))?;
        Ok(SolveOptions { max_iter: self.solver.max_iter, tol: self.solver.tol, method, step: self.solver.step })
    }

    pub fn boundary_mode(&self) -> Result<BoundaryMode, ConfigError> {
        self.solver.boundary.parse().map_err(|e| ConfigError(format!("solver.boundary: {e}")))
    }

    pub fn growth_boundary_mode(&self) -> Result<BoundaryMode, ConfigError> {
        self.verify.growth_boundary.parse().map_err(|e| ConfigError(format!("verify.growth_boundary: {e}")))
    }

    pub fn symmetry_class(&self) -> Result<SymmetryClass, ConfigError> {
        self.stability.class.parse().map_err(|e| ConfigError(format!("stability.class: {e}")))
    }

    pub fn eta_family(&self) -> Result<EtaFamily<f64>, ConfigError> {
        let s = &self.stability;
        EtaFamily::new(s.rho1, s.rho2, s.alpha).map_err(|e| ConfigError(format!("stability: {e}")))
    }

    pub fn has(&self, stage: Stage) -> bool {
        self.stages.contains(&stage)
    }

    /// Checks every block against the preconditions of the routines it feeds.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |msg: String| Err(ConfigError(msg));
        if self.stages.is_empty() {
            return err("stages must not be empty".into());
        }
        self.build_nonlinearity()?;
        let p = &self.profile;
        if !(p.tau_max >= 5.0 && p.tau_max.is_finite()) || p.n_nodes < 65 || p.n_nodes % 2 == 0 {
            return err(format!(
                "profile: need tau_max >= 5 and an odd n_nodes >= 65, got {} and {}",
                p.tau_max, p.n_nodes
            ));
        }
        let needs_grid = self.has(Stage::Solve)
            || self.has(Stage::Verify)
            || (self.has(Stage::Stability) && self.stability.modes.iter().any(|m| m.needs_field()));
        let g = &self.grid;
        if g.m == 0 {
            return err("grid.m must be at least 1 (got 0)".into());
        }
        if needs_grid && !(g.radius >= 4.0 && g.h > 0.0 && g.h <= g.radius / 16.0) {
            return err(format!("grid: need R >= 4 and 0 < h <= R/16, got R = {}, h = {}", g.radius, g.h));
        }
        self.solve_options()?;
        self.boundary_mode()?;
        if !(self.solver.tol > 0.0) || self.solver.max_iter == 0 {
            return err("solver: tol must be positive and max_iter nonzero".into());
        }
        if let Some(s) = self.verify.slack {
            if !(s >= 0.0) {
                return err(format!("verify.slack must be nonnegative, got {s}"));
            }
        }
        if !self.verify.growth_radii.is_empty() {
            let r = &self.verify.growth_radii;
            if r.len() < 3 || r.iter().any(|v| !(*v >= 4.0)) || r.windows(2).any(|w| !(w[1] > w[0])) {
                return err("verify.growth_radii: need at least 3 increasing radii >= 4".into());
            }
            let h = self.verify.growth_h.unwrap_or(g.h);
            if !(h > 0.0 && h <= r[0] / 16.0) {
                return err(format!("verify.growth_h = {h} must satisfy 0 < h <= min R / 16"));
            }
            self.growth_boundary_mode()?;
        }
        if self.has(Stage::Stability) {
            let s = &self.stability;
            if s.modes.is_empty() {
                return err("stability.modes must not be empty".into());
            }
            if s.k == 0 || s.k > 20 {
                return err(format!("stability.k = {} must lie in 1..=20", s.k));
            }
            self.symmetry_class()?;
            for [a, b] in &s.annuli {
                if !(*a >= 0.0 && b > a) {
                    return err(format!("stability.annuli: {a}:{b} must satisfy 0 <= inner < outer"));
                }
            }
            if s.modes.contains(&StabilityMode::Probe) && s.trials == 0 {
                return err("stability.trials must be positive".into());
            }
            if s.modes.iter().any(|m| matches!(m, StabilityMode::Sweep | StabilityMode::Form)) {
                self.eta_family()?;
                if s.a_list.is_empty() || s.a_list.iter().any(|a| !(*a >= 1.0)) || s.a_list.windows(2).any(|w| !(w[1] > w[0])) {
                    return err("stability.a_list must be increasing values >= 1".into());
                }
            }
            if s.modes.contains(&StabilityMode::Hardy) && g.m < 2 {
                return err("stability hardy mode needs grid.m >= 2".into());
            }
        }
        Ok(())
    }
}

/// Sets `a.b.c = value` inside `table`, creating sub-tables as needed.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), ConfigError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| ConfigError(format!("override `{spec}` is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = parse_value(raw);
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| ConfigError(format!("empty key in `{spec}`")))?;
    let mut cur = table;
    for p in parts {
        let entry = cur.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| ConfigError(format!("`{p}` in `{key}` is not a section")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}
