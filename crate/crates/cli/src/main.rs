use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use saddle_lab::{run_pipeline, run_sweep, ConfigError, ExperimentConfig, PipelineError, Variation};

const OUTPUTS: &str = "\
Outputs (written under the configured output directory):
  profile.csv    tau,u0,u0dot                     heteroclinic profile table
  field.csv      i,j,s,t,class,u                  sector nodes (s = i h, t = j h)
  sweep.csv      a,value,gradient_term,potential_term,boundary_term
  *.json         reports with \"schema\": 1; byte-identical for identical configs
  manifest.json  config hash, version, wall times, exit code
  config.toml    the resolved configuration

Exit codes: 0 all checks pass, 2 config error, 3 solver failure,
4 verification failure (reports still written), 1 i/o error.
SADDLE_LAB_THREADS caps the number of worker threads.";

#[derive(Parser)]
#[command(name = "saddle-lab", version, about = "Saddle-shaped solutions of -Lu = f(u) in R^2m", after_help = OUTPUTS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML config with dotted keys; defaults apply to anything missing.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set grid.h=0.25`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Clone)]
struct GridArgs {
    #[arg(long)]
    m: Option<usize>,
    /// Ball radius.
    #[arg(long = "R", alias = "radius", value_name = "R")]
    radius: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    /// allen_cahn, sine or custom.
    #[arg(long = "nl", alias = "nonlinearity")]
    nonlinearity: Option<String>,
    /// newton, gauss-seidel or gradient.
    #[arg(long)]
    method: Option<String>,
    /// dirichlet or profile.
    #[arg(long = "bc", alias = "boundary")]
    boundary: Option<String>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Form,
    Sweep,
    Spectrum,
    Hardy,
    Probe,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Form => "form",
            Mode::Sweep => "sweep",
            Mode::Spectrum => "spectrum",
            Mode::Hardy => "hardy",
            Mode::Probe => "probe",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build the 1D heteroclinic profile.
    Profile {
        #[command(flatten)]
        common: Common,
        /// allen_cahn, sine or custom.
        #[arg(long = "nl", alias = "nonlinearity")]
        nonlinearity: Option<String>,
        #[arg(long)]
        tau_max: Option<f64>,
        #[arg(long)]
        n_nodes: Option<usize>,
    },
    /// Minimize the energy on the sector grid.
    Solve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Solve, then run the a posteriori estimate checks.
    Verify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        /// Radii for the energy growth fit, comma separated.
        #[arg(long, value_delimiter = ',')]
        growth_radii: Vec<f64>,
    },
    /// Second variation: quadratic forms, sweeps, spectra, Hardy margins, probes.
    Stability {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long = "R", alias = "radius", value_name = "R")]
        radius: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long = "nl", alias = "nonlinearity")]
        nonlinearity: Option<String>,
        #[arg(long)]
        rho1: Option<f64>,
        #[arg(long)]
        rho2: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        /// Scales `a`, comma separated.
        #[arg(long, value_delimiter = ',')]
        a_list: Vec<f64>,
        #[arg(long)]
        k: Option<usize>,
        /// Restrict the spectrum to `inner:outer`. Repeatable.
        #[arg(long, value_name = "INNER:OUTER")]
        annulus: Vec<String>,
        #[arg(long)]
        trials: Option<usize>,
        /// even or odd under the swap (s, t) -> (t, s).
        #[arg(long)]
        class: Option<String>,
    },
    /// Run the pipeline over the cartesian product of variations.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// `key=v1,v2,...`. Repeatable.
        #[arg(long, value_name = "KEY=V1,V2")]
        vary: Vec<String>,
    },
    /// Run every stage enabled in the config.
    Pipeline {
        #[command(flatten)]
        common: Common,
    },
}

fn push<T: std::fmt::Display>(out: &mut Vec<String>, key: &str, v: Option<T>) {
    if let Some(v) = v {
        out.push(format!("{key}={v}"));
    }
}

fn push_str(out: &mut Vec<String>, key: &str, v: Option<String>) {
    if let Some(v) = v {
        out.push(format!("{key}=\"{v}\""));
    }
}

fn push_list(out: &mut Vec<String>, key: &str, v: &[f64]) {
    if !v.is_empty() {
        let items: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
        out.push(format!("{key}=[{}]", items.join(",")));
    }
}

fn grid_overrides(out: &mut Vec<String>, g: GridArgs) {
    push(out, "grid.m", g.m);
    push(out, "grid.R", g.radius.map(|v| format!("{v:?}")));
    push(out, "grid.h", g.h.map(|v| format!("{v:?}")));
    push_str(out, "nonlinearity.kind", g.nonlinearity);
    push_str(out, "solver.method", g.method);
    push_str(out, "solver.boundary", g.boundary);
    push(out, "solver.max_iter", g.max_iter);
    push(out, "solver.tol", g.tol.map(|v| format!("{v:?}")));
}

fn load(common: &Common, mut flags: Vec<String>) -> Result<ExperimentConfig, ConfigError> {
    push(&mut flags, "seed", common.seed);
    if let Some(out) = &common.out {
        flags.push(format!("output={}", toml::Value::String(out.display().to_string())));
    }
    flags.extend(common.overrides.iter().cloned());
    ExperimentConfig::load(common.config.as_deref(), &flags)
}

fn parse_annulus(s: &str) -> Result<String, ConfigError> {
    let (a, b) = s.split_once(':').ok_or_else(|| ConfigError(format!("annulus `{s}` is not inner:outer")))?;
    let a: f64 = a.trim().parse().map_err(|_| ConfigError(format!("bad annulus inner `{a}`")))?;
    let b: f64 = b.trim().parse().map_err(|_| ConfigError(format!("bad annulus outer `{b}`")))?;
    Ok(format!("[{a:?},{b:?}]"))
}

fn build(command: Command) -> Result<(ExperimentConfig, Option<Vec<Variation>>), ConfigError> {
    let mut flags = Vec::new();
    let (common, stages, vary) = match command {
        Command::Profile { common, nonlinearity, tau_max, n_nodes } => {
            push_str(&mut flags, "nonlinearity.kind", nonlinearity);
            push(&mut flags, "profile.tau_max", tau_max.map(|v| format!("{v:?}")));
            push(&mut flags, "profile.n_nodes", n_nodes);
            (common, Some("[\"profile\"]"), None)
        }
        Command::Solve { common, grid } => {
            grid_overrides(&mut flags, grid);
            (common, Some("[\"solve\"]"), None)
        }
        Command::Verify { common, grid, growth_radii } => {
            grid_overrides(&mut flags, grid);
            push_list(&mut flags, "verify.growth_radii", &growth_radii);
            (common, Some("[\"solve\", \"verify\"]"), None)
        }
        Command::Stability { common, mode, m, radius, h, nonlinearity, rho1, rho2, alpha, a_list, k, annulus, trials, class } => {
            flags.push(format!("stability.modes=[\"{}\"]", mode.name()));
            push(&mut flags, "grid.m", m);
            push(&mut flags, "grid.R", radius.map(|v| format!("{v:?}")));
            push(&mut flags, "grid.h", h.map(|v| format!("{v:?}")));
            push_str(&mut flags, "nonlinearity.kind", nonlinearity);
            push(&mut flags, "stability.rho1", rho1.map(|v| format!("{v:?}")));
            push(&mut flags, "stability.rho2", rho2.map(|v| format!("{v:?}")));
            push(&mut flags, "stability.alpha", alpha.map(|v| format!("{v:?}")));
            push_list(&mut flags, "stability.a_list", &a_list);
            push(&mut flags, "stability.k", k);
            push(&mut flags, "stability.trials", trials);
            push_str(&mut flags, "stability.class", class);
            if !annulus.is_empty() {
                let items = annulus.iter().map(|a| parse_annulus(a)).collect::<Result<Vec<_>, _>>()?;
                flags.push(format!("stability.annuli=[{}]", items.join(",")));
            }
            (common, Some("[\"stability\"]"), None)
        }
        Command::Sweep { common, vary } => {
            let vary = vary.iter().map(|v| v.parse()).collect::<Result<Vec<Variation>, _>>()?;
            (common, None, Some(vary))
        }
        Command::Pipeline { common } => (common, None, None),
    };
    if let Some(stages) = stages {
        flags.insert(0, format!("stages={stages}"));
    }
    Ok((load(&common, flags)?, vary))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cfg, vary) = match build(cli.command) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let code = match vary {
        Some(vary) => match run_sweep(&cfg, &vary) {
            Ok(summary) => {
                for r in &summary.runs {
                    println!("run {:03} [{}] exit {}", r.index, r.overrides.join(" "), r.exit_code);
                }
                summary.exit_code()
            }
            Err(e) => report_error(&e),
        },
        None => match run_pipeline(&cfg) {
            Ok(outcome) => {
                for c in &outcome.checks {
                    println!("{:<28} {}", c.name, if c.pass { "pass" } else { "FAIL" });
                }
                println!("reports in {}", cfg.output.display());
                outcome.exit_code()
            }
            Err(e) => report_error(&e),
        },
    };
    ExitCode::from(code as u8)
}

fn report_error(e: &PipelineError) -> i32 {
    eprintln!("error: {e}");
    e.exit_code()
}
