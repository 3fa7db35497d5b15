use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use qsl_core::entropy::{
    converged_oscillator, gibbs_entropy, gibbs_state, truncated_oscillator_hamiltonian,
    ThermalState, OSCILLATOR_TAIL_TOL,
};
use qsl_core::matcore::real_diagonal;
use qsl_core::qsl::{bekenstein_bound, pendry_bound};
use qsl_core::report::{self, Format};
use qsl_core::sweep::{run_jc_sweep, run_rabi_demo, LogGrid, RabiConfig, SweepConfig, SweepError};

#[derive(Parser)]
#[command(
    name = "qsl",
    version,
    about = "Quantum speed limits and information-rate bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Damped Jaynes-Cummings sweep over a log-spaced gamma0 grid.
    JcSweep(JcSweepArgs),
    /// Resonant Rabi oscillation and the Shannon-information bound.
    RabiDemo(RabiArgs),
    /// Solve for the Gibbs state at a given mean energy.
    Gibbs(GibbsArgs),
    /// Evaluate the Bekenstein and Pendry rate bounds.
    Bounds(BoundsArgs),
}

#[derive(Args)]
struct Output {
    /// Write here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct JcSweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    omega0: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    gamma0_min: Option<f64>,
    #[arg(long)]
    gamma0_max: Option<f64>,
    #[arg(long)]
    gamma0_count: Option<usize>,
    #[arg(long)]
    dimension_for_bound: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    include_additive: Option<bool>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    hbar: Option<f64>,
    #[arg(long)]
    k_b: Option<f64>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value = "csv")]
    format: Format,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct RabiArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long)]
    c2: Option<f64>,
    #[arg(long)]
    hbar: Option<f64>,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct GibbsConfig {
    /// Eigenvalues of a diagonal Hamiltonian.
    spectrum: Option<Vec<f64>>,
    /// Level spacing of a truncated harmonic oscillator.
    hbar_omega: Option<f64>,
    /// Oscillator truncation; grown until converged when absent.
    levels: Option<usize>,
    energy: Option<f64>,
    k_b: Option<f64>,
}

#[derive(Args)]
struct GibbsArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated eigenvalues.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    spectrum: Option<Vec<f64>>,
    #[arg(long)]
    hbar_omega: Option<f64>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    energy: Option<f64>,
    #[arg(long)]
    k_b: Option<f64>,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BoundsConfig {
    energy: Option<f64>,
    power: Option<f64>,
    hbar: Option<f64>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    energy: Option<f64>,
    #[arg(long)]
    power: Option<f64>,
    #[arg(long)]
    hbar: Option<f64>,
    #[command(flatten)]
    out: Output,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::ConfigInvalid(_) => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, Failure> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn write_out(out: &Output, bytes: &[u8]) -> Result<(), Failure> {
    let result = match &out.output {
        Some(path) => std::fs::write(path, bytes),
        None => std::io::stdout().lock().write_all(bytes),
    };
    result.map_err(|e| Failure::Runtime(e.to_string()))
}

fn write_json<T: Serialize>(out: &Output, value: &T) -> Result<(), Failure> {
    let mut bytes =
        serde_json::to_vec_pretty(value).map_err(|e| Failure::Runtime(e.to_string()))?;
    bytes.push(b'\n');
    write_out(out, &bytes)
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn jc_sweep(args: JcSweepArgs) -> Result<(), Failure> {
    let mut cfg: SweepConfig = load(args.config.as_deref())?;
    set(&mut cfg.lambda, args.lambda);
    set(&mut cfg.omega0, args.omega0);
    set(&mut cfg.tau, args.tau);
    let LogGrid { min, max, count } = &mut cfg.gamma0_grid;
    set(min, args.gamma0_min);
    set(max, args.gamma0_max);
    set(count, args.gamma0_count);
    set(&mut cfg.dimension_for_bound, args.dimension_for_bound);
    set(&mut cfg.steps, args.steps);
    set(&mut cfg.include_additive, args.include_additive);
    set(&mut cfg.seed, args.seed);
    set(&mut cfg.constants.hbar, args.hbar);
    set(&mut cfg.constants.k_b, args.k_b);
    if args.workers == 0 {
        return Err(Failure::Config("workers must be at least 1".into()));
    }
    let rows = run_jc_sweep(&cfg, args.workers)?;
    let bytes = report::render(&rows, args.format).map_err(|e| Failure::Runtime(e.to_string()))?;
    write_out(&args.out, &bytes)
}

fn rabi_demo(args: RabiArgs) -> Result<(), Failure> {
    let mut cfg: RabiConfig = load(args.config.as_deref())?;
    set(&mut cfg.omega, args.omega);
    set(&mut cfg.tau, args.tau);
    set(&mut cfg.steps, args.steps);
    set(&mut cfg.c1, args.c1);
    set(&mut cfg.c2, args.c2);
    set(&mut cfg.hbar, args.hbar);
    let report = run_rabi_demo(&cfg)?;
    write_json(&args.out, &report)
}

#[derive(Serialize)]
struct GibbsReport {
    energy: f64,
    levels: usize,
    beta: f64,
    ln_z: f64,
    entropy: f64,
    populations: Vec<f64>,
}

fn gibbs(args: GibbsArgs) -> Result<(), Failure> {
    let mut cfg: GibbsConfig = load(args.config.as_deref())?;
    if args.spectrum.is_some() {
        cfg.spectrum = args.spectrum;
    }
    cfg.hbar_omega = args.hbar_omega.or(cfg.hbar_omega);
    cfg.levels = args.levels.or(cfg.levels);
    cfg.energy = args.energy.or(cfg.energy);
    cfg.k_b = args.k_b.or(cfg.k_b);
    let energy = cfg
        .energy
        .ok_or_else(|| Failure::Config("energy is required".into()))?;
    let k_b = cfg.k_b.unwrap_or(1.0);
    if !energy.is_finite() || !(k_b > 0.0) {
        return Err(Failure::Config(
            "energy must be finite and k_b positive".into(),
        ));
    }
    let runtime = |e: qsl_core::entropy::ThermoError| Failure::Runtime(e.to_string());
    let (levels, ts): (usize, ThermalState) = match (&cfg.spectrum, cfg.hbar_omega) {
        (Some(spectrum), None) => {
            if spectrum.is_empty() || spectrum.iter().any(|x| !x.is_finite()) {
                return Err(Failure::Config(
                    "spectrum must be nonempty and finite".into(),
                ));
            }
            (
                spectrum.len(),
                gibbs_state(&real_diagonal(spectrum), energy).map_err(runtime)?,
            )
        }
        (None, Some(hw)) => {
            if !(hw > 0.0) || !hw.is_finite() {
                return Err(Failure::Config("hbar_omega must be positive".into()));
            }
            match cfg.levels {
                Some(n) if n >= 2 => (
                    n,
                    gibbs_state(&truncated_oscillator_hamiltonian(hw, n), energy)
                        .map_err(runtime)?,
                ),
                Some(_) => return Err(Failure::Config("levels must be at least 2".into())),
                None => converged_oscillator(hw, energy, OSCILLATOR_TAIL_TOL).map_err(runtime)?,
            }
        }
        _ => {
            return Err(Failure::Config(
                "give exactly one of spectrum or hbar_omega".into(),
            ))
        }
    };
    let entropy = gibbs_entropy(&ts, k_b);
    let report = GibbsReport {
        energy: ts.energy,
        levels,
        beta: ts.beta,
        ln_z: ts.ln_z,
        entropy,
        populations: ts.populations,
    };
    write_json(&args.out, &report)
}

#[derive(Serialize)]
struct BoundsReport {
    hbar: f64,
    energy: Option<f64>,
    bekenstein_bits_per_time: Option<f64>,
    power: Option<f64>,
    pendry_bits_per_time: Option<f64>,
}

fn bounds(args: BoundsArgs) -> Result<(), Failure> {
    let cfg: BoundsConfig = load(args.config.as_deref())?;
    let energy = args.energy.or(cfg.energy);
    let power = args.power.or(cfg.power);
    let hbar = args.hbar.or(cfg.hbar).unwrap_or(1.0);
    if !(hbar > 0.0) || !hbar.is_finite() {
        return Err(Failure::Config("hbar must be positive".into()));
    }
    if energy.is_none() && power.is_none() {
        return Err(Failure::Config("give energy, power, or both".into()));
    }
    for (name, v) in [("energy", energy), ("power", power)] {
        if let Some(v) = v {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Failure::Config(format!(
                    "{name} must be nonnegative and finite"
                )));
            }
        }
    }
    let report = BoundsReport {
        hbar,
        energy,
        bekenstein_bits_per_time: energy.map(|e| bekenstein_bound(e, hbar)),
        power,
        pendry_bits_per_time: power.map(|p| pendry_bound(p, hbar)),
    };
    write_json(&args.out, &report)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::JcSweep(a) => jc_sweep(a),
        Command::RabiDemo(a) => rabi_demo(a),
        Command::Gibbs(a) => gibbs(a),
        Command::Bounds(a) => bounds(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
