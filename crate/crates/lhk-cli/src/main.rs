//! `lhk`: command-line front end for the `lhk` library. Subcommands map onto
//! the library modules (algebras, Casimir search, realizations, integration,
//! constants of the motion, superposition rules, adjoint flows) and emit
//! deterministic JSON reports.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error,
//! 3 domain or numeric failure.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use lhk::systems::{CoefficientCurve, SystemDescriptor};

use config::{parse_curve, write_artifact, CliError, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "lhk",
    version,
    about = "Lie-Hamilton systems: algebras, invariants, and superposition rules"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate or list Lie algebra structure constants
    Algebra {
        #[command(subcommand)]
        cmd: AlgebraCmd,
    },
    /// Check a polynomial for the Casimir property, or search for Casimirs
    Casimir {
        #[command(subcommand)]
        cmd: CasimirCmd,
    },
    /// List or describe the built-in systems
    System {
        #[command(subcommand)]
        cmd: SystemCmd,
    },
    /// Check that a realization's brackets close on its structure constants
    Homomorphism(HomomorphismArgs),
    /// Integrate a system (optionally prolonged to m copies)
    Simulate(SimulateArgs),
    /// Monitor coalgebra-induced constants of the motion along a trajectory
    VerifyConstants(VerifyConstantsArgs),
    /// Superposition-rule commands
    Superpose {
        #[command(subcommand)]
        cmd: SuperposeCmd,
    },
    /// Evolve algebra-dual coefficients along the adjoint flow
    LieIntegral(LieIntegralArgs),
}

#[derive(Subcommand)]
enum AlgebraCmd {
    /// Check antisymmetry and the Jacobi identity for a JSON algebra file
    Validate(AlgebraValidateArgs),
    /// List the built-in algebras
    List,
}

#[derive(Subcommand)]
enum CasimirCmd {
    /// Test whether a polynomial in the generators is a Casimir
    Check(CasimirCheckArgs),
    /// Compute a basis of polynomial Casimirs up to a degree bound
    Find(CasimirFindArgs),
}

#[derive(Subcommand)]
enum SystemCmd {
    /// List the catalog
    List,
    /// Show one catalog entry in detail
    Show { name: String },
}

#[derive(Subcommand)]
enum SuperposeCmd {
    /// Reconstruct one solution from the others and compare to integration
    Verify(SuperposeVerifyArgs),
}

/// Flags shared by every report-producing subcommand.
#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// JSON experiment config; its fields override flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write the JSON report to this file (atomically)
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed (default: LHK_SEED env var, then 42)
    #[arg(long)]
    seed: Option<u64>,
}

/// Flags that select and parameterize a catalog system. Coefficient flags use
/// the curve mini-language: `CONST`, `cos`, `0.3*sin`, `1+0.3*cos`.
#[derive(Args, Clone, Default)]
struct SystemFlags {
    /// Catalog system name (see `lhk system list`)
    #[arg(long)]
    system: Option<String>,
    /// Oscillator count for smorodinsky-winternitz
    #[arg(long)]
    n: Option<usize>,
    /// Barrier strength(s), comma-separated when per-oscillator
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    b: Option<Vec<f64>>,
    /// Curvature constant for kummer-schwarz
    #[arg(long, allow_negative_numbers = true)]
    b0: Option<f64>,
    /// Drive coefficient b1(t) for kummer-schwarz
    #[arg(long)]
    b1: Option<String>,
    /// Frequency omega(t) for ermakov / smorodinsky-winternitz
    #[arg(long)]
    omega: Option<String>,
    /// Coefficient a0(t) for the Riccati-type systems
    #[arg(long)]
    a0: Option<String>,
    /// Coefficient a1(t) for the Riccati-type systems
    #[arg(long)]
    a1: Option<String>,
    /// Coefficient a2(t) for the Riccati-type systems
    #[arg(long)]
    a2: Option<String>,
    /// Field component Bx(t) for trig-su2
    #[arg(long)]
    bx: Option<String>,
    /// Field component By(t) for trig-su2
    #[arg(long)]
    by: Option<String>,
    /// Field component Bz(t) for trig-su2
    #[arg(long)]
    bz: Option<String>,
    /// Poisson structure selector for riccati4 (1 or 2)
    #[arg(long)]
    structure: Option<u64>,
}

/// Integrator selection flags.
#[derive(Args, Clone, Default)]
struct MethodFlags {
    /// Integrator: rkf45 (default) or rk4
    #[arg(long)]
    method: Option<String>,
    /// Absolute tolerance for rkf45
    #[arg(long)]
    atol: Option<f64>,
    /// Relative tolerance for rkf45
    #[arg(long)]
    rtol: Option<f64>,
    /// Fixed step size for rk4
    #[arg(long)]
    h: Option<f64>,
}

#[derive(Args)]
struct AlgebraValidateArgs {
    /// JSON file with {"r": dim, "c": [[alpha, beta, gamma, "p/q"], ...]}
    file: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CasimirCheckArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Built-in algebra name
    #[arg(long)]
    algebra: Option<String>,
    /// Polynomial in the generators, e.g. "v1*v3 - v2^2"
    #[arg(long)]
    poly: Option<String>,
}

#[derive(Args)]
struct CasimirFindArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Built-in algebra name
    #[arg(long)]
    algebra: Option<String>,
    /// Maximum total degree of the search space
    #[arg(long)]
    dmax: Option<u32>,
}

#[derive(Args)]
struct HomomorphismArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    system: SystemFlags,
    /// Number of sample points (default 100)
    #[arg(long)]
    points: Option<usize>,
    /// Residual tolerance (default 1e-8)
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    system: SystemFlags,
    #[command(flatten)]
    method: MethodFlags,
    /// Number of diagonal copies (default 1)
    #[arg(long)]
    m: Option<usize>,
    /// Initial state, comma-separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    x0: Option<Vec<f64>>,
    /// Initial time (default 0)
    #[arg(long, allow_negative_numbers = true)]
    t0: Option<f64>,
    /// Final time
    #[arg(long, allow_negative_numbers = true)]
    tmax: Option<f64>,
    /// Write the trajectory as CSV to this file
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyConstantsArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    system: SystemFlags,
    #[command(flatten)]
    method: MethodFlags,
    /// Number of diagonal copies (default 1)
    #[arg(long)]
    m: Option<usize>,
    /// Initial state (sampled from the phase-space box when omitted)
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    x0: Option<Vec<f64>>,
    /// Initial time (default 0)
    #[arg(long, allow_negative_numbers = true)]
    t0: Option<f64>,
    /// Final time
    #[arg(long, allow_negative_numbers = true)]
    tmax: Option<f64>,
    /// Maximum allowed relative drift (default 1e-6)
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct SuperposeVerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    system: SystemFlags,
    /// Initial bundle state (sampled when omitted)
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    x0: Option<Vec<f64>>,
    /// Initial time (default 0)
    #[arg(long, allow_negative_numbers = true)]
    t0: Option<f64>,
    /// Final time
    #[arg(long, allow_negative_numbers = true)]
    tmax: Option<f64>,
    /// Maximum allowed relative reconstruction error (default 1e-5)
    #[arg(long)]
    tol: Option<f64>,
    /// Write per-time reconstruction errors as CSV to this file
    #[arg(long)]
    errors_csv: Option<PathBuf>,
}

#[derive(Args)]
struct LieIntegralArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    system: SystemFlags,
    #[command(flatten)]
    method: MethodFlags,
    /// Built-in algebra name (alternative to --system)
    #[arg(long)]
    algebra: Option<String>,
    /// Coefficient curves b_1(t)..b_r(t), one per generator (with --algebra)
    #[arg(long)]
    coeff: Option<Vec<String>>,
    /// Initial coefficients f_1(t0)..f_r(t0), comma-separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    f0: Option<Vec<f64>>,
    /// Initial system state (with --system)
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    x0: Option<Vec<f64>>,
    /// Initial time (default 0)
    #[arg(long, allow_negative_numbers = true)]
    t0: Option<f64>,
    /// Final time
    #[arg(long, allow_negative_numbers = true)]
    tmax: Option<f64>,
    /// When set, also verify constancy of sum_a f_a(t) h_a(x(t))
    #[arg(long)]
    tol: Option<f64>,
    /// Output grid size for the bare-algebra mode (default 201)
    #[arg(long)]
    points: Option<usize>,
    /// Write the coefficient path as CSV to this file
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Parses a coefficient flag, falling back to a default expression.
fn curve(flag: &Option<String>, default: &str) -> Result<CoefficientCurve, CliError> {
    parse_curve(flag.as_deref().unwrap_or(default))
}

/// Resolves the `b` parameter of smorodinsky-winternitz from `--n`/`--b`:
/// a single `--b` value is replicated to `n` oscillators.
fn sw_barriers(flags: &SystemFlags) -> Result<Option<Value>, CliError> {
    match (flags.n, flags.b.as_deref()) {
        (None, None) => Ok(None),
        (None, Some([b])) => Ok(Some(json!(b))),
        (None, Some(b)) => Ok(Some(json!(b))),
        (Some(0), _) => Err(CliError::usage("n must be at least 1")),
        (Some(n), None) => Ok(Some(json!(vec![1.0; n]))),
        (Some(n), Some([b])) => Ok(Some(json!(vec![*b; n]))),
        (Some(n), Some(b)) if b.len() == n => Ok(Some(json!(b))),
        (Some(n), Some(b)) => Err(CliError::usage(format!(
            "--b has {} values but --n is {n}",
            b.len()
        ))),
    }
}

/// Builds a catalog descriptor from the system flags. Each system gets its
/// own coefficient layout and parameter defaults.
fn descriptor(flags: &SystemFlags) -> Result<Option<SystemDescriptor>, CliError> {
    let Some(name) = flags.system.as_deref() else {
        return Ok(None);
    };
    let canonical = match name {
        "milne-pinney" => "smorodinsky-winternitz",
        other => other,
    };
    let mut desc = SystemDescriptor::new(canonical);
    match canonical {
        "ermakov" => {
            if let Some([b]) = flags.b.as_deref() {
                desc = desc.with_param("b", json!(b));
            } else if flags.b.is_some() {
                return Err(CliError::usage("ermakov takes a single --b value"));
            }
            desc = desc.with_coefficients(vec![curve(&flags.omega, "1")?]);
        }
        "smorodinsky-winternitz" => {
            if let Some(b) = sw_barriers(flags)? {
                desc = desc.with_param("b", b);
            }
            desc = desc.with_coefficients(vec![curve(&flags.omega, "1")?]);
        }
        "kummer-schwarz" => {
            if let Some(b0) = flags.b0 {
                desc = desc.with_param("b0", json!(b0));
            }
            desc = desc.with_coefficients(vec![curve(&flags.b1, "1")?]);
        }
        "second-order-riccati" | "riccati4" => {
            if canonical == "riccati4" {
                if let Some(s) = flags.structure {
                    desc = desc.with_param("structure", json!(s));
                }
            }
            desc = desc.with_coefficients(vec![
                curve(&flags.a0, "0")?,
                curve(&flags.a1, "0")?,
                curve(&flags.a2, "0")?,
            ]);
        }
        "trig-su2" => {
            desc = desc.with_coefficients(vec![
                curve(&flags.bx, "0")?,
                curve(&flags.by, "0")?,
                curve(&flags.bz, "1")?,
            ]);
        }
        other => {
            return Err(CliError::usage(format!(
                "unknown system {other:?} (see `lhk system list`)"
            )))
        }
    }
    Ok(Some(desc))
}

fn base_config(common: &CommonArgs) -> ExperimentConfig {
    ExperimentConfig {
        seed: common.seed,
        out: common.out.clone(),
        ..Default::default()
    }
}

fn apply_method(cfg: &mut ExperimentConfig, method: &MethodFlags) {
    cfg.method = method.method.clone();
    cfg.atol = method.atol;
    cfg.rtol = method.rtol;
    cfg.h = method.h;
}

/// Resolved report, exit code, and optional report file.
type RunOutcome = (Value, i32, Option<PathBuf>);

fn finish(
    cfg: ExperimentConfig,
    f: impl FnOnce(&ExperimentConfig) -> Result<commands::Outcome, CliError>,
) -> Result<RunOutcome, CliError> {
    let (report, code) = f(&cfg)?;
    Ok((report, code, cfg.out))
}

fn run(cli: &Cli) -> Result<RunOutcome, CliError> {
    match &cli.command {
        Command::Algebra { cmd } => match cmd {
            AlgebraCmd::Validate(a) => {
                let mut cfg = base_config(&a.common);
                cfg.file = Some(a.file.clone());
                let cfg = cfg.resolve(a.common.config.as_deref(), "algebra-validate")?;
                finish(cfg, commands::algebra_validate)
            }
            AlgebraCmd::List => {
                let (report, code) = commands::algebra_list()?;
                Ok((report, code, None))
            }
        },
        Command::Casimir { cmd } => match cmd {
            CasimirCmd::Check(a) => {
                let mut cfg = base_config(&a.common);
                cfg.algebra = a.algebra.clone();
                cfg.poly = a.poly.clone();
                let cfg = cfg.resolve(a.common.config.as_deref(), "casimir-check")?;
                finish(cfg, commands::casimir_check)
            }
            CasimirCmd::Find(a) => {
                let mut cfg = base_config(&a.common);
                cfg.algebra = a.algebra.clone();
                cfg.dmax = a.dmax;
                let cfg = cfg.resolve(a.common.config.as_deref(), "casimir-find")?;
                finish(cfg, commands::casimir_find)
            }
        },
        Command::System { cmd } => match cmd {
            SystemCmd::List => {
                let (report, code) = commands::system_list()?;
                Ok((report, code, None))
            }
            SystemCmd::Show { name } => {
                let (report, code) = commands::system_show(name)?;
                Ok((report, code, None))
            }
        },
        Command::Homomorphism(a) => {
            let mut cfg = base_config(&a.common);
            cfg.system = descriptor(&a.system)?;
            cfg.points = a.points;
            cfg.tol = a.tol;
            let cfg = cfg.resolve(a.common.config.as_deref(), "homomorphism")?;
            finish(cfg, commands::homomorphism)
        }
        Command::Simulate(a) => {
            let mut cfg = base_config(&a.common);
            cfg.system = descriptor(&a.system)?;
            apply_method(&mut cfg, &a.method);
            cfg.m = a.m;
            cfg.x0 = a.x0.clone();
            cfg.t0 = a.t0;
            cfg.tmax = a.tmax;
            cfg.csv = a.csv.clone();
            let cfg = cfg.resolve(a.common.config.as_deref(), "simulate")?;
            finish(cfg, commands::simulate)
        }
        Command::VerifyConstants(a) => {
            let mut cfg = base_config(&a.common);
            cfg.system = descriptor(&a.system)?;
            apply_method(&mut cfg, &a.method);
            cfg.m = a.m;
            cfg.x0 = a.x0.clone();
            cfg.t0 = a.t0;
            cfg.tmax = a.tmax;
            cfg.tol = a.tol;
            let cfg = cfg.resolve(a.common.config.as_deref(), "verify-constants")?;
            finish(cfg, commands::verify_constants)
        }
        Command::Superpose { cmd } => match cmd {
            SuperposeCmd::Verify(a) => {
                let mut cfg = base_config(&a.common);
                cfg.system = descriptor(&a.system)?;
                cfg.x0 = a.x0.clone();
                cfg.t0 = a.t0;
                cfg.tmax = a.tmax;
                cfg.tol = a.tol;
                cfg.errors_csv = a.errors_csv.clone();
                let cfg = cfg.resolve(a.common.config.as_deref(), "verify-superposition")?;
                finish(cfg, commands::superpose_verify)
            }
        },
        Command::LieIntegral(a) => {
            let mut cfg = base_config(&a.common);
            cfg.system = descriptor(&a.system)?;
            apply_method(&mut cfg, &a.method);
            cfg.algebra = a.algebra.clone();
            cfg.coeff = a.coeff.clone();
            cfg.f0 = a.f0.clone();
            cfg.x0 = a.x0.clone();
            cfg.t0 = a.t0;
            cfg.tmax = a.tmax;
            cfg.tol = a.tol;
            cfg.points = a.points;
            cfg.csv = a.csv.clone();
            let cfg = cfg.resolve(a.common.config.as_deref(), "lie-integral")?;
            finish(cfg, commands::lie_integral)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok((report, code, out)) => {
            let text = serde_json::to_string_pretty(&report).expect("serializable report");
            println!("{text}");
            if let Some(path) = out {
                if let Err(e) = write_artifact(&path, &format!("{text}\n")) {
                    eprintln!("{}", e.message());
                    std::process::exit(e.exit_code());
                }
            }
            code
        }
        Err(e) => {
            let report = json!({
                "error": { "type": e.kind(), "message": e.message() }
            });
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("serializable error")
            );
            e.exit_code()
        }
    };
    std::process::exit(code);
}
