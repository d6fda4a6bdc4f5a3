//! Experiment configuration, the coefficient-curve mini-language, and
//! report/file plumbing shared by all subcommands.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use lhk::dynamics::{DynamicsError, Method, DEFAULT_ATOL, DEFAULT_RTOL};
use lhk::superposition::SuperpositionError;
use lhk::systems::{CoefficientCurve, SystemDescriptor};

/// Default RNG seed when neither flag, config, nor `LHK_SEED` supplies one.
pub const DEFAULT_SEED: u64 = 42;

/// A command failure mapped to an exit code: usage errors exit 2, domain or
/// numeric failures exit 3. Verification failures (exit 1) are expressed in
/// reports, not through this type.
#[derive(Debug)]
pub enum CliError {
    Usage { kind: String, message: String },
    Domain { kind: String, message: String },
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage {
            kind: "cli::usage".into(),
            message: message.into(),
        }
    }

    pub fn kind(&self) -> &str {
        match self {
            CliError::Usage { kind, .. } | CliError::Domain { kind, .. } => kind,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage { message, .. } | CliError::Domain { message, .. } => message,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. } => 2,
            CliError::Domain { .. } => 3,
        }
    }
}

/// Tags a library error with its typed name and exit class.
pub fn from_dynamics(e: DynamicsError) -> CliError {
    use DynamicsError as E;
    let kind = match &e {
        E::BadInput(_) => "DynamicsError::BadInput",
        E::OutOfDomain(_) => "DynamicsError::OutOfDomain",
        E::DomainExit { .. } => "DynamicsError::DomainExit",
        E::StepUnderflow { .. } => "DynamicsError::StepUnderflow",
        E::MaxSteps { .. } => "DynamicsError::MaxSteps",
        E::System(_) => "SystemError",
        E::Realization(_) => "RealizationError",
        E::Poly(_) => "PolyError",
        E::Csv(_) => "DynamicsError::Csv",
        E::Shape(_) => "DynamicsError::Shape",
        E::Grid(_) => "DynamicsError::Grid",
    };
    let message = e.to_string();
    match e {
        E::OutOfDomain(_) | E::DomainExit { .. } | E::StepUnderflow { .. } | E::MaxSteps { .. } => {
            CliError::Domain {
                kind: kind.into(),
                message,
            }
        }
        _ => CliError::Usage {
            kind: kind.into(),
            message,
        },
    }
}

pub fn from_superposition(e: SuperpositionError) -> CliError {
    use SuperpositionError as E;
    let kind = match &e {
        E::Degenerate(_) => "SuperpositionError::Degenerate",
        E::NegativeRadicand { .. } => "SuperpositionError::NegativeRadicand",
        E::SingularConstants(_) => "SuperpositionError::SingularConstants",
        E::NoConvergence(_) => "SuperpositionError::NoConvergence",
        E::DriftTooLarge { .. } => "SuperpositionError::DriftTooLarge",
        E::Reconstruction { .. } => "SuperpositionError::Reconstruction",
        E::BadInput(_) => "SuperpositionError::BadInput",
        E::Dynamics(_) => "DynamicsError",
        E::System(_) => "SystemError",
        E::Poly(_) => "PolyError",
        E::Realization(_) => "RealizationError",
    };
    let message = e.to_string();
    match e {
        E::BadInput(_) | E::System(_) | E::Poly(_) | E::Realization(_) => CliError::Usage {
            kind: kind.into(),
            message,
        },
        E::Dynamics(d) => from_dynamics(d),
        _ => CliError::Domain {
            kind: kind.into(),
            message,
        },
    }
}

/// One experiment, as flags or as a JSON file (`--config`); file fields
/// override flag-derived ones.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Option<String>,
    pub algebra: Option<String>,
    pub file: Option<PathBuf>,
    pub poly: Option<String>,
    pub dmax: Option<u32>,
    pub system: Option<SystemDescriptor>,
    pub m: Option<usize>,
    pub x0: Option<Vec<f64>>,
    pub f0: Option<Vec<f64>>,
    /// Coefficient curves for `lie-integral`, in the mini-language.
    pub coeff: Option<Vec<String>>,
    pub t0: Option<f64>,
    pub tmax: Option<f64>,
    pub tol: Option<f64>,
    pub points: Option<usize>,
    pub method: Option<String>,
    pub atol: Option<f64>,
    pub rtol: Option<f64>,
    pub h: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub errors_csv: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Field-by-field overlay: values set in `file` win over `self`.
    pub fn overlaid_with(mut self, file: ExperimentConfig) -> Self {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if file.$field.is_some() { self.$field = file.$field; })*
            };
        }
        take!(
            kind, algebra, file, poly, dmax, system, m, x0, f0, coeff, t0, tmax, tol, points,
            method, atol, rtol, h, seed, out, csv, errors_csv
        );
        self
    }

    /// Applies `--config` (if any) on top of the flag-derived config and
    /// checks the config's declared kind against the invoked subcommand.
    pub fn resolve(self, config_path: Option<&Path>, kind: &str) -> Result<Self, CliError> {
        let merged = match config_path {
            Some(p) => self.overlaid_with(ExperimentConfig::load(p)?),
            None => self,
        };
        if let Some(declared) = &merged.kind {
            if declared != kind {
                return Err(CliError::usage(format!(
                    "config kind {declared:?} does not match the {kind:?} subcommand"
                )));
            }
        }
        Ok(merged)
    }

    /// Seed priority: config/flag value, then `LHK_SEED`, then the default.
    pub fn effective_seed(&self) -> Result<u64, CliError> {
        if let Some(s) = self.seed {
            return Ok(s);
        }
        match std::env::var("LHK_SEED") {
            Ok(v) => v
                .trim()
                .parse::<u64>()
                .map_err(|_| CliError::usage(format!("LHK_SEED must be an integer, got {v:?}"))),
            Err(_) => Ok(DEFAULT_SEED),
        }
    }

    /// Integration method from `method`/`atol`/`rtol`/`h` fields.
    pub fn effective_method(&self) -> Result<Method, CliError> {
        let name = self.method.as_deref().unwrap_or("rkf45");
        match name {
            "rkf45" => Ok(Method::rkf45(
                self.atol.unwrap_or(DEFAULT_ATOL),
                self.rtol.unwrap_or(DEFAULT_RTOL),
            )),
            "rk4" => Ok(Method::rk4(self.h.unwrap_or(1e-3))),
            other => Err(CliError::usage(format!(
                "unknown method {other:?} (expected rkf45 or rk4)"
            ))),
        }
    }
}

/// Parses the coefficient-curve mini-language:
/// `CONST | [CONST '+'] [CONST '*'] ('cos' | 'sin')`, with `omega = 1`.
/// Examples: `"2"`, `"cos"`, `"0.3*sin"`, `"1+0.3*cos"`.
pub fn parse_curve(text: &str) -> Result<CoefficientCurve, CliError> {
    let bad = |detail: &str| {
        CliError::usage(format!(
            "cannot parse coefficient curve {text:?}: {detail} \
             (expected CONST, or [CONST+][CONST*](cos|sin))"
        ))
    };
    let s = text.trim();
    if s.is_empty() {
        return Err(bad("empty"));
    }
    // Plain constants first, so exponent signs like 1e+3 are not split.
    if let Ok(v) = s.parse::<f64>() {
        return Ok(CoefficientCurve::constant(v));
    }
    let (offset, rest) = match s.split_once('+') {
        Some((head, rest)) => (
            head.trim()
                .parse::<f64>()
                .map_err(|_| bad("offset is not a number"))?,
            rest.trim(),
        ),
        None => (0.0, s),
    };
    let (amp, name) = match rest.split_once('*') {
        Some((head, tail)) => (
            head.trim()
                .parse::<f64>()
                .map_err(|_| bad("amplitude is not a number"))?,
            tail.trim(),
        ),
        None => (1.0, rest),
    };
    let phase = match name {
        "cos" => 0.0,
        "sin" => -std::f64::consts::FRAC_PI_2,
        _ => return Err(bad("trailing function must be cos or sin")),
    };
    Ok(CoefficientCurve::sinusoid(amp, 1.0, phase, offset))
}

/// Writes a file atomically: temp file in the same directory, then rename.
pub fn atomic_write(path: &Path, contents: &str) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    fs::write(&tmp, contents)?;
    match fs::rename(&tmp, path) {
        Ok(()) => Ok(()),
        Err(e) => {
            let _ = fs::remove_file(&tmp);
            Err(e)
        }
    }
}

/// Writes an artifact file, mapping IO failures to usage errors.
pub fn write_artifact(path: &Path, contents: &str) -> Result<(), CliError> {
    atomic_write(path, contents)
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))
}
