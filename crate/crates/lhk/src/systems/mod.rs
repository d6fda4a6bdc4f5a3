//! Concrete Lie-Hamilton systems: a realization plus coefficient curves.
//!
//! A [`LieHamiltonSystem`] is the nonautonomous vector field
//! `X_t = sum_alpha b_alpha(t) X_{h_alpha}` determined by a realization and
//! one coefficient curve per generator. The built-in catalog wires up the
//! realizations from [`crate::realization::catalog`] with the coefficient
//! layout each system expects (including derived generator coefficients such
//! as `omega^2(t)` or sign flips), and records sign conventions in one place.

mod curve;

pub use curve::{CoefficientCurve, CurveError};

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::realization::catalog as reals;
use crate::realization::{Realization, RealizationError};

/// Errors from building or evaluating systems.
#[derive(Debug, Error)]
pub enum SystemError {
    #[error("unknown system {0:?} (available: {})", catalog_names().join(", "))]
    UnknownSystem(String),
    #[error("system {system:?} expects {expected} coefficient curve(s), got {got}")]
    CoefficientCount {
        system: String,
        expected: usize,
        got: usize,
    },
    #[error("bad parameter {name:?} for system {system:?}: {reason}")]
    BadParam {
        system: String,
        name: String,
        reason: String,
    },
    #[error("unknown parameter {name:?} for system {system:?}")]
    UnknownParam { system: String, name: String },
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Realization(#[from] RealizationError),
    #[error("invalid system descriptor: {0}")]
    Format(String),
}

/// A time-dependent Hamiltonian system `X_t = sum_alpha b_alpha(t) X_{h_alpha}`.
#[derive(Debug, Clone)]
pub struct LieHamiltonSystem {
    pub name: String,
    /// Realization on the (possibly prolonged) phase space.
    pub realization: Arc<Realization>,
    /// Single-copy realization; equals `realization` when `copies == 1`.
    pub base: Arc<Realization>,
    /// Number of diagonal copies.
    pub copies: usize,
    /// One generator coefficient curve per Hamiltonian.
    pub b: Vec<CoefficientCurve>,
}

impl LieHamiltonSystem {
    /// Builds a system from a realization and generator coefficients.
    pub fn new(
        name: &str,
        realization: Realization,
        b: Vec<CoefficientCurve>,
    ) -> Result<Self, SystemError> {
        if b.len() != realization.algebra_dim() {
            return Err(SystemError::CoefficientCount {
                system: name.to_string(),
                expected: realization.algebra_dim(),
                got: b.len(),
            });
        }
        for curve in &b {
            curve.validate()?;
        }
        let real = Arc::new(realization);
        Ok(LieHamiltonSystem {
            name: name.to_string(),
            realization: real.clone(),
            base: real,
            copies: 1,
            b,
        })
    }

    /// Phase-space dimension (of the prolonged space when `copies > 1`).
    pub fn dim(&self) -> usize {
        self.realization.dim()
    }

    /// Generator coefficients `b_alpha(t)`.
    pub fn coefficients(&self, t: f64) -> Result<Vec<f64>, SystemError> {
        self.b.iter().map(|c| Ok(c.eval(t)?)).collect()
    }

    /// Evaluates the vector field at `(t, x)` into `out`. The point is not
    /// domain-checked here; integrators do that around each step.
    pub fn rhs(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<(), SystemError> {
        let coeffs = self.coefficients(t)?;
        let base = &self.base;
        let n = base.dim();
        debug_assert_eq!(x.len(), n * self.copies);
        let r = base.algebra_dim();
        let mut grad_total = vec![0.0; n];
        let mut grad = vec![0.0; n];
        let mut lam = vec![0.0; n * n];
        for (chunk, out_chunk) in x.chunks(n).zip(out.chunks_mut(n)) {
            grad_total.fill(0.0);
            for alpha in 0..r {
                if coeffs[alpha] == 0.0 {
                    continue;
                }
                base.hams[alpha].gradient(chunk, &mut grad);
                for i in 0..n {
                    grad_total[i] += coeffs[alpha] * grad[i];
                }
            }
            base.bivector.eval(chunk, &mut lam);
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..n {
                    let l = lam[i * n + j];
                    if l != 0.0 {
                        acc += l * grad_total[j];
                    }
                }
                out_chunk[i] = acc;
            }
        }
        Ok(())
    }

    /// Diagonal prolongation to `m` copies: same coefficients, block
    /// dynamics, summed Hamiltonians.
    pub fn prolong(&self, m: usize) -> LieHamiltonSystem {
        assert!(self.copies == 1, "prolong from the single-copy system");
        if m == 1 {
            return self.clone();
        }
        LieHamiltonSystem {
            name: self.name.clone(),
            realization: Arc::new(self.base.prolong(m)),
            base: self.base.clone(),
            copies: m,
            b: self.b.clone(),
        }
    }
}

/// A serializable recipe for a catalog system.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemDescriptor {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
    #[serde(default)]
    pub coefficients: Vec<CoefficientCurve>,
}

impl SystemDescriptor {
    pub fn new(name: &str) -> Self {
        SystemDescriptor {
            name: name.to_string(),
            params: BTreeMap::new(),
            coefficients: Vec::new(),
        }
    }

    pub fn with_param(mut self, key: &str, value: serde_json::Value) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn with_coefficients(mut self, coefficients: Vec<CoefficientCurve>) -> Self {
        self.coefficients = coefficients;
        self
    }

    pub fn from_json_str(s: &str) -> Result<Self, SystemError> {
        serde_json::from_str(s).map_err(|e| SystemError::Format(e.to_string()))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("descriptor serialization")
    }
}

/// Static documentation for one catalog entry.
#[derive(Debug, Clone, Serialize)]
pub struct SystemInfo {
    pub name: &'static str,
    pub summary: &'static str,
    pub algebra: &'static str,
    pub phase_dim_note: &'static str,
    pub coefficient_names: &'static [&'static str],
    pub params_help: &'static [&'static str],
}

/// Names accepted by [`catalog`].
pub fn catalog_names() -> Vec<&'static str> {
    CATALOG_INFO.iter().map(|info| info.name).collect()
}

/// Documentation for `lhk system show` and error messages.
pub const CATALOG_INFO: &[SystemInfo] = &[
    SystemInfo {
        name: "ermakov",
        summary: "barrier oscillator in x coupled to an auxiliary harmonic mode in y, common frequency omega(t)",
        algebra: "sl2",
        phase_dim_note: "4 coordinates (x, y, vx, vy)",
        coefficient_names: &["omega(t)"],
        params_help: &["b: barrier strength in x (default 1)"],
    },
    SystemInfo {
        name: "smorodinsky-winternitz",
        summary: "n oscillators with inverse-square barriers b_i/x_i^2 and common frequency omega(t)",
        algebra: "sl2",
        phase_dim_note: "2n coordinates (x_1..x_n, p_1..p_n); n = length of b",
        coefficient_names: &["omega(t)"],
        params_help: &["b: barrier strength, scalar or array (default 1)"],
    },
    SystemInfo {
        name: "kummer-schwarz",
        summary: "cubic-velocity oscillator with constant curvature term b0 and drive b1(t)",
        algebra: "sl2",
        phase_dim_note: "2 coordinates (x, p), x != 0",
        coefficient_names: &["b1(t)"],
        params_help: &["b0: curvature constant (default 1)"],
    },
    SystemInfo {
        name: "second-order-riccati",
        summary: "Hamiltonian form of the second-order equation with quadratic drift, coefficients a0(t), a1(t), a2(t)",
        algebra: "h6",
        phase_dim_note: "2 coordinates (x, p), p < 0",
        coefficient_names: &["a0(t)", "a1(t)", "a2(t)"],
        params_help: &[],
    },
    SystemInfo {
        name: "trig-su2",
        summary: "spin-like system on |x| < 1 driven by Bx(t), By(t), Bz(t)",
        algebra: "su2",
        phase_dim_note: "2 coordinates (x, p), |x| < 1 - 1e-6",
        coefficient_names: &["Bx(t)", "By(t)", "Bz(t)"],
        params_help: &[],
    },
    SystemInfo {
        name: "riccati4",
        summary: "four scalar quadratic-drift equations sharing coefficients a0(t), a1(t), a2(t)",
        algebra: "sl2",
        phase_dim_note: "4 coordinates (x1..x4), pairwise distinct",
        coefficient_names: &["a0(t)", "a1(t)", "a2(t)"],
        params_help: &["structure: 1 or 2, selecting the Poisson structure (default 1)"],
    },
];

pub fn describe(name: &str) -> Result<&'static SystemInfo, SystemError> {
    CATALOG_INFO
        .iter()
        .find(|info| info.name == name)
        .ok_or_else(|| SystemError::UnknownSystem(name.to_string()))
}

struct ParamReader<'a> {
    system: &'a str,
    params: &'a BTreeMap<String, serde_json::Value>,
    allowed: &'a [&'a str],
}

impl<'a> ParamReader<'a> {
    fn new(
        system: &'a str,
        params: &'a BTreeMap<String, serde_json::Value>,
        allowed: &'a [&'a str],
    ) -> Result<Self, SystemError> {
        for key in params.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(SystemError::UnknownParam {
                    system: system.to_string(),
                    name: key.clone(),
                });
            }
        }
        Ok(ParamReader {
            system,
            params,
            allowed,
        })
    }

    fn bad(&self, name: &str, reason: impl Into<String>) -> SystemError {
        SystemError::BadParam {
            system: self.system.to_string(),
            name: name.to_string(),
            reason: reason.into(),
        }
    }

    fn f64_or(&self, name: &str, default: f64) -> Result<f64, SystemError> {
        debug_assert!(self.allowed.contains(&name));
        match self.params.get(name) {
            None => Ok(default),
            Some(v) => v.as_f64().ok_or_else(|| self.bad(name, "expected a number")),
        }
    }

    fn f64_vec_or(&self, name: &str, default: Vec<f64>) -> Result<Vec<f64>, SystemError> {
        match self.params.get(name) {
            None => Ok(default),
            Some(serde_json::Value::Array(items)) => items
                .iter()
                .map(|v| v.as_f64().ok_or_else(|| self.bad(name, "expected numbers")))
                .collect(),
            Some(v) => v
                .as_f64()
                .map(|x| vec![x])
                .ok_or_else(|| self.bad(name, "expected a number or an array of numbers")),
        }
    }

    fn u64_or(&self, name: &str, default: u64) -> Result<u64, SystemError> {
        match self.params.get(name) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .ok_or_else(|| self.bad(name, "expected a positive integer")),
        }
    }
}

fn expect_coefficients(
    desc: &SystemDescriptor,
    expected: usize,
) -> Result<&[CoefficientCurve], SystemError> {
    if desc.coefficients.len() != expected {
        return Err(SystemError::CoefficientCount {
            system: desc.name.clone(),
            expected,
            got: desc.coefficients.len(),
        });
    }
    Ok(&desc.coefficients)
}

/// Instantiates a catalog system from a descriptor.
///
/// Generator coefficient layouts (order matches the realization generators):
///
/// * `ermakov`, `smorodinsky-winternitz`: `b = (omega^2(t), 0, 1)`;
/// * `kummer-schwarz`: `b = (b1(t), 0, 1)`;
/// * `second-order-riccati`: `b = (1, -a0(t), -a1(t), -a2(t), 0, 0)`;
/// * `trig-su2`: `b = (Bx(t), By(t), Bz(t))`;
/// * `riccati4`: `b = (a0(t), a1(t), a2(t))`.
pub fn catalog(desc: &SystemDescriptor) -> Result<LieHamiltonSystem, SystemError> {
    let zero = CoefficientCurve::constant(0.0);
    let one = CoefficientCurve::constant(1.0);
    match desc.name.as_str() {
        "ermakov" => {
            let p = ParamReader::new(&desc.name, &desc.params, &["b"])?;
            let b = p.f64_or("b", 1.0)?;
            let omega = expect_coefficients(desc, 1)?[0].clone();
            LieHamiltonSystem::new(
                "ermakov",
                reals::ermakov(b),
                vec![CoefficientCurve::squared(omega), zero, one],
            )
        }
        "smorodinsky-winternitz" => {
            let p = ParamReader::new(&desc.name, &desc.params, &["b"])?;
            let b = p.f64_vec_or("b", vec![1.0])?;
            if b.is_empty() {
                return Err(SystemError::BadParam {
                    system: desc.name.clone(),
                    name: "b".into(),
                    reason: "needs at least one entry".into(),
                });
            }
            let omega = expect_coefficients(desc, 1)?[0].clone();
            LieHamiltonSystem::new(
                "smorodinsky-winternitz",
                reals::smorodinsky_winternitz(&b),
                vec![CoefficientCurve::squared(omega), zero, one],
            )
        }
        "kummer-schwarz" => {
            let p = ParamReader::new(&desc.name, &desc.params, &["b0"])?;
            let b0 = p.f64_or("b0", 1.0)?;
            let b1 = expect_coefficients(desc, 1)?[0].clone();
            LieHamiltonSystem::new(
                "kummer-schwarz",
                reals::kummer_schwarz(b0),
                vec![b1, zero, one],
            )
        }
        "second-order-riccati" => {
            ParamReader::new(&desc.name, &desc.params, &[])?;
            let coeffs = expect_coefficients(desc, 3)?;
            let b = vec![
                one,
                CoefficientCurve::scaled(-1.0, coeffs[0].clone()),
                CoefficientCurve::scaled(-1.0, coeffs[1].clone()),
                CoefficientCurve::scaled(-1.0, coeffs[2].clone()),
                zero.clone(),
                zero,
            ];
            LieHamiltonSystem::new("second-order-riccati", reals::second_order_riccati(), b)
        }
        "trig-su2" => {
            ParamReader::new(&desc.name, &desc.params, &[])?;
            let coeffs = expect_coefficients(desc, 3)?.to_vec();
            LieHamiltonSystem::new("trig-su2", reals::trig_su2(), coeffs)
        }
        "riccati4" => {
            let p = ParamReader::new(&desc.name, &desc.params, &["structure"])?;
            let structure = p.u64_or("structure", 1)?;
            let real = match structure {
                1 => reals::riccati4_first(),
                2 => reals::riccati4_second(),
                other => {
                    return Err(SystemError::BadParam {
                        system: desc.name.clone(),
                        name: "structure".into(),
                        reason: format!("must be 1 or 2, got {other}"),
                    })
                }
            };
            let coeffs = expect_coefficients(desc, 3)?.to_vec();
            LieHamiltonSystem::new("riccati4", real, coeffs)
        }
        _ => Err(SystemError::UnknownSystem(desc.name.clone())),
    }
}
