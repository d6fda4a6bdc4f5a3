//! One function per subcommand. Each takes the resolved [`ExperimentConfig`]
//! and returns the JSON report plus the process exit code (0 = pass,
//! 1 = verification failure); usage and domain errors go through [`CliError`].

use std::fs;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use lhk::algebra::{builtin, builtin_names, AlgebraError, StructureConstants};
use lhk::dynamics::{
    integrate, lie_integral_flow_at, monitor_invariants, verify_lie_integral, Invariant,
};
use lhk::realization::{check_homomorphism, RealizationError, DEFAULT_SAMPLE_MARGIN};
use lhk::superposition::{verify_rule, verify_rule_with_ics, RuleId, VerifyReport};
use lhk::sympoly::{find_casimirs, PolyError, SymPoly, DEFAULT_MONOMIAL_CAP};
use lhk::systems::{catalog, describe, LieHamiltonSystem, SystemError, CATALOG_INFO};

use crate::config::{from_dynamics, from_superposition, write_artifact, CliError, ExperimentConfig};

/// Report plus exit code.
pub type Outcome = (Value, i32);

fn from_algebra(e: AlgebraError) -> CliError {
    CliError::Usage {
        kind: "AlgebraError".into(),
        message: e.to_string(),
    }
}

fn from_poly(e: PolyError) -> CliError {
    CliError::Usage {
        kind: "PolyError".into(),
        message: e.to_string(),
    }
}

fn from_system(e: SystemError) -> CliError {
    CliError::Usage {
        kind: "SystemError".into(),
        message: e.to_string(),
    }
}

fn from_realization(e: RealizationError) -> CliError {
    CliError::Usage {
        kind: "RealizationError".into(),
        message: e.to_string(),
    }
}

fn require<T>(value: Option<T>, what: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::usage(format!("missing required input: {what}")))
}

fn require_ref<'a, T>(value: &'a Option<T>, what: &str) -> Result<&'a T, CliError> {
    value
        .as_ref()
        .ok_or_else(|| CliError::usage(format!("missing required input: {what}")))
}

fn build_system(cfg: &ExperimentConfig) -> Result<LieHamiltonSystem, CliError> {
    let desc = require_ref(&cfg.system, "--system")?;
    catalog(desc).map_err(from_system)
}

fn path_json(path: &Option<std::path::PathBuf>) -> Value {
    match path {
        Some(p) => json!(p.display().to_string()),
        None => Value::Null,
    }
}

// ---------------------------------------------------------------------------
// algebra

pub fn algebra_validate(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let file = require_ref(&cfg.file, "<file>")?;
    let text = fs::read_to_string(file)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", file.display())))?;
    let sc = StructureConstants::from_json_str(&text).map_err(from_algebra)?;
    let report = sc.validate();
    let antisymmetry: Vec<Value> = report
        .antisymmetry
        .iter()
        .map(|v| {
            json!({
                "alpha": v.alpha, "beta": v.beta, "gamma": v.gamma,
                "sum": v.sum.to_string(),
            })
        })
        .collect();
    let jacobi: Vec<Value> = report
        .jacobi
        .iter()
        .map(|v| {
            json!({
                "alpha": v.alpha, "beta": v.beta, "gamma": v.gamma, "nu": v.nu,
                "residual": v.residual.to_string(),
            })
        })
        .collect();
    let valid = report.is_valid();
    let out = json!({
        "file": file.display().to_string(),
        "dimension": sc.dim(),
        "antisymmetry_violations": antisymmetry,
        "jacobi_violations": jacobi,
        "valid": valid,
    });
    Ok((out, if valid { 0 } else { 1 }))
}

pub fn algebra_list() -> Result<Outcome, CliError> {
    Ok((json!({ "algebras": builtin_names() }), 0))
}

// ---------------------------------------------------------------------------
// casimir

pub fn casimir_check(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let algebra = require_ref(&cfg.algebra, "--algebra")?;
    let poly_text = require_ref(&cfg.poly, "--poly")?;
    let sc = builtin(algebra).map_err(from_algebra)?;
    let poly = SymPoly::parse(poly_text, sc.dim(), 1).map_err(from_poly)?;
    let casimir = poly.is_casimir(&sc).map_err(from_poly)?;
    let out = json!({
        "algebra": algebra,
        "poly": poly.to_string(),
        "casimir": casimir,
    });
    Ok((out, if casimir { 0 } else { 1 }))
}

pub fn casimir_find(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let algebra = require_ref(&cfg.algebra, "--algebra")?;
    let dmax = require(cfg.dmax, "--dmax")?;
    let sc = builtin(algebra).map_err(from_algebra)?;
    let basis = find_casimirs(&sc, dmax, DEFAULT_MONOMIAL_CAP).map_err(from_poly)?;
    let mut elements = vec![basis.constant.to_string()];
    elements.extend(basis.nontrivial.iter().map(|p| p.to_string()));
    let out = json!({
        "algebra": algebra,
        "dmax": dmax,
        "dimension": basis.dim(),
        "basis": elements,
    });
    Ok((out, 0))
}

// ---------------------------------------------------------------------------
// system

pub fn system_list() -> Result<Outcome, CliError> {
    let systems: Vec<Value> = CATALOG_INFO
        .iter()
        .map(|info| {
            json!({
                "name": info.name,
                "algebra": info.algebra,
                "summary": info.summary,
            })
        })
        .collect();
    Ok((json!({ "systems": systems }), 0))
}

pub fn system_show(name: &str) -> Result<Outcome, CliError> {
    let info = describe(name).map_err(from_system)?;
    let out = json!({
        "name": info.name,
        "summary": info.summary,
        "algebra": info.algebra,
        "phase_space": info.phase_dim_note,
        "coefficients": info.coefficient_names,
        "params": info.params_help,
    });
    Ok((out, 0))
}

// ---------------------------------------------------------------------------
// homomorphism

pub fn homomorphism(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let sys = build_system(cfg)?;
    let samples = cfg.points.unwrap_or(100);
    let tol = cfg.tol.unwrap_or(1e-8);
    let seed = cfg.effective_seed()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let report =
        check_homomorphism(&sys.realization, samples, tol, &mut rng).map_err(from_realization)?;
    let worst = report.worst_generator.as_ref().map(|w| {
        json!({
            "alpha": w.alpha, "beta": w.beta,
            "residual": w.residual, "point": w.point,
        })
    });
    let out = json!({
        "realization": sys.realization.name,
        "algebra_dim": sys.realization.algebra_dim(),
        "samples": report.samples,
        "tol": report.tol,
        "seed": seed,
        "max_generator_residual": report.max_generator_residual,
        "worst_generator": worst,
        "max_morphism_residual": report.max_morphism_residual,
        "pass": report.pass,
    });
    Ok((out, if report.pass { 0 } else { 1 }))
}

// ---------------------------------------------------------------------------
// simulate

pub fn simulate(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let mut sys = build_system(cfg)?;
    let m = cfg.m.unwrap_or(1);
    if m == 0 {
        return Err(CliError::usage("m must be at least 1"));
    }
    if m > 1 {
        sys = sys.prolong(m);
    }
    let x0 = require_ref(&cfg.x0, "--x0")?;
    let t0 = cfg.t0.unwrap_or(0.0);
    let tmax = require(cfg.tmax, "--tmax")?;
    let method = cfg.effective_method()?;
    let traj = integrate(&sys, x0, t0, tmax, method).map_err(from_dynamics)?;
    if let Some(path) = &cfg.csv {
        write_artifact(path, &traj.to_csv_string())?;
    }
    let out = json!({
        "system": cfg.system,
        "m": m,
        "method": method.label(),
        "t0": t0,
        "tmax": tmax,
        "samples": traj.len(),
        "final_time": traj.final_time(),
        "final_state": traj.final_state(),
        "csv": path_json(&cfg.csv),
    });
    Ok((out, 0))
}

// ---------------------------------------------------------------------------
// verify-constants

/// Casimir element of each built-in algebra, as a polynomial in the
/// generators; `h6` has the central generator itself.
fn casimir_expr(algebra: &str) -> Result<&'static str, CliError> {
    match algebra {
        "sl2" => Ok("v1*v3 - v2^2"),
        "su2" => Ok("v1^2 + v2^2 + v3^2"),
        "h6" => Ok("v6"),
        other => Err(CliError::usage(format!(
            "no Casimir registered for algebra {other:?}"
        ))),
    }
}

/// Builds the monitored set for `m` diagonal copies: the Casimir images
/// `F1..Fm` of the 1..m-copy coproducts, plus for `m = 3` the permuted
/// two-copy images `F2_13` and `F2_23`.
fn constant_set(
    casimir: &SymPoly,
    m: usize,
    base: &Arc<lhk::realization::Realization>,
) -> Result<Vec<Invariant>, CliError> {
    let mut invariants = Vec::new();
    for j in 1..=m {
        let fj = casimir
            .coproduct(j)
            .and_then(|p| p.embed(m))
            .map_err(from_poly)?;
        invariants.push(Invariant::realized(&format!("F{j}"), fj, base.clone()));
    }
    if m == 3 {
        let f2 = casimir
            .coproduct(2)
            .and_then(|p| p.embed(3))
            .map_err(from_poly)?;
        for (i, j) in [(1usize, 3usize), (2, 3)] {
            let perm = SymPoly::transposition(3, i, j);
            let poly = f2.permute_copies(&perm).map_err(from_poly)?;
            invariants.push(Invariant::realized(&format!("F2_{i}{j}"), poly, base.clone()));
        }
    }
    Ok(invariants)
}

pub fn verify_constants(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let base_sys = build_system(cfg)?;
    let m = cfg.m.unwrap_or(1);
    if m == 0 {
        return Err(CliError::usage("m must be at least 1"));
    }
    let sys = if m > 1 { base_sys.prolong(m) } else { base_sys };

    let info = describe(&sys.name).map_err(from_system)?;
    let casimir_text = casimir_expr(info.algebra)?;
    let r = sys.base.algebra_dim();
    let casimir = SymPoly::parse(casimir_text, r, 1).map_err(from_poly)?;
    let invariants = constant_set(&casimir, m, &sys.base)?;

    let seed = cfg.effective_seed()?;
    let x0 = match &cfg.x0 {
        Some(x0) => x0.clone(),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            sys.realization
                .space
                .sample(&mut rng, DEFAULT_SAMPLE_MARGIN)
                .map_err(from_realization)?
        }
    };
    let t0 = cfg.t0.unwrap_or(0.0);
    let tmax = require(cfg.tmax, "--tmax")?;
    let tol = cfg.tol.unwrap_or(1e-6);
    let method = cfg.effective_method()?;

    let traj = integrate(&sys, &x0, t0, tmax, method).map_err(from_dynamics)?;
    let drift = monitor_invariants(&traj, &invariants).map_err(from_dynamics)?;
    let drift_json: Value = serde_json::from_str(&drift.to_json_string())
        .map_err(|e| CliError::usage(format!("drift report serialization: {e}")))?;
    let max_drift = drift.max_drift();
    let pass = max_drift < tol;

    let out = json!({
        "system": cfg.system,
        "m": m,
        "casimir": casimir.to_string(),
        "x0": x0,
        "t0": t0,
        "tmax": tmax,
        "method": method.label(),
        "seed": seed,
        "tol": tol,
        "constants": drift_json,
        "max_drift": max_drift,
        "pass": pass,
    });
    Ok((out, if pass { 0 } else { 1 }))
}

// ---------------------------------------------------------------------------
// superpose verify

/// Maps a catalog system descriptor onto the superposition rule it admits.
fn rule_for(cfg: &ExperimentConfig) -> Result<RuleId, CliError> {
    let desc = require_ref(&cfg.system, "--system")?;
    match desc.name.as_str() {
        "kummer-schwarz" => {
            let b0 = match desc.params.get("b0") {
                Some(v) => v.as_f64().ok_or_else(|| CliError::usage("b0 must be a number"))?,
                None => 1.0,
            };
            Ok(RuleId::KummerSchwarz { b0 })
        }
        "smorodinsky-winternitz" | "milne-pinney" => {
            let b = match desc.params.get("b") {
                None => 1.0,
                Some(Value::Array(items)) if items.len() == 1 => items[0]
                    .as_f64()
                    .ok_or_else(|| CliError::usage("b must be a number"))?,
                Some(Value::Array(_)) => {
                    return Err(CliError::usage(
                        "the oscillator superposition rule needs the one-dimensional system (one b value)",
                    ))
                }
                Some(v) => v
                    .as_f64()
                    .ok_or_else(|| CliError::usage("b must be a number"))?,
            };
            Ok(RuleId::MilnePinney { b })
        }
        "trig-su2" => Ok(RuleId::TrigSu2),
        "riccati4" => Ok(RuleId::Riccati),
        other => Err(CliError::usage(format!(
            "no superposition rule registered for system {other:?}"
        ))),
    }
}

fn superpose_report(report: &VerifyReport, cfg: &ExperimentConfig, seed: u64) -> Result<Value, CliError> {
    let mut value: Value = serde_json::from_str(&report.to_json_string())
        .map_err(|e| CliError::usage(format!("report serialization: {e}")))?;
    if let Some(obj) = value.as_object_mut() {
        obj.insert("seed".into(), json!(seed));
        obj.insert(
            "per_time_errors_csv_path".into(),
            path_json(&cfg.errors_csv),
        );
    }
    Ok(value)
}

pub fn superpose_verify(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let rule = rule_for(cfg)?;
    let desc = require_ref(&cfg.system, "--system")?;
    let t0 = cfg.t0.unwrap_or(0.0);
    let tmax = require(cfg.tmax, "--tmax")?;
    let tol = cfg.tol.unwrap_or(1e-5);
    let seed = cfg.effective_seed()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let report = match &cfg.x0 {
        Some(x0) => verify_rule_with_ics(&rule, &desc.coefficients, x0, t0, tmax, tol),
        None => verify_rule(&rule, &desc.coefficients, t0, tmax, tol, &mut rng),
    }
    .map_err(from_superposition)?;

    if let Some(path) = &cfg.errors_csv {
        write_artifact(path, &report.errors_csv_string())?;
    }
    let out = superpose_report(&report, cfg, seed)?;
    Ok((out, if report.pass { 0 } else { 1 }))
}

// ---------------------------------------------------------------------------
// lie-integral

fn lie_integral_csv(path: &lhk::dynamics::LieIntegralPath) -> String {
    let r = path.values.first().map_or(0, Vec::len);
    let mut out = String::from("t");
    for alpha in 1..=r {
        out.push_str(&format!(",f{alpha}"));
    }
    out.push('\n');
    for (t, row) in path.times.iter().zip(&path.values) {
        out.push_str(&format!("{t:.17e}"));
        for v in row {
            out.push_str(&format!(",{v:.17e}"));
        }
        out.push('\n');
    }
    out
}

/// Evolves algebra-dual coefficients along the adjoint flow. With a system,
/// the flow rides on that system's trajectory grid and `--tol` additionally
/// checks constancy of `sum_a f_a(t) h_a(x(t))`; with a bare algebra the
/// coefficient curves come from `--coeff` strings.
pub fn lie_integral(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let f0 = require_ref(&cfg.f0, "--f0")?;
    let t0 = cfg.t0.unwrap_or(0.0);
    let tmax = require(cfg.tmax, "--tmax")?;
    let method = cfg.effective_method()?;

    if cfg.system.is_some() {
        let sys = build_system(cfg)?;
        let x0 = require_ref(&cfg.x0, "--x0")?;
        let traj = integrate(&sys, x0, t0, tmax, method).map_err(from_dynamics)?;
        let path = lie_integral_flow_at(&sys.base.sc, &sys.b, f0, &traj.times, method)
            .map_err(from_dynamics)?;
        if let Some(csv) = &cfg.csv {
            write_artifact(csv, &lie_integral_csv(&path))?;
        }
        let (verification, code) = match cfg.tol {
            Some(tol) => {
                let report = verify_lie_integral(&sys, &path, &traj, tol).map_err(from_dynamics)?;
                let code = if report.pass { 0 } else { 1 };
                let value = json!({
                    "initial": report.initial,
                    "max_deviation": report.max_deviation,
                    "tol": report.tol,
                    "samples": report.samples,
                    "pass": report.pass,
                });
                (value, code)
            }
            None => (Value::Null, 0),
        };
        let out = json!({
            "system": cfg.system,
            "t0": t0,
            "tmax": tmax,
            "method": method.label(),
            "samples": path.times.len(),
            "initial": f0,
            "final": path.final_value(),
            "verification": verification,
            "csv": path_json(&cfg.csv),
        });
        return Ok((out, code));
    }

    let algebra = require_ref(&cfg.algebra, "--algebra")?;
    let sc = builtin(algebra).map_err(from_algebra)?;
    let r = sc.dim();
    let coeff = require_ref(&cfg.coeff, "--coeff")?;
    if coeff.len() != r {
        return Err(CliError::usage(format!(
            "algebra {algebra:?} needs {r} coefficient curves, got {}",
            coeff.len()
        )));
    }
    let curves = coeff
        .iter()
        .map(|s| crate::config::parse_curve(s))
        .collect::<Result<Vec<_>, _>>()?;
    let points = cfg.points.unwrap_or(201);
    if points < 2 {
        return Err(CliError::usage("points must be at least 2"));
    }
    let times: Vec<f64> = (0..points)
        .map(|i| t0 + (tmax - t0) * i as f64 / (points - 1) as f64)
        .collect();
    let path = lie_integral_flow_at(&sc, &curves, f0, &times, method).map_err(from_dynamics)?;
    if let Some(csv) = &cfg.csv {
        write_artifact(csv, &lie_integral_csv(&path))?;
    }
    let out = json!({
        "algebra": algebra,
        "t0": t0,
        "tmax": tmax,
        "method": method.label(),
        "samples": path.times.len(),
        "initial": f0,
        "final": path.final_value(),
        "verification": Value::Null,
        "csv": path_json(&cfg.csv),
    });
    Ok((out, 0))
}
