//! End-to-end verification of superposition rules against integrated
//! trajectories.
//!
//! The verifier integrates a bundle of `n_particular + 1` solutions as one
//! prolonged system, extracts the rule constants near the start, rebuilds
//! the first solution from the others at every grid time, and reports the
//! worst relative reconstruction error. Square-root branches are resolved by
//! continuity: each candidate is compared against a one-step fourth-order
//! prediction from the previously accepted point.

use std::collections::BTreeMap;

use rand::Rng;
use serde_json::json;

use crate::dynamics::{integrate, integrate_at, Method};
use crate::realization::DEFAULT_SAMPLE_MARGIN;
use crate::systems::{CoefficientCurve, LieHamiltonSystem, SystemDescriptor};

use super::{
    extract_kummer_schwarz, extract_milne_pinney, extract_riccati, extract_trig_su2,
    kummer_schwarz_rule, ks_pair_invariant, milne_pinney_rule, mp_pair_invariant, riccati_rule,
    trig_newton, trig_su2_roots, BranchChoice, Constants, SuperpositionError,
};

/// Number of uniform grid points merged into the accepted-step grid.
pub const VERIFY_UNIFORM_POINTS: usize = 101;

/// Tolerance of the reference re-integration.
pub const VERIFY_FINE_TOLERANCE: f64 = 1e-12;

/// Relative residual bound candidates must satisfy against the defining
/// invariant equations.
const CANDIDATE_RESIDUAL_TOL: f64 = 1e-6;

/// Initial conditions are re-sampled at most this many times when an attempt
/// hits a singular or escaping configuration.
const MAX_IC_ATTEMPTS: usize = 25;

/// Identifies a superposition rule together with its structural parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum RuleId {
    /// Scalar quadratic-drift equation; three particular solutions, one
    /// cross-ratio constant.
    Riccati,
    /// Cubic-velocity system with parameter `b0`; two particular solutions.
    KummerSchwarz { b0: f64 },
    /// One-dimensional barrier oscillator with barrier strength `b`; two
    /// particular solutions.
    MilnePinney { b: f64 },
    /// Trigonometric system; two particular solutions, numeric inversion.
    TrigSu2,
}

impl RuleId {
    pub fn name(&self) -> &'static str {
        match self {
            RuleId::Riccati => "riccati",
            RuleId::KummerSchwarz { .. } => "kummer-schwarz",
            RuleId::MilnePinney { .. } => "milne-pinney",
            RuleId::TrigSu2 => "trig-su2",
        }
    }

    /// Particular solutions the rule consumes.
    pub fn n_particular(&self) -> usize {
        match self {
            RuleId::Riccati => 3,
            _ => 2,
        }
    }

    /// Time-dependent coefficient curves the underlying system takes.
    pub fn coefficient_count(&self) -> usize {
        match self {
            RuleId::Riccati | RuleId::TrigSu2 => 3,
            _ => 1,
        }
    }

    /// Structural parameters, for reports.
    pub fn params(&self) -> BTreeMap<String, f64> {
        let mut map = BTreeMap::new();
        match *self {
            RuleId::KummerSchwarz { b0 } => {
                map.insert("b0".to_string(), b0);
            }
            RuleId::MilnePinney { b } => {
                map.insert("b".to_string(), b);
            }
            RuleId::Riccati | RuleId::TrigSu2 => {}
        }
        map
    }

    /// Base phase-space dimension of one copy.
    fn base_dim(&self) -> usize {
        match self {
            RuleId::Riccati => 1,
            _ => 2,
        }
    }
}

/// A change of square-root branch between two adjacent grid times.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchSwitch {
    /// Last grid time on the old branch.
    pub t_before: f64,
    /// First grid time on the new branch.
    pub t: f64,
    pub from: String,
    pub to: String,
}

/// Outcome of verifying one rule on one sampled bundle.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub rule: String,
    pub params: BTreeMap<String, f64>,
    pub n_particular: usize,
    /// Extracted constants, rule order.
    pub constants: Vec<(String, f64)>,
    /// Bundle initial state that produced this report.
    pub initial_state: Vec<f64>,
    /// Grid times (accepted steps merged with a uniform grid).
    pub times: Vec<f64>,
    /// Relative reconstruction error at each grid time.
    pub errors: Vec<f64>,
    pub branch_switches: Vec<BranchSwitch>,
    pub samples: usize,
    pub tol: f64,
    pub max_error: f64,
    pub pass: bool,
}

impl VerifyReport {
    /// Deterministic JSON summary (sorted keys, no per-time payload).
    pub fn to_json_string(&self) -> String {
        let constants: BTreeMap<&str, f64> =
            self.constants.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        let value = json!({
            "rule": self.rule,
            "params": self.params,
            "n_particular": self.n_particular,
            "constants": constants,
            "initial_state": self.initial_state,
            "samples": self.samples,
            "tol": self.tol,
            "max_error": self.max_error,
            "branch_switch_times": self.branch_switches.iter().map(|s| s.t).collect::<Vec<_>>(),
            "pass": self.pass,
        });
        serde_json::to_string_pretty(&value).expect("report serialization")
    }

    /// Per-time errors as CSV with a `t,error` header.
    pub fn errors_csv_string(&self) -> String {
        let mut out = String::from("t,error\n");
        for (t, e) in self.times.iter().zip(&self.errors) {
            out.push_str(&format!("{t},{e}\n"));
        }
        out
    }
}

/// Builds the bundle system (one prolonged copy per solution) for a rule.
pub fn build_bundle(
    rule: &RuleId,
    coefficients: &[CoefficientCurve],
) -> Result<LieHamiltonSystem, SuperpositionError> {
    if coefficients.len() != rule.coefficient_count() {
        return Err(SuperpositionError::BadInput(format!(
            "rule {} takes {} coefficient curves, got {}",
            rule.name(),
            rule.coefficient_count(),
            coefficients.len()
        )));
    }
    let desc = match rule {
        RuleId::Riccati => SystemDescriptor::new("riccati4"),
        RuleId::KummerSchwarz { b0 } => {
            SystemDescriptor::new("kummer-schwarz").with_param("b0", json!(b0))
        }
        RuleId::MilnePinney { b } => {
            SystemDescriptor::new("smorodinsky-winternitz").with_param("b", json!(b))
        }
        RuleId::TrigSu2 => SystemDescriptor::new("trig-su2"),
    }
    .with_coefficients(coefficients.to_vec());
    let sys = crate::systems::catalog(&desc)?;
    Ok(match rule {
        // The four-solution system already carries all copies.
        RuleId::Riccati => sys,
        _ => sys.prolong(1 + rule.n_particular()),
    })
}

/// Right-hand side used for the one-step branch prediction of the target
/// copy alone.
enum PredictRhs<'a> {
    System(&'a LieHamiltonSystem),
    Scalar(&'a [CoefficientCurve]),
}

impl PredictRhs<'_> {
    fn eval(&self, t: f64, y: &[f64], out: &mut [f64]) -> bool {
        match self {
            PredictRhs::System(sys) => {
                if sys.rhs(t, y, out).is_err() {
                    return false;
                }
                out.iter().all(|v| v.is_finite())
            }
            PredictRhs::Scalar(curves) => {
                let (Ok(a0), Ok(a1), Ok(a2)) =
                    (curves[0].eval(t), curves[1].eval(t), curves[2].eval(t))
                else {
                    return false;
                };
                out[0] = a0 + a1 * y[0] + a2 * y[0] * y[0];
                out[0].is_finite()
            }
        }
    }
}

/// One classic fourth-order step; `None` when the right-hand side leaves the
/// domain, in which case the caller falls back to the previous point.
fn rk4_predict(rhs: &PredictRhs, t: f64, y: &[f64], h: f64) -> Option<Vec<f64>> {
    let n = y.len();
    let mut k = vec![vec![0.0; n]; 4];
    let mut stage = y.to_vec();
    if !rhs.eval(t, &stage, &mut k[0]) {
        return None;
    }
    for (i, c) in [(1, 0.5), (2, 0.5), (3, 1.0)] {
        for j in 0..n {
            stage[j] = y[j] + h * c * k[i - 1][j];
        }
        let (head, tail) = k.split_at_mut(i);
        let _ = head;
        if !rhs.eval(t + c * h, &stage, &mut tail[0]) {
            return None;
        }
    }
    let mut out = y.to_vec();
    for j in 0..n {
        out[j] += h / 6.0 * (k[0][j] + 2.0 * k[1][j] + 2.0 * k[2][j] + k[3][j]);
    }
    if out.iter().all(|v| v.is_finite()) {
        Some(out)
    } else {
        None
    }
}

/// Merges accepted step times with a uniform grid over `[t0, t1]`,
/// deduplicating nearly equal entries and pinning both endpoints.
fn merged_grid(accepted: &[f64], t0: f64, t1: f64, uniform: usize) -> Vec<f64> {
    let mut ts: Vec<f64> = accepted
        .iter()
        .copied()
        .filter(|&t| t > t0 && t < t1)
        .collect();
    for i in 1..uniform.max(2) - 1 {
        ts.push(t0 + (t1 - t0) * i as f64 / (uniform.max(2) - 1) as f64);
    }
    ts.sort_by(f64::total_cmp);
    let mut out = vec![t0];
    for t in ts {
        let near = 1e-9 * t.abs().max(1.0);
        if t - out.last().unwrap() > near && t1 - t > near {
            out.push(t);
        }
    }
    out.push(t1);
    out
}

fn is_retryable(err: &SuperpositionError) -> bool {
    match err {
        SuperpositionError::Dynamics(d) => d.is_abort(),
        SuperpositionError::SingularConstants(_)
        | SuperpositionError::DriftTooLarge { .. }
        | SuperpositionError::Reconstruction { .. }
        | SuperpositionError::NegativeRadicand { .. }
        | SuperpositionError::Degenerate(_) => true,
        _ => false,
    }
}

/// Samples a bundle initial state, avoiding configurations whose extracted
/// constants would be singular for the rule.
fn sample_initial_state<R: Rng>(
    rule: &RuleId,
    bundle: &LieHamiltonSystem,
    rng: &mut R,
) -> Result<Vec<f64>, SuperpositionError> {
    let space = &bundle.realization.space;
    for _ in 0..50 {
        let x = space
            .sample(rng, DEFAULT_SAMPLE_MARGIN)
            .map_err(|e| SuperpositionError::BadInput(e.to_string()))?;
        if let RuleId::MilnePinney { b } = *rule {
            // Keep 4 b^2 - k3^2 away from zero so the rule's linear solve
            // for x1^2 stays well conditioned.
            let k3 = 4.0 * mp_pair_invariant(x[2], x[3], x[4], x[5], b) - 2.0 * b;
            let den = 4.0 * b * b - k3 * k3;
            if den.abs() < 1e-3 * (4.0 * b * b + k3 * k3) {
                continue;
            }
        }
        return Ok(x);
    }
    Err(SuperpositionError::NoConvergence(
        "could not sample a non-singular initial bundle".into(),
    ))
}

/// Verifies a rule on a randomly sampled bundle; see [`verify_rule_with_ics`]
/// for the fixed-initial-state variant and the procedure.
pub fn verify_rule<R: Rng>(
    rule: &RuleId,
    coefficients: &[CoefficientCurve],
    t0: f64,
    t1: f64,
    tol: f64,
    rng: &mut R,
) -> Result<VerifyReport, SuperpositionError> {
    let bundle = build_bundle(rule, coefficients)?;
    let mut last_err = None;
    for _ in 0..MAX_IC_ATTEMPTS {
        let ic = sample_initial_state(rule, &bundle, rng)?;
        match verify_prepared(rule, coefficients, &bundle, &ic, t0, t1, tol) {
            Ok(report) => return Ok(report),
            Err(e) if is_retryable(&e) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or_else(|| {
        SuperpositionError::NoConvergence("no initial bundle produced a verifiable run".into())
    }))
}

/// Verifies a rule on one fixed bundle initial state.
///
/// Procedure: integrate the bundle adaptively over `[t0, t1]`, merge the
/// accepted times with a uniform grid, re-integrate on the merged grid at a
/// tighter tolerance to get the reference, extract the constants near `t0`
/// (checking they do not drift), then reconstruct the first copy from the
/// others at every grid time. `pass` requires the worst relative error to
/// stay within `tol`.
pub fn verify_rule_with_ics(
    rule: &RuleId,
    coefficients: &[CoefficientCurve],
    initial_state: &[f64],
    t0: f64,
    t1: f64,
    tol: f64,
) -> Result<VerifyReport, SuperpositionError> {
    let bundle = build_bundle(rule, coefficients)?;
    verify_prepared(rule, coefficients, &bundle, initial_state, t0, t1, tol)
}

fn verify_prepared(
    rule: &RuleId,
    coefficients: &[CoefficientCurve],
    bundle: &LieHamiltonSystem,
    initial_state: &[f64],
    t0: f64,
    t1: f64,
    tol: f64,
) -> Result<VerifyReport, SuperpositionError> {
    if !t0.is_finite() || !t1.is_finite() || t1 <= t0 {
        return Err(SuperpositionError::BadInput(format!(
            "need finite t1 > t0, got [{t0}, {t1}]"
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(SuperpositionError::BadInput(format!(
            "tolerance must be positive, got {tol}"
        )));
    }

    // Pass 1: adaptive integration for the step layout.
    let coarse = integrate(bundle, initial_state, t0, t1, Method::default())?;
    let grid = merged_grid(&coarse.times, t0, t1, VERIFY_UNIFORM_POINTS);

    // Pass 2: tight re-integration on the merged grid as the reference.
    let fine = Method::rkf45(VERIFY_FINE_TOLERANCE, VERIFY_FINE_TOLERANCE);
    let truth = integrate_at(bundle, initial_state, &grid, fine)?;

    let constants = match rule {
        RuleId::Riccati => Constants::Riccati {
            k: extract_riccati(&truth)?,
        },
        RuleId::KummerSchwarz { b0 } => {
            let (k1, k2) = extract_kummer_schwarz(&truth, *b0)?;
            Constants::KummerSchwarz { k1, k2 }
        }
        RuleId::MilnePinney { b } => {
            let (k1, k2, k3) = extract_milne_pinney(&truth, *b)?;
            Constants::MilnePinney { k1, k2, k3 }
        }
        RuleId::TrigSu2 => {
            let (k1, k2) = extract_trig_su2(&truth)?;
            Constants::TrigSu2 { k1, k2 }
        }
    };

    // The prediction integrates the target copy alone.
    let base_desc = match rule {
        RuleId::KummerSchwarz { b0 } => {
            Some(SystemDescriptor::new("kummer-schwarz").with_param("b0", json!(b0)))
        }
        RuleId::MilnePinney { b } => {
            Some(SystemDescriptor::new("smorodinsky-winternitz").with_param("b", json!(b)))
        }
        RuleId::TrigSu2 => Some(SystemDescriptor::new("trig-su2")),
        RuleId::Riccati => None,
    };
    let base_sys = match base_desc {
        Some(d) => Some(crate::systems::catalog(
            &d.with_coefficients(coefficients.to_vec()),
        )?),
        None => None,
    };
    let predict_rhs = match &base_sys {
        Some(sys) => PredictRhs::System(sys),
        None => PredictRhs::Scalar(coefficients),
    };

    let n = rule.base_dim();
    let mut errors = Vec::with_capacity(grid.len());
    let mut switches = Vec::new();
    let mut accepted: Vec<f64> = truth.states[0][..n].to_vec();
    let mut prev_label: Option<String> = None;
    errors.push(0.0);

    for row in 1..grid.len() {
        let t_prev = grid[row - 1];
        let t = grid[row];
        let state = &truth.states[row];
        let target: &[f64] = &state[..n];
        let prediction =
            rk4_predict(&predict_rhs, t_prev, &accepted, t - t_prev).unwrap_or_else(|| accepted.clone());

        let (point, label) = reconstruct(rule, &constants, state, &prediction, t)?;
        let err = point
            .iter()
            .zip(target)
            .map(|(r, x)| (r - x).abs() / x.abs().max(1.0))
            .fold(0.0, f64::max);
        errors.push(err);

        if let Some(prev) = &prev_label {
            if !label.is_empty() && *prev != label {
                switches.push(BranchSwitch {
                    t_before: t_prev,
                    t,
                    from: prev.clone(),
                    to: label.clone(),
                });
            }
        }
        if !label.is_empty() {
            prev_label = Some(label);
        }
        accepted = point;
    }

    let max_error = errors.iter().copied().fold(0.0, f64::max);
    Ok(VerifyReport {
        rule: rule.name().to_string(),
        params: rule.params(),
        n_particular: rule.n_particular(),
        constants: constants
            .named()
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
        initial_state: initial_state.to_vec(),
        samples: grid.len(),
        times: grid,
        errors,
        branch_switches: switches,
        tol,
        max_error: if max_error.is_finite() { max_error } else { f64::INFINITY },
        pass: max_error.is_finite() && max_error <= tol,
    })
}

/// Rebuilds the target copy from the particular copies in `state` at time
/// `t`, choosing among branch candidates by closeness to `prediction`.
fn reconstruct(
    rule: &RuleId,
    constants: &Constants,
    state: &[f64],
    prediction: &[f64],
    t: f64,
) -> Result<(Vec<f64>, String), SuperpositionError> {
    let fail = |e: SuperpositionError| SuperpositionError::Reconstruction {
        t,
        message: e.to_string(),
    };
    match (rule, constants) {
        (RuleId::Riccati, Constants::Riccati { k }) => {
            let x = riccati_rule(state[1], state[2], state[3], *k).map_err(fail)?;
            Ok((vec![x], String::new()))
        }
        (RuleId::KummerSchwarz { b0 }, Constants::KummerSchwarz { k1, k2 }) => {
            let (x2, p2, x3, p3) = (state[2], state[3], state[4], state[5]);
            let mut candidates = Vec::with_capacity(4);
            let mut last_err = None;
            for branch in BranchChoice::all(2) {
                match kummer_schwarz_rule(x2, p2, x3, p3, *k1, *k2, *b0, branch) {
                    Ok((x1, p1)) => candidates.push((vec![x1, p1], branch.label())),
                    Err(e) => last_err = Some(e),
                }
            }
            let residual = |c: &[f64]| {
                let r1 = ks_pair_invariant(c[0], c[1], x2, p2, *b0) - (k1 + 2.0 * b0);
                let r2 = ks_pair_invariant(c[0], c[1], x3, p3, *b0) - (k2 + 2.0 * b0);
                (
                    r1.abs() / (k1 + 2.0 * b0).abs().max(1.0),
                    r2.abs() / (k2 + 2.0 * b0).abs().max(1.0),
                )
            };
            pick(candidates, last_err, residual, prediction, t)
        }
        (RuleId::MilnePinney { b }, Constants::MilnePinney { k1, k2, k3 }) => {
            let (x2, p2, x3, p3) = (state[2], state[3], state[4], state[5]);
            let mut candidates = Vec::with_capacity(8);
            let mut last_err = None;
            for branch in BranchChoice::all(3) {
                match milne_pinney_rule(x2, p2, x3, p3, *k1, *k2, *k3, *b, branch) {
                    Ok((x1, p1)) => candidates.push((vec![x1, p1], branch.label())),
                    Err(e) => last_err = Some(e),
                }
            }
            let residual = |c: &[f64]| {
                let r1 = 4.0 * mp_pair_invariant(c[0], c[1], x2, p2, *b) - 2.0 * b - k1;
                let r2 = 4.0 * mp_pair_invariant(c[0], c[1], x3, p3, *b) - 2.0 * b - k2;
                (r1.abs() / k1.abs().max(1.0), r2.abs() / k2.abs().max(1.0))
            };
            pick(candidates, last_err, residual, prediction, t)
        }
        (RuleId::TrigSu2, Constants::TrigSu2 { k1, k2 }) => {
            let (x2, p2, x3, p3) = (state[2], state[3], state[4], state[5]);
            let seed = (prediction[0].clamp(-0.95, 0.95), prediction[1]);
            let mut roots = match trig_newton(seed, x2, p2, x3, p3, *k1, *k2) {
                Some(root) => vec![root],
                None => trig_su2_roots(x2, p2, x3, p3, *k1, *k2),
            };
            if roots.is_empty() {
                return Err(SuperpositionError::Reconstruction {
                    t,
                    message: "no Newton start converged on the invariant equations".into(),
                });
            }
            // The invariants fix p1 only modulo 2 pi; fold each root onto
            // the translate nearest the prediction.
            let two_pi = 2.0 * std::f64::consts::PI;
            for r in &mut roots {
                r.p1 += two_pi * ((prediction[1] - r.p1) / two_pi).round();
            }
            let best = roots
                .iter()
                .min_by(|a, b| {
                    let da = distance(&[a.x1, a.p1], prediction);
                    let db = distance(&[b.x1, b.p1], prediction);
                    da.total_cmp(&db)
                })
                .expect("nonempty roots");
            Ok((vec![best.x1, best.p1], String::new()))
        }
        _ => unreachable!("rule and constants always match"),
    }
}

/// Scale-relative infinity distance used for branch selection.
fn distance(candidate: &[f64], prediction: &[f64]) -> f64 {
    candidate
        .iter()
        .zip(prediction)
        .map(|(c, p)| (c - p).abs() / p.abs().max(1.0))
        .fold(0.0, f64::max)
}

/// Filters branch candidates by invariant residual, then picks the one
/// nearest the prediction.
fn pick(
    candidates: Vec<(Vec<f64>, String)>,
    last_err: Option<SuperpositionError>,
    residual: impl Fn(&[f64]) -> (f64, f64),
    prediction: &[f64],
    t: f64,
) -> Result<(Vec<f64>, String), SuperpositionError> {
    if candidates.is_empty() {
        let message = last_err
            .map(|e| e.to_string())
            .unwrap_or_else(|| "no branch produced a candidate".into());
        return Err(SuperpositionError::Reconstruction { t, message });
    }
    let consistent: Vec<&(Vec<f64>, String)> = candidates
        .iter()
        .filter(|(c, _)| {
            let (r1, r2) = residual(c);
            r1 < CANDIDATE_RESIDUAL_TOL && r2 < CANDIDATE_RESIDUAL_TOL
        })
        .collect();
    let pool: Vec<&(Vec<f64>, String)> = if consistent.is_empty() {
        candidates.iter().collect()
    } else {
        consistent
    };
    let best = pool
        .into_iter()
        .min_by(|a, b| distance(&a.0, prediction).total_cmp(&distance(&b.0, prediction)))
        .expect("nonempty pool");
    Ok((best.0.clone(), best.1.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn constant(v: f64) -> CoefficientCurve {
        CoefficientCurve::constant(v)
    }

    #[test]
    fn quadratic_drift_reconstruction_matches_the_closed_form() {
        // dx/dt = x^2 from x0 has solution x0 / (1 - x0 t). Particulars
        // start at 1, 2, 3 and the target at 4.
        let rule = RuleId::Riccati;
        let coeffs = [constant(0.0), constant(0.0), constant(1.0)];
        let report =
            verify_rule_with_ics(&rule, &coeffs, &[4.0, 1.0, 2.0, 3.0], 0.0, 0.2, 1e-8).unwrap();
        assert!(report.pass, "max error {:.3e}", report.max_error);
        assert_eq!(report.constants[0].0, "k");
        // Cross-check the reconstruction against the closed form directly.
        let k = report.constants[0].1;
        for &t in &[0.05, 0.1, 0.15, 0.2] {
            let sol = |x0: f64| x0 / (1.0 - x0 * t);
            let x = riccati_rule(sol(1.0), sol(2.0), sol(3.0), k).unwrap();
            let expected = sol(4.0);
            assert!(
                (x - expected).abs() <= 1e-8 * expected.abs().max(1.0),
                "t = {t}: {x} vs {expected}"
            );
        }
    }

    #[test]
    fn cubic_velocity_rule_verifies_on_a_driven_run() {
        let rule = RuleId::KummerSchwarz { b0: 1.0 };
        let coeffs = [CoefficientCurve::sinusoid(1.0, 1.0, 0.0, 0.0)];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let report = verify_rule(&rule, &coeffs, 0.0, 2.0, 1e-5, &mut rng).unwrap();
        assert!(report.pass, "max error {:.3e}", report.max_error);
        assert_eq!(report.n_particular, 2);
        assert_eq!(report.constants.len(), 2);
        assert!(report.samples >= VERIFY_UNIFORM_POINTS);
    }

    #[test]
    fn barrier_oscillator_rule_verifies_on_a_driven_run() {
        let rule = RuleId::MilnePinney { b: 1.0 };
        let coeffs = [CoefficientCurve::sinusoid(0.3, 1.0, 0.0, 1.0)];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let report = verify_rule(&rule, &coeffs, 0.0, 2.0, 1e-5, &mut rng).unwrap();
        assert!(report.pass, "max error {:.3e}", report.max_error);
        assert_eq!(
            report.constants.iter().map(|(k, _)| k.as_str()).collect::<Vec<_>>(),
            ["k1", "k2", "k3"]
        );
    }

    #[test]
    fn trig_rule_verifies_on_a_rotating_field() {
        let rule = RuleId::TrigSu2;
        let coeffs = [
            CoefficientCurve::sinusoid(1.0, 1.0, 0.0, 0.0),
            CoefficientCurve::sinusoid(1.0, 1.0, -std::f64::consts::FRAC_PI_2, 0.0),
            constant(1.0),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let report = verify_rule(&rule, &coeffs, 0.0, 2.0, 1e-5, &mut rng).unwrap();
        assert!(report.pass, "max error {:.3e}", report.max_error);
    }

    #[test]
    fn report_serializes_deterministically() {
        let rule = RuleId::Riccati;
        let coeffs = [constant(0.0), constant(0.0), constant(1.0)];
        let a = verify_rule_with_ics(&rule, &coeffs, &[4.0, 1.0, 2.0, 3.0], 0.0, 0.2, 1e-8)
            .unwrap();
        let b = verify_rule_with_ics(&rule, &coeffs, &[4.0, 1.0, 2.0, 3.0], 0.0, 0.2, 1e-8)
            .unwrap();
        assert_eq!(a.to_json_string(), b.to_json_string());
        assert_eq!(a.errors_csv_string(), b.errors_csv_string());
        assert!(a.errors_csv_string().starts_with("t,error\n"));
        let parsed: serde_json::Value = serde_json::from_str(&a.to_json_string()).unwrap();
        assert_eq!(parsed["rule"], "riccati");
        assert_eq!(parsed["n_particular"], 3);
        assert_eq!(parsed["pass"], true);
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let rule = RuleId::KummerSchwarz { b0: 1.0 };
        // Wrong coefficient count.
        assert!(matches!(
            build_bundle(&rule, &[]),
            Err(SuperpositionError::BadInput(_))
        ));
        let coeffs = [constant(1.0)];
        // Reversed time span.
        let err =
            verify_rule_with_ics(&rule, &coeffs, &[1.0; 6], 1.0, 0.0, 1e-5).unwrap_err();
        assert!(matches!(err, SuperpositionError::BadInput(_)));
        // Nonpositive tolerance.
        let err =
            verify_rule_with_ics(&rule, &coeffs, &[1.0; 6], 0.0, 1.0, 0.0).unwrap_err();
        assert!(matches!(err, SuperpositionError::BadInput(_)));
    }

    #[test]
    fn grid_merging_pins_endpoints_and_dedupes() {
        let grid = merged_grid(&[0.0, 0.1, 0.1 + 1e-12, 0.5, 2.0], 0.0, 2.0, 5);
        assert_eq!(grid.first(), Some(&0.0));
        assert_eq!(grid.last(), Some(&2.0));
        // 0.1 appears once; the uniform points 0.5, 1.0, 1.5 merge in.
        let count_near = |x: f64| grid.iter().filter(|&&t| (t - x).abs() < 1e-10).count();
        assert_eq!(count_near(0.1), 1);
        assert_eq!(count_near(0.5), 1);
        assert_eq!(count_near(1.0), 1);
        assert!(grid.windows(2).all(|w| w[1] > w[0]));
    }
}
