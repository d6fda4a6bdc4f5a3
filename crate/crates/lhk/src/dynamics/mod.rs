//! Trajectory integration and invariant diagnostics.
//!
//! Provides fixed-step RK4 and adaptive RKF45 integration of
//! [`LieHamiltonSystem`]s with clean domain-exit handling, drift monitoring of
//! realized invariants along trajectories, numeric involution and functional
//! independence checks, and the linear flow `df/dt = M(b(t)) f` whose
//! solutions combine with the realized generators into time-dependent
//! constants of motion.

mod stepper;

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::StructureConstants;
use crate::realization::{
    bracket_num, realize_eval, realized_function, realized_gradient, Realization,
    RealizationError, SmoothFunction, DEFAULT_SAMPLE_MARGIN,
};
use crate::sympoly::{PolyError, SymPoly};
use crate::systems::{CoefficientCurve, LieHamiltonSystem, SystemError};

use stepper::{Problem, RawRun, StepFailure};

/// Default absolute tolerance for the adaptive method.
pub const DEFAULT_ATOL: f64 = 1e-10;
/// Default relative tolerance for the adaptive method.
pub const DEFAULT_RTOL: f64 = 1e-10;

/// Integration method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Classic fixed-step fourth-order Runge-Kutta.
    Rk4 { h: f64 },
    /// Adaptive Fehlberg 4(5) with PI step-size control.
    Rkf45 { atol: f64, rtol: f64 },
}

impl Method {
    pub fn rk4(h: f64) -> Method {
        Method::Rk4 { h }
    }

    pub fn rkf45(atol: f64, rtol: f64) -> Method {
        Method::Rkf45 { atol, rtol }
    }

    /// Human-readable label for reports and trajectory metadata.
    pub fn label(&self) -> String {
        match self {
            Method::Rk4 { h } => format!("rk4(h={h})"),
            Method::Rkf45 { atol, rtol } => format!("rkf45(atol={atol},rtol={rtol})"),
        }
    }

    fn validate(&self) -> Result<(), DynamicsError> {
        let ok = match *self {
            Method::Rk4 { h } => h.is_finite() && h > 0.0,
            Method::Rkf45 { atol, rtol } => {
                atol.is_finite() && rtol.is_finite() && atol > 0.0 && rtol > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(DynamicsError::BadInput(format!(
                "invalid method parameters: {}",
                self.label()
            )))
        }
    }
}

impl Default for Method {
    fn default() -> Method {
        Method::Rkf45 {
            atol: DEFAULT_ATOL,
            rtol: DEFAULT_RTOL,
        }
    }
}

/// Errors from integration and the diagnostic operations.
#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("initial state outside the domain: {0}")]
    OutOfDomain(String),
    #[error("trajectory left the domain at t = {t}: {message}")]
    DomainExit {
        t: f64,
        message: String,
        /// Trajectory up to the last interior state.
        partial: Box<Trajectory>,
    },
    #[error("step size underflow at t = {t} (h = {h:.3e}): {detail}")]
    StepUnderflow {
        t: f64,
        h: f64,
        detail: String,
        partial: Box<Trajectory>,
    },
    #[error("exceeded {max} steps at t = {t}")]
    MaxSteps {
        t: f64,
        max: usize,
        partial: Box<Trajectory>,
    },
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Realization(#[from] RealizationError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("CSV parse error: {0}")]
    Csv(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("time grid mismatch: {0}")]
    Grid(String),
}

impl DynamicsError {
    /// True for the abort conditions a trajectory can hit mid-run.
    pub fn is_abort(&self) -> bool {
        matches!(
            self,
            DynamicsError::DomainExit { .. }
                | DynamicsError::StepUnderflow { .. }
                | DynamicsError::MaxSteps { .. }
        )
    }
}

/// Metadata carried along with a trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryMeta {
    pub system: String,
    pub copies: usize,
    pub method: String,
}

/// An integrated trajectory: strictly increasing times and matching states.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub names: Vec<String>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("non-empty trajectory")
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("non-empty trajectory")
    }

    /// CSV with header `t,<coordinate names>` and shortest round-trip floats.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("t");
        for name in &self.names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (t, state) in self.times.iter().zip(&self.states) {
            out.push_str(&format!("{t}"));
            for v in state {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv_str(text: &str) -> Result<Trajectory, DynamicsError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| DynamicsError::Csv("empty input".into()))?;
        let mut cols = header.split(',');
        if cols.next() != Some("t") {
            return Err(DynamicsError::Csv("header must start with 't'".into()));
        }
        let names: Vec<String> = cols.map(str::to_string).collect();
        if names.is_empty() {
            return Err(DynamicsError::Csv("no coordinate columns".into()));
        }
        let mut times = Vec::new();
        let mut states = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let values: Vec<f64> = line
                .split(',')
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .map_err(|e| DynamicsError::Csv(format!("row {}: {e}", lineno + 2)))
                })
                .collect::<Result<_, _>>()?;
            if values.len() != names.len() + 1 {
                return Err(DynamicsError::Csv(format!(
                    "row {}: expected {} fields, got {}",
                    lineno + 2,
                    names.len() + 1,
                    values.len()
                )));
            }
            times.push(values[0]);
            states.push(values[1..].to_vec());
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(DynamicsError::Csv("times must be strictly increasing".into()));
        }
        Ok(Trajectory {
            names,
            times,
            states,
            meta: TrajectoryMeta {
                system: String::new(),
                copies: 1,
                method: String::new(),
            },
        })
    }
}

fn finish_run(
    run: RawRun,
    names: Vec<String>,
    meta: TrajectoryMeta,
) -> Result<Trajectory, DynamicsError> {
    let traj = Trajectory {
        names,
        times: run.times,
        states: run.states,
        meta,
    };
    match run.failure {
        None => Ok(traj),
        Some(StepFailure::DomainExit { t, message }) => Err(DynamicsError::DomainExit {
            t,
            message,
            partial: Box::new(traj),
        }),
        Some(StepFailure::StepUnderflow { t, h, detail }) => Err(DynamicsError::StepUnderflow {
            t,
            h,
            detail,
            partial: Box::new(traj),
        }),
        Some(StepFailure::MaxSteps { t, max }) => Err(DynamicsError::MaxSteps {
            t,
            max,
            partial: Box::new(traj),
        }),
    }
}

fn check_system_inputs(
    sys: &LieHamiltonSystem,
    x0: &[f64],
    t0: f64,
    t_end: f64,
) -> Result<(), DynamicsError> {
    if x0.len() != sys.dim() {
        return Err(DynamicsError::BadInput(format!(
            "initial state has {} coordinates, system needs {}",
            x0.len(),
            sys.dim()
        )));
    }
    if let Some(message) = sys.realization.space.violation(x0, 0.0) {
        return Err(DynamicsError::OutOfDomain(message));
    }
    if !t0.is_finite() || !t_end.is_finite() || t_end <= t0 {
        return Err(DynamicsError::BadInput(format!(
            "need finite t1 > t0, got [{t0}, {t_end}]"
        )));
    }
    // Fail fast if any coefficient curve does not cover the span.
    for t in [t0, 0.5 * (t0 + t_end), t_end] {
        sys.coefficients(t)?;
    }
    Ok(())
}

/// Integrates the system from `x0` over `[t0, t1]`, recording every accepted
/// step. Domain exits and step underflows abort with the partial trajectory.
pub fn integrate(
    sys: &LieHamiltonSystem,
    x0: &[f64],
    t0: f64,
    t1: f64,
    method: Method,
) -> Result<Trajectory, DynamicsError> {
    method.validate()?;
    check_system_inputs(sys, x0, t0, t1)?;
    let rhs = |t: f64, x: &[f64], out: &mut [f64]| sys.rhs(t, x, out).map_err(|e| e.to_string());
    let domain = |x: &[f64]| sys.realization.space.violation(x, 0.0);
    let problem = Problem {
        dim: sys.dim(),
        rhs: &rhs,
        domain: Some(&domain),
    };
    let run = stepper::run(&problem, x0, t0, &[t1], true, &method);
    finish_run(
        run,
        sys.realization.space.coordinate_names().to_vec(),
        TrajectoryMeta {
            system: sys.name.clone(),
            copies: sys.copies,
            method: method.label(),
        },
    )
}

/// Integrates and records exactly at `times` (strictly increasing; the first
/// entry is the initial time).
pub fn integrate_at(
    sys: &LieHamiltonSystem,
    x0: &[f64],
    times: &[f64],
    method: Method,
) -> Result<Trajectory, DynamicsError> {
    method.validate()?;
    if times.len() < 2 {
        return Err(DynamicsError::BadInput(
            "need at least two output times".into(),
        ));
    }
    if times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(DynamicsError::BadInput(
            "output times must be strictly increasing".into(),
        ));
    }
    let (t0, t_end) = (times[0], *times.last().unwrap());
    check_system_inputs(sys, x0, t0, t_end)?;
    let rhs = |t: f64, x: &[f64], out: &mut [f64]| sys.rhs(t, x, out).map_err(|e| e.to_string());
    let domain = |x: &[f64]| sys.realization.space.violation(x, 0.0);
    let problem = Problem {
        dim: sys.dim(),
        rhs: &rhs,
        domain: Some(&domain),
    };
    let run = stepper::run(&problem, x0, t0, &times[1..], false, &method);
    finish_run(
        run,
        sys.realization.space.coordinate_names().to_vec(),
        TrajectoryMeta {
            system: sys.name.clone(),
            copies: sys.copies,
            method: method.label(),
        },
    )
}

/// A function of the (possibly prolonged) state whose constancy along
/// trajectories is monitored.
#[derive(Clone)]
pub enum Invariant {
    /// A polynomial in the abstract generators, realized over `poly.m()`
    /// copies of the base realization's phase space.
    Realized {
        name: String,
        poly: SymPoly,
        base: Arc<Realization>,
    },
    /// Any smooth function of the full state.
    Custom {
        name: String,
        f: SmoothFunction,
        dim: usize,
    },
}

impl std::fmt::Debug for Invariant {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Invariant::Realized { name, poly, .. } => {
                write!(fm, "Realized({name}: {poly})")
            }
            Invariant::Custom { name, dim, .. } => write!(fm, "Custom({name}, dim {dim})"),
        }
    }
}

impl Invariant {
    pub fn realized(name: &str, poly: SymPoly, base: Arc<Realization>) -> Invariant {
        Invariant::Realized {
            name: name.to_string(),
            poly,
            base,
        }
    }

    pub fn custom(name: &str, dim: usize, f: SmoothFunction) -> Invariant {
        Invariant::Custom {
            name: name.to_string(),
            f,
            dim,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Invariant::Realized { name, .. } | Invariant::Custom { name, .. } => name,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Invariant::Realized { poly, base, .. } => poly.m() * base.dim(),
            Invariant::Custom { dim, .. } => *dim,
        }
    }

    fn check_dim(&self, got: usize) -> Result<(), DynamicsError> {
        if got != self.dim() {
            return Err(DynamicsError::Shape(format!(
                "invariant {:?} needs {} coordinates, state has {got}",
                self.name(),
                self.dim()
            )));
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, DynamicsError> {
        self.check_dim(x.len())?;
        match self {
            Invariant::Realized { poly, base, .. } => {
                let points: Vec<&[f64]> = x.chunks(base.dim()).collect();
                Ok(realize_eval(poly, base, &points)?)
            }
            Invariant::Custom { f, .. } => Ok(f.value(x)),
        }
    }

    pub fn gradient(&self, x: &[f64], out: &mut [f64]) -> Result<(), DynamicsError> {
        self.check_dim(x.len())?;
        match self {
            Invariant::Realized { poly, base, .. } => {
                let points: Vec<&[f64]> = x.chunks(base.dim()).collect();
                realized_gradient(poly, base, &points, out)?;
            }
            Invariant::Custom { f, .. } => f.gradient(x, out),
        }
        Ok(())
    }
}

/// Drift record for one invariant along one trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct InvariantDrift {
    pub name: String,
    /// Value at the first trajectory sample.
    pub initial: f64,
    /// Max over samples of `|F(x(t)) - F(x(t0))| / max(1, |F(x(t0))|)`.
    pub max_drift: f64,
    pub samples: usize,
}

/// Drift of several invariants along a trajectory.
#[derive(Debug, Clone)]
pub struct DriftReport {
    pub entries: Vec<InvariantDrift>,
}

#[derive(Serialize)]
struct DriftJsonEntry {
    initial: f64,
    max_drift: f64,
    samples: usize,
}

impl DriftReport {
    pub fn max_drift(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.max_drift))
    }

    pub fn entry(&self, name: &str) -> Option<&InvariantDrift> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// JSON object `{name: {initial, max_drift, samples}}`, keys sorted.
    pub fn to_json_string(&self) -> String {
        let map: BTreeMap<&str, DriftJsonEntry> = self
            .entries
            .iter()
            .map(|e| {
                (
                    e.name.as_str(),
                    DriftJsonEntry {
                        initial: e.initial,
                        max_drift: e.max_drift,
                        samples: e.samples,
                    },
                )
            })
            .collect();
        serde_json::to_string_pretty(&map).expect("drift report serialization")
    }
}

/// Evaluates each invariant at every trajectory sample and reports the
/// worst relative drift from its initial value.
pub fn monitor_invariants(
    traj: &Trajectory,
    invariants: &[Invariant],
) -> Result<DriftReport, DynamicsError> {
    if traj.is_empty() {
        return Err(DynamicsError::Shape("empty trajectory".into()));
    }
    let mut entries = Vec::with_capacity(invariants.len());
    for inv in invariants {
        let initial = inv.eval(&traj.states[0])?;
        let scale = initial.abs().max(1.0);
        let mut max_drift = 0.0f64;
        for state in &traj.states[1..] {
            let v = inv.eval(state)?;
            max_drift = max_drift.max((v - initial).abs() / scale);
        }
        entries.push(InvariantDrift {
            name: inv.name().to_string(),
            initial,
            max_drift,
            samples: traj.len(),
        });
    }
    Ok(DriftReport { entries })
}

/// Result of a numeric involution check.
#[derive(Debug, Clone, Serialize)]
pub struct InvolutionReport {
    pub samples: usize,
    pub tol: f64,
    /// Largest `|{F_P, F_Q}|` seen over the sampled prolonged points.
    pub max_abs_bracket: f64,
    pub pass: bool,
}

/// Checks numerically that two realized polynomials Poisson-commute on the
/// `m`-fold prolonged phase space, sampling points with the default margin.
pub fn involution_check<R: Rng>(
    p: &SymPoly,
    q: &SymPoly,
    base: &Realization,
    m: usize,
    samples: usize,
    tol: f64,
    rng: &mut R,
) -> Result<InvolutionReport, DynamicsError> {
    for (label, poly) in [("first", p), ("second", q)] {
        if poly.m() != m {
            return Err(DynamicsError::Shape(format!(
                "{label} polynomial lives on {} copies, check asked for {m}",
                poly.m()
            )));
        }
        if poly.r() != base.algebra_dim() {
            return Err(DynamicsError::Shape(format!(
                "{label} polynomial has {} generators, realization has {}",
                poly.r(),
                base.algebra_dim()
            )));
        }
    }
    let fp = realized_function(p, base);
    let fq = realized_function(q, base);
    let lambda_m = base.bivector.power(m);
    let space_m = base.space.power(m);
    let mut max_abs = 0.0f64;
    for _ in 0..samples {
        let x = space_m.sample(rng, DEFAULT_SAMPLE_MARGIN)?;
        max_abs = max_abs.max(bracket_num(&fp, &fq, &lambda_m, &x).abs());
    }
    Ok(InvolutionReport {
        samples,
        tol,
        max_abs_bracket: max_abs,
        pass: max_abs <= tol,
    })
}

/// Jacobian-based functional independence report.
#[derive(Debug, Clone, Serialize)]
pub struct IndependenceReport {
    /// Rows: invariants; columns: the selected coordinates.
    pub jacobian: Vec<Vec<f64>>,
    pub det: f64,
    /// |det| after scaling each nonzero row to unit length.
    pub row_normalized_abs_det: f64,
    pub singular_values: Vec<f64>,
    pub rank: usize,
    /// Rank threshold relative to the largest singular value.
    pub rank_threshold: f64,
}

/// Rank threshold factor for [`independence_check`].
pub const RANK_THRESHOLD: f64 = 1e-8;

/// Evaluates the Jacobian of the invariants with respect to the coordinates
/// listed in `wrt` (0-based indices into the prolonged state) at `pt`.
pub fn independence_check(
    invariants: &[Invariant],
    wrt: &[usize],
    pt: &[f64],
) -> Result<IndependenceReport, DynamicsError> {
    if invariants.len() != wrt.len() {
        return Err(DynamicsError::Shape(format!(
            "{} invariants vs {} coordinates: the Jacobian must be square",
            invariants.len(),
            wrt.len()
        )));
    }
    let k = invariants.len();
    if k == 0 {
        return Err(DynamicsError::Shape("no invariants given".into()));
    }
    for &j in wrt {
        if j >= pt.len() {
            return Err(DynamicsError::Shape(format!(
                "coordinate index {j} out of range for a {}-dimensional point",
                pt.len()
            )));
        }
    }
    // Realized invariants also get their domain checked per copy.
    for inv in invariants {
        if let Invariant::Realized { base, .. } = inv {
            inv.check_dim(pt.len())?;
            for chunk in pt.chunks(base.dim()) {
                base.space.check(chunk)?;
            }
        }
    }
    let mut grad = vec![0.0; pt.len()];
    let mut jacobian = Vec::with_capacity(k);
    for inv in invariants {
        inv.gradient(pt, &mut grad)?;
        jacobian.push(wrt.iter().map(|&j| grad[j]).collect::<Vec<f64>>());
    }
    let flat: Vec<f64> = jacobian.iter().flatten().copied().collect();
    let det = crate::numeric::det(&flat, k);
    let mut normalized = jacobian.clone();
    for row in &mut normalized {
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in row.iter_mut() {
                *v /= norm;
            }
        }
    }
    let flat_norm: Vec<f64> = normalized.iter().flatten().copied().collect();
    let row_normalized_abs_det = crate::numeric::det(&flat_norm, k).abs();
    let singular_values = crate::numeric::singular_values(&flat, k, k);
    let sigma_max = singular_values.first().copied().unwrap_or(0.0);
    let rank = if sigma_max > 0.0 {
        singular_values
            .iter()
            .filter(|&&s| s > RANK_THRESHOLD * sigma_max)
            .count()
    } else {
        0
    };
    Ok(IndependenceReport {
        jacobian,
        det,
        row_normalized_abs_det,
        singular_values,
        rank,
        rank_threshold: RANK_THRESHOLD,
    })
}

/// Solution of the linear flow `df/dt = M(b(t)) f` on the coefficient space.
#[derive(Debug, Clone)]
pub struct LieIntegralPath {
    pub times: Vec<f64>,
    /// One coefficient vector per time.
    pub values: Vec<Vec<f64>>,
}

impl LieIntegralPath {
    pub fn final_value(&self) -> &[f64] {
        self.values.last().expect("non-empty path")
    }

    /// Linear interpolation onto `t`; `t` must lie within the stored range
    /// (up to a tiny slack for roundoff at the ends).
    pub fn interpolate(&self, t: f64) -> Result<Vec<f64>, DynamicsError> {
        let (t0, t1) = (self.times[0], *self.times.last().unwrap());
        let slack = 1e-9 * t1.abs().max(1.0);
        if t < t0 - slack || t > t1 + slack {
            return Err(DynamicsError::Grid(format!(
                "t = {t} outside the path range [{t0}, {t1}]"
            )));
        }
        let t = t.clamp(t0, t1);
        let i = match self.times.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => return Ok(self.values[i].clone()),
            Err(i) => i.clamp(1, self.times.len() - 1),
        };
        let (ta, tb) = (self.times[i - 1], self.times[i]);
        let w = (t - ta) / (tb - ta);
        Ok(self.values[i - 1]
            .iter()
            .zip(&self.values[i])
            .map(|(a, b)| a + w * (b - a))
            .collect())
    }
}

fn lie_integral_run(
    sc: &StructureConstants,
    b: &[CoefficientCurve],
    f0: &[f64],
    t0: f64,
    targets: &[f64],
    record_steps: bool,
    method: Method,
) -> Result<LieIntegralPath, DynamicsError> {
    method.validate()?;
    let r = sc.dim();
    if b.len() != r || f0.len() != r {
        return Err(DynamicsError::BadInput(format!(
            "algebra dimension {r} needs {r} curves and {r} initial coefficients, got {} and {}",
            b.len(),
            f0.len()
        )));
    }
    let rhs = |t: f64, f: &[f64], out: &mut [f64]| -> Result<(), String> {
        let coeffs: Vec<f64> = b
            .iter()
            .map(|c| c.eval(t).map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        let (m, _) = sc.adjoint_matrix(&coeffs).map_err(|e| e.to_string())?;
        for (alpha, out_a) in out.iter_mut().enumerate() {
            *out_a = m[alpha].iter().zip(f).map(|(c, v)| c * v).sum();
        }
        Ok(())
    };
    let problem = Problem {
        dim: r,
        rhs: &rhs,
        domain: None,
    };
    let run = stepper::run(&problem, f0, t0, targets, record_steps, &method);
    match run.failure {
        None => Ok(LieIntegralPath {
            times: run.times,
            values: run.states,
        }),
        Some(StepFailure::DomainExit { t, message })
        | Some(StepFailure::StepUnderflow { t, detail: message, .. }) => Err(
            DynamicsError::BadInput(format!("linear flow failed at t = {t}: {message}")),
        ),
        Some(StepFailure::MaxSteps { t, max }) => Err(DynamicsError::BadInput(format!(
            "linear flow exceeded {max} steps at t = {t}"
        ))),
    }
}

/// Integrates the linear flow `df/dt = M(b(t)) f`, with `M` the adjoint flow
/// matrix of the structure constants at the coefficients `b(t)`, recording
/// every accepted step.
pub fn lie_integral_flow(
    sc: &StructureConstants,
    b: &[CoefficientCurve],
    f0: &[f64],
    t0: f64,
    t1: f64,
    method: Method,
) -> Result<LieIntegralPath, DynamicsError> {
    if !t0.is_finite() || !t1.is_finite() || t1 <= t0 {
        return Err(DynamicsError::BadInput(format!(
            "need finite t1 > t0, got [{t0}, {t1}]"
        )));
    }
    lie_integral_run(sc, b, f0, t0, &[t1], true, method)
}

/// Like [`lie_integral_flow`], but records exactly at `times` (the first
/// entry is the initial time). Use this to put the path on a trajectory's
/// own grid so [`verify_lie_integral`] needs no interpolation.
pub fn lie_integral_flow_at(
    sc: &StructureConstants,
    b: &[CoefficientCurve],
    f0: &[f64],
    times: &[f64],
    method: Method,
) -> Result<LieIntegralPath, DynamicsError> {
    if times.len() < 2 || times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(DynamicsError::BadInput(
            "need at least two strictly increasing output times".into(),
        ));
    }
    lie_integral_run(sc, b, f0, times[0], &times[1..], false, method)
}

/// Report of [`verify_lie_integral`].
#[derive(Debug, Clone, Serialize)]
pub struct LieIntegralReport {
    /// Value of `sum_alpha f_alpha(t0) h_alpha(x(t0))`.
    pub initial: f64,
    /// Max over trajectory samples of the scaled deviation from `initial`.
    pub max_deviation: f64,
    pub tol: f64,
    pub samples: usize,
    pub pass: bool,
}

/// Checks that `sum_alpha f_alpha(t) h_alpha(x(t))` stays constant along the
/// trajectory, interpolating the path linearly onto the trajectory times.
/// The deviation is scaled by `max(1, |initial|)`.
pub fn verify_lie_integral(
    sys: &LieHamiltonSystem,
    path: &LieIntegralPath,
    traj: &Trajectory,
    tol: f64,
) -> Result<LieIntegralReport, DynamicsError> {
    if traj.is_empty() {
        return Err(DynamicsError::Shape("empty trajectory".into()));
    }
    if traj.dim() != sys.dim() {
        return Err(DynamicsError::Shape(format!(
            "trajectory dimension {} vs system dimension {}",
            traj.dim(),
            sys.dim()
        )));
    }
    let value_at = |idx: usize| -> Result<f64, DynamicsError> {
        let f = path.interpolate(traj.times[idx])?;
        let h = sys.realization.ham_values(&traj.states[idx]);
        Ok(f.iter().zip(&h).map(|(fa, ha)| fa * ha).sum())
    };
    let initial = value_at(0)?;
    let scale = initial.abs().max(1.0);
    let mut max_dev = 0.0f64;
    for idx in 1..traj.len() {
        max_dev = max_dev.max((value_at(idx)? - initial).abs() / scale);
    }
    Ok(LieIntegralReport {
        initial,
        max_deviation: max_dev,
        tol,
        samples: traj.len(),
        pass: max_dev <= tol,
    })
}
