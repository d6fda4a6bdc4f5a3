//! Shared stepping loop for the fixed-step and adaptive integrators.
//!
//! Both methods run through [`run`]: attempts that produce non-finite values,
//! right-hand-side failures, or domain violations at the step endpoint are
//! rejected and retried with a halved step. Repeated halving walks the time
//! up to a domain boundary; once the step falls below the exit resolution the
//! run stops with a failure that pins the boundary time to about 1e-12.
//! Error-based rejection (adaptive method only) uses a PI controller.

use super::Method;

pub(crate) type RhsFn<'a> = dyn Fn(f64, &[f64], &mut [f64]) -> Result<(), String> + 'a;
pub(crate) type DomainFn<'a> = dyn Fn(&[f64]) -> Option<String> + 'a;

/// Relative resolution to which a domain boundary is located in time.
pub(crate) const EXIT_RESOLUTION: f64 = 1e-12;
/// Hard cap on attempted steps per run.
pub(crate) const MAX_STEPS: usize = 4_000_000;

pub(crate) struct Problem<'a> {
    pub dim: usize,
    pub rhs: &'a RhsFn<'a>,
    pub domain: Option<&'a DomainFn<'a>>,
}

#[derive(Debug)]
pub(crate) enum StepFailure {
    DomainExit { t: f64, message: String },
    StepUnderflow { t: f64, h: f64, detail: String },
    MaxSteps { t: f64, max: usize },
}

pub(crate) struct RawRun {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub failure: Option<StepFailure>,
}

enum Attempt {
    Ok { x_new: Vec<f64>, err_norm: f64 },
    /// Rejected before error control: non-finite values, a right-hand-side
    /// failure, or (with `domain: true`) a domain violation at the endpoint.
    Bad { message: String, domain: bool },
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn h_min(t: f64) -> f64 {
    EXIT_RESOLUTION * t.abs().max(1.0)
}

// Fehlberg 4(5) tableau.
const C: [f64; 6] = [0.0, 0.25, 0.375, 12.0 / 13.0, 1.0, 0.5];
const A: [[f64; 5]; 6] = [
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [0.25, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0],
    [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0.0, 0.0],
    [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0],
    [-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0],
];
const B5: [f64; 6] = [
    16.0 / 135.0,
    0.0,
    6656.0 / 12825.0,
    28561.0 / 56430.0,
    -9.0 / 50.0,
    2.0 / 55.0,
];
const B4: [f64; 6] = [25.0 / 216.0, 0.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -0.2, 0.0];

fn rkf45_attempt(
    p: &Problem,
    t: f64,
    x: &[f64],
    h: f64,
    t_cap: f64,
    atol: f64,
    rtol: f64,
) -> Attempt {
    let n = p.dim;
    let mut k = vec![vec![0.0; n]; 6];
    let mut y = vec![0.0; n];
    for i in 0..6 {
        y.copy_from_slice(x);
        for (l, kl) in k.iter().enumerate().take(i) {
            let a = A[i][l];
            if a != 0.0 {
                for m in 0..n {
                    y[m] += h * a * kl[m];
                }
            }
        }
        if !all_finite(&y) {
            return Attempt::Bad {
                message: "non-finite stage state".into(),
                domain: false,
            };
        }
        // Clamp stage times so roundoff never queries coefficients past t_cap.
        let ts = (t + C[i] * h).min(t_cap);
        if let Err(message) = (p.rhs)(ts, &y, &mut k[i]) {
            return Attempt::Bad {
                message,
                domain: false,
            };
        }
        if !all_finite(&k[i]) {
            return Attempt::Bad {
                message: "non-finite derivative".into(),
                domain: false,
            };
        }
    }
    let mut x_new = vec![0.0; n];
    let mut err_sq = 0.0;
    for m in 0..n {
        let mut s5 = 0.0;
        let mut s4 = 0.0;
        for i in 0..6 {
            s5 += B5[i] * k[i][m];
            s4 += B4[i] * k[i][m];
        }
        x_new[m] = x[m] + h * s5;
        let e = h * (s5 - s4);
        let sc = atol + rtol * x[m].abs().max(x_new[m].abs());
        err_sq += (e / sc) * (e / sc);
    }
    if !all_finite(&x_new) {
        return Attempt::Bad {
            message: "non-finite step endpoint".into(),
            domain: false,
        };
    }
    if let Some(domain) = p.domain {
        if let Some(message) = domain(&x_new) {
            return Attempt::Bad {
                message,
                domain: true,
            };
        }
    }
    Attempt::Ok {
        x_new,
        err_norm: (err_sq / n as f64).sqrt(),
    }
}

fn rk4_attempt(p: &Problem, t: f64, x: &[f64], h: f64, t_cap: f64) -> Attempt {
    let n = p.dim;
    let stage_c = [0.0, 0.5, 0.5, 1.0];
    let mut k = vec![vec![0.0; n]; 4];
    let mut y = vec![0.0; n];
    for i in 0..4 {
        y.copy_from_slice(x);
        if i > 0 {
            for m in 0..n {
                y[m] += h * stage_c[i] * k[i - 1][m];
            }
        }
        if !all_finite(&y) {
            return Attempt::Bad {
                message: "non-finite stage state".into(),
                domain: false,
            };
        }
        let ts = (t + stage_c[i] * h).min(t_cap);
        if let Err(message) = (p.rhs)(ts, &y, &mut k[i]) {
            return Attempt::Bad {
                message,
                domain: false,
            };
        }
        if !all_finite(&k[i]) {
            return Attempt::Bad {
                message: "non-finite derivative".into(),
                domain: false,
            };
        }
    }
    let mut x_new = vec![0.0; n];
    for m in 0..n {
        x_new[m] = x[m] + h / 6.0 * (k[0][m] + 2.0 * k[1][m] + 2.0 * k[2][m] + k[3][m]);
    }
    if !all_finite(&x_new) {
        return Attempt::Bad {
            message: "non-finite step endpoint".into(),
            domain: false,
        };
    }
    if let Some(domain) = p.domain {
        if let Some(message) = domain(&x_new) {
            return Attempt::Bad {
                message,
                domain: true,
            };
        }
    }
    Attempt::Ok {
        x_new,
        err_norm: 0.0,
    }
}

/// Hairer-style cheap initial step guess for the adaptive method.
fn initial_step(p: &Problem, t0: f64, x0: &[f64], t_end: f64, atol: f64, rtol: f64) -> f64 {
    let span = t_end - t0;
    let n = p.dim;
    let mut f0 = vec![0.0; n];
    if (p.rhs)(t0, x0, &mut f0).is_err() || !all_finite(&f0) {
        return span * 1e-6;
    }
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for m in 0..n {
        let sc = atol + rtol * x0[m].abs();
        d0 += (x0[m] / sc) * (x0[m] / sc);
        d1 += (f0[m] / sc) * (f0[m] / sc);
    }
    d0 = (d0 / n as f64).sqrt();
    d1 = (d1 / n as f64).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0.min(span).max(span * 1e-12)
}

/// Integrates from `(t0, x0)` through the strictly increasing `targets`
/// (all greater than `t0`). With `record_steps` every accepted step lands in
/// the output; otherwise only `t0` and the targets do. On failure the run
/// returned so far is kept and `failure` says why and where it stopped.
pub(crate) fn run(
    p: &Problem,
    x0: &[f64],
    t0: f64,
    targets: &[f64],
    record_steps: bool,
    method: &Method,
) -> RawRun {
    let t_end = *targets.last().expect("at least one target");
    let mut times = vec![t0];
    let mut states = vec![x0.to_vec()];
    let mut t = t0;
    let mut x = x0.to_vec();
    let mut steps = 0usize;

    let (adaptive, atol, rtol, h_nominal) = match *method {
        Method::Rk4 { h } => (false, 0.0, 0.0, h),
        Method::Rkf45 { atol, rtol } => {
            (true, atol, rtol, initial_step(p, t0, x0, t_end, atol, rtol))
        }
    };
    let mut h_ctrl = h_nominal;
    let mut err_prev: f64 = 1e-4;
    let mut just_rejected = false;
    let mut failure = None;

    'targets: for &target in targets {
        while t < target {
            if steps >= MAX_STEPS {
                failure = Some(StepFailure::MaxSteps { t, max: MAX_STEPS });
                break 'targets;
            }
            steps += 1;
            let clamped = target - t <= h_ctrl;
            let h_try = if clamped { target - t } else { h_ctrl };
            let attempt = if adaptive {
                rkf45_attempt(p, t, &x, h_try, t_end, atol, rtol)
            } else {
                rk4_attempt(p, t, &x, h_try, t_end)
            };
            match attempt {
                Attempt::Ok { x_new, err_norm } if !adaptive || err_norm <= 1.0 => {
                    t = if clamped { target } else { t + h_try };
                    x = x_new;
                    if record_steps {
                        times.push(t);
                        states.push(x.clone());
                    }
                    if adaptive {
                        let err = err_norm.max(1e-10);
                        let mut factor = 0.9 * err.powf(-0.14) * err_prev.powf(0.08);
                        if just_rejected {
                            factor = factor.min(1.0);
                        }
                        factor = factor.clamp(0.2, 5.0);
                        err_prev = err_norm.max(1e-4);
                        just_rejected = false;
                        if !(clamped && factor >= 1.0) {
                            h_ctrl = h_try * factor;
                        }
                    } else {
                        // Recover geometrically after domain-driven halving.
                        h_ctrl = (h_ctrl * 2.0).min(h_nominal);
                    }
                }
                Attempt::Ok { err_norm, .. } => {
                    let factor = (0.9 * err_norm.powf(-0.2)).clamp(0.1, 0.9);
                    h_ctrl = h_try * factor;
                    just_rejected = true;
                    if h_ctrl < h_min(t) {
                        failure = Some(StepFailure::StepUnderflow {
                            t,
                            h: h_ctrl,
                            detail: "local error control cannot satisfy the tolerances".into(),
                        });
                        break 'targets;
                    }
                }
                Attempt::Bad { message, domain } => {
                    h_ctrl = h_try * 0.5;
                    just_rejected = true;
                    if h_ctrl < h_min(t) {
                        failure = Some(if domain {
                            StepFailure::DomainExit { t, message }
                        } else {
                            StepFailure::StepUnderflow {
                                t,
                                h: h_ctrl,
                                detail: message,
                            }
                        });
                        break 'targets;
                    }
                }
            }
        }
        if !record_steps {
            times.push(target);
            states.push(x.clone());
        }
    }
    RawRun {
        times,
        states,
        failure,
    }
}
