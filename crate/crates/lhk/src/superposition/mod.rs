//! Nonlinear superposition rules and their verification.
//!
//! Each rule reconstructs one solution of a system from particular solutions
//! and constants. The constants are values of realized two-copy invariants
//! on (target, particular) pairs, shifted by the rule's affine offset. Rules
//! with square roots take a [`BranchChoice`]; the verifier resolves branches
//! by temporal continuity against a one-step prediction.
//!
//! Two independent routes to the invariants are kept side by side: the
//! closed-form pair formulas here, and the coalgebra route (Casimir,
//! coproduct, realized evaluation) used by [`extract`]-family functions.
//! Unit tests pin them against each other.

mod verify;

pub use verify::{
    verify_rule, verify_rule_with_ics, BranchSwitch, RuleId, VerifyReport,
    VERIFY_FINE_TOLERANCE, VERIFY_UNIFORM_POINTS,
};

use thiserror::Error;

use crate::dynamics::{DynamicsError, Trajectory};
use crate::realization::{catalog as reals, realize_eval, Realization, RealizationError};
use crate::sympoly::{PolyError, SymPoly};
use crate::systems::SystemError;

/// Relative clamp for radicands: values in `[-RADICAND_CLAMP * scale, 0)`
/// are treated as roundoff and clamped to zero.
pub const RADICAND_CLAMP: f64 = 1e-10;

/// Relative spread allowed between constant extractions at different times.
pub const CONSTANT_SPREAD_TOL: f64 = 1e-6;

/// Residual bound the trigonometric rule's Newton solve must reach.
pub const TRIG_RESIDUAL_TOL: f64 = 1e-10;

/// Errors from superposition rules, extraction, and verification.
#[derive(Debug, Error)]
pub enum SuperpositionError {
    #[error("degenerate inputs: {0}")]
    Degenerate(String),
    #[error("negative radicand {name} = {value:.6e}")]
    NegativeRadicand { name: &'static str, value: f64 },
    #[error("singular constants: {0}")]
    SingularConstants(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("constant {name} drifts across sample times: spread {spread:.3e} exceeds {tol:.3e}")]
    DriftTooLarge {
        name: String,
        spread: f64,
        tol: f64,
    },
    #[error("reconstruction failed at t = {t}: {message}")]
    Reconstruction { t: f64, message: String },
    #[error("bad input: {0}")]
    BadInput(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Realization(#[from] RealizationError),
}

/// Signs for the `+/-` choices in a closed-form rule, in the order they
/// appear in the formula (at most three).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BranchChoice {
    signs: [i8; 3],
    len: usize,
}

impl BranchChoice {
    pub fn new(signs: &[i8]) -> Result<BranchChoice, SuperpositionError> {
        if signs.is_empty() || signs.len() > 3 {
            return Err(SuperpositionError::BadInput(format!(
                "a branch choice has 1 to 3 signs, got {}",
                signs.len()
            )));
        }
        let mut stored = [1i8; 3];
        for (i, &s) in signs.iter().enumerate() {
            if s != 1 && s != -1 {
                return Err(SuperpositionError::BadInput(format!(
                    "branch signs must be +1 or -1, got {s}"
                )));
            }
            stored[i] = s;
        }
        Ok(BranchChoice {
            signs: stored,
            len: signs.len(),
        })
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs[..self.len]
    }

    /// The i-th sign as a float factor.
    pub fn sign(&self, i: usize) -> f64 {
        f64::from(self.signs[i])
    }

    /// Compact label like `+-` for reports.
    pub fn label(&self) -> String {
        self.signs()
            .iter()
            .map(|&s| if s > 0 { '+' } else { '-' })
            .collect()
    }

    /// All sign tuples of the given length (1 to 3), plus-first.
    pub fn all(len: usize) -> Vec<BranchChoice> {
        assert!((1..=3).contains(&len));
        let mut out = Vec::with_capacity(1 << len);
        for bits in 0..(1u32 << len) {
            let signs: Vec<i8> = (0..len)
                .map(|i| if bits & (1 << i) == 0 { 1 } else { -1 })
                .collect();
            out.push(BranchChoice::new(&signs).expect("valid signs"));
        }
        out
    }
}

/// Clamps a radicand that should be nonnegative up to roundoff. `magnitude`
/// is the cancellation scale (sum of absolute term sizes); raw values below
/// `-RADICAND_CLAMP * magnitude` are genuine sign violations.
fn clamp_radicand(
    value: f64,
    magnitude: f64,
    name: &'static str,
) -> Result<f64, SuperpositionError> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -RADICAND_CLAMP * magnitude.max(1e-300) {
        Ok(0.0)
    } else {
        Err(SuperpositionError::NegativeRadicand { name, value })
    }
}

// ---------------------------------------------------------------------------
// Pair invariants (closed forms) and their coalgebra counterparts.
// ---------------------------------------------------------------------------

/// Two-copy invariant for the cubic-velocity (Kummer-Schwarz) system:
/// `(b0 (xa^2 + xb^2) + (pa xa^2 - pb xb^2)^2) / (xa xb) + 2 b0`.
pub fn ks_pair_invariant(xa: f64, pa: f64, xb: f64, pb: f64, b0: f64) -> f64 {
    let w = pa * xa * xa - pb * xb * xb;
    (b0 * (xa * xa + xb * xb) + w * w) / (xa * xb) + 2.0 * b0
}

/// Two-copy invariant for the Milne-Pinney / one-dimensional barrier
/// oscillator: `(xa pb - xb pa)^2 / 4 + b (xa^2 + xb^2)^2 / (4 xa^2 xb^2)`.
pub fn mp_pair_invariant(xa: f64, pa: f64, xb: f64, pb: f64, b: f64) -> f64 {
    let w = xa * pb - xb * pa;
    // Grouped so coincident copies give exactly b: q = 2 exactly, and the
    // remaining factors are powers of two.
    let q = (xa * xa + xb * xb) / (xa * xb);
    0.25 * w * w + 0.25 * b * q * q
}

/// Two-copy invariant for the trigonometric system:
/// `2 (sqrt(1-xa^2) sqrt(1-xb^2) cos(pa-pb) + xa xb + 1)`.
pub fn trig_pair_invariant(xa: f64, pa: f64, xb: f64, pb: f64) -> f64 {
    2.0 * ((1.0 - xa * xa).sqrt() * (1.0 - xb * xb).sqrt() * (pa - pb).cos() + xa * xb + 1.0)
}

/// Cross-ratio constant of four solutions of a scalar quadratic-drift
/// equation: `(x - x1)(x3 - x2) / ((x1 - x2)(x3 - x))`.
pub fn riccati_cross_ratio(x: f64, x1: f64, x2: f64, x3: f64) -> Result<f64, SuperpositionError> {
    let den = (x1 - x2) * (x3 - x);
    if den == 0.0 || !den.is_finite() {
        return Err(SuperpositionError::Degenerate(format!(
            "cross-ratio denominator (x1 - x2)(x3 - x) vanishes at x = {x}, x1 = {x1}, x2 = {x2}, x3 = {x3}"
        )));
    }
    Ok((x - x1) * (x3 - x2) / den)
}

// ---------------------------------------------------------------------------
// Rules.
// ---------------------------------------------------------------------------

/// Superposition of three particular solutions of a scalar quadratic-drift
/// equation: `x = [x1(x3 - x2) + k x3(x1 - x2)] / [(x3 - x2) + k(x1 - x2)]`.
pub fn riccati_rule(x1: f64, x2: f64, x3: f64, k: f64) -> Result<f64, SuperpositionError> {
    if x1 == x2 || x2 == x3 || x1 == x3 {
        return Err(SuperpositionError::Degenerate(format!(
            "particular solutions must be pairwise distinct, got ({x1}, {x2}, {x3})"
        )));
    }
    let den = (x3 - x2) + k * (x1 - x2);
    if den == 0.0 || !den.is_finite() {
        return Err(SuperpositionError::Degenerate(format!(
            "zero denominator (x3 - x2) + k (x1 - x2) at k = {k}"
        )));
    }
    Ok((x1 * (x3 - x2) + k * x3 * (x1 - x2)) / den)
}

/// Discriminant under the outer square root of the Kummer-Schwarz rule,
/// together with its cancellation magnitude.
pub fn ks_discriminant(
    x2: f64,
    p2: f64,
    x3: f64,
    p3: f64,
    k1: f64,
    k2: f64,
    b0: f64,
) -> (f64, f64) {
    let a = p2 * x2 * x2 - p3 * x3 * x3;
    let bm = k1 * x2 - k2 * x3;
    let t1 = a * a * (k1 * k2 * x2 * x3 - 2.0 * b0 * b0 * (x2 * x2 + x3 * x3) - b0 * a * a);
    let t2 = b0 * x2 * x3 * bm * (k2 * x2 - k1 * x3);
    let d = x2 * x2 - x3 * x3;
    let t3 = -b0 * b0 * b0 * d * d;
    let magnitude = a * a
        * ((k1 * k2 * x2 * x3).abs()
            + 2.0 * b0 * b0 * (x2 * x2 + x3 * x3)
            + (b0 * a * a).abs())
        + t2.abs()
        + t3.abs();
    (t1 + t2 + t3, magnitude)
}

/// Reconstructs `(x1, p1)` for the cubic-velocity system from two particular
/// solutions and the constants `k1` (pairing the target with the first) and
/// `k2` (with the second). The branch holds the signs of the square roots in
/// `x1` and `p1`, in that order.
#[allow(clippy::too_many_arguments)]
pub fn kummer_schwarz_rule(
    x2: f64,
    p2: f64,
    x3: f64,
    p3: f64,
    k1: f64,
    k2: f64,
    b0: f64,
    branch: BranchChoice,
) -> Result<(f64, f64), SuperpositionError> {
    if branch.signs().len() < 2 {
        return Err(SuperpositionError::BadInput(
            "this rule needs two branch signs".into(),
        ));
    }
    let (sx, sp) = (branch.sign(0), branch.sign(1));
    let a = p2 * x2 * x2 - p3 * x3 * x3;
    let bp = k1 * x2 + k2 * x3;
    let bm = k1 * x2 - k2 * x3;

    let x1 = if b0 == 0.0 {
        // Printed specialization: x1 = A^2 (B+ +/- 2 sqrt(k1 k2 x2 x3)) / B-^2.
        if bm == 0.0 {
            return Err(SuperpositionError::Degenerate(
                "B- = k1 x2 - k2 x3 vanishes with b0 = 0".into(),
            ));
        }
        let rad = clamp_radicand(k1 * k2 * x2 * x3, (k1 * k2 * x2 * x3).abs(), "k1 k2 x2 x3")?;
        a * a * (bp + sx * 2.0 * rad.sqrt()) / (bm * bm)
    } else {
        let den = bm * bm + 4.0 * b0 * a * a;
        if den == 0.0 {
            return Err(SuperpositionError::Degenerate(
                "denominator B-^2 + 4 b0 A^2 vanishes".into(),
            ));
        }
        let (upsilon, magnitude) = ks_discriminant(x2, p2, x3, p3, k1, k2, b0);
        let upsilon = clamp_radicand(upsilon, magnitude, "Upsilon")?;
        (a * a * bp + b0 * bm * (x2 * x2 - x3 * x3) + sx * 2.0 * a * upsilon.sqrt()) / den
    };
    if x1 == 0.0 || !x1.is_finite() {
        return Err(SuperpositionError::Degenerate(format!(
            "reconstructed x1 = {x1} is outside the domain"
        )));
    }
    let rad = k1 * x1 * x2 - b0 * (x1 * x1 + x2 * x2);
    let magnitude = (k1 * x1 * x2).abs() + (b0 * (x1 * x1 + x2 * x2)).abs();
    let rad = clamp_radicand(rad, magnitude, "k1 x1 x2 - b0 (x1^2 + x2^2)")?;
    let p1 = (p2 * x2 * x2 + sp * rad.sqrt()) / (x1 * x1);
    Ok((x1, p1))
}

/// Inner discriminant of the Milne-Pinney rule, `mu [k3 x2^2 x3^2 -
/// b (x2^4 + x3^4)]`, with its cancellation magnitude.
pub fn mp_discriminant(x2: f64, x3: f64, k1: f64, k2: f64, k3: f64, b: f64) -> (f64, f64) {
    let den = 4.0 * b * b - k3 * k3;
    let mu = 4.0 * (4.0 * b * b * b + k1 * k2 * k3 - b * (k1 * k1 + k2 * k2 + k3 * k3))
        / (den * den);
    let inner = k3 * x2 * x2 * x3 * x3 - b * (x2 * x2 * x2 * x2 + x3 * x3 * x3 * x3);
    let inner_mag =
        (k3 * x2 * x2 * x3 * x3).abs() + (b * (x2 * x2 * x2 * x2 + x3 * x3 * x3 * x3)).abs();
    (mu * inner, mu.abs() * inner_mag)
}

/// Reconstructs `(x1, p1)` for the one-dimensional barrier oscillator from
/// two particular solutions and the constants `k1, k2, k3` (pairing
/// target-first, target-second, first-second respectively). The branch signs
/// are, in order: the inner square root in `x1^2`, the square root in `p1`,
/// and the overall sign of `x1`.
#[allow(clippy::too_many_arguments)]
pub fn milne_pinney_rule(
    x2: f64,
    p2: f64,
    x3: f64,
    p3: f64,
    k1: f64,
    k2: f64,
    k3: f64,
    b: f64,
    branch: BranchChoice,
) -> Result<(f64, f64), SuperpositionError> {
    if branch.signs().len() < 3 {
        return Err(SuperpositionError::BadInput(
            "this rule needs three branch signs".into(),
        ));
    }
    // p3 enters only through the constants; the parameter keeps the
    // signature symmetric in the two particular solutions.
    let _ = p3;
    let (si, sp, so) = (branch.sign(0), branch.sign(1), branch.sign(2));
    let den = 4.0 * b * b - k3 * k3;
    if den == 0.0 || den.abs() < 1e-12 * (4.0 * b * b + k3 * k3) {
        return Err(SuperpositionError::SingularConstants(format!(
            "4 b^2 - k3^2 = {den:.3e} vanishes (b = {b}, k3 = {k3})"
        )));
    }
    let mu1 = (2.0 * b * k1 - k2 * k3) / den;
    let mu2 = (2.0 * b * k2 - k1 * k3) / den;
    let (disc, disc_mag) = mp_discriminant(x2, x3, k1, k2, k3, b);
    let disc = clamp_radicand(disc, disc_mag, "mu [k3 x2^2 x3^2 - b (x2^4 + x3^4)]")?;
    let x1sq = mu1 * x2 * x2 + mu2 * x3 * x3 + si * disc.sqrt();
    let x1sq_mag = (mu1 * x2 * x2).abs() + (mu2 * x3 * x3).abs() + disc.sqrt();
    let x1sq = clamp_radicand(x1sq, x1sq_mag, "x1^2")?;
    let x1 = so * x1sq.sqrt();
    if x1 == 0.0 {
        return Err(SuperpositionError::Degenerate(
            "reconstructed x1 = 0 is outside the domain".into(),
        ));
    }
    // p1 = [p2 x1^2 x2 +/- sqrt(k1 x1^2 x2^2 - b (x1^4 + x2^4))] / (x1 x2^2).
    let rad = k1 * x1sq * x2 * x2 - b * (x1sq * x1sq + x2 * x2 * x2 * x2);
    let magnitude = (k1 * x1sq * x2 * x2).abs() + (b * (x1sq * x1sq + x2 * x2 * x2 * x2)).abs();
    let rad = clamp_radicand(rad, magnitude, "k1 x1^2 x2^2 - b (x1^4 + x2^4)")?;
    let p1 = (p2 * x1sq * x2 + sp * rad.sqrt()) / (x1 * x2 * x2);
    Ok((x1, p1))
}

/// One converged root of the trigonometric rule's two invariant equations.
#[derive(Debug, Clone, Copy)]
pub struct TrigRoot {
    pub x1: f64,
    pub p1: f64,
    /// Max absolute residual of the two invariant equations at the root.
    pub residual: f64,
}

fn trig_residual(x1: f64, p1: f64, x2: f64, p2: f64, x3: f64, p3: f64, k1: f64, k2: f64) -> [f64; 2] {
    [
        trig_pair_invariant(x1, p1, x2, p2) - k1,
        trig_pair_invariant(x1, p1, x3, p3) - k2,
    ]
}

/// Damped Newton iteration on the two invariant equations from one seed.
pub(crate) fn trig_newton(
    seed: (f64, f64),
    x2: f64,
    p2: f64,
    x3: f64,
    p3: f64,
    k1: f64,
    k2: f64,
) -> Option<TrigRoot> {
    const X_CLAMP: f64 = 1.0 - 1e-9;
    let (mut x1, mut p1) = seed;
    x1 = x1.clamp(-X_CLAMP, X_CLAMP);
    let mut g = trig_residual(x1, p1, x2, p2, x3, p3, k1, k2);
    let mut norm = g[0].abs().max(g[1].abs());
    for _ in 0..60 {
        if norm < TRIG_RESIDUAL_TOL * 1e-2 {
            break;
        }
        let s1 = (1.0 - x1 * x1).sqrt();
        // Rows: d(pair invariant)/d(x1, p1) against copies 2 and 3.
        let mut jac = [[0.0f64; 2]; 2];
        for (row, &(xb, pb)) in [(x2, p2), (x3, p3)].iter().enumerate() {
            let sb = (1.0 - xb * xb).sqrt();
            jac[row][0] = 2.0 * (-x1 / s1.max(1e-12) * sb * (p1 - pb).cos() + xb);
            jac[row][1] = -2.0 * s1 * sb * (p1 - pb).sin();
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det.abs() < 1e-14 {
            return None;
        }
        let mut dx = (-g[0] * jac[1][1] + g[1] * jac[0][1]) / det;
        let mut dp = (-g[1] * jac[0][0] + g[0] * jac[1][0]) / det;
        // Trust region: near-singular Jacobians otherwise throw the iterate
        // thousands of periods away in p.
        let scale = (dx.abs() / 0.5).max(dp.abs() / std::f64::consts::PI);
        if scale > 1.0 {
            dx /= scale;
            dp /= scale;
        }
        // Backtracking line search on the residual norm.
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..8 {
            let xt = (x1 + lambda * dx).clamp(-X_CLAMP, X_CLAMP);
            let pt = p1 + lambda * dp;
            let gt = trig_residual(xt, pt, x2, p2, x3, p3, k1, k2);
            let nt = gt[0].abs().max(gt[1].abs());
            if nt < norm {
                x1 = xt;
                p1 = pt;
                g = gt;
                norm = nt;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    if norm < TRIG_RESIDUAL_TOL {
        Some(TrigRoot {
            x1,
            p1,
            residual: norm,
        })
    } else {
        None
    }
}

/// All distinct roots found from a coarse grid of Newton starts, sorted by
/// residual. Roots equal up to `2 pi` in `p1` are deduplicated.
pub fn trig_su2_roots(
    x2: f64,
    p2: f64,
    x3: f64,
    p3: f64,
    k1: f64,
    k2: f64,
) -> Vec<TrigRoot> {
    const NX: usize = 7;
    const NP: usize = 9;
    let mut roots: Vec<TrigRoot> = Vec::new();
    for i in 0..NX {
        let x0 = -0.9 + 1.8 * i as f64 / (NX - 1) as f64;
        for j in 0..NP {
            let p0 = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * j as f64 / NP as f64;
            if let Some(mut root) = trig_newton((x0, p0), x2, p2, x3, p3, k1, k2) {
                let two_pi = 2.0 * std::f64::consts::PI;
                // Roots are classes modulo 2 pi in p1; store the canonical
                // representative in (-pi, pi].
                root.p1 -= two_pi * (root.p1 / two_pi).round();
                let dup = roots.iter().any(|r| {
                    let dp = (root.p1 - r.p1) / two_pi;
                    (root.x1 - r.x1).abs() < 1e-6 && (dp - dp.round()).abs() * two_pi < 1e-6
                });
                if !dup {
                    roots.push(root);
                }
            }
        }
    }
    roots.sort_by(|a, b| a.residual.total_cmp(&b.residual));
    roots
}

/// Reconstructs `(x1, p1)` for the trigonometric system by solving the two
/// invariant equations numerically. With a seed, Newton starts there (the
/// seed acts as the branch selector); otherwise a coarse grid of starts is
/// tried and the best-residual root is returned.
pub fn trig_su2_rule(
    x2: f64,
    p2: f64,
    x3: f64,
    p3: f64,
    k1: f64,
    k2: f64,
    seed: Option<(f64, f64)>,
) -> Result<(f64, f64), SuperpositionError> {
    for &(xb, label) in &[(x2, "x2"), (x3, "x3")] {
        if xb.abs() >= 1.0 {
            return Err(SuperpositionError::BadInput(format!(
                "|{label}| must be below 1, got {xb}"
            )));
        }
    }
    if let Some(s) = seed {
        if let Some(root) = trig_newton(s, x2, p2, x3, p3, k1, k2) {
            return Ok((root.x1, root.p1));
        }
    }
    let roots = trig_su2_roots(x2, p2, x3, p3, k1, k2);
    match seed {
        // Pick the converged root closest to the requested branch.
        Some((sx, sp)) => roots
            .iter()
            .min_by(|a, b| {
                let da = (a.x1 - sx).powi(2) + (a.p1 - sp).powi(2);
                let db = (b.x1 - sx).powi(2) + (b.p1 - sp).powi(2);
                da.total_cmp(&db)
            })
            .map(|r| (r.x1, r.p1))
            .ok_or_else(|| {
                SuperpositionError::NoConvergence(
                    "no Newton start converged to the required residual".into(),
                )
            }),
        None => roots.first().map(|r| (r.x1, r.p1)).ok_or_else(|| {
            SuperpositionError::NoConvergence(
                "no Newton start converged to the required residual".into(),
            )
        }),
    }
}

// ---------------------------------------------------------------------------
// Constant extraction (coalgebra route).
// ---------------------------------------------------------------------------

/// Extracted constants for one rule, in rule order.
#[derive(Debug, Clone, PartialEq)]
pub enum Constants {
    Riccati { k: f64 },
    KummerSchwarz { k1: f64, k2: f64 },
    MilnePinney { k1: f64, k2: f64, k3: f64 },
    TrigSu2 { k1: f64, k2: f64 },
}

impl Constants {
    /// Named values, rule order.
    pub fn named(&self) -> Vec<(&'static str, f64)> {
        match *self {
            Constants::Riccati { k } => vec![("k", k)],
            Constants::KummerSchwarz { k1, k2 } => vec![("k1", k1), ("k2", k2)],
            Constants::MilnePinney { k1, k2, k3 } => {
                vec![("k1", k1), ("k2", k2), ("k3", k3)]
            }
            Constants::TrigSu2 { k1, k2 } => vec![("k1", k1), ("k2", k2)],
        }
    }
}

/// Indices of the three sample rows used for extraction: first, middle, last.
fn sample_rows(traj: &Trajectory) -> Result<[usize; 3], SuperpositionError> {
    if traj.len() < 2 {
        return Err(SuperpositionError::BadInput(
            "need at least two trajectory samples".into(),
        ));
    }
    Ok([0, traj.len() / 2, traj.len() - 1])
}

/// Extracts one constant from pair values at the three sample rows, checking
/// that the spread stays below [`CONSTANT_SPREAD_TOL`] relative.
fn constant_from_samples(
    name: &str,
    values: [f64; 3],
) -> Result<f64, SuperpositionError> {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let spread = hi - lo;
    let tol = CONSTANT_SPREAD_TOL * values[0].abs().max(1.0);
    if !spread.is_finite() || spread > tol {
        return Err(SuperpositionError::DriftTooLarge {
            name: name.to_string(),
            spread,
            tol,
        });
    }
    Ok(values[0])
}

/// Evaluates the realized two-copy invariant (coproduct of the Casimir) on
/// the given copy pair at the three sample rows and inverts the affine
/// relation `F = scale * k + offset`.
fn extract_pair_constant(
    traj: &Trajectory,
    base: &Realization,
    f2: &SymPoly,
    pair: (usize, usize),
    scale: f64,
    offset: f64,
    name: &str,
) -> Result<f64, SuperpositionError> {
    let n = base.dim();
    let rows = sample_rows(traj)?;
    let mut values = [0.0; 3];
    for (slot, &row) in rows.iter().enumerate() {
        let state = &traj.states[row];
        let a = &state[(pair.0 - 1) * n..pair.0 * n];
        let b = &state[(pair.1 - 1) * n..pair.1 * n];
        let f = realize_eval(f2, base, &[a, b])?;
        values[slot] = (f - offset) / scale;
    }
    constant_from_samples(name, values)
}

fn check_columns(traj: &Trajectory, expected: usize) -> Result<(), SuperpositionError> {
    if traj.dim() != expected {
        return Err(SuperpositionError::BadInput(format!(
            "trajectory has {} columns, rule needs {expected}",
            traj.dim()
        )));
    }
    Ok(())
}

fn sl2_coproduct2() -> SymPoly {
    SymPoly::parse("v1*v3 - v2^2", 3, 1)
        .expect("Casimir parse")
        .coproduct(2)
        .expect("coproduct")
}

fn su2_coproduct2() -> SymPoly {
    SymPoly::parse("v1^2 + v2^2 + v3^2", 3, 1)
        .expect("Casimir parse")
        .coproduct(2)
        .expect("coproduct")
}

/// Extracts `(k1, k2)` for the cubic-velocity rule from a bundle trajectory
/// with columns `(x_(1), p_(1), x_(2), p_(2), x_(3), p_(3))`, copy 1 being
/// the target: `k1 = F(1,2) - 2 b0`, `k2 = F(1,3) - 2 b0`.
pub fn extract_kummer_schwarz(
    traj: &Trajectory,
    b0: f64,
) -> Result<(f64, f64), SuperpositionError> {
    check_columns(traj, 6)?;
    let base = reals::kummer_schwarz(b0);
    let f2 = sl2_coproduct2();
    let k1 = extract_pair_constant(traj, &base, &f2, (1, 2), 1.0, 2.0 * b0, "k1")?;
    let k2 = extract_pair_constant(traj, &base, &f2, (1, 3), 1.0, 2.0 * b0, "k2")?;
    Ok((k1, k2))
}

/// Extracts `(k1, k2, k3)` for the barrier-oscillator rule from a bundle
/// trajectory, copy 1 the target: `k_i = 4 F(pair_i) - 2 b` with pairs
/// `(1,2), (1,3), (2,3)`.
pub fn extract_milne_pinney(
    traj: &Trajectory,
    b: f64,
) -> Result<(f64, f64, f64), SuperpositionError> {
    check_columns(traj, 6)?;
    let base = reals::smorodinsky_winternitz(&[b]);
    let f2 = sl2_coproduct2();
    let k1 = extract_pair_constant(traj, &base, &f2, (1, 2), 0.25, 0.5 * b, "k1")?;
    let k2 = extract_pair_constant(traj, &base, &f2, (1, 3), 0.25, 0.5 * b, "k2")?;
    let k3 = extract_pair_constant(traj, &base, &f2, (2, 3), 0.25, 0.5 * b, "k3")?;
    Ok((k1, k2, k3))
}

/// Extracts `(k1, k2)` for the trigonometric rule (pairs `(1,2)`, `(1,3)`,
/// no offset).
pub fn extract_trig_su2(traj: &Trajectory) -> Result<(f64, f64), SuperpositionError> {
    check_columns(traj, 6)?;
    let base = reals::trig_su2();
    let f2 = su2_coproduct2();
    let k1 = extract_pair_constant(traj, &base, &f2, (1, 2), 1.0, 0.0, "k1")?;
    let k2 = extract_pair_constant(traj, &base, &f2, (1, 3), 1.0, 0.0, "k2")?;
    Ok((k1, k2))
}

/// Extracts the cross-ratio constant from a four-column bundle trajectory of
/// scalar quadratic-drift solutions, column 1 being the target.
pub fn extract_riccati(traj: &Trajectory) -> Result<f64, SuperpositionError> {
    check_columns(traj, 4)?;
    let rows = sample_rows(traj)?;
    let mut values = [0.0; 3];
    for (slot, &row) in rows.iter().enumerate() {
        let s = &traj.states[row];
        values[slot] = riccati_cross_ratio(s[0], s[1], s[2], s[3])?;
    }
    constant_from_samples("k", values)
}
