//! Phase-space realizations of Lie algebras by smooth Hamiltonian functions.
//!
//! A [`Realization`] equips a phase space with a Poisson bivector
//! `Lambda` and one smooth Hamiltonian `h_alpha` per generator of a
//! structure-constant table, such that numerically
//! `{h_alpha, h_beta}_Lambda = sum_gamma c_{alpha,beta,gamma} h_gamma`.
//! The sign conventions are fixed once here and used everywhere else:
//!
//! * bracket: `{f, g}(x) = sum_{ij} Lambda^{ij}(x) d_i f d_j g`;
//! * Hamiltonian vector field: `X_f^i = sum_j Lambda^{ij} d_j f`.
//!
//! Polynomials in the abstract generators are pushed to phase-space
//! functions by substituting `h_alpha` per copy ([`realize_eval`]); the
//! substitution is evaluated with canonically sorted folds so that permuting
//! the copy points together with the polynomial's copy labels reproduces the
//! result bit for bit.

pub mod catalog;

use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::algebra::StructureConstants;
use crate::exact::rat_to_f64;
use crate::sympoly::{PolyError, SymPoly};

/// Default margin kept between random sample points and the domain boundary.
pub const DEFAULT_SAMPLE_MARGIN: f64 = 0.05;

/// Default residual tolerance for realizations with closed-form gradients.
pub const TOL_CLOSED_FORM: f64 = 1e-8;

/// Default residual tolerance when finite-difference gradients are in play.
pub const TOL_FD: f64 = 1e-5;

/// Errors from phase-space constructions and checks.
#[derive(Debug, Error)]
pub enum RealizationError {
    #[error("point outside the domain of {space}: {message}")]
    Domain { space: String, message: String },
    #[error("could not sample a point in {space} with margin {margin} after {attempts} attempts")]
    SamplingFailed {
        space: String,
        margin: f64,
        attempts: usize,
    },
    #[error("realization named {name:?} provides {hams} Hamiltonians for an algebra of dimension {dim}")]
    GeneratorCount { name: String, hams: usize, dim: usize },
    #[error("expected a point of dimension {expected}, got {got}")]
    PointDimension { expected: usize, got: usize },
    #[error("polynomial on {got} copies evaluated with {points} points")]
    CopyCount { got: usize, points: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

type DomainFn = Arc<dyn Fn(&[f64], f64) -> Option<String> + Send + Sync>;

/// A named coordinate chart with a domain predicate and a sampling box.
///
/// The domain predicate receives a margin: margin `0` answers plain
/// membership, while a positive margin shrinks the domain so random samples
/// keep a safe distance from the boundary. Violation messages name the
/// offending coordinate, e.g. `"x = 0.9999995 violates |x| < 1 - 1e-6"`.
#[derive(Clone)]
pub struct PhaseSpace {
    name: String,
    names: Vec<String>,
    domain: DomainFn,
    sample_box: Vec<(f64, f64)>,
}

impl std::fmt::Debug for PhaseSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PhaseSpace")
            .field("name", &self.name)
            .field("names", &self.names)
            .field("sample_box", &self.sample_box)
            .finish_non_exhaustive()
    }
}

impl PhaseSpace {
    /// A chart with no domain restriction.
    pub fn unrestricted(name: &str, coordinate_names: &[&str], sample_box: Vec<(f64, f64)>) -> Self {
        Self::with_domain(name, coordinate_names, sample_box, |_, _| None)
    }

    /// A chart with the given margin-aware domain predicate.
    pub fn with_domain(
        name: &str,
        coordinate_names: &[&str],
        sample_box: Vec<(f64, f64)>,
        domain: impl Fn(&[f64], f64) -> Option<String> + Send + Sync + 'static,
    ) -> Self {
        assert_eq!(coordinate_names.len(), sample_box.len());
        PhaseSpace {
            name: name.to_string(),
            names: coordinate_names.iter().map(|s| s.to_string()).collect(),
            domain: Arc::new(domain),
            sample_box,
        }
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn coordinate_names(&self) -> &[String] {
        &self.names
    }

    pub fn sample_box(&self) -> &[(f64, f64)] {
        &self.sample_box
    }

    /// `None` when `x` is inside the domain shrunk by `margin`, otherwise a
    /// message describing the violated restriction.
    pub fn violation(&self, x: &[f64], margin: f64) -> Option<String> {
        if x.len() != self.dim() {
            return Some(format!(
                "point has dimension {}, expected {}",
                x.len(),
                self.dim()
            ));
        }
        if let Some(bad) = x.iter().position(|v| !v.is_finite()) {
            return Some(format!("{} is not finite", self.names[bad]));
        }
        (self.domain)(x, margin)
    }

    /// Plain membership test with a typed error.
    pub fn check(&self, x: &[f64]) -> Result<(), RealizationError> {
        match self.violation(x, 0.0) {
            None => Ok(()),
            Some(message) => Err(RealizationError::Domain {
                space: self.name.clone(),
                message,
            }),
        }
    }

    /// Uniform rejection sample from the sampling box, keeping `margin`
    /// distance from the domain boundary.
    pub fn sample<R: Rng>(&self, rng: &mut R, margin: f64) -> Result<Vec<f64>, RealizationError> {
        const ATTEMPTS: usize = 10_000;
        for _ in 0..ATTEMPTS {
            let x: Vec<f64> = self
                .sample_box
                .iter()
                .map(|&(lo, hi)| rng.gen_range(lo..hi))
                .collect();
            if self.violation(&x, margin).is_none() {
                return Ok(x);
            }
        }
        Err(RealizationError::SamplingFailed {
            space: self.name.clone(),
            margin,
            attempts: ATTEMPTS,
        })
    }

    /// The product chart of `copies` relabeled copies of this chart, with
    /// coordinate names suffixed `_(a)`.
    pub fn power(&self, copies: usize) -> PhaseSpace {
        let dim = self.dim();
        let names: Vec<String> = (1..=copies)
            .flat_map(|a| self.names.iter().map(move |n| format!("{n}_({a})")))
            .collect();
        let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let sample_box: Vec<(f64, f64)> = (0..copies)
            .flat_map(|_| self.sample_box.iter().copied())
            .collect();
        let base = self.clone();
        PhaseSpace::with_domain(
            &format!("{}^{}", self.name, copies),
            &name_refs,
            sample_box,
            move |x, margin| {
                for a in 0..copies {
                    if let Some(msg) = base.violation(&x[a * dim..(a + 1) * dim], margin) {
                        return Some(format!("copy {}: {}", a + 1, msg));
                    }
                }
                None
            },
        )
    }
}

type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// A scalar phase-space function with an optional closed-form gradient.
/// Without one, gradients fall back to central finite differences with step
/// `cbrt(eps) * max(1, |x_i|)` per coordinate.
#[derive(Clone)]
pub struct SmoothFunction {
    f: ScalarFn,
    grad: Option<GradFn>,
}

impl std::fmt::Debug for SmoothFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SmoothFunction")
            .field("closed_form_gradient", &self.grad.is_some())
            .finish_non_exhaustive()
    }
}

impl SmoothFunction {
    pub fn new(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        SmoothFunction {
            f: Arc::new(f),
            grad: None,
        }
    }

    pub fn with_grad(
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        SmoothFunction {
            f: Arc::new(f),
            grad: Some(Arc::new(grad)),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    pub fn has_closed_form_gradient(&self) -> bool {
        self.grad.is_some()
    }

    /// Writes the gradient at `x` into `out`.
    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(out.len(), x.len(), "gradient buffer length");
        match &self.grad {
            Some(g) => g(x, out),
            None => {
                let mut work = x.to_vec();
                for i in 0..x.len() {
                    let h = fd_step(x[i]);
                    work[i] = x[i] + h;
                    let fp = (self.f)(&work);
                    work[i] = x[i] - h;
                    let fm = (self.f)(&work);
                    work[i] = x[i];
                    out[i] = (fp - fm) / (2.0 * h);
                }
            }
        }
    }
}

/// Central-difference step for coordinate value `xi`.
pub fn fd_step(xi: f64) -> f64 {
    f64::EPSILON.cbrt() * xi.abs().max(1.0)
}

type BivectorFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// A Poisson bivector `Lambda^{ij}(x)`, evaluated as a dense row-major
/// `dim x dim` antisymmetric matrix.
#[derive(Clone)]
pub struct PoissonBivector {
    dim: usize,
    f: BivectorFn,
}

impl std::fmt::Debug for PoissonBivector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PoissonBivector").field("dim", &self.dim).finish_non_exhaustive()
    }
}

impl PoissonBivector {
    pub fn new(dim: usize, f: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        PoissonBivector { dim, f: Arc::new(f) }
    }

    /// Canonical bivector on `(q_1..q_n, p_1..p_n)`: `{q_i, p_i} = 1`.
    pub fn canonical(n_pairs: usize) -> Self {
        let dim = 2 * n_pairs;
        PoissonBivector::new(dim, move |_x, out| {
            out.fill(0.0);
            for i in 0..n_pairs {
                out[i * dim + (n_pairs + i)] = 1.0;
                out[(n_pairs + i) * dim + i] = -1.0;
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Writes `Lambda(x)` into `out` (row-major, length `dim * dim`).
    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.dim, "point dimension");
        assert_eq!(out.len(), self.dim * self.dim, "bivector buffer");
        (self.f)(x, out)
    }

    /// Block-diagonal bivector of `copies` independent copies.
    pub fn power(&self, copies: usize) -> PoissonBivector {
        let base = self.clone();
        let d = self.dim;
        let big = d * copies;
        PoissonBivector::new(big, move |x, out| {
            out.fill(0.0);
            let mut block = vec![0.0; d * d];
            for a in 0..copies {
                base.eval(&x[a * d..(a + 1) * d], &mut block);
                for i in 0..d {
                    for j in 0..d {
                        out[(a * d + i) * big + (a * d + j)] = block[i * d + j];
                    }
                }
            }
        })
    }
}

/// Numeric Poisson bracket `{f, g}(x)` with respect to `lambda`.
pub fn bracket_num(f: &SmoothFunction, g: &SmoothFunction, lambda: &PoissonBivector, x: &[f64]) -> f64 {
    let n = lambda.dim();
    let mut df = vec![0.0; n];
    let mut dg = vec![0.0; n];
    let mut lam = vec![0.0; n * n];
    f.gradient(x, &mut df);
    g.gradient(x, &mut dg);
    lambda.eval(x, &mut lam);
    let mut acc = 0.0;
    for i in 0..n {
        if df[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            let l = lam[i * n + j];
            if l != 0.0 {
                acc += l * df[i] * dg[j];
            }
        }
    }
    acc
}

/// An autonomous vector field on a phase space.
#[derive(Clone)]
pub struct VectorField {
    dim: usize,
    f: GradFn,
}

impl VectorField {
    pub fn new(dim: usize, f: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        VectorField { dim, f: Arc::new(f) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(out.len(), self.dim);
        (self.f)(x, out)
    }
}

/// The Hamiltonian vector field `X_f^i = sum_j Lambda^{ij} d_j f`.
pub fn hamiltonian_vf(f: &SmoothFunction, lambda: &PoissonBivector) -> VectorField {
    let f = f.clone();
    let lambda = lambda.clone();
    let n = lambda.dim();
    VectorField::new(n, move |x, out| {
        let mut df = vec![0.0; n];
        let mut lam = vec![0.0; n * n];
        f.gradient(x, &mut df);
        lambda.eval(x, &mut lam);
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                let l = lam[i * n + j];
                if l != 0.0 {
                    acc += l * df[j];
                }
            }
            out[i] = acc;
        }
    })
}

type TimeScalarFn = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;
type TimeGradientFn = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;

/// A scalar function of time and a phase-space point, with optional
/// closed-form spatial gradient.
#[derive(Clone)]
pub struct TimeDependentFunction {
    f: TimeScalarFn,
    grad_x: Option<TimeGradientFn>,
}

impl TimeDependentFunction {
    pub fn new(f: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        TimeDependentFunction {
            f: Arc::new(f),
            grad_x: None,
        }
    }

    pub fn with_grad(
        f: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
        grad_x: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        TimeDependentFunction {
            f: Arc::new(f),
            grad_x: Some(Arc::new(grad_x)),
        }
    }

    pub fn value(&self, t: f64, x: &[f64]) -> f64 {
        (self.f)(t, x)
    }

    /// Freezes time, yielding a [`SmoothFunction`] of the point alone.
    pub fn at_time(&self, t: f64) -> SmoothFunction {
        let f = self.f.clone();
        match &self.grad_x {
            Some(g) => {
                let g = g.clone();
                SmoothFunction::with_grad(move |x| f(t, x), move |x, out| g(t, x, out))
            }
            None => SmoothFunction::new(move |x| f(t, x)),
        }
    }
}

/// Poisson bracket of two time-dependent functions at frozen time `t`:
/// time acts as a parameter, only spatial derivatives enter.
pub fn bracket_at_t(
    f: &TimeDependentFunction,
    g: &TimeDependentFunction,
    lambda: &PoissonBivector,
    t: f64,
    x: &[f64],
) -> f64 {
    bracket_num(&f.at_time(t), &g.at_time(t), lambda, x)
}

/// A Lie algebra realized by smooth Hamiltonians on a phase space.
#[derive(Debug, Clone)]
pub struct Realization {
    pub name: String,
    pub space: PhaseSpace,
    pub sc: StructureConstants,
    pub bivector: PoissonBivector,
    pub hams: Vec<SmoothFunction>,
}

impl Realization {
    pub fn new(
        name: &str,
        space: PhaseSpace,
        sc: StructureConstants,
        bivector: PoissonBivector,
        hams: Vec<SmoothFunction>,
    ) -> Result<Self, RealizationError> {
        if hams.len() != sc.dim() {
            return Err(RealizationError::GeneratorCount {
                name: name.to_string(),
                hams: hams.len(),
                dim: sc.dim(),
            });
        }
        Ok(Realization {
            name: name.to_string(),
            space,
            sc,
            bivector,
            hams,
        })
    }

    /// Algebra dimension (number of Hamiltonians).
    pub fn algebra_dim(&self) -> usize {
        self.hams.len()
    }

    /// Phase-space dimension.
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn has_closed_form_gradients(&self) -> bool {
        self.hams.iter().all(SmoothFunction::has_closed_form_gradient)
    }

    /// Default homomorphism tolerance for this realization.
    pub fn default_tolerance(&self) -> f64 {
        if self.has_closed_form_gradients() {
            TOL_CLOSED_FORM
        } else {
            TOL_FD
        }
    }

    /// Values `h_alpha(x)` for all generators.
    pub fn ham_values(&self, x: &[f64]) -> Vec<f64> {
        self.hams.iter().map(|h| h.value(x)).collect()
    }

    /// Diagonal prolongation onto `copies` copies of the phase space: the
    /// bivector acts block-diagonally and each Hamiltonian becomes the sum of
    /// its values over the copies, so the prolongation realizes the same
    /// algebra on the product space.
    pub fn prolong(&self, copies: usize) -> Realization {
        assert!(copies >= 1, "at least one copy");
        if copies == 1 {
            return self.clone();
        }
        let n = self.dim();
        let hams: Vec<SmoothFunction> = self
            .hams
            .iter()
            .map(|h| {
                let hv = h.clone();
                let hg = h.clone();
                SmoothFunction::with_grad(
                    move |x| x.chunks(n).map(|chunk| hv.value(chunk)).sum(),
                    move |x, out| {
                        for (chunk, gout) in x.chunks(n).zip(out.chunks_mut(n)) {
                            hg.gradient(chunk, gout);
                        }
                    },
                )
            })
            .collect();
        Realization {
            name: format!("{} (x{})", self.name, copies),
            space: self.space.power(copies),
            sc: self.sc.clone(),
            bivector: self.bivector.power(copies),
            hams,
        }
    }
}

fn check_points(real: &Realization, poly: &SymPoly, points: &[&[f64]]) -> Result<(), RealizationError> {
    if poly.m() != points.len() {
        return Err(RealizationError::CopyCount {
            got: poly.m(),
            points: points.len(),
        });
    }
    for pt in points {
        if pt.len() != real.dim() {
            return Err(RealizationError::PointDimension {
                expected: real.dim(),
                got: pt.len(),
            });
        }
    }
    Ok(())
}

/// Evaluates a polynomial in the abstract generators at one phase-space
/// point per copy, substituting `v<alpha>_<a> -> h_alpha(points[a-1])`.
///
/// Products and the final sum are folded in ascending `total_cmp` order, so
/// permuting `points` together with the polynomial's copy labels yields a
/// bit-identical result.
pub fn realize_eval(
    poly: &SymPoly,
    real: &Realization,
    points: &[&[f64]],
) -> Result<f64, RealizationError> {
    check_points(real, poly, points)?;
    let hvals: Vec<Vec<f64>> = points.iter().map(|pt| real.ham_values(pt)).collect();
    let mut term_values: Vec<f64> = Vec::with_capacity(poly.num_terms());
    let mut factors: Vec<f64> = Vec::new();
    for (mono, coeff) in poly.terms() {
        factors.clear();
        for (alpha, a, e) in mono.iter_nonzero(poly.r()) {
            factors.push(hvals[a - 1][alpha - 1].powi(e as i32));
        }
        factors.sort_by(|x, y| x.total_cmp(y));
        let mut value = rat_to_f64(coeff);
        for f in &factors {
            value *= f;
        }
        term_values.push(value);
    }
    term_values.sort_by(|x, y| x.total_cmp(y));
    Ok(term_values.iter().sum())
}

/// Gradient of the realized polynomial with respect to all coordinates of
/// the product space, written into `out` (length `dim * m`, copy-major).
///
/// Chain rule: `d/dx_i^(a) P(h(x^(1)), ..) = sum_alpha (dP/dv<alpha>_<a>)
/// evaluated at the h-values, times dh_alpha/dx_i at the a-th point`.
pub fn realized_gradient(
    poly: &SymPoly,
    real: &Realization,
    points: &[&[f64]],
    out: &mut [f64],
) -> Result<(), RealizationError> {
    check_points(real, poly, points)?;
    let n = real.dim();
    assert_eq!(out.len(), n * points.len(), "gradient buffer length");
    out.fill(0.0);
    let mut hgrad = vec![0.0; n];
    for a in 1..=poly.m() {
        for alpha in 1..=poly.r() {
            let dp = poly.partial(alpha, a)?;
            if dp.is_zero() {
                continue;
            }
            let scalar = realize_eval(&dp, real, points)?;
            if scalar == 0.0 {
                continue;
            }
            real.hams[alpha - 1].gradient(points[a - 1], &mut hgrad);
            for i in 0..n {
                out[(a - 1) * n + i] += scalar * hgrad[i];
            }
        }
    }
    Ok(())
}

/// The realized polynomial as a [`SmoothFunction`] on the `m`-fold product
/// space, with the chain-rule gradient.
pub fn realized_function(poly: &SymPoly, real: &Realization) -> SmoothFunction {
    let poly_f = poly.clone();
    let poly_g = poly.clone();
    let real_f = real.clone();
    let real_g = real.clone();
    let n = real.dim();
    SmoothFunction::with_grad(
        move |x| {
            let points: Vec<&[f64]> = x.chunks(n).collect();
            realize_eval(&poly_f, &real_f, &points).expect("realized evaluation")
        },
        move |x, out| {
            let points: Vec<&[f64]> = x.chunks(n).collect();
            realized_gradient(&poly_g, &real_g, &points, out).expect("realized gradient");
        },
    )
}

/// Worst residual of one generator bracket relation.
#[derive(Debug, Clone)]
pub struct GeneratorResidual {
    pub alpha: usize,
    pub beta: usize,
    pub residual: f64,
    pub point: Vec<f64>,
}

/// Report of [`check_homomorphism`].
#[derive(Debug, Clone)]
pub struct HomReport {
    pub samples: usize,
    pub tol: f64,
    /// Largest `|{h_a, h_b} - sum_c c_{ab}^c h_c|` over samples and pairs.
    pub max_generator_residual: f64,
    pub worst_generator: Option<GeneratorResidual>,
    /// Largest deviation of `P,Q -> {P,Q}` from commuting with realization,
    /// over random degree-<=2 polynomial pairs at the sampled points.
    pub max_morphism_residual: f64,
    pub pass: bool,
}

/// Samples points with the default margin and checks at each that the
/// generator brackets close on the structure constants, and that realizing
/// polynomials commutes with the bracket on random degree-<=2 pairs.
pub fn check_homomorphism<R: Rng>(
    real: &Realization,
    samples: usize,
    tol: f64,
    rng: &mut R,
) -> Result<HomReport, RealizationError> {
    let r = real.algebra_dim();
    let dense = real.sc.dense_f64();
    let mut max_generator = 0.0f64;
    let mut worst: Option<GeneratorResidual> = None;

    const MORPHISM_PAIRS: usize = 5;
    let pairs: Vec<(SymPoly, SymPoly)> = (0..MORPHISM_PAIRS)
        .map(|_| {
            (
                crate::sympoly::random_poly(rng, r, 1, 2, 4),
                crate::sympoly::random_poly(rng, r, 1, 2, 4),
            )
        })
        .collect();
    let realized: Vec<(SmoothFunction, SmoothFunction, SymPoly)> = pairs
        .iter()
        .map(|(p, q)| {
            let bracket = p.poisson_bracket(q, &real.sc)?;
            Ok((realized_function(p, real), realized_function(q, real), bracket))
        })
        .collect::<Result<_, PolyError>>()?;

    let mut max_morphism = 0.0f64;
    for _ in 0..samples {
        let x = real.space.sample(rng, DEFAULT_SAMPLE_MARGIN)?;
        let hvals = real.ham_values(&x);
        for alpha in 1..=r {
            for beta in (alpha + 1)..=r {
                let lhs = bracket_num(&real.hams[alpha - 1], &real.hams[beta - 1], &real.bivector, &x);
                let mut rhs = 0.0;
                for gamma in 1..=r {
                    let c = dense[(alpha - 1) * r * r + (beta - 1) * r + (gamma - 1)];
                    if c != 0.0 {
                        rhs += c * hvals[gamma - 1];
                    }
                }
                let residual = (lhs - rhs).abs();
                if residual > max_generator {
                    max_generator = residual;
                    worst = Some(GeneratorResidual {
                        alpha,
                        beta,
                        residual,
                        point: x.clone(),
                    });
                }
            }
        }
        for (fp, fq, bracket_poly) in &realized {
            let lhs = realize_eval(bracket_poly, real, &[&x])?;
            let rhs = bracket_num(fp, fq, &real.bivector, &x);
            max_morphism = max_morphism.max((lhs - rhs).abs());
        }
    }

    Ok(HomReport {
        samples,
        tol,
        max_generator_residual: max_generator,
        worst_generator: worst,
        max_morphism_residual: max_morphism,
        pass: max_generator < tol && max_morphism < tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn canonical_2d() -> (PhaseSpace, PoissonBivector) {
        let space = PhaseSpace::unrestricted("plane", &["x", "p"], vec![(-1.0, 1.0), (-1.0, 1.0)]);
        (space, PoissonBivector::canonical(1))
    }

    #[test]
    fn canonical_bracket_of_coordinates() {
        let (_space, lambda) = canonical_2d();
        let x = SmoothFunction::with_grad(|v| v[0], |_, out| out.copy_from_slice(&[1.0, 0.0]));
        let p = SmoothFunction::with_grad(|v| v[1], |_, out| out.copy_from_slice(&[0.0, 1.0]));
        assert_eq!(bracket_num(&x, &p, &lambda, &[0.3, -0.7]), 1.0);
        assert_eq!(bracket_num(&p, &x, &lambda, &[0.3, -0.7]), -1.0);
    }

    #[test]
    fn hamiltonian_field_of_kinetic_and_quadratic_terms() {
        let lambda = PoissonBivector::canonical(1);
        let b = 0.7;
        // h = (p^2 + b/x^2)/2 pushes (x, p) to (p, b/x^3).
        let h3 = SmoothFunction::new(move |v| 0.5 * (v[1] * v[1] + b / (v[0] * v[0])));
        let vf = hamiltonian_vf(&h3, &lambda);
        let mut out = [0.0; 2];
        vf.eval(&[1.3, 0.4], &mut out);
        assert!((out[0] - 0.4).abs() < 1e-9);
        assert!((out[1] - b / 1.3f64.powi(3)).abs() < 1e-9);

        // h = x^2/2 pushes (x, p) to (0, -x).
        let h1 = SmoothFunction::new(|v| 0.5 * v[0] * v[0]);
        vf_eval_close(&hamiltonian_vf(&h1, &lambda), &[1.3, 0.4], &[0.0, -1.3]);
    }

    fn vf_eval_close(vf: &VectorField, x: &[f64], expected: &[f64]) {
        let mut out = vec![0.0; x.len()];
        vf.eval(x, &mut out);
        for (o, e) in out.iter().zip(expected) {
            assert!((o - e).abs() < 1e-9, "{o} vs {e}");
        }
    }

    #[test]
    fn finite_difference_gradient_matches_closed_form() {
        let f_closed = SmoothFunction::with_grad(
            |v| v[0] * v[0] * v[1].sin(),
            |v, out| {
                out[0] = 2.0 * v[0] * v[1].sin();
                out[1] = v[0] * v[0] * v[1].cos();
            },
        );
        let f_fd = SmoothFunction::new(|v| v[0] * v[0] * v[1].sin());
        let x = [1.2, -0.4];
        let mut g1 = [0.0; 2];
        let mut g2 = [0.0; 2];
        f_closed.gradient(&x, &mut g1);
        f_fd.gradient(&x, &mut g2);
        for (a, b) in g1.iter().zip(g2.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn time_dependent_bracket_scales_with_time() {
        let lambda = PoissonBivector::canonical(1);
        let f = TimeDependentFunction::new(|t, v| t * v[0]);
        let g = TimeDependentFunction::new(|_, v| v[1]);
        for t in [0.0, 0.5, 2.0] {
            let val = bracket_at_t(&f, &g, &lambda, t, &[0.9, 0.1]);
            assert!((val - t).abs() < 1e-9, "t = {t}: {val}");
        }
    }

    #[test]
    fn sampling_respects_margin_and_domain() {
        let space = PhaseSpace::with_domain(
            "halfline",
            &["x"],
            vec![(-1.0, 1.0)],
            |x, margin| {
                if x[0] > margin {
                    None
                } else {
                    Some(format!("x = {} violates x > 0", x[0]))
                }
            },
        );
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let x = space.sample(&mut rng, 0.05).unwrap();
            assert!(x[0] > 0.05);
        }
        assert!(space.check(&[-0.5]).is_err());
        assert!(space.check(&[0.5]).is_ok());
    }

    #[test]
    fn realize_eval_is_permutation_equivariant_bitwise() {
        let real = catalog::kummer_schwarz(0.7);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let p = crate::sympoly::random_poly(&mut rng, 3, 3, 3, 6);
            let pts: Vec<Vec<f64>> = (0..3)
                .map(|_| real.space.sample(&mut rng, 0.05).unwrap())
                .collect();
            let refs: Vec<&[f64]> = pts.iter().map(Vec::as_slice).collect();
            let v1 = realize_eval(&p, &real, &refs).unwrap();
            let perm = SymPoly::transposition(3, 1, 3);
            let p_perm = p.permute_copies(&perm).unwrap();
            let swapped: Vec<&[f64]> = vec![&pts[2], &pts[1], &pts[0]];
            let v2 = realize_eval(&p_perm, &real, &swapped).unwrap();
            assert_eq!(v1.to_bits(), v2.to_bits());
        }
    }

    #[test]
    fn realized_gradient_matches_finite_differences() {
        let real = catalog::kummer_schwarz(1.0);
        let poly = SymPoly::parse("v1_1*v3_2 - v2_1^2*v2_2 + 2*v1_2", 3, 2).unwrap();
        let f = realized_function(&poly, &real);
        let x = [1.1, 0.2, 0.8, -0.3];
        let mut closed = [0.0; 4];
        f.gradient(&x, &mut closed);
        let fd = SmoothFunction::new({
            let f = f.clone();
            move |v| f.value(v)
        });
        let mut approx = [0.0; 4];
        fd.gradient(&x, &mut approx);
        for (a, b) in closed.iter().zip(approx.iter()) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn homomorphism_check_passes_for_a_valid_realization() {
        let real = catalog::kummer_schwarz(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let report = check_homomorphism(&real, 50, TOL_CLOSED_FORM, &mut rng).unwrap();
        assert!(report.pass, "residual {}", report.max_generator_residual);
    }

    #[test]
    fn homomorphism_check_fails_for_a_broken_realization() {
        let mut real = catalog::kummer_schwarz(1.0);
        // Swap two Hamiltonians: the bracket relations no longer close.
        real.hams.swap(0, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let report = check_homomorphism(&real, 20, TOL_CLOSED_FORM, &mut rng).unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn power_space_prefixes_copy_in_violations() {
        let real = catalog::trig_su2();
        let prod = real.space.power(2);
        assert_eq!(prod.dim(), 4);
        assert_eq!(prod.coordinate_names()[2], "x_(2)");
        let msg = prod.violation(&[0.0, 0.0, 0.99999999, 0.0], 0.0).unwrap();
        assert!(msg.contains("copy 2"), "{msg}");
    }
}
