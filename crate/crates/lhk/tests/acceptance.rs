//! Acceptance suite: one test per shipped guarantee, each printing a
//! PASS/FAIL line (visible with `--nocapture`). Symbolic guarantees are
//! exact; numeric ones carry the tolerances pinned below.

use std::panic::{catch_unwind, resume_unwind, UnwindSafe};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lhk::algebra::{builtin, StructureConstants};
use lhk::dynamics::{
    independence_check, integrate, lie_integral_flow_at, monitor_invariants, verify_lie_integral,
    Invariant, Method,
};
use lhk::exact::Rat;
use lhk::realization::{catalog as real_catalog, check_homomorphism, Realization, DEFAULT_SAMPLE_MARGIN};
use lhk::superposition::{verify_rule, RuleId};
use lhk::sympoly::{find_casimirs, random_poly, SymPoly, DEFAULT_MONOMIAL_CAP};
use lhk::systems::{catalog, CoefficientCurve, LieHamiltonSystem, SystemDescriptor};

const SEED: u64 = 42;

fn criterion<F: FnOnce() + UnwindSafe>(n: usize, label: &str, body: F) {
    match catch_unwind(body) {
        Ok(()) => println!("ACCEPTANCE {n} ({label}): PASS"),
        Err(e) => {
            println!("ACCEPTANCE {n} ({label}): FAIL");
            resume_unwind(e);
        }
    }
}

fn cos_curve() -> CoefficientCurve {
    CoefficientCurve::sinusoid(1.0, 1.0, 0.0, 0.0)
}

fn sin_curve() -> CoefficientCurve {
    CoefficientCurve::sinusoid(1.0, 1.0, -std::f64::consts::FRAC_PI_2, 0.0)
}

/// omega(t) = 1 + 0.3 cos t, the driven-frequency profile used throughout.
fn driven_omega() -> CoefficientCurve {
    CoefficientCurve::sinusoid(0.3, 1.0, 0.0, 1.0)
}

fn sl2_casimir() -> SymPoly {
    SymPoly::parse("v1*v3 - v2^2", 3, 1).unwrap()
}

fn su2_casimir() -> SymPoly {
    SymPoly::parse("v1^2 + v2^2 + v3^2", 3, 1).unwrap()
}

// ---------------------------------------------------------------------------
// 1: exact Casimir identities

#[test]
fn acceptance_01_exact_casimirs() {
    criterion(1, "exact Casimir identities", || {
        let sl2 = builtin("sl2").unwrap();
        assert!(sl2_casimir().is_casimir(&sl2).unwrap());
        let su2 = builtin("su2").unwrap();
        assert!(su2_casimir().is_casimir(&su2).unwrap());
    });
}

// ---------------------------------------------------------------------------
// 2: exact bracket and coproduct laws on randomized polynomials

/// Applies the algebra morphism `v<alpha>_<a> -> image(alpha, a)` term by
/// term; `image` must produce polynomials over `m_out` copies.
fn substitute(
    p: &SymPoly,
    m_out: usize,
    image: impl Fn(usize, usize) -> SymPoly,
) -> SymPoly {
    let r = p.r();
    let mut out = SymPoly::zero(r, m_out);
    for (mono, coeff) in p.terms() {
        let mut term = SymPoly::constant(r, m_out, coeff.clone());
        for (alpha, a, e) in mono.iter_nonzero(r) {
            term = term.mul(&image(alpha, a).pow(e)).unwrap();
        }
        out = out.add(&term).unwrap();
    }
    out
}

fn var(r: usize, m: usize, alpha: usize, a: usize) -> SymPoly {
    SymPoly::var(r, m, alpha, a).unwrap()
}

#[test]
fn acceptance_02_randomized_identities() {
    criterion(2, "bracket and coproduct laws, 200 random pairs", || {
        for name in ["sl2", "h6"] {
            let sc = builtin(name).unwrap();
            let r = sc.dim();
            let mut rng = ChaCha8Rng::seed_from_u64(SEED);
            for _ in 0..200 {
                let f = random_poly(&mut rng, r, 1, 3, 5);
                let g = random_poly(&mut rng, r, 1, 3, 5);
                let h = random_poly(&mut rng, r, 1, 3, 5);

                // Antisymmetry.
                let fg = f.poisson_bracket(&g, &sc).unwrap();
                assert_eq!(fg, g.poisson_bracket(&f, &sc).unwrap().neg());

                // Leibniz in the second slot.
                let lhs = f.poisson_bracket(&g.mul(&h).unwrap(), &sc).unwrap();
                let rhs = fg
                    .mul(&h)
                    .unwrap()
                    .add(&g.mul(&f.poisson_bracket(&h, &sc).unwrap()).unwrap())
                    .unwrap();
                assert_eq!(lhs, rhs);

                // Jacobi.
                let cyc = |a: &SymPoly, b: &SymPoly, c: &SymPoly| {
                    a.poisson_bracket(&b.poisson_bracket(c, &sc).unwrap(), &sc)
                        .unwrap()
                };
                let total = cyc(&f, &g, &h)
                    .add(&cyc(&g, &h, &f))
                    .unwrap()
                    .add(&cyc(&h, &f, &g))
                    .unwrap();
                assert!(total.is_zero());

                // The coproduct is a bracket morphism.
                let lhs = fg.coproduct(2).unwrap();
                let rhs = f
                    .coproduct(2)
                    .unwrap()
                    .poisson_bracket(&g.coproduct(2).unwrap(), &sc)
                    .unwrap();
                assert_eq!(lhs, rhs);

                // Coassociativity: extending the first or the second slot of
                // the two-copy coproduct gives the three-copy coproduct.
                let d2 = f.coproduct(2).unwrap();
                let d3 = f.coproduct(3).unwrap();
                let first = substitute(&d2, 3, |alpha, a| {
                    if a == 1 {
                        var(r, 3, alpha, 1).add(&var(r, 3, alpha, 2)).unwrap()
                    } else {
                        var(r, 3, alpha, 3)
                    }
                });
                let second = substitute(&d2, 3, |alpha, a| {
                    if a == 1 {
                        var(r, 3, alpha, 1)
                    } else {
                        var(r, 3, alpha, 2).add(&var(r, 3, alpha, 3)).unwrap()
                    }
                });
                assert_eq!(first, d3);
                assert_eq!(second, d3);
            }
        }
    });
}

// ---------------------------------------------------------------------------
// 3: coproduct images of the Casimir are in involution with the diagonal

#[test]
fn acceptance_03_casimir_images_commute() {
    criterion(3, "Casimir coproduct images in involution", || {
        let sc = builtin("sl2").unwrap();
        let c = sl2_casimir();
        for j in 1..=3usize {
            let dj = c.coproduct(j).unwrap().embed(3).unwrap();
            for alpha in 1..=3usize {
                let gen3 = var(3, 1, alpha, 1).coproduct(3).unwrap();
                assert!(dj.poisson_bracket(&gen3, &sc).unwrap().is_zero());
            }
        }
        let d2 = c.coproduct(2).unwrap().embed(3).unwrap();
        let d3 = c.coproduct(3).unwrap();
        assert!(d2.poisson_bracket(&d3, &sc).unwrap().is_zero());
    });
}

// ---------------------------------------------------------------------------
// 4: every catalog realization closes on its structure constants

#[test]
fn acceptance_04_realizations_are_homomorphisms() {
    criterion(4, "realization homomorphisms, both quartic structures", || {
        let reals: Vec<Realization> = vec![
            real_catalog::ermakov(1.0),
            real_catalog::smorodinsky_winternitz(&[1.0]),
            real_catalog::kummer_schwarz(1.0),
            real_catalog::second_order_riccati(),
            real_catalog::trig_su2(),
            real_catalog::riccati4_first(),
            real_catalog::riccati4_second(),
        ];
        for real in &reals {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED);
            let report = check_homomorphism(real, 100, 1e-8, &mut rng).unwrap();
            assert!(
                report.pass && report.max_generator_residual < 1e-8,
                "{}: generator residual {:.3e}",
                real.name,
                report.max_generator_residual
            );
        }
    });
}

// ---------------------------------------------------------------------------
// 5: constants of the motion stay flat along driven trajectories

fn ks_descriptor(b0: f64, b1: CoefficientCurve) -> SystemDescriptor {
    SystemDescriptor::new("kummer-schwarz")
        .with_param("b0", serde_json::json!(b0))
        .with_coefficients(vec![b1])
}

fn sw_descriptor(b: &[f64], omega: CoefficientCurve) -> SystemDescriptor {
    SystemDescriptor::new("smorodinsky-winternitz")
        .with_param("b", serde_json::json!(b))
        .with_coefficients(vec![omega])
}

fn trig_descriptor(bx: CoefficientCurve, by: CoefficientCurve, bz: CoefficientCurve) -> SystemDescriptor {
    SystemDescriptor::new("trig-su2").with_coefficients(vec![bx, by, bz])
}

/// Prolongs to `m` copies, integrates from a sampled point, and returns the
/// per-invariant relative drift.
fn drift_run(
    sys: &LieHamiltonSystem,
    m: usize,
    casimir: &SymPoly,
    names: &[&str],
    t1: f64,
) -> Vec<(String, f64)> {
    let sys = if m > 1 { sys.prolong(m) } else { sys.clone() };
    let mut invariants = Vec::new();
    for name in names {
        let poly = match *name {
            "F1" => casimir.coproduct(1).unwrap().embed(m).unwrap(),
            "F2" => casimir.coproduct(2).unwrap().embed(m).unwrap(),
            "F3" => casimir.coproduct(3).unwrap().embed(m).unwrap(),
            "F2_13" => casimir
                .coproduct(2)
                .unwrap()
                .embed(3)
                .unwrap()
                .permute_copies(&SymPoly::transposition(3, 1, 3))
                .unwrap(),
            "F2_23" => casimir
                .coproduct(2)
                .unwrap()
                .embed(3)
                .unwrap()
                .permute_copies(&SymPoly::transposition(3, 2, 3))
                .unwrap(),
            other => panic!("unknown invariant {other}"),
        };
        invariants.push(Invariant::realized(name, poly, sys.base.clone()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let x0 = sys
        .realization
        .space
        .sample(&mut rng, DEFAULT_SAMPLE_MARGIN)
        .unwrap();
    let traj = integrate(&sys, &x0, 0.0, t1, Method::rkf45(1e-10, 1e-10)).unwrap();
    let report = monitor_invariants(&traj, &invariants).unwrap();
    report
        .entries
        .iter()
        .map(|e| (e.name.clone(), e.max_drift))
        .collect()
}

#[test]
fn acceptance_05_invariant_drift() {
    criterion(5, "invariant drift below 1e-6 on driven systems", || {
        let tol = 1e-6;
        let cases: Vec<(LieHamiltonSystem, usize, SymPoly, Vec<&str>)> = vec![
            (
                catalog(&ks_descriptor(1.0, cos_curve())).unwrap(),
                3,
                sl2_casimir(),
                vec!["F2", "F3", "F2_13", "F2_23"],
            ),
            (
                catalog(&sw_descriptor(&[1.0], driven_omega())).unwrap(),
                3,
                sl2_casimir(),
                vec!["F2", "F3", "F2_13", "F2_23"],
            ),
            (
                catalog(
                    &SystemDescriptor::new("ermakov")
                        .with_param("b", serde_json::json!(1.0))
                        .with_coefficients(vec![driven_omega()]),
                )
                .unwrap(),
                1,
                sl2_casimir(),
                vec!["F1"],
            ),
            (
                catalog(&trig_descriptor(
                    cos_curve(),
                    sin_curve(),
                    CoefficientCurve::constant(1.0),
                ))
                .unwrap(),
                3,
                su2_casimir(),
                vec!["F2", "F3"],
            ),
        ];
        for (sys, m, casimir, names) in cases {
            for (name, drift) in drift_run(&sys, m, &casimir, &names, 5.0) {
                assert!(
                    drift < tol,
                    "{} / {name}: drift {drift:.3e}",
                    sys.name
                );
            }
        }
    });
}

// ---------------------------------------------------------------------------
// 6: the two-copy constants are functionally independent

#[test]
fn acceptance_06_functional_independence() {
    criterion(6, "functional independence of the pair constants", || {
        let cases: Vec<(LieHamiltonSystem, SymPoly)> = vec![
            (
                catalog(&ks_descriptor(1.0, cos_curve())).unwrap(),
                sl2_casimir(),
            ),
            (
                catalog(&sw_descriptor(&[1.0], driven_omega())).unwrap(),
                sl2_casimir(),
            ),
            (
                catalog(&trig_descriptor(
                    cos_curve(),
                    sin_curve(),
                    CoefficientCurve::constant(1.0),
                ))
                .unwrap(),
                su2_casimir(),
            ),
        ];
        for (sys, casimir) in cases {
            let sys3 = sys.prolong(3);
            let f2 = casimir.coproduct(2).unwrap().embed(3).unwrap();
            let f2_23 = f2
                .permute_copies(&SymPoly::transposition(3, 2, 3))
                .unwrap();
            let invariants = [
                Invariant::realized("F2", f2, sys3.base.clone()),
                Invariant::realized("F2_23", f2_23, sys3.base.clone()),
            ];
            let mut rng = ChaCha8Rng::seed_from_u64(SEED);
            for _ in 0..20 {
                let pt = sys3
                    .realization
                    .space
                    .sample(&mut rng, DEFAULT_SAMPLE_MARGIN)
                    .unwrap();
                // Jacobian with respect to the first copy's coordinates.
                let report = independence_check(&invariants, &[0, 1], &pt).unwrap();
                assert!(
                    report.row_normalized_abs_det > 1e-6,
                    "{}: normalized det {:.3e}",
                    sys.name,
                    report.row_normalized_abs_det
                );
            }
        }
    });
}

// ---------------------------------------------------------------------------
// 7: superposition rules reconstruct a held-out solution

#[test]
fn acceptance_07_superposition_round_trips() {
    criterion(7, "superposition rules within tolerance", || {
        let cases: Vec<(RuleId, Vec<CoefficientCurve>, f64, f64)> = vec![
            // Time-dependent coefficients.
            (
                RuleId::Riccati,
                vec![sin_curve(), CoefficientCurve::constant(0.5), cos_curve()],
                2.0,
                1e-6,
            ),
            (RuleId::KummerSchwarz { b0: 1.0 }, vec![cos_curve()], 5.0, 1e-5),
            (RuleId::KummerSchwarz { b0: 0.0 }, vec![cos_curve()], 1.5, 1e-5),
            (RuleId::MilnePinney { b: 1.0 }, vec![driven_omega()], 5.0, 1e-5),
            (
                RuleId::TrigSu2,
                vec![cos_curve(), sin_curve(), CoefficientCurve::constant(1.0)],
                5.0,
                1e-5,
            ),
            // Constant-coefficient variants at the same tolerances.
            (
                RuleId::Riccati,
                vec![
                    CoefficientCurve::constant(1.0),
                    CoefficientCurve::constant(0.5),
                    CoefficientCurve::constant(1.0),
                ],
                2.0,
                1e-6,
            ),
            (
                RuleId::KummerSchwarz { b0: 1.0 },
                vec![CoefficientCurve::constant(1.0)],
                5.0,
                1e-5,
            ),
            (
                RuleId::KummerSchwarz { b0: 0.0 },
                vec![CoefficientCurve::constant(1.0)],
                1.0,
                1e-5,
            ),
            (
                RuleId::MilnePinney { b: 1.0 },
                vec![CoefficientCurve::constant(1.0)],
                5.0,
                1e-5,
            ),
            (
                RuleId::TrigSu2,
                vec![
                    CoefficientCurve::constant(0.3),
                    CoefficientCurve::constant(0.2),
                    CoefficientCurve::constant(1.0),
                ],
                5.0,
                1e-5,
            ),
        ];
        for (rule, coefficients, t1, tol) in cases {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED);
            let report = verify_rule(&rule, &coefficients, 0.0, t1, tol, &mut rng)
                .unwrap_or_else(|e| panic!("{}: {e}", rule.name()));
            assert!(
                report.pass && report.max_error < tol,
                "{}: max error {:.3e} (tol {tol:.0e})",
                rule.name(),
                report.max_error
            );
        }
    });
}

// ---------------------------------------------------------------------------
// 8: adjoint coefficient flows

#[test]
fn acceptance_08_adjoint_flows() {
    criterion(8, "adjoint flow closed form, Abelian constancy", || {
        // Lowering flow on the three-dimensional simple algebra.
        let sc = builtin("sl2").unwrap();
        let b = vec![
            CoefficientCurve::constant(0.0),
            CoefficientCurve::constant(0.0),
            CoefficientCurve::constant(1.0),
        ];
        let f0 = [0.7, -1.3, 2.1];
        let times: Vec<f64> = (0..61).map(|i| i as f64 * 0.05).collect();
        let path = lie_integral_flow_at(&sc, &b, &f0, &times, Method::default()).unwrap();
        for (t, row) in path.times.iter().zip(&path.values) {
            let expected = [
                f0[0],
                f0[1] + 2.0 * f0[0] * t,
                f0[2] + f0[1] * t + f0[0] * t * t,
            ];
            for (v, e) in row.iter().zip(expected) {
                assert!((v - e).abs() <= 1e-9 * e.abs().max(1.0), "t = {t}: {v} vs {e}");
            }
        }

        // An Abelian algebra freezes the coefficients exactly.
        let abelian = StructureConstants::from_json_str(r#"{"r":3,"c":[]}"#).unwrap();
        let b = vec![cos_curve(), sin_curve(), CoefficientCurve::constant(2.0)];
        let path = lie_integral_flow_at(&abelian, &b, &f0, &times, Method::default()).unwrap();
        for row in &path.values {
            assert_eq!(row.as_slice(), &f0);
        }

        // The scalar pairing sum_a f_a(t) h_a(x(t)) is conserved.
        let sys = catalog(&sw_descriptor(&[1.0], driven_omega())).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let x0 = sys
            .realization
            .space
            .sample(&mut rng, DEFAULT_SAMPLE_MARGIN)
            .unwrap();
        let traj = integrate(&sys, &x0, 0.0, 5.0, Method::default()).unwrap();
        let f0: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let path =
            lie_integral_flow_at(&sys.base.sc, &sys.b, &f0, &traj.times, Method::default())
                .unwrap();
        let report = verify_lie_integral(&sys, &path, &traj, 1e-6).unwrap();
        assert!(report.pass, "deviation {:.3e}", report.max_deviation);
    });
}

// ---------------------------------------------------------------------------
// 9: the Casimir solver agrees with brute-force bracketing

/// All monomials of total degree `<= dmax` in `r` single-copy generators.
fn monomial_basis(r: usize, dmax: u32) -> Vec<SymPoly> {
    let mut exps = vec![0u32; r];
    let mut out = Vec::new();
    loop {
        if exps.iter().sum::<u32>() <= dmax {
            let mut p = SymPoly::one(r, 1);
            for (alpha, &e) in exps.iter().enumerate() {
                if e > 0 {
                    p = p.mul(&var(r, 1, alpha + 1, 1).pow(e)).unwrap();
                }
            }
            out.push(p);
        }
        // Odometer over exponent vectors bounded by dmax in each slot.
        let mut i = 0;
        loop {
            if i == r {
                return out;
            }
            exps[i] += 1;
            if exps[i] > dmax {
                exps[i] = 0;
                i += 1;
            } else {
                break;
            }
        }
    }
}

/// Kernel dimension of the map P -> ({P, v_1}, ..., {P, v_r}) on the span of
/// `basis`, by explicit rational Gaussian elimination.
fn bracket_kernel_dim(sc: &StructureConstants, basis: &[SymPoly]) -> usize {
    use std::collections::BTreeMap;
    let r = sc.dim();
    // Column index per (generator, output monomial) pair.
    let mut col_of = BTreeMap::new();
    let mut rows: Vec<BTreeMap<usize, Rat>> = Vec::with_capacity(basis.len());
    for p in basis {
        let mut row = BTreeMap::new();
        for alpha in 1..=r {
            let image = p.poisson_bracket(&var(r, 1, alpha, 1), sc).unwrap();
            for (mono, coeff) in image.terms() {
                let next = col_of.len();
                let col = *col_of.entry((alpha, mono.clone())).or_insert(next);
                row.insert(col, coeff.clone());
            }
        }
        rows.push(row);
    }
    // Row-reduce over the rationals; the rank is the number of pivots.
    let mut rank = 0usize;
    let mut reduced: Vec<BTreeMap<usize, Rat>> = Vec::new();
    for mut row in rows {
        for pivot_row in &reduced {
            let (&pc, pv) = pivot_row.iter().next().unwrap();
            if let Some(v) = row.get(&pc).cloned() {
                let factor = v / pv.clone();
                for (c, val) in pivot_row {
                    let entry = row.entry(*c).or_insert_with(num_traits::Zero::zero);
                    *entry -= factor.clone() * val.clone();
                }
                row.retain(|_, v| !num_traits::Zero::is_zero(v));
            }
        }
        if !row.is_empty() {
            reduced.push(row);
            reduced.sort_by_key(|r| *r.iter().next().unwrap().0);
            rank += 1;
        }
    }
    basis.len() - rank
}

/// Checks that `p` equals `scale * q + shift` for some rationals.
fn matches_up_to_affine(p: &SymPoly, q: &SymPoly) -> bool {
    let shift = SymPoly::constant(p.r(), 1, p.constant_term());
    let reduced = p.sub(&shift).unwrap();
    let Some((mono, coeff)) = reduced.terms().next() else {
        return false;
    };
    let Some(q_coeff) = q.terms().find(|(m, _)| *m == mono).map(|(_, c)| c) else {
        return false;
    };
    let scale = coeff.clone() / q_coeff.clone();
    reduced == q.scale(&scale)
}

#[test]
fn acceptance_09_casimir_solver_oracle() {
    criterion(9, "Casimir solver vs brute-force bracketing", || {
        // Quadratic Casimirs of the simple algebra.
        let sl2 = builtin("sl2").unwrap();
        let basis = find_casimirs(&sl2, 2, DEFAULT_MONOMIAL_CAP).unwrap();
        assert_eq!(basis.dim(), 2);
        assert!(basis.constant.is_casimir(&sl2).unwrap());
        for p in &basis.nontrivial {
            assert!(p.is_casimir(&sl2).unwrap());
        }
        assert_eq!(basis.nontrivial.len(), 1);
        assert!(
            matches_up_to_affine(&basis.nontrivial[0], &sl2_casimir()),
            "solver basis {} is not an affine image of the Casimir",
            basis.nontrivial[0]
        );
        // Independent oracle: brute-force kernel dimension.
        let monos = monomial_basis(3, 2);
        assert_eq!(bracket_kernel_dim(&sl2, &monos), basis.dim());

        // Linear Casimirs of the six-dimensional algebra contain the center.
        let h6 = builtin("h6").unwrap();
        let basis = find_casimirs(&h6, 1, DEFAULT_MONOMIAL_CAP).unwrap();
        let v6 = SymPoly::parse("v6", 6, 1).unwrap();
        assert!(basis
            .nontrivial
            .iter()
            .any(|p| matches_up_to_affine(p, &v6)));
        for p in &basis.nontrivial {
            assert!(p.is_casimir(&h6).unwrap());
        }
        let monos = monomial_basis(6, 1);
        assert_eq!(bracket_kernel_dim(&h6, &monos), basis.dim());
    });
}

// ---------------------------------------------------------------------------
// 10: integrator convergence orders

#[test]
fn acceptance_10_integrator_orders() {
    criterion(10, "RK4 step-halving factor, adaptive tightening", || {
        // The barrier-free oscillator is exactly harmonic: x = cos t.
        let sys = catalog(&sw_descriptor(&[0.0], CoefficientCurve::constant(1.0))).unwrap();
        let x0 = [1.0, 0.0];
        let t1 = 2.0f64;
        let exact = [t1.cos(), -t1.sin()];
        let err_at = |h: f64| {
            let traj = integrate(&sys, &x0, 0.0, t1, Method::rk4(h)).unwrap();
            let last = traj.final_state();
            last.iter()
                .zip(exact)
                .map(|(v, e)| (v - e).abs())
                .fold(0.0f64, f64::max)
        };
        let factor = err_at(0.1) / err_at(0.05);
        assert!(
            (12.0..=20.0).contains(&factor),
            "halving factor {factor:.2} outside [12, 20]"
        );

        // Tightening the adaptive tolerances 100x cuts drift at least 10x
        // on the three-copy cubic-oscillator case.
        let sys = catalog(&ks_descriptor(1.0, cos_curve())).unwrap().prolong(3);
        let invariant = Invariant::realized(
            "F2",
            sl2_casimir().coproduct(2).unwrap().embed(3).unwrap(),
            Arc::clone(&sys.base),
        );
        let drift_at = |tol: f64| {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED);
            let x0 = sys
                .realization
                .space
                .sample(&mut rng, DEFAULT_SAMPLE_MARGIN)
                .unwrap();
            let traj = integrate(&sys, &x0, 0.0, 5.0, Method::rkf45(tol, tol)).unwrap();
            monitor_invariants(&traj, std::slice::from_ref(&invariant))
                .unwrap()
                .max_drift()
        };
        let coarse = drift_at(1e-6);
        let fine = drift_at(1e-8);
        assert!(
            coarse / fine >= 10.0,
            "drift only improved {:.1}x (from {coarse:.3e} to {fine:.3e})",
            coarse / fine
        );
    });
}
