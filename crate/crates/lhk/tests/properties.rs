//! Randomized structural properties. Symbolic identities (bracket laws,
//! coproduct morphism, permutation covariance) are checked with exact
//! rational arithmetic; numeric properties get scale-relative tolerances.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lhk::algebra::{builtin, builtin_names, StructureConstants};
use lhk::dynamics::{lie_integral_flow_at, Method, Trajectory, TrajectoryMeta};
use lhk::superposition::{
    ks_discriminant, ks_pair_invariant, kummer_schwarz_rule, milne_pinney_rule, mp_discriminant,
    mp_pair_invariant, riccati_cross_ratio, riccati_rule, BranchChoice,
};
use lhk::sympoly::{random_poly, SymPoly};
use lhk::systems::CoefficientCurve;

fn algebra(choice: u8) -> StructureConstants {
    let names = builtin_names();
    builtin(names[choice as usize % names.len()]).expect("builtin algebra")
}

/// Two random polynomials over the same algebra and copy count.
fn poly_pair(seed: u64, sc: &StructureConstants, m: usize) -> (SymPoly, SymPoly) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = random_poly(&mut rng, sc.dim(), m, 3, 5);
    let g = random_poly(&mut rng, sc.dim(), m, 3, 5);
    (f, g)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bracket_is_antisymmetric(seed: u64, choice: u8, m in 1usize..=3) {
        let sc = algebra(choice);
        let (f, g) = poly_pair(seed, &sc, m);
        let fg = f.poisson_bracket(&g, &sc).unwrap();
        let gf = g.poisson_bracket(&f, &sc).unwrap();
        prop_assert_eq!(fg, gf.neg());
    }

    #[test]
    fn bracket_satisfies_leibniz(seed: u64, choice: u8, m in 1usize..=2) {
        let sc = algebra(choice);
        let (f, g) = poly_pair(seed, &sc, m);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e3779b97f4a7c15);
        let h = random_poly(&mut rng, sc.dim(), m, 2, 4);
        let lhs = f.poisson_bracket(&g.mul(&h).unwrap(), &sc).unwrap();
        let rhs = f
            .poisson_bracket(&g, &sc)
            .unwrap()
            .mul(&h)
            .unwrap()
            .add(&g.mul(&f.poisson_bracket(&h, &sc).unwrap()).unwrap())
            .unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn bracket_satisfies_jacobi(seed: u64, choice: u8) {
        let sc = algebra(choice);
        let (f, g) = poly_pair(seed, &sc, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x517cc1b727220a95);
        let h = random_poly(&mut rng, sc.dim(), 1, 2, 4);
        let cycle = |a: &SymPoly, b: &SymPoly, c: &SymPoly| {
            a.poisson_bracket(&b.poisson_bracket(c, &sc).unwrap(), &sc)
                .unwrap()
        };
        let total = cycle(&f, &g, &h)
            .add(&cycle(&g, &h, &f))
            .unwrap()
            .add(&cycle(&h, &f, &g))
            .unwrap();
        prop_assert!(total.is_zero());
    }

    #[test]
    fn coproduct_is_a_bracket_morphism(seed: u64, choice: u8, m in 2usize..=3) {
        let sc = algebra(choice);
        let (f, g) = poly_pair(seed, &sc, 1);
        let lhs = f.poisson_bracket(&g, &sc).unwrap().coproduct(m).unwrap();
        let rhs = f
            .coproduct(m)
            .unwrap()
            .poisson_bracket(&g.coproduct(m).unwrap(), &sc)
            .unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn coproduct_is_an_algebra_morphism(seed: u64, choice: u8, m in 2usize..=3) {
        let sc = algebra(choice);
        let (f, g) = poly_pair(seed, &sc, 1);
        let lhs = f.mul(&g).unwrap().coproduct(m).unwrap();
        let rhs = f
            .coproduct(m)
            .unwrap()
            .mul(&g.coproduct(m).unwrap())
            .unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn display_round_trips_through_parse(seed: u64, choice: u8, m in 1usize..=3) {
        let sc = algebra(choice);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_poly(&mut rng, sc.dim(), m, 3, 6);
        let text = p.to_string();
        let back = SymPoly::parse(&text, sc.dim(), m).unwrap();
        prop_assert_eq!(p, back);
    }

    #[test]
    fn copy_permutations_compose_and_commute_with_the_bracket(
        seed: u64,
        choice: u8,
        i in 1usize..=3,
        j in 1usize..=3,
    ) {
        let sc = algebra(choice);
        let (f, g) = poly_pair(seed, &sc, 3);
        let sigma = SymPoly::transposition(3, i, j);
        let tau = SymPoly::transposition(3, 1, (i % 3) + 1);

        // Composition: applying sigma then tau equals the composed map.
        // Permutation entries are 1-based copy labels.
        let composed: Vec<usize> = (0..3).map(|a| tau[sigma[a] - 1]).collect();
        let step = f.permute_copies(&sigma).unwrap().permute_copies(&tau).unwrap();
        prop_assert_eq!(&step, &f.permute_copies(&composed).unwrap());

        // Transpositions are involutions.
        let twice = f.permute_copies(&sigma).unwrap().permute_copies(&sigma).unwrap();
        prop_assert_eq!(&twice, &f);

        // The copy-diagonal bracket is equivariant.
        let lhs = f
            .poisson_bracket(&g, &sc)
            .unwrap()
            .permute_copies(&sigma)
            .unwrap();
        let rhs = f
            .permute_copies(&sigma)
            .unwrap()
            .poisson_bracket(&g.permute_copies(&sigma).unwrap(), &sc)
            .unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn coproducts_of_casimirs_are_symmetric(i in 1usize..=3, j in 1usize..=3) {
        prop_assume!(i != j);
        for (name, text) in [("sl2", "v1*v3 - v2^2"), ("su2", "v1^2 + v2^2 + v3^2")] {
            let sc = builtin(name).unwrap();
            let c = SymPoly::parse(text, sc.dim(), 1).unwrap();
            let d3 = c.coproduct(3).unwrap();
            let perm = SymPoly::transposition(3, i, j);
            prop_assert_eq!(&d3.permute_copies(&perm).unwrap(), &d3);
        }
    }

    #[test]
    fn curves_round_trip_through_json(
        amp in -3.0f64..3.0,
        omega in 0.1f64..4.0,
        phase in -3.0f64..3.0,
        offset in -2.0f64..2.0,
    ) {
        let curves = vec![
            CoefficientCurve::constant(offset),
            CoefficientCurve::sinusoid(amp, omega, phase, offset),
        ];
        for curve in curves {
            let text = serde_json::to_string(&curve).unwrap();
            let back: CoefficientCurve = serde_json::from_str(&text).unwrap();
            for t in [0.0, 0.37, 1.5, 4.0] {
                prop_assert_eq!(
                    curve.eval(t).unwrap().to_bits(),
                    back.eval(t).unwrap().to_bits()
                );
            }
        }
    }

    #[test]
    fn trajectory_csv_round_trips_bitwise(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 5usize;
        let times: Vec<f64> = (0..n).map(|i| i as f64 * 0.25).collect();
        let states: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..3).map(|_| rng.gen_range(-5.0..5.0)).collect())
            .collect();
        let traj = Trajectory {
            names: vec!["a".into(), "b".into(), "c".into()],
            times,
            states,
            meta: TrajectoryMeta {
                system: "test".into(),
                copies: 1,
                method: "rk4(h=0.1)".into(),
            },
        };
        let back = Trajectory::from_csv_str(&traj.to_csv_string()).unwrap();
        prop_assert_eq!(&back.names, &traj.names);
        for (x, y) in back.times.iter().zip(&traj.times) {
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
        for (xs, ys) in back.states.iter().zip(&traj.states) {
            for (x, y) in xs.iter().zip(ys) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn adjoint_flow_is_linear_in_the_initial_coefficients(
        seed: u64,
        a in -2.0f64..2.0,
        c in -2.0f64..2.0,
    ) {
        let sc = builtin("sl2").unwrap();
        let b = vec![
            CoefficientCurve::sinusoid(1.0, 1.0, 0.0, 0.0),
            CoefficientCurve::constant(0.5),
            CoefficientCurve::constant(1.0),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f0: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let g0: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let combo: Vec<f64> = f0.iter().zip(&g0).map(|(x, y)| a * x + c * y).collect();

        let times: Vec<f64> = (0..11).map(|i| i as f64 * 0.2).collect();
        let method = Method::rk4(0.01);
        let pf = lie_integral_flow_at(&sc, &b, &f0, &times, method).unwrap();
        let pg = lie_integral_flow_at(&sc, &b, &g0, &times, method).unwrap();
        let pc = lie_integral_flow_at(&sc, &b, &combo, &times, method).unwrap();
        for ((row_f, row_g), row_c) in pf.values.iter().zip(&pg.values).zip(&pc.values) {
            for ((x, y), z) in row_f.iter().zip(row_g).zip(row_c) {
                let expect = a * x + c * y;
                let scale = expect.abs().max(1.0);
                prop_assert!((expect - z).abs() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn cubic_oscillator_branches_satisfy_the_first_pairing(
        x2 in 0.4f64..1.6,
        p2 in -0.8f64..0.8,
        x3 in 0.4f64..1.6,
        p3 in -0.8f64..0.8,
        b0 in 0.2f64..2.0,
    ) {
        let (x1t, p1t) = (1.1, 0.2);
        let k1 = ks_pair_invariant(x1t, p1t, x2, p2, b0) - 2.0 * b0;
        let k2 = ks_pair_invariant(x1t, p1t, x3, p3, b0) - 2.0 * b0;
        let scale = k1.abs().max(1.0);
        let mut best = f64::INFINITY;
        for branch in BranchChoice::all(2) {
            let Ok((x1, p1)) = kummer_schwarz_rule(x2, p2, x3, p3, k1, k2, b0, branch) else {
                continue;
            };
            // Every real branch satisfies the first pairing by construction.
            let r1 = ks_pair_invariant(x1, p1, x2, p2, b0) - (k1 + 2.0 * b0);
            prop_assert!(
                r1.abs() <= 1e-6 * scale,
                "branch {}: residual {r1:.2e}",
                branch.label()
            );
            best = best.min((x1 - x1t).abs().max((p1 - p1t).abs()));
        }
        // Away from the degenerate loci (tiny outer discriminant, tiny
        // momentum radicand, near-singular denominator) some branch must
        // recover the generating point.
        let (disc, mag) = ks_discriminant(x2, p2, x3, p3, k1, k2, b0);
        let p_rad = k1 * x1t * x2 - b0 * (x1t * x1t + x2 * x2);
        let a = p2 * x2 * x2 - p3 * x3 * x3;
        let bm = k1 * x2 - k2 * x3;
        let den = bm * bm + 4.0 * b0 * a * a;
        if disc > 1e-4 * mag.max(1.0) && p_rad > 1e-4 && den > 1e-3 {
            prop_assert!(best <= 1e-6, "closest branch missed by {best:.3e}");
        }
    }

    #[test]
    fn barrier_oscillator_branches_satisfy_the_first_pairing(
        x2 in 0.5f64..1.5,
        p2 in -0.8f64..0.8,
        x3 in 0.5f64..1.5,
        p3 in -0.8f64..0.8,
        b in 0.3f64..2.0,
    ) {
        let (x1t, p1t) = (1.2, -0.3);
        let k1 = 4.0 * mp_pair_invariant(x1t, p1t, x2, p2, b) - 2.0 * b;
        let k2 = 4.0 * mp_pair_invariant(x1t, p1t, x3, p3, b) - 2.0 * b;
        let k3 = 4.0 * mp_pair_invariant(x2, p2, x3, p3, b) - 2.0 * b;
        prop_assume!((4.0 * b * b - k3 * k3).abs() > 1e-3 * (4.0 * b * b + k3 * k3));
        let scale = k1.abs().max(1.0);
        let mut best = f64::INFINITY;
        for branch in BranchChoice::all(3) {
            let Ok((x1, p1)) = milne_pinney_rule(x2, p2, x3, p3, k1, k2, k3, b, branch) else {
                continue;
            };
            let r1 = 4.0 * mp_pair_invariant(x1, p1, x2, p2, b) - 2.0 * b - k1;
            prop_assert!(
                r1.abs() <= 1e-6 * scale,
                "branch {}: residual {r1:.2e}",
                branch.label()
            );
            best = best.min((x1 - x1t).abs().max((p1 - p1t).abs()));
        }
        // Conditional existence, gated away from the degenerate loci.
        let (disc, mag) = mp_discriminant(x2, x3, k1, k2, k3, b);
        let x2q = x2 * x2;
        let p_rad = k1 * x1t * x1t * x2q - b * (x1t.powi(4) + x2q * x2q);
        if disc > 1e-4 * mag.max(1.0) && p_rad > 1e-4 {
            prop_assert!(best <= 1e-6, "closest branch missed by {best:.3e}");
        }
    }

    #[test]
    fn riccati_rule_inverts_the_cross_ratio(
        x in -2.0f64..2.0,
        x1 in -2.0f64..2.0,
        x2 in -2.0f64..2.0,
        x3 in -2.0f64..2.0,
    ) {
        let pts = [x, x1, x2, x3];
        for (a, pa) in pts.iter().enumerate() {
            for pb in pts.iter().skip(a + 1) {
                prop_assume!((pa - pb).abs() > 0.05);
            }
        }
        let k = riccati_cross_ratio(x, x1, x2, x3).unwrap();
        prop_assume!(k.is_finite() && k.abs() > 1e-6 && (k - 1.0).abs() > 1e-6);
        let back = riccati_rule(x1, x2, x3, k).unwrap();
        let scale = x.abs().max(1.0);
        prop_assert!((back - x).abs() <= 1e-9 * scale);
    }
}

// ---------------------------------------------------------------------------
// Deterministic invariant-algebra checks on a driven three-copy system.

mod invariant_algebra {
    use std::sync::Arc;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use lhk::dynamics::{integrate, monitor_invariants, Invariant, Method};
    use lhk::realization::DEFAULT_SAMPLE_MARGIN;
    use lhk::sympoly::SymPoly;
    use lhk::systems::{catalog, CoefficientCurve, LieHamiltonSystem, SystemDescriptor};

    fn driven_cubic_oscillator() -> LieHamiltonSystem {
        let desc = SystemDescriptor::new("kummer-schwarz")
            .with_param("b0", serde_json::json!(1.0))
            .with_coefficients(vec![CoefficientCurve::sinusoid(1.0, 1.0, 0.0, 0.0)]);
        catalog(&desc).unwrap().prolong(3)
    }

    fn pair_constant() -> SymPoly {
        SymPoly::parse("v1*v3 - v2^2", 3, 1)
            .unwrap()
            .coproduct(2)
            .unwrap()
            .embed(3)
            .unwrap()
    }

    #[test]
    fn bracket_of_two_invariants_is_itself_an_invariant() {
        let sys = driven_cubic_oscillator();
        let f = pair_constant();
        let g = f
            .permute_copies(&SymPoly::transposition(3, 2, 3))
            .unwrap();
        let h = f.poisson_bracket(&g, &sys.base.sc).unwrap();
        assert!(!h.is_zero(), "bracket degenerated to zero");

        let invariants = [
            Invariant::realized("F", f, Arc::clone(&sys.base)),
            Invariant::realized("G", g, Arc::clone(&sys.base)),
            Invariant::realized("{F,G}", h, Arc::clone(&sys.base)),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let x0 = sys
            .realization
            .space
            .sample(&mut rng, DEFAULT_SAMPLE_MARGIN)
            .unwrap();
        let traj = integrate(&sys, &x0, 0.0, 5.0, Method::rkf45(1e-10, 1e-10)).unwrap();
        let report = monitor_invariants(&traj, &invariants).unwrap();
        for entry in &report.entries {
            assert!(
                entry.max_drift < 1e-5,
                "{}: drift {:.3e}",
                entry.name,
                entry.max_drift
            );
        }
    }

    #[test]
    fn permuted_invariant_drift_matches_the_permuted_trajectory_exactly() {
        let sys = driven_cubic_oscillator();
        let f = pair_constant();
        let g = f
            .permute_copies(&SymPoly::transposition(3, 2, 3))
            .unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let x0 = sys
            .realization
            .space
            .sample(&mut rng, DEFAULT_SAMPLE_MARGIN)
            .unwrap();
        let traj = integrate(&sys, &x0, 0.0, 5.0, Method::rkf45(1e-8, 1e-8)).unwrap();

        // Swap the coordinate blocks of copies 2 and 3 in every sample.
        let k = traj.names.len() / 3;
        let mut swapped = traj.clone();
        for state in &mut swapped.states {
            for i in 0..k {
                state.swap(k + i, 2 * k + i);
            }
        }

        let on_original = monitor_invariants(
            &traj,
            &[Invariant::realized("I", g, Arc::clone(&sys.base))],
        )
        .unwrap();
        let on_swapped = monitor_invariants(
            &swapped,
            &[Invariant::realized("I", f, Arc::clone(&sys.base))],
        )
        .unwrap();
        let a = &on_original.entries[0];
        let b = &on_swapped.entries[0];
        assert_eq!(a.initial.to_bits(), b.initial.to_bits());
        assert_eq!(a.max_drift.to_bits(), b.max_drift.to_bits());
        assert_eq!(a.samples, b.samples);
    }
}
