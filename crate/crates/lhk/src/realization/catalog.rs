//! The built-in realizations, with closed-form gradients throughout.
//!
//! Each constructor fixes a coordinate chart, a Poisson bivector, the
//! realized Hamiltonians, and a sampling box sized so that randomly drawn
//! initial conditions produce well-behaved trajectories over the time spans
//! used in tests and reports.

use crate::algebra::builtin;
use crate::numeric::invert;

use super::{PhaseSpace, PoissonBivector, Realization, SmoothFunction};

fn nonzero_coordinate_domain(
    names: &'static [&'static str],
    restricted: Vec<usize>,
) -> impl Fn(&[f64], f64) -> Option<String> + Send + Sync + 'static {
    move |x, margin| {
        for &i in &restricted {
            if x[i].abs() <= margin {
                return Some(if margin > 0.0 {
                    format!("{} = {} is within margin {} of {} = 0", names[i], x[i], margin, names[i])
                } else {
                    format!("{} = {} violates {} != 0", names[i], x[i], names[i])
                });
            }
        }
        None
    }
}

/// Planar oscillator pair: a cubic-barrier oscillator in `x` coupled through
/// common time-dependent frequency to an auxiliary harmonic mode in `y`.
/// Realizes sl2 on `(x, y, v_x, v_y)` with
/// `h1 = (x^2 + y^2)/2`, `h2 = -(x v_x + y v_y)/2`,
/// `h3 = (v_x^2 + v_y^2 + b/x^2)/2`.
pub fn ermakov(b: f64) -> Realization {
    static NAMES: [&str; 4] = ["x", "y", "vx", "vy"];
    let restricted = if b != 0.0 { vec![0] } else { vec![] };
    let space = PhaseSpace::with_domain(
        "ermakov",
        &NAMES,
        vec![(0.6, 1.4), (-1.0, 1.0), (-0.5, 0.5), (-1.0, 1.0)],
        nonzero_coordinate_domain(&NAMES, restricted),
    );
    let h1 = SmoothFunction::with_grad(
        |v| 0.5 * (v[0] * v[0] + v[1] * v[1]),
        |v, g| {
            g.copy_from_slice(&[v[0], v[1], 0.0, 0.0]);
        },
    );
    let h2 = SmoothFunction::with_grad(
        |v| -0.5 * (v[0] * v[2] + v[1] * v[3]),
        |v, g| {
            g.copy_from_slice(&[-0.5 * v[2], -0.5 * v[3], -0.5 * v[0], -0.5 * v[1]]);
        },
    );
    let h3 = SmoothFunction::with_grad(
        move |v| 0.5 * (v[2] * v[2] + v[3] * v[3] + b / (v[0] * v[0])),
        move |v, g| {
            g.copy_from_slice(&[-b / (v[0] * v[0] * v[0]), 0.0, v[2], v[3]]);
        },
    );
    Realization::new(
        "ermakov",
        space,
        builtin("sl2").expect("builtin"),
        PoissonBivector::canonical(2),
        vec![h1, h2, h3],
    )
    .expect("three Hamiltonians for sl2")
}

/// Oscillator with inverse-square barriers `b_i / x_i^2` in each coordinate.
/// Realizes sl2 on `(x_1..x_n, p_1..p_n)` with
/// `h1 = sum x_i^2 / 2`, `h2 = -sum x_i p_i / 2`,
/// `h3 = sum (p_i^2 + b_i/x_i^2) / 2`.
pub fn smorodinsky_winternitz(b: &[f64]) -> Realization {
    let n = b.len();
    assert!(n >= 1, "at least one degree of freedom");
    let names: Vec<String> = if n == 1 {
        vec!["x".into(), "p".into()]
    } else {
        (1..=n)
            .map(|i| format!("x{i}"))
            .chain((1..=n).map(|i| format!("p{i}")))
            .collect()
    };
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut sample_box = vec![(0.6, 1.4); n];
    sample_box.extend(std::iter::repeat((-0.5, 0.5)).take(n));
    let restricted: Vec<usize> = (0..n).filter(|&i| b[i] != 0.0).collect();
    let names_owned = names.clone();
    let space = PhaseSpace::with_domain(
        "smorodinsky-winternitz",
        &name_refs,
        sample_box,
        move |x, margin| {
            for &i in &restricted {
                if x[i].abs() <= margin {
                    return Some(if margin > 0.0 {
                        format!(
                            "{} = {} is within margin {} of {} = 0",
                            names_owned[i], x[i], margin, names_owned[i]
                        )
                    } else {
                        format!("{} = {} violates {} != 0", names_owned[i], x[i], names_owned[i])
                    });
                }
            }
            None
        },
    );
    let h1 = SmoothFunction::with_grad(
        move |v| 0.5 * (0..n).map(|i| v[i] * v[i]).sum::<f64>(),
        move |v, g| {
            for i in 0..n {
                g[i] = v[i];
                g[n + i] = 0.0;
            }
        },
    );
    let h2 = SmoothFunction::with_grad(
        move |v| -0.5 * (0..n).map(|i| v[i] * v[n + i]).sum::<f64>(),
        move |v, g| {
            for i in 0..n {
                g[i] = -0.5 * v[n + i];
                g[n + i] = -0.5 * v[i];
            }
        },
    );
    let bv = b.to_vec();
    let bg = b.to_vec();
    let h3 = SmoothFunction::with_grad(
        move |v| {
            0.5 * (0..n)
                .map(|i| {
                    let barrier = if bv[i] != 0.0 { bv[i] / (v[i] * v[i]) } else { 0.0 };
                    v[n + i] * v[n + i] + barrier
                })
                .sum::<f64>()
        },
        move |v, g| {
            for i in 0..n {
                g[i] = if bg[i] != 0.0 {
                    -bg[i] / (v[i] * v[i] * v[i])
                } else {
                    0.0
                };
                g[n + i] = v[n + i];
            }
        },
    );
    Realization::new(
        "smorodinsky-winternitz",
        space,
        builtin("sl2").expect("builtin"),
        PoissonBivector::canonical(n),
        vec![h1, h2, h3],
    )
    .expect("three Hamiltonians for sl2")
}

/// Cubic-velocity oscillator on the punctured line. Realizes sl2 on `(x, p)`
/// with `h1 = 4/x`, `h2 = x p`, `h3 = (p^2 x^3 + b0 x)/4`; note the per-point
/// identity `h1 h3 - h2^2 = b0`.
pub fn kummer_schwarz(b0: f64) -> Realization {
    static NAMES: [&str; 2] = ["x", "p"];
    let space = PhaseSpace::with_domain(
        "kummer-schwarz",
        &NAMES,
        vec![(0.7, 1.4), (-0.4, 0.4)],
        nonzero_coordinate_domain(&NAMES, vec![0]),
    );
    let h1 = SmoothFunction::with_grad(
        |v| 4.0 / v[0],
        |v, g| {
            g.copy_from_slice(&[-4.0 / (v[0] * v[0]), 0.0]);
        },
    );
    let h2 = SmoothFunction::with_grad(
        |v| v[0] * v[1],
        |v, g| {
            g.copy_from_slice(&[v[1], v[0]]);
        },
    );
    let h3 = SmoothFunction::with_grad(
        move |v| 0.25 * (v[1] * v[1] * v[0] * v[0] * v[0] + b0 * v[0]),
        move |v, g| {
            g.copy_from_slice(&[
                0.25 * (3.0 * v[1] * v[1] * v[0] * v[0] + b0),
                0.5 * v[1] * v[0] * v[0] * v[0],
            ]);
        },
    );
    Realization::new(
        "kummer-schwarz",
        space,
        builtin("sl2").expect("builtin"),
        PoissonBivector::canonical(1),
        vec![h1, h2, h3],
    )
    .expect("three Hamiltonians for sl2")
}

/// Hamiltonian form of the second-order equation with quadratic drift.
/// Realizes the six-dimensional algebra `h6` on the half plane `p < 0` with
/// `h1 = -2 sqrt(-p)`, `h2 = p`, `h3 = x p`, `h4 = x^2 p`,
/// `h5 = -2 x sqrt(-p)`, `h6 = 1`.
pub fn second_order_riccati() -> Realization {
    let space = PhaseSpace::with_domain(
        "second-order-riccati",
        &["x", "p"],
        vec![(-1.0, 1.0), (-1.5, -0.5)],
        |v, margin| {
            if v[1] < -margin {
                None
            } else if margin > 0.0 {
                Some(format!("p = {} is within margin {} of p = 0", v[1], margin))
            } else {
                Some(format!("p = {} violates p < 0", v[1]))
            }
        },
    );
    let h1 = SmoothFunction::with_grad(
        |v| -2.0 * (-v[1]).sqrt(),
        |v, g| {
            g.copy_from_slice(&[0.0, 1.0 / (-v[1]).sqrt()]);
        },
    );
    let h2 = SmoothFunction::with_grad(
        |v| v[1],
        |_, g| {
            g.copy_from_slice(&[0.0, 1.0]);
        },
    );
    let h3 = SmoothFunction::with_grad(
        |v| v[0] * v[1],
        |v, g| {
            g.copy_from_slice(&[v[1], v[0]]);
        },
    );
    let h4 = SmoothFunction::with_grad(
        |v| v[0] * v[0] * v[1],
        |v, g| {
            g.copy_from_slice(&[2.0 * v[0] * v[1], v[0] * v[0]]);
        },
    );
    let h5 = SmoothFunction::with_grad(
        |v| -2.0 * v[0] * (-v[1]).sqrt(),
        |v, g| {
            let s = (-v[1]).sqrt();
            g.copy_from_slice(&[-2.0 * s, v[0] / s]);
        },
    );
    let h6 = SmoothFunction::with_grad(
        |_| 1.0,
        |_, g| {
            g.fill(0.0);
        },
    );
    Realization::new(
        "second-order-riccati",
        space,
        builtin("h6").expect("builtin"),
        PoissonBivector::canonical(1),
        vec![h1, h2, h3, h4, h5, h6],
    )
    .expect("six Hamiltonians for h6")
}

/// Guard distance from the chart boundary `|x| = 1` inside which integration
/// refuses to continue.
pub const TRIG_BOUNDARY_GUARD: f64 = 1e-6;

/// Spin-like system on the open strip `|x| < 1`. Realizes su2 on `(x, p)`
/// with `h1 = -sqrt(1-x^2) cos p`, `h2 = -sqrt(1-x^2) sin p`, `h3 = x`.
/// Points within `1e-6` of `|x| = 1` count as outside the domain, so
/// trajectories abort with a domain error instead of hitting the chart edge.
pub fn trig_su2() -> Realization {
    let space = PhaseSpace::with_domain(
        "trig-su2",
        &["x", "p"],
        vec![(-0.6, 0.6), (-std::f64::consts::PI, std::f64::consts::PI)],
        |v, margin| {
            let limit = 1.0 - TRIG_BOUNDARY_GUARD - margin;
            if v[0].abs() < limit {
                None
            } else {
                Some(format!("x = {} violates |x| < 1 - 1e-6", v[0]))
            }
        },
    );
    let h1 = SmoothFunction::with_grad(
        |v| -(1.0 - v[0] * v[0]).sqrt() * v[1].cos(),
        |v, g| {
            let w = (1.0 - v[0] * v[0]).sqrt();
            g.copy_from_slice(&[v[0] * v[1].cos() / w, w * v[1].sin()]);
        },
    );
    let h2 = SmoothFunction::with_grad(
        |v| -(1.0 - v[0] * v[0]).sqrt() * v[1].sin(),
        |v, g| {
            let w = (1.0 - v[0] * v[0]).sqrt();
            g.copy_from_slice(&[v[0] * v[1].sin() / w, -w * v[1].cos()]);
        },
    );
    let h3 = SmoothFunction::with_grad(
        |v| v[0],
        |_, g| {
            g.copy_from_slice(&[1.0, 0.0]);
        },
    );
    Realization::new(
        "trig-su2",
        space,
        builtin("su2").expect("builtin"),
        PoissonBivector::canonical(1),
        vec![h1, h2, h3],
    )
    .expect("three Hamiltonians for su2")
}

fn riccati4_space() -> PhaseSpace {
    static NAMES: [&str; 4] = ["x1", "x2", "x3", "x4"];
    PhaseSpace::with_domain(
        "riccati4",
        &NAMES,
        vec![(-1.2, -0.2); 4],
        |x, margin| {
            for i in 0..4 {
                for j in (i + 1)..4 {
                    if (x[i] - x[j]).abs() <= margin {
                        return Some(if margin > 0.0 {
                            format!(
                                "x{} - x{} = {} is within margin {} of coincidence",
                                i + 1,
                                j + 1,
                                x[i] - x[j],
                                margin
                            )
                        } else {
                            format!(
                                "x{} = x{} = {} violates pairwise distinctness",
                                i + 1,
                                j + 1,
                                x[i]
                            )
                        });
                    }
                }
            }
            None
        },
    )
}

/// Four scalar quadratic-drift equations sharing coefficients, on the open
/// set of pairwise distinct `(x1, x2, x3, x4)`. First Poisson structure:
/// symplectic on the pairs `(x1, x2)` and `(x3, x4)` with
/// `Lambda^{12} = (x1-x2)^2`, `Lambda^{34} = (x3-x4)^2`, and
/// `h1 = 1/(x1-x2) + 1/(x3-x4)`,
/// `h2 = ((x1+x2)/(x1-x2) + (x3+x4)/(x3-x4))/2`,
/// `h3 = x1 x2/(x1-x2) + x3 x4/(x3-x4)`.
pub fn riccati4_first() -> Realization {
    let lambda = PoissonBivector::new(4, |x, out| {
        out.fill(0.0);
        let u = x[0] - x[1];
        let s = x[2] - x[3];
        out[1] = u * u;
        out[4] = -u * u;
        out[2 * 4 + 3] = s * s;
        out[3 * 4 + 2] = -s * s;
    });
    let h1 = SmoothFunction::with_grad(
        |x| 1.0 / (x[0] - x[1]) + 1.0 / (x[2] - x[3]),
        |x, g| {
            let u2 = (x[0] - x[1]) * (x[0] - x[1]);
            let s2 = (x[2] - x[3]) * (x[2] - x[3]);
            g.copy_from_slice(&[-1.0 / u2, 1.0 / u2, -1.0 / s2, 1.0 / s2]);
        },
    );
    let h2 = SmoothFunction::with_grad(
        |x| 0.5 * ((x[0] + x[1]) / (x[0] - x[1]) + (x[2] + x[3]) / (x[2] - x[3])),
        |x, g| {
            let u2 = (x[0] - x[1]) * (x[0] - x[1]);
            let s2 = (x[2] - x[3]) * (x[2] - x[3]);
            g.copy_from_slice(&[-x[1] / u2, x[0] / u2, -x[3] / s2, x[2] / s2]);
        },
    );
    let h3 = SmoothFunction::with_grad(
        |x| x[0] * x[1] / (x[0] - x[1]) + x[2] * x[3] / (x[2] - x[3]),
        |x, g| {
            let u2 = (x[0] - x[1]) * (x[0] - x[1]);
            let s2 = (x[2] - x[3]) * (x[2] - x[3]);
            g.copy_from_slice(&[
                -x[1] * x[1] / u2,
                x[0] * x[0] / u2,
                -x[3] * x[3] / s2,
                x[2] * x[2] / s2,
            ]);
        },
    );
    Realization::new(
        "riccati4",
        riccati4_space(),
        builtin("sl2").expect("builtin"),
        lambda,
        vec![h1, h2, h3],
    )
    .expect("three Hamiltonians for sl2")
}

/// Second Poisson structure on the same four-equation system: the inverse of
/// the symplectic form `Omega_{ij} = 1/(x_i - x_j)^2` (for `i < j`), with
/// `h1 = sum_{i<j} 1/(x_i-x_j)`,
/// `h2 = sum_{i<j} (x_i+x_j)/(x_i-x_j) / 2`,
/// `h3 = sum_{i<j} x_i x_j/(x_i-x_j)`.
pub fn riccati4_second() -> Realization {
    let lambda = PoissonBivector::new(4, |x, out| {
        let mut omega = [0.0; 16];
        for i in 0..4 {
            for j in (i + 1)..4 {
                let d = x[i] - x[j];
                let w = 1.0 / (d * d);
                omega[i * 4 + j] = w;
                omega[j * 4 + i] = -w;
            }
        }
        match invert(&omega, 4) {
            Some(inv) => {
                for (o, v) in out.iter_mut().zip(inv) {
                    *o = -v;
                }
            }
            None => out.fill(f64::NAN),
        }
    });
    let pair_sum = |x: &[f64], f: &dyn Fn(f64, f64) -> f64| -> f64 {
        let mut acc = 0.0;
        for i in 0..4 {
            for j in (i + 1)..4 {
                acc += f(x[i], x[j]);
            }
        }
        acc
    };
    let pair_grad = |x: &[f64], g: &mut [f64], di: &dyn Fn(f64, f64) -> f64, dj: &dyn Fn(f64, f64) -> f64| {
        g.fill(0.0);
        for i in 0..4 {
            for j in (i + 1)..4 {
                g[i] += di(x[i], x[j]);
                g[j] += dj(x[i], x[j]);
            }
        }
    };
    let h1 = SmoothFunction::with_grad(
        move |x| pair_sum(x, &|xi, xj| 1.0 / (xi - xj)),
        move |x, g| {
            pair_grad(
                x,
                g,
                &|xi, xj| -1.0 / ((xi - xj) * (xi - xj)),
                &|xi, xj| 1.0 / ((xi - xj) * (xi - xj)),
            );
        },
    );
    let h2 = SmoothFunction::with_grad(
        move |x| 0.5 * pair_sum(x, &|xi, xj| (xi + xj) / (xi - xj)),
        move |x, g| {
            pair_grad(
                x,
                g,
                &|xi, xj| -xj / ((xi - xj) * (xi - xj)),
                &|xi, xj| xi / ((xi - xj) * (xi - xj)),
            );
        },
    );
    let h3 = SmoothFunction::with_grad(
        move |x| pair_sum(x, &|xi, xj| xi * xj / (xi - xj)),
        move |x, g| {
            pair_grad(
                x,
                g,
                &|xi, xj| -xj * xj / ((xi - xj) * (xi - xj)),
                &|xi, xj| xi * xi / ((xi - xj) * (xi - xj)),
            );
        },
    );
    Realization::new(
        "riccati4 (second structure)",
        riccati4_space(),
        builtin("sl2").expect("builtin"),
        lambda,
        vec![h1, h2, h3],
    )
    .expect("three Hamiltonians for sl2")
}
