//! Finite-dimensional real Lie algebras presented by structure constants.
//!
//! An algebra of dimension `r` is stored as the sparse table of constants
//! `c_{alpha,beta,gamma}` in the basis `v_1, ..., v_r`, meaning
//! `[v_alpha, v_beta] = sum_gamma c_{alpha,beta,gamma} v_gamma`. Generator
//! indices are 1-based everywhere in the public API, matching the notation
//! used in file formats and reports.
//!
//! Entries are recorded exactly as given; antisymmetry is *implied* when only
//! one orientation of a pair is present, but deliberately inconsistent tables
//! can be built and then diagnosed with [`StructureConstants::validate`].

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{format_rat, kernel_basis, parse_rat, rat, rat_int, rat_to_f64, Rat};

/// Errors from constructing or (de)serializing structure constant tables.
#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("generator index {index} out of range 1..={dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("unknown builtin algebra {0:?} (available: {})", builtin_names().join(", "))]
    UnknownBuiltin(String),
    #[error("coefficient vector has length {got}, expected {expected}")]
    CoefficientLength { got: usize, expected: usize },
    #[error("invalid structure constant file: {0}")]
    Format(String),
    #[error("invalid rational in entry [{alpha},{beta},{gamma}]: {source}")]
    BadRational {
        alpha: usize,
        beta: usize,
        gamma: usize,
        source: crate::exact::ParseRatError,
    },
}

/// Sparse, exact table of Lie algebra structure constants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureConstants {
    dim: usize,
    /// Entries exactly as set, keyed by the 1-based triple `(alpha, beta, gamma)`.
    entries: BTreeMap<(usize, usize, usize), Rat>,
}

impl StructureConstants {
    /// Empty (Abelian) algebra of dimension `r`.
    pub fn new(r: usize) -> Self {
        Self {
            dim: r,
            entries: BTreeMap::new(),
        }
    }

    /// Number of generators.
    pub fn dim(&self) -> usize {
        self.dim
    }

    fn check_index(&self, index: usize) -> Result<(), AlgebraError> {
        if index == 0 || index > self.dim {
            Err(AlgebraError::IndexOutOfRange {
                index,
                dim: self.dim,
            })
        } else {
            Ok(())
        }
    }

    /// Records `c_{alpha,beta,gamma} = value` literally. The mirrored entry
    /// `c_{beta,alpha,gamma}` is *not* written; lookups supply the
    /// antisymmetric completion when only one orientation is stored, and
    /// [`validate`](Self::validate) reports pairs stored in both orientations
    /// that fail to be opposite.
    pub fn set(
        &mut self,
        alpha: usize,
        beta: usize,
        gamma: usize,
        value: Rat,
    ) -> Result<(), AlgebraError> {
        self.check_index(alpha)?;
        self.check_index(beta)?;
        self.check_index(gamma)?;
        if value.is_zero() {
            self.entries.remove(&(alpha, beta, gamma));
        } else {
            self.entries.insert((alpha, beta, gamma), value);
        }
        Ok(())
    }

    /// The constant `c_{alpha,beta,gamma}`, antisymmetrically completed: if
    /// only the mirrored orientation was set, its negation is returned.
    pub fn c(&self, alpha: usize, beta: usize, gamma: usize) -> Rat {
        if let Some(v) = self.entries.get(&(alpha, beta, gamma)) {
            return v.clone();
        }
        if alpha != beta {
            if let Some(v) = self.entries.get(&(beta, alpha, gamma)) {
                return -v.clone();
            }
        }
        Rat::zero()
    }

    /// All nonzero constants with the antisymmetric completion applied, i.e.
    /// both orientations of every stored pair. Yields 1-based triples.
    pub fn completed_nonzeros(&self) -> Vec<(usize, usize, usize, Rat)> {
        let mut out = Vec::new();
        for (&(a, b, g), v) in &self.entries {
            out.push((a, b, g, v.clone()));
            if a != b && !self.entries.contains_key(&(b, a, g)) {
                out.push((b, a, g, -v.clone()));
            }
        }
        out
    }

    /// Dense `f64` table `t[(a-1)*r*r + (b-1)*r + (g-1)] = c_{a,b,g}` with the
    /// antisymmetric completion applied. Convenient for numeric inner loops.
    pub fn dense_f64(&self) -> Vec<f64> {
        let r = self.dim;
        let mut t = vec![0.0; r * r * r];
        for (a, b, g, v) in self.completed_nonzeros() {
            t[(a - 1) * r * r + (b - 1) * r + (g - 1)] = rat_to_f64(&v);
        }
        t
    }

    /// Checks antisymmetry (including zero diagonal) and the Jacobi identity,
    /// returning every violation found.
    pub fn validate(&self) -> ValidationReport {
        let r = self.dim;
        let mut report = ValidationReport::default();
        for alpha in 1..=r {
            for beta in alpha..=r {
                for gamma in 1..=r {
                    let sum = self.c(alpha, beta, gamma) + self.c(beta, alpha, gamma);
                    if !sum.is_zero() {
                        report.antisymmetry.push(AntisymmetryViolation {
                            alpha,
                            beta,
                            gamma,
                            sum,
                        });
                    }
                }
            }
        }
        for alpha in 1..=r {
            for beta in (alpha + 1)..=r {
                for gamma in (beta + 1)..=r {
                    for nu in 1..=r {
                        let mut residual = Rat::zero();
                        for mu in 1..=r {
                            residual += self.c(alpha, beta, mu) * self.c(mu, gamma, nu)
                                + self.c(beta, gamma, mu) * self.c(mu, alpha, nu)
                                + self.c(gamma, alpha, mu) * self.c(mu, beta, nu);
                        }
                        if !residual.is_zero() {
                            report.jacobi.push(JacobiViolation {
                                alpha,
                                beta,
                                gamma,
                                nu,
                                residual,
                            });
                        }
                    }
                }
            }
        }
        report
    }

    /// Matrix `M(b)` of the linear flow `df/dt = M(b) f` obeyed by the
    /// coefficients of a time-dependent element `f = sum_alpha f_alpha v_alpha`
    /// that commutes with the evolution generated by `sum_beta b_beta v_beta`:
    /// `M_{alpha,gamma} = -sum_beta b_beta c_{gamma,beta,alpha}`.
    ///
    /// Also classifies the triangularity of `M` for reporting; the shape is
    /// informational and never enforced.
    pub fn adjoint_matrix(&self, b: &[f64]) -> Result<(Vec<Vec<f64>>, Triangularity), AlgebraError> {
        let r = self.dim;
        if b.len() != r {
            return Err(AlgebraError::CoefficientLength {
                got: b.len(),
                expected: r,
            });
        }
        let mut m = vec![vec![0.0; r]; r];
        for (gamma, beta, alpha, cval) in self.completed_nonzeros() {
            m[alpha - 1][gamma - 1] -= b[beta - 1] * rat_to_f64(&cval);
        }
        let tri = Triangularity::classify(&m);
        Ok((m, tri))
    }

    /// Exact basis of the center `{x : [x, v_beta] = 0 for all beta}`,
    /// expressed as coefficient vectors in the generator basis.
    pub fn center_basis(&self) -> Vec<Vec<Rat>> {
        let r = self.dim;
        // Rows indexed by (beta, gamma), columns by alpha:
        // sum_alpha x_alpha c_{alpha,beta,gamma} = 0.
        let mut rows = Vec::with_capacity(r * r);
        for beta in 1..=r {
            for gamma in 1..=r {
                let row: Vec<Rat> = (1..=r).map(|alpha| self.c(alpha, beta, gamma)).collect();
                if row.iter().any(|v| !v.is_zero()) {
                    rows.push(row);
                }
            }
        }
        kernel_basis(&rows, r)
    }

    /// Serializes to the canonical JSON layout, keeping one entry per
    /// unordered generator pair (`alpha < beta`). Assumes a validated table;
    /// inconsistent orientations are folded through the completion rule.
    pub fn to_json_string(&self) -> String {
        let mut c = Vec::new();
        for alpha in 1..=self.dim {
            for beta in (alpha + 1)..=self.dim {
                for gamma in 1..=self.dim {
                    let v = self.c(alpha, beta, gamma);
                    if !v.is_zero() {
                        c.push((alpha, beta, gamma, format_rat(&v)));
                    }
                }
            }
        }
        let doc = ScJson { r: self.dim, c };
        serde_json::to_string_pretty(&doc).expect("structure constant serialization")
    }

    /// Parses the JSON layout produced by [`to_json_string`](Self::to_json_string).
    /// Entries must satisfy `alpha < beta`; values may be strings (`"p/q"`)
    /// or plain integers.
    pub fn from_json_str(s: &str) -> Result<Self, AlgebraError> {
        let doc: ScJson = serde_json::from_str(s).map_err(|e| AlgebraError::Format(e.to_string()))?;
        let mut sc = StructureConstants::new(doc.r);
        for (alpha, beta, gamma, raw) in doc.c {
            if alpha >= beta {
                return Err(AlgebraError::Format(format!(
                    "entry [{alpha},{beta},{gamma}] must have alpha < beta"
                )));
            }
            let value = parse_rat(&raw).map_err(|source| AlgebraError::BadRational {
                alpha,
                beta,
                gamma,
                source,
            })?;
            sc.set(alpha, beta, gamma, value)?;
        }
        Ok(sc)
    }
}

#[derive(Serialize, Deserialize)]
struct ScJson {
    r: usize,
    #[serde(deserialize_with = "deserialize_entries", serialize_with = "serialize_entries")]
    c: Vec<(usize, usize, usize, String)>,
}

fn serialize_entries<S: serde::Serializer>(
    entries: &[(usize, usize, usize, String)],
    ser: S,
) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = ser.serialize_seq(Some(entries.len()))?;
    for (a, b, g, v) in entries {
        seq.serialize_element(&(
            serde_json::json!(a),
            serde_json::json!(b),
            serde_json::json!(g),
            serde_json::json!(v),
        ))?;
    }
    seq.end()
}

/// One raw `[alpha, beta, gamma, "p/q"]` entry before validation.
type RawEntry = (usize, usize, usize, String);

fn deserialize_entries<'de, D: serde::Deserializer<'de>>(
    de: D,
) -> Result<Vec<RawEntry>, D::Error> {
    use serde::de::Error;
    let raw: Vec<Vec<serde_json::Value>> = Vec::deserialize(de)?;
    let mut out = Vec::with_capacity(raw.len());
    for entry in raw {
        if entry.len() != 4 {
            return Err(D::Error::custom("each entry must be [alpha, beta, gamma, value]"));
        }
        let idx = |v: &serde_json::Value| -> Result<usize, D::Error> {
            v.as_u64()
                .map(|u| u as usize)
                .ok_or_else(|| D::Error::custom("generator index must be a positive integer"))
        };
        let value = match &entry[3] {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(n) => n.to_string(),
            _ => return Err(D::Error::custom("value must be a rational string or integer")),
        };
        out.push((idx(&entry[0])?, idx(&entry[1])?, idx(&entry[2])?, value));
    }
    Ok(out)
}

/// A pair of entries breaking `c_{alpha,beta,gamma} = -c_{beta,alpha,gamma}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AntisymmetryViolation {
    pub alpha: usize,
    pub beta: usize,
    pub gamma: usize,
    /// `c_{alpha,beta,gamma} + c_{beta,alpha,gamma}`, nonzero by construction.
    pub sum: Rat,
}

/// A quadruple at which the Jacobi identity fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JacobiViolation {
    pub alpha: usize,
    pub beta: usize,
    pub gamma: usize,
    pub nu: usize,
    pub residual: Rat,
}

/// Outcome of [`StructureConstants::validate`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub antisymmetry: Vec<AntisymmetryViolation>,
    pub jacobi: Vec<JacobiViolation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.antisymmetry.is_empty() && self.jacobi.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(f, "valid Lie algebra (antisymmetry and Jacobi hold)");
        }
        for v in &self.antisymmetry {
            writeln!(
                f,
                "antisymmetry violated at (alpha={}, beta={}, gamma={}): c + c^T = {}",
                v.alpha,
                v.beta,
                v.gamma,
                format_rat(&v.sum)
            )?;
        }
        for v in &self.jacobi {
            writeln!(
                f,
                "Jacobi violated at (alpha={}, beta={}, gamma={}, nu={}): residual = {}",
                v.alpha,
                v.beta,
                v.gamma,
                v.nu,
                format_rat(&v.residual)
            )?;
        }
        Ok(())
    }
}

/// Shape classification of an adjoint-flow matrix. Informational only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Triangularity {
    Diagonal,
    LowerTriangular,
    UpperTriangular,
    General,
}

impl Triangularity {
    fn classify(m: &[Vec<f64>]) -> Self {
        let n = m.len();
        let above = (0..n).any(|i| (i + 1..n).any(|j| m[i][j] != 0.0));
        let below = (0..n).any(|i| (0..i).any(|j| m[i][j] != 0.0));
        match (below, above) {
            (false, false) => Triangularity::Diagonal,
            (true, false) => Triangularity::LowerTriangular,
            (false, true) => Triangularity::UpperTriangular,
            (true, true) => Triangularity::General,
        }
    }
}

/// Names accepted by [`builtin`].
pub fn builtin_names() -> Vec<&'static str> {
    vec!["sl2", "su2", "h6"]
}

/// Returns one of the built-in algebras:
///
/// * `"sl2"`: `[v1,v2] = -v1`, `[v1,v3] = -2 v2`, `[v2,v3] = -v3`;
/// * `"su2"`: `[v1,v2] = -v3`, `[v2,v3] = -v1`, `[v3,v1] = -v2`;
/// * `"h6"`: the 6-dimensional two-photon algebra used by the second-order
///   Riccati system (generator `v6` central).
pub fn builtin(name: &str) -> Result<StructureConstants, AlgebraError> {
    let mut sc;
    match name {
        "sl2" => {
            sc = StructureConstants::new(3);
            sc.set(1, 2, 1, rat_int(-1))?;
            sc.set(1, 3, 2, rat_int(-2))?;
            sc.set(2, 3, 3, rat_int(-1))?;
        }
        "su2" => {
            sc = StructureConstants::new(3);
            sc.set(1, 2, 3, rat_int(-1))?;
            sc.set(1, 3, 2, rat_int(1))?;
            sc.set(2, 3, 1, rat_int(-1))?;
        }
        "h6" => {
            sc = StructureConstants::new(6);
            sc.set(1, 3, 1, rat(-1, 2))?;
            sc.set(1, 4, 5, rat_int(-1))?;
            sc.set(1, 5, 6, rat_int(2))?;
            sc.set(2, 3, 2, rat_int(-1))?;
            sc.set(2, 4, 3, rat_int(-2))?;
            sc.set(2, 5, 1, rat_int(-1))?;
            sc.set(3, 4, 4, rat_int(-1))?;
            sc.set(3, 5, 5, rat(-1, 2))?;
        }
        other => return Err(AlgebraError::UnknownBuiltin(other.to_string())),
    }
    Ok(sc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_validate_clean() {
        for name in builtin_names() {
            let sc = builtin(name).unwrap();
            let report = sc.validate();
            assert!(report.is_valid(), "{name}: {report}");
        }
    }

    #[test]
    fn inconsistent_orientations_are_reported() {
        let mut sc = StructureConstants::new(2);
        sc.set(1, 2, 1, rat_int(1)).unwrap();
        sc.set(2, 1, 1, rat_int(1)).unwrap();
        let report = sc.validate();
        assert_eq!(report.antisymmetry.len(), 1);
        let v = &report.antisymmetry[0];
        assert_eq!((v.alpha, v.beta, v.gamma), (1, 2, 1));
        assert_eq!(v.sum, rat_int(2));
    }

    #[test]
    fn nonzero_diagonal_is_an_antisymmetry_violation() {
        let mut sc = StructureConstants::new(2);
        sc.set(1, 1, 2, rat_int(1)).unwrap();
        let report = sc.validate();
        assert!(!report.antisymmetry.is_empty());
    }

    #[test]
    fn jacobi_violation_is_reported() {
        // [v1,v2] = v3 and [v1,v3] = v1 force [[v3,v1],v2] = -v3 with the
        // other two double brackets vanishing, so Jacobi fails at nu = 3.
        let mut sc = StructureConstants::new(3);
        sc.set(1, 2, 3, rat_int(1)).unwrap();
        sc.set(1, 3, 1, rat_int(1)).unwrap();
        let report = sc.validate();
        assert!(report.antisymmetry.is_empty());
        assert_eq!(report.jacobi.len(), 1);
        let v = &report.jacobi[0];
        assert_eq!((v.alpha, v.beta, v.gamma, v.nu), (1, 2, 3, 3));
    }

    #[test]
    fn adjoint_matrix_sl2_third_generator() {
        let sc = builtin("sl2").unwrap();
        let (m, tri) = sc.adjoint_matrix(&[0.0, 0.0, 1.0]).unwrap();
        let expected = [[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        for (row, exp) in m.iter().zip(expected.iter()) {
            assert_eq!(row.as_slice(), exp.as_slice());
        }
        assert_eq!(tri, Triangularity::LowerTriangular);
    }

    #[test]
    fn center_of_h6_is_spanned_by_v6() {
        let sc = builtin("h6").unwrap();
        let basis = sc.center_basis();
        assert_eq!(basis.len(), 1);
        let mut expected = vec![Rat::zero(); 6];
        expected[5] = rat_int(1);
        assert_eq!(basis[0], expected);
    }

    #[test]
    fn center_of_sl2_is_trivial_and_abelian_center_is_full() {
        assert!(builtin("sl2").unwrap().center_basis().is_empty());
        assert_eq!(StructureConstants::new(3).center_basis().len(), 3);
    }

    #[test]
    fn json_round_trip() {
        let sc = builtin("h6").unwrap();
        let text = sc.to_json_string();
        let back = StructureConstants::from_json_str(&text).unwrap();
        assert_eq!(sc, back);
    }

    #[test]
    fn json_rejects_wrong_orientation() {
        let err = StructureConstants::from_json_str(r#"{"r":2,"c":[[2,1,1,"1"]]}"#).unwrap_err();
        assert!(matches!(err, AlgebraError::Format(_)));
    }

    #[test]
    fn json_accepts_integer_values() {
        let sc = StructureConstants::from_json_str(r#"{"r":2,"c":[[1,2,1,-1]]}"#).unwrap();
        assert_eq!(sc.c(1, 2, 1), rat_int(-1));
        assert_eq!(sc.c(2, 1, 1), rat_int(1));
    }

    #[test]
    fn unknown_builtin_is_an_error() {
        assert!(matches!(
            builtin("so17"),
            Err(AlgebraError::UnknownBuiltin(_))
        ));
    }
}
