//! Exact polynomials on copies of the dual of a Lie algebra.
//!
//! A [`SymPoly`] is a polynomial with rational coefficients in the variables
//! `v<alpha>_<a>`, where `alpha = 1..=r` indexes the generators of an algebra
//! of dimension `r` and `a = 1..=m` indexes the tensor copy. The bracket of
//! generators induced by structure constants `c` extends to polynomials by
//!
//! `{P, Q} = sum_a sum_{alpha,beta,gamma} c_{alpha,beta,gamma} v<gamma>_<a>
//!           dP/dv<alpha>_<a> dQ/dv<beta>_<a>`,
//!
//! acting copy by copy. The coproduct `v<alpha> -> sum_a v<alpha>_<a>`
//! extends multiplicatively and commutes with the bracket, which is what
//! makes polynomial Casimirs a factory for invariants of diagonally
//! prolonged systems. Everything in this module is exact.

mod parse;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use rand::Rng;
use thiserror::Error;

use crate::algebra::StructureConstants;
use crate::exact::{format_rat, kernel_basis, rat_int, rat_to_f64, Rat};

/// Errors from polynomial construction and operations.
#[derive(Debug, Error)]
pub enum PolyError {
    #[error("generator index {index} out of range 1..={r}")]
    GeneratorOutOfRange { index: usize, r: usize },
    #[error("copy index {index} out of range 1..={m}")]
    CopyOutOfRange { index: usize, m: usize },
    #[error("operands disagree: left has (r={lr}, m={lm}), right has (r={rr}, m={rm})")]
    ShapeMismatch {
        lr: usize,
        lm: usize,
        rr: usize,
        rm: usize,
    },
    #[error("polynomial has r={got}, but the algebra has dimension {expected}")]
    AlgebraMismatch { got: usize, expected: usize },
    #[error("operation requires a single-copy polynomial (m = 1), got m = {m}")]
    NotSingleCopy { m: usize },
    #[error("cannot restrict to {target} copies: polynomial lives on {m}")]
    CannotShrink { target: usize, m: usize },
    #[error("{0:?} is not a permutation of 1..={1}")]
    BadPermutation(Vec<usize>, usize),
    #[error("monomial basis has {count} elements, exceeding the cap {cap}")]
    TooManyMonomials { count: usize, cap: usize },
    #[error("parse error at byte {pos}: {message}")]
    Parse { pos: usize, message: String },
}

/// Exponent vector of one monomial, copy-major: the exponent of
/// `v<alpha>_<a>` sits at `exps[(a-1)*r + (alpha-1)]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mono {
    deg: u32,
    exps: Vec<u32>,
}

impl Mono {
    fn constant(r: usize, m: usize) -> Self {
        Mono {
            deg: 0,
            exps: vec![0; r * m],
        }
    }

    fn from_exps(exps: Vec<u32>) -> Self {
        let deg = exps.iter().sum();
        Mono { deg, exps }
    }

    /// Total degree.
    pub fn degree(&self) -> u32 {
        self.deg
    }

    /// Exponent of `v<alpha>_<a>` (1-based indices).
    pub fn exponent(&self, r: usize, alpha: usize, a: usize) -> u32 {
        self.exps[(a - 1) * r + (alpha - 1)]
    }

    /// Iterates `(alpha, a, exponent)` over variables with nonzero exponent.
    pub fn iter_nonzero(&self, r: usize) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        self.exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(move |(idx, &e)| (idx % r + 1, idx / r + 1, e))
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        // Graded lexicographic: degree first, then the exponent vector.
        self.deg
            .cmp(&other.deg)
            .then_with(|| self.exps.cmp(&other.exps))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Polynomial with exact rational coefficients in the variables
/// `v<alpha>_<a>`, `alpha = 1..=r`, `a = 1..=m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymPoly {
    r: usize,
    m: usize,
    terms: BTreeMap<Mono, Rat>,
}

impl SymPoly {
    /// The zero polynomial on `m` copies of an `r`-dimensional dual space.
    pub fn zero(r: usize, m: usize) -> Self {
        SymPoly {
            r,
            m,
            terms: BTreeMap::new(),
        }
    }

    /// The constant polynomial `value`.
    pub fn constant(r: usize, m: usize, value: Rat) -> Self {
        let mut p = SymPoly::zero(r, m);
        if !value.is_zero() {
            p.terms.insert(Mono::constant(r, m), value);
        }
        p
    }

    /// The constant polynomial `1`.
    pub fn one(r: usize, m: usize) -> Self {
        SymPoly::constant(r, m, rat_int(1))
    }

    /// The generator variable `v<alpha>_<a>`.
    pub fn var(r: usize, m: usize, alpha: usize, a: usize) -> Result<Self, PolyError> {
        if alpha == 0 || alpha > r {
            return Err(PolyError::GeneratorOutOfRange { index: alpha, r });
        }
        if a == 0 || a > m {
            return Err(PolyError::CopyOutOfRange { index: a, m });
        }
        let mut exps = vec![0u32; r * m];
        exps[(a - 1) * r + (alpha - 1)] = 1;
        let mut p = SymPoly::zero(r, m);
        p.terms.insert(Mono::from_exps(exps), rat_int(1));
        Ok(p)
    }

    /// Number of generators per copy.
    pub fn r(&self) -> usize {
        self.r
    }

    /// Number of copies.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree (0 for the zero polynomial).
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Mono::degree).max().unwrap_or(0)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Coefficient of the constant monomial.
    pub fn constant_term(&self) -> Rat {
        self.terms
            .get(&Mono::constant(self.r, self.m))
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    /// Iterates `(monomial, coefficient)` in ascending graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Rat)> {
        self.terms.iter()
    }

    fn check_shape(&self, other: &Self) -> Result<(), PolyError> {
        if self.r != other.r || self.m != other.m {
            return Err(PolyError::ShapeMismatch {
                lr: self.r,
                lm: self.m,
                rr: other.r,
                rm: other.m,
            });
        }
        Ok(())
    }

    fn insert_term(&mut self, mono: Mono, coeff: Rat) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(mono) {
            Entry::Vacant(e) => {
                e.insert(coeff);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_shape(other)?;
        let mut out = self.clone();
        for (mono, coeff) in &other.terms {
            out.insert_term(mono.clone(), coeff.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for coeff in out.terms.values_mut() {
            *coeff = -coeff.clone();
        }
        out
    }

    pub fn scale(&self, factor: &Rat) -> Self {
        if factor.is_zero() {
            return SymPoly::zero(self.r, self.m);
        }
        let mut out = self.clone();
        for coeff in out.terms.values_mut() {
            *coeff *= factor;
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_shape(other)?;
        let mut out = SymPoly::zero(self.r, self.m);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let exps: Vec<u32> = ma
                    .exps
                    .iter()
                    .zip(&mb.exps)
                    .map(|(x, y)| x + y)
                    .collect();
                out.insert_term(Mono::from_exps(exps), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = SymPoly::one(self.r, self.m);
        for _ in 0..e {
            out = out.mul(self).expect("shape preserved");
        }
        out
    }

    /// Partial derivative with respect to `v<alpha>_<a>`.
    pub fn partial(&self, alpha: usize, a: usize) -> Result<Self, PolyError> {
        if alpha == 0 || alpha > self.r {
            return Err(PolyError::GeneratorOutOfRange {
                index: alpha,
                r: self.r,
            });
        }
        if a == 0 || a > self.m {
            return Err(PolyError::CopyOutOfRange { index: a, m: self.m });
        }
        let idx = (a - 1) * self.r + (alpha - 1);
        let mut out = SymPoly::zero(self.r, self.m);
        for (mono, coeff) in &self.terms {
            let e = mono.exps[idx];
            if e == 0 {
                continue;
            }
            let mut exps = mono.exps.clone();
            exps[idx] -= 1;
            out.insert_term(Mono::from_exps(exps), coeff * rat_int(e as i64));
        }
        Ok(out)
    }

    /// Direct evaluation at `vals`, laid out copy-major like the exponent
    /// vectors: `vals[(a-1)*r + (alpha-1)]` is the value of `v<alpha>_<a>`.
    pub fn eval_f64(&self, vals: &[f64]) -> f64 {
        assert_eq!(vals.len(), self.r * self.m, "value vector length");
        let mut acc = 0.0;
        for (mono, coeff) in &self.terms {
            let mut term = rat_to_f64(coeff);
            for (idx, &e) in mono.exps.iter().enumerate() {
                if e > 0 {
                    term *= vals[idx].powi(e as i32);
                }
            }
            acc += term;
        }
        acc
    }

    /// Poisson bracket induced by the structure constants, acting copy by
    /// copy. Both operands must share `(r, m)` and `r` must equal the algebra
    /// dimension.
    pub fn poisson_bracket(
        &self,
        other: &Self,
        sc: &StructureConstants,
    ) -> Result<Self, PolyError> {
        self.check_shape(other)?;
        if self.r != sc.dim() {
            return Err(PolyError::AlgebraMismatch {
                got: self.r,
                expected: sc.dim(),
            });
        }
        let mut out = SymPoly::zero(self.r, self.m);
        for a in 1..=self.m {
            // Partials are cheap to compute and most are zero; cache per copy.
            let dp: Vec<SymPoly> = (1..=self.r)
                .map(|alpha| self.partial(alpha, a).expect("indices validated"))
                .collect();
            let dq: Vec<SymPoly> = (1..=self.r)
                .map(|beta| other.partial(beta, a).expect("indices validated"))
                .collect();
            for (alpha, beta, gamma, cval) in sc.completed_nonzeros() {
                if dp[alpha - 1].is_zero() || dq[beta - 1].is_zero() {
                    continue;
                }
                let v_gamma = SymPoly::var(self.r, self.m, gamma, a).expect("indices validated");
                let prod = dp[alpha - 1]
                    .mul(&dq[beta - 1])
                    .and_then(|p| p.mul(&v_gamma))
                    .expect("shape preserved");
                out = out.add(&prod.scale(&cval)).expect("shape preserved");
            }
        }
        Ok(out)
    }

    /// Coproduct onto `m_target` copies: each variable `v<alpha>` of a
    /// single-copy polynomial is replaced by `sum_a v<alpha>_<a>`, extended
    /// multiplicatively.
    pub fn coproduct(&self, m_target: usize) -> Result<Self, PolyError> {
        if self.m != 1 {
            return Err(PolyError::NotSingleCopy { m: self.m });
        }
        let r = self.r;
        let sums: Vec<SymPoly> = (1..=r)
            .map(|alpha| {
                let mut s = SymPoly::zero(r, m_target);
                for a in 1..=m_target {
                    s = s
                        .add(&SymPoly::var(r, m_target, alpha, a).expect("valid indices"))
                        .expect("shape preserved");
                }
                s
            })
            .collect();
        let mut out = SymPoly::zero(r, m_target);
        for (mono, coeff) in &self.terms {
            let mut term = SymPoly::constant(r, m_target, coeff.clone());
            for (alpha, _a, e) in mono.iter_nonzero(r) {
                term = term.mul(&sums[alpha - 1].pow(e)).expect("shape preserved");
            }
            out = out.add(&term).expect("shape preserved");
        }
        Ok(out)
    }

    /// Reinterprets the polynomial on `m_target >= m` copies, keeping every
    /// copy index fixed.
    pub fn embed(&self, m_target: usize) -> Result<Self, PolyError> {
        if m_target < self.m {
            return Err(PolyError::CannotShrink {
                target: m_target,
                m: self.m,
            });
        }
        let mut out = SymPoly::zero(self.r, m_target);
        for (mono, coeff) in &self.terms {
            let mut exps = vec![0u32; self.r * m_target];
            exps[..self.r * self.m].copy_from_slice(&mono.exps);
            out.insert_term(Mono::from_exps(exps), coeff.clone());
        }
        Ok(out)
    }

    /// Relabels copies: `v<alpha>_<a>` becomes `v<alpha>_<perm[a-1]>`.
    /// `perm` must be a permutation of `1..=m`.
    pub fn permute_copies(&self, perm: &[usize]) -> Result<Self, PolyError> {
        let m = self.m;
        let mut seen = vec![false; m];
        if perm.len() != m {
            return Err(PolyError::BadPermutation(perm.to_vec(), m));
        }
        for &img in perm {
            if img == 0 || img > m || seen[img - 1] {
                return Err(PolyError::BadPermutation(perm.to_vec(), m));
            }
            seen[img - 1] = true;
        }
        let mut out = SymPoly::zero(self.r, m);
        for (mono, coeff) in &self.terms {
            let mut exps = vec![0u32; self.r * m];
            for a in 1..=m {
                let target = perm[a - 1];
                for alpha in 1..=self.r {
                    exps[(target - 1) * self.r + (alpha - 1)] =
                        mono.exps[(a - 1) * self.r + (alpha - 1)];
                }
            }
            out.insert_term(Mono::from_exps(exps), coeff.clone());
        }
        Ok(out)
    }

    /// The transposition of copies `i` and `j` on `m` copies, as a `perm`
    /// argument for [`permute_copies`](Self::permute_copies).
    pub fn transposition(m: usize, i: usize, j: usize) -> Vec<usize> {
        let mut perm: Vec<usize> = (1..=m).collect();
        perm.swap(i - 1, j - 1);
        perm
    }

    /// Exact test that a single-copy polynomial brackets to zero with every
    /// generator.
    pub fn is_casimir(&self, sc: &StructureConstants) -> Result<bool, PolyError> {
        if self.m != 1 {
            return Err(PolyError::NotSingleCopy { m: self.m });
        }
        for alpha in 1..=self.r {
            let v = SymPoly::var(self.r, 1, alpha, 1)?;
            if !self.poisson_bracket(&v, sc)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Parses the canonical text format (and general `+ - * ^ ( )`
    /// expressions in the same variables).
    pub fn parse(input: &str, r: usize, m: usize) -> Result<Self, PolyError> {
        parse::parse_poly(input, r, m)
    }
}

impl fmt::Display for SymPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        // Descending graded-lex, so constants come last.
        for (mono, coeff) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if mono.degree() == 0 {
                write!(f, "{}", format_rat(coeff))?;
                continue;
            }
            write!(f, "{} * ", format_rat(coeff))?;
            let mut first_var = true;
            for (alpha, a, e) in mono.iter_nonzero(self.r) {
                if !first_var {
                    write!(f, "*")?;
                }
                first_var = false;
                if self.m == 1 {
                    write!(f, "v{alpha}")?;
                } else {
                    write!(f, "v{alpha}_{a}")?;
                }
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}

/// Basis of the polynomial Casimirs up to a degree bound, with the constant
/// polynomial listed apart from the nontrivial elements (which all have zero
/// constant term).
#[derive(Debug, Clone)]
pub struct CasimirBasis {
    pub constant: SymPoly,
    pub nontrivial: Vec<SymPoly>,
}

impl CasimirBasis {
    /// Dimension of the solution space, constants included.
    pub fn dim(&self) -> usize {
        1 + self.nontrivial.len()
    }
}

/// Default cap on the monomial basis size for [`find_casimirs`].
pub const DEFAULT_MONOMIAL_CAP: usize = 5000;

/// Solves exactly for all polynomial Casimirs of degree at most `dmax`.
///
/// The search space is the monomial basis of polynomials in `r` variables of
/// total degree `<= dmax`; its size `binom(r + dmax, dmax)` must not exceed
/// `cap` (pass [`DEFAULT_MONOMIAL_CAP`] for the default). The kernel of the
/// linear map `P -> ({P, v_1}, ..., {P, v_r})` is computed over the
/// rationals, so membership is exact.
pub fn find_casimirs(
    sc: &StructureConstants,
    dmax: u32,
    cap: usize,
) -> Result<CasimirBasis, PolyError> {
    let r = sc.dim();
    let monos = monomials_up_to(r, dmax);
    if monos.len() > cap {
        return Err(PolyError::TooManyMonomials {
            count: monos.len(),
            cap,
        });
    }
    let index: BTreeMap<Mono, usize> = monos
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, mono)| (mono, i))
        .collect();

    // One block of constraint rows per generator; bracketing with a linear
    // element preserves total degree, so results stay inside the basis.
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    for alpha in 1..=r {
        let v_alpha = SymPoly::var(r, 1, alpha, 1).expect("valid indices");
        let mut block: BTreeMap<Mono, Vec<Rat>> = BTreeMap::new();
        for (j, mono) in monos.iter().enumerate() {
            let mut p = SymPoly::zero(r, 1);
            p.insert_term(mono.clone(), rat_int(1));
            let bracket = p.poisson_bracket(&v_alpha, sc)?;
            for (bm, bc) in bracket.terms() {
                debug_assert!(index.contains_key(bm), "bracket left the basis");
                let row = block
                    .entry(bm.clone())
                    .or_insert_with(|| vec![Rat::zero(); monos.len()]);
                row[j] = bc.clone();
            }
        }
        rows.extend(block.into_values());
    }

    let kernel = kernel_basis(&rows, monos.len());

    // The constant monomial is always a solution; split it off and leave the
    // remaining basis vectors with zero constant term.
    let const_idx = *index
        .get(&Mono::constant(r, 1))
        .expect("constant monomial present");
    let mut reduced: Vec<Vec<Rat>> = kernel
        .iter()
        .map(|v| {
            let mut w = v.clone();
            w[const_idx] = Rat::zero();
            w
        })
        .collect();
    crate::exact::rref(&mut reduced);
    let nontrivial: Vec<SymPoly> = reduced
        .into_iter()
        .filter(|v| v.iter().any(|c| !c.is_zero()))
        .map(|v| {
            let mut p = SymPoly::zero(r, 1);
            for (j, coeff) in v.into_iter().enumerate() {
                if !coeff.is_zero() {
                    p.insert_term(monos[j].clone(), coeff);
                }
            }
            p
        })
        .collect();

    debug_assert_eq!(nontrivial.len() + 1, kernel.len());
    Ok(CasimirBasis {
        constant: SymPoly::one(r, 1),
        nontrivial,
    })
}

/// All single-copy monomials in `r` variables of total degree `<= dmax`,
/// in ascending graded-lex order.
fn monomials_up_to(r: usize, dmax: u32) -> Vec<Mono> {
    let mut out = Vec::new();
    let mut exps = vec![0u32; r];
    fn rec(out: &mut Vec<Mono>, exps: &mut Vec<u32>, pos: usize, remaining: u32) {
        if pos == exps.len() {
            out.push(Mono::from_exps(exps.clone()));
            return;
        }
        for e in 0..=remaining {
            exps[pos] = e;
            rec(out, exps, pos + 1, remaining - e);
            exps[pos] = 0;
        }
    }
    rec(&mut out, &mut exps, 0, dmax);
    out.sort();
    out
}

/// Random sparse polynomial for randomized identity tests: up to `max_terms`
/// monomials of total degree `<= max_deg` with small rational coefficients.
pub fn random_poly<R: Rng>(rng: &mut R, r: usize, m: usize, max_deg: u32, max_terms: usize) -> SymPoly {
    let mut p = SymPoly::zero(r, m);
    let n_terms = rng.gen_range(1..=max_terms);
    for _ in 0..n_terms {
        let deg = rng.gen_range(0..=max_deg);
        let mut exps = vec![0u32; r * m];
        for _ in 0..deg {
            let idx = rng.gen_range(0..r * m);
            exps[idx] += 1;
        }
        let mut numer = 0i64;
        while numer == 0 {
            numer = rng.gen_range(-4..=4);
        }
        let denom = rng.gen_range(1..=4);
        p.insert_term(Mono::from_exps(exps), crate::exact::rat(numer, denom));
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::builtin;

    fn sl2_casimir() -> SymPoly {
        // v1*v3 - v2^2
        SymPoly::parse("v1*v3 - v2^2", 3, 1).unwrap()
    }

    #[test]
    fn bracket_of_square_with_generator() {
        let sc = builtin("sl2").unwrap();
        let p = SymPoly::parse("v1^2", 3, 1).unwrap();
        let v3 = SymPoly::var(3, 1, 3, 1).unwrap();
        let bracket = p.poisson_bracket(&v3, &sc).unwrap();
        let expected = SymPoly::parse("-4 * v1*v2", 3, 1).unwrap();
        assert_eq!(bracket, expected);
    }

    #[test]
    fn casimirs_of_the_builtins() {
        let sl2 = builtin("sl2").unwrap();
        assert!(sl2_casimir().is_casimir(&sl2).unwrap());
        assert!(!SymPoly::parse("v1*v3", 3, 1).unwrap().is_casimir(&sl2).unwrap());

        let su2 = builtin("su2").unwrap();
        let c = SymPoly::parse("v1^2 + v2^2 + v3^2", 3, 1).unwrap();
        assert!(c.is_casimir(&su2).unwrap());
    }

    #[test]
    fn coproduct_is_a_bracket_morphism_on_the_casimir() {
        let sc = builtin("sl2").unwrap();
        let c2 = sl2_casimir().coproduct(2).unwrap();
        // Delta(C) commutes with every coproduct image Delta(v_alpha).
        for alpha in 1..=3 {
            let dv = SymPoly::var(3, 1, alpha, 1).unwrap().coproduct(2).unwrap();
            assert!(c2.poisson_bracket(&dv, &sc).unwrap().is_zero());
        }
        // ... but not with a single copy of a generator.
        let v1_1 = SymPoly::var(3, 2, 1, 1).unwrap();
        assert!(!c2.poisson_bracket(&v1_1, &sc).unwrap().is_zero());
    }

    #[test]
    fn coproduct_counts_cross_terms() {
        // Delta(v1^2) = (v1_1 + v1_2)^2.
        let p = SymPoly::parse("v1^2", 3, 1).unwrap();
        let d = p.coproduct(2).unwrap();
        let expected = SymPoly::parse("v1_1^2 + 2*v1_1*v1_2 + v1_2^2", 3, 2).unwrap();
        assert_eq!(d, expected);
    }

    #[test]
    fn permute_copies_round_trip() {
        let p = SymPoly::parse("v1_1*v2_2 + v3_3^2", 3, 3).unwrap();
        let perm = SymPoly::transposition(3, 1, 3);
        let q = p.permute_copies(&perm).unwrap();
        let expected = SymPoly::parse("v1_3*v2_2 + v3_1^2", 3, 3).unwrap();
        assert_eq!(q, expected);
        assert_eq!(q.permute_copies(&perm).unwrap(), p);
    }

    #[test]
    fn embed_keeps_copy_indices() {
        let p = SymPoly::parse("v1_1*v1_2", 3, 2).unwrap();
        let q = p.embed(3).unwrap();
        assert_eq!(q.m(), 3);
        assert_eq!(q, SymPoly::parse("v1_1*v1_2", 3, 3).unwrap());
        assert!(p.embed(1).is_err());
    }

    #[test]
    fn partial_derivative_and_eval() {
        let p = SymPoly::parse("3*v1^2*v2 + 1/2*v2", 3, 1).unwrap();
        let dp = p.partial(1, 1).unwrap();
        assert_eq!(dp, SymPoly::parse("6*v1*v2", 3, 1).unwrap());
        let val = p.eval_f64(&[2.0, 3.0, 0.0]);
        assert!((val - (3.0 * 4.0 * 3.0 + 1.5)).abs() < 1e-15);
    }

    #[test]
    fn find_casimirs_sl2_degree_two() {
        let sc = builtin("sl2").unwrap();
        let basis = find_casimirs(&sc, 2, DEFAULT_MONOMIAL_CAP).unwrap();
        assert_eq!(basis.dim(), 2);
        assert_eq!(basis.nontrivial.len(), 1);
        let c = &basis.nontrivial[0];
        assert!(c.is_casimir(&sc).unwrap());
        assert!(c.constant_term().is_zero());
        // The nontrivial element is proportional to v1*v3 - v2^2: check both
        // degree-2 solutions span each other.
        let target = sl2_casimir();
        let product = c.mul(&target).unwrap();
        let c2 = c.mul(c).unwrap();
        let t2 = target.mul(&target).unwrap();
        // c and target proportional iff c^2 * t^2 == (c*t)^2.
        assert_eq!(product.mul(&product).unwrap(), c2.mul(&t2).unwrap());
    }

    #[test]
    fn find_casimirs_h6_degree_one_contains_center() {
        let sc = builtin("h6").unwrap();
        let basis = find_casimirs(&sc, 1, DEFAULT_MONOMIAL_CAP).unwrap();
        assert_eq!(basis.nontrivial.len(), 1);
        let v6 = SymPoly::var(6, 1, 6, 1).unwrap();
        assert_eq!(basis.nontrivial[0], v6);
    }

    #[test]
    fn find_casimirs_respects_cap() {
        let sc = builtin("h6").unwrap();
        assert!(matches!(
            find_casimirs(&sc, 3, 10),
            Err(PolyError::TooManyMonomials { .. })
        ));
    }

    #[test]
    fn display_round_trip() {
        let p = SymPoly::parse("-3/2*v1^2*v3 + v2 + 7", 3, 1).unwrap();
        let text = p.to_string();
        let back = SymPoly::parse(&text, 3, 1).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn display_multi_copy_round_trip() {
        let p = SymPoly::parse("v1_1*v3_2 - 2*v2_1^2*v2_2 + 1/3", 3, 2).unwrap();
        let back = SymPoly::parse(&p.to_string(), 3, 2).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn monomial_count_matches_binomial() {
        // binom(3 + 2, 2) = 10; binom(6 + 3, 3) = 84.
        assert_eq!(monomials_up_to(3, 2).len(), 10);
        assert_eq!(monomials_up_to(6, 3).len(), 84);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let p = SymPoly::parse("v1", 3, 1).unwrap();
        let q = SymPoly::parse("v1", 3, 2).unwrap();
        assert!(matches!(p.add(&q), Err(PolyError::ShapeMismatch { .. })));
    }
}
