//! Exact rational scalars and small dense exact linear algebra.
//!
//! All algebraic bookkeeping in this crate (structure constants, polynomial
//! coefficients, Casimir solves) is done over arbitrary-precision rationals so
//! that identities can be asserted with `==` instead of tolerances. Matrices
//! here are tiny (dozens of rows at most), so the implementation favors
//! clarity over asymptotics.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational scalar used throughout the crate.
pub type Rat = BigRational;

/// Shorthand for `n/d` as a [`Rat`].
///
/// # Panics
/// Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Shorthand for the integer `n` as a [`Rat`].
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Lossy conversion to `f64` (NaN if the value overflows, which the sizes in
/// this crate never do).
pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Error produced when a string is not a valid rational literal.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid rational literal {input:?}: {reason}")]
pub struct ParseRatError {
    pub input: String,
    pub reason: String,
}

fn parse_err(input: &str, reason: impl Into<String>) -> ParseRatError {
    ParseRatError {
        input: input.to_string(),
        reason: reason.into(),
    }
}

/// Parses `"p"`, `"p/q"`, or a finite decimal such as `"1.25"` into an exact
/// rational. Signs are accepted on the numerator only.
pub fn parse_rat(s: &str) -> Result<Rat, ParseRatError> {
    let t = s.trim();
    if t.is_empty() {
        return Err(parse_err(s, "empty string"));
    }
    if let Some((num, den)) = t.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| parse_err(s, "numerator is not an integer"))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| parse_err(s, "denominator is not an integer"))?;
        if d.is_zero() {
            return Err(parse_err(s, "zero denominator"));
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((int_part, frac_part)) = t.split_once('.') {
        let (sign, int_digits) = match int_part.strip_prefix('-') {
            Some(rest) => (-1, rest),
            None => (1, int_part.strip_prefix('+').unwrap_or(int_part)),
        };
        if !frac_part.chars().all(|c| c.is_ascii_digit()) || frac_part.is_empty() {
            return Err(parse_err(s, "invalid decimal fraction"));
        }
        if !int_digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(parse_err(s, "invalid decimal integer part"));
        }
        let digits = format!("{}{}", if int_digits.is_empty() { "0" } else { int_digits }, frac_part);
        let n: BigInt = digits
            .parse()
            .map_err(|_| parse_err(s, "invalid decimal digits"))?;
        let den = BigInt::from(10u32).pow(frac_part.len() as u32);
        return Ok(Rat::new(BigInt::from(sign) * n, den));
    }
    let n: BigInt = t.parse().map_err(|_| parse_err(s, "not an integer"))?;
    Ok(Rat::from_integer(n))
}

/// Formats a rational as `"p"` or `"p/q"` (reduced, `q > 0`).
pub fn format_rat(r: &Rat) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Reduces `rows` to reduced row echelon form in place and returns the pivot
/// column indices in order.
pub fn rref(rows: &mut [Vec<Rat>]) -> Vec<usize> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut pivot_row = 0usize;
    for col in 0..ncols {
        if pivot_row >= nrows {
            break;
        }
        // Exact arithmetic: any nonzero pivot works, prefer the largest for
        // no reason other than determinism of intermediate sizes.
        let Some(src) = (pivot_row..nrows).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(pivot_row, src);
        let inv = rows[pivot_row][col].recip();
        for x in rows[pivot_row].iter_mut() {
            *x *= &inv;
        }
        for i in 0..nrows {
            if i != pivot_row && !rows[i][col].is_zero() {
                let factor = rows[i][col].clone();
                for c in 0..ncols {
                    let delta = &factor * &rows[pivot_row][c];
                    rows[i][c] -= delta;
                }
            }
        }
        pivots.push(col);
        pivot_row += 1;
    }
    pivots
}

/// Returns a basis of the right kernel `{x : A x = 0}` of the matrix with the
/// given rows, each of length `ncols`. Basis vectors are indexed by the free
/// columns of the reduced row echelon form, in ascending column order.
pub fn kernel_basis(a: &[Vec<Rat>], ncols: usize) -> Vec<Vec<Rat>> {
    let mut rows: Vec<Vec<Rat>> = a.to_vec();
    let pivots = rref(&mut rows);
    let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !pivot_set.contains(c)) {
        let mut v = vec![Rat::zero(); ncols];
        v[free] = rat_int(1);
        for (row_idx, &pc) in pivots.iter().enumerate() {
            v[pc] = -rows[row_idx][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Solves `A x = b` exactly if a solution exists. Returns `None` when the
/// system is inconsistent. When the solution is not unique, free variables
/// are set to zero.
pub fn solve_exact(a: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let ncols = a.first().map_or(0, Vec::len);
    let mut rows: Vec<Vec<Rat>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref(&mut rows);
    if pivots.contains(&ncols) {
        return None; // pivot in the augmented column: inconsistent
    }
    let mut x = vec![Rat::zero(); ncols];
    for (row_idx, &pc) in pivots.iter().enumerate() {
        x[pc] = rows[row_idx][ncols].clone();
    }
    Some(x)
}

/// Exact rank of the matrix.
pub fn rank(a: &[Vec<Rat>]) -> usize {
    let mut rows = a.to_vec();
    rref(&mut rows).len()
}

/// True if `v` lies in the exact span of `basis` (all vectors of equal length).
pub fn in_span(basis: &[Vec<Rat>], v: &[Rat]) -> bool {
    if basis.is_empty() {
        return v.iter().all(Rat::is_zero);
    }
    let nrows = v.len();
    // Columns are the basis vectors; solve for coordinates.
    let a: Vec<Vec<Rat>> = (0..nrows)
        .map(|i| basis.iter().map(|bv| bv[i].clone()).collect())
        .collect();
    solve_exact(&a, v).is_some()
}

/// Absolute value of a rational.
pub fn rat_abs(r: &Rat) -> Rat {
    r.abs()
}
