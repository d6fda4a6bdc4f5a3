//! Recursive-descent parser for polynomial expressions.
//!
//! Accepts the canonical text emitted by `SymPoly::to_string` as well as
//! free-form expressions such as `v1*v3 - v2^2` or `(v1 + v2)^3 / ...`-free
//! arithmetic: the grammar supports `+`, binary and unary `-`, `*`, integer
//! powers `^`, parentheses, rational literals `p/q`, and decimal literals.
//! Variables are written `v<alpha>` (copy 1) or `v<alpha>_<a>`.

use crate::exact::{parse_rat, Rat};

use super::{PolyError, SymPoly};

pub(super) fn parse_poly(input: &str, r: usize, m: usize) -> Result<SymPoly, PolyError> {
    let mut p = Parser {
        bytes: input.as_bytes(),
        pos: 0,
        r,
        m,
    };
    p.skip_ws();
    let poly = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(poly)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    r: usize,
    m: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, message: impl Into<String>) -> PolyError {
        PolyError::Parse {
            pos: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, byte: u8) -> bool {
        if self.peek() == Some(byte) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    /// expr := term (('+' | '-') term)*
    fn expr(&mut self) -> Result<SymPoly, PolyError> {
        let mut acc = self.term()?;
        loop {
            self.skip_ws();
            if self.eat(b'+') {
                self.skip_ws();
                let rhs = self.term()?;
                acc = acc.add(&rhs)?;
            } else if self.eat(b'-') {
                self.skip_ws();
                let rhs = self.term()?;
                acc = acc.sub(&rhs)?;
            } else {
                return Ok(acc);
            }
        }
    }

    /// term := unary ('*' unary)*
    fn term(&mut self) -> Result<SymPoly, PolyError> {
        let mut acc = self.unary()?;
        loop {
            self.skip_ws();
            if self.eat(b'*') {
                self.skip_ws();
                let rhs = self.unary()?;
                acc = acc.mul(&rhs)?;
            } else {
                return Ok(acc);
            }
        }
    }

    /// unary := '-' unary | atom ('^' uint)?
    fn unary(&mut self) -> Result<SymPoly, PolyError> {
        self.skip_ws();
        if self.eat(b'-') {
            return Ok(self.unary()?.neg());
        }
        let base = self.atom()?;
        self.skip_ws();
        if self.eat(b'^') {
            self.skip_ws();
            let e = self.uint()?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    /// atom := rational | variable | '(' expr ')'
    fn atom(&mut self) -> Result<SymPoly, PolyError> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.skip_ws();
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(inner)
            }
            Some(b'v') => self.variable(),
            Some(c) if c.is_ascii_digit() => self.rational(),
            Some(c) => Err(self.error(format!("unexpected character {:?}", c as char))),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn uint(&mut self) -> Result<u32, PolyError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.error("expected an integer exponent"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| self.error("exponent does not fit in u32"))
    }

    fn variable(&mut self) -> Result<SymPoly, PolyError> {
        debug_assert_eq!(self.peek(), Some(b'v'));
        self.pos += 1;
        let alpha = self.uint().map_err(|_| self.error("expected generator index after 'v'"))? as usize;
        let a = if self.eat(b'_') {
            self.uint().map_err(|_| self.error("expected copy index after '_'"))? as usize
        } else {
            1
        };
        SymPoly::var(self.r, self.m, alpha, a)
    }

    fn rational(&mut self) -> Result<SymPoly, PolyError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        // Rational literal "p/q" or decimal "p.d": consume only when the next
        // character continues a numeric literal.
        if self.eat(b'/') {
            let digits_start = self.pos;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            if self.pos == digits_start {
                return Err(self.error("expected denominator digits after '/'"));
            }
        } else if self.eat(b'.') {
            let digits_start = self.pos;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            if self.pos == digits_start {
                return Err(self.error("expected fractional digits after '.'"));
            }
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii literal");
        let value: Rat = parse_rat(text).map_err(|e| self.error(e.to_string()))?;
        Ok(SymPoly::constant(self.r, self.m, value))
    }
}

#[cfg(test)]
mod tests {
    use super::super::SymPoly;
    use crate::exact::rat;

    #[test]
    fn parses_basic_expressions() {
        let p = SymPoly::parse("v1*v3 - v2^2", 3, 1).unwrap();
        assert_eq!(p.degree(), 2);
        assert_eq!(p.num_terms(), 2);

        let q = SymPoly::parse("(v1 + v2)^2", 3, 1).unwrap();
        let expanded = SymPoly::parse("v1^2 + 2*v1*v2 + v2^2", 3, 1).unwrap();
        assert_eq!(q, expanded);
    }

    #[test]
    fn parses_rational_and_decimal_coefficients() {
        let p = SymPoly::parse("3/4*v1 + 0.25*v1", 3, 1).unwrap();
        assert_eq!(p, SymPoly::var(3, 1, 1, 1).unwrap());
        let c = SymPoly::parse("1/2", 3, 1).unwrap();
        assert_eq!(c.constant_term(), rat(1, 2));
    }

    #[test]
    fn parses_unary_minus_chains() {
        let p = SymPoly::parse("--v1", 3, 1).unwrap();
        assert_eq!(p, SymPoly::var(3, 1, 1, 1).unwrap());
        let q = SymPoly::parse("-v1^2", 3, 1).unwrap();
        assert_eq!(q, SymPoly::parse("0 - v1^2", 3, 1).unwrap());
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(SymPoly::parse("v1 +", 3, 1).is_err());
        assert!(SymPoly::parse("v9", 3, 1).is_err());
        assert!(SymPoly::parse("v1_2", 3, 1).is_err());
        assert!(SymPoly::parse("v1 v2", 3, 1).is_err());
        assert!(SymPoly::parse("(v1", 3, 1).is_err());
        assert!(SymPoly::parse("v1^-2", 3, 1).is_err());
        assert!(SymPoly::parse("", 3, 1).is_err());
    }

    #[test]
    fn copy_suffix_defaults_to_one() {
        let p = SymPoly::parse("v2", 3, 2).unwrap();
        assert_eq!(p, SymPoly::var(3, 2, 2, 1).unwrap());
    }
}
