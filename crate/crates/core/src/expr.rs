//! Polynomial expressions such as `x1*x2 + 3/2*x1^3 - (x2 - i*x1)^2`.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary ('*' unary)*
//! unary  := ('+' | '-') unary | power
//! power  := atom ('^' natural)?
//! atom   := natural ('/' natural)? | 'x' index | 'i' | '(' expr ')'
//! ```
//!
//! Variables are 1-based. Whitespace is ignored.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::ParseError;
use crate::gauss::GaussRational;
use crate::mseries::{Exponent, Germ, MultiSeries};

/// Largest accepted exponent after `^`.
pub const MAX_POWER: u32 = 64;

type Poly = BTreeMap<Vec<u32>, GaussRational>;

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError::Expr {
            message: message.into(),
            offset: self.pos,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn natural(&mut self) -> Result<BigInt, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(digits.parse().expect("digits parse"))
    }

    fn expr(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                let t = self.term()?;
                acc = add(acc, t, false);
            } else if self.eat(b'-') {
                let t = self.term()?;
                acc = add(acc, t, true);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.unary()?;
        while self.eat(b'*') {
            let f = self.unary()?;
            acc = mul(&acc, &f);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Poly, ParseError> {
        if self.eat(b'-') {
            let p = self.unary()?;
            return Ok(p.into_iter().map(|(e, c)| (e, -c)).collect());
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Poly, ParseError> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let n = self.natural()?;
        let n: u32 = n
            .try_into()
            .ok()
            .filter(|&n| n <= MAX_POWER)
            .ok_or_else(|| self.err(format!("exponent above {MAX_POWER}")))?;
        let mut acc = constant(GaussRational::one());
        for _ in 0..n {
            acc = mul(&acc, &base);
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<Poly, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let p = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(p)
            }
            Some(b'x') => {
                self.pos += 1;
                let at = self.pos;
                let idx = self.natural()?;
                let idx: usize = idx.try_into().unwrap_or(0);
                if idx == 0 || idx > self.dim {
                    self.pos = at;
                    return Err(self.err(format!("variable index must be in 1..={}", self.dim)));
                }
                let mut e = vec![0; self.dim];
                e[idx - 1] = 1;
                Ok(BTreeMap::from([(e, GaussRational::one())]))
            }
            Some(b'i') => {
                self.pos += 1;
                Ok(constant(GaussRational::i()))
            }
            Some(c) if c.is_ascii_digit() => {
                let p = self.natural()?;
                let q = if self.eat(b'/') { self.natural()? } else { BigInt::one() };
                if q.is_zero() {
                    return Err(self.err("zero denominator"));
                }
                Ok(constant(GaussRational::real(BigRational::new(p, q))))
            }
            Some(c) => Err(self.err(format!("unexpected `{}`", c as char))),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

fn constant(c: GaussRational) -> Poly {
    if c.is_zero() {
        Poly::new()
    } else {
        BTreeMap::from([(Vec::new(), c)])
    }
}

fn pad(e: &[u32], dim: usize) -> Vec<u32> {
    let mut v = e.to_vec();
    v.resize(dim, 0);
    v
}

fn add(mut a: Poly, b: Poly, negate: bool) -> Poly {
    for (e, c) in b {
        let slot = a.entry(e.clone()).or_insert_with(GaussRational::zero);
        if negate {
            *slot -= &c;
        } else {
            *slot += &c;
        }
        if slot.is_zero() {
            a.remove(&e);
        }
    }
    a
}

fn mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let n = ea.len().max(eb.len());
            let (ea, eb) = (pad(ea, n), pad(eb, n));
            let e: Vec<u32> = ea.iter().zip(&eb).map(|(x, y)| x + y).collect();
            let slot = out.entry(e.clone()).or_insert_with(GaussRational::zero);
            *slot += &(ca * cb);
            if slot.is_zero() {
                out.remove(&e);
            }
        }
    }
    out
}

/// Smallest dimension covering every variable named in `src`.
pub fn infer_dim(src: &str) -> usize {
    let b = src.as_bytes();
    let mut best = 1;
    let mut i = 0;
    while i < b.len() {
        if b[i] == b'x' {
            let start = i + 1;
            let mut j = start;
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            if let Ok(n) = src[start..j].parse::<usize>() {
                best = best.max(n);
            }
            i = j;
        } else {
            i += 1;
        }
    }
    best
}

/// Compiles `src` to a series of dimension `dim` truncated at `cap`.
pub fn parse_polynomial(src: &str, dim: usize, cap: u32) -> Result<MultiSeries, ParseError> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
        dim,
    };
    let poly = p.expr()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    let terms = poly.into_iter().map(|(e, c)| (Exponent(pad(&e, dim)), c));
    MultiSeries::from_terms(dim, cap, terms).map_err(|e| ParseError::Expr {
        message: e.to_string(),
        offset: 0,
    })
}

/// An exact polynomial germ; the cap is raised to the degree if needed.
pub fn parse_germ(src: &str, dim: usize, cap: u32) -> Result<Germ, ParseError> {
    let s = parse_polynomial(src, dim, u32::MAX)?;
    let cap = cap.max(s.max_degree().unwrap_or(0));
    Germ::polynomial(s.with_cap(cap)).map_err(|e| ParseError::Expr {
        message: e.to_string(),
        offset: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar() {
        let s = parse_polynomial("x1*x2 + x1^3", 2, 10).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.coeff(&Exponent(vec![3, 0])), GaussRational::one());
        let t = parse_polynomial("(x1 - x2)^2 - x1^2 - x2^2 + 2*x1*x2", 2, 10).unwrap();
        assert!(t.is_zero());
        let u = parse_polynomial("-3/6*x2 + i*x1", 2, 10).unwrap();
        assert_eq!(u.coeff(&Exponent(vec![0, 1])), GaussRational::from_ratio(-1, 2));
        assert_eq!(u.coeff(&Exponent(vec![1, 0])), GaussRational::i());
        assert_eq!(parse_polynomial("x1^5", 1, 3).unwrap().len(), 0);
    }

    #[test]
    fn errors_carry_offsets() {
        match parse_polynomial("x1 + x3", 2, 5) {
            Err(ParseError::Expr { offset, .. }) => assert_eq!(offset, 6),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_polynomial("x1 +", 2, 5),
            Err(ParseError::Expr { offset: 4, .. })
        ));
        assert!(parse_polynomial("x1 x2", 2, 5).is_err());
        assert!(parse_polynomial("1/0", 1, 5).is_err());
        assert!(parse_polynomial("x1^99", 1, 5).is_err());
    }

    #[test]
    fn germs() {
        assert_eq!(infer_dim("x1*x3 + x2"), 3);
        let g = parse_germ("x1^2 + x2^3", 2, 1).unwrap();
        assert!(g.is_exact() && g.cap() == 3);
        assert!(parse_germ("1 + x1", 1, 5).is_err());
    }
}
