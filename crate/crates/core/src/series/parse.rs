//! Text grammar:
//!
//! ```text
//! series := term (("+" | "-") term)* "+" "O(t^" int ")" | "O(t^" int ")"
//! term   := coeff | coeff "*" mono | mono
//! mono   := "t" | "t^" int
//! coeff  := integer, or integer "/" integer
//! ```
//!
//! Whitespace is insignificant. Coefficients are reduced into the field.

use num_bigint::BigInt;

use super::Series;
use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};

pub(crate) struct Cursor<'a> {
    src: &'a [u8],
    pub(crate) pos: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        Cursor {
            src: text.as_bytes(),
            pos: 0,
        }
    }

    pub(crate) fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    pub(crate) fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    pub(crate) fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::syntax(self.pos, format!("expected '{}'", c as char)))
        }
    }

    pub(crate) fn eat_str(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(s.as_bytes()) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect_str(&mut self, s: &str) -> Result<()> {
        if self.eat_str(s) {
            Ok(())
        } else {
            Err(Error::syntax(self.pos, format!("expected '{s}'")))
        }
    }

    /// `[A-Za-z][A-Za-z0-9_']*`, returned without consuming anything else.
    pub(crate) fn word(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let start = self.pos;
        if !self.src.get(start).is_some_and(|c| c.is_ascii_alphabetic()) {
            return None;
        }
        self.pos += 1;
        while self
            .src
            .get(self.pos)
            .is_some_and(|&c| c.is_ascii_alphanumeric() || c == b'_' || c == b'\'')
        {
            self.pos += 1;
        }
        Some(std::str::from_utf8(&self.src[start..self.pos]).unwrap())
    }

    pub(crate) fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    pub(crate) fn digits(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::syntax(start, "expected digits"));
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).unwrap())
    }

    pub(crate) fn big_uint(&mut self) -> Result<BigInt> {
        Ok(self.digits()?.parse::<BigInt>().expect("digits parse"))
    }

    pub(crate) fn int(&mut self) -> Result<i64> {
        let neg = self.eat(b'-');
        let start = self.pos;
        let d = self.digits()?;
        let v: i64 = d
            .parse()
            .map_err(|_| Error::syntax(start, "integer out of range"))?;
        Ok(if neg { -v } else { v })
    }
}

fn coefficient(cur: &mut Cursor<'_>, field: Field, negate: bool) -> Result<FieldElement> {
    let neg = cur.eat(b'-') ^ negate;
    let num = cur.big_uint()?;
    let den = if cur.eat(b'/') {
        cur.big_uint()?
    } else {
        BigInt::from(1)
    };
    let num = if neg { -num } else { num };
    field.ratio(&num, &den)
}

fn monomial(cur: &mut Cursor<'_>) -> Result<i64> {
    cur.expect(b't')?;
    if cur.eat(b'^') {
        cur.int()
    } else {
        Ok(1)
    }
}

enum Item {
    Term(i64, FieldElement),
    Precision(i64),
}

fn item(cur: &mut Cursor<'_>, field: Field, negate: bool) -> Result<Item> {
    match cur.peek() {
        Some(b'O') => {
            cur.pos += 1;
            cur.expect(b'(')?;
            let e = monomial(cur)?;
            cur.expect(b')')?;
            Ok(Item::Precision(e))
        }
        Some(b't') => {
            let e = monomial(cur)?;
            let c = if negate { -field.one() } else { field.one() };
            Ok(Item::Term(e, c))
        }
        Some(c) if c.is_ascii_digit() || c == b'-' => {
            let c = coefficient(cur, field, negate)?;
            if cur.eat(b'*') {
                Ok(Item::Term(monomial(cur)?, c))
            } else {
                Ok(Item::Term(0, c))
            }
        }
        _ => Err(Error::syntax(cur.pos, "expected a term")),
    }
}

/// Parses a `+`/`-` separated list of terms, stopping before an unexpected
/// character. Returns the terms and, if present, the `O(t^P)` exponent.
fn items(cur: &mut Cursor<'_>, field: Field) -> Result<(Vec<(i64, FieldElement)>, Option<i64>)> {
    let mut terms = Vec::new();
    let mut negate = false;
    loop {
        match item(cur, field, negate)? {
            Item::Term(e, c) => terms.push((e, c)),
            Item::Precision(p) => return Ok((terms, Some(p))),
        }
        negate = match cur.peek() {
            Some(b'+') => false,
            Some(b'-') => true,
            _ => return Ok((terms, None)),
        };
        cur.pos += 1;
    }
}

impl Series {
    pub fn parse(text: &str, field: Field) -> Result<Series> {
        let mut cur = Cursor::new(text);
        let (terms, prec) = items(&mut cur, field)?;
        if !cur.at_end() {
            return Err(Error::syntax(cur.pos, "trailing input"));
        }
        let prec = prec.ok_or(Error::MissingPrecision)?;
        Ok(Series::new(field, terms, prec))
    }
}

/// Parses a Laurent polynomial (no `O(t^P)` term allowed), e.g. `1 + 2*t^-1`.
pub(crate) fn parse_polynomial_at(
    cur: &mut Cursor<'_>,
    field: Field,
) -> Result<Vec<(i64, FieldElement)>> {
    let start = cur.pos;
    let (terms, prec) = items(cur, field)?;
    if prec.is_some() {
        return Err(Error::syntax(start, "polynomial must not carry O(t^P)"));
    }
    Ok(terms)
}
