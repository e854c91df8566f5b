//! Truncated Laurent series `Σ a_i t^i + O(t^P)` with exact coefficients.
//!
//! Every series carries its precision `P`: coefficients at exponents below `P`
//! are known, everything from `P` on is unknown. Operations propagate the
//! precision and never report coefficients they cannot know.

mod json;
pub(crate) mod parse;

use std::fmt;

pub use json::SeriesJson;

use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};
use crate::kernel;

/// The t-adic valuation as far as the precision can tell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    Exact(i64),
    /// The series is zero to precision `P`, so `v ≥ P`.
    AtLeast(i64),
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Exact(v) => write!(f, "{v}"),
            Valuation::AtLeast(p) => write!(f, "AtLeast({p})"),
        }
    }
}

/// Canonical form: `coeffs` is empty or has nonzero first and last entries,
/// and `offset + coeffs.len() <= prec`. The empty series has `offset == 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Series {
    field: Field,
    offset: i64,
    coeffs: Vec<FieldElement>,
    prec: i64,
}

pub(crate) fn ceil_div(a: i64, b: i64) -> i64 {
    debug_assert!(b > 0);
    -((-a).div_euclid(b))
}

pub(crate) fn floor_div(a: i64, b: i64) -> i64 {
    debug_assert!(b > 0);
    a.div_euclid(b)
}

/// Writes `i = k·p^l` with `p ∤ k` (`l = 0` in characteristic 0). Returns `(k, p^l)`.
pub(crate) fn split_frobenius(i: i64, field: Field) -> (i64, i64) {
    debug_assert!(i != 0);
    let p = field.characteristic() as i64;
    if p == 0 {
        return (i, 1);
    }
    let (mut k, mut q) = (i, 1);
    while k % p == 0 {
        k /= p;
        q *= p;
    }
    (k, q)
}

impl Series {
    /// Builds a series from `(exponent, coefficient)` pairs. Repeated
    /// exponents are summed; terms at or above `prec` are absorbed by `O(t^prec)`.
    pub fn new(
        field: Field,
        terms: impl IntoIterator<Item = (i64, FieldElement)>,
        prec: i64,
    ) -> Self {
        let mut map = std::collections::BTreeMap::<i64, FieldElement>::new();
        for (e, c) in terms {
            assert_eq!(c.characteristic(), field.characteristic());
            if e >= prec {
                continue;
            }
            let slot = map.entry(e).or_insert_with(|| field.zero());
            *slot = &*slot + &c;
        }
        map.retain(|_, c| !c.is_zero());
        let Some((&lo, _)) = map.iter().next() else {
            return Series::zero(field, prec);
        };
        let hi = *map.keys().next_back().unwrap();
        let mut coeffs = vec![field.zero(); (hi - lo + 1) as usize];
        for (e, c) in map {
            coeffs[(e - lo) as usize] = c;
        }
        Series {
            field,
            offset: lo,
            coeffs,
            prec,
        }
    }

    /// Dense coefficients starting at `offset`; normalizes.
    pub(crate) fn from_dense(
        field: Field,
        offset: i64,
        mut coeffs: Vec<FieldElement>,
        prec: i64,
    ) -> Self {
        let keep = (prec - offset).clamp(0, coeffs.len() as i64) as usize;
        coeffs.truncate(keep);
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        let lead = coeffs.iter().position(|c| !c.is_zero());
        match lead {
            None => Series::zero(field, prec),
            Some(k) => {
                coeffs.drain(..k);
                Series {
                    field,
                    offset: offset + k as i64,
                    coeffs,
                    prec,
                }
            }
        }
    }

    pub fn zero(field: Field, prec: i64) -> Self {
        Series {
            field,
            offset: 0,
            coeffs: Vec::new(),
            prec,
        }
    }

    pub fn constant(c: FieldElement, prec: i64) -> Self {
        let field = c.field();
        Series::new(field, [(0, c)], prec)
    }

    pub fn one(field: Field, prec: i64) -> Self {
        Series::constant(field.one(), prec)
    }

    pub fn monomial(field: Field, exp: i64, prec: i64) -> Self {
        Series::new(field, [(exp, field.one())], prec)
    }

    /// The identity substitution `t + O(t^prec)`.
    pub fn t(field: Field, prec: i64) -> Self {
        Series::monomial(field, 1, prec)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn characteristic(&self) -> u64 {
        self.field.characteristic()
    }

    pub fn precision(&self) -> i64 {
        self.prec
    }

    pub fn is_zero_to_precision(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn valuation(&self) -> Valuation {
        if self.coeffs.is_empty() {
            Valuation::AtLeast(self.prec)
        } else {
            Valuation::Exact(self.offset)
        }
    }

    /// `v(x)` when known, otherwise the precision (a lower bound for `v`).
    pub fn valuation_bound(&self) -> i64 {
        if self.coeffs.is_empty() {
            self.prec
        } else {
            self.offset
        }
    }

    /// `C_h(x)`, the coefficient of `t^h`.
    pub fn coeff(&self, h: i64) -> Result<FieldElement> {
        if h >= self.prec {
            return Err(Error::PrecisionExceeded { h, prec: self.prec });
        }
        Ok(self.coeff_unchecked(h))
    }

    pub(crate) fn coeff_unchecked(&self, h: i64) -> FieldElement {
        let idx = h - self.offset;
        if idx < 0 || idx >= self.coeffs.len() as i64 {
            self.field.zero()
        } else {
            self.coeffs[idx as usize].clone()
        }
    }

    /// Stored `(exponent, coefficient)` pairs, ascending, all nonzero.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &FieldElement)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.offset + i as i64, c))
    }

    pub fn leading(&self) -> Option<(i64, &FieldElement)> {
        self.coeffs.first().map(|c| (self.offset, c))
    }

    /// Whether some stored exponent is nonzero, i.e. the series is certified
    /// not to be a constant.
    pub fn is_nonconstant(&self) -> bool {
        self.terms().any(|(e, _)| e != 0)
    }

    /// Coefficients of `t^start, …, t^(start+len-1)`, with zeros outside the support.
    pub(crate) fn dense(&self, start: i64, len: usize) -> Vec<FieldElement> {
        (0..len as i64)
            .map(|i| self.coeff_unchecked(start + i))
            .collect()
    }

    fn check_field(&self, other: &Series) -> Result<()> {
        if self.field != other.field {
            return Err(Error::CharacteristicMismatch(
                self.characteristic(),
                other.characteristic(),
            ));
        }
        Ok(())
    }

    /// Sum; precision is the smaller of the two.
    pub fn add(&self, other: &Series) -> Result<Series> {
        self.check_field(other)?;
        let prec = self.prec.min(other.prec);
        let terms = self
            .terms()
            .chain(other.terms())
            .map(|(e, c)| (e, c.clone()))
            .collect::<Vec<_>>();
        Ok(Series::new(self.field, terms, prec))
    }

    pub fn neg(&self) -> Series {
        Series {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            ..self.clone()
        }
    }

    pub fn sub(&self, other: &Series) -> Result<Series> {
        self.add(&other.neg())
    }

    /// Product; precision `min(P_x + v(y), P_y + v(x))`.
    pub fn mul(&self, other: &Series) -> Result<Series> {
        self.check_field(other)?;
        let prec = (self.prec + other.valuation_bound()).min(other.prec + self.valuation_bound());
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Ok(Series::zero(self.field, prec));
        }
        let offset = self.offset + other.offset;
        let len = (prec - offset).max(0) as usize;
        let dense = kernel::mul_trunc(self.field, &self.coeffs, &other.coeffs, len);
        Ok(Series::from_dense(self.field, offset, dense, prec))
    }

    pub fn scale(&self, c: &FieldElement) -> Series {
        let coeffs = self.coeffs.iter().map(|x| x * c).collect();
        Series::from_dense(self.field, self.offset, coeffs, self.prec)
    }

    /// Multiplication by `t^k`.
    pub fn shift(&self, k: i64) -> Series {
        let mut out = self.clone();
        if !out.coeffs.is_empty() {
            out.offset += k;
        }
        out.prec += k;
        out
    }

    /// Forgets every coefficient at or above `prec` (no-op if already coarser).
    pub fn truncate(&self, prec: i64) -> Series {
        let prec = prec.min(self.prec);
        Series::from_dense(self.field, self.offset, self.coeffs.clone(), prec)
    }

    /// Multiplicative inverse; precision `P - 2·v(x)`.
    pub fn invert(&self) -> Result<Series> {
        if self.coeffs.is_empty() {
            return Err(Error::ZeroToPrecision);
        }
        let v = self.offset;
        let len = (self.prec - v) as usize;
        let dense = kernel::inv_trunc(self.field, &self.coeffs, len);
        Ok(Series::from_dense(self.field, -v, dense, self.prec - 2 * v))
    }

    /// Integer power by repeated squaring, each step under the product rule.
    pub fn pow(&self, n: i64) -> Result<Series> {
        if n < 0 {
            return self.invert()?.pow(-n);
        }
        let rel = self.prec - self.valuation_bound();
        let mut acc = Series::one(self.field, rel.max(1));
        let mut base = self.clone();
        let mut e = n as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// `x^(p^l)`. Over `F_p` the Frobenius fixes coefficients, so this only
    /// scales exponents and precision.
    pub fn frobenius(&self, l: u32) -> Result<Series> {
        if l == 0 {
            return Ok(self.clone());
        }
        if self.field.is_char_zero() {
            return Err(Error::CharZero);
        }
        let q = (self.characteristic() as i64).pow(l);
        let terms = self.terms().map(|(e, c)| (e * q, c.clone())).collect::<Vec<_>>();
        Ok(Series::new(self.field, terms, self.prec * q))
    }

    /// The `p^l`-th root of a series whose exponents are all divisible by `p^l`;
    /// precision `⌈P / p^l⌉`.
    pub fn pth_root(&self, l: u32) -> Result<Series> {
        if l == 0 {
            return Ok(self.clone());
        }
        if self.field.is_char_zero() {
            return Err(Error::CharZero);
        }
        let q = (self.characteristic() as i64).pow(l);
        if self.terms().any(|(e, _)| e.rem_euclid(q) != 0) {
            return Err(Error::NotAPthPower(l));
        }
        let terms = self.terms().map(|(e, c)| (e / q, c.clone())).collect::<Vec<_>>();
        Ok(Series::new(self.field, terms, ceil_div(self.prec, q)))
    }

    /// Largest `l` with every stored exponent divisible by `p^l`: the power
    /// content certified at the current precision. Always 0 in characteristic 0.
    pub fn power_content(&self) -> Result<u32> {
        if self.field.is_char_zero() {
            return Ok(0);
        }
        if self.coeffs.is_empty() {
            return Err(Error::ZeroToPrecision);
        }
        if !self.is_nonconstant() {
            return Err(Error::ConstantSeries);
        }
        let p = self.characteristic() as i64;
        let mut l = 0u32;
        let mut q = p;
        while self.terms().all(|(e, _)| e % q == 0) {
            l += 1;
            q *= p;
        }
        Ok(l)
    }

    fn predicate(&self, name: &str, exact: impl Fn(i64) -> bool, settle: impl Fn(i64) -> Option<bool>) -> Result<bool> {
        match self.valuation() {
            Valuation::Exact(v) => Ok(exact(v)),
            Valuation::AtLeast(p) => settle(p).ok_or_else(|| {
                Error::InsufficientPrecision(format!("{name}: series is O(t^{p})"))
            }),
        }
    }

    /// Membership in the valuation ring `O = F[[t]]`.
    pub fn in_o(&self) -> Result<bool> {
        self.predicate("in_O", |v| v >= 0, |p| (p >= 0).then_some(true))
    }

    /// Membership in the maximal ideal `M = tF[[t]]`.
    pub fn in_m(&self) -> Result<bool> {
        self.predicate("in_M", |v| v >= 1, |p| (p >= 1).then_some(true))
    }

    pub fn is_unit(&self) -> Result<bool> {
        self.predicate("is_unit", |v| v == 0, |p| (p >= 1).then_some(false))
    }

    pub fn is_uniformiser(&self) -> Result<bool> {
        self.predicate("is_uniformiser", |v| v == 1, |p| (p >= 2).then_some(false))
    }
}

impl Series {
    /// The stored terms in the series grammar without the `O(t^P)` tail;
    /// `"0"` when there are none.
    pub fn polynomial_string(&self) -> String {
        let parts: Vec<String> = self
            .terms()
            .map(|(e, c)| match (e, c.is_one()) {
                (0, _) => format!("{c}"),
                (1, true) => "t".to_string(),
                (_, true) => format!("t^{e}"),
                (1, false) => format!("{c}*t"),
                (_, false) => format!("{c}*t^{e}"),
            })
            .collect();
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" + ")
        }
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.coeffs.is_empty() {
            write!(f, "{} + ", self.polynomial_string())?;
        }
        write!(f, "O(t^{})", self.prec)
    }
}

/// The open ball `B(N; center) = {x : v(x - center) > N}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ball {
    pub center: Series,
    pub radius: i64,
}

impl Ball {
    pub fn new(center: Series, radius: i64) -> Self {
        Ball { center, radius }
    }

    /// Certified membership; needs both precisions above the radius index.
    pub fn contains(&self, x: &Series) -> Result<bool> {
        let prec = self.center.precision().min(x.precision());
        if prec <= self.radius {
            return Err(Error::InsufficientPrecision(format!(
                "ball radius index {} needs precision above it, have {prec}",
                self.radius
            )));
        }
        Ok(match x.sub(&self.center)?.valuation() {
            Valuation::Exact(v) => v > self.radius,
            Valuation::AtLeast(_) => true,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str, p: u64) -> Series {
        Series::parse(text, Field::new(p).unwrap()).unwrap()
    }

    #[test]
    fn arithmetic_examples() {
        let x = s("1 + t + O(t^10)", 2);
        assert_eq!(x.mul(&x).unwrap().to_string(), "1 + t^2 + O(t^10)");
        let sum = s("t + t^2 + O(t^10)", 3).add(&s("2*t^2 + O(t^10)", 3)).unwrap();
        assert_eq!(sum.to_string(), "t + O(t^10)");
        assert_eq!(sum.terms().count(), 1);
        let shifted = s("t^-1 + 1 + O(t^10)", 2).mul(&s("t + O(t^10)", 2)).unwrap();
        assert_eq!(shifted.to_string(), "1 + t + O(t^9)");
    }

    #[test]
    fn product_precision_rule() {
        let x = s("t^2 + O(t^5)", 5);
        let y = s("t^-1 + O(t^3)", 5);
        // min(5 + (-1), 3 + 2) = 4
        assert_eq!(x.mul(&y).unwrap().precision(), 4);
        let z = s("O(t^3)", 5);
        assert_eq!(x.mul(&z).unwrap(), Series::zero(Field::new(5).unwrap(), 5));
    }

    #[test]
    fn invert_examples() {
        let inv = s("1 + t + O(t^4)", 3).invert().unwrap();
        assert_eq!(inv.to_string(), "1 + 2*t + t^2 + 2*t^3 + O(t^4)");
        assert_eq!(inv.mul(&s("1 + t + O(t^4)", 3)).unwrap(), s("1 + O(t^4)", 3));
        assert_eq!(s("t + O(t^8)", 2).invert().unwrap().to_string(), "t^-1 + O(t^6)");
        let g = s("t + t^2 + O(t^8)", 2).invert().unwrap();
        assert_eq!(g.to_string(), "t^-1 + 1 + t + t^2 + t^3 + t^4 + t^5 + O(t^6)");
        assert_eq!(g.mul(&s("t + t^2 + O(t^8)", 2)).unwrap(), s("1 + O(t^7)", 2));
        assert_eq!(s("O(t^3)", 2).invert(), Err(Error::ZeroToPrecision));
    }

    #[test]
    fn valuation_and_coefficients() {
        let x = s("t^2 + t^5 + O(t^9)", 7);
        assert_eq!(x.valuation(), Valuation::Exact(2));
        assert!(x.coeff(3).unwrap().is_zero());
        assert_eq!(x.coeff(9), Err(Error::PrecisionExceeded { h: 9, prec: 9 }));
        assert_eq!(s("O(t^7)", 2).valuation(), Valuation::AtLeast(7));
    }

    #[test]
    fn pth_root_examples() {
        assert_eq!(s("t^2 + t^6 + O(t^12)", 2).pth_root(1).unwrap().to_string(), "t + t^3 + O(t^6)");
        let x = s("t + t^2 + O(t^7)", 2);
        assert_eq!(x.pth_root(0).unwrap(), x);
        let r = s("t^3 + 2*t^6 + O(t^10)", 3).pth_root(1).unwrap();
        assert_eq!(r.to_string(), "t + 2*t^2 + O(t^4)");
        assert_eq!(r.frobenius(1).unwrap().truncate(10), s("t^3 + 2*t^6 + O(t^10)", 3));
        assert_eq!(x.pth_root(1), Err(Error::NotAPthPower(1)));
        let q = Series::parse("t^2 + O(t^4)", Field::rationals()).unwrap();
        assert_eq!(q.pth_root(1), Err(Error::CharZero));
    }

    #[test]
    fn power_content_examples() {
        assert_eq!(s("t^4 + t^8 + O(t^12)", 2).power_content().unwrap(), 2);
        assert_eq!(s("t + O(t^5)", 2).power_content().unwrap(), 0);
        assert_eq!(s("t^3 + O(t^10)", 3).power_content().unwrap(), 1);
        assert_eq!(s("O(t^10)", 3).power_content(), Err(Error::ZeroToPrecision));
        assert_eq!(s("2 + O(t^10)", 3).power_content(), Err(Error::ConstantSeries));
        let q = Series::parse("t^2 + O(t^4)", Field::rationals()).unwrap();
        assert_eq!(q.power_content().unwrap(), 0);
    }

    #[test]
    fn ball_examples() {
        let t = s("t + O(t^10)", 2);
        let x = s("t + t^3 + O(t^10)", 2);
        assert!(Ball::new(t.clone(), 2).contains(&x).unwrap());
        assert!(!Ball::new(t.clone(), 3).contains(&x).unwrap());
        assert!(Ball::new(s("t^2 + O(t^10)", 2), 5)
            .contains(&s("t^2 + t^6 + O(t^10)", 2))
            .unwrap());
        assert!(matches!(
            Ball::new(t, 12).contains(&x),
            Err(Error::InsufficientPrecision(_))
        ));
    }

    #[test]
    fn predicate_examples() {
        assert!(!s("t^-1 + 1 + O(t^5)", 2).in_o().unwrap());
        assert!(s("2*t + t^2 + O(t^5)", 3).is_uniformiser().unwrap());
        assert!(!s("O(t^4)", 2).is_unit().unwrap());
        assert!(s("O(t^4)", 2).in_m().unwrap());
        assert!(matches!(s("O(t^0)", 2).in_m(), Err(Error::InsufficientPrecision(_))));
        assert!(matches!(s("O(t^1)", 2).is_uniformiser(), Err(Error::InsufficientPrecision(_))));
    }

    #[test]
    fn mismatched_characteristics() {
        assert_eq!(
            s("t + O(t^3)", 2).add(&s("t + O(t^3)", 3)),
            Err(Error::CharacteristicMismatch(2, 3))
        );
    }
}
