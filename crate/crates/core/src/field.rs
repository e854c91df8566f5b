//! Exact coefficient arithmetic.
//!
//! Two coefficient domains are supported: the prime field `F_p` (residues in
//! `[0, p)`) and the rationals, selected by characteristic `0`. Every value
//! carries its characteristic so that mixing domains is caught early.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// The coefficient field: `F_p` for a prime `p`, or `Q` when `p = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Field {
    p: u64,
}

impl Field {
    /// Validates `p` by trial division.
    pub fn new(p: u64) -> Result<Self> {
        if p == 0 || is_prime(p) {
            Ok(Field { p })
        } else {
            Err(Error::NotPrime(p))
        }
    }

    pub fn rationals() -> Self {
        Field { p: 0 }
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn is_char_zero(&self) -> bool {
        self.p == 0
    }

    /// Characteristic exponent: `p` in positive characteristic, `1` otherwise.
    pub fn char_exponent(&self) -> u64 {
        if self.p == 0 {
            1
        } else {
            self.p
        }
    }

    pub fn zero(&self) -> FieldElement {
        self.int(0)
    }

    pub fn one(&self) -> FieldElement {
        self.int(1)
    }

    pub fn int(&self, n: i64) -> FieldElement {
        if self.p == 0 {
            FieldElement::Rational(BigRational::from_integer(BigInt::from(n)))
        } else {
            FieldElement::Mod {
                p: self.p,
                value: (n as i128).rem_euclid(self.p as i128) as u64,
            }
        }
    }

    pub fn residue(&self, value: u64) -> FieldElement {
        debug_assert!(self.p > 0);
        FieldElement::Mod {
            p: self.p,
            value: value % self.p,
        }
    }

    pub fn big(&self, n: &BigInt) -> FieldElement {
        if self.p == 0 {
            FieldElement::Rational(BigRational::from_integer(n.clone()))
        } else {
            let m = BigInt::from(self.p);
            let r = n.mod_floor(&m).to_u64().expect("residue fits");
            FieldElement::Mod {
                p: self.p,
                value: r,
            }
        }
    }

    /// `num / den`; in positive characteristic the denominator is inverted mod p.
    pub fn ratio(&self, num: &BigInt, den: &BigInt) -> Result<FieldElement> {
        if den.is_zero() {
            return Err(Error::CoefficientOutOfRange("zero denominator".into()));
        }
        if self.p == 0 {
            Ok(FieldElement::Rational(BigRational::new(
                num.clone(),
                den.clone(),
            )))
        } else {
            let d = self.big(den);
            if d.is_zero() {
                return Err(Error::CoefficientOutOfRange(format!(
                    "denominator {den} vanishes mod {}",
                    self.p
                )));
            }
            Ok(self.big(num) * d.inv()?)
        }
    }

    /// All elements of `F_p` in residue order. Empty in characteristic 0.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.p).map(move |v| self.residue(v))
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Least prime different from `p`.
pub fn least_prime_other_than(p: u64) -> u64 {
    if p == 2 {
        3
    } else {
        2
    }
}

/// An element of `F_p` or of `Q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FieldElement {
    Mod { p: u64, value: u64 },
    Rational(BigRational),
}

impl FieldElement {
    pub fn characteristic(&self) -> u64 {
        match self {
            FieldElement::Mod { p, .. } => *p,
            FieldElement::Rational(_) => 0,
        }
    }

    pub fn field(&self) -> Field {
        Field {
            p: self.characteristic(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FieldElement::Mod { value, .. } => *value == 0,
            FieldElement::Rational(q) => q.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            FieldElement::Mod { value, .. } => *value == 1,
            FieldElement::Rational(q) => q.is_one(),
        }
    }

    /// Residue in `[0, p)`; `None` in characteristic 0.
    pub fn residue(&self) -> Option<u64> {
        match self {
            FieldElement::Mod { value, .. } => Some(*value),
            FieldElement::Rational(_) => None,
        }
    }

    pub fn inv(&self) -> Result<FieldElement> {
        if self.is_zero() {
            return Err(Error::ZeroInverse);
        }
        Ok(match self {
            FieldElement::Mod { p, value } => FieldElement::Mod {
                p: *p,
                value: pow_mod(*value, p - 2, *p),
            },
            FieldElement::Rational(q) => FieldElement::Rational(q.recip()),
        })
    }

    pub fn pow(&self, e: u64) -> FieldElement {
        match self {
            FieldElement::Mod { p, value } => FieldElement::Mod {
                p: *p,
                value: pow_mod(*value, e, *p),
            },
            FieldElement::Rational(q) => {
                let e = i32::try_from(e).expect("exponent fits in i32");
                FieldElement::Rational(q.pow(e))
            }
        }
    }

    /// Multiplication by the integer `n`, i.e. `n · 1 · self`.
    pub fn scale_int(&self, n: i64) -> FieldElement {
        self.clone() * self.field().int(n)
    }

    /// Whether `self = b^l` for some nonzero `b`.
    ///
    /// In `F_p` this is Euler's criterion `a^((p-1)/gcd(l, p-1)) = 1`; in `Q`
    /// numerator and denominator must both be exact `l`-th powers.
    pub fn is_lth_power(&self, l: u64) -> Result<bool> {
        if l == 0 {
            return Err(Error::BadParams("l must be positive".into()));
        }
        if self.is_zero() {
            return Err(Error::ZeroInput);
        }
        match self {
            FieldElement::Mod { p, value } => {
                if l % p == 0 {
                    return Err(Error::BadModulus { p: *p, l });
                }
                let e = (p - 1) / (p - 1).gcd(&l);
                Ok(pow_mod(*value, e, *p) == 1)
            }
            FieldElement::Rational(q) => Ok(rational_root(q, l).is_some()),
        }
    }

    /// An `l`-th root; in `F_p` the smallest residue, in `Q` the positive one.
    pub fn lth_root(&self, l: u64) -> Result<FieldElement> {
        if !self.is_lth_power(l)? {
            return Err(Error::NotAPower(l));
        }
        match self {
            FieldElement::Mod { p, value } => (1..*p)
                .find(|b| pow_mod(*b, l, *p) == *value)
                .map(|b| FieldElement::Mod { p: *p, value: b })
                .ok_or(Error::NotAPower(l)),
            FieldElement::Rational(q) => rational_root(q, l)
                .map(FieldElement::Rational)
                .ok_or(Error::NotAPower(l)),
        }
    }
}

fn rational_root(q: &BigRational, l: u64) -> Option<BigRational> {
    let l32 = u32::try_from(l).ok()?;
    let negative = q.is_negative();
    if negative && l % 2 == 0 {
        return None;
    }
    let root_of = |n: &BigInt| -> Option<BigInt> {
        let r = n.abs().nth_root(l32);
        (num_traits::pow(r.clone(), l as usize) == n.abs()).then_some(r)
    };
    let num = root_of(q.numer())?;
    let den = root_of(q.denom())?;
    let r = BigRational::new(num, den);
    Some(if negative { -r } else { r })
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn mismatch(a: &FieldElement, b: &FieldElement) -> ! {
    panic!(
        "characteristic mismatch in field arithmetic: {} vs {}",
        a.characteristic(),
        b.characteristic()
    )
}

impl<'a> Add<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: &FieldElement) -> FieldElement {
        match (self, rhs) {
            (FieldElement::Mod { p, value: a }, FieldElement::Mod { p: q, value: b }) if p == q => {
                let s = a + b;
                FieldElement::Mod {
                    p: *p,
                    value: if s >= *p { s - p } else { s },
                }
            }
            (FieldElement::Rational(a), FieldElement::Rational(b)) => {
                FieldElement::Rational(a + b)
            }
            _ => mismatch(self, rhs),
        }
    }
}

impl<'a> Sub<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: &FieldElement) -> FieldElement {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: &FieldElement) -> FieldElement {
        match (self, rhs) {
            (FieldElement::Mod { p, value: a }, FieldElement::Mod { p: q, value: b }) if p == q => {
                FieldElement::Mod {
                    p: *p,
                    value: mul_mod(*a, *b, *p),
                }
            }
            (FieldElement::Rational(a), FieldElement::Rational(b)) => {
                FieldElement::Rational(a * b)
            }
            _ => mismatch(self, rhs),
        }
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        match self {
            FieldElement::Mod { p, value } => FieldElement::Mod {
                p: *p,
                value: if *value == 0 { 0 } else { p - value },
            },
            FieldElement::Rational(q) => FieldElement::Rational(-q),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $m(self, rhs: FieldElement) -> FieldElement {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $m(self, rhs: &FieldElement) -> FieldElement {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldElement::Mod { value, .. } => write!(f, "{value}"),
            FieldElement::Rational(q) => {
                if q.denom().is_one() {
                    write!(f, "{}", q.numer())
                } else {
                    write!(f, "{}/{}", q.numer(), q.denom())
                }
            }
        }
    }
}

impl PartialOrd for FieldElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (FieldElement::Mod { value: a, .. }, FieldElement::Mod { value: b, .. }) => {
                Some(a.cmp(b))
            }
            (FieldElement::Rational(a), FieldElement::Rational(b)) => Some(a.cmp(b)),
            _ => None,
        }
    }
}
