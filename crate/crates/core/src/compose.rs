//! Substitution `f ∘ s` of a series into a Laurent series, and the group of
//! uniformisers under composition.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::kernel;
use crate::series::{split_frobenius, Series, Valuation};

/// Precision of `f ∘ s` when `s` has valuation `vs` and precision `ps`.
///
/// A perturbation `e` of `s` with `v(e) ≥ ps` moves `s^i`, `i = k·p^l`, by a
/// term of valuation at least `p^l·(ps + (k-1)·vs)`: the Frobenius part is
/// additive and the remaining `k`-th power (or its inverse, for `k < 0`) is
/// differentiated once. The truncation of `f` itself contributes `O(s^P_f)`.
pub fn composition_precision(f: &Series, vs: i64, ps: i64) -> i64 {
    let pf = f.precision();
    let tail = if pf >= 0 { pf } else { pf * vs };
    f.terms()
        .filter(|(i, _)| *i != 0)
        .map(|(i, _)| {
            let (k, q) = split_frobenius(i, f.field());
            q * (ps + (k - 1) * vs)
        })
        .fold(tail, i64::min)
}

/// `f ∘ s = Σ a_i s^i` for `v(s) ≥ 1`, with `f = t^v(f)·g` handled as
/// `s^v(f) · (g ∘ s)` when `f` has a pole.
pub fn compose(f: &Series, s: &Series) -> Result<Series> {
    if f.field() != s.field() {
        return Err(Error::CharacteristicMismatch(f.characteristic(), s.characteristic()));
    }
    let vs = match s.valuation() {
        Valuation::Exact(v) if v >= 1 => v,
        Valuation::Exact(_) => return Err(Error::NotInMaximalIdeal),
        Valuation::AtLeast(_) => {
            return Err(Error::InsufficientPrecision(
                "substituted series is zero to its precision".into(),
            ))
        }
    };
    let field = f.field();
    let prec = composition_precision(f, vs, s.precision());
    let Some((fo, _)) = f.leading() else {
        return Ok(Series::zero(field, prec));
    };
    let offset = vs * fo;
    let len = prec - offset;
    if len <= 0 {
        return Ok(Series::zero(field, prec));
    }
    let len = len as usize;
    let g_len = (f.precision() - fo) as usize;
    let g = f.dense(fo, g_len);
    let s_dense = s.dense(0, len);
    let mut out = kernel::compose_trunc(field, &g, &s_dense, len);
    if fo != 0 {
        let w = s.dense(vs, len);
        let w_pow = if fo > 0 {
            kernel::pow_trunc(field, &w, fo as u64, len)
        } else {
            let w_inv = kernel::inv_trunc(field, &w, len);
            kernel::pow_trunc(field, &w_inv, fo.unsigned_abs(), len)
        };
        out = kernel::mul_trunc(field, &out, &w_pow, len);
    }
    Ok(Series::from_dense(field, offset, out, prec))
}

/// A series of valuation exactly 1; an element of the group `(U, ∘)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Uniformiser(Series);

impl Uniformiser {
    pub fn new(s: Series) -> Result<Self> {
        match s.valuation() {
            Valuation::Exact(1) => Ok(Uniformiser(s)),
            v => Err(Error::NotUniformiser(format!("valuation {v}"))),
        }
    }

    /// The identity element `t`.
    pub fn identity(field: Field, prec: i64) -> Self {
        assert!(prec >= 2);
        Uniformiser(Series::t(field, prec))
    }

    pub fn as_series(&self) -> &Series {
        &self.0
    }

    pub fn into_series(self) -> Series {
        self.0
    }

    pub fn precision(&self) -> i64 {
        self.0.precision()
    }

    /// Group product `self ∘ other`.
    pub fn then(&self, other: &Uniformiser) -> Result<Uniformiser> {
        Uniformiser::new(compose(&self.0, &other.0)?)
    }

    /// The group inverse: `u` with `s ∘ u = u ∘ s = t`.
    ///
    /// Solved coefficient by coefficient: `u_1 = 1/s_1`, and for `n ≥ 2` the
    /// coefficient `n` of `s ∘ u` depends on `u_n` only through `s_1·u_n`.
    /// A perturbation of `s` at order `P` moves `u` at order `P` as well, so the
    /// inverse has the precision of `s`.
    pub fn inverse(&self) -> Uniformiser {
        let s = &self.0;
        let field = s.field();
        let len = s.precision() as usize;
        let c1_inv = s.coeff_unchecked(1).inv().expect("uniformiser has s_1 != 0");
        let s_dense = s.dense(0, len);
        let mut u = vec![field.zero(); len];
        u[1] = c1_inv.clone();
        for n in 2..len {
            let partial = kernel::compose_trunc(field, &s_dense, &u[..n], n + 1);
            u[n] = -(&partial[n] * &c1_inv);
        }
        Uniformiser(Series::from_dense(field, 0, u, s.precision()))
    }

    /// The automorphism `x ↦ x ∘ self`.
    pub fn act(&self, x: &Series) -> Result<Series> {
        compose(x, &self.0)
    }
}

impl fmt::Display for Uniformiser {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub fn group_inverse(s: &Uniformiser) -> Uniformiser {
    s.inverse()
}

pub fn act(sigma: &Uniformiser, x: &Series) -> Result<Series> {
    sigma.act(x)
}
