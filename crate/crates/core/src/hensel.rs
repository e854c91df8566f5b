//! Solving `f(y) = b` for `y ∈ t + M^n` when `b` is close enough to `f(t)`.
//!
//! With `i0` the least support exponent of `f` not divisible by `p`, the
//! coefficient `C_h(f(y))` depends on `y_{h-i0+1}` only through the linear
//! term `a_{i0}·i0·y_1^{i0-1}·y_{h-i0+1}` once `h > N'`, and on no later `y_j`.
//! Fixing `y_1 = 1` turns the equation into one linear step per coefficient.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel;
use crate::series::{ceil_div, Ball, Series};

/// Constants of the solver for a given `f` and congruence level `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HenselData {
    pub i0: i64,
    #[serde(rename = "Nprime")]
    pub n_prime: i64,
    /// Radius index `N`: every `b` with `v(b - f) > N` is reached.
    #[serde(rename = "N")]
    pub radius: i64,
    pub n: i64,
}

fn check_valuation_ring(f: &Series) -> Result<()> {
    match f.leading() {
        Some((v, _)) if v < 0 => Err(Error::NotInValuationRing),
        _ => Ok(()),
    }
}

/// Least support exponent `i` of `f` with `p ∤ i`; in characteristic 0 the
/// least support exponent `i ≥ 1`.
pub fn compute_i0(f: &Series) -> Result<i64> {
    check_valuation_ring(f)?;
    let p = f.characteristic() as i64;
    let found = if p == 0 {
        f.terms().map(|(e, _)| e).find(|&e| e >= 1)
    } else {
        f.terms().map(|(e, _)| e).find(|&e| e % p != 0)
    };
    found.ok_or(if p == 0 {
        Error::ConstantSeries
    } else {
        Error::IsPthPower
    })
}

/// `N' = ⌈max{(i0 - k)/(1 - 1/p) : 0 ≤ k < i0}⌉`, and 0 in characteristic 0.
pub fn compute_n_prime(f: &Series) -> Result<i64> {
    let i0 = compute_i0(f)?;
    let p = f.characteristic() as i64;
    if p == 0 {
        return Ok(0);
    }
    // (i0 - k)/(1 - 1/p) = (i0 - k)·p/(p - 1); ceiling is monotone so the
    // ceiling of the max is the max of the ceilings
    Ok((0..i0)
        .map(|k| ceil_div((i0 - k) * p, p - 1))
        .max()
        .expect("i0 >= 1"))
}

impl HenselData {
    /// `N = max(N', n + i0 - 2)`, with `n` raised to at least 2 so that the
    /// recursion never revisits `y_1`.
    pub fn new(f: &Series, n: i64) -> Result<Self> {
        if n < 1 {
            return Err(Error::BadParams(format!("congruence level n = {n} must be positive")));
        }
        let i0 = compute_i0(f)?;
        let n_prime = compute_n_prime(f)?;
        let radius = n_prime.max(n.max(2) + i0 - 2);
        Ok(HenselData {
            i0,
            n_prime,
            radius,
            n,
        })
    }
}

/// Returns `y ∈ t + M^n` with `f ∘ y = b`, to precision `min(P_f, P_b) - i0 + 1`.
pub fn solve(f: &Series, n: i64, b: &Series) -> Result<Series> {
    let data = HenselData::new(f, n)?;
    let radius = data.radius;
    if !Ball::new(f.clone(), radius).contains(b)? {
        return Err(Error::OutsideBall { radius });
    }
    let field = f.field();
    let i0 = data.i0;
    let top = f.precision().min(b.precision());
    let len = (top - i0 + 1) as usize;
    let f_dense = f.dense(0, top as usize);
    let lin = f.coeff_unchecked(i0).scale_int(i0);
    assert!(!lin.is_zero(), "a_i0 * i0 vanishes although p does not divide i0");
    let lin_inv = lin.inv()?;

    let mut y = vec![field.zero(); len];
    y[1] = field.one();
    for h in (radius + 1)..top {
        let j = (h - i0 + 1) as usize;
        debug_assert!(j >= 2);
        let image = kernel::compose_trunc(field, &f_dense, &y[..j], h as usize + 1);
        let residual = &b.coeff_unchecked(h) - &image[h as usize];
        y[j] = &residual * &lin_inv;
    }
    Ok(Series::from_dense(field, 0, y, len as i64))
}
