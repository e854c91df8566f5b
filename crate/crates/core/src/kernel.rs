//! Dense coefficient-vector kernels. Index `i` holds the coefficient of `t^i`;
//! every result is truncated to the requested length.

use crate::field::{Field, FieldElement};

pub(crate) fn mul_trunc(
    field: Field,
    a: &[FieldElement],
    b: &[FieldElement],
    len: usize,
) -> Vec<FieldElement> {
    let mut out = vec![field.zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            if y.is_zero() {
                continue;
            }
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    out
}

pub(crate) fn pow_trunc(
    field: Field,
    a: &[FieldElement],
    mut e: u64,
    len: usize,
) -> Vec<FieldElement> {
    let mut acc = vec![field.zero(); len];
    if len == 0 {
        return acc;
    }
    acc[0] = field.one();
    let mut base: Vec<FieldElement> = a.iter().take(len).cloned().collect();
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_trunc(field, &acc, &base, len);
        }
        e >>= 1;
        if e > 0 {
            base = mul_trunc(field, &base, &base, len);
        }
    }
    acc
}

/// Reciprocal of a power series with nonzero constant term.
pub(crate) fn inv_trunc(field: Field, a: &[FieldElement], len: usize) -> Vec<FieldElement> {
    let a0_inv = a[0].inv().expect("constant term must be a unit");
    let mut out: Vec<FieldElement> = Vec::with_capacity(len);
    for n in 0..len {
        if n == 0 {
            out.push(a0_inv.clone());
            continue;
        }
        let mut acc = field.zero();
        for k in 1..=n.min(a.len().saturating_sub(1)) {
            if !a[k].is_zero() {
                acc = &acc + &(&a[k] * &out[n - k]);
            }
        }
        out.push(-(&acc * &a0_inv));
    }
    out
}

/// `f(s)` for a polynomial `f` and `s` with zero constant term, by Horner.
pub(crate) fn compose_trunc(
    field: Field,
    f: &[FieldElement],
    s: &[FieldElement],
    len: usize,
) -> Vec<FieldElement> {
    debug_assert!(s.first().is_none_or(|c| c.is_zero()));
    let mut acc = vec![field.zero(); len];
    if len == 0 {
        return acc;
    }
    // trailing zeros of f contribute nothing
    let deg = match f.iter().rposition(|c| !c.is_zero()) {
        Some(d) => d,
        None => return acc,
    };
    // s^j has valuation >= j, so coefficients above len never matter
    let start = deg.min(len.saturating_sub(1));
    acc[0] = f[start].clone();
    for j in (0..start).rev() {
        acc = mul_trunc(field, &acc, s, len);
        acc[0] = &acc[0] + &f[j];
    }
    acc
}
