//! Seeded random generators for series and substitutions.
//!
//! Nothing here touches OS entropy; callers pass an `Rng` built from a seed.

use rand::Rng;

use crate::compose::Uniformiser;
use crate::field::{Field, FieldElement};
use crate::series::Series;

/// Uniform over `F_p`; small integers in `[-3, 3]` for the rationals.
pub fn random_element<R: Rng + ?Sized>(rng: &mut R, field: Field) -> FieldElement {
    if field.is_char_zero() {
        field.int(rng.gen_range(-3..=3))
    } else {
        field.residue(rng.gen_range(0..field.characteristic()))
    }
}

pub fn random_nonzero<R: Rng + ?Sized>(rng: &mut R, field: Field) -> FieldElement {
    loop {
        let c = random_element(rng, field);
        if !c.is_zero() {
            return c;
        }
    }
}

/// Random coefficients at every exponent in `[lo, prec)`.
pub fn random_series<R: Rng + ?Sized>(rng: &mut R, field: Field, lo: i64, prec: i64) -> Series {
    let terms: Vec<_> = (lo..prec).map(|e| (e, random_element(rng, field))).collect();
    Series::new(field, terms, prec)
}

/// A random `s ∈ t + M^n` to precision `prec`. For `n ≤ 1` the linear
/// coefficient ranges over all of `F^×`, i.e. `s` is any uniformiser.
pub fn random_uniformiser<R: Rng + ?Sized>(rng: &mut R, field: Field, n: i64, prec: i64) -> Uniformiser {
    assert!(prec >= 2, "a uniformiser needs precision at least 2");
    let first = if n <= 1 { random_nonzero(rng, field) } else { field.one() };
    let mut terms = vec![(1, first)];
    terms.extend((n.max(2)..prec).map(|e| (e, random_element(rng, field))));
    Uniformiser::new(Series::new(field, terms, prec)).expect("valuation is 1")
}
