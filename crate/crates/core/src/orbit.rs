//! Orbits of series under substitution `t ↦ s`.
//!
//! `Orb_n(a)` is `{a ∘ s : s ∈ t + M^n}`; for `n = 1` this is the full orbit
//! under all uniformisers. Membership is decided on the window of coefficients
//! below `W = min(P_a, P_b)`: a witness `s` satisfies `a ∘ s ≡ b mod t^W`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::compose::{compose, Uniformiser};
use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};
use crate::hensel::{solve, HenselData};
use crate::sampling::random_uniformiser;
use crate::series::{floor_div, split_frobenius, Ball, Series};

/// Radii of the nearly-open balls: `B(N; b) ∩ F((t))^(p^l) ⊆ Orb_n(b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OrbitBound {
    pub l: u32,
    #[serde(rename = "N1")]
    pub n1: i64,
    #[serde(rename = "N")]
    pub radius: i64,
    pub n: i64,
}

/// A substitution carrying `a` to `b`, checked on exponents below `verified_to`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub s: Uniformiser,
    pub verified_to: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Membership {
    Witness(Witness),
    NotInOrbit,
    Unknown,
}

impl Membership {
    pub fn is_witness(&self) -> bool {
        matches!(self, Membership::Witness(_))
    }
}

fn check_level(n: i64) -> Result<()> {
    if n < 1 {
        return Err(Error::BadParams(format!("congruence level n = {n} must be positive")));
    }
    Ok(())
}

/// First exponent where `x` and `y` differ, capped at the smaller precision.
pub fn agreement(x: &Series, y: &Series) -> i64 {
    let top = x.precision().min(y.precision());
    let lo = match (x.leading(), y.leading()) {
        (Some((a, _)), Some((b, _))) => a.min(b),
        (Some((a, _)), None) | (None, Some((a, _))) => a,
        (None, None) => return top,
    };
    (lo..top)
        .find(|&h| x.coeff_unchecked(h) != y.coeff_unchecked(h))
        .unwrap_or(top)
}

/// `count` elements of `Orb_n(a)` from a seeded generator, at the precision of `a`.
pub fn sample_orbit(a: &Series, n: i64, seed: u64, count: usize) -> Result<Vec<Series>> {
    check_level(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prec = a.precision().max(2);
    (0..count)
        .map(|_| {
            let s = random_uniformiser(&mut rng, a.field(), n, prec);
            compose(a, s.as_series())
        })
        .collect()
}

/// Radius `N1` of the ball around a content-free `a` inside `Orb_n(a)`. A pole
/// is handled through `x ↦ x^-1`, which shifts radii by `2·v(a)`.
fn inner_radius(a: &Series, n: i64) -> Result<i64> {
    match a.leading() {
        Some((v, _)) if v < 0 => Ok(HenselData::new(&a.invert()?, n)?.radius + 2 * v),
        _ => Ok(HenselData::new(a, n)?.radius),
    }
}

pub fn nearly_open_bound(b: &Series, n: i64) -> Result<OrbitBound> {
    check_level(n)?;
    if b.is_zero_to_precision() {
        return Err(Error::ZeroToPrecision);
    }
    let l = b.power_content()?;
    let n1 = inner_radius(&b.pth_root(l)?, n)?;
    let q = (b.field().char_exponent() as i64).pow(l);
    Ok(OrbitBound {
        l,
        n1,
        radius: q * (n1 + 1) - 1,
        n,
    })
}

/// Solves `a ∘ y = target` for content-free `a` once `target` is inside the
/// inner ball; `None` when the ball hypothesis fails or cannot be certified.
fn hensel_lift(a: &Series, target: &Series, n: i64) -> Result<Option<Series>> {
    let (f, b) = match a.leading() {
        Some((v, _)) if v < 0 => (a.invert()?, target.invert()?),
        _ => (a.clone(), target.clone()),
    };
    let data = HenselData::new(&f, n)?;
    match Ball::new(f.clone(), data.radius).contains(&b) {
        Ok(true) => solve(&f, n, &b).map(Some),
        Ok(false) | Err(Error::InsufficientPrecision(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Checks `a ∘ s` against `b` and packages the agreement as a witness.
fn witness(a: &Series, b: &Series, s: Series) -> Result<Witness> {
    let s = Uniformiser::new(s)?;
    let verified_to = agreement(&compose(a, s.as_series())?, b);
    Ok(Witness { s, verified_to })
}

/// A witness `s ∈ t + M^n` for `b' ∈ B(N; b) ∩ F((t))^(p^l)` lying in `Orb_n(b)`.
pub fn nearly_open_witness(b: &Series, b_prime: &Series, n: i64) -> Result<Witness> {
    let bound = nearly_open_bound(b, n)?;
    if !Ball::new(b.clone(), bound.radius).contains(b_prime)? {
        return Err(Error::OutsideBall {
            radius: bound.radius,
        });
    }
    let a = b.pth_root(bound.l)?;
    let a_prime = b_prime.pth_root(bound.l)?;
    let y = hensel_lift(&a, &a_prime, n)?.ok_or(Error::OutsideBall { radius: bound.n1 })?;
    witness(b, b_prime, y)
}

/// Least `n` with `Orb_n(c) ⊆ B(N; c)`.
///
/// A support term `t^i` with `i = k·p^l` moves by `(u^k - t^k)^(p^l)`, of
/// valuation at least `p^l·(n + k - 1)` when `v(u - t) ≥ n`. Terms beyond the
/// precision of `c` are only controlled when `P_c > N`.
pub fn continuity_bound(c: &Series, radius: i64) -> Result<i64> {
    if c.is_zero_to_precision() {
        return Err(Error::ZeroToPrecision);
    }
    if c.precision() <= radius {
        return Err(Error::InsufficientPrecision(format!(
            "continuity bound for N = {radius} needs precision above N, have {}",
            c.precision()
        )));
    }
    let field = c.field();
    Ok(c.terms()
        .filter(|&(i, _)| i != 0)
        .map(|(i, _)| {
            let (k, q) = split_frobenius(i, field);
            floor_div(radius, q) - k + 2
        })
        .fold(1, i64::max))
}

/// Smallest nonzero support exponent below `w`, if any.
fn window_valuation(x: &Series, w: i64) -> Option<i64> {
    x.terms().map(|(e, _)| e).find(|&e| e != 0 && e < w)
}

/// Power content of `x mod t^w`; `None` when that truncation is constant.
fn window_content(x: &Series, w: i64) -> Option<u32> {
    let p = x.characteristic() as i64;
    let exps: Vec<i64> = x.terms().map(|(e, _)| e).filter(|&e| e != 0 && e < w).collect();
    if exps.is_empty() {
        return None;
    }
    if p == 0 {
        return Some(0);
    }
    let mut l = 0;
    let mut q = p;
    while exps.iter().all(|e| e % q == 0) {
        l += 1;
        q *= p;
    }
    Some(l)
}

/// Coefficient choices for `s_j` when `s` ranges over `t + M^n`.
fn choices(field: Field, j: usize, n: i64) -> Vec<FieldElement> {
    let j = j as i64;
    if j == 1 {
        if n >= 2 {
            vec![field.one()]
        } else {
            field.elements().filter(|c| !c.is_zero()).collect()
        }
    } else if j < n {
        vec![field.zero()]
    } else {
        field.elements().collect()
    }
}

fn partial_uniformiser(field: Field, coeffs: &[FieldElement], prec: i64) -> Series {
    let terms = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, c)| (j as i64, c.clone()))
        .collect::<Vec<_>>();
    Series::new(field, terms, prec)
}

enum Search {
    Found(Vec<FieldElement>),
    Exhausted,
    DepthHit,
}

struct Searcher<'a> {
    a: &'a Series,
    b: &'a Series,
    window: i64,
    needed: usize,
    depth: usize,
    n: i64,
}

impl Searcher<'_> {
    /// `s` holds `s_0 = 0, s_1, …, s_(j-1)`.
    fn run(&self, s: &mut Vec<FieldElement>) -> Result<Search> {
        let j = s.len();
        if j >= 2 {
            let sigma = partial_uniformiser(self.a.field(), s, j as i64);
            let image = compose(self.a, &sigma)?;
            let known = image.precision().min(self.window);
            if agreement(&image, self.b) < known {
                return Ok(Search::Exhausted);
            }
        }
        if j > self.needed {
            return Ok(Search::Found(s.clone()));
        }
        if j > self.depth {
            return Ok(Search::DepthHit);
        }
        let mut hit = false;
        for c in choices(self.a.field(), j, self.n) {
            s.push(c);
            let outcome = self.run(s)?;
            s.pop();
            match outcome {
                Search::Found(found) => return Ok(Search::Found(found)),
                Search::DepthHit => hit = true,
                Search::Exhausted => {}
            }
        }
        Ok(if hit { Search::DepthHit } else { Search::Exhausted })
    }
}

/// Decides whether some `s ∈ t + M^n` has `a ∘ s ≡ b mod t^W`, `W = min(P_a, P_b)`.
///
/// Separating invariants (valuation and power content of the truncations)
/// give `NotInOrbit` at once. Otherwise both sides are reduced to their
/// content-free roots; inside the Hensel ball the solver supplies the
/// witness, and outside it a backtracking search over `s_1, …, s_depth`
/// either finds one, refutes every branch, or stops with `Unknown`.
pub fn orbit_member(a: &Series, b: &Series, n: i64, depth: usize) -> Result<Membership> {
    check_level(n)?;
    if a.characteristic() != b.characteristic() {
        return Err(Error::CharacteristicMismatch(a.characteristic(), b.characteristic()));
    }
    if !a.is_nonconstant() || !b.is_nonconstant() {
        return Err(Error::ConstantSeries);
    }
    let field = a.field();
    let window = a.precision().min(b.precision());
    let (aw, bw) = (a.truncate(window), b.truncate(window));

    if window_valuation(&aw, window) != window_valuation(&bw, window) {
        return Ok(Membership::NotInOrbit);
    }
    let l = match (window_content(&aw, window), window_content(&bw, window)) {
        (None, None) => {
            return Ok(if aw == bw {
                Membership::Witness(witness(a, b, Series::t(field, window.max(2)))?)
            } else {
                Membership::NotInOrbit
            });
        }
        (Some(x), Some(y)) if x == y => x,
        _ => return Ok(Membership::NotInOrbit),
    };
    let (ar, br) = (aw.pth_root(l)?, bw.pth_root(l)?);
    let v = window_valuation(&ar, ar.precision()).expect("content is finite");
    // an exact polynomial s of this precision fixes a ∘ s below W
    let s_prec = window + 1 + (-v).max(0);

    if let Some(y) = hensel_lift(&ar, &br, n)? {
        let terms = y.terms().map(|(e, c)| (e, c.clone())).collect::<Vec<_>>();
        let w = witness(a, b, Series::new(field, terms, s_prec))?;
        if w.verified_to >= window {
            return Ok(Membership::Witness(w));
        }
    }
    if field.is_char_zero() {
        return Ok(Membership::Unknown);
    }

    let searcher = Searcher {
        a: &ar,
        b: &br,
        window: ar.precision(),
        needed: (ar.precision() - v).max(1) as usize,
        depth,
        n,
    };
    match searcher.run(&mut vec![field.zero()])? {
        Search::Found(coeffs) => {
            let w = witness(a, b, partial_uniformiser(field, &coeffs, s_prec))?;
            debug_assert!(w.verified_to >= window);
            Ok(Membership::Witness(w))
        }
        Search::Exhausted => Ok(Membership::NotInOrbit),
        Search::DepthHit => Ok(Membership::Unknown),
    }
}

/// Search-space cap for [`brute_force_witness`].
pub const BRUTE_FORCE_CAP: u128 = 1 << 20;

/// Tries every `s mod t^K` with `s_1 ≠ 0`, in lexicographic order of
/// `(s_1, s_2, …)`, and reports the first one matching `b` on all
/// coefficients certified by both sides.
pub fn brute_force_witness(a: &Series, b: &Series, k: usize) -> Result<Membership> {
    let field = a.field();
    if field.is_char_zero() {
        return Err(Error::CharZero);
    }
    if k < 2 {
        return Err(Error::BadParams(format!("depth K = {k} must be at least 2")));
    }
    let p = field.characteristic() as u128;
    let size = (p - 1).checked_mul(p.checked_pow(k as u32 - 2).unwrap_or(u128::MAX));
    match size {
        Some(size) if size <= BRUTE_FORCE_CAP => {}
        _ => return Err(Error::SearchSpaceTooLarge(size.unwrap_or(u128::MAX))),
    }

    let p = p as u64;
    let mut digits = vec![0u64; k];
    digits[1] = 1;
    loop {
        let coeffs: Vec<_> = digits.iter().map(|&d| field.residue(d)).collect();
        let s = partial_uniformiser(field, &coeffs, k as i64);
        let image = compose(a, &s)?;
        if agreement(&image, b) >= image.precision().min(b.precision()) {
            return Ok(Membership::Witness(Witness {
                verified_to: image.precision().min(b.precision()),
                s: Uniformiser::new(s)?,
            }));
        }
        // odometer with s_(K-1) least significant
        let mut pos = k - 1;
        loop {
            digits[pos] += 1;
            if digits[pos] < p {
                break;
            }
            if pos == 1 {
                return Ok(Membership::NotInOrbit);
            }
            digits[pos] = 0;
            pos -= 1;
        }
    }
}
