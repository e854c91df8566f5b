//! The scalar orbit formulas `β(x; t)` and `γ(x)`.

use std::collections::BTreeMap;

use super::{check_prime_param, exists, substitute_o, var, Formula, Lang, Node, Robinson, Template, Term, Valued};
use crate::error::{Error, Result};
use crate::field::least_prime_other_than;
use crate::orbit::nearly_open_bound;
use crate::series::Series;

/// `β(x; t) = φ ∧ ψ(x) ∧ ∃u (G(u; t) ∧ χ(x; u))` for the orbit of `a` under
/// substitutions, with `φ` the true constant (the locus of a single
/// transcendental element is everything).
///
/// The ball radius comes from the nearly-open bound for `(a, n)`, raised to 0
/// if negative, and the center of `χ` is `a` truncated above that radius.
/// Transcendence of `a` over `F` is assumed, not checked.
pub fn emit_orbit_formula_scalar(a: &Series, n: i64) -> Result<Formula> {
    emit_beta_with_prime(a, n, least_prime_other_than(a.characteristic()))
}

/// [`emit_orbit_formula_scalar`] with the Robinson prime `l` chosen explicitly.
pub fn emit_beta_with_prime(a: &Series, n: i64, l: u64) -> Result<Formula> {
    let l = check_prime_param("l", l, a.characteristic())?;
    let bound = nearly_open_bound(a, n)?;
    let radius = bound.radius.max(0);
    if a.precision() <= radius {
        return Err(Error::InsufficientPrecision(format!(
            "the center needs coefficients through t^{radius}, have precision {}",
            a.precision()
        )));
    }
    let field = a.field();
    let center = Series::new(
        field,
        a.terms().map(|(e, c)| (e, c.clone())),
        radius + 1,
    );
    let chi = Template::Chi { l, radius, center };
    let g = Template::Robinson { kind: Robinson::G, l };
    let psi = Template::Psi {
        q: field.char_exponent().pow(bound.l),
    };
    let alpha = exists(
        "u",
        Node::And(vec![g.at(var("u")), chi.at_param(var("x"), var("u"))]),
    );
    let beta = Node::And(vec![Node::True, psi.at(var("x")), alpha]);
    Formula::new(Lang::RingT, ["x"], beta)
}

/// `γ(x) = ∃u (H''(u) ∧ β(x; u))`, obtained from the valued-field formula
/// `∃u (H'(u) ∧ β(x; u))` by replacing each `O`-atom with Ax's formula.
pub fn emit_gamma(a: &Series, n: i64) -> Result<Formula> {
    emit_gamma_with_prime(a, n, least_prime_other_than(a.characteristic()))
}

/// [`emit_gamma`] with `l` used both as the Robinson prime and as Ax's exponent.
pub fn emit_gamma_with_prime(a: &Series, n: i64, l: u64) -> Result<Formula> {
    let beta = emit_beta_with_prime(a, n, l)?;
    let shifted = beta.body.subst(&BTreeMap::new(), Some(&Term::var("u")));
    let body = exists(
        "u",
        Node::And(vec![Template::Valued(Valued::H).at(var("u")), shifted]),
    );
    let vf = Formula::new(Lang::ValuedField, ["x"], body)?;
    substitute_o(&vf, l)
}
