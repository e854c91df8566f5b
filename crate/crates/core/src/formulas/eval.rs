//! Three-valued evaluation of formulas at truncated series.
//!
//! Existential templates are decided by eliminating their witnesses (each
//! witness is forced: `xy = 1`, `x = yt`, ...) down to Robinson's test for
//! `A`: `1 + x^l·t` is an `l`-th power iff its valuation is divisible by `l`
//! and its leading coefficient is an `l`-th power, by Hensel's lemma since
//! `l ≠ p`. Universal templates are decided through the sets they define.

use std::collections::BTreeMap;
use std::fmt;

use super::{build_template, Call, Node, Params, Robinson, Template, TemplateName, Term, Valued};
use crate::compose::compose;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::series::{Series, Valuation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnknownReason {
    InsufficientPrecision,
    SearchDepth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalResult {
    True,
    False,
    Unknown(UnknownReason),
}

impl fmt::Display for EvalResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalResult::True => "True",
            EvalResult::False => "False",
            EvalResult::Unknown(UnknownReason::InsufficientPrecision) => "Unknown(insufficient precision)",
            EvalResult::Unknown(UnknownReason::SearchDepth) => "Unknown(search depth)",
        })
    }
}

/// Default cap on the number of coefficients enumerated for a bounded `∃u`.
pub const DEFAULT_DEPTH: usize = 24;

const IMPRECISE: EvalResult = EvalResult::Unknown(UnknownReason::InsufficientPrecision);

impl EvalResult {
    fn of(b: bool) -> Self {
        if b {
            EvalResult::True
        } else {
            EvalResult::False
        }
    }

    fn not(self) -> Self {
        match self {
            EvalResult::True => EvalResult::False,
            EvalResult::False => EvalResult::True,
            u => u,
        }
    }
}

/// Kleene conjunction, stopping at the first `False`.
fn and_all(parts: impl IntoIterator<Item = Result<EvalResult>>) -> Result<EvalResult> {
    let mut acc = EvalResult::True;
    for r in parts {
        match r? {
            EvalResult::False => return Ok(EvalResult::False),
            EvalResult::Unknown(why) if acc == EvalResult::True => acc = EvalResult::Unknown(why),
            _ => {}
        }
    }
    Ok(acc)
}

fn or_all(parts: impl IntoIterator<Item = Result<EvalResult>>) -> Result<EvalResult> {
    let negated = parts.into_iter().map(|r| r.map(EvalResult::not));
    Ok(and_all(negated)?.not())
}

/// Turns a precision failure into `Unknown`.
fn settle(r: Result<bool>) -> Result<EvalResult> {
    match r {
        Ok(b) => Ok(EvalResult::of(b)),
        Err(Error::InsufficientPrecision(_) | Error::ZeroToPrecision) => Ok(IMPRECISE),
        Err(e) => Err(e),
    }
}

fn lazy(f: impl FnOnce() -> Result<EvalResult>) -> Result<EvalResult> {
    match f() {
        Err(Error::InsufficientPrecision(_) | Error::ZeroToPrecision) => Ok(IMPRECISE),
        r => r,
    }
}

/// `x = 0`: refutable by a nonzero coefficient, never certified.
fn is_zero(x: &Series) -> EvalResult {
    if x.is_zero_to_precision() {
        IMPRECISE
    } else {
        EvalResult::False
    }
}

/// The template parameter standing in for `t`.
#[derive(Debug, Clone)]
enum Param {
    T,
    S(Series),
}

impl Param {
    fn times(&self, x: &Series) -> Result<Series> {
        match self {
            Param::T => Ok(x.shift(1)),
            Param::S(s) => x.mul(s),
        }
    }

    fn divide(&self, x: &Series) -> Result<Series> {
        match self {
            Param::T => Ok(x.shift(-1)),
            Param::S(s) => x.mul(&s.invert()?),
        }
    }

    fn is_uniformiser(&self) -> Result<bool> {
        match self {
            Param::T => Ok(true),
            Param::S(s) => s.is_uniformiser(),
        }
    }

    /// Universal templates and `chi` are decided through the sets they
    /// define, which needs the parameter to be a uniformiser.
    fn require_uniformiser(&self) -> Result<()> {
        if self.is_uniformiser()? {
            Ok(())
        } else {
            Err(Error::NotEvaluable("template parameter is not a uniformiser".into()))
        }
    }
}

/// `A(x; π) = ∃y 1 + x^l·π = y^l`.
fn robinson_a(x: &Series, l: u64, param: &Param) -> Result<EvalResult> {
    lazy(|| {
        let y = param.times(&x.pow(l as i64)?)?;
        let z = y.add(&Series::one(x.field(), y.precision()))?;
        match z.valuation() {
            Valuation::Exact(v) if v.rem_euclid(l as i64) != 0 => Ok(EvalResult::False),
            Valuation::Exact(_) => {
                let (_, lc) = z.leading().expect("exact valuation has a leading term");
                Ok(EvalResult::of(lc.is_lth_power(l)?))
            }
            Valuation::AtLeast(_) => Ok(IMPRECISE),
        }
    })
}

/// `A(1/x; π)` for the forced witness of `xy = 1`. When `x = O(t^P)` with
/// `P ≥ 1` and `v(π) = 1`, any such `y` has `v(y^l·π) = l·v(y) + 1 < 0`,
/// which `l` does not divide.
fn robinson_a_recip(x: &Series, l: u64, param: &Param) -> Result<EvalResult> {
    if x.is_zero_to_precision() {
        let uniformiser = matches!(param.is_uniformiser(), Ok(true));
        return Ok(if uniformiser && x.precision() >= 1 {
            EvalResult::False
        } else {
            IMPRECISE
        });
    }
    robinson_a(&x.invert()?, l, param)
}

fn robinson_e(x: &Series, l: u64, param: &Param) -> Result<EvalResult> {
    and_all([
        Ok(is_zero(x).not()),
        robinson_a(x, l, param),
        robinson_a_recip(x, l, param),
    ])
}

fn eval_robinson(kind: Robinson, l: u64, x: &Series, param: &Param) -> Result<EvalResult> {
    match kind {
        Robinson::A => robinson_a(x, l, param),
        // C(x) ⇔ x = 0 ∨ ¬B(1/x), and ¬B(y) ⇔ A(1/(yπ))
        Robinson::C => or_all([Ok(is_zero(x)), lazy(|| robinson_a(&param.divide(x)?, l, param))]),
        Robinson::E => robinson_e(x, l, param),
        // G(x) ⇔ E(x/π)
        Robinson::G => lazy(|| robinson_e(&param.divide(x)?, l, param)),
        Robinson::B => {
            param.require_uniformiser()?;
            settle(x.in_o())
        }
        Robinson::D => {
            param.require_uniformiser()?;
            settle(x.in_m())
        }
        Robinson::F => {
            param.require_uniformiser()?;
            settle(x.is_unit())
        }
        Robinson::H => {
            param.require_uniformiser()?;
            settle(x.is_uniformiser())
        }
    }
}

/// `O(1/x)` for the forced witness of `xy = 1`. When `x = O(t^P)` with
/// `P ≥ 1`, any such witness has negative valuation.
fn recip_in_o(x: &Series) -> Result<EvalResult> {
    if x.is_zero_to_precision() {
        return Ok(if x.precision() >= 1 { EvalResult::False } else { IMPRECISE });
    }
    settle(x.invert()?.in_o())
}

fn eval_valued(kind: Valued, x: &Series) -> Result<EvalResult> {
    match kind {
        Valued::C => or_all([Ok(is_zero(x)), recip_in_o(x).map(EvalResult::not)]),
        Valued::E => and_all([settle(x.in_o()), recip_in_o(x), Ok(is_zero(x).not())]),
        Valued::D => settle(x.in_m()),
        Valued::F => settle(x.is_unit()),
        Valued::H => settle(x.is_uniformiser()),
    }
}

/// `v(x - f(π)) ≥ N + 1`.
fn eval_chi(radius: i64, center: &Series, x: &Series, param: &Param) -> Result<EvalResult> {
    param.require_uniformiser()?;
    lazy(|| {
        let shifted = match param {
            Param::T => center.clone(),
            Param::S(s) => compose(center, s)?,
        };
        let d = x.sub(&shifted)?;
        if d.terms().any(|(e, _)| e <= radius) {
            Ok(EvalResult::False)
        } else if d.precision() > radius {
            Ok(EvalResult::True)
        } else {
            Ok(IMPRECISE)
        }
    })
}

fn eval_call_at(template: &Template, x: &Series, param: &Param) -> Result<EvalResult> {
    match template {
        Template::Robinson { kind, l } => eval_robinson(*kind, *l, x, param),
        Template::Valued(kind) => eval_valued(*kind, x),
        // x is read as its stored truncation: a p^l-th power iff every stored
        // exponent is divisible by p^l (F is perfect)
        Template::Psi { q } => Ok(EvalResult::of(x.terms().all(|(e, _)| e.rem_euclid(*q as i64) == 0))),
        Template::Chi { radius, center, .. } => eval_chi(*radius, center, x, param),
        Template::Ax { .. } => Err(Error::NotEvaluable(
            "A'' alternates quantifiers over an infinite domain".into(),
        )),
    }
}

/// Decides a named template at `x` with parameter `t`.
pub fn eval_template(name: TemplateName, params: &Params, x: &Series) -> Result<EvalResult> {
    let template = build_template(name, params, x.field())?;
    eval_call_at(&template, x, &Param::T)
}

type Env = BTreeMap<String, Series>;

/// Precision given to exact constants so that it never binds against the
/// inputs: above every input precision by more than any pole order.
fn exact_precision(env: &Env) -> i64 {
    let top = env.values().map(Series::precision).max().unwrap_or(0);
    let pole = env
        .values()
        .filter_map(|s| s.leading().map(|(e, _)| (-e).max(0)))
        .max()
        .unwrap_or(0);
    top.max(0) + 2 * pole + 8
}

fn eval_term(t: &Term, env: &Env, field: Field, exact: i64) -> Result<Series> {
    let rec = |u: &Term| eval_term(u, env, field, exact);
    match t {
        Term::Var(v) => env
            .get(v)
            .cloned()
            .ok_or_else(|| Error::NotEvaluable(format!("no value for variable '{v}'"))),
        Term::T => Ok(Series::t(field, exact)),
        Term::Int(n) => Ok(Series::constant(field.int(*n), exact)),
        Term::Const(c) => Ok(Series::constant(c.clone(), exact)),
        Term::Add(xs) => xs.iter().try_fold(Series::zero(field, exact), |acc, x| acc.add(&rec(x)?)),
        Term::Mul(xs) => xs.iter().try_fold(Series::one(field, exact), |acc, x| acc.mul(&rec(x)?)),
        Term::Sub(a, b) => rec(a)?.sub(&rec(b)?),
        Term::Pow(b, e) => rec(b)?.pow(*e),
    }
}

struct Evaluator {
    field: Field,
    depth: usize,
}

impl Evaluator {
    fn term(&self, t: &Term, env: &Env) -> Result<Series> {
        eval_term(t, env, self.field, exact_precision(env))
    }

    fn node(&self, node: &Node, env: &Env) -> Result<EvalResult> {
        match node {
            Node::True => Ok(EvalResult::True),
            Node::False => Ok(EvalResult::False),
            Node::Eq(a, b) => lazy(|| Ok(is_zero(&self.term(a, env)?.sub(&self.term(b, env)?)?))),
            Node::Neq(a, b) => lazy(|| Ok(is_zero(&self.term(a, env)?.sub(&self.term(b, env)?)?).not())),
            Node::InO(a) => lazy(|| settle(self.term(a, env)?.in_o())),
            Node::Not(x) => Ok(self.node(x, env)?.not()),
            Node::And(xs) => and_all(xs.iter().map(|x| self.node(x, env))),
            Node::Or(xs) => or_all(xs.iter().map(|x| self.node(x, env))),
            Node::Call(c) => self.call(c, env),
            Node::Exists(v, body) => self.exists_u(v, body, env),
            Node::Forall(..) => Err(Error::NotEvaluable(
                "universal quantifiers are evaluated only inside templates".into(),
            )),
        }
    }

    fn call(&self, c: &Call, env: &Env) -> Result<EvalResult> {
        lazy(|| {
            let x = self.term(&c.arg, env)?;
            let param = match &c.param {
                None | Some(Term::T) => Param::T,
                Some(p) => Param::S(self.term(p, env)?),
            };
            eval_call_at(&c.template, &x, &param)
        })
    }

    /// `∃u body` where `body` pins `u` through a `chi(·; u)` conjunct: the
    /// truth of `v(x - f(u)) > N` depends only on `u mod t^K`,
    /// `K = N + 1 + 2·max(0, -v(f))`, so uniformisers are enumerated
    /// coefficient by coefficient, pruning branches already refuted.
    fn exists_u(&self, u: &str, body: &Node, env: &Env) -> Result<EvalResult> {
        if self.field.is_char_zero() {
            return Err(Error::CharZero);
        }
        let mut k = None::<i64>;
        body.walk_calls(&mut |c| {
            if let (Template::Chi { radius, center, .. }, Some(Term::Var(v))) = (&c.template, &c.param) {
                if v == u {
                    let pole = center.leading().map_or(0, |(e, _)| (-e).max(0));
                    let need = radius + 1 + 2 * pole;
                    k = Some(k.map_or(need, |k| k.max(need)));
                }
            }
        });
        let k = k.ok_or_else(|| {
            Error::NotEvaluable(format!("no chi conjunct bounds the quantified variable '{u}'"))
        })?;
        if k.max(2) as usize > self.depth {
            return Ok(EvalResult::Unknown(UnknownReason::SearchDepth));
        }
        let mut coeffs = vec![self.field.zero()];
        self.search(u, body, env, k.max(2) as usize, &mut coeffs)
    }

    fn search(
        &self,
        u: &str,
        body: &Node,
        env: &Env,
        k: usize,
        coeffs: &mut Vec<crate::field::FieldElement>,
    ) -> Result<EvalResult> {
        let j = coeffs.len();
        if j >= 2 {
            let terms = coeffs.iter().enumerate().skip(1).map(|(e, c)| (e as i64, c.clone()));
            let mut inner = env.clone();
            inner.insert(u.to_string(), Series::new(self.field, terms, j as i64));
            let r = self.node(body, &inner)?;
            if r == EvalResult::False || j == k {
                return Ok(r);
            }
        }
        let mut acc = EvalResult::False;
        let choices: Vec<_> = self
            .field
            .elements()
            .filter(|c| j != 1 || !c.is_zero())
            .collect();
        for c in choices {
            coeffs.push(c);
            let r = self.search(u, body, env, k, coeffs)?;
            coeffs.pop();
            match r {
                EvalResult::True => return Ok(EvalResult::True),
                EvalResult::Unknown(_) => acc = r,
                EvalResult::False => {}
            }
        }
        Ok(acc)
    }
}

/// Evaluates a formula with its free variables bound to series. Quantifiers
/// are supported only as bounded `∃u` constrained by `chi(·; u)`.
pub fn eval_formula(node: &Node, env: &BTreeMap<String, Series>, depth: usize) -> Result<EvalResult> {
    let field = env
        .values()
        .next()
        .map(Series::field)
        .ok_or_else(|| Error::NotEvaluable("no variable values supplied".into()))?;
    if let Some(s) = env.values().find(|s| s.field() != field) {
        return Err(Error::CharacteristicMismatch(field.characteristic(), s.characteristic()));
    }
    Evaluator { field, depth }.node(node, env)
}

/// Decides `∃u body` (the node must be an existential) at `x`.
pub fn eval_exists_u(node: &Node, var: &str, x: &Series, depth: usize) -> Result<EvalResult> {
    if !matches!(node, Node::Exists(..)) {
        return Err(Error::NotEvaluable("expected an existential formula".into()));
    }
    eval_formula(node, &BTreeMap::from([(var.to_string(), x.clone())]), depth)
}
