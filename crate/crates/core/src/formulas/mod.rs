//! First-order formulas over `F((t))`.
//!
//! Formulas are built in three languages: the ring language, the ring
//! language with the constant `t`, and the valued-field language with a
//! unary predicate `O` for the valuation ring. The named templates below are
//! the classical definitions of `O`, `M`, `O^×` and the uniformisers; calls
//! to them stay symbolic until [`Node::expand_calls`] or [`substitute_o`]
//! inlines them.

mod emit;
mod eval;
mod parse;
mod print;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::field::{is_prime, least_prime_other_than, Field, FieldElement};
use crate::series::Series;

pub use emit::{emit_beta_with_prime, emit_gamma, emit_gamma_with_prime, emit_orbit_formula_scalar};
pub use eval::{eval_exists_u, eval_formula, eval_template, EvalResult, UnknownReason, DEFAULT_DEPTH};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Var(String),
    /// The distinguished constant `t`.
    T,
    Int(i64),
    /// A non-integral rational constant; integers always use `Int`.
    Const(FieldElement),
    Add(Vec<Term>),
    Sub(Box<Term>, Box<Term>),
    Mul(Vec<Term>),
    /// Negative exponents denote inverses of parameters from `F(t)`.
    Pow(Box<Term>, i64),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn pow(base: Term, e: i64) -> Term {
        Term::Pow(Box::new(base), e)
    }

    pub fn sub(a: Term, b: Term) -> Term {
        Term::Sub(Box::new(a), Box::new(b))
    }

    /// Normalizes a field constant: integers (all of `F_p`) become `Int`.
    pub fn constant(c: &FieldElement) -> Term {
        match c {
            FieldElement::Mod { value, .. } => Term::Int(*value as i64),
            FieldElement::Rational(q) if q.is_integer() => {
                match i64::try_from(q.numer()) {
                    Ok(n) => Term::Int(n),
                    Err(_) => Term::Const(c.clone()),
                }
            }
            FieldElement::Rational(_) => Term::Const(c.clone()),
        }
    }

    /// `Σ c_e·t^e` over the stored terms of `f`.
    pub fn polynomial_in_t(f: &Series) -> Term {
        let mut parts: Vec<Term> = f
            .terms()
            .map(|(e, c)| {
                let mono = match e {
                    0 => None,
                    1 => Some(Term::T),
                    _ => Some(Term::pow(Term::T, e)),
                };
                match (mono, c.is_one()) {
                    (None, _) => Term::constant(c),
                    (Some(m), true) => m,
                    (Some(m), false) => Term::Mul(vec![Term::constant(c), m]),
                }
            })
            .collect();
        match parts.len() {
            0 => Term::Int(0),
            1 => parts.pop().unwrap(),
            _ => Term::Add(parts),
        }
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::T | Term::Int(_) | Term::Const(_) => {}
            Term::Add(xs) | Term::Mul(xs) => xs.iter().for_each(|x| x.collect_vars(out)),
            Term::Sub(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Term::Pow(b, _) => b.collect_vars(out),
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn mentions_t(&self) -> bool {
        match self {
            Term::T => true,
            Term::Var(_) | Term::Int(_) | Term::Const(_) => false,
            Term::Add(xs) | Term::Mul(xs) => xs.iter().any(Term::mentions_t),
            Term::Sub(a, b) => a.mentions_t() || b.mentions_t(),
            Term::Pow(b, _) => b.mentions_t(),
        }
    }

    /// Replaces variables by `map` and, if given, the constant `t` by `t_to`.
    fn subst(&self, map: &BTreeMap<String, Term>, t_to: Option<&Term>) -> Term {
        match self {
            Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::T => t_to.cloned().unwrap_or(Term::T),
            Term::Int(_) | Term::Const(_) => self.clone(),
            Term::Add(xs) => Term::Add(xs.iter().map(|x| x.subst(map, t_to)).collect()),
            Term::Mul(xs) => Term::Mul(xs.iter().map(|x| x.subst(map, t_to)).collect()),
            Term::Sub(a, b) => Term::sub(a.subst(map, t_to), b.subst(map, t_to)),
            Term::Pow(b, e) => Term::pow(b.subst(map, t_to), *e),
        }
    }
}

/// The `L_ring(t)` definitions, parametrised by a prime `l ≠ p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Robinson {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
}

/// The `L_vf` definitions, written with the predicate `O`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Valued {
    C,
    D,
    E,
    F,
    H,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Template {
    Robinson { kind: Robinson, l: u64 },
    Valued(Valued),
    /// Ax's parameter-free definition of `O` with exponent `m`.
    Ax { m: u64 },
    /// `∃w. w^q = y`, with `q = p^l`.
    Psi { q: u64 },
    /// `v(x - f(t)) > N` written as a product of `N + 1` elements of `M`.
    Chi { l: u64, radius: i64, center: Series },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Call {
    pub template: Template,
    pub arg: Term,
    /// Replaces `t` inside the template; present exactly for templates over `L_ring(t)`.
    pub param: Option<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    True,
    False,
    Eq(Term, Term),
    Neq(Term, Term),
    InO(Term),
    Not(Box<Node>),
    And(Vec<Node>),
    Or(Vec<Node>),
    Exists(String, Box<Node>),
    Forall(String, Box<Node>),
    Call(Box<Call>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lang {
    Ring,
    RingT,
    ValuedField,
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Lang::Ring => "ring",
            Lang::RingT => "ring(t)",
            Lang::ValuedField => "vf",
        })
    }
}

/// A formula with its language and its declared free variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    pub lang: Lang,
    pub free: Vec<String>,
    pub body: Node,
}

fn var(name: &str) -> Term {
    Term::var(name)
}

fn exists(v: &str, body: Node) -> Node {
    Node::Exists(v.to_string(), Box::new(body))
}

fn forall(v: &str, body: Node) -> Node {
    Node::Forall(v.to_string(), Box::new(body))
}

fn not(body: Node) -> Node {
    Node::Not(Box::new(body))
}

fn eq(a: Term, b: Term) -> Node {
    Node::Eq(a, b)
}

fn prod(xs: Vec<Term>) -> Term {
    Term::Mul(xs)
}

/// `1 + rest`
fn one_plus(rest: Term) -> Term {
    Term::Add(vec![Term::Int(1), rest])
}

impl Template {
    pub fn name(&self) -> &'static str {
        match self {
            Template::Robinson { kind, .. } => match kind {
                Robinson::A => "A",
                Robinson::B => "B",
                Robinson::C => "C",
                Robinson::D => "D",
                Robinson::E => "E",
                Robinson::F => "F",
                Robinson::G => "G",
                Robinson::H => "H",
            },
            Template::Valued(kind) => match kind {
                Valued::C => "C'",
                Valued::D => "D'",
                Valued::E => "E'",
                Valued::F => "F'",
                Valued::H => "H'",
            },
            Template::Ax { .. } => "A''",
            Template::Psi { .. } => "psi",
            Template::Chi { .. } => "chi",
        }
    }

    /// Name of the free variable in [`Template::definition`].
    pub fn formal(&self) -> &'static str {
        match self {
            Template::Psi { .. } => "y",
            _ => "x",
        }
    }

    pub fn takes_param(&self) -> bool {
        matches!(self, Template::Robinson { .. } | Template::Chi { .. })
    }

    pub fn lang(&self) -> Lang {
        match self {
            Template::Robinson { .. } | Template::Chi { .. } => Lang::RingT,
            Template::Valued(_) => Lang::ValuedField,
            Template::Ax { .. } | Template::Psi { .. } => Lang::Ring,
        }
    }

    /// A call of this template at `arg`, with parameter `t` where one is taken.
    pub fn at(&self, arg: Term) -> Node {
        self.at_param(arg, Term::T)
    }

    pub fn at_param(&self, arg: Term, param: Term) -> Node {
        Node::Call(Box::new(Call {
            template: self.clone(),
            arg,
            param: self.takes_param().then_some(param),
        }))
    }

    fn robinson(&self, kind: Robinson) -> Template {
        let (Template::Robinson { l, .. } | Template::Chi { l, .. }) = self else {
            unreachable!("only Robinson-type templates refer to other Robinson templates")
        };
        Template::Robinson { kind, l: *l }
    }

    /// The defining formula in the formal variable, with nested templates
    /// left as calls and `t` standing for the template parameter.
    pub fn definition(&self) -> Node {
        let x = || var("x");
        let y = || var("y");
        let z = || var("z");
        match self {
            Template::Robinson { kind, l } => {
                let l = *l as i64;
                let r = |k| self.robinson(k);
                match kind {
                    Robinson::A => exists(
                        "y",
                        eq(
                            one_plus(prod(vec![Term::pow(x(), l), Term::T])),
                            Term::pow(y(), l),
                        ),
                    ),
                    Robinson::B => not(exists(
                        "z",
                        Node::And(vec![
                            eq(prod(vec![x(), z(), Term::T]), Term::Int(1)),
                            r(Robinson::A).at(z()),
                        ]),
                    )),
                    Robinson::C => exists(
                        "y",
                        Node::Or(vec![
                            eq(x(), Term::Int(0)),
                            Node::And(vec![
                                eq(prod(vec![x(), y()]), Term::Int(1)),
                                not(r(Robinson::B).at(y())),
                            ]),
                        ]),
                    ),
                    Robinson::D => not(exists(
                        "y",
                        Node::And(vec![
                            eq(prod(vec![x(), y()]), Term::Int(1)),
                            r(Robinson::A).at(y()),
                        ]),
                    )),
                    Robinson::E => exists(
                        "y",
                        Node::And(vec![
                            r(Robinson::A).at(x()),
                            r(Robinson::A).at(y()),
                            eq(prod(vec![x(), y()]), Term::Int(1)),
                        ]),
                    ),
                    Robinson::F => not(exists(
                        "y",
                        Node::Or(vec![
                            r(Robinson::C).at(x()),
                            Node::And(vec![
                                eq(prod(vec![y(), x()]), Term::Int(1)),
                                r(Robinson::C).at(y()),
                            ]),
                        ]),
                    )),
                    Robinson::G => exists(
                        "y",
                        Node::And(vec![
                            r(Robinson::E).at(y()),
                            eq(x(), prod(vec![y(), Term::T])),
                        ]),
                    ),
                    Robinson::H => forall(
                        "y",
                        forall(
                            "z",
                            Node::And(vec![
                                r(Robinson::D).at(x()),
                                not(Node::And(vec![
                                    eq(x(), prod(vec![y(), z()])),
                                    r(Robinson::C).at(y()),
                                    r(Robinson::C).at(z()),
                                ])),
                            ]),
                        ),
                    ),
                }
            }
            Template::Valued(kind) => {
                let c = Template::Valued(Valued::C);
                match kind {
                    Valued::C => exists(
                        "y",
                        Node::Or(vec![
                            eq(x(), Term::Int(0)),
                            Node::And(vec![
                                eq(prod(vec![x(), y()]), Term::Int(1)),
                                not(Node::InO(y())),
                            ]),
                        ]),
                    ),
                    Valued::D => not(exists(
                        "y",
                        Node::And(vec![eq(prod(vec![x(), y()]), Term::Int(1)), Node::InO(y())]),
                    )),
                    Valued::E => exists(
                        "y",
                        Node::And(vec![
                            Node::InO(x()),
                            Node::InO(y()),
                            eq(prod(vec![x(), y()]), Term::Int(1)),
                        ]),
                    ),
                    Valued::F => not(exists(
                        "y",
                        Node::Or(vec![
                            c.at(x()),
                            Node::And(vec![eq(prod(vec![y(), x()]), Term::Int(1)), c.at(y())]),
                        ]),
                    )),
                    // the second conjunct refers to C', keeping the formula in L_vf
                    Valued::H => forall(
                        "y",
                        forall(
                            "z",
                            Node::And(vec![
                                Template::Valued(Valued::D).at(x()),
                                not(Node::And(vec![
                                    eq(x(), prod(vec![y(), z()])),
                                    c.at(y()),
                                    c.at(z()),
                                ])),
                            ]),
                        ),
                    ),
                }
            }
            Template::Ax { m } => {
                let m = *m as i64;
                let p = |name: &str| Term::pow(var(name), m);
                let w = || var("w");
                let body = Node::And(vec![
                    Node::Or(vec![
                        eq(p("z"), one_plus(prod(vec![w(), p("x1"), p("x2")]))),
                        Node::Neq(p("y1"), one_plus(prod(vec![w(), p("x1")]))),
                        Node::Neq(p("y2"), one_plus(prod(vec![w(), p("x2")]))),
                    ]),
                    Node::Neq(p("u"), w()),
                    eq(p("y"), one_plus(prod(vec![w(), p("x")]))),
                ]);
                let body = forall("y1", forall("y2", body));
                let body = exists("z", body);
                let body = forall("u", forall("x1", forall("x2", body)));
                exists("w", exists("y", body))
            }
            Template::Psi { q } => exists("w", eq(Term::pow(var("w"), *q as i64), y())),
            Template::Chi { radius, center, .. } => {
                let ys: Vec<String> = (1..=radius + 1).map(|k| format!("y{k}")).collect();
                let product = match ys.len() {
                    1 => var(&ys[0]),
                    _ => prod(ys.iter().map(|v| var(v)).collect()),
                };
                let mut conj = vec![eq(Term::sub(x(), Term::polynomial_in_t(center)), product)];
                let c = self.robinson(Robinson::C);
                conj.extend(ys.iter().map(|v| c.at(var(v))));
                ys.iter()
                    .rev()
                    .fold(Node::And(conj), |body, v| exists(v, body))
            }
        }
    }
}

/// Template names as accepted by [`template`] and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemplateName {
    Robinson(Robinson),
    Valued(Valued),
    Ax,
    Psi,
    Chi,
}

impl FromStr for TemplateName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use Robinson as R;
        Ok(match s {
            "A" => TemplateName::Robinson(R::A),
            "B" => TemplateName::Robinson(R::B),
            "C" => TemplateName::Robinson(R::C),
            "D" => TemplateName::Robinson(R::D),
            "E" => TemplateName::Robinson(R::E),
            "F" => TemplateName::Robinson(R::F),
            "G" => TemplateName::Robinson(R::G),
            "H" => TemplateName::Robinson(R::H),
            "C'" | "C′" => TemplateName::Valued(Valued::C),
            "D'" | "D′" => TemplateName::Valued(Valued::D),
            "E'" | "E′" => TemplateName::Valued(Valued::E),
            "F'" | "F′" => TemplateName::Valued(Valued::F),
            "H'" | "H′" => TemplateName::Valued(Valued::H),
            "A''" | "A″" => TemplateName::Ax,
            "psi" | "ψ" => TemplateName::Psi,
            "chi" | "χ" => TemplateName::Chi,
            _ => return Err(Error::BadParams(format!("unknown template '{s}'"))),
        })
    }
}

/// Parameters for [`template`]; unset primes default to the least prime `≠ p`.
#[derive(Debug, Clone, Default)]
pub struct Params {
    pub l: Option<u64>,
    pub m: Option<u64>,
    /// Power content for `psi` (the template uses `q = p^content`).
    pub content: u32,
    /// `N` and `f` for `chi`.
    pub radius: Option<i64>,
    pub center: Option<Series>,
}

fn check_prime_param(name: &str, value: u64, p: u64) -> Result<u64> {
    if !is_prime(value) || value == p {
        return Err(Error::BadParams(format!(
            "{name} = {value} must be a prime different from p = {p}"
        )));
    }
    Ok(value)
}

pub fn build_template(name: TemplateName, params: &Params, field: Field) -> Result<Template> {
    let p = field.characteristic();
    let l = check_prime_param("l", params.l.unwrap_or(least_prime_other_than(p)), p)?;
    Ok(match name {
        TemplateName::Robinson(kind) => Template::Robinson { kind, l },
        TemplateName::Valued(kind) => Template::Valued(kind),
        TemplateName::Ax => Template::Ax {
            m: check_prime_param("m", params.m.unwrap_or(l), p)?,
        },
        TemplateName::Psi => {
            if field.is_char_zero() && params.content != 0 {
                return Err(Error::BadParams("power content must be 0 in characteristic 0".into()));
            }
            Template::Psi {
                q: field.char_exponent().pow(params.content),
            }
        }
        TemplateName::Chi => {
            let radius = params
                .radius
                .ok_or_else(|| Error::BadParams("chi needs a radius N".into()))?;
            if radius < 0 {
                return Err(Error::BadParams(format!("chi radius N = {radius} must be non-negative")));
            }
            let center = params
                .center
                .as_ref()
                .ok_or_else(|| Error::BadParams("chi needs a center f".into()))?;
            if center.characteristic() != p {
                return Err(Error::CharacteristicMismatch(center.characteristic(), p));
            }
            Template::Chi {
                l,
                radius,
                center: center.clone(),
            }
        }
    })
}

/// The defining formula of a template in its formal variable.
pub fn template(name: TemplateName, params: &Params, field: Field) -> Result<Formula> {
    let t = build_template(name, params, field)?;
    Formula::new(t.lang(), [t.formal()], t.definition())
}

fn fresh(base: &str, used: &BTreeSet<String>) -> String {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    (1..)
        .map(|k| format!("{stem}{k}"))
        .find(|v| !used.contains(v))
        .expect("unbounded supply of names")
}

impl Node {
    fn walk_terms<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        match self {
            Node::True | Node::False => {}
            Node::Eq(a, b) | Node::Neq(a, b) => {
                f(a);
                f(b);
            }
            Node::InO(a) => f(a),
            Node::Not(x) | Node::Exists(_, x) | Node::Forall(_, x) => x.walk_terms(f),
            Node::And(xs) | Node::Or(xs) => xs.iter().for_each(|x| x.walk_terms(f)),
            Node::Call(c) => {
                f(&c.arg);
                if let Some(p) = &c.param {
                    f(p);
                }
            }
        }
    }

    fn walk_calls<'a>(&'a self, f: &mut impl FnMut(&'a Call)) {
        match self {
            Node::Call(c) => f(c),
            Node::Not(x) | Node::Exists(_, x) | Node::Forall(_, x) => x.walk_calls(f),
            Node::And(xs) | Node::Or(xs) => xs.iter().for_each(|x| x.walk_calls(f)),
            _ => {}
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        match self {
            Node::Exists(v, x) | Node::Forall(v, x) => {
                let mut out = x.free_vars();
                out.remove(v);
                out
            }
            Node::Not(x) => x.free_vars(),
            Node::And(xs) | Node::Or(xs) => xs.iter().flat_map(Node::free_vars).collect(),
            _ => {
                let mut out = BTreeSet::new();
                self.walk_terms(&mut |t| t.collect_vars(&mut out));
                out
            }
        }
    }

    /// Every variable name occurring free or bound.
    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk_terms(&mut |t| t.collect_vars(&mut out));
        self.collect_binders(&mut out);
        out
    }

    fn collect_binders(&self, out: &mut BTreeSet<String>) {
        match self {
            Node::Exists(v, x) | Node::Forall(v, x) => {
                out.insert(v.clone());
                x.collect_binders(out);
            }
            Node::Not(x) => x.collect_binders(out),
            Node::And(xs) | Node::Or(xs) => xs.iter().for_each(|x| x.collect_binders(out)),
            _ => {}
        }
    }

    pub fn mentions_t(&self) -> bool {
        let mut found = false;
        self.walk_terms(&mut |t| found |= t.mentions_t());
        found
    }

    /// Whether an `O` atom occurs, directly or through an `L_vf` template.
    pub fn mentions_o(&self) -> bool {
        let mut found = false;
        self.walk_o(&mut found);
        found
    }

    fn walk_o(&self, found: &mut bool) {
        match self {
            Node::InO(_) => *found = true,
            Node::Call(c) => *found |= c.template.lang() == Lang::ValuedField,
            Node::Not(x) | Node::Exists(_, x) | Node::Forall(_, x) => x.walk_o(found),
            Node::And(xs) | Node::Or(xs) => xs.iter().for_each(|x| x.walk_o(found)),
            _ => {}
        }
    }

    /// Capture-avoiding substitution of free variables (and of `t`).
    pub fn subst(&self, map: &BTreeMap<String, Term>, t_to: Option<&Term>) -> Node {
        let st = |t: &Term| t.subst(map, t_to);
        match self {
            Node::True | Node::False => self.clone(),
            Node::Eq(a, b) => Node::Eq(st(a), st(b)),
            Node::Neq(a, b) => Node::Neq(st(a), st(b)),
            Node::InO(a) => Node::InO(st(a)),
            Node::Not(x) => not(x.subst(map, t_to)),
            Node::And(xs) => Node::And(xs.iter().map(|x| x.subst(map, t_to)).collect()),
            Node::Or(xs) => Node::Or(xs.iter().map(|x| x.subst(map, t_to)).collect()),
            Node::Call(c) => Node::Call(Box::new(Call {
                template: c.template.clone(),
                arg: st(&c.arg),
                param: c.param.as_ref().map(st),
            })),
            Node::Exists(v, x) | Node::Forall(v, x) => {
                let mut inner = map.clone();
                inner.remove(v);
                let mut danger: BTreeSet<String> = inner.values().flat_map(Term::vars).collect();
                if let Some(t) = t_to {
                    danger.extend(t.vars());
                }
                let (v, body) = if danger.contains(v) {
                    let mut used = danger.clone();
                    used.extend(x.all_vars());
                    used.extend(inner.keys().cloned());
                    let v2 = fresh(v, &used);
                    let rename = BTreeMap::from([(v.clone(), Term::var(&v2))]);
                    (v2, x.subst(&rename, None))
                } else {
                    (v.clone(), (**x).clone())
                };
                let body = Box::new(body.subst(&inner, t_to));
                match self {
                    Node::Exists(..) => Node::Exists(v, body),
                    _ => Node::Forall(v, body),
                }
            }
        }
    }

    /// Inlines every call accepted by `pick`, recursively.
    pub fn expand_calls(&self, pick: &impl Fn(&Template) -> bool) -> Node {
        match self {
            Node::Call(c) if pick(&c.template) => c.expand().expand_calls(pick),
            Node::Not(x) => not(x.expand_calls(pick)),
            Node::And(xs) => Node::And(xs.iter().map(|x| x.expand_calls(pick)).collect()),
            Node::Or(xs) => Node::Or(xs.iter().map(|x| x.expand_calls(pick)).collect()),
            Node::Exists(v, x) => exists(v, x.expand_calls(pick)),
            Node::Forall(v, x) => forall(v, x.expand_calls(pick)),
            _ => self.clone(),
        }
    }

    fn replace_o(&self, m: u64) -> Node {
        match self {
            Node::InO(a) => Call {
                template: Template::Ax { m },
                arg: a.clone(),
                param: None,
            }
            .expand(),
            Node::Not(x) => not(x.replace_o(m)),
            Node::And(xs) => Node::And(xs.iter().map(|x| x.replace_o(m)).collect()),
            Node::Or(xs) => Node::Or(xs.iter().map(|x| x.replace_o(m)).collect()),
            Node::Exists(v, x) => exists(v, x.replace_o(m)),
            Node::Forall(v, x) => forall(v, x.replace_o(m)),
            _ => self.clone(),
        }
    }
}

impl Call {
    /// The template body instantiated at this call's argument and parameter.
    pub fn expand(&self) -> Node {
        let map = BTreeMap::from([(self.template.formal().to_string(), self.arg.clone())]);
        self.template.definition().subst(&map, self.param.as_ref())
    }
}

impl Formula {
    /// Checks scoping and the language tag.
    pub fn new<'a>(lang: Lang, free: impl IntoIterator<Item = &'a str>, body: Node) -> Result<Formula> {
        let free: BTreeSet<String> = free.into_iter().map(str::to_string).collect();
        if let Some(v) = body.free_vars().difference(&free).next() {
            return Err(Error::IllFormed(format!("variable '{v}' is neither bound nor declared free")));
        }
        if body.mentions_o() && lang != Lang::ValuedField {
            return Err(Error::IllFormed(format!("O-atom in a formula of language {lang}")));
        }
        if body.mentions_t() && lang != Lang::RingT {
            return Err(Error::IllFormed(format!("constant t in a formula of language {lang}")));
        }
        let mut bad = None;
        body.walk_calls(&mut |c| {
            if c.param.is_some() != c.template.takes_param() {
                bad = Some(c.template.name());
            }
        });
        if let Some(name) = bad {
            return Err(Error::IllFormed(format!("call of {name} with a wrong parameter list")));
        }
        Ok(Formula {
            lang,
            free: free.into_iter().collect(),
            body,
        })
    }

    /// The least language containing the body.
    pub fn infer(free: &[&str], body: Node) -> Result<Formula> {
        let lang = if body.mentions_o() {
            Lang::ValuedField
        } else if body.mentions_t() {
            Lang::RingT
        } else {
            Lang::Ring
        };
        Formula::new(lang, free.iter().copied(), body)
    }
}

/// Replaces every `O(u)` atom by Ax's formula `A''(u)` with exponent `m`,
/// after inlining the `L_vf` templates that contain such atoms.
pub fn substitute_o(f: &Formula, m: u64) -> Result<Formula> {
    let expanded = f
        .body
        .expand_calls(&|t| matches!(t, Template::Valued(_)))
        .replace_o(m);
    let lang = if expanded.mentions_t() { Lang::RingT } else { Lang::Ring };
    Formula::new(lang, f.free.iter().map(String::as_str), expanded)
}
