//! Canonical text form. Connectives are always parenthesized and quantifier
//! bodies are single units, so the printed form parses back unambiguously.

use std::fmt;

use super::{Call, Formula, Node, Template, Term};

fn level(t: &Term) -> u8 {
    match t {
        Term::Add(_) | Term::Sub(..) => 0,
        Term::Mul(_) => 1,
        Term::Pow(..) => 2,
        Term::Var(_) | Term::T | Term::Int(_) | Term::Const(_) => 3,
    }
}

fn term_at(t: &Term, min: u8) -> String {
    let s = t.to_string();
    if level(t) < min {
        format!("({s})")
    } else {
        s
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::T => f.write_str("t"),
            Term::Int(n) if *n < 0 => write!(f, "({n})"),
            Term::Int(n) => write!(f, "{n}"),
            Term::Const(c) => write!(f, "({c})"),
            Term::Add(xs) => {
                let parts: Vec<_> = xs.iter().map(|x| term_at(x, 1)).collect();
                f.write_str(&parts.join(" + "))
            }
            Term::Sub(a, b) => write!(f, "{} - {}", term_at(a, 1), term_at(b, 1)),
            Term::Mul(xs) => {
                let parts: Vec<_> = xs.iter().map(|x| term_at(x, 2)).collect();
                f.write_str(&parts.join("*"))
            }
            Term::Pow(b, e) => write!(f, "{}^{e}", term_at(b, 3)),
        }
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())?;
        match self {
            Template::Robinson { l, .. } => write!(f, "[l={l}]"),
            Template::Valued(_) => Ok(()),
            Template::Ax { m } => write!(f, "[m={m}]"),
            Template::Psi { q } => write!(f, "[q={q}]"),
            Template::Chi { l, radius, center } => {
                write!(f, "[l={l}; N={radius}; f={}]", center.polynomial_string())
            }
        }
    }
}

impl fmt::Display for Call {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.param {
            Some(p) => write!(f, "{}({}; {p})", self.template, self.arg),
            None => write!(f, "{}({})", self.template, self.arg),
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::True => f.write_str("⊤"),
            Node::False => f.write_str("⊥"),
            Node::Eq(a, b) => write!(f, "{a} = {b}"),
            Node::Neq(a, b) => write!(f, "{a} ≠ {b}"),
            Node::InO(a) => write!(f, "O({a})"),
            Node::Not(x) => write!(f, "¬{x}"),
            Node::And(xs) | Node::Or(xs) => {
                let sep = if matches!(self, Node::And(_)) { " ∧ " } else { " ∨ " };
                let parts: Vec<_> = xs.iter().map(Node::to_string).collect();
                write!(f, "({})", parts.join(sep))
            }
            Node::Exists(v, x) => write!(f, "∃{v}. {x}"),
            Node::Forall(v, x) => write!(f, "∀{v}. {x}"),
            Node::Call(c) => write!(f, "{c}"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.body)
    }
}
