//! Reader for the canonical text form of formulas.

use super::{build_template, Call, Formula, Lang, Node, Params, Template, TemplateName, Term};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::series::parse::{parse_polynomial_at, Cursor};
use crate::series::Series;

struct Reader<'a> {
    cur: Cursor<'a>,
    field: Field,
}

impl Reader<'_> {
    fn literal(&mut self, negative: bool) -> Result<Term> {
        let num = self.cur.big_uint()?;
        let num = if negative { -num } else { num };
        if self.cur.eat(b'/') {
            let den = self.cur.big_uint()?;
            return Ok(Term::constant(&self.field.ratio(&num, &den)?));
        }
        i64::try_from(&num)
            .map(Term::Int)
            .map_err(|_| Error::syntax(self.cur.pos, "integer literal out of range"))
    }

    fn atom_term(&mut self) -> Result<Term> {
        match self.cur.peek() {
            Some(b'(') => {
                self.cur.pos += 1;
                let t = if self.cur.eat(b'-') {
                    self.literal(true)?
                } else {
                    self.sum()?
                };
                self.cur.expect(b')')?;
                Ok(t)
            }
            Some(c) if c.is_ascii_digit() => self.literal(false),
            Some(c) if c.is_ascii_lowercase() => {
                let start = self.cur.pos;
                let w = self.cur.word().expect("starts with a letter");
                if w == "t" {
                    Ok(Term::T)
                } else if w.contains('\'') {
                    Err(Error::syntax(start, format!("bad variable name '{w}'")))
                } else {
                    Ok(Term::var(w))
                }
            }
            _ => Err(Error::syntax(self.cur.pos, "expected a term")),
        }
    }

    fn power(&mut self) -> Result<Term> {
        let base = self.atom_term()?;
        if self.cur.eat(b'^') {
            Ok(Term::pow(base, self.cur.int()?))
        } else {
            Ok(base)
        }
    }

    fn product(&mut self) -> Result<Term> {
        let mut xs = vec![self.power()?];
        while self.cur.eat(b'*') {
            xs.push(self.power()?);
        }
        Ok(if xs.len() == 1 { xs.pop().unwrap() } else { Term::Mul(xs) })
    }

    fn sum(&mut self) -> Result<Term> {
        let first = self.product()?;
        if self.cur.eat(b'-') {
            return Ok(Term::sub(first, self.product()?));
        }
        let mut xs = vec![first];
        while self.cur.eat(b'+') {
            xs.push(self.product()?);
        }
        Ok(if xs.len() == 1 { xs.pop().unwrap() } else { Term::Add(xs) })
    }

    fn key_value(&mut self, key: &str) -> Result<i64> {
        self.cur.expect_str(key)?;
        self.cur.expect(b'=')?;
        self.cur.int()
    }

    fn template(&mut self, name: TemplateName) -> Result<Template> {
        let mut params = Params::default();
        if !matches!(name, TemplateName::Valued(_)) {
            self.cur.expect(b'[')?;
            match name {
                TemplateName::Robinson(_) => params.l = Some(self.key_value("l")? as u64),
                TemplateName::Ax => params.m = Some(self.key_value("m")? as u64),
                TemplateName::Psi => {
                    let q = self.key_value("q")?;
                    let p = self.field.char_exponent() as i64;
                    let mut content = 0;
                    let mut acc = 1;
                    while acc < q && p > 1 {
                        acc *= p;
                        content += 1;
                    }
                    if acc != q {
                        return Err(Error::BadParams(format!("q = {q} is not a power of p")));
                    }
                    params.content = content;
                }
                TemplateName::Chi => {
                    params.l = Some(self.key_value("l")? as u64);
                    self.cur.expect(b';')?;
                    let radius = self.key_value("N")?;
                    self.cur.expect(b';')?;
                    self.cur.expect(b'f')?;
                    self.cur.expect(b'=')?;
                    let terms = parse_polynomial_at(&mut self.cur, self.field)?;
                    params.radius = Some(radius);
                    params.center = Some(Series::new(self.field, terms, radius + 1));
                }
                TemplateName::Valued(_) => unreachable!(),
            }
            self.cur.expect(b']')?;
        }
        build_template(name, &params, self.field)
    }

    fn call(&mut self, name: TemplateName) -> Result<Node> {
        let template = self.template(name)?;
        self.cur.expect(b'(')?;
        let arg = self.sum()?;
        let param = if template.takes_param() {
            self.cur.expect(b';')?;
            Some(self.sum()?)
        } else {
            None
        };
        self.cur.expect(b')')?;
        Ok(Node::Call(Box::new(Call { template, arg, param })))
    }

    fn relation(&mut self) -> Result<Node> {
        let lhs = self.sum()?;
        if self.cur.eat(b'=') {
            Ok(Node::Eq(lhs, self.sum()?))
        } else if self.cur.eat_str("≠") {
            Ok(Node::Neq(lhs, self.sum()?))
        } else {
            Err(Error::syntax(self.cur.pos, "expected '=' or '≠'"))
        }
    }

    fn group(&mut self) -> Result<Node> {
        self.cur.expect(b'(')?;
        let first = self.unary()?;
        let (sep, and) = if self.cur.eat_str("∧") {
            ("∧", true)
        } else if self.cur.eat_str("∨") {
            ("∨", false)
        } else {
            self.cur.expect(b')')?;
            return Ok(first);
        };
        let mut xs = vec![first, self.unary()?];
        while self.cur.eat_str(sep) {
            xs.push(self.unary()?);
        }
        self.cur.expect(b')')?;
        Ok(if and { Node::And(xs) } else { Node::Or(xs) })
    }

    fn unary(&mut self) -> Result<Node> {
        if self.cur.eat_str("⊤") {
            return Ok(Node::True);
        }
        if self.cur.eat_str("⊥") {
            return Ok(Node::False);
        }
        if self.cur.eat_str("¬") {
            return Ok(Node::Not(Box::new(self.unary()?)));
        }
        for (sym, is_exists) in [("∃", true), ("∀", false)] {
            if self.cur.eat_str(sym) {
                let start = self.cur.pos;
                let v = match self.atom_term()? {
                    Term::Var(v) => v,
                    _ => return Err(Error::syntax(start, "expected a variable after a quantifier")),
                };
                self.cur.expect(b'.')?;
                let body = Box::new(self.unary()?);
                return Ok(if is_exists { Node::Exists(v, body) } else { Node::Forall(v, body) });
            }
        }
        if self.cur.peek() == Some(b'(') {
            let save = self.cur.pos;
            match self.group() {
                Ok(node) => return Ok(node),
                Err(_) => self.cur.pos = save,
            }
            return self.relation();
        }
        let save = self.cur.pos;
        if let Some(w) = self.cur.word() {
            if w == "O" {
                self.cur.expect(b'(')?;
                let t = self.sum()?;
                self.cur.expect(b')')?;
                return Ok(Node::InO(t));
            }
            if let Ok(name) = w.parse::<TemplateName>() {
                let next = self.cur.peek();
                let valued = matches!(name, TemplateName::Valued(_));
                if (valued && next == Some(b'(')) || (!valued && next == Some(b'[')) {
                    return self.call(name);
                }
            }
        }
        self.cur.pos = save;
        self.relation()
    }
}

impl Node {
    pub fn parse(text: &str, field: Field) -> Result<Node> {
        let mut r = Reader {
            cur: Cursor::new(text),
            field,
        };
        let node = r.unary()?;
        if !r.cur.at_end() {
            return Err(Error::syntax(r.cur.pos, "trailing input"));
        }
        Ok(node)
    }
}

impl Term {
    pub fn parse(text: &str, field: Field) -> Result<Term> {
        let mut r = Reader {
            cur: Cursor::new(text),
            field,
        };
        let t = r.sum()?;
        if !r.cur.at_end() {
            return Err(Error::syntax(r.cur.pos, "trailing input"));
        }
        Ok(t)
    }
}

impl Formula {
    /// Parses a body and declares exactly its free variables.
    pub fn parse(text: &str, lang: Lang, field: Field) -> Result<Formula> {
        let body = Node::parse(text, field)?;
        let free = body.free_vars();
        Formula::new(lang, free.iter().map(String::as_str), body)
    }
}
