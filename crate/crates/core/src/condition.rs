//! Boolean mean-payoff conditions over `inf(i) ~ q` / `sup(i) ~ q` atoms.
//!
//! Text grammar (`&` binds tighter than `|`, `!` tightest):
//!
//! ```text
//! cond  := conj ('|' conj)*
//! conj  := unary ('&' unary)*
//! unary := '!' unary | '(' cond ')' | 'true' | 'false' | atom
//! atom  := ('inf' | 'sup') '(' index ')' op rational
//! op    := '>=' | '>' | '<=' | '<'
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::game::{GameError, LimitVector};
use crate::num::{parse_q, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LimitKind {
    Inf,
    Sup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cmp {
    Ge,
    Gt,
    Le,
    Lt,
}

impl Cmp {
    pub fn negate(self) -> Cmp {
        match self {
            Cmp::Ge => Cmp::Lt,
            Cmp::Gt => Cmp::Le,
            Cmp::Le => Cmp::Gt,
            Cmp::Lt => Cmp::Ge,
        }
    }

    pub fn holds(self, lhs: &Q, rhs: &Q) -> bool {
        match self {
            Cmp::Ge => lhs >= rhs,
            Cmp::Gt => lhs > rhs,
            Cmp::Le => lhs <= rhs,
            Cmp::Lt => lhs < rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
            Cmp::Le => "<=",
            Cmp::Lt => "<",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub kind: LimitKind,
    pub dim: usize,
    pub cmp: Cmp,
    pub threshold: Q,
}

impl Atom {
    pub fn new(kind: LimitKind, dim: usize, cmp: Cmp, threshold: Q) -> Self {
        Atom { kind, dim, cmp, threshold }
    }

    /// `LimInfAvg_dim >= 0`.
    pub fn inf_nonneg(dim: usize) -> Self {
        Atom::new(LimitKind::Inf, dim, Cmp::Ge, Q::from_integer(0.into()))
    }

    /// `LimSupAvg_dim >= 0`.
    pub fn sup_nonneg(dim: usize) -> Self {
        Atom::new(LimitKind::Sup, dim, Cmp::Ge, Q::from_integer(0.into()))
    }

    pub fn eval(&self, lv: &LimitVector) -> Result<bool, GameError> {
        let side = match self.kind {
            LimitKind::Inf => lv.inf(),
            LimitKind::Sup => lv.sup(),
        };
        let v = side.get(self.dim).ok_or(GameError::DimensionOutOfRange { dim: self.dim, dims: lv.dims() })?;
        Ok(self.cmp.holds(v, &self.threshold))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            LimitKind::Inf => "inf",
            LimitKind::Sup => "sup",
        };
        write!(f, "{}({}) {} {}", k, self.dim, self.cmp.symbol(), self.threshold)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Condition {
    Atom(Atom),
    And(Vec<Condition>),
    Or(Vec<Condition>),
    Not(Box<Condition>),
}

impl Condition {
    pub fn not(c: Condition) -> Condition {
        Condition::Not(Box::new(c))
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Condition::Atom(_) => true,
            Condition::And(cs) | Condition::Or(cs) => cs.iter().all(Condition::is_positive),
            Condition::Not(_) => false,
        }
    }

    pub fn max_dim(&self) -> Option<usize> {
        match self {
            Condition::Atom(a) => Some(a.dim),
            Condition::And(cs) | Condition::Or(cs) => cs.iter().filter_map(Condition::max_dim).max(),
            Condition::Not(c) => c.max_dim(),
        }
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        fn walk<'a>(c: &'a Condition, out: &mut Vec<&'a Atom>) {
            match c {
                Condition::Atom(a) => out.push(a),
                Condition::And(cs) | Condition::Or(cs) => cs.iter().for_each(|c| walk(c, out)),
                Condition::Not(c) => walk(c, out),
            }
        }
        walk(self, &mut out);
        out
    }
}

/// Pushes every negation to the atoms by flipping their comparison.
pub fn normalize_positive(cond: &Condition) -> Condition {
    fn go(c: &Condition, neg: bool) -> Condition {
        match c {
            Condition::Atom(a) => {
                let mut a = a.clone();
                if neg {
                    a.cmp = a.cmp.negate();
                }
                Condition::Atom(a)
            }
            Condition::And(cs) => {
                let kids = cs.iter().map(|c| go(c, neg)).collect();
                if neg {
                    Condition::Or(kids)
                } else {
                    Condition::And(kids)
                }
            }
            Condition::Or(cs) => {
                let kids = cs.iter().map(|c| go(c, neg)).collect();
                if neg {
                    Condition::And(kids)
                } else {
                    Condition::Or(kids)
                }
            }
            Condition::Not(c) => go(c, !neg),
        }
    }
    go(cond, false)
}

/// Structural evaluation. Empty `And` is true and empty `Or` is false.
pub fn eval_condition(cond: &Condition, lv: &LimitVector) -> Result<bool, GameError> {
    match cond {
        Condition::Atom(a) => a.eval(lv),
        Condition::And(cs) => {
            for c in cs {
                if !eval_condition(c, lv)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Condition::Or(cs) => {
            for c in cs {
                if eval_condition(c, lv)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Condition::Not(c) => Ok(!eval_condition(c, lv)?),
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // prec: 0 = or, 1 = and, 2 = unary
        fn write(c: &Condition, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
            let (sep, prec, kids) = match c {
                Condition::Atom(a) => return write!(f, "{a}"),
                Condition::Not(inner) => {
                    f.write_str("!")?;
                    return write(inner, f, 2);
                }
                Condition::And(cs) => (" & ", 1u8, cs),
                Condition::Or(cs) => (" | ", 0u8, cs),
            };
            if kids.is_empty() {
                return f.write_str(if prec == 1 { "true" } else { "false" });
            }
            let paren = prec < ctx || kids.len() == 1;
            if paren {
                f.write_str("(")?;
            }
            for (i, k) in kids.iter().enumerate() {
                if i > 0 {
                    f.write_str(sep)?;
                }
                // children of the same connective are parenthesized to keep the tree shape
                write(k, f, prec + 1)?;
            }
            if paren {
                f.write_str(")")?;
            }
            Ok(())
        }
        write(self, f, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("condition syntax error at byte {pos}: {msg}")]
pub struct ConditionParseError {
    pub pos: usize,
    pub msg: String,
}

pub fn parse_condition(text: &str) -> Result<Condition, ConditionParseError> {
    let mut p = Parser { s: text.as_bytes(), pos: 0 };
    let c = p.or()?;
    p.ws();
    if p.pos != p.s.len() {
        return Err(p.err("trailing input"));
    }
    Ok(c)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> ConditionParseError {
        ConditionParseError { pos: self.pos, msg: msg.to_string() }
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.ws();
        if self.s[self.pos..].starts_with(tok.as_bytes()) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn or(&mut self) -> Result<Condition, ConditionParseError> {
        let mut kids = vec![self.and()?];
        while self.eat("|") {
            kids.push(self.and()?);
        }
        Ok(if kids.len() == 1 { kids.pop().unwrap() } else { Condition::Or(kids) })
    }

    fn and(&mut self) -> Result<Condition, ConditionParseError> {
        let mut kids = vec![self.unary()?];
        while self.eat("&") {
            kids.push(self.unary()?);
        }
        Ok(if kids.len() == 1 { kids.pop().unwrap() } else { Condition::And(kids) })
    }

    fn unary(&mut self) -> Result<Condition, ConditionParseError> {
        if self.eat("!") {
            return Ok(Condition::not(self.unary()?));
        }
        if self.eat("true") {
            return Ok(Condition::And(Vec::new()));
        }
        if self.eat("false") {
            return Ok(Condition::Or(Vec::new()));
        }
        if self.eat("(") {
            let c = self.or()?;
            if !self.eat(")") {
                return Err(self.err("expected ')'"));
            }
            return Ok(c);
        }
        self.atom().map(Condition::Atom)
    }

    fn atom(&mut self) -> Result<Atom, ConditionParseError> {
        let kind = if self.eat("inf") {
            LimitKind::Inf
        } else if self.eat("sup") {
            LimitKind::Sup
        } else {
            return Err(self.err("expected 'inf', 'sup', '!' or '('"));
        };
        if !self.eat("(") {
            return Err(self.err("expected '('"));
        }
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let dim: usize = std::str::from_utf8(&self.s[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("expected a dimension index"))?;
        if !self.eat(")") {
            return Err(self.err("expected ')'"));
        }
        let cmp = if self.eat(">=") {
            Cmp::Ge
        } else if self.eat("<=") {
            Cmp::Le
        } else if self.eat(">") {
            Cmp::Gt
        } else if self.eat("<") {
            Cmp::Lt
        } else {
            return Err(self.err("expected a comparison operator"));
        };
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len() && matches!(self.s[self.pos], b'0'..=b'9' | b'-' | b'/' | b'+') {
            self.pos += 1;
        }
        let lit = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        let threshold = parse_q(lit).map_err(|_| ConditionParseError { pos: start, msg: "expected a rational".into() })?;
        Ok(Atom { kind, dim, cmp, threshold })
    }
}
