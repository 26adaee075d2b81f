//! Mean-payoff expressions: `infavg`/`supavg` atoms closed under min, max,
//! sum and negation, evaluated on limit vectors.

use std::fmt;

use num_traits::Zero;

use crate::condition::eval_condition;
use crate::game::{GameError, LimitVector};
use crate::num::Q;
use crate::reduction::{build_condition, DimensionLayout};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    InfAvg(usize),
    SupAvg(usize),
    Min(Vec<Expr>),
    Max(Vec<Expr>),
    Sum(Vec<Expr>),
    Neg(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExprError {
    #[error("dimension {dim} out of range for {dims} dimensions")]
    DimensionOutOfRange { dim: usize, dims: usize },
    #[error("{0} needs at least two arguments")]
    Arity(&'static str),
    #[error("expected the two-counter layout (10 dimensions), got {0} dimensions")]
    WrongLayout(usize),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

impl Expr {
    pub fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }

    pub fn max_dim(&self) -> Option<usize> {
        match self {
            Expr::InfAvg(d) | Expr::SupAvg(d) => Some(*d),
            Expr::Min(es) | Expr::Max(es) | Expr::Sum(es) => es.iter().filter_map(Expr::max_dim).max(),
            Expr::Neg(e) => e.max_dim(),
        }
    }

    /// Checks the arity rule and that all atoms fit `dims`.
    pub fn validate(&self, dims: usize) -> Result<(), ExprError> {
        match self {
            Expr::InfAvg(d) | Expr::SupAvg(d) if *d >= dims => Err(ExprError::DimensionOutOfRange { dim: *d, dims }),
            Expr::InfAvg(_) | Expr::SupAvg(_) => Ok(()),
            Expr::Min(es) | Expr::Max(es) | Expr::Sum(es) => {
                if es.len() < 2 {
                    return Err(ExprError::Arity(self.head()));
                }
                es.iter().try_for_each(|e| e.validate(dims))
            }
            Expr::Neg(e) => e.validate(dims),
        }
    }

    fn head(&self) -> &'static str {
        match self {
            Expr::InfAvg(_) => "infavg",
            Expr::SupAvg(_) => "supavg",
            Expr::Min(_) => "min",
            Expr::Max(_) => "max",
            Expr::Sum(_) => "sum",
            Expr::Neg(_) => "neg",
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::InfAvg(d) | Expr::SupAvg(d) => write!(f, "{}({d})", self.head()),
            Expr::Neg(e) => write!(f, "neg({e})"),
            Expr::Min(es) | Expr::Max(es) | Expr::Sum(es) => {
                write!(f, "{}(", self.head())?;
                for (i, e) in es.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{e}")?;
                }
                f.write_str(")")
            }
        }
    }
}

pub fn eval_expr(e: &Expr, lv: &LimitVector) -> Result<Q, ExprError> {
    let dims = lv.dims();
    let fold = |es: &[Expr], pick: fn(Q, Q) -> Q| -> Result<Q, ExprError> {
        let mut it = es.iter();
        let first = it.next().ok_or(ExprError::Arity(e.head()))?;
        it.try_fold(eval_expr(first, lv)?, |acc, x| Ok(pick(acc, eval_expr(x, lv)?)))
    };
    match e {
        Expr::InfAvg(d) | Expr::SupAvg(d) if *d >= dims => Err(ExprError::DimensionOutOfRange { dim: *d, dims }),
        Expr::InfAvg(d) => Ok(lv.inf()[*d].clone()),
        Expr::SupAvg(d) => Ok(lv.sup()[*d].clone()),
        Expr::Min(es) => fold(es, |a, b| a.min(b)),
        Expr::Max(es) => fold(es, |a, b| a.max(b)),
        Expr::Sum(es) => fold(es, |a, b| a + b),
        Expr::Neg(x) => Ok(-eval_expr(x, lv)?),
    }
}

/// The expressions equivalent to the game condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionExprs {
    /// `max(min(infavg l, infavg r), supavg gs)`
    pub e1: Expr,
    /// `max(min(infavg of every counter dimension), supavg gc)`
    pub e2: Expr,
    /// `min(supavg x, supavg y)`
    pub e3: Expr,
    /// `min(e1, e2, e3)`
    pub e: Expr,
    /// `neg(e)`
    pub f: Expr,
}

/// The expressions for the two-counter layout.
pub fn build_condition_exprs(layout: &DimensionLayout) -> Result<ConditionExprs, ExprError> {
    if layout.counters() != 2 {
        return Err(ExprError::WrongLayout(layout.k()));
    }
    Ok(expressions_for(layout))
}

/// Same construction for any layout; with one counter the inner minimum of
/// `e2` has the two atoms of that counter.
pub fn expressions_for(layout: &DimensionLayout) -> ConditionExprs {
    let e1 = Expr::Max(vec![Expr::Min(vec![Expr::InfAvg(layout.l()), Expr::InfAvg(layout.r())]), Expr::SupAvg(layout.gs())]);
    let e2 = Expr::Max(vec![
        Expr::Min(layout.counter_dims().into_iter().map(Expr::InfAvg).collect()),
        Expr::SupAvg(layout.gc()),
    ]);
    let e3 = Expr::Min(vec![Expr::SupAvg(layout.x()), Expr::SupAvg(layout.y())]);
    let e = Expr::Min(vec![e1.clone(), e2.clone(), e3.clone()]);
    let f = e.clone().neg();
    ConditionExprs { e1, e2, e3, e, f }
}

/// `(phi(lv) == (E(lv) >= 0), !phi(lv) == (F(lv) > 0))` for the game
/// condition `phi` of `layout`. Both components are true when the
/// equivalence holds.
pub fn check_equivalence(lv: &LimitVector, layout: &DimensionLayout) -> Result<(bool, bool), ExprError> {
    if lv.dims() != layout.k() {
        return Err(ExprError::DimensionOutOfRange { dim: layout.k().saturating_sub(1), dims: lv.dims() });
    }
    let t = expressions_for(layout);
    let phi = eval_condition(&build_condition(layout), lv).map_err(|e| match e {
        GameError::DimensionOutOfRange { dim, dims } => ExprError::DimensionOutOfRange { dim, dims },
        _ => ExprError::WrongLayout(lv.dims()),
    })?;
    let e = eval_expr(&t.e, lv)?;
    let f = eval_expr(&t.f, lv)?;
    Ok((phi == (e >= Q::zero()), !phi == (f > Q::zero())))
}

/// Parses `infavg(i)`, `supavg(i)`, `min(..)`, `max(..)`, `sum(..)`, `neg(..)`.
/// `#` starts a comment that runs to the end of the line.
pub fn parse_expr(text: &str) -> Result<Expr, ExprError> {
    let cleaned: String = text.lines().map(|l| l.split('#').next().unwrap_or("")).collect::<Vec<_>>().join("\n");
    let mut p = Parser { s: cleaned.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.ws();
    if p.pos != p.s.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> ExprError {
        ExprError::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> Result<(), ExprError> {
        self.ws();
        if self.s.get(self.pos) == Some(&c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected {:?}", c as char)))
        }
    }

    fn word(&mut self) -> &str {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos]).unwrap_or("")
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        let head = self.word().to_string();
        self.eat(b'(')?;
        let e = match head.as_str() {
            "infavg" | "supavg" => {
                let w = self.word();
                let d: usize = w.parse().map_err(|_| self.err("expected a dimension index"))?;
                if head == "infavg" {
                    Expr::InfAvg(d)
                } else {
                    Expr::SupAvg(d)
                }
            }
            "neg" => self.expr()?.neg(),
            "min" | "max" | "sum" => {
                let mut args = vec![self.expr()?];
                loop {
                    self.ws();
                    if self.s.get(self.pos) == Some(&b',') {
                        self.pos += 1;
                        args.push(self.expr()?);
                    } else {
                        break;
                    }
                }
                if args.len() < 2 {
                    return Err(ExprError::Parse { pos: start, msg: format!("{head} needs at least two arguments") });
                }
                match head.as_str() {
                    "min" => Expr::Min(args),
                    "max" => Expr::Max(args),
                    _ => Expr::Sum(args),
                }
            }
            "" => return Err(ExprError::Parse { pos: start, msg: "expected an expression".into() }),
            other => return Err(ExprError::Parse { pos: start, msg: format!("unknown operator {other:?}") }),
        };
        self.eat(b')')?;
        Ok(e)
    }
}
