//! Exact predicates over play totals that are affine in the round count.
//!
//! A [`Lin`] is `sum_d a_d * T_d + b * n + c` where `T` are the totals and
//! `n` the number of rounds. Along `j` repetitions of a self-loop with weight
//! `w` it becomes `f0 + s * j`, so the truth of a formula over such atoms is
//! piecewise constant in `j` with breakpoints that can be computed exactly.
//! That lets a monitor certify "every round of this run" without visiting
//! each round, and lets a strategy find the least loop count meeting a goal.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::num::{qi, Int, Q};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lin {
    pub coef: Vec<(usize, Q)>,
    pub rounds: Q,
    pub constant: Q,
}

impl Lin {
    pub fn zero() -> Self {
        Lin { coef: Vec::new(), rounds: Q::zero(), constant: Q::zero() }
    }

    /// `T_d`.
    pub fn dim(d: usize) -> Self {
        Lin { coef: vec![(d, Q::one())], rounds: Q::zero(), constant: Q::zero() }
    }

    /// `T_d - c * n`, i.e. the sign of `Avg_d - c`.
    pub fn avg_minus(d: usize, c: &Q) -> Self {
        Lin { coef: vec![(d, Q::one())], rounds: -c.clone(), constant: Q::zero() }
    }

    pub fn scaled(mut self, k: &Q) -> Self {
        for (_, a) in &mut self.coef {
            *a *= k;
        }
        self.rounds *= k;
        self.constant *= k;
        self
    }

    pub fn plus(mut self, other: Lin) -> Self {
        self.coef.extend(other.coef);
        self.rounds += other.rounds;
        self.constant += other.constant;
        self
    }

    pub fn add_dim(mut self, d: usize, a: Q) -> Self {
        self.coef.push((d, a));
        self
    }

    pub fn add_const(mut self, c: Q) -> Self {
        self.constant += c;
        self
    }

    pub fn neg(self) -> Self {
        self.scaled(&-Q::one())
    }

    pub fn eval(&self, totals: &[Int], rounds: &Int) -> Q {
        let mut v = self.constant.clone() + &self.rounds * qi(rounds);
        for (d, a) in &self.coef {
            v += a * qi(&totals[*d]);
        }
        v
    }

    /// Per-repetition change along a loop with weight `w` (one round each).
    pub fn slope(&self, w: &[i64]) -> Q {
        let mut s = self.rounds.clone();
        for (d, a) in &self.coef {
            s += a * Q::from_integer(Int::from(w[*d]));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pred {
    /// `lin >= 0`
    Ge(Lin),
    /// `lin > 0`
    Gt(Lin),
    And(Vec<Pred>),
    Or(Vec<Pred>),
}

impl Pred {
    pub fn le(lin: Lin) -> Pred {
        Pred::Ge(lin.neg())
    }

    pub fn lt(lin: Lin) -> Pred {
        Pred::Gt(lin.neg())
    }

    /// `Avg_d >= c`
    pub fn avg_ge(d: usize, c: &Q) -> Pred {
        Pred::Ge(Lin::avg_minus(d, c))
    }

    /// `Avg_d <= c`
    pub fn avg_le(d: usize, c: &Q) -> Pred {
        Pred::le(Lin::avg_minus(d, c))
    }

    /// `Avg_d < c`
    pub fn avg_lt(d: usize, c: &Q) -> Pred {
        Pred::lt(Lin::avg_minus(d, c))
    }

    /// `a => b`, as `!a | b` with the negation pushed into the atoms.
    pub fn implies(a: Pred, b: Pred) -> Pred {
        Pred::Or(vec![a.negate(), b])
    }

    pub fn negate(self) -> Pred {
        match self {
            Pred::Ge(l) => Pred::Gt(l.neg()),
            Pred::Gt(l) => Pred::Ge(l.neg()),
            Pred::And(ps) => Pred::Or(ps.into_iter().map(Pred::negate).collect()),
            Pred::Or(ps) => Pred::And(ps.into_iter().map(Pred::negate).collect()),
        }
    }

    pub fn eval(&self, totals: &[Int], rounds: &Int) -> bool {
        match self {
            Pred::Ge(l) => !l.eval(totals, rounds).is_negative(),
            Pred::Gt(l) => l.eval(totals, rounds).is_positive(),
            Pred::And(ps) => ps.iter().all(|p| p.eval(totals, rounds)),
            Pred::Or(ps) => ps.iter().any(|p| p.eval(totals, rounds)),
        }
    }

    /// Truth after `j` repetitions, from the values `f0` and slopes `s` of the atoms.
    fn eval_at(&self, j: &Int, atoms: &mut std::slice::Iter<'_, (Int, Int)>) -> bool {
        match self {
            Pred::Ge(_) => {
                let (f0, s) = atoms.next().unwrap();
                !(f0 + s * j).is_negative()
            }
            Pred::Gt(_) => {
                let (f0, s) = atoms.next().unwrap();
                (f0 + s * j).is_positive()
            }
            // no short-circuit: every atom must be consumed in order
            Pred::And(ps) => ps.iter().fold(true, |acc, p| p.eval_at(j, atoms) & acc),
            Pred::Or(ps) => ps.iter().fold(false, |acc, p| p.eval_at(j, atoms) | acc),
        }
    }

    fn atoms<'a>(&'a self, out: &mut Vec<(&'a Lin, bool)>) {
        match self {
            Pred::Ge(l) => out.push((l, false)),
            Pred::Gt(l) => out.push((l, true)),
            Pred::And(ps) | Pred::Or(ps) => ps.iter().for_each(|p| p.atoms(out)),
        }
    }
}

/// Points in `[lo, hi]` where some atom's truth may change along the loop,
/// together with `lo`. The formula is constant between consecutive points.
fn breakpoints(strict: &[bool], vals: &[(Int, Int)], lo: &Int, hi: &Int) -> Vec<Int> {
    let mut pts = vec![lo.clone()];
    for (strict, (f0, s)) in strict.iter().zip(vals) {
        if s.is_zero() {
            continue;
        }
        // first j on the other side of the root -f0/s
        let t = match (s.is_positive(), *strict) {
            (true, false) => ceil_div(&-f0, s),
            (true, true) => floor_div(&-f0, s) + 1,
            (false, false) => floor_div(&-f0, s) + 1,
            (false, true) => ceil_div(&-f0, s),
        };
        if &t > lo && &t <= hi {
            pts.push(t);
        }
    }
    pts.sort();
    pts.dedup();
    pts
}

fn floor_div(a: &Int, b: &Int) -> Int {
    a.div_floor(b)
}

fn ceil_div(a: &Int, b: &Int) -> Int {
    -(-a).div_floor(b)
}

/// Value and per-repetition slope of every atom, scaled by a positive
/// common denominator so that all arithmetic stays in integers.
fn atom_values(pred: &Pred, totals: &[Int], rounds: &Int, w: &[i64]) -> (Vec<bool>, Vec<(Int, Int)>) {
    let mut atoms = Vec::new();
    pred.atoms(&mut atoms);
    let strict = atoms.iter().map(|(_, s)| *s).collect();
    let vals = atoms
        .iter()
        .map(|(l, _)| {
            let den = l.coef.iter().map(|(_, a)| a.denom()).fold(l.rounds.denom().lcm(l.constant.denom()), |acc, d| acc.lcm(d));
            let scale = |a: &Q| if a.denom() == &den { a.numer().clone() } else { a.numer() * (&den / a.denom()) };
            let b = scale(&l.rounds);
            let mut f0 = scale(&l.constant) + &b * rounds;
            let mut s = b;
            for (d, a) in &l.coef {
                let a = scale(a);
                f0 += &a * &totals[*d];
                s += &a * Int::from(w[*d]);
            }
            (f0, s)
        })
        .collect();
    (strict, vals)
}

/// First `j` in `[1, count]` at which `pred` fails after `j` repetitions of a
/// self-loop with weight `w`, starting from `(totals, rounds)`.
pub fn first_failure(pred: &Pred, totals: &[Int], rounds: &Int, w: &[i64], count: &Int) -> Option<Int> {
    if !count.is_positive() {
        return None;
    }
    let (strict, vals) = atom_values(pred, totals, rounds, w);
    if count.is_one() {
        return (!pred.eval_at(count, &mut vals.iter())).then(|| count.clone());
    }
    breakpoints(&strict, &vals, &Int::one(), count).into_iter().find(|j| !pred.eval_at(j, &mut vals.iter()))
}

/// Least `j >= 0` such that `pred` holds after `j` repetitions of the loop
/// `w` followed by `extra` zero-weight rounds; `None` if it never holds.
pub fn min_repetitions(pred: &Pred, totals: &[Int], rounds: &Int, w: &[i64], extra: u64) -> Option<Int> {
    let shifted = rounds + Int::from(extra);
    let (strict, vals) = atom_values(pred, totals, &shifted, w);
    // beyond the last breakpoint the formula is constant, so one probe past
    // it decides the tail
    let far = vals
        .iter()
        .filter(|(_, s)| !s.is_zero())
        .map(|(f0, s)| ceil_div(&-f0, s).abs() + 2)
        .max()
        .unwrap_or_else(Int::one);
    let pts = breakpoints(&strict, &vals, &Int::zero(), &far);
    pts.into_iter().chain(std::iter::once(far)).find(|j| pred.eval_at(j, &mut vals.iter()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, q};

    fn brute_first(pred: &Pred, t: &[Int], n: &Int, w: &[i64], count: i64) -> Option<Int> {
        let mut t = t.to_vec();
        let mut n = n.clone();
        for j in 1..=count {
            for (d, x) in t.iter_mut().enumerate() {
                *x += w[d];
            }
            n += 1;
            if !pred.eval(&t, &n) {
                return Some(int(j));
            }
        }
        None
    }

    #[test]
    fn avg_threshold_crossing() {
        // Avg_0 <= -1/2 starting at T=0, n=0 with loop weight -1 holds from round 1
        let p = Pred::avg_le(0, &q(-1, 2));
        assert_eq!(first_failure(&p, &[int(0)], &int(0), &[-1], &int(100)), None);
        // starting at T=10, n=10 it first holds after 30 more rounds: (10-j)/(10+j) <= -1/2
        assert_eq!(min_repetitions(&p, &[int(10)], &int(10), &[-1], 0), Some(int(30)));
        assert_eq!(first_failure(&p, &[int(10)], &int(10), &[-1], &int(5)), Some(int(1)));
    }

    #[test]
    fn matches_brute_force() {
        let preds = [
            Pred::Or(vec![Pred::avg_ge(0, &q(-1, 11)), Pred::avg_ge(1, &q(-1, 11))]),
            Pred::implies(Pred::avg_le(0, &q(-1, 7)), Pred::avg_ge(1, &q(-1, 7))),
            Pred::And(vec![Pred::avg_lt(0, &q(1, 3)), Pred::Gt(Lin::dim(1).add_const(q(-5, 1)))]),
        ];
        let ws: [[i64; 2]; 4] = [[-1, 1], [1, -1], [0, 2], [-1, 0]];
        for p in &preds {
            for w in &ws {
                for t0 in [-7i64, 0, 4] {
                    for n0 in [0i64, 3, 20] {
                        let t = [int(t0), int(-t0 / 2)];
                        let got = first_failure(p, &t, &int(n0), w, &int(60));
                        assert_eq!(got, brute_first(p, &t, &int(n0), w, 60), "{p:?} {w:?} {t0} {n0}");
                    }
                }
            }
        }
    }

    #[test]
    fn unreachable_goal() {
        let p = Pred::avg_ge(0, &q(1, 1));
        assert_eq!(min_repetitions(&p, &[int(0)], &int(5), &[-1], 0), None);
    }
}
