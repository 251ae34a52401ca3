use std::collections::HashMap;

use num_integer::Integer;
use num_traits::ToPrimitive;

use super::expr::{CoordinateSystem, Expr, Func, Node, Rational, TIME};
use crate::error::{Error, Result};

fn domain(msg: impl Into<String>) -> Error {
    Error::EvaluationDomain(msg.into())
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(domain(format!("{what} is not finite")))
    }
}

/// Real power with the odd-root convention for negative bases.
fn real_pow(base: f64, k: &Rational) -> Result<f64> {
    if k.is_integer() {
        let n = k.numer().to_i32().ok_or_else(|| domain("exponent too large"))?;
        if base == 0.0 && n < 0 {
            return Err(domain("division by zero"));
        }
        return finite(base.powi(n), "power");
    }
    let kf = k.to_f64().unwrap_or(f64::NAN);
    if base > 0.0 {
        return finite(base.powf(kf), "power");
    }
    if base == 0.0 {
        return if kf > 0.0 {
            Ok(0.0)
        } else {
            Err(domain("division by zero"))
        };
    }
    if k.denom().is_odd() {
        let mag = (-base).powf(kf);
        let sign = if k.numer().is_odd() { -1.0 } else { 1.0 };
        finite(sign * mag, "power")
    } else {
        Err(domain(format!("even root of negative number {base}")))
    }
}

fn apply(f: Func, a: f64) -> Result<f64> {
    let v = match f {
        Func::Exp => a.exp(),
        Func::Log => {
            if a <= 0.0 {
                return Err(domain(format!("log of non-positive value {a}")));
            }
            a.ln()
        }
        Func::Sin => a.sin(),
        Func::Cos => a.cos(),
        Func::Sqrt => {
            if a < 0.0 {
                return Err(domain(format!("sqrt of negative value {a}")));
            }
            a.sqrt()
        }
    };
    finite(v, f.name())
}

fn eval_rec(e: &Expr, lookup: &dyn Fn(&str) -> Option<f64>) -> Result<f64> {
    match e.node() {
        Node::Const(c) => Ok(c.to_f64().unwrap_or(f64::NAN)),
        Node::Var(v) => lookup(v).ok_or_else(|| Error::UnknownVariable(v.clone())),
        Node::Sum(xs) => {
            let mut s = 0.0;
            for x in xs {
                s += eval_rec(x, lookup)?;
            }
            finite(s, "sum")
        }
        Node::Product(xs) => {
            let mut p = 1.0;
            for x in xs {
                p *= eval_rec(x, lookup)?;
            }
            finite(p, "product")
        }
        Node::Power(b, k) => real_pow(eval_rec(b, lookup)?, k),
        Node::Func(f, a) => apply(*f, eval_rec(a, lookup)?),
    }
}

/// Evaluates `e` in IEEE double precision at the given point.
pub fn eval(e: &Expr, point: &HashMap<String, f64>) -> Result<f64> {
    eval_rec(e, &|name| point.get(name).copied())
}

/// Evaluates `e` with variables resolved by `lookup`.
pub fn eval_with(e: &Expr, lookup: &dyn Fn(&str) -> Option<f64>) -> Result<f64> {
    eval_rec(e, lookup)
}

#[derive(Clone, Debug)]
enum Op {
    Const(f64),
    Slot(usize),
    Sum(Vec<Op>),
    Product(Vec<Op>),
    Power(Box<Op>, Rational),
    Func(Func, Box<Op>),
}

/// An expression with variables resolved to slots: `t` is slot 0, `x^i` slot `i`.
#[derive(Clone, Debug)]
pub struct Compiled {
    op: Op,
}

impl Compiled {
    pub fn new(e: &Expr, coords: &CoordinateSystem) -> Result<Compiled> {
        Ok(Compiled {
            op: compile(e, coords)?,
        })
    }

    /// Evaluates at `(t, x)`; `x` must have one entry per spatial coordinate.
    pub fn eval(&self, t: f64, x: &[f64]) -> Result<f64> {
        run(&self.op, t, x)
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.op, Op::Const(_))
    }
}

fn compile(e: &Expr, coords: &CoordinateSystem) -> Result<Op> {
    Ok(match e.node() {
        Node::Const(c) => Op::Const(c.to_f64().unwrap_or(f64::NAN)),
        Node::Var(v) => {
            if v == TIME {
                Op::Slot(0)
            } else {
                Op::Slot(
                    coords
                        .index_of(v)
                        .ok_or_else(|| Error::UnknownVariable(v.clone()))?,
                )
            }
        }
        Node::Sum(xs) => Op::Sum(xs.iter().map(|x| compile(x, coords)).collect::<Result<_>>()?),
        Node::Product(xs) => {
            Op::Product(xs.iter().map(|x| compile(x, coords)).collect::<Result<_>>()?)
        }
        Node::Power(b, k) => Op::Power(Box::new(compile(b, coords)?), k.clone()),
        Node::Func(f, a) => Op::Func(*f, Box::new(compile(a, coords)?)),
    })
}

fn run(op: &Op, t: f64, x: &[f64]) -> Result<f64> {
    match op {
        Op::Const(c) => Ok(*c),
        Op::Slot(0) => Ok(t),
        Op::Slot(i) => x
            .get(i - 1)
            .copied()
            .ok_or(Error::DimensionMismatch {
                expected: *i,
                found: x.len(),
            }),
        Op::Sum(xs) => {
            let mut s = 0.0;
            for o in xs {
                s += run(o, t, x)?;
            }
            finite(s, "sum")
        }
        Op::Product(xs) => {
            let mut p = 1.0;
            for o in xs {
                p *= run(o, t, x)?;
            }
            finite(p, "product")
        }
        Op::Power(b, k) => real_pow(run(b, t, x)?, k),
        Op::Func(f, a) => apply(*f, run(a, t, x)?),
    }
}
