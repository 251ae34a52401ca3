use std::collections::BTreeMap;

use super::expr::{rational, Expr, Func, Node, Rational};
use super::normal::normalize;
use crate::error::{Error, Result};

fn d(e: &Expr, v: &str) -> Expr {
    if !e.contains_var(v) {
        return Expr::zero();
    }
    match e.node() {
        Node::Const(_) => Expr::zero(),
        Node::Var(name) => {
            if name == v {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Sum(xs) => Expr::sum(xs.iter().map(|x| d(x, v)).collect()),
        Node::Product(xs) => {
            let mut terms = Vec::new();
            for (i, x) in xs.iter().enumerate() {
                if !x.contains_var(v) {
                    continue;
                }
                let mut factors: Vec<Expr> = xs.clone();
                factors[i] = d(x, v);
                terms.push(Expr::product(factors));
            }
            Expr::sum(terms)
        }
        Node::Power(b, k) => {
            let km1: Rational = k - Rational::from_integer(1.into());
            Expr::product(vec![
                Expr::constant(k.clone()),
                Expr::pow(b.clone(), km1),
                d(b, v),
            ])
        }
        Node::Func(f, a) => {
            let da = d(a, v);
            let outer = match f {
                Func::Exp => e.clone(),
                Func::Log => Expr::powi(a.clone(), -1),
                Func::Sin => Expr::cos(a.clone()),
                Func::Cos => Expr::sin(a.clone()).negate(),
                Func::Sqrt => Expr::product(vec![
                    Expr::rational(1, 2),
                    Expr::pow(a.clone(), rational(-1, 2)),
                ]),
            };
            Expr::product(vec![outer, da])
        }
    }
}

/// Partial derivative of `e` with respect to the variable `v`, normalized.
///
/// Fails with [`Error::UnknownVariable`] only for names that are not identifiers;
/// a variable that does not occur gives zero.
pub fn diff(e: &Expr, v: &str) -> Result<Expr> {
    if !super::expr::is_identifier(v) {
        return Err(Error::UnknownVariable(v.to_string()));
    }
    Ok(normalize(&d(e, v)))
}

/// Same as [`diff`] for names known to be valid.
pub(crate) fn pd(e: &Expr, v: &str) -> Expr {
    normalize(&d(e, v))
}

fn subs(e: &Expr, map: &BTreeMap<String, Expr>) -> Expr {
    match e.node() {
        Node::Const(_) => e.clone(),
        Node::Var(name) => map.get(name).cloned().unwrap_or_else(|| e.clone()),
        Node::Sum(xs) => Expr::sum(xs.iter().map(|x| subs(x, map)).collect()),
        Node::Product(xs) => Expr::product(xs.iter().map(|x| subs(x, map)).collect()),
        Node::Power(b, k) => Expr::pow(subs(b, map), k.clone()),
        Node::Func(f, a) => Expr::func(*f, subs(a, map)),
    }
}

/// Simultaneous substitution of variables, normalized.
pub fn substitute(e: &Expr, map: &BTreeMap<String, Expr>) -> Expr {
    normalize(&subs(e, map))
}
