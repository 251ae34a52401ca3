//! Canonical form.
//!
//! An expression normalizes to a sum of terms `c * a1^e1 * ... * ak^ek` with
//! `c` an exact rational and the `ai` sorted, pairwise distinct atoms:
//!
//! * variables (any non-zero rational exponent),
//! * `log`, `sin`, `cos` applications with normalized arguments,
//! * at most one `exp(..)` per term, always to the first power
//!   (`exp(a)*exp(b) -> exp(a + b)`, `exp(a)^r -> exp(r*a)`),
//! * integer constants raised to an exponent in `(0, 1)` (`8^(1/2) -> 2*2^(1/2)`),
//! * primitive multi-term sums raised to a non-natural exponent, e.g. `(x + 1)^(-1)`,
//! * even powers kept under a root where collapsing would lose a sign: `(x^2)^(1/2)`.
//!
//! Natural powers of sums are expanded and `(a^p)^q -> a^(p*q)`. `sqrt(e)` is
//! `e^(1/2)`. Trigonometric functions are only constant-folded at zero.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::expr::{Expr, Func, Node, Rational};

pub(crate) type Monomial = Vec<(Expr, Rational)>;

/// A sum of monomials with rational coefficients; zero coefficients never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct Poly {
    pub terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn constant(c: Rational) -> Poly {
        let mut p = Poly::zero();
        p.add_term(Vec::new(), c);
        p
    }

    fn one() -> Poly {
        Poly::constant(Rational::one())
    }

    /// A single canonical atom; `atom` must already be in normal form.
    fn atom(atom: Expr, e: Rational) -> Poly {
        if e.is_zero() {
            return Poly::one();
        }
        let mut p = Poly::zero();
        p.add_term(vec![(atom, e)], Rational::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_const(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self
                .terms
                .iter()
                .next()
                .filter(|(m, _)| m.is_empty())
                .map(|(_, c)| c.clone()),
            _ => None,
        }
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, k: &Rational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c * k))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let prod = mul_monomials(m1, m2);
                if prod.terms.len() == 1 {
                    let (m, c) = prod.terms.into_iter().next().unwrap();
                    out.add_term(m, c * c1 * c2);
                } else {
                    out = out.add(&prod.scale(&(c1 * c2)));
                }
            }
        }
        out
    }

    fn pow_natural(&self, mut n: u64) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn pow(&self, e: &Rational) -> Poly {
        if e.is_zero() {
            return Poly::one();
        }
        if self.is_zero() {
            return if e.is_positive() {
                Poly::zero()
            } else {
                Poly::atom(Expr::int(0), e.clone())
            };
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            let mut out = const_pow(c, e);
            for (a, k) in m {
                out = out.mul(&atom_pow_of_pow(a, k, e));
            }
            return out;
        }
        if let Some(n) = natural(e) {
            return self.pow_natural(n);
        }
        // non-natural power of a multi-term sum: pull out the content and keep an atom
        let lead = self.terms.values().next().unwrap().clone();
        let content = if e.is_integer() { lead } else { lead.abs() };
        let primitive = self.scale(&content.recip());
        const_pow(&content, e).mul(&Poly::atom(primitive.to_expr(), e.clone()))
    }

    pub fn to_expr(&self) -> Expr {
        let terms: Vec<Expr> = self
            .terms
            .iter()
            .map(|(m, c)| monomial_expr(c, m))
            .collect();
        Expr::sum(terms)
    }
}

pub(crate) fn monomial_expr(c: &Rational, m: &Monomial) -> Expr {
    let mut factors = Vec::with_capacity(m.len() + 1);
    if !c.is_one() || m.is_empty() {
        factors.push(Expr::constant(c.clone()));
    }
    for (a, e) in m {
        if e.is_one() {
            factors.push(a.clone());
        } else {
            factors.push(Expr::pow(a.clone(), e.clone()));
        }
    }
    Expr::product(factors)
}

fn natural(e: &Rational) -> Option<u64> {
    if e.is_integer() && e.is_positive() {
        e.numer().to_u64()
    } else {
        None
    }
}

fn rational_powi(c: &Rational, n: &BigInt) -> Rational {
    let k = n.abs().to_usize().expect("exponent too large");
    let p = num_traits::pow(c.clone(), k);
    if n.is_negative() {
        p.recip()
    } else {
        p
    }
}

/// `c^e` for a rational constant `c`.
fn const_pow(c: &Rational, e: &Rational) -> Poly {
    if e.is_zero() {
        return Poly::one();
    }
    if c.is_zero() {
        return if e.is_positive() {
            Poly::zero()
        } else {
            Poly::atom(Expr::int(0), e.clone())
        };
    }
    if e.is_integer() {
        return Poly::constant(rational_powi(c, e.numer()));
    }
    if c.is_negative() {
        if e.denom().is_odd() {
            let sign = if e.numer().is_odd() {
                -Rational::one()
            } else {
                Rational::one()
            };
            return const_pow(&-c, e).scale(&sign);
        }
        // even root of a negative number: keep symbolic, evaluation will reject it
        return Poly::atom(Expr::constant(c.clone()), e.clone());
    }
    if c.is_one() {
        return Poly::one();
    }
    let whole = e.floor();
    let frac = e - &whole;
    let mut coeff = rational_powi(c, whole.numer());
    let a = c.numer().clone();
    let b = c.denom().clone();
    let mut out_atoms = Poly::one();
    out_atoms = out_atoms.mul(&int_root(&a, &frac, &mut coeff));
    if !b.is_one() {
        // b^(-f) = b^(1-f) / b
        coeff /= Rational::from_integer(b.clone());
        let rest = Rational::one() - &frac;
        out_atoms = out_atoms.mul(&int_root(&b, &rest, &mut coeff));
    }
    out_atoms.scale(&coeff)
}

/// `n^f` for an integer `n >= 1` and `0 < f < 1`; perfect powers are pulled into `coeff`.
fn int_root(n: &BigInt, f: &Rational, coeff: &mut Rational) -> Poly {
    if n.is_one() {
        return Poly::one();
    }
    let q = f.denom().to_u32().expect("root degree too large");
    let p = f.numer().clone();
    let mut rest = n.clone();
    let mut outside = BigInt::one();
    let mut k = BigInt::from(2);
    let limit = BigInt::from(10_000);
    loop {
        let kq = num_traits::pow(k.clone(), q as usize);
        if kq > rest || k > limit {
            break;
        }
        if (&rest % &kq).is_zero() {
            rest /= &kq;
            outside *= &k;
        } else {
            k += 1;
        }
    }
    *coeff *= rational_powi(&Rational::from_integer(outside), &p);
    if rest.is_one() {
        Poly::one()
    } else {
        Poly::atom(Expr::constant(Rational::from_integer(rest)), f.clone())
    }
}

fn is_nonnegative_atom(a: &Expr) -> bool {
    match a.node() {
        Node::Const(c) => !c.is_negative(),
        Node::Func(Func::Exp, _) | Node::Power(..) => true,
        _ => false,
    }
}

/// `(atom^p)^q`. Collapses to `atom^(p*q)` unless that would drop an absolute
/// value (`(x^2)^(1/2)` is `|x|`); those are kept as `(atom^2)^(p*q/2)`.
fn atom_pow_of_pow(a: &Expr, p: &Rational, q: &Rational) -> Poly {
    let pq = p * q;
    let loses_sign =
        !q.is_integer() && p.numer().is_even() && pq.numer().is_odd() && !is_nonnegative_atom(a);
    if loses_sign {
        if let Node::Sum(_) = a.node() {
            return to_poly(a).pow_natural(2).pow(&(pq / Rational::from_integer(2.into())));
        }
        let square = Expr::pow(a.clone(), Rational::from_integer(2.into()));
        Poly::atom(square, pq / Rational::from_integer(2.into()))
    } else {
        atom_pow(a, &pq)
    }
}

/// `atom^r` for a canonical atom.
fn atom_pow(a: &Expr, r: &Rational) -> Poly {
    if r.is_zero() {
        return Poly::one();
    }
    match a.node() {
        Node::Power(b, two) if r.is_integer() => atom_pow(b, &(two * r)),
        Node::Const(b) => const_pow(b, r),
        Node::Func(Func::Exp, arg) => exp_atom(&to_poly(arg).scale(r)),
        Node::Sum(_) if r.is_integer() => to_poly(a).pow(r),
        _ => Poly::atom(a.clone(), r.clone()),
    }
}

fn exp_atom(arg: &Poly) -> Poly {
    if arg.is_zero() {
        Poly::one()
    } else {
        Poly::atom(Expr::exp(arg.to_expr()), Rational::one())
    }
}

fn is_exp(a: &Expr) -> bool {
    matches!(a.node(), Node::Func(Func::Exp, _))
}

fn mul_monomials(m1: &Monomial, m2: &Monomial) -> Poly {
    // (atom, exponent, came from two factors)
    let mut merged: Vec<(Expr, Rational, bool)> = Vec::with_capacity(m1.len() + m2.len());
    let (mut i, mut j) = (0, 0);
    while i < m1.len() || j < m2.len() {
        if i < m1.len() && j < m2.len() && m1[i].0 == m2[j].0 {
            merged.push((m1[i].0.clone(), &m1[i].1 + &m2[j].1, true));
            i += 1;
            j += 1;
        } else if j >= m2.len() || (i < m1.len() && m1[i].0 < m2[j].0) {
            merged.push((m1[i].0.clone(), m1[i].1.clone(), false));
            i += 1;
        } else {
            merged.push((m2[j].0.clone(), m2[j].1.clone(), false));
            j += 1;
        }
    }

    let exp_count = merged.iter().filter(|(a, _, _)| is_exp(a)).count();
    let simple = exp_count < 2 && merged.iter().all(|(_, _, m)| !m);
    if simple {
        let mut p = Poly::zero();
        p.add_term(
            merged.into_iter().map(|(a, e, _)| (a, e)).collect(),
            Rational::one(),
        );
        return p;
    }

    let mut kept: Monomial = Vec::with_capacity(merged.len());
    let mut factor = Poly::one();
    let mut exp_arg = Poly::zero();
    let mut has_exp = false;
    for (a, e, was_merged) in merged {
        if e.is_zero() {
            continue;
        }
        match a.node() {
            Node::Func(Func::Exp, arg) => {
                has_exp = true;
                exp_arg = exp_arg.add(&to_poly(arg).scale(&e));
            }
            _ if !was_merged => kept.push((a, e)),
            Node::Var(_) | Node::Func(..) => kept.push((a, e)),
            _ => factor = factor.mul(&atom_pow(&a, &e)),
        }
    }
    let mut base = Poly::zero();
    base.add_term(kept, Rational::one());
    if has_exp {
        base = base.mul_sorted_atoms(&exp_atom(&exp_arg));
    }
    base.mul(&factor)
}

impl Poly {
    /// Multiplies by a polynomial whose atoms never merge with ours except via sorting.
    fn mul_sorted_atoms(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mut m = m1.clone();
                m.extend(m2.iter().cloned());
                m.sort_by(|a, b| a.0.cmp(&b.0));
                out.add_term(m, c1 * c2);
            }
        }
        out
    }
}

/// Converts an expression into canonical polynomial form.
pub(crate) fn to_poly(e: &Expr) -> Poly {
    match e.node() {
        Node::Const(c) => Poly::constant(c.clone()),
        Node::Var(_) => Poly::atom(e.clone(), Rational::one()),
        Node::Sum(xs) => {
            let mut acc = Poly::zero();
            for x in xs {
                let p = to_poly(x);
                for (m, c) in p.terms {
                    acc.add_term(m, c);
                }
            }
            acc
        }
        Node::Product(xs) => {
            let mut acc = Poly::one();
            for x in xs {
                acc = acc.mul(&to_poly(x));
                if acc.is_zero() {
                    break;
                }
            }
            acc
        }
        Node::Power(b, k) => to_poly(b).pow(k),
        Node::Func(f, arg) => {
            let pa = to_poly(arg);
            match f {
                Func::Sqrt => pa.pow(&Rational::new(1.into(), 2.into())),
                Func::Exp => exp_atom(&pa),
                Func::Log => {
                    if pa.as_const().is_some_and(|c| c.is_one()) {
                        return Poly::zero();
                    }
                    if pa.terms.len() == 1 {
                        let (m, c) = pa.terms.iter().next().unwrap();
                        if c.is_one() && m.len() == 1 {
                            if let Node::Func(Func::Exp, inner) = m[0].0.node() {
                                return to_poly(inner);
                            }
                        }
                    }
                    Poly::atom(Expr::log(pa.to_expr()), Rational::one())
                }
                Func::Sin => {
                    if pa.is_zero() {
                        Poly::zero()
                    } else {
                        Poly::atom(Expr::sin(pa.to_expr()), Rational::one())
                    }
                }
                Func::Cos => {
                    if pa.is_zero() {
                        Poly::one()
                    } else {
                        Poly::atom(Expr::cos(pa.to_expr()), Rational::one())
                    }
                }
            }
        }
    }
}

/// Canonical form of `e`. Idempotent; exact on polynomial parts.
pub fn normalize(e: &Expr) -> Expr {
    to_poly(e).to_expr()
}

/// The normalized terms of `e` as `(coefficient, monomial)` pairs.
///
/// The monomial of the constant term is `1`.
pub fn terms(e: &Expr) -> Vec<(Rational, Expr)> {
    to_poly(e)
        .terms
        .iter()
        .map(|(m, c)| (c.clone(), monomial_expr(&Rational::one(), m)))
        .collect()
}

/// Numerator of `e` after clearing every sum-valued denominator, normalized.
///
/// Returns `None` when `e` is not a rational function of its atoms
/// (fractional powers of sums are left alone).
pub(crate) fn cleared_numerator(e: &Expr) -> Option<Poly> {
    let p = to_poly(e);
    let mut denominators: BTreeMap<Expr, BigInt> = BTreeMap::new();
    for m in p.terms.keys() {
        for (a, k) in m {
            if let Node::Sum(_) = a.node() {
                if !k.is_integer() {
                    return None;
                }
                if k.is_negative() {
                    let need = -k.numer();
                    let entry = denominators.entry(a.clone()).or_insert_with(BigInt::zero);
                    if need > *entry {
                        *entry = need;
                    }
                }
            }
        }
    }
    if denominators.is_empty() {
        return Some(p);
    }
    let mut out = Poly::zero();
    for (m, c) in &p.terms {
        let mut term = Poly::constant(c.clone());
        let mut rest: Monomial = Vec::new();
        let mut used: Vec<&Expr> = Vec::new();
        for (a, k) in m {
            if let Some(need) = denominators.get(a) {
                let shifted = k + Rational::from_integer(need.clone());
                term = term.mul(&to_poly(a).pow(&shifted));
                used.push(a);
            } else {
                rest.push((a.clone(), k.clone()));
            }
        }
        for (a, need) in &denominators {
            if !used.contains(&a) {
                term = term.mul(&to_poly(a).pow(&Rational::from_integer(need.clone())));
            }
        }
        let mut r = Poly::zero();
        r.add_term(rest, Rational::one());
        out = out.add(&term.mul(&r));
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::expr::CoordinateSystem;
    use crate::symbolic::parse::parse_expr;

    fn n(src: &str) -> Expr {
        let c = CoordinateSystem::new(["x", "y"]).unwrap();
        normalize(&parse_expr(src, &c).unwrap())
    }

    fn same(a: &str, b: &str) {
        assert_eq!(n(a), n(b), "{a}  vs  {b}");
    }

    #[test]
    fn collects_like_terms() {
        same("x + x", "2*x");
        assert_eq!(n("x + x").to_string(), "2*x");
        assert_eq!(n("(x+t)^2 - x^2 - 2*x*t - t^2"), Expr::zero());
        assert_eq!(n("0*exp(x)"), Expr::zero());
    }

    #[test]
    fn exponent_merging() {
        same("exp(t)*exp(t)", "exp(2*t)");
        same("exp(t)^3*exp(-t)", "exp(2*t)");
        assert_eq!(n("exp(x)*exp(-x)"), Expr::one());
        same("(x^2)^3", "x^6");
        same("sqrt(x)*sqrt(x)", "x");
        assert_eq!(n("sqrt(2)*sqrt(2)"), Expr::int(2));
        same("sqrt(8)", "2*sqrt(2)");
        same("(1/4)^(1/2)", "1/2");
        same("(-8)^(1/3)", "-2");
        same("log(exp(x + 1))", "x + 1");
    }

    #[test]
    fn roots_of_even_powers_keep_the_sign() {
        assert_eq!(n("sqrt(x^2)").to_string(), "(x^2)^(1/2)");
        same("sqrt(x^2)*sqrt(x^2)", "x^2");
        same("(x^2)^(1/3)", "x^(2/3)");
        same("(x^3)^(1/3)", "x");
        same("sqrt(x^4)", "x^2");
        same("((-t)^(-2))^(1/2)", "(t^2)^(-1/2)");
        same("sqrt(x^2)^2", "x^2");
        let once = n("sqrt((t + 1)^(-2))");
        assert_eq!(normalize(&once), once);
    }

    #[test]
    fn constant_folding_of_functions() {
        assert_eq!(n("exp(x - x)"), Expr::one());
        assert_eq!(n("sin(0)"), Expr::zero());
        assert_eq!(n("cos(0*x)"), Expr::one());
        assert_eq!(n("log(1)"), Expr::zero());
    }

    #[test]
    fn sums_in_denominators_are_atoms() {
        same("1/(2*x + 2)", "1/2*(x + 1)^(-1)");
        same("(x+1)^(1/2)*(x+1)^(1/2)", "x + 1");
        same("(x+1)^(-1)*(x+1)^(-1)", "(x + 1)^(-2)");
        same("(x+1)^2*(x+1)^(-2)", "(x+1)^2*(x+1)^(-2)");
    }

    #[test]
    fn idempotent_on_samples() {
        for src in [
            "x*y*exp(t)*(x+1)^(-1) + sin(x)^2 - 3/4",
            "exp(-t)*x - x*exp(-t) + (2*x+4)^(-1/2)",
            "log(x*y) + cos(x + y)*sqrt(12)",
            "(x+y)^3*exp(x)*exp(2*y)",
            "x^(-1)*x + (t - 1)^(1/3)*(-27)^(1/3)",
        ] {
            let once = n(src);
            assert_eq!(normalize(&once), once, "{src}");
        }
    }

    #[test]
    fn cleared_numerator_decides_rational_identities() {
        let c = CoordinateSystem::new(["x"]).unwrap();
        let e = parse_expr("1/(x+1) + x/(x+1) - 1", &c).unwrap();
        assert!(cleared_numerator(&e).unwrap().is_zero());
        let e = parse_expr("1/(x+1) - 1/(2*x+2) - 1/(2*x + 2)", &c).unwrap();
        assert!(cleared_numerator(&e).unwrap().is_zero());
        let e = parse_expr("1/(x+1) - 1/x", &c).unwrap();
        assert!(!cleared_numerator(&e).unwrap().is_zero());
    }
}
