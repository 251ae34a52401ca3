use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational number used for every constant in an expression tree.
pub type Rational = BigRational;

/// Builds an exact rational `num / den`.
pub fn rational(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Builds an exact integer rational.
pub fn integer(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Converts a finite `f64` to the exact rational it represents.
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    BigRational::from_float(x)
}

/// Elementary unary functions recognised by the parser.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

/// One node of an expression tree.
///
/// Division is `Power(_, -1)`; subtraction is a sum with a `-1` factor.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Const(Rational),
    Var(String),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Power(Expr, Rational),
    Func(Func, Expr),
}

/// An immutable, cheaply clonable symbolic scalar expression.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr(Arc<Node>);

impl Expr {
    pub fn from_node(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(c: Rational) -> Expr {
        Expr::from_node(Node::Const(c))
    }

    pub fn int(n: i64) -> Expr {
        Expr::constant(integer(n))
    }

    pub fn rational(num: i64, den: i64) -> Expr {
        Expr::constant(rational(num, den))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::from_node(Node::Var(name.into()))
    }

    /// Sum of `terms`; collapses the empty and single-term cases.
    pub fn sum(mut terms: Vec<Expr>) -> Expr {
        match terms.len() {
            0 => Expr::zero(),
            1 => terms.pop().unwrap(),
            _ => Expr::from_node(Node::Sum(terms)),
        }
    }

    /// Product of `factors`; collapses the empty and single-factor cases.
    pub fn product(mut factors: Vec<Expr>) -> Expr {
        match factors.len() {
            0 => Expr::one(),
            1 => factors.pop().unwrap(),
            _ => Expr::from_node(Node::Product(factors)),
        }
    }

    pub fn pow(base: Expr, exponent: Rational) -> Expr {
        Expr::from_node(Node::Power(base, exponent))
    }

    pub fn powi(base: Expr, exponent: i64) -> Expr {
        Expr::pow(base, integer(exponent))
    }

    pub fn recip(self) -> Expr {
        Expr::powi(self, -1)
    }

    pub fn func(f: Func, arg: Expr) -> Expr {
        Expr::from_node(Node::Func(f, arg))
    }

    pub fn exp(arg: Expr) -> Expr {
        Expr::func(Func::Exp, arg)
    }

    pub fn log(arg: Expr) -> Expr {
        Expr::func(Func::Log, arg)
    }

    pub fn sin(arg: Expr) -> Expr {
        Expr::func(Func::Sin, arg)
    }

    pub fn cos(arg: Expr) -> Expr {
        Expr::func(Func::Cos, arg)
    }

    pub fn sqrt(arg: Expr) -> Expr {
        Expr::func(Func::Sqrt, arg)
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self.node() {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    /// True only for the literal constant zero (no simplification).
    pub fn is_zero_literal(&self) -> bool {
        self.as_const().is_some_and(|c| c.is_zero())
    }

    pub fn is_one_literal(&self) -> bool {
        self.as_const().is_some_and(|c| c.is_one())
    }

    /// Arithmetic negation in the shape the parser produces for a leading `-`.
    pub fn negate(&self) -> Expr {
        match self.node() {
            Node::Const(c) => Expr::constant(-c),
            Node::Product(fs) => match fs[0].node() {
                Node::Const(c) => {
                    let mut out = Vec::with_capacity(fs.len());
                    out.push(Expr::constant(-c));
                    out.extend(fs[1..].iter().cloned());
                    Expr::product(out)
                }
                _ => {
                    let mut out = Vec::with_capacity(fs.len() + 1);
                    out.push(Expr::int(-1));
                    out.extend(fs.iter().cloned());
                    Expr::product(out)
                }
            },
            _ => Expr::product(vec![Expr::int(-1), self.clone()]),
        }
    }

    /// All variable names occurring in the tree.
    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self.node() {
            Node::Const(_) => {}
            Node::Var(v) => {
                out.insert(v.clone());
            }
            Node::Sum(xs) | Node::Product(xs) => xs.iter().for_each(|x| x.collect_vars(out)),
            Node::Power(b, _) => b.collect_vars(out),
            Node::Func(_, a) => a.collect_vars(out),
        }
    }

    pub fn contains_var(&self, name: &str) -> bool {
        match self.node() {
            Node::Const(_) => false,
            Node::Var(v) => v == name,
            Node::Sum(xs) | Node::Product(xs) => xs.iter().any(|x| x.contains_var(name)),
            Node::Power(b, _) => b.contains_var(name),
            Node::Func(_, a) => a.contains_var(name),
        }
    }

    /// True when the tree mentions an elementary function or a non-integer power.
    pub fn is_transcendental(&self) -> bool {
        match self.node() {
            Node::Const(_) | Node::Var(_) => false,
            Node::Sum(xs) | Node::Product(xs) => xs.iter().any(Expr::is_transcendental),
            Node::Power(b, e) => !e.is_integer() || b.is_transcendental(),
            Node::Func(..) => true,
        }
    }

    /// Checks that every variable is declared in `coords`.
    pub fn check_vars(&self, coords: &CoordinateSystem) -> Result<()> {
        match self.free_variables().into_iter().find(|v| !coords.contains(v)) {
            Some(v) => Err(Error::UnknownVariable(v)),
            None => Ok(()),
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl From<Rational> for Expr {
    fn from(c: Rational) -> Expr {
        Expr::constant(c)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, |$a:ident, $b:ident| $body:expr) => {
        impl $trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let ($a, $b) = (self, rhs);
                $body
            }
        }
        impl $trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let ($a, $b) = (self, rhs.clone());
                $body
            }
        }
        impl $trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let ($a, $b) = (self.clone(), rhs);
                $body
            }
        }
        impl $trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let ($a, $b) = (self.clone(), rhs.clone());
                $body
            }
        }
    };
}

binop!(Add, add, |a, b| Expr::sum(vec![a, b]));
binop!(Sub, sub, |a, b| Expr::sum(vec![a, b.negate()]));
binop!(Mul, mul, |a, b| Expr::product(vec![a, b]));

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.negate()
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.negate()
    }
}

/// Name of the time coordinate, index 0 on space-time.
pub const TIME: &str = "t";

/// Coordinates `(t, x^1, ..., x^m)` of the single global chart.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoordinateSystem {
    spatial: Vec<String>,
}

impl CoordinateSystem {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let spatial: Vec<String> = names.into_iter().map(Into::into).collect();
        if spatial.is_empty() {
            return Err(Error::InvalidCoordinates("dimension must be positive".into()));
        }
        for (i, name) in spatial.iter().enumerate() {
            if !is_identifier(name) {
                return Err(Error::InvalidCoordinates(format!("`{name}` is not an identifier")));
            }
            if name == TIME {
                return Err(Error::InvalidCoordinates("`t` is reserved for time".into()));
            }
            if Func::from_name(name).is_some() {
                return Err(Error::InvalidCoordinates(format!("`{name}` is a function name")));
            }
            if spatial[..i].contains(name) {
                return Err(Error::InvalidCoordinates(format!("`{name}` declared twice")));
            }
        }
        Ok(CoordinateSystem { spatial })
    }

    /// Spatial dimension `m`.
    pub fn dim(&self) -> usize {
        self.spatial.len()
    }

    pub fn spatial(&self) -> &[String] {
        &self.spatial
    }

    /// Name of space-time coordinate `alpha` (0 is time).
    pub fn name(&self, alpha: usize) -> &str {
        if alpha == 0 {
            TIME
        } else {
            &self.spatial[alpha - 1]
        }
    }

    /// Space-time names, time first.
    pub fn names(&self) -> Vec<&str> {
        std::iter::once(TIME)
            .chain(self.spatial.iter().map(String::as_str))
            .collect()
    }

    /// Space-time index of `name`.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        if name == TIME {
            Some(0)
        } else {
            self.spatial.iter().position(|s| s == name).map(|i| i + 1)
        }
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index_of(name).is_some()
    }

    /// Coordinate function `alpha` as an expression.
    pub fn coordinate(&self, alpha: usize) -> Expr {
        Expr::var(self.name(alpha))
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

// ---------------------------------------------------------------------------
// Printing. The output re-parses to the identical tree.

fn is_negative_led(e: &Expr) -> bool {
    match e.node() {
        Node::Const(c) => c.is_negative(),
        Node::Product(fs) => matches!(fs[0].node(), Node::Const(c) if c.is_negative()),
        _ => false,
    }
}

fn write_rational(f: &mut fmt::Formatter<'_>, c: &Rational) -> fmt::Result {
    if c.is_integer() {
        write!(f, "{}", c.numer())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

fn write_abs_term(f: &mut fmt::Formatter<'_>, term: &Expr) -> fmt::Result {
    match term.node() {
        Node::Const(c) => write_rational(f, &-c),
        Node::Product(fs) => {
            let c = fs[0].as_const().expect("negative-led product");
            if -c == Rational::one() && fs[1].as_const().is_none() {
                write_factors(f, &fs[1..], false)
            } else {
                let mut out = vec![Expr::constant(-c)];
                out.extend(fs[1..].iter().cloned());
                write_factors(f, &out, false)
            }
        }
        _ => unreachable!("not negative-led"),
    }
}

fn write_product(f: &mut fmt::Formatter<'_>, fs: &[Expr]) -> fmt::Result {
    let mut rest = fs;
    if let Node::Const(c) = fs[0].node() {
        let minus_one = -Rational::one();
        if *c == minus_one && fs.len() > 1 && fs[1].as_const().is_none() {
            f.write_str("-")?;
            rest = &fs[1..];
            return write_factors(f, rest, true);
        }
    }
    write_factors(f, rest, false)
}

fn write_factors(f: &mut fmt::Formatter<'_>, fs: &[Expr], after_minus: bool) -> fmt::Result {
    for (i, x) in fs.iter().enumerate() {
        if i > 0 {
            f.write_str("*")?;
        }
        let first = i == 0 && !after_minus;
        let paren = match x.node() {
            Node::Sum(_) | Node::Product(_) => true,
            Node::Const(c) => !first && (c.is_negative() || !c.is_integer()),
            _ => false,
        };
        if paren {
            write!(f, "({x})")?;
        } else {
            write!(f, "{x}")?;
        }
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => write_rational(f, c),
            Node::Var(v) => f.write_str(v),
            Node::Sum(terms) => {
                for (i, term) in terms.iter().enumerate() {
                    if let Node::Sum(_) = term.node() {
                        if i > 0 {
                            f.write_str(" + ")?;
                        }
                        write!(f, "({term})")?;
                        continue;
                    }
                    if i == 0 {
                        write!(f, "{term}")?;
                    } else if is_negative_led(term) {
                        f.write_str(" - ")?;
                        write_abs_term(f, term)?;
                    } else {
                        write!(f, " + {term}")?;
                    }
                }
                Ok(())
            }
            Node::Product(fs) => write_product(f, fs),
            Node::Power(base, e) => {
                let paren = match base.node() {
                    Node::Sum(_) | Node::Product(_) | Node::Power(..) => true,
                    Node::Const(c) => c.is_negative() || !c.is_integer(),
                    _ => false,
                };
                if paren {
                    write!(f, "({base})")?;
                } else {
                    write!(f, "{base}")?;
                }
                if e.is_integer() && !e.is_negative() {
                    write!(f, "^{}", e.numer())
                } else {
                    f.write_str("^(")?;
                    write_rational(f, e)?;
                    f.write_str(")")
                }
            }
            Node::Func(func, arg) => write!(f, "{}({arg})", func.name()),
        }
    }
}
