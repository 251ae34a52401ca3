//! Exact symbolic expressions over a coordinate system `(t, x^1, ..., x^m)`.

mod diff;
mod eval;
mod expr;
pub(crate) mod normal;
mod parse;
mod zero;

pub use diff::{diff, substitute};
pub(crate) use diff::pd;
pub use eval::{eval, eval_with, Compiled};
pub use expr::{integer, rational, rational_from_f64, CoordinateSystem, Expr, Func, Node, Rational, TIME};
pub use normal::{normalize, terms};
pub use parse::parse_expr;
pub use zero::{is_zero, zero_test, Zeroness, PROBE_POINTS, PROBE_TOLERANCE};
