use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::eval::eval_with;
use super::expr::{Expr, Node};
use super::normal::{cleared_numerator, to_poly, Poly};
use crate::error::{Error, Result};

pub const PROBE_POINTS: usize = 20;
pub const PROBE_TOLERANCE: f64 = 1e-9;
const PROBE_SEED: u64 = 0x5eed_2e70;

/// Outcome of a zero test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Zeroness {
    /// The canonical form is the zero constant.
    Zero,
    /// Not symbolically zero, but every probe point evaluated below tolerance.
    ProbablyZero,
    NonZero,
}

impl Zeroness {
    pub fn is_zero(self) -> bool {
        !matches!(self, Zeroness::NonZero)
    }

    pub fn is_probabilistic(self) -> bool {
        matches!(self, Zeroness::ProbablyZero)
    }
}

fn is_laurent(p: &Poly) -> bool {
    p.terms.keys().all(|m| {
        m.iter()
            .all(|(a, k)| k.is_integer() && matches!(a.node(), Node::Var(_)))
    })
}

/// Decides whether `e` vanishes identically.
///
/// Polynomial and rational expressions are decided exactly. Anything involving
/// elementary functions or irrational powers is probed numerically at
/// [`PROBE_POINTS`] deterministic points in `[-2,-0.1] ∪ [0.1,2]`.
pub fn zero_test(e: &Expr) -> Result<Zeroness> {
    let p = to_poly(e);
    if p.is_zero() {
        return Ok(Zeroness::Zero);
    }
    if is_laurent(&p) {
        return Ok(Zeroness::NonZero);
    }
    if let Some(num) = cleared_numerator(e) {
        if num.is_zero() {
            return Ok(Zeroness::Zero);
        }
        if is_laurent(&num) {
            return Ok(Zeroness::NonZero);
        }
    }
    probe(&p.to_expr())
}

fn probe(e: &Expr) -> Result<Zeroness> {
    let vars: Vec<String> = e.free_variables().into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    let mut evaluated = 0;
    let mut last_err = None;
    for _ in 0..PROBE_POINTS {
        let values: Vec<f64> = vars
            .iter()
            .map(|_| {
                let mag: f64 = rng.random_range(0.1..=2.0);
                if rng.random::<bool>() {
                    mag
                } else {
                    -mag
                }
            })
            .collect();
        let lookup = |name: &str| vars.iter().position(|v| v == name).map(|i| values[i]);
        match eval_with(e, &lookup) {
            Ok(v) => {
                evaluated += 1;
                if v.abs() > PROBE_TOLERANCE {
                    return Ok(Zeroness::NonZero);
                }
            }
            Err(err @ Error::EvaluationDomain(_)) => last_err = Some(err),
            Err(err) => return Err(err),
        }
    }
    if evaluated == 0 {
        return Err(last_err.unwrap_or_else(|| {
            Error::EvaluationDomain("no probe point could be evaluated".into())
        }));
    }
    Ok(Zeroness::ProbablyZero)
}

/// `true` when `e` is (probably) identically zero; see [`zero_test`].
pub fn is_zero(e: &Expr) -> Result<bool> {
    Ok(zero_test(e)?.is_zero())
}
