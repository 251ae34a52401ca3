use std::collections::HashMap;

use diffsym::symbolic::{
    diff, eval, is_zero, normalize, rational, zero_test, CoordinateSystem, Expr, Func, Node,
    Zeroness,
};
use num_traits::ToPrimitive;
use proptest::prelude::*;

const VARS: [&str; 3] = ["t", "x", "y"];

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-3i64..=3).prop_map(Expr::int),
        (-3i64..=3, 1i64..=3).prop_map(|(p, q)| Expr::rational(p, q)),
        prop::sample::select(VARS.to_vec()).prop_map(Expr::var),
    ]
}

fn tree(polynomial: bool) -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 3, move |inner| {
        let mut options = vec![
            prop::collection::vec(inner.clone(), 2..4)
                .prop_map(Expr::sum)
                .boxed(),
            prop::collection::vec(inner.clone(), 2..3)
                .prop_map(Expr::product)
                .boxed(),
            (inner.clone(), 0i64..=3)
                .prop_map(|(b, k)| Expr::powi(b, k))
                .boxed(),
        ];
        if !polynomial {
            options.push(
                (inner.clone(), prop::sample::select(vec![Func::Exp, Func::Sin, Func::Cos]))
                    .prop_map(|(a, f)| Expr::func(f, a))
                    .boxed(),
            );
            options.push(
                (inner.clone(), prop::sample::select(vec![-1i64, -2]))
                    .prop_map(|(b, k)| Expr::powi(b, k))
                    .boxed(),
            );
            options.push(
                (inner.clone(), prop::sample::select(vec![Func::Log, Func::Sqrt]))
                    .prop_map(|(a, f)| Expr::func(f, a))
                    .boxed(),
            );
            options.push(
                inner
                    .clone()
                    .prop_map(|b| Expr::pow(b, rational(1, 2)))
                    .boxed(),
            );
        }
        prop::strategy::Union::new(options)
    })
}

/// Running error analysis: value and a first-order bound on its absolute rounding error.
fn running(e: &Expr, m: &HashMap<String, f64>) -> (f64, f64) {
    let eps = f64::EPSILON;
    match e.node() {
        Node::Const(c) => {
            let v = c.to_f64().unwrap();
            (v, eps * v.abs())
        }
        Node::Var(name) => (m[name], 0.0),
        Node::Sum(xs) => {
            let (mut v, mut err, mut mag) = (0.0, 0.0, 0.0);
            for x in xs {
                let (vi, ei) = running(x, m);
                v += vi;
                err += ei;
                mag += vi.abs();
            }
            (v, err + eps * mag)
        }
        Node::Product(xs) => {
            let (mut v, mut rel) = (1.0, 0.0);
            for x in xs {
                let (vi, ei) = running(x, m);
                v *= vi;
                rel += if vi == 0.0 { 0.0 } else { ei / vi.abs() } + eps;
            }
            (v, v.abs() * rel)
        }
        Node::Power(b, k) => {
            let (vb, eb) = running(b, m);
            let kf = k.to_f64().unwrap();
            let v = eval(e, m).unwrap_or(f64::NAN);
            let rel_b = if vb == 0.0 { 0.0 } else { eb / vb.abs() };
            (v, v.abs() * (kf.abs() * rel_b + 2.0 * eps))
        }
        Node::Func(f, a) => {
            let (va, ea) = running(a, m);
            let v = match f {
                Func::Exp => va.exp(),
                Func::Log => va.ln(),
                Func::Sin => va.sin(),
                Func::Cos => va.cos(),
                Func::Sqrt => va.sqrt(),
            };
            let d = match f {
                Func::Exp => v.abs(),
                Func::Log => 1.0 / va.abs(),
                Func::Sin | Func::Cos => 1.0,
                Func::Sqrt => 0.5 / v.abs(),
            };
            (v, d * ea + 2.0 * eps * v.abs())
        }
    }
}

fn rounding_bound(e: &Expr, m: &HashMap<String, f64>) -> f64 {
    let (_, err) = running(e, m);
    if err.is_finite() { err } else { f64::INFINITY }
}

fn point(vals: &[f64]) -> HashMap<String, f64> {
    VARS.iter()
        .zip(vals)
        .map(|(k, v)| (k.to_string(), *v))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(std::env::var("PROPTEST_CASES").ok().and_then(|v| v.parse().ok()).unwrap_or(200)))]

    #[test]
    fn normalize_is_idempotent(e in tree(false)) {
        let once = normalize(&e);
        prop_assert_eq!(normalize(&once), once);
    }

    #[test]
    fn print_parse_round_trip(e in tree(false)) {
        let c = CoordinateSystem::new(["x", "y"]).unwrap();
        let parsed = diffsym::symbolic::parse_expr(&e.to_string(), &c).unwrap();
        let again = diffsym::symbolic::parse_expr(&parsed.to_string(), &c).unwrap();
        prop_assert_eq!(&again, &parsed);
        prop_assert_eq!(normalize(&parsed), normalize(&e));
    }

    #[test]
    fn diff_is_linear(a in tree(false), b in tree(false), k in -5i64..=5, v in prop::sample::select(VARS.to_vec())) {
        let lhs = diff(&(Expr::int(k) * a.clone() + b.clone()), v).unwrap();
        let rhs = Expr::int(k) * diff(&a, v).unwrap() + diff(&b, v).unwrap();
        prop_assert_eq!(lhs, normalize(&rhs));
    }

    #[test]
    fn mixed_partials_commute_on_polynomials(e in tree(true)) {
        let xy = diff(&diff(&e, "x").unwrap(), "y").unwrap();
        let yx = diff(&diff(&e, "y").unwrap(), "x").unwrap();
        prop_assert_eq!(xy, yx);
    }

    #[test]
    fn mixed_partials_commute(e in tree(false)) {
        let tx = diff(&diff(&e, "t").unwrap(), "x").unwrap();
        let xt = diff(&diff(&e, "x").unwrap(), "t").unwrap();
        prop_assert!(is_zero(&(tx - xt)).unwrap_or(true));
    }

    #[test]
    fn eval_commutes_with_normalize(
        e in tree(false),
        pts in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 3), 100),
    ) {
        let n = normalize(&e);
        for p in pts {
            let m = point(&p);
            if let (Ok(a), Ok(b)) = (eval(&e, &m), eval(&n, &m)) {
                // 1e-12 relative, plus the rounding error each evaluation order carries
                let bound = rounding_bound(&e, &m) + rounding_bound(&n, &m);
                let scale = a.abs().max(b.abs()).max(1.0);
                let tol = 1e-12 * scale + 16.0 * bound;
                prop_assert!((a - b).abs() <= tol, "{} vs {} at {:?}: {} {}", e, n, p, a, b);
            }
        }
    }

    #[test]
    fn expression_minus_its_normal_form_is_zero(e in tree(false)) {
        let d = e.clone() - normalize(&e);
        prop_assert_eq!(zero_test(&d).unwrap(), Zeroness::Zero);
    }
}
