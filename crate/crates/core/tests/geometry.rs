mod common;

use common::{coords, p, Fuzz};
use diffsym::geometry::*;
use diffsym::symbolic::{normalize, CoordinateSystem, Expr, Zeroness};
use diffsym::Error;

fn bm() -> Diffusor {
    Diffusor::standard(coords(1), vec![Expr::one()], vec![Expr::zero()]).unwrap()
}

fn field(c: &CoordinateSystem, phi: &[&str], tau: &str) -> ProjectableVectorField {
    ProjectableVectorField::new(c.clone(), phi.iter().map(|s| p(s, c)).collect(), p(tau, c)).unwrap()
}

fn one_form(c: &CoordinateSystem, comps: &[&str]) -> OneForm {
    OneForm::new(c.clone(), comps.iter().map(|s| p(s, c)).collect()).unwrap()
}

fn assert_zero(z: Zeroness) {
    assert_eq!(z, Zeroness::Zero);
}

#[test]
fn second_differential_examples() {
    let c = coords(1);
    let l = second_differential(&c, &p("x", &c));
    assert_eq!(l.first(1), &Expr::one());
    assert_zero(l.sub(&second_differential(&c, &c.coordinate(1))).unwrap().zero_test().unwrap());
    let l = second_differential(&c, &p("x^2", &c));
    assert_eq!(l.first(1), &p("2*x", &c));
    assert_eq!(l.second(1, 1), &p("2", &c));
    let l = second_differential(&c, &p("t*x", &c));
    assert_eq!(l.first(0), &p("x", &c));
    assert_eq!(l.first(1), &p("t", &c));
    assert_eq!(l.second(0, 1), &Expr::one());
}

#[test]
fn one_form_product_examples() {
    let c = coords(1);
    let dx = one_form(&c, &["0", "1"]);
    let dt = one_form(&c, &["1", "0"]);
    assert_eq!(one_form_product(&dx, &dx).unwrap().second(1, 1), &Expr::one());
    assert_eq!(one_form_product(&dx, &dt).unwrap().second(0, 1), &Expr::rational(1, 2));
    let xdx = one_form(&c, &["0", "x"]);
    assert_eq!(one_form_product(&xdx, &dt).unwrap().second(1, 0), &p("x/2", &c));
}

#[test]
fn pairing_examples() {
    let c = coords(1);
    let l = bm();
    assert_eq!(pair(&second_differential(&c, &p("x^2", &c)), &l).unwrap(), Expr::int(2));
    assert_eq!(pair(&second_differential(&c, &p("t", &c)), &l).unwrap(), Expr::one());
    let dx = one_form(&c, &["0", "1"]);
    let dt_op = Diffusor::new(c.clone(), SymMatrix::zeros(2), vec![Expr::one(), Expr::zero()]).unwrap();
    assert_eq!(pair(&one_form_product(&dx, &dx).unwrap(), &dt_op).unwrap(), Expr::zero());
}

#[test]
fn apply_diffusor_examples() {
    let c = coords(1);
    assert_eq!(apply_diffusor(&bm(), &p("x^2", &c)), Expr::int(2));
    assert_eq!(apply_diffusor(&bm(), &p("t", &c)), Expr::one());
    let l = Diffusor::standard(c.clone(), vec![p("x^2 + 1", &c)], vec![p("sin(x)", &c)]).unwrap();
    assert_eq!(apply_diffusor(&l, &p("x", &c)), p("sin(x)", &c));
}

#[test]
fn diffusor_from_fields_examples() {
    let c = coords(1);
    let dx = VectorField::coordinate(c.clone(), 1);
    let l = diffusor_from_fields(&dx, &dx).unwrap();
    assert_eq!(l.a(1, 1), &Expr::one());
    assert!(l.b_vector().iter().all(|b| b.is_zero_literal()));
    let xdx = VectorField::new(c.clone(), vec![Expr::zero(), p("x", &c)]).unwrap();
    let l = diffusor_from_fields(&dx, &xdx).unwrap();
    assert_eq!(l.a(1, 1), &p("x", &c));
    assert_eq!(l.b(1), &Expr::one());
}

#[test]
fn commutator_of_field_products_is_the_bracket() {
    let mut fz = Fuzz::new(11);
    for m in [1, 2] {
        let c = coords(m);
        for _ in 0..20 {
            let x = fz.field(&c);
            let y = fz.field(&c);
            let g = fz.poly(&c, 3);
            let lxy = diffusor_from_fields(&x, &y).unwrap();
            let lyx = diffusor_from_fields(&y, &x).unwrap();
            let lhs = apply_diffusor(&lxy.sub(&lyx).unwrap(), &g);
            let rhs = x.bracket(&y).unwrap().apply(&g);
            assert_eq!(normalize(&(lhs - rhs)), Expr::zero());
            // L_XY(g) = X(Y(g))
            assert_eq!(apply_diffusor(&lxy, &g), x.apply(&y.apply(&g)));
        }
    }
}

#[test]
fn lie_derivative_diffusor_examples() {
    let c = coords(1);
    let l = bm();
    let z = lie_derivative_diffusor(&field(&c, &["1"], "0"), &l).unwrap();
    assert_zero(z.zero_test().unwrap());
    let s = lie_derivative_diffusor(&field(&c, &["x"], "2*t"), &l).unwrap();
    assert_eq!(s, l.scale(&Expr::int(-2)));
    let g = lie_derivative_diffusor(&field(&c, &["t"], "0"), &l).unwrap();
    let expected = Diffusor::new(c.clone(), SymMatrix::zeros(2), vec![Expr::zero(), Expr::int(-1)]).unwrap();
    assert_eq!(g, expected);
}

#[test]
fn lie_derivative_codiffusor_examples() {
    let c = coords(1);
    let d2x = second_differential(&c, &p("x", &c));
    let z = lie_derivative_codiffusor(&field(&c, &["1"], "0"), &d2x).unwrap();
    assert_zero(z.zero_test().unwrap());
    let dx = one_form(&c, &["0", "1"]);
    let dxdx = one_form_product(&dx, &dx).unwrap();
    let got = lie_derivative_codiffusor(&field(&c, &["x"], "0"), &dxdx).unwrap();
    assert_eq!(got, dxdx.scale(&Expr::int(2)));
    let mut fz = Fuzz::new(5);
    for m in [1, 2] {
        let c = coords(m);
        for _ in 0..20 {
            let x = fz.projectable(&c);
            let g = fz.poly(&c, 3);
            let lhs = lie_derivative_codiffusor(&x, &second_differential(&c, &g)).unwrap();
            let rhs = second_differential(&c, &x.apply(&g));
            assert_zero(lhs.sub(&rhs).unwrap().zero_test().unwrap());
        }
    }
}

#[test]
fn pullback_codiffusor_examples() {
    let c = coords(1);
    let d2x = second_differential(&c, &p("x", &c));
    let scale = Diffeomorphism::new(c.clone(), p("t", &c), vec![p("2*x", &c)]).unwrap();
    assert_eq!(pullback_codiffusor(&scale, &d2x).unwrap(), d2x.scale(&Expr::int(2)));
    let square = Diffeomorphism::new(c.clone(), p("t", &c), vec![p("x^2", &c)]).unwrap();
    let got = pullback_codiffusor(&square, &d2x).unwrap();
    assert_eq!(got, second_differential(&c, &p("x^2", &c)));
    assert_eq!(got.first(1), &p("2*x", &c));
    assert_eq!(got.second(1, 1), &Expr::int(2));
    let id = Diffeomorphism::identity(c.clone());
    let mut fz = Fuzz::new(3);
    let lam = fz.codiffusor(&c);
    assert_eq!(pullback_codiffusor(&id, &lam).unwrap(), lam);
}

#[test]
fn pullback_commutes_with_second_differential() {
    let mut fz = Fuzz::new(17);
    for m in [1, 2] {
        let c = coords(m);
        for _ in 0..10 {
            let phi = fz.diffeomorphism(&c);
            let g = fz.poly(&c, 2);
            let lhs = pullback_codiffusor(&phi, &second_differential(&c, &g)).unwrap();
            let rhs = second_differential(&c, &phi.pullback_function(&g));
            assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn pushforward_diffusor_examples() {
    let c = coords(1);
    let l = bm();
    let id = Diffeomorphism::identity(c.clone());
    assert_eq!(pushforward_diffusor(&id, &l).unwrap(), l);
    let scale = Diffeomorphism::new(c.clone(), p("t", &c), vec![p("2*x", &c)])
        .unwrap()
        .with_inverse(p("t", &c), vec![p("x/2", &c)])
        .unwrap();
    let pushed = pushforward_diffusor(&scale, &l).unwrap();
    let expected = Diffusor::standard(c.clone(), vec![Expr::int(4)], vec![Expr::zero()]).unwrap();
    assert_eq!(pushed, expected);
    // oracle: L'(g)(y) = L(g(2x)) at x = y/2
    let g = p("x^3 + t*x", &c);
    let lhs = apply_diffusor(&pushed, &g);
    let rhs = scale.pushforward_function(&apply_diffusor(&l, &scale.pullback_function(&g))).unwrap();
    assert_eq!(lhs, rhs);
    let no_inverse = Diffeomorphism::new(c.clone(), p("t", &c), vec![p("2*x", &c)]).unwrap();
    assert!(matches!(pushforward_diffusor(&no_inverse, &l), Err(Error::MissingInverse)));
}

#[test]
fn pushforward_duality_and_round_trips() {
    let mut fz = Fuzz::new(23);
    for m in [1, 2] {
        let c = coords(m);
        for _ in 0..10 {
            let phi = fz.diffeomorphism(&c);
            let l = fz.diffusor(&c);
            let lam = fz.codiffusor(&c);
            // ⟨λ, Φ*L⟩ = Φ*⟨Φ_*λ, L⟩
            let lhs = pair(&lam, &pullback_diffusor(&phi, &l).unwrap()).unwrap();
            let rhs = phi.pullback_function(&pair(&pushforward_codiffusor(&phi, &lam).unwrap(), &l).unwrap());
            assert_eq!(lhs, rhs);
            let back = pullback_diffusor(&phi, &pushforward_diffusor(&phi, &l).unwrap()).unwrap();
            assert_eq!(back, l);
            let back = pushforward_codiffusor(&phi, &pullback_codiffusor(&phi, &lam).unwrap()).unwrap();
            assert_eq!(back, lam);
            // Φ*(μ·σ) = Φ*μ · Φ*σ
            let mu = fz.one_form(&c);
            let sigma = fz.one_form(&c);
            let lhs = pullback_codiffusor(&phi, &one_form_product(&mu, &sigma).unwrap()).unwrap();
            let rhs = one_form_product(
                &pullback_one_form(&phi, &mu).unwrap(),
                &pullback_one_form(&phi, &sigma).unwrap(),
            )
            .unwrap();
            assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn annihilator_examples() {
    let c = coords(1);
    let l = bm();
    let z = canonical_annihilator_element(&p("t", &c), &l).unwrap();
    assert_zero(z.zero_test().unwrap());
    let e = canonical_annihilator_element(&p("x", &c), &l).unwrap();
    assert_eq!(e, second_differential(&c, &p("x", &c)));
    let e = canonical_annihilator_element(&p("x^2", &c), &l).unwrap();
    assert_eq!(e.first(1), &p("2*x", &c));
    assert_eq!(e.second(1, 1), &Expr::int(2));
    assert_eq!(e.first(0), &Expr::int(-2));
    assert!(in_annihilator(&e, &l).unwrap());
    assert!(!in_annihilator(&second_differential(&c, &p("t", &c)), &l).unwrap());
    let dx = one_form(&c, &["0", "1"]);
    assert!(!in_annihilator(&one_form_product(&dx, &dx).unwrap(), &l).unwrap());
    let not_standard = Diffusor::zero(c.clone());
    assert!(matches!(
        canonical_annihilator_element(&p("x", &c), &not_standard),
        Err(Error::NotStandard(_))
    ));
    let mut fz = Fuzz::new(29);
    for m in [1, 2] {
        let c = coords(m);
        for _ in 0..10 {
            let l = fz.standard_diffusor(&c);
            let g = fz.poly(&c, 3);
            assert!(in_annihilator(&canonical_annihilator_element(&g, &l).unwrap(), &l).unwrap());
        }
    }
}

#[test]
fn mismatched_charts_are_rejected() {
    let l1 = bm();
    let c2 = coords(2);
    let lam = second_differential(&c2, &p("x*y", &c2));
    assert!(matches!(pair(&lam, &l1), Err(Error::DimensionMismatch { .. })));
}
