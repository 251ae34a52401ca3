mod common;

use std::collections::HashMap;

use common::{coords, p, Fuzz};
use diffsym::geometry::{Diffusor, FiniteTransformation, ProjectableVectorField};
use diffsym::symbolic::{eval, integer, is_zero, normalize, CoordinateSystem, Expr};
use diffsym::symmetry::*;
use diffsym::Error;
use rand::Rng;

fn bm(c: &CoordinateSystem) -> Diffusor {
    Diffusor::standard(c.clone(), vec![Expr::one()], vec![Expr::zero()]).unwrap()
}

fn ou(c: &CoordinateSystem) -> Diffusor {
    Diffusor::standard(c.clone(), vec![Expr::one()], vec![p("-x", c)]).unwrap()
}

fn field(c: &CoordinateSystem, phi: &[&str], tau: &str) -> ProjectableVectorField {
    ProjectableVectorField::new(c.clone(), phi.iter().map(|s| p(s, c)).collect(), p(tau, c)).unwrap()
}

fn exprs(c: &CoordinateSystem, srcs: &[&str]) -> Vec<Expr> {
    srcs.iter().map(|s| p(s, c)).collect()
}

#[test]
fn residuals_of_hand_checked_fields() {
    let c = coords(1);
    let r = determining_residuals(&field(&c, &["x"], "2*t"), &bm(&c)).unwrap();
    assert_eq!(r, vec![Expr::zero(), Expr::zero()]);
    let r = determining_residuals(&field(&c, &["t"], "0"), &bm(&c)).unwrap();
    assert_eq!(r, vec![Expr::zero(), Expr::int(-1)]);
    let r = determining_residuals(&field(&c, &["exp(-t)"], "0"), &ou(&c)).unwrap();
    assert_eq!(r, vec![Expr::zero(), Expr::zero()]);
}

#[test]
fn residual_order_in_two_dimensions() {
    // A = diag(1, 2), b = 0; X = y ∂_x: only the off-diagonal A-equation and nothing else
    let c = coords(2);
    let l = Diffusor::standard(c.clone(), exprs(&c, &["1", "0", "2"]), exprs(&c, &["0", "0"])).unwrap();
    let r = determining_residuals(&field(&c, &["y", "0"], "0"), &l).unwrap();
    // A^{12}: −A^{22} ∂_y φ^1 = −2
    assert_eq!(r, exprs(&c, &["0", "-2", "0", "0", "0"]));
}

#[test]
fn non_standard_diffusor_is_rejected() {
    let c = coords(1);
    let l = Diffusor::standard(c.clone(), vec![Expr::one()], vec![Expr::zero()]).unwrap();
    let scaled = l.scale(&Expr::int(2));
    let x = field(&c, &["1"], "0");
    assert!(matches!(determining_residuals(&x, &scaled), Err(Error::NotStandard(_))));
    assert!(matches!(check_symmetry(&x, &scaled), Err(Error::NotStandard(_))));
}

#[test]
fn check_symmetry_examples() {
    let c = coords(1);
    let v = check_symmetry(&field(&c, &["1"], "0"), &bm(&c)).unwrap();
    assert!(v.is_symmetry && v.mu == Expr::zero() && !v.probabilistic);
    let v = check_symmetry(&field(&c, &["x"], "2*t"), &bm(&c)).unwrap();
    assert!(v.is_symmetry);
    assert_eq!(v.mu, Expr::int(-2));
    let v = check_symmetry(&field(&c, &["t"], "0"), &bm(&c)).unwrap();
    assert!(!v.is_symmetry);
}

#[test]
fn transcendental_residuals_use_the_probabilistic_path() {
    let c = coords(1);
    // φ vanishes identically but not in normal form
    let v = check_symmetry(&field(&c, &["(sin(x)^2 + cos(x)^2 - 1)*x"], "0"), &bm(&c)).unwrap();
    assert!(v.is_symmetry);
    assert!(v.probabilistic);
}

#[test]
fn lie_derivative_and_determining_equations_agree_on_fuzz() {
    let mut fz = Fuzz::new(11);
    for k in 0..100 {
        let c = coords(1 + k % 2);
        let l = fz.standard_diffusor(&c);
        let x = fz.projectable(&c);
        // check_symmetry errors if the two computations disagree
        let v = check_symmetry(&x, &l).unwrap();
        assert_eq!(v.mu, normalize(&-diffsym::symbolic::diff(x.tau(), "t").unwrap()));
    }
}

#[test]
fn scaling_a_field_does_not_change_the_verdict() {
    let mut fz = Fuzz::new(12);
    let c = coords(1);
    let l = bm(&c);
    let mut fields = vec![field(&c, &["x"], "2*t"), field(&c, &["t"], "0")];
    for _ in 0..10 {
        fields.push(fz.projectable(&c));
    }
    for x in &fields {
        let k = Expr::rational(fz.nonzero(), fz.nonzero().abs());
        let a = check_symmetry(x, &l).unwrap().is_symmetry;
        let b = check_symmetry(&x.scale(&k).unwrap(), &l).unwrap().is_symmetry;
        assert_eq!(a, b);
    }
}

fn bm_basis(c: &CoordinateSystem) -> AnsatzBasis {
    AnsatzBasis::uniform(1, exprs(c, &["1", "x", "t", "t*x", "x^2", "t^2"]), exprs(c, &["1", "t", "t^2"])).unwrap()
}

#[test]
fn heat_equation_algebra() {
    let c = coords(1);
    let found = find_symmetries(&bm(&c), &bm_basis(&c)).unwrap();
    let expected = vec![field(&c, &["0"], "1"), field(&c, &["1"], "0"), field(&c, &["x"], "2*t")];
    assert_eq!(found.len(), 3);
    assert!(same_span(&found, &expected));
    for x in &found {
        let v = check_symmetry(x, &bm(&c)).unwrap();
        assert!(v.is_symmetry && !v.probabilistic, "{x}");
    }
}

#[test]
fn ou_algebra() {
    let c = coords(1);
    let phi = AnsatzBasis::products(&exprs(&c, &["1", "x"]), &exprs(&c, &["1", "exp(-t)", "exp(-2*t)"]));
    let basis = AnsatzBasis::uniform(1, phi, exprs(&c, &["1", "exp(-2*t)"])).unwrap();
    let found = find_symmetries(&ou(&c), &basis).unwrap();
    let expected = vec![
        field(&c, &["0"], "1"),
        field(&c, &["exp(-t)"], "0"),
        field(&c, &["-x*exp(-2*t)"], "exp(-2*t)"),
    ];
    assert_eq!(found.len(), 3);
    assert!(same_span(&found, &expected));
}

#[test]
fn two_dimensional_brownian_algebra_contains_rotation() {
    let c = coords(2);
    let l = Diffusor::standard(c.clone(), exprs(&c, &["1", "0", "1"]), exprs(&c, &["0", "0"])).unwrap();
    let basis = AnsatzBasis::uniform(2, exprs(&c, &["1", "x", "y"]), exprs(&c, &["1", "t"])).unwrap();
    let found = find_symmetries(&l, &basis).unwrap();
    // ∂_t, ∂_x, ∂_y, rotation, scaling
    assert_eq!(found.len(), 5);
    assert!(in_span(&found, &field(&c, &["-y", "x"], "0")));
    assert!(in_span(&found, &field(&c, &["x", "y"], "2*t")));
    assert!(!in_span(&found, &field(&c, &["y", "x"], "0")));
}

#[test]
fn found_algebras_are_closed_under_brackets() {
    let c = coords(1);
    for (l, basis) in [
        (bm(&c), bm_basis(&c)),
        (
            ou(&c),
            AnsatzBasis::uniform(
                1,
                AnsatzBasis::products(&exprs(&c, &["1", "x"]), &exprs(&c, &["1", "exp(-t)", "exp(-2*t)", "exp(t)"])),
                exprs(&c, &["1", "exp(-2*t)", "exp(2*t)"]),
            )
            .unwrap(),
        ),
    ] {
        let found = find_symmetries(&l, &basis).unwrap();
        for x in &found {
            for y in &found {
                let z = ProjectableVectorField::from_field(x.bracket(y).unwrap()).unwrap();
                assert!(check_symmetry(&z, &l).unwrap().is_symmetry, "[{x}, {y}]");
            }
        }
    }
}

#[test]
fn zero_basis_gives_no_symmetries() {
    let c = coords(1);
    let basis = AnsatzBasis::uniform(1, vec![Expr::zero()], vec![Expr::zero()]).unwrap();
    assert!(find_symmetries(&ou(&c), &basis).unwrap().is_empty());
    // a basis with no symmetry in it at all
    let basis = AnsatzBasis::uniform(1, exprs(&c, &["t"]), exprs(&c, &["t^2"])).unwrap();
    assert!(find_symmetries(&bm(&c), &basis).unwrap().is_empty());
}

#[test]
fn dependent_collectors_are_reported() {
    let c = coords(1);
    let basis = AnsatzBasis::uniform(1, exprs(&c, &["sin(x)^2", "cos(2*x)"]), exprs(&c, &["t"])).unwrap();
    match find_symmetries(&bm(&c), &basis) {
        // sin(2x) = 2 sin(x) cos(x) among the A-equation collectors
        Err(Error::BasisNotClosed { term }) => assert!(term.contains("sin(2*x)"), "{term}"),
        other => panic!("expected BasisNotClosed, got {other:?}"),
    }
}

#[test]
fn malformed_bases_are_rejected() {
    let c = coords(1);
    assert!(matches!(
        AnsatzBasis::uniform(1, vec![], exprs(&c, &["1"])),
        Err(Error::InvalidBasis(_))
    ));
    assert!(matches!(
        AnsatzBasis::uniform(1, exprs(&c, &["1"]), exprs(&c, &["x"])),
        Err(Error::InvalidBasis(_))
    ));
    let dup = AnsatzBasis::uniform(1, exprs(&c, &["x", "2*x"]), exprs(&c, &["1"])).unwrap();
    assert!(matches!(find_symmetries(&bm(&c), &dup), Err(Error::InvalidBasis(_))));
    let wrong_dim = AnsatzBasis::uniform(2, exprs(&c, &["1"]), exprs(&c, &["1"])).unwrap();
    assert!(matches!(
        find_symmetries(&bm(&c), &wrong_dim),
        Err(Error::DimensionMismatch { .. })
    ));
}

fn sde(c: &CoordinateSystem, drift: &[&str], sigma: &[&[&str]]) -> SdeCoefficients {
    SdeCoefficients::new(
        c.clone(),
        exprs(c, drift),
        sigma.iter().map(|r| exprs(c, r)).collect(),
    )
    .unwrap()
}

#[test]
fn sde_diffusors() {
    let c = coords(1);
    let l = sde_to_diffusor(&sde(&c, &["0"], &[&["sqrt(2)"]]));
    assert_eq!(l, bm(&c));
    let l = sde_to_diffusor(&sde(&c, &["-x"], &[&["sqrt(2)"]]));
    assert_eq!(l, ou(&c));
    let c2 = coords(2);
    let l = sde_to_diffusor(&sde(&c2, &["0", "0"], &[&["1", "0"], &["0", "1"]]));
    assert_eq!(l.spatial_a(0, 0), &Expr::rational(1, 2));
    assert_eq!(l.spatial_a(0, 1), &Expr::zero());
    assert_eq!(l.spatial_a(1, 1), &Expr::rational(1, 2));
}

#[test]
fn sde_residual_examples() {
    let c = coords(1);
    let s = sde(&c, &["0"], &[&["sqrt(2)"]]);
    let t = StochasticTransformation::without_rotation(c.clone(), exprs(&c, &["1"]), 1, integer(0)).unwrap();
    assert!(sde_determining_residuals(&t, &s).unwrap().iter().all(Expr::is_zero_literal));

    let t = StochasticTransformation::without_rotation(c.clone(), exprs(&c, &["x"]), 1, integer(-2)).unwrap();
    let r = sde_determining_residuals(&t, &s).unwrap();
    assert_eq!(r.len(), 2);
    assert_eq!(r[0], Expr::zero());
    let mut rng = Fuzz::new(3).rng;
    for _ in 0..5 {
        let point = HashMap::from([("x".to_string(), rng.random_range(-3.0..3.0))]);
        let v = eval(&r[1], &point).unwrap();
        assert!((v + 2.0 * 2f64.sqrt()).abs() < 1e-12, "{v}");
    }
    // the matching time scaling
    let t = StochasticTransformation::without_rotation(c.clone(), exprs(&c, &["x"]), 1, integer(2)).unwrap();
    let report = bridge_report(&t, &s).unwrap();
    assert!(report.sde_symmetry && report.martingale.is_symmetry);
}

#[test]
fn sde_inputs_are_validated() {
    let c = coords(2);
    let err = StochasticTransformation::new(
        c.clone(),
        exprs(&c, &["0", "0"]),
        vec![exprs(&c, &["0", "1"]), exprs(&c, &["1", "0"])],
        integer(0),
    )
    .unwrap_err();
    assert!(matches!(err, Error::NotAntisymmetric { row: 0, col: 1, .. }));
    let err = StochasticTransformation::new(c.clone(), exprs(&c, &["t", "0"]), vec![], integer(0)).unwrap_err();
    assert!(matches!(err, Error::NonAutonomous(_)));

    let c1 = coords(1);
    let s = sde(&c1, &["t"], &[&["1"]]);
    let t = StochasticTransformation::without_rotation(c1.clone(), exprs(&c1, &["1"]), 1, integer(0)).unwrap();
    assert!(matches!(sde_determining_residuals(&t, &s), Err(Error::NonAutonomous(_))));
    assert!(matches!(bridge_check(&t, &s), Err(Error::NonAutonomous(_))));
    let t2 = StochasticTransformation::without_rotation(c1.clone(), exprs(&c1, &["1"]), 2, integer(0)).unwrap();
    let s = sde(&c1, &["0"], &[&["1"]]);
    assert!(matches!(sde_determining_residuals(&t2, &s), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn translation_bridges_on_brownian_motion() {
    let c = coords(1);
    let s = sde(&c, &["0"], &[&["sqrt(2)"]]);
    let t = StochasticTransformation::without_rotation(c.clone(), exprs(&c, &["1"]), 1, integer(0)).unwrap();
    assert!(bridge_check(&t, &s).unwrap().is_symmetry);
}

#[test]
fn rotation_needs_the_compensating_c() {
    let c = coords(2);
    let s = sde(&c, &["0", "0"], &[&["1", "0"], &["0", "1"]]);
    let y = exprs(&c, &["-y", "x"]);
    let plain = StochasticTransformation::without_rotation(c.clone(), y.clone(), 2, integer(0)).unwrap();
    let report = bridge_report(&plain, &s).unwrap();
    assert!(!report.sde_symmetry);
    assert!(report.martingale.is_symmetry);
    let rotated = StochasticTransformation::new(
        c.clone(),
        y,
        vec![exprs(&c, &["0", "-1"]), exprs(&c, &["1", "0"])],
        integer(0),
    )
    .unwrap();
    let report = bridge_report(&rotated, &s).unwrap();
    assert!(report.sde_symmetry && report.martingale.is_symmetry);
}

/// The martingale residuals of `Y = Ỹ + a t ∂_t` are combinations of the SDE residuals:
/// b-equation = drift equation, A^{ij} = ½ Σ_α (E^i_α σ^j_α + σ^i_α E^j_α).
#[test]
fn sde_residuals_determine_martingale_residuals() {
    let mut fz = Fuzz::new(21);
    for k in 0..40 {
        let m = 1 + k % 2;
        let n = 1 + (k / 2) % 2;
        let c = coords(m);
        let spatial: Vec<Expr> = (1..=m).map(|i| c.coordinate(i)).collect();
        let drift: Vec<Expr> = (0..m).map(|_| fz.poly_in(&spatial, 2, 2)).collect();
        let sigma: Vec<Vec<Expr>> = (0..m)
            .map(|_| (0..n).map(|_| fz.poly_in(&spatial, 1, 2)).collect())
            .collect();
        let s = SdeCoefficients::new(c.clone(), drift, sigma.clone()).unwrap();
        let y: Vec<Expr> = (0..m).map(|_| fz.poly_in(&spatial, 2, 2)).collect();
        let mut cm = vec![vec![Expr::zero(); n]; n];
        if n == 2 {
            let q = fz.poly_in(&spatial, 1, 2);
            cm[0][1] = q.clone();
            cm[1][0] = normalize(&-q);
        }
        let t = StochasticTransformation::new(c.clone(), y, cm, integer(fz.small())).unwrap();
        let sde_r = sde_determining_residuals(&t, &s).unwrap();
        let mart = determining_residuals(&t.space_time_field(), &sde_to_diffusor(&s)).unwrap();
        let e = |i: usize, al: usize| &sde_r[m + i * n + al];
        let mut idx = 0;
        for i in 0..m {
            for j in i..m {
                let combo: Vec<Expr> = (0..n)
                    .flat_map(|al| {
                        [
                            Expr::rational(1, 2) * e(i, al) * &sigma[j][al],
                            Expr::rational(1, 2) * &sigma[i][al] * e(j, al),
                        ]
                    })
                    .collect();
                assert!(is_zero(&(&mart[idx] - Expr::sum(combo))).unwrap());
                idx += 1;
            }
        }
        for i in 0..m {
            assert_eq!(mart[idx + i], sde_r[i]);
        }
    }
}

/// SDE symmetries built from known martingale symmetries pass both checks
/// (bridge_report errors on a violated implication).
#[test]
fn sde_symmetries_are_martingale_symmetries() {
    let c = coords(2);
    let s = sde(&c, &["0", "0"], &[&["1", "0"], &["0", "1"]]);
    let mut fz = Fuzz::new(5);
    for _ in 0..20 {
        // combinations of translations, rotation (with C) and scaling (with a = 2k)
        let (tx, ty, r, k) = (fz.small(), fz.small(), fz.small(), fz.small());
        let y = vec![
            p(&format!("{tx} - ({r})*y + ({k})*x"), &c),
            p(&format!("{ty} + ({r})*x + ({k})*y"), &c),
        ];
        let cm = vec![
            vec![Expr::zero(), Expr::int(-r)],
            vec![Expr::int(r), Expr::zero()],
        ];
        let t = StochasticTransformation::new(c.clone(), y, cm, integer(2 * k)).unwrap();
        let report = bridge_report(&t, &s).unwrap();
        assert!(report.sde_symmetry && report.martingale.is_symmetry);
    }
}

fn candidate(c: &CoordinateSystem, phi: &str, tau: &str, h: &str) -> KolmogorovSymmetryCandidate {
    KolmogorovSymmetryCandidate::new(field(c, &[phi], tau), p(h, c)).unwrap()
}

#[test]
fn kolmogorov_examples() {
    let c = coords(1);
    let l = bm(&c);
    let v = kolmogorov_check(&candidate(&c, "x", "2*t", "0"), &l).unwrap();
    assert!(v.pde_symmetry && v.martingale_symmetry);
    let v = kolmogorov_check(&candidate(&c, "0", "0", "1"), &l).unwrap();
    assert!(v.pde_symmetry && v.martingale_symmetry);
    // boost on u_t + u_xx = 0: the multiplier must satisfy 2 ∂_x h = ∂_t φ = 1
    let v = kolmogorov_check(&candidate(&c, "t", "0", "x/2"), &l).unwrap();
    assert!(v.pde_symmetry);
    assert!(!v.martingale_symmetry);
    let v = kolmogorov_check(&candidate(&c, "t", "0", "-x/2"), &l).unwrap();
    assert!(!v.pde_symmetry);
    assert_eq!(v.pde_residuals[2], Expr::int(-2));
}

/// The boost with `h = x/2` maps solutions to solutions of `u_t + u_xx = 0`:
/// `u = exp(x + ... )` style check by direct substitution of the characteristic.
#[test]
fn boost_characteristic_annihilates_solutions() {
    let c = coords(1);
    // Q = h u − φ u_x − τ u_t for the solution u = exp(x − t)
    let u = p("exp(x - t)", &c);
    let q = p("x/2 * exp(x - t) - t * exp(x - t)", &c);
    let lq = diffsym::geometry::apply_diffusor(&bm(&c), &q);
    assert!(is_zero(&diffsym::geometry::apply_diffusor(&bm(&c), &u)).unwrap());
    assert!(is_zero(&lq).unwrap());
    let wrong = p("-x/2 * exp(x - t) - t * exp(x - t)", &c);
    assert!(!is_zero(&diffsym::geometry::apply_diffusor(&bm(&c), &wrong)).unwrap());
}

#[test]
fn constant_multiplier_makes_the_two_notions_coincide() {
    let mut fz = Fuzz::new(8);
    let c = coords(1);
    let l = ou(&c);
    let mut fields = find_symmetries(
        &l,
        &AnsatzBasis::uniform(
            1,
            AnsatzBasis::products(&exprs(&c, &["1", "x"]), &exprs(&c, &["1", "exp(-t)", "exp(-2*t)"])),
            exprs(&c, &["1", "exp(-2*t)"]),
        )
        .unwrap(),
    )
    .unwrap();
    for _ in 0..10 {
        fields.push(fz.projectable(&c));
    }
    for x in fields {
        let h = Expr::int(fz.small());
        let v = kolmogorov_check(&KolmogorovSymmetryCandidate::new(x, h).unwrap(), &l).unwrap();
        assert_eq!(v.pde_symmetry, v.martingale_symmetry);
    }
}

#[test]
fn flow_examples() {
    let c = coords(1);
    let f = flow(&field(&c, &["1"], "0"), 1.0, 10).unwrap();
    let (t, x) = f.apply(0.3, &[0.7]).unwrap();
    assert!((t - 0.3).abs() < 1e-12 && (x[0] - 1.7).abs() < 1e-12);

    // RK4 amplification error for rate 2 at 64 steps is ~1.0e-8 relative, so |t| <= 1
    let f = flow(&field(&c, &["x"], "2*t"), 2f64.ln(), 64).unwrap();
    for (t0, x0) in [(0.5, 1.0), (-0.9, -0.4), (0.01, 2.5)] {
        let (t, x) = f.apply(t0, &[x0]).unwrap();
        assert!((t - 4.0 * t0).abs() < 1e-8);
        assert!((x[0] - 2.0 * x0).abs() < 1e-8);
        assert_eq!(f.time(t0).unwrap(), t);
    }

    let f = flow(&field(&c, &["x^2 + t"], "t"), 0.0, 5).unwrap();
    assert_eq!(f.apply(0.4, &[-1.2]).unwrap(), (0.4, vec![-1.2]));
}

#[test]
fn flows_compose() {
    let c = coords(2);
    let x = field(&c, &["-y + t", "x"], "1 + t/4");
    let mut rng = Fuzz::new(9).rng;
    for _ in 0..10 {
        let (a, b) = (rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
        let p0 = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let t0 = rng.random_range(0.0..1.0);
        let fa = flow(&x, a, 200).unwrap();
        let fb = flow(&x, b, 200).unwrap();
        let fab = flow(&x, a + b, 400).unwrap();
        let (t1, p1) = fb.apply(t0, &p0).unwrap();
        let (t2, p2) = fa.apply(t1, &p1).unwrap();
        let (t3, p3) = fab.apply(t0, &p0).unwrap();
        assert!((t2 - t3).abs() < 1e-7);
        assert!(p2.iter().zip(&p3).all(|(u, v)| (u - v).abs() < 1e-7));
    }
}

#[test]
fn flow_blowup_and_bad_arguments() {
    let c = coords(1);
    // ẋ = x², x(0) = 1 explodes at s = 1
    let f = flow(&field(&c, &["x^2"], "0"), 2.0, 1000).unwrap();
    assert!(matches!(f.apply(0.0, &[1.0]), Err(Error::NumericBlowup { .. })));
    assert!(matches!(flow(&field(&c, &["x"], "0"), 1.0, 0), Err(Error::InvalidArgument(_))));
    let f = flow(&field(&c, &["x"], "0"), 1.0, 4).unwrap();
    assert!(matches!(f.apply(0.0, &[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
}
