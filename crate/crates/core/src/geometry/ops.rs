use crate::error::Result;
use crate::symbolic::{normalize, pd, zero_test, CoordinateSystem, Expr, Zeroness};

use super::fields::{Diffeomorphism, VectorField};
use super::tensors::{check_coords, Codiffusor, Diffusor, OneForm, SymMatrix};

fn sum(terms: Vec<Expr>) -> Expr {
    normalize(&Expr::sum(terms))
}

fn half() -> Expr {
    Expr::rational(1, 2)
}

/// `d²g`: `λ_α = ∂_α g`, `λ_{αβ} = ∂_{αβ} g`.
pub fn second_differential(coords: &CoordinateSystem, g: &Expr) -> Codiffusor {
    let n = coords.dim() + 1;
    let grad: Vec<Expr> = (0..n).map(|a| pd(g, coords.name(a))).collect();
    let hess = SymMatrix::from_fn(n, |a, b| pd(&grad[a], coords.name(b)));
    Codiffusor::new(coords.clone(), grad, hess).expect("shapes agree by construction")
}

/// `dg` as a one-form.
pub fn differential(coords: &CoordinateSystem, g: &Expr) -> OneForm {
    let grad = (0..=coords.dim()).map(|a| pd(g, coords.name(a))).collect();
    OneForm::new(coords.clone(), grad).expect("shapes agree by construction")
}

/// Symmetric product `ω·γ`: `λ_{αβ} = ½(ω_α γ_β + ω_β γ_α)`, no first-order part.
pub fn one_form_product(omega: &OneForm, gamma: &OneForm) -> Result<Codiffusor> {
    check_coords(omega.coords(), gamma.coords())?;
    let n = omega.coords().dim() + 1;
    let w = omega.components();
    let g = gamma.components();
    let second = SymMatrix::from_fn(n, |a, b| {
        normalize(&(half() * (&w[a] * &g[b] + &w[b] * &g[a])))
    });
    Codiffusor::new(omega.coords().clone(), vec![Expr::zero(); n], second)
}

/// `⟨λ, L⟩ = λ_α b^α + λ_{αβ} A^{αβ}` (full double sum), normalized.
pub fn pair(lambda: &Codiffusor, l: &Diffusor) -> Result<Expr> {
    check_coords(lambda.coords(), l.coords())?;
    let n = l.n();
    let mut terms = Vec::new();
    for a in 0..n {
        terms.push(lambda.first(a) * l.b(a));
        for b in 0..n {
            terms.push(lambda.second(a, b) * l.a(a, b));
        }
    }
    Ok(sum(terms))
}

/// `L(g) = ⟨d²g, L⟩`.
pub fn apply_diffusor(l: &Diffusor, g: &Expr) -> Expr {
    pair(&second_differential(l.coords(), g), l).expect("same chart")
}

/// `L_{XY} = X^α Y^β ∂_{αβ} + X^α (∂_α Y^β) ∂_β`, so that `L_{XY}(g) = X(Y(g))`.
pub fn diffusor_from_fields(x: &VectorField, y: &VectorField) -> Result<Diffusor> {
    check_coords(x.coords(), y.coords())?;
    let n = x.coords().dim() + 1;
    let (xc, yc) = (x.components(), y.components());
    let a = SymMatrix::from_fn(n, |i, j| {
        normalize(&(half() * (&xc[i] * &yc[j] + &xc[j] * &yc[i])))
    });
    let b = (0..n).map(|j| x.apply(&yc[j])).collect();
    Diffusor::new(x.coords().clone(), a, b)
}

/// `𝓛_X L`, coefficient-wise:
///
/// * `A'^{αβ} = X^k ∂_k A^{αβ} − A^{αk} ∂_k X^β − A^{kβ} ∂_k X^α`
/// * `b'^α = X^k ∂_k b^α − b^k ∂_k X^α − A^{jk} ∂_{jk} X^α`
///
/// with all indices over space-time. Equals the commutator `[X, L]`.
pub fn lie_derivative_diffusor(x: &VectorField, l: &Diffusor) -> Result<Diffusor> {
    check_coords(x.coords(), l.coords())?;
    let c = l.coords();
    let n = l.n();
    let xs = x.components();
    // dx[a][k] = ∂_k X^a
    let dx: Vec<Vec<Expr>> = xs
        .iter()
        .map(|xa| (0..n).map(|k| pd(xa, c.name(k))).collect())
        .collect();
    let a = SymMatrix::from_fn(n, |al, be| {
        let mut terms = vec![x.apply(l.a(al, be))];
        for k in 0..n {
            terms.push(-(l.a(al, k) * &dx[be][k]));
            terms.push(-(l.a(k, be) * &dx[al][k]));
        }
        sum(terms)
    });
    let b = (0..n)
        .map(|al| {
            let mut terms = vec![x.apply(l.b(al))];
            for k in 0..n {
                terms.push(-(l.b(k) * &dx[al][k]));
                for j in 0..n {
                    let ajk = l.a(j, k);
                    if !ajk.is_zero_literal() {
                        terms.push(-(ajk * &pd(&dx[al][k], c.name(j))));
                    }
                }
            }
            sum(terms)
        })
        .collect();
    Diffusor::new(c.clone(), a, b)
}

/// `𝓛_X λ`, coefficient-wise:
///
/// * `(𝓛_X λ)_{ij} = X^k ∂_k λ_{ij} + λ_{ik} ∂_j X^k + λ_{kj} ∂_i X^k + λ_k ∂_{ij} X^k`
/// * `(𝓛_X λ)_i = X^k ∂_k λ_i + λ_k ∂_i X^k`
pub fn lie_derivative_codiffusor(x: &VectorField, lambda: &Codiffusor) -> Result<Codiffusor> {
    check_coords(x.coords(), lambda.coords())?;
    let c = lambda.coords();
    let n = lambda.n();
    let xs = x.components();
    let dx: Vec<Vec<Expr>> = xs
        .iter()
        .map(|xk| (0..n).map(|i| pd(xk, c.name(i))).collect())
        .collect();
    let first = (0..n)
        .map(|i| {
            let mut terms = vec![x.apply(lambda.first(i))];
            for k in 0..n {
                terms.push(lambda.first(k) * &dx[k][i]);
            }
            sum(terms)
        })
        .collect();
    let second = SymMatrix::from_fn(n, |i, j| {
        let mut terms = vec![x.apply(lambda.second(i, j))];
        for k in 0..n {
            terms.push(lambda.second(i, k) * &dx[k][j]);
            terms.push(lambda.second(k, j) * &dx[k][i]);
            if !lambda.first(k).is_zero_literal() {
                terms.push(lambda.first(k) * &pd(&dx[k][i], c.name(j)));
            }
        }
        sum(terms)
    });
    Codiffusor::new(c.clone(), first, second)
}

/// `(𝓛_X ω)_i = X^k ∂_k ω_i + ω_k ∂_i X^k`.
pub fn lie_derivative_one_form(x: &VectorField, omega: &OneForm) -> Result<OneForm> {
    check_coords(x.coords(), omega.coords())?;
    let c = omega.coords();
    let n = c.dim() + 1;
    let comps = (0..n)
        .map(|i| {
            let mut terms = vec![x.apply(omega.component(i))];
            for k in 0..n {
                terms.push(omega.component(k) * &pd(x.component(k), c.name(i)));
            }
            sum(terms)
        })
        .collect();
    OneForm::new(c.clone(), comps)
}

/// `Φ̄*λ = Φ̄*(λ_α) d²Φ̄^α + Φ̄*(λ_{αβ}) dΦ̄^α·dΦ̄^β`.
///
/// `λ` is written in the target coordinates, which share names with the source.
pub fn pullback_codiffusor(phi: &Diffeomorphism, lambda: &Codiffusor) -> Result<Codiffusor> {
    check_coords(phi.coords(), lambda.coords())?;
    let c = phi.coords();
    let n = c.dim() + 1;
    let d2: Vec<Codiffusor> = phi.forward().iter().map(|f| second_differential(c, f)).collect();
    let d1: Vec<Vec<Expr>> = d2.iter().map(|l| l.first_vector().to_vec()).collect();
    let mut first: Vec<Vec<Expr>> = vec![Vec::new(); n];
    let mut second: Vec<Vec<Expr>> = vec![Vec::new(); n * n];
    for al in 0..n {
        let la = phi.pullback_function(lambda.first(al));
        if la.is_zero_literal() {
            continue;
        }
        for i in 0..n {
            first[i].push(&la * d2[al].first(i));
            for j in 0..n {
                second[i * n + j].push(&la * d2[al].second(i, j));
            }
        }
    }
    for al in 0..n {
        for be in 0..n {
            let lab = phi.pullback_function(lambda.second(al, be));
            if lab.is_zero_literal() {
                continue;
            }
            for i in 0..n {
                for j in 0..n {
                    // symmetrized dΦ^α·dΦ^β
                    second[i * n + j].push(
                        &lab * &(half() * (&d1[al][i] * &d1[be][j] + &d1[al][j] * &d1[be][i])),
                    );
                }
            }
        }
    }
    let first = first.into_iter().map(sum).collect();
    let second = SymMatrix::from_fn(n, |i, j| sum(second[i * n + j].clone()));
    Codiffusor::new(c.clone(), first, second)
}

/// `Φ̄*ω = Φ̄*(ω_α) dΦ̄^α`.
pub fn pullback_one_form(phi: &Diffeomorphism, omega: &OneForm) -> Result<OneForm> {
    check_coords(phi.coords(), omega.coords())?;
    let c = phi.coords();
    let n = c.dim() + 1;
    let comps = (0..n)
        .map(|i| {
            sum((0..n)
                .map(|al| phi.pullback_function(omega.component(al)) * pd(phi.component(al), c.name(i)))
                .collect())
        })
        .collect();
    OneForm::new(c.clone(), comps)
}

/// `Φ̄_*λ = (Φ̄⁻¹)*λ`.
pub fn pushforward_codiffusor(phi: &Diffeomorphism, lambda: &Codiffusor) -> Result<Codiffusor> {
    pullback_codiffusor(&phi.inverse()?, lambda)
}

/// `Φ̄_*L`, the diffusor with `(Φ̄_*L)(g) = L(g ∘ Φ̄) ∘ Φ̄⁻¹`.
///
/// Coefficients come from applying `L` to the coordinate functions `Φ̄^α` and their
/// products: `b'^α = L(Φ^α)`, `A'^{αβ} = ½(L(Φ^αΦ^β) − Φ^α L(Φ^β) − Φ^β L(Φ^α))`,
/// each composed with `Φ̄⁻¹`.
pub fn pushforward_diffusor(phi: &Diffeomorphism, l: &Diffusor) -> Result<Diffusor> {
    check_coords(phi.coords(), l.coords())?;
    let inv = phi.inverse()?;
    let c = l.coords();
    let n = l.n();
    let f = phi.forward();
    let lf: Vec<Expr> = f.iter().map(|fa| apply_diffusor(l, fa)).collect();
    let b = lf.iter().map(|e| inv.pullback_function(e)).collect();
    let a = SymMatrix::from_fn(n, |al, be| {
        let prod = apply_diffusor(l, &normalize(&(&f[al] * &f[be])));
        let raw = half() * (prod - &f[al] * &lf[be] - &f[be] * &lf[al]);
        inv.pullback_function(&normalize(&raw))
    });
    Diffusor::new(c.clone(), a, b)
}

/// `Φ̄*L = (Φ̄⁻¹)_*L`.
pub fn pullback_diffusor(phi: &Diffeomorphism, l: &Diffusor) -> Result<Diffusor> {
    pushforward_diffusor(&phi.inverse()?, l)
}

/// `Φ̄_*X`: components `X(Φ̄^α) ∘ Φ̄⁻¹`.
pub fn pushforward_field(phi: &Diffeomorphism, x: &VectorField) -> Result<VectorField> {
    check_coords(phi.coords(), x.coords())?;
    let inv = phi.inverse()?;
    let comps = phi
        .forward()
        .iter()
        .map(|fa| inv.pullback_function(&x.apply(fa)))
        .collect();
    VectorField::new(x.coords().clone(), comps)
}

/// `d²g − L(g) d²t`, an element of the annihilator of a standard `L`.
pub fn canonical_annihilator_element(g: &Expr, l: &Diffusor) -> Result<Codiffusor> {
    l.require_standard()?;
    let c = l.coords();
    let lg = apply_diffusor(l, g);
    let d2t = second_differential(c, &c.coordinate(0));
    second_differential(c, g).sub(&d2t.scale(&lg))
}

/// `⟨λ, L⟩ = 0`, decided by the zero test.
pub fn in_annihilator(lambda: &Codiffusor, l: &Diffusor) -> Result<bool> {
    Ok(zero_test(&pair(lambda, l)?)?.is_zero())
}

/// Zero test of `⟨λ, L⟩` with the probabilistic flag.
pub fn annihilator_test(lambda: &Codiffusor, l: &Diffusor) -> Result<Zeroness> {
    zero_test(&pair(lambda, l)?)
}
