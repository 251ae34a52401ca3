use crate::error::{Error, Result};
use crate::geometry::{lie_derivative_diffusor, Diffusor, ProjectableVectorField};
use crate::symbolic::{normalize, pd, zero_test, Expr, Zeroness};

/// Outcome of checking `𝓛_X L = μ L`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryVerdict {
    pub is_symmetry: bool,
    /// `μ = −∂_t τ`.
    pub mu: Expr,
    /// One residual per determining equation, in [`determining_residuals`] order.
    pub residuals: Vec<Expr>,
    /// Some residual was only declared zero by numeric probing.
    pub probabilistic: bool,
}

fn sum(terms: Vec<Expr>) -> Expr {
    normalize(&Expr::sum(terms))
}

/// Residuals of the determining equations of a projectable field for a standard
/// diffusor: `m(m+1)/2` A-equations (row-major upper triangle) then `m` b-equations.
///
/// * `φ^k ∂_k A^{ij} + τ ∂_t A^{ij} − A^{ik} ∂_k φ^j − A^{kj} ∂_k φ^i + A^{ij} ∂_t τ`
/// * `φ^k ∂_k b^i + τ ∂_t b^i − b^k ∂_k φ^i − A^{jk} ∂_{jk} φ^i + b^i ∂_t τ − ∂_t φ^i`
pub fn determining_residuals(x: &ProjectableVectorField, l: &Diffusor) -> Result<Vec<Expr>> {
    crate::geometry::check_coords(x.coords(), l.coords())?;
    l.require_standard()?;
    let c = l.coords();
    let m = c.dim();
    let dtau = pd(x.tau(), "t");
    // dphi[i][k] = ∂_k φ^i, spatial k
    let dphi: Vec<Vec<Expr>> = (0..m)
        .map(|i| (1..=m).map(|k| pd(x.phi(i), c.name(k))).collect())
        .collect();
    let a = |i: usize, j: usize| l.spatial_a(i, j);
    let mut out = Vec::with_capacity(m * (m + 3) / 2);
    for i in 0..m {
        for j in i..m {
            let mut terms = vec![x.apply(a(i, j)), a(i, j) * &dtau];
            for k in 0..m {
                terms.push(-(a(i, k) * &dphi[j][k]));
                terms.push(-(a(k, j) * &dphi[i][k]));
            }
            out.push(sum(terms));
        }
    }
    for i in 0..m {
        let b = l.spatial_b(i);
        let mut terms = vec![x.apply(b), b * &dtau, -pd(x.phi(i), "t")];
        for k in 0..m {
            terms.push(-(l.spatial_b(k) * &dphi[i][k]));
            for j in 0..m {
                if !a(j, k).is_zero_literal() {
                    terms.push(-(a(j, k) * &pd(&dphi[i][k], c.name(j + 1))));
                }
            }
        }
        out.push(sum(terms));
    }
    Ok(out)
}

/// Zero-tests a list of residuals: `(all zero, some answer was probabilistic)`.
pub(crate) fn all_zero(residuals: &[Expr]) -> Result<(bool, bool)> {
    let mut zero = true;
    let mut probabilistic = false;
    for r in residuals {
        match zero_test(r)? {
            Zeroness::Zero => {}
            Zeroness::ProbablyZero => probabilistic = true,
            Zeroness::NonZero => zero = false,
        }
    }
    Ok((zero, probabilistic))
}

/// Decides whether `X` is an infinitesimal symmetry of the martingale problem of `L`.
///
/// The residuals are cross-checked against `𝓛_X L − μ L` computed by the general
/// Lie-derivative formula; any disagreement is reported as [`Error::Inconsistent`].
pub fn check_symmetry(x: &ProjectableVectorField, l: &Diffusor) -> Result<SymmetryVerdict> {
    let residuals = determining_residuals(x, l)?;
    let mu = normalize(&-pd(x.tau(), "t"));
    let (is_symmetry, probabilistic) = all_zero(&residuals)?;

    let lie = lie_derivative_diffusor(x, l)?.sub(&l.scale(&mu))?;
    let m = l.coords().dim();
    let mut expected = Vec::with_capacity(residuals.len());
    for i in 1..=m {
        for j in i..=m {
            expected.push(lie.a(i, j).clone());
        }
    }
    expected.extend((1..=m).map(|i| lie.b(i).clone()));
    for (k, (r, e)) in residuals.iter().zip(&expected).enumerate() {
        if !zero_test(&(r - e))?.is_zero() {
            return Err(Error::Inconsistent(format!(
                "determining residual {k} is `{r}` but the Lie derivative gives `{e}`"
            )));
        }
    }
    // time row of 𝓛_X L − μL vanishes identically for projectable X
    for beta in 0..=m {
        if !zero_test(lie.a(0, beta))?.is_zero() {
            return Err(Error::Inconsistent(format!(
                "time row of the Lie derivative is `{}`",
                lie.a(0, beta)
            )));
        }
    }
    if !zero_test(lie.b(0))?.is_zero() {
        return Err(Error::Inconsistent(format!(
            "time drift of the Lie derivative is `{}`",
            lie.b(0)
        )));
    }
    Ok(SymmetryVerdict {
        is_symmetry,
        mu,
        residuals,
        probabilistic,
    })
}
