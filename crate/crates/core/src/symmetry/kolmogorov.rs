use crate::error::Result;
use crate::geometry::{apply_diffusor, Diffusor, ProjectableVectorField};
use crate::symbolic::{normalize, pd, Expr};

use super::determining::{all_zero, check_symmetry, determining_residuals};

/// Point symmetry `Z = τ ∂_t + φ^i ∂_i + h u ∂_u` of the Kolmogorov equation `L(u) = 0`.
///
/// The structural conditions (`φ`, `τ` free of `u`, `τ` free of `x`) hold by
/// construction of the projectable field.
#[derive(Clone, Debug, PartialEq)]
pub struct KolmogorovSymmetryCandidate {
    pub field: ProjectableVectorField,
    pub h: Expr,
}

impl KolmogorovSymmetryCandidate {
    pub fn new(field: ProjectableVectorField, h: Expr) -> Result<KolmogorovSymmetryCandidate> {
        h.check_vars(field.coords())?;
        Ok(KolmogorovSymmetryCandidate {
            field,
            h: normalize(&h),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KolmogorovVerdict {
    pub pde_symmetry: bool,
    pub martingale_symmetry: bool,
    /// `L(h)`, the A-equations, then the b-equations with the `h` terms.
    pub pde_residuals: Vec<Expr>,
    pub probabilistic: bool,
}

/// Compares a Lie point symmetry of `L(u) = 0` with the martingale-problem
/// symmetry condition on its `(φ, τ)` part.
///
/// The PDE conditions are the martingale determining equations with the
/// b-equations shifted by `A^{ik} ∂_k h + A^{ki} ∂_k h`, plus `L(h) = 0`.
/// The two notions agree when `h` is constant.
pub fn kolmogorov_check(z: &KolmogorovSymmetryCandidate, l: &Diffusor) -> Result<KolmogorovVerdict> {
    let martingale = check_symmetry(&z.field, l)?;
    let mut residuals = determining_residuals(&z.field, l)?;
    let c = l.coords();
    let m = c.dim();
    let offset = m * (m + 1) / 2;
    for i in 0..m {
        let mut terms = vec![residuals[offset + i].clone()];
        for k in 0..m {
            let dh = pd(&z.h, c.name(k + 1));
            terms.push(l.spatial_a(i, k) * &dh);
            terms.push(l.spatial_a(k, i) * &dh);
        }
        residuals[offset + i] = normalize(&Expr::sum(terms));
    }
    let mut pde_residuals = vec![apply_diffusor(l, &z.h)];
    pde_residuals.extend(residuals);
    let (pde_symmetry, probabilistic) = all_zero(&pde_residuals)?;
    Ok(KolmogorovVerdict {
        pde_symmetry,
        martingale_symmetry: martingale.is_symmetry,
        pde_residuals,
        probabilistic: probabilistic || martingale.probabilistic,
    })
}
