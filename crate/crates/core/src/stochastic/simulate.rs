use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::paths::{PathEnsemble, SamplePath, TimeGrid, EULER_MARUYAMA};
use crate::error::{Error, Result};
use crate::geometry::Diffusor;
use crate::symbolic::Compiled;

/// Eigenvalues of `A` down to this are treated as roundoff and clipped to 0.
pub const PSD_TOLERANCE: f64 = 1e-9;

/// `σ` with `½ σ σᵀ = A` for a numeric symmetric PSD matrix, by pivoted
/// Cholesky of `2A`. Rank-deficient directions give zero columns.
pub fn factor_matrix(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = a.nrows();
    if a.ncols() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: a.ncols(),
        });
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::EvaluationDomain("diffusion matrix is not finite".into()));
    }
    if m == 0 {
        return Ok(a.clone());
    }
    let min = SymmetricEigen::new(a.clone()).eigenvalues.min();
    if min < -PSD_TOLERANCE {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    let s = a * 2.0;
    let tol = 1e-12 * s.diagonal().max().max(1.0);
    let mut l = DMatrix::<f64>::zeros(m, m);
    let mut d: Vec<f64> = (0..m).map(|i| s[(i, i)]).collect();
    let mut rest: Vec<usize> = (0..m).collect();
    for j in 0..m {
        let (pos, &q) = rest
            .iter()
            .enumerate()
            .max_by(|a, b| d[*a.1].total_cmp(&d[*b.1]))
            .expect("rest is nonempty");
        if d[q] <= tol {
            break;
        }
        rest.swap_remove(pos);
        let pivot = d[q].sqrt();
        l[(q, j)] = pivot;
        for &r in &rest {
            let mut v = s[(r, q)];
            for k in 0..j {
                v -= l[(r, k)] * l[(q, k)];
            }
            l[(r, j)] = v / pivot;
            d[r] -= l[(r, j)] * l[(r, j)];
        }
    }
    Ok(l)
}

/// Spatial `A(t, x)` of a diffusor as a dense matrix.
fn eval_a(a: &[Compiled], m: usize, t: f64, x: &[f64]) -> Result<DMatrix<f64>> {
    let mut out = DMatrix::zeros(m, m);
    let mut k = 0;
    for i in 0..m {
        for j in i..m {
            let v = a[k].eval(t, x)?;
            out[(i, j)] = v;
            out[(j, i)] = v;
            k += 1;
        }
    }
    Ok(out)
}

/// `σ(t, x)` with `½ σ σᵀ = A(t, x)` for the spatial part of `L`.
pub fn factor_diffusion(l: &Diffusor, t: f64, x: &[f64]) -> Result<DMatrix<f64>> {
    let model = Model::new(l)?;
    if x.len() != model.m {
        return Err(Error::DimensionMismatch {
            expected: model.m,
            found: x.len(),
        });
    }
    model.sigma(t, x)
}

struct Model {
    m: usize,
    a: Vec<Compiled>,
    b: Vec<Compiled>,
    constant_sigma: Option<DMatrix<f64>>,
}

impl Model {
    fn new(l: &Diffusor) -> Result<Model> {
        l.require_standard()?;
        let c = l.coords();
        let m = c.dim();
        let mut a = Vec::with_capacity(m * (m + 1) / 2);
        for i in 0..m {
            for j in i..m {
                a.push(Compiled::new(l.spatial_a(i, j), c)?);
            }
        }
        let b = (0..m)
            .map(|i| Compiled::new(l.spatial_b(i), c))
            .collect::<Result<Vec<_>>>()?;
        let constant_sigma = if a.iter().all(Compiled::is_constant) {
            Some(factor_matrix(&eval_a(&a, m, 0.0, &vec![0.0; m])?)?)
        } else {
            None
        };
        Ok(Model {
            m,
            a,
            b,
            constant_sigma,
        })
    }

    fn sigma(&self, t: f64, x: &[f64]) -> Result<DMatrix<f64>> {
        match &self.constant_sigma {
            Some(s) => Ok(s.clone()),
            None => factor_matrix(&eval_a(&self.a, self.m, t, x)?),
        }
    }

    fn path(&self, x0: &[f64], grid: &Arc<TimeGrid>, seed: u64, index: u64) -> Result<SamplePath> {
        let m = self.m;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let mut states = Vec::with_capacity(grid.len() * m);
        states.extend_from_slice(x0);
        let mut x = x0.to_vec();
        let mut dw = vec![0.0; m];
        let mut drift = vec![0.0; m];
        for k in 0..grid.steps() {
            let t = grid.times()[k];
            let dt = grid.dt(k);
            let sd = dt.sqrt();
            for w in dw.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *w = sd * z;
            }
            for (d, b) in drift.iter_mut().zip(&self.b) {
                *d = b.eval(t, &x)?;
            }
            let sigma = self.sigma(t, &x)?;
            for i in 0..m {
                let mut v = x[i] + drift[i] * dt;
                for (a, w) in dw.iter().enumerate() {
                    v += sigma[(i, a)] * w;
                }
                x[i] = v;
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::EvaluationDomain(format!(
                    "path {index} left the finite range at step {}",
                    k + 1
                )));
            }
            states.extend_from_slice(&x);
        }
        SamplePath::new(grid.clone(), m, states)
    }
}

/// Euler–Maruyama paths of the diffusion with standard diffusor `L` started at `x0`.
///
/// Path `i` draws its normals from the ChaCha8 stream `i` under key `seed`, step by
/// step, so the ensemble is a pure function of `(seed, L, x0, grid, n)`.
pub fn simulate(l: &Diffusor, x0: &[f64], grid: &TimeGrid, n: usize, seed: u64) -> Result<PathEnsemble> {
    let model = Model::new(l)?;
    if x0.len() != model.m {
        return Err(Error::DimensionMismatch {
            expected: model.m,
            found: x0.len(),
        });
    }
    let grid = Arc::new(grid.clone());
    let results: Vec<Result<SamplePath>> = (0..n)
        .into_par_iter()
        .map(|i| model.path(x0, &grid, seed, i as u64))
        .collect();
    // first error by path index, independent of scheduling
    let paths = results.into_iter().collect::<Result<Vec<_>>>()?;
    PathEnsemble::new(grid, model.m, paths, seed, EULER_MARUYAMA)
}
