use std::sync::Arc;

use rayon::prelude::*;

use super::paths::{PathEnsemble, SamplePath, TimeGrid};
use crate::error::{Error, Result};
use crate::geometry::{Codiffusor, FiniteTransformation};
use crate::symbolic::Compiled;

/// A codiffusor compiled for evaluation along paths.
pub struct CompiledCodiffusor {
    n: usize,
    first: Vec<Compiled>,
    /// Full `n × n`, row-major.
    second: Vec<Compiled>,
}

impl CompiledCodiffusor {
    pub fn new(lambda: &Codiffusor) -> Result<CompiledCodiffusor> {
        let c = lambda.coords();
        let n = lambda.n();
        let first = (0..n)
            .map(|a| Compiled::new(lambda.first(a), c))
            .collect::<Result<_>>()?;
        let mut second = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                second.push(Compiled::new(lambda.second(a, b), c)?);
            }
        }
        Ok(CompiledCodiffusor { n, first, second })
    }

    /// `λ_α ΔX̄^α + ½ λ_{αβ} ΔX̄^α ΔX̄^β` at the left point `(t, x)`.
    fn increment(&self, t: f64, x: &[f64], d: &[f64]) -> Result<f64> {
        let mut v = 0.0;
        for a in 0..self.n {
            if d[a] != 0.0 {
                v += self.first[a].eval(t, x)? * d[a];
            }
        }
        for a in 0..self.n {
            for b in 0..self.n {
                let w = d[a] * d[b];
                if w != 0.0 {
                    v += 0.5 * self.second[a * self.n + b].eval(t, x)? * w;
                }
            }
        }
        Ok(v)
    }

    /// Discrete Itô integral along a path, `I_0 = 0`.
    pub fn integrate(&self, path: &SamplePath) -> Result<Vec<f64>> {
        if path.dim() + 1 != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n - 1,
                found: path.dim(),
            });
        }
        let grid = path.grid();
        let mut out = Vec::with_capacity(grid.len());
        out.push(0.0);
        let mut d = vec![0.0; self.n];
        let mut acc = 0.0;
        for k in 0..grid.steps() {
            let x = path.state(k);
            let next = path.state(k + 1);
            d[0] = grid.dt(k);
            for i in 0..path.dim() {
                d[i + 1] = next[i] - x[i];
            }
            acc += self.increment(grid.times()[k], x, &d)?;
            out.push(acc);
        }
        Ok(out)
    }
}

/// `I_{k+1} = I_k + λ_α(t_k, X_k) ΔX̄^α_k + ½ λ_{αβ}(t_k, X_k) ΔX̄^α_k ΔX̄^β_k`
/// with `ΔX̄^0 = Δt`; left-point (Itô) evaluation, all terms kept.
pub fn ito_integral(lambda: &Codiffusor, path: &SamplePath) -> Result<Vec<f64>> {
    CompiledCodiffusor::new(lambda)?.integrate(path)
}

/// Image of an ensemble under `(t, x) ↦ (f(t), Φ(t, x))`, on the image grid `f(t_k)`.
pub fn transform_ensemble(e: &PathEnsemble, map: &dyn FiniteTransformation) -> Result<PathEnsemble> {
    let times = e
        .grid()
        .times()
        .iter()
        .map(|&t| map.time(t))
        .collect::<Result<Vec<f64>>>()?;
    if let Some(k) = times.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::NonMonotoneTimeChange { index: k + 1 });
    }
    let grid = Arc::new(TimeGrid::new(times)?);
    let dim = e.dim();
    let results: Vec<Result<SamplePath>> = e
        .paths()
        .par_iter()
        .map(|p| {
            let mut states = Vec::with_capacity(p.states().len());
            for (k, &t) in p.grid().times().iter().enumerate() {
                let (_, x) = map.apply(t, p.state(k))?;
                if x.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: x.len(),
                    });
                }
                states.extend(x);
            }
            SamplePath::new(grid.clone(), dim, states)
        })
        .collect();
    let paths = results.into_iter().collect::<Result<Vec<_>>>()?;
    PathEnsemble::new(grid, dim, paths, e.seed(), e.scheme())
}
