use crate::error::{Error, Result};
use crate::geometry::{FiniteTransformation, ProjectableVectorField};
use crate::symbolic::Compiled;

const BLOWUP: f64 = 1e12;

/// Numeric time-`a` flow of a projectable field, classical RK4 with fixed steps.
#[derive(Clone, Debug)]
pub struct Flow {
    tau: Compiled,
    phi: Vec<Compiled>,
    a: f64,
    steps: usize,
}

/// `Φ_a` for `X`, integrated with `steps` RK4 substeps.
pub fn flow(x: &ProjectableVectorField, a: f64, steps: usize) -> Result<Flow> {
    if steps == 0 {
        return Err(Error::InvalidArgument("flow needs at least one step".into()));
    }
    if !a.is_finite() {
        return Err(Error::InvalidArgument(format!("flow parameter {a} is not finite")));
    }
    let coords = x.coords();
    Ok(Flow {
        tau: Compiled::new(x.tau(), coords)?,
        phi: x
            .phis()
            .iter()
            .map(|p| Compiled::new(p, coords))
            .collect::<Result<_>>()?,
        a,
        steps,
    })
}

fn check(state: &[f64]) -> Result<()> {
    let norm = state.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm.is_finite() && norm <= BLOWUP {
        Ok(())
    } else {
        Err(Error::NumericBlowup { norm })
    }
}

impl Flow {
    pub fn parameter(&self) -> f64 {
        self.a
    }

    /// `(τ(t), φ(t, x))`.
    fn rhs(&self, s: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(s.len());
        out.push(self.tau.eval(s[0], &[])?);
        for p in &self.phi {
            out.push(p.eval(s[0], &s[1..])?);
        }
        Ok(out)
    }

    fn integrate(&self, mut s: Vec<f64>, rhs: impl Fn(&[f64]) -> Result<Vec<f64>>) -> Result<Vec<f64>> {
        check(&s)?;
        let h = self.a / self.steps as f64;
        let axpy = |s: &[f64], k: &[f64], c: f64| -> Vec<f64> {
            s.iter().zip(k).map(|(a, b)| a + c * b).collect()
        };
        for _ in 0..self.steps {
            let k1 = rhs(&s)?;
            let k2 = rhs(&axpy(&s, &k1, h / 2.0))?;
            let k3 = rhs(&axpy(&s, &k2, h / 2.0))?;
            let k4 = rhs(&axpy(&s, &k3, h))?;
            for (i, v) in s.iter_mut().enumerate() {
                *v += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            check(&s)?;
        }
        Ok(s)
    }
}

impl FiniteTransformation for Flow {
    /// Same arithmetic as the time component of [`FiniteTransformation::apply`].
    fn time(&self, t: f64) -> Result<f64> {
        let s = self.integrate(vec![t], |s| Ok(vec![self.tau.eval(s[0], &[])?]))?;
        Ok(s[0])
    }

    fn apply(&self, t: f64, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        if x.len() != self.phi.len() {
            return Err(Error::DimensionMismatch {
                expected: self.phi.len(),
                found: x.len(),
            });
        }
        let mut s = vec![t];
        s.extend_from_slice(x);
        let s = self.integrate(s, |s| self.rhs(s))?;
        Ok((s[0], s[1..].to_vec()))
    }
}
