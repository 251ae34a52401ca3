use std::collections::BTreeMap;
use std::fmt;
use std::ops::Deref;

use crate::error::{Error, Result};
use crate::symbolic::{normalize, pd, substitute, zero_test, Compiled, CoordinateSystem, Expr, Zeroness, TIME};

/// First-order operator `X = X^α ∂_α` on space-time, index 0 = `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField {
    coords: CoordinateSystem,
    comps: Vec<Expr>,
}

impl VectorField {
    pub fn new(coords: CoordinateSystem, comps: Vec<Expr>) -> Result<VectorField> {
        let n = coords.dim() + 1;
        if comps.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: comps.len(),
            });
        }
        for c in &comps {
            c.check_vars(&coords)?;
        }
        Ok(VectorField {
            coords,
            comps: comps.iter().map(normalize).collect(),
        })
    }

    /// The coordinate field `∂_α`.
    pub fn coordinate(coords: CoordinateSystem, alpha: usize) -> VectorField {
        let comps = (0..=coords.dim())
            .map(|b| if b == alpha { Expr::one() } else { Expr::zero() })
            .collect();
        VectorField { coords, comps }
    }

    pub fn coords(&self) -> &CoordinateSystem {
        &self.coords
    }

    pub fn component(&self, alpha: usize) -> &Expr {
        &self.comps[alpha]
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    /// `X(g) = X^α ∂_α g`, normalized.
    pub fn apply(&self, g: &Expr) -> Expr {
        let terms = self
            .comps
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero_literal())
            .map(|(a, c)| c * &pd(g, self.coords.name(a)))
            .collect();
        normalize(&Expr::sum(terms))
    }

    /// Lie bracket `[X, Y]`.
    pub fn bracket(&self, other: &VectorField) -> Result<VectorField> {
        super::tensors::check_coords(&self.coords, &other.coords)?;
        let comps = (0..self.comps.len())
            .map(|a| normalize(&(self.apply(&other.comps[a]) - other.apply(&self.comps[a]))))
            .collect();
        Ok(VectorField {
            coords: self.coords.clone(),
            comps,
        })
    }

    pub fn scale(&self, f: &Expr) -> VectorField {
        VectorField {
            coords: self.coords.clone(),
            comps: self.comps.iter().map(|c| normalize(&(f * c))).collect(),
        }
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField> {
        super::tensors::check_coords(&self.coords, &other.coords)?;
        Ok(VectorField {
            coords: self.coords.clone(),
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| normalize(&(a + b)))
                .collect(),
        })
    }

    pub fn zero_test(&self) -> Result<Zeroness> {
        let mut out = Zeroness::Zero;
        for c in &self.comps {
            match zero_test(c)? {
                Zeroness::NonZero => return Ok(Zeroness::NonZero),
                Zeroness::ProbablyZero => out = Zeroness::ProbablyZero,
                Zeroness::Zero => {}
            }
        }
        Ok(out)
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .comps
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero_literal())
            .map(|(a, c)| format!("({})*d_{}", c, self.coords.name(a)))
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// `X = φ^i(t,x) ∂_{x^i} + τ(t) ∂_t`.
///
/// Dereferences to the underlying [`VectorField`] (component 0 is `τ`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectableVectorField {
    field: VectorField,
}

impl ProjectableVectorField {
    pub fn new(coords: CoordinateSystem, phi: Vec<Expr>, tau: Expr) -> Result<ProjectableVectorField> {
        if phi.len() != coords.dim() {
            return Err(Error::DimensionMismatch {
                expected: coords.dim(),
                found: phi.len(),
            });
        }
        let tau = normalize(&tau);
        if let Some(v) = tau.free_variables().into_iter().find(|v| v != TIME) {
            return Err(Error::NotProjectable(format!(
                "tau depends on spatial variable `{v}`"
            )));
        }
        let mut comps = vec![tau];
        comps.extend(phi);
        Ok(ProjectableVectorField {
            field: VectorField::new(coords, comps)?,
        })
    }

    pub fn from_field(field: VectorField) -> Result<ProjectableVectorField> {
        let phi = field.comps[1..].to_vec();
        ProjectableVectorField::new(field.coords.clone(), phi, field.comps[0].clone())
    }

    pub fn zero(coords: CoordinateSystem) -> ProjectableVectorField {
        let m = coords.dim();
        ProjectableVectorField::new(coords, vec![Expr::zero(); m], Expr::zero()).unwrap()
    }

    pub fn tau(&self) -> &Expr {
        &self.field.comps[0]
    }

    /// `φ^i`, `i` in `0..m`.
    pub fn phi(&self, i: usize) -> &Expr {
        &self.field.comps[i + 1]
    }

    pub fn phis(&self) -> &[Expr] {
        &self.field.comps[1..]
    }

    pub fn field(&self) -> &VectorField {
        &self.field
    }

    pub fn scale(&self, c: &Expr) -> Result<ProjectableVectorField> {
        ProjectableVectorField::from_field(self.field.scale(c))
    }
}

impl Deref for ProjectableVectorField {
    type Target = VectorField;

    fn deref(&self) -> &VectorField {
        &self.field
    }
}

impl fmt::Display for ProjectableVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.field.fmt(f)
    }
}

/// Projectable map `Φ̄(t, x) = (f(t), Φ(t, x))` with optional inverse.
#[derive(Clone, Debug)]
pub struct Diffeomorphism {
    coords: CoordinateSystem,
    forward: Vec<Expr>,
    inverse: Option<Vec<Expr>>,
}

fn compose(coords: &CoordinateSystem, outer: &[Expr], inner: &[Expr]) -> Vec<Expr> {
    let map: BTreeMap<String, Expr> = inner
        .iter()
        .enumerate()
        .map(|(a, e)| (coords.name(a).to_string(), e.clone()))
        .collect();
    outer.iter().map(|e| substitute(e, &map)).collect()
}

impl Diffeomorphism {
    /// `f` must depend on `t` only.
    pub fn new(coords: CoordinateSystem, f: Expr, phi: Vec<Expr>) -> Result<Diffeomorphism> {
        let forward = Self::components(&coords, f, phi)?;
        Ok(Diffeomorphism {
            coords,
            forward,
            inverse: None,
        })
    }

    fn components(coords: &CoordinateSystem, f: Expr, phi: Vec<Expr>) -> Result<Vec<Expr>> {
        if phi.len() != coords.dim() {
            return Err(Error::DimensionMismatch {
                expected: coords.dim(),
                found: phi.len(),
            });
        }
        if let Some(v) = f.free_variables().into_iter().find(|v| v != TIME) {
            return Err(Error::NotProjectable(format!(
                "time map depends on spatial variable `{v}`"
            )));
        }
        let mut out = vec![normalize(&f)];
        out.extend(phi.iter().map(normalize));
        for e in &out {
            e.check_vars(coords)?;
        }
        Ok(out)
    }

    pub fn identity(coords: CoordinateSystem) -> Diffeomorphism {
        let forward: Vec<Expr> = (0..=coords.dim()).map(|a| coords.coordinate(a)).collect();
        Diffeomorphism {
            coords,
            inverse: Some(forward.clone()),
            forward,
        }
    }

    /// Attaches the inverse `(f⁻¹, Φ⁻¹)` after checking both round trips symbolically.
    pub fn with_inverse(mut self, f_inv: Expr, phi_inv: Vec<Expr>) -> Result<Diffeomorphism> {
        let inverse = Self::components(&self.coords, f_inv, phi_inv)?;
        for (label, outer, inner) in [
            ("forward after inverse", &self.forward, &inverse),
            ("inverse after forward", &inverse, &self.forward),
        ] {
            let round = compose(&self.coords, outer, inner);
            for (a, e) in round.iter().enumerate() {
                let d = e - &self.coords.coordinate(a);
                if !zero_test(&d)?.is_zero() {
                    return Err(Error::InvalidInverse(format!(
                        "{label}: component `{}` gives `{}`",
                        self.coords.name(a),
                        normalize(&d)
                    )));
                }
            }
        }
        self.inverse = Some(inverse);
        Ok(self)
    }

    pub fn coords(&self) -> &CoordinateSystem {
        &self.coords
    }

    /// `Φ̄^α`; component 0 is the time map `f`.
    pub fn component(&self, alpha: usize) -> &Expr {
        &self.forward[alpha]
    }

    pub fn forward(&self) -> &[Expr] {
        &self.forward
    }

    pub fn has_inverse(&self) -> bool {
        self.inverse.is_some()
    }

    /// The inverse map, with `self` as its inverse.
    pub fn inverse(&self) -> Result<Diffeomorphism> {
        let inv = self.inverse.clone().ok_or(Error::MissingInverse)?;
        Ok(Diffeomorphism {
            coords: self.coords.clone(),
            forward: inv,
            inverse: Some(self.forward.clone()),
        })
    }

    /// `Φ̄*(g) = g ∘ Φ̄`.
    pub fn pullback_function(&self, g: &Expr) -> Expr {
        compose(&self.coords, std::slice::from_ref(g), &self.forward).remove(0)
    }

    /// `Φ̄_*(g) = g ∘ Φ̄⁻¹`.
    pub fn pushforward_function(&self, g: &Expr) -> Result<Expr> {
        Ok(self.inverse()?.pullback_function(g))
    }

    /// Compiles the forward map for numeric use.
    pub fn compile(&self) -> Result<CompiledMap> {
        CompiledMap::new(&self.coords, &self.forward)
    }
}

/// A numeric space-time map `(t, x) ↦ (f(t), Φ(t, x))`.
pub trait FiniteTransformation: Sync {
    /// The time change `f`.
    fn time(&self, t: f64) -> Result<f64>;

    fn apply(&self, t: f64, x: &[f64]) -> Result<(f64, Vec<f64>)>;
}

/// Numeric form of a projectable map.
#[derive(Clone, Debug)]
pub struct CompiledMap {
    comps: Vec<Compiled>,
}

impl CompiledMap {
    pub fn new(coords: &CoordinateSystem, comps: &[Expr]) -> Result<CompiledMap> {
        Ok(CompiledMap {
            comps: comps
                .iter()
                .map(|e| Compiled::new(e, coords))
                .collect::<Result<_>>()?,
        })
    }

    /// Time component only.
    pub fn time(&self, t: f64) -> Result<f64> {
        self.comps[0].eval(t, &[])
    }

    pub fn apply(&self, t: f64, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let t2 = self.comps[0].eval(t, x)?;
        let x2 = self.comps[1..]
            .iter()
            .map(|c| c.eval(t, x))
            .collect::<Result<Vec<f64>>>()?;
        Ok((t2, x2))
    }
}

impl FiniteTransformation for CompiledMap {
    fn time(&self, t: f64) -> Result<f64> {
        CompiledMap::time(self, t)
    }

    fn apply(&self, t: f64, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        CompiledMap::apply(self, t, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cs() -> CoordinateSystem {
        CoordinateSystem::new(["x"]).unwrap()
    }

    #[test]
    fn tau_must_not_depend_on_space() {
        let err = ProjectableVectorField::new(cs(), vec![Expr::zero()], Expr::var("x") * Expr::var("t"));
        assert!(matches!(err, Err(Error::NotProjectable(m)) if m.contains("tau depends on spatial variable")));
    }

    #[test]
    fn inverse_round_trip_is_validated() {
        let x = Expr::var("x");
        let t = Expr::var("t");
        let d = Diffeomorphism::new(cs(), Expr::int(4) * t.clone(), vec![Expr::int(2) * x.clone()]).unwrap();
        let good = d
            .clone()
            .with_inverse(Expr::rational(1, 4) * t.clone(), vec![Expr::rational(1, 2) * x.clone()]);
        assert!(good.is_ok());
        let bad = d.with_inverse(t, vec![x]);
        assert!(matches!(bad, Err(Error::InvalidInverse(_))));
    }

    #[test]
    fn bracket_of_coordinate_fields_vanishes() {
        let dx = VectorField::coordinate(cs(), 1);
        let dt = VectorField::coordinate(cs(), 0);
        assert_eq!(dx.bracket(&dt).unwrap().zero_test().unwrap(), Zeroness::Zero);
        let xdx = VectorField::new(cs(), vec![Expr::zero(), Expr::var("x")]).unwrap();
        assert_eq!(dx.bracket(&xdx).unwrap(), dx);
    }
}
