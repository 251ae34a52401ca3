use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::symbolic::{normalize, zero_test, Compiled, CoordinateSystem, Expr, Zeroness};

/// Symmetric `n × n` matrix of expressions, stored upper-triangular row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<Expr>,
}

fn tri_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

impl SymMatrix {
    pub fn zeros(n: usize) -> SymMatrix {
        SymMatrix {
            n,
            data: vec![Expr::zero(); n * (n + 1) / 2],
        }
    }

    /// From upper-triangular entries in row-major order: `(0,0), (0,1), ..., (1,1), ...`.
    pub fn from_upper(n: usize, upper: Vec<Expr>) -> Result<SymMatrix> {
        if upper.len() != n * (n + 1) / 2 {
            return Err(Error::DimensionMismatch {
                expected: n * (n + 1) / 2,
                found: upper.len(),
            });
        }
        Ok(SymMatrix { n, data: upper })
    }

    /// Builds from a function of `(i, j)` evaluated for `i <= j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Expr) -> SymMatrix {
        let mut data = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                data.push(f(i, j));
            }
        }
        SymMatrix { n, data }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.data[tri_index(self.n, i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, e: Expr) {
        let k = tri_index(self.n, i, j);
        self.data[k] = e;
    }

    /// Upper-triangular entries, row-major.
    pub fn upper(&self) -> &[Expr] {
        &self.data
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> SymMatrix {
        SymMatrix {
            n: self.n,
            data: self.data.iter().map(f).collect(),
        }
    }

    fn zip(&self, other: &SymMatrix, f: impl Fn(&Expr, &Expr) -> Expr) -> SymMatrix {
        SymMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        }
    }
}

fn same_coords(a: &CoordinateSystem, b: &CoordinateSystem) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        })
    }
}

pub(crate) fn check_coords(a: &CoordinateSystem, b: &CoordinateSystem) -> Result<()> {
    same_coords(a, b)
}

fn check_vars(coords: &CoordinateSystem, es: &[Expr]) -> Result<()> {
    es.iter().try_for_each(|e| e.check_vars(coords))
}

fn all_zero(es: &[Expr]) -> Result<Zeroness> {
    let mut out = Zeroness::Zero;
    for e in es {
        match zero_test(e)? {
            Zeroness::NonZero => return Ok(Zeroness::NonZero),
            Zeroness::ProbablyZero => out = Zeroness::ProbablyZero,
            Zeroness::Zero => {}
        }
    }
    Ok(out)
}

/// Second-order operator `L = A^{αβ} ∂_{αβ} + b^α ∂_α` on space-time, index 0 = `t`.
///
/// The sum runs over all ordered pairs `(α, β)`; `A` is symmetric.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diffusor {
    coords: CoordinateSystem,
    a: SymMatrix,
    b: Vec<Expr>,
}

impl Diffusor {
    /// `a` and `b` are indexed over space-time (`m + 1` rows).
    pub fn new(coords: CoordinateSystem, a: SymMatrix, b: Vec<Expr>) -> Result<Diffusor> {
        let n = coords.dim() + 1;
        if a.size() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.size(),
            });
        }
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        check_vars(&coords, a.upper())?;
        check_vars(&coords, &b)?;
        Ok(Diffusor {
            coords,
            a: a.map(normalize),
            b: b.iter().map(normalize).collect(),
        })
    }

    /// Standard diffusor `A^{ij} ∂_{ij} + b^i ∂_i + ∂_t` from its spatial parts.
    ///
    /// `a_upper` holds the `m(m+1)/2` upper-triangular spatial entries, row-major.
    pub fn standard(coords: CoordinateSystem, a_upper: Vec<Expr>, b: Vec<Expr>) -> Result<Diffusor> {
        let m = coords.dim();
        let spatial = SymMatrix::from_upper(m, a_upper)?;
        if b.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: b.len(),
            });
        }
        let a = SymMatrix::from_fn(m + 1, |i, j| {
            if i == 0 {
                Expr::zero()
            } else {
                spatial.get(i - 1, j - 1).clone()
            }
        });
        let mut full_b = vec![Expr::one()];
        full_b.extend(b);
        Diffusor::new(coords, a, full_b)
    }

    pub fn zero(coords: CoordinateSystem) -> Diffusor {
        let n = coords.dim() + 1;
        Diffusor {
            coords,
            a: SymMatrix::zeros(n),
            b: vec![Expr::zero(); n],
        }
    }

    pub fn coords(&self) -> &CoordinateSystem {
        &self.coords
    }

    /// Number of space-time coordinates, `m + 1`.
    pub fn n(&self) -> usize {
        self.coords.dim() + 1
    }

    pub fn a(&self, alpha: usize, beta: usize) -> &Expr {
        self.a.get(alpha, beta)
    }

    pub fn a_matrix(&self) -> &SymMatrix {
        &self.a
    }

    pub fn b(&self, alpha: usize) -> &Expr {
        &self.b[alpha]
    }

    pub fn b_vector(&self) -> &[Expr] {
        &self.b
    }

    /// Standard: `b^0 = 1` and `A^{0β} = 0` (so `L(f(t)) = f'(t)`).
    pub fn is_standard(&self) -> bool {
        self.b[0].is_one_literal() && (0..self.n()).all(|beta| self.a(0, beta).is_zero_literal())
    }

    pub fn require_standard(&self) -> Result<()> {
        if !self.b[0].is_one_literal() {
            return Err(Error::NotStandard(format!(
                "time coefficient b^t is `{}`, expected 1",
                self.b[0]
            )));
        }
        for beta in 0..self.n() {
            if !self.a(0, beta).is_zero_literal() {
                return Err(Error::NotStandard(format!(
                    "mixed time coefficient A^(t,{}) is `{}`",
                    self.coords.name(beta),
                    self.a(0, beta)
                )));
            }
        }
        Ok(())
    }

    /// Spatial block `A^{ij}`, `i, j` in `0..m`.
    pub fn spatial_a(&self, i: usize, j: usize) -> &Expr {
        self.a(i + 1, j + 1)
    }

    /// Spatial drift `b^i`, `i` in `0..m`.
    pub fn spatial_b(&self, i: usize) -> &Expr {
        &self.b[i + 1]
    }

    pub fn depends_on_time(&self) -> bool {
        self.a.upper().iter().chain(&self.b).any(|e| e.contains_var(crate::symbolic::TIME))
    }

    pub fn add(&self, other: &Diffusor) -> Result<Diffusor> {
        same_coords(&self.coords, &other.coords)?;
        Ok(Diffusor {
            coords: self.coords.clone(),
            a: self.a.zip(&other.a, |x, y| normalize(&(x + y))),
            b: self.b.iter().zip(&other.b).map(|(x, y)| normalize(&(x + y))).collect(),
        })
    }

    pub fn sub(&self, other: &Diffusor) -> Result<Diffusor> {
        same_coords(&self.coords, &other.coords)?;
        Ok(Diffusor {
            coords: self.coords.clone(),
            a: self.a.zip(&other.a, |x, y| normalize(&(x - y))),
            b: self.b.iter().zip(&other.b).map(|(x, y)| normalize(&(x - y))).collect(),
        })
    }

    /// `f·L`.
    pub fn scale(&self, f: &Expr) -> Diffusor {
        Diffusor {
            coords: self.coords.clone(),
            a: self.a.map(|x| normalize(&(f * x))),
            b: self.b.iter().map(|x| normalize(&(f * x))).collect(),
        }
    }

    /// All coefficients, `A` upper-triangular first.
    pub fn coefficients(&self) -> Vec<Expr> {
        self.a.upper().iter().chain(&self.b).cloned().collect()
    }

    pub fn zero_test(&self) -> Result<Zeroness> {
        all_zero(&self.coefficients())
    }

    /// Most negative eigenvalue of the spatial block `A^{ij}` over `points`
    /// deterministic probe points drawn from `[-2, 2]` in every coordinate.
    ///
    /// Points where `A` cannot be evaluated are skipped.
    pub fn min_spatial_eigenvalue(&self, points: usize) -> Result<f64> {
        let m = self.coords.dim();
        let compiled: Vec<Compiled> = (0..m)
            .flat_map(|i| (i..m).map(move |j| (i, j)))
            .map(|(i, j)| Compiled::new(self.spatial_a(i, j), &self.coords))
            .collect::<Result<_>>()?;
        let mut rng = ChaCha8Rng::seed_from_u64(0x9e3779b97f4a7c15);
        let mut min = f64::INFINITY;
        let mut evaluated = 0;
        'points: for _ in 0..points {
            let t: f64 = rng.random_range(-2.0..=2.0);
            let x: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..=2.0)).collect();
            let mut mat = DMatrix::<f64>::zeros(m, m);
            let mut k = 0;
            for i in 0..m {
                for j in i..m {
                    match compiled[k].eval(t, &x) {
                        Ok(v) => {
                            mat[(i, j)] = v;
                            mat[(j, i)] = v;
                        }
                        Err(Error::EvaluationDomain(_)) => continue 'points,
                        Err(e) => return Err(e),
                    }
                    k += 1;
                }
            }
            evaluated += 1;
            let eig = SymmetricEigen::new(mat).eigenvalues;
            min = eig.iter().copied().fold(min, f64::min);
        }
        if evaluated == 0 {
            return Err(Error::EvaluationDomain(
                "diffusion matrix could not be evaluated at any probe point".into(),
            ));
        }
        Ok(min)
    }

    /// Numerical PSD check of `A^{ij}` at 50 probe points (eigenvalues `>= -1e-9`).
    pub fn require_psd(&self) -> Result<()> {
        let min = self.min_spatial_eigenvalue(50)?;
        if min < -1e-9 {
            Err(Error::NotPsd {
                min_eigenvalue: min,
            })
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for Diffusor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.n();
        let mut parts = Vec::new();
        for i in 0..n {
            for j in i..n {
                let c = self.a(i, j);
                if c.is_zero_literal() {
                    continue;
                }
                // off-diagonal entries appear twice in the full sum
                let c = if i == j { c.clone() } else { normalize(&(Expr::int(2) * c)) };
                parts.push(format!(
                    "({})*d_{}{}",
                    c,
                    self.coords.name(i),
                    self.coords.name(j)
                ));
            }
        }
        for (i, c) in self.b.iter().enumerate() {
            if !c.is_zero_literal() {
                parts.push(format!("({})*d_{}", c, self.coords.name(i)));
            }
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Codiffusor `λ = λ_α d²x^α + λ_{αβ} dx^α·dx^β`, summed over all ordered pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codiffusor {
    coords: CoordinateSystem,
    first: Vec<Expr>,
    second: SymMatrix,
}

impl Codiffusor {
    pub fn new(coords: CoordinateSystem, first: Vec<Expr>, second: SymMatrix) -> Result<Codiffusor> {
        let n = coords.dim() + 1;
        if first.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: first.len(),
            });
        }
        if second.size() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: second.size(),
            });
        }
        check_vars(&coords, &first)?;
        check_vars(&coords, second.upper())?;
        Ok(Codiffusor {
            coords,
            first: first.iter().map(normalize).collect(),
            second: second.map(normalize),
        })
    }

    pub fn zero(coords: CoordinateSystem) -> Codiffusor {
        let n = coords.dim() + 1;
        Codiffusor {
            coords,
            first: vec![Expr::zero(); n],
            second: SymMatrix::zeros(n),
        }
    }

    pub fn coords(&self) -> &CoordinateSystem {
        &self.coords
    }

    pub fn n(&self) -> usize {
        self.coords.dim() + 1
    }

    /// `λ_α`.
    pub fn first(&self, alpha: usize) -> &Expr {
        &self.first[alpha]
    }

    /// `λ_{αβ}`.
    pub fn second(&self, alpha: usize, beta: usize) -> &Expr {
        self.second.get(alpha, beta)
    }

    pub fn first_vector(&self) -> &[Expr] {
        &self.first
    }

    pub fn second_matrix(&self) -> &SymMatrix {
        &self.second
    }

    pub fn add(&self, other: &Codiffusor) -> Result<Codiffusor> {
        same_coords(&self.coords, &other.coords)?;
        Ok(Codiffusor {
            coords: self.coords.clone(),
            first: self
                .first
                .iter()
                .zip(&other.first)
                .map(|(x, y)| normalize(&(x + y)))
                .collect(),
            second: self.second.zip(&other.second, |x, y| normalize(&(x + y))),
        })
    }

    pub fn sub(&self, other: &Codiffusor) -> Result<Codiffusor> {
        self.add(&other.scale(&Expr::int(-1)))
    }

    /// `f·λ`.
    pub fn scale(&self, f: &Expr) -> Codiffusor {
        Codiffusor {
            coords: self.coords.clone(),
            first: self.first.iter().map(|x| normalize(&(f * x))).collect(),
            second: self.second.map(|x| normalize(&(f * x))),
        }
    }

    /// All components, first-order part first.
    pub fn coefficients(&self) -> Vec<Expr> {
        self.first.iter().chain(self.second.upper()).cloned().collect()
    }

    pub fn zero_test(&self) -> Result<Zeroness> {
        all_zero(&self.coefficients())
    }
}

impl fmt::Display for Codiffusor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.n();
        let mut parts = Vec::new();
        for (i, c) in self.first.iter().enumerate() {
            if !c.is_zero_literal() {
                parts.push(format!("({})*d2{}", c, self.coords.name(i)));
            }
        }
        for i in 0..n {
            for j in i..n {
                let c = self.second(i, j);
                if c.is_zero_literal() {
                    continue;
                }
                let c = if i == j { c.clone() } else { normalize(&(Expr::int(2) * c)) };
                parts.push(format!(
                    "({})*d{}.d{}",
                    c,
                    self.coords.name(i),
                    self.coords.name(j)
                ));
            }
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// One-form `ω_α dx^α` on space-time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneForm {
    coords: CoordinateSystem,
    comps: Vec<Expr>,
}

impl OneForm {
    pub fn new(coords: CoordinateSystem, comps: Vec<Expr>) -> Result<OneForm> {
        let n = coords.dim() + 1;
        if comps.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: comps.len(),
            });
        }
        check_vars(&coords, &comps)?;
        Ok(OneForm {
            coords,
            comps: comps.iter().map(normalize).collect(),
        })
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

    pub fn zero_test(&self) -> Result<Zeroness> {
        all_zero(&self.comps)
    }

    pub fn sub(&self, other: &OneForm) -> Result<OneForm> {
        same_coords(&self.coords, &other.coords)?;
        Ok(OneForm {
            coords: self.coords.clone(),
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(x, y)| normalize(&(x - y)))
                .collect(),
        })
    }
}
