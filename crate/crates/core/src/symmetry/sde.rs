use crate::error::{Error, Result};
use crate::geometry::{Diffusor, ProjectableVectorField};
use crate::symbolic::{normalize, pd, zero_test, CoordinateSystem, Expr, Rational, TIME};

use super::determining::{all_zero, check_symmetry, SymmetryVerdict};

/// `dX^i = μ^i(X) dt + σ^i_α(X) dW^α`.
#[derive(Clone, Debug, PartialEq)]
pub struct SdeCoefficients {
    coords: CoordinateSystem,
    drift: Vec<Expr>,
    sigma: Vec<Vec<Expr>>,
}

impl SdeCoefficients {
    /// `sigma` is `m × n` (rows indexed by space, columns by the driving noise).
    pub fn new(coords: CoordinateSystem, drift: Vec<Expr>, sigma: Vec<Vec<Expr>>) -> Result<SdeCoefficients> {
        let m = coords.dim();
        if drift.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: drift.len(),
            });
        }
        if sigma.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: sigma.len(),
            });
        }
        let n = sigma.first().map_or(0, Vec::len);
        if n == 0 {
            return Err(Error::InvalidArgument("sigma needs at least one column".into()));
        }
        for row in &sigma {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
        }
        for e in drift.iter().chain(sigma.iter().flatten()) {
            e.check_vars(&coords)?;
        }
        Ok(SdeCoefficients {
            coords,
            drift: drift.iter().map(normalize).collect(),
            sigma: sigma
                .iter()
                .map(|r| r.iter().map(normalize).collect())
                .collect(),
        })
    }

    pub fn coords(&self) -> &CoordinateSystem {
        &self.coords
    }

    pub fn drift(&self) -> &[Expr] {
        &self.drift
    }

    pub fn sigma(&self) -> &[Vec<Expr>] {
        &self.sigma
    }

    /// Dimension of the driving Brownian motion.
    pub fn noise_dim(&self) -> usize {
        self.sigma[0].len()
    }

    fn require_autonomous(&self) -> Result<()> {
        match self
            .drift
            .iter()
            .chain(self.sigma.iter().flatten())
            .find(|e| e.contains_var(TIME))
        {
            Some(e) => Err(Error::NonAutonomous(format!("coefficient `{e}` depends on t"))),
            None => Ok(()),
        }
    }
}

/// `b = μ`, `A^{ij} = ½ Σ_α σ^i_α σ^j_α`.
pub fn sde_to_diffusor(s: &SdeCoefficients) -> Diffusor {
    let m = s.coords.dim();
    let mut upper = Vec::with_capacity(m * (m + 1) / 2);
    for i in 0..m {
        for j in i..m {
            let terms = s.sigma[i]
                .iter()
                .zip(&s.sigma[j])
                .map(|(a, b)| Expr::rational(1, 2) * a * b)
                .collect();
            upper.push(normalize(&Expr::sum(terms)));
        }
    }
    Diffusor::standard(s.coords.clone(), upper, s.drift.clone()).expect("shapes checked on construction")
}

/// Infinitesimal SDE symmetry `(Ỹ, C, a)`: autonomous spatial field, antisymmetric
/// `n × n` matrix and a time-scaling constant.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticTransformation {
    coords: CoordinateSystem,
    y: Vec<Expr>,
    c: Vec<Vec<Expr>>,
    a: Rational,
}

impl StochasticTransformation {
    pub fn new(coords: CoordinateSystem, y: Vec<Expr>, c: Vec<Vec<Expr>>, a: Rational) -> Result<StochasticTransformation> {
        if y.len() != coords.dim() {
            return Err(Error::DimensionMismatch {
                expected: coords.dim(),
                found: y.len(),
            });
        }
        let n = c.len();
        for row in &c {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
        }
        for e in y.iter().chain(c.iter().flatten()) {
            e.check_vars(&coords)?;
        }
        if let Some(e) = y.iter().chain(c.iter().flatten()).find(|e| e.contains_var(TIME)) {
            return Err(Error::NonAutonomous(format!("`{e}` depends on t")));
        }
        for i in 0..n {
            for j in i..n {
                let s = normalize(&(&c[i][j] + &c[j][i]));
                if !zero_test(&s)?.is_zero() {
                    return Err(Error::NotAntisymmetric {
                        row: i,
                        col: j,
                        value: s.to_string(),
                    });
                }
            }
        }
        Ok(StochasticTransformation {
            coords,
            y: y.iter().map(normalize).collect(),
            c: c.iter().map(|r| r.iter().map(normalize).collect()).collect(),
            a,
        })
    }

    /// `C = 0` of size `n`.
    pub fn without_rotation(coords: CoordinateSystem, y: Vec<Expr>, n: usize, a: Rational) -> Result<StochasticTransformation> {
        StochasticTransformation::new(coords, y, vec![vec![Expr::zero(); n]; n], a)
    }

    pub fn y_tilde(&self) -> &[Expr] {
        &self.y
    }

    pub fn c(&self) -> &[Vec<Expr>] {
        &self.c
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    /// `Y = Ỹ + a t ∂_t`.
    pub fn space_time_field(&self) -> ProjectableVectorField {
        let tau = normalize(&(Expr::constant(self.a.clone()) * Expr::var(TIME)));
        ProjectableVectorField::new(self.coords.clone(), self.y.clone(), tau)
            .expect("validated on construction")
    }
}

/// Residuals of the SDE determining equations: `m` drift equations, then
/// `m·n` diffusion equations in row-major `(i, α)` order.
///
/// * `Ỹ^k ∂_k μ^i − μ^k ∂_k Ỹ^i − ½ Σ_α σ^j_α σ^k_α ∂_{jk} Ỹ^i + a μ^i`
/// * `Ỹ^k ∂_k σ^i_α − σ^k_α ∂_k Ỹ^i + σ^i_β C^β_α + ½ a σ^i_α`
pub fn sde_determining_residuals(t: &StochasticTransformation, s: &SdeCoefficients) -> Result<Vec<Expr>> {
    crate::geometry::check_coords(&t.coords, &s.coords)?;
    s.require_autonomous()?;
    let n = s.noise_dim();
    if t.c.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: t.c.len(),
        });
    }
    let c = &s.coords;
    let m = c.dim();
    let a = Expr::constant(t.a.clone());
    let half_a = Expr::constant(t.a.clone() / Rational::from_integer(2.into()));
    let apply = |g: &Expr| -> Expr {
        let terms = (0..m).map(|k| &t.y[k] * &pd(g, c.name(k + 1))).collect();
        Expr::sum(terms)
    };
    // dy[i][k] = ∂_k Ỹ^i
    let dy: Vec<Vec<Expr>> = t
        .y
        .iter()
        .map(|yi| (1..=m).map(|k| pd(yi, c.name(k))).collect())
        .collect();
    let mut out = Vec::with_capacity(m * (n + 1));
    for i in 0..m {
        let mut terms = vec![apply(&s.drift[i]), &a * &s.drift[i]];
        for k in 0..m {
            terms.push(-(&s.drift[k] * &dy[i][k]));
            for j in 0..m {
                let second = pd(&dy[i][k], c.name(j + 1));
                if second.is_zero_literal() {
                    continue;
                }
                for al in 0..n {
                    terms.push(Expr::rational(-1, 2) * &s.sigma[j][al] * &s.sigma[k][al] * &second);
                }
            }
        }
        out.push(normalize(&Expr::sum(terms)));
    }
    for i in 0..m {
        for al in 0..n {
            let mut terms = vec![apply(&s.sigma[i][al]), &half_a * &s.sigma[i][al]];
            for k in 0..m {
                terms.push(-(&s.sigma[k][al] * &dy[i][k]));
            }
            for be in 0..n {
                terms.push(&s.sigma[i][be] * &t.c[be][al]);
            }
            out.push(normalize(&Expr::sum(terms)));
        }
    }
    Ok(out)
}

/// Both sides of the SDE / martingale-problem comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct BridgeReport {
    pub sde_residuals: Vec<Expr>,
    pub sde_symmetry: bool,
    /// Verdict for `Y = Ỹ + a t ∂_t` against `sde_to_diffusor(s)`.
    pub martingale: SymmetryVerdict,
}

/// Computes both verdicts and enforces that an SDE symmetry is a symmetry of
/// the martingale problem; a violation is [`Error::Inconsistent`].
pub fn bridge_report(t: &StochasticTransformation, s: &SdeCoefficients) -> Result<BridgeReport> {
    let sde_residuals = sde_determining_residuals(t, s)?;
    let (sde_symmetry, _) = all_zero(&sde_residuals)?;
    let martingale = check_symmetry(&t.space_time_field(), &sde_to_diffusor(s))?;
    if sde_symmetry && !martingale.is_symmetry {
        return Err(Error::Inconsistent(
            "SDE symmetry is not a symmetry of the martingale problem".into(),
        ));
    }
    Ok(BridgeReport {
        sde_residuals,
        sde_symmetry,
        martingale,
    })
}

/// The martingale-level verdict of [`bridge_report`].
pub fn bridge_check(t: &StochasticTransformation, s: &SdeCoefficients) -> Result<SymmetryVerdict> {
    bridge_report(t, s).map(|r| r.martingale)
}
