use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::determining::determining_residuals;
use super::linalg;
use crate::error::{Error, Result};
use crate::geometry::{Diffusor, ProjectableVectorField};
use crate::symbolic::{eval_with, normalize, terms, CoordinateSystem, Expr, Node, Rational, TIME};

/// Finite-dimensional ansatz: `φ^i ∈ span(phi[i])`, `τ ∈ span(tau)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AnsatzBasis {
    phi: Vec<Vec<Expr>>,
    tau: Vec<Expr>,
}

impl AnsatzBasis {
    pub fn new(phi: Vec<Vec<Expr>>, tau: Vec<Expr>) -> Result<AnsatzBasis> {
        if phi.iter().any(Vec::is_empty) || tau.is_empty() {
            return Err(Error::InvalidBasis("basis lists must be nonempty".into()));
        }
        let tau: Vec<Expr> = tau.iter().map(normalize).collect();
        if let Some(f) = tau.iter().find(|f| f.free_variables().iter().any(|v| v != TIME)) {
            return Err(Error::InvalidBasis(format!(
                "tau basis function `{f}` depends on a spatial variable"
            )));
        }
        let phi = phi
            .iter()
            .map(|fs| fs.iter().map(normalize).collect())
            .collect();
        Ok(AnsatzBasis { phi, tau })
    }

    /// The same basis for every `φ^i`.
    pub fn uniform(m: usize, phi: Vec<Expr>, tau: Vec<Expr>) -> Result<AnsatzBasis> {
        AnsatzBasis::new(vec![phi; m], tau)
    }

    /// All products `f·g`, normalized.
    pub fn products(a: &[Expr], b: &[Expr]) -> Vec<Expr> {
        a.iter()
            .flat_map(|f| b.iter().map(move |g| normalize(&(f * g))))
            .collect()
    }

    pub fn phi(&self) -> &[Vec<Expr>] {
        &self.phi
    }

    pub fn tau(&self) -> &[Expr] {
        &self.tau
    }

    /// One field per nonzero basis function: the τ fields first, then `φ^1, φ^2, ...`.
    fn unit_fields(&self, coords: &CoordinateSystem) -> Result<Vec<ProjectableVectorField>> {
        let m = coords.dim();
        if self.phi.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: self.phi.len(),
            });
        }
        check_independent(&self.tau).map_err(as_invalid)?;
        for fs in &self.phi {
            check_independent(fs).map_err(as_invalid)?;
        }
        let mut out = Vec::new();
        for f in self.tau.iter().filter(|f| !f.is_zero_literal()) {
            out.push(ProjectableVectorField::new(coords.clone(), vec![Expr::zero(); m], f.clone())?);
        }
        for (i, fs) in self.phi.iter().enumerate() {
            for f in fs.iter().filter(|f| !f.is_zero_literal()) {
                let mut phi = vec![Expr::zero(); m];
                phi[i] = f.clone();
                out.push(ProjectableVectorField::new(coords.clone(), phi, Expr::zero())?);
            }
        }
        Ok(out)
    }
}

fn as_invalid(e: Error) -> Error {
    match e {
        Error::BasisNotClosed { term } => {
            Error::InvalidBasis(format!("basis function `{term}` depends linearly on the others"))
        }
        other => other,
    }
}

/// Products of integer powers of variables: distinct ones are linearly independent.
fn is_laurent_monomial(e: &Expr) -> bool {
    fn factor(e: &Expr) -> bool {
        match e.node() {
            Node::Var(_) => true,
            Node::Power(b, k) => k.is_integer() && matches!(b.node(), Node::Var(_)),
            _ => false,
        }
    }
    match e.node() {
        Node::Const(_) => true,
        Node::Product(fs) => fs.iter().all(factor),
        _ => factor(e),
    }
}

const INDEPENDENCE_SEED: u64 = 0xc011_ec70;
const RANK_TOLERANCE: f64 = 1e-9;

/// Errors with `BasisNotClosed` naming the first function (in list order,
/// zeros skipped) that lies in the span of its predecessors.
///
/// Exact on polynomial-like input; otherwise decided by the numeric rank of
/// the function values at random points.
fn check_independent(fs: &[Expr]) -> Result<()> {
    let fs: Vec<&Expr> = fs.iter().filter(|f| !f.is_zero_literal()).collect();
    if fs.is_empty() {
        return Ok(());
    }
    let expanded: Vec<Vec<(Rational, Expr)>> = fs.iter().map(|f| terms(f)).collect();
    if expanded.iter().flatten().all(|(_, mono)| is_laurent_monomial(mono)) {
        let mut keys: BTreeMap<&Expr, usize> = BTreeMap::new();
        for (_, mono) in expanded.iter().flatten() {
            let n = keys.len();
            keys.entry(mono).or_insert(n);
        }
        let mut rows: Vec<Vec<Rational>> = Vec::new();
        for (f, ts) in fs.iter().zip(&expanded) {
            let mut row = vec![Rational::zero(); keys.len()];
            for (c, mono) in ts {
                row[keys[mono]] = c.clone();
            }
            rows.push(row);
            if linalg::rank(&rows, keys.len()) < rows.len() {
                return Err(Error::BasisNotClosed { term: f.to_string() });
            }
        }
        return Ok(());
    }
    numeric_independence(&fs)
}

fn numeric_independence(fs: &[&Expr]) -> Result<()> {
    let mut vars: Vec<String> = fs.iter().flat_map(|f| f.free_variables()).collect();
    vars.sort();
    vars.dedup();
    let wanted = 2 * fs.len() + 8;
    let mut rng = ChaCha8Rng::seed_from_u64(INDEPENDENCE_SEED);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(wanted);
    let mut attempts = 0;
    while rows.len() < wanted && attempts < 20 * wanted {
        attempts += 1;
        let point: Vec<f64> = vars
            .iter()
            .map(|_| {
                let v: f64 = rng.random_range(0.1..2.0);
                if rng.random::<bool>() {
                    v
                } else {
                    -v
                }
            })
            .collect();
        let lookup = |name: &str| vars.iter().position(|v| v == name).map(|i| point[i]);
        let row: Result<Vec<f64>> = fs.iter().map(|f| eval_with(f, &lookup)).collect();
        match row {
            Ok(r) => rows.push(r),
            Err(Error::EvaluationDomain(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    if rows.len() < fs.len() + 1 {
        return Err(Error::EvaluationDomain(
            "too few evaluable points to test linear independence".into(),
        ));
    }
    for k in 1..=fs.len() {
        let mut m = DMatrix::from_fn(rows.len(), k, |r, c| rows[r][c]);
        for mut col in m.column_iter_mut() {
            let norm = col.norm();
            if norm > 0.0 {
                col /= norm;
            }
        }
        let sv = m.singular_values();
        let max = sv.max();
        let min = sv.min();
        if max == 0.0 || min <= RANK_TOLERANCE * max {
            return Err(Error::BasisNotClosed {
                term: fs[k - 1].to_string(),
            });
        }
    }
    Ok(())
}

/// Solves the determining equations over an ansatz exactly.
///
/// Residuals of the unit fields are expanded into normalized monomials
/// ("collectors"); matching coefficients per equation gives a rational linear
/// system whose nullspace is the symmetry algebra inside the ansatz. Returns a
/// basis of it, each field scaled to primitive integer coefficients.
pub fn find_symmetries(l: &Diffusor, basis: &AnsatzBasis) -> Result<Vec<ProjectableVectorField>> {
    l.require_standard()?;
    let coords = l.coords();
    let units = basis.unit_fields(coords)?;
    if units.is_empty() {
        return Ok(Vec::new());
    }
    let residuals: Vec<Vec<Expr>> = units
        .par_iter()
        .map(|u| determining_residuals(u, l))
        .collect::<Result<_>>()?;
    let equations = residuals[0].len();
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for eq in 0..equations {
        // collector -> coefficient per unknown
        let mut table: BTreeMap<Expr, Vec<Rational>> = BTreeMap::new();
        for (u, res) in residuals.iter().enumerate() {
            for (c, mono) in terms(&res[eq]) {
                table
                    .entry(mono)
                    .or_insert_with(|| vec![Rational::zero(); units.len()])[u] += c;
            }
        }
        let collectors: Vec<Expr> = table.keys().cloned().collect();
        check_independent(&collectors)?;
        rows.extend(table.into_values());
    }
    let mut out = Vec::new();
    for v in linalg::nullspace(&rows, units.len()) {
        let v = linalg::primitive_vector(&v);
        out.push(combine(coords, &units, &v)?);
    }
    Ok(out)
}

fn combine(
    coords: &CoordinateSystem,
    units: &[ProjectableVectorField],
    v: &[Rational],
) -> Result<ProjectableVectorField> {
    let m = coords.dim();
    let mut tau = Vec::new();
    let mut phi = vec![Vec::new(); m];
    for (u, c) in units.iter().zip(v) {
        if c.is_zero() {
            continue;
        }
        let k = Expr::constant(c.clone());
        tau.push(&k * u.tau());
        for (i, p) in phi.iter_mut().enumerate() {
            p.push(&k * u.phi(i));
        }
    }
    ProjectableVectorField::new(
        coords.clone(),
        phi.into_iter().map(|p| normalize(&Expr::sum(p))).collect(),
        normalize(&Expr::sum(tau)),
    )
}

/// Coefficient vectors of the fields over their normalized monomials (per component).
fn field_rows(fields: &[&ProjectableVectorField]) -> (Vec<Vec<Rational>>, usize) {
    let mut keys: BTreeMap<(usize, Expr), usize> = BTreeMap::new();
    let expanded: Vec<Vec<(usize, Rational, Expr)>> = fields
        .iter()
        .map(|f| {
            f.components()
                .iter()
                .enumerate()
                .flat_map(|(a, c)| terms(c).into_iter().map(move |(k, m)| (a, k, m)))
                .collect()
        })
        .collect();
    for (a, _, m) in expanded.iter().flatten() {
        let n = keys.len();
        keys.entry((*a, m.clone())).or_insert(n);
    }
    let rows = expanded
        .iter()
        .map(|ts| {
            let mut row = vec![Rational::zero(); keys.len()];
            for (a, k, m) in ts {
                row[keys[&(*a, m.clone())]] = k.clone();
            }
            row
        })
        .collect();
    (rows, keys.len())
}

/// Dimension of the rational span of `fields` (exact, over normalized monomials).
pub fn span_dimension(fields: &[ProjectableVectorField]) -> usize {
    let refs: Vec<&ProjectableVectorField> = fields.iter().collect();
    let (rows, cols) = field_rows(&refs);
    linalg::rank(&rows, cols)
}

/// Whether `x` is a constant-coefficient rational combination of `span`.
pub fn in_span(span: &[ProjectableVectorField], x: &ProjectableVectorField) -> bool {
    let mut refs: Vec<&ProjectableVectorField> = span.iter().collect();
    let (rows, cols) = field_rows(&refs);
    let before = linalg::rank(&rows, cols);
    refs.push(x);
    let (rows, cols) = field_rows(&refs);
    linalg::rank(&rows, cols) == before
}

/// Whether two lists of fields span the same rational vector space.
pub fn same_span(a: &[ProjectableVectorField], b: &[ProjectableVectorField]) -> bool {
    let dim = span_dimension(a);
    dim == span_dimension(b) && {
        let both: Vec<ProjectableVectorField> = a.iter().chain(b).cloned().collect();
        span_dimension(&both) == dim
    }
}
