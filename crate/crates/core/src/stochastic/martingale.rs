use rayon::prelude::*;

use super::integral::{transform_ensemble, CompiledCodiffusor};
use super::paths::{PathEnsemble, TimeGrid};
use super::simulate::simulate;
use crate::error::{Error, Result};
use crate::geometry::{canonical_annihilator_element, Diffusor, FiniteTransformation, ProjectableVectorField};
use crate::symbolic::{normalize, Compiled, Expr};
use crate::symmetry::flow;

/// Upper bound on weighted-increment tests behind one verdict.
pub const MAX_TESTS: usize = 24;
pub const MIN_PATHS: usize = 100;
pub const DEFAULT_Z_CRIT: f64 = 4.0;

/// One weighted-increment test.
#[derive(Clone, Debug, PartialEq)]
pub struct ZScore {
    /// Grid indices of the window `(t_j, t_{j+1})`.
    pub from: usize,
    pub to: usize,
    /// `1`, a coordinate name, or the tested function.
    pub weight: String,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MartingaleTestReport {
    /// The tested codiffusor `d²g − L(g) d²t`.
    pub codiffusor: String,
    pub function: String,
    pub paths: usize,
    pub checkpoints: Vec<usize>,
    pub z_crit: f64,
    pub scores: Vec<ZScore>,
    pub max_abs_z: f64,
    pub pass: bool,
}

/// `mean / (sd / √N)`; zero spread gives 0 for zero mean and ±∞ otherwise.
fn z_score(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    if se > 0.0 {
        mean / se
    } else if mean == 0.0 {
        0.0
    } else {
        mean.signum() * f64::INFINITY
    }
}

/// Up to `windows + 1` evenly spread grid indices including both ends.
pub fn default_checkpoints(grid: &TimeGrid, windows: usize) -> Vec<usize> {
    let k = grid.steps();
    let w = windows.clamp(1, k);
    let mut out: Vec<usize> = (0..=w).map(|j| j * k / w).collect();
    out.dedup();
    out
}

/// Statistical test that `M = ∫⟨d²g − L(g) d²t, dX̄⟩` is a martingale along the ensemble.
///
/// For each window between consecutive checkpoints and each weight
/// `w ∈ {1, x^1, ..., x^m, g}` taken at the window start, `z = mean(w ΔM) / stderr(w ΔM)`.
/// Passes when every `|z| < z_crit`.
pub fn martingale_test(e: &PathEnsemble, g: &Expr, l: &Diffusor, checkpoints: &[usize], z_crit: f64) -> Result<MartingaleTestReport> {
    if e.len() < MIN_PATHS {
        return Err(Error::InvalidArgument(format!(
            "martingale test needs at least {MIN_PATHS} paths, got {}",
            e.len()
        )));
    }
    if checkpoints.len() < 2 || checkpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "checkpoints must be at least two strictly increasing grid indices".into(),
        ));
    }
    if *checkpoints.last().unwrap() > e.grid().steps() {
        return Err(Error::InvalidArgument(format!(
            "checkpoint {} is beyond the grid",
            checkpoints.last().unwrap()
        )));
    }
    let coords = l.coords();
    let m = coords.dim();
    if e.dim() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: e.dim(),
        });
    }
    let tests = (checkpoints.len() - 1) * (m + 2);
    if tests > MAX_TESTS {
        return Err(Error::InvalidArgument(format!(
            "{tests} weighted tests requested, at most {MAX_TESTS} allowed"
        )));
    }
    if !(z_crit > 0.0) {
        return Err(Error::InvalidArgument(format!("z_crit must be positive, got {z_crit}")));
    }
    let g = normalize(g);
    let lambda = canonical_annihilator_element(&g, l)?;
    let integrand = CompiledCodiffusor::new(&lambda)?;
    let g_num = Compiled::new(&g, coords)?;
    let times = e.grid().times();

    // per path: (ΔM, weights) for each window
    let rows: Vec<Result<Vec<(f64, Vec<f64>)>>> = e
        .paths()
        .par_iter()
        .map(|p| {
            let mi = integrand.integrate(p)?;
            checkpoints
                .windows(2)
                .map(|w| {
                    let x = p.state(w[0]);
                    let mut weights = Vec::with_capacity(m + 2);
                    weights.push(1.0);
                    weights.extend_from_slice(x);
                    weights.push(g_num.eval(times[w[0]], x)?);
                    Ok((mi[w[1]] - mi[w[0]], weights))
                })
                .collect()
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;

    let mut labels = vec!["1".to_string()];
    labels.extend(coords.spatial().iter().cloned());
    labels.push(g.to_string());
    let mut scores = Vec::with_capacity(tests);
    for (j, w) in checkpoints.windows(2).enumerate() {
        for (q, label) in labels.iter().enumerate() {
            let v: Vec<f64> = rows.iter().map(|r| r[j].1[q] * r[j].0).collect();
            scores.push(ZScore {
                from: w[0],
                to: w[1],
                weight: label.clone(),
                z: z_score(&v),
            });
        }
    }
    let max_abs_z = scores.iter().map(|s| s.z.abs()).fold(0.0, f64::max);
    Ok(MartingaleTestReport {
        codiffusor: lambda.to_string(),
        function: g.to_string(),
        paths: e.len(),
        checkpoints: checkpoints.to_vec(),
        z_crit,
        scores,
        max_abs_z,
        pass: max_abs_z < z_crit,
    })
}

/// Transformation under test: an infinitesimal generator (integrated numerically)
/// or a finite map.
pub enum Candidate<'a> {
    Field(&'a ProjectableVectorField),
    Map(&'a dyn FiniteTransformation),
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    pub x0: Vec<f64>,
    pub grid: TimeGrid,
    pub paths: usize,
    pub seed: u64,
    pub z_crit: f64,
    pub windows: usize,
    /// Flow time `a` and RK4 substeps used when the candidate is a field.
    pub flow_parameter: f64,
    pub flow_steps: usize,
    /// Defaults to every coordinate, square and pairwise product.
    pub functions: Option<Vec<Expr>>,
}

impl VerifyConfig {
    /// Unit horizon, 64 steps, 10⁴ paths, 4 windows, `z_crit = 4`, flow time 1.
    pub fn new(x0: Vec<f64>) -> VerifyConfig {
        VerifyConfig {
            x0,
            grid: TimeGrid::uniform(0.0, 1.0, 64).expect("valid grid"),
            paths: 10_000,
            seed: 0,
            z_crit: DEFAULT_Z_CRIT,
            windows: 4,
            flow_parameter: 1.0,
            flow_steps: 32,
            functions: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationSummary {
    pub reports: Vec<MartingaleTestReport>,
    pub max_abs_z: f64,
    pub pass: bool,
}

/// `x^i`, `(x^i)^2` and `x^i x^j` for `i < j`.
pub fn default_functions(l: &Diffusor) -> Vec<Expr> {
    let c = l.coords();
    let xs: Vec<Expr> = (1..=c.dim()).map(|i| c.coordinate(i)).collect();
    let mut out = xs.clone();
    out.extend(xs.iter().map(|x| normalize(&(x * x))));
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            out.push(normalize(&(&xs[i] * &xs[j])));
        }
    }
    out
}

/// Simulates `L`, maps the ensemble by the candidate and runs the martingale
/// test for every configured function. Passes when every report passes.
pub fn verify_symmetry_stochastically(candidate: Candidate<'_>, l: &Diffusor, config: &VerifyConfig) -> Result<VerificationSummary> {
    let ensemble = simulate(l, &config.x0, &config.grid, config.paths, config.seed)?;
    let transformed = match candidate {
        Candidate::Field(x) => {
            let f = flow(x, config.flow_parameter, config.flow_steps)?;
            transform_ensemble(&ensemble, &f)?
        }
        Candidate::Map(map) => transform_ensemble(&ensemble, map)?,
    };
    let functions = config.functions.clone().unwrap_or_else(|| default_functions(l));
    let checkpoints = default_checkpoints(transformed.grid(), config.windows);
    let reports = functions
        .iter()
        .map(|g| martingale_test(&transformed, g, l, &checkpoints, config.z_crit))
        .collect::<Result<Vec<_>>>()?;
    let max_abs_z = reports.iter().map(|r| r.max_abs_z).fold(0.0, f64::max);
    Ok(VerificationSummary {
        pass: reports.iter().all(|r| r.pass),
        max_abs_z,
        reports,
    })
}
