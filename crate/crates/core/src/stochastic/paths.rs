use std::sync::Arc;

use crate::error::{Error, Result};

/// Strictly increasing times `t_0 < t_1 < ... < t_K`, `K >= 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<TimeGrid> {
        if times.len() < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 times, got {}",
                times.len()
            )));
        }
        if let Some(t) = times.iter().find(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid(format!("time {t} is not finite")));
        }
        if let Some(k) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!(
                "times not strictly increasing at index {}",
                k + 1
            )));
        }
        Ok(TimeGrid { times })
    }

    /// `steps + 1` equally spaced times from `start` to `end`.
    pub fn uniform(start: f64, end: f64, steps: usize) -> Result<TimeGrid> {
        if steps < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 steps, got {steps}")));
        }
        let h = (end - start) / steps as f64;
        let mut times: Vec<f64> = (0..=steps).map(|k| start + h * k as f64).collect();
        times[steps] = end;
        TimeGrid::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Number of steps `K`.
    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self, k: usize) -> f64 {
        self.times[k + 1] - self.times[k]
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }
}

/// States `X_0, ..., X_K` in `ℝ^m` on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplePath {
    grid: Arc<TimeGrid>,
    dim: usize,
    states: Vec<f64>,
}

impl SamplePath {
    /// `states` holds `K + 1` points of dimension `dim`, flattened.
    pub fn new(grid: Arc<TimeGrid>, dim: usize, states: Vec<f64>) -> Result<SamplePath> {
        if states.len() != grid.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: grid.len() * dim,
                found: states.len(),
            });
        }
        Ok(SamplePath { grid, dim, states })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }

    /// The path up to and including index `k`.
    pub fn truncate(&self, k: usize) -> Result<SamplePath> {
        let times = self.grid.times()[..=k].to_vec();
        SamplePath::new(
            Arc::new(TimeGrid::new(times)?),
            self.dim,
            self.states[..(k + 1) * self.dim].to_vec(),
        )
    }
}

pub const EULER_MARUYAMA: &str = "euler-maruyama";

/// Paths sharing one grid, with the generation parameters that reproduce them.
#[derive(Clone, Debug, PartialEq)]
pub struct PathEnsemble {
    grid: Arc<TimeGrid>,
    dim: usize,
    paths: Vec<SamplePath>,
    seed: u64,
    scheme: String,
}

impl PathEnsemble {
    pub fn new(grid: Arc<TimeGrid>, dim: usize, paths: Vec<SamplePath>, seed: u64, scheme: impl Into<String>) -> Result<PathEnsemble> {
        for p in &paths {
            if !Arc::ptr_eq(&p.grid, &grid) && *p.grid != *grid {
                return Err(Error::InvalidGrid("paths do not share the ensemble grid".into()));
            }
            if p.dim != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.dim,
                });
            }
        }
        Ok(PathEnsemble {
            grid,
            dim,
            paths,
            seed,
            scheme: scheme.into(),
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn paths(&self) -> &[SamplePath] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn scheme(&self) -> &str {
        &self.scheme
    }

    /// Component `i` of every path at grid index `k`.
    pub fn cross_section(&self, k: usize, i: usize) -> Vec<f64> {
        self.paths.iter().map(|p| p.state(k)[i]).collect()
    }
}
