//! Activity grids, distribution states and their moments.

use std::sync::Arc;

use crate::{Error, Result};

/// Collocation grid over the activity domain with composite-trapezoid weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityGrid {
    lower: f64,
    upper: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl ActivityGrid {
    /// `m` equally spaced nodes on `[lower, upper]`, endpoints included.
    pub fn uniform(lower: f64, upper: f64, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 nodes, got {m}"
            )));
        }
        if !(lower.is_finite() && upper.is_finite()) || lower >= upper {
            return Err(Error::InvalidGrid(format!(
                "bounds must satisfy lower < upper, got [{lower}, {upper}]"
            )));
        }
        let h = (upper - lower) / (m - 1) as f64;
        let mut nodes: Vec<f64> = (0..m).map(|j| lower + j as f64 * h).collect();
        // pin the last node so it is exactly `upper`
        nodes[m - 1] = upper;
        let mut weights = vec![h; m];
        weights[0] = 0.5 * h;
        weights[m - 1] = 0.5 * h;
        Ok(Self {
            lower,
            upper,
            nodes,
            weights,
        })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn spacing(&self) -> f64 {
        (self.upper - self.lower) / (self.len() - 1) as f64
    }

    /// Quadrature of nodal values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        values.iter().zip(&self.weights).map(|(f, w)| f * w).sum()
    }

    /// Quadrature of `u * f(u)`.
    pub fn first_moment(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        values
            .iter()
            .zip(self.weights.iter().zip(&self.nodes))
            .map(|(f, (w, u))| f * w * u)
            .sum()
    }

    /// Nodal density of a unit point mass placed at `position`, split between
    /// the two bracketing nodes by linear interpolation. Positions outside the
    /// domain are clamped to the nearest endpoint.
    ///
    /// Writes into `out` (which is added to, not overwritten) scaled by `mass`.
    pub fn deposit(&self, position: f64, mass: f64, out: &mut [f64]) {
        let x = position.clamp(self.lower, self.upper);
        let s = (x - self.lower) / self.spacing();
        let m = self.len();
        let left = (s.floor() as usize).min(m - 2);
        let theta = (s - left as f64).clamp(0.0, 1.0);
        out[left] += mass * (1.0 - theta) / self.weights[left];
        out[left + 1] += mass * theta / self.weights[left + 1];
    }
}

/// Convenience constructor matching [`ActivityGrid::uniform`].
pub fn make_uniform_grid(lower: f64, upper: f64, m: usize) -> Result<ActivityGrid> {
    ActivityGrid::uniform(lower, upper, m)
}

/// A labelled population of active particles sharing one strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalSubsystem {
    pub index: usize,
    pub label: String,
}

impl FunctionalSubsystem {
    /// Builds contiguous zero-based subsystems from labels.
    pub fn from_labels<S: AsRef<str>>(labels: &[S]) -> Vec<Self> {
        labels
            .iter()
            .enumerate()
            .map(|(index, l)| Self {
                index,
                label: l.as_ref().to_owned(),
            })
            .collect()
    }
}

/// Nodal values `f[i][j] = f_i(t, u_j)` for every subsystem `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousState {
    pub t: f64,
    grid: Arc<ActivityGrid>,
    values: Vec<Vec<f64>>,
}

impl HomogeneousState {
    pub fn zeros(grid: Arc<ActivityGrid>, subsystems: usize) -> Self {
        let m = grid.len();
        Self {
            t: 0.0,
            grid,
            values: vec![vec![0.0; m]; subsystems],
        }
    }

    /// Samples `profile(i, u)` at the grid nodes.
    pub fn from_fn(
        grid: Arc<ActivityGrid>,
        subsystems: usize,
        mut profile: impl FnMut(usize, f64) -> f64,
    ) -> Result<Self> {
        let values = (0..subsystems)
            .map(|i| grid.nodes().iter().map(|&u| profile(i, u)).collect())
            .collect();
        Self::new(0.0, grid, values)
    }

    pub fn new(t: f64, grid: Arc<ActivityGrid>, values: Vec<Vec<f64>>) -> Result<Self> {
        for (i, row) in values.iter().enumerate() {
            if row.len() != grid.len() {
                return Err(Error::DimensionMismatch(format!(
                    "subsystem {i} has {} values, grid has {} nodes",
                    row.len(),
                    grid.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { t });
            }
            if row.iter().any(|&v| v < 0.0) {
                return Err(Error::Negative(format!("distribution of subsystem {i}")));
            }
        }
        Ok(Self { t, grid, values })
    }

    /// Replaces the values without the nonnegativity check. Used by the
    /// integrators, which track their own clamping diagnostics.
    pub(crate) fn with_values_unchecked(&self, t: f64, values: Vec<Vec<f64>>) -> Self {
        Self {
            t,
            grid: Arc::clone(&self.grid),
            values,
        }
    }

    pub fn grid(&self) -> &ActivityGrid {
        &self.grid
    }

    pub fn shared_grid(&self) -> Arc<ActivityGrid> {
        Arc::clone(&self.grid)
    }

    pub fn subsystems(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn row(&self, i: usize) -> Result<&[f64]> {
        self.values
            .get(i)
            .map(Vec::as_slice)
            .ok_or(Error::IndexOutOfRange {
                index: i,
                len: self.values.len(),
            })
    }

    pub fn total_density(&self) -> f64 {
        self.values.iter().map(|r| self.grid.integrate(r)).sum()
    }

    pub fn moments(&self) -> MomentSet {
        let densities: Vec<f64> = self.values.iter().map(|r| self.grid.integrate(r)).collect();
        let activations = self
            .values
            .iter()
            .zip(&densities)
            .map(|(r, &n)| (n > 0.0).then(|| self.grid.first_moment(r) / n))
            .collect();
        MomentSet {
            t: self.t,
            densities,
            activations,
        }
    }
}

/// Zeroth and normalized first activity moments per subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    pub t: f64,
    pub densities: Vec<f64>,
    /// `None` where the subsystem is empty.
    pub activations: Vec<Option<f64>>,
}

impl MomentSet {
    pub fn total_density(&self) -> f64 {
        self.densities.iter().sum()
    }
}

/// Number density `n_i` of subsystem `i`.
pub fn density(state: &HomogeneousState, i: usize) -> Result<f64> {
    Ok(state.grid().integrate(state.row(i)?))
}

/// Mean activity `E_i` of subsystem `i`.
pub fn activation(state: &HomogeneousState, i: usize) -> Result<f64> {
    let row = state.row(i)?;
    let n = state.grid().integrate(row);
    if n <= 0.0 {
        return Err(Error::UndefinedMoment { subsystem: i });
    }
    Ok(state.grid().first_moment(row) / n)
}
