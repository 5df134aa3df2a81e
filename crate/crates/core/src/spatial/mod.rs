//! Discrete-velocity crowd model on a 2D arena.
//!
//! The distribution `f[d][c][j]` counts pedestrians per unit area and unit
//! activity moving in direction `d` (one of `N_d` unit vectors), located in
//! cell `c`, with activity node `j`. Activity is frozen during a run; it only
//! shapes the decision weights.
//!
//! A time step is transport followed by collision:
//!
//! * [`transport_step`] moves mass with speed `v(ρ)` from [`SpeedClosure`]
//!   (evaluated in the cell being entered) using donor-cell upwinding, split into an x sweep and a y sweep. Walls
//!   and the arena boundary reflect mass into the opposite direction; exits
//!   absorb it into the evacuated tally.
//! * [`collision_step`] redistributes the mass of each cell over directions
//!   according to a [`DirectionKernel`], at rate `η₀ ρ`.

mod arena;

use std::f64::consts::PI;
use std::sync::Arc;

pub use arena::{Arena, CellKind, TargetField};

use crate::domains::{in_domain, SensoryConfig, Vec2};
use crate::grid::ActivityGrid;
use crate::{Error, Result};

pub const DEFAULT_DIRECTIONS: usize = 8;
pub const DEFAULT_JAM_DENSITY: f64 = 6.0;

/// Unit vector of direction `d` out of `nd`, in (column, row) coordinates.
pub fn direction_vector(d: usize, nd: usize) -> Vec2 {
    let v = Vec2::from_angle(2.0 * PI * d as f64 / nd as f64);
    // snap round-off so axis-aligned directions have exact zero components
    let snap = |x: f64| if x.abs() < 1e-12 { 0.0 } else { x };
    Vec2::new(snap(v.x), snap(v.y))
}

/// Speed as a function of local density: `v = α max(0, 1 − ρ / ρ_jam)`.
pub fn speed_closure(rho: f64, alpha: f64) -> f64 {
    SpeedClosure::new(alpha).speed(rho)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedClosure {
    pub alpha: f64,
    pub rho_jam: f64,
}

impl SpeedClosure {
    pub fn new(alpha: f64) -> Self {
        Self {
            alpha,
            rho_jam: DEFAULT_JAM_DENSITY,
        }
    }

    pub fn speed(&self, rho: f64) -> f64 {
        self.alpha * (1.0 - rho / self.rho_jam).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialState {
    pub t: f64,
    arena: Arc<Arena>,
    grid: Arc<ActivityGrid>,
    nd: usize,
    /// Index `(d * cells + c) * m + j`.
    f: Vec<f64>,
    /// Mass absorbed by exits so far.
    pub evacuated: f64,
}

impl SpatialState {
    pub fn zeros(arena: Arc<Arena>, grid: Arc<ActivityGrid>, nd: usize) -> Self {
        let len = nd * arena.len() * grid.len();
        Self {
            t: 0.0,
            arena,
            grid,
            nd,
            f: vec![0.0; len],
            evacuated: 0.0,
        }
    }

    pub fn arena(&self) -> &Arena {
        &self.arena
    }

    pub fn shared_arena(&self) -> Arc<Arena> {
        Arc::clone(&self.arena)
    }

    pub fn grid(&self) -> &ActivityGrid {
        &self.grid
    }

    pub fn directions(&self) -> usize {
        self.nd
    }

    #[inline]
    fn idx(&self, d: usize, c: usize, j: usize) -> usize {
        (d * self.arena.len() + c) * self.grid.len() + j
    }

    pub fn get(&self, d: usize, c: usize, j: usize) -> f64 {
        self.f[self.idx(d, c, j)]
    }

    /// Sets one value; only walkable cells may hold mass.
    pub fn set(&mut self, d: usize, c: usize, j: usize, value: f64) -> Result<()> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::Negative(format!("f[{d}][{c}][{j}] = {value}")));
        }
        if self.arena.kind(c) != CellKind::Walkable && value != 0.0 {
            return Err(Error::Arena(format!("cell {c} is not walkable")));
        }
        let i = self.idx(d, c, j);
        self.f[i] = value;
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.f
    }

    /// Pedestrians inside the arena: `Σ_c ρ_c dx²`.
    pub fn mass_inside(&self) -> f64 {
        let dx2 = self.arena.dx().powi(2);
        (0..self.arena.len())
            .map(|c| macro_density(self, c))
            .sum::<f64>()
            * dx2
    }

    /// Activity averaged over everyone inside, `None` for an empty arena.
    pub fn mean_activity(&self) -> Option<f64> {
        let (u, w) = (self.grid.nodes(), self.grid.weights());
        let m = self.grid.len();
        let (mut mass, mut first) = (0.0, 0.0);
        for (k, v) in self.f.iter().enumerate() {
            let j = k % m;
            mass += w[j] * v;
            first += w[j] * u[j] * v;
        }
        (mass > 0.0).then(|| first / mass)
    }
}

/// Local density `ρ_c = Σ_d Σ_j w_j f[d][c][j]`.
pub fn macro_density(state: &SpatialState, cell: usize) -> f64 {
    let w = state.grid.weights();
    (0..state.nd)
        .map(|d| {
            let base = state.idx(d, cell, 0);
            state.f[base..base + w.len()]
                .iter()
                .zip(w)
                .map(|(f, w)| f * w)
                .sum::<f64>()
        })
        .sum()
}

fn direction_densities(state: &SpatialState, cell: usize) -> Vec<f64> {
    let w = state.grid.weights();
    (0..state.nd)
        .map(|d| {
            let base = state.idx(d, cell, 0);
            state.f[base..base + w.len()]
                .iter()
                .zip(w)
                .map(|(f, w)| f * w)
                .sum()
        })
        .collect()
}

/// Density-weighted mean of direction times speed in a cell.
pub fn macro_mean_velocity(
    state: &SpatialState,
    cell: usize,
    closure: &SpeedClosure,
) -> Result<Vec2> {
    let per_dir = direction_densities(state, cell);
    let rho: f64 = per_dir.iter().sum();
    if rho <= 0.0 {
        return Err(Error::EmptyCell { cell });
    }
    let v = closure.speed(rho);
    let sum = per_dir.iter().enumerate().fold(Vec2::ZERO, |acc, (d, r)| {
        acc + direction_vector(d, state.nd) * *r
    });
    Ok(sum * (v / rho))
}

/// Cell densities and mean velocities of one state, shared by all kernel
/// evaluations of a collision step.
#[derive(Debug, Clone)]
pub struct MacroField {
    pub densities: Vec<f64>,
    pub velocities: Vec<Option<Vec2>>,
}

impl MacroField {
    pub fn compute(state: &SpatialState, closure: &SpeedClosure) -> Self {
        let n = state.arena.len();
        let densities: Vec<f64> = (0..n).map(|c| macro_density(state, c)).collect();
        let velocities = (0..n)
            .map(|c| macro_mean_velocity(state, c, closure).ok())
            .collect();
        Self {
            densities,
            velocities,
        }
    }
}

/// Redistribution of a cell's mass over directions.
pub trait DirectionKernel: Send + Sync {
    /// Writes into `out` (length `N_d`) the probability of each new direction
    /// for a pedestrian in `cell` currently moving along `d` with activity `u`.
    fn probabilities(
        &self,
        state: &SpatialState,
        field: &MacroField,
        cell: usize,
        d: usize,
        u: f64,
        out: &mut [f64],
    ) -> Result<()>;
}

/// Keeps every pedestrian on its current direction.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityKernel;

impl DirectionKernel for IdentityKernel {
    fn probabilities(
        &self,
        _: &SpatialState,
        _: &MacroField,
        _: usize,
        d: usize,
        _: f64,
        out: &mut [f64],
    ) -> Result<()> {
        out.fill(0.0);
        out[d] = 1.0;
        Ok(())
    }
}

/// The same distribution everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedKernel(pub Vec<f64>);

impl DirectionKernel for FixedKernel {
    fn probabilities(
        &self,
        _: &SpatialState,
        _: &MacroField,
        _: usize,
        _: usize,
        _: f64,
        out: &mut [f64],
    ) -> Result<()> {
        out.copy_from_slice(&self.0);
        Ok(())
    }
}

/// Weights of the three tendencies: exit direction, vacuum (less crowded
/// area) and main stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecisionWeights {
    Fixed {
        target: f64,
        vacuum: f64,
        stream: f64,
    },
    /// Raw weights `1`, `vacuum_gain · ρ` and `stream_gain · u`, normalized:
    /// crowding strengthens the search for vacuum, activity the attraction
    /// of the stream.
    Adaptive { vacuum_gain: f64, stream_gain: f64 },
}

impl DecisionWeights {
    /// Normalized `(target, vacuum, stream)` weights at density `rho` and
    /// activity `u`.
    pub fn evaluate(&self, rho: f64, u: f64) -> Result<[f64; 3]> {
        let raw = match *self {
            Self::Fixed {
                target,
                vacuum,
                stream,
            } => [target, vacuum, stream],
            Self::Adaptive {
                vacuum_gain,
                stream_gain,
            } => [1.0, vacuum_gain * rho, stream_gain * u],
        };
        if raw.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidParameter(format!("decision weights {raw:?}")));
        }
        let sum: f64 = raw.iter().sum();
        if sum <= 0.0 {
            return Err(Error::InvalidParameter(
                "decision weights sum to zero".into(),
            ));
        }
        Ok(raw.map(|w| w / sum))
    }
}

/// The three-trend decision kernel.
///
/// The preferred heading is `p = w_t τ + w_v ν + w_s σ` with τ the exit
/// direction from the [`TargetField`], ν the unit direction of steepest
/// density decrease among the cells of the effective interaction domain (a
/// cone around the current direction, radius from the [`SensoryConfig`]),
/// and σ the unit mean-velocity direction. Direction `d'` gets probability
/// proportional to `exp(κ ω_d' · p)`. When the domain holds no passable cell
/// only the exit direction is used.
#[derive(Debug, Clone)]
pub struct DecisionKernel {
    pub weights: DecisionWeights,
    pub sensory: SensoryConfig,
    pub sharpness: f64,
    pub target: Arc<TargetField>,
}

impl DecisionKernel {
    /// Unit vector from `cell` toward lower density within the cone of
    /// direction `d`, or `None` when the cone contains no passable cell.
    pub fn vacuum_direction(
        &self,
        state: &SpatialState,
        field: &MacroField,
        cell: usize,
        d: usize,
    ) -> Option<Vec2> {
        let arena = state.arena();
        let rho = field.densities[cell];
        let radius = self.sensory.interaction_radius(rho);
        let x = arena.center(cell);
        let heading = direction_vector(d, state.nd);
        let reach = (radius / arena.dx())
            .floor()
            .min(arena.cols().max(arena.rows()) as f64) as isize;
        let mut found = false;
        let mut sum = Vec2::ZERO;
        for dr in -reach..=reach {
            for dc in -reach..=reach {
                if dc == 0 && dr == 0 {
                    continue;
                }
                let Some(other) = arena.offset(cell, dc, dr) else {
                    continue;
                };
                if !arena.kind(other).is_passable() {
                    continue;
                }
                let y = arena.center(other);
                if !in_domain(x, heading, y, radius, self.sensory.theta) {
                    continue;
                }
                found = true;
                sum = sum - (y - x).normalized() * (field.densities[other] - rho);
            }
        }
        found.then(|| unit_or_zero(sum))
    }
}

fn unit_or_zero(v: Vec2) -> Vec2 {
    if v.norm() > 0.0 {
        v.normalized()
    } else {
        Vec2::ZERO
    }
}

/// Normalized `exp(κ ω_d · p)` over all directions.
pub fn von_mises_weights(preference: Vec2, sharpness: f64, out: &mut [f64]) {
    let nd = out.len();
    let scores: Vec<f64> = (0..nd)
        .map(|d| sharpness * direction_vector(d, nd).dot(preference))
        .collect();
    let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for (o, s) in out.iter_mut().zip(&scores) {
        *o = (s - top).exp();
    }
    let sum: f64 = out.iter().sum();
    out.iter_mut().for_each(|o| *o /= sum);
}

impl DirectionKernel for DecisionKernel {
    fn probabilities(
        &self,
        state: &SpatialState,
        field: &MacroField,
        cell: usize,
        d: usize,
        u: f64,
        out: &mut [f64],
    ) -> Result<()> {
        let tau = self.target.direction(cell).unwrap_or(Vec2::ZERO);
        let preference = match self.vacuum_direction(state, field, cell, d) {
            None => tau,
            Some(nu) => {
                let [wt, wv, ws] = self.weights.evaluate(field.densities[cell], u)?;
                let sigma = field.velocities[cell].map_or(Vec2::ZERO, unit_or_zero);
                tau * wt + nu * wv + sigma * ws
            }
        };
        von_mises_weights(preference, self.sharpness, out);
        Ok(())
    }
}

/// Direction probabilities of the decision kernel at one cell.
pub fn decision_kernel(
    state: &SpatialState,
    closure: &SpeedClosure,
    kernel: &DecisionKernel,
    cell: usize,
    d: usize,
    u: f64,
) -> Result<Vec<f64>> {
    let field = MacroField::compute(state, closure);
    let mut out = vec![0.0; state.nd];
    kernel.probabilities(state, &field, cell, d, u, &mut out)?;
    Ok(out)
}

/// Upwind advection over one time step.
///
/// The speed of a crossing is the closure evaluated at the density of the
/// cell being entered (zero for exits), so crowds cannot pile up beyond the
/// jam density at a bottleneck; mass bouncing off a wall moves at the speed
/// of its own cell. Densities are taken at the start of the step. The step
/// is rejected unless `dt · α ≤ dx`, which keeps every donor cell
/// nonnegative in both sweeps.
pub fn transport_step(
    state: &SpatialState,
    closure: &SpeedClosure,
    dt: f64,
) -> Result<SpatialState> {
    let arena = state.arena();
    let dx = arena.dx();
    let courant = dt * closure.alpha;
    if !(dt > 0.0) || courant > dx * (1.0 + 1e-12) {
        return Err(Error::Cfl { courant, dx });
    }
    let densities: Vec<f64> = (0..arena.len()).map(|c| macro_density(state, c)).collect();
    let mut next = state.clone();
    next.t = state.t + dt;
    sweep(&mut next, closure, &densities, dt, true);
    sweep(&mut next, closure, &densities, dt, false);
    Ok(next)
}

fn sweep(
    state: &mut SpatialState,
    closure: &SpeedClosure,
    densities: &[f64],
    dt: f64,
    along_x: bool,
) {
    let nd = state.nd;
    let m = state.grid.len();
    let ncell = state.arena.len();
    let dx = state.arena.dx();
    let dx2 = dx * dx;
    let w = state.grid.weights().to_vec();
    let old = state.f.clone();
    for d in 0..nd {
        let e = direction_vector(d, nd);
        let comp = if along_x { e.x } else { e.y };
        if comp == 0.0 {
            continue;
        }
        let (dc, dr) = if along_x {
            (comp.signum() as isize, 0)
        } else {
            (0, comp.signum() as isize)
        };
        let reverse = (d + nd / 2) % nd;
        for c in 0..ncell {
            if state.arena.kind(c) != CellKind::Walkable {
                continue;
            }
            let dest = state.arena.offset(c, dc, dr);
            let kind = dest.map_or(CellKind::Wall, |k| state.arena.kind(k));
            let speed = match kind {
                CellKind::Walkable => closure.speed(densities[dest.unwrap()]),
                CellKind::Exit => closure.speed(0.0),
                CellKind::Wall => closure.speed(densities[c]),
            };
            let frac = dt * speed * comp.abs() / dx;
            if frac == 0.0 {
                continue;
            }
            for j in 0..m {
                let moved = frac * old[(d * ncell + c) * m + j];
                if moved == 0.0 {
                    continue;
                }
                state.f[(d * ncell + c) * m + j] -= moved;
                match kind {
                    CellKind::Walkable => {
                        state.f[(d * ncell + dest.unwrap()) * m + j] += moved;
                    }
                    CellKind::Wall => {
                        state.f[(reverse * ncell + c) * m + j] += moved;
                    }
                    CellKind::Exit => {
                        state.evacuated += moved * w[j] * dx2;
                    }
                }
            }
        }
    }
}

/// Relaxation of each cell's direction distribution toward the kernel at
/// rate `η₀ ρ`: `f ← f + λ (Kᵀ f − f)` with `λ = 1 − exp(−η₀ ρ dt)`.
///
/// Cell mass is conserved exactly for any stochastic kernel; for kernels
/// that ignore the current direction the update is the exact solution of the
/// linear relaxation over `dt`.
pub fn collision_step(
    state: &SpatialState,
    closure: &SpeedClosure,
    kernel: &dyn DirectionKernel,
    eta0: f64,
    dt: f64,
) -> Result<SpatialState> {
    if !(eta0 >= 0.0) || !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("eta0 = {eta0}, dt = {dt}")));
    }
    let mut next = state.clone();
    if eta0 == 0.0 {
        return Ok(next);
    }
    let field = MacroField::compute(state, closure);
    let nd = state.nd;
    let m = state.grid.len();
    let ncell = state.arena.len();
    let nodes = state.grid.nodes();
    let mut probs = vec![0.0; nd];
    let mut mixed = vec![0.0; nd];
    for c in 0..ncell {
        let rho = field.densities[c];
        if rho <= 0.0 || state.arena.kind(c) != CellKind::Walkable {
            continue;
        }
        let lambda = -(-eta0 * rho * dt).exp_m1();
        for j in 0..m {
            mixed.fill(0.0);
            for d in 0..nd {
                let v = state.f[(d * ncell + c) * m + j];
                if v == 0.0 {
                    continue;
                }
                kernel.probabilities(state, &field, c, d, nodes[j], &mut probs)?;
                for (x, p) in mixed.iter_mut().zip(&probs) {
                    *x += p * v;
                }
            }
            for d in 0..nd {
                let i = (d * ncell + c) * m + j;
                next.f[i] = state.f[i] + lambda * (mixed[d] - state.f[i]);
            }
        }
    }
    Ok(next)
}

/// Transport then collision.
#[derive(Clone)]
pub struct CrowdSolver {
    pub closure: SpeedClosure,
    pub kernel: Arc<dyn DirectionKernel>,
    pub eta0: f64,
}

impl CrowdSolver {
    pub fn step(&self, state: &SpatialState, dt: f64) -> Result<SpatialState> {
        let moved = transport_step(state, &self.closure, dt)?;
        collision_step(&moved, &self.closure, self.kernel.as_ref(), self.eta0, dt)
    }
}
