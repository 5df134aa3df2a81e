//! Spatially homogeneous active-particle structure.
//!
//! For each subsystem `i` the distribution `f_i(t, u)` over activity evolves as
//!
//! ```text
//! ∂t f_i + ∂u(φ_i f_i) = (G_i − L_i) + (G^M_i − L^M_i) + (P_i − D_i)
//! ```
//!
//! with micro–micro gain/loss driven by encounter rates `η_hk` and transition
//! densities `A^i_hk`, micro–macro gain/loss driven by rates `μ_hk` and
//! transitions `M^i_hk` against the mean activity `E_k` of a whole subsystem,
//! and proliferation/destruction acting within the test particle's subsystem.
//!
//! Kernels are supplied through [`KernelSet`] and tabulated on an
//! [`ActivityGrid`] by [`InteractionModel::build`]. Transition densities are
//! checked to integrate to one and renormalized so that the discrete operator
//! conserves the total number density exactly when `P = D = 0`.

mod integrate;
pub mod kernels;
pub mod tumor_immune;

use std::sync::Arc;

use crate::grid::{ActivityGrid, HomogeneousState, MomentSet};
use crate::{Error, Result};

pub use integrate::{run_until, step_rk4, Diagnostics, Integrator, Trajectory};

/// Largest deviation from unit mass tolerated before a transition table is
/// renormalized instead of rejected.
pub const NORMALIZATION_TOL: f64 = 1e-3;

/// What to do when a micro–macro term needs the activation of an empty
/// subsystem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentPolicy {
    /// Signal [`Error::UndefinedMoment`].
    Require,
    /// Use `E_k = 0`, which switches the coupling to that subsystem off.
    ZeroSentinel,
}

/// Interaction kernels of one model. Subsystem arguments are zero-based:
/// `h` candidate, `k` field, `i` output (test) subsystem.
///
/// Densities are returned as nodal values on the grid handed in; they are
/// probability densities with respect to the grid's quadrature.
pub trait KernelSet: Send + Sync {
    fn subsystems(&self) -> usize;

    /// Encounter rate `η_hk(u*, u^*)`.
    fn encounter_rate(&self, h: usize, k: usize, u_cand: f64, u_field: f64) -> f64;

    /// Transition density `A^i_hk(u* → u | u*, u^*)` for every output `i`.
    /// `out[i]` arrives zeroed.
    fn transition(
        &self,
        h: usize,
        k: usize,
        u_cand: f64,
        u_field: f64,
        grid: &ActivityGrid,
        out: &mut [Vec<f64>],
    );

    /// Micro–macro rate `μ_hk(u*, E_k)`.
    fn macro_rate(&self, _h: usize, _k: usize, _u_cand: f64, _activation: f64) -> f64 {
        0.0
    }

    /// Micro–macro transition `M^i_hk(u* → u | u*, E_k)`. Defaults to no
    /// change of state.
    fn macro_transition(
        &self,
        h: usize,
        _k: usize,
        u_cand: f64,
        _activation: f64,
        grid: &ActivityGrid,
        out: &mut [Vec<f64>],
    ) {
        grid.deposit(u_cand, 1.0, &mut out[h]);
    }

    fn moment_policy(&self) -> MomentPolicy {
        MomentPolicy::Require
    }

    /// Proliferation density `P_ik(u* → u | u*, u^*)` into subsystem `i`.
    /// `out` arrives zeroed.
    fn proliferation(
        &self,
        _i: usize,
        _k: usize,
        _u_cand: f64,
        _u_field: f64,
        _grid: &ActivityGrid,
        _out: &mut [f64],
    ) {
    }

    /// Destruction rate `D_ik(u, u^*)`.
    fn destruction(&self, _i: usize, _k: usize, _u: f64, _u_field: f64) -> f64 {
        0.0
    }

    /// Whether [`KernelSet::drift`] is active.
    fn has_drift(&self) -> bool {
        false
    }

    /// External activity drift `φ_i(t, u)`.
    fn drift(&self, _i: usize, _t: f64, _u: f64, _moments: &MomentSet) -> f64 {
        0.0
    }

    /// Weight of field state `u^*` inside the sensitivity domain. The default
    /// takes the domain to be the whole activity interval.
    fn field_weight(&self, _k: usize, _u_field: f64) -> f64 {
        1.0
    }
}

#[derive(Debug, Clone, Copy)]
struct Band {
    start: usize,
    len: usize,
    offset: usize,
}

/// Nonzero runs of nodal vectors, stored contiguously.
#[derive(Debug, Clone, Default)]
struct BandTable {
    bands: Vec<Band>,
    values: Vec<f64>,
}

impl BandTable {
    fn push(&mut self, row: &[f64], scale: f64) {
        let first = row.iter().position(|&v| v != 0.0);
        let band = match first {
            None => Band {
                start: 0,
                len: 0,
                offset: self.values.len(),
            },
            Some(start) => {
                let end = row.iter().rposition(|&v| v != 0.0).unwrap() + 1;
                let offset = self.values.len();
                self.values
                    .extend(row[start..end].iter().map(|v| v * scale));
                Band {
                    start,
                    len: end - start,
                    offset,
                }
            }
        };
        self.bands.push(band);
    }

    #[inline]
    fn get(&self, idx: usize) -> (usize, &[f64]) {
        let b = self.bands[idx];
        (b.start, &self.values[b.offset..b.offset + b.len])
    }

    fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// A [`KernelSet`] tabulated and validated on a fixed grid.
#[derive(Clone)]
pub struct InteractionModel {
    kernels: Arc<dyn KernelSet>,
    grid: Arc<ActivityGrid>,
    n: usize,
    /// `η_hk(u_a, u_b)` times the field weight, index `((h n + k) m + a) m + b`.
    eta: Vec<f64>,
    /// `A^i_hk(u_a, u_b)`, band index `(((h n + k) m + a) m + b) n + i`.
    transitions: BandTable,
    /// `P_ik(u_a, u_b)`, band index `((i n + k) m + a) m + b`.
    proliferation: BandTable,
    /// `D_ik(u_j, u_b)`, index `((i n + k) m + j) m + b`.
    destruction: Vec<f64>,
    has_macro: bool,
    has_birth_death: bool,
}

impl std::fmt::Debug for InteractionModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InteractionModel")
            .field("subsystems", &self.n)
            .field("nodes", &self.grid.len())
            .field("has_macro", &self.has_macro)
            .field("has_birth_death", &self.has_birth_death)
            .finish_non_exhaustive()
    }
}

fn check_row(row: &[f64], what: impl FnOnce() -> String) -> Result<()> {
    for &v in row {
        if !v.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "non-finite value in {}",
                what()
            )));
        }
        if v < 0.0 {
            return Err(Error::Negative(what()));
        }
    }
    Ok(())
}

/// Integral over all outputs of a set of nodal densities.
fn total_mass(grid: &ActivityGrid, rows: &[Vec<f64>]) -> f64 {
    rows.iter().map(|r| grid.integrate(r)).sum()
}

fn normalization_factor(sum: f64, what: impl FnOnce() -> String) -> Result<f64> {
    if (sum - 1.0).abs() > NORMALIZATION_TOL || !sum.is_finite() {
        return Err(Error::NotNormalized { what: what(), sum });
    }
    Ok(1.0 / sum)
}

impl InteractionModel {
    /// Tabulates and validates `kernels` on `grid`.
    ///
    /// Rejects negative rates or densities, and transition densities whose
    /// total mass is off by more than [`NORMALIZATION_TOL`]; smaller
    /// deviations are renormalized away.
    pub fn build(kernels: Arc<dyn KernelSet>, grid: Arc<ActivityGrid>) -> Result<Self> {
        let n = kernels.subsystems();
        if n == 0 {
            return Err(Error::InvalidParameter("model has no subsystems".into()));
        }
        let m = grid.len();
        let u = grid.nodes();

        let mut eta = Vec::with_capacity(n * n * m * m);
        for h in 0..n {
            for k in 0..n {
                for &ua in u {
                    for &ub in u {
                        let rate = kernels.encounter_rate(h, k, ua, ub);
                        let weight = kernels.field_weight(k, ub);
                        check_row(&[rate, weight], || format!("eta_{h}{k}({ua}, {ub})"))?;
                        eta.push(rate * weight);
                    }
                }
            }
        }

        let mut transitions = BandTable::default();
        let mut out = vec![vec![0.0; m]; n];
        for h in 0..n {
            for k in 0..n {
                for &ua in u {
                    for &ub in u {
                        out.iter_mut().for_each(|r| r.fill(0.0));
                        kernels.transition(h, k, ua, ub, &grid, &mut out);
                        let what = || format!("A_{h}{k}({ua} -> . | {ua}, {ub})");
                        for row in &out {
                            check_row(row, what)?;
                        }
                        let scale = normalization_factor(total_mass(&grid, &out), what)?;
                        for row in &out {
                            transitions.push(row, scale);
                        }
                    }
                }
            }
        }

        let mut proliferation = BandTable::default();
        let mut destruction = Vec::with_capacity(n * n * m * m);
        let mut row = vec![0.0; m];
        for i in 0..n {
            for k in 0..n {
                for &ua in u {
                    for &ub in u {
                        row.fill(0.0);
                        kernels.proliferation(i, k, ua, ub, &grid, &mut row);
                        check_row(&row, || format!("P_{i}{k}({ua}, {ub})"))?;
                        proliferation.push(&row, 1.0);
                        let d = kernels.destruction(i, k, ua, ub);
                        check_row(&[d], || format!("D_{i}{k}({ua}, {ub})"))?;
                        destruction.push(d);
                    }
                }
            }
        }
        let has_birth_death = !proliferation.is_zero() || destruction.iter().any(|&d| d != 0.0);

        // Probe the micro–macro kernels on the grid nodes: their dependence on
        // E_k prevents tabulation, so they are checked here and normalized on
        // every evaluation.
        let mut has_macro = false;
        for h in 0..n {
            for k in 0..n {
                for &ua in u {
                    for &e in u {
                        let rate = kernels.macro_rate(h, k, ua, e);
                        check_row(&[rate], || format!("mu_{h}{k}({ua}, {e})"))?;
                        has_macro |= rate != 0.0;
                        out.iter_mut().for_each(|r| r.fill(0.0));
                        kernels.macro_transition(h, k, ua, e, &grid, &mut out);
                        let what = || format!("M_{h}{k}({ua} -> . | {ua}, E = {e})");
                        for row in &out {
                            check_row(row, what)?;
                        }
                        normalization_factor(total_mass(&grid, &out), what)?;
                    }
                }
            }
        }

        Ok(Self {
            kernels,
            grid,
            n,
            eta,
            transitions,
            proliferation,
            destruction,
            has_macro,
            has_birth_death,
        })
    }

    pub fn subsystems(&self) -> usize {
        self.n
    }

    pub fn grid(&self) -> &ActivityGrid {
        &self.grid
    }

    pub fn shared_grid(&self) -> Arc<ActivityGrid> {
        Arc::clone(&self.grid)
    }

    pub fn kernels(&self) -> &Arc<dyn KernelSet> {
        &self.kernels
    }

    pub fn has_macro(&self) -> bool {
        self.has_macro
    }

    pub fn has_birth_death(&self) -> bool {
        self.has_birth_death
    }

    pub fn has_drift(&self) -> bool {
        self.kernels.has_drift()
    }

    /// Same model with proliferation and destruction switched off.
    pub fn conservative_part(&self) -> Self {
        let mut model = self.clone();
        let m = self.grid.len();
        model.proliferation = BandTable::default();
        let empty = vec![0.0; m];
        for _ in 0..self.n * self.n * m * m {
            model.proliferation.push(&empty, 1.0);
        }
        model.destruction.iter_mut().for_each(|d| *d = 0.0);
        model.has_birth_death = false;
        model
    }

    /// Tabulated encounter rate including the field weight.
    pub fn encounter_rate(&self, h: usize, k: usize, a: usize, b: usize) -> f64 {
        let m = self.grid.len();
        self.eta[((h * self.n + k) * m + a) * m + b]
    }

    /// Renormalized transition density `A^i_hk(u_a, u_b)` at every node.
    pub fn transition_row(&self, h: usize, k: usize, a: usize, b: usize, i: usize) -> Vec<f64> {
        let m = self.grid.len();
        let (start, vals) = self
            .transitions
            .get((((h * self.n + k) * m + a) * m + b) * self.n + i);
        let mut row = vec![0.0; m];
        row[start..start + vals.len()].copy_from_slice(vals);
        row
    }

    /// Proliferation density `P_ik(u_a, u_b)` at every node.
    pub fn proliferation_row(&self, i: usize, k: usize, a: usize, b: usize) -> Vec<f64> {
        let m = self.grid.len();
        let (start, vals) = self.proliferation.get(((i * self.n + k) * m + a) * m + b);
        let mut row = vec![0.0; m];
        row[start..start + vals.len()].copy_from_slice(vals);
        row
    }

    /// Destruction rate `D_ik(u_j, u_b)`.
    pub fn destruction_rate(&self, i: usize, k: usize, j: usize, b: usize) -> f64 {
        let m = self.grid.len();
        self.destruction[((i * self.n + k) * m + j) * m + b]
    }

    fn check_state(&self, state: &HomogeneousState) -> Result<()> {
        if state.subsystems() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "state has {} subsystems, model has {}",
                state.subsystems(),
                self.n
            )));
        }
        if state.grid() != self.grid.as_ref() {
            return Err(Error::DimensionMismatch(
                "state and model use different activity grids".into(),
            ));
        }
        Ok(())
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.n,
            });
        }
        Ok(())
    }

    fn micro_into(&self, f: &[Vec<f64>], out: &mut [Vec<f64>]) {
        let (n, m) = (self.n, self.grid.len());
        let w = self.grid.weights();
        for h in 0..n {
            for k in 0..n {
                for a in 0..m {
                    let cand = w[a] * f[h][a];
                    if cand == 0.0 {
                        continue;
                    }
                    let base = ((h * n + k) * m + a) * m;
                    for b in 0..m {
                        let c = cand * w[b] * f[k][b] * self.eta[base + b];
                        if c == 0.0 {
                            continue;
                        }
                        for (i, row) in out.iter_mut().enumerate() {
                            let (start, vals) = self.transitions.get((base + b) * n + i);
                            for (o, v) in row[start..start + vals.len()].iter_mut().zip(vals) {
                                *o += c * v;
                            }
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..m {
                if f[i][j] == 0.0 {
                    continue;
                }
                let mut rate = 0.0;
                for k in 0..n {
                    let base = ((i * n + k) * m + j) * m;
                    for b in 0..m {
                        rate += w[b] * self.eta[base + b] * f[k][b];
                    }
                }
                out[i][j] -= f[i][j] * rate;
            }
        }
    }

    fn activations(&self, state: &HomogeneousState) -> Result<Vec<f64>> {
        let policy = self.kernels.moment_policy();
        state
            .moments()
            .activations
            .into_iter()
            .enumerate()
            .map(|(k, e)| match (e, policy) {
                (Some(e), _) => Ok(e),
                (None, MomentPolicy::ZeroSentinel) => Ok(0.0),
                (None, MomentPolicy::Require) => Err(Error::UndefinedMoment { subsystem: k }),
            })
            .collect()
    }

    fn macro_into(&self, state: &HomogeneousState, out: &mut [Vec<f64>]) -> Result<()> {
        if !self.has_macro {
            return Ok(());
        }
        let (n, m) = (self.n, self.grid.len());
        let (u, w) = (self.grid.nodes(), self.grid.weights());
        let f = state.values();
        let act = self.activations(state)?;
        let mut trans = vec![vec![0.0; m]; n];
        for h in 0..n {
            for (k, &e) in act.iter().enumerate() {
                for a in 0..m {
                    let rate = self.kernels.macro_rate(h, k, u[a], e);
                    let c = w[a] * rate * f[h][a] * e;
                    if c == 0.0 {
                        continue;
                    }
                    trans.iter_mut().for_each(|r| r.fill(0.0));
                    self.kernels
                        .macro_transition(h, k, u[a], e, &self.grid, &mut trans);
                    let sum = total_mass(&self.grid, &trans);
                    if !(sum > 0.0 && sum.is_finite()) {
                        return Err(Error::NotNormalized {
                            what: format!("M_{h}{k}({} -> . | E = {e})", u[a]),
                            sum,
                        });
                    }
                    let scale = c / sum;
                    for (o, t) in out.iter_mut().zip(&trans) {
                        for (oj, tj) in o.iter_mut().zip(t) {
                            *oj += scale * tj;
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..m {
                if f[i][j] == 0.0 {
                    continue;
                }
                let rate: f64 = act
                    .iter()
                    .enumerate()
                    .map(|(k, &e)| self.kernels.macro_rate(i, k, u[j], e) * e)
                    .sum();
                out[i][j] -= f[i][j] * rate;
            }
        }
        Ok(())
    }

    fn birth_death_into(&self, f: &[Vec<f64>], out: &mut [Vec<f64>]) {
        if !self.has_birth_death {
            return;
        }
        let (n, m) = (self.n, self.grid.len());
        let w = self.grid.weights();
        for i in 0..n {
            for k in 0..n {
                for a in 0..m {
                    let test = w[a] * f[i][a];
                    if test == 0.0 {
                        continue;
                    }
                    let base = ((i * n + k) * m + a) * m;
                    for b in 0..m {
                        let (start, vals) = self.proliferation.get(base + b);
                        if vals.is_empty() {
                            continue;
                        }
                        let c = test * w[b] * f[k][b] * self.eta[base + b];
                        for (o, v) in out[i][start..start + vals.len()].iter_mut().zip(vals) {
                            *o += c * v;
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..m {
                if f[i][j] == 0.0 {
                    continue;
                }
                let mut rate = 0.0;
                for k in 0..n {
                    let base = ((i * n + k) * m + j) * m;
                    for b in 0..m {
                        rate += w[b] * self.eta[base + b] * self.destruction[base + b] * f[k][b];
                    }
                }
                out[i][j] -= f[i][j] * rate;
            }
        }
    }

    /// Nodal drift `φ_i(t, u_j)` at the current state.
    pub fn external_action(&self, state: &HomogeneousState) -> Result<Option<ExternalAction>> {
        self.check_state(state)?;
        if !self.kernels.has_drift() {
            return Ok(None);
        }
        let moments = state.moments();
        let phi: Vec<Vec<f64>> = (0..self.n)
            .map(|i| {
                self.grid
                    .nodes()
                    .iter()
                    .map(|&u| self.kernels.drift(i, state.t, u, &moments))
                    .collect()
            })
            .collect();
        if phi.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { t: state.t });
        }
        Ok(Some(ExternalAction { phi }))
    }

    fn drift_into(&self, state: &HomogeneousState, out: &mut [Vec<f64>]) -> Result<()> {
        if let Some(action) = self.external_action(state)? {
            for ((o, f), phi) in out.iter_mut().zip(state.values()).zip(&action.phi) {
                upwind_divergence(&self.grid, phi, f, o);
            }
        }
        Ok(())
    }
}

/// Activity drift `φ_i(t, u_j)` per subsystem and node.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalAction {
    pub phi: Vec<Vec<f64>>,
}

/// Subtracts a first-order upwind approximation of `∂u(φ f)` from `out`.
///
/// Fluxes live on the midpoints between nodes and vanish at both ends of the
/// domain; dividing by the trapezoid weights makes the scheme conserve the
/// quadrature of `f` exactly.
fn upwind_divergence(grid: &ActivityGrid, phi: &[f64], f: &[f64], out: &mut [f64]) {
    let m = grid.len();
    let w = grid.weights();
    let mut flux_left = 0.0;
    for j in 0..m {
        let flux_right = if j + 1 < m {
            let a = 0.5 * (phi[j] + phi[j + 1]);
            a.max(0.0) * f[j] + a.min(0.0) * f[j + 1]
        } else {
            0.0
        };
        out[j] -= (flux_right - flux_left) / w[j];
        flux_left = flux_right;
    }
}

fn zero_like(state: &HomogeneousState) -> Vec<Vec<f64>> {
    vec![vec![0.0; state.grid().len()]; state.subsystems()]
}

/// Micro–micro net flux `G_i − L_i` at every node of subsystem `i`.
pub fn gain_loss_micro(
    state: &HomogeneousState,
    model: &InteractionModel,
    i: usize,
) -> Result<Vec<f64>> {
    model.check_state(state)?;
    model.check_index(i)?;
    let mut out = zero_like(state);
    model.micro_into(state.values(), &mut out);
    Ok(out.swap_remove(i))
}

/// Micro–macro net flux `G^M_i − L^M_i` at every node of subsystem `i`.
///
/// The field subsystem enters both gain and loss through its activation
/// `E_k`, which keeps the operator conservative for normalized `M`.
pub fn gain_loss_macro(
    state: &HomogeneousState,
    model: &InteractionModel,
    i: usize,
) -> Result<Vec<f64>> {
    model.check_state(state)?;
    model.check_index(i)?;
    let mut out = zero_like(state);
    model.macro_into(state, &mut out)?;
    Ok(out.swap_remove(i))
}

/// Net proliferation minus destruction `P_i − D_i` in subsystem `i`.
pub fn prolif_destr(
    state: &HomogeneousState,
    model: &InteractionModel,
    i: usize,
) -> Result<Vec<f64>> {
    model.check_state(state)?;
    model.check_index(i)?;
    let mut out = zero_like(state);
    model.birth_death_into(state.values(), &mut out);
    Ok(out.swap_remove(i))
}

/// Full right-hand side `Q_i[f] − ∂u(φ_i f_i)` for every subsystem.
pub fn rhs(state: &HomogeneousState, model: &InteractionModel) -> Result<Vec<Vec<f64>>> {
    model.check_state(state)?;
    let mut out = zero_like(state);
    model.micro_into(state.values(), &mut out);
    model.macro_into(state, &mut out)?;
    model.birth_death_into(state.values(), &mut out);
    model.drift_into(state, &mut out)?;
    Ok(out)
}
