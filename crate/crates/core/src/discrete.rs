//! Discrete activity states.
//!
//! The activity of each subsystem takes `m` values `u_1 < … < u_m`; the state
//! is the matrix `f_ij(t)` of particle numbers in subsystem `i` and state `j`.
//! Interactions are dense tables:
//!
//! | table | shape / index order | meaning |
//! |---|---|---|
//! | `eta` | `(p, q, h, k)` | encounter rate of a `pq`-candidate with an `hk`-field particle |
//! | `transition` | `(p, q, h, k, i, j)` | probability that the candidate ends in `ij` |
//! | `macro_rate` | `(p, q, k)` | rate of a `pq`-candidate meeting subsystem `k` as a whole |
//! | `macro_transition` | `(p, q, k, i, j)` | probability that the candidate ends in `ij` |
//! | `proliferation` | `(i, j, h, k)` | births in `ij` per `ij`–`hk` encounter |
//! | `destruction` | `(i, j, h, k)` | deaths in `ij` per `ij`–`hk` encounter |
//!
//! All tables are row-major in the listed order. `p, i, h` (and `k` in the
//! macro tables) index subsystems; `q, j` (and `k` in the micro tables) index
//! activity states.

use std::sync::Arc;

use crate::grid::{ActivityGrid, HomogeneousState, MomentSet};
use crate::homogeneous::{Integrator, InteractionModel, KernelSet, MomentPolicy};
use crate::{Error, Result};

/// Tolerance on the unit row sums of the transition tables.
pub const TABLE_NORMALIZATION_TOL: f64 = 1e-12;

type RateScaling = Arc<dyn Fn(&[Vec<f64>]) -> f64 + Send + Sync>;

/// Raw tables for [`DiscreteModel::new`]. Empty macro, proliferation and
/// destruction tables stand for all-zero tables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiscreteTables {
    pub eta: Vec<f64>,
    pub transition: Vec<f64>,
    pub macro_rate: Vec<f64>,
    pub macro_transition: Vec<f64>,
    pub proliferation: Vec<f64>,
    pub destruction: Vec<f64>,
}

#[derive(Clone)]
pub struct DiscreteModel {
    n: usize,
    m: usize,
    nodes: Vec<f64>,
    tables: DiscreteTables,
    has_macro: bool,
    moment_policy: MomentPolicy,
    rate_scaling: Option<RateScaling>,
}

impl std::fmt::Debug for DiscreteModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiscreteModel")
            .field("n", &self.n)
            .field("m", &self.m)
            .field("nodes", &self.nodes)
            .field("has_macro", &self.has_macro)
            .finish_non_exhaustive()
    }
}

fn check_table(name: &str, table: &mut Vec<f64>, len: usize, optional: bool) -> Result<()> {
    if table.is_empty() && optional {
        *table = vec![0.0; len];
    }
    if table.len() != len {
        return Err(Error::DimensionMismatch(format!(
            "table `{name}` has {} entries, expected {len}",
            table.len()
        )));
    }
    if let Some(v) = table.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "table `{name}` contains {v}"
        )));
    }
    if table.iter().any(|&v| v < 0.0) {
        return Err(Error::Negative(format!("table `{name}`")));
    }
    Ok(())
}

fn check_rows(name: &str, table: &[f64], row_len: usize) -> Result<()> {
    for (r, row) in table.chunks(row_len).enumerate() {
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > TABLE_NORMALIZATION_TOL {
            return Err(Error::NotNormalized {
                what: format!("table `{name}` row {r}"),
                sum,
            });
        }
    }
    Ok(())
}

impl DiscreteModel {
    /// Validates dimensions, signs and normalization of the tables. `nodes`
    /// are the activity values used for the activations `E_k`.
    pub fn new(n: usize, nodes: Vec<f64>, mut tables: DiscreteTables) -> Result<Self> {
        let m = nodes.len();
        if n == 0 || m == 0 {
            return Err(Error::DimensionMismatch(
                "need at least one subsystem and one state".into(),
            ));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "activity nodes must be strictly increasing".into(),
            ));
        }
        let nm = n * m;
        check_table("eta", &mut tables.eta, nm * nm, false)?;
        check_table("transition", &mut tables.transition, nm * nm * nm, false)?;
        check_table("macro_rate", &mut tables.macro_rate, nm * n, true)?;
        check_table("proliferation", &mut tables.proliferation, nm * nm, true)?;
        check_table("destruction", &mut tables.destruction, nm * nm, true)?;
        check_rows("transition", &tables.transition, nm)?;
        let has_macro = tables.macro_rate.iter().any(|&v| v != 0.0);
        if tables.macro_transition.is_empty() {
            // no change of state
            let mut identity = vec![0.0; nm * n * nm];
            for pq in 0..nm {
                for k in 0..n {
                    identity[(pq * n + k) * nm + pq] = 1.0;
                }
            }
            tables.macro_transition = identity;
        }
        check_table(
            "macro_transition",
            &mut tables.macro_transition,
            nm * n * nm,
            false,
        )?;
        check_rows("macro_transition", &tables.macro_transition, nm)?;
        Ok(Self {
            n,
            m,
            nodes,
            tables,
            has_macro,
            moment_policy: MomentPolicy::Require,
            rate_scaling: None,
        })
    }

    /// Discrete model induced by a tabulated continuous model: state `j` is
    /// the grid node `u_j`, `f_ij ↔ w_j f_i(u_j)`, transition probabilities
    /// are the kernel samples times quadrature weights (renormalized), and
    /// births are placed in the parent's state.
    ///
    /// Models with micro–macro coupling or activity drift have no constant
    /// table form and are rejected.
    pub fn induced(model: &InteractionModel) -> Result<Self> {
        if model.has_macro() || model.has_drift() {
            return Err(Error::Misuse(
                "micro-macro coupling and activity drift cannot be tabulated as constant discrete tables"
                    .into(),
            ));
        }
        let n = model.subsystems();
        let grid = model.grid();
        let m = grid.len();
        let w = grid.weights();
        let nm = n * m;
        let mut tables = DiscreteTables {
            eta: vec![0.0; nm * nm],
            transition: vec![0.0; nm * nm * nm],
            proliferation: vec![0.0; nm * nm],
            destruction: vec![0.0; nm * nm],
            ..Default::default()
        };
        for p in 0..n {
            for q in 0..m {
                for h in 0..n {
                    for k in 0..m {
                        let pqhk = ((p * m + q) * n + h) * m + k;
                        tables.eta[pqhk] = model.encounter_rate(p, h, q, k);
                        let row = &mut tables.transition[pqhk * nm..(pqhk + 1) * nm];
                        for i in 0..n {
                            let a = model.transition_row(p, h, q, k, i);
                            for j in 0..m {
                                row[i * m + j] = w[j] * a[j];
                            }
                        }
                        let sum: f64 = row.iter().sum();
                        row.iter_mut().for_each(|v| *v /= sum);
                        let births = model.proliferation_row(p, h, q, k);
                        tables.proliferation[pqhk] = grid.integrate(&births);
                        tables.destruction[pqhk] = model.destruction_rate(p, h, q, k);
                    }
                }
            }
        }
        Self::new(n, grid.nodes().to_vec(), tables)
    }

    pub fn with_moment_policy(mut self, policy: MomentPolicy) -> Self {
        self.moment_policy = policy;
        self
    }

    /// Multiplies every encounter and micro–macro rate by `scaling(f)`,
    /// evaluated at the current state. This is the hook for rates that depend
    /// on the distribution itself.
    pub fn with_rate_scaling(
        mut self,
        scaling: impl Fn(&[Vec<f64>]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.rate_scaling = Some(Arc::new(scaling));
        self
    }

    pub fn subsystems(&self) -> usize {
        self.n
    }

    pub fn states(&self) -> usize {
        self.m
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn tables(&self) -> &DiscreteTables {
        &self.tables
    }

    /// Whether some transition moves mass across subsystems.
    pub fn has_cross_transitions(&self) -> bool {
        let (n, m) = (self.n, self.m);
        let nm = n * m;
        let micro = (0..nm * nm).any(|pqhk| {
            let p = pqhk / (m * nm);
            let row = &self.tables.transition[pqhk * nm..(pqhk + 1) * nm];
            row.iter()
                .enumerate()
                .any(|(ij, &v)| v != 0.0 && ij / m != p)
        });
        let macro_ = (0..nm * n).any(|pqk| {
            let p = pqk / (m * n);
            let row = &self.tables.macro_transition[pqk * nm..(pqk + 1) * nm];
            row.iter()
                .enumerate()
                .any(|(ij, &v)| v != 0.0 && ij / m != p)
        });
        micro || (self.has_macro && macro_)
    }

    fn check_state(&self, state: &DiscreteState) -> Result<()> {
        if state.f.len() != self.n || state.f.iter().any(|r| r.len() != self.m) {
            return Err(Error::DimensionMismatch(format!(
                "state is not {} x {}",
                self.n, self.m
            )));
        }
        Ok(())
    }

    fn activations(&self, f: &[Vec<f64>]) -> Result<Vec<f64>> {
        f.iter()
            .enumerate()
            .map(|(k, row)| {
                let n: f64 = row.iter().sum();
                if n > 0.0 {
                    Ok(row.iter().zip(&self.nodes).map(|(f, u)| f * u).sum::<f64>() / n)
                } else if self.moment_policy == MomentPolicy::ZeroSentinel || !self.uses_field(k) {
                    Ok(0.0)
                } else {
                    Err(Error::UndefinedMoment { subsystem: k })
                }
            })
            .collect()
    }

    fn uses_field(&self, k: usize) -> bool {
        self.tables
            .macro_rate
            .chunks(self.n)
            .any(|row| row[k] != 0.0)
    }

    fn scale(&self, f: &[Vec<f64>]) -> f64 {
        self.rate_scaling.as_ref().map_or(1.0, |s| s(f))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteState {
    pub t: f64,
    pub f: Vec<Vec<f64>>,
}

impl DiscreteState {
    pub fn new(t: f64, f: Vec<Vec<f64>>) -> Result<Self> {
        if f.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { t });
        }
        if f.iter().flatten().any(|&v| v < 0.0) {
            return Err(Error::Negative("discrete state".into()));
        }
        Ok(Self { t, f })
    }

    /// Particle numbers `f_ij = w_j f_i(u_j)` of a continuous state.
    pub fn from_homogeneous(state: &HomogeneousState) -> Self {
        let w = state.grid().weights();
        Self {
            t: state.t,
            f: state
                .values()
                .iter()
                .map(|r| r.iter().zip(w).map(|(f, w)| f * w).collect())
                .collect(),
        }
    }

    pub fn densities(&self) -> Vec<f64> {
        self.f.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn total(&self) -> f64 {
        self.f.iter().flatten().sum()
    }

    pub fn moments(&self, nodes: &[f64]) -> MomentSet {
        let densities = self.densities();
        let activations = self
            .f
            .iter()
            .zip(&densities)
            .map(|(r, &n)| {
                (n > 0.0).then(|| r.iter().zip(nodes).map(|(f, u)| f * u).sum::<f64>() / n)
            })
            .collect();
        MomentSet {
            t: self.t,
            densities,
            activations,
        }
    }
}

/// Right-hand side of the discrete-state structure: micro–micro gain and
/// loss, micro–macro gain and loss against the activations `E_k`,
/// proliferation and destruction in the test particle's state.
pub fn discrete_rhs(state: &DiscreteState, model: &DiscreteModel) -> Result<Vec<Vec<f64>>> {
    model.check_state(state)?;
    let (n, m) = (model.n, model.m);
    let nm = n * m;
    let t = &model.tables;
    let f = &state.f;
    let s = model.scale(f);
    let mut out = vec![vec![0.0; m]; n];

    // Each loss is subtracted right after the matching gain so that an
    // identity transition cancels exactly.
    for p in 0..n {
        for q in 0..m {
            let fpq = f[p][q];
            if fpq == 0.0 {
                continue;
            }
            for h in 0..n {
                for k in 0..m {
                    let pqhk = ((p * m + q) * n + h) * m + k;
                    let c = s * t.eta[pqhk] * fpq * f[h][k];
                    if c == 0.0 {
                        continue;
                    }
                    let row = &t.transition[pqhk * nm..(pqhk + 1) * nm];
                    for i in 0..n {
                        for j in 0..m {
                            out[i][j] += c * row[i * m + j];
                        }
                    }
                    out[p][q] -= c;
                    out[p][q] += c * t.proliferation[pqhk];
                    out[p][q] -= c * t.destruction[pqhk];
                }
            }
        }
    }

    if model.has_macro {
        let act = model.activations(f)?;
        for p in 0..n {
            for q in 0..m {
                for (k, &e) in act.iter().enumerate() {
                    let pqk = (p * m + q) * n + k;
                    let c = s * t.macro_rate[pqk] * f[p][q] * e;
                    if c == 0.0 {
                        continue;
                    }
                    let row = &t.macro_transition[pqk * nm..(pqk + 1) * nm];
                    for i in 0..n {
                        for j in 0..m {
                            out[i][j] += c * row[i * m + j];
                        }
                    }
                    out[p][q] -= c;
                }
            }
        }
    }
    Ok(out)
}

/// Right-hand side for models whose micro–micro transitions never leave the
/// candidate's subsystem and that have no micro–macro, birth or death terms.
pub fn simple_rhs(state: &DiscreteState, model: &DiscreteModel) -> Result<Vec<Vec<f64>>> {
    model.check_state(state)?;
    let t = &model.tables;
    if model.has_cross_transitions() {
        return Err(Error::Misuse("model moves mass across subsystems".into()));
    }
    if model.has_macro
        || t.proliferation.iter().any(|&v| v != 0.0)
        || t.destruction.iter().any(|&v| v != 0.0)
    {
        return Err(Error::Misuse(
            "model has micro-macro, proliferative or destructive terms".into(),
        ));
    }
    let (n, m) = (model.n, model.m);
    let nm = n * m;
    let f = &state.f;
    let s = model.scale(f);
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for q in 0..m {
            let fiq = f[i][q];
            if fiq == 0.0 {
                continue;
            }
            for h in 0..n {
                for k in 0..m {
                    let iqhk = ((i * m + q) * n + h) * m + k;
                    let c = s * t.eta[iqhk] * fiq * f[h][k];
                    if c == 0.0 {
                        continue;
                    }
                    let row = &t.transition[iqhk * nm + i * m..iqhk * nm + (i + 1) * m];
                    for (o, a) in out[i].iter_mut().zip(row) {
                        *o += c * a;
                    }
                    out[i][q] -= c;
                }
            }
        }
    }
    Ok(out)
}

/// Classical RK4 step for [`discrete_rhs`]; negative values are clamped to
/// zero and the clamped amount is returned.
pub fn step_rk4(
    state: &DiscreteState,
    model: &DiscreteModel,
    dt: f64,
) -> Result<(DiscreteState, f64)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let stage = |base: &[Vec<f64>], k: &[Vec<f64>], s: f64, t: f64| DiscreteState {
        t,
        f: base
            .iter()
            .zip(k)
            .map(|(b, k)| b.iter().zip(k).map(|(b, k)| b + s * k).collect())
            .collect(),
    };
    let t = state.t;
    let k1 = discrete_rhs(state, model)?;
    let k2 = discrete_rhs(&stage(&state.f, &k1, 0.5 * dt, t + 0.5 * dt), model)?;
    let k3 = discrete_rhs(&stage(&state.f, &k2, 0.5 * dt, t + 0.5 * dt), model)?;
    let k4 = discrete_rhs(&stage(&state.f, &k3, dt, t + dt), model)?;
    let mut clamped = 0.0;
    let mut f = state.f.clone();
    for (i, row) in f.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v += dt / 6.0 * (k1[i][j] + 2.0 * k2[i][j] + 2.0 * k3[i][j] + k4[i][j]);
            if !v.is_finite() {
                return Err(Error::NonFinite { t: t + dt });
            }
            if *v < 0.0 {
                clamped -= *v;
                *v = 0.0;
            }
        }
    }
    Ok((DiscreteState { t: t + dt, f }, clamped))
}

/// Fixed-step march to `t_end` recording moments every `output_every` steps
/// (and at the end). Returns the samples and the final state.
pub fn run_until(
    state: &DiscreteState,
    model: &DiscreteModel,
    t_end: f64,
    dt: f64,
    output_every: usize,
) -> Result<(Vec<MomentSet>, DiscreteState)> {
    if !(t_end > state.t) {
        return Err(Error::InvalidParameter(format!(
            "t_end = {t_end} must exceed the current time {}",
            state.t
        )));
    }
    let span = t_end - state.t;
    let steps = ((span / dt) - 1e-9).ceil().max(1.0) as usize;
    let h = span / steps as f64;
    let t0 = state.t;
    let every = output_every.max(1);
    let mut current = state.clone();
    let mut samples = Vec::new();
    for s in 1..=steps {
        current = step_rk4(&current, model, h)?.0;
        current.t = if s == steps { t_end } else { t0 + s as f64 * h };
        if s % every == 0 || s == steps {
            samples.push(current.moments(model.nodes()));
        }
    }
    Ok((samples, current))
}

/// Settings for [`continuum_consistency`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyStudy {
    pub lower: f64,
    pub upper: f64,
    pub t_end: f64,
    pub dt: f64,
    /// Steps between compared samples.
    pub output_every: usize,
    /// Grid size of the continuum reference solution.
    pub reference_points: usize,
}

impl Default for ConsistencyStudy {
    fn default() -> Self {
        Self {
            lower: 0.0,
            upper: 1.0,
            t_end: 1.0,
            dt: 0.01,
            output_every: 10,
            reference_points: 161,
        }
    }
}

fn moment_gap(a: &MomentSet, b: &MomentSet) -> f64 {
    let dn = a
        .densities
        .iter()
        .zip(&b.densities)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let de = a
        .activations
        .iter()
        .zip(&b.activations)
        .map(|(x, y)| match (x, y) {
            (Some(x), Some(y)) => (x - y).abs(),
            (None, None) => 0.0,
            _ => f64::INFINITY,
        })
        .fold(0.0, f64::max);
    dn.max(de)
}

/// Compares the discrete models induced by `kernels` at each grid size in
/// `m_sequence` with a continuum reference computed on a fine grid.
///
/// Both start from `initial(i, u)` and are integrated with the same time
/// step. The discrepancy at one resolution is the largest difference of any
/// subsystem density `n_i` or activation `E_i` over the sampled times.
/// Kernels with kinks or jumps converge slowly or erratically; no check is
/// made for that.
pub fn continuum_consistency(
    kernels: Arc<dyn KernelSet>,
    initial: &dyn Fn(usize, f64) -> f64,
    m_sequence: &[usize],
    study: &ConsistencyStudy,
) -> Result<Vec<f64>> {
    let n = kernels.subsystems();
    let reference = {
        let grid = Arc::new(ActivityGrid::uniform(
            study.lower,
            study.upper,
            study.reference_points,
        )?);
        let model = InteractionModel::build(Arc::clone(&kernels), Arc::clone(&grid))?;
        let state = HomogeneousState::from_fn(grid, n, initial)?;
        let mut integrator = Integrator::new(&model);
        integrator.clamp_negative = false;
        integrator
            .run_until(
                &state,
                study.t_end,
                study.dt,
                study.dt * study.output_every as f64,
            )?
            .samples
    };
    m_sequence
        .iter()
        .map(|&m| {
            let grid = Arc::new(ActivityGrid::uniform(study.lower, study.upper, m)?);
            let model = InteractionModel::build(Arc::clone(&kernels), Arc::clone(&grid))?;
            let discrete = DiscreteModel::induced(&model)?;
            let state =
                DiscreteState::from_homogeneous(&HomogeneousState::from_fn(grid, n, initial)?);
            let (samples, _) =
                run_until(&state, &discrete, study.t_end, study.dt, study.output_every)?;
            if samples.len() != reference.len() {
                return Err(Error::DimensionMismatch("sample counts differ".into()));
            }
            Ok(samples
                .iter()
                .zip(&reference)
                .map(|(a, b)| moment_gap(a, b))
                .fold(0.0, f64::max))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// One subsystem, `m` states, constant unit rate and a caller-given
    /// transition row (the same for every candidate/field pair).
    fn single(m: usize, row: impl Fn(usize, usize) -> Vec<f64>) -> DiscreteModel {
        let mut transition = Vec::new();
        for q in 0..m {
            for k in 0..m {
                transition.extend(row(q, k));
            }
        }
        let nodes = (0..m).map(|j| j as f64 / (m - 1).max(1) as f64).collect();
        DiscreteModel::new(
            1,
            nodes,
            DiscreteTables {
                eta: vec![1.0; m * m],
                transition,
                ..Default::default()
            },
        )
        .unwrap()
    }

    fn identity(m: usize) -> impl Fn(usize, usize) -> Vec<f64> {
        move |q, _| {
            let mut r = vec![0.0; m];
            r[q] = 1.0;
            r
        }
    }

    #[test]
    fn zero_state_zero_rhs() {
        let model = single(3, |_, _| vec![1.0 / 3.0; 3]);
        let state = DiscreteState::new(0.0, vec![vec![0.0; 3]]).unwrap();
        assert_eq!(discrete_rhs(&state, &model).unwrap(), vec![vec![0.0; 3]]);
        assert_eq!(simple_rhs(&state, &model).unwrap(), vec![vec![0.0; 3]]);
    }

    #[test]
    fn identity_transitions_balance_exactly() {
        let model = single(4, identity(4));
        let state = DiscreteState::new(0.0, vec![vec![0.3, 1.1, 0.0, 2.5]]).unwrap();
        assert_eq!(discrete_rhs(&state, &model).unwrap(), vec![vec![0.0; 4]]);
    }

    #[test]
    fn two_state_jump() {
        let model = single(2, |_, _| vec![0.0, 1.0]);
        let state = DiscreteState::new(0.0, vec![vec![1.0, 0.0]]).unwrap();
        assert_eq!(discrete_rhs(&state, &model).unwrap(), vec![vec![-1.0, 1.0]]);
    }

    #[test]
    fn uniform_transitions_relax_toward_uniform() {
        let model = single(3, |_, _| vec![1.0 / 3.0; 3]);
        let state = DiscreteState::new(0.0, vec![vec![2.0, 1.0, 0.0]]).unwrap();
        let r = simple_rhs(&state, &model).unwrap();
        // total 3: gain 3 * 3 / 3 = 3 at every state, loss 3 f_j
        assert_abs_diff_eq!(r[0][0], -3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r[0][1], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r[0][2], 3.0, epsilon = 1e-14);
    }

    #[test]
    fn rejects_unnormalized_rows() {
        let r = DiscreteModel::new(
            1,
            vec![0.0, 1.0],
            DiscreteTables {
                eta: vec![1.0; 4],
                transition: [0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.6, 0.5].to_vec(),
                ..Default::default()
            },
        );
        assert!(matches!(r, Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn rejects_wrong_dimensions() {
        let r = DiscreteModel::new(
            1,
            vec![0.0, 1.0],
            DiscreteTables {
                eta: vec![1.0; 3],
                transition: vec![0.5; 8],
                ..Default::default()
            },
        );
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
        let model = single(2, identity(2));
        let bad = DiscreteState::new(0.0, vec![vec![1.0; 3]]).unwrap();
        assert!(matches!(
            discrete_rhs(&bad, &model),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn simple_rhs_refuses_cross_transitions() {
        // two subsystems, one state each; everything jumps to subsystem 1
        let model = DiscreteModel::new(
            2,
            vec![0.5],
            DiscreteTables {
                eta: vec![1.0; 4],
                transition: [0.0, 1.0].repeat(4),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(model.has_cross_transitions());
        let state = DiscreteState::new(0.0, vec![vec![1.0], vec![1.0]]).unwrap();
        assert!(matches!(simple_rhs(&state, &model), Err(Error::Misuse(_))));
        let r = discrete_rhs(&state, &model).unwrap();
        assert_abs_diff_eq!(r[0][0], -2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r[1][0], 2.0, epsilon = 1e-15);
    }

    #[test]
    fn macro_terms_use_activation() {
        // one subsystem, two states at u = 0, 1; meeting the subsystem as a
        // whole sends state 0 to state 1
        let model = DiscreteModel::new(
            1,
            vec![0.0, 1.0],
            DiscreteTables {
                eta: vec![0.0; 4],
                transition: [1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0].to_vec(),
                macro_rate: vec![2.0, 0.0],
                macro_transition: vec![0.0, 1.0, 0.0, 1.0],
                ..Default::default()
            },
        )
        .unwrap();
        let state = DiscreteState::new(0.0, vec![vec![3.0, 1.0]]).unwrap();
        let r = discrete_rhs(&state, &model).unwrap();
        // E = 1/4, flux = 2 * 3 * 0.25 = 1.5
        assert_abs_diff_eq!(r[0][0], -1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(r[0][1], 1.5, epsilon = 1e-15);
        let empty = DiscreteState::new(0.0, vec![vec![0.0, 0.0]]).unwrap();
        assert_eq!(
            discrete_rhs(&empty, &model),
            Err(Error::UndefinedMoment { subsystem: 0 })
        );
        let tolerant = model.with_moment_policy(MomentPolicy::ZeroSentinel);
        assert_eq!(
            discrete_rhs(&empty, &tolerant).unwrap(),
            vec![vec![0.0, 0.0]]
        );
    }

    #[test]
    fn rate_scaling_multiplies_rates() {
        let model = single(2, |_, _| vec![0.0, 1.0]);
        let scaled = model.clone().with_rate_scaling(|_| 3.0);
        let state = DiscreteState::new(0.0, vec![vec![1.0, 0.5]]).unwrap();
        let a = discrete_rhs(&state, &model).unwrap();
        let b = discrete_rhs(&state, &scaled).unwrap();
        assert_abs_diff_eq!(b[0][0], 3.0 * a[0][0], epsilon = 1e-15);
    }

    #[test]
    fn equilibrium_is_fixed() {
        let model = single(3, |_, _| vec![1.0 / 3.0; 3]);
        let state = DiscreteState::new(0.0, vec![vec![0.7; 3]]).unwrap();
        let (next, clamped) = step_rk4(&state, &model, 0.1).unwrap();
        assert_eq!(clamped, 0.0);
        for v in &next.f[0] {
            assert_abs_diff_eq!(*v, 0.7, epsilon = 1e-14);
        }
    }
}
