//! Randomized small models for the oracle comparisons.

use std::sync::Arc;

use apkin_core::discrete::{DiscreteModel, DiscreteState, DiscreteTables};
use apkin_core::homogeneous::KernelSet;
use apkin_core::{ActivityGrid, HomogeneousState, MomentSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Continuum, Tables};

/// Kernels tabulated by node index from random draws.
#[derive(Debug, Clone)]
pub struct RandomKernels {
    pub n: usize,
    pub nodes: Vec<f64>,
    eta: Vec<f64>,
    field: Vec<f64>,
    transition: Vec<f64>,
    macro_rate: Vec<f64>,
    macro_base: Vec<f64>,
    macro_tilt: Vec<f64>,
    proliferation: Vec<f64>,
    destruction: Vec<f64>,
    drift: Option<Vec<(f64, f64)>>,
}

fn sparse(rng: &mut ChaCha8Rng, zero: f64) -> f64 {
    if rng.random_bool(zero) {
        0.0
    } else {
        rng.random_range(0.0..1.0)
    }
}

impl RandomKernels {
    pub fn draw(rng: &mut ChaCha8Rng, grid: &ActivityGrid, n: usize) -> Self {
        let m = grid.len();
        let nodes = grid.nodes().to_vec();
        let weights = grid.weights();
        let pairs = n * n * m * m;
        let eta = (0..pairs).map(|_| rng.random_range(0.0..2.0)).collect();
        let field = (0..n * m).map(|_| rng.random_range(0.2..1.0)).collect();
        let mut transition = Vec::with_capacity(pairs * n * m);
        for _ in 0..pairs {
            let mut row: Vec<f64> = (0..n * m).map(|_| sparse(rng, 0.3)).collect();
            let hit = rng.random_range(0..n * m);
            row[hit] += 0.5;
            let total: f64 = row
                .iter()
                .enumerate()
                .map(|(ij, v)| v * weights[ij % m])
                .sum();
            transition.extend(row.iter().map(|v| v / total));
        }
        let with_macro = rng.random_bool(0.6);
        let macro_rate = (0..n * n * m)
            .map(|_| if with_macro { sparse(rng, 0.3) } else { 0.0 })
            .collect();
        let macro_base = (0..n * n * m * n * m)
            .map(|_| sparse(rng, 0.2) + 0.01)
            .collect();
        let macro_tilt = (0..n * n * m * n * m)
            .map(|_| rng.random_range(-2.0..2.0))
            .collect();
        let with_births = rng.random_bool(0.6);
        let proliferation = (0..pairs * m)
            .map(|_| {
                if with_births {
                    0.5 * sparse(rng, 0.5)
                } else {
                    0.0
                }
            })
            .collect();
        let destruction = (0..pairs)
            .map(|_| if with_births { sparse(rng, 0.3) } else { 0.0 })
            .collect();
        let drift = rng.random_bool(0.5).then(|| {
            (0..n)
                .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect()
        });
        Self {
            n,
            nodes,
            eta,
            field,
            transition,
            macro_rate,
            macro_base,
            macro_tilt,
            proliferation,
            destruction,
            drift,
        }
    }

    fn m(&self) -> usize {
        self.nodes.len()
    }

    fn node(&self, u: f64) -> usize {
        self.nodes
            .iter()
            .position(|&x| x == u)
            .expect("kernel evaluated off the grid")
    }

    fn pair(&self, h: usize, k: usize, a: usize, b: usize) -> usize {
        ((h * self.n + k) * self.m() + a) * self.m() + b
    }

    fn macro_rows(
        &self,
        h: usize,
        k: usize,
        a: usize,
        e: f64,
        grid: &ActivityGrid,
    ) -> Vec<Vec<f64>> {
        let (n, m) = (self.n, self.m());
        let base = ((h * n + k) * m + a) * n * m;
        let mut rows = vec![vec![0.0; m]; n];
        for i in 0..n {
            for j in 0..m {
                rows[i][j] = self.macro_base[base + i * m + j]
                    * (e * self.macro_tilt[base + i * m + j]).exp();
            }
        }
        let w = grid.weights();
        let total: f64 = rows
            .iter()
            .flat_map(|r| r.iter().zip(w).map(|(v, w)| v * w))
            .sum();
        rows.iter_mut().flatten().for_each(|v| *v /= total);
        rows
    }
}

/// Oracle view of any kernel set on `grid`, going through the `KernelSet`
/// callbacks rather than any solver tables. The drift is evaluated at
/// `moments`.
pub fn with_continuum<R>(
    kernels: &dyn KernelSet,
    grid: &ActivityGrid,
    moments: &MomentSet,
    run: impl FnOnce(&Continuum) -> R,
) -> R {
    let (n, m) = (kernels.subsystems(), grid.len());
    let u = grid.nodes();
    let eta = |h, k, a: usize, b: usize| {
        kernels.encounter_rate(h, k, u[a], u[b]) * kernels.field_weight(k, u[b])
    };
    let transition = |h, k, a: usize, b: usize| {
        let mut out = vec![vec![0.0; m]; n];
        kernels.transition(h, k, u[a], u[b], grid, &mut out);
        out
    };
    let macro_rate = |h, k, a: usize, e| kernels.macro_rate(h, k, u[a], e);
    let macro_transition = |h, k, a: usize, e| {
        let mut out = vec![vec![0.0; m]; n];
        kernels.macro_transition(h, k, u[a], e, grid, &mut out);
        out
    };
    let proliferation = |i, k, a: usize, b: usize| {
        let mut out = vec![0.0; m];
        kernels.proliferation(i, k, u[a], u[b], grid, &mut out);
        out
    };
    let destruction = |i, k, j: usize, b: usize| kernels.destruction(i, k, u[j], u[b]);
    let drift = |i, j: usize| kernels.drift(i, moments.t, u[j], moments);
    let c = Continuum {
        n,
        nodes: u.to_vec(),
        weights: grid.weights().to_vec(),
        eta: &eta,
        transition: &transition,
        macro_rate: &macro_rate,
        macro_transition: &macro_transition,
        proliferation: &proliferation,
        destruction: &destruction,
        drift: kernels
            .has_drift()
            .then_some(&drift as &dyn Fn(usize, usize) -> f64),
    };
    run(&c)
}

impl KernelSet for RandomKernels {
    fn subsystems(&self) -> usize {
        self.n
    }

    fn encounter_rate(&self, h: usize, k: usize, u_cand: f64, u_field: f64) -> f64 {
        self.eta[self.pair(h, k, self.node(u_cand), self.node(u_field))]
    }

    fn transition(
        &self,
        h: usize,
        k: usize,
        u_cand: f64,
        u_field: f64,
        _: &ActivityGrid,
        out: &mut [Vec<f64>],
    ) {
        let nm = self.n * self.m();
        let base = self.pair(h, k, self.node(u_cand), self.node(u_field)) * nm;
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.transition[base + i * self.m() + j];
            }
        }
    }

    fn macro_rate(&self, h: usize, k: usize, u_cand: f64, activation: f64) -> f64 {
        self.macro_rate[(h * self.n + k) * self.m() + self.node(u_cand)] * (1.0 + activation)
    }

    fn macro_transition(
        &self,
        h: usize,
        k: usize,
        u_cand: f64,
        e: f64,
        grid: &ActivityGrid,
        out: &mut [Vec<f64>],
    ) {
        for (o, r) in out
            .iter_mut()
            .zip(self.macro_rows(h, k, self.node(u_cand), e, grid))
        {
            o.copy_from_slice(&r);
        }
    }

    fn proliferation(
        &self,
        i: usize,
        k: usize,
        u_cand: f64,
        u_field: f64,
        _: &ActivityGrid,
        out: &mut [f64],
    ) {
        let base = self.pair(i, k, self.node(u_cand), self.node(u_field)) * self.m();
        out.copy_from_slice(&self.proliferation[base..base + self.m()]);
    }

    fn destruction(&self, i: usize, k: usize, u: f64, u_field: f64) -> f64 {
        self.destruction[self.pair(i, k, self.node(u), self.node(u_field))]
    }

    fn has_drift(&self) -> bool {
        self.drift.is_some()
    }

    fn drift(&self, i: usize, _: f64, u: f64, _: &MomentSet) -> f64 {
        self.drift.as_ref().map_or(0.0, |d| d[i].0 + d[i].1 * u)
    }

    fn field_weight(&self, k: usize, u_field: f64) -> f64 {
        self.field[k * self.m() + self.node(u_field)]
    }
}

/// A random continuous instance: kernels plus a positive state.
pub fn homogeneous_instance(seed: u64) -> (Arc<RandomKernels>, HomogeneousState) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=3);
    let m = rng.random_range(2..=9);
    let lower = rng.random_range(0.0..0.5);
    let grid =
        Arc::new(ActivityGrid::uniform(lower, lower + rng.random_range(0.5..2.0), m).unwrap());
    let kernels = Arc::new(RandomKernels::draw(&mut rng, &grid, n));
    let values = (0..n)
        .map(|_| (0..m).map(|_| rng.random_range(0.05..1.5)).collect())
        .collect();
    let state = HomogeneousState::new(0.0, grid, values).unwrap();
    (kernels, state)
}

/// Raw tables of a random discrete instance, kept so the oracle can read
/// them after the model has taken its copy.
pub struct DiscreteInstance {
    pub n: usize,
    pub nodes: Vec<f64>,
    pub tables: DiscreteTables,
    pub model: DiscreteModel,
    pub state: DiscreteState,
    /// Rate scaling applied by the model, if any, as `c · Σ f`.
    pub scaling: Option<f64>,
}

impl DiscreteInstance {
    pub fn oracle_tables(&self) -> Tables<'_> {
        Tables {
            n: self.n,
            m: self.nodes.len(),
            nodes: &self.nodes,
            eta: &self.tables.eta,
            transition: &self.tables.transition,
            macro_rate: &self.tables.macro_rate,
            macro_transition: &self.tables.macro_transition,
            proliferation: &self.tables.proliferation,
            destruction: &self.tables.destruction,
        }
    }

    pub fn scale(&self) -> f64 {
        self.scaling.map_or(1.0, |c| c * self.state.total())
    }
}

fn stochastic_rows(rng: &mut ChaCha8Rng, rows: usize, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(rows * len);
    for _ in 0..rows {
        let mut row: Vec<f64> = (0..len).map(|_| sparse(rng, 0.4)).collect();
        row[rng.random_range(0..len)] += 0.5;
        let total: f64 = row.iter().sum();
        out.extend(row.iter().map(|v| v / total));
    }
    out
}

pub fn discrete_instance(seed: u64) -> DiscreteInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=3);
    let mut nodes: Vec<f64> = (0..rng.random_range(1..=9))
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    let m = nodes.len();
    let nm = n * m;
    let with_macro = rng.random_bool(0.6);
    let with_births = rng.random_bool(0.6);
    let mut tables = DiscreteTables {
        eta: (0..nm * nm).map(|_| rng.random_range(0.0..2.0)).collect(),
        transition: stochastic_rows(&mut rng, nm * nm, nm),
        ..Default::default()
    };
    if with_macro {
        tables.macro_rate = (0..nm * n).map(|_| sparse(&mut rng, 0.3)).collect();
        tables.macro_transition = stochastic_rows(&mut rng, nm * n, nm);
    }
    if with_births {
        tables.proliferation = (0..nm * nm).map(|_| sparse(&mut rng, 0.5)).collect();
        tables.destruction = (0..nm * nm).map(|_| sparse(&mut rng, 0.5)).collect();
    }
    let scaling = rng.random_bool(0.3).then(|| rng.random_range(0.1..1.0));
    let mut model = DiscreteModel::new(n, nodes.clone(), tables).unwrap();
    if let Some(c) = scaling {
        model = model.with_rate_scaling(move |f| c * f.iter().flatten().sum::<f64>());
    }
    let tables = model.tables().clone();
    let f = (0..n)
        .map(|_| (0..m).map(|_| rng.random_range(0.05..1.5)).collect())
        .collect();
    DiscreteInstance {
        n,
        nodes,
        tables,
        model,
        state: DiscreteState::new(0.0, f).unwrap(),
        scaling,
    }
}
