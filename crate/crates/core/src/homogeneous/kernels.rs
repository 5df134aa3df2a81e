//! Reusable kernel families and helpers for building transition densities.

use statrs::function::beta::ln_beta;

use super::{KernelSet, MomentPolicy};
use crate::grid::ActivityGrid;

/// Adds a bump of total quadrature mass `mass` centred at `center` to `out`.
///
/// A Gaussian of the given width is sampled at the nodes and normalized on the
/// grid; widths below half a grid spacing degrade to a linear point deposit.
pub fn normalized_bump(grid: &ActivityGrid, center: f64, width: f64, mass: f64, out: &mut [f64]) {
    if width < 0.5 * grid.spacing() {
        grid.deposit(center, mass, out);
        return;
    }
    let shape: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&u| (-0.5 * ((u - center) / width).powi(2)).exp())
        .collect();
    let total = grid.integrate(&shape);
    for (o, s) in out.iter_mut().zip(&shape) {
        *o += mass * s / total;
    }
}

/// Beta probability density with shape `(a, b)` rescaled to `[lower, upper]`.
pub fn beta_density(u: f64, a: f64, b: f64, lower: f64, upper: f64) -> f64 {
    let len = upper - lower;
    let x = (u - lower) / len;
    if !(0.0..=1.0).contains(&x) {
        return 0.0;
    }
    if (x == 0.0 && a > 1.0) || (x == 1.0 && b > 1.0) {
        return 0.0;
    }
    ((a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() - ln_beta(a, b)).exp() / len
}

/// No interactions at all: every rate vanishes and transitions keep the state.
#[derive(Debug, Clone)]
pub struct ZeroKernels {
    pub subsystems: usize,
}

impl KernelSet for ZeroKernels {
    fn subsystems(&self) -> usize {
        self.subsystems
    }

    fn encounter_rate(&self, _: usize, _: usize, _: f64, _: f64) -> f64 {
        0.0
    }

    fn transition(
        &self,
        h: usize,
        _: usize,
        u: f64,
        _: f64,
        grid: &ActivityGrid,
        out: &mut [Vec<f64>],
    ) {
        grid.deposit(u, 1.0, &mut out[h]);
    }
}

/// Constant encounter rate with a uniform output density in the candidate's
/// own subsystem.
#[derive(Debug, Clone)]
pub struct ConstantKernels {
    pub subsystems: usize,
    pub rate: f64,
}

impl KernelSet for ConstantKernels {
    fn subsystems(&self) -> usize {
        self.subsystems
    }

    fn encounter_rate(&self, _: usize, _: usize, _: f64, _: f64) -> f64 {
        self.rate
    }

    fn transition(
        &self,
        h: usize,
        _: usize,
        _: f64,
        _: f64,
        grid: &ActivityGrid,
        out: &mut [Vec<f64>],
    ) {
        let density = 1.0 / (grid.upper() - grid.lower());
        out[h].fill(density);
    }
}

/// Smooth consensus dynamics.
///
/// A candidate at `u*` meeting a field particle at `u^*` moves to a Beta
/// distributed activity whose mean sits near `u* + attraction (u^* − u*)`;
/// `concentration` sharpens the output. The Beta density is normalized on
/// the grid it is sampled on. With probability
/// `switching · x^*` (where `x^*` is the field activity rescaled to `[0, 1]`)
/// a candidate meeting another subsystem joins it. The encounter rate grows
/// mildly with the activities of both partners.
#[derive(Debug, Clone)]
pub struct ConsensusKernels {
    pub subsystems: usize,
    pub rate: f64,
    pub attraction: f64,
    pub concentration: f64,
    pub switching: f64,
    pub lower: f64,
    pub upper: f64,
}

impl ConsensusKernels {
    pub fn new(subsystems: usize) -> Self {
        Self {
            subsystems,
            rate: 1.0,
            attraction: 0.3,
            concentration: 12.0,
            switching: 0.2,
            lower: 0.0,
            upper: 1.0,
        }
    }

    fn unit(&self, u: f64) -> f64 {
        (u - self.lower) / (self.upper - self.lower)
    }

    fn output_shape(&self, u_cand: f64, u_field: f64) -> (f64, f64) {
        let (xc, xf) = (self.unit(u_cand), self.unit(u_field));
        let center = (xc + self.attraction * (xf - xc)).clamp(0.0, 1.0);
        (
            3.0 + center * self.concentration,
            3.0 + (1.0 - center) * self.concentration,
        )
    }
}

impl KernelSet for ConsensusKernels {
    fn subsystems(&self) -> usize {
        self.subsystems
    }

    fn encounter_rate(&self, _: usize, _: usize, u_cand: f64, u_field: f64) -> f64 {
        self.rate * (1.0 + 0.5 * self.unit(u_cand) * self.unit(u_field))
    }

    fn transition(
        &self,
        h: usize,
        k: usize,
        u_cand: f64,
        u_field: f64,
        grid: &ActivityGrid,
        out: &mut [Vec<f64>],
    ) {
        let (a, b) = self.output_shape(u_cand, u_field);
        let switch = if h == k {
            0.0
        } else {
            self.switching * self.unit(u_field)
        };
        let shape: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|&u| beta_density(u, a, b, self.lower, self.upper))
            .collect();
        let total = grid.integrate(&shape);
        for (j, d) in shape.iter().enumerate() {
            out[h][j] += (1.0 - switch) * d / total;
            if switch > 0.0 {
                out[k][j] += switch * d / total;
            }
        }
    }
}

/// Micro–macro attraction toward each subsystem's mean activity: a
/// candidate meeting subsystem `k` lands in a narrow bump around `E_k`.
#[derive(Debug, Clone)]
pub struct AttractionToMean {
    pub subsystems: usize,
    pub rate: f64,
    pub width: f64,
}

impl KernelSet for AttractionToMean {
    fn subsystems(&self) -> usize {
        self.subsystems
    }

    fn encounter_rate(&self, _: usize, _: usize, _: f64, _: f64) -> f64 {
        0.0
    }

    fn transition(
        &self,
        h: usize,
        _: usize,
        u: f64,
        _: f64,
        grid: &ActivityGrid,
        out: &mut [Vec<f64>],
    ) {
        grid.deposit(u, 1.0, &mut out[h]);
    }

    fn macro_rate(&self, _: usize, _: usize, _: f64, _: f64) -> f64 {
        self.rate
    }

    fn macro_transition(
        &self,
        h: usize,
        _: usize,
        _: f64,
        activation: f64,
        grid: &ActivityGrid,
        out: &mut [Vec<f64>],
    ) {
        normalized_bump(grid, activation, self.width, 1.0, &mut out[h]);
    }

    fn moment_policy(&self) -> MomentPolicy {
        MomentPolicy::ZeroSentinel
    }
}
