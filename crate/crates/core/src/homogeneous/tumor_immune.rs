//! Two-population tumor–immune competition.
//!
//! Subsystem 0 holds tumor cells, whose activity is their progression toward
//! malignancy; subsystem 1 holds immune cells, whose activity is their
//! activation level. Encounters
//!
//! * between two tumor cells pull the candidate's activity down by a fraction
//!   `contact_inhibition` of itself,
//! * push immune activity up by `activation_ratio · progression` of the
//!   remaining gap when the field particle is a tumor cell,
//! * let tumor cells proliferate (rate `tumor_proliferation · u`, daughters
//!   inherit the parent's activity) and compete (`tumor_competition`), let
//!   active immune cells kill tumor cells (`immune_kill · u^*`), let tumor
//!   cells kill immune cells (`tumor_aggression`), and let activated immune
//!   cells proliferate on contact with tumor (`immune_proliferation · u`,
//!   daughters are born at the innate activity).
//!
//! Tumor activity also drifts toward full malignancy at rate `progression`,
//! independently of encounters, and immune activation relaxes toward the
//! innate level `innate_activity` at rate `immune_relaxation`. Since contact
//! inhibition grows with the tumor density while the drift does not, a
//! growing tumor loses malignancy and saturates instead of blowing up.
//!
//! `activation_ratio` compares the activation ability of the immune system
//! with the progression ability of the tumor; it separates tumor depletion
//! (large ratio) from tumor growth (small ratio). The activity domain is
//! `[0, 1]` and `activation_ratio · progression` should not exceed one.

use super::kernels::normalized_bump;
use super::KernelSet;
use crate::grid::{ActivityGrid, MomentSet};

pub const TUMOR: usize = 0;
pub const IMMUNE: usize = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct TumorImmuneParams {
    pub encounter_rate: f64,
    pub progression: f64,
    pub activation_ratio: f64,
    pub contact_inhibition: f64,
    pub tumor_proliferation: f64,
    pub tumor_competition: f64,
    pub immune_kill: f64,
    pub tumor_aggression: f64,
    pub immune_proliferation: f64,
    pub immune_relaxation: f64,
    pub innate_activity: f64,
}

impl Default for TumorImmuneParams {
    fn default() -> Self {
        Self {
            encounter_rate: 1.0,
            progression: 0.1,
            activation_ratio: 5.0,
            contact_inhibition: 0.2,
            tumor_proliferation: 1.0,
            tumor_competition: 0.3,
            immune_kill: 6.0,
            tumor_aggression: 3.0,
            immune_proliferation: 10.0,
            immune_relaxation: 0.2,
            innate_activity: 0.1,
        }
    }
}

impl TumorImmuneParams {
    /// Same parameters with every birth and death rate set to zero.
    pub fn conservative(&self) -> Self {
        Self {
            tumor_proliferation: 0.0,
            tumor_competition: 0.0,
            immune_kill: 0.0,
            tumor_aggression: 0.0,
            immune_proliferation: 0.0,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone)]
pub struct TumorImmune {
    pub params: TumorImmuneParams,
}

impl TumorImmune {
    pub fn new(params: TumorImmuneParams) -> Self {
        Self { params }
    }

    fn activation_step(&self) -> f64 {
        self.params.activation_ratio * self.params.progression
    }
}

impl KernelSet for TumorImmune {
    fn subsystems(&self) -> usize {
        2
    }

    fn encounter_rate(&self, _: usize, _: usize, _: f64, _: f64) -> f64 {
        self.params.encounter_rate
    }

    fn transition(
        &self,
        h: usize,
        k: usize,
        u_cand: f64,
        _u_field: f64,
        grid: &ActivityGrid,
        out: &mut [Vec<f64>],
    ) {
        let top = grid.upper();
        let target = match (h, k) {
            (TUMOR, TUMOR) => u_cand - self.params.contact_inhibition * (u_cand - grid.lower()),
            (IMMUNE, TUMOR) => u_cand + self.activation_step() * (top - u_cand),
            _ => u_cand,
        };
        normalized_bump(grid, target, 0.0, 1.0, &mut out[h]);
    }

    fn proliferation(
        &self,
        i: usize,
        k: usize,
        u_cand: f64,
        _u_field: f64,
        grid: &ActivityGrid,
        out: &mut [f64],
    ) {
        // tumor daughters inherit the parent's activity, new immune cells are naive
        let (rate, at) = match (i, k) {
            (TUMOR, TUMOR) => (self.params.tumor_proliferation * u_cand, u_cand),
            (IMMUNE, TUMOR) => (
                self.params.immune_proliferation * u_cand,
                self.params.innate_activity,
            ),
            _ => (0.0, u_cand),
        };
        if rate > 0.0 {
            grid.deposit(at, rate, out);
        }
    }

    fn destruction(&self, i: usize, k: usize, _u: f64, u_field: f64) -> f64 {
        match (i, k) {
            (TUMOR, TUMOR) => self.params.tumor_competition,
            (TUMOR, IMMUNE) => self.params.immune_kill * u_field,
            (IMMUNE, TUMOR) => self.params.tumor_aggression,
            _ => 0.0,
        }
    }

    fn has_drift(&self) -> bool {
        self.params.progression != 0.0 || self.params.immune_relaxation != 0.0
    }

    fn drift(&self, i: usize, _t: f64, u: f64, _moments: &MomentSet) -> f64 {
        match i {
            TUMOR => self.params.progression * (1.0 - u),
            _ => -self.params.immune_relaxation * (u - self.params.innate_activity),
        }
    }
}
