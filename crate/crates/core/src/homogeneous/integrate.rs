use crate::grid::{HomogeneousState, MomentSet};
use crate::{Error, Result};

use super::{rhs, InteractionModel};

/// Counters accumulated while integrating.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub steps: usize,
    /// Number of nodal values clamped to zero.
    pub clamp_events: usize,
    /// Quadrature mass added by clamping negative values.
    pub clamped_mass: f64,
}

/// Moments sampled at each output interval, plus the final state.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<MomentSet>,
    pub final_state: HomogeneousState,
}

fn axpy(base: &[Vec<f64>], k: &[Vec<f64>], s: f64) -> Vec<Vec<f64>> {
    base.iter()
        .zip(k)
        .map(|(b, k)| b.iter().zip(k).map(|(b, k)| b + s * k).collect())
        .collect()
}

/// Classical four-stage Runge–Kutta driver for [`rhs`].
#[derive(Debug)]
pub struct Integrator<'a> {
    model: &'a InteractionModel,
    /// Clamp negative nodal values after each step.
    pub clamp_negative: bool,
    pub diagnostics: Diagnostics,
}

impl<'a> Integrator<'a> {
    pub fn new(model: &'a InteractionModel) -> Self {
        Self {
            model,
            clamp_negative: true,
            diagnostics: Diagnostics::default(),
        }
    }

    pub fn step(&mut self, state: &HomogeneousState, dt: f64) -> Result<HomogeneousState> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {dt}"
            )));
        }
        let t = state.t;
        let f0 = state.values();
        let k1 = rhs(state, self.model)?;
        let s2 = state.with_values_unchecked(t + 0.5 * dt, axpy(f0, &k1, 0.5 * dt));
        let k2 = rhs(&s2, self.model)?;
        let s3 = state.with_values_unchecked(t + 0.5 * dt, axpy(f0, &k2, 0.5 * dt));
        let k3 = rhs(&s3, self.model)?;
        let s4 = state.with_values_unchecked(t + dt, axpy(f0, &k3, dt));
        let k4 = rhs(&s4, self.model)?;

        let w = state.grid().weights();
        let mut next = Vec::with_capacity(f0.len());
        for (i, row) in f0.iter().enumerate() {
            let mut out = Vec::with_capacity(row.len());
            for (j, &f) in row.iter().enumerate() {
                let v = f + dt / 6.0 * (k1[i][j] + 2.0 * k2[i][j] + 2.0 * k3[i][j] + k4[i][j]);
                if !v.is_finite() {
                    return Err(Error::NonFinite { t: t + dt });
                }
                if v < 0.0 && self.clamp_negative {
                    self.diagnostics.clamp_events += 1;
                    self.diagnostics.clamped_mass -= v * w[j];
                    out.push(0.0);
                } else {
                    out.push(v);
                }
            }
            next.push(out);
        }
        self.diagnostics.steps += 1;
        Ok(state.with_values_unchecked(t + dt, next))
    }

    /// Marches from `state.t` to `t_end` with fixed steps, recording moments
    /// every `output_interval` and at `t_end`. The step is shrunk slightly if
    /// needed so that an integer number of steps lands exactly on `t_end`.
    /// The initial state is not part of the samples.
    pub fn run_until(
        &mut self,
        state: &HomogeneousState,
        t_end: f64,
        dt: f64,
        output_interval: f64,
    ) -> Result<Trajectory> {
        if !(t_end > state.t) {
            return Err(Error::InvalidParameter(format!(
                "t_end = {t_end} must exceed the current time {}",
                state.t
            )));
        }
        if !(dt > 0.0) || !(output_interval > 0.0) {
            return Err(Error::InvalidParameter(
                "dt and output interval must be positive".into(),
            ));
        }
        let span = t_end - state.t;
        let steps = ((span / dt) - 1e-9).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        let every = ((output_interval / h).round() as usize).max(1);

        let t0 = state.t;
        let mut current = state.clone();
        let mut samples = Vec::new();
        for s in 1..=steps {
            current = self.step(&current, h)?;
            if s == steps {
                current.t = t_end;
            } else {
                current.t = t0 + s as f64 * h;
            }
            if s % every == 0 || s == steps {
                samples.push(current.moments());
            }
        }
        Ok(Trajectory {
            samples,
            final_state: current,
        })
    }
}

/// One clamped RK4 step; clamping is tallied in `diagnostics`.
pub fn step_rk4(
    state: &HomogeneousState,
    model: &InteractionModel,
    dt: f64,
    diagnostics: &mut Diagnostics,
) -> Result<HomogeneousState> {
    let mut integrator = Integrator::new(model);
    let next = integrator.step(state, dt)?;
    diagnostics.steps += integrator.diagnostics.steps;
    diagnostics.clamp_events += integrator.diagnostics.clamp_events;
    diagnostics.clamped_mass += integrator.diagnostics.clamped_mass;
    Ok(next)
}

/// Runs to `t_end`, sampling moments after every step.
pub fn run_until(
    state: &HomogeneousState,
    model: &InteractionModel,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    Integrator::new(model).run_until(state, t_end, dt, dt)
}
