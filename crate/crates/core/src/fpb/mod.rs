//! Monte Carlo for Boltzmann-type interaction rules.
//!
//! Particles carry one scalar `v` in a domain `I`. A pair `(v, w)` interacts
//! through `v* = v + P(v)(w − v) + Q(v) η`, a single particle with the
//! environment through `v* = v + P_E(v) z − P(v) v + Q(v) η`. Pairs are drawn
//! Nanbu-style: every step picks `Binomial(N/2, λ dt)` disjoint random pairs
//! and each particle interacts at most once, which realizes the weak form
//!
//! ```text
//! d/dt ⟨φ⟩ = λ ⟨φ(v*) − φ(v)⟩
//! ```
//!
//! to first order in `dt`. All randomness comes from one ChaCha8 stream per
//! ensemble, so a seed fixes a run bit for bit.

mod ensemble;
mod rules;
mod scaling;

pub use ensemble::{env_step, mc_step, uniform_sampler, weak_observable, Ensemble, Histogram};
pub use rules::{
    env_interact, pair_interact, Admissibility, Coefficient, EnvRule, Environment, Interval,
    NoiseLaw, PairRule, MAX_RESAMPLES,
};
pub use scaling::{moment_ode_oracle, quasi_invariant_scale, MomentOracle, QuasiInvariantStudy};
