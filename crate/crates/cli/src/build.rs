//! Turns a validated config into solver objects. Failures here (an
//! unnormalized table, a bad map) are configuration errors.

use std::sync::Arc;

use apkin_core::discrete::{DiscreteModel, DiscreteState, DiscreteTables};
use apkin_core::domains::{DomainMode, SensoryConfig};
use apkin_core::fpb::{
    uniform_sampler, Admissibility, Coefficient, Ensemble, Interval, NoiseLaw, PairRule,
};
use apkin_core::homogeneous::kernels::{ConsensusKernels, ConstantKernels};
use apkin_core::homogeneous::tumor_immune::{TumorImmune, TumorImmuneParams};
use apkin_core::homogeneous::{InteractionModel, KernelSet};
use apkin_core::spatial::{
    Arena, CellKind, CrowdSolver, DecisionKernel, DecisionWeights, SpatialState, SpeedClosure,
    TargetField,
};
use apkin_core::{ActivityGrid, HomogeneousState};

use crate::config::{
    invalid, AdmissibilitySpec, CoefficientSpec, ConfigError, DomainModeSpec, FpbParams,
    HomogeneousModel, HomogeneousParams, NoiseKind, ScenarioConfig, SpatialParams, WeightsSpec,
};

pub enum Prepared {
    Homogeneous {
        model: InteractionModel,
        state: HomogeneousState,
        labels: Vec<String>,
        clamp_negative: bool,
    },
    Discrete {
        model: DiscreteModel,
        state: DiscreteState,
        labels: Vec<String>,
    },
    Spatial {
        solver: CrowdSolver,
        state: SpatialState,
    },
    Fpb {
        rule: PairRule,
        lambda: f64,
        ensemble: Ensemble,
    },
}

pub fn prepare(cfg: &ScenarioConfig) -> Result<Prepared, ConfigError> {
    if let Some(h) = &cfg.homogeneous {
        return homogeneous(cfg, h);
    }
    if let Some(d) = &cfg.discrete {
        let tables = DiscreteTables {
            eta: d.eta.clone(),
            transition: d.transition.clone(),
            macro_rate: d.macro_rate.clone(),
            macro_transition: d.macro_transition.clone(),
            proliferation: d.proliferation.clone(),
            destruction: d.destruction.clone(),
        };
        let model = DiscreteModel::new(d.labels.len(), d.nodes.clone(), tables)
            .map_err(|e| invalid("discrete", e.to_string()))?;
        let state = DiscreteState::new(0.0, d.initial.clone())
            .map_err(|e| invalid("discrete.initial", e.to_string()))?;
        return Ok(Prepared::Discrete {
            model,
            state,
            labels: d.labels.clone(),
        });
    }
    if let Some(s) = &cfg.spatial {
        return spatial(cfg, s);
    }
    if let Some(f) = &cfg.fpb {
        return fpb(cfg, f);
    }
    Err(invalid("scenario.solver", "no solver table"))
}

/// The tumor–immune parameters of a config, library defaults otherwise.
pub fn tumor_immune_params(h: &HomogeneousParams) -> TumorImmuneParams {
    let t = h.tumor_immune.clone().unwrap_or_default();
    TumorImmuneParams {
        encounter_rate: t.encounter_rate,
        progression: t.progression,
        activation_ratio: t.activation_ratio,
        contact_inhibition: t.contact_inhibition,
        tumor_proliferation: t.tumor_proliferation,
        tumor_competition: t.tumor_competition,
        immune_kill: t.immune_kill,
        tumor_aggression: t.tumor_aggression,
        immune_proliferation: t.immune_proliferation,
        immune_relaxation: t.immune_relaxation,
        innate_activity: t.innate_activity,
    }
}

fn homogeneous(cfg: &ScenarioConfig, h: &HomogeneousParams) -> Result<Prepared, ConfigError> {
    let g = &cfg.grid;
    let grid = Arc::new(
        ActivityGrid::uniform(g.lower, g.upper, g.points)
            .map_err(|e| invalid("grid", e.to_string()))?,
    );
    let n = h.initial.len();
    let kernels: Arc<dyn KernelSet> = match h.model {
        HomogeneousModel::TumorImmune => Arc::new(TumorImmune::new(tumor_immune_params(h))),
        HomogeneousModel::Consensus => {
            let c = h.consensus.clone().unwrap_or_default();
            Arc::new(ConsensusKernels {
                subsystems: n,
                rate: c.rate,
                attraction: c.attraction,
                concentration: c.concentration,
                switching: c.switching,
                lower: g.lower,
                upper: g.upper,
            })
        }
        HomogeneousModel::Constant => Arc::new(ConstantKernels {
            subsystems: n,
            rate: h.constant.clone().unwrap_or_default().rate,
        }),
    };
    let mut model = InteractionModel::build(kernels, Arc::clone(&grid))
        .map_err(|e| invalid("homogeneous", e.to_string()))?;
    if h.conservative {
        model = model.conservative_part();
    }

    let values = h
        .initial
        .iter()
        .map(|p| {
            let shape: Vec<f64> = grid
                .nodes()
                .iter()
                .map(|&u| match p.center {
                    Some(c) => (-((u - c) / p.width).powi(2)).exp(),
                    None => 1.0,
                })
                .collect();
            let mass = grid.integrate(&shape);
            shape.iter().map(|v| p.density * v / mass).collect()
        })
        .collect();
    let state = HomogeneousState::new(0.0, grid, values)
        .map_err(|e| invalid("homogeneous.initial", e.to_string()))?;
    Ok(Prepared::Homogeneous {
        model,
        state,
        labels: h.initial.iter().map(|p| p.label.clone()).collect(),
        clamp_negative: h.clamp_negative,
    })
}

fn spatial(cfg: &ScenarioConfig, s: &SpatialParams) -> Result<Prepared, ConfigError> {
    let text = cfg
        .arena_text
        .as_deref()
        .ok_or_else(|| invalid("spatial.arena", "map was not loaded"))?;
    let mut arena =
        Arena::parse(text, s.alpha).map_err(|e| invalid("spatial.arena", e.to_string()))?;
    if s.closed {
        arena = arena.closed();
    }
    let arena = Arc::new(arena);
    let g = &cfg.grid;
    let grid = Arc::new(
        ActivityGrid::uniform(g.lower, g.upper, g.points)
            .map_err(|e| invalid("grid", e.to_string()))?,
    );

    let mut state = SpatialState::zeros(Arc::clone(&arena), Arc::clone(&grid), s.directions);
    // density ρ spread over N_d directions and the activity interval
    let value = s.initial.density / (s.directions as f64 * (g.upper - g.lower));
    let [first, last] = s.initial.cols;
    for c in 0..arena.len() {
        let col = arena.coords(c).0;
        if arena.kind(c) == CellKind::Walkable && (first..=last).contains(&col) {
            for d in 0..s.directions {
                for j in 0..grid.len() {
                    state
                        .set(d, c, j, value)
                        .map_err(|e| invalid("spatial.initial", e.to_string()))?;
                }
            }
        }
    }

    let weights = match s.weights {
        WeightsSpec::Adaptive {
            vacuum_gain,
            stream_gain,
        } => DecisionWeights::Adaptive {
            vacuum_gain,
            stream_gain,
        },
        WeightsSpec::Fixed {
            target,
            vacuum,
            stream,
        } => DecisionWeights::Fixed {
            target,
            vacuum,
            stream,
        },
    };
    weights
        .evaluate(1.0, 0.5)
        .map_err(|e| invalid("spatial.weights", e.to_string()))?;
    let mode = match s.sensory.mode {
        DomainModeSpec::Metric => DomainMode::Metric,
        DomainModeSpec::Topological => DomainMode::Topological,
    };
    let sensory = SensoryConfig::new(
        s.sensory.theta,
        s.sensory.visibility,
        s.sensory.critical_count,
        mode,
    )
    .map_err(|e| invalid("spatial.sensory", e.to_string()))?;
    let kernel = DecisionKernel {
        weights,
        sensory,
        sharpness: s.sharpness,
        target: Arc::new(TargetField::compute(&arena)),
    };
    let solver = CrowdSolver {
        closure: SpeedClosure {
            alpha: arena.alpha(),
            rho_jam: s.rho_jam,
        },
        kernel: Arc::new(kernel),
        eta0: s.eta0,
    };
    Ok(Prepared::Spatial { solver, state })
}

fn coefficient(c: &CoefficientSpec) -> Coefficient {
    match *c {
        CoefficientSpec::Constant(v) => Coefficient::Constant(v),
        CoefficientSpec::Affine { a, b } => Coefficient::Affine { a, b },
    }
}

/// The pair rule of an `[fpb]` table.
pub fn pair_rule(f: &FpbParams) -> Result<PairRule, ConfigError> {
    let domain = Interval::new(f.domain[0], f.domain[1])
        .map_err(|e| invalid("fpb.domain", e.to_string()))?;
    let variance = f.noise.variance;
    let rule = PairRule {
        p: coefficient(&f.p),
        q: coefficient(&f.q),
        noise: match f.noise.law {
            NoiseKind::Uniform => NoiseLaw::Uniform { variance },
            NoiseKind::TwoPoint => NoiseLaw::TwoPoint { variance },
        },
        domain,
        admissibility: match f.admissibility {
            AdmissibilitySpec::Resample => Admissibility::Resample,
            AdmissibilitySpec::Skip => Admissibility::Skip,
        },
    };
    rule.validate().map_err(|e| invalid("fpb", e.to_string()))?;
    Ok(rule)
}

fn fpb(cfg: &ScenarioConfig, f: &FpbParams) -> Result<Prepared, ConfigError> {
    let rule = pair_rule(f)?;
    let [a, b] = f.initial;
    let ensemble = Ensemble::sample(
        f.particles,
        cfg.run.seed,
        &rule.domain,
        uniform_sampler(a, b),
    )
    .map_err(|e| invalid("fpb.initial", e.to_string()))?;
    Ok(Prepared::Fpb {
        rule,
        lambda: f.lambda,
        ensemble,
    })
}
