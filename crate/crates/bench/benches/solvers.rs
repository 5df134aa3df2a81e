use std::f64::consts::PI;
use std::hint::black_box;
use std::sync::Arc;

use apkin_core::discrete::{discrete_rhs, DiscreteModel, DiscreteState};
use apkin_core::domains::{DomainMode, SensoryConfig};
use apkin_core::fpb::{
    mc_step, uniform_sampler, Admissibility, Coefficient, Ensemble, Interval, NoiseLaw, PairRule,
};
use apkin_core::homogeneous::kernels::ConsensusKernels;
use apkin_core::homogeneous::tumor_immune::{TumorImmune, TumorImmuneParams};
use apkin_core::homogeneous::{rhs, InteractionModel};
use apkin_core::spatial::{
    Arena, CellKind, CrowdSolver, DecisionKernel, DecisionWeights, SpatialState, SpeedClosure,
    TargetField,
};
use apkin_core::{ActivityGrid, HomogeneousState};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn homogeneous(c: &mut Criterion) {
    let mut group = c.benchmark_group("homogeneous_rhs");
    for m in [21, 51, 101] {
        let grid = Arc::new(ActivityGrid::uniform(0.0, 1.0, m).unwrap());
        let model = InteractionModel::build(
            Arc::new(TumorImmune::new(TumorImmuneParams::default())),
            grid.clone(),
        )
        .unwrap();
        let state =
            HomogeneousState::from_fn(grid, 2, |i, u| 1.0 + 0.3 * ((i + 1) as f64 * u).sin())
                .unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, _| {
            b.iter(|| rhs(black_box(&state), &model).unwrap())
        });
    }
    group.finish();
}

fn discrete(c: &mut Criterion) {
    let mut group = c.benchmark_group("discrete_rhs");
    for m in [11, 21, 41] {
        let grid = Arc::new(ActivityGrid::uniform(0.0, 1.0, m).unwrap());
        let model =
            InteractionModel::build(Arc::new(ConsensusKernels::new(2)), grid.clone()).unwrap();
        let discrete = DiscreteModel::induced(&model).unwrap();
        let state = DiscreteState::from_homogeneous(
            &HomogeneousState::from_fn(grid, 2, |_, u| 1.0 + u).unwrap(),
        );
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, _| {
            b.iter(|| discrete_rhs(black_box(&state), &discrete).unwrap())
        });
    }
    group.finish();
}

fn corridor() -> String {
    let mut rows = vec!["#".repeat(40)];
    for r in 1..9 {
        let end = if r == 4 || r == 5 { 'E' } else { '#' };
        rows.push(format!("#{}{end}", ".".repeat(38)));
    }
    rows.push("#".repeat(40));
    format!("40 10 1.0\n{}\n", rows.join("\n"))
}

fn spatial(c: &mut Criterion) {
    let arena = Arc::new(Arena::parse(&corridor(), 0.9).unwrap());
    let grid = Arc::new(ActivityGrid::uniform(0.0, 1.0, 3).unwrap());
    let mut state = SpatialState::zeros(arena.clone(), grid, 8);
    for cell in 0..arena.len() {
        if arena.kind(cell) == CellKind::Walkable && arena.coords(cell).0 <= 12 {
            for d in 0..8 {
                for j in 0..3 {
                    state.set(d, cell, j, 0.25).unwrap();
                }
            }
        }
    }
    let solver = CrowdSolver {
        closure: SpeedClosure::new(arena.alpha()),
        kernel: Arc::new(DecisionKernel {
            weights: DecisionWeights::Adaptive {
                vacuum_gain: 0.3,
                stream_gain: 0.5,
            },
            sensory: SensoryConfig::new(PI / 2.0, 2.5, 6.0, DomainMode::Topological).unwrap(),
            sharpness: 3.0,
            target: Arc::new(TargetField::compute(&arena)),
        }),
        eta0: 1.0,
    };
    c.bench_function("crowd_step_40x10", |b| {
        b.iter(|| solver.step(black_box(&state), 0.5).unwrap())
    });
}

fn fpb(c: &mut Criterion) {
    let rule = PairRule {
        p: Coefficient::Constant(0.25),
        q: Coefficient::Constant(0.5),
        noise: NoiseLaw::Uniform { variance: 0.04 },
        domain: Interval::new(-1.0, 1.0).unwrap(),
        admissibility: Admissibility::Resample,
    };
    let mut ensemble =
        Ensemble::sample(10_000, 1, &rule.domain, uniform_sampler(-1.0, 1.0)).unwrap();
    c.bench_function("mc_step_1e4", |b| {
        b.iter(|| mc_step(&mut ensemble, &rule, 1.0, 0.1).unwrap())
    });
}

criterion_group!(benches, homogeneous, discrete, spatial, fpb);
criterion_main!(benches);
