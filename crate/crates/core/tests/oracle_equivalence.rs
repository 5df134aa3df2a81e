mod oracle;

use std::sync::Arc;

use apkin_core::discrete::discrete_rhs;
use apkin_core::homogeneous::tumor_immune::{TumorImmune, TumorImmuneParams};
use apkin_core::homogeneous::{rhs, InteractionModel};
use apkin_core::{ActivityGrid, HomogeneousState};
use oracle::instances::{discrete_instance, homogeneous_instance, with_continuum};

const TOL: f64 = 1e-12;
const INSTANCES: u64 = 100;

fn magnitude(rows: &[Vec<f64>]) -> f64 {
    rows.iter().flatten().fold(1.0, |m, v| m.max(v.abs()))
}

#[test]
fn homogeneous_rhs_matches_naive_loops() {
    let mut worst: f64 = 0.0;
    for seed in 0..INSTANCES {
        let (kernels, state) = homogeneous_instance(seed);
        let model = InteractionModel::build(kernels.clone(), state.shared_grid()).unwrap();
        let fast = rhs(&state, &model).unwrap();
        let slow = with_continuum(kernels.as_ref(), state.grid(), &state.moments(), |c| {
            oracle::homogeneous_rhs(c, state.values())
        });
        let gap = oracle::max_gap(&fast, &slow) / magnitude(&slow);
        assert!(gap <= TOL, "seed {seed}: relative gap {gap:e}");
        worst = worst.max(gap);
    }
    println!("worst relative gap {worst:e}");
}

#[test]
fn discrete_rhs_matches_naive_loops() {
    let mut worst: f64 = 0.0;
    for seed in 0..INSTANCES {
        let inst = discrete_instance(seed);
        let fast = discrete_rhs(&inst.state, &inst.model).unwrap();
        let slow = oracle::discrete_rhs(&inst.oracle_tables(), &inst.state.f, inst.scale());
        let gap = oracle::max_gap(&fast, &slow) / magnitude(&slow);
        assert!(gap <= TOL, "seed {seed}: relative gap {gap:e}");
        worst = worst.max(gap);
    }
    println!("worst relative gap {worst:e}");
}

#[test]
fn instances_cover_every_term() {
    // the random draws must exercise macro, birth/death and drift terms
    let (mut macro_, mut births, mut drift) = (0, 0, 0);
    for seed in 0..INSTANCES {
        let (kernels, state) = homogeneous_instance(seed);
        let model = InteractionModel::build(kernels, state.shared_grid()).unwrap();
        macro_ += model.has_macro() as usize;
        births += model.has_birth_death() as usize;
        drift += model.has_drift() as usize;
    }
    assert!(
        macro_ >= 20 && births >= 20 && drift >= 20,
        "{macro_} {births} {drift}"
    );
}

#[test]
fn tumor_immune_rhs_matches_naive_loops() {
    let grid = Arc::new(ActivityGrid::uniform(0.0, 1.0, 9).unwrap());
    let kernels = TumorImmune::new(TumorImmuneParams::default());
    let model = InteractionModel::build(Arc::new(kernels.clone()), grid.clone()).unwrap();
    let state =
        HomogeneousState::from_fn(grid, 2, |i, u| 0.5 + 0.3 * ((i + 1) as f64 * u * 5.0).sin())
            .unwrap();
    let fast = rhs(&state, &model).unwrap();
    let slow = with_continuum(&kernels, state.grid(), &state.moments(), |c| {
        oracle::homogeneous_rhs(c, state.values())
    });
    let gap = oracle::max_gap(&fast, &slow) / magnitude(&slow);
    assert!(gap <= TOL, "relative gap {gap:e}");
}
