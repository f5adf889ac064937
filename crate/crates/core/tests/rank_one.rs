mod common;

use common::GeometricTower;
use ergolab_core::rank_one::{
    correlation, correlation_exact, correlation_series, resolving_stage, CorrelationValue, LevelSet, RankOneSpec,
};
use ergolab_core::recurrence::triple_intersection;
use ergolab_core::rng::seeded;
use ergolab_core::{AtomSet, FinitePermutationSystem, Measure};
use proptest::prelude::*;
use rand::Rng;

fn random_spec(rng: &mut impl Rng, stages: usize) -> RankOneSpec {
    let h1 = rng.random_range(1..5);
    let mut h = h1;
    let mut spacers = Vec::new();
    for _ in 1..stages {
        let s = rng.random_range(0..=h + 3);
        spacers.push(s);
        h = 2 * h + s;
    }
    RankOneSpec::new(h1, spacers).unwrap()
}

#[test]
fn correlations_match_geometric_cutting_and_stacking() {
    let mut rng = seeded(17);
    for _ in 0..60 {
        let stages = rng.random_range(2..8);
        let spec = random_spec(&mut rng, stages);
        let geo = GeometricTower::build(spec.h1, &spec.spacers, stages);
        let heights = spec.all_heights().unwrap();
        for (i, level) in geo.levels.iter().enumerate() {
            assert_eq!(level.len() as u64, heights[i]);
        }
        let stage = rng.random_range(1..=stages.min(3));
        let h = heights[stage - 1];
        let mut levels: Vec<u64> = (0..h).filter(|_| rng.random_bool(0.4)).collect();
        if levels.is_empty() {
            levels.push(0);
        }
        let set = LevelSet::new(&spec, stage, levels.clone()).unwrap();
        for n in 0..heights[stages - 1] {
            let lib = correlation(&spec, &set, n, stages).unwrap();
            match geo.correlation(stage, &levels, n) {
                Some(m) => assert_eq!(lib, CorrelationValue::Exact(m), "n={n} spec={spec:?}"),
                None => assert_eq!(lib, CorrelationValue::Unstable),
            }
        }
    }
}

#[test]
fn series_and_pointwise_agree() {
    let spec = RankOneSpec::new(3, vec![3, 10, 25, 60, 140]).unwrap();
    let set = LevelSet::new(&spec, 2, vec![0, 4, 5]).unwrap();
    let series = correlation_series(&spec, &set, 120).unwrap();
    for n in 0..=120 {
        assert_eq!(series.value(n), Some(correlation_exact(&spec, &set, n).unwrap()));
    }
}

#[test]
fn half_measure_return_at_each_height() {
    // s_j ≥ h_j keeps the right column's copy from landing in the spacers.
    let base = RankOneSpec::new(2, vec![2, 7, 20, 50, 130]).unwrap();
    let spec = base.extended(2, 1).unwrap();
    let heights = spec.all_heights().unwrap();
    for j in 1..=base.stage_count() {
        let set = LevelSet::new(&spec, j, vec![0, heights[j - 1] - 1]).unwrap();
        let got = correlation_exact(&spec, &set, heights[j - 1]).unwrap();
        assert_eq!(got, set.measure(&spec) / 2, "stage {j}");
    }
}

#[test]
fn tower_as_a_cycle_gives_the_same_counts() {
    let spec = RankOneSpec::new(2, vec![1, 6, 15, 40]).unwrap();
    let set = LevelSet::new(&spec, 2, vec![1, 3]).unwrap();
    let stage = resolving_stage(&spec, &set, 30).unwrap();
    let height = spec.height(stage).unwrap() as usize;
    let copies = set.lift(&spec, stage).unwrap();
    let sys = FinitePermutationSystem::rotation(height);
    let a = AtomSet::from_members(height, copies.iter().map(|&c| c as usize)).unwrap();
    let full = AtomSet::full(height);
    for n in 0..=30i64 {
        let on_cycle = triple_intersection(&sys, &a, &a, &full, n);
        let scaled = on_cycle * Measure::from_integer(height as u64) * spec.width(stage);
        assert_eq!(scaled, correlation_exact(&spec, &set, n as u64).unwrap(), "n={n}");
    }
}

proptest! {
    #[test]
    fn lifting_preserves_measure(seed in any::<u64>(), stages in 2usize..9) {
        let mut rng = seeded(seed);
        let spec = random_spec(&mut rng, stages);
        let h1 = spec.h1;
        let levels: Vec<u64> = (0..h1).filter(|_| rng.random_bool(0.5)).collect();
        let set = LevelSet::new(&spec, 1, levels).unwrap();
        for target in 1..=stages {
            let copies = set.lift(&spec, target).unwrap();
            prop_assert_eq!(spec.width(target) * copies.len() as u64, set.measure(&spec));
        }
    }
}
