mod common;

use ergolab_core::dynamics::{lehrer_weiss_positions, lehrer_weiss_tower, rokhlin_tower};
use ergolab_core::rng::seeded;
use ergolab_core::{AtomSet, DynamicsError, FinitePermutationSystem, Measure, Tower};
use proptest::prelude::*;

fn cover_ok(sys: &FinitePermutationSystem, tower: &Tower) -> bool {
    common::cover_counts(sys.map(), &tower.base.members(), tower.height, &tower.residual.members())
        .iter()
        .all(|&c| c == 1)
}

#[test]
fn lehrer_weiss_feasibility_matches_exhaustive_search() {
    for n in 1..=12 {
        for h in 1..=n {
            let feasible = common::feasible_targets(n, h);
            for mask in 1usize..(1 << n) {
                let allowed: Vec<bool> = (0..n).map(|p| mask >> p & 1 == 1).collect();
                let got = lehrer_weiss_positions(n, h, &allowed);
                assert_eq!(got.is_some(), feasible[mask], "n={n} h={h} Y={mask:b}");
                if let Some(pos) = got {
                    assert_eq!(pos.len(), n % h);
                    assert!(pos.iter().all(|&p| allowed[p]));
                }
            }
        }
    }
}

#[test]
fn towers_on_a_shuffled_cycle() {
    let n = 11;
    let sys = FinitePermutationSystem::random_cycle(n, &mut seeded(8));
    let order = sys.cycle_order().unwrap();
    for h in 1..=n {
        let feasible = common::feasible_targets(n, h);
        for mask in 1usize..(1 << n) {
            let target = AtomSet::from_members(n, (0..n).filter(|&p| mask >> p & 1 == 1).map(|p| order[p])).unwrap();
            match lehrer_weiss_tower(&sys, h, &target) {
                Ok(t) => {
                    assert!(feasible[mask]);
                    assert!(cover_ok(&sys, &t));
                    assert_eq!(t.validate(&sys).is_ok(), true);
                    assert!(t.residual.is_subset(&target));
                }
                Err(DynamicsError::Infeasible { .. }) => assert!(!feasible[mask]),
                Err(e) => panic!("unexpected {e}"),
            }
        }
    }
}

#[test]
fn validator_agrees_with_cover_counts_on_corrupted_towers() {
    let mut rng = seeded(21);
    for n in 2..=30 {
        let sys = FinitePermutationSystem::random_cycle(n, &mut rng);
        for h in 1..=n {
            let good = rokhlin_tower(&sys, h).unwrap();
            assert!(good.validate(&sys).is_ok() && cover_ok(&sys, &good));
            for atom in 0..n {
                let mut bad = good.clone();
                if bad.residual.contains(atom) {
                    bad.base.insert(atom);
                } else {
                    bad.residual.insert(atom);
                }
                assert_eq!(bad.validate(&sys).is_ok(), cover_ok(&sys, &bad), "n={n} h={h} atom={atom}");
            }
        }
    }
}

proptest! {
    #[test]
    fn rokhlin_tower_partitions(n in 1usize..400, h_frac in 0.0f64..1.0, seed in any::<u64>()) {
        let h = 1 + ((n - 1) as f64 * h_frac) as usize;
        let sys = FinitePermutationSystem::random_cycle(n, &mut seeded(seed));
        let t = rokhlin_tower(&sys, h).unwrap();
        prop_assert!(t.validate(&sys).is_ok());
        prop_assert!(cover_ok(&sys, &t));
        prop_assert_eq!(t.residual_measure(), Measure::new((n % h) as u64, n as u64));
    }

    #[test]
    fn lehrer_weiss_residual_stays_in_target(n in 2usize..300, h in 1usize..40, seed in any::<u64>()) {
        let h = h.min(n);
        let mut rng = seeded(seed);
        let sys = FinitePermutationSystem::random_cycle(n, &mut rng);
        let target = AtomSet::random(n, 0.6, &mut rng);
        prop_assume!(!target.is_empty());
        if let Ok(t) = lehrer_weiss_tower(&sys, h, &target) {
            prop_assert!(t.validate(&sys).is_ok());
            prop_assert!(t.residual.is_subset(&target));
            prop_assert_eq!(t.residual.len(), n % h);
        }
    }
}
