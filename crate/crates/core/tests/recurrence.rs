mod common;

use ergolab_core::recurrence::{furstenberg_average, joining_estimate, roth_witness, triple_intersection};
use ergolab_core::rng::seeded;
use ergolab_core::{AtomSet, FinitePermutationSystem, Measure};
use proptest::prelude::*;

fn flags(s: &AtomSet) -> Vec<bool> {
    (0..s.universe()).map(|x| s.contains(x)).collect()
}

proptest! {
    #[test]
    fn triple_intersection_matches_forward_iteration(
        n in 1usize..80,
        seed in any::<u64>(),
        density in 0.1f64..0.9,
        i in 0usize..100,
    ) {
        let mut rng = seeded(seed);
        let sys = FinitePermutationSystem::random_cycle(n, &mut rng);
        let [a, a1, a2] = [0; 3].map(|_| AtomSet::random(n, density, &mut rng));
        let count = common::brute_triple_count(sys.map(), &flags(&a), &flags(&a1), &flags(&a2), i);
        prop_assert_eq!(
            triple_intersection(&sys, &a, &a1, &a2, i as i64),
            Measure::new(count, n as u64)
        );
    }

    #[test]
    fn average_matches_sum_of_terms(n in 1usize..60, seed in any::<u64>(), horizon in 1u64..40) {
        let mut rng = seeded(seed);
        let sys = FinitePermutationSystem::random_cycle(n, &mut rng);
        let [a, a1, a2] = [0; 3].map(|_| AtomSet::random(n, 0.5, &mut rng));
        let total: u64 = (1..=horizon as usize)
            .map(|i| common::brute_triple_count(sys.map(), &flags(&a), &flags(&a1), &flags(&a2), i))
            .sum();
        let avg = furstenberg_average(&sys, &a, &a1, &a2, horizon);
        prop_assert_eq!(avg.value, Measure::new(total, horizon * n as u64));
        let times: Vec<i64> = (1..=horizon as i64).collect();
        prop_assert_eq!(joining_estimate(&sys, &times, &a, &a1, &a2), avg.value);
    }

    #[test]
    fn roth_witness_is_least(n in 1usize..60, seed in any::<u64>(), i_max in 1u64..70) {
        let mut rng = seeded(seed);
        let sys = FinitePermutationSystem::random_cycle(n, &mut rng);
        let a = AtomSet::random(n, 0.3, &mut rng);
        let fa = flags(&a);
        let first = (1..=i_max as usize).find(|&i| common::brute_triple_count(sys.map(), &fa, &fa, &fa, i) > 0);
        prop_assert_eq!(roth_witness(&sys, &a, i_max), first.map(|i| i as u64));
    }
}

#[test]
fn negative_times_invert() {
    let sys = FinitePermutationSystem::random_cycle(37, &mut seeded(1));
    let mut rng = seeded(2);
    let [a, a1, a2] = [0; 3].map(|_| AtomSet::random(37, 0.5, &mut rng));
    for i in 1..37 {
        assert_eq!(
            triple_intersection(&sys, &a, &a1, &a2, -i),
            triple_intersection(&sys, &a, &a1, &a2, 37 - i)
        );
    }
}
