//! Multiple recurrence on finite systems.
//!
//! `μ(A ∩ TⁱA₁ ∩ T²ⁱA₂)` counts atoms `x` with `x ∈ A`, `T⁻ⁱx ∈ A₁` and
//! `T⁻²ⁱx ∈ A₂`, divided by `n`. Sums over `i` run from 1 and are accumulated
//! as integer counts, so every average is an exact rational.

use std::io;

use num_traits::Zero;
use serde::Serialize;

use crate::dynamics::{AtomSet, FinitePermutationSystem};
use crate::measure::{Fraction, Measure};

fn check_sizes(sys: &FinitePermutationSystem, sets: &[&AtomSet]) {
    for s in sets {
        assert_eq!(s.universe(), sys.len(), "atom set built for a different system");
    }
}

fn triple_count(a: &AtomSet, a1: &AtomSet, a2: &AtomSet, back1: &[usize], back2: &[usize]) -> u64 {
    a.iter()
        .filter(|&x| a1.contains(back1[x]) && a2.contains(back2[x]))
        .count() as u64
}

/// `μ(A ∩ TⁱA₁ ∩ T²ⁱA₂)`.
pub fn triple_intersection(
    sys: &FinitePermutationSystem,
    a: &AtomSet,
    a1: &AtomSet,
    a2: &AtomSet,
    i: i64,
) -> Measure {
    check_sizes(sys, &[a, a1, a2]);
    let count = triple_count(a, a1, a2, &sys.power(-i), &sys.power(-2 * i));
    Measure::new(count, sys.len() as u64)
}

/// `(1/N) Σ_{i=1}^{N} μ(A ∩ TⁱA₁ ∩ T²ⁱA₂)` with the product `μ(A)μ(A₁)μ(A₂)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TripleAverage {
    pub horizon: u64,
    #[serde(serialize_with = "as_fraction")]
    pub value: Measure,
    #[serde(serialize_with = "as_fraction")]
    pub product: Measure,
}

fn as_fraction<S: serde::Serializer>(m: &Measure, s: S) -> Result<S::Ok, S::Error> {
    Fraction::from(*m).serialize(s)
}

pub fn furstenberg_average(
    sys: &FinitePermutationSystem,
    a: &AtomSet,
    a1: &AtomSet,
    a2: &AtomSet,
    horizon: u64,
) -> TripleAverage {
    assert!(horizon >= 1, "horizon must be positive");
    check_sizes(sys, &[a, a1, a2]);
    let inv = sys.inverse();
    let n = sys.len();
    // back1 = T^{-i}, back2 = T^{-2i}, advanced incrementally.
    let mut back1: Vec<usize> = (0..n).collect();
    let mut back2: Vec<usize> = (0..n).collect();
    let mut total = 0u64;
    for _ in 1..=horizon {
        for x in 0..n {
            back1[x] = inv[back1[x]];
            back2[x] = inv[inv[back2[x]]];
        }
        total += triple_count(a, a1, a2, &back1, &back2);
    }
    TripleAverage {
        horizon,
        value: Measure::new(total, horizon * n as u64),
        product: a.measure() * a1.measure() * a2.measure(),
    }
}

/// Least `i ∈ [1, i_max]` with `μ(A ∩ TⁱA ∩ T²ⁱA) > 0`.
pub fn roth_witness(sys: &FinitePermutationSystem, a: &AtomSet, i_max: u64) -> Option<u64> {
    check_sizes(sys, &[a]);
    let inv = sys.inverse();
    let n = sys.len();
    let mut back1: Vec<usize> = (0..n).collect();
    let mut back2: Vec<usize> = (0..n).collect();
    for i in 1..=i_max {
        for x in 0..n {
            back1[x] = inv[back1[x]];
            back2[x] = inv[inv[back2[x]]];
        }
        if a.iter().any(|x| a.contains(back1[x]) && a.contains(back2[x])) {
            return Some(i);
        }
    }
    None
}

/// Average of the triple intersections over an explicit list of times.
pub fn joining_estimate(
    sys: &FinitePermutationSystem,
    times: &[i64],
    a: &AtomSet,
    a1: &AtomSet,
    a2: &AtomSet,
) -> Measure {
    assert!(!times.is_empty(), "need at least one time");
    let sum = times
        .iter()
        .map(|&i| triple_intersection(sys, a, a1, a2, i))
        .fold(Measure::zero(), |acc, m| acc + m);
    sum / times.len() as u64
}

/// One entry of a [`mix2_profile`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProfileEntry {
    pub i: i64,
    pub j: i64,
    pub value: Measure,
}

/// `μ(A ∩ TⁱA₁ ∩ TʲA₂)` for each requested pair.
pub fn mix2_profile(
    sys: &FinitePermutationSystem,
    a: &AtomSet,
    a1: &AtomSet,
    a2: &AtomSet,
    pairs: &[(i64, i64)],
) -> Vec<ProfileEntry> {
    check_sizes(sys, &[a, a1, a2]);
    pairs
        .iter()
        .map(|&(i, j)| {
            let count = triple_count(a, a1, a2, &sys.power(-i), &sys.power(-j));
            ProfileEntry {
                i,
                j,
                value: Measure::new(count, sys.len() as u64),
            }
        })
        .collect()
}

/// CSV with columns `i,j,numerator,denominator`.
pub fn write_profile_csv<W: io::Write>(entries: &[ProfileEntry], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["i", "j", "numerator", "denominator"])?;
    for e in entries {
        w.write_record([
            e.i.to_string(),
            e.j.to_string(),
            e.value.numer().to_string(),
            e.value.denom().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-`i` terms `μ(A ∩ TⁱA₁ ∩ T²ⁱA₂)` for `i = 1..=horizon`, as CSV
/// with columns `i,numerator,denominator`.
pub fn write_terms_csv<W: io::Write>(
    sys: &FinitePermutationSystem,
    a: &AtomSet,
    a1: &AtomSet,
    a2: &AtomSet,
    horizon: u64,
    out: W,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["i", "numerator", "denominator"])?;
    for i in 1..=horizon as i64 {
        let m = triple_intersection(sys, a, a1, a2, i);
        w.write_record([i.to_string(), m.numer().to_string(), m.denom().to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn set(n: usize, members: &[usize]) -> AtomSet {
        AtomSet::from_members(n, members.iter().copied()).unwrap()
    }

    #[test]
    fn zero_time_and_full_period() {
        let sys = FinitePermutationSystem::rotation(9);
        let a = set(9, &[0, 1, 4]);
        let b = set(9, &[1, 4, 5]);
        let c = set(9, &[4, 8]);
        let direct = Measure::new(1, 9);
        assert_eq!(triple_intersection(&sys, &a, &b, &c, 0), direct);
        assert_eq!(triple_intersection(&sys, &a, &b, &c, 9), direct);
    }

    #[test]
    fn no_progression_with_gap_three() {
        let sys = FinitePermutationSystem::rotation(9);
        let a = set(9, &[0, 1]);
        assert_eq!(triple_intersection(&sys, &a, &a, &a, 3), Measure::zero());
    }

    #[test]
    fn average_with_full_sets_is_measure_of_a() {
        let sys = FinitePermutationSystem::random_cycle(31, &mut seeded(4));
        let a = AtomSet::random(31, 0.4, &mut seeded(5));
        let full = AtomSet::full(31);
        let avg = furstenberg_average(&sys, &a, &full, &full, 17);
        assert_eq!(avg.value, a.measure());
    }

    #[test]
    fn single_point_on_z5() {
        let sys = FinitePermutationSystem::rotation(5);
        let a = set(5, &[0]);
        let avg = furstenberg_average(&sys, &a, &a, &a, 5);
        assert_eq!(avg.value, Measure::new(1, 25));
    }

    #[test]
    fn witnesses() {
        let sys = FinitePermutationSystem::rotation(9);
        assert_eq!(roth_witness(&sys, &set(9, &[0, 1, 2]), 9), Some(1));
        assert_eq!(roth_witness(&sys, &set(9, &[0, 1]), 9), Some(9));
        assert_eq!(roth_witness(&sys, &set(9, &[0, 1]), 8), None);
        assert_eq!(roth_witness(&sys, &AtomSet::full(9), 3), Some(1));
    }

    #[test]
    fn joining_over_single_time_and_full_period() {
        let sys = FinitePermutationSystem::rotation(13);
        let mut rng = seeded(11);
        let a = AtomSet::random(13, 0.5, &mut rng);
        let b = AtomSet::random(13, 0.5, &mut rng);
        let c = AtomSet::random(13, 0.5, &mut rng);
        assert_eq!(
            joining_estimate(&sys, &[0], &a, &b, &c),
            a.intersection(&b).intersection(&c).measure()
        );
        let times: Vec<i64> = (1..=13).collect();
        assert_eq!(
            joining_estimate(&sys, &times, &a, &b, &c),
            furstenberg_average(&sys, &a, &b, &c, 13).value
        );
    }

    #[test]
    fn profile_diagonal_reduces_to_two_sets() {
        let sys = FinitePermutationSystem::random_cycle(23, &mut seeded(2));
        let mut rng = seeded(3);
        let a = AtomSet::random(23, 0.5, &mut rng);
        let b = AtomSet::random(23, 0.5, &mut rng);
        let c = AtomSet::random(23, 0.5, &mut rng);
        let both = b.intersection(&c);
        let prof = mix2_profile(&sys, &a, &b, &c, &[(0, 0), (4, 4), (3, 7)]);
        assert_eq!(prof[0].value, a.intersection(&both).measure());
        let shifted = sys.power(4);
        let image = AtomSet::from_members(23, both.iter().map(|x| shifted[x])).unwrap();
        assert_eq!(prof[1].value, a.intersection(&image).measure());
        let mut buf = Vec::new();
        write_profile_csv(&prof, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 4);
    }
}
