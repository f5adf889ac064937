//! Finite measure-preserving systems.
//!
//! A transformation is modelled by a bijection of `n` atoms of mass `1/n`.
//! Tower constructions require the bijection to be a single `n`-cycle, the
//! finite analogue of an aperiodic ergodic map; atoms are then addressed by
//! their *position* `p`, meaning the atom `T^p(0)`.

use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::measure::Measure;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DynamicsError {
    #[error("map is not a bijection of 0..{n}")]
    NotBijection { n: usize },
    #[error("system has no atoms")]
    Empty,
    #[error("system is not a single cycle ({cycles} cycles)")]
    NotSingleCycle { cycles: usize },
    #[error("tower height {h} outside 1..={n}")]
    HeightOutOfRange { h: usize, n: usize },
    #[error("atom {atom} outside 0..{n}")]
    AtomOutOfRange { atom: usize, n: usize },
    #[error("atom set lives on {found} atoms, system has {expected}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("target set for the roof is empty")]
    EmptyTarget,
    #[error("no subset of the target set cuts the cycle into arcs of length divisible by {h}")]
    Infeasible { h: usize },
}

/// Bijection of `n` equal-mass atoms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FinitePermutationSystem {
    map: Vec<usize>,
}

impl FinitePermutationSystem {
    pub fn new(map: Vec<usize>) -> Result<Self, DynamicsError> {
        let n = map.len();
        if n == 0 {
            return Err(DynamicsError::Empty);
        }
        let mut seen = vec![false; n];
        for &y in &map {
            if y >= n || seen[y] {
                return Err(DynamicsError::NotBijection { n });
            }
            seen[y] = true;
        }
        Ok(FinitePermutationSystem { map })
    }

    /// The rotation `x ↦ x + 1 mod n`.
    pub fn rotation(n: usize) -> Self {
        assert!(n > 0, "rotation needs at least one atom");
        FinitePermutationSystem {
            map: (0..n).map(|x| (x + 1) % n).collect(),
        }
    }

    /// Uniformly random single `n`-cycle (Sattolo's algorithm).
    pub fn random_cycle<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        assert!(n > 0, "cycle needs at least one atom");
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut map = vec![0; n];
        for p in 0..n {
            map[order[p]] = order[(p + 1) % n];
        }
        FinitePermutationSystem { map }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn into_map(self) -> Vec<usize> {
        self.map
    }

    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0; self.len()];
        for (x, &y) in self.map.iter().enumerate() {
            inv[y] = x;
        }
        inv
    }

    /// `T^k` as an array, for any integer `k`, in `O(n)` via the cycle decomposition.
    pub fn power(&self, k: i64) -> Vec<usize> {
        let n = self.len();
        let mut out = vec![0; n];
        let mut done = vec![false; n];
        let mut cycle = Vec::new();
        for start in 0..n {
            if done[start] {
                continue;
            }
            cycle.clear();
            let mut x = start;
            while !done[x] {
                done[x] = true;
                cycle.push(x);
                x = self.map[x];
            }
            let len = cycle.len() as i64;
            let shift = k.rem_euclid(len) as usize;
            for (i, &y) in cycle.iter().enumerate() {
                out[y] = cycle[(i + shift) % cycle.len()];
            }
        }
        out
    }

    pub fn cycle_count(&self) -> usize {
        let n = self.len();
        let mut done = vec![false; n];
        let mut cycles = 0;
        for start in 0..n {
            if done[start] {
                continue;
            }
            cycles += 1;
            let mut x = start;
            while !done[x] {
                done[x] = true;
                x = self.map[x];
            }
        }
        cycles
    }

    pub fn is_single_cycle(&self) -> bool {
        self.cycle_order().is_ok()
    }

    /// Atoms in orbit order `0, T(0), T²(0), …`; position `p` holds `T^p(0)`.
    pub fn cycle_order(&self) -> Result<Vec<usize>, DynamicsError> {
        let n = self.len();
        let mut order = Vec::with_capacity(n);
        let mut x = 0;
        loop {
            order.push(x);
            x = self.map[x];
            if x == 0 {
                break;
            }
            if order.len() > n {
                unreachable!("bijection orbit longer than n");
            }
        }
        if order.len() != n {
            return Err(DynamicsError::NotSingleCycle {
                cycles: self.cycle_count(),
            });
        }
        Ok(order)
    }

    pub fn image(&self, set: &AtomSet) -> AtomSet {
        let mut out = AtomSet::empty(self.len());
        for x in set.iter() {
            out.insert(self.map[x]);
        }
        out
    }

    /// Composition `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &FinitePermutationSystem) -> FinitePermutationSystem {
        assert_eq!(self.len(), other.len());
        FinitePermutationSystem {
            map: other.map.iter().map(|&y| self.map[y]).collect(),
        }
    }
}

/// Subset of the atoms of an `n`-atom system; its measure is `|members| / n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AtomSet {
    bits: FixedBitSet,
}

impl AtomSet {
    pub fn empty(n: usize) -> Self {
        AtomSet {
            bits: FixedBitSet::with_capacity(n),
        }
    }

    pub fn full(n: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(n);
        bits.insert_range(..);
        AtomSet { bits }
    }

    pub fn from_members<I>(n: usize, members: I) -> Result<Self, DynamicsError>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut set = AtomSet::empty(n);
        for atom in members {
            if atom >= n {
                return Err(DynamicsError::AtomOutOfRange { atom, n });
            }
            set.insert(atom);
        }
        Ok(set)
    }

    /// Each atom kept independently with probability `density`.
    pub fn random<R: Rng + ?Sized>(n: usize, density: f64, rng: &mut R) -> Self {
        let mut set = AtomSet::empty(n);
        for x in 0..n {
            if rng.random_bool(density) {
                set.insert(x);
            }
        }
        set
    }

    /// Number of atoms of the ambient system.
    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn insert(&mut self, atom: usize) {
        self.bits.insert(atom);
    }

    pub fn contains(&self, atom: usize) -> bool {
        self.bits.contains(atom)
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn members(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn measure(&self) -> Measure {
        Measure::new(self.len() as u64, self.universe() as u64)
    }

    pub fn is_disjoint(&self, other: &AtomSet) -> bool {
        self.bits.is_disjoint(&other.bits)
    }

    pub fn is_subset(&self, other: &AtomSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn union_with(&mut self, other: &AtomSet) {
        self.bits.union_with(&other.bits);
    }

    pub fn intersection(&self, other: &AtomSet) -> AtomSet {
        let mut bits = self.bits.clone();
        bits.intersect_with(&other.bits);
        AtomSet { bits }
    }
}

impl Serialize for AtomSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

/// Base `B` of height `h` with residual `R`: `B, TB, …, T^{h-1}B, R` partition the atoms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Tower {
    pub base: AtomSet,
    pub height: usize,
    pub residual: AtomSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TowerDefect {
    #[error("tower built on {found} atoms, system has {expected}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("height must be positive")]
    ZeroHeight,
    #[error("atom {atom} covered twice")]
    Overlap { atom: usize },
    #[error("atom {atom} not covered")]
    Uncovered { atom: usize },
}

impl Tower {
    pub fn levels(&self, sys: &FinitePermutationSystem) -> Vec<AtomSet> {
        let mut levels = Vec::with_capacity(self.height);
        let mut level = self.base.clone();
        for _ in 0..self.height {
            let next = sys.image(&level);
            levels.push(level);
            level = next;
        }
        levels
    }

    /// Checks that the levels and the residual are pairwise disjoint and cover every atom.
    pub fn validate(&self, sys: &FinitePermutationSystem) -> Result<(), TowerDefect> {
        let n = sys.len();
        for set in [&self.base, &self.residual] {
            if set.universe() != n {
                return Err(TowerDefect::SizeMismatch {
                    expected: n,
                    found: set.universe(),
                });
            }
        }
        if self.height == 0 {
            return Err(TowerDefect::ZeroHeight);
        }
        let mut covered = vec![false; n];
        let mut mark = |atom: usize| {
            if std::mem::replace(&mut covered[atom], true) {
                Err(TowerDefect::Overlap { atom })
            } else {
                Ok(())
            }
        };
        for b in self.base.iter() {
            let mut x = b;
            for _ in 0..self.height {
                mark(x)?;
                x = sys.apply(x);
            }
        }
        for r in self.residual.iter() {
            mark(r)?;
        }
        match covered.iter().position(|&c| !c) {
            Some(atom) => Err(TowerDefect::Uncovered { atom }),
            None => Ok(()),
        }
    }

    pub fn residual_measure(&self) -> Measure {
        self.residual.measure()
    }

    /// Whether the roof returns into the base, `T(R) ⊆ B`.
    pub fn roof_returns_to_base(&self, sys: &FinitePermutationSystem) -> bool {
        sys.image(&self.residual).is_subset(&self.base)
    }
}

/// Rokhlin tower of height `h` on a single cycle: the base is every position
/// `≡ 0 (mod h)` that still has `h` positions ahead of it, the residual is the
/// last `n mod h` positions.
pub fn rokhlin_tower(sys: &FinitePermutationSystem, h: usize) -> Result<Tower, DynamicsError> {
    let order = sys.cycle_order()?;
    let n = order.len();
    if h == 0 || h > n {
        return Err(DynamicsError::HeightOutOfRange { h, n });
    }
    let full = n / h * h;
    let base = AtomSet::from_members(n, (0..full).step_by(h).map(|p| order[p]))?;
    let residual = AtomSet::from_members(n, order[full..].iter().copied())?;
    Ok(Tower {
        base,
        height: h,
        residual,
    })
}

/// Tower of height `h` whose residual lies inside `target`.
///
/// Residual positions `p_0 < … < p_{m-1}` must leave gaps that are multiples
/// of `h` all the way around the cycle, which forces `p_i ≡ p_0 + i (mod h)`
/// and `m ≡ n (mod h)`. The smallest admissible `m` is used; for each start
/// `p_0 ∈ target` in increasing order the remaining positions are matched
/// greedily (earliest admissible position), which finds a solution whenever
/// one with that start exists. If `h | n` the residual is empty.
pub fn lehrer_weiss_tower(
    sys: &FinitePermutationSystem,
    h: usize,
    target: &AtomSet,
) -> Result<Tower, DynamicsError> {
    let order = sys.cycle_order()?;
    let n = order.len();
    if target.universe() != n {
        return Err(DynamicsError::SizeMismatch {
            expected: n,
            found: target.universe(),
        });
    }
    if target.is_empty() {
        return Err(DynamicsError::EmptyTarget);
    }
    if h == 0 || h > n {
        return Err(DynamicsError::HeightOutOfRange { h, n });
    }
    let in_target: Vec<bool> = order.iter().map(|&a| target.contains(a)).collect();
    let residual_positions = lehrer_weiss_positions(n, h, &in_target).ok_or(DynamicsError::Infeasible { h })?;
    Ok(tower_from_residual_positions(&order, h, &residual_positions))
}

/// Residual positions for [`lehrer_weiss_tower`], `None` when infeasible.
/// `allowed[p]` marks the positions the residual may use.
pub fn lehrer_weiss_positions(n: usize, h: usize, allowed: &[bool]) -> Option<Vec<usize>> {
    let m = n % h;
    if m == 0 {
        return Some(Vec::new());
    }
    for p0 in (0..n).filter(|&p| allowed[p]) {
        let mut picked = vec![p0];
        let mut want = (p0 + 1) % h;
        let mut p = p0 + 1;
        while picked.len() < m && p < n {
            if allowed[p] && p % h == want {
                picked.push(p);
                want = (want + 1) % h;
            }
            p += 1;
        }
        if picked.len() == m {
            return Some(picked);
        }
    }
    None
}

fn tower_from_residual_positions(order: &[usize], h: usize, residual: &[usize]) -> Tower {
    let n = order.len();
    let mut base = AtomSet::empty(n);
    let mut res = AtomSet::empty(n);
    if residual.is_empty() {
        for p in (0..n).step_by(h) {
            base.insert(order[p]);
        }
    } else {
        for (i, &r) in residual.iter().enumerate() {
            res.insert(order[r]);
            let next = residual[(i + 1) % residual.len()];
            let gap = (next + n - r - 1) % n;
            for k in (0..gap).step_by(h) {
                base.insert(order[(r + 1 + k) % n]);
            }
        }
    }
    Tower {
        base,
        height: h,
        residual: res,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn positions(sys: &FinitePermutationSystem, set: &AtomSet) -> Vec<usize> {
        let order = sys.cycle_order().unwrap();
        let mut p: Vec<usize> = (0..order.len()).filter(|&p| set.contains(order[p])).collect();
        p.sort();
        p
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(FinitePermutationSystem::new(vec![0, 0]).is_err());
        assert!(FinitePermutationSystem::new(vec![1, 2]).is_err());
        assert_eq!(FinitePermutationSystem::new(vec![]), Err(DynamicsError::Empty));
    }

    #[test]
    fn rokhlin_twelve_eleven() {
        let sys = FinitePermutationSystem::rotation(12);
        let t = rokhlin_tower(&sys, 11).unwrap();
        t.validate(&sys).unwrap();
        assert_eq!(t.base.members(), vec![0]);
        assert_eq!(t.residual.members(), vec![11]);
        assert!(t.roof_returns_to_base(&sys));
    }

    #[test]
    fn rokhlin_ten_three() {
        let sys = FinitePermutationSystem::rotation(10);
        let t = rokhlin_tower(&sys, 3).unwrap();
        t.validate(&sys).unwrap();
        assert_eq!(t.base.members(), vec![0, 3, 6]);
        assert_eq!(t.residual.members(), vec![9]);
        assert_eq!(t.residual_measure(), Measure::new(1, 10));
    }

    #[test]
    fn rokhlin_height_one_is_everything() {
        let sys = FinitePermutationSystem::random_cycle(17, &mut seeded(3));
        let t = rokhlin_tower(&sys, 1).unwrap();
        assert_eq!(t.base.len(), 17);
        assert!(t.residual.is_empty());
        t.validate(&sys).unwrap();
    }

    #[test]
    fn rokhlin_rejects_bad_input() {
        let two_cycles = FinitePermutationSystem::new(vec![1, 0, 3, 2]).unwrap();
        assert_eq!(
            rokhlin_tower(&two_cycles, 2),
            Err(DynamicsError::NotSingleCycle { cycles: 2 })
        );
        let sys = FinitePermutationSystem::rotation(5);
        assert_eq!(rokhlin_tower(&sys, 6), Err(DynamicsError::HeightOutOfRange { h: 6, n: 5 }));
        assert!(rokhlin_tower(&sys, 0).is_err());
    }

    #[test]
    fn lehrer_weiss_examples() {
        let sys = FinitePermutationSystem::rotation(7);
        let y = AtomSet::from_members(7, [0]).unwrap();
        let t = lehrer_weiss_tower(&sys, 3, &y).unwrap();
        t.validate(&sys).unwrap();
        assert_eq!(t.residual.members(), vec![0]);

        let sys = FinitePermutationSystem::rotation(8);
        let y = AtomSet::from_members(8, [0, 4]).unwrap();
        let t = lehrer_weiss_tower(&sys, 3, &y).unwrap();
        t.validate(&sys).unwrap();
        assert_eq!(t.residual.members(), vec![0, 4]);

        let y = AtomSet::from_members(8, [0]).unwrap();
        assert_eq!(lehrer_weiss_tower(&sys, 3, &y), Err(DynamicsError::Infeasible { h: 3 }));
        assert_eq!(
            lehrer_weiss_tower(&sys, 3, &AtomSet::empty(8)),
            Err(DynamicsError::EmptyTarget)
        );
    }

    #[test]
    fn lehrer_weiss_follows_cycle_positions() {
        let sys = FinitePermutationSystem::random_cycle(11, &mut seeded(9));
        let order = sys.cycle_order().unwrap();
        let y = AtomSet::from_members(11, [order[2], order[5], order[7], order[8]]).unwrap();
        let t = lehrer_weiss_tower(&sys, 4, &y).unwrap();
        t.validate(&sys).unwrap();
        assert!(t.residual.is_subset(&y));
        assert_eq!(positions(&sys, &t.residual), vec![2, 7, 8]);
    }

    #[test]
    fn power_matches_iteration() {
        let sys = FinitePermutationSystem::new(vec![2, 0, 1, 4, 3, 5]).unwrap();
        let p = sys.power(-4);
        for x in 0..6 {
            let mut y = x;
            for _ in 0..4 {
                y = sys.inverse()[y];
            }
            assert_eq!(p[x], y);
        }
        assert_eq!(sys.cycle_count(), 3);
    }
}
