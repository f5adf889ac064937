//! Factoring a cyclic permutation into three involutions.
//!
//! Pipeline for an `n`-cycle `T` and tower height `h` (default 11), with
//! `n = qh + r`, `0 ≤ r < h`:
//!
//! 1. Pick `r` isolated roof atoms `y` and swap each with its predecessor
//!    `T⁻¹y`; call this involution `s`. Then `U = s∘T` fixes the `r`
//!    predecessors and runs through the remaining `qh` atoms as one cycle.
//! 2. Cut that cycle into `q` blocks of `h` atoms. `U = T̃∘P₀`, where `P₀`
//!    rotates every block on itself and `T̃` is the identity off the base,
//!    where it is a `q`-cycle of the blocks.
//! 3. Split the base `q`-cycle into two involutions `Ŝ₁Ŝ₂`, keep `Ŝ₁` on the
//!    base and move a copy of `Ŝ₂` up to level 1. Absorbing `Ŝ₂` into the
//!    period gives `P = S₂Ŝ₂P₀`, which still moves level `ℓ` to `ℓ + 1` and has
//!    `P^h = id`.
//! 4. `P = S′∘S″` orbit by orbit (reflections of an `h`-cycle), and
//!    `S = s∘S₁∘S₂` is an involution because the three factors have disjoint
//!    supports.
//!
//! Composition is right to left: `(S∘S′∘S″)(x) = S(S′(S″(x)))`.

use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{DynamicsError, FinitePermutationSystem};

pub const DEFAULT_TOWER_HEIGHT: usize = 11;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvolutionError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("need at least {h} atoms for a tower of height {h}, got {n}")]
    TooSmall { n: usize, h: usize },
    #[error("tower height must be at least 2, got {h}")]
    HeightTooSmall { h: usize },
}

/// Three involutions whose composition `s1∘s2∘s3` is the target permutation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvolutionTriple {
    pub s1: Vec<usize>,
    pub s2: Vec<usize>,
    pub s3: Vec<usize>,
}

impl InvolutionTriple {
    pub fn compose(&self) -> Vec<usize> {
        self.s3.iter().map(|&x| self.s1[self.s2[x]]).collect()
    }

    pub fn verifies(&self, target: &[usize]) -> bool {
        is_involution(&self.s1)
            && is_involution(&self.s2)
            && is_involution(&self.s3)
            && self.compose() == target
    }
}

pub fn is_involution(p: &[usize]) -> bool {
    p.iter().enumerate().all(|(x, &y)| y < p.len() && p[y] == x)
}

/// The moved points of a permutation.
pub fn support(p: &[usize]) -> Vec<usize> {
    p.iter()
        .enumerate()
        .filter(|&(x, &y)| x != y)
        .map(|(x, _)| x)
        .collect()
}

/// Reflections `(S′, S″)` of `{0..k-1}` with `S″(i) = -i` and
/// `S′(i) = 1 - i (mod k)`, so that `S′∘S″` is the rotation `i ↦ i + 1`.
pub fn cycle_two_involutions(k: usize) -> (Vec<usize>, Vec<usize>) {
    assert!(k >= 1, "cycle length must be positive");
    let outer = (0..k).map(|i| (k + 1 - i % k) % k).collect();
    let inner = (0..k).map(|i| (k - i) % k).collect();
    (outer, inner)
}

/// All intermediate objects of the factorization, exposed for inspection.
#[derive(Debug, Clone, Serialize)]
pub struct Factorization {
    pub height: usize,
    /// Blocks of the tower of `s∘T`.
    pub blocks: usize,
    /// Atoms swapped into the top of the tower by the correction involution.
    pub roof: Vec<usize>,
    /// Fixed points of `s∘T` (the partners of the roof atoms).
    pub parked: Vec<usize>,
    /// `levels[ℓ][k]` is level `ℓ` of block `k`.
    pub levels: Vec<Vec<usize>>,
    pub correction: Vec<usize>,
    /// Copy of the first base involution, supported on level 0.
    pub base_first: Vec<usize>,
    /// Copy of the second base involution, supported on level 1.
    pub base_second: Vec<usize>,
    /// The period-`h` permutation `S′∘S″`.
    pub period: Vec<usize>,
    pub triple: InvolutionTriple,
}

/// Factorization with the default tower height.
pub fn factor_three_involutions(
    sys: &FinitePermutationSystem,
) -> Result<InvolutionTriple, InvolutionError> {
    factor_with_height(sys, DEFAULT_TOWER_HEIGHT).map(|f| f.triple)
}

pub fn factor_with_height(
    sys: &FinitePermutationSystem,
    h: usize,
) -> Result<Factorization, InvolutionError> {
    if h < 2 {
        return Err(InvolutionError::HeightTooSmall { h });
    }
    let order = sys.cycle_order()?;
    let n = order.len();
    if n < h {
        return Err(InvolutionError::TooSmall { n, h });
    }
    let q = n / h;
    let r = n % h;

    // Roof atoms sit at positions n-1, n-3, ..., their partners one step
    // earlier; n ≥ h + r > 2r keeps the pairs disjoint and off position 0.
    let mut correction: Vec<usize> = (0..n).collect();
    let mut parked_pos = vec![false; n];
    let mut roof = Vec::with_capacity(r);
    let mut parked = Vec::with_capacity(r);
    for t in 0..r {
        let (lo, hi) = (order[n - 2 - 2 * t], order[n - 1 - 2 * t]);
        correction[lo] = hi;
        correction[hi] = lo;
        parked_pos[n - 2 - 2 * t] = true;
        roof.push(hi);
        parked.push(lo);
    }

    // Cycle of s∘T: the positions that are not parked, in orbit order.
    let cycle: Vec<usize> = (0..n).filter(|&p| !parked_pos[p]).map(|p| order[p]).collect();
    debug_assert_eq!(cycle.len(), q * h);
    let levels: Vec<Vec<usize>> = (0..h)
        .map(|l| (0..q).map(|k| cycle[k * h + l]).collect())
        .collect();

    // Base blocks relabelled k ↦ k + 1 so the last block, which carries the
    // roof, is the fixed point 0 of the reflection i ↦ -i.
    let (outer, inner) = cycle_two_involutions(q);
    let relabel = |k: usize| (k + 1) % q;
    let unlabel = |k: usize| (k + q - 1) % q;

    let mut base_first: Vec<usize> = (0..n).collect();
    let mut base_second: Vec<usize> = (0..n).collect();
    let mut inner_on_base: Vec<usize> = (0..n).collect();
    for k in 0..q {
        let k1 = unlabel(outer[relabel(k)]);
        let k2 = unlabel(inner[relabel(k)]);
        base_first[levels[0][k]] = levels[0][k1];
        inner_on_base[levels[0][k]] = levels[0][k2];
        base_second[levels[1][k]] = levels[1][k2];
    }

    // P₀ rotates each block on itself; P = S₂ ∘ Ŝ₂ ∘ P₀.
    let mut period: Vec<usize> = (0..n).collect();
    for k in 0..q {
        for l in 0..h {
            let rotated = levels[(l + 1) % h][k];
            period[levels[l][k]] = base_second[inner_on_base[rotated]];
        }
    }

    let mut outer_reflection: Vec<usize> = (0..n).collect();
    let mut inner_reflection: Vec<usize> = (0..n).collect();
    let mut orbit = Vec::with_capacity(h);
    for &b in &levels[0] {
        orbit.clear();
        let mut x = b;
        for _ in 0..h {
            orbit.push(x);
            x = period[x];
        }
        debug_assert_eq!(x, b, "period must return after h steps");
        for i in 0..h {
            inner_reflection[orbit[i]] = orbit[(h - i) % h];
            outer_reflection[orbit[i]] = orbit[(h + 1 - i) % h];
        }
    }

    let outer_product: Vec<usize> = (0..n)
        .map(|x| correction[base_first[base_second[x]]])
        .collect();

    Ok(Factorization {
        height: h,
        blocks: q,
        roof,
        parked,
        levels,
        correction,
        base_first,
        base_second,
        period,
        triple: InvolutionTriple {
            s1: outer_product,
            s2: outer_reflection,
            s3: inner_reflection,
        },
    })
}
