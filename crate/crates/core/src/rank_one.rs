//! Rank-one cutting and stacking with two columns per stage.
//!
//! Stage 1 is a tower of `h1` levels of width 1. Stage `j + 1` cuts every
//! level of stage `j` into a left and a right half, stacks the right column
//! on top of the left one and puts `s_j` spacer levels above the right
//! column, so `h_{j+1} = 2 h_j + s_j` and each stage-`j` level has width
//! `2^{-(j-1)}`. The total mass grows without bound, which models an
//! infinite invariant measure; sets of interest are finite unions of levels.
//!
//! A stage-`j` level `ℓ` splits into the stage-`J` levels
//! `ℓ + Σ_{i ∈ S} h_i` for `S ⊆ {j, …, J-1}`. Inside the stage-`J` tower the
//! map is `level ↦ level + 1`, so `μ(TⁿA ∩ A)` is an exact count of level
//! pairs as long as no copy of `A` is pushed past the top of the tower.
//! When some copy is, the value depends on later stages and is reported as
//! [`CorrelationValue::Unstable`].

use std::collections::HashSet;
use std::io;

use serde::Serialize;
use thiserror::Error;

use crate::measure::Measure;

/// An interval is kept by [`design_spacers`] only if its half-length is at
/// least this many times the current height.
pub const INTERVAL_DOMINANCE: u64 = 10;

/// Default cap on the number of elements [`gap_intervals`] reads.
pub const DEFAULT_GAP_SCAN_LIMIT: usize = 50_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RankOneError {
    #[error("initial height must be positive")]
    ZeroHeight,
    #[error("stage {stage} requested but the construction has {available} stages")]
    StageOutOfRange { stage: usize, available: usize },
    #[error("level {level} outside stage {stage} (height {height})")]
    LevelOutOfRange { stage: usize, level: u64, height: u64 },
    #[error("time {n} exceeds the stage-{stage} height {height}")]
    TimeBeyondTower { n: u64, stage: usize, height: u64 },
    #[error("height overflow at stage {stage}")]
    Overflow { stage: usize },
    #[error("interval {index} violates the ordering/length preconditions")]
    BadIntervals { index: usize },
    #[error("no interval can host the next height; first rejected interval is {index}")]
    TooDense { index: usize },
    #[error("sequence is not strictly increasing at element {index}")]
    NotIncreasing { index: usize },
    #[error("sequence exhausted after {found} usable gaps")]
    GapsExhausted { found: usize },
    #[error("no stage up to {stages} resolves time {n}")]
    Unresolved { n: u64, stages: usize },
}

/// Parameters of the construction: initial height and one spacer count per stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankOneSpec {
    pub h1: u64,
    pub spacers: Vec<u64>,
}

impl RankOneSpec {
    pub fn new(h1: u64, spacers: Vec<u64>) -> Result<Self, RankOneError> {
        if h1 == 0 {
            return Err(RankOneError::ZeroHeight);
        }
        let spec = RankOneSpec { h1, spacers };
        spec.all_heights()?;
        Ok(spec)
    }

    /// Stages whose heights are determined: `spacers.len() + 1`.
    pub fn stage_count(&self) -> usize {
        self.spacers.len() + 1
    }

    pub fn all_heights(&self) -> Result<Vec<u64>, RankOneError> {
        heights(self, self.stage_count())
    }

    pub fn height(&self, stage: usize) -> Result<u64, RankOneError> {
        Ok(*heights(self, stage)?.last().expect("stage >= 1"))
    }

    /// Appends `extra` stages with `s_j = factor · h_j`.
    pub fn extended(&self, extra: usize, factor: u64) -> Result<Self, RankOneError> {
        let mut spacers = self.spacers.clone();
        let mut h = self.height(self.stage_count())?;
        for _ in 0..extra {
            let s = h
                .checked_mul(factor)
                .ok_or(RankOneError::Overflow { stage: spacers.len() + 2 })?;
            spacers.push(s);
            h = next_height(h, s, spacers.len() + 1)?;
        }
        RankOneSpec::new(self.h1, spacers)
    }

    /// Width of one stage-`j` level.
    pub fn width(&self, stage: usize) -> Measure {
        assert!((1..=64).contains(&stage), "stage out of range");
        Measure::new(1, 1u64 << (stage - 1))
    }
}

fn next_height(h: u64, s: u64, stage: usize) -> Result<u64, RankOneError> {
    h.checked_mul(2)
        .and_then(|d| d.checked_add(s))
        .ok_or(RankOneError::Overflow { stage })
}

/// `h_1, …, h_J` from `h_{j+1} = 2 h_j + s_j`.
pub fn heights(spec: &RankOneSpec, stages: usize) -> Result<Vec<u64>, RankOneError> {
    if stages == 0 || stages > spec.stage_count() {
        return Err(RankOneError::StageOutOfRange {
            stage: stages,
            available: spec.stage_count(),
        });
    }
    let mut out = Vec::with_capacity(stages);
    let mut h = spec.h1;
    out.push(h);
    for (j, &s) in spec.spacers.iter().take(stages - 1).enumerate() {
        h = next_height(h, s, j + 2)?;
        out.push(h);
    }
    Ok(out)
}

/// Geometry of one stage of the tower.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TowerStage {
    pub stage: usize,
    pub height: u64,
    #[serde(serialize_with = "serialize_measure")]
    pub width: Measure,
    /// Half-open range of level indices added as spacers at this stage.
    pub spacer_levels: (u64, u64),
}

fn serialize_measure<S: serde::Serializer>(m: &Measure, s: S) -> Result<S::Ok, S::Error> {
    crate::measure::Fraction::from(*m).serialize(s)
}

impl TowerStage {
    pub fn is_spacer(&self, level: u64) -> bool {
        (self.spacer_levels.0..self.spacer_levels.1).contains(&level)
    }

    pub fn total_measure(&self) -> Measure {
        self.width * self.height
    }
}

pub fn tower_stage(spec: &RankOneSpec, stage: usize) -> Result<TowerStage, RankOneError> {
    let hs = heights(spec, stage)?;
    let height = hs[stage - 1];
    let spacer_levels = if stage == 1 {
        (height, height)
    } else {
        (2 * hs[stage - 2], height)
    };
    Ok(TowerStage {
        stage,
        height,
        width: spec.width(stage),
        spacer_levels,
    })
}

/// A finite union of levels of one stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelSet {
    pub stage: usize,
    /// Sorted, distinct level indices.
    pub levels: Vec<u64>,
}

impl LevelSet {
    pub fn new(spec: &RankOneSpec, stage: usize, mut levels: Vec<u64>) -> Result<Self, RankOneError> {
        let height = spec.height(stage)?;
        levels.sort_unstable();
        levels.dedup();
        if let Some(&level) = levels.iter().find(|&&l| l >= height) {
            return Err(RankOneError::LevelOutOfRange { stage, level, height });
        }
        Ok(LevelSet { stage, levels })
    }

    pub fn measure(&self, spec: &RankOneSpec) -> Measure {
        spec.width(self.stage) * self.levels.len() as u64
    }

    /// Stage-`target` levels making up this set, sorted.
    pub fn lift(&self, spec: &RankOneSpec, target: usize) -> Result<Vec<u64>, RankOneError> {
        if target < self.stage {
            return Err(RankOneError::StageOutOfRange {
                stage: target,
                available: spec.stage_count(),
            });
        }
        let hs = heights(spec, target)?;
        let mut copies = self.levels.clone();
        for &h in &hs[self.stage - 1..target - 1] {
            let shifted: Vec<u64> = copies.iter().map(|&l| l + h).collect();
            copies.extend(shifted);
        }
        copies.sort_unstable();
        Ok(copies)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationValue {
    Exact(Measure),
    /// Part of the set leaves the working tower; use a later stage.
    Unstable,
}

impl CorrelationValue {
    pub fn exact(self) -> Option<Measure> {
        match self {
            CorrelationValue::Exact(m) => Some(m),
            CorrelationValue::Unstable => None,
        }
    }
}

/// `μ(TⁿA ∩ A)` computed inside the stage-`stage` tower.
pub fn correlation(
    spec: &RankOneSpec,
    set: &LevelSet,
    n: u64,
    stage: usize,
) -> Result<CorrelationValue, RankOneError> {
    let height = spec.height(stage)?;
    if n > height {
        return Err(RankOneError::TimeBeyondTower { n, stage, height });
    }
    let copies = set.lift(spec, stage)?;
    Ok(count_shifted(&copies, n, height, spec.width(stage)))
}

fn count_shifted(copies: &[u64], n: u64, height: u64, width: Measure) -> CorrelationValue {
    match copies.last() {
        None => return CorrelationValue::Exact(Measure::from_integer(0)),
        Some(&top) if top + n >= height => return CorrelationValue::Unstable,
        _ => {}
    }
    let members: HashSet<u64> = copies.iter().copied().collect();
    let hits = copies.iter().filter(|&&l| members.contains(&(l + n))).count();
    CorrelationValue::Exact(width * hits as u64)
}

/// Smallest stage at which a set of stage `set.stage` resolves every time up to `n_max`.
pub fn resolving_stage(spec: &RankOneSpec, set: &LevelSet, n_max: u64) -> Result<usize, RankOneError> {
    let hs = spec.all_heights()?;
    // Highest copy at stage J is top + Σ_{i=j0}^{J-1} h_i.
    let mut top = set.levels.last().copied().unwrap_or(0);
    for stage in set.stage..=hs.len() {
        if stage > set.stage {
            top += hs[stage - 2];
        }
        if top + n_max < hs[stage - 1] {
            return Ok(stage);
        }
    }
    Err(RankOneError::Unresolved {
        n: n_max,
        stages: hs.len(),
    })
}

/// Exact correlation at the first resolving stage.
pub fn correlation_exact(spec: &RankOneSpec, set: &LevelSet, n: u64) -> Result<Measure, RankOneError> {
    let stage = resolving_stage(spec, set, n)?;
    match correlation(spec, set, n, stage)? {
        CorrelationValue::Exact(m) => Ok(m),
        CorrelationValue::Unstable => unreachable!("resolving stage keeps every copy inside"),
    }
}

/// `n ↦ μ(TⁿA ∩ A)` for `0 ≤ n ≤ n_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrelationSeries {
    pub stage: usize,
    pub entries: Vec<(u64, Measure)>,
}

impl CorrelationSeries {
    pub fn value(&self, n: u64) -> Option<Measure> {
        self.entries.get(n as usize).filter(|e| e.0 == n).map(|e| e.1)
    }

    /// CSV with columns `n,numerator,denominator`.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "numerator", "denominator"])?;
        for (n, m) in &self.entries {
            w.write_record([n.to_string(), m.numer().to_string(), m.denom().to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Whole correlation sequence up to `n_max` at the first resolving stage,
/// by counting pairwise differences of the lifted copies.
pub fn correlation_series(
    spec: &RankOneSpec,
    set: &LevelSet,
    n_max: u64,
) -> Result<CorrelationSeries, RankOneError> {
    let stage = resolving_stage(spec, set, n_max)?;
    let copies = set.lift(spec, stage)?;
    let mut counts = vec![0u64; n_max as usize + 1];
    for (i, &lo) in copies.iter().enumerate() {
        for &hi in &copies[i..] {
            let d = hi - lo;
            if d > n_max {
                break;
            }
            counts[d as usize] += 1;
        }
    }
    let width = spec.width(stage);
    Ok(CorrelationSeries {
        stage,
        entries: counts
            .into_iter()
            .enumerate()
            .map(|(n, c)| (n as u64, width * c))
            .collect(),
    })
}

/// `n = Σ sign_i · h_{index_i} + remainder` with strictly decreasing indices
/// and a leading `+`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignedDecomposition {
    /// `(sign, index into the heights list)`, sign is `+1` or `-1`.
    pub terms: Vec<(i8, usize)>,
    pub remainder: i64,
}

impl SignedDecomposition {
    pub fn value(&self, heights: &[u64]) -> i64 {
        self.terms
            .iter()
            .map(|&(s, j)| s as i64 * heights[j] as i64)
            .sum::<i64>()
            + self.remainder
    }
}

/// Largest `m` with `2^{-m} μ(A) ≥ c`, `None` when even `m = 0` fails.
pub fn max_terms(c: Measure, mu_a: Measure) -> Option<usize> {
    if c > mu_a {
        return None;
    }
    if c == Measure::from_integer(0) {
        return Some(usize::MAX);
    }
    let mut m = 0;
    let mut bound = mu_a;
    while bound / 2 >= c {
        bound /= 2;
        m += 1;
    }
    Some(m)
}

/// Searches for `n = h_{j₁} ± h_{j₂} ± … ± h_{j_m} + r`, `j₁ > … > j_m`,
/// with `m` bounded by `2^{-m} μ(A) ≥ c` and `|r| ≤ remainder_bound`.
///
/// Fewest terms first; among those, terms closest to the running remainder
/// are tried first, so the greedy descent is found when it works.
pub fn nonmixing_decomposition(
    n: u64,
    heights: &[u64],
    c: Measure,
    mu_a: Measure,
    remainder_bound: u64,
) -> Option<SignedDecomposition> {
    let m_max = max_terms(c, mu_a)?.min(heights.len());
    let n = n as i64;
    let bound = remainder_bound as i64;
    let mut terms = Vec::new();
    for m in 0..=m_max {
        if search_terms(n, heights, heights.len(), m, bound, &mut terms) {
            return Some(SignedDecomposition {
                remainder: n - terms.iter().map(|&(s, j): &(i8, usize)| s as i64 * heights[j] as i64).sum::<i64>(),
                terms,
            });
        }
    }
    None
}

fn search_terms(
    rest: i64,
    heights: &[u64],
    below: usize,
    left: usize,
    bound: i64,
    terms: &mut Vec<(i8, usize)>,
) -> bool {
    if left == 0 {
        return rest.abs() <= bound;
    }
    // Remaining terms shrink geometrically only when heights do, so bound
    // the reachable magnitude by the sum of the largest allowed heights.
    let reach: i64 = heights[..below].iter().rev().take(left).map(|&h| h as i64).sum();
    if rest.abs() > reach + bound {
        return false;
    }
    let mut candidates: Vec<(i64, i8, usize)> = Vec::new();
    for j in (left - 1..below).rev() {
        let h = heights[j] as i64;
        let signs: &[i8] = if terms.is_empty() { &[1] } else { &[1, -1] };
        for &s in signs {
            candidates.push(((rest - s as i64 * h).abs(), s, j));
        }
    }
    candidates.sort_by_key(|&(d, s, j)| (d, std::cmp::Reverse(j), std::cmp::Reverse(s)));
    for (_, s, j) in candidates {
        terms.push((s, j));
        if search_terms(rest - s as i64 * heights[j] as i64, heights, j, left - 1, bound, terms) {
            return true;
        }
        terms.pop();
    }
    false
}

/// Output of [`design_spacers`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DesignedSpec {
    pub spec: RankOneSpec,
    /// Indices of the intervals that received a height, in stage order
    /// (`selected[i]` hosts `h_{i+2}`).
    pub selected: Vec<usize>,
    pub intervals: Vec<(u64, u64)>,
}

impl DesignedSpec {
    /// The intervals that host a height.
    pub fn hosting_intervals(&self) -> Vec<(u64, u64)> {
        self.selected.iter().map(|&i| self.intervals[i]).collect()
    }

    pub fn in_hosting_interval(&self, n: u64) -> bool {
        self.hosting_intervals().iter().any(|&(a, b)| a <= n && n <= b)
    }
}

/// Chooses spacers so that successive heights land on the (floored)
/// midpoints of a sparse subsequence of `intervals`.
///
/// An interval `[a, b]` hosts the next height when its half-length is at
/// least [`INTERVAL_DOMINANCE`] times the current height, which also makes
/// `s_j = mid − 2h_j ≥ h_j`. Other intervals are skipped.
pub fn design_spacers(h1: u64, intervals: &[(u64, u64)]) -> Result<DesignedSpec, RankOneError> {
    if h1 == 0 {
        return Err(RankOneError::ZeroHeight);
    }
    for (i, &(a, b)) in intervals.iter().enumerate() {
        if a > b {
            return Err(RankOneError::BadIntervals { index: i });
        }
        if i > 0 {
            let (pa, pb) = intervals[i - 1];
            if a <= pb || b - a <= pb - pa {
                return Err(RankOneError::BadIntervals { index: i });
            }
        }
    }
    let mut h = h1;
    let mut spacers = Vec::new();
    let mut selected = Vec::new();
    let mut first_rejected = None;
    for (i, &(a, b)) in intervals.iter().enumerate() {
        let half = (b - a) / 2;
        let mid = a + half;
        let dominant = h
            .checked_mul(INTERVAL_DOMINANCE)
            .is_some_and(|need| half >= need);
        if !dominant {
            first_rejected.get_or_insert(i);
            continue;
        }
        let s = mid - 2 * h;
        debug_assert!(s >= h);
        spacers.push(s);
        selected.push(i);
        h = mid;
    }
    if selected.is_empty() && !intervals.is_empty() {
        return Err(RankOneError::TooDense {
            index: first_rejected.unwrap_or(0),
        });
    }
    Ok(DesignedSpec {
        spec: RankOneSpec::new(h1, spacers)?,
        selected,
        intervals: intervals.to_vec(),
    })
}

/// `count` disjoint intervals lying strictly inside gaps of the increasing
/// sequence `seq`, with doubling lengths.
///
/// For a gap holding `g` integers the candidate interval has length `⌊g/4⌋`
/// and is centred in the gap; it is taken when that length is at least twice
/// the previously taken one (and at least 1). At most `scan_limit` elements
/// are read.
pub fn gap_intervals<I>(seq: I, count: usize, scan_limit: usize) -> Result<Vec<(u64, u64)>, RankOneError>
where
    I: IntoIterator<Item = u64>,
{
    let mut out = Vec::with_capacity(count);
    let mut iter = seq.into_iter().take(scan_limit).enumerate();
    let Some((_, mut prev)) = iter.next() else {
        return Err(RankOneError::GapsExhausted { found: 0 });
    };
    let mut need = 1u64;
    for (index, next) in iter {
        if out.len() == count {
            break;
        }
        if next <= prev {
            return Err(RankOneError::NotIncreasing { index });
        }
        let gap = next - prev - 1;
        let len = gap / 4;
        if len >= need {
            let centre = prev + (next - prev) / 2;
            let a = centre - len / 2;
            out.push((a, a + len));
            need = len.saturating_mul(2);
        }
        prev = next;
    }
    if out.len() < count {
        return Err(RankOneError::GapsExhausted { found: out.len() });
    }
    Ok(out)
}
