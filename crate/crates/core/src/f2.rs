//! Cylinder sets in the Bernoulli shift of the free group `F₂ = ⟨a, b⟩`.
//!
//! A configuration is `x: F₂ → {0, 1}` and the shift acts by
//! `(T_g x)(w) = x(g·w)`. A [`CylinderPatternSet`] is given by a finite
//! window `W` of group elements and the explicit list of admissible
//! assignments `W → {0, 1}`, stored as bitmasks (bit `i` is the value at
//! `window[i]`). Windows are kept in shortlex order.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measure::{Fraction, Measure};
use crate::rng::{substream, LabRng};

/// Largest window with an explicit assignment list.
pub const EXPLICIT_WINDOW_CAP: usize = 20;
/// Largest union window a disjointness check may span.
pub const MERGED_WINDOW_CAP: usize = 32;
/// Largest radius accepted by [`search_best`].
pub const SEARCH_RADIUS_CAP: usize = 2;
/// Independent restarts of [`search_best`]; the budget is split among them.
pub const SEARCH_RESTARTS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum F2Error {
    #[error("window of {size} words exceeds the explicit cap {cap}")]
    WindowCap { size: usize, cap: usize },
    #[error("merged window of {size} words exceeds the cap {cap}")]
    MergedWindowCap { size: usize, cap: usize },
    #[error("window contains {word} twice")]
    DuplicateWord { word: ReducedWord },
    #[error("assignment {mask:#x} has bits outside a window of {size} words")]
    AssignmentOutOfRange { mask: u32, size: usize },
    #[error("search radius {radius} exceeds the cap {cap}")]
    RadiusCap { radius: usize, cap: usize },
    #[error("cannot parse {0:?} as a word over a, A, b, B")]
    Parse(String),
}

/// Generator or inverse; `A = a⁻¹`, `B = b⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    A,
    AInv,
    B,
    BInv,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::A, Letter::AInv, Letter::B, Letter::BInv];

    pub fn inverse(self) -> Letter {
        match self {
            Letter::A => Letter::AInv,
            Letter::AInv => Letter::A,
            Letter::B => Letter::BInv,
            Letter::BInv => Letter::B,
        }
    }

    fn symbol(self) -> char {
        match self {
            Letter::A => 'a',
            Letter::AInv => 'A',
            Letter::B => 'b',
            Letter::BInv => 'B',
        }
    }
}

/// Element of `F₂` as a reduced word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ReducedWord(Vec<Letter>);

impl ReducedWord {
    pub fn identity() -> Self {
        ReducedWord(Vec::new())
    }

    pub fn letter(l: Letter) -> Self {
        ReducedWord(vec![l])
    }

    /// Freely reduces an arbitrary letter sequence.
    pub fn reduce(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        ReducedWord(out)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_identity()
    }

    pub fn inverse(&self) -> Self {
        ReducedWord(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn multiply(&self, other: &ReducedWord) -> Self {
        let mut out = self.0.clone();
        let mut rest = other.0.as_slice();
        while let (Some(&last), Some(&first)) = (out.last(), rest.first()) {
            if last != first.inverse() {
                break;
            }
            out.pop();
            rest = &rest[1..];
        }
        out.extend_from_slice(rest);
        ReducedWord(out)
    }

    /// All reduced words of length at most `radius`, in shortlex order.
    pub fn ball(radius: usize) -> Vec<ReducedWord> {
        let mut all = vec![ReducedWord::identity()];
        let mut frontier = vec![ReducedWord::identity()];
        for _ in 0..radius {
            let mut next = Vec::new();
            for w in &frontier {
                for l in Letter::ALL {
                    if w.0.last() != Some(&l.inverse()) {
                        let mut v = w.0.clone();
                        v.push(l);
                        next.push(ReducedWord(v));
                    }
                }
            }
            all.extend(next.iter().cloned());
            frontier = next;
        }
        all
    }
}

impl Ord for ReducedWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for ReducedWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for l in &self.0 {
            write!(f, "{}", l.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for ReducedWord {
    type Err = F2Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "e" {
            return Ok(ReducedWord::identity());
        }
        let letters = s
            .chars()
            .map(|c| match c {
                'a' => Ok(Letter::A),
                'A' => Ok(Letter::AInv),
                'b' => Ok(Letter::B),
                'B' => Ok(Letter::BInv),
                _ => Err(F2Error::Parse(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if letters.is_empty() {
            return Err(F2Error::Parse(s.to_string()));
        }
        Ok(ReducedWord::reduce(letters))
    }
}

impl Serialize for ReducedWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ReducedWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `{x : (x(w))_{w ∈ window} ∈ assignments}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CylinderPatternSet {
    window: Vec<ReducedWord>,
    assignments: Vec<u32>,
}

impl CylinderPatternSet {
    /// Sorts the window into shortlex order, relabels the masks to match,
    /// and deduplicates the assignments.
    pub fn new(window: Vec<ReducedWord>, assignments: Vec<u32>) -> Result<Self, F2Error> {
        let size = window.len();
        if size > EXPLICIT_WINDOW_CAP {
            return Err(F2Error::WindowCap {
                size,
                cap: EXPLICIT_WINDOW_CAP,
            });
        }
        if let Some(&mask) = assignments.iter().find(|&&m| (m as u64) >> size != 0) {
            return Err(F2Error::AssignmentOutOfRange { mask, size });
        }
        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by(|&i, &j| window[i].cmp(&window[j]));
        if let Some(pair) = order.windows(2).find(|p| window[p[0]] == window[p[1]]) {
            return Err(F2Error::DuplicateWord {
                word: window[pair[0]].clone(),
            });
        }
        let sorted: Vec<ReducedWord> = order.iter().map(|&i| window[i].clone()).collect();
        let mut masks: Vec<u32> = assignments
            .iter()
            .map(|&m| {
                order
                    .iter()
                    .enumerate()
                    .fold(0u32, |acc, (new, &old)| acc | (((m >> old) & 1) << new))
            })
            .collect();
        masks.sort_unstable();
        masks.dedup();
        Ok(CylinderPatternSet {
            window: sorted,
            assignments: masks,
        })
    }

    /// `{x : x(w) = v for each (w, v)}`.
    pub fn cylinder(constraints: &[(ReducedWord, bool)]) -> Result<Self, F2Error> {
        let window = constraints.iter().map(|(w, _)| w.clone()).collect();
        let mask = constraints
            .iter()
            .enumerate()
            .fold(0u32, |acc, (i, (_, v))| acc | ((*v as u32) << i));
        Self::new(window, vec![mask])
    }

    pub fn empty() -> Self {
        CylinderPatternSet {
            window: Vec::new(),
            assignments: Vec::new(),
        }
    }

    /// Center 1, every other word of the radius ball 0.
    pub fn local_peak(radius: usize) -> Result<Self, F2Error> {
        // Bit 0 is the identity in shortlex order.
        Self::new(ReducedWord::ball(radius), vec![1])
    }

    pub fn window(&self) -> &[ReducedWord] {
        &self.window
    }

    pub fn assignments(&self) -> &[u32] {
        &self.assignments
    }

    pub fn measure(&self) -> Measure {
        Measure::new(self.assignments.len() as u64, 1u64 << self.window.len())
    }

    /// The same event on a larger window, which must contain this one.
    fn lift(&self, window: &[ReducedWord]) -> Vec<u32> {
        let index: HashMap<&ReducedWord, usize> = window.iter().enumerate().map(|(i, w)| (w, i)).collect();
        let pos: Vec<usize> = self.window.iter().map(|w| index[w]).collect();
        let free: Vec<usize> = (0..window.len()).filter(|i| !pos.contains(i)).collect();
        let mut out = Vec::new();
        for &m in &self.assignments {
            let base = pos
                .iter()
                .enumerate()
                .fold(0u32, |acc, (i, &p)| acc | (((m >> i) & 1) << p));
            for extra in 0u32..(1 << free.len()) {
                let add = free
                    .iter()
                    .enumerate()
                    .fold(0u32, |acc, (i, &p)| acc | (((extra >> i) & 1) << p));
                out.push(base | add);
            }
        }
        out
    }

    /// Union; windows are merged and both events lifted onto the merge.
    pub fn union(&self, other: &Self) -> Result<Self, F2Error> {
        let mut window: Vec<ReducedWord> = self.window.iter().chain(&other.window).cloned().collect();
        window.sort();
        window.dedup();
        if window.len() > EXPLICIT_WINDOW_CAP {
            return Err(F2Error::WindowCap {
                size: window.len(),
                cap: EXPLICIT_WINDOW_CAP,
            });
        }
        let mut masks = self.lift(&window);
        masks.extend(other.lift(&window));
        Self::new(window, masks)
    }
}

/// `T_g B`: window `g·W`, each assignment carried along `w ↦ g·w`.
pub fn translate(set: &CylinderPatternSet, g: &ReducedWord) -> CylinderPatternSet {
    let window: Vec<ReducedWord> = set.window.iter().map(|w| g.multiply(w)).collect();
    CylinderPatternSet::new(window, set.assignments.clone()).expect("translation preserves the window size")
}

fn project(mask: u32, positions: &[usize]) -> u64 {
    positions
        .iter()
        .enumerate()
        .fold(0u64, |acc, (i, &p)| acc | ((((mask >> p) & 1) as u64) << i))
}

/// Whether no configuration lies in both sets.
///
/// Two assignments are compatible iff they agree on the shared words, so
/// the check joins the projections onto the common part of the windows.
pub fn disjoint(b1: &CylinderPatternSet, b2: &CylinderPatternSet) -> Result<bool, F2Error> {
    let index2: HashMap<&ReducedWord, usize> = b2.window.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let mut pos1 = Vec::new();
    let mut pos2 = Vec::new();
    for (i, w) in b1.window.iter().enumerate() {
        if let Some(&j) = index2.get(w) {
            pos1.push(i);
            pos2.push(j);
        }
    }
    let merged = b1.window.len() + b2.window.len() - pos1.len();
    if merged > MERGED_WINDOW_CAP {
        return Err(F2Error::MergedWindowCap {
            size: merged,
            cap: MERGED_WINDOW_CAP,
        });
    }
    let seen: HashSet<u64> = b1.assignments.iter().map(|&m| project(m, &pos1)).collect();
    Ok(!b2.assignments.iter().any(|&m| seen.contains(&project(m, &pos2))))
}

/// The cross configuration `e, a, b, a⁻¹, b⁻¹`.
pub fn cross() -> [ReducedWord; 5] {
    [
        ReducedWord::identity(),
        ReducedWord::letter(Letter::A),
        ReducedWord::letter(Letter::B),
        ReducedWord::letter(Letter::AInv),
        ReducedWord::letter(Letter::BInv),
    ]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairCheck {
    pub g: ReducedWord,
    pub h: ReducedWord,
    pub disjoint: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RokhlinCertificate {
    pub set: CylinderPatternSet,
    #[serde(skip)]
    pub translates: Vec<(ReducedWord, CylinderPatternSet)>,
    pub pairs: Vec<PairCheck>,
    pub verdict: bool,
    #[serde(serialize_with = "as_fraction")]
    pub measure: Measure,
}

fn as_fraction<S: serde::Serializer>(m: &Measure, s: S) -> Result<S::Ok, S::Error> {
    Fraction::from(*m).serialize(s)
}

/// Checks that `B, T_aB, T_bB, T_{a⁻¹}B, T_{b⁻¹}B` are pairwise disjoint.
pub fn verify_rokhlin_family(set: &CylinderPatternSet) -> Result<RokhlinCertificate, F2Error> {
    let translates: Vec<(ReducedWord, CylinderPatternSet)> =
        cross().into_iter().map(|g| (g.clone(), translate(set, &g))).collect();
    let mut pairs = Vec::with_capacity(10);
    for i in 0..translates.len() {
        for j in i + 1..translates.len() {
            pairs.push(PairCheck {
                g: translates[i].0.clone(),
                h: translates[j].0.clone(),
                disjoint: disjoint(&translates[i].1, &translates[j].1)?,
            });
        }
    }
    let verdict = pairs.iter().all(|p| p.disjoint);
    Ok(RokhlinCertificate {
        set: set.clone(),
        translates,
        pairs,
        verdict,
        measure: set.measure(),
    })
}

/// Best-known lower bound for `sup μ(B)` the search is compared against.
pub fn reference_target() -> Measure {
    Measure::new(1, 17)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchReport {
    pub radius: usize,
    pub budget: u64,
    pub seed: u64,
    pub restarts: usize,
    pub certificate: RokhlinCertificate,
    #[serde(serialize_with = "as_fraction")]
    pub target: Measure,
    /// `target − μ(B)` as a float; negative would mean the target is exceeded.
    pub gap_to_target: f64,
}

/// Pairwise compatibility structure between assignments on one window.
///
/// For a difference `d = g⁻¹h` of two cross elements, `B ∩ T_d B ≠ ∅` iff
/// some `σ, τ ∈ B` satisfy `σ(d·w) = τ(w)` for every `w ∈ W ∩ d⁻¹W`. Since
/// the differences are closed under inversion, checking a candidate on the
/// left against every difference covers both orders.
struct Conflicts {
    /// Per difference: positions of `d·w` and of `w`, for `w ∈ W ∩ d⁻¹W`.
    shifts: Vec<(Vec<usize>, Vec<usize>)>,
    /// Per difference: right projections of current members.
    members: Vec<HashMap<u64, Vec<u32>>>,
}

impl Conflicts {
    fn new(window: &[ReducedWord]) -> Self {
        let index: HashMap<&ReducedWord, usize> = window.iter().enumerate().map(|(i, w)| (w, i)).collect();
        let c = cross();
        let mut diffs: Vec<ReducedWord> = Vec::new();
        for g in &c {
            for h in &c {
                let d = g.inverse().multiply(h);
                if !d.is_identity() && !diffs.contains(&d) {
                    diffs.push(d);
                }
            }
        }
        let shifts = diffs
            .iter()
            .map(|d| {
                let mut left = Vec::new();
                let mut right = Vec::new();
                for (j, w) in window.iter().enumerate() {
                    if let Some(&i) = index.get(&d.multiply(w)) {
                        left.push(i);
                        right.push(j);
                    }
                }
                (left, right)
            })
            .collect::<Vec<_>>();
        let members = vec![HashMap::new(); shifts.len()];
        Conflicts { shifts, members }
    }

    /// Members compatible with `sigma` under some difference, or `None`
    /// when `sigma` conflicts with itself.
    fn clashes(&self, sigma: u32) -> Option<Vec<u32>> {
        let mut out = Vec::new();
        for ((left, right), map) in self.shifts.iter().zip(&self.members) {
            let key = project(sigma, left);
            if key == project(sigma, right) {
                return None;
            }
            if let Some(v) = map.get(&key) {
                out.extend_from_slice(v);
            }
        }
        out.sort_unstable();
        out.dedup();
        Some(out)
    }

    fn insert(&mut self, sigma: u32) {
        for ((_, right), map) in self.shifts.iter().zip(&mut self.members) {
            map.entry(project(sigma, right)).or_default().push(sigma);
        }
    }

    fn remove(&mut self, sigma: u32) {
        for ((_, right), map) in self.shifts.iter().zip(&mut self.members) {
            let key = project(sigma, right);
            let v = map.get_mut(&key).expect("member present");
            v.retain(|&m| m != sigma);
            if v.is_empty() {
                map.remove(&key);
            }
        }
    }
}

/// One hill-climbing run from the local peak.
///
/// A move draws a random assignment outside the set: it is added when it
/// clashes with nothing, swapped in for its single clashing member with
/// probability one half, and rejected otherwise.
fn climb(window: &[ReducedWord], steps: u64, rng: &mut LabRng) -> Vec<u32> {
    let mut conflicts = Conflicts::new(window);
    let mut members: HashSet<u32> = HashSet::new();
    conflicts.insert(1);
    members.insert(1);
    let space = 1u64 << window.len();
    for _ in 0..steps {
        let sigma = rng.random_range(0..space) as u32;
        if members.contains(&sigma) {
            continue;
        }
        let Some(clash) = conflicts.clashes(sigma) else {
            continue;
        };
        match clash.as_slice() {
            [] => {}
            [tau] if rng.random::<bool>() => {
                conflicts.remove(*tau);
                members.remove(tau);
            }
            _ => continue,
        }
        conflicts.insert(sigma);
        members.insert(sigma);
    }
    let mut out: Vec<u32> = members.into_iter().collect();
    out.sort_unstable();
    out
}

/// Seeded local search for a large `B` on the radius-`radius` ball whose
/// cross translates are disjoint.
///
/// The budget is split over [`SEARCH_RESTARTS`] independent runs, each on
/// its own seed stream. Every run's result is verified before it competes;
/// the winner has the largest measure, ties going to the lexicographically
/// least assignment list. With `budget = 0` the local peak is returned.
pub fn search_best(radius: usize, budget: u64, seed: u64) -> Result<SearchReport, F2Error> {
    if radius > SEARCH_RADIUS_CAP {
        return Err(F2Error::RadiusCap {
            radius,
            cap: SEARCH_RADIUS_CAP,
        });
    }
    let window = ReducedWord::ball(radius);
    let baseline = verify_rokhlin_family(&CylinderPatternSet::local_peak(radius)?)?;
    let restarts = SEARCH_RESTARTS as u64;
    let results: Vec<RokhlinCertificate> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let steps = budget / restarts + u64::from(r < budget % restarts);
            let mut rng = substream(seed, r);
            let masks = climb(&window, steps, &mut rng);
            let set = CylinderPatternSet::new(window.clone(), masks)?;
            verify_rokhlin_family(&set)
        })
        .collect::<Result<_, _>>()?;
    let best = results
        .into_iter()
        .filter(|c| c.verdict)
        .chain(std::iter::once(baseline))
        .reduce(|best, c| match c.measure.cmp(&best.measure) {
            Ordering::Greater => c,
            Ordering::Equal if c.set.assignments < best.set.assignments => c,
            _ => best,
        })
        .expect("baseline is always present");
    let target = reference_target();
    let gap = crate::measure::to_f64(target) - crate::measure::to_f64(best.measure);
    Ok(SearchReport {
        radius,
        budget,
        seed,
        restarts: SEARCH_RESTARTS,
        certificate: best,
        target,
        gap_to_target: gap,
    })
}
