//! Brute-force reference implementations shared by the integration and
//! acceptance tests. Each one recomputes a library result from first
//! principles by a different route than the library uses.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use ergolab_core::f2::{CylinderPatternSet, ReducedWord};
use ergolab_core::Measure;

// ---------------------------------------------------------------- towers

/// Residual position sets `R` of size `n mod h` on a cycle of length `n`
/// such that every arc between consecutive residual positions has length
/// divisible by `h`, as bitmasks over positions.
pub fn valid_residual_masks(n: usize, h: usize) -> Vec<u32> {
    let m = n % h;
    if m == 0 {
        return vec![0];
    }
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != m {
            continue;
        }
        let pos: Vec<usize> = (0..n).filter(|&p| mask >> p & 1 == 1).collect();
        let ok = (0..m).all(|i| {
            let a = pos[i];
            let b = pos[(i + 1) % m];
            let gap = (b + n - a - 1) % n;
            gap.is_multiple_of(h)
        });
        if ok {
            out.push(mask);
        }
    }
    out
}

/// `feasible[Y]` iff some valid residual set is contained in `Y`.
pub fn feasible_targets(n: usize, h: usize) -> Vec<bool> {
    let mut f = vec![false; 1 << n];
    for r in valid_residual_masks(n, h) {
        f[r as usize] = true;
    }
    for bit in 0..n {
        for mask in 0..(1usize << n) {
            if mask >> bit & 1 == 1 && f[mask ^ (1 << bit)] {
                f[mask] = true;
            }
        }
    }
    f
}

/// Counts how often each atom is hit by the levels `T^i(base)` and the
/// residual, walking the map forward from every base atom.
pub fn cover_counts(map: &[usize], base: &[usize], height: usize, residual: &[usize]) -> Vec<usize> {
    let mut hits = vec![0usize; map.len()];
    for &b in base {
        let mut x = b;
        for _ in 0..height {
            hits[x] += 1;
            x = map[x];
        }
    }
    for &r in residual {
        hits[r] += 1;
    }
    hits
}

// ------------------------------------------------------------ recurrence

/// `|{x ∈ A : x ∈ TⁱA₁, x ∈ T²ⁱA₂}|` by pushing `A₁` and `A₂` forward.
pub fn brute_triple_count(map: &[usize], a: &[bool], a1: &[bool], a2: &[bool], i: usize) -> u64 {
    let n = map.len();
    let push = |set: &[bool], steps: usize| {
        let mut image = vec![false; n];
        for y in 0..n {
            if set[y] {
                let mut x = y;
                for _ in 0..steps {
                    x = map[x];
                }
                image[x] = true;
            }
        }
        image
    };
    let t1 = push(a1, i);
    let t2 = push(a2, 2 * i);
    (0..n).filter(|&x| a[x] && t1[x] && t2[x]).count() as u64
}

// -------------------------------------------------------------- rank one

/// Cutting and stacking on explicit intervals of the line.
///
/// Lengths are integers in units of the finest width used, so a stage-`j`
/// level of a tower built to stage `J` has length `2^(J-j)`.
pub struct GeometricTower {
    pub stages: usize,
    /// `levels[j-1][ℓ]` is the interval `[start, end)` of stage-`j` level `ℓ`.
    pub levels: Vec<Vec<(u64, u64)>>,
}

impl GeometricTower {
    pub fn build(h1: u64, spacers: &[u64], stages: usize) -> Self {
        let unit = 1u64 << (stages - 1);
        let mut levels = vec![(0..h1).map(|l| (l * unit, (l + 1) * unit)).collect::<Vec<_>>()];
        // Spacer material is drawn from a region far to the right.
        let mut fresh = (h1 + 1) * unit;
        for j in 1..stages {
            let prev = &levels[j - 1];
            let mut next = Vec::new();
            for &(a, b) in prev {
                next.push((a, a + (b - a) / 2));
            }
            for &(a, b) in prev {
                next.push((a + (b - a) / 2, b));
            }
            let w = (prev[0].1 - prev[0].0) / 2;
            for _ in 0..spacers[j - 1] {
                next.push((fresh, fresh + w));
                fresh += unit;
            }
            levels.push(next);
        }
        GeometricTower { stages, levels }
    }

    pub fn unit(&self) -> u64 {
        1u64 << (self.stages - 1)
    }

    /// `μ(TⁿA ∩ A)` for `A` a union of stage-`stage` levels, or `None` when
    /// some piece of `A` leaves the top tower within `n` steps.
    pub fn correlation(&self, stage: usize, set_levels: &[u64], n: u64) -> Option<Measure> {
        let set: Vec<(u64, u64)> = set_levels.iter().map(|&l| self.levels[stage - 1][l as usize]).collect();
        let top = &self.levels[self.stages - 1];
        let inside = |iv: (u64, u64)| set.iter().any(|&(a, b)| a <= iv.0 && iv.1 <= b);
        let mut overlap = 0u64;
        for (i, &piece) in top.iter().enumerate() {
            if !inside(piece) {
                continue;
            }
            let target = *top.get(i + n as usize)?;
            for &(a, b) in &set {
                let lo = a.max(target.0);
                let hi = b.min(target.1);
                if hi > lo {
                    overlap += hi - lo;
                }
            }
        }
        Some(Measure::new(overlap, self.unit()))
    }
}

// ------------------------------------------------------------ ledrappier

/// Laurent polynomial over GF(2) in two variables, by its support.
pub type Poly = HashSet<(i64, i64)>;

pub fn poly_mul(p: &Poly, q: &Poly) -> Poly {
    let mut out = Poly::new();
    for &(a, b) in p {
        for &(c, d) in q {
            let t = (a + c, b + d);
            if !out.remove(&t) {
                out.insert(t);
            }
        }
    }
    out
}

/// `1 + X + X⁻¹ + Y + Y⁻¹`.
pub fn harmonic_operator() -> Poly {
    [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)].into_iter().collect()
}

/// `L^e` by `e − 1` plain multiplications.
pub fn poly_pow(p: &Poly, e: u32) -> Poly {
    let mut out = p.clone();
    for _ in 1..e {
        out = poly_mul(&out, p);
    }
    out
}

/// Whether `Σ_{(dx,dy) ∈ p} f(x+dx, y+dy) = 0` wherever every row it touches exists.
pub fn annihilates(p: &Poly, width: usize, height: usize, cells: &[u8]) -> bool {
    let reach = p.iter().map(|t| t.1.abs()).max().unwrap_or(0);
    let w = width as i64;
    (reach..height as i64 - reach).all(|y| {
        (0..w).all(|x| {
            p.iter().fold(0u8, |acc, &(dx, dy)| {
                acc ^ cells[((y + dy) * w + (x + dx).rem_euclid(w)) as usize]
            }) == 0
        })
    })
}

// ---------------------------------------------------------------- mosaics

/// Number of mosaics by direct enumeration: the first uncovered cell in
/// row-major order becomes blue or the corner of a red tile; the blue
/// cells of each complete covering are then checked pairwise.
pub fn brute_mosaic_count(w: usize, h: usize, k: usize, corners_touch: bool) -> u64 {
    fn fill(grid: &mut Vec<u8>, w: usize, h: usize, k: usize, corners: bool) -> u64 {
        let Some(i) = grid.iter().position(|&c| c == 0) else {
            return ok(grid, w, h, corners) as u64;
        };
        let (x, y) = (i % w, i / w);
        grid[i] = 1;
        let mut total = fill(grid, w, h, k, corners);
        grid[i] = 0;
        let fits = x + k <= w && y + k <= h && (0..k).all(|dy| (0..k).all(|dx| grid[(y + dy) * w + x + dx] == 0));
        if fits {
            for dy in 0..k {
                for dx in 0..k {
                    grid[(y + dy) * w + x + dx] = 2;
                }
            }
            total += fill(grid, w, h, k, corners);
            for dy in 0..k {
                for dx in 0..k {
                    grid[(y + dy) * w + x + dx] = 0;
                }
            }
        }
        total
    }
    fn ok(grid: &[u8], w: usize, h: usize, corners: bool) -> bool {
        let blues: Vec<(i64, i64)> = (0..w * h)
            .filter(|&i| grid[i] == 1)
            .map(|i| ((i % w) as i64, (i / w) as i64))
            .collect();
        for (i, a) in blues.iter().enumerate() {
            for b in &blues[i + 1..] {
                let (dx, dy) = ((a.0 - b.0).abs(), (a.1 - b.1).abs());
                let touch = if corners { dx <= 1 && dy <= 1 } else { dx + dy == 1 };
                if touch {
                    return false;
                }
            }
        }
        true
    }
    fill(&mut vec![0u8; w * h], w, h, k, corners_touch)
}

// -------------------------------------------------------------------- F₂

/// Disjointness by enumerating every assignment of the merged window.
pub fn brute_disjoint(b1: &CylinderPatternSet, b2: &CylinderPatternSet) -> bool {
    let mut merged: Vec<ReducedWord> = b1.window().iter().chain(b2.window()).cloned().collect();
    merged.sort();
    merged.dedup();
    assert!(merged.len() <= 22, "oracle window too large");
    let index: HashMap<&ReducedWord, usize> = merged.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let restrict = |set: &CylinderPatternSet, x: u32| -> u32 {
        set.window()
            .iter()
            .enumerate()
            .fold(0u32, |acc, (i, w)| acc | ((x >> index[w]) & 1) << i)
    };
    let s1: HashSet<u32> = b1.assignments().iter().copied().collect();
    let s2: HashSet<u32> = b2.assignments().iter().copied().collect();
    !(0u32..(1 << merged.len())).any(|x| s1.contains(&restrict(b1, x)) && s2.contains(&restrict(b2, x)))
}
