//! Mosaics of red `k×k` squares and blue `1×1` squares with no two blue
//! squares touching.
//!
//! Touching means sharing an edge or a corner by default
//! ([`Adjacency::King`]); [`Adjacency::Rook`] only forbids shared edges.
//! Boards have free boundaries.
//!
//! Counting sweeps the board cell by cell in row-major order. The interface
//! between processed and unprocessed cells is a [`TransferState`]: for each
//! column, the state of its most recently processed cell (blue, or red with
//! the number of rows the covering tile still extends below), plus whether
//! the cell diagonally up-left of the cursor is blue.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::rng::seeded;

/// Widest board [`count_mosaics`] accepts.
pub const COUNT_WIDTH_CAP: usize = 24;
/// Widest board [`generate_mosaic`] accepts.
pub const GENERATE_WIDTH_CAP: usize = 64;

#[derive(Debug, Error)]
pub enum MosaicError {
    #[error("tile side must be 2 or 3, got {k}")]
    BadTileSide { k: usize },
    #[error("board must be at least 1x1")]
    EmptyBoard,
    #[error("width {w} exceeds the cap {cap}")]
    WidthCap { w: usize, cap: usize },
    #[error("spins are defined for k = 2 only, got k = {k}")]
    SpinsNeedTwo { k: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub enum Adjacency {
    /// Edge or corner contact.
    #[default]
    King,
    /// Edge contact only.
    Rook,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Cell {
    Red(u32),
    Blue,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mosaic {
    pub width: usize,
    pub height: usize,
    pub k: usize,
    /// Row-major, `cells[y * width + x]`.
    pub cells: Vec<Cell>,
}

impl Mosaic {
    pub fn get(&self, x: usize, y: usize) -> Cell {
        self.cells[y * self.width + x]
    }

    pub fn blue_cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == Cell::Blue)
            .map(|(i, _)| (i % self.width, i / self.width))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MosaicDefect {
    #[error("cell count does not match the board")]
    Shape,
    #[error("red tile {id} is not an aligned {k}x{k} block")]
    BadTile { id: u32, k: usize },
    #[error("blue cells at {a:?} and {b:?} touch")]
    Touching { a: (usize, usize), b: (usize, usize) },
}

/// Independent check of a mosaic: red tiles are exact `k×k` blocks and no
/// two blue cells touch.
pub fn validate(m: &Mosaic, adjacency: Adjacency) -> Result<(), MosaicDefect> {
    if m.cells.len() != m.width * m.height {
        return Err(MosaicDefect::Shape);
    }
    let mut tiles: HashMap<u32, Vec<(usize, usize)>> = HashMap::new();
    for y in 0..m.height {
        for x in 0..m.width {
            if let Cell::Red(id) = m.get(x, y) {
                tiles.entry(id).or_default().push((x, y));
            }
        }
    }
    for (&id, cells) in &tiles {
        let x0 = cells.iter().map(|c| c.0).min().expect("non-empty");
        let y0 = cells.iter().map(|c| c.1).min().expect("non-empty");
        let square = cells.len() == m.k * m.k
            && cells
                .iter()
                .all(|&(x, y)| x >= x0 && x < x0 + m.k && y >= y0 && y < y0 + m.k);
        if !square {
            return Err(MosaicDefect::BadTile { id, k: m.k });
        }
    }
    let offsets: &[(i64, i64)] = match adjacency {
        Adjacency::King => &[(1, 0), (0, 1), (1, 1), (-1, 1)],
        Adjacency::Rook => &[(1, 0), (0, 1)],
    };
    for (x, y) in m.blue_cells() {
        for &(dx, dy) in offsets {
            let (nx, ny) = (x as i64 + dx, y as i64 + dy);
            if nx < 0 || ny < 0 || nx >= m.width as i64 || ny >= m.height as i64 {
                continue;
            }
            if m.get(nx as usize, ny as usize) == Cell::Blue {
                return Err(MosaicDefect::Touching {
                    a: (x, y),
                    b: (nx as usize, ny as usize),
                });
            }
        }
    }
    Ok(())
}

const BLUE: u8 = 0;
/// Red whose tile ends in this row.
const RED_DONE: u8 = 1;

/// Sweep interface. Column states use two bits each: `0` blue, `1 + r` red
/// with `r` rows of the tile still below.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TransferState {
    columns: u128,
    up_left_blue: bool,
}

impl TransferState {
    /// State above the first row: no pending tiles, no blue cells.
    pub fn top(width: usize) -> Self {
        let mut columns = 0u128;
        for x in 0..width {
            columns |= (RED_DONE as u128) << (2 * x);
        }
        TransferState {
            columns,
            up_left_blue: false,
        }
    }

    #[inline]
    pub fn column(&self, x: usize) -> u8 {
        ((self.columns >> (2 * x)) & 3) as u8
    }

    #[inline]
    fn with_column(mut self, x: usize, v: u8) -> Self {
        self.columns = (self.columns & !(3u128 << (2 * x))) | ((v as u128) << (2 * x));
        self
    }

    /// No tile reaches below the last processed row.
    pub fn is_closed(&self, width: usize) -> bool {
        (0..width).all(|x| self.column(x) <= RED_DONE)
    }
}

/// What the cursor cell becomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Move {
    /// Continuation of a tile from above; advance one column.
    Forced,
    Blue,
    /// New tile with its top-left corner here; advance `k` columns.
    Tile,
}

struct Board {
    width: usize,
    height: usize,
    k: usize,
    adjacency: Adjacency,
}

impl Board {
    fn new(width: usize, height: usize, k: usize, adjacency: Adjacency, cap: usize) -> Result<Self, MosaicError> {
        if k != 2 && k != 3 {
            return Err(MosaicError::BadTileSide { k });
        }
        if width == 0 || height == 0 {
            return Err(MosaicError::EmptyBoard);
        }
        if width > cap {
            return Err(MosaicError::WidthCap { w: width, cap });
        }
        Ok(Board {
            width,
            height,
            k,
            adjacency,
        })
    }

    /// Legal moves at `(x, y)` and the successor state (before the row-end reset).
    fn moves(&self, s: TransferState, x: usize, y: usize) -> impl Iterator<Item = (Move, TransferState)> {
        let above = s.column(x);
        let mut out: [Option<(Move, TransferState)>; 2] = [None, None];
        if above > RED_DONE {
            let next = s.with_column(x, above - 1);
            out[0] = Some((
                Move::Forced,
                TransferState {
                    up_left_blue: false,
                    ..next
                },
            ));
            return out.into_iter().flatten();
        }
        let left_blue = x > 0 && s.column(x - 1) == BLUE;
        let up_blue = above == BLUE;
        let blocked = match self.adjacency {
            Adjacency::King => {
                let up_right_blue = x + 1 < self.width && s.column(x + 1) == BLUE;
                left_blue || up_blue || s.up_left_blue || up_right_blue
            }
            Adjacency::Rook => left_blue || up_blue,
        };
        if !blocked {
            let next = s.with_column(x, BLUE);
            out[0] = Some((
                Move::Blue,
                TransferState {
                    up_left_blue: up_blue,
                    ..next
                },
            ));
        }
        let k = self.k;
        if x + k <= self.width && y + k <= self.height && (x..x + k).all(|c| s.column(c) <= RED_DONE) {
            let last_was_blue = s.column(x + k - 1) == BLUE;
            let mut next = s;
            for c in x..x + k {
                next = next.with_column(c, RED_DONE + (k as u8 - 1));
            }
            out[1] = Some((
                Move::Tile,
                TransferState {
                    up_left_blue: last_was_blue,
                    ..next
                },
            ));
        }
        out.into_iter().flatten()
    }

    /// Necessary condition for cell `(c, y + 1)` once row `y` is final on
    /// every column within `k − 1` of `c`: it is either forced, could be
    /// blue, or some tile start covers it.
    fn coverable_below(&self, s: TransferState, c: usize, y: usize) -> bool {
        if y + 1 >= self.height || s.column(c) > RED_DONE {
            return true;
        }
        let blue_ok = match self.adjacency {
            Adjacency::King => (c.saturating_sub(1)..(c + 2).min(self.width)).all(|i| s.column(i) != BLUE),
            Adjacency::Rook => s.column(c) != BLUE,
        };
        if blue_ok {
            return true;
        }
        let k = self.k;
        if y + 1 + k > self.height || self.width < k {
            return false;
        }
        (c.saturating_sub(k - 1)..=c.min(self.width - k)).any(|start| (start..start + k).all(|i| s.column(i) <= RED_DONE))
    }

    fn advance(&self, m: Move) -> usize {
        if m == Move::Tile {
            self.k
        } else {
            1
        }
    }
}

/// Exact number of mosaics on a `width × height` board.
pub fn count_mosaics(width: usize, height: usize, k: usize) -> Result<BigUint, MosaicError> {
    count_mosaics_with(width, height, k, Adjacency::King)
}

pub fn count_mosaics_with(
    width: usize,
    height: usize,
    k: usize,
    adjacency: Adjacency,
) -> Result<BigUint, MosaicError> {
    let board = Board::new(width, height, k, adjacency, COUNT_WIDTH_CAP)?;
    let mut layer: HashMap<TransferState, BigUint> = HashMap::new();
    layer.insert(TransferState::top(width), BigUint::one());
    for y in 0..height {
        // at[x] holds the states whose cursor sits at column x of row y.
        let mut at: Vec<HashMap<TransferState, BigUint>> = vec![HashMap::new(); width + 1];
        at[0] = layer;
        for x in 0..width {
            let current = std::mem::take(&mut at[x]);
            for (s, ways) in current {
                for (m, next) in board.moves(s, x, y) {
                    let nx = x + board.advance(m);
                    *at[nx].entry(next).or_insert_with(BigUint::zero) += &ways;
                }
            }
        }
        layer = HashMap::new();
        for (s, ways) in at.pop().expect("width + 1 slots") {
            let reset = TransferState {
                up_left_blue: false,
                ..s
            };
            *layer.entry(reset).or_insert_with(BigUint::zero) += ways;
        }
    }
    Ok(layer
        .into_iter()
        .filter(|(s, _)| s.is_closed(width))
        .map(|(_, ways)| ways)
        .sum())
}

/// `log₂(count)/(w·h)` per width; `None` when there is no mosaic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyPoint {
    pub width: usize,
    pub height: usize,
    pub count: String,
    pub entropy: Option<f64>,
}

pub fn log2_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 60 {
        return x.to_f64().expect("fits").log2();
    }
    let shift = bits - 60;
    let top: BigUint = x >> shift;
    top.to_f64().expect("fits").log2() + shift as f64
}

pub fn entropy_profile(widths: &[usize], height: usize, k: usize) -> Result<Vec<EntropyPoint>, MosaicError> {
    widths
        .iter()
        .map(|&w| {
            let count = count_mosaics(w, height, k)?;
            let entropy = (!count.is_zero()).then(|| log2_big(&count) / (w * height) as f64);
            Ok(EntropyPoint {
                width: w,
                height,
                count: count.to_string(),
                entropy,
            })
        })
        .collect()
}

/// Seeded randomized backtracking in scanline order.
///
/// Moves at each cell are tried in random order; `(cell, interface)` pairs
/// already shown to have no completion are remembered, so the search is
/// exhaustive and returns `None` exactly when no mosaic exists.
pub fn generate_mosaic(width: usize, height: usize, k: usize, seed: u64) -> Result<Option<Mosaic>, MosaicError> {
    generate_mosaic_with(width, height, k, seed, Adjacency::King)
}

pub fn generate_mosaic_with(
    width: usize,
    height: usize,
    k: usize,
    seed: u64,
    adjacency: Adjacency,
) -> Result<Option<Mosaic>, MosaicError> {
    let board = Board::new(width, height, k, adjacency, GENERATE_WIDTH_CAP)?;
    let mut search = Search {
        board: &board,
        rng: seeded(seed),
        dead: HashSet::new(),
        path: Vec::new(),
    };
    if !search.solve(0, TransferState::top(width)) {
        return Ok(None);
    }
    Ok(Some(search.assemble()))
}

struct Search<'a> {
    board: &'a Board,
    rng: crate::rng::LabRng,
    dead: HashSet<(usize, TransferState)>,
    /// `(cell index, move)` along the current branch.
    path: Vec<(usize, Move)>,
}

impl Search<'_> {
    fn solve(&mut self, cell: usize, state: TransferState) -> bool {
        let w = self.board.width;
        if cell == w * self.board.height {
            return state.is_closed(w);
        }
        if self.dead.contains(&(cell, state)) {
            return false;
        }
        let (x, y) = (cell % w, cell / w);
        let mut options: Vec<(Move, TransferState)> = self.board.moves(state, x, y).collect();
        if options.len() == 2 && self.rng.random::<bool>() {
            options.swap(0, 1);
        }
        for (m, mut next) in options {
            let nx = x + self.board.advance(m);
            if nx == w {
                next.up_left_blue = false;
            }
            let k = self.board.k;
            let settled = (x.saturating_sub(k - 1)..(nx + k - 1).min(w))
                .filter(|&c| nx == w || c + k - 1 < nx)
                .all(|c| self.board.coverable_below(next, c, y));
            if !settled {
                continue;
            }
            self.path.push((cell, m));
            if self.solve(y * w + nx, next) {
                return true;
            }
            self.path.pop();
        }
        self.dead.insert((cell, state));
        false
    }

    fn assemble(&self) -> Mosaic {
        let (w, h, k) = (self.board.width, self.board.height, self.board.k);
        let mut cells = vec![Cell::Blue; w * h];
        let mut next_id = 0u32;
        for &(cell, m) in &self.path {
            if m == Move::Tile {
                let (x, y) = (cell % w, cell / w);
                for dy in 0..k {
                    for dx in 0..k {
                        cells[(y + dy) * w + x + dx] = Cell::Red(next_id);
                    }
                }
                next_id += 1;
            }
        }
        Mosaic {
            width: w,
            height: h,
            k,
            cells,
        }
    }
}

/// Spins of the blue cells of a `k = 2` mosaic: `+1` on even sites
/// (`x + y` even), `-1` on odd ones.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpinAssignment {
    pub spins: Vec<((usize, usize), i8)>,
    pub plus: usize,
    pub minus: usize,
    /// `|#(+1) − #(−1)| / #blue`, 0 without blue cells.
    pub imbalance: f64,
}

pub fn spin_map(m: &Mosaic) -> Result<SpinAssignment, MosaicError> {
    if m.k != 2 {
        return Err(MosaicError::SpinsNeedTwo { k: m.k });
    }
    let spins: Vec<((usize, usize), i8)> = m
        .blue_cells()
        .map(|(x, y)| ((x, y), if (x + y) % 2 == 0 { 1 } else { -1 }))
        .collect();
    let plus = spins.iter().filter(|s| s.1 == 1).count();
    let minus = spins.len() - plus;
    let imbalance = if spins.is_empty() {
        0.0
    } else {
        plus.abs_diff(minus) as f64 / spins.len() as f64
    };
    Ok(SpinAssignment {
        spins,
        plus,
        minus,
        imbalance,
    })
}

/// Binary pixmap, one pixel per cell, row 0 first.
pub fn write_ppm<W: Write>(m: &Mosaic, mut out: W) -> io::Result<()> {
    write!(out, "P6\n{} {}\n255\n", m.width, m.height)?;
    let mut bytes = Vec::with_capacity(3 * m.cells.len());
    for c in &m.cells {
        bytes.extend_from_slice(match c {
            Cell::Red(_) => &[255, 0, 0],
            Cell::Blue => &[0, 0, 255],
        });
    }
    out.write_all(&bytes)?;
    out.flush()
}

pub fn render_ppm(m: &Mosaic, path: &Path) -> Result<(), MosaicError> {
    write_ppm(m, BufWriter::new(File::create(path)?))?;
    Ok(())
}
