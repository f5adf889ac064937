//! Harmonic GF(2) fields on a cylinder.
//!
//! A field has `width` columns that wrap around and `height` rows with free
//! top and bottom boundaries. It is harmonic when every cell of an interior
//! row equals the XOR of its four neighbours. Rows 0 and 1 may be chosen
//! freely; every later row is then forced.
//!
//! Cell value 1 is drawn white.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use rand::seq::IteratorRandom;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::rng::seeded;

#[derive(Debug, Error)]
pub enum LedrappierError {
    #[error("field must be at least 3 wide and 2 tall, got {width}x{height}")]
    TooSmall { width: usize, height: usize },
    #[error("seed rows must have length {width}")]
    SeedRowLength { width: usize },
    #[error("scale 2^{k} too large for a {width}x{height} field")]
    ScaleTooLarge { k: u32, width: usize, height: usize },
    #[error("cell ({x}, {y}) is outside the field")]
    OutOfField { x: usize, y: usize },
    #[error("start cell ({x}, {y}) is not white")]
    NotWhite { x: usize, y: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarmonicField {
    width: usize,
    height: usize,
    cells: Vec<u8>,
}

impl HarmonicField {
    /// Propagates two seed rows upward: `h(x,y+1) = h(x,y) + h(x±1,y) + h(x,y-1)`.
    pub fn from_seed_rows(row0: &[u8], row1: &[u8], height: usize) -> Result<Self, LedrappierError> {
        let width = row0.len();
        if width < 3 || height < 2 {
            return Err(LedrappierError::TooSmall { width, height });
        }
        if row1.len() != width {
            return Err(LedrappierError::SeedRowLength { width });
        }
        let mut cells = vec![0u8; width * height];
        for x in 0..width {
            cells[x] = row0[x] & 1;
            cells[width + x] = row1[x] & 1;
        }
        for y in 1..height - 1 {
            for x in 0..width {
                let l = (x + width - 1) % width;
                let r = (x + 1) % width;
                let v = cells[y * width + x]
                    ^ cells[y * width + l]
                    ^ cells[y * width + r]
                    ^ cells[(y - 1) * width + x];
                cells[(y + 1) * width + x] = v;
            }
        }
        Ok(HarmonicField { width, height, cells })
    }

    /// Raw grid, not necessarily harmonic. Row-major, `cells[y * width + x]`.
    pub fn from_cells(width: usize, height: usize, cells: Vec<u8>) -> Result<Self, LedrappierError> {
        if width < 3 || height < 2 || cells.len() != width * height {
            return Err(LedrappierError::TooSmall { width, height });
        }
        Ok(HarmonicField {
            width,
            height,
            cells: cells.into_iter().map(|c| c & 1).collect(),
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    /// Value at column `x` (taken mod width) and row `y`.
    #[inline]
    pub fn get(&self, x: i64, y: usize) -> u8 {
        let x = x.rem_euclid(self.width as i64) as usize;
        self.cells[y * self.width + x]
    }

    pub fn flip(&mut self, x: usize, y: usize) {
        self.cells[y * self.width + x] ^= 1;
    }

    pub fn xor(&self, other: &HarmonicField) -> HarmonicField {
        assert_eq!((self.width, self.height), (other.width, other.height));
        HarmonicField {
            width: self.width,
            height: self.height,
            cells: self.cells.iter().zip(&other.cells).map(|(a, b)| a ^ b).collect(),
        }
    }

    pub fn white_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c == 1).count()
    }
}

/// Random harmonic field: seed rows uniform from `seed`, the rest propagated.
pub fn sample_field(width: usize, height: usize, seed: u64) -> Result<HarmonicField, LedrappierError> {
    let mut rng = seeded(seed);
    let row0: Vec<u8> = (0..width).map(|_| rng.random::<bool>() as u8).collect();
    let row1: Vec<u8> = (0..width).map(|_| rng.random::<bool>() as u8).collect();
    HarmonicField::from_seed_rows(&row0, &row1, height)
}

pub fn verify_harmonicity(field: &HarmonicField) -> bool {
    scaled_identity_holds(field, 1)
}

/// Checks `h(x,y) = h(x±d,y) + h(x,y±d)` with `d = 2^k` at every cell whose
/// vertical neighbours at distance `d` exist.
pub fn power_identity_check(field: &HarmonicField, k: u32) -> Result<bool, LedrappierError> {
    let too_large = LedrappierError::ScaleTooLarge {
        k,
        width: field.width,
        height: field.height,
    };
    let d = 1usize.checked_shl(k).ok_or(too_large)?;
    if 2 * d >= field.width || 2 * d >= field.height {
        return Err(LedrappierError::ScaleTooLarge {
            k,
            width: field.width,
            height: field.height,
        });
    }
    Ok(scaled_identity_holds(field, d))
}

fn scaled_identity_holds(field: &HarmonicField, d: usize) -> bool {
    let di = d as i64;
    (d..field.height.saturating_sub(d)).all(|y| {
        (0..field.width as i64).all(|x| {
            field.get(x, y)
                == field.get(x + di, y) ^ field.get(x - di, y) ^ field.get(x, y + d) ^ field.get(x, y - d)
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Heading {
    Up,
    Right,
    Down,
    Left,
}

impl Heading {
    pub const ALL: [Heading; 4] = [Heading::Up, Heading::Right, Heading::Down, Heading::Left];

    fn step(self) -> (i64, i64) {
        match self {
            Heading::Up => (0, 1),
            Heading::Right => (1, 0),
            Heading::Down => (0, -1),
            Heading::Left => (-1, 0),
        }
    }

    /// Unit vector pointing to the right of the heading.
    fn right(self) -> (i64, i64) {
        let (dx, dy) = self.step();
        (dy, -dx)
    }
}

/// Turn sequence of a walk along white cells: `0` ahead, `+1` ahead-right,
/// `-1` ahead-left.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThreadTrace {
    pub start: (usize, usize),
    pub heading: Heading,
    pub symbols: Vec<i8>,
}

impl ThreadTrace {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// One symbol per line under a `symbol` header.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["symbol"])?;
        for s in &self.symbols {
            w.write_record([s.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Walks along white cells keeping the heading fixed.
///
/// From each cell the three cells one step ahead (ahead, ahead-right,
/// ahead-left) are examined and the first white one in that priority order is
/// entered. The walk stops when none is white, when it would leave the field
/// through the top or bottom, or when it would re-enter a visited cell (the
/// columns wrap).
pub fn trace_thread(
    field: &HarmonicField,
    start: (usize, usize),
    heading: Heading,
) -> Result<ThreadTrace, LedrappierError> {
    let (x0, y0) = start;
    if x0 >= field.width || y0 >= field.height {
        return Err(LedrappierError::OutOfField { x: x0, y: y0 });
    }
    if field.get(x0 as i64, y0) != 1 {
        return Err(LedrappierError::NotWhite { x: x0, y: y0 });
    }
    let (fx, fy) = heading.step();
    let (rx, ry) = heading.right();
    let w = field.width as i64;
    let mut visited = vec![false; field.cells.len()];
    let (mut x, mut y) = (x0 as i64, y0 as i64);
    visited[y0 * field.width + x0] = true;
    let mut symbols = Vec::new();
    'walk: loop {
        for (symbol, lateral) in [(0i8, 0i64), (1, 1), (-1, -1)] {
            let nx = (x + fx + lateral * rx).rem_euclid(w);
            let ny = y + fy + lateral * ry;
            if ny < 0 || ny >= field.height as i64 {
                continue;
            }
            let idx = ny as usize * field.width + nx as usize;
            if field.cells[idx] == 1 {
                if visited[idx] {
                    break 'walk;
                }
                visited[idx] = true;
                symbols.push(symbol);
                x = nx;
                y = ny;
                continue 'walk;
            }
        }
        break;
    }
    Ok(ThreadTrace {
        start,
        heading,
        symbols,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThreadStatistics {
    pub max_len: usize,
    pub coverage_fraction: f64,
    pub seed: u64,
}

/// Traces from `samples` random white cells with random headings and reports
/// the longest trace and the share of white cells it visits.
pub fn thread_statistics(field: &HarmonicField, samples: usize, seed: u64) -> ThreadStatistics {
    let whites: Vec<usize> = (0..field.cells.len()).filter(|&i| field.cells[i] == 1).collect();
    if whites.is_empty() || samples == 0 {
        return ThreadStatistics {
            max_len: 0,
            coverage_fraction: 0.0,
            seed,
        };
    }
    let mut rng = seeded(seed);
    let mut max_len = 0;
    for _ in 0..samples {
        let idx = *whites.iter().choose(&mut rng).expect("non-empty");
        let heading = *Heading::ALL.iter().choose(&mut rng).expect("non-empty");
        let start = (idx % field.width, idx / field.width);
        let trace = trace_thread(field, start, heading).expect("white start");
        max_len = max_len.max(trace.len());
    }
    ThreadStatistics {
        max_len,
        coverage_fraction: (max_len + 1) as f64 / whites.len() as f64,
        seed,
    }
}

/// Binary greymap, one byte per cell, row 0 first; white (1) is 255.
pub fn write_pgm<W: Write>(field: &HarmonicField, mut out: W) -> io::Result<()> {
    write!(out, "P5\n{} {}\n255\n", field.width, field.height)?;
    let bytes: Vec<u8> = field.cells.iter().map(|&c| if c == 1 { 255 } else { 0 }).collect();
    out.write_all(&bytes)?;
    out.flush()
}

pub fn render_pgm(field: &HarmonicField, path: &Path) -> Result<(), LedrappierError> {
    write_pgm(field, BufWriter::new(File::create(path)?))?;
    Ok(())
}
