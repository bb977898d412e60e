//! Almost Square Tiles (AST) frame partitioning.
//!
//! Splits a `W×H` frame into `n` near-square rectangles for parallel
//! processing. The grid has `cols` columns; the leftmost `cols - irr_cols`
//! "regular" columns hold `rows` tiles each and the rightmost `irr_cols`
//! "irregular" columns hold `rows - 1` taller tiles, so that
//! `(cols - irr_cols) * rows + irr_cols * (rows - 1) == n`.
//!
//! Derived symbols, all in whole pixels with floor division:
//!
//! | symbol | meaning |
//! |--------|---------|
//! | `a`, `ap`   | regular tile height, and the bottom (excess) regular tile height |
//! | `ar`, `arp` | irregular tile height, and the bottom irregular tile height |
//! | `b`         | regular column width |
//! | `bp`, `bpp` | irregular column width, and the last irregular column width |
//!
//! Excess symbols absorb the division remainders so the tiles cover the
//! frame exactly.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("partition count must be at least 1")]
    NoPartitions,
    #[error("image dimensions must be positive (got {width}x{height})")]
    EmptyImage { width: u32, height: u32 },
    #[error("{n} partitions cannot each get a pixel of a {width}x{height} image")]
    TooManyPartitions { n: u64, width: u32, height: u32 },
    #[error("image too small for {n} tiles: {symbol} = {value} < 1")]
    TooSmall { n: u64, symbol: &'static str, value: i64 },
}

impl PartitionError {
    /// Name of the derived symbol that failed, when there is one.
    pub fn symbol(&self) -> Option<&'static str> {
        match self {
            PartitionError::TooSmall { symbol, .. } => Some(symbol),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[allow(clippy::upper_case_acronyms)]
pub enum TileClass {
    /// Regular column, standard height `a`.
    RST,
    /// Regular column, bottom tile of height `ap`.
    RET,
    /// Irregular column, standard height `ar`.
    IST,
    /// Last irregular column, standard height `ar`.
    ICET,
    /// Irregular column, bottom tile of height `arp`.
    IRET,
    /// Last irregular column, bottom tile of height `arp`.
    IRCET,
}

impl TileClass {
    pub const ALL: [TileClass; 6] = [
        TileClass::RST,
        TileClass::RET,
        TileClass::IST,
        TileClass::ICET,
        TileClass::IRET,
        TileClass::IRCET,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TileClass::RST => "RST",
            TileClass::RET => "RET",
            TileClass::IST => "IST",
            TileClass::ICET => "ICET",
            TileClass::IRET => "IRET",
            TileClass::IRCET => "IRCET",
        }
    }
}

impl fmt::Display for TileClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Tile {
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
    pub col_index: u32,
    pub row_index: u32,
    pub class: TileClass,
}

impl Tile {
    pub fn area(&self) -> u64 {
        u64::from(self.width) * u64::from(self.height)
    }

    pub fn rect(&self) -> (u32, u32, u32, u32) {
        (self.x, self.y, self.width, self.height)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionLayout {
    pub image_width: u32,
    pub image_height: u32,
    pub partitions: u32,
    pub k: u64,
    pub first_square: u32,
    pub cols: u32,
    pub rows: u32,
    pub irr_cols: u32,
    pub a: u32,
    pub ap: u32,
    pub ar: u32,
    pub arp: u32,
    pub b: u32,
    pub bp: u32,
    pub bpp: u32,
    pub tiles: Vec<Tile>,
}

fn isqrt_ceil(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while r * r < n {
        r += 1;
    }
    r
}

fn positive(n: u64, symbol: &'static str, value: i64) -> Result<u32, PartitionError> {
    if value < 1 {
        return Err(PartitionError::TooSmall { n, symbol, value });
    }
    Ok(value as u32)
}

/// Runs AST for `n` tiles over a `width×height` frame.
///
/// Tiles are listed column by column, left to right, each column top to
/// bottom. `n == 1` yields the whole frame as a single `RET` tile.
pub fn ast_partition(n: u32, width: u32, height: u32) -> Result<PartitionLayout, PartitionError> {
    if n == 0 {
        return Err(PartitionError::NoPartitions);
    }
    if width == 0 || height == 0 {
        return Err(PartitionError::EmptyImage { width, height });
    }
    let n64 = u64::from(n);
    if n64 > u64::from(width) * u64::from(height) {
        return Err(PartitionError::TooManyPartitions { n: n64, width, height });
    }
    let (w, h) = (i64::from(width), i64::from(height));

    let first_square = isqrt_ceil(n64);
    let k = first_square * first_square;
    let cols = first_square as i64;
    let n_i = n64 as i64;
    let rows = if k == n64 {
        cols
    } else if (cols - 1) * cols >= n_i {
        cols - 1
    } else {
        cols
    };
    let irr = cols * rows - n_i;
    let reg = cols - irr;

    let a = positive(n64, "a", h / rows)?;
    let ap = positive(n64, "ap", h - i64::from(a) * (rows - 1))?;
    let (ar, arp, b, bp, bpp) = if irr >= 1 {
        let ar = positive(n64, "ar", h / (rows - 1))?;
        let arp = positive(n64, "arp", h - i64::from(ar) * (rows - 2))?;
        let (ar64, a64) = (i64::from(ar), i64::from(a));
        // Integer form of W / ((ar/a)·reg + irr) · (ar/a).
        let b = positive(n64, "b", w * ar64 / (ar64 * reg + a64 * irr))?;
        let b64 = i64::from(b);
        let bp = positive(n64, "bp", (w - b64 * reg) / irr)?;
        let bpp = positive(n64, "bpp", w - b64 * reg - i64::from(bp) * (irr - 1))?;
        (ar, arp, b, bp, bpp)
    } else {
        (0, 0, positive(n64, "b", w / cols)?, 0, 0)
    };

    let (cols, rows, irr, reg) = (cols as u32, rows as u32, irr as u32, reg as u32);
    let mut tiles = Vec::with_capacity(n as usize);
    let mut x = 0u32;
    for c in 0..reg {
        let cw = if irr == 0 && c + 1 == cols { width - b * (cols - 1) } else { b };
        let mut y = 0u32;
        for r in 0..rows {
            let bottom = r + 1 == rows;
            let th = if bottom { ap } else { a };
            tiles.push(Tile {
                x,
                y,
                width: cw,
                height: th,
                col_index: c,
                row_index: r,
                class: if bottom { TileClass::RET } else { TileClass::RST },
            });
            y += th;
        }
        x += cw;
    }
    for i in 0..irr {
        let last = i + 1 == irr;
        let cw = if last { bpp } else { bp };
        let mut y = 0u32;
        for r in 0..rows - 1 {
            let bottom = r + 2 == rows;
            let th = if bottom { arp } else { ar };
            let class = match (bottom, last) {
                (false, false) => TileClass::IST,
                (false, true) => TileClass::ICET,
                (true, false) => TileClass::IRET,
                (true, true) => TileClass::IRCET,
            };
            tiles.push(Tile {
                x,
                y,
                width: cw,
                height: th,
                col_index: reg + i,
                row_index: r,
                class,
            });
            y += th;
        }
        x += cw;
    }
    debug_assert_eq!(tiles.len(), n as usize);

    Ok(PartitionLayout {
        image_width: width,
        image_height: height,
        partitions: n,
        k,
        first_square: first_square as u32,
        cols,
        rows,
        irr_cols: irr,
        a,
        ap,
        ar,
        arp,
        b,
        bp,
        bpp,
        tiles,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    /// Every pixel is claimed by exactly one tile.
    pub covered: bool,
    pub overlap_found: bool,
    /// Some tile has zero size or extends past the frame.
    pub out_of_bounds: bool,
    pub area_sum: u64,
    pub tile_count: usize,
}

/// Exact-cover check by sweeping horizontal bands between tile edges.
pub fn verify_layout(layout: &PartitionLayout) -> CoverageReport {
    let (w, h) = (u64::from(layout.image_width), u64::from(layout.image_height));
    let tiles = &layout.tiles;
    let area_sum = tiles.iter().map(Tile::area).sum();
    let out_of_bounds = tiles.iter().any(|t| {
        t.width == 0
            || t.height == 0
            || u64::from(t.x) + u64::from(t.width) > w
            || u64::from(t.y) + u64::from(t.height) > h
    });

    let mut edges: Vec<u64> = tiles
        .iter()
        .flat_map(|t| [u64::from(t.y), u64::from(t.y) + u64::from(t.height)])
        .chain([0, h])
        .filter(|&e| e <= h)
        .collect();
    edges.sort_unstable();
    edges.dedup();

    let mut overlap = false;
    let mut gap = false;
    for band in edges.windows(2) {
        let (top, bottom) = (band[0], band[1]);
        let mut spans: Vec<(u64, u64)> = tiles
            .iter()
            .filter(|t| u64::from(t.y) < bottom && u64::from(t.y) + u64::from(t.height) > top)
            .map(|t| (u64::from(t.x), u64::from(t.x) + u64::from(t.width)))
            .collect();
        spans.sort_unstable();
        let mut reach = 0u64;
        for (start, end) in spans {
            if start < reach {
                overlap = true;
            } else if start > reach {
                gap = true;
            }
            reach = reach.max(end);
        }
        if reach < w {
            gap = true;
        }
    }
    if tiles.is_empty() {
        gap = true;
    }

    CoverageReport {
        covered: !overlap && !gap && !out_of_bounds,
        overlap_found: overlap,
        out_of_bounds,
        area_sum,
        tile_count: tiles.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutStats {
    pub min_area: u64,
    pub max_area: u64,
    pub mean_area: f64,
    /// `max_area / mean_area`.
    pub imbalance: f64,
    /// Largest `max(w/h, h/w)` over all tiles.
    pub worst_aspect: f64,
    pub class_counts: BTreeMap<TileClass, usize>,
}

pub fn layout_stats(layout: &PartitionLayout) -> LayoutStats {
    let areas: Vec<u64> = layout.tiles.iter().map(Tile::area).collect();
    let min_area = areas.iter().copied().min().unwrap_or(0);
    let max_area = areas.iter().copied().max().unwrap_or(0);
    let mean_area = if areas.is_empty() {
        0.0
    } else {
        areas.iter().sum::<u64>() as f64 / areas.len() as f64
    };
    let imbalance = if mean_area > 0.0 { max_area as f64 / mean_area } else { 1.0 };
    let worst_aspect = layout
        .tiles
        .iter()
        .map(|t| {
            let (w, h) = (f64::from(t.width), f64::from(t.height));
            (w / h).max(h / w)
        })
        .fold(1.0, f64::max);
    let mut class_counts = BTreeMap::new();
    for t in &layout.tiles {
        *class_counts.entry(t.class).or_insert(0) += 1;
    }
    LayoutStats {
        min_area,
        max_area,
        mean_area,
        imbalance,
        worst_aspect,
        class_counts,
    }
}
