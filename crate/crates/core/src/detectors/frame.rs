use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::partition::Tile;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("frame dimensions must be positive (got {width}x{height})")]
    Empty { width: u32, height: u32 },
    #[error("expected {expected} pixels for the frame, got {actual}")]
    Length { expected: usize, actual: usize },
    #[error("tile at ({x},{y}) size {width}x{height} lies outside the frame")]
    OutOfBounds { x: u32, y: u32, width: u32, height: u32 },
    #[error("pgm: {0}")]
    Pgm(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Grayscale 8-bit frame, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticFrame {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl SyntheticFrame {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, FrameError> {
        if width == 0 || height == 0 {
            return Err(FrameError::Empty { width, height });
        }
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(FrameError::Length {
                expected,
                actual: pixels.len(),
            });
        }
        Ok(SyntheticFrame { width, height, pixels })
    }

    pub fn uniform(width: u32, height: u32, value: u8) -> Result<Self, FrameError> {
        Self::new(width, height, vec![value; width as usize * height as usize])
    }

    /// Deterministic frame from a seed: a smooth gradient with a seeded
    /// offset plus a few seeded rectangles, so detectors see some structure.
    pub fn from_seed(seed: u64, width: u32, height: u32) -> Result<Self, FrameError> {
        if width == 0 || height == 0 {
            return Err(FrameError::Empty { width, height });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base: u64 = rng.gen_range(0..256);
        let gx: u64 = rng.gen_range(0..4);
        let gy: u64 = rng.gen_range(0..4);
        let mut pixels: Vec<u8> = (0..height)
            .flat_map(|y| {
                (0..width).map(move |x| ((base + gx * u64::from(x) + gy * u64::from(y)) % 256) as u8)
            })
            .collect();
        for _ in 0..rng.gen_range(0..6) {
            let x0 = rng.gen_range(0..width);
            let y0 = rng.gen_range(0..height);
            let x1 = rng.gen_range(x0..width) + 1;
            let y1 = rng.gen_range(y0..height) + 1;
            let v: u8 = rng.gen();
            for y in y0..y1 {
                let row = y as usize * width as usize;
                pixels[row + x0 as usize..row + x1 as usize].fill(v);
            }
        }
        Ok(SyntheticFrame { width, height, pixels })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    /// Copies the pixels under `tile`. The tile must lie inside the frame.
    pub fn crop(&self, tile: &Tile) -> Result<Self, FrameError> {
        if u64::from(tile.x) + u64::from(tile.width) > u64::from(self.width)
            || u64::from(tile.y) + u64::from(tile.height) > u64::from(self.height)
        {
            return Err(FrameError::OutOfBounds {
                x: tile.x,
                y: tile.y,
                width: tile.width,
                height: tile.height,
            });
        }
        let (x0, x1) = (tile.x as usize, (tile.x + tile.width) as usize);
        let mut pixels = Vec::with_capacity(tile.area() as usize);
        for y in tile.y..tile.y + tile.height {
            let row = y as usize * self.width as usize;
            pixels.extend_from_slice(&self.pixels[row + x0..row + x1]);
        }
        Self::new(tile.width, tile.height, pixels)
    }

    /// Reads a binary PGM (`P5`) with maxval 255.
    pub fn read_pgm(mut reader: impl Read) -> Result<Self, FrameError> {
        let mut data = Vec::new();
        reader.read_to_end(&mut data)?;
        Self::parse_pgm(&data)
    }

    pub fn parse_pgm(data: &[u8]) -> Result<Self, FrameError> {
        let mut pos = 0;
        let magic = header_token(data, &mut pos)?;
        if magic != b"P5" {
            return Err(FrameError::Pgm(format!(
                "expected magic P5, found {:?}",
                String::from_utf8_lossy(magic)
            )));
        }
        let width = header_number(data, &mut pos, "width")?;
        let height = header_number(data, &mut pos, "height")?;
        let maxval = header_number(data, &mut pos, "maxval")?;
        if maxval != 255 {
            return Err(FrameError::Pgm(format!("unsupported maxval {maxval}, expected 255")));
        }
        // Exactly one whitespace byte separates the header from the raster.
        match data.get(pos) {
            Some(c) if c.is_ascii_whitespace() => pos += 1,
            _ => return Err(FrameError::Pgm("missing whitespace after maxval".into())),
        }
        let expected = width as usize * height as usize;
        let raster = &data[pos..];
        if raster.len() < expected {
            return Err(FrameError::Pgm(format!(
                "truncated raster: {} of {expected} bytes",
                raster.len()
            )));
        }
        Self::new(width, height, raster[..expected].to_vec())
    }

    pub fn write_pgm(&self, mut writer: impl Write) -> Result<(), FrameError> {
        write!(writer, "P5\n{} {}\n255\n", self.width, self.height)?;
        writer.write_all(&self.pixels)?;
        Ok(())
    }

    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.pixels.len() + 20);
        self.write_pgm(&mut out).expect("writing to a Vec cannot fail");
        out
    }
}

/// Next whitespace-delimited header token, skipping `#` comments.
fn header_token<'a>(data: &'a [u8], pos: &mut usize) -> Result<&'a [u8], FrameError> {
    loop {
        while *pos < data.len() && data[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < data.len() && data[*pos] == b'#' {
            while *pos < data.len() && data[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < data.len() && !data[*pos].is_ascii_whitespace() && data[*pos] != b'#' {
        *pos += 1;
    }
    if start == *pos {
        return Err(FrameError::Pgm("unexpected end of header".into()));
    }
    Ok(&data[start..*pos])
}

fn header_number(data: &[u8], pos: &mut usize, what: &str) -> Result<u32, FrameError> {
    let tok = header_token(data, pos)?;
    std::str::from_utf8(tok)
        .ok()
        .filter(|s| s.bytes().all(|b| b.is_ascii_digit()))
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| FrameError::Pgm(format!("bad {what} {:?}", String::from_utf8_lossy(tok))))
}
