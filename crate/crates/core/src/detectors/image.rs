use super::frame::SyntheticFrame;
use super::DetectError;

/// Inclusive lower bound of histogram bin `i`: `⌊256·i/bins⌋`.
fn bin_start(i: usize, bins: usize) -> usize {
    256 * i / bins
}

/// Gray-level histogram. Bin `i` covers `[⌊256·i/bins⌋, ⌊256·(i+1)/bins⌋)`.
pub fn color_histogram(frame: &SyntheticFrame, bins: usize) -> Result<Vec<u64>, DetectError> {
    if !(2..=256).contains(&bins) {
        return Err(DetectError::BadParam {
            rule: "image:histogram".into(),
            param: "bins".into(),
            reason: format!("{bins} is outside 2..=256"),
        });
    }
    let mut lut = [0usize; 256];
    for i in 0..bins {
        lut[bin_start(i, bins)..bin_start(i + 1, bins)].fill(i);
    }
    let mut counts = vec![0u64; bins];
    for &p in frame.pixels() {
        counts[lut[p as usize]] += 1;
    }
    Ok(counts)
}

/// Index of the largest bin; the lowest index wins ties.
pub fn dominant_bin(counts: &[u64]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

/// Fraction of edge pixels.
///
/// A pixel is an edge when it differs by at least `threshold` from its
/// right neighbour, or from its vertical neighbour: the pixel below, or
/// the pixel above for the bottom row. Pixels in the last column have no
/// horizontal comparison.
pub fn edge_density(frame: &SyntheticFrame, threshold: u8) -> Result<f64, DetectError> {
    if threshold == 0 {
        return Err(DetectError::BadParam {
            rule: "image:edges".into(),
            param: "threshold".into(),
            reason: "must be in 1..=255".into(),
        });
    }
    let (w, h) = (frame.width(), frame.height());
    if w < 2 || h < 2 {
        return Err(DetectError::DegenerateFrame { width: w, height: h });
    }
    let t = i16::from(threshold);
    let diff = |a: u8, b: u8| (i16::from(a) - i16::from(b)).abs() >= t;
    let mut edges = 0u64;
    for y in 0..h {
        let vy = if y + 1 < h { y + 1 } else { y - 1 };
        for x in 0..w {
            let v = frame.get(x, y);
            if (x + 1 < w && diff(v, frame.get(x + 1, y))) || diff(v, frame.get(x, vy)) {
                edges += 1;
            }
        }
    }
    Ok(edges as f64 / (u64::from(w) * u64::from(h)) as f64)
}
