//! Naive reference implementations shared by the property and acceptance
//! suites. Each one is written independently of the library code.

#![allow(dead_code)]

use fusionqa_core::Band;
use rand::Rng;

pub const SOBEL_X: [[i32; 3]; 3] = [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]];
pub const SOBEL_Y: [[i32; 3]; 3] = [[-1, -2, -1], [0, 0, 0], [1, 2, 1]];

/// Direct 3x3 convolution with clamped coordinates.
pub fn naive_sobel(band: &Band) -> Vec<f64> {
    let (w, h) = band.dims();
    let at = |x: i64, y: i64| -> i32 {
        let cx = x.clamp(0, w as i64 - 1) as usize;
        let cy = y.clamp(0, h as i64 - 1) as usize;
        band.get(cx, cy) as i32
    };
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let (mut gx, mut gy) = (0i32, 0i32);
            for ky in 0..3 {
                for kx in 0..3 {
                    let v = at(x + kx as i64 - 1, y + ky as i64 - 1);
                    gx += SOBEL_X[ky][kx] * v;
                    gy += SOBEL_Y[ky][kx] * v;
                }
            }
            out.push(((gx as f64).powi(2) + (gy as f64).powi(2)).sqrt());
        }
    }
    out
}

/// Two-pass mean and population variance.
pub fn naive_mean_var(pixels: &[u8]) -> (f64, f64) {
    let n = pixels.len() as f64;
    let mean = pixels.iter().map(|&v| v as f64).sum::<f64>() / n;
    let var = pixels
        .iter()
        .map(|&v| (v as f64 - mean).powi(2))
        .sum::<f64>()
        / n;
    (mean, var)
}

pub fn naive_snr_whole(f: &Band, m: &Band) -> f64 {
    let (mut num, mut den) = (0.0f64, 0.0f64);
    for y in 0..f.height() {
        for x in 0..f.width() {
            let a = f.get(x, y) as f64;
            let b = m.get(x, y) as f64;
            num += a * a;
            den += (a - b) * (a - b);
        }
    }
    (num / den).sqrt()
}

pub fn naive_histogram(band: &Band, keep: impl Fn(usize, usize) -> bool) -> Vec<u64> {
    let mut bins = vec![0u64; 256];
    for y in 0..band.height() {
        for x in 0..band.width() {
            if keep(x, y) {
                bins[band.get(x, y) as usize] += 1;
            }
        }
    }
    bins
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

pub fn random_band(rng: &mut impl Rng, w: usize, h: usize) -> Band {
    Band::from_fn(w, h, |_, _| rng.random()).unwrap()
}

/// A random population of 2..=400 pixels with at least one non-zero value
/// and not all equal.
pub fn random_population(rng: &mut impl Rng) -> Vec<u8> {
    loop {
        let n = rng.random_range(2..=400);
        let lo = rng.random_range(0..=254u8);
        let hi = rng.random_range(lo + 1..=255u8);
        let p: Vec<u8> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
        if p.iter().any(|&v| v != p[0]) {
            return p;
        }
    }
}
