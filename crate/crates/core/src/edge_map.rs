//! Sobel gradients, threshold labelling into edge/homogeneous pixels, and
//! edge rates.
//!
//! The gradient magnitude is `sqrt(Gx^2 + Gy^2)` with the unnormalised 3x3
//! Sobel kernels on raw band values. Borders replicate the nearest pixel, so
//! masks always have the same size as the band. A pixel is an edge when its
//! magnitude is strictly greater than the threshold.

use crate::error::{Error, Result};
use crate::raster::Band;

/// Thresholds used when none are given.
pub const DEFAULT_THRESHOLDS: [u8; 5] = [20, 40, 60, 80, 100];

#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    width: usize,
    height: usize,
    magnitudes: Vec<f64>,
    source: String,
}

impl GradientField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.magnitudes[y * self.width + x]
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Tags the field with the band it came from; masks inherit the tag.
    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = source.into();
        self
    }
}

/// Per-pixel edge labels for one band at one threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMask {
    width: usize,
    height: usize,
    labels: Vec<bool>,
    threshold: u8,
    source: String,
}

impl EdgeMask {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn threshold(&self) -> u8 {
        self.threshold
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn is_edge(&self, x: usize, y: usize) -> bool {
        self.labels[y * self.width + x]
    }

    pub fn edge_count(&self) -> usize {
        self.labels.iter().filter(|&&e| e).count()
    }

    pub fn homogeneous_count(&self) -> usize {
        self.labels.len() - self.edge_count()
    }

    /// Mask as an image: edge = 255, homogeneous = 0.
    pub fn to_band(&self) -> Band {
        let px = self
            .labels
            .iter()
            .map(|&e| if e { 255 } else { 0 })
            .collect();
        Band::new(self.width, self.height, px).expect("mask dimensions are valid")
    }
}

/// Sobel gradient magnitude with replicate padding.
pub fn sobel_magnitude(band: &Band) -> GradientField {
    let (w, h) = band.dims();
    let px = band.pixels();
    let mut magnitudes = Vec::with_capacity(w * h);
    for y in 0..h {
        let above = &px[y.saturating_sub(1) * w..][..w];
        let here = &px[y * w..][..w];
        let below = &px[(y + 1).min(h - 1) * w..][..w];
        for x in 0..w {
            let xl = x.saturating_sub(1);
            let xr = (x + 1).min(w - 1);
            let at = |row: &[u8], i: usize| row[i] as i32;
            let gx = (at(above, xr) - at(above, xl))
                + 2 * (at(here, xr) - at(here, xl))
                + (at(below, xr) - at(below, xl));
            let gy = (at(below, xl) - at(above, xl))
                + 2 * (at(below, x) - at(above, x))
                + (at(below, xr) - at(above, xr));
            magnitudes.push(((gx * gx + gy * gy) as f64).sqrt());
        }
    }
    GradientField {
        width: w,
        height: h,
        magnitudes,
        source: String::new(),
    }
}

/// Labels every pixel whose magnitude exceeds `threshold` as an edge.
pub fn label_edges(grad: &GradientField, threshold: u8) -> EdgeMask {
    let t = threshold as f64;
    EdgeMask {
        width: grad.width,
        height: grad.height,
        labels: grad.magnitudes.iter().map(|&m| m > t).collect(),
        threshold,
        source: grad.source.clone(),
    }
}

/// Fraction of pixels labelled as edges.
pub fn edge_rate(mask: &EdgeMask) -> f64 {
    mask.edge_count() as f64 / mask.labels.len() as f64
}

/// One threshold of a sweep.
#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub threshold: u8,
    pub mask: EdgeMask,
    pub rate: f64,
}

/// Labels `band` at every threshold from a single gradient computation.
pub fn threshold_sweep(band: &Band, thresholds: &[u8]) -> Result<Vec<SweepEntry>> {
    check_increasing(thresholds)?;
    Ok(sweep_gradient(&sobel_magnitude(band), thresholds))
}

pub(crate) fn sweep_gradient(grad: &GradientField, thresholds: &[u8]) -> Vec<SweepEntry> {
    thresholds
        .iter()
        .map(|&t| {
            let mask = label_edges(grad, t);
            let rate = edge_rate(&mask);
            SweepEntry {
                threshold: t,
                mask,
                rate,
            }
        })
        .collect()
}

fn check_increasing(thresholds: &[u8]) -> Result<()> {
    if thresholds.is_empty() {
        return Err(Error::InvalidThresholds("no thresholds given".into()));
    }
    if let Some(pair) = thresholds.windows(2).find(|p| p[0] >= p[1]) {
        return Err(Error::InvalidThresholds(format!(
            "thresholds must be strictly increasing ({} then {})",
            pair[0], pair[1]
        )));
    }
    Ok(())
}

/// Validates raw threshold values: each in [0, 255], strictly increasing.
pub fn validate_thresholds(raw: &[i64]) -> Result<Vec<u8>> {
    let values = raw
        .iter()
        .map(|&t| {
            u8::try_from(t)
                .map_err(|_| Error::InvalidThresholds(format!("{t} is outside [0, 255]")))
        })
        .collect::<Result<Vec<u8>>>()?;
    check_increasing(&values)?;
    Ok(values)
}

/// Parses a comma-separated list such as `20,40,60,80,100`.
pub fn parse_thresholds(text: &str) -> Result<Vec<u8>> {
    let raw = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<i64>()
                .map_err(|_| Error::InvalidThresholds(format!("`{}` is not an integer", s.trim())))
        })
        .collect::<Result<Vec<i64>>>()?;
    validate_thresholds(&raw)
}
