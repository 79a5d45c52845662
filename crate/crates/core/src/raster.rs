//! Raster primitives: 8-bit bands, RGB images, rectangular regions and
//! population statistics.
//!
//! Every pixel is a `u8`, so the [0, 255] range holds by construction. All
//! types are immutable once built and can be shared freely across threads.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifies which band a metric value belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BandId {
    R,
    G,
    B,
    L,
    #[serde(rename = "PAN")]
    Pan,
}

impl BandId {
    pub const RGB: [BandId; 3] = [BandId::R, BandId::G, BandId::B];
    pub const RGBL: [BandId; 4] = [BandId::R, BandId::G, BandId::B, BandId::L];

    pub fn as_str(self) -> &'static str {
        match self {
            BandId::R => "R",
            BandId::G => "G",
            BandId::B => "B",
            BandId::L => "L",
            BandId::Pan => "PAN",
        }
    }
}

impl fmt::Display for BandId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A single 8-bit image plane stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Band {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Band {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        check_dims(width, height)?;
        if pixels.len() != width * height {
            return Err(Error::PixelCountMismatch {
                expected: width * height,
                actual: pixels.len(),
            });
        }
        Ok(Band {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Band::new(width, height, vec![value; width * height])
    }

    /// Builds a band by evaluating `f(x, y)` for every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self> {
        check_dims(width, height)?;
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Ok(Band {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    /// Always false; a band holds at least one pixel.
    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[u8] {
        &self.pixels[y * self.width..(y + 1) * self.width]
    }

    pub fn map(&self, mut f: impl FnMut(u8) -> u8) -> Band {
        Band {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&v| f(v)).collect(),
        }
    }
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions { width, height });
    }
    Ok(())
}

/// Ordered R, G, B bands of identical size plus a method label
/// such as `"MS"` or `"HFA"`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultibandImage {
    r: Band,
    g: Band,
    b: Band,
    label: String,
}

impl MultibandImage {
    pub fn new(label: impl Into<String>, r: Band, g: Band, b: Band) -> Result<Self> {
        if r.dims() != g.dims() {
            return Err(Error::mismatch("R/G bands", r.dims(), g.dims()));
        }
        if r.dims() != b.dims() {
            return Err(Error::mismatch("R/B bands", r.dims(), b.dims()));
        }
        Ok(MultibandImage {
            r,
            g,
            b,
            label: label.into(),
        })
    }

    /// A three-band image whose bands are all copies of `band`.
    pub fn gray(label: impl Into<String>, band: &Band) -> Self {
        MultibandImage {
            r: band.clone(),
            g: band.clone(),
            b: band.clone(),
            label: label.into(),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn width(&self) -> usize {
        self.r.width
    }

    pub fn height(&self) -> usize {
        self.r.height
    }

    pub fn dims(&self) -> (usize, usize) {
        self.r.dims()
    }

    pub fn r(&self) -> &Band {
        &self.r
    }

    pub fn g(&self) -> &Band {
        &self.g
    }

    pub fn b(&self) -> &Band {
        &self.b
    }

    /// The three colour bands in R, G, B order.
    pub fn bands(&self) -> [(BandId, &Band); 3] {
        [
            (BandId::R, &self.r),
            (BandId::G, &self.g),
            (BandId::B, &self.b),
        ]
    }

    /// Returns the colour band, or `None` for `L` and `PAN`.
    pub fn band(&self, id: BandId) -> Option<&Band> {
        match id {
            BandId::R => Some(&self.r),
            BandId::G => Some(&self.g),
            BandId::B => Some(&self.b),
            BandId::L | BandId::Pan => None,
        }
    }

    pub fn map_bands(&self, mut f: impl FnMut(BandId, &Band) -> Result<Band>) -> Result<Self> {
        MultibandImage::new(
            self.label.clone(),
            f(BandId::R, &self.r)?,
            f(BandId::G, &self.g)?,
            f(BandId::B, &self.b)?,
        )
    }
}

/// A named rectangular block `[x0, x0 + w) x [y0, y0 + h)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub name: String,
    pub x0: usize,
    pub y0: usize,
    pub w: usize,
    pub h: usize,
}

impl RegionSpec {
    pub fn new(name: impl Into<String>, x0: usize, y0: usize, w: usize, h: usize) -> Self {
        RegionSpec {
            name: name.into(),
            x0,
            y0,
            w,
            h,
        }
    }

    /// Checks that the block is non-empty and lies inside a `width x height` image.
    pub fn check_bounds(&self, width: usize, height: usize) -> Result<()> {
        let fits = self.w >= 1
            && self.h >= 1
            && self.x0.checked_add(self.w).is_some_and(|end| end <= width)
            && self.y0.checked_add(self.h).is_some_and(|end| end <= height);
        if fits {
            Ok(())
        } else {
            Err(Error::RegionOutOfBounds {
                name: self.name.clone(),
                x0: self.x0 as i64,
                y0: self.y0 as i64,
                w: self.w as i64,
                h: self.h as i64,
                width,
                height,
            })
        }
    }

    pub fn overlaps(&self, other: &RegionSpec) -> bool {
        self.x0 < other.x0 + other.w
            && other.x0 < self.x0 + self.w
            && self.y0 < other.y0 + other.h
            && other.y0 < self.y0 + self.h
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }
}

/// Population statistics: mean, population standard deviation, extremes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelStats {
    pub mean: f64,
    pub std_dev: f64,
    pub n: usize,
    pub min: u8,
    pub max: u8,
}

impl PixelStats {
    /// Statistics of a population given as intensity counts.
    ///
    /// Two exact passes over the 256 bins: the integer sum yields the mean,
    /// then squared deviations are accumulated in `f64` and divided by `n`.
    pub fn from_counts(counts: &[u64; 256]) -> Result<Self> {
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(Error::EmptyRegion);
        }
        let sum: u64 = counts.iter().enumerate().map(|(v, &c)| v as u64 * c).sum();
        let mean = sum as f64 / n as f64;
        let sq_dev: f64 = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(v, &c)| {
                let d = v as f64 - mean;
                c as f64 * d * d
            })
            .sum();
        let min = counts.iter().position(|&c| c > 0).unwrap_or(0) as u8;
        let max = counts.iter().rposition(|&c| c > 0).unwrap_or(0) as u8;
        Ok(PixelStats {
            mean,
            std_dev: (sq_dev / n as f64).sqrt(),
            n: n as usize,
            min,
            max,
        })
    }
}

/// Tallies intensities into 256 bins.
pub fn intensity_counts(pixels: impl IntoIterator<Item = u8>) -> [u64; 256] {
    let mut counts = [0u64; 256];
    for v in pixels {
        counts[v as usize] += 1;
    }
    counts
}

/// Mean, population standard deviation (divisor `n`), min and max.
pub fn pixel_stats(pixels: &[u8]) -> Result<PixelStats> {
    PixelStats::from_counts(&intensity_counts(pixels.iter().copied()))
}

/// Nearest-neighbour upsampling by an integer factor in both directions.
pub fn upsample_nearest(src: &Band, factor: usize) -> Result<Band> {
    if factor == 0 {
        return Err(Error::ZeroFactor);
    }
    if factor == 1 {
        return Ok(src.clone());
    }
    let width = src.width * factor;
    let height = src.height * factor;
    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..src.height {
        let start = pixels.len();
        for &v in src.row(y) {
            pixels.extend(std::iter::repeat_n(v, factor));
        }
        for _ in 1..factor {
            pixels.extend_from_within(start..start + width);
        }
    }
    Band::new(width, height, pixels)
}

/// Luminosity band: per-pixel `round((R + G + B) / 3)`.
pub fn l_component(img: &MultibandImage) -> Band {
    let pixels = img
        .r
        .pixels
        .iter()
        .zip(&img.g.pixels)
        .zip(&img.b.pixels)
        // s/3 never lands on .5, so (s + 1) / 3 is the rounded quotient
        .map(|((&r, &g), &b)| ((r as u16 + g as u16 + b as u16 + 1) / 3) as u8)
        .collect();
    Band {
        width: img.r.width,
        height: img.r.height,
        pixels,
    }
}

/// Copies the pixels covered by `region` into a new band.
pub fn extract_block(band: &Band, region: &RegionSpec) -> Result<Band> {
    region.check_bounds(band.width, band.height)?;
    let mut pixels = Vec::with_capacity(region.area());
    for y in region.y0..region.y0 + region.h {
        pixels.extend_from_slice(&band.row(y)[region.x0..region.x0 + region.w]);
    }
    Band::new(region.w, region.h, pixels)
}

/// Round half up, then clamp to the 8-bit range.
#[inline]
pub fn quantize(value: f64) -> u8 {
    (value + 0.5).floor().clamp(0.0, 255.0) as u8
}
