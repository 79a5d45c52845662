//! Deterministic synthetic PAN / MS / fused fixtures.
//!
//! The PAN band is a tiled background with flat and ramped rectangles on a
//! 5-pixel lattice plus thin lines finer than the MS resolution. MS bands are
//! tinted copies of PAN, box-blurred, block-averaged down by 5 and
//! nearest-neighbour upsampled back. Fused bands inject PAN high frequencies
//! into MS:
//!
//! `F = clamp(round(MS + gain * (PAN - box(PAN)) + shift))`
//!
//! This is a test fixture, not a pan-sharpening method.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::raster::{quantize, upsample_nearest, Band, MultibandImage};

/// Resolution ratio between the PAN and MS grids.
pub const MS_FACTOR: usize = 5;

/// Radius of the box filter separating PAN high frequencies (5x5 window).
pub const HF_BOX_RADIUS: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneParams {
    pub width: usize,
    pub height: usize,
    /// Features (rectangles, ramps, lines) per 100x100 pixels.
    pub detail_density: f64,
    pub seed: u64,
    /// Per-band intensity offset applied by the fusion simulation.
    pub spectral_shift: [i32; 3],
    /// Amount of PAN high frequency injected by the fusion simulation.
    pub hf_gain: f64,
    /// Box blur radius applied to MS before downsampling. With 0 the MS
    /// cell value is the plain 5x5 block mean.
    pub blur_radius: usize,
    /// Per-band gain turning PAN into MS bands.
    pub tint: [f64; 3],
    /// Uniform noise amplitude added to PAN.
    pub noise: u8,
}

impl Default for SceneParams {
    fn default() -> Self {
        SceneParams {
            width: 600,
            height: 525,
            detail_density: 4.0,
            seed: 0x5eed,
            spectral_shift: [0, 0, 0],
            hf_gain: 1.0,
            blur_radius: 0,
            tint: [1.0, 0.9, 0.8],
            noise: 2,
        }
    }
}

impl SceneParams {
    fn validate(&self) -> Result<()> {
        if self.width < MS_FACTOR
            || self.height < MS_FACTOR
            || !self.width.is_multiple_of(MS_FACTOR)
            || !self.height.is_multiple_of(MS_FACTOR)
        {
            return Err(Error::InvalidArgument(format!(
                "scene size {}x{} must be a positive multiple of {MS_FACTOR} in both directions",
                self.width, self.height
            )));
        }
        if !(self.detail_density >= 0.0 && self.detail_density.is_finite()) {
            return Err(Error::InvalidArgument(
                "detail density must be finite and >= 0".into(),
            ));
        }
        if !(self.hf_gain >= 0.0 && self.hf_gain.is_finite()) {
            return Err(Error::InvalidArgument(
                "hf gain must be finite and >= 0".into(),
            ));
        }
        if self.tint.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(Error::InvalidArgument(
                "tint gains must be finite and >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Window sums of a `(2r+1)^2` box with replicated borders, plus the window size.
fn box_sums(band: &Band, radius: usize) -> (Vec<u32>, u32) {
    let (w, h) = band.dims();
    let r = radius as isize;
    let clamp = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;
    let mut rows = vec![0u32; w * h];
    for y in 0..h {
        let row = band.row(y);
        for x in 0..w {
            rows[y * w + x] = (-r..=r)
                .map(|dx| row[clamp(x as isize + dx, w)] as u32)
                .sum();
        }
    }
    let mut out = vec![0u32; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = (-r..=r)
                .map(|dy| rows[clamp(y as isize + dy, h) * w + x])
                .sum();
        }
    }
    let side = 2 * radius as u32 + 1;
    (out, side * side)
}

/// Box blur with replicated borders, rounded half up.
pub fn box_blur(band: &Band, radius: usize) -> Band {
    if radius == 0 {
        return band.clone();
    }
    let (sums, count) = box_sums(band, radius);
    let px = sums
        .iter()
        .map(|&s| ((2 * s + count) / (2 * count)) as u8)
        .collect();
    Band::new(band.width(), band.height(), px).expect("same dimensions")
}

/// Block mean over `factor x factor` cells, rounded half up.
pub fn downsample_mean(band: &Band, factor: usize) -> Result<Band> {
    if factor == 0 {
        return Err(Error::ZeroFactor);
    }
    let (w, h) = band.dims();
    if w % factor != 0 || h % factor != 0 {
        return Err(Error::InvalidArgument(format!(
            "{w}x{h} is not divisible by {factor}"
        )));
    }
    let count = (factor * factor) as u32;
    Band::from_fn(w / factor, h / factor, |cx, cy| {
        let mut sum = 0u32;
        for y in cy * factor..(cy + 1) * factor {
            for &v in &band.row(y)[cx * factor..(cx + 1) * factor] {
                sum += v as u32;
            }
        }
        ((2 * sum + count) / (2 * count)) as u8
    })
}

fn generate_pan(p: &SceneParams, rng: &mut ChaCha8Rng) -> Result<Band> {
    let (w, h) = (p.width, p.height);
    // 50x50 background tiles with small steps between neighbours
    let mut canvas: Vec<i32> = (0..h)
        .flat_map(|y| (0..w).map(move |x| 80 + 2 * (x / 50) as i32 + 2 * (y / 50) as i32))
        .collect();

    let features = (p.detail_density * (w * h) as f64 / 10_000.0).round() as usize;
    let cells_x = w / MS_FACTOR;
    let cells_y = h / MS_FACTOR;
    for i in 0..features {
        match i % 5 {
            // flat or ramped rectangle on the MS lattice
            0..=2 => {
                let rw = rng.random_range(2..=16usize).min(cells_x);
                let rh = rng.random_range(2..=16usize).min(cells_y);
                let x0 = rng.random_range(0..=cells_x - rw) * MS_FACTOR;
                let y0 = rng.random_range(0..=cells_y - rh) * MS_FACTOR;
                let level = rng.random_range(30..=230i32);
                let ramp = i % 5 == 2;
                // shallow ramps, at most half a level per pixel
                let quarter_levels = rng.random_range(-2..=2i32);
                for y in y0..y0 + rh * MS_FACTOR {
                    for x in x0..x0 + rw * MS_FACTOR {
                        let v = if ramp {
                            level + quarter_levels * (x - x0) as i32 / 4
                        } else {
                            level
                        };
                        canvas[y * w + x] = v;
                    }
                }
            }
            // thin horizontal or vertical line, 1 or 2 pixels wide
            _ => {
                let thickness = rng.random_range(1..=2usize);
                let level = rng.random_range(20..=250i32);
                if rng.random_bool(0.5) {
                    let y0 = rng.random_range(0..h - thickness + 1);
                    let len = rng.random_range(w / 8..=w / 2).max(1);
                    let x0 = rng.random_range(0..=w - len);
                    for y in y0..y0 + thickness {
                        for x in x0..x0 + len {
                            canvas[y * w + x] = level;
                        }
                    }
                } else {
                    let x0 = rng.random_range(0..w - thickness + 1);
                    let len = rng.random_range(h / 8..=h / 2).max(1);
                    let y0 = rng.random_range(0..=h - len);
                    for y in y0..y0 + len {
                        for x in x0..x0 + thickness {
                            canvas[y * w + x] = level;
                        }
                    }
                }
            }
        }
    }

    let noise = p.noise as i32;
    let px = canvas
        .into_iter()
        .map(|v| {
            let n = if noise > 0 {
                rng.random_range(-noise..=noise)
            } else {
                0
            };
            (v + n).clamp(0, 255) as u8
        })
        .collect();
    Band::new(w, h, px)
}

/// Builds a PAN band and the matching upsampled MS image (label `MS`).
pub fn generate_scene(params: &SceneParams) -> Result<(Band, MultibandImage)> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let pan = generate_pan(params, &mut rng)?;
    let ms_band = |gain: f64| -> Result<Band> {
        let tinted = pan.map(|v| quantize(v as f64 * gain));
        let blurred = box_blur(&tinted, params.blur_radius);
        upsample_nearest(&downsample_mean(&blurred, MS_FACTOR)?, MS_FACTOR)
    };
    let ms = MultibandImage::new(
        "MS",
        ms_band(params.tint[0])?,
        ms_band(params.tint[1])?,
        ms_band(params.tint[2])?,
    )?;
    Ok((pan, ms))
}

/// Injects PAN high frequencies into each MS band and adds a per-band
/// offset. Gain 0 with zero shift returns MS unchanged.
pub fn simulate_fusion(
    pan: &Band,
    ms: &MultibandImage,
    hf_gain: f64,
    spectral_shift: [i32; 3],
) -> Result<MultibandImage> {
    if pan.dims() != ms.dims() {
        return Err(Error::mismatch("fusion inputs", pan.dims(), ms.dims()));
    }
    if !(hf_gain >= 0.0 && hf_gain.is_finite()) {
        return Err(Error::InvalidArgument(
            "hf gain must be finite and >= 0".into(),
        ));
    }
    let (sums, count) = box_sums(pan, HF_BOX_RADIUS);
    let detail: Vec<f64> = pan
        .pixels()
        .iter()
        .zip(&sums)
        .map(|(&v, &s)| v as f64 - s as f64 / count as f64)
        .collect();
    let label = format!(
        "SIM(hf={hf_gain},shift={}/{}/{})",
        spectral_shift[0], spectral_shift[1], spectral_shift[2]
    );
    let mut shifts = spectral_shift.into_iter();
    ms.map_bands(|_, band| {
        let shift = shifts.next().unwrap_or(0) as f64;
        let px = band
            .pixels()
            .iter()
            .zip(&detail)
            .map(|(&m, &d)| quantize(m as f64 + hf_gain * d + shift))
            .collect();
        Band::new(band.width(), band.height(), px)
    })
    .map(|img| img.with_label(label))
}

/// PAN, MS and one fused image per gain, all with `params.spectral_shift`.
pub fn generate_fixture_set(
    params: &SceneParams,
    gains: &[f64],
) -> Result<(Band, MultibandImage, Vec<MultibandImage>)> {
    let (pan, ms) = generate_scene(params)?;
    let fused = gains
        .iter()
        .map(|&g| {
            simulate_fusion(&pan, &ms, g, params.spectral_shift)
                .map(|f| f.with_label(format!("hf{g}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((pan, ms, fused))
}

/// MS on its native grid (one pixel per 5x5 cell).
pub fn ms_native(ms: &MultibandImage) -> Result<MultibandImage> {
    ms.map_bands(|_, band| downsample_mean(band, MS_FACTOR))
}

/// Paths written by [`write_fixture_files`].
#[derive(Debug, Clone)]
pub struct FixtureFiles {
    pub pan: PathBuf,
    pub ms: PathBuf,
    pub fused: Vec<(String, PathBuf)>,
}

/// Writes `pan.pgm`, the native-resolution `ms.ppm` and one
/// `fused_hf{gain}.ppm` per gain into `dir`.
pub fn write_fixture_files(
    dir: &Path,
    params: &SceneParams,
    gains: &[f64],
) -> Result<FixtureFiles> {
    fs::create_dir_all(dir).map_err(|source| Error::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    let (pan, ms, fused) = generate_fixture_set(params, gains)?;
    let files = FixtureFiles {
        pan: dir.join("pan.pgm"),
        ms: dir.join("ms.ppm"),
        fused: fused
            .iter()
            .map(|f| {
                (
                    f.label().to_string(),
                    dir.join(format!("fused_{}.ppm", f.label())),
                )
            })
            .collect(),
    };
    io::write_pgm(&files.pan, &pan)?;
    io::write_ppm(&files.ms, &ms_native(&ms)?)?;
    for (img, (_, path)) in fused.iter().zip(&files.fused) {
        io::write_ppm(path, img)?;
    }
    Ok(files)
}
