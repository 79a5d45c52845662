//! Signal-to-noise ratios for spectral quality.
//!
//! Two variants: the region ratio `mean / std` over a homogeneous block, and
//! the whole-image ratio `sqrt(sum F^2 / sum (F - M)^2)` between a fused band
//! `F` and the upsampled multispectral reference `M`. All sums run in `f64`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::outcome::Outcome;
use crate::raster::{pixel_stats, Band, BandId, MultibandImage, PixelStats};
use crate::regions::RegionSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnrVariant {
    RegionA,
    WholeB,
}

impl SnrVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            SnrVariant::RegionA => "snr_a",
            SnrVariant::WholeB => "snr_b",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrResult {
    pub variant: SnrVariant,
    pub band: BandId,
    /// Region group name, or `whole`.
    pub scope: String,
    pub value: Outcome,
    pub n: usize,
    /// Label of the reference image; always set for [`SnrVariant::WholeB`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
}

pub fn snr_region_from_stats(stats: &PixelStats) -> Result<f64> {
    if stats.std_dev == 0.0 {
        return Err(Error::ZeroDeviation);
    }
    Ok(stats.mean / stats.std_dev)
}

/// `mean / std` of a pixel population.
pub fn snr_region(pixels: &[u8]) -> Result<f64> {
    snr_region_from_stats(&pixel_stats(pixels)?)
}

/// Whole-image SNR of `fused` against `reference`.
///
/// Returns [`Error::IdenticalImages`] when the two bands are equal.
pub fn snr_whole(fused: &Band, reference: &Band) -> Result<f64> {
    if fused.dims() != reference.dims() {
        return Err(Error::mismatch(
            "whole-image SNR",
            fused.dims(),
            reference.dims(),
        ));
    }
    let (mut signal, mut noise) = (0.0f64, 0.0f64);
    for (&f, &m) in fused.pixels().iter().zip(reference.pixels()) {
        let f = f as f64;
        let d = f - m as f64;
        signal += f * f;
        noise += d * d;
    }
    if noise == 0.0 {
        return Err(Error::IdenticalImages);
    }
    Ok((signal / noise).sqrt())
}

/// Region SNR for every band and region group, in R, G, B order.
pub fn snr_region_report(img: &MultibandImage, regions: &RegionSet) -> Result<Vec<SnrResult>> {
    regions.check_bounds(img.width(), img.height())?;
    let mut out = Vec::with_capacity(3 * regions.groups().len());
    for (band_id, band) in img.bands() {
        for group in regions.groups() {
            let stats = PixelStats::from_counts(&group.counts(band))?;
            out.push(SnrResult {
                variant: SnrVariant::RegionA,
                band: band_id,
                scope: group.name.clone(),
                value: Outcome::from_result(snr_region_from_stats(&stats))?,
                n: stats.n,
                reference: None,
            });
        }
    }
    Ok(out)
}

/// Whole-image SNR of each fused band against the matching reference band.
pub fn snr_whole_report(fused: &MultibandImage, ms: &MultibandImage) -> Result<Vec<SnrResult>> {
    if fused.dims() != ms.dims() {
        return Err(Error::mismatch(
            format!("`{}` vs `{}`", fused.label(), ms.label()),
            fused.dims(),
            ms.dims(),
        ));
    }
    fused
        .bands()
        .into_iter()
        .zip(ms.bands())
        .map(|((band_id, f), (_, m))| {
            Ok(SnrResult {
                variant: SnrVariant::WholeB,
                band: band_id,
                scope: "whole".into(),
                value: Outcome::from_result(snr_whole(f, m))?,
                n: f.len(),
                reference: Some(ms.label().to_string()),
            })
        })
        .collect()
}
