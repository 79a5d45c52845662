//! Michelson contrast and contrast statistical analysis (CSA).
//!
//! Michelson contrast is `(Imax - Imin) / (Imax + Imin)` over the exact
//! extremes of a population. CSA substitutes `Imin = mean - std` and
//! `Imax = mean + std`, which reduces to `std / mean`. CSA is evaluated
//! separately over the edge and homogeneous populations of each band's own
//! Sobel mask.

use serde::{Deserialize, Serialize};

use crate::edge_map::EdgeMask;
use crate::error::{Error, Result};
use crate::outcome::{Marker, Outcome};
use crate::raster::{intensity_counts, Band, BandId, MultibandImage, PixelStats};
use crate::regions::RegionSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContrastMetric {
    Michelson,
    Csa,
}

impl ContrastMetric {
    pub fn as_str(self) -> &'static str {
        match self {
            ContrastMetric::Michelson => "michelson",
            ContrastMetric::Csa => "csa",
        }
    }
}

/// The pixel population a metric was evaluated over.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scope {
    Whole,
    Region { name: String },
    Edges { threshold: u8 },
    Homogeneous { threshold: u8 },
}

impl Scope {
    pub fn region(name: impl Into<String>) -> Self {
        Scope::Region { name: name.into() }
    }

    /// Short label used in tables: `whole`, the region name, `edges` or
    /// `homogeneous`.
    pub fn label(&self) -> &str {
        match self {
            Scope::Whole => "whole",
            Scope::Region { name } => name,
            Scope::Edges { .. } => "edges",
            Scope::Homogeneous { .. } => "homogeneous",
        }
    }

    pub fn threshold(&self) -> Option<u8> {
        match self {
            Scope::Edges { threshold } | Scope::Homogeneous { threshold } => Some(*threshold),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastResult {
    pub metric: ContrastMetric,
    pub band: BandId,
    pub scope: Scope,
    pub value: Outcome,
    pub n: usize,
}

/// Michelson contrast from population extremes.
pub fn michelson_from_extremes(min: u8, max: u8) -> Result<f64> {
    let (lo, hi) = (min as f64, max as f64);
    if lo + hi == 0.0 {
        return Err(Error::AllBlack);
    }
    Ok((hi - lo) / (hi + lo))
}

pub fn michelson(pixels: &[u8]) -> Result<f64> {
    let min = pixels.iter().copied().min().ok_or(Error::EmptyRegion)?;
    let max = pixels.iter().copied().max().ok_or(Error::EmptyRegion)?;
    michelson_from_extremes(min, max)
}

/// `std / mean` of a population.
pub fn csa_from_stats(stats: &PixelStats) -> Result<f64> {
    if stats.mean == 0.0 {
        return Err(Error::AllBlack);
    }
    Ok(stats.std_dev / stats.mean)
}

pub fn csa(pixels: &[u8]) -> Result<f64> {
    csa_from_stats(&crate::raster::pixel_stats(pixels)?)
}

fn metric_from_counts(metric: ContrastMetric, counts: &[u64; 256]) -> Result<(Outcome, usize)> {
    let stats = PixelStats::from_counts(counts)?;
    let value = match metric {
        ContrastMetric::Michelson => michelson_from_extremes(stats.min, stats.max),
        ContrastMetric::Csa => csa_from_stats(&stats),
    };
    Ok((Outcome::from_result(value)?, stats.n))
}

/// Edge and homogeneous populations of `band` split by `mask`.
pub(crate) fn split_counts(band: &Band, mask: &EdgeMask) -> ([u64; 256], [u64; 256]) {
    let mut edges = [0u64; 256];
    let mut homogeneous = [0u64; 256];
    for (&v, &is_edge) in band.pixels().iter().zip(mask.labels()) {
        if is_edge {
            edges[v as usize] += 1;
        } else {
            homogeneous[v as usize] += 1;
        }
    }
    (edges, homogeneous)
}

fn population_result(
    band_id: BandId,
    scope: Scope,
    counts: &[u64; 256],
    empty: Marker,
) -> Result<ContrastResult> {
    let (value, n) = if counts.iter().all(|&c| c == 0) {
        (Outcome::Marker(empty), 0)
    } else {
        metric_from_counts(ContrastMetric::Csa, counts)?
    };
    Ok(ContrastResult {
        metric: ContrastMetric::Csa,
        band: band_id,
        scope,
        value,
        n,
    })
}

/// CSA over the edge and homogeneous populations of one band, one pair of
/// results per mask in mask order.
pub fn csa_band_report(
    band_id: BandId,
    band: &Band,
    masks: &[EdgeMask],
) -> Result<Vec<ContrastResult>> {
    let mut out = Vec::with_capacity(masks.len() * 2);
    for mask in masks {
        if mask.dims() != band.dims() {
            return Err(Error::mismatch(
                format!("edge mask for band {band_id}"),
                band.dims(),
                mask.dims(),
            ));
        }
        let threshold = mask.threshold();
        let (edges, homogeneous) = split_counts(band, mask);
        out.push(population_result(
            band_id,
            Scope::Edges { threshold },
            &edges,
            Marker::NoEdges,
        )?);
        out.push(population_result(
            band_id,
            Scope::Homogeneous { threshold },
            &homogeneous,
            Marker::NoHomogeneous,
        )?);
    }
    Ok(out)
}

/// CSA over edge and homogeneous pixels for every band and threshold.
///
/// `masks` holds the R, G and B mask lists, each built from that band's own
/// gradient, with the same thresholds in the same order. Output order is
/// band, then threshold, then edges before homogeneous.
pub fn csa_report(img: &MultibandImage, masks: &[Vec<EdgeMask>; 3]) -> Result<Vec<ContrastResult>> {
    let thresholds = |list: &[EdgeMask]| list.iter().map(EdgeMask::threshold).collect::<Vec<_>>();
    let reference = thresholds(&masks[0]);
    if masks.iter().any(|m| thresholds(m) != reference) {
        return Err(Error::InvalidThresholds(
            "every band needs masks for the same thresholds".into(),
        ));
    }
    let mut out = Vec::with_capacity(reference.len() * 6);
    for ((band_id, band), band_masks) in img.bands().into_iter().zip(masks) {
        out.extend(csa_band_report(band_id, band, band_masks)?);
    }
    Ok(out)
}

/// One metric per region group (pooled) and optionally over the whole band.
pub fn region_contrast(
    metric: ContrastMetric,
    band_id: BandId,
    band: &Band,
    regions: &RegionSet,
    include_whole: bool,
) -> Result<Vec<ContrastResult>> {
    regions.check_bounds(band.width(), band.height())?;
    let mut out = Vec::with_capacity(regions.groups().len() + 1);
    if include_whole {
        let (value, n) =
            metric_from_counts(metric, &intensity_counts(band.pixels().iter().copied()))?;
        out.push(ContrastResult {
            metric,
            band: band_id,
            scope: Scope::Whole,
            value,
            n,
        });
    }
    for group in regions.groups() {
        let (value, n) = metric_from_counts(metric, &group.counts(band))?;
        out.push(ContrastResult {
            metric,
            band: band_id,
            scope: Scope::region(&group.name),
            value,
            n,
        });
    }
    Ok(out)
}

/// Michelson contrast per band over each region group and, optionally, the
/// whole image. Pooled groups are evaluated over the union of their blocks.
pub fn michelson_report(
    img: &MultibandImage,
    regions: &RegionSet,
    include_whole: bool,
) -> Result<Vec<ContrastResult>> {
    let mut out = Vec::new();
    for (band_id, band) in img.bands() {
        out.extend(region_contrast(
            ContrastMetric::Michelson,
            band_id,
            band,
            regions,
            include_whole,
        )?);
    }
    Ok(out)
}

/// Same layout as [`michelson_report`] with CSA as the metric.
pub fn csa_region_report(
    img: &MultibandImage,
    regions: &RegionSet,
    include_whole: bool,
) -> Result<Vec<ContrastResult>> {
    let mut out = Vec::new();
    for (band_id, band) in img.bands() {
        out.extend(region_contrast(
            ContrastMetric::Csa,
            band_id,
            band,
            regions,
            include_whole,
        )?);
    }
    Ok(out)
}
