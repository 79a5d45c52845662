//! Brightness histograms over whole bands or edge pixels only, and the
//! total-variation distance between normalised histograms.
//!
//! In the edge suite each image contributes the pixels of its own edge mask:
//! the fused image is masked by its own gradient and the reference by its
//! own, never by a shared mask.

use serde::{Deserialize, Serialize};

use crate::contrast::Scope;
use crate::edge_map::{label_edges, sobel_magnitude, EdgeMask};
use crate::error::{Error, Result};
use crate::outcome::Outcome;
use crate::raster::{l_component, Band, BandId, MultibandImage};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawHistogram")]
pub struct Histogram256 {
    band: BandId,
    scope: Scope,
    total: u64,
    bins: Vec<u64>,
}

#[derive(Deserialize)]
struct RawHistogram {
    band: BandId,
    scope: Scope,
    total: u64,
    bins: Vec<u64>,
}

impl TryFrom<RawHistogram> for Histogram256 {
    type Error = String;

    fn try_from(raw: RawHistogram) -> std::result::Result<Self, String> {
        if raw.bins.len() != 256 {
            return Err(format!(
                "histogram needs 256 bins, found {}",
                raw.bins.len()
            ));
        }
        if raw.bins.iter().sum::<u64>() != raw.total {
            return Err("histogram total does not match its bins".into());
        }
        Ok(Histogram256 {
            band: raw.band,
            scope: raw.scope,
            total: raw.total,
            bins: raw.bins,
        })
    }
}

impl Histogram256 {
    pub fn from_counts(band: BandId, scope: Scope, counts: [u64; 256]) -> Self {
        Histogram256 {
            band,
            scope,
            total: counts.iter().sum(),
            bins: counts.to_vec(),
        }
    }

    pub fn band(&self) -> BandId {
        self.band
    }

    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn bins(&self) -> &[u64] {
        &self.bins
    }

    pub fn count(&self, intensity: u8) -> u64 {
        self.bins[intensity as usize]
    }

    /// 256 rows of `intensity,count` under a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("intensity,count\n");
        for (v, c) in self.bins.iter().enumerate() {
            out.push_str(&format!("{v},{c}\n"));
        }
        out
    }
}

/// Counts intensities over the whole band, or over edge pixels when a mask
/// is given.
pub fn build_histogram(
    band: &Band,
    band_id: BandId,
    mask: Option<&EdgeMask>,
) -> Result<Histogram256> {
    let mut counts = [0u64; 256];
    let scope = match mask {
        None => {
            for &v in band.pixels() {
                counts[v as usize] += 1;
            }
            Scope::Whole
        }
        Some(mask) => {
            if mask.dims() != band.dims() {
                return Err(Error::mismatch("histogram mask", band.dims(), mask.dims()));
            }
            for (&v, &edge) in band.pixels().iter().zip(mask.labels()) {
                if edge {
                    counts[v as usize] += 1;
                }
            }
            Scope::Edges {
                threshold: mask.threshold(),
            }
        }
    };
    Ok(Histogram256::from_counts(band_id, scope, counts))
}

/// Total-variation distance `0.5 * sum |p1 - p2|` between the normalised
/// histograms, in [0, 1].
pub fn histogram_delta(h1: &Histogram256, h2: &Histogram256) -> Result<f64> {
    if h1.total == 0 || h2.total == 0 {
        return Err(Error::EmptyHistogram);
    }
    // cross-multiplied in integers so only the final division rounds
    let (n1, n2) = (h1.total as i128, h2.total as i128);
    let diff: i128 = h1
        .bins
        .iter()
        .zip(&h2.bins)
        .map(|(&a, &b)| (a as i128 * n2 - b as i128 * n1).abs())
        .sum();
    Ok(diff as f64 / (2.0 * n1 as f64 * n2 as f64))
}

/// Fused and reference histograms for one band, with their distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramPair {
    pub band: BandId,
    pub fused: Histogram256,
    pub reference: Histogram256,
    pub delta: Outcome,
}

fn bands_with_l(img: &MultibandImage) -> [(BandId, Band); 4] {
    [
        (BandId::R, img.r().clone()),
        (BandId::G, img.g().clone()),
        (BandId::B, img.b().clone()),
        (BandId::L, l_component(img)),
    ]
}

fn pair_histograms(
    fused: &MultibandImage,
    ms: &MultibandImage,
    threshold: Option<u8>,
) -> Result<Vec<HistogramPair>> {
    if fused.dims() != ms.dims() {
        return Err(Error::mismatch(
            format!("histograms of `{}` vs `{}`", fused.label(), ms.label()),
            fused.dims(),
            ms.dims(),
        ));
    }
    let own_hist = |band_id: BandId, band: &Band| match threshold {
        Some(t) => {
            let mask = label_edges(&sobel_magnitude(band), t);
            build_histogram(band, band_id, Some(&mask))
        }
        None => build_histogram(band, band_id, None),
    };
    bands_with_l(fused)
        .iter()
        .zip(bands_with_l(ms).iter())
        .map(|((band_id, f), (_, m))| {
            let fused_hist = own_hist(*band_id, f)?;
            let ms_hist = own_hist(*band_id, m)?;
            let delta = Outcome::from_result(histogram_delta(&fused_hist, &ms_hist))?;
            Ok(HistogramPair {
                band: *band_id,
                fused: fused_hist,
                reference: ms_hist,
                delta,
            })
        })
        .collect()
}

/// Edge-pixel histograms for R, G, B and L at `threshold`.
pub fn edge_histogram_suite(
    fused: &MultibandImage,
    ms: &MultibandImage,
    threshold: u8,
) -> Result<Vec<HistogramPair>> {
    pair_histograms(fused, ms, Some(threshold))
}

/// Whole-image histograms for R, G, B and L.
pub fn whole_histogram_suite(
    fused: &MultibandImage,
    ms: &MultibandImage,
) -> Result<Vec<HistogramPair>> {
    pair_histograms(fused, ms, None)
}
