use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use fusionqa_core::contrast::{
    csa_band_report, region_contrast, ContrastMetric, ContrastResult, Scope,
};
use fusionqa_core::edge_map::{label_edges, sobel_magnitude, threshold_sweep};
use fusionqa_core::histogram::{build_histogram, histogram_delta};
use fusionqa_core::io::{self, DecodedImage};
use fusionqa_core::raster::{l_component, upsample_nearest};
use fusionqa_core::regions::{load_region_set, RegionConfig, RegionEntry, RegionSet};
use fusionqa_core::report::{
    contrast_row, edge_rate_row, histogram_row, infer_upsample_factor, rows_to_csv, run_evaluate,
    snr_row, CsvRow, EdgeRateEntry, EvaluateRequest,
};
use fusionqa_core::snr::{snr_region_from_stats, SnrResult, SnrVariant};
use fusionqa_core::synth::{write_fixture_files, SceneParams};
use fusionqa_core::{Band, BandId, Error, Outcome, PixelStats, Result};

pub fn stem_label(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "image".into())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionArg {
    name: Option<String>,
    rect: [i64; 4],
}

impl RegionArg {
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let (name, rect) = match text.split_once('=') {
            Some((n, r)) => (Some(n.trim().to_string()), r),
            None => (None, text),
        };
        let nums: Vec<i64> = rect
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<i64>()
                    .map_err(|_| format!("bad region component `{p}`"))
            })
            .collect::<std::result::Result<_, _>>()?;
        let rect: [i64; 4] = nums
            .try_into()
            .map_err(|_| format!("expected x0,y0,w,h, got `{text}`"))?;
        Ok(RegionArg { name, rect })
    }
}

fn region_set(
    args: &[RegionArg],
    config: Option<&Path>,
    dims: (usize, usize),
) -> Result<RegionSet> {
    let config = if !args.is_empty() {
        RegionConfig {
            regions: args
                .iter()
                .enumerate()
                .map(|(i, a)| RegionEntry {
                    name: a.name.clone().unwrap_or_else(|| format!("r{}", i + 1)),
                    x0: a.rect[0],
                    y0: a.rect[1],
                    w: a.rect[2],
                    h: a.rect[3],
                    group: None,
                })
                .collect(),
        }
    } else if let Some(path) = config {
        RegionConfig::from_file(path)?
    } else {
        RegionConfig::default()
    };
    load_region_set(&config, dims)
}

/// Bands of an image file: R, G, B for colour, a single PAN band for gray.
fn load_bands(path: &Path) -> Result<Vec<(BandId, Band)>> {
    Ok(match io::read_image(path)? {
        DecodedImage::Gray(b) => vec![(BandId::Pan, b)],
        DecodedImage::Rgb(img) => img
            .bands()
            .into_iter()
            .map(|(id, b)| (id, b.clone()))
            .collect(),
    })
}

/// Loads `reference` and brings it onto the grid of `dims`.
fn load_reference(path: &Path, dims: (usize, usize), count: usize) -> Result<Vec<(BandId, Band)>> {
    let bands = load_bands(path)?;
    if bands.len() != count {
        return Err(Error::Unsupported(format!(
            "{} has {} band(s), the evaluated image has {count}",
            path.display(),
            bands.len()
        )));
    }
    let factor = infer_upsample_factor(dims, bands[0].1.dims())?;
    bands
        .into_iter()
        .map(|(id, b)| Ok((id, upsample_nearest(&b, factor)?)))
        .collect()
}

fn with_l(bands: Vec<(BandId, Band)>, label: &str) -> Result<Vec<(BandId, Band)>> {
    if bands.len() != 3 {
        return Ok(bands);
    }
    let img = fusionqa_core::MultibandImage::new(
        label,
        bands[0].1.clone(),
        bands[1].1.clone(),
        bands[2].1.clone(),
    )?;
    let mut out = bands;
    out.push((BandId::L, l_component(&img)));
    Ok(out)
}

pub fn evaluate(
    pan: PathBuf,
    ms: PathBuf,
    fused: Vec<(String, PathBuf)>,
    config: Option<PathBuf>,
    out: PathBuf,
    thresholds: Vec<u8>,
    hist_threshold: u8,
) -> Result<String> {
    let mut req = EvaluateRequest::new(pan, ms, &out);
    req.fused = fused;
    req.config = config;
    req.thresholds = thresholds;
    req.histogram_threshold = hist_threshold;
    req.generated_at = generated_at()?;
    let report = run_evaluate(&req)?;
    let mut text = format!(
        "evaluated {} inputs; wrote {}/report.json, report.csv, charts/ and histograms/\n",
        report.inputs.len(),
        out.display()
    );
    for note in &report.notes {
        text.push_str(&format!("note: {note}\n"));
    }
    Ok(text)
}

/// `SOURCE_DATE_EPOCH` when set, the current time otherwise.
fn generated_at() -> Result<Option<u64>> {
    match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(raw) => raw.trim().parse().map(Some).map_err(|_| {
            Error::InvalidArgument(format!("SOURCE_DATE_EPOCH is not an integer: `{raw}`"))
        }),
        Err(_) => Ok(SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs())),
    }
}

pub fn edges(image: &Path, thresholds: &[u8], mask_out: Option<&Path>) -> Result<String> {
    let method = stem_label(image);
    let mut rows = Vec::new();
    if let Some(dir) = mask_out {
        std::fs::create_dir_all(dir).map_err(|source| Error::Write {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    for (band_id, band) in load_bands(image)? {
        for entry in threshold_sweep(&band, thresholds)? {
            if let Some(dir) = mask_out {
                let name = format!("{method}_{band_id}_t{}.pgm", entry.threshold);
                io::write_pgm(&dir.join(name), &entry.mask.to_band())?;
            }
            rows.push(edge_rate_row(&EdgeRateEntry {
                method: method.clone(),
                band: band_id,
                threshold: entry.threshold,
                edge_count: entry.mask.edge_count(),
                total: band.len(),
                rate: entry.rate,
            }));
        }
    }
    Ok(rows_to_csv(&rows))
}

fn region_metric(
    metric: ContrastMetric,
    image: &Path,
    regions: &[RegionArg],
    config: Option<&Path>,
    whole: bool,
) -> Result<String> {
    let method = stem_label(image);
    let bands = load_bands(image)?;
    let set = region_set(regions, config, bands[0].1.dims())?;
    let mut rows = Vec::new();
    for (band_id, band) in &bands {
        for r in region_contrast(metric, *band_id, band, &set, whole)? {
            rows.push(contrast_row(&method, &r));
        }
    }
    Ok(rows_to_csv(&rows))
}

pub fn csa(
    image: &Path,
    thresholds: &[u8],
    regions: &[RegionArg],
    config: Option<&Path>,
    whole: bool,
) -> Result<String> {
    if !regions.is_empty() || config.is_some() {
        return region_metric(ContrastMetric::Csa, image, regions, config, whole);
    }
    let method = stem_label(image);
    let mut rows = Vec::new();
    for (band_id, band) in load_bands(image)? {
        if whole {
            let result = ContrastResult {
                metric: ContrastMetric::Csa,
                band: band_id,
                scope: Scope::Whole,
                value: Outcome::from_result(fusionqa_core::contrast::csa(band.pixels()))?,
                n: band.len(),
            };
            rows.push(contrast_row(&method, &result));
        }
        let masks: Vec<_> = threshold_sweep(&band, thresholds)?
            .into_iter()
            .map(|e| e.mask)
            .collect();
        for r in csa_band_report(band_id, &band, &masks)? {
            rows.push(contrast_row(&method, &r));
        }
    }
    Ok(rows_to_csv(&rows))
}

pub fn mtf(
    image: &Path,
    regions: &[RegionArg],
    config: Option<&Path>,
    whole: bool,
) -> Result<String> {
    region_metric(ContrastMetric::Michelson, image, regions, config, whole)
}

pub fn snr_regions(image: &Path, regions: &[RegionArg], config: Option<&Path>) -> Result<String> {
    let method = stem_label(image);
    let bands = load_bands(image)?;
    let set = region_set(regions, config, bands[0].1.dims())?;
    let mut rows = Vec::new();
    for (band_id, band) in &bands {
        for group in set.groups() {
            let stats = PixelStats::from_counts(&group.counts(band))?;
            let result = SnrResult {
                variant: SnrVariant::RegionA,
                band: *band_id,
                scope: group.name.clone(),
                value: Outcome::from_result(snr_region_from_stats(&stats))?,
                n: stats.n,
                reference: None,
            };
            rows.push(snr_row(&method, &result));
        }
    }
    Ok(rows_to_csv(&rows))
}

pub fn snr_whole(image: &Path, reference: &Path) -> Result<String> {
    let method = stem_label(image);
    let ref_label = stem_label(reference);
    let bands = load_bands(image)?;
    let refs = load_reference(reference, bands[0].1.dims(), bands.len())?;
    let mut rows = Vec::new();
    for ((band_id, f), (_, m)) in bands.iter().zip(&refs) {
        let result = SnrResult {
            variant: SnrVariant::WholeB,
            band: *band_id,
            scope: "whole".into(),
            value: Outcome::from_result(fusionqa_core::snr::snr_whole(f, m))?,
            n: f.len(),
            reference: Some(ref_label.clone()),
        };
        rows.push(snr_row(&method, &result));
    }
    Ok(rows_to_csv(&rows))
}

pub fn hist(
    image: &Path,
    reference: &Path,
    threshold: Option<u8>,
    out: Option<&Path>,
) -> Result<String> {
    let method = stem_label(image);
    let ref_label = stem_label(reference);
    let bands = load_bands(image)?;
    let refs = load_reference(reference, bands[0].1.dims(), bands.len())?;
    let bands = with_l(bands, &method)?;
    let refs = with_l(refs, &ref_label)?;
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|source| Error::Write {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    let own_hist = |band_id: BandId, band: &Band| match threshold {
        Some(t) => build_histogram(band, band_id, Some(&label_edges(&sobel_magnitude(band), t))),
        None => build_histogram(band, band_id, None),
    };
    let mut rows: Vec<CsvRow> = Vec::new();
    for ((band_id, f), (_, m)) in bands.iter().zip(&refs) {
        let hf = own_hist(*band_id, f)?;
        let hm = own_hist(*band_id, m)?;
        if let Some(dir) = out {
            let scope = threshold.map_or("whole".to_string(), |t| format!("edges{t}"));
            for (label, h) in [(&method, &hf), (&ref_label, &hm)] {
                let path = dir.join(format!("{label}_{band_id}_{scope}.csv"));
                std::fs::write(&path, h.to_csv())
                    .map_err(|source| Error::Write { path, source })?;
            }
        }
        let delta = Outcome::from_result(histogram_delta(&hf, &hm))?;
        rows.push(histogram_row(&method, &ref_label, &hf, delta));
    }
    Ok(rows_to_csv(&rows))
}

pub fn fixtures(
    out: &Path,
    seed: u64,
    width: usize,
    height: usize,
    gains: &[f64],
    shift: [i32; 3],
) -> Result<String> {
    let params = SceneParams {
        width,
        height,
        seed,
        spectral_shift: shift,
        ..SceneParams::default()
    };
    let files = write_fixture_files(out, &params, gains)?;
    let mut text = format!("{}\n{}\n", files.pan.display(), files.ms.display());
    for (_, path) in &files.fused {
        text.push_str(&format!("{}\n", path.display()));
    }
    Ok(text)
}
