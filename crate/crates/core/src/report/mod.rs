//! Multi-method evaluation reports.
//!
//! [`evaluate_images`] runs the full metric suite over an MS reference, the
//! PAN band and any number of fused images; [`run_evaluate`] adds file
//! ingestion and writes `report.json`, `report.csv`, per-histogram CSVs and
//! SVG charts. Output is byte-identical for identical inputs, provided the
//! timestamp is pinned.

mod csv;
mod svg;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contrast::{csa_band_report, region_contrast, ContrastMetric, ContrastResult, Scope};
use crate::edge_map::{threshold_sweep, DEFAULT_THRESHOLDS};
use crate::error::{Error, Result};
use crate::histogram::{edge_histogram_suite, whole_histogram_suite, Histogram256};
use crate::io;
use crate::outcome::Outcome;
use crate::raster::{upsample_nearest, Band, BandId, MultibandImage};
use crate::regions::{load_region_set, RegionConfig, RegionSet};
use crate::snr::{snr_region_report, snr_whole_report, SnrResult};

pub use self::csv::{
    contrast_row, edge_rate_row, format_value, histogram_row, parse_csv_report, report_csv,
    rows_to_csv, snr_row, CsvRow,
};
pub use self::svg::{render_charts, BarChart, ChartSummary};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MS_LABEL: &str = "MS";
pub const PAN_LABEL: &str = "PAN";

/// Threshold for the edge-restricted histogram comparison.
pub const DEFAULT_HISTOGRAM_THRESHOLD: u8 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputRole {
    Pan,
    Ms,
    Fused,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputEntry {
    pub role: InputRole,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    /// Size as read from disk.
    pub source_width: usize,
    pub source_height: usize,
    /// Nearest-neighbour factor applied before evaluation (1 = none).
    pub upsample_factor: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastEntry {
    pub method: String,
    #[serde(flatten)]
    pub result: ContrastResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrEntry {
    pub method: String,
    #[serde(flatten)]
    pub result: SnrResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRateEntry {
    pub method: String,
    pub band: BandId,
    pub threshold: u8,
    pub edge_count: usize,
    pub total: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramEntry {
    pub method: String,
    pub reference: String,
    pub band: BandId,
    pub scope: Scope,
    pub delta: Outcome,
    pub fused: Histogram256,
    pub reference_histogram: Histogram256,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub tool_version: String,
    /// Unix seconds; `None` when the caller did not pin a time.
    pub generated_at: Option<u64>,
    pub inputs: Vec<InputEntry>,
    pub regions: RegionSet,
    pub thresholds: Vec<u8>,
    pub histogram_threshold: u8,
    pub contrast: Vec<ContrastEntry>,
    pub snr: Vec<SnrEntry>,
    pub edge_rates: Vec<EdgeRateEntry>,
    pub histograms: Vec<HistogramEntry>,
    pub notes: Vec<String>,
}

impl MetricReport {
    /// Method labels in report order: MS, PAN, then fused inputs.
    pub fn methods(&self) -> Vec<&str> {
        self.inputs.iter().map(|i| i.label.as_str()).collect()
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(format!("report.json: {e}")))
    }
}

/// Images ready for evaluation; MS is already on the PAN grid.
#[derive(Debug, Clone)]
pub struct EvalInputs {
    pub pan: Band,
    pub ms: MultibandImage,
    pub fused: Vec<MultibandImage>,
}

#[derive(Debug, Clone)]
pub struct EvalSettings {
    pub regions: RegionSet,
    pub thresholds: Vec<u8>,
    pub histogram_threshold: u8,
}

impl EvalSettings {
    /// Default regions and thresholds for a `width x height` image.
    pub fn defaults(width: usize, height: usize) -> Result<Self> {
        Ok(EvalSettings {
            regions: load_region_set(&RegionConfig::default(), (width, height))?,
            thresholds: DEFAULT_THRESHOLDS.to_vec(),
            histogram_threshold: DEFAULT_HISTOGRAM_THRESHOLD,
        })
    }
}

#[derive(Default)]
struct MethodResults {
    contrast: Vec<ContrastEntry>,
    snr: Vec<SnrEntry>,
    edge_rates: Vec<EdgeRateEntry>,
    histograms: Vec<HistogramEntry>,
}

enum Job<'a> {
    Pan(&'a Band),
    Ms(&'a MultibandImage),
    Fused(&'a MultibandImage),
}

/// Spatial metrics for one band: Michelson and CSA over regions and the
/// whole band, then edge/homogeneous CSA and edge rates per threshold.
fn spatial_metrics(
    method: &str,
    band_id: BandId,
    band: &Band,
    s: &EvalSettings,
    out: &mut MethodResults,
) -> Result<()> {
    let wrap = |result: ContrastResult| ContrastEntry {
        method: method.to_string(),
        result,
    };
    for metric in [ContrastMetric::Michelson, ContrastMetric::Csa] {
        out.contrast.extend(
            region_contrast(metric, band_id, band, &s.regions, true)?
                .into_iter()
                .map(wrap),
        );
    }
    let sweep = threshold_sweep(band, &s.thresholds)?;
    let masks: Vec<_> = sweep.iter().map(|e| e.mask.clone()).collect();
    out.contrast.extend(
        csa_band_report(band_id, band, &masks)?
            .into_iter()
            .map(wrap),
    );
    out.edge_rates.extend(sweep.iter().map(|e| EdgeRateEntry {
        method: method.to_string(),
        band: band_id,
        threshold: e.threshold,
        edge_count: e.mask.edge_count(),
        total: band.len(),
        rate: e.rate,
    }));
    Ok(())
}

fn run_job(job: &Job<'_>, ms: &MultibandImage, s: &EvalSettings) -> Result<MethodResults> {
    let mut out = MethodResults::default();
    match job {
        Job::Pan(pan) => spatial_metrics(PAN_LABEL, BandId::Pan, pan, s, &mut out)?,
        Job::Ms(img) | Job::Fused(img) => {
            let method = img.label();
            for (band_id, band) in img.bands() {
                spatial_metrics(method, band_id, band, s, &mut out)?;
            }
            out.snr.extend(
                snr_region_report(img, &s.regions)?
                    .into_iter()
                    .map(|result| SnrEntry {
                        method: method.to_string(),
                        result,
                    }),
            );
            if let Job::Fused(_) = job {
                out.snr.extend(
                    snr_whole_report(img, ms)?
                        .into_iter()
                        .map(|result| SnrEntry {
                            method: method.to_string(),
                            result,
                        }),
                );
                let edge = edge_histogram_suite(img, ms, s.histogram_threshold)?;
                let whole = whole_histogram_suite(img, ms)?;
                out.histograms
                    .extend(edge.into_iter().chain(whole).map(|pair| HistogramEntry {
                        method: method.to_string(),
                        reference: ms.label().to_string(),
                        band: pair.band,
                        scope: pair.fused.scope().clone(),
                        delta: pair.delta,
                        fused: pair.fused,
                        reference_histogram: pair.reference,
                    }));
            }
        }
    }
    Ok(out)
}

/// Runs every metric family. MS and fused images get spatial and spectral
/// metrics; PAN gets spatial metrics only. Entries are ordered MS, PAN,
/// then fused inputs in the order given.
pub fn evaluate_images(
    inputs: &EvalInputs,
    settings: &EvalSettings,
    manifest: Vec<InputEntry>,
    generated_at: Option<u64>,
) -> Result<MetricReport> {
    let dims = inputs.pan.dims();
    if inputs.ms.dims() != dims {
        return Err(Error::mismatch("MS vs PAN", inputs.ms.dims(), dims));
    }
    for f in &inputs.fused {
        if f.dims() != dims {
            return Err(Error::mismatch(
                format!("fused `{}` vs PAN", f.label()),
                f.dims(),
                dims,
            ));
        }
    }
    settings.regions.check_bounds(dims.0, dims.1)?;

    let mut jobs = vec![Job::Ms(&inputs.ms), Job::Pan(&inputs.pan)];
    jobs.extend(inputs.fused.iter().map(Job::Fused));
    let results = jobs
        .par_iter()
        .map(|job| run_job(job, &inputs.ms, settings))
        .collect::<Result<Vec<_>>>()?;

    let mut report = MetricReport {
        tool_version: TOOL_VERSION.to_string(),
        generated_at,
        inputs: manifest,
        regions: settings.regions.clone(),
        thresholds: settings.thresholds.clone(),
        histogram_threshold: settings.histogram_threshold,
        contrast: Vec::new(),
        snr: Vec::new(),
        edge_rates: Vec::new(),
        histograms: Vec::new(),
        notes: Vec::new(),
    };
    for r in results {
        report.contrast.extend(r.contrast);
        report.snr.extend(r.snr);
        report.edge_rates.extend(r.edge_rates);
        report.histograms.extend(r.histograms);
    }
    Ok(report)
}

/// Builds a manifest for in-memory inputs (no paths, no upsampling).
pub fn manifest_for(inputs: &EvalInputs) -> Vec<InputEntry> {
    let (w, h) = inputs.pan.dims();
    let entry = |role, label: &str| InputEntry {
        role,
        label: label.to_string(),
        path: None,
        source_width: w,
        source_height: h,
        upsample_factor: 1,
    };
    let mut out = vec![
        entry(InputRole::Ms, inputs.ms.label()),
        entry(InputRole::Pan, PAN_LABEL),
    ];
    out.extend(
        inputs
            .fused
            .iter()
            .map(|f| entry(InputRole::Fused, f.label())),
    );
    out
}

#[derive(Debug, Clone)]
pub struct EvaluateRequest {
    pub pan: PathBuf,
    pub ms: PathBuf,
    pub fused: Vec<(String, PathBuf)>,
    pub config: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub thresholds: Vec<u8>,
    pub histogram_threshold: u8,
    pub generated_at: Option<u64>,
}

impl EvaluateRequest {
    pub fn new(
        pan: impl Into<PathBuf>,
        ms: impl Into<PathBuf>,
        out_dir: impl Into<PathBuf>,
    ) -> Self {
        EvaluateRequest {
            pan: pan.into(),
            ms: ms.into(),
            fused: Vec::new(),
            config: None,
            out_dir: out_dir.into(),
            thresholds: DEFAULT_THRESHOLDS.to_vec(),
            histogram_threshold: DEFAULT_HISTOGRAM_THRESHOLD,
            generated_at: None,
        }
    }
}

/// Integer factor taking the MS grid onto the PAN grid.
pub fn infer_upsample_factor(pan: (usize, usize), ms: (usize, usize)) -> Result<usize> {
    let mismatch = || Error::mismatch("MS upsampling (PAN vs MS)", pan, ms);
    if !pan.0.is_multiple_of(ms.0) || !pan.1.is_multiple_of(ms.1) {
        return Err(mismatch());
    }
    let (fx, fy) = (pan.0 / ms.0, pan.1 / ms.1);
    if fx != fy || fx == 0 {
        return Err(mismatch());
    }
    Ok(fx)
}

fn check_labels(fused: &[(String, PathBuf)]) -> Result<()> {
    let mut seen: Vec<&str> = vec![MS_LABEL, PAN_LABEL];
    for (label, _) in fused {
        if label.is_empty() {
            return Err(Error::InvalidArgument("fused image label is empty".into()));
        }
        if seen.contains(&label.as_str()) {
            return Err(Error::InvalidArgument(format!(
                "fused image label `{label}` is reserved or repeated"
            )));
        }
        seen.push(label);
    }
    Ok(())
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// File-name-safe version of a label.
pub(crate) fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Reads inputs, evaluates, and writes every output file into `out_dir`.
pub fn run_evaluate(req: &EvaluateRequest) -> Result<MetricReport> {
    if req.fused.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one fused image is required".into(),
        ));
    }
    check_labels(&req.fused)?;
    let pan = io::read_gray(&req.pan)?;
    let ms_raw = io::read_rgb(&req.ms, MS_LABEL)?;
    let factor = infer_upsample_factor(pan.dims(), ms_raw.dims())?;
    let ms = ms_raw.map_bands(|_, b| upsample_nearest(b, factor))?;

    let mut manifest = vec![
        InputEntry {
            role: InputRole::Ms,
            label: MS_LABEL.into(),
            path: Some(req.ms.display().to_string()),
            source_width: ms_raw.width(),
            source_height: ms_raw.height(),
            upsample_factor: factor,
        },
        InputEntry {
            role: InputRole::Pan,
            label: PAN_LABEL.into(),
            path: Some(req.pan.display().to_string()),
            source_width: pan.width(),
            source_height: pan.height(),
            upsample_factor: 1,
        },
    ];
    let mut fused = Vec::with_capacity(req.fused.len());
    for (label, path) in &req.fused {
        let img = io::read_rgb(path, label)?;
        if img.dims() != pan.dims() {
            return Err(Error::mismatch(
                format!("fused `{label}` vs PAN"),
                img.dims(),
                pan.dims(),
            ));
        }
        manifest.push(InputEntry {
            role: InputRole::Fused,
            label: label.clone(),
            path: Some(path.display().to_string()),
            source_width: img.width(),
            source_height: img.height(),
            upsample_factor: 1,
        });
        fused.push(img);
    }

    let config = match &req.config {
        Some(path) => RegionConfig::from_file(path)?,
        None => RegionConfig::default(),
    };
    let settings = EvalSettings {
        regions: load_region_set(&config, pan.dims())?,
        thresholds: req.thresholds.clone(),
        histogram_threshold: req.histogram_threshold,
    };
    let inputs = EvalInputs { pan, ms, fused };
    let mut report = evaluate_images(&inputs, &settings, manifest, req.generated_at)?;
    write_outputs(&mut report, &req.out_dir)?;
    Ok(report)
}

/// Writes charts, histogram CSVs, `report.csv` and `report.json`. Notes about
/// skipped charts are added to the report before it is serialized.
pub fn write_outputs(report: &mut MetricReport, out_dir: &Path) -> Result<()> {
    create_dir(out_dir)?;
    let charts = render_charts(report, &out_dir.join("charts"))?;
    report.notes.extend(charts.skipped);

    let hist_dir = out_dir.join("histograms");
    create_dir(&hist_dir)?;
    for h in &report.histograms {
        let scope = match h.scope.threshold() {
            Some(t) => format!("edges{t}"),
            None => h.scope.label().to_string(),
        };
        let stem = format!("{}_{}_{}", file_stem(&h.method), h.band, scope);
        write_text(&hist_dir.join(format!("{stem}.csv")), &h.fused.to_csv())?;
        write_text(
            &hist_dir.join(format!("{stem}_{}.csv", file_stem(&h.reference))),
            &h.reference_histogram.to_csv(),
        )?;
    }
    write_text(&out_dir.join("report.csv"), &report_csv(report))?;
    write_text(&out_dir.join("report.json"), &report.to_json())?;
    Ok(())
}
