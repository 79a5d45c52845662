//! Grouped bar charts and histogram overlays as standalone SVG files.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{file_stem, MetricReport};
use crate::contrast::{ContrastMetric, Scope};
use crate::error::{Error, Result};
use crate::histogram::Histogram256;
use crate::raster::BandId;
use crate::snr::SnrVariant;

const PALETTE: [&str; 8] = [
    "#d62728", "#2ca02c", "#1f77b4", "#7f7f7f", "#ff7f0e", "#9467bd", "#8c564b", "#17becf",
];

/// Bars grouped along the x axis; one colour per series.
#[derive(Debug, Clone, PartialEq)]
pub struct BarChart {
    pub title: String,
    pub y_label: String,
    pub groups: Vec<String>,
    pub series: Vec<String>,
    /// `values[group][series]`; `None` leaves a gap.
    pub values: Vec<Vec<Option<f64>>>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChartSummary {
    pub written: Vec<PathBuf>,
    pub skipped: Vec<String>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Smallest 1/2/5 x 10^k at or above `v`.
fn nice_ceiling(v: f64) -> f64 {
    if v <= 0.0 {
        return 1.0;
    }
    let base = 10f64.powf(v.log10().floor());
    for m in [1.0, 2.0, 5.0, 10.0] {
        if m * base >= v * (1.0 - 1e-12) {
            return m * base;
        }
    }
    10.0 * base
}

impl BarChart {
    pub fn has_values(&self) -> bool {
        self.values.iter().flatten().any(|v| v.is_some())
    }

    pub fn to_svg(&self) -> String {
        let bar_w = 14.0;
        let gap = 18.0;
        let (left, right, top, bottom) = (64.0, 150.0, 36.0, 56.0);
        let plot_h = 240.0;
        let group_w = self.series.len() as f64 * bar_w + gap;
        let plot_w = (self.groups.len() as f64 * group_w).max(120.0);
        let width = left + plot_w + right;
        let height = top + plot_h + bottom;
        let max = self
            .values
            .iter()
            .flatten()
            .flatten()
            .fold(0.0f64, |a, &v| a.max(v.abs()));
        let y_max = nice_ceiling(max);
        let y = |v: f64| top + plot_h * (1.0 - v.max(0.0) / y_max);

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="20" font-size="14" text-anchor="middle">{}</text>"#,
            width / 2.0,
            esc(&self.title)
        );
        for i in 0..=4 {
            let v = y_max * i as f64 / 4.0;
            draw_line(&mut s, left, y(v), left + plot_w, y(v), "#dddddd");
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                left - 6.0,
                y(v) + 4.0,
                super::format_value(v)
            );
        }
        draw_line(&mut s, left, top, left, top + plot_h, "black");
        draw_line(
            &mut s,
            left,
            top + plot_h,
            left + plot_w,
            top + plot_h,
            "black",
        );
        let _ = writeln!(
            s,
            r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
            top + plot_h / 2.0,
            top + plot_h / 2.0,
            esc(&self.y_label)
        );
        for (gi, group) in self.groups.iter().enumerate() {
            let gx = left + gap / 2.0 + gi as f64 * group_w;
            for (si, v) in self.values[gi].iter().enumerate() {
                if let Some(v) = v {
                    let x = gx + si as f64 * bar_w;
                    let _ = writeln!(
                        s,
                        r#"<rect x="{x:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{}"><title>{} {}: {}</title></rect>"#,
                        y(*v),
                        bar_w - 1.0,
                        top + plot_h - y(*v),
                        PALETTE[si % PALETTE.len()],
                        esc(group),
                        esc(&self.series[si]),
                        super::format_value(*v)
                    );
                }
            }
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                gx + (group_w - gap) / 2.0,
                top + plot_h + 16.0,
                esc(group)
            );
        }
        for (si, name) in self.series.iter().enumerate() {
            let ly = top + 10.0 + si as f64 * 16.0;
            let lx = left + plot_w + 16.0;
            let _ = writeln!(
                s,
                r#"<rect x="{lx:.1}" y="{:.1}" width="10" height="10" fill="{}"/><text x="{:.1}" y="{ly:.1}">{}</text>"#,
                ly - 9.0,
                PALETTE[si % PALETTE.len()],
                lx + 14.0,
                esc(name)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn draw_line(s: &mut String, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str) {
    let _ = writeln!(
        s,
        r#"<line x1="{x1:.1}" y1="{y1:.1}" x2="{x2:.1}" y2="{y2:.1}" stroke="{stroke}"/>"#
    );
}

/// Normalised fused and reference histograms drawn as two polylines.
fn overlay_svg(
    title: &str,
    fused: &Histogram256,
    reference: &Histogram256,
    names: [&str; 2],
) -> String {
    let (left, top, plot_w, plot_h) = (56.0, 36.0, 512.0, 220.0);
    let norm = |h: &Histogram256| -> Vec<f64> {
        let t = h.total().max(1) as f64;
        h.bins().iter().map(|&c| c as f64 / t).collect()
    };
    let series = [norm(fused), norm(reference)];
    let max = series.iter().flatten().fold(0.0f64, |a, &v| a.max(v));
    let y_max = nice_ceiling(max);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="700" height="300" viewBox="0 0 700 300" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="350" y="20" font-size="14" text-anchor="middle">{}</text>"#,
        esc(title)
    );
    draw_line(&mut s, left, top, left, top + plot_h, "black");
    draw_line(
        &mut s,
        left,
        top + plot_h,
        left + plot_w,
        top + plot_h,
        "black",
    );
    for v in [0u32, 64, 128, 192, 255] {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{v}</text>"#,
            left + v as f64 * 2.0,
            top + plot_h + 16.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
        left - 6.0,
        top + 4.0,
        super::format_value(y_max)
    );
    for (i, values) in series.iter().enumerate() {
        let points: Vec<String> = values
            .iter()
            .enumerate()
            .map(|(x, v)| {
                format!(
                    "{:.1},{:.2}",
                    left + x as f64 * 2.0,
                    top + plot_h * (1.0 - v / y_max)
                )
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{}" points="{}"/>"#,
            PALETTE[i + 1],
            points.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<rect x="590" y="{}" width="10" height="10" fill="{}"/><text x="604" y="{}">{}</text>"#,
            top as i32 + i as i32 * 16,
            PALETTE[i + 1],
            top as i32 + 9 + i as i32 * 16,
            esc(names[i])
        );
    }
    s.push_str("</svg>\n");
    s
}

fn band_order(b: BandId) -> usize {
    match b {
        BandId::R => 0,
        BandId::G => 1,
        BandId::B => 2,
        BandId::L => 3,
        BandId::Pan => 4,
    }
}

/// Collects `(group, series, value)` triples into a chart, keeping the
/// first-seen order of groups and the given order of series.
fn build_chart(
    title: String,
    y_label: &str,
    series: Vec<String>,
    points: Vec<(String, String, Option<f64>)>,
) -> BarChart {
    let mut groups: Vec<String> = Vec::new();
    for (g, _, _) in &points {
        if !groups.contains(g) {
            groups.push(g.clone());
        }
    }
    let mut values = vec![vec![None; series.len()]; groups.len()];
    for (g, s, v) in points {
        let gi = groups
            .iter()
            .position(|x| *x == g)
            .expect("group collected");
        let si = series.iter().position(|x| *x == s).expect("series listed");
        values[gi][si] = v;
    }
    BarChart {
        title,
        y_label: y_label.into(),
        groups,
        series,
        values,
    }
}

fn bands_present(bands: impl Iterator<Item = BandId>) -> Vec<BandId> {
    let set: BTreeSet<(usize, BandId)> = bands.map(|b| (band_order(b), b)).collect();
    set.into_iter().map(|(_, b)| b).collect()
}

/// Every chart the report supports, keyed by file name.
fn charts(report: &MetricReport) -> Vec<(String, BarChart)> {
    let mut out = Vec::new();

    let mut scopes = vec![Scope::Whole];
    scopes.extend(
        report
            .regions
            .groups()
            .iter()
            .map(|g| Scope::region(&g.name)),
    );
    for metric in [ContrastMetric::Michelson, ContrastMetric::Csa] {
        for scope in &scopes {
            let entries: Vec<_> = report
                .contrast
                .iter()
                .filter(|e| e.result.metric == metric && &e.result.scope == scope)
                .collect();
            let bands = bands_present(entries.iter().map(|e| e.result.band));
            let points = entries
                .iter()
                .map(|e| {
                    (
                        e.method.clone(),
                        e.result.band.to_string(),
                        e.result.value.value(),
                    )
                })
                .collect();
            let chart = build_chart(
                format!("{} contrast, {}", metric.as_str(), scope.label()),
                metric.as_str(),
                bands.iter().map(|b| b.to_string()).collect(),
                points,
            );
            out.push((
                format!("{}_{}.svg", metric.as_str(), file_stem(scope.label())),
                chart,
            ));
        }
    }

    let all_bands = bands_present(report.edge_rates.iter().map(|e| e.band));
    let thresholds: Vec<String> = report.thresholds.iter().map(|t| format!("T={t}")).collect();
    for band in &all_bands {
        for (prefix, homogeneous) in [("edge_csa", false), ("homogeneous_csa", true)] {
            let points = report
                .contrast
                .iter()
                .filter(|e| e.result.band == *band && e.result.metric == ContrastMetric::Csa)
                .filter_map(|e| match (&e.result.scope, homogeneous) {
                    (Scope::Edges { threshold }, false)
                    | (Scope::Homogeneous { threshold }, true) => Some((
                        e.method.clone(),
                        format!("T={threshold}"),
                        e.result.value.value(),
                    )),
                    _ => None,
                })
                .collect();
            let what = if homogeneous { "homogeneous" } else { "edge" };
            out.push((
                format!("{prefix}_{band}.svg"),
                build_chart(
                    format!("CSA over {what} pixels, band {band}"),
                    "csa",
                    thresholds.clone(),
                    points,
                ),
            ));
        }
        let points = report
            .edge_rates
            .iter()
            .filter(|e| e.band == *band)
            .map(|e| (e.method.clone(), format!("T={}", e.threshold), Some(e.rate)))
            .collect();
        out.push((
            format!("edge_rate_{band}.svg"),
            build_chart(
                format!("Edge rate, band {band}"),
                "edge rate",
                thresholds.clone(),
                points,
            ),
        ));
    }

    let rgb: Vec<String> = BandId::RGB.iter().map(|b| b.to_string()).collect();
    for group in report.regions.groups() {
        let points = report
            .snr
            .iter()
            .filter(|e| e.result.variant == SnrVariant::RegionA && e.result.scope == group.name)
            .map(|e| {
                (
                    e.method.clone(),
                    e.result.band.to_string(),
                    e.result.value.value(),
                )
            })
            .collect();
        out.push((
            format!("snr_a_{}.svg", file_stem(&group.name)),
            build_chart(
                format!("Region SNR, {}", group.name),
                "mean / std",
                rgb.clone(),
                points,
            ),
        ));
    }
    let points = report
        .snr
        .iter()
        .filter(|e| e.result.variant == SnrVariant::WholeB)
        .map(|e| {
            (
                e.method.clone(),
                e.result.band.to_string(),
                e.result.value.value(),
            )
        })
        .collect();
    out.push((
        "snr_b.svg".into(),
        build_chart("Whole-image SNR against MS".into(), "snr", rgb, points),
    ));

    let rgbl: Vec<String> = BandId::RGBL.iter().map(|b| b.to_string()).collect();
    for scope in ["edges", "whole"] {
        let points = report
            .histograms
            .iter()
            .filter(|e| e.scope.label() == scope)
            .map(|e| (e.method.clone(), e.band.to_string(), e.delta.value()))
            .collect();
        out.push((
            format!("hist_delta_{scope}.svg"),
            build_chart(
                format!("Histogram distance to MS, {scope}"),
                "distance",
                rgbl.clone(),
                points,
            ),
        ));
    }
    out
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes every non-empty chart into `dir`. Charts without a single numeric
/// value are skipped and listed in the summary.
pub fn render_charts(report: &MetricReport, dir: &Path) -> Result<ChartSummary> {
    fs::create_dir_all(dir).map_err(|source| Error::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut summary = ChartSummary::default();
    for (name, chart) in charts(report) {
        if !chart.has_values() {
            summary
                .skipped
                .push(format!("chart {name} skipped: no numeric values"));
            continue;
        }
        let path = dir.join(&name);
        write(&path, &chart.to_svg())?;
        summary.written.push(path);
    }
    for h in report
        .histograms
        .iter()
        .filter(|h| matches!(h.scope, Scope::Edges { .. }))
    {
        if h.fused.total() == 0 && h.reference_histogram.total() == 0 {
            continue;
        }
        let name = format!("hist_overlay_{}_{}.svg", file_stem(&h.method), h.band);
        let title = format!(
            "Edge-pixel histogram, band {} (T={})",
            h.band,
            h.scope.threshold().unwrap_or_default()
        );
        let path = dir.join(&name);
        write(
            &path,
            &overlay_svg(
                &title,
                &h.fused,
                &h.reference_histogram,
                [&h.method, &h.reference],
            ),
        )?;
        summary.written.push(path);
    }
    Ok(summary)
}
