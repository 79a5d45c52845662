//! Flat `report.csv` rendering and parsing.

use serde::{Deserialize, Serialize};

use super::{EdgeRateEntry, MetricReport};
use crate::contrast::ContrastResult;
use crate::error::{Error, Result};
use crate::histogram::Histogram256;
use crate::outcome::{Marker, Outcome};
use crate::snr::SnrResult;

/// One line of `report.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub method: String,
    pub metric: String,
    pub band: String,
    pub scope: String,
    pub threshold: Option<u8>,
    pub value: String,
    pub n: u64,
    pub reference: String,
}

impl CsvRow {
    /// The value cell as a number or marker.
    pub fn outcome(&self) -> Result<Outcome> {
        if let Some(m) = Marker::from_csv_text(&self.value) {
            return Ok(Outcome::Marker(m));
        }
        self.value
            .parse::<f64>()
            .map(Outcome::Value)
            .map_err(|_| Error::Format(format!("bad value cell `{}`", self.value)))
    }
}

/// Six significant digits, `%g` style.
pub fn format_value(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn cell(value: Outcome) -> String {
    match value {
        Outcome::Value(v) => format_value(v),
        Outcome::Marker(m) => m.csv_text(),
    }
}

pub fn contrast_row(method: &str, r: &ContrastResult) -> CsvRow {
    CsvRow {
        method: method.into(),
        metric: r.metric.as_str().into(),
        band: r.band.to_string(),
        scope: r.scope.label().into(),
        threshold: r.scope.threshold(),
        value: cell(r.value),
        n: r.n as u64,
        reference: String::new(),
    }
}

pub fn edge_rate_row(e: &EdgeRateEntry) -> CsvRow {
    CsvRow {
        method: e.method.clone(),
        metric: "edge_rate".into(),
        band: e.band.to_string(),
        scope: "edges".into(),
        threshold: Some(e.threshold),
        value: format_value(e.rate),
        n: e.edge_count as u64,
        reference: String::new(),
    }
}

pub fn snr_row(method: &str, r: &SnrResult) -> CsvRow {
    CsvRow {
        method: method.into(),
        metric: r.variant.as_str().into(),
        band: r.band.to_string(),
        scope: r.scope.clone(),
        threshold: None,
        value: cell(r.value),
        n: r.n as u64,
        reference: r.reference.clone().unwrap_or_default(),
    }
}

pub fn histogram_row(
    method: &str,
    reference: &str,
    fused: &Histogram256,
    delta: Outcome,
) -> CsvRow {
    CsvRow {
        method: method.into(),
        metric: "hist_delta".into(),
        band: fused.band().to_string(),
        scope: fused.scope().label().into(),
        threshold: fused.scope().threshold(),
        value: cell(delta),
        n: fused.total(),
        reference: reference.into(),
    }
}

fn rows(report: &MetricReport) -> Vec<CsvRow> {
    let mut out = Vec::new();
    out.extend(
        report
            .contrast
            .iter()
            .map(|e| contrast_row(&e.method, &e.result)),
    );
    out.extend(report.edge_rates.iter().map(edge_rate_row));
    out.extend(report.snr.iter().map(|e| snr_row(&e.method, &e.result)));
    out.extend(
        report
            .histograms
            .iter()
            .map(|e| histogram_row(&e.method, &e.reference, &e.fused, e.delta)),
    );
    out
}

/// Header line plus one line per row.
pub fn rows_to_csv(rows: &[CsvRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record([
            "method",
            "metric",
            "band",
            "scope",
            "threshold",
            "value",
            "n",
            "reference",
        ])
        .expect("in-memory csv write");
    }
    for row in rows {
        w.serialize(row).expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 csv")
}

/// Renders every metric of `report` as one CSV row.
pub fn report_csv(report: &MetricReport) -> String {
    rows_to_csv(&rows(report))
}

pub fn parse_csv_report(text: &str) -> Result<Vec<CsvRow>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<std::result::Result<Vec<CsvRow>, _>>()
        .map_err(|e| Error::Format(format!("report.csv: {e}")))
}
