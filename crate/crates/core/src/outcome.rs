//! Metric values that may be undefined for a given population.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Why a metric has no numeric value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Marker {
    /// No pixel exceeded the edge threshold.
    NoEdges,
    /// Every pixel exceeded the edge threshold.
    NoHomogeneous,
    /// Standard deviation is zero, so mean/deviation is undefined.
    ConstantRegion,
    /// Fused and reference images are equal; the ratio diverges.
    IdenticalImages,
    /// Every pixel is 0, so contrast is 0/0.
    AllBlack,
    EmptyHistogram,
}

impl Marker {
    pub fn as_str(self) -> &'static str {
        match self {
            Marker::NoEdges => "no-edges",
            Marker::NoHomogeneous => "no-homogeneous",
            Marker::ConstantRegion => "constant-region",
            Marker::IdenticalImages => "identical-images",
            Marker::AllBlack => "all-black",
            Marker::EmptyHistogram => "empty-histogram",
        }
    }

    /// Text written in place of a number in CSV output.
    pub fn csv_text(self) -> String {
        format!("NaN({})", self.as_str())
    }

    pub fn from_csv_text(text: &str) -> Option<Marker> {
        let inner = text.strip_prefix("NaN(")?.strip_suffix(')')?;
        [
            Marker::NoEdges,
            Marker::NoHomogeneous,
            Marker::ConstantRegion,
            Marker::IdenticalImages,
            Marker::AllBlack,
            Marker::EmptyHistogram,
        ]
        .into_iter()
        .find(|m| m.as_str() == inner)
    }
}

impl fmt::Display for Marker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A metric value or the reason it is undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Outcome {
    Value(f64),
    Marker(Marker),
}

impl Outcome {
    /// Converts a metric result, turning degenerate-population errors into
    /// markers and passing every other error through.
    pub fn from_result(result: Result<f64>) -> Result<Outcome> {
        match result {
            Ok(v) => Ok(Outcome::Value(v)),
            Err(Error::AllBlack) => Ok(Outcome::Marker(Marker::AllBlack)),
            Err(Error::ZeroDeviation) => Ok(Outcome::Marker(Marker::ConstantRegion)),
            Err(Error::IdenticalImages) => Ok(Outcome::Marker(Marker::IdenticalImages)),
            Err(Error::EmptyHistogram) => Ok(Outcome::Marker(Marker::EmptyHistogram)),
            Err(e) => Err(e),
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Outcome::Value(v) => Some(v),
            Outcome::Marker(_) => None,
        }
    }

    pub fn marker(self) -> Option<Marker> {
        match self {
            Outcome::Value(_) => None,
            Outcome::Marker(m) => Some(m),
        }
    }
}
