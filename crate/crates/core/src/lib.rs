//! Spatial and spectral quality assessment for pan-sharpened imagery.
//!
//! Spatial quality is measured with Michelson contrast over homogeneous
//! blocks and whole images, and with contrast statistical analysis (CSA,
//! `std / mean`) over Sobel edge and homogeneous pixel populations at a
//! sweep of thresholds. Spectral quality is measured with region and
//! whole-image signal-to-noise ratios and with edge-restricted histogram
//! comparison against the upsampled multispectral reference.

pub mod contrast;
pub mod edge_map;
pub mod error;
pub mod histogram;
pub mod io;
pub mod outcome;
pub mod raster;
pub mod regions;
pub mod report;
pub mod snr;
pub mod synth;

pub use error::{Error, Result};
pub use outcome::{Marker, Outcome};
pub use raster::{Band, BandId, MultibandImage, PixelStats, RegionSpec};
