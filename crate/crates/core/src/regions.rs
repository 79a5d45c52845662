//! Evaluation regions: named rectangular blocks, optionally pooled into
//! groups whose pixels are evaluated as a single population.
//!
//! The config document is JSON:
//!
//! ```json
//! { "regions": [ { "name": "b1", "x0": 40, "y0": 40, "w": 30, "h": 30 },
//!                { "name": "b3_1", "x0": 60, "y0": 200, "w": 10, "h": 10, "group": "b3" } ] }
//! ```
//!
//! A block without `group` forms a group of its own. An empty or missing
//! `regions` list selects [`default_region_config`]: two 30x30 blocks `b1`,
//! `b2` and seven 10x10 blocks pooled as `b3`. The default coordinates are
//! arbitrary positions inside a 600x525 image.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{Band, RegionSpec};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionEntry {
    pub name: String,
    pub x0: i64,
    pub y0: i64,
    pub w: i64,
    pub h: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    #[serde(default)]
    pub regions: Vec<RegionEntry>,
}

impl RegionConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads and parses a JSON config file. An unreadable file is a read
    /// error; malformed content is a config error naming the file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Blocks evaluated together as one pixel population.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionGroup {
    pub name: String,
    pub blocks: Vec<RegionSpec>,
}

impl RegionGroup {
    pub fn pixel_count(&self) -> usize {
        self.blocks.iter().map(RegionSpec::area).sum()
    }

    /// Intensity counts over the union of the group's blocks.
    pub fn counts(&self, band: &Band) -> [u64; 256] {
        let mut counts = [0u64; 256];
        for block in &self.blocks {
            for y in block.y0..block.y0 + block.h {
                for &v in &band.row(y)[block.x0..block.x0 + block.w] {
                    counts[v as usize] += 1;
                }
            }
        }
        counts
    }
}

/// Validated, ordered region groups for one image size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionSet {
    groups: Vec<RegionGroup>,
}

impl RegionSet {
    pub fn groups(&self) -> &[RegionGroup] {
        &self.groups
    }

    pub fn group(&self, name: &str) -> Option<&RegionGroup> {
        self.groups.iter().find(|g| g.name == name)
    }

    pub fn block_count(&self) -> usize {
        self.groups.iter().map(|g| g.blocks.len()).sum()
    }

    pub fn names(&self) -> Vec<&str> {
        self.groups.iter().map(|g| g.name.as_str()).collect()
    }

    /// Ungrouped blocks, checked against `width x height`.
    pub fn from_blocks(blocks: Vec<RegionSpec>, width: usize, height: usize) -> Result<Self> {
        let entries = blocks
            .into_iter()
            .map(|b| RegionEntry {
                name: b.name,
                x0: b.x0 as i64,
                y0: b.y0 as i64,
                w: b.w as i64,
                h: b.h as i64,
                group: None,
            })
            .collect();
        load_region_set(&RegionConfig { regions: entries }, (width, height))
    }

    pub fn check_bounds(&self, width: usize, height: usize) -> Result<()> {
        self.groups
            .iter()
            .flat_map(|g| &g.blocks)
            .try_for_each(|b| b.check_bounds(width, height))
    }
}

pub fn default_region_config() -> RegionConfig {
    let block = |name: &str, x0, y0, size, group: Option<&str>| RegionEntry {
        name: name.into(),
        x0,
        y0,
        w: size,
        h: size,
        group: group.map(Into::into),
    };
    let b3 = [
        (60, 200),
        (150, 420),
        (250, 120),
        (380, 60),
        (450, 250),
        (540, 440),
        (560, 150),
    ];
    let mut regions = vec![
        block("b1", 40, 40, 30, None),
        block("b2", 300, 360, 30, None),
    ];
    for (i, (x, y)) in b3.into_iter().enumerate() {
        regions.push(block(&format!("b3_{}", i + 1), x, y, 10, Some("b3")));
    }
    RegionConfig { regions }
}

/// Validates a region config against the image size. An empty config yields
/// the default `b1`, `b2`, `b3` set.
pub fn load_region_set(config: &RegionConfig, image_dims: (usize, usize)) -> Result<RegionSet> {
    let defaults;
    let entries = if config.regions.is_empty() {
        defaults = default_region_config();
        &defaults.regions
    } else {
        &config.regions
    };
    let (width, height) = image_dims;

    let mut groups: Vec<RegionGroup> = Vec::new();
    let mut seen: Vec<&str> = Vec::new();
    for (i, e) in entries.iter().enumerate() {
        if e.name.trim().is_empty() {
            return Err(Error::Config(format!(
                "region #{} has an empty name",
                i + 1
            )));
        }
        if seen.contains(&e.name.as_str()) {
            return Err(Error::Config(format!("duplicate region name `{}`", e.name)));
        }
        seen.push(&e.name);
        if e.w < 1 || e.h < 1 {
            return Err(Error::Config(format!(
                "region `{}` has non-positive size {}x{}",
                e.name, e.w, e.h
            )));
        }
        let out_of_bounds = || Error::RegionOutOfBounds {
            name: e.name.clone(),
            x0: e.x0,
            y0: e.y0,
            w: e.w,
            h: e.h,
            width,
            height,
        };
        if e.x0 < 0 || e.y0 < 0 {
            return Err(out_of_bounds());
        }
        let spec = RegionSpec::new(
            e.name.clone(),
            e.x0 as usize,
            e.y0 as usize,
            e.w as usize,
            e.h as usize,
        );
        spec.check_bounds(width, height)
            .map_err(|_| out_of_bounds())?;

        let group_name = e.group.as_deref().unwrap_or(&e.name);
        if group_name.trim().is_empty() {
            return Err(Error::Config(format!(
                "region `{}` has an empty group",
                e.name
            )));
        }
        match groups.iter_mut().find(|g| g.name == group_name) {
            Some(g) => g.blocks.push(spec),
            None => groups.push(RegionGroup {
                name: group_name.to_string(),
                blocks: vec![spec],
            }),
        }
    }

    // a group name may only coincide with the name of one of its own blocks
    for g in &groups {
        let clash = groups
            .iter()
            .filter(|other| other.name != g.name)
            .flat_map(|other| &other.blocks)
            .any(|b| b.name == g.name);
        if clash {
            return Err(Error::Config(format!(
                "group `{}` shares its name with a block of another group",
                g.name
            )));
        }
    }
    Ok(RegionSet { groups })
}

/// Picks the `count` grid-aligned `block_w x block_h` blocks with the
/// smallest variance. Ties keep row-major scan order.
pub fn find_homogeneous_blocks(
    band: &Band,
    block_w: usize,
    block_h: usize,
    count: usize,
) -> Result<Vec<RegionSpec>> {
    if block_w == 0 || block_h == 0 || block_w > band.width() || block_h > band.height() {
        return Err(Error::InvalidArgument(format!(
            "block {block_w}x{block_h} does not fit in a {}x{} band",
            band.width(),
            band.height()
        )));
    }
    if count == 0 {
        return Err(Error::InvalidArgument(
            "block count must be at least 1".into(),
        ));
    }
    let cols = band.width() / block_w;
    let rows = band.height() / block_h;
    if count > cols * rows {
        return Err(Error::InvalidArgument(format!(
            "requested {count} blocks but the grid only has {} cells",
            cols * rows
        )));
    }
    let n = (block_w * block_h) as u128;
    // n^2 * variance, exact in integers, so equal-variance blocks tie exactly
    let mut scored: Vec<(u128, usize, usize)> = Vec::with_capacity(cols * rows);
    for gy in 0..rows {
        for gx in 0..cols {
            let (mut sum, mut sum_sq) = (0u128, 0u128);
            for y in gy * block_h..(gy + 1) * block_h {
                for &v in &band.row(y)[gx * block_w..(gx + 1) * block_w] {
                    sum += v as u128;
                    sum_sq += (v as u128) * (v as u128);
                }
            }
            scored.push((n * sum_sq - sum * sum, gy, gx));
        }
    }
    scored.sort();
    Ok(scored
        .into_iter()
        .take(count)
        .enumerate()
        .map(|(i, (_, gy, gx))| {
            RegionSpec::new(
                format!("auto_{}", i + 1),
                gx * block_w,
                gy * block_h,
                block_w,
                block_h,
            )
        })
        .collect())
}
