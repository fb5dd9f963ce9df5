use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::AugmentationPlan;
use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, Point};
use crate::part_segmentation::PartLabel;

/// One line of the augmentation manifest.
///
/// Fields: `image` (output path relative to the manifest), `patch_id`,
/// `fish_id`, `anchor` (`[x, y]` center of the scaled patch in fish pixels),
/// `scale`, `seed` (placement seed), `gt_box` (`cx`, `cy`, `w`, `h`) and
/// `part_class` (`head`, `fins`, `body` or null).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestRecord {
    pub image: String,
    pub patch_id: String,
    pub fish_id: String,
    pub anchor: [f64; 2],
    pub scale: f64,
    pub seed: u64,
    pub gt_box: BoundingBox,
    pub part_class: Option<PartLabel>,
}

impl ManifestRecord {
    pub fn plan(&self) -> AugmentationPlan {
        AugmentationPlan {
            patch_id: self.patch_id.clone(),
            fish_id: self.fish_id.clone(),
            anchor: Point::new(self.anchor[0], self.anchor[1]),
            scale: self.scale,
            seed: self.seed,
        }
    }
}

pub fn format_manifest(records: &[ManifestRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let line = serde_json::to_string(r).expect("manifest records always serialize");
        writeln!(out, "{line}").expect("writing to a String");
    }
    out
}

/// Parses manifest text; blank lines are skipped. `origin` names the source in errors.
pub fn parse_manifest(text: &str, origin: &str) -> Result<Vec<ManifestRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: ManifestRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
            path: origin.to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

pub fn write_manifest(path: &Path, records: &[ManifestRecord]) -> Result<()> {
    std::fs::write(path, format_manifest(records)).map_err(|e| Error::io(path, e))
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_manifest(&text, &path.display().to_string())
}
