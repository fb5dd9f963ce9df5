//! Directory layout shared by the subcommands: `<id>.<ext>` images with
//! optional `<id>_mask.<ext>` foreground masks beside them.

use std::path::{Path, PathBuf};

use anyhow::Context;
use flatpart::raster::{read_color, read_mask, BinaryMask, ColorImage};

use crate::{usage, CliError};

const IMAGE_EXTENSIONS: [&str; 6] = ["png", "jpg", "jpeg", "bmp", "tif", "tiff"];
const DERIVED_SUFFIXES: [&str; 3] = ["_mask", "_labels", "_overlay"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub id: String,
    pub image: PathBuf,
    pub mask: Option<PathBuf>,
}

impl Entry {
    pub fn read_image(&self) -> anyhow::Result<ColorImage> {
        Ok(read_color(&self.image)?)
    }

    pub fn read_mask(&self) -> anyhow::Result<Option<BinaryMask>> {
        self.mask.as_deref().map(read_mask).transpose().map_err(Into::into)
    }
}

pub fn require_dir(path: &Path, what: &str) -> Result<(), CliError> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(usage(format!("{what} directory {} does not exist", path.display())))
    }
}

pub fn require_file(path: &Path, what: &str) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(usage(format!("{what} file {} does not exist", path.display())))
    }
}

pub fn create_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path)
        .with_context(|| format!("creating {}", path.display()))
        .map_err(CliError::Failed)
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

/// Finds `<id><suffix>.<ext>` next to `image`, preferring the image's own extension.
pub fn sibling(dir: &Path, id: &str, suffix: &str, prefer: Option<&str>) -> Option<PathBuf> {
    prefer
        .into_iter()
        .chain(IMAGE_EXTENSIONS)
        .map(|ext| dir.join(format!("{id}{suffix}.{ext}")))
        .find(|p| p.is_file())
}

/// Images of `dir` sorted by id, each with its mask when one exists.
pub fn image_entries(dir: &Path) -> anyhow::Result<Vec<Entry>> {
    let mut out = Vec::new();
    for item in std::fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = item?.path();
        if !path.is_file() || !is_image(&path) {
            continue;
        }
        let Some(id) = path.file_stem().and_then(|s| s.to_str()).map(str::to_string) else {
            continue;
        };
        if DERIVED_SUFFIXES.iter().any(|s| id.ends_with(s)) {
            continue;
        }
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_string);
        let mask = sibling(dir, &id, "_mask", ext.as_deref());
        out.push(Entry { id, image: path, mask });
    }
    out.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(out)
}

/// Per-file failure line, written in one call so parallel workers do not interleave.
pub fn report_failure(id: &str, err: &anyhow::Error) {
    eprintln!("failed {id}: {err:#}");
}
