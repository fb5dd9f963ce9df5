use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use flatpart::mask_ops::{align_horizontal, mask_from_color_fallback, AlignedFish, HeadSide};
use flatpart::raster::{write_color, write_mask};
use rayon::prelude::*;

use crate::files::{create_dir, image_entries, report_failure, require_dir, Entry};
use crate::{pool, CmdResult, Outcome, PipelineConfig};

#[derive(Debug, Args)]
pub struct AlignArgs {
    /// Images, each optionally with `<id>_mask.<ext>`; without a mask the
    /// foreground is estimated from the border color.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Crop margin as a fraction of the fish length.
    #[arg(long)]
    pub margin: Option<f64>,
    /// Mirror outputs so the head is on this side.
    #[arg(long)]
    pub canonical_head: Option<HeadSide>,
    /// Keep the detected head side instead of mirroring.
    #[arg(long, conflicts_with = "canonical_head")]
    pub keep_orientation: bool,
}

impl AlignArgs {
    pub fn apply(&self, c: &mut PipelineConfig) {
        if let Some(m) = self.margin {
            c.align_margin = m;
        }
        if self.canonical_head.is_some() {
            c.canonical_head = self.canonical_head;
        }
        if self.keep_orientation {
            c.canonical_head = None;
        }
    }
}

fn align_one(entry: &Entry, config: &PipelineConfig, args: &AlignArgs) -> anyhow::Result<AlignedFish> {
    let image = entry.read_image()?;
    let mask = match entry.read_mask()? {
        Some(m) => m,
        None => mask_from_color_fallback(&image, &config.segmentation_config())?,
    };
    let aligned = align_horizontal(&image, &mask, &config.align_config())?;
    write_color(&aligned.image, &args.out.join(format!("{}.png", entry.id)))?;
    write_mask(&aligned.mask, &args.out.join(format!("{}_mask.png", entry.id)))?;
    Ok(aligned)
}

/// Writes `<id>.png` and `<id>_mask.png` per input plus `bboxes.txt`
/// (`image_id cx cy w h`, source-image coordinates).
pub fn run(args: &AlignArgs, config: &PipelineConfig) -> CmdResult {
    require_dir(&args.input, "input")?;
    let entries = image_entries(&args.input)?;
    create_dir(&args.out)?;
    let results: Vec<anyhow::Result<AlignedFish>> =
        pool(config)?.install(|| entries.par_iter().map(|e| align_one(e, config, args)).collect());

    let mut boxes = String::new();
    let mut failures = 0;
    for (entry, result) in entries.iter().zip(&results) {
        match result {
            Ok(a) => {
                let b = a.source_bbox;
                writeln!(boxes, "{} {} {} {} {}", entry.id, b.cx, b.cy, b.w, b.h).unwrap();
                println!(
                    "aligned {} rotation {:.3} head {} flipped {}",
                    entry.id,
                    a.rotation_deg,
                    a.head_side.as_str(),
                    a.flipped
                );
            }
            Err(e) => {
                failures += 1;
                report_failure(&entry.id, e);
            }
        }
    }
    let path = args.out.join("bboxes.txt");
    std::fs::write(&path, boxes).with_context(|| format!("writing {}", path.display()))?;
    println!("align: {} of {} images aligned", entries.len() - failures, entries.len());
    Ok(if failures == 0 { Outcome::Success } else { Outcome::Partial })
}
