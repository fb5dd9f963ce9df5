use std::path::PathBuf;

use anyhow::{anyhow, Context};
use clap::Args;
use flatpart::mask_ops::{infer_head_side, HeadSide};
use flatpart::part_segmentation::{segment_parts, BodyProfile, PartLabel};
use flatpart::raster::{write_color, ColorImage};
use image::Rgb;
use rayon::prelude::*;

use crate::files::{create_dir, image_entries, report_failure, require_dir, Entry};
use crate::overlay::draw_overlay;
use crate::{pool, CmdResult, Outcome, PipelineConfig};

#[derive(Debug, Args)]
pub struct PartsegArgs {
    /// Aligned fish: `<id>.png` with `<id>_mask.png`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub profile: Option<BodyProfile>,
    /// Head side of every input; inferred per mask when omitted.
    #[arg(long)]
    pub head_side: Option<HeadSide>,
}

impl PartsegArgs {
    pub fn apply(&self, c: &mut PipelineConfig) {
        if let Some(p) = self.profile {
            c.profile = p;
        }
    }
}

fn segment_one(entry: &Entry, config: &PipelineConfig, args: &PartsegArgs) -> anyhow::Result<[usize; 4]> {
    let mask = entry.read_mask()?.ok_or_else(|| anyhow!("no mask beside {}", entry.image.display()))?;
    let side = match args.head_side {
        Some(s) => s,
        None => infer_head_side(&mask)?,
    };
    let seg = segment_parts(&mask, side, config.profile, &config.part)?;
    let base = match entry.read_image() {
        Ok(img) if img.dimensions() == mask.dimensions() => img,
        _ => ColorImage::from_fn(mask.width(), mask.height(), |x, y| {
            if mask.get(x, y) {
                Rgb([160, 160, 160])
            } else {
                Rgb([0, 0, 0])
            }
        }),
    };
    let labels_path = args.out.join(format!("{}_labels.png", entry.id));
    seg.labels
        .to_indexed()
        .save(&labels_path)
        .with_context(|| format!("writing {}", labels_path.display()))?;
    let sidecar = args.out.join(format!("{}_parts.txt", entry.id));
    std::fs::write(&sidecar, seg.sidecar()).with_context(|| format!("writing {}", sidecar.display()))?;
    write_color(&draw_overlay(&base, &seg), &args.out.join(format!("{}_overlay.png", entry.id)))?;
    Ok(seg.labels.counts())
}

/// Writes `<id>_labels.png` (0 background, 1 head, 2 fins, 3 body),
/// `<id>_parts.txt` and `<id>_overlay.png` per aligned fish.
pub fn run(args: &PartsegArgs, config: &PipelineConfig) -> CmdResult {
    require_dir(&args.input, "input")?;
    let entries = image_entries(&args.input)?;
    create_dir(&args.out)?;
    let results: Vec<anyhow::Result<[usize; 4]>> =
        pool(config)?.install(|| entries.par_iter().map(|e| segment_one(e, config, args)).collect());
    let mut failures = 0;
    for (entry, result) in entries.iter().zip(&results) {
        match result {
            Ok(c) => println!(
                "segmented {} {}={} {}={} {}={}",
                entry.id,
                PartLabel::Head,
                c[1],
                PartLabel::Fins,
                c[2],
                PartLabel::Body,
                c[3]
            ),
            Err(e) => {
                failures += 1;
                report_failure(&entry.id, e);
            }
        }
    }
    println!("partseg: {} of {} fish segmented ({})", entries.len() - failures, entries.len(), config.profile.as_str());
    Ok(if failures == 0 { Outcome::Success } else { Outcome::Partial })
}
