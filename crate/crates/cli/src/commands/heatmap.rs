use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{anyhow, Context};
use clap::Args;
use flatpart::evaluation::{read_ground_truth, FishSide, GroundTruthRecord};
use flatpart::heatmap::{warp_box, CanonicalFrame, Footprint, Heatmap, OccurrenceGrid};
use flatpart::mask_ops::{bbox_from_mask, infer_head_side, HeadSide};
use flatpart::raster::read_mask;
use flatpart::BoundingBox;
use rayon::prelude::*;

use crate::files::{create_dir, report_failure, require_dir, require_file, sibling};
use crate::{pool, CliError, CmdResult, Outcome, PipelineConfig};

#[derive(Debug, Args)]
pub struct HeatmapArgs {
    /// Ground-truth boxes in aligned-image coordinates; a missing side means ocular.
    #[arg(long)]
    pub gt: PathBuf,
    /// Aligned fish masks, `<image_id>_mask.png`.
    #[arg(long)]
    pub aligned: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Gaussian smoothing in canonical pixels; off by default.
    #[arg(long)]
    pub smoothing: Option<f64>,
    #[arg(long)]
    pub width: Option<u32>,
    #[arg(long)]
    pub height: Option<u32>,
}

impl HeatmapArgs {
    pub fn apply(&self, c: &mut PipelineConfig) {
        if self.smoothing.is_some() {
            c.heatmap_smoothing = self.smoothing;
        }
        if let Some(v) = self.width {
            c.heatmap_width = v;
        }
        if let Some(v) = self.height {
            c.heatmap_height = v;
        }
    }
}

/// Fish box and head side of one aligned image.
type FishFrame = (BoundingBox, HeadSide);

fn fish_frame(args: &HeatmapArgs, image_id: &str) -> anyhow::Result<FishFrame> {
    let path = sibling(&args.aligned, image_id, "_mask", Some("png"))
        .ok_or_else(|| anyhow!("no mask for {image_id} in {}", args.aligned.display()))?;
    let mask = read_mask(&path)?;
    Ok((bbox_from_mask(&mask)?, infer_head_side(&mask)?))
}

/// Footprint in the head-left canonical frame.
fn footprint(record: &GroundTruthRecord, frame: &FishFrame, canonical: CanonicalFrame) -> anyhow::Result<Footprint> {
    let f = warp_box(&record.bbox, &frame.0, canonical)?;
    Ok(match frame.1 {
        HeadSide::Left => f,
        HeadSide::Right => f.mirrored(canonical),
    })
}

/// Writes `heatmap_<side>.txt` and `heatmap_<side>.png` for each side with annotations.
pub fn run(args: &HeatmapArgs, config: &PipelineConfig) -> CmdResult {
    require_file(&args.gt, "ground-truth")?;
    require_dir(&args.aligned, "aligned")?;
    let records = read_ground_truth(&args.gt)?;
    create_dir(&args.out)?;
    let canonical = CanonicalFrame {
        width: config.heatmap_width,
        height: config.heatmap_height,
    };
    let pool = pool(config)?;

    let mut ids: Vec<&str> = records.iter().map(|r| r.image_id.as_str()).collect();
    ids.sort_unstable();
    ids.dedup();
    let frames: BTreeMap<&str, anyhow::Result<FishFrame>> =
        pool.install(|| ids.par_iter().map(|id| (*id, fish_frame(args, id))).collect());

    let mut failures = 0;
    for (id, frame) in &frames {
        if let Err(e) = frame {
            failures += 1;
            report_failure(id, e);
        }
    }
    let mut by_side: BTreeMap<FishSide, Vec<Footprint>> = BTreeMap::new();
    for (line, r) in records.iter().enumerate() {
        let Ok(frame) = &frames[r.image_id.as_str()] else {
            continue;
        };
        match footprint(r, frame, canonical) {
            Ok(f) => by_side.entry(r.side.unwrap_or(FishSide::Ocular)).or_default().push(f),
            Err(e) => {
                failures += 1;
                report_failure(&format!("{} (record {})", r.image_id, line + 1), &e);
            }
        }
    }
    if by_side.is_empty() {
        return Err(CliError::Failed(flatpart::Error::EmptyInput.into()));
    }

    for (side, footprints) in &by_side {
        let grid = pool.install(|| {
            footprints
                .par_chunks(64)
                .map(|chunk| {
                    let mut g = OccurrenceGrid::new(canonical);
                    chunk.iter().for_each(|f| g.add(f));
                    g
                })
                .reduce(|| OccurrenceGrid::new(canonical), |a, b| a.merge(&b))
        });
        let map = Heatmap::from_grid(&grid, config.heatmap_smoothing)?;
        let name = format!("heatmap_{}", side.as_str());
        let text_path = args.out.join(format!("{name}.txt"));
        std::fs::write(&text_path, map.to_text()).with_context(|| format!("writing {}", text_path.display()))?;
        let png = args.out.join(format!("{name}.png"));
        map.to_color_image()
            .save(&png)
            .with_context(|| format!("writing {}", png.display()))?;
        println!("heatmap {} from {} boxes", side.as_str(), footprints.len());
    }
    Ok(if failures == 0 { Outcome::Success } else { Outcome::Partial })
}
