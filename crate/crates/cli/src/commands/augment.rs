use std::collections::HashMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::Args;
use flatpart::augmentation::{
    plan_samples, read_manifest, render_plan, write_manifest, AugmentConfig, AugmentationPlan, ManifestRecord,
    PatchRecord, TargetFish,
};
use flatpart::evaluation::{format_ground_truth, GroundTruthRecord};
use flatpart::part_segmentation::PartLabelMap;
use flatpart::raster::{write_color, write_mask};
use rayon::prelude::*;

use crate::files::{create_dir, image_entries, report_failure, require_dir, require_file, sibling, Entry};
use crate::{pool, CliError, CmdResult, Outcome, PipelineConfig};

/// Class written for samples whose box has no part label.
pub const UNLABELED_CLASS: &str = "disease";

#[derive(Debug, Args)]
pub struct AugmentArgs {
    /// Disease patches: `<id>.png` with `<id>_mask.png`.
    #[arg(long)]
    pub patches: PathBuf,
    /// Non-diseased fish: `<id>.png` with `<id>_mask.png`.
    #[arg(long)]
    pub fish: PathBuf,
    /// Part label maps (`<id>_labels.png`); boxes are then classed by part.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Re-render the samples listed in this manifest instead of drawing new ones.
    #[arg(long)]
    pub regenerate: Option<PathBuf>,
    #[arg(long)]
    pub scale_min: Option<f64>,
    #[arg(long)]
    pub scale_max: Option<f64>,
    #[arg(long)]
    pub max_retries: Option<u32>,
    #[arg(long)]
    pub ring_width: Option<f64>,
}

impl AugmentArgs {
    pub fn apply(&self, c: &mut PipelineConfig) {
        if self.seed.is_some() {
            c.seed = self.seed;
        }
        if let Some(v) = self.count {
            c.count = v;
        }
        if let Some(v) = self.scale_min {
            c.scale_min = v;
        }
        if let Some(v) = self.scale_max {
            c.scale_max = v;
        }
        if let Some(v) = self.max_retries {
            c.max_retries = v;
        }
        if let Some(v) = self.ring_width {
            c.ring_width = v;
        }
    }
}

fn load_patch(e: &Entry) -> anyhow::Result<PatchRecord> {
    let mask = e.read_mask()?.ok_or_else(|| anyhow!("no mask beside {}", e.image.display()))?;
    Ok(PatchRecord::new(e.id.clone(), e.read_image()?, mask)?)
}

fn load_fish(e: &Entry, labels: Option<&Path>) -> anyhow::Result<TargetFish> {
    let mask = e.read_mask()?.ok_or_else(|| anyhow!("no mask beside {}", e.image.display()))?;
    let label_map = match labels {
        Some(dir) => {
            let path = sibling(dir, &e.id, "_labels", Some("png"))
                .ok_or_else(|| anyhow!("no label map for {} in {}", e.id, dir.display()))?;
            let gray = image::open(&path).with_context(|| format!("reading {}", path.display()))?.to_luma8();
            Some(PartLabelMap::from_indexed(&gray)?)
        }
        None => None,
    };
    Ok(TargetFish::new(e.id.clone(), e.read_image()?, mask, label_map)?)
}

/// Loads every entry of `dir`, reporting and skipping the ones that fail.
fn load_all<T: Send>(
    dir: &Path,
    load: impl Fn(&Entry) -> anyhow::Result<T> + Sync,
    failures: &mut usize,
) -> anyhow::Result<Vec<T>> {
    let entries = image_entries(dir)?;
    let loaded: Vec<anyhow::Result<T>> = entries.par_iter().map(&load).collect();
    let mut out = Vec::new();
    for (e, r) in entries.iter().zip(loaded) {
        match r {
            Ok(v) => out.push(v),
            Err(err) => {
                *failures += 1;
                report_failure(&e.id, &err);
            }
        }
    }
    Ok(out)
}

struct Inputs {
    patches: Vec<PatchRecord>,
    fish: Vec<TargetFish>,
    patch_index: HashMap<String, usize>,
    fish_index: HashMap<String, usize>,
}

/// Renders `plan` and writes the image (and the fish mask beside it) under `out`.
fn emit(
    inputs: &Inputs,
    plan: &AugmentationPlan,
    image: &str,
    out: &Path,
    config: &AugmentConfig,
) -> anyhow::Result<ManifestRecord> {
    let patch = inputs
        .patch_index
        .get(&plan.patch_id)
        .map(|&i| &inputs.patches[i])
        .ok_or_else(|| anyhow!("unknown patch `{}`", plan.patch_id))?;
    let fish = inputs
        .fish_index
        .get(&plan.fish_id)
        .map(|&i| &inputs.fish[i])
        .ok_or_else(|| anyhow!("unknown fish `{}`", plan.fish_id))?;
    let sample = render_plan(patch, fish, plan, config)?;
    let path = out.join(image);
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    write_color(&sample.image, &path)?;
    write_mask(&fish.mask, &mask_path(&path))?;
    Ok(ManifestRecord {
        image: image.to_string(),
        patch_id: plan.patch_id.clone(),
        fish_id: plan.fish_id.clone(),
        anchor: [plan.anchor.x, plan.anchor.y],
        scale: plan.scale,
        seed: plan.seed,
        gt_box: sample.gt_box,
        part_class: sample.part_class,
    })
}

fn mask_path(image: &Path) -> PathBuf {
    let stem = image.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    image.with_file_name(format!("{stem}_mask.png"))
}

pub fn image_id(record: &ManifestRecord) -> String {
    Path::new(&record.image)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or(&record.image)
        .to_string()
}

pub fn ground_truth(records: &[ManifestRecord]) -> Vec<GroundTruthRecord> {
    records
        .iter()
        .map(|r| GroundTruthRecord {
            image_id: image_id(r),
            class: r.part_class.map_or(UNLABELED_CLASS, |p| p.as_str()).to_string(),
            bbox: r.gt_box,
            identity: r.fish_id.clone(),
            side: None,
        })
        .collect()
}

/// Writes `images/aug_NNNNN.png` (+ `_mask.png`), `manifest.jsonl` and `gt.txt` under `--out`.
pub fn run(args: &AugmentArgs, config: &PipelineConfig) -> CmdResult {
    require_dir(&args.patches, "patch")?;
    require_dir(&args.fish, "fish")?;
    if let Some(dir) = &args.labels {
        require_dir(dir, "label")?;
    }
    if let Some(m) = &args.regenerate {
        require_file(m, "manifest")?;
    }
    let seed = match &args.regenerate {
        Some(_) => None,
        None => Some(config.require_seed().map_err(CliError::Usage)?),
    };
    create_dir(&args.out)?;
    let cfg = config.augment_config();
    let pool = pool(config)?;

    let mut failures = 0;
    let (patches, fish) = pool.install(|| -> anyhow::Result<_> {
        let p = load_all(&args.patches, load_patch, &mut failures)?;
        let f = load_all(&args.fish, |e| load_fish(e, args.labels.as_deref()), &mut failures)?;
        Ok((p, f))
    })?;
    if patches.is_empty() || fish.is_empty() {
        return Err(CliError::Failed(anyhow!("need at least one usable patch and one usable fish")));
    }
    let inputs = Inputs {
        patch_index: patches.iter().enumerate().map(|(i, p)| (p.id.clone(), i)).collect(),
        fish_index: fish.iter().enumerate().map(|(i, f)| (f.id.clone(), i)).collect(),
        patches,
        fish,
    };

    let (jobs, wanted): (Vec<(AugmentationPlan, String)>, usize) = match &args.regenerate {
        Some(manifest) => {
            let records = read_manifest(manifest)?;
            let n = records.len();
            (records.into_iter().map(|r| (r.plan(), r.image)).collect(), n)
        }
        None => {
            let max_draws = config.count.saturating_mul(config.draws_per_sample);
            let (plans, skipped) =
                plan_samples(&inputs.patches, &inputs.fish, config.count, seed.unwrap(), max_draws, &cfg)?;
            for (p, f, e) in &skipped {
                eprintln!("skipped patch {p} on fish {f}: {e}");
            }
            let jobs = plans
                .into_iter()
                .enumerate()
                .map(|(i, plan)| (plan, format!("images/aug_{i:05}.png")))
                .collect();
            (jobs, config.count)
        }
    };

    let rendered: Vec<anyhow::Result<ManifestRecord>> = pool.install(|| {
        jobs.par_iter()
            .map(|(plan, image)| emit(&inputs, plan, image, &args.out, &cfg))
            .collect()
    });
    let mut records = Vec::new();
    for ((_, image), r) in jobs.iter().zip(rendered) {
        match r {
            Ok(record) => records.push(record),
            Err(e) => {
                failures += 1;
                report_failure(image, &e);
            }
        }
    }
    write_manifest(&args.out.join("manifest.jsonl"), &records)?;
    let gt_path = args.out.join("gt.txt");
    std::fs::write(&gt_path, format_ground_truth(&ground_truth(&records)))
        .with_context(|| format!("writing {}", gt_path.display()))?;

    println!("augment: {} of {} samples written to {}", records.len(), wanted, args.out.display());
    if records.len() < wanted {
        println!("shortfall: {} samples could not be produced", wanted - records.len());
        return Ok(Outcome::Partial);
    }
    Ok(if failures == 0 { Outcome::Success } else { Outcome::Partial })
}
