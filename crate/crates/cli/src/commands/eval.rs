use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use flatpart::evaluation::{evaluate, evaluate_folds, kfold_split, read_detections, read_ground_truth};

use crate::files::require_file;
use crate::{CliError, CmdResult, Outcome, PipelineConfig};

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// `image_id class cx cy w h confidence` per line.
    #[arg(long)]
    pub dets: PathBuf,
    /// `image_id class cx cy w h identity_id [ocular|blind]` per line.
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub iou: Option<f64>,
    /// Score identity-disjoint folds separately.
    #[arg(long)]
    pub per_fold: bool,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl EvalArgs {
    pub fn apply(&self, c: &mut PipelineConfig) {
        if let Some(v) = self.iou {
            c.iou_threshold = v;
        }
        if let Some(v) = self.folds {
            c.folds = v;
        }
        if self.seed.is_some() {
            c.seed = self.seed;
        }
    }
}

pub fn run(args: &EvalArgs, config: &PipelineConfig) -> CmdResult {
    require_file(&args.dets, "detection")?;
    require_file(&args.gt, "ground-truth")?;
    let seed = if args.per_fold || args.folds.is_some() {
        Some(config.require_seed().map_err(CliError::Usage)?)
    } else {
        None
    };
    let dets = read_detections(&args.dets)?;
    let gts = read_ground_truth(&args.gt)?;
    let threshold = config.iou_threshold;

    let text = match seed {
        None => evaluate(&dets, &gts, threshold)?.to_text(),
        Some(seed) => {
            let folds = kfold_split(&gts, config.folds, seed)?;
            let reports = evaluate_folds(&dets, &gts, config.folds, seed, threshold)?;
            let mut out = String::new();
            for (i, (fold, report)) in folds.iter().zip(&reports).enumerate() {
                writeln!(out, "fold {i} identities {} records {}", fold.identities.len(), fold.records.len()).unwrap();
                out.push_str(&report.to_text());
            }
            let mean = reports.iter().map(|r| r.map).sum::<f64>() / reports.len() as f64;
            writeln!(out, "mean_map {mean:.9}").unwrap();
            out
        }
    };
    print!("{text}");
    if let Some(path) = &args.out {
        std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(Outcome::Success)
}
