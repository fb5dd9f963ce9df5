use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use flatpart::mask_ops::HeadSide;
use flatpart::part_segmentation::BodyProfile;
use flatpart::raster::{write_color, write_mask};
use flatpart::synth::{generate_fish, generate_patch};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::files::create_dir;
use crate::{pool, CliError, CmdResult, Outcome, PipelineConfig};

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory; fish go to `fish/`, patches to `patches/`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of fish.
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    /// Number of disease patches.
    #[arg(long, default_value_t = 0)]
    pub patches: usize,
    #[arg(long)]
    pub profile: Option<BodyProfile>,
    /// Rotations are drawn uniformly from `[-max, max]` degrees.
    #[arg(long, default_value_t = 0.0)]
    pub max_rotation: f64,
    /// Head side of every fish; random per fish when omitted.
    #[arg(long)]
    pub head_side: Option<HeadSide>,
}

impl SynthArgs {
    pub fn apply(&self, c: &mut PipelineConfig) {
        if self.seed.is_some() {
            c.seed = self.seed;
        }
        if let Some(p) = self.profile {
            c.profile = p;
        }
    }
}

struct FishJob {
    id: String,
    seed: u64,
    rotation: f64,
    side: HeadSide,
}

pub fn run(args: &SynthArgs, config: &PipelineConfig) -> CmdResult {
    let seed = config.require_seed().map_err(CliError::Usage)?;
    if !(args.max_rotation.is_finite() && args.max_rotation >= 0.0) {
        return Err(crate::usage("--max-rotation must be a non-negative angle"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jobs: Vec<FishJob> = (0..args.count)
        .map(|i| {
            let seed = rng.random();
            let rotation = if args.max_rotation > 0.0 {
                rng.random_range(-args.max_rotation..=args.max_rotation)
            } else {
                0.0
            };
            let coin = rng.random_bool(0.5);
            let side = args.head_side.unwrap_or(if coin { HeadSide::Left } else { HeadSide::Right });
            FishJob {
                id: format!("fish_{i:04}"),
                seed,
                rotation,
                side,
            }
        })
        .collect();
    let patch_seeds: Vec<u64> = (0..args.patches).map(|_| rng.random()).collect();

    let fish_dir = args.out.join("fish");
    create_dir(&fish_dir)?;
    let profile = config.profile;
    let truths = pool(config)?.install(|| {
        jobs.par_iter()
            .map(|job| -> anyhow::Result<String> {
                let fish = generate_fish(job.seed, profile, job.side, job.rotation);
                write_color(&fish.image, &fish_dir.join(format!("{}.png", job.id)))?;
                write_mask(&fish.mask, &fish_dir.join(format!("{}_mask.png", job.id)))?;
                Ok(format!("{{\"id\":\"{}\",\"truth\":{}}}", job.id, serde_json::to_string(&fish.truth)?))
            })
            .collect::<anyhow::Result<Vec<String>>>()
    })?;
    let mut text = String::new();
    for t in truths {
        writeln!(text, "{t}").unwrap();
    }
    let truth_path = args.out.join("truth.jsonl");
    std::fs::write(&truth_path, text).with_context(|| format!("writing {}", truth_path.display()))?;

    if !patch_seeds.is_empty() {
        let patch_dir = args.out.join("patches");
        create_dir(&patch_dir)?;
        for (i, s) in patch_seeds.iter().enumerate() {
            let (image, mask) = generate_patch(&mut ChaCha8Rng::seed_from_u64(*s));
            write_color(&image, &patch_dir.join(format!("patch_{i:04}.png")))?;
            write_mask(&mask, &patch_dir.join(format!("patch_{i:04}_mask.png")))?;
        }
    }
    println!("synth: {} fish, {} patches in {}", args.count, args.patches, args.out.display());
    Ok(Outcome::Success)
}
