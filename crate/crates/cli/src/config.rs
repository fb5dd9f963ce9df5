//! Pipeline configuration as a plain `key = value` file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use flatpart::augmentation::AugmentConfig;
use flatpart::mask_ops::{AlignConfig, HeadSide, SegmentationConfig};
use flatpart::part_segmentation::{BodyProfile, PartConfig};

/// Every tunable of the pipeline. Precedence is flags, then file, then these defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Required by every randomized command.
    pub seed: Option<u64>,
    /// Worker threads; `None` uses the available parallelism, capped at 8.
    pub workers: Option<usize>,
    pub align_margin: f64,
    pub canonical_head: Option<HeadSide>,
    pub foreground_threshold: f64,
    pub profile: BodyProfile,
    pub part: PartConfig,
    pub scale_min: f64,
    pub scale_max: f64,
    pub max_retries: u32,
    pub ring_width: f64,
    pub count: usize,
    /// Draw budget per requested sample before reporting a shortfall.
    pub draws_per_sample: usize,
    pub iou_threshold: f64,
    pub folds: usize,
    pub heatmap_width: u32,
    pub heatmap_height: u32,
    pub heatmap_smoothing: Option<f64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: None,
            workers: None,
            align_margin: AlignConfig::default().margin_fraction,
            canonical_head: Some(HeadSide::Left),
            foreground_threshold: SegmentationConfig::default().threshold,
            profile: BodyProfile::Flatfish,
            part: PartConfig::default(),
            scale_min: 0.8,
            scale_max: 1.2,
            max_retries: 1000,
            ring_width: 8.0,
            count: 100,
            draws_per_sample: 10,
            iou_threshold: 0.5,
            folds: 5,
            heatmap_width: 512,
            heatmap_height: 256,
            heatmap_smoothing: None,
        }
    }
}

fn optional<T: ToString>(v: &Option<T>, none: &str) -> String {
    v.as_ref().map_or(none.to_string(), T::to_string)
}

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| anyhow!("`{key}`: cannot parse `{raw}`"))
}

fn value_or<T: FromStr>(key: &str, raw: &str, none: &str) -> Result<Option<T>> {
    if raw == none {
        Ok(None)
    } else {
        value(key, raw).map(Some)
    }
}

impl PipelineConfig {
    pub fn to_text(&self) -> String {
        let p = &self.part;
        let mut out = String::from("# flatpart pipeline configuration\n");
        let entries: [(&str, String); 24] = [
            ("seed", optional(&self.seed, "none")),
            ("workers", optional(&self.workers, "auto")),
            ("align.margin", self.align_margin.to_string()),
            ("align.canonical_head", self.canonical_head.map_or("none", HeadSide::as_str).to_string()),
            ("align.foreground_threshold", self.foreground_threshold.to_string()),
            ("part.profile", self.profile.as_str().to_string()),
            ("part.smoothing_window", p.smoothing_window.to_string()),
            ("part.extremum_radius", p.extremum_radius.to_string()),
            ("part.search_window", p.tail_search_fraction.to_string()),
            ("part.head_offset", p.head_offset.to_string()),
            ("part.tail_circle", p.tail_circle_ratio.to_string()),
            ("part.fin_band", p.fin_band_ratio.to_string()),
            ("part.gap_tolerance", p.gap_tolerance.to_string()),
            ("augment.scale_min", self.scale_min.to_string()),
            ("augment.scale_max", self.scale_max.to_string()),
            ("augment.max_retries", self.max_retries.to_string()),
            ("augment.ring_width", self.ring_width.to_string()),
            ("augment.count", self.count.to_string()),
            ("augment.draws_per_sample", self.draws_per_sample.to_string()),
            ("eval.iou_threshold", self.iou_threshold.to_string()),
            ("eval.folds", self.folds.to_string()),
            ("heatmap.width", self.heatmap_width.to_string()),
            ("heatmap.height", self.heatmap_height.to_string()),
            ("heatmap.smoothing", optional(&self.heatmap_smoothing, "none")),
        ];
        for (k, v) in entries {
            writeln!(out, "{k} = {v}").unwrap();
        }
        out
    }

    /// Applies the entries of `text` over `self`. Unknown keys are errors.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let mut seen = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", i + 1))?;
            let (k, v) = (k.trim(), v.trim());
            if seen.insert(k.to_string(), i + 1).is_some() {
                bail!("line {}: duplicate key `{k}`", i + 1);
            }
            self.set(k, v).with_context(|| format!("line {}", i + 1))?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        let p = &mut self.part;
        match key {
            "seed" => self.seed = value_or(key, raw, "none")?,
            "workers" => self.workers = value_or(key, raw, "auto")?,
            "align.margin" => self.align_margin = value(key, raw)?,
            "align.canonical_head" => {
                self.canonical_head = value_or::<HeadSide>(key, raw, "none")?;
            }
            "align.foreground_threshold" => self.foreground_threshold = value(key, raw)?,
            "part.profile" => self.profile = value(key, raw)?,
            "part.smoothing_window" => p.smoothing_window = value(key, raw)?,
            "part.extremum_radius" => p.extremum_radius = value(key, raw)?,
            "part.search_window" => p.tail_search_fraction = value(key, raw)?,
            "part.head_offset" => p.head_offset = value(key, raw)?,
            "part.tail_circle" => p.tail_circle_ratio = value(key, raw)?,
            "part.fin_band" => p.fin_band_ratio = value(key, raw)?,
            "part.gap_tolerance" => p.gap_tolerance = value(key, raw)?,
            "augment.scale_min" => self.scale_min = value(key, raw)?,
            "augment.scale_max" => self.scale_max = value(key, raw)?,
            "augment.max_retries" => self.max_retries = value(key, raw)?,
            "augment.ring_width" => self.ring_width = value(key, raw)?,
            "augment.count" => self.count = value(key, raw)?,
            "augment.draws_per_sample" => self.draws_per_sample = value(key, raw)?,
            "eval.iou_threshold" => self.iou_threshold = value(key, raw)?,
            "eval.folds" => self.folds = value(key, raw)?,
            "heatmap.width" => self.heatmap_width = value(key, raw)?,
            "heatmap.height" => self.heatmap_height = value(key, raw)?,
            "heatmap.smoothing" => self.heatmap_smoothing = value_or(key, raw, "none")?,
            other => bail!("unknown key `{other}`"),
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut c = PipelineConfig::default();
        c.apply_text(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("config {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.part;
        let checks: [(bool, &str); 17] = [
            (self.workers != Some(0), "workers must be positive"),
            ((0.0..1.0).contains(&self.align_margin), "align.margin must lie in [0, 1)"),
            (self.foreground_threshold > 0.0, "align.foreground_threshold must be positive"),
            (p.smoothing_window >= 1, "part.smoothing_window must be at least 1"),
            (p.extremum_radius >= 1, "part.extremum_radius must be at least 1"),
            (p.tail_search_fraction > 0.0 && p.tail_search_fraction <= 1.0, "part.search_window must lie in (0, 1]"),
            (p.head_offset > 0.0 && p.head_offset.is_finite(), "part.head_offset must be positive"),
            (p.tail_circle_ratio > 0.0 && p.tail_circle_ratio.is_finite(), "part.tail_circle must be positive"),
            (p.fin_band_ratio >= 0.0 && p.fin_band_ratio.is_finite(), "part.fin_band must be non-negative"),
            (self.count >= 1, "augment.count must be positive"),
            (self.draws_per_sample >= 1, "augment.draws_per_sample must be positive"),
            ((0.0..1.0).contains(&self.iou_threshold), "eval.iou_threshold must lie in [0, 1)"),
            (self.folds >= 2, "eval.folds must be at least 2"),
            (self.heatmap_width >= 1 && self.heatmap_height >= 1, "heatmap frame must be non-empty"),
            (self.heatmap_smoothing.is_none_or(|s| s > 0.0 && s.is_finite()), "heatmap.smoothing must be positive"),
            (self.scale_min > 0.0, "augment.scale_min must be positive"),
            (self.max_retries >= 1, "augment.max_retries must be positive"),
        ];
        if let Some((_, msg)) = checks.iter().find(|(ok, _)| !ok) {
            bail!("{msg}");
        }
        self.augment_config()
            .validate()
            .map_err(|e| anyhow!("augment settings: {e}"))?;
        Ok(())
    }

    pub fn align_config(&self) -> AlignConfig {
        AlignConfig {
            margin_fraction: self.align_margin,
            canonical_head: self.canonical_head,
            ..AlignConfig::default()
        }
    }

    pub fn segmentation_config(&self) -> SegmentationConfig {
        SegmentationConfig {
            threshold: self.foreground_threshold,
            ..SegmentationConfig::default()
        }
    }

    pub fn augment_config(&self) -> AugmentConfig {
        AugmentConfig {
            scale_range: (self.scale_min, self.scale_max),
            max_retries: self.max_retries,
            ring_width: self.ring_width,
        }
    }

    pub fn require_seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| anyhow!("this command needs an explicit seed (--seed or `seed` in the config file)"))
    }

    pub fn worker_count(&self) -> usize {
        self.workers.unwrap_or_else(|| {
            std::thread::available_parallelism().map_or(1, |n| n.get()).min(8)
        })
    }
}
