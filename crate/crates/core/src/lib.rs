pub mod augmentation;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod heatmap;
pub mod mask_ops;
pub mod part_segmentation;
pub mod raster;
pub mod synth;

pub use error::{Error, Result};
pub use geometry::{BoundingBox, Point};
