pub mod align;
pub mod augment;
pub mod eval;
pub mod heatmap;
pub mod partseg;
pub mod synth;
