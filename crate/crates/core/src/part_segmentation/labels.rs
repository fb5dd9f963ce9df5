use image::{GrayImage, Luma};
use serde::{Deserialize, Serialize};

use super::PartRegions;
use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, Point};
use crate::raster::BinaryMask;

/// Per-pixel part class. The discriminant is the on-disk index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[repr(u8)]
pub enum PartLabel {
    Background = 0,
    Head = 1,
    Fins = 2,
    Body = 3,
}

impl PartLabel {
    pub fn from_index(v: u8) -> Option<PartLabel> {
        match v {
            0 => Some(PartLabel::Background),
            1 => Some(PartLabel::Head),
            2 => Some(PartLabel::Fins),
            3 => Some(PartLabel::Body),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PartLabel::Background => "background",
            PartLabel::Head => "head",
            PartLabel::Fins => "fins",
            PartLabel::Body => "body",
        }
    }
}

impl std::fmt::Display for PartLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PartLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "background" => Ok(PartLabel::Background),
            "head" => Ok(PartLabel::Head),
            "fins" => Ok(PartLabel::Fins),
            "body" => Ok(PartLabel::Body),
            other => Err(Error::InvalidArgument(format!("unknown part `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartLabelMap {
    width: u32,
    height: u32,
    labels: Vec<PartLabel>,
}

impl PartLabelMap {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn labels(&self) -> &[PartLabel] {
        &self.labels
    }

    pub fn get(&self, x: u32, y: u32) -> PartLabel {
        self.labels[y as usize * self.width as usize + x as usize]
    }

    /// Pixel counts indexed by the label discriminant.
    pub fn counts(&self) -> [usize; 4] {
        let mut c = [0usize; 4];
        for &l in &self.labels {
            c[l as usize] += 1;
        }
        c
    }

    pub fn foreground(&self) -> BinaryMask {
        BinaryMask::from_vec(
            self.width,
            self.height,
            self.labels.iter().map(|&l| l != PartLabel::Background).collect(),
        )
        .expect("same dimensions")
    }

    /// 8-bit indexed raster: 0 background, 1 head, 2 fins, 3 body.
    pub fn to_indexed(&self) -> GrayImage {
        GrayImage::from_fn(self.width, self.height, |x, y| Luma([self.get(x, y) as u8]))
    }

    pub fn from_indexed(image: &GrayImage) -> Result<Self> {
        let labels = image
            .as_raw()
            .iter()
            .map(|&v| PartLabel::from_index(v).ok_or_else(|| Error::InvalidArgument(format!("label index {v}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(PartLabelMap {
            width: image.width(),
            height: image.height(),
            labels,
        })
    }

    pub fn flip_horizontal(&self) -> Self {
        let mut labels = Vec::with_capacity(self.labels.len());
        for y in 0..self.height {
            for x in (0..self.width).rev() {
                labels.push(self.get(x, y));
            }
        }
        PartLabelMap {
            width: self.width,
            height: self.height,
            labels,
        }
    }
}

/// Partitions the foreground: head ellipse first, then body ellipse, the
/// remainder (tail circle included) is fins.
pub fn rasterize_part_labels(mask: &BinaryMask, regions: &PartRegions) -> PartLabelMap {
    let labels = mask
        .data()
        .iter()
        .enumerate()
        .map(|(i, &fg)| {
            if !fg {
                return PartLabel::Background;
            }
            let p = Point::new((i % mask.width() as usize) as f64, (i / mask.width() as usize) as f64);
            if regions.head.contains(p) {
                PartLabel::Head
            } else if regions.body.contains(p) {
                PartLabel::Body
            } else {
                PartLabel::Fins
            }
        })
        .collect();
    PartLabelMap {
        width: mask.width(),
        height: mask.height(),
        labels,
    }
}

/// Majority part among the labelled foreground pixels inside `bbox`; ties go head, fins, body.
pub fn assign_box_to_part(bbox: &BoundingBox, labels: &PartLabelMap) -> Result<PartLabel> {
    let (x0, y0, x1, y1) = bbox.pixel_range(labels.width, labels.height).ok_or(Error::NoOverlap)?;
    let mut counts = [0usize; 4];
    for y in y0..=y1 {
        for x in x0..=x1 {
            counts[labels.get(x, y) as usize] += 1;
        }
    }
    let mut best = PartLabel::Head;
    for candidate in [PartLabel::Fins, PartLabel::Body] {
        if counts[candidate as usize] > counts[best as usize] {
            best = candidate;
        }
    }
    if counts[best as usize] == 0 {
        return Err(Error::NoOverlap);
    }
    Ok(best)
}
