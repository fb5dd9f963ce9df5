use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BoundingBox;

/// Which face of the fish a record was annotated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FishSide {
    Ocular,
    Blind,
}

impl FishSide {
    pub fn as_str(self) -> &'static str {
        match self {
            FishSide::Ocular => "ocular",
            FishSide::Blind => "blind",
        }
    }
}

impl FromStr for FishSide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ocular" => Ok(FishSide::Ocular),
            "blind" => Ok(FishSide::Blind),
            other => Err(Error::InvalidArgument(format!("unknown side `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub image_id: String,
    pub class: String,
    pub bbox: BoundingBox,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthRecord {
    pub image_id: String,
    pub class: String,
    pub bbox: BoundingBox,
    pub identity: String,
    pub side: Option<FishSide>,
}

fn number(field: &str, what: &str) -> std::result::Result<f64, String> {
    let v: f64 = field.parse().map_err(|_| format!("{what} `{field}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{what} `{field}` is not finite"))
    }
}

fn parse_box(fields: &[&str]) -> std::result::Result<BoundingBox, String> {
    let b = BoundingBox::new(
        number(fields[0], "cx")?,
        number(fields[1], "cy")?,
        number(fields[2], "w")?,
        number(fields[3], "h")?,
    );
    if !b.is_valid() {
        return Err(format!("box {}x{} has no area", b.w, b.h));
    }
    Ok(b)
}

/// Meaningful lines with their 1-based numbers; blank lines and `#` comments are skipped.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            None
        } else {
            Some((i + 1, line.split_whitespace().collect()))
        }
    })
}

/// `image_id class cx cy w h confidence` per line.
pub fn parse_detections(text: &str, origin: &str) -> Result<Vec<DetectionRecord>> {
    content_lines(text)
        .map(|(line, f)| {
            let parsed = (|| {
                if f.len() != 7 {
                    return Err(format!("expected 7 fields, found {}", f.len()));
                }
                let confidence = number(f[6], "confidence")?;
                if !(0.0..=1.0).contains(&confidence) {
                    return Err(format!("confidence {confidence} outside [0, 1]"));
                }
                Ok(DetectionRecord {
                    image_id: f[0].to_string(),
                    class: f[1].to_string(),
                    bbox: parse_box(&f[2..6])?,
                    confidence,
                })
            })();
            parsed.map_err(|message| Error::Parse {
                path: origin.to_string(),
                line,
                message,
            })
        })
        .collect()
}

/// `image_id class cx cy w h identity_id [side]` per line.
pub fn parse_ground_truth(text: &str, origin: &str) -> Result<Vec<GroundTruthRecord>> {
    content_lines(text)
        .map(|(line, f)| {
            let parsed = (|| {
                if f.len() != 7 && f.len() != 8 {
                    return Err(format!("expected 7 or 8 fields, found {}", f.len()));
                }
                let side = match f.get(7) {
                    Some(s) => Some(s.parse::<FishSide>().map_err(|e| e.to_string())?),
                    None => None,
                };
                Ok(GroundTruthRecord {
                    image_id: f[0].to_string(),
                    class: f[1].to_string(),
                    bbox: parse_box(&f[2..6])?,
                    identity: f[6].to_string(),
                    side,
                })
            })();
            parsed.map_err(|message| Error::Parse {
                path: origin.to_string(),
                line,
                message,
            })
        })
        .collect()
}

pub fn format_detections(records: &[DetectionRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let b = &r.bbox;
        writeln!(out, "{} {} {} {} {} {} {}", r.image_id, r.class, b.cx, b.cy, b.w, b.h, r.confidence)
            .expect("writing to a String");
    }
    out
}

pub fn format_ground_truth(records: &[GroundTruthRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let b = &r.bbox;
        write!(out, "{} {} {} {} {} {} {}", r.image_id, r.class, b.cx, b.cy, b.w, b.h, r.identity)
            .expect("writing to a String");
        if let Some(side) = r.side {
            write!(out, " {}", side.as_str()).expect("writing to a String");
        }
        out.push('\n');
    }
    out
}

pub fn read_detections(path: &Path) -> Result<Vec<DetectionRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_detections(&text, &path.display().to_string())
}

pub fn read_ground_truth(path: &Path) -> Result<Vec<GroundTruthRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ground_truth(&text, &path.display().to_string())
}
