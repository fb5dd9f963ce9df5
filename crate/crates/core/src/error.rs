use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mask has no foreground pixels")]
    EmptyMask,

    #[error("no pixel passed the foreground threshold")]
    NoForeground,

    #[error("shape has no stable principal axis (eigenvalues {major:.3} / {minor:.3})")]
    DegenerateShape { major: f64, minor: f64 },

    #[error("mask is fragmented: {width}-column gap starting at x={column}")]
    FragmentedMask { column: u32, width: u32 },

    #[error("no tail notch found on the {boundary} boundary")]
    NoTailNotch { boundary: &'static str },

    #[error("invalid part geometry: {0}")]
    Geometry(String),

    #[error("box does not overlap any foreground pixel")]
    NoOverlap,

    #[error("no feasible placement after {attempts} attempts")]
    PlacementInfeasible { attempts: u32 },

    #[error("harmonization ring contains no fish pixels")]
    EmptyRing,

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("class `{0}` has no ground truth")]
    NoGroundTruth(String),

    #[error("no classes with ground truth to average")]
    NoClasses,

    #[error("{found} distinct identities cannot fill {k} folds")]
    TooFewIdentities { found: usize, k: usize },

    #[error("box lies outside the fish frame")]
    OutOfFrame,

    #[error("no input to accumulate")]
    EmptyInput,

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (u32, u32),
        actual: (u32, u32),
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn image(path: impl Into<PathBuf>, source: image::ImageError) -> Self {
        Error::Image {
            path: path.into(),
            source,
        }
    }
}
