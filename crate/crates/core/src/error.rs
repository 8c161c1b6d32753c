use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the tracking, evaluation and I/O layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MotsError {
    #[error("mask has no foreground pixels")]
    EmptyMask,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("degenerate box ({x1}, {y1}, {x2}, {y2}) has zero area")]
    DegenerateBox { x1: f64, y1: f64, x2: f64, y2: f64 },

    #[error("frame {frame} is not after the last processed frame {last}")]
    FrameOrder { frame: u32, last: u32 },

    #[error("loss is undefined: {0}")]
    UndefinedLoss(String),

    #[error("invalid annotations in frame {frame}: {reason}")]
    InvalidAnnotations { frame: u32, reason: String },

    #[error("scores are undefined: no ground-truth masks")]
    UndefinedScores,

    #[error("invalid scene: {0}")]
    Spec(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("{path}: {reason}")]
    Io { path: PathBuf, reason: String },
}

impl MotsError {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        MotsError::Shape(msg.into())
    }

    pub(crate) fn parse(line: usize, reason: impl Into<String>) -> Self {
        MotsError::Parse {
            line,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, err: std::io::Error) -> Self {
        MotsError::Io {
            path: path.into(),
            reason: err.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, MotsError>;
