//! On-disk formats.
//!
//! | artifact            | format                                   |
//! |---------------------|------------------------------------------|
//! | depth / flow raster | binary container, see [`raster_file`]    |
//! | map + triplets      | line-oriented text, see [`map_file`]     |
//! | scene plan          | line-oriented text, see [`scene_file`]   |
//! | everything else     | TOML documents, see [`document`]         |
//!
//! Target encodings (the circle images handed to the model as the
//! destination) live in [`target`].

pub mod document;
pub mod manifest;
pub mod map_file;
pub mod raster_file;
pub mod scene_file;
pub mod target;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::route_graph::TripletKey;

pub use document::{
    from_toml, read_document, to_toml, write_document, Document, FrameMask, LabelDocument,
    MaskPlanDocument, PathDocument, Provenance, YawDocument,
};
pub use manifest::{DatasetManifest, EpisodeEntry};
pub use map_file::{format_map, load_map, parse_map, save_map};
pub use raster_file::{decode_raster, encode_raster, read_raster, write_raster, RASTER_MAGIC, RASTER_VERSION};
pub use scene_file::{format_scene, load_scene, parse_scene, save_scene};
pub use target::{decode_target, encode_target, GrayCanvas, TargetEncoding, TargetLayout};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IoError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("bad magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported version {0}")]
    VersionUnsupported(u32),
    #[error("file is {len} bytes, shorter than the header")]
    TruncatedHeader { len: usize },
    #[error("payload is {got} bytes, header promises {expected}")]
    TruncatedPayload { expected: u64, got: u64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    ChecksumMismatch { stored: u32, computed: u32 },
    #[error("non-finite value at element {index}")]
    NonFiniteValue { index: usize },
    #[error("line {line}: {reason}")]
    ParseError { line: usize, reason: String },
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("duplicate triplet {0}")]
    DuplicateTriplet(TripletKey),
    #[error("unknown target {0:?}")]
    UnknownTarget(String),
    #[error("{targets} targets do not fit; the layout holds at most {capacity}")]
    TooManyTargets { targets: usize, capacity: usize },
    #[error("{path}: {message}")]
    Document { path: PathBuf, message: String },
    #[error("manifest: {0}")]
    Manifest(String),
}

impl IoError {
    pub(crate) fn io(path: &Path, err: std::io::Error) -> Self {
        IoError::Io {
            path: path.to_path_buf(),
            message: err.to_string(),
        }
    }

    /// The wrapped error with the offending path prepended, for errors that
    /// do not already carry one.
    pub fn at(self, path: &Path) -> IoError {
        match self {
            e @ (IoError::Io { .. } | IoError::Document { .. }) => e,
            other => IoError::Document {
                path: path.to_path_buf(),
                message: other.to_string(),
            },
        }
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))
}

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| IoError::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| IoError::io(path, e))
}
