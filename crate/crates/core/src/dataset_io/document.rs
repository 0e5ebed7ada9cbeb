//! Versioned TOML documents.
//!
//! Each document starts with `format = "<name>"` and `version = <n>`,
//! followed by the fields of the payload type. Readers check both before
//! decoding the rest.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{read_text, write_bytes, IoError};
use crate::camera_motion::CameraIntrinsics;
use crate::heading::{DirectionLabelSeries, YawSeries};
use crate::mask_augment::MaskPlan;
use crate::route_graph::SyntheticPath;

pub trait Document: Serialize + DeserializeOwned {
    const FORMAT: &'static str;
    const VERSION: u32 = 1;

    /// Semantic checks run after decoding.
    fn check(&self) -> Result<(), String> {
        Ok(())
    }
}

/// Who produced an artifact and from what.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    #[serde(with = "crate::seed_text")]
    pub seed: u64,
    /// Input name to lowercase hex SHA-256 of its bytes.
    #[serde(default)]
    pub inputs: BTreeMap<String, String>,
}

impl Provenance {
    pub fn new(tool: impl Into<String>, seed: u64) -> Self {
        Self {
            tool: tool.into(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            seed,
            inputs: BTreeMap::new(),
        }
    }
}

pub fn to_toml<T: Document>(doc: &T) -> Result<String, String> {
    let body = toml::Table::try_from(doc).map_err(|e| e.to_string())?;
    let mut table = toml::Table::new();
    table.insert("format".into(), toml::Value::String(T::FORMAT.into()));
    table.insert("version".into(), toml::Value::Integer(T::VERSION as i64));
    for (k, v) in body {
        if k == "format" || k == "version" {
            return Err(format!("payload field {k:?} clashes with the document header"));
        }
        table.insert(k, v);
    }
    toml::to_string(&table).map_err(|e| e.to_string())
}

pub fn from_toml<T: Document>(text: &str) -> Result<T, IoError> {
    let doc_err = |message: String| IoError::Document {
        path: Default::default(),
        message,
    };
    let mut table: toml::Table = toml::from_str(text).map_err(|e| doc_err(e.to_string()))?;
    match table.remove("format") {
        Some(toml::Value::String(f)) if f == T::FORMAT => {}
        Some(other) => {
            return Err(doc_err(format!("expected format {:?}, found {other}", T::FORMAT)));
        }
        None => return Err(doc_err("missing `format`".into())),
    }
    match table.remove("version") {
        Some(toml::Value::Integer(v)) if v == T::VERSION as i64 => {}
        Some(toml::Value::Integer(v)) => {
            return Err(IoError::VersionUnsupported(u32::try_from(v).unwrap_or(u32::MAX)));
        }
        _ => return Err(doc_err("missing or non-integer `version`".into())),
    }
    let doc: T = table.try_into().map_err(|e| doc_err(e.to_string()))?;
    doc.check().map_err(doc_err)?;
    Ok(doc)
}

pub fn read_document<T: Document>(path: &Path) -> Result<T, IoError> {
    from_toml(&read_text(path)?).map_err(|e| match e {
        IoError::Document { message, .. } => IoError::Document {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })
}

pub fn write_document<T: Document>(doc: &T, path: &Path) -> Result<(), IoError> {
    let text = to_toml(doc).map_err(|message| IoError::Document {
        path: path.to_path_buf(),
        message,
    })?;
    write_bytes(path, text.as_bytes())
}

impl Document for CameraIntrinsics {
    const FORMAT: &'static str = "navflow-intrinsics";

    fn check(&self) -> Result<(), String> {
        self.validate().map_err(|e| e.to_string())
    }
}

/// Per-frame yaw rate, with the solver residual when it was estimated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YawDocument {
    pub fps: f64,
    pub yaw: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rms_residual: Vec<f64>,
    pub provenance: Provenance,
}

impl YawDocument {
    pub fn series(&self) -> Result<YawSeries, IoError> {
        YawSeries::new(self.yaw.clone(), self.fps).map_err(|e| IoError::InvariantViolation(e.to_string()))
    }
}

impl Document for YawDocument {
    const FORMAT: &'static str = "navflow-yaw";

    fn check(&self) -> Result<(), String> {
        if !self.rms_residual.is_empty() && self.rms_residual.len() != self.yaw.len() {
            return Err(format!(
                "{} residuals for {} yaw values",
                self.rms_residual.len(),
                self.yaw.len()
            ));
        }
        YawSeries::new(self.yaw.clone(), self.fps).map(|_| ()).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelDocument {
    pub fps: f64,
    pub labels: Vec<u8>,
    pub provenance: Provenance,
}

impl LabelDocument {
    pub fn series(&self) -> Result<DirectionLabelSeries, IoError> {
        DirectionLabelSeries::from_indices(&self.labels)
            .map_err(|e| IoError::InvariantViolation(e.to_string()))
    }
}

impl Document for LabelDocument {
    const FORMAT: &'static str = "navflow-labels";

    fn check(&self) -> Result<(), String> {
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(format!("fps must be positive, got {}", self.fps));
        }
        self.series().map(|_| ()).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameMask {
    pub frame: usize,
    pub plan: MaskPlan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskPlanDocument {
    pub masks: Vec<FrameMask>,
    pub provenance: Provenance,
}

impl Document for MaskPlanDocument {
    const FORMAT: &'static str = "navflow-masks";

    fn check(&self) -> Result<(), String> {
        for m in &self.masks {
            if let Some(b) = m.plan.boxes.iter().find(|b| !b.fits(m.plan.image)) {
                return Err(format!("frame {}: box {b:?} leaves the image", m.frame));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathDocument {
    pub map: String,
    pub paths: Vec<SyntheticPath>,
    pub provenance: Provenance,
}

impl Document for PathDocument {
    const FORMAT: &'static str = "navflow-paths";
}
