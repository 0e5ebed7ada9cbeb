//! Dataset manifest: the index of every episode in a dataset directory.
//!
//! Paths inside the manifest are relative to the manifest's own directory.
//! [`DatasetManifest::load`] follows every reference and cross-checks frame
//! counts, raster kinds and dimensions, so a manifest that loads describes a
//! dataset whose files all load too.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::document::{read_document, Document, LabelDocument, Provenance, YawDocument};
use super::map_file::load_map;
use super::raster_file::read_raster;
use super::IoError;
use crate::camera_motion::CameraIntrinsics;
use crate::raster::RasterKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeEntry {
    pub video_id: String,
    pub fps: f64,
    /// Number of frame pairs; each has one depth and one flow raster.
    pub frame_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intrinsics: Option<String>,
    pub depth: Vec<String>,
    pub flow: Vec<String>,
    pub yaw: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub episodes: Vec<EpisodeEntry>,
    pub provenance: Provenance,
}

impl Document for DatasetManifest {
    const FORMAT: &'static str = "navflow-manifest";

    fn check(&self) -> Result<(), String> {
        for (i, ep) in self.episodes.iter().enumerate() {
            if self.episodes[..i].iter().any(|o| o.video_id == ep.video_id) {
                return Err(format!("episode {:?} listed twice", ep.video_id));
            }
            if ep.depth.len() != ep.frame_count || ep.flow.len() != ep.frame_count {
                return Err(format!(
                    "episode {:?}: {} frames but {} depth and {} flow rasters",
                    ep.video_id,
                    ep.frame_count,
                    ep.depth.len(),
                    ep.flow.len()
                ));
            }
            if !(ep.fps.is_finite() && ep.fps > 0.0) {
                return Err(format!("episode {:?}: fps must be positive", ep.video_id));
            }
        }
        Ok(())
    }
}

fn manifest_err(file: &Path, err: impl std::fmt::Display) -> IoError {
    IoError::Manifest(format!("{}: {err}", file.display()))
}

impl DatasetManifest {
    /// Reads the manifest and every file it references.
    pub fn load(path: &Path) -> Result<Self, IoError> {
        let manifest: DatasetManifest = read_document(path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for ep in &manifest.episodes {
            ep.verify(base)?;
        }
        Ok(manifest)
    }

    pub fn resolve(base: &Path, relative: &str) -> PathBuf {
        base.join(relative)
    }
}

impl EpisodeEntry {
    /// Loads every referenced file relative to `base` and checks that they
    /// agree with each other and with this entry.
    pub fn verify(&self, base: &Path) -> Result<(), IoError> {
        let mut dims: Option<(u32, u32)> = None;
        let check_dims = |file: &Path, w: u32, h: u32, dims: &mut Option<(u32, u32)>| match dims {
            Some(d) if *d != (w, h) => Err(manifest_err(
                file,
                format!("raster is {w}x{h}, episode is {}x{}", d.0, d.1),
            )),
            _ => {
                *dims = Some((w, h));
                Ok(())
            }
        };
        for (list, kind) in [(&self.depth, RasterKind::Depth), (&self.flow, RasterKind::Flow)] {
            for rel in list {
                let file = base.join(rel);
                let r = read_raster(&file).map_err(|e| manifest_err(&file, e))?;
                if r.kind() != kind {
                    return Err(manifest_err(&file, format!("expected a {kind:?} raster")));
                }
                check_dims(&file, r.width(), r.height(), &mut dims)?;
            }
        }
        if let Some(rel) = &self.intrinsics {
            let file = base.join(rel);
            let intr: CameraIntrinsics = read_document(&file).map_err(|e| manifest_err(&file, e))?;
            check_dims(&file, intr.image_size.0, intr.image_size.1, &mut dims)?;
        }
        let file = base.join(&self.yaw);
        let yaw: YawDocument = read_document(&file).map_err(|e| manifest_err(&file, e))?;
        if yaw.yaw.len() != self.frame_count {
            return Err(manifest_err(
                &file,
                format!("{} yaw values for {} frames", yaw.yaw.len(), self.frame_count),
            ));
        }
        if yaw.fps != self.fps {
            return Err(manifest_err(&file, format!("fps {} differs from episode fps {}", yaw.fps, self.fps)));
        }
        if let Some(rel) = &self.labels {
            let file = base.join(rel);
            let labels: LabelDocument = read_document(&file).map_err(|e| manifest_err(&file, e))?;
            if labels.labels.len() != self.frame_count {
                return Err(manifest_err(
                    &file,
                    format!("{} labels for {} frames", labels.labels.len(), self.frame_count),
                ));
            }
        }
        if let Some(rel) = &self.map {
            let file = base.join(rel);
            load_map(&file).map_err(|e| manifest_err(&file, e))?;
        }
        Ok(())
    }
}
