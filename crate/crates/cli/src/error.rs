use std::path::PathBuf;

use navflow::camera_motion::MotionError;
use navflow::dataset_io::IoError;
use navflow::heading::LabelError;
use navflow::mask_augment::MaskError;
use navflow::nav_metrics::MetricsError;
use navflow::route_graph::RouteError;
use navflow::sim_world::SimError;
use serde::Serialize;
use thiserror::Error;

/// Exit codes, one per error family.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const IO: i32 = 3;
    pub const ESTIMATION: i32 = 4;
    pub const LABEL: i32 = 5;
    pub const ROUTE: i32 = 6;
    pub const SIM: i32 = 7;
    pub const MASK: i32 = 8;
    pub const METRICS: i32 = 9;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Motion(#[from] MotionError),
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Mask(#[from] MaskError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

impl CliError {
    pub fn family(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io(_) => "io",
            CliError::Motion(_) => "estimation",
            CliError::Label(_) => "label",
            CliError::Route(_) => "route",
            CliError::Sim(_) => "simulation",
            CliError::Mask(_) => "mask",
            CliError::Metrics(_) => "metrics",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Io(_) => exit::IO,
            CliError::Motion(_) => exit::ESTIMATION,
            CliError::Label(_) => exit::LABEL,
            CliError::Route(_) => exit::ROUTE,
            CliError::Sim(_) => exit::SIM,
            CliError::Mask(_) => exit::MASK,
            CliError::Metrics(_) => exit::METRICS,
        }
    }

    fn path(&self) -> Option<PathBuf> {
        match self {
            CliError::Io(IoError::Io { path, .. } | IoError::Document { path, .. }) => {
                Some(path.clone())
            }
            _ => None,
        }
    }

    /// One JSON object per line.
    pub fn record(&self, command: &str) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            error: &'a str,
            code: i32,
            command: &'a str,
            message: String,
            #[serde(skip_serializing_if = "Option::is_none")]
            path: Option<String>,
        }
        let rec = Record {
            error: self.family(),
            code: self.exit_code(),
            command,
            message: self.to_string(),
            path: self.path().map(|p| p.display().to_string()),
        };
        serde_json::to_string(&rec).expect("record serializes")
    }
}

/// Attaches a path to errors raised while handling that file.
pub fn at<T>(path: &std::path::Path, r: Result<T, IoError>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Io(e.at(path)))
}
