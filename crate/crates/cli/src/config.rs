//! Run configuration: an optional TOML file whose sections supply defaults
//! for each subcommand. Flags given on the command line win.

use std::path::Path;

use navflow::camera_motion::InteractionModel;
use navflow::heading::LabelMode;
use navflow::mask_augment::{DEFAULT_COUNT, DEFAULT_SIZE_RANGE};
use navflow::nav_metrics::{WindowScoring, DEFAULT_WINDOW_FRAMES};
use serde::Deserialize;

use crate::error::CliError;
use crate::Scenario;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Decimal string or integer.
    pub seed: Option<SeedValue>,
    pub simulate: SimulateSection,
    pub estimate: EstimateSection,
    pub label: LabelSection,
    pub genpaths: GenpathsSection,
    pub mask: MaskSection,
    pub evaluate: EvaluateSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SeedValue {
    Int(u64),
    Text(String),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub scenario: Option<Scenario>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateSection {
    pub samples: Option<usize>,
    pub model: Option<InteractionModel>,
    pub fps: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabelSection {
    pub window: Option<usize>,
    pub lookahead: Option<usize>,
    pub mode: Option<LabelMode>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenpathsSection {
    pub count: Option<usize>,
    pub with_reversals: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaskSection {
    pub count: Option<usize>,
    pub min_frac: Option<f64>,
    pub max_frac: Option<f64>,
    pub frames: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateSection {
    pub window: Option<usize>,
    pub scoring: Option<WindowScoring>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn seed(&self) -> Result<Option<u64>, CliError> {
        match &self.seed {
            None => Ok(None),
            Some(SeedValue::Int(v)) => Ok(Some(*v)),
            Some(SeedValue::Text(s)) => s
                .parse()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("config seed {s:?} is not a u64"))),
        }
    }
}

pub const DEFAULT_SAMPLES: usize = 200;
pub const DEFAULT_FPS: f64 = 30.0;
pub const DEFAULT_PATH_COUNT: usize = 10;
pub const DEFAULT_MASK_FRAMES: usize = 1;
pub const DEFAULT_MASK_COUNT: usize = DEFAULT_COUNT;
pub const DEFAULT_MIN_FRAC: f64 = DEFAULT_SIZE_RANGE.min_frac;
pub const DEFAULT_MAX_FRAC: f64 = DEFAULT_SIZE_RANGE.max_frac;
pub const DEFAULT_EVAL_WINDOW: usize = DEFAULT_WINDOW_FRAMES;
