//! Destination encoding: a black circle on a white canvas whose position
//! stands for the target.
//!
//! Positions are fixed in advance and have no relation to where the target
//! is in the building. Targets are laid out row-major on a `g × g` grid,
//! `g = ceil(sqrt(n))`, whose cells tile the canvas minus a border of one
//! radius on each side. A layout is rejected when a cell is narrower than
//! the circle's diameter.

use serde::{Deserialize, Serialize};

use super::IoError;

pub const DEFAULT_CANVAS: u32 = 128;
pub const DEFAULT_RADIUS: u32 = 8;

pub const WHITE: u8 = 255;
pub const BLACK: u8 = 0;

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayCanvas {
    pub size: u32,
    pub pixels: Vec<u8>,
}

impl GrayCanvas {
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[(y * self.size + x) as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetEncoding {
    pub target_id: String,
    pub canvas_size: u32,
    pub center: (f64, f64),
    pub radius: u32,
}

impl TargetEncoding {
    /// Pixel `(x, y)` is black when its center lies within the radius.
    pub fn render(&self) -> GrayCanvas {
        let n = self.canvas_size;
        let r2 = (self.radius as f64).powi(2);
        let mut pixels = vec![WHITE; (n * n) as usize];
        for y in 0..n {
            for x in 0..n {
                let dx = x as f64 + 0.5 - self.center.0;
                let dy = y as f64 + 0.5 - self.center.1;
                if dx * dx + dy * dy <= r2 {
                    pixels[(y * n + x) as usize] = BLACK;
                }
            }
        }
        GrayCanvas { size: n, pixels }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetLayout {
    targets: Vec<String>,
    canvas_size: u32,
    radius: u32,
    grid: u32,
}

impl TargetLayout {
    pub fn new(targets: &[impl AsRef<str>], canvas_size: u32, radius: u32) -> Result<Self, IoError> {
        let targets: Vec<String> = targets.iter().map(|t| t.as_ref().to_owned()).collect();
        for (i, t) in targets.iter().enumerate() {
            if targets[..i].contains(t) {
                return Err(IoError::InvariantViolation(format!("target {t:?} listed twice")));
            }
        }
        let n = targets.len();
        let usable = canvas_size.saturating_sub(2 * radius);
        let max_side = if radius == 0 { 0 } else { usable / (2 * radius) };
        let capacity = (max_side * max_side) as usize;
        let grid = (n as f64).sqrt().ceil() as u32;
        if n == 0 || grid > max_side {
            return Err(IoError::TooManyTargets {
                targets: n,
                capacity,
            });
        }
        Ok(Self {
            targets,
            canvas_size,
            radius,
            grid,
        })
    }

    pub fn with_defaults(targets: &[impl AsRef<str>]) -> Result<Self, IoError> {
        Self::new(targets, DEFAULT_CANVAS, DEFAULT_RADIUS)
    }

    pub fn targets(&self) -> &[String] {
        &self.targets
    }

    fn center_of_index(&self, i: usize) -> (f64, f64) {
        let cell = (self.canvas_size - 2 * self.radius) as f64 / self.grid as f64;
        let col = (i as u32 % self.grid) as f64;
        let row = (i as u32 / self.grid) as f64;
        (
            self.radius as f64 + (col + 0.5) * cell,
            self.radius as f64 + (row + 0.5) * cell,
        )
    }

    pub fn encode(&self, target_id: &str) -> Result<TargetEncoding, IoError> {
        let i = self
            .targets
            .iter()
            .position(|t| t == target_id)
            .ok_or_else(|| IoError::UnknownTarget(target_id.to_owned()))?;
        Ok(TargetEncoding {
            target_id: target_id.to_owned(),
            canvas_size: self.canvas_size,
            center: self.center_of_index(i),
            radius: self.radius,
        })
    }

    /// Target whose center is closest to `point`; ties go to the earlier
    /// target in the set.
    pub fn nearest(&self, point: (f64, f64)) -> &str {
        let dist = |i: usize| {
            let c = self.center_of_index(i);
            (c.0 - point.0).powi(2) + (c.1 - point.1).powi(2)
        };
        let best = (0..self.targets.len())
            .min_by(|a, b| dist(*a).total_cmp(&dist(*b)))
            .expect("layout is never empty");
        &self.targets[best]
    }

    /// Centroid of the black pixels, snapped to the nearest layout center.
    pub fn decode(&self, canvas: &GrayCanvas) -> Result<&str, IoError> {
        if canvas.size != self.canvas_size || canvas.pixels.len() != (canvas.size * canvas.size) as usize {
            return Err(IoError::DimensionMismatch(format!(
                "canvas is {} px, layout expects {}",
                canvas.size, self.canvas_size
            )));
        }
        let (mut sx, mut sy, mut count) = (0.0, 0.0, 0usize);
        for y in 0..canvas.size {
            for x in 0..canvas.size {
                if canvas.get(x, y) < 128 {
                    sx += x as f64 + 0.5;
                    sy += y as f64 + 0.5;
                    count += 1;
                }
            }
        }
        if count == 0 {
            return Err(IoError::InvariantViolation("canvas has no circle".into()));
        }
        Ok(self.nearest((sx / count as f64, sy / count as f64)))
    }
}

/// Encoding of `target_id` within `target_set` on the default canvas.
pub fn encode_target(target_id: &str, target_set: &[impl AsRef<str>]) -> Result<TargetEncoding, IoError> {
    TargetLayout::with_defaults(target_set)?.encode(target_id)
}

/// Recovers the target drawn on `canvas` for the default layout of `target_set`.
pub fn decode_target(canvas: &GrayCanvas, target_set: &[impl AsRef<str>]) -> Result<String, IoError> {
    let layout = TargetLayout::new(target_set, canvas.size, DEFAULT_RADIUS)?;
    layout.decode(canvas).map(str::to_owned)
}
