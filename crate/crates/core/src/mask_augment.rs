//! Occlusion boxes for masking augmentation, and curriculum weights.
//!
//! Three box sources are supported: externally detected people, uniformly
//! random boxes, and boxes drawn from an attention map. All of them produce
//! a [`MaskPlan`] that a training harness can apply reproducibly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_COUNT: usize = 3;
pub const DEFAULT_SIZE_RANGE: SizeRange = SizeRange {
    min_frac: 0.1,
    max_frac: 0.3,
};
pub const DEFAULT_HARD_FRACTION: f64 = 0.8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaskError {
    #[error("invalid size range [{min_frac}, {max_frac}]")]
    InvalidSizeRange { min_frac: f64, max_frac: f64 },
    #[error("attention map has no positive mass")]
    DegenerateAttention,
    #[error("attention map contains a negative or non-finite value at index {0}")]
    InvalidAttention(usize),
    #[error("attention grid is {got} values, expected {expected}")]
    AttentionShape { got: usize, expected: usize },
    #[error("image size must be non-zero")]
    EmptyImage,
    #[error("input is empty")]
    EmptyInput,
    #[error("hard fraction must lie strictly between 0 and 1, got {0}")]
    InvalidHardFraction(f64),
    #[error("image buffer is {got} values, expected {expected}")]
    ImageShape { got: usize, expected: usize },
}

/// Axis-aligned box fully inside an image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MaskBox {
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

impl MaskBox {
    pub fn fits(&self, image: ImageSize) -> bool {
        self.width >= 1
            && self.height >= 1
            && self.x as u64 + self.width as u64 <= image.width as u64
            && self.y as u64 + self.height as u64 <= image.height as u64
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x && x < self.x + self.width && y >= self.y && y < self.y + self.height
    }

    pub fn center(&self) -> (f64, f64) {
        (
            self.x as f64 + self.width as f64 / 2.0,
            self.y as f64 + self.height as f64 / 2.0,
        )
    }
}

/// Box in image coordinates that may extend past the borders, as reported by
/// a detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Detection {
    pub x: i64,
    pub y: i64,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ImageSize {
    pub width: u32,
    pub height: u32,
}

impl ImageSize {
    pub fn new(width: u32, height: u32) -> Self {
        Self { width, height }
    }

    fn check(self) -> Result<(), MaskError> {
        if self.width == 0 || self.height == 0 {
            Err(MaskError::EmptyImage)
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeRange {
    pub min_frac: f64,
    pub max_frac: f64,
}

impl Default for SizeRange {
    fn default() -> Self {
        DEFAULT_SIZE_RANGE
    }
}

impl SizeRange {
    pub fn validate(&self) -> Result<(), MaskError> {
        let ok = self.min_frac > 0.0 && self.min_frac <= self.max_frac && self.max_frac <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(MaskError::InvalidSizeRange {
                min_frac: self.min_frac,
                max_frac: self.max_frac,
            })
        }
    }
}

/// How masked pixels are filled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum NoiseFill {
    /// Independent uniform value per pixel and channel in `[low, high)`.
    Uniform {
        low: f32,
        high: f32,
        #[serde(with = "crate::seed_text")]
        seed: u64,
    },
    /// Constant value, as in classic cutout.
    Constant { value: f32 },
}

impl NoiseFill {
    pub fn uniform(seed: u64) -> Self {
        NoiseFill::Uniform {
            low: 0.0,
            high: 1.0,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskPlan {
    pub image: ImageSize,
    pub boxes: Vec<MaskBox>,
    /// Sampled center of each box before it was shifted inside the image.
    /// Empty for detector-driven plans.
    #[serde(default)]
    pub anchors: Vec<(u32, u32)>,
    pub fill: NoiseFill,
}

/// Interleaved float image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub size: ImageSize,
    pub channels: usize,
    pub data: Vec<f32>,
}

impl Image {
    pub fn new(size: ImageSize, channels: usize, data: Vec<f32>) -> Result<Self, MaskError> {
        let expected = size.width as usize * size.height as usize * channels;
        if data.len() != expected {
            return Err(MaskError::ImageShape {
                got: data.len(),
                expected,
            });
        }
        Ok(Self {
            size,
            channels,
            data,
        })
    }
}

impl MaskPlan {
    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    /// Fills every box in `image`. Boxes are visited in order, rows top to
    /// bottom, so the noise stream is reproducible from the seed.
    pub fn apply(&self, image: &mut Image) {
        let mut rng = match self.fill {
            NoiseFill::Uniform { seed, .. } => Some(ChaCha8Rng::seed_from_u64(seed)),
            NoiseFill::Constant { .. } => None,
        };
        let w = image.size.width as usize;
        let c = image.channels;
        for b in &self.boxes {
            if !b.fits(image.size) {
                continue;
            }
            for y in b.y..b.y + b.height {
                for x in b.x..b.x + b.width {
                    let base = (y as usize * w + x as usize) * c;
                    for px in &mut image.data[base..base + c] {
                        *px = match (self.fill, rng.as_mut()) {
                            (NoiseFill::Uniform { low, high, .. }, Some(r)) => {
                                low + (high - low) * r.random::<f32>()
                            }
                            (NoiseFill::Constant { value }, _) => value,
                            _ => unreachable!(),
                        };
                    }
                }
            }
        }
    }
}

/// Non-negative saliency grid, same size as the image.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionMap {
    size: ImageSize,
    grid: Vec<f64>,
    total: f64,
}

impl AttentionMap {
    pub fn new(size: ImageSize, grid: Vec<f64>) -> Result<Self, MaskError> {
        size.check()?;
        let expected = size.width as usize * size.height as usize;
        if grid.len() != expected {
            return Err(MaskError::AttentionShape {
                got: grid.len(),
                expected,
            });
        }
        if let Some(i) = grid.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(MaskError::InvalidAttention(i));
        }
        let total: f64 = grid.iter().sum();
        if !(total > 0.0) {
            return Err(MaskError::DegenerateAttention);
        }
        Ok(Self { size, grid, total })
    }

    pub fn uniform(size: ImageSize) -> Result<Self, MaskError> {
        Self::new(size, vec![1.0; size.width as usize * size.height as usize])
    }

    pub fn size(&self) -> ImageSize {
        self.size
    }

    /// Grid scaled to sum to one.
    pub fn normalized(&self) -> Vec<f64> {
        self.grid.iter().map(|v| v / self.total).collect()
    }

    fn cdf(&self) -> Vec<f64> {
        self.grid
            .iter()
            .scan(0.0, |acc, v| {
                *acc += v;
                Some(*acc)
            })
            .collect()
    }
}

fn side(frac: f64, extent: u32) -> u32 {
    ((frac * extent as f64).round() as u32).clamp(1, extent)
}

fn draw_size<R: Rng>(rng: &mut R, image: ImageSize, range: SizeRange) -> (u32, u32) {
    let fw = rng.random_range(range.min_frac..=range.max_frac);
    let fh = rng.random_range(range.min_frac..=range.max_frac);
    (side(fw, image.width), side(fh, image.height))
}

/// Box of the given size centered on `(cx, cy)`, shifted the least amount
/// needed to stay inside the image.
fn box_around(cx: u32, cy: u32, width: u32, height: u32, image: ImageSize) -> MaskBox {
    let place = |c: u32, len: u32, extent: u32| {
        let start = c as i64 - (len / 2) as i64;
        start.clamp(0, (extent - len) as i64) as u32
    };
    MaskBox {
        x: place(cx, width, image.width),
        y: place(cy, height, image.height),
        width,
        height,
    }
}

/// Detector boxes clipped to the image; boxes entirely outside are dropped.
pub fn people_mask(detections: &[Detection], image: ImageSize, seed: u64) -> MaskPlan {
    let boxes = detections
        .iter()
        .filter_map(|d| {
            let x0 = d.x.max(0);
            let y0 = d.y.max(0);
            let x1 = (d.x + d.width as i64).min(image.width as i64);
            let y1 = (d.y + d.height as i64).min(image.height as i64);
            (x1 > x0 && y1 > y0).then(|| MaskBox {
                x: x0 as u32,
                y: y0 as u32,
                width: (x1 - x0) as u32,
                height: (y1 - y0) as u32,
            })
        })
        .collect();
    MaskPlan {
        image,
        boxes,
        anchors: Vec::new(),
        fill: NoiseFill::uniform(seed),
    }
}

/// `count` boxes with uniformly drawn centers and side lengths.
///
/// Each center is drawn uniformly over the pixel grid and the box is then
/// shifted inside the image, which makes this the uniform-attention case of
/// [`grad_mask`].
pub fn rand_mask(
    image: ImageSize,
    count: usize,
    size_range: SizeRange,
    rng_seed: u64,
) -> Result<MaskPlan, MaskError> {
    image.check()?;
    size_range.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut boxes = Vec::with_capacity(count);
    let mut anchors = Vec::with_capacity(count);
    for _ in 0..count {
        let cx = rng.random_range(0..image.width);
        let cy = rng.random_range(0..image.height);
        let (w, h) = draw_size(&mut rng, image, size_range);
        anchors.push((cx, cy));
        boxes.push(box_around(cx, cy, w, h, image));
    }
    Ok(MaskPlan {
        image,
        boxes,
        anchors,
        fill: NoiseFill::uniform(rng_seed),
    })
}

/// `count` boxes whose centers are drawn from the attention map as a
/// probability mass function.
pub fn grad_mask(
    attention: &AttentionMap,
    count: usize,
    size_range: SizeRange,
    rng_seed: u64,
) -> Result<MaskPlan, MaskError> {
    size_range.validate()?;
    let image = attention.size();
    let cdf = attention.cdf();
    let total = *cdf.last().ok_or(MaskError::DegenerateAttention)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut boxes = Vec::with_capacity(count);
    let mut anchors = Vec::with_capacity(count);
    for _ in 0..count {
        let target = rng.random::<f64>() * total;
        // First cell whose cumulative mass exceeds the target; zero-mass
        // cells are never chosen.
        let idx = cdf.partition_point(|c| *c <= target).min(cdf.len() - 1);
        let cx = (idx % image.width as usize) as u32;
        let cy = (idx / image.width as usize) as u32;
        let (w, h) = draw_size(&mut rng, image, size_range);
        anchors.push((cx, cy));
        boxes.push(box_around(cx, cy, w, h, image));
    }
    Ok(MaskPlan {
        image,
        boxes,
        anchors,
        fill: NoiseFill::uniform(rng_seed),
    })
}

/// Sampling weights for the second training phase: failed examples share
/// `hard_fraction` of the mass, the rest share the remainder. If one group
/// is empty the other gets everything.
pub fn curriculum_weights(error_flags: &[bool], hard_fraction: f64) -> Result<Vec<f64>, MaskError> {
    if error_flags.is_empty() {
        return Err(MaskError::EmptyInput);
    }
    if !(hard_fraction > 0.0 && hard_fraction < 1.0) {
        return Err(MaskError::InvalidHardFraction(hard_fraction));
    }
    let hard = error_flags.iter().filter(|f| **f).count();
    let easy = error_flags.len() - hard;
    let (hard_mass, easy_mass) = match (hard, easy) {
        (0, _) => (0.0, 1.0),
        (_, 0) => (1.0, 0.0),
        _ => (hard_fraction, 1.0 - hard_fraction),
    };
    Ok(error_flags
        .iter()
        .map(|&failed| {
            if failed {
                hard_mass / hard as f64
            } else {
                easy_mass / easy as f64
            }
        })
        .collect())
}
