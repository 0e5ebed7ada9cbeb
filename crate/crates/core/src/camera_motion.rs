//! Pixel-motion model and its least-squares inversion.
//!
//! A pixel at centered coordinates `(u, v)` with scene depth `Z` moves with
//! image velocity `L(u, v, Z) · x`, where `x` is the 6-DoF instantaneous
//! camera motion and `L` is a 2×6 interaction matrix. Stacking `L` for many
//! sampled pixels gives an over-determined linear system whose minimizer is
//! the camera motion; the yaw rate is its fifth component.
//!
//! Motion is expressed in the camera frame: X to the right, Y down, Z along
//! the optical axis. Angular velocities follow the right-hand rule about
//! those axes, except `omega_y`, which is measured about the *up* axis so
//! that a positive value is a rotation towards the left.

use nalgebra::{DMatrix, DVector, SMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::raster::{Raster, RasterKind};

/// Singular-value ratio below which the stacked system is rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Minimum number of pixels: six unknowns, two equations per pixel.
pub const MIN_SAMPLES: usize = 3;

pub type InteractionMatrix = SMatrix<f64, 2, 6>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MotionError {
    #[error("non-positive depth {0} at a sampled pixel")]
    NonPositiveDepth(f64),
    #[error("need at least {MIN_SAMPLES} samples, got {0}")]
    InsufficientSamples(usize),
    #[error("stacked system is rank deficient (singular-value ratio {ratio:e})")]
    RankDeficient { ratio: f64 },
    #[error("only {valid} valid pixels, {requested} requested")]
    NotEnoughValidPixels { valid: usize, requested: usize },
    #[error("raster is {got_w}x{got_h}, intrinsics expect {want_w}x{want_h}")]
    DimensionMismatch {
        got_w: u32,
        got_h: u32,
        want_w: u32,
        want_h: u32,
    },
    #[error("expected a {expected:?} raster")]
    WrongRasterKind { expected: RasterKind },
    #[error("invalid intrinsics: {0}")]
    InvalidIntrinsics(&'static str),
    #[error("invalid estimation config: {0}")]
    InvalidConfig(&'static str),
    #[error("non-finite flow at a sampled pixel")]
    NonFiniteFlow,
}

/// Pinhole intrinsics. `focal_length / pixel_pitch` is the focal length in
/// pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraIntrinsics {
    pub focal_length: f64,
    pub pixel_pitch: f64,
    pub principal_point: (f64, f64),
    pub image_size: (u32, u32),
}

impl CameraIntrinsics {
    pub fn new(
        focal_length: f64,
        pixel_pitch: f64,
        principal_point: (f64, f64),
        image_size: (u32, u32),
    ) -> Result<Self, MotionError> {
        let intrinsics = Self {
            focal_length,
            pixel_pitch,
            principal_point,
            image_size,
        };
        intrinsics.validate()?;
        Ok(intrinsics)
    }

    /// Square image with the principal point at its center and unit pixel
    /// pitch, so `focal_px` is the focal length in pixels.
    pub fn centered(focal_px: f64, width: u32, height: u32) -> Result<Self, MotionError> {
        Self::new(
            focal_px,
            1.0,
            ((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0),
            (width, height),
        )
    }

    pub fn validate(&self) -> Result<(), MotionError> {
        if !(self.focal_length > 0.0 && self.focal_length.is_finite()) {
            return Err(MotionError::InvalidIntrinsics("focal length must be positive"));
        }
        if !(self.pixel_pitch > 0.0 && self.pixel_pitch.is_finite()) {
            return Err(MotionError::InvalidIntrinsics("pixel pitch must be positive"));
        }
        let (w, h) = self.image_size;
        if w == 0 || h == 0 {
            return Err(MotionError::InvalidIntrinsics("image size must be non-zero"));
        }
        let (cx, cy) = self.principal_point;
        if !(0.0..=(w as f64 - 1.0)).contains(&cx) || !(0.0..=(h as f64 - 1.0)).contains(&cy) {
            return Err(MotionError::InvalidIntrinsics(
                "principal point must lie inside the image",
            ));
        }
        Ok(())
    }

    pub fn focal_px(&self) -> f64 {
        self.focal_length / self.pixel_pitch
    }

    /// Raw pixel indices to coordinates relative to the principal point.
    pub fn center(&self, x: f64, y: f64) -> (f64, f64) {
        (x - self.principal_point.0, y - self.principal_point.1)
    }
}

/// Pixel location and depth, without an observed flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImagePoint {
    pub u: f64,
    pub v: f64,
    pub depth: f64,
}

/// One row pair of the least-squares system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelSample {
    pub u: f64,
    pub v: f64,
    pub flow: [f64; 2],
    pub depth: f64,
}

impl PixelSample {
    pub fn point(&self) -> ImagePoint {
        ImagePoint {
            u: self.u,
            v: self.v,
            depth: self.depth,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MotionVector {
    pub v_x: f64,
    pub v_y: f64,
    pub v_z: f64,
    pub omega_x: f64,
    pub omega_y: f64,
    pub omega_z: f64,
}

impl MotionVector {
    pub const ZERO: MotionVector = MotionVector {
        v_x: 0.0,
        v_y: 0.0,
        v_z: 0.0,
        omega_x: 0.0,
        omega_y: 0.0,
        omega_z: 0.0,
    };

    pub fn from_array(a: [f64; 6]) -> Self {
        Self {
            v_x: a[0],
            v_y: a[1],
            v_z: a[2],
            omega_x: a[3],
            omega_y: a[4],
            omega_z: a[5],
        }
    }

    pub fn to_array(self) -> [f64; 6] {
        [
            self.v_x,
            self.v_y,
            self.v_z,
            self.omega_x,
            self.omega_y,
            self.omega_z,
        ]
    }

    pub fn pure_yaw(omega_y: f64) -> Self {
        Self {
            omega_y,
            ..Self::ZERO
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|c| c.is_finite())
    }

    pub fn scale(self, s: f64) -> Self {
        Self::from_array(self.to_array().map(|c| c * s))
    }

    pub fn norm(&self) -> f64 {
        self.to_array().iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

impl std::ops::Add for MotionVector {
    type Output = MotionVector;

    fn add(self, rhs: Self) -> Self {
        let (a, b) = (self.to_array(), rhs.to_array());
        Self::from_array(std::array::from_fn(|i| a[i] + b[i]))
    }
}

impl std::ops::Sub for MotionVector {
    type Output = MotionVector;

    fn sub(self, rhs: Self) -> Self {
        self + rhs.scale(-1.0)
    }
}

/// Which 2×6 matrix links camera motion to pixel velocity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InteractionModel {
    /// The matrix exactly as commonly printed for this pipeline. Row 2,
    /// column 5 carries `-ρuv/f`, which is not the derivative of a rigid
    /// rotation, and the ωz column is scaled by `ρ/f`. Exact only at
    /// `f = ρ = 1`.
    AsPrinted,
    /// First-order rigid-motion Jacobian in the same sign convention. Agrees
    /// with `AsPrinted` at the principal point and whenever `f = ρ = 1` and
    /// `uv = 0`.
    #[default]
    RigidBody,
}

impl InteractionModel {
    pub fn rows(
        self,
        point: &ImagePoint,
        intrinsics: &CameraIntrinsics,
    ) -> Result<InteractionMatrix, MotionError> {
        match self {
            InteractionModel::AsPrinted => interaction_rows(point, intrinsics),
            InteractionModel::RigidBody => rigid_body_rows(point, intrinsics),
        }
    }
}

fn check_depth(depth: f64) -> Result<(), MotionError> {
    if depth > 0.0 && depth.is_finite() {
        Ok(())
    } else {
        Err(MotionError::NonPositiveDepth(depth))
    }
}

/// The printed interaction matrix evaluated at `point`.
pub fn interaction_rows(
    point: &ImagePoint,
    intrinsics: &CameraIntrinsics,
) -> Result<InteractionMatrix, MotionError> {
    check_depth(point.depth)?;
    let (u, v, z) = (point.u, point.v, point.depth);
    let f = intrinsics.focal_length;
    let rho = intrinsics.pixel_pitch;
    #[rustfmt::skip]
    let m = InteractionMatrix::new(
        -f / (rho * z), 0.0, u / z, rho * u * v / f, (f * f + rho * u * u) / f, rho * v / f,
        0.0, -f / (rho * z), v / z, (f * f + rho * v * v) / f, -rho * u * v / f, -rho * u / f,
    );
    Ok(m)
}

/// Rigid-motion interaction matrix with ω_y positive towards the left.
pub fn rigid_body_rows(
    point: &ImagePoint,
    intrinsics: &CameraIntrinsics,
) -> Result<InteractionMatrix, MotionError> {
    check_depth(point.depth)?;
    let (u, v, z) = (point.u, point.v, point.depth);
    let f = intrinsics.focal_length;
    let rho = intrinsics.pixel_pitch;
    #[rustfmt::skip]
    let m = InteractionMatrix::new(
        -f / (rho * z), 0.0, u / z, rho * u * v / f, (f * f + rho * rho * u * u) / (rho * f), v,
        0.0, -f / (rho * z), v / z, (f * f + rho * rho * v * v) / (rho * f), rho * u * v / f, -u,
    );
    Ok(m)
}

/// Forward model: image velocity of each point under `motion`.
pub fn project_flow(
    motion: &MotionVector,
    points: &[ImagePoint],
    intrinsics: &CameraIntrinsics,
    model: InteractionModel,
) -> Result<Vec<[f64; 2]>, MotionError> {
    let x = nalgebra::Vector6::from(motion.to_array());
    points
        .iter()
        .map(|p| {
            let flow = model.rows(p, intrinsics)? * x;
            Ok([flow[0], flow[1]])
        })
        .collect()
}

/// Attaches flows produced by [`project_flow`] to their points.
pub fn synthesize_samples(
    motion: &MotionVector,
    points: &[ImagePoint],
    intrinsics: &CameraIntrinsics,
    model: InteractionModel,
) -> Result<Vec<PixelSample>, MotionError> {
    let flows = project_flow(motion, points, intrinsics, model)?;
    Ok(points
        .iter()
        .zip(flows)
        .map(|(p, flow)| PixelSample {
            u: p.u,
            v: p.v,
            flow,
            depth: p.depth,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimationConfig {
    pub sample_count: usize,
    #[serde(with = "crate::seed_text")]
    pub rng_seed: u64,
    pub residual_report: bool,
    pub model: InteractionModel,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        Self {
            sample_count: 200,
            rng_seed: 0,
            residual_report: true,
            model: InteractionModel::default(),
        }
    }
}

impl EstimationConfig {
    pub fn validate(&self) -> Result<(), MotionError> {
        if self.sample_count < MIN_SAMPLES {
            return Err(MotionError::InvalidConfig("sample_count must be at least 3"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionEstimate {
    pub motion: MotionVector,
    /// `‖A x̂ − b‖ / sqrt(2N)`, in pixels per frame.
    pub rms_residual: f64,
}

/// Least-squares camera motion from sampled pixels.
///
/// The minimizer of `‖A x − b‖²` is computed from the singular value
/// decomposition of the stacked matrix rather than the normal equations.
pub fn estimate_motion(
    samples: &[PixelSample],
    intrinsics: &CameraIntrinsics,
    config: &EstimationConfig,
) -> Result<MotionEstimate, MotionError> {
    if samples.len() < MIN_SAMPLES {
        return Err(MotionError::InsufficientSamples(samples.len()));
    }
    let rows = 2 * samples.len();
    let mut a = DMatrix::<f64>::zeros(rows, 6);
    let mut b = DVector::<f64>::zeros(rows);
    for (i, s) in samples.iter().enumerate() {
        if !(s.flow[0].is_finite() && s.flow[1].is_finite()) {
            return Err(MotionError::NonFiniteFlow);
        }
        let l = config.model.rows(&s.point(), intrinsics)?;
        a.view_mut((2 * i, 0), (2, 6)).copy_from(&l);
        b[2 * i] = s.flow[0];
        b[2 * i + 1] = s.flow[1];
    }

    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let ratio = if smax > 0.0 { smin / smax } else { 0.0 };
    if !(ratio >= RANK_TOLERANCE) {
        return Err(MotionError::RankDeficient { ratio });
    }
    let x = svd
        .solve(&b, smax * RANK_TOLERANCE)
        .map_err(|_| MotionError::RankDeficient { ratio })?;

    let residual = &a * &x - &b;
    let rms_residual = residual.norm() / (rows as f64).sqrt();
    Ok(MotionEstimate {
        motion: MotionVector::from_array([x[0], x[1], x[2], x[3], x[4], x[5]]),
        rms_residual,
    })
}

/// Draws `config.sample_count` distinct valid pixels from aligned flow and
/// depth rasters. A pixel is valid when its depth is positive and finite and
/// both flow components are finite.
pub fn sample_pixels(
    flow: &Raster,
    depth: &Raster,
    intrinsics: &CameraIntrinsics,
    config: &EstimationConfig,
) -> Result<Vec<PixelSample>, MotionError> {
    config.validate()?;
    if flow.kind() != RasterKind::Flow {
        return Err(MotionError::WrongRasterKind {
            expected: RasterKind::Flow,
        });
    }
    if depth.kind() != RasterKind::Depth {
        return Err(MotionError::WrongRasterKind {
            expected: RasterKind::Depth,
        });
    }
    let (want_w, want_h) = intrinsics.image_size;
    for r in [flow, depth] {
        if (r.width(), r.height()) != (want_w, want_h) {
            return Err(MotionError::DimensionMismatch {
                got_w: r.width(),
                got_h: r.height(),
                want_w,
                want_h,
            });
        }
    }

    let w = want_w as usize;
    let valid: Vec<usize> = (0..flow.pixel_count())
        .filter(|&i| {
            let (x, y) = ((i % w) as u32, (i / w) as u32);
            let z = depth.get(x, y);
            let [fu, fv] = flow.get_flow(x, y);
            z > 0.0 && z.is_finite() && fu.is_finite() && fv.is_finite()
        })
        .collect();
    if valid.len() < config.sample_count {
        return Err(MotionError::NotEnoughValidPixels {
            valid: valid.len(),
            requested: config.sample_count,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let picked = rand::seq::index::sample(&mut rng, valid.len(), config.sample_count);
    Ok(picked
        .iter()
        .map(|k| {
            let i = valid[k];
            let (x, y) = ((i % w) as u32, (i / w) as u32);
            let (u, v) = intrinsics.center(x as f64, y as f64);
            let [fu, fv] = flow.get_flow(x, y);
            PixelSample {
                u,
                v,
                flow: [fu as f64, fv as f64],
                depth: depth.get(x, y) as f64,
            }
        })
        .collect())
}

/// Yaw rate in radians per frame; positive turns left.
pub fn extract_yaw(motion: &MotionVector) -> f64 {
    motion.omega_y
}

/// Samples pixels from a frame pair and estimates the camera motion.
pub fn estimate_frame(
    flow: &Raster,
    depth: &Raster,
    intrinsics: &CameraIntrinsics,
    config: &EstimationConfig,
) -> Result<MotionEstimate, MotionError> {
    let samples = sample_pixels(flow, depth, intrinsics, config)?;
    estimate_motion(&samples, intrinsics, config)
}

#[cfg(test)]
mod tests {
    use super::*;

    macro_rules! assert_close {
        ($a:expr, $b:expr, $tol:expr) => {{
            let (a, b): (f64, f64) = ($a, $b);
            assert!((a - b).abs() <= $tol, "{a} vs {b} (tol {})", $tol);
        }};
    }

    fn unit() -> CameraIntrinsics {
        CameraIntrinsics::new(1.0, 1.0, (0.0, 0.0), (1, 1)).unwrap()
    }

    fn pt(u: f64, v: f64, depth: f64) -> ImagePoint {
        ImagePoint { u, v, depth }
    }

    fn assert_matrix(m: &InteractionMatrix, expected: [[f64; 6]; 2]) {
        for r in 0..2 {
            for c in 0..6 {
                assert_close!(m[(r, c)], expected[r][c], 1e-15);
            }
        }
    }

    #[test]
    fn printed_rows_at_principal_point() {
        let m = interaction_rows(&pt(0.0, 0.0, 1.0), &unit()).unwrap();
        assert_matrix(
            &m,
            [[-1., 0., 0., 0., 1., 0.], [0., -1., 0., 1., 0., 0.]],
        );
    }

    #[test]
    fn printed_rows_off_center() {
        let m = interaction_rows(&pt(1.0, 0.0, 2.0), &unit()).unwrap();
        assert_matrix(
            &m,
            [[-0.5, 0., 0.5, 0., 2., 0.], [0., -0.5, 0., 1., 0., -1.]],
        );
    }

    #[test]
    fn printed_rows_general_entries() {
        // f = 2, rho = 0.5, (u, v, Z) = (3, -2, 4)
        let intr = CameraIntrinsics::new(2.0, 0.5, (0.0, 0.0), (1, 1)).unwrap();
        let m = interaction_rows(&pt(3.0, -2.0, 4.0), &intr).unwrap();
        assert_matrix(
            &m,
            [
                [-1.0, 0.0, 0.75, -1.5, 4.25, -0.5],
                [0.0, -1.0, -0.5, 3.0, 1.5, -0.75],
            ],
        );
    }

    #[test]
    fn far_depth_kills_translation_only() {
        let near = interaction_rows(&pt(3.0, -2.0, 1.0), &unit()).unwrap();
        let far = interaction_rows(&pt(3.0, -2.0, 1e12), &unit()).unwrap();
        for r in 0..2 {
            for c in 0..3 {
                assert!(far[(r, c)].abs() < 1e-11);
            }
            for c in 3..6 {
                assert_eq!(far[(r, c)], near[(r, c)]);
            }
        }
    }

    #[test]
    fn models_agree_where_expected() {
        for (u, v) in [(0.0, 0.0), (1.0, 0.0), (0.0, -3.0)] {
            let a = interaction_rows(&pt(u, v, 2.0), &unit()).unwrap();
            let b = rigid_body_rows(&pt(u, v, 2.0), &unit()).unwrap();
            assert_eq!(a, b);
        }
        let a = interaction_rows(&pt(2.0, 3.0, 2.0), &unit()).unwrap();
        let b = rigid_body_rows(&pt(2.0, 3.0, 2.0), &unit()).unwrap();
        assert_eq!(a[(1, 4)], -b[(1, 4)]);
    }

    #[test]
    fn non_positive_depth_rejected() {
        for z in [0.0, -1.0, f64::NAN] {
            assert!(matches!(
                interaction_rows(&pt(0.0, 0.0, z), &unit()),
                Err(MotionError::NonPositiveDepth(_))
            ));
        }
    }

    #[test]
    fn project_flow_examples() {
        let intr = unit();
        for model in [InteractionModel::AsPrinted, InteractionModel::RigidBody] {
            let pts = [pt(0.0, 0.0, 1.0), pt(4.0, -4.0, 2.0)];
            let zero = project_flow(&MotionVector::ZERO, &pts, &intr, model).unwrap();
            assert!(zero.iter().all(|f| *f == [0.0, 0.0]));

            let yaw = project_flow(&MotionVector::pure_yaw(0.1), &pts[..1], &intr, model).unwrap();
            assert_close!(yaw[0][0], 0.1, 1e-15);
            assert_close!(yaw[0][1], 0.0, 1e-15);

            let fwd = MotionVector {
                v_z: 0.2,
                ..MotionVector::ZERO
            };
            let f = project_flow(&fwd, &pts[1..], &intr, model).unwrap();
            assert_close!(f[0][0], 0.4, 1e-15);
            assert_close!(f[0][1], -0.4, 1e-15);
        }
    }

    #[test]
    fn zero_flow_gives_zero_motion() {
        let intr = CameraIntrinsics::centered(100.0, 64, 64).unwrap();
        let samples: Vec<_> = (0..20)
            .map(|i| PixelSample {
                u: (i * 7 % 64) as f64 - 32.0,
                v: (i * 13 % 64) as f64 - 32.0,
                flow: [0.0, 0.0],
                depth: 1.0 + i as f64 * 0.3,
            })
            .collect();
        let est = estimate_motion(&samples, &intr, &EstimationConfig::default()).unwrap();
        assert!(est.motion.norm() < 1e-15);
        assert_eq!(est.rms_residual, 0.0);
    }

    #[test]
    fn two_samples_insufficient() {
        let s = PixelSample {
            u: 1.0,
            v: 2.0,
            flow: [0.0, 0.0],
            depth: 1.0,
        };
        assert_eq!(
            estimate_motion(&[s, s], &unit(), &EstimationConfig::default()),
            Err(MotionError::InsufficientSamples(2))
        );
    }

    #[test]
    fn coincident_samples_rank_deficient() {
        let s = PixelSample {
            u: 1.0,
            v: 2.0,
            flow: [0.3, 0.1],
            depth: 3.0,
        };
        let err = estimate_motion(&[s; 10], &unit(), &EstimationConfig::default()).unwrap_err();
        assert!(matches!(err, MotionError::RankDeficient { .. }));
    }

    #[test]
    fn extract_yaw_is_projection() {
        assert_eq!(extract_yaw(&MotionVector::pure_yaw(0.05)), 0.05);
        assert_eq!(extract_yaw(&MotionVector::ZERO), 0.0);
    }

    #[test]
    fn sample_pixels_contract() {
        let intr = CameraIntrinsics::centered(100.0, 128, 128).unwrap();
        let depth = Raster::filled(RasterKind::Depth, 128, 128, 2.0);
        let flow = Raster::flow(128, 128);
        let cfg = EstimationConfig {
            rng_seed: 9,
            ..Default::default()
        };
        let a = sample_pixels(&flow, &depth, &intr, &cfg).unwrap();
        let b = sample_pixels(&flow, &depth, &intr, &cfg).unwrap();
        assert_eq!(a.len(), 200);
        assert_eq!(a, b);
        let mut locs: Vec<_> = a.iter().map(|s| (s.u as i64, s.v as i64)).collect();
        locs.sort();
        locs.dedup();
        assert_eq!(locs.len(), 200);
        let c = sample_pixels(
            &flow,
            &depth,
            &intr,
            &EstimationConfig {
                rng_seed: 10,
                ..cfg
            },
        )
        .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sample_pixels_needs_valid_depth() {
        let intr = CameraIntrinsics::centered(100.0, 128, 128).unwrap();
        let mut depth = Raster::filled(RasterKind::Depth, 128, 128, f32::NAN);
        for i in 0..150u32 {
            depth.set(i % 128, i / 128, 1.0);
        }
        let flow = Raster::flow(128, 128);
        assert_eq!(
            sample_pixels(&flow, &depth, &intr, &EstimationConfig::default()),
            Err(MotionError::NotEnoughValidPixels {
                valid: 150,
                requested: 200
            })
        );
    }

    #[test]
    fn sample_pixels_checks_dimensions() {
        let intr = CameraIntrinsics::centered(100.0, 128, 128).unwrap();
        let depth = Raster::filled(RasterKind::Depth, 64, 64, 1.0);
        let flow = Raster::flow(64, 64);
        assert!(matches!(
            sample_pixels(&flow, &depth, &intr, &EstimationConfig::default()),
            Err(MotionError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn intrinsics_validation() {
        assert!(CameraIntrinsics::new(0.0, 1.0, (0.0, 0.0), (2, 2)).is_err());
        assert!(CameraIntrinsics::new(1.0, -1.0, (0.0, 0.0), (2, 2)).is_err());
        assert!(CameraIntrinsics::new(1.0, 1.0, (5.0, 0.0), (2, 2)).is_err());
    }
}
