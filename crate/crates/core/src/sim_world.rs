//! Synthetic indoor world with exact depth and flow.
//!
//! The world is a set of axis-aligned rectangles plus a horizontal floor and
//! ceiling. World axes: X and Z span the floor, Y points up. A camera pose
//! is a position and a yaw about the up axis (positive = towards the left),
//! with optional pitch and roll. At zero yaw the camera looks along +Z.
//!
//! Camera axes follow the usual pinhole layout: X right, Y down, Z forward,
//! so the camera-to-world rotation at yaw `ψ` has columns
//! `right = (-cos ψ, 0, sin ψ)`, `down = (0, -1, 0)`, `forward = (sin ψ, 0, cos ψ)`.

use nalgebra::{Matrix3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::camera_motion::{
    self, CameraIntrinsics, ImagePoint, InteractionModel, MotionError, MotionVector,
};
use crate::heading::{LabelError, YawSeries};
use crate::raster::{Raster, RasterKind};

/// Per-frame rotation limit for a trajectory.
pub const MAX_ROTATION_PER_FRAME: f64 = 10.0 * std::f64::consts::PI / 180.0;

const HIT_EPSILON: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("ray through pixel ({x}, {y}) escapes the scene")]
    OpenWorld { x: u32, y: u32 },
    #[error("pixel ({x}, {y}) lands behind the second camera")]
    BehindCamera { x: u32, y: u32 },
    #[error("depth raster is {got_w}x{got_h}, intrinsics expect {want_w}x{want_h}")]
    DimensionMismatch {
        got_w: u32,
        got_h: u32,
        want_w: u32,
        want_h: u32,
    },
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
    #[error(transparent)]
    Motion(#[from] MotionError),
    #[error(transparent)]
    Label(#[from] LabelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    /// The two remaining axes, in x/y/z order.
    pub fn others(self) -> (usize, usize) {
        match self {
            Axis::X => (1, 2),
            Axis::Y => (0, 2),
            Axis::Z => (0, 1),
        }
    }
}

/// Rectangle in the plane `axis = coord`, spanning `range_a` and `range_b`
/// along the other two axes (in x/y/z order).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wall {
    pub axis: Axis,
    pub coord: f64,
    pub range_a: (f64, f64),
    pub range_b: (f64, f64),
}

impl Wall {
    fn intersect(&self, origin: &Vector3<f64>, dir: &Vector3<f64>) -> Option<f64> {
        let k = self.axis.index();
        if dir[k].abs() < 1e-15 {
            return None;
        }
        let t = (self.coord - origin[k]) / dir[k];
        if t <= HIT_EPSILON {
            return None;
        }
        let (ia, ib) = self.axis.others();
        let pa = origin[ia] + t * dir[ia];
        let pb = origin[ib] + t * dir[ib];
        let inside = |p: f64, (lo, hi): (f64, f64)| p >= lo && p <= hi;
        (inside(pa, self.range_a) && inside(pb, self.range_b)).then_some(t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenePlan {
    pub floor_height: f64,
    pub ceiling_height: f64,
    pub walls: Vec<Wall>,
}

impl ScenePlan {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.ceiling_height > self.floor_height) {
            return Err(SimError::InvalidScene(
                "ceiling must be above the floor".into(),
            ));
        }
        for (i, w) in self.walls.iter().enumerate() {
            let ok = w.coord.is_finite()
                && w.range_a.0 < w.range_a.1
                && w.range_b.0 < w.range_b.1;
            if !ok {
                return Err(SimError::InvalidScene(format!("wall {i} is degenerate")));
            }
        }
        Ok(())
    }

    /// Closed rectangular hall `[x0, x1] × [z0, z1]` with floor and ceiling.
    pub fn hall(x: (f64, f64), z: (f64, f64), floor: f64, ceiling: f64) -> Self {
        let y = (floor, ceiling);
        Self {
            floor_height: floor,
            ceiling_height: ceiling,
            walls: vec![
                Wall { axis: Axis::X, coord: x.0, range_a: y, range_b: z },
                Wall { axis: Axis::X, coord: x.1, range_a: y, range_b: z },
                Wall { axis: Axis::Z, coord: z.0, range_a: x, range_b: y },
                Wall { axis: Axis::Z, coord: z.1, range_a: x, range_b: y },
            ],
        }
    }

    /// Straight corridor along +Z: side walls at `x = ±width/2`, end walls
    /// at `z = 0` and `z = length`.
    pub fn corridor(width: f64, length: f64, floor: f64, ceiling: f64) -> Self {
        Self::hall((-width / 2.0, width / 2.0), (0.0, length), floor, ceiling)
    }

    /// Distance along `dir` to the nearest surface.
    pub fn cast(&self, origin: &Vector3<f64>, dir: &Vector3<f64>) -> Option<f64> {
        let mut best: Option<f64> = None;
        let mut consider = |t: f64| {
            if t > HIT_EPSILON && best.is_none_or(|b| t < b) {
                best = Some(t);
            }
        };
        if dir.y.abs() > 1e-15 {
            consider((self.floor_height - origin.y) / dir.y);
            consider((self.ceiling_height - origin.y) / dir.y);
        }
        for w in &self.walls {
            if let Some(t) = w.intersect(origin, dir) {
                consider(t);
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    pub position: [f64; 3],
    /// About the world up axis; positive turns left.
    pub yaw: f64,
    /// Positive tilts the optical axis up.
    #[serde(default)]
    pub pitch: f64,
    /// About the optical axis.
    #[serde(default)]
    pub roll: f64,
}

impl CameraPose {
    pub fn new(position: [f64; 3], yaw: f64) -> Self {
        Self {
            position,
            yaw,
            pitch: 0.0,
            roll: 0.0,
        }
    }

    pub fn position(&self) -> Vector3<f64> {
        Vector3::from(self.position)
    }

    /// Camera-to-world rotation.
    pub fn rotation(&self) -> Rotation3<f64> {
        let (s, c) = self.yaw.sin_cos();
        #[rustfmt::skip]
        let heading = Matrix3::new(
            -c, 0.0, s,
            0.0, -1.0, 0.0,
            s, 0.0, c,
        );
        let heading = Rotation3::from_matrix_unchecked(heading);
        // Pitch up is a positive rotation about camera X (Z tips towards -Y).
        heading
            * Rotation3::from_axis_angle(&Vector3::x_axis(), self.pitch)
            * Rotation3::from_axis_angle(&Vector3::z_axis(), self.roll)
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|p| p.is_finite())
            && self.yaw.is_finite()
            && self.pitch.is_finite()
            && self.roll.is_finite()
    }
}

/// Camera-frame motion between two poses, one frame apart.
///
/// Translation is the displacement expressed in the first camera's frame;
/// rotation is the axis-angle vector of the relative rotation. `omega_y` is
/// negated so that it is measured about the up axis.
pub fn relative_motion(from: &CameraPose, to: &CameraPose) -> MotionVector {
    let r0 = from.rotation();
    let r_rel = r0.inverse() * to.rotation();
    let t = r0.inverse() * (to.position() - from.position());
    let w = r_rel.scaled_axis();
    MotionVector {
        v_x: t.x,
        v_y: t.y,
        v_z: t.z,
        omega_x: w.x,
        omega_y: -w.y,
        omega_z: w.z,
    }
}

fn relative_angle(from: &CameraPose, to: &CameraPose) -> f64 {
    (from.rotation().inverse() * to.rotation()).angle()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub poses: Vec<CameraPose>,
    pub fps: f64,
}

impl Trajectory {
    pub fn new(poses: Vec<CameraPose>, fps: f64) -> Result<Self, SimError> {
        let t = Self { poses, fps };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err(SimError::InvalidTrajectory("fps must be positive".into()));
        }
        if self.poses.len() < 2 {
            return Err(SimError::InvalidTrajectory(
                "need at least two poses".into(),
            ));
        }
        if let Some(i) = self.poses.iter().position(|p| !p.is_finite()) {
            return Err(SimError::InvalidTrajectory(format!("pose {i} is not finite")));
        }
        for (i, w) in self.poses.windows(2).enumerate() {
            let angle = relative_angle(&w[0], &w[1]);
            if angle >= MAX_ROTATION_PER_FRAME {
                return Err(SimError::InvalidTrajectory(format!(
                    "rotation of {:.2}° between frames {i} and {}",
                    angle.to_degrees(),
                    i + 1
                )));
            }
        }
        Ok(())
    }

    pub fn motions(&self) -> Vec<MotionVector> {
        self.poses
            .windows(2)
            .map(|w| relative_motion(&w[0], &w[1]))
            .collect()
    }

    pub fn yaw_series(&self) -> Result<YawSeries, SimError> {
        let values = self.motions().iter().map(camera_motion::extract_yaw).collect();
        Ok(YawSeries::new(values, self.fps)?)
    }

    /// The same poses in reverse order: footage played backwards.
    pub fn reversed(&self) -> Trajectory {
        Trajectory {
            poses: self.poses.iter().rev().copied().collect(),
            fps: self.fps,
        }
    }

    /// Axis-aligned floor-plan bounds of the camera positions: `(x, z)`.
    pub fn extent(&self) -> ((f64, f64), (f64, f64)) {
        let mut x = (f64::INFINITY, f64::NEG_INFINITY);
        let mut z = (f64::INFINITY, f64::NEG_INFINITY);
        for p in &self.poses {
            x = (x.0.min(p.position[0]), x.1.max(p.position[0]));
            z = (z.0.min(p.position[2]), z.1.max(p.position[2]));
        }
        (x, z)
    }
}

/// One leg of a walking plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Leg {
    Straight { frames: usize },
    /// Heading changes by `angle` radians spread evenly over `frames`,
    /// positive to the left, while walking.
    Turn { frames: usize, angle: f64 },
}

/// Walks `legs` at `step` length units per frame from `start`.
pub fn walk(start: CameraPose, step: f64, legs: &[Leg], fps: f64) -> Result<Trajectory, SimError> {
    let mut poses = vec![start];
    let mut pose = start;
    for leg in legs {
        let (frames, turn) = match *leg {
            Leg::Straight { frames } => (frames, 0.0),
            Leg::Turn { frames, angle } => (frames, angle / frames.max(1) as f64),
        };
        for _ in 0..frames {
            // Midpoint heading keeps the path symmetric through a turn.
            let mid = pose.yaw + turn / 2.0;
            pose.position[0] += step * mid.sin();
            pose.position[2] += step * mid.cos();
            pose.yaw += turn;
            poses.push(pose);
        }
    }
    Trajectory::new(poses, fps)
}

/// Closed hall around a trajectory with `margin` clearance on every side.
pub fn hall_around(trajectory: &Trajectory, margin: f64, floor: f64, ceiling: f64) -> ScenePlan {
    let ((x0, x1), (z0, z1)) = trajectory.extent();
    ScenePlan::hall(
        (x0 - margin, x1 + margin),
        (z0 - margin, z1 + margin),
        floor,
        ceiling,
    )
}

fn pixel_ray(intrinsics: &CameraIntrinsics, x: u32, y: u32) -> (f64, f64, Vector3<f64>) {
    let (u, v) = intrinsics.center(x as f64, y as f64);
    let s = intrinsics.pixel_pitch / intrinsics.focal_length;
    (u, v, Vector3::new(s * u, s * v, 1.0))
}

/// Z-depth along the optical axis for every pixel.
pub fn render_depth(
    scene: &ScenePlan,
    pose: &CameraPose,
    intrinsics: &CameraIntrinsics,
) -> Result<Raster, SimError> {
    let (w, h) = intrinsics.image_size;
    let rot = pose.rotation();
    let origin = pose.position();
    let mut depth = Raster::depth(w, h);
    for y in 0..h {
        for x in 0..w {
            let (_, _, ray) = pixel_ray(intrinsics, x, y);
            // The camera-frame ray has unit Z, so the hit parameter is Z-depth.
            let t = scene
                .cast(&origin, &(rot * ray))
                .ok_or(SimError::OpenWorld { x, y })?;
            depth.set(x, y, t as f32);
        }
    }
    Ok(depth)
}

fn check_dims(r: &Raster, intrinsics: &CameraIntrinsics) -> Result<(), SimError> {
    let (want_w, want_h) = intrinsics.image_size;
    if (r.width(), r.height()) != (want_w, want_h) {
        return Err(SimError::DimensionMismatch {
            got_w: r.width(),
            got_h: r.height(),
            want_w,
            want_h,
        });
    }
    Ok(())
}

/// Flow predicted by the linear pixel-motion model at every pixel.
pub fn instantaneous_flow(
    motion: &MotionVector,
    depth: &Raster,
    intrinsics: &CameraIntrinsics,
    model: InteractionModel,
) -> Result<Raster, SimError> {
    check_dims(depth, intrinsics)?;
    let (w, h) = intrinsics.image_size;
    let points: Vec<ImagePoint> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .map(|(x, y)| {
            let (u, v) = intrinsics.center(x as f64, y as f64);
            ImagePoint {
                u,
                v,
                depth: depth.get(x, y) as f64,
            }
        })
        .collect();
    let flows = camera_motion::project_flow(motion, &points, intrinsics, model)?;
    let data = flows
        .into_iter()
        .flat_map(|[a, b]| [a as f32, b as f32])
        .collect();
    Ok(Raster::from_vec(RasterKind::Flow, w, h, data).expect("shape matches"))
}

/// Exact two-view flow: back-project each pixel with its depth at `pose_t`,
/// move the point into the frame of `pose_t1` and project again.
pub fn reprojection_flow(
    scene: &ScenePlan,
    pose_t: &CameraPose,
    pose_t1: &CameraPose,
    intrinsics: &CameraIntrinsics,
) -> Result<Raster, SimError> {
    let depth = render_depth(scene, pose_t, intrinsics)?;
    reprojection_flow_with_depth(&depth, pose_t, pose_t1, intrinsics)
}

/// [`reprojection_flow`] with a depth raster already rendered at `pose_t`.
pub fn reprojection_flow_with_depth(
    depth: &Raster,
    pose_t: &CameraPose,
    pose_t1: &CameraPose,
    intrinsics: &CameraIntrinsics,
) -> Result<Raster, SimError> {
    check_dims(depth, intrinsics)?;
    let (w, h) = intrinsics.image_size;
    let r0 = pose_t.rotation();
    let r_rel = r0.inverse() * pose_t1.rotation();
    let t_rel = r0.inverse() * (pose_t1.position() - pose_t.position());
    let r_back = r_rel.inverse();
    let scale = intrinsics.focal_length / intrinsics.pixel_pitch;
    let mut flow = Raster::flow(w, h);
    for y in 0..h {
        for x in 0..w {
            let (_, _, ray) = pixel_ray(intrinsics, x, y);
            let z = depth.get(x, y) as f64;
            let p = r_back * (ray * z - t_rel);
            if p.z <= 0.0 {
                return Err(SimError::BehindCamera { x, y });
            }
            // Displacement in normalized coordinates, scaled to pixels.
            let du = scale * (p.x - ray.x * p.z) / p.z;
            let dv = scale * (p.y - ray.y * p.z) / p.z;
            flow.set_flow(x, y, [du as f32, dv as f32]);
        }
    }
    Ok(flow)
}

/// Rendered data for one frame transition.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePair {
    pub index: usize,
    pub depth: Raster,
    pub flow: Raster,
    pub motion: MotionVector,
}

/// Everything rendered from one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub intrinsics: CameraIntrinsics,
    pub fps: f64,
    /// Depth at each frame that starts a transition.
    pub depths: Vec<Raster>,
    pub flows: Vec<Raster>,
    pub motions: Vec<MotionVector>,
    pub yaw: YawSeries,
}

/// Lazily renders frame pairs so long episodes need not sit in memory.
pub struct EpisodeFrames<'a> {
    scene: &'a ScenePlan,
    trajectory: &'a Trajectory,
    intrinsics: CameraIntrinsics,
    next: usize,
}

impl<'a> EpisodeFrames<'a> {
    pub fn new(
        scene: &'a ScenePlan,
        trajectory: &'a Trajectory,
        intrinsics: &CameraIntrinsics,
    ) -> Result<Self, SimError> {
        scene.validate()?;
        trajectory.validate()?;
        intrinsics.validate()?;
        Ok(Self {
            scene,
            trajectory,
            intrinsics: *intrinsics,
            next: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.trajectory.poses.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Renders transition `index` independently of the iterator position.
    pub fn render(&self, index: usize) -> Result<FramePair, SimError> {
        let p0 = &self.trajectory.poses[index];
        let p1 = &self.trajectory.poses[index + 1];
        let depth = render_depth(self.scene, p0, &self.intrinsics)?;
        let flow = reprojection_flow_with_depth(&depth, p0, p1, &self.intrinsics)?;
        Ok(FramePair {
            index,
            depth,
            flow,
            motion: relative_motion(p0, p1),
        })
    }
}

impl Iterator for EpisodeFrames<'_> {
    type Item = Result<FramePair, SimError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.len() {
            return None;
        }
        let out = self.render(self.next);
        self.next += 1;
        Some(out)
    }
}

pub fn synthesize_episode(
    scene: &ScenePlan,
    trajectory: &Trajectory,
    intrinsics: &CameraIntrinsics,
) -> Result<Episode, SimError> {
    let frames = EpisodeFrames::new(scene, trajectory, intrinsics)?;
    let mut depths = Vec::with_capacity(frames.len());
    let mut flows = Vec::with_capacity(frames.len());
    let mut motions = Vec::with_capacity(frames.len());
    for pair in frames {
        let pair = pair?;
        depths.push(pair.depth);
        flows.push(pair.flow);
        motions.push(pair.motion);
    }
    Ok(Episode {
        intrinsics: *intrinsics,
        fps: trajectory.fps,
        depths,
        flows,
        motions,
        yaw: trajectory.yaw_series()?,
    })
}

/// Ready-made scenarios used by tests, examples and the CLI.
pub mod scenarios {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    pub const FPS: f64 = 30.0;
    /// Walking speed of 1.2 m/s at 30 fps.
    pub const STEP: f64 = 0.04;
    pub const EYE_HEIGHT: f64 = 1.5;
    pub const CEILING: f64 = 3.2;
    pub const MARGIN: f64 = 6.0;

    fn start() -> CameraPose {
        CameraPose::new([0.0, EYE_HEIGHT, 0.0], 0.0)
    }

    pub fn straight(frames: usize) -> Trajectory {
        walk(start(), STEP, &[Leg::Straight { frames }], FPS).expect("valid plan")
    }

    /// A single 90° left turn over `turn_frames`, with straight lead-in and
    /// lead-out of `straight_frames` each.
    pub fn l_turn(straight_frames: usize, turn_frames: usize) -> Trajectory {
        walk(
            start(),
            STEP,
            &[
                Leg::Straight { frames: straight_frames },
                Leg::Turn { frames: turn_frames, angle: FRAC_PI_2 },
                Leg::Straight { frames: straight_frames },
            ],
            FPS,
        )
        .expect("valid plan")
    }

    /// Five 90° turns (left, right, left, right, right) of 60 frames each,
    /// separated by 90-frame straight stretches.
    pub fn five_turns() -> Trajectory {
        let turn = |sign: f64| Leg::Turn {
            frames: 60,
            angle: sign * FRAC_PI_2,
        };
        let straight = Leg::Straight { frames: 90 };
        walk(
            start(),
            STEP,
            &[
                straight,
                turn(1.0),
                straight,
                turn(-1.0),
                straight,
                turn(1.0),
                straight,
                turn(-1.0),
                straight,
                turn(-1.0),
                straight,
            ],
            FPS,
        )
        .expect("valid plan")
    }

    pub fn hall_for(trajectory: &Trajectory) -> ScenePlan {
        hall_around(trajectory, MARGIN, 0.0, CEILING)
    }

    /// 96×96 camera with a 100 px focal length (about 51° field of view).
    pub fn default_intrinsics() -> CameraIntrinsics {
        CameraIntrinsics::centered(100.0, 96, 96).expect("valid intrinsics")
    }
}
