//! Python bindings for `navflow`.
//!
//! Series are passed as plain lists; errors raise `navflow_py.NavflowError`,
//! a subclass of `ValueError`.

use std::path::PathBuf;

use navflow::camera_motion::{self, InteractionModel, PixelSample};
use navflow::dataset_io;
use navflow::heading::{self, DirectionClass, DirectionLabelSeries, LabelConfig, LabelMode, YawSeries};
use navflow::mask_augment::{self, AttentionMap, ImageSize, MaskPlan, SizeRange};
use navflow::nav_metrics;
use navflow::raster::{Raster as CoreRaster, RasterKind};
use navflow::route_graph::{self, AnnotationSet, NodeId};
use navflow::sim_world::scenarios;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(navflow_py, NavflowError, PyValueError);

fn err(e: impl std::fmt::Display) -> PyErr {
    NavflowError::new_err(e.to_string())
}

fn model(name: &str) -> PyResult<InteractionModel> {
    match name {
        "rigid-body" => Ok(InteractionModel::RigidBody),
        "as-printed" => Ok(InteractionModel::AsPrinted),
        other => Err(err(format!("unknown model {other:?}"))),
    }
}

fn labels(v: &[u8]) -> PyResult<DirectionLabelSeries> {
    DirectionLabelSeries::from_indices(v).map_err(err)
}

/// Pinhole camera intrinsics.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
pub struct CameraIntrinsics {
    inner: camera_motion::CameraIntrinsics,
}

#[pymethods]
impl CameraIntrinsics {
    #[new]
    #[pyo3(signature = (focal_length, pixel_pitch, principal_point, image_size))]
    fn new(
        focal_length: f64,
        pixel_pitch: f64,
        principal_point: (f64, f64),
        image_size: (u32, u32),
    ) -> PyResult<Self> {
        camera_motion::CameraIntrinsics::new(focal_length, pixel_pitch, principal_point, image_size)
            .map(|inner| Self { inner })
            .map_err(err)
    }

    /// Principal point at the image center, focal length given in pixels.
    #[staticmethod]
    fn centered(focal_px: f64, width: u32, height: u32) -> PyResult<Self> {
        camera_motion::CameraIntrinsics::centered(focal_px, width, height)
            .map(|inner| Self { inner })
            .map_err(err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        dataset_io::read_document(&path).map(|inner| Self { inner }).map_err(err)
    }

    #[getter]
    fn focal_px(&self) -> f64 {
        self.inner.focal_px()
    }

    #[getter]
    fn image_size(&self) -> (u32, u32) {
        self.inner.image_size
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

/// Depth (one channel) or flow (two channels) raster.
#[pyclass(from_py_object)]
#[derive(Clone)]
pub struct Raster {
    inner: CoreRaster,
}

#[pymethods]
impl Raster {
    /// `kind` is "depth" or "flow"; `data` is row-major and interleaved.
    #[new]
    fn new(kind: &str, width: u32, height: u32, data: Vec<f32>) -> PyResult<Self> {
        let kind = match kind {
            "depth" => RasterKind::Depth,
            "flow" => RasterKind::Flow,
            other => return Err(err(format!("unknown raster kind {other:?}"))),
        };
        CoreRaster::from_vec(kind, width, height, data)
            .map(|inner| Self { inner })
            .ok_or_else(|| err("data length does not match width × height × channels"))
    }

    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        dataset_io::read_raster(&path).map(|inner| Self { inner }).map_err(err)
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        dataset_io::write_raster(&self.inner, &path).map_err(err)
    }

    #[getter]
    fn kind(&self) -> &'static str {
        match self.inner.kind() {
            RasterKind::Depth => "depth",
            RasterKind::Flow => "flow",
        }
    }

    #[getter]
    fn width(&self) -> u32 {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> u32 {
        self.inner.height()
    }

    #[getter]
    fn data(&self) -> Vec<f32> {
        self.inner.data().to_vec()
    }
}

/// Least-squares camera motion from `(u, v, flow_u, flow_v, depth)` samples,
/// with `u, v` measured in pixels from the principal point.
/// Returns `((v_x, v_y, v_z, omega_x, omega_y, omega_z), rms_residual)`.
#[pyfunction]
#[pyo3(signature = (samples, intrinsics, model_name = "rigid-body"))]
fn estimate_motion(
    samples: Vec<(f64, f64, f64, f64, f64)>,
    intrinsics: &CameraIntrinsics,
    model_name: &str,
) -> PyResult<([f64; 6], f64)> {
    let samples: Vec<PixelSample> = samples
        .into_iter()
        .map(|(u, v, fu, fv, depth)| PixelSample { u, v, flow: [fu, fv], depth })
        .collect();
    let config = camera_motion::EstimationConfig {
        model: model(model_name)?,
        ..Default::default()
    };
    let est = camera_motion::estimate_motion(&samples, &intrinsics.inner, &config).map_err(err)?;
    Ok((est.motion.to_array(), est.rms_residual))
}

/// Samples pixels from a flow/depth pair and returns `(motion, rms_residual)`.
#[pyfunction]
#[pyo3(signature = (flow, depth, intrinsics, samples = 200, seed = 0, model_name = "rigid-body"))]
fn estimate_frame(
    flow: &Raster,
    depth: &Raster,
    intrinsics: &CameraIntrinsics,
    samples: usize,
    seed: u64,
    model_name: &str,
) -> PyResult<([f64; 6], f64)> {
    let config = camera_motion::EstimationConfig {
        sample_count: samples,
        rng_seed: seed,
        residual_report: true,
        model: model(model_name)?,
    };
    config.validate().map_err(err)?;
    let est = camera_motion::estimate_frame(&flow.inner, &depth.inner, &intrinsics.inner, &config)
        .map_err(err)?;
    Ok((est.motion.to_array(), est.rms_residual))
}

/// Eight-way direction labels for a yaw-rate series in radians per frame.
#[pyfunction]
#[pyo3(signature = (yaw, fps, window = 15, lookahead = None, mode = "heading-lookahead"))]
fn label_frames(
    yaw: Vec<f64>,
    fps: f64,
    window: usize,
    lookahead: Option<usize>,
    mode: &str,
) -> PyResult<Vec<u8>> {
    let mode = match mode {
        "heading-lookahead" => LabelMode::HeadingLookahead,
        "rate-threshold" => LabelMode::RateThreshold,
        other => return Err(err(format!("unknown label mode {other:?}"))),
    };
    let series = YawSeries::new(yaw, fps).map_err(err)?;
    let config = LabelConfig {
        smoothing_window: window,
        lookahead_frames: lookahead,
        mode,
    };
    heading::label_frames(&series, &config)
        .map(|l| l.indices())
        .map_err(err)
}

/// Class index for a heading change in degrees (positive is left).
#[pyfunction]
fn class_from_angle(angle_deg: f64) -> u8 {
    DirectionClass::from_angle_deg(angle_deg).index()
}

/// Left/right mirror of a class index.
#[pyfunction]
fn mirror_class(index: u8) -> PyResult<u8> {
    DirectionClass::new(index).map(|c| c.mirror().index()).map_err(err)
}

/// Inverse-frequency sampling weights per frame.
#[pyfunction]
fn class_weights(labels_in: Vec<u8>) -> PyResult<Vec<f64>> {
    heading::class_weights(&labels(&labels_in)?).map_err(err)
}

/// Topological map with its triplet annotations.
#[pyclass]
pub struct TopologicalMap {
    map: route_graph::TopologicalMap,
    annotations: AnnotationSet,
}

#[pymethods]
impl TopologicalMap {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let (map, list) = dataset_io::load_map(&path).map_err(err)?;
        let mut annotations = AnnotationSet::new();
        for a in list {
            annotations.insert(a).map_err(err)?;
        }
        Ok(Self { map, annotations })
    }

    #[getter]
    fn nodes(&self) -> Vec<String> {
        self.map.node_ids().into_iter().map(|n| n.0).collect()
    }

    /// Triplets a route would need but the annotations lack.
    fn missing_triplets(&self) -> Vec<String> {
        route_graph::validate_coverage(&self.map, &self.annotations)
            .iter()
            .map(ToString::to_string)
            .collect()
    }

    /// `(total_weight, node_ids)` of the shortest route.
    fn shortest_path(&self, start: &str, goal: &str) -> PyResult<(u64, Vec<String>)> {
        let route = route_graph::shortest_path(&self.map, &NodeId::from(start), &NodeId::from(goal))
            .map_err(err)?;
        Ok((route.total_weight, route.nodes.into_iter().map(|n| n.0).collect()))
    }

    /// Random synthetic path. Returns a dict with `start`, `goal`, `nodes`,
    /// `triplets` (as `(in, node, out, video, start, end)` tuples) and
    /// `frame_count`.
    #[pyo3(signature = (seed, with_reversals = false))]
    fn generate_path<'py>(&self, py: Python<'py>, seed: u64, with_reversals: bool) -> PyResult<Bound<'py, PyDict>> {
        let set = if with_reversals {
            self.annotations.with_reversals()
        } else {
            self.annotations.clone()
        };
        let path = route_graph::generate_path(&self.map, &set, seed).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("start", &path.start_node.0)?;
        d.set_item("goal", &path.goal_node.0)?;
        d.set_item("nodes", path.route.nodes.iter().map(|n| n.0.clone()).collect::<Vec<_>>())?;
        let triplets: Vec<_> = path
            .triplets
            .iter()
            .map(|t| {
                (
                    t.key.incoming.to_string(),
                    t.key.node.0.clone(),
                    t.key.outgoing.to_string(),
                    t.segment.video_id.clone(),
                    t.segment.frame_start,
                    t.segment.frame_end,
                )
            })
            .collect();
        d.set_item("triplets", triplets)?;
        d.set_item("frame_count", path.frame_count())?;
        Ok(d)
    }
}

fn boxes(plan: &MaskPlan) -> Vec<(u32, u32, u32, u32)> {
    plan.boxes.iter().map(|b| (b.x, b.y, b.width, b.height)).collect()
}

/// Uniformly placed `(x, y, width, height)` boxes.
#[pyfunction]
#[pyo3(signature = (width, height, count = 3, min_frac = 0.1, max_frac = 0.3, seed = 0))]
fn rand_mask(
    width: u32,
    height: u32,
    count: usize,
    min_frac: f64,
    max_frac: f64,
    seed: u64,
) -> PyResult<Vec<(u32, u32, u32, u32)>> {
    let range = SizeRange { min_frac, max_frac };
    mask_augment::rand_mask(ImageSize::new(width, height), count, range, seed)
        .map(|p| boxes(&p))
        .map_err(err)
}

/// Boxes centered on pixels drawn from `attention`, a list of rows.
#[pyfunction]
#[pyo3(signature = (attention, count = 3, min_frac = 0.1, max_frac = 0.3, seed = 0))]
fn grad_mask(
    attention: Vec<Vec<f64>>,
    count: usize,
    min_frac: f64,
    max_frac: f64,
    seed: u64,
) -> PyResult<Vec<(u32, u32, u32, u32)>> {
    let height = attention.len() as u32;
    let width = attention.first().map_or(0, |r| r.len()) as u32;
    if attention.iter().any(|r| r.len() as u32 != width) {
        return Err(err("attention rows differ in length"));
    }
    let att = AttentionMap::new(ImageSize::new(width, height), attention.concat()).map_err(err)?;
    let range = SizeRange { min_frac, max_frac };
    mask_augment::grad_mask(&att, count, range, seed)
        .map(|p| boxes(&p))
        .map_err(err)
}

/// Sampling weights giving `hard_fraction` of the mass to flagged examples.
#[pyfunction]
#[pyo3(signature = (error_flags, hard_fraction = 0.8))]
fn curriculum_weights(error_flags: Vec<bool>, hard_fraction: f64) -> PyResult<Vec<f64>> {
    mask_augment::curriculum_weights(&error_flags, hard_fraction).map_err(err)
}

/// Accuracy, binary and macro F1, mean angle error and the confusion matrix.
#[pyfunction]
fn evaluate<'py>(py: Python<'py>, pred: Vec<u8>, gt: Vec<u8>) -> PyResult<Bound<'py, PyDict>> {
    let r = nav_metrics::evaluate(&labels(&pred)?, &labels(&gt)?).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("frames", r.frames)?;
    d.set_item("accuracy", r.accuracy)?;
    d.set_item("f1_binary", r.f1_binary)?;
    d.set_item("f1_binary_degenerate", r.f1_binary_degenerate)?;
    d.set_item("f1_macro_turns", r.f1_macro_turns)?;
    d.set_item("mean_angle_error_deg", r.mean_angle_error_deg)?;
    d.set_item("confusion", r.per_class_confusion.0.iter().map(|row| row.to_vec()).collect::<Vec<_>>())?;
    Ok(d)
}

/// Ground-truth `(yaw, fps)` of a built-in scenario: "five-turns", "l-turn"
/// or "straight".
#[pyfunction]
fn scenario_yaw(name: &str) -> PyResult<(Vec<f64>, f64)> {
    let trajectory = match name {
        "five-turns" => scenarios::five_turns(),
        "l-turn" => scenarios::l_turn(90, 60),
        "straight" => scenarios::straight(300),
        other => return Err(err(format!("unknown scenario {other:?}"))),
    };
    let yaw = trajectory.yaw_series().map_err(err)?;
    Ok((yaw.values().to_vec(), yaw.fps()))
}

#[pymodule]
fn navflow_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NavflowError", m.py().get_type::<NavflowError>())?;
    m.add_class::<CameraIntrinsics>()?;
    m.add_class::<Raster>()?;
    m.add_class::<TopologicalMap>()?;
    m.add_function(wrap_pyfunction!(estimate_motion, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_frame, m)?)?;
    m.add_function(wrap_pyfunction!(label_frames, m)?)?;
    m.add_function(wrap_pyfunction!(class_from_angle, m)?)?;
    m.add_function(wrap_pyfunction!(mirror_class, m)?)?;
    m.add_function(wrap_pyfunction!(class_weights, m)?)?;
    m.add_function(wrap_pyfunction!(rand_mask, m)?)?;
    m.add_function(wrap_pyfunction!(grad_mask, m)?)?;
    m.add_function(wrap_pyfunction!(curriculum_weights, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(scenario_yaw, m)?)?;
    Ok(())
}
