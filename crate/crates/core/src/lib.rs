//! Data production and evaluation machinery for vision-only indoor
//! navigation.
//!
//! * [`camera_motion`] recovers camera yaw from optical flow and depth.
//! * [`heading`] turns yaw rates into eight-way direction labels.
//! * [`route_graph`] synthesizes navigation paths from annotated footage.
//! * [`sim_world`] renders exact depth and flow for known trajectories.
//! * [`mask_augment`] produces masking boxes and curriculum weights.
//! * [`nav_metrics`] scores direction predictions.
//! * [`dataset_io`] reads and writes every on-disk format.

pub mod camera_motion;
pub mod dataset_io;
pub mod heading;
pub mod mask_augment;
pub mod nav_metrics;
pub mod raster;
pub mod route_graph;
mod seed_text;
pub mod sim_world;

pub use camera_motion::{
    estimate_motion, extract_yaw, interaction_rows, project_flow, sample_pixels, CameraIntrinsics,
    EstimationConfig, ImagePoint, InteractionModel, MotionEstimate, MotionError, MotionVector,
    PixelSample,
};
pub use heading::{
    class_weights, integrate_heading, label_frames, reverse_series, smooth, DirectionClass,
    DirectionLabelSeries, LabelConfig, LabelError, LabelMode, YawSeries,
};
pub use raster::{Raster, RasterKind};
pub use route_graph::{
    generate_path, reverse_segment, shortest_path, validate_coverage, AnnotationSet, EdgeId,
    NodeId, Port, Route, RouteError, SegmentRef, SyntheticPath, TopologicalMap, TripletAnnotation,
    TripletKey,
};
pub use dataset_io::{encode_target, load_map, read_raster, write_raster, IoError};
pub use mask_augment::{
    curriculum_weights, grad_mask, people_mask, rand_mask, AttentionMap, MaskBox, MaskError,
    MaskPlan,
};
pub use nav_metrics::{
    accuracy, angle_error, evaluate, f1_direction_change, slice_key_moments, EvaluationReport,
    KeyMomentWindow, MetricsError,
};
pub use sim_world::{
    instantaneous_flow, render_depth, reprojection_flow, synthesize_episode, CameraPose,
    ScenePlan, SimError, Trajectory,
};
