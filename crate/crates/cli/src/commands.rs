use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use navflow::camera_motion::{estimate_frame, extract_yaw, CameraIntrinsics, EstimationConfig, InteractionModel};
use navflow::dataset_io::{
    load_map, read_document, read_raster, save_scene, write_document, write_raster, DatasetManifest,
    Document, EpisodeEntry, FrameMask, LabelDocument, MaskPlanDocument, PathDocument, Provenance,
    YawDocument,
};
use navflow::heading::{label_frames, LabelConfig, LabelMode};
use navflow::mask_augment::{
    grad_mask, people_mask, rand_mask, AttentionMap, Detection, ImageSize, MaskError, SizeRange,
};
use navflow::nav_metrics::{
    evaluate as evaluate_labels, key_moment_accuracy, slice_key_moments, EvaluationReport,
    KeyMomentKind, WindowScoring,
};
use navflow::raster::RasterKind;
use navflow::route_graph::{generate_path, AnnotationSet};
use navflow::sim_world::{scenarios, EpisodeFrames};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::*;
use crate::error::{at, CliError};
use crate::{
    EstimateArgs, EvaluateArgs, GenpathsArgs, LabelArgs, LabelModeArg, MaskArgs, MaskMode, ModelArg,
    Scenario, SimulateArgs,
};

const TOOL: &str = "navflow";

fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| {
        CliError::Io(navflow::dataset_io::IoError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    })?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Digest of a list of files: each line is `name digest`, in list order.
fn sha256_files(files: &[PathBuf]) -> Result<String, CliError> {
    let mut h = Sha256::new();
    for f in files {
        let name = f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        h.update(format!("{name} {}\n", sha256_file(f)?).as_bytes());
    }
    Ok(hex::encode(h.finalize()))
}

fn provenance(seed: u64, inputs: Vec<(&str, String)>) -> Provenance {
    let mut p = Provenance::new(TOOL, seed);
    p.inputs = inputs.into_iter().map(|(k, v)| (k.to_owned(), v)).collect::<BTreeMap<_, _>>();
    p
}

/// Refuses to write over any input.
fn guard_output(out: &Path, inputs: &[&Path]) -> Result<(), CliError> {
    let Ok(out_abs) = out.canonicalize() else {
        return Ok(());
    };
    for input in inputs {
        if input.canonicalize().is_ok_and(|p| p == out_abs) {
            return Err(CliError::Usage(format!(
                "output {} would overwrite input {}",
                out.display(),
                input.display()
            )));
        }
    }
    Ok(())
}

fn write<T: Document>(doc: &T, out: &Path) -> Result<(), CliError> {
    Ok(write_document(doc, out)?)
}

fn read<T: Document>(path: &Path) -> Result<T, CliError> {
    Ok(read_document(path)?)
}

/// Sorted `.navr` files in `dir`.
fn list_rasters(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = std::fs::read_dir(dir).map_err(|e| {
        CliError::Io(navflow::dataset_io::IoError::Io {
            path: dir.to_path_buf(),
            message: e.to_string(),
        })
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "navr"))
        .collect();
    files.sort();
    Ok(files)
}

/// `flow_00012.navr` pairs with `depth_00012.navr`.
fn depth_partner(flow: &Path, depth_dir: &Path) -> PathBuf {
    let name = flow.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let suffix = name.strip_prefix("flow").unwrap_or(&name);
    depth_dir.join(format!("depth{suffix}"))
}

pub fn simulate(args: &SimulateArgs, config: &RunConfig, seed: u64) -> Result<(), CliError> {
    let scenario = args.scenario.or(config.simulate.scenario).unwrap_or(Scenario::FiveTurns);
    let trajectory = match scenario {
        Scenario::FiveTurns => scenarios::five_turns(),
        Scenario::LTurn => scenarios::l_turn(90, 60),
        Scenario::Straight => scenarios::straight(300),
    };
    let scene = scenarios::hall_for(&trajectory);
    let intrinsics = scenarios::default_intrinsics();
    let frames = EpisodeFrames::new(&scene, &trajectory, &intrinsics)?;
    let out = &args.common.out;

    let depth: Vec<String> = (0..frames.len()).map(|i| format!("depth/depth_{i:05}.navr")).collect();
    let flow: Vec<String> = (0..frames.len()).map(|i| format!("flow/flow_{i:05}.navr")).collect();
    let results: Vec<Result<(), CliError>> = (0..frames.len())
        .into_par_iter()
        .map(|i| {
            let pair = frames.render(i)?;
            write_raster(&pair.depth, &out.join(&depth[i]))?;
            write_raster(&pair.flow, &out.join(&flow[i]))?;
            Ok(())
        })
        .collect();
    results.into_iter().collect::<Result<(), _>>()?;

    let yaw = trajectory.yaw_series()?;
    let labels = label_frames(&yaw, &LabelConfig::default())?;
    let prov = || provenance(seed, vec![("scenario", format!("{scenario:?}"))]);
    save_scene(&scene, &out.join("scene.navscene"))?;
    write(&intrinsics, &out.join("intrinsics.toml"))?;
    write(
        &YawDocument {
            fps: yaw.fps(),
            yaw: yaw.values().to_vec(),
            rms_residual: vec![],
            provenance: prov(),
        },
        &out.join("gt_yaw.toml"),
    )?;
    write(
        &LabelDocument {
            fps: yaw.fps(),
            labels: labels.indices(),
            provenance: prov(),
        },
        &out.join("gt_labels.toml"),
    )?;
    let manifest = DatasetManifest {
        episodes: vec![EpisodeEntry {
            video_id: format!("{scenario:?}").to_lowercase(),
            fps: yaw.fps(),
            frame_count: frames.len(),
            intrinsics: Some("intrinsics.toml".into()),
            depth,
            flow,
            yaw: "gt_yaw.toml".into(),
            labels: Some("gt_labels.toml".into()),
            map: None,
        }],
        provenance: prov(),
    };
    write(&manifest, &out.join("manifest.toml"))
}

struct EstimateInputs {
    flows: Vec<PathBuf>,
    depths: Vec<PathBuf>,
    intrinsics: CameraIntrinsics,
    fps: f64,
    digests: Vec<(&'static str, String)>,
    paths: Vec<PathBuf>,
}

fn estimate_inputs(args: &EstimateArgs, config: &RunConfig) -> Result<EstimateInputs, CliError> {
    let fps_flag = args.fps.or(config.estimate.fps);
    if let Some(manifest_path) = &args.manifest {
        let manifest: DatasetManifest = read(manifest_path)?;
        let base = manifest_path.parent().unwrap_or(Path::new(""));
        let ep = match &args.episode {
            Some(id) => manifest.episodes.iter().find(|e| &e.video_id == id),
            None => manifest.episodes.first(),
        }
        .ok_or_else(|| CliError::Usage("manifest has no matching episode".into()))?;
        let intr_rel = ep.intrinsics.as_ref().ok_or_else(|| {
            CliError::Usage(format!("episode {:?} lists no intrinsics", ep.video_id))
        })?;
        let intr_path = base.join(intr_rel);
        let intrinsics: CameraIntrinsics = read(&intr_path)?;
        let flows: Vec<PathBuf> = ep.flow.iter().map(|p| base.join(p)).collect();
        let depths: Vec<PathBuf> = ep.depth.iter().map(|p| base.join(p)).collect();
        let digests = vec![
            ("manifest", sha256_file(manifest_path)?),
            ("intrinsics", sha256_file(&intr_path)?),
            ("flow", sha256_files(&flows)?),
            ("depth", sha256_files(&depths)?),
        ];
        let mut paths = vec![manifest_path.clone(), intr_path];
        paths.extend(flows.iter().chain(&depths).cloned());
        return Ok(EstimateInputs {
            flows,
            depths,
            intrinsics,
            fps: fps_flag.unwrap_or(ep.fps),
            digests,
            paths,
        });
    }
    let (Some(flow_dir), Some(depth_dir), Some(intr_path)) = (&args.flow, &args.depth, &args.intrinsics)
    else {
        return Err(CliError::Usage(
            "give either --manifest or all of --flow, --depth and --intrinsics".into(),
        ));
    };
    let intrinsics: CameraIntrinsics = read(intr_path)?;
    let flows = list_rasters(flow_dir)?;
    if flows.is_empty() {
        return Err(CliError::Usage(format!("no .navr files in {}", flow_dir.display())));
    }
    let depths: Vec<PathBuf> = flows.iter().map(|f| depth_partner(f, depth_dir)).collect();
    if let Some(missing) = depths.iter().find(|d| !d.is_file()) {
        return Err(CliError::Io(navflow::dataset_io::IoError::Io {
            path: missing.clone(),
            message: "depth raster missing for its flow raster".into(),
        }));
    }
    let digests = vec![
        ("intrinsics", sha256_file(intr_path)?),
        ("flow", sha256_files(&flows)?),
        ("depth", sha256_files(&depths)?),
    ];
    let mut paths = vec![intr_path.clone()];
    paths.extend(flows.iter().chain(&depths).cloned());
    Ok(EstimateInputs {
        flows,
        depths,
        intrinsics,
        fps: fps_flag.unwrap_or(DEFAULT_FPS),
        digests,
        paths,
    })
}

pub fn estimate(args: &EstimateArgs, config: &RunConfig, seed: u64) -> Result<(), CliError> {
    let model = match args.model {
        Some(ModelArg::RigidBody) => InteractionModel::RigidBody,
        Some(ModelArg::AsPrinted) => InteractionModel::AsPrinted,
        None => config.estimate.model.unwrap_or_default(),
    };
    let base = EstimationConfig {
        sample_count: args.samples.or(config.estimate.samples).unwrap_or(DEFAULT_SAMPLES),
        rng_seed: seed,
        residual_report: true,
        model,
    };
    base.validate()?;
    let inputs = estimate_inputs(args, config)?;
    let input_refs: Vec<&Path> = inputs.paths.iter().map(PathBuf::as_path).collect();
    guard_output(&args.common.out, &input_refs)?;

    let per_frame: Vec<Result<(f64, f64), CliError>> = (0..inputs.flows.len())
        .into_par_iter()
        .map(|i| {
            let flow = at(&inputs.flows[i], read_raster(&inputs.flows[i]))?;
            let depth = at(&inputs.depths[i], read_raster(&inputs.depths[i]))?;
            for (r, p, kind) in [(&flow, &inputs.flows[i], RasterKind::Flow), (&depth, &inputs.depths[i], RasterKind::Depth)] {
                if r.kind() != kind {
                    return Err(CliError::Io(navflow::dataset_io::IoError::Document {
                        path: p.clone(),
                        message: format!("expected a {kind:?} raster"),
                    }));
                }
            }
            let cfg = EstimationConfig {
                rng_seed: seed.wrapping_add(i as u64),
                ..base
            };
            let est = estimate_frame(&flow, &depth, &inputs.intrinsics, &cfg)?;
            Ok((extract_yaw(&est.motion), est.rms_residual))
        })
        .collect();
    let mut yaw = Vec::with_capacity(per_frame.len());
    let mut rms = Vec::with_capacity(per_frame.len());
    for r in per_frame {
        let (y, e) = r?;
        yaw.push(y);
        rms.push(e);
    }
    let doc = YawDocument {
        fps: inputs.fps,
        yaw,
        rms_residual: rms,
        provenance: provenance(seed, inputs.digests),
    };
    doc.series()?;
    write(&doc, &args.common.out)
}

pub fn label(args: &LabelArgs, config: &RunConfig, seed: u64) -> Result<(), CliError> {
    let mode = match args.mode {
        Some(LabelModeArg::HeadingLookahead) => LabelMode::HeadingLookahead,
        Some(LabelModeArg::RateThreshold) => LabelMode::RateThreshold,
        None => config.label.mode.unwrap_or_default(),
    };
    let cfg = LabelConfig {
        smoothing_window: args
            .window
            .or(config.label.window)
            .unwrap_or(LabelConfig::default().smoothing_window),
        lookahead_frames: args.lookahead.or(config.label.lookahead),
        mode,
    };
    cfg.validate()?;
    guard_output(&args.common.out, &[&args.yaw])?;
    let doc: YawDocument = read(&args.yaw)?;
    let series = at(&args.yaw, doc.series())?;
    let labels = label_frames(&series, &cfg)?;
    write(
        &LabelDocument {
            fps: series.fps(),
            labels: labels.indices(),
            provenance: provenance(seed, vec![("yaw", sha256_file(&args.yaw)?)]),
        },
        &args.common.out,
    )
}

pub fn genpaths(args: &GenpathsArgs, config: &RunConfig, seed: u64) -> Result<(), CliError> {
    let count = args.count.or(config.genpaths.count).unwrap_or(DEFAULT_PATH_COUNT);
    let with_reversals = args.with_reversals || config.genpaths.with_reversals.unwrap_or(false);
    guard_output(&args.common.out, &[&args.map])?;
    let (map, annotations) = load_map(&args.map)?;
    let mut set = AnnotationSet::new();
    for a in annotations {
        set.insert(a)?;
    }
    if with_reversals {
        set = set.with_reversals();
    }
    let paths = (0..count)
        .map(|i| generate_path(&map, &set, seed.wrapping_add(i as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    let map_name = args
        .map
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    write(
        &PathDocument {
            map: map_name,
            paths,
            provenance: provenance(seed, vec![("map", sha256_file(&args.map)?)]),
        },
        &args.common.out,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameDetections {
    pub frame: usize,
    #[serde(default)]
    pub boxes: Vec<Detection>,
}

/// Person detections per frame, as produced by an external detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionsDocument {
    pub width: u32,
    pub height: u32,
    pub frames: Vec<FrameDetections>,
}

impl Document for DetectionsDocument {
    const FORMAT: &'static str = "navflow-detections";
}

pub fn mask(args: &MaskArgs, config: &RunConfig, seed: u64) -> Result<(), CliError> {
    let range = SizeRange {
        min_frac: args.min_frac.or(config.mask.min_frac).unwrap_or(DEFAULT_MIN_FRAC),
        max_frac: args.max_frac.or(config.mask.max_frac).unwrap_or(DEFAULT_MAX_FRAC),
    };
    range.validate()?;
    let count = args.count.or(config.mask.count).unwrap_or(DEFAULT_MASK_COUNT);
    let frames = args.frames.or(config.mask.frames);
    let frame_seed = |f: usize| seed.wrapping_add(f as u64);
    let flag_size = match (args.width, args.height) {
        (Some(w), Some(h)) => Some(ImageSize::new(w, h)),
        (None, None) => None,
        _ => return Err(CliError::Usage("--width and --height go together".into())),
    };
    let need_size = || flag_size.ok_or_else(|| CliError::Usage("--width and --height are required".into()));

    let (masks, inputs) = match args.mode {
        MaskMode::Rand => {
            let image = need_size()?;
            let masks = (0..frames.unwrap_or(DEFAULT_MASK_FRAMES))
                .map(|f| Ok(FrameMask { frame: f, plan: rand_mask(image, count, range, frame_seed(f))? }))
                .collect::<Result<Vec<_>, MaskError>>()?;
            (masks, vec![])
        }
        MaskMode::Grad => {
            let path = args
                .attention
                .as_ref()
                .ok_or_else(|| CliError::Usage("grad mode needs --attention".into()))?;
            guard_output(&args.common.out, &[path])?;
            let raster = at(path, read_raster(path))?;
            if raster.kind() != RasterKind::Depth {
                return Err(CliError::Usage("attention raster must have one channel".into()));
            }
            let image = ImageSize::new(raster.width(), raster.height());
            if flag_size.is_some_and(|s| s != image) {
                return Err(CliError::Usage("--width/--height disagree with the attention raster".into()));
            }
            let grid = raster.data().iter().map(|v| *v as f64).collect();
            let att = AttentionMap::new(image, grid)?;
            let masks = (0..frames.unwrap_or(DEFAULT_MASK_FRAMES))
                .map(|f| Ok(FrameMask { frame: f, plan: grad_mask(&att, count, range, frame_seed(f))? }))
                .collect::<Result<Vec<_>, MaskError>>()?;
            (masks, vec![("attention", sha256_file(path)?)])
        }
        MaskMode::People => {
            let path = args
                .detections
                .as_ref()
                .ok_or_else(|| CliError::Usage("people mode needs --detections".into()))?;
            guard_output(&args.common.out, &[path])?;
            let doc: DetectionsDocument = read(path)?;
            let image = flag_size.unwrap_or(ImageSize::new(doc.width, doc.height));
            let masks = doc
                .frames
                .iter()
                .filter(|fd| frames.is_none_or(|n| fd.frame < n))
                .map(|fd| FrameMask {
                    frame: fd.frame,
                    plan: people_mask(&fd.boxes, image, frame_seed(fd.frame)),
                })
                .collect();
            (masks, vec![("detections", sha256_file(path)?)])
        }
    };
    write(
        &MaskPlanDocument {
            masks,
            provenance: provenance(seed, inputs),
        },
        &args.common.out,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyMomentSummary {
    pub path_index: usize,
    pub window_frames: usize,
    pub scoring: WindowScoring,
    pub intersection_windows: usize,
    pub turn_around_windows: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intersection_accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub turn_around_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationDocument {
    pub report: EvaluationReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key_moments: Option<KeyMomentSummary>,
    pub provenance: Provenance,
}

impl Document for EvaluationDocument {
    const FORMAT: &'static str = "navflow-report";
}

pub fn evaluate(args: &EvaluateArgs, config: &RunConfig, seed: u64) -> Result<(), CliError> {
    let window = args.window.or(config.evaluate.window).unwrap_or(DEFAULT_EVAL_WINDOW);
    if window == 0 {
        return Err(CliError::Usage("--window must be positive".into()));
    }
    let scoring = if args.majority {
        WindowScoring::MajorityVote
    } else {
        config.evaluate.scoring.unwrap_or_default()
    };
    let mut inputs: Vec<&Path> = vec![&args.pred, &args.gt];
    if let Some(p) = &args.paths {
        inputs.push(p);
    }
    guard_output(&args.common.out, &inputs)?;

    let pred_doc: LabelDocument = read(&args.pred)?;
    let gt_doc: LabelDocument = read(&args.gt)?;
    let pred = at(&args.pred, pred_doc.series())?;
    let gt = at(&args.gt, gt_doc.series())?;
    let report = evaluate_labels(&pred, &gt)?;
    let mut digests = vec![("pred", sha256_file(&args.pred)?), ("gt", sha256_file(&args.gt)?)];

    let key_moments = match &args.paths {
        None => None,
        Some(paths_file) => {
            let doc: PathDocument = read(paths_file)?;
            digests.push(("paths", sha256_file(paths_file)?));
            let path = doc.paths.get(args.path_index).ok_or_else(|| {
                CliError::Usage(format!(
                    "path index {} out of range; the document has {}",
                    args.path_index,
                    doc.paths.len()
                ))
            })?;
            let windows = slice_key_moments(&gt, path, window)?;
            let of_kind = |kind| windows.iter().filter(|w| w.kind == kind).count();
            let score = |kind| -> Result<Option<f64>, CliError> {
                if of_kind(kind) == 0 {
                    return Ok(None);
                }
                Ok(Some(key_moment_accuracy(&pred, &gt, &windows, kind, scoring)?))
            };
            Some(KeyMomentSummary {
                path_index: args.path_index,
                window_frames: window,
                scoring,
                intersection_windows: of_kind(KeyMomentKind::Intersection),
                turn_around_windows: of_kind(KeyMomentKind::TurnAround),
                intersection_accuracy: score(KeyMomentKind::Intersection)?,
                turn_around_accuracy: score(KeyMomentKind::TurnAround)?,
            })
        }
    };
    write(
        &EvaluationDocument {
            report,
            key_moments,
            provenance: provenance(seed, digests),
        },
        &args.common.out,
    )
}
