use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use navflow::dataset_io::{
    read_document, write_document, write_raster, LabelDocument, MaskPlanDocument, PathDocument,
    Provenance, YawDocument,
};
use navflow::raster::{Raster, RasterKind};
use tempfile::TempDir;

fn navflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_navflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = navflow(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn error_record(out: &Output) -> serde_json::Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().next().expect("an error line");
    serde_json::from_str(line).unwrap_or_else(|e| panic!("{line:?} is not JSON: {e}"))
}

fn mall_map() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/synthetic_mall.map")
}

/// The five-turn episode, rendered once per test binary.
fn episode() -> &'static Path {
    static DIR: OnceLock<TempDir> = OnceLock::new();
    DIR.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let ep = dir.path().join("ep");
        ok(&["simulate", "--scenario", "five-turns", "--out", s(&ep)]);
        dir
    })
    .path()
}

fn report(path: &Path) -> toml::Table {
    toml::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn report_f64(t: &toml::Table, key: &str) -> f64 {
    t["report"][key].as_float().unwrap()
}

#[test]
fn five_turn_pipeline_matches_ground_truth() {
    let root = episode();
    let ep = root.join("ep");
    let work = tempfile::tempdir().unwrap();
    let yaw = work.path().join("yaw.toml");
    let pred = work.path().join("pred.toml");
    let rep = work.path().join("report.toml");
    ok(&[
        "estimate",
        "--flow", s(&ep.join("flow")),
        "--depth", s(&ep.join("depth")),
        "--intrinsics", s(&ep.join("intrinsics.toml")),
        "--seed", "3",
        "--out", s(&yaw),
    ]);
    ok(&["label", "--yaw", s(&yaw), "--out", s(&pred)]);
    ok(&["evaluate", "--pred", s(&pred), "--gt", s(&ep.join("gt_labels.toml")), "--out", s(&rep)]);

    let r = report(&rep);
    let acc = report_f64(&r, "accuracy");
    assert!(acc >= 0.95, "end-to-end accuracy {acc}");

    // Estimated yaw tracks the trajectory's own yaw.
    let est: YawDocument = read_document(&yaw).unwrap();
    let gt: YawDocument = read_document(&ep.join("gt_yaw.toml")).unwrap();
    assert_eq!(est.yaw.len(), gt.yaw.len());
    assert_eq!(est.rms_residual.len(), est.yaw.len());
    let worst = est.yaw.iter().zip(&gt.yaw).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(worst < 2e-3, "worst per-frame yaw error {worst}");

    let p = &est.provenance;
    assert_eq!((p.tool.as_str(), p.seed), ("navflow", 3));
    for key in ["intrinsics", "flow", "depth"] {
        assert_eq!(p.inputs[key].len(), 64, "{key} digest");
    }
}

#[test]
fn manifest_and_directories_agree() {
    let ep = episode().join("ep");
    let work = tempfile::tempdir().unwrap();
    let a = work.path().join("a.toml");
    let b = work.path().join("b.toml");
    ok(&["estimate", "--manifest", s(&ep.join("manifest.toml")), "--out", s(&a)]);
    ok(&[
        "estimate",
        "--flow", s(&ep.join("flow")),
        "--depth", s(&ep.join("depth")),
        "--intrinsics", s(&ep.join("intrinsics.toml")),
        "--out", s(&b),
    ]);
    let (a, b): (YawDocument, YawDocument) = (read_document(&a).unwrap(), read_document(&b).unwrap());
    assert_eq!(a.yaw, b.yaw);
    assert_eq!(a.rms_residual, b.rms_residual);
}

#[test]
fn missing_depth_file_is_named() {
    let ep = episode().join("ep");
    let work = tempfile::tempdir().unwrap();
    let (flow, depth) = (work.path().join("flow"), work.path().join("depth"));
    std::fs::create_dir_all(&flow).unwrap();
    std::fs::create_dir_all(&depth).unwrap();
    for i in 0..4 {
        let f = format!("flow_{i:05}.navr");
        std::fs::copy(ep.join("flow").join(&f), flow.join(&f)).unwrap();
        if i != 2 {
            let d = format!("depth_{i:05}.navr");
            std::fs::copy(ep.join("depth").join(&d), depth.join(&d)).unwrap();
        }
    }
    let out_file = work.path().join("yaw.toml");
    let out = navflow(&[
        "estimate",
        "--flow", s(&flow),
        "--depth", s(&depth),
        "--intrinsics", s(&ep.join("intrinsics.toml")),
        "--out", s(&out_file),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let rec = error_record(&out);
    assert_eq!(rec["error"], "io");
    assert!(rec["path"].as_str().unwrap().ends_with("depth_00002.navr"), "{rec}");
    assert!(!out_file.exists());
}

#[test]
fn corrupt_raster_is_an_io_error() {
    let ep = episode().join("ep");
    let work = tempfile::tempdir().unwrap();
    let (flow, depth) = (work.path().join("flow"), work.path().join("depth"));
    std::fs::create_dir_all(&flow).unwrap();
    std::fs::create_dir_all(&depth).unwrap();
    std::fs::copy(ep.join("flow/flow_00000.navr"), flow.join("flow_00000.navr")).unwrap();
    let mut bytes = std::fs::read(ep.join("depth/depth_00000.navr")).unwrap();
    bytes[40] ^= 0x10;
    std::fs::write(depth.join("depth_00000.navr"), bytes).unwrap();
    let out = navflow(&[
        "estimate",
        "--flow", s(&flow),
        "--depth", s(&depth),
        "--intrinsics", s(&ep.join("intrinsics.toml")),
        "--out", s(&work.path().join("yaw.toml")),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let rec = error_record(&out);
    assert!(rec["message"].as_str().unwrap().contains("checksum"), "{rec}");
    assert!(rec["path"].as_str().unwrap().ends_with("depth_00000.navr"));
}

fn digest_tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn reruns_are_byte_identical_and_inputs_untouched() {
    let work = tempfile::tempdir().unwrap();
    let (a, b) = (work.path().join("a"), work.path().join("b"));
    ok(&["simulate", "--scenario", "l-turn", "--seed", "9", "--out", s(&a)]);
    ok(&["simulate", "--scenario", "l-turn", "--seed", "9", "--out", s(&b)]);
    let tree_a = digest_tree(&a);
    assert_eq!(tree_a, digest_tree(&b));

    let manifest = a.join("manifest.toml");
    let mut outputs = Vec::new();
    for run in 0..2 {
        let yaw = work.path().join(format!("yaw{run}.toml"));
        let labels = work.path().join(format!("labels{run}.toml"));
        let masks = work.path().join(format!("masks{run}.toml"));
        let paths = work.path().join(format!("paths{run}.toml"));
        ok(&["estimate", "--manifest", s(&manifest), "--seed", "5", "--out", s(&yaw)]);
        ok(&["label", "--yaw", s(&yaw), "--seed", "5", "--out", s(&labels)]);
        ok(&[
            "mask", "--mode", "rand", "--width", "96", "--height", "96", "--frames", "4",
            "--seed", "5", "--out", s(&masks),
        ]);
        ok(&["genpaths", "--map", s(&mall_map()), "--count", "5", "--seed", "5", "--out", s(&paths)]);
        outputs.push(
            [yaw, labels, masks, paths]
                .iter()
                .map(|p| std::fs::read(p).unwrap())
                .collect::<Vec<_>>(),
        );
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(tree_a, digest_tree(&a), "inputs were modified");
}

#[test]
fn seeds_change_sampling() {
    let ep = episode().join("ep");
    let work = tempfile::tempdir().unwrap();
    let (a, b) = (work.path().join("a.toml"), work.path().join("b.toml"));
    let m = ep.join("manifest.toml");
    ok(&["estimate", "--manifest", s(&m), "--seed", "1", "--samples", "20", "--out", s(&a)]);
    ok(&["estimate", "--manifest", s(&m), "--seed", "2", "--samples", "20", "--out", s(&b)]);
    let (a, b): (YawDocument, YawDocument) = (read_document(&a).unwrap(), read_document(&b).unwrap());
    assert_ne!(a.rms_residual, b.rms_residual);
}

#[test]
fn genpaths_on_mall_fixture() {
    let work = tempfile::tempdir().unwrap();
    let out = work.path().join("paths.toml");
    ok(&["genpaths", "--map", s(&mall_map()), "--count", "25", "--seed", "11", "--out", s(&out)]);
    let doc: PathDocument = read_document(&out).unwrap();
    assert_eq!(doc.paths.len(), 25);
    assert_eq!(doc.map, "synthetic_mall.map");
    let (map, _) = navflow::dataset_io::load_map(&mall_map()).unwrap();
    for p in &doc.paths {
        p.check_chaining(&map).unwrap();
        let interior: Vec<_> = p.triplets.iter().filter(|t| t.key.is_interior()).map(|t| t.key.clone()).collect();
        assert_eq!(interior, p.route.interior_triplets());
    }
    assert!(doc.provenance.inputs.contains_key("map"));
}

#[test]
fn genpaths_with_gap_reports_route_error() {
    let work = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(mall_map()).unwrap();
    // Drop every annotation through I01.
    let pruned: String = text
        .lines()
        .filter(|l| !l.split_whitespace().nth(1).is_some_and(|n| n == "I01") || l.split_whitespace().count() < 6)
        .map(|l| format!("{l}\n"))
        .collect();
    let map = work.path().join("gappy.map");
    std::fs::write(&map, pruned).unwrap();
    let out = navflow(&["genpaths", "--map", s(&map), "--count", "200", "--out", s(&work.path().join("p.toml"))]);
    assert_eq!(out.status.code(), Some(6), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(error_record(&out)["error"], "route");
}

fn labels_file(dir: &Path, name: &str, labels: Vec<u8>) -> PathBuf {
    let path = dir.join(name);
    let doc = LabelDocument {
        fps: 30.0,
        labels,
        provenance: Provenance::new("test", 0),
    };
    write_document(&doc, &path).unwrap();
    path
}

#[test]
fn evaluate_identical_files() {
    let work = tempfile::tempdir().unwrap();
    let labels: Vec<u8> = (0..400).map(|i| [0, 0, 2, 6, 4, 1][i / 70]).collect();
    let a = labels_file(work.path(), "a.toml", labels.clone());
    let b = labels_file(work.path(), "b.toml", labels);
    let out = work.path().join("r.toml");
    ok(&["evaluate", "--pred", s(&a), "--gt", s(&b), "--out", s(&out)]);
    let r = report(&out);
    assert_eq!(report_f64(&r, "accuracy"), 1.0);
    assert_eq!(report_f64(&r, "mean_angle_error_deg"), 0.0);
    assert_eq!(report_f64(&r, "f1_binary"), 1.0);
}

#[test]
fn evaluate_key_moments_on_generated_path() {
    let work = tempfile::tempdir().unwrap();
    let paths = work.path().join("paths.toml");
    ok(&["genpaths", "--map", s(&mall_map()), "--count", "3", "--seed", "4", "--out", s(&paths)]);
    let doc: PathDocument = read_document(&paths).unwrap();
    let frames = doc.paths[1].frame_count() as usize;
    let gt = labels_file(work.path(), "gt.toml", vec![0; frames]);
    let mut noisy = vec![0u8; frames];
    noisy[0] = 2;
    let pred = labels_file(work.path(), "pred.toml", noisy);
    let out = work.path().join("r.toml");
    ok(&[
        "evaluate", "--pred", s(&pred), "--gt", s(&gt), "--paths", s(&paths), "--path-index", "1",
        "--majority", "--out", s(&out),
    ]);
    let r = report(&out);
    let km = r["key_moments"].as_table().unwrap();
    assert_eq!(km["path_index"].as_integer(), Some(1));
    assert_eq!(km["scoring"].as_str(), Some("majority-vote"));
    let interior = doc.paths[1].route.interior_triplets().len() as i64;
    assert_eq!(km["intersection_windows"].as_integer(), Some(interior));
    if interior > 0 {
        assert_eq!(km["intersection_accuracy"].as_float(), Some(1.0));
    }

    // Label count that does not match the path.
    let short = labels_file(work.path(), "short.toml", vec![0; frames - 1]);
    let out = navflow(&[
        "evaluate", "--pred", s(&short), "--gt", s(&short), "--paths", s(&paths), "--path-index", "1",
        "--out", s(&work.path().join("x.toml")),
    ]);
    assert_eq!(out.status.code(), Some(9));
    assert_eq!(error_record(&out)["error"], "metrics");
}

#[test]
fn evaluate_length_mismatch_is_metrics_error() {
    let work = tempfile::tempdir().unwrap();
    let a = labels_file(work.path(), "a.toml", vec![0; 10]);
    let b = labels_file(work.path(), "b.toml", vec![0; 11]);
    let out = navflow(&["evaluate", "--pred", s(&a), "--gt", s(&b), "--out", s(&work.path().join("r.toml"))]);
    assert_eq!(out.status.code(), Some(9));
}

#[test]
fn mask_modes() {
    let work = tempfile::tempdir().unwrap();
    let rand = work.path().join("rand.toml");
    ok(&[
        "mask", "--mode", "rand", "--width", "64", "--height", "48", "--frames", "3", "--count", "4",
        "--min-frac", "0.2", "--max-frac", "0.4", "--seed", "8", "--out", s(&rand),
    ]);
    let doc: MaskPlanDocument = read_document(&rand).unwrap();
    assert_eq!(doc.masks.len(), 3);
    assert!(doc.masks.iter().all(|m| m.plan.boxes.len() == 4));
    assert_ne!(doc.masks[0].plan, doc.masks[1].plan);

    // All attention in the left quarter pulls every anchor there.
    let (w, h) = (40u32, 20u32);
    let data = (0..w * h).map(|i| if i % w < w / 4 { 1.0 } else { 0.0 }).collect();
    let att = work.path().join("att.navr");
    write_raster(&Raster::from_vec(RasterKind::Depth, w, h, data).unwrap(), &att).unwrap();
    let grad = work.path().join("grad.toml");
    ok(&["mask", "--mode", "grad", "--attention", s(&att), "--count", "50", "--out", s(&grad)]);
    let doc: MaskPlanDocument = read_document(&grad).unwrap();
    assert!(doc.masks[0].plan.anchors.iter().all(|(x, _)| *x < w / 4));
    assert!(doc.provenance.inputs.contains_key("attention"));

    let dets = work.path().join("dets.toml");
    std::fs::write(
        &dets,
        "format = \"navflow-detections\"\nversion = 1\nwidth = 32\nheight = 32\n\n\
         [[frames]]\nframe = 0\nboxes = [{ x = -5, y = 2, width = 10, height = 10 }]\n\n\
         [[frames]]\nframe = 7\nboxes = [{ x = 30, y = 30, width = 8, height = 8 }, { x = 40, y = 0, width = 3, height = 3 }]\n",
    )
    .unwrap();
    let people = work.path().join("people.toml");
    ok(&["mask", "--mode", "people", "--detections", s(&dets), "--out", s(&people)]);
    let doc: MaskPlanDocument = read_document(&people).unwrap();
    assert_eq!(doc.masks.iter().map(|m| m.frame).collect::<Vec<_>>(), vec![0, 7]);
    assert_eq!(doc.masks[0].plan.boxes[0].x, 0);
    assert_eq!(doc.masks[0].plan.boxes[0].width, 5);
    assert_eq!(doc.masks[1].plan.boxes.len(), 1);
}

#[test]
fn mask_errors_use_mask_code() {
    let work = tempfile::tempdir().unwrap();
    let out = navflow(&[
        "mask", "--mode", "rand", "--width", "10", "--height", "10", "--min-frac", "0.5", "--max-frac",
        "0.2", "--out", s(&work.path().join("m.toml")),
    ]);
    assert_eq!(out.status.code(), Some(8));
    let att = work.path().join("zero.navr");
    write_raster(&Raster::filled(RasterKind::Depth, 4, 4, 0.0), &att).unwrap();
    let out = navflow(&["mask", "--mode", "grad", "--attention", s(&att), "--out", s(&work.path().join("m.toml"))]);
    assert_eq!(out.status.code(), Some(8));
}

#[test]
fn label_errors_use_label_code() {
    let work = tempfile::tempdir().unwrap();
    let yaw = work.path().join("yaw.toml");
    let doc = YawDocument {
        fps: 30.0,
        yaw: vec![0.01; 50],
        rms_residual: vec![],
        provenance: Provenance::new("test", 0),
    };
    write_document(&doc, &yaw).unwrap();
    let out = navflow(&["label", "--yaw", s(&yaw), "--window", "4", "--out", s(&work.path().join("l.toml"))]);
    assert_eq!(out.status.code(), Some(5));
    assert_eq!(error_record(&out)["error"], "label");

    let labels = work.path().join("l.toml");
    ok(&["label", "--yaw", s(&yaw), "--mode", "rate-threshold", "--lookahead", "30", "--out", s(&labels)]);
    let doc: LabelDocument = read_document(&labels).unwrap();
    // 0.3 rad over the lookahead is about 17°, inside the forward sector.
    assert!(doc.labels.iter().all(|&l| l == 0));
}

#[test]
fn usage_errors() {
    let work = tempfile::tempdir().unwrap();
    let out = navflow(&["estimate", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_record(&out)["error"], "usage");

    let cfg = work.path().join("run.toml");
    std::fs::write(&cfg, "[label]\nwindw = 5\n").unwrap();
    let yaw = work.path().join("yaw.toml");
    let out = navflow(&["label", "--config", s(&cfg), "--yaw", s(&yaw), "--out", s(&work.path().join("x.toml"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(error_record(&out)["message"].as_str().unwrap().contains("windw"));

    // Writing over an input is refused.
    let a = labels_file(work.path(), "a.toml", vec![0; 5]);
    let before = std::fs::read(&a).unwrap();
    let out = navflow(&["evaluate", "--pred", s(&a), "--gt", s(&a), "--out", s(&a)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(std::fs::read(&a).unwrap(), before);
}

#[test]
fn config_supplies_defaults_and_flags_win() {
    let work = tempfile::tempdir().unwrap();
    let cfg = work.path().join("run.toml");
    std::fs::write(&cfg, "seed = \"18446744073709551615\"\n[mask]\ncount = 2\nframes = 2\n").unwrap();
    let a = work.path().join("a.toml");
    ok(&["mask", "--config", s(&cfg), "--mode", "rand", "--width", "20", "--height", "20", "--out", s(&a)]);
    let doc: MaskPlanDocument = read_document(&a).unwrap();
    assert_eq!(doc.provenance.seed, u64::MAX);
    assert_eq!(doc.masks.len(), 2);
    assert!(doc.masks.iter().all(|m| m.plan.boxes.len() == 2));

    let b = work.path().join("b.toml");
    ok(&[
        "mask", "--config", s(&cfg), "--mode", "rand", "--width", "20", "--height", "20", "--count", "5",
        "--seed", "1", "--out", s(&b),
    ]);
    let doc: MaskPlanDocument = read_document(&b).unwrap();
    assert_eq!(doc.provenance.seed, 1);
    assert!(doc.masks.iter().all(|m| m.plan.boxes.len() == 5));
}

#[test]
fn help_lists_defaults() {
    let out = navflow(&["estimate", "--help"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for needle in ["--seed", "--config", "--out", "--samples", "default: 200", "rigid-body"] {
        assert!(text.contains(needle), "help lacks {needle}:\n{text}");
    }
}
