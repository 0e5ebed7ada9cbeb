//! Scoring of direction predictions and key-moment slicing.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::heading::{DirectionClass, DirectionLabelSeries, CLASS_COUNT, SECTOR_DEG};
use crate::route_graph::SyntheticPath;

pub const DEFAULT_WINDOW_FRAMES: usize = 60;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("prediction has {pred} frames but ground truth has {gt}")]
    LengthMismatch { pred: usize, gt: usize },
    #[error("no frames to score")]
    EmptyInput,
    #[error("labels cover {labels} frames but the path has {path}")]
    MisalignedPath { labels: usize, path: u64 },
    #[error("invalid window [{start}, {end})")]
    InvalidWindow { start: usize, end: usize },
}

fn check(pred: &DirectionLabelSeries, gt: &DirectionLabelSeries) -> Result<(), MetricsError> {
    if pred.len() != gt.len() {
        return Err(MetricsError::LengthMismatch {
            pred: pred.len(),
            gt: gt.len(),
        });
    }
    Ok(())
}

fn check_nonempty(pred: &DirectionLabelSeries, gt: &DirectionLabelSeries) -> Result<(), MetricsError> {
    check(pred, gt)?;
    if gt.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    Ok(())
}

/// Fraction of frames where the predicted class equals the true class.
pub fn accuracy(pred: &DirectionLabelSeries, gt: &DirectionLabelSeries) -> Result<f64, MetricsError> {
    check_nonempty(pred, gt)?;
    let hits = pred
        .labels()
        .iter()
        .zip(gt.labels())
        .filter(|(p, g)| p == g)
        .count();
    Ok(hits as f64 / gt.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F1Score {
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    /// Set when precision and recall are both zero or undefined, for
    /// instance when neither series has a positive frame.
    pub degenerate: bool,
}

fn f1_from_counts(tp: usize, fp: usize, fn_: usize) -> F1Score {
    let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
    let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
    if precision + recall == 0.0 {
        return F1Score {
            f1: 0.0,
            precision,
            recall,
            degenerate: true,
        };
    }
    // Same value as 2PR / (P + R), with a single rounding.
    F1Score {
        f1: (2 * tp) as f64 / (2 * tp + fp + fn_) as f64,
        precision,
        recall,
        degenerate: false,
    }
}

/// Binary F1 where the positive class is any change of direction.
pub fn f1_direction_change(
    pred: &DirectionLabelSeries,
    gt: &DirectionLabelSeries,
) -> Result<F1Score, MetricsError> {
    check(pred, gt)?;
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (p, g) in pred.labels().iter().zip(gt.labels()) {
        match (!p.is_forward(), !g.is_forward()) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    Ok(f1_from_counts(tp, fp, fn_))
}

/// Unweighted mean of one-vs-rest F1 over the seven non-forward classes
/// that occur in either series. Zero with the degenerate flag if none occur.
pub fn f1_macro_turns(
    pred: &DirectionLabelSeries,
    gt: &DirectionLabelSeries,
) -> Result<F1Score, MetricsError> {
    let confusion = ConfusionMatrix::build(pred, gt)?;
    let mut scores = Vec::new();
    for k in 1..CLASS_COUNT {
        let tp = confusion.0[k][k];
        let fn_: usize = confusion.0[k].iter().sum::<usize>() - tp;
        let fp: usize = (0..CLASS_COUNT).map(|r| confusion.0[r][k]).sum::<usize>() - tp;
        if tp + fp + fn_ > 0 {
            scores.push(f1_from_counts(tp, fp, fn_));
        }
    }
    if scores.is_empty() {
        return Ok(f1_from_counts(0, 0, 0));
    }
    let n = scores.len() as f64;
    Ok(F1Score {
        f1: scores.iter().map(|s| s.f1).sum::<f64>() / n,
        precision: scores.iter().map(|s| s.precision).sum::<f64>() / n,
        recall: scores.iter().map(|s| s.recall).sum::<f64>() / n,
        degenerate: false,
    })
}

/// Circular distance in degrees between two bin centers.
pub fn class_distance_deg(a: DirectionClass, b: DirectionClass) -> f64 {
    let steps = (a.index() as i32 - b.index() as i32).unsigned_abs() as usize % CLASS_COUNT;
    steps.min(CLASS_COUNT - steps) as f64 * SECTOR_DEG
}

/// Mean circular distance between predicted and true bin centers.
pub fn angle_error(pred: &DirectionLabelSeries, gt: &DirectionLabelSeries) -> Result<f64, MetricsError> {
    check_nonempty(pred, gt)?;
    let total: f64 = pred
        .labels()
        .iter()
        .zip(gt.labels())
        .map(|(p, g)| class_distance_deg(*p, *g))
        .sum();
    Ok(total / gt.len() as f64)
}

/// Counts indexed `[ground truth][prediction]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix(pub [[usize; CLASS_COUNT]; CLASS_COUNT]);

impl ConfusionMatrix {
    pub fn build(pred: &DirectionLabelSeries, gt: &DirectionLabelSeries) -> Result<Self, MetricsError> {
        check(pred, gt)?;
        let mut m = [[0usize; CLASS_COUNT]; CLASS_COUNT];
        for (p, g) in pred.labels().iter().zip(gt.labels()) {
            m[g.index() as usize][p.index() as usize] += 1;
        }
        Ok(Self(m))
    }

    pub fn total(&self) -> usize {
        self.0.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..CLASS_COUNT).map(|k| self.0[k][k]).sum()
    }

    pub fn row_sums(&self) -> [usize; CLASS_COUNT] {
        self.0.map(|row| row.iter().sum())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub frames: usize,
    pub accuracy: f64,
    pub f1_binary: f64,
    pub f1_binary_degenerate: bool,
    pub f1_macro_turns: f64,
    pub mean_angle_error_deg: f64,
    pub per_class_confusion: ConfusionMatrix,
}

pub fn evaluate(pred: &DirectionLabelSeries, gt: &DirectionLabelSeries) -> Result<EvaluationReport, MetricsError> {
    let binary = f1_direction_change(pred, gt)?;
    Ok(EvaluationReport {
        frames: gt.len(),
        accuracy: accuracy(pred, gt)?,
        f1_binary: binary.f1,
        f1_binary_degenerate: binary.degenerate,
        f1_macro_turns: f1_macro_turns(pred, gt)?.f1,
        mean_angle_error_deg: angle_error(pred, gt)?,
        per_class_confusion: ConfusionMatrix::build(pred, gt)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KeyMomentKind {
    Intersection,
    TurnAround,
}

/// Half-open frame range `[frame_start, frame_end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KeyMomentWindow {
    pub frame_start: usize,
    pub frame_end: usize,
    pub kind: KeyMomentKind,
}

impl KeyMomentWindow {
    pub fn new(frame_start: usize, frame_end: usize, kind: KeyMomentKind) -> Result<Self, MetricsError> {
        if frame_start >= frame_end {
            return Err(MetricsError::InvalidWindow {
                start: frame_start,
                end: frame_end,
            });
        }
        Ok(Self {
            frame_start,
            frame_end,
            kind,
        })
    }

    pub fn len(&self) -> usize {
        self.frame_end - self.frame_start
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Frame at which the footage of a triplet passes its through-node: the
/// middle of the segment, rounded up.
pub fn crossing_frame(segment_start: usize, segment_len: usize) -> usize {
    segment_start + segment_len.div_ceil(2)
}

/// Windows for key-moment evaluation.
///
/// `labels` are ground-truth labels over the concatenated footage of `path`.
/// Each interior triplet yields an intersection window covering the
/// `window_frames` frames before its crossing frame, cut at the start of the
/// triplet's own segment. Each run of backward-sector labels yields one
/// turn-around window.
pub fn slice_key_moments(
    labels: &DirectionLabelSeries,
    path: &SyntheticPath,
    window_frames: usize,
) -> Result<Vec<KeyMomentWindow>, MetricsError> {
    let total = path.frame_count();
    if labels.len() as u64 != total {
        return Err(MetricsError::MisalignedPath {
            labels: labels.len(),
            path: total,
        });
    }
    let mut windows = Vec::new();
    let mut offset = 0usize;
    for t in &path.triplets {
        let len = t.segment.frame_count() as usize;
        if t.key.is_interior() && window_frames > 0 {
            let cross = crossing_frame(offset, len);
            let start = cross.saturating_sub(window_frames).max(offset);
            if start < cross {
                windows.push(KeyMomentWindow::new(start, cross, KeyMomentKind::Intersection)?);
            }
        }
        offset += len;
    }
    for run in labels.runs_where(DirectionClass::is_backward) {
        windows.push(KeyMomentWindow::new(run.start, run.end, KeyMomentKind::TurnAround)?);
    }
    Ok(windows)
}

/// How frames inside windows are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowScoring {
    /// Every frame in every window counts once.
    #[default]
    PerFrame,
    /// Each window contributes its majority prediction against its majority
    /// ground truth. Ties go to the lower class index.
    MajorityVote,
}

fn majority(labels: &[DirectionClass]) -> DirectionClass {
    let mut counts = [0usize; CLASS_COUNT];
    for l in labels {
        counts[l.index() as usize] += 1;
    }
    let best = (0..CLASS_COUNT)
        .max_by(|a, b| counts[*a].cmp(&counts[*b]).then(b.cmp(a)))
        .unwrap_or(0);
    DirectionClass::new(best as u8).expect("index below class count")
}

/// Pairs of (prediction, ground truth) restricted to the windows.
pub fn restrict_to_windows(
    pred: &DirectionLabelSeries,
    gt: &DirectionLabelSeries,
    windows: &[KeyMomentWindow],
    scoring: WindowScoring,
) -> Result<(DirectionLabelSeries, DirectionLabelSeries), MetricsError> {
    check(pred, gt)?;
    let mut p_out = Vec::new();
    let mut g_out = Vec::new();
    for w in windows {
        if w.frame_end > gt.len() {
            return Err(MetricsError::InvalidWindow {
                start: w.frame_start,
                end: w.frame_end,
            });
        }
        let p = &pred.labels()[w.frame_start..w.frame_end];
        let g = &gt.labels()[w.frame_start..w.frame_end];
        match scoring {
            WindowScoring::PerFrame => {
                p_out.extend_from_slice(p);
                g_out.extend_from_slice(g);
            }
            WindowScoring::MajorityVote => {
                p_out.push(majority(p));
                g_out.push(majority(g));
            }
        }
    }
    Ok((DirectionLabelSeries::new(p_out), DirectionLabelSeries::new(g_out)))
}

/// Accuracy restricted to windows of one kind.
pub fn key_moment_accuracy(
    pred: &DirectionLabelSeries,
    gt: &DirectionLabelSeries,
    windows: &[KeyMomentWindow],
    kind: KeyMomentKind,
    scoring: WindowScoring,
) -> Result<f64, MetricsError> {
    let selected: Vec<_> = windows.iter().copied().filter(|w| w.kind == kind).collect();
    let (p, g) = restrict_to_windows(pred, gt, &selected, scoring)?;
    accuracy(&p, &g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::route_graph::{
        NodeId, Port, Route, SegmentRef, TripletAnnotation, TripletKey,
    };

    fn series(indices: &[u8]) -> DirectionLabelSeries {
        DirectionLabelSeries::from_indices(indices).unwrap()
    }

    fn repeat(parts: &[(u8, usize)]) -> DirectionLabelSeries {
        let v: Vec<u8> = parts
            .iter()
            .flat_map(|(c, n)| std::iter::repeat_n(*c, *n))
            .collect();
        series(&v)
    }

    #[test]
    fn accuracy_examples() {
        let gt = repeat(&[(0, 80), (2, 20)]);
        assert_eq!(accuracy(&gt, &gt).unwrap(), 1.0);
        assert_eq!(accuracy(&repeat(&[(0, 100)]), &gt).unwrap(), 0.8);
        let comp = repeat(&[(1, 80), (3, 20)]);
        assert_eq!(accuracy(&comp, &gt).unwrap(), 0.0);
        assert_eq!(
            accuracy(&series(&[]), &series(&[])),
            Err(MetricsError::EmptyInput)
        );
        assert_eq!(
            accuracy(&series(&[0]), &series(&[0, 1])),
            Err(MetricsError::LengthMismatch { pred: 1, gt: 2 })
        );
    }

    #[test]
    fn f1_examples() {
        let gt = repeat(&[(0, 80), (2, 20)]);
        assert_eq!(f1_direction_change(&gt, &gt).unwrap().f1, 1.0);
        let pred = repeat(&[(0, 80), (2, 10), (0, 10)]);
        let s = f1_direction_change(&pred, &gt).unwrap();
        assert_eq!(s.precision, 1.0);
        assert_eq!(s.recall, 0.5);
        assert!((s.f1 - 2.0 / 3.0).abs() < 1e-15);
        let fwd = repeat(&[(0, 10)]);
        let s = f1_direction_change(&fwd, &fwd).unwrap();
        assert_eq!(s.f1, 0.0);
        assert!(s.degenerate);
    }

    #[test]
    fn angle_examples() {
        let a = repeat(&[(3, 5)]);
        assert_eq!(angle_error(&a, &a).unwrap(), 0.0);
        assert_eq!(angle_error(&repeat(&[(0, 7)]), &repeat(&[(4, 7)])).unwrap(), 180.0);
        assert_eq!(angle_error(&series(&[7]), &series(&[1])).unwrap(), 90.0);
    }

    #[test]
    fn macro_f1_averages_present_classes() {
        let gt = series(&[2, 2, 6, 6, 0]);
        let pred = series(&[2, 2, 6, 0, 0]);
        let s = f1_macro_turns(&pred, &gt).unwrap();
        // class 2: f1 1; class 6: p 1, r 0.5, f1 2/3
        assert!((s.f1 - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-15);
        assert!(f1_macro_turns(&series(&[0]), &series(&[0])).unwrap().degenerate);
    }

    #[test]
    fn confusion_invariants() {
        let gt = series(&[0, 1, 2, 2, 7]);
        let pred = series(&[0, 2, 2, 3, 7]);
        let c = ConfusionMatrix::build(&pred, &gt).unwrap();
        assert_eq!(c.total(), 5);
        assert_eq!(c.trace(), 3);
        assert_eq!(c.row_sums(), [1, 1, 2, 0, 0, 0, 0, 1]);
        let r = evaluate(&pred, &gt).unwrap();
        assert_eq!(r.accuracy, c.trace() as f64 / c.total() as f64);
    }

    fn seg(len: u64) -> SegmentRef {
        SegmentRef::new("v", 0, len).unwrap()
    }

    fn path(parts: &[(Port, &str, Port, u64)]) -> SyntheticPath {
        SyntheticPath {
            start_node: NodeId::from("s"),
            goal_node: NodeId::from("g"),
            route: Route {
                nodes: vec![],
                edges: vec![],
                total_weight: 0,
            },
            triplets: parts
                .iter()
                .map(|(i, n, o, len)| {
                    TripletAnnotation::new(TripletKey::new(i.clone(), *n, o.clone()), seg(*len))
                })
                .collect(),
        }
    }

    fn e(id: &str) -> Port {
        Port::Edge(id.into())
    }

    #[test]
    fn intersection_windows() {
        let p = path(&[
            (Port::Terminal, "s", e("a"), 50),
            (e("a"), "x", e("b"), 200),
            (e("b"), "y", e("c"), 200),
            (e("c"), "z", e("d"), 40),
            (e("d"), "g", Port::Terminal, 50),
        ]);
        let labels = repeat(&[(0, 540)]);
        let w = slice_key_moments(&labels, &p, 60).unwrap();
        assert_eq!(w.len(), 3);
        assert_eq!((w[0].frame_start, w[0].frame_end), (90, 150));
        assert_eq!((w[1].frame_start, w[1].frame_end), (290, 350));
        // short segment: cut at its start
        assert_eq!((w[2].frame_start, w[2].frame_end), (450, 470));
        assert!(w.iter().all(|w| w.kind == KeyMomentKind::Intersection));
    }

    #[test]
    fn turn_around_window_spans_run() {
        let p = path(&[(Port::Terminal, "s", e("a"), 30)]);
        let labels = repeat(&[(0, 10), (3, 5), (4, 5), (0, 10)]);
        let w = slice_key_moments(&labels, &p, 60).unwrap();
        assert_eq!(
            w,
            vec![KeyMomentWindow::new(10, 20, KeyMomentKind::TurnAround).unwrap()]
        );
        assert!(matches!(
            slice_key_moments(&repeat(&[(0, 29)]), &p, 60),
            Err(MetricsError::MisalignedPath { .. })
        ));
    }

    #[test]
    fn majority_vote_scoring() {
        let gt = repeat(&[(2, 10)]);
        let pred = repeat(&[(2, 6), (0, 4)]);
        let w = [KeyMomentWindow::new(0, 10, KeyMomentKind::Intersection).unwrap()];
        let per_frame =
            key_moment_accuracy(&pred, &gt, &w, KeyMomentKind::Intersection, WindowScoring::PerFrame)
                .unwrap();
        let vote =
            key_moment_accuracy(&pred, &gt, &w, KeyMomentKind::Intersection, WindowScoring::MajorityVote)
                .unwrap();
        assert_eq!(per_frame, 0.6);
        assert_eq!(vote, 1.0);
    }
}
