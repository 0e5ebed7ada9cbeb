//! From yaw rates to discrete walking-direction labels.
//!
//! Directions are eight 45° sectors around the compass, indexed
//! counter-clockwise from "forward": class 2 is a left turn, class 6 a right
//! turn, and classes 3, 4 and 5 make up the backward sector.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const CLASS_COUNT: usize = 8;
pub const SECTOR_DEG: f64 = 45.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabelError {
    #[error("series is empty")]
    EmptySeries,
    #[error("smoothing window must be odd and positive, got {0}")]
    InvalidWindow(usize),
    #[error("lookahead must be at least one frame")]
    InvalidLookahead,
    #[error("fps must be positive and finite, got {0}")]
    InvalidFps(f64),
    #[error("non-finite yaw value at frame {0}")]
    NonFinite(usize),
    #[error("direction class must be in 0..8, got {0}")]
    InvalidClass(u8),
}

/// Per-frame yaw rate in radians per frame, one value per frame transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YawSeries {
    values: Vec<f64>,
    fps: f64,
}

impl YawSeries {
    pub fn new(values: Vec<f64>, fps: f64) -> Result<Self, LabelError> {
        if !(fps > 0.0 && fps.is_finite()) {
            return Err(LabelError::InvalidFps(fps));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(LabelError::NonFinite(i));
        }
        Ok(Self { values, fps })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * factor).collect(),
            fps: self.fps,
        }
    }

    fn with_values(&self, values: Vec<f64>) -> Self {
        Self {
            values,
            fps: self.fps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct DirectionClass(u8);

impl DirectionClass {
    pub const FORWARD: DirectionClass = DirectionClass(0);
    pub const LEFT: DirectionClass = DirectionClass(2);
    pub const BACKWARD: DirectionClass = DirectionClass(4);
    pub const RIGHT: DirectionClass = DirectionClass(6);

    pub fn new(index: u8) -> Result<Self, LabelError> {
        if (index as usize) < CLASS_COUNT {
            Ok(Self(index))
        } else {
            Err(LabelError::InvalidClass(index))
        }
    }

    pub fn all() -> impl Iterator<Item = DirectionClass> {
        (0..CLASS_COUNT as u8).map(DirectionClass)
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn center_deg(self) -> f64 {
        self.0 as f64 * SECTOR_DEG
    }

    /// Class whose sector contains `angle_deg` (counter-clockwise positive).
    /// A boundary angle belongs to the sector on its counter-clockwise side.
    pub fn from_angle_deg(angle_deg: f64) -> Self {
        let a = angle_deg.rem_euclid(360.0);
        let k = ((a + SECTOR_DEG / 2.0) / SECTOR_DEG).floor() as usize % CLASS_COUNT;
        Self(k as u8)
    }

    pub fn is_forward(self) -> bool {
        self.0 == 0
    }

    pub fn is_backward(self) -> bool {
        (3..=5).contains(&self.0)
    }

    pub fn is_left(self) -> bool {
        (1..=3).contains(&self.0)
    }

    pub fn is_right(self) -> bool {
        (5..=7).contains(&self.0)
    }

    /// Left/right reflection: class k becomes class (8 - k) mod 8.
    pub fn mirror(self) -> Self {
        Self(((CLASS_COUNT as u8) - self.0) % CLASS_COUNT as u8)
    }
}

impl TryFrom<u8> for DirectionClass {
    type Error = LabelError;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<DirectionClass> for u8 {
    fn from(c: DirectionClass) -> u8 {
        c.0
    }
}

/// Wraps an angle in degrees into (-180, 180].
pub fn wrap_deg(angle: f64) -> f64 {
    let a = (angle + 180.0).rem_euclid(360.0) - 180.0;
    if a == -180.0 {
        180.0
    } else {
        a
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DirectionLabelSeries {
    labels: Vec<DirectionClass>,
}

impl DirectionLabelSeries {
    pub fn new(labels: Vec<DirectionClass>) -> Self {
        Self { labels }
    }

    pub fn from_indices(indices: &[u8]) -> Result<Self, LabelError> {
        indices
            .iter()
            .map(|&i| DirectionClass::new(i))
            .collect::<Result<Vec<_>, _>>()
            .map(Self::new)
    }

    pub fn labels(&self) -> &[DirectionClass] {
        &self.labels
    }

    pub fn indices(&self) -> Vec<u8> {
        self.labels.iter().map(|c| c.index()).collect()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Maximal runs of frames satisfying `pred`, as half-open ranges.
    pub fn runs_where(&self, pred: impl Fn(DirectionClass) -> bool) -> Vec<std::ops::Range<usize>> {
        let mut runs = Vec::new();
        let mut start = None;
        for (i, &c) in self.labels.iter().enumerate() {
            match (pred(c), start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    runs.push(s..i);
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            runs.push(s..self.labels.len());
        }
        runs
    }

    pub fn non_forward_runs(&self) -> Vec<std::ops::Range<usize>> {
        self.runs_where(|c| !c.is_forward())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelMode {
    /// Heading change accumulated over the lookahead horizon.
    #[default]
    HeadingLookahead,
    /// Smoothed per-frame rate extrapolated over the lookahead horizon.
    RateThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabelConfig {
    pub smoothing_window: usize,
    /// `None` means two seconds of frames at the series' fps.
    pub lookahead_frames: Option<usize>,
    pub mode: LabelMode,
}

impl Default for LabelConfig {
    fn default() -> Self {
        Self {
            smoothing_window: 15,
            lookahead_frames: None,
            mode: LabelMode::HeadingLookahead,
        }
    }
}

impl LabelConfig {
    pub fn lookahead_for(&self, fps: f64) -> usize {
        self.lookahead_frames
            .unwrap_or_else(|| (2.0 * fps).round().max(1.0) as usize)
    }

    pub fn validate(&self) -> Result<(), LabelError> {
        if self.smoothing_window == 0 || self.smoothing_window % 2 == 0 {
            return Err(LabelError::InvalidWindow(self.smoothing_window));
        }
        if self.lookahead_frames == Some(0) {
            return Err(LabelError::InvalidLookahead);
        }
        Ok(())
    }
}

/// Centered moving average. Near the ends the window shrinks symmetrically
/// to the frames available on both sides.
pub fn smooth(series: &YawSeries, window: usize) -> Result<YawSeries, LabelError> {
    if series.is_empty() {
        return Err(LabelError::EmptySeries);
    }
    if window == 0 || window % 2 == 0 {
        return Err(LabelError::InvalidWindow(window));
    }
    let v = series.values();
    let n = v.len();
    let half = window / 2;
    let out = (0..n)
        .map(|t| {
            let r = half.min(t).min(n - 1 - t);
            let slice = &v[t - r..=t + r];
            slice.iter().sum::<f64>() / slice.len() as f64
        })
        .collect();
    Ok(series.with_values(out))
}

/// Running sum of the yaw rates; not wrapped.
pub fn integrate_heading(series: &YawSeries) -> Result<Vec<f64>, LabelError> {
    if series.is_empty() {
        return Err(LabelError::EmptySeries);
    }
    Ok(series
        .values()
        .iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect())
}

pub fn label_frames(
    series: &YawSeries,
    config: &LabelConfig,
) -> Result<DirectionLabelSeries, LabelError> {
    config.validate()?;
    let smoothed = smooth(series, config.smoothing_window)?;
    let lookahead = config.lookahead_for(series.fps());
    let labels = match config.mode {
        LabelMode::HeadingLookahead => {
            let heading = integrate_heading(&smoothed)?;
            let last = heading.len() - 1;
            (0..heading.len())
                .map(|t| {
                    let delta = heading[(t + lookahead).min(last)] - heading[t];
                    DirectionClass::from_angle_deg(wrap_deg(delta.to_degrees()))
                })
                .collect()
        }
        LabelMode::RateThreshold => smoothed
            .values()
            .iter()
            .map(|rate| {
                let delta = rate * lookahead as f64;
                DirectionClass::from_angle_deg(wrap_deg(delta.to_degrees()))
            })
            .collect(),
    };
    Ok(DirectionLabelSeries::new(labels))
}

/// Per-frame sampling weights proportional to inverse class frequency:
/// `total / (8 · count(class))`. Every present class gets the same total
/// mass.
pub fn class_weights(labels: &DirectionLabelSeries) -> Result<Vec<f64>, LabelError> {
    if labels.is_empty() {
        return Err(LabelError::EmptySeries);
    }
    let mut counts = [0usize; CLASS_COUNT];
    for c in labels.labels() {
        counts[c.index() as usize] += 1;
    }
    let total = labels.len() as f64;
    Ok(labels
        .labels()
        .iter()
        .map(|c| total / (CLASS_COUNT as f64 * counts[c.index() as usize] as f64))
        .collect())
}

/// Yaw series of the same footage played backwards: time reversed, rotation
/// sign flipped.
pub fn reverse_series(series: &YawSeries) -> YawSeries {
    series.with_values(series.values().iter().rev().map(|v| -v).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(values: Vec<f64>) -> YawSeries {
        YawSeries::new(values, 30.0).unwrap()
    }

    #[test]
    fn smooth_constant_and_identity() {
        let s = series(vec![0.25; 40]);
        assert_eq!(smooth(&s, 15).unwrap(), s);
        let r = series((0..20).map(|i| (i as f64).sin()).collect());
        assert_eq!(smooth(&r, 1).unwrap(), r);
    }

    #[test]
    fn smooth_impulse() {
        let mut v = vec![0.0; 21];
        v[10] = 1.0;
        let out = smooth(&series(v), 5).unwrap();
        for (t, x) in out.values().iter().enumerate() {
            let expected = if (8..=12).contains(&t) { 0.2 } else { 0.0 };
            assert!((x - expected).abs() < 1e-15, "frame {t}: {x}");
        }
    }

    #[test]
    fn smooth_shrinks_window_at_edges() {
        let out = smooth(&series(vec![1.0, 2.0, 3.0, 4.0]), 5).unwrap();
        // t=0: [1]; t=1: [1,2,3]; t=2: [2,3,4]; t=3: [4]
        assert_eq!(out.values(), &[1.0, 2.0, 3.0, 4.0]);
        let out = smooth(&series(vec![0.0, 3.0, 0.0, 0.0]), 3).unwrap();
        assert_eq!(out.values(), &[0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn smooth_errors() {
        assert_eq!(smooth(&series(vec![]), 3), Err(LabelError::EmptySeries));
        assert_eq!(smooth(&series(vec![1.0]), 4), Err(LabelError::InvalidWindow(4)));
    }

    #[test]
    fn heading_integration() {
        assert!(integrate_heading(&series(vec![0.0; 5]))
            .unwrap()
            .iter()
            .all(|h| *h == 0.0));
        let h = integrate_heading(&series(vec![0.01; 100])).unwrap();
        assert_eq!(h[0], 0.01);
        assert!((h[99] - 1.0).abs() < 1e-12);
        assert_eq!(integrate_heading(&series(vec![])), Err(LabelError::EmptySeries));
    }

    #[test]
    fn bins_cover_circle_with_ccw_ties() {
        for c in DirectionClass::all() {
            assert_eq!(DirectionClass::from_angle_deg(c.center_deg()), c);
            assert_eq!(DirectionClass::from_angle_deg(c.center_deg() - 360.0), c);
        }
        assert_eq!(DirectionClass::from_angle_deg(22.5).index(), 1);
        assert_eq!(DirectionClass::from_angle_deg(22.4999).index(), 0);
        assert_eq!(DirectionClass::from_angle_deg(-22.5).index(), 0);
        assert_eq!(DirectionClass::from_angle_deg(-22.5001).index(), 7);
        assert_eq!(DirectionClass::from_angle_deg(180.0).index(), 4);
        assert_eq!(DirectionClass::from_angle_deg(157.5).index(), 4);
    }

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_deg(180.0), 180.0);
        assert_eq!(wrap_deg(-180.0), 180.0);
        assert_eq!(wrap_deg(270.0), -90.0);
        assert_eq!(wrap_deg(-450.0), -90.0);
    }

    #[test]
    fn mirror_classes() {
        let m: Vec<u8> = DirectionClass::all().map(|c| c.mirror().index()).collect();
        assert_eq!(m, vec![0, 7, 6, 5, 4, 3, 2, 1]);
    }

    #[test]
    fn zero_series_is_forward() {
        let labels = label_frames(&series(vec![0.0; 90]), &LabelConfig::default()).unwrap();
        assert!(labels.labels().iter().all(|c| c.is_forward()));
    }

    #[test]
    fn ninety_degrees_over_lookahead_is_left() {
        let lookahead = 60;
        let rate = std::f64::consts::FRAC_PI_2 / lookahead as f64;
        let labels = label_frames(&series(vec![rate; 200]), &LabelConfig::default()).unwrap();
        assert_eq!(labels.labels()[0], DirectionClass::LEFT);
        let rt = LabelConfig {
            mode: LabelMode::RateThreshold,
            ..Default::default()
        };
        assert_eq!(
            label_frames(&series(vec![-rate; 200]), &rt).unwrap().labels()[50],
            DirectionClass::RIGHT
        );
    }

    #[test]
    fn label_config_validation() {
        let bad = LabelConfig {
            smoothing_window: 4,
            ..Default::default()
        };
        assert_eq!(
            label_frames(&series(vec![0.0]), &bad),
            Err(LabelError::InvalidWindow(4))
        );
        let bad = LabelConfig {
            lookahead_frames: Some(0),
            ..Default::default()
        };
        assert_eq!(
            label_frames(&series(vec![0.0]), &bad),
            Err(LabelError::InvalidLookahead)
        );
    }

    #[test]
    fn weights_balance_classes() {
        let labels = DirectionLabelSeries::new(vec![DirectionClass::FORWARD; 7]);
        let w = class_weights(&labels).unwrap();
        assert!(w.iter().all(|x| *x == w[0]));

        let mut idx = vec![0u8; 90];
        idx.extend([2u8; 10]);
        let w = class_weights(&DirectionLabelSeries::from_indices(&idx).unwrap()).unwrap();
        assert!((w[95] / w[0] - 9.0).abs() < 1e-12);
        assert!((w[0] - 100.0 / 720.0).abs() < 1e-15);
        assert_eq!(
            class_weights(&DirectionLabelSeries::new(vec![])),
            Err(LabelError::EmptySeries)
        );
    }

    #[test]
    fn reverse_definition() {
        let s = series(vec![0.1, 0.2, -0.3]);
        assert_eq!(reverse_series(&s).values(), &[0.3, -0.2, -0.1]);
        assert_eq!(reverse_series(&reverse_series(&s)), s);
    }

    #[test]
    fn runs() {
        let l = DirectionLabelSeries::from_indices(&[0, 2, 2, 0, 0, 6, 7, 0, 1]).unwrap();
        assert_eq!(l.non_forward_runs(), vec![1..3, 5..7, 8..9]);
    }

    #[test]
    fn class_serde_rejects_out_of_range() {
        assert!(DirectionClass::try_from(8).is_err());
        assert_eq!(DirectionClass::try_from(7).unwrap().index(), 7);
    }
}
