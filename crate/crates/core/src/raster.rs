//! In-memory depth and flow rasters.
//!
//! Both kinds share one container: a row-major grid of `f32` with the
//! channels of a pixel stored next to each other. Depth has one channel,
//! flow has two (`u_dot`, `v_dot`).

use serde::{Deserialize, Serialize};

/// What a raster holds, derived from its channel count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RasterKind {
    Depth,
    Flow,
}

impl RasterKind {
    pub fn channels(self) -> u16 {
        match self {
            RasterKind::Depth => 1,
            RasterKind::Flow => 2,
        }
    }

    pub fn from_channels(channels: u16) -> Option<Self> {
        match channels {
            1 => Some(RasterKind::Depth),
            2 => Some(RasterKind::Flow),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: u32,
    height: u32,
    kind: RasterKind,
    data: Vec<f32>,
}

impl Raster {
    pub fn filled(kind: RasterKind, width: u32, height: u32, value: f32) -> Self {
        let len = width as usize * height as usize * kind.channels() as usize;
        Self {
            width,
            height,
            kind,
            data: vec![value; len],
        }
    }

    /// Wraps an existing payload. Returns `None` when the length does not
    /// match `width * height * channels`.
    pub fn from_vec(kind: RasterKind, width: u32, height: u32, data: Vec<f32>) -> Option<Self> {
        let len = width as usize * height as usize * kind.channels() as usize;
        (data.len() == len).then_some(Self {
            width,
            height,
            kind,
            data,
        })
    }

    pub fn depth(width: u32, height: u32) -> Self {
        Self::filled(RasterKind::Depth, width, height, 0.0)
    }

    pub fn flow(width: u32, height: u32) -> Self {
        Self::filled(RasterKind::Flow, width, height, 0.0)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn kind(&self) -> RasterKind {
        self.kind
    }

    pub fn channels(&self) -> u16 {
        self.kind.channels()
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    fn offset(&self, x: u32, y: u32) -> usize {
        debug_assert!(x < self.width && y < self.height);
        (y as usize * self.width as usize + x as usize) * self.channels() as usize
    }

    /// Value of channel 0 at `(x, y)`.
    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f32 {
        self.data[self.offset(x, y)]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: f32) {
        let i = self.offset(x, y);
        self.data[i] = value;
    }

    /// Both channels of a flow raster at `(x, y)`.
    #[inline]
    pub fn get_flow(&self, x: u32, y: u32) -> [f32; 2] {
        debug_assert_eq!(self.kind, RasterKind::Flow);
        let i = self.offset(x, y);
        [self.data[i], self.data[i + 1]]
    }

    #[inline]
    pub fn set_flow(&mut self, x: u32, y: u32, flow: [f32; 2]) {
        debug_assert_eq!(self.kind, RasterKind::Flow);
        let i = self.offset(x, y);
        self.data[i] = flow[0];
        self.data[i + 1] = flow[1];
    }

    /// Largest absolute per-channel difference between two rasters of the
    /// same shape, or `None` if the shapes differ.
    pub fn max_abs_diff(&self, other: &Raster) -> Option<f64> {
        if self.width != other.width || self.height != other.height || self.kind != other.kind {
            return None;
        }
        Some(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| (*a as f64 - *b as f64).abs())
                .fold(0.0, f64::max),
        )
    }
}
