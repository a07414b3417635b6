//! Row-major rasters and the sparse label maps built on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major raster.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Clone> Raster<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }
}

impl<T> Raster<T> {
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {width}x{height} raster",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> &T {
        &self.data[row * self.width + col]
    }

    #[inline]
    pub fn get_mut(&mut self, col: usize, row: usize) -> &mut T {
        &mut self.data[row * self.width + col]
    }

    pub fn row(&self, row: usize) -> &[T] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        // chunks_exact panics on a zero chunk size
        self.data.chunks(self.width.max(1))
    }

    pub fn same_shape<U>(&self, other: &Raster<U>) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Physical quantity carried by a [`LabelMap`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    /// Radial distance from the bottom camera, meters.
    Depth,
    /// Spherical disparity, degrees.
    Disparity,
}

impl MapKind {
    pub fn unit(self) -> &'static str {
        match self {
            MapKind::Depth => "m",
            MapKind::Disparity => "deg",
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            MapKind::Depth => "depth",
            MapKind::Disparity => "disparity",
        }
    }
}

/// Sparse per-pixel labels: `None` marks a pixel without ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMap {
    pub kind: MapKind,
    pub raster: Raster<Option<f64>>,
}

pub type DepthMap = LabelMap;
pub type DisparityMap = LabelMap;

impl LabelMap {
    pub fn empty(kind: MapKind, width: usize, height: usize) -> Self {
        Self {
            kind,
            raster: Raster::filled(width, height, None),
        }
    }

    pub fn width(&self) -> usize {
        self.raster.width()
    }

    pub fn height(&self) -> usize {
        self.raster.height()
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> Option<f64> {
        *self.raster.get(col, row)
    }

    #[inline]
    pub fn set(&mut self, col: usize, row: usize, value: Option<f64>) {
        *self.raster.get_mut(col, row) = value;
    }

    /// Keeps the smaller of the existing label and `value`.
    pub fn set_min(&mut self, col: usize, row: usize, value: f64) {
        let slot = self.raster.get_mut(col, row);
        match slot {
            Some(v) if *v <= value => {}
            _ => *slot = Some(value),
        }
    }

    pub fn labeled_count(&self) -> usize {
        self.raster.data().iter().filter(|v| v.is_some()).count()
    }

    pub fn labeled_ratio(&self) -> f64 {
        let n = self.width() * self.height();
        if n == 0 {
            0.0
        } else {
            self.labeled_count() as f64 / n as f64
        }
    }

    /// `(col, row, value)` for every labeled pixel, row-major.
    pub fn labels(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let w = self.width().max(1);
        self.raster
            .data()
            .iter()
            .enumerate()
            .filter_map(move |(i, v)| v.map(|v| (i % w, i / w, v)))
    }
}
