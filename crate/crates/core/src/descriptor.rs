//! Cell histograms, block normalization and the 3780-element window descriptor.

use std::fmt::Write as _;

use crate::approx_math::{rsqrt_newton, DEFAULT_NEWTON_ITERATIONS};
use crate::gradient::{compute_gradients, polarize, Backend, GradientField};
use crate::gradient::{INTERIOR_HEIGHT, INTERIOR_WIDTH};
use crate::imageio::GrayWindow;

pub const CELL_SIZE: usize = 8;
pub const BINS: usize = 9;
pub const BLOCK_CELLS: usize = 2;
pub const BLOCK_LEN: usize = BLOCK_CELLS * BLOCK_CELLS * BINS;
pub const DESCRIPTOR_LEN: usize = 3780;

/// Default normalization constant added (squared) to the block norm.
pub const DEFAULT_EPS: f32 = 0.01;

const BIN_WIDTH_DEG: f32 = 180.0 / BINS as f32;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DescriptorError {
    #[error("descriptor must have {DESCRIPTOR_LEN} features, got {0}")]
    Length(usize),
    #[error("feature {index}: cannot parse {text:?}")]
    Parse { index: usize, text: String },
}

/// Cell/block layout over the 64x128 window interior.
///
/// Only the one layout is supported; the struct exists so callers can query
/// the derived counts instead of hard-coding them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HogGeometry {
    cells_x: usize,
    cells_y: usize,
}

impl HogGeometry {
    pub const fn standard() -> Self {
        Self {
            cells_x: INTERIOR_WIDTH / CELL_SIZE,
            cells_y: INTERIOR_HEIGHT / CELL_SIZE,
        }
    }

    pub const fn cell_size(&self) -> usize {
        CELL_SIZE
    }

    pub const fn bins(&self) -> usize {
        BINS
    }

    /// Cells per block side.
    pub const fn block_cells(&self) -> usize {
        BLOCK_CELLS
    }

    /// Block stride in cells.
    pub const fn block_stride(&self) -> usize {
        1
    }

    pub const fn cells_x(&self) -> usize {
        self.cells_x
    }

    pub const fn cells_y(&self) -> usize {
        self.cells_y
    }

    pub const fn cell_count(&self) -> usize {
        self.cells_x * self.cells_y
    }

    pub const fn blocks_x(&self) -> usize {
        self.cells_x - BLOCK_CELLS + 1
    }

    pub const fn blocks_y(&self) -> usize {
        self.cells_y - BLOCK_CELLS + 1
    }

    pub const fn block_count(&self) -> usize {
        self.blocks_x() * self.blocks_y()
    }

    pub const fn block_len(&self) -> usize {
        BLOCK_LEN
    }

    pub const fn descriptor_len(&self) -> usize {
        self.block_count() * BLOCK_LEN
    }
}

impl Default for HogGeometry {
    fn default() -> Self {
        Self::standard()
    }
}

const _: () = assert!(HogGeometry::standard().descriptor_len() == DESCRIPTOR_LEN);

/// Magnitude-weighted orientation histogram of one 8x8 cell.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CellHistogram {
    pub bins: [f32; BINS],
}

/// Orientation bin `k` covers `[20k, 20(k+1))` degrees.
#[inline]
pub fn orientation_bin(angle_deg: f32) -> usize {
    ((angle_deg / BIN_WIDTH_DEG) as usize).min(BINS - 1)
}

/// Hard-assigns each pixel's magnitude to its cell and orientation bin.
/// Returns `cells_x * cells_y` histograms in row-major cell order.
pub fn cell_histograms(field: &GradientField, geom: &HogGeometry) -> Vec<CellHistogram> {
    let mut cells = vec![CellHistogram::default(); geom.cell_count()];
    let (mags, angles) = (field.magnitudes(), field.angles_deg());
    for iy in 0..INTERIOR_HEIGHT {
        let row = (iy / CELL_SIZE) * geom.cells_x();
        for ix in 0..INTERIOR_WIDTH {
            let i = iy * INTERIOR_WIDTH + ix;
            cells[row + ix / CELL_SIZE].bins[orientation_bin(angles[i])] += mags[i];
        }
    }
    cells
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockDescriptor {
    pub values: [f32; BLOCK_LEN],
}

impl BlockDescriptor {
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|&v| f64::from(v).powi(2)).sum::<f64>().sqrt()
    }
}

/// Narrows to binary32 without ever rounding away from zero.
fn narrow_toward_zero(x: f64) -> f32 {
    let y = x as f32;
    if f64::from(y).abs() <= x.abs() {
        y
    } else if y > 0.0 {
        y.next_down()
    } else {
        y.next_up()
    }
}

/// `v_i / sqrt(|v|^2 + eps^2)` over the concatenated 2x2 cell histograms.
///
/// The reference path evaluates in f64 and narrows toward zero; the hardware
/// path accumulates in binary32 and multiplies by a Newton-Raphson reciprocal
/// square root, saturating at 1. A zero block with `eps == 0` maps to zeros.
pub fn normalize_block(cells: &[CellHistogram; 4], backend: Backend, eps: f32) -> BlockDescriptor {
    let mut values = [0.0f32; BLOCK_LEN];
    for (chunk, cell) in values.chunks_exact_mut(BINS).zip(cells) {
        chunk.copy_from_slice(&cell.bins);
    }
    match backend {
        Backend::Reference => {
            let eps = f64::from(eps);
            let sum_sq = values.iter().map(|&v| f64::from(v).powi(2)).sum::<f64>() + eps * eps;
            if sum_sq > 0.0 {
                let norm = sum_sq.sqrt();
                for v in &mut values {
                    *v = narrow_toward_zero(f64::from(*v) / norm);
                }
            }
        }
        Backend::Hardware => {
            let sum_sq = values.iter().fold(eps * eps, |acc, &v| acc + v * v);
            if let Ok(inv) = rsqrt_newton(sum_sq, DEFAULT_NEWTON_ITERATIONS) {
                for v in &mut values {
                    *v = (*v * inv).min(1.0);
                }
            }
        }
    }
    BlockDescriptor { values }
}

/// Normalized HOG feature vector: blocks row-major, cells row-major within a
/// block, bins 0..8 within a cell.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowDescriptor {
    features: Vec<f32>,
}

impl WindowDescriptor {
    pub fn from_vec(features: Vec<f32>) -> Result<Self, DescriptorError> {
        if features.len() != DESCRIPTOR_LEN {
            return Err(DescriptorError::Length(features.len()));
        }
        Ok(Self { features })
    }

    pub fn zeros() -> Self {
        Self {
            features: vec![0.0; DESCRIPTOR_LEN],
        }
    }

    pub fn features(&self) -> &[f32] {
        &self.features
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.features
    }

    /// The 36 features contributed by block `index`.
    pub fn block(&self, index: usize) -> &[f32] {
        &self.features[index * BLOCK_LEN..(index + 1) * BLOCK_LEN]
    }

    /// Comma-separated shortest round-trip decimals.
    pub fn to_csv_line(&self) -> String {
        let mut line = String::with_capacity(self.features.len() * 10);
        for (i, v) in self.features.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            write!(line, "{v}").unwrap();
        }
        line
    }

    pub fn parse_csv_line(line: &str) -> Result<Self, DescriptorError> {
        let features = line
            .trim()
            .split(',')
            .enumerate()
            .map(|(index, t)| {
                t.trim().parse::<f32>().map_err(|_| DescriptorError::Parse {
                    index,
                    text: t.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_vec(features)
    }
}

/// Normalizes every block of a cell grid and concatenates them.
pub fn blocks_from_cells(cells: &[CellHistogram], backend: Backend, geom: &HogGeometry, eps: f32) -> WindowDescriptor {
    let cx = geom.cells_x();
    let mut features = Vec::with_capacity(geom.descriptor_len());
    for by in 0..geom.blocks_y() {
        for bx in 0..geom.blocks_x() {
            let at = |dx: usize, dy: usize| cells[(by + dy) * cx + bx + dx];
            let block = [at(0, 0), at(1, 0), at(0, 1), at(1, 1)];
            features.extend_from_slice(&normalize_block(&block, backend, eps).values);
        }
    }
    WindowDescriptor { features }
}

/// Full pipeline: gradients, polarization, cell binning, block normalization.
pub fn assemble_descriptor(window: &GrayWindow, backend: Backend, geom: &HogGeometry, eps: f32) -> WindowDescriptor {
    let field = polarize(&compute_gradients(window), backend);
    let cells = cell_histograms(&field, geom);
    blocks_from_cells(&cells, backend, geom, eps)
}
