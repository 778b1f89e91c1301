//! Central-difference gradients over the window interior and their polar form.
//!
//! The outermost pixel ring of the 66x130 window only feeds the differences;
//! outputs cover the 64x128 interior, which tiles exactly into 8x8 cells.

use crate::approx_math::{cordic_vectoring, reference_polar, CordicConfig, PolarResult};
use crate::imageio::{GrayWindow, WINDOW_HEIGHT, WINDOW_WIDTH};

pub const INTERIOR_WIDTH: usize = WINDOW_WIDTH - 2;
pub const INTERIOR_HEIGHT: usize = WINDOW_HEIGHT - 2;

/// Numeric path used for polarization and block normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Backend {
    /// Exact library square root and arctangent.
    #[default]
    Reference,
    /// CORDIC vectoring and Newton-Raphson reciprocal square root in binary32.
    Hardware,
}

/// Per-interior-pixel `(f_x, f_y)`, row-major over 64x128.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradientPairs {
    pairs: Vec<[i16; 2]>,
}

impl GradientPairs {
    pub fn pairs(&self) -> &[[i16; 2]] {
        &self.pairs
    }

    /// Gradient at interior coordinates (`ix = x - 1`, `iy = y - 1`).
    pub fn get(&self, ix: usize, iy: usize) -> [i16; 2] {
        self.pairs[iy * INTERIOR_WIDTH + ix]
    }
}

pub fn compute_gradients(w: &GrayWindow) -> GradientPairs {
    let f = |x: usize, y: usize| i16::from(w.get(x, y));
    let mut pairs = Vec::with_capacity(INTERIOR_WIDTH * INTERIOR_HEIGHT);
    for y in 1..=INTERIOR_HEIGHT {
        for x in 1..=INTERIOR_WIDTH {
            pairs.push([f(x + 1, y) - f(x - 1, y), f(x, y + 1) - f(x, y - 1)]);
        }
    }
    GradientPairs { pairs }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    magnitudes: Vec<f32>,
    angles_deg: Vec<f32>,
}

impl GradientField {
    /// Builds a field from raw 64x128 row-major samples.
    ///
    /// Panics if either slice has the wrong length.
    pub fn from_parts(magnitudes: Vec<f32>, angles_deg: Vec<f32>) -> Self {
        let n = INTERIOR_WIDTH * INTERIOR_HEIGHT;
        assert_eq!(magnitudes.len(), n, "magnitude plane must be 64x128");
        assert_eq!(angles_deg.len(), n, "angle plane must be 64x128");
        Self { magnitudes, angles_deg }
    }

    pub const fn interior_width(&self) -> usize {
        INTERIOR_WIDTH
    }

    pub const fn interior_height(&self) -> usize {
        INTERIOR_HEIGHT
    }

    pub fn magnitudes(&self) -> &[f32] {
        &self.magnitudes
    }

    pub fn angles_deg(&self) -> &[f32] {
        &self.angles_deg
    }

    pub fn get(&self, ix: usize, iy: usize) -> PolarResult {
        let i = iy * INTERIOR_WIDTH + ix;
        PolarResult {
            magnitude: self.magnitudes[i],
            angle_deg: self.angles_deg[i],
        }
    }
}

pub fn polarize(grads: &GradientPairs, backend: Backend) -> GradientField {
    let polar: Box<dyn Fn(f32, f32) -> PolarResult> = match backend {
        Backend::Reference => Box::new(reference_polar),
        Backend::Hardware => {
            let cfg = CordicConfig::default();
            Box::new(move |x, y| cordic_vectoring(x, y, &cfg))
        }
    };
    let (magnitudes, angles_deg) = grads
        .pairs
        .iter()
        .map(|&[fx, fy]| {
            let p = polar(f32::from(fx), f32::from(fy));
            (p.magnitude, p.angle_deg)
        })
        .unzip();
    GradientField { magnitudes, angles_deg }
}
