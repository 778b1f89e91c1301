//! HOG feature extraction and linear SVM classification for fixed-size
//! 130x66 pedestrian windows.
//!
//! Two numeric backends share every pipeline stage:
//!
//! * [`Backend::Reference`] evaluates gradient magnitude, orientation and block
//!   normalization with exact library math.
//! * [`Backend::Hardware`] mirrors a single-precision co-processor datapath:
//!   CORDIC vectoring for magnitude/angle and a Newton-Raphson reciprocal
//!   square root for block normalization.
//!
//! The [`cycle_model`] module estimates clock budgets for that datapath and the
//! [`classifier`] module carries the SVM decision rule, a deterministic trainer
//! and the binary model file format.

pub mod approx_math;
pub mod classifier;
pub mod cli;
pub mod cycle_model;
pub mod descriptor;
pub mod gradient;
pub mod imageio;
pub mod manifest;

pub use approx_math::{cordic_vectoring, reference_polar, rsqrt_newton, CordicConfig, PolarResult};
pub use classifier::{
    classify, decision_value, evaluate, load_model, save_model, train, EvalReport, LabeledSample, SvmModel, TrainParams,
};
pub use cycle_model::{compare_to_paper, estimate, CyclePlan, CycleReport, OverlapMode};
pub use descriptor::{
    assemble_descriptor, cell_histograms, normalize_block, BlockDescriptor, CellHistogram, HogGeometry,
    WindowDescriptor, DEFAULT_EPS,
};
pub use gradient::{compute_gradients, polarize, Backend, GradientField, GradientPairs};
pub use imageio::{load_image, rgb_to_gray, to_window, CropMode, GrayImage, GrayWindow, Image, RgbImage};

/// Identifier of the canonical feature ordering (block-major, cell-major,
/// bin-minor). Stored in every model file.
pub const FEATURE_ORDER_VERSION: &str = "hog-block-major-v1";
