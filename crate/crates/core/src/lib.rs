//! Saccade- and foveation-inspired image augmentations.
//!
//! - [`fixation`]: saliency → gaze density → fixation points
//! - [`fovblur`]: eccentricity-dependent blur blended through belt masks
//! - [`cortmagnif`]: linear–quadratic radial warp around a fixation
//! - [`retinotopy`]: fits of the radial model to retinotopy measurements
//! - [`pipeline`]: multi-view pipelines, presets and the throughput harness

pub mod cortmagnif;
pub mod error;
pub mod fixation;
pub mod fovblur;
pub mod imagecore;
pub mod pipeline;
pub mod retinotopy;
pub mod rng;

pub use cortmagnif::{MagnifParams, RadialTransform};
pub use error::{Error, Result};
pub use fixation::{FixationPoint, GazeDensity, SamplerMode, SamplerSpec};
pub use fovblur::FovBlurParams;
pub use imagecore::{CropBox, GridMap, ImageBuffer, ScalarField};
pub use pipeline::{PipelineConfig, Stage, StageSpec, ViewRecord};
pub use retinotopy::{FitResult, RetinotopyPoint};
