//! Composition of the transforms into multi-view augmentation pipelines,
//! the crop baselines, named presets, replayable view records and a
//! throughput harness.
//!
//! Stage order inside presets is spatial → color jitter → grayscale →
//! uniform blur → horizontal flip. Every stage draws its firing coin first,
//! then its parameters, from the view's own rng stream.

mod bench;
mod config;
mod crop;
mod presets;
mod views;

pub use bench::{bench, BenchImage, ThroughputReport};
pub use config::{CropParams, PipelineConfig, PresetMeta, SaliencyCropParams, Stage, StageSpec, SCHEMA_VERSION};
pub use crop::{random_resized_crop, sample_crop_box, CenterSampler};
pub use presets::{
    preset, preset_names, BLUR_EXPERIMENT_TEMPERATURE, COVER_RANGES, CROP_SWEET_SPOT, DEFAULT_COVER_RANGE,
    FOV_AREA_RANGES, MAGNIF_SWEET_SPOT, SWEEP_FOV, SWEEP_K, TEMPERATURE_GRID,
};
pub use views::{generate_view, generate_views, replay_view, run_batch, tile_horizontal, AppliedStage, ViewRecord};
