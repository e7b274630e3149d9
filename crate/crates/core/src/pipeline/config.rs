use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cortmagnif::MagnifParams;
use crate::error::{Error, Result};
use crate::fixation::SamplerMode;
use crate::fovblur::FovBlurParams;

pub const SCHEMA_VERSION: u32 = 1;

/// Random-resized-crop geometry. Defaults follow the common contrastive-learning recipe.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CropParams {
    /// Area fraction of the input, drawn uniformly.
    pub scale_range: [f64; 2],
    /// Aspect ratio `w / h`, drawn log-uniformly.
    pub ratio_range: [f64; 2],
}

impl Default for CropParams {
    fn default() -> Self {
        Self {
            scale_range: [0.08, 1.0],
            ratio_range: [3.0 / 4.0, 4.0 / 3.0],
        }
    }
}

impl CropParams {
    pub fn validate(&self) -> Result<()> {
        let [s0, s1] = self.scale_range;
        if !(s0 > 0.0 && s0 <= s1 && s1 <= 1.0) {
            return Err(Error::invalid(format!("scale_range must lie in (0, 1] with lo <= hi, got [{s0}, {s1}]")));
        }
        let [r0, r1] = self.ratio_range;
        if !(r0 > 0.0 && r0 <= r1 && r1.is_finite()) {
            return Err(Error::invalid(format!("ratio_range must be positive with lo <= hi, got [{r0}, {r1}]")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaliencyCropParams {
    pub scale_range: [f64; 2],
    pub ratio_range: [f64; 2],
    pub temperature: f64,
    /// Ignore the supplied map and use a constant one.
    #[serde(default)]
    pub flat: bool,
}

impl SaliencyCropParams {
    pub fn new(crop: CropParams, temperature: f64, flat: bool) -> Self {
        Self {
            scale_range: crop.scale_range,
            ratio_range: crop.ratio_range,
            temperature,
            flat,
        }
    }

    pub fn crop(&self) -> CropParams {
        CropParams {
            scale_range: self.scale_range,
            ratio_range: self.ratio_range,
        }
    }
}

/// One augmentation and its parameter block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum Stage {
    Fovblur(FovBlurParams),
    Magnify(MagnifParams),
    RandomResizedCrop(CropParams),
    SaliencyCrop(SaliencyCropParams),
    Hflip,
    Grayscale,
    ColorJitter { strength: f32 },
    UniformBlur { sigma_range: [f64; 2] },
}

impl Stage {
    pub fn name(&self) -> &'static str {
        match self {
            Stage::Fovblur(_) => "fovblur",
            Stage::Magnify(_) => "magnify",
            Stage::RandomResizedCrop(_) => "random_resized_crop",
            Stage::SaliencyCrop(_) => "saliency_crop",
            Stage::Hflip => "hflip",
            Stage::Grayscale => "grayscale",
            Stage::ColorJitter { .. } => "color_jitter",
            Stage::UniformBlur { .. } => "uniform_blur",
        }
    }

    pub fn is_spatial(&self) -> bool {
        matches!(
            self,
            Stage::Fovblur(_) | Stage::Magnify(_) | Stage::RandomResizedCrop(_) | Stage::SaliencyCrop(_)
        )
    }

    /// Stages that resample the input geometry into the output frame.
    pub fn resamples(&self) -> bool {
        matches!(self, Stage::Magnify(_) | Stage::RandomResizedCrop(_) | Stage::SaliencyCrop(_))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Stage::Fovblur(p) => p.validate(),
            Stage::Magnify(p) => p.validate(),
            Stage::RandomResizedCrop(p) => p.validate(),
            Stage::SaliencyCrop(p) => {
                p.crop().validate()?;
                SamplerMode::Saliency { temperature: p.temperature }.validate()
            }
            Stage::Hflip | Stage::Grayscale => Ok(()),
            Stage::ColorJitter { strength } if (0.0..=1.0).contains(strength) => Ok(()),
            Stage::ColorJitter { strength } => {
                Err(Error::invalid(format!("color_jitter strength must be in [0, 1], got {strength}")))
            }
            Stage::UniformBlur { sigma_range: [lo, hi] } if *lo >= 0.0 && lo <= hi && hi.is_finite() => Ok(()),
            Stage::UniformBlur { sigma_range } => {
                Err(Error::invalid(format!("uniform_blur sigma_range invalid: {sigma_range:?}")))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageSpec {
    pub probability: f64,
    pub stage: Stage,
}

impl StageSpec {
    pub fn always(stage: Stage) -> Self {
        Self { probability: 1.0, stage }
    }

    pub fn with_probability(stage: Stage, probability: f64) -> Self {
        Self { probability, stage }
    }
}

/// Provenance attached to presets: which settings were chosen here rather than
/// given by the experiment description.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetMeta {
    pub family: String,
    #[serde(default)]
    pub temperature_grid: Vec<f64>,
    #[serde(default)]
    pub temperature_sweet_spot: Option<[f64; 2]>,
    /// Fields whose values are inherited library defaults.
    #[serde(default)]
    pub inherited: Vec<String>,
    /// Fields whose values were not reported and were chosen here.
    #[serde(default)]
    pub unreported: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub schema_version: u32,
    pub stages: Vec<StageSpec>,
    pub views_per_image: usize,
    pub master_seed: u64,
    /// How fixations are drawn for the foveation stages.
    pub fixation: SamplerMode,
    /// Side of the square output view.
    pub output_size: usize,
    #[serde(default)]
    pub allow_multiple_spatial: bool,
    #[serde(default)]
    pub metadata: Option<PresetMeta>,
}

impl PipelineConfig {
    pub fn new(stages: Vec<StageSpec>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            stages,
            views_per_image: 2,
            master_seed: 0,
            fixation: SamplerMode::default(),
            output_size: 96,
            allow_multiple_spatial: false,
            metadata: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.views_per_image == 0 {
            return Err(Error::invalid("views_per_image must be >= 1"));
        }
        if self.output_size == 0 {
            return Err(Error::invalid("output_size must be >= 1"));
        }
        self.fixation.validate()?;
        for s in &self.stages {
            if !(0.0..=1.0).contains(&s.probability) {
                return Err(Error::invalid(format!(
                    "{} probability must be in [0, 1], got {}",
                    s.stage.name(),
                    s.probability
                )));
            }
            s.stage.validate()?;
        }
        let spatial = self.stages.iter().filter(|s| s.stage.is_spatial()).count();
        if spatial > 1 && !self.allow_multiple_spatial {
            return Err(Error::Config(format!(
                "{spatial} spatial stages configured; set allow_multiple_spatial to combine them"
            )));
        }
        Ok(())
    }

    /// Whether some stage can only run with a saliency map.
    pub fn needs_saliency(&self) -> bool {
        self.stages.iter().any(|s| match &s.stage {
            Stage::SaliencyCrop(p) => !p.flat,
            Stage::Fovblur(_) | Stage::Magnify(_) => self.fixation.needs_saliency(),
            _ => false,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
