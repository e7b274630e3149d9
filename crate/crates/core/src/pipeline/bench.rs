use std::fmt::Write as _;
use std::time::{Duration, Instant};

use super::config::{PipelineConfig, Stage};
use super::views::{generate_view_timed, StageTimes};
use crate::error::{Error, Result};
use crate::imagecore::{ImageBuffer, ScalarField};

/// One input of a benchmark run.
pub struct BenchImage {
    pub id: String,
    pub image: ImageBuffer,
    pub saliency: Option<ScalarField>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ThroughputReport {
    pub views: usize,
    pub elapsed_s: f64,
    pub views_per_second: f64,
    /// Mean latency per stage kind in milliseconds, in first-seen order.
    pub stage_mean_ms: Vec<(String, f64)>,
    pub peak_working_set_bytes: usize,
}

impl ThroughputReport {
    pub const CSV_HEADER: &'static str = "kind,name,value";

    /// `kind,name,value` rows; a report with no views is the header alone.
    pub fn to_csv(&self) -> String {
        let mut s = format!("{}\n", Self::CSV_HEADER);
        if self.views == 0 {
            return s;
        }
        let _ = writeln!(s, "summary,views,{}", self.views);
        let _ = writeln!(s, "summary,elapsed_s,{}", self.elapsed_s);
        let _ = writeln!(s, "summary,views_per_second,{}", self.views_per_second);
        let _ = writeln!(s, "summary,peak_working_set_bytes,{}", self.peak_working_set_bytes);
        for (name, ms) in &self.stage_mean_ms {
            let _ = writeln!(s, "stage_mean_ms,{name},{ms}");
        }
        s
    }
}

/// Upper estimate of the bytes alive at once while producing one view.
fn working_set(config: &PipelineConfig, img: &BenchImage) -> usize {
    let (h, w, ch) = (img.image.height(), img.image.width(), img.image.channels());
    let out = config.output_size;
    let input = h * w * ch * 4 + img.saliency.as_ref().map_or(0, |s| s.data().len() * 8 * 2);
    let frame = h.max(out) * w.max(out);
    let stage_peak = config
        .stages
        .iter()
        .map(|s| match &s.stage {
            // grid entries + output
            Stage::Magnify(p) => {
                let (oh, ow) = p.out_shape.unwrap_or((out, out));
                oh * ow * (16 + ch * 4)
            }
            // masks + one blurred layer + accumulator + output
            Stage::Fovblur(p) => frame * ((p.n_belts + 1) * 8 + ch * 4 * 3),
            // gaze density (probabilities + cdf) + output
            Stage::SaliencyCrop(_) => h * w * 16 + out * out * ch * 4,
            _ => frame * ch * 4 * 2,
        })
        .max()
        .unwrap_or(0);
    input * 2 + stage_peak
}

/// Generates views round-robin over `images` on the calling thread for
/// `duration` after one untimed warm-up view per image.
pub fn bench(config: &PipelineConfig, images: &[BenchImage], duration: Duration) -> Result<ThroughputReport> {
    if images.is_empty() {
        return Err(Error::invalid("bench needs at least one image"));
    }
    config.validate()?;
    if duration.is_zero() {
        return Ok(ThroughputReport::default());
    }
    for img in images {
        generate_view_timed(&img.image, img.saliency.as_ref(), config, &img.id, u64::MAX, None)?;
    }
    let mut times = StageTimes::default();
    let mut views = 0usize;
    let start = Instant::now();
    while start.elapsed() < duration {
        let img = &images[views % images.len()];
        let view_index = (views / images.len()) as u64;
        generate_view_timed(&img.image, img.saliency.as_ref(), config, &img.id, view_index, Some(&mut times))?;
        views += 1;
    }
    let elapsed = start.elapsed().as_secs_f64();
    Ok(ThroughputReport {
        views,
        elapsed_s: elapsed,
        views_per_second: views as f64 / elapsed,
        stage_mean_ms: times
            .entries
            .iter()
            .map(|(name, secs, n)| (name.to_string(), secs * 1e3 / *n as f64))
            .collect(),
        peak_working_set_bytes: images.iter().map(|i| working_set(config, i)).max().unwrap_or(0),
    })
}
