//! `saccade`: command-line front end for fixation sampling, foveated blur,
//! cortical-magnification warps, retinotopy fits and augmentation pipelines.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use saccade_core::cortmagnif::{build_grid, solve_scale_for_cover, RadialTransform};
use saccade_core::fixation::SamplerSpec;
use saccade_core::fovblur::{belt_masks, farthest_corner_distance, foveal_radius};
use saccade_core::imagecore::{load_png, load_saliency_png, read_field_csv, save_png, write_field_csv, ImageBuffer, ScalarField};
use saccade_core::pipeline::{
    bench, generate_views, preset, preset_names, run_batch, tile_horizontal, BenchImage, PipelineConfig, Stage,
};
use saccade_core::retinotopy::{fit_report, read_points_csv};
use saccade_core::{FixationPoint, SamplerMode, ViewRecord};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] saccade_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Output(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_config_error() => 2,
            CliError::Usage(_) => 2,
            _ => 3,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

#[derive(Parser)]
#[command(name = "saccade", version, about = "Saccade and foveation image augmentations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate augmented views for every PNG in a directory.
    Augment(AugmentArgs),
    /// Draw fixation points from a saliency map.
    SampleFixations(SampleFixationsArgs),
    /// Write the source-coordinate grid of a magnification warp.
    WarpGrid(WarpGridArgs),
    /// Fit the radial and exponential models to `r,e` points.
    FitRetinotopy(FitArgs),
    /// Measure single-threaded view throughput.
    Bench(BenchArgs),
    /// List presets or print one as JSON.
    Presets(PresetsArgs),
    /// Export the foveated-blur blend masks as CSV fields.
    FovMasks(FovMasksArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct PipelineSource {
    /// Named preset (see `presets --list`).
    #[arg(long)]
    preset: Option<String>,
    /// JSON pipeline configuration.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl PipelineSource {
    fn load(&self) -> CliResult<PipelineConfig> {
        Ok(match (&self.preset, &self.config) {
            (Some(name), _) => preset(name)?,
            (_, Some(path)) => PipelineConfig::load(path)?,
            _ => unreachable!("clap enforces one source"),
        })
    }
}

#[derive(Args)]
struct AugmentArgs {
    #[arg(long)]
    input: PathBuf,
    /// Directory of saliency maps named `<image stem>.png` or `<image stem>.csv`.
    #[arg(long)]
    saliency: Option<PathBuf>,
    #[command(flatten)]
    source: PipelineSource,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: u64,
    /// CSV of per-view records.
    #[arg(long)]
    records: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Override views per image.
    #[arg(long)]
    views: Option<usize>,
    /// Also write a side-by-side strip of each image's views.
    #[arg(long)]
    panel: bool,
    /// Override foveated blur: `lo,hi,k_blur,n_belts[,e_r]`.
    #[arg(long)]
    fovblur: Option<String>,
    /// Override magnification: `r_fov,K,cover_lo,cover_hi[,out_size]`.
    #[arg(long)]
    magnif: Option<String>,
}

#[derive(Args)]
struct SampleFixationsArgs {
    /// Saliency map (PNG or field CSV).
    #[arg(long)]
    saliency: PathBuf,
    #[arg(long)]
    temperature: f64,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct WarpGridArgs {
    /// Input image height and width.
    #[arg(long)]
    height: usize,
    #[arg(long)]
    width: usize,
    #[arg(long, default_value_t = 30.0)]
    r_fov: f64,
    #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
    k: f64,
    /// Cover ratio; mutually exclusive with `--scale`.
    #[arg(long, conflicts_with = "scale")]
    cover: Option<f64>,
    /// Scale C directly.
    #[arg(long)]
    scale: Option<f64>,
    /// Fixation; defaults to the image centre.
    #[arg(long)]
    fx: Option<f64>,
    #[arg(long)]
    fy: Option<f64>,
    /// Output height and width; default to the input shape.
    #[arg(long)]
    out_height: Option<usize>,
    #[arg(long)]
    out_width: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    points: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1000)]
    bootstrap: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    source: PipelineSource,
    /// PNG directory; synthetic frames are used when absent.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    saliency: Option<PathBuf>,
    /// Side of the synthetic frames.
    #[arg(long, default_value_t = 96)]
    size: usize,
    #[arg(long, default_value_t = 2000)]
    duration_ms: u64,
    /// CSV report; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PresetsArgs {
    #[arg(long)]
    list: bool,
    /// Print this preset's configuration as JSON.
    #[arg(long)]
    show: Option<String>,
}

#[derive(Args)]
struct FovMasksArgs {
    #[arg(long)]
    height: usize,
    #[arg(long)]
    width: usize,
    #[arg(long)]
    fx: Option<f64>,
    #[arg(long)]
    fy: Option<f64>,
    #[arg(long)]
    fov_area: f64,
    #[arg(long, default_value_t = saccade_core::fovblur::DEFAULT_BELTS)]
    n_belts: usize,
    #[arg(long)]
    e_r: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

fn parse_floats(spec: &str, flag: &str, min: usize, max: usize) -> CliResult<Vec<f64>> {
    let vals: Result<Vec<f64>, _> = spec.split(',').map(|s| s.trim().parse::<f64>()).collect();
    match vals {
        Ok(v) if (min..=max).contains(&v.len()) => Ok(v),
        _ => Err(CliError::Usage(format!(
            "--{flag} expects {min} to {max} comma-separated numbers, got `{spec}`"
        ))),
    }
}

fn apply_overrides(cfg: &mut PipelineConfig, args: &AugmentArgs) -> CliResult<()> {
    if let Some(spec) = &args.fovblur {
        let v = parse_floats(spec, "fovblur", 4, 5)?;
        let mut hit = false;
        for s in &mut cfg.stages {
            if let Stage::Fovblur(p) = &mut s.stage {
                p.fov_area_range = [v[0], v[1]];
                p.k_blur = v[2];
                p.n_belts = v[3] as usize;
                p.e_r = v.get(4).copied();
                hit = true;
            }
        }
        if !hit {
            return Err(CliError::Usage("--fovblur given but the pipeline has no fovblur stage".into()));
        }
    }
    if let Some(spec) = &args.magnif {
        let v = parse_floats(spec, "magnif", 4, 5)?;
        let mut hit = false;
        for s in &mut cfg.stages {
            if let Stage::Magnify(p) = &mut s.stage {
                p.r_fov = v[0];
                p.k = v[1];
                p.cover_range = [v[2], v[3]];
                p.out_shape = v.get(4).map(|&n| (n as usize, n as usize));
                hit = true;
            }
        }
        if !hit {
            return Err(CliError::Usage("--magnif given but the pipeline has no magnify stage".into()));
        }
    }
    if let Some(n) = args.views {
        cfg.views_per_image = n;
    }
    cfg.master_seed = args.seed;
    cfg.validate()?;
    Ok(())
}

fn list_pngs(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Core(saccade_core::Error::Data(format!(
            "no PNG images in {}",
            dir.display()
        ))));
    }
    Ok(files)
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn load_saliency(path: &Path) -> CliResult<ScalarField> {
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    Ok(if is_csv { read_field_csv(path)? } else { load_saliency_png(path)? })
}

fn find_saliency(dir: Option<&Path>, id: &str) -> CliResult<Option<ScalarField>> {
    let Some(dir) = dir else { return Ok(None) };
    for ext in ["png", "csv"] {
        let p = dir.join(format!("{id}.{ext}"));
        if p.exists() {
            return load_saliency(&p).map(Some);
        }
    }
    Ok(None)
}

fn write_records(path: &Path, records: &[ViewRecord]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
    let out_err = |e: csv::Error| CliError::Output(format!("{}: {e}", path.display()));
    w.write_record(["image_id", "view_index", "master_seed", "rng", "stages"]).map_err(out_err)?;
    for r in records {
        let stages = serde_json::to_string(&r.stages).map_err(|e| CliError::Output(e.to_string()))?;
        w.write_record([
            r.image_id.clone(),
            r.view_index.to_string(),
            r.master_seed.to_string(),
            r.rng.clone(),
            stages,
        ])
        .map_err(out_err)?;
    }
    w.flush().map_err(io_err(path))
}

fn augment(args: AugmentArgs) -> CliResult<()> {
    let mut cfg = args.source.load()?;
    apply_overrides(&mut cfg, &args)?;
    let files = list_pngs(&args.input)?;
    fs::create_dir_all(&args.out).map_err(io_err(&args.out))?;
    let records = run_batch(files.len(), args.threads, |i| -> saccade_core::Result<Vec<ViewRecord>> {
        let id = stem(&files[i]);
        let image = load_png(&files[i])?;
        let saliency = find_saliency(args.saliency.as_deref(), &id).map_err(|e| match e {
            CliError::Core(c) => c,
            other => saccade_core::Error::Data(other.to_string()),
        })?;
        let views = generate_views(&image, saliency.as_ref(), &cfg, &id)?;
        for (view, rec) in &views {
            save_png(view, args.out.join(format!("{id}_v{}.png", rec.view_index)))?;
        }
        if args.panel {
            let imgs: Vec<ImageBuffer> = views.iter().map(|(v, _)| v.clone()).collect();
            save_png(&tile_horizontal(&imgs, 4)?, args.out.join(format!("{id}_panel.png")))?;
        }
        Ok(views.into_iter().map(|(_, r)| r).collect())
    })?;
    let records: Vec<ViewRecord> = records.into_iter().flatten().collect();
    log::info!("wrote {} views to {}", records.len(), args.out.display());
    if let Some(path) = &args.records {
        write_records(path, &records)?;
    }
    Ok(())
}

fn sample_fixations(args: SampleFixationsArgs) -> CliResult<()> {
    let sal = load_saliency(&args.saliency)?;
    let spec = SamplerSpec {
        mode: SamplerMode::Saliency { temperature: args.temperature },
        seed: args.seed,
    };
    let (h, w) = sal.shape();
    let points = spec.sample(h, w, Some(&sal), args.n)?;
    let id = stem(&args.saliency);
    let mut out = String::from("image_id,x,y,seed\n");
    for p in points {
        out.push_str(&format!("{id},{},{},{}\n", p.x, p.y, args.seed));
    }
    fs::write(&args.out, out).map_err(io_err(&args.out))
}

fn warp_grid(args: WarpGridArgs) -> CliResult<()> {
    let img_shape = (args.height, args.width);
    let out_shape = (args.out_height.unwrap_or(args.height), args.out_width.unwrap_or(args.width));
    let c = match (args.cover, args.scale) {
        (Some(cover), _) => solve_scale_for_cover(cover, img_shape, out_shape, args.k, args.r_fov)?,
        (None, Some(c)) => c,
        (None, None) => return Err(CliError::Usage("warp-grid needs --cover or --scale".into())),
    };
    let transform = RadialTransform::new(c, args.k, args.r_fov)?;
    let centre = FixationPoint::center(args.height, args.width);
    let fix = FixationPoint::new(args.fx.unwrap_or(centre.x), args.fy.unwrap_or(centre.y));
    let grid = build_grid(fix, &transform, out_shape)?;
    let mut out = String::from("out_i,out_j,src_x,src_y\n");
    for i in 0..out_shape.0 {
        for j in 0..out_shape.1 {
            let [x, y] = grid.at(i, j);
            out.push_str(&format!("{i},{j},{x},{y}\n"));
        }
    }
    fs::write(&args.out, out).map_err(io_err(&args.out))
}

fn fit_retinotopy(args: FitArgs) -> CliResult<()> {
    let points = read_points_csv(&args.points)?;
    let report = fit_report(&points, args.bootstrap, args.seed)?;
    if report.radial.degenerate {
        log::warn!("all points fall on one side of the fitted r_fov; K is not identifiable");
    }
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Output(e.to_string()))?;
    fs::write(&args.out, json).map_err(io_err(&args.out))
}

/// Smooth colourful frame used when `bench` gets no input directory.
fn synthetic_frame(size: usize, phase: f32) -> saccade_core::Result<ImageBuffer> {
    ImageBuffer::from_fn(size, size, 3, |x, y, c| {
        let (u, v) = (x as f32 / size as f32, y as f32 / size as f32);
        0.5 + 0.45 * ((7.0 * u + 3.0 * v + phase + c as f32 * 2.1).sin() * (5.0 * v - 2.0 * u).cos())
    })
}

fn run_bench(args: BenchArgs) -> CliResult<()> {
    let cfg = args.source.load()?;
    let images = match &args.input {
        Some(dir) => list_pngs(dir)?
            .iter()
            .map(|p| {
                let id = stem(p);
                Ok(BenchImage {
                    saliency: find_saliency(args.saliency.as_deref(), &id)?,
                    image: load_png(p)?,
                    id,
                })
            })
            .collect::<CliResult<Vec<_>>>()?,
        None => (0..4)
            .map(|i| {
                Ok(BenchImage {
                    id: format!("synthetic{i}"),
                    image: synthetic_frame(args.size, i as f32)?,
                    saliency: Some(ScalarField::from_fn(args.size, args.size, |x, y| ((x * 31 + y * 17) % 13) as f64 / 13.0)?),
                })
            })
            .collect::<CliResult<Vec<_>>>()?,
    };
    let report = bench(&cfg, &images, Duration::from_millis(args.duration_ms))?;
    let csv = report.to_csv();
    match &args.out {
        Some(path) => fs::write(path, csv).map_err(io_err(path))?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn presets(args: PresetsArgs) -> CliResult<()> {
    if let Some(name) = &args.show {
        println!("{}", preset(name)?.to_json()?);
    } else if args.list {
        for name in preset_names() {
            match preset(&name) {
                Ok(_) => println!("{name}"),
                Err(e) => println!("{name}\t(invalid: {e})"),
            }
        }
    } else {
        return Err(CliError::Usage("presets needs --list or --show NAME".into()));
    }
    Ok(())
}

fn fov_masks(args: FovMasksArgs) -> CliResult<()> {
    let (h, w) = (args.height, args.width);
    let centre = FixationPoint::center(h, w);
    let fix = FixationPoint::new(args.fx.unwrap_or(centre.x), args.fy.unwrap_or(centre.y));
    let e_0 = foveal_radius(args.fov_area, h, w);
    let e_r = args.e_r.unwrap_or_else(|| farthest_corner_distance(fix, h, w));
    let stack = belt_masks((h, w), fix, e_0, e_r, args.n_belts, saccade_core::fovblur::DEFAULT_K_BLUR)?;
    fs::create_dir_all(&args.out).map_err(io_err(&args.out))?;
    for (n, m) in stack.masks.iter().enumerate() {
        write_field_csv(m, args.out.join(format!("mask_{n}.csv")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Augment(a) => augment(a),
        Command::SampleFixations(a) => sample_fixations(a),
        Command::WarpGrid(a) => warp_grid(a),
        Command::FitRetinotopy(a) => fit_retinotopy(a),
        Command::Bench(a) => run_bench(a),
        Command::Presets(a) => presets(a),
        Command::FovMasks(a) => fov_masks(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
