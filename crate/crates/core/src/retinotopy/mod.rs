//! Fits of the linear–quadratic radial model and the classical exponential
//! model to (cortical distance, eccentricity) data.

mod simplex;

use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::view_rng;

pub use simplex::{minimize, SimplexOptions, SimplexResult};

pub const BOOTSTRAP_METHOD: &str = "nonparametric bootstrap, percentile 95% interval";
pub const EXPONENTIAL_FORM: &str = "e = alpha * exp(beta * r), least squares in the original domain";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RetinotopyPoint {
    pub r: f64,
    pub e: f64,
}

/// Fitted radial model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub c: f64,
    pub k: f64,
    pub r_fov: f64,
    pub c_tilde: f64,
    pub k_tilde: f64,
    pub r_squared: f64,
    pub sse: f64,
    pub residuals: Vec<f64>,
    /// All points fall on one side of `r_fov`, so the other branch is unconstrained.
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentialFit {
    pub alpha: f64,
    pub beta: f64,
    pub r_squared: f64,
    pub sse: f64,
}

impl ExponentialFit {
    pub fn predict(&self, r: f64) -> f64 {
        self.alpha * (self.beta * r).exp()
    }
}

/// Candidate starts for the radial fit: foveal radii and `K / r_fov` values.
#[derive(Clone, Debug)]
pub struct InitGrid {
    pub r_fov: Vec<f64>,
    pub k_tilde: Vec<f64>,
}

impl InitGrid {
    /// 40 log-spaced foveal radii in `[0.01, 2] · max r` and 40 values of
    /// `K / r_fov` log-spaced in `1 + K̃ ∈ [0.02, 11]`.
    pub fn for_points(points: &[RetinotopyPoint]) -> Self {
        let rmax = points.iter().map(|p| p.r).fold(0.0, f64::max);
        Self {
            r_fov: log_space(rmax * 0.01, rmax * 2.0, 40),
            k_tilde: log_space(0.02, 11.0, 40).into_iter().map(|v| v - 1.0).collect(),
        }
    }
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

pub fn nondimensionalize(c: f64, k: f64, r_fov: f64) -> Result<(f64, f64)> {
    if !(r_fov > 0.0) || !r_fov.is_finite() {
        return Err(Error::invalid(format!("r_fov must be positive, got {r_fov}")));
    }
    Ok((c / r_fov, k / r_fov))
}

/// The radial model in unit-free form, with `r̃ = r/r_fov`, `C̃ = C/r_fov`
/// and `K̃ = K/r_fov`. Equals `e(r; C, K, r_fov)`.
pub fn ecc_nondimensional(r_tilde: f64, c_tilde: f64, k_tilde: f64) -> f64 {
    let bracket = if r_tilde < 1.0 {
        r_tilde
    } else {
        (r_tilde + k_tilde).powi(2) / (2.0 * (1.0 + k_tilde)) + (1.0 - k_tilde) / 2.0
    };
    bracket / c_tilde
}

/// `1 − SS_res / SS_tot` about the observed mean.
pub fn r_squared(predicted: &[f64], observed: &[f64]) -> Result<f64> {
    if predicted.len() != observed.len() {
        return Err(Error::invalid("predicted and observed lengths differ"));
    }
    if observed.len() < 2 {
        return Err(Error::invalid("r_squared needs at least two observations"));
    }
    let mean = observed.iter().sum::<f64>() / observed.len() as f64;
    let ss_tot: f64 = observed.iter().map(|o| (o - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::invalid("observed values are all equal"));
    }
    let ss_res: f64 = predicted.iter().zip(observed).map(|(p, o)| (p - o).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// `C · e(r)` for the radial model.
#[inline]
fn radial_bracket(r: f64, k: f64, r_fov: f64) -> f64 {
    if r < r_fov {
        r
    } else {
        (r + k) * (r + k) / (2.0 * (r_fov + k)) + (r_fov - k) / 2.0
    }
}

/// Least-squares `1/C` for fixed shape, and the resulting SSE.
fn profile_scale(points: &[RetinotopyPoint], k: f64, r_fov: f64) -> Option<(f64, f64)> {
    let (mut he, mut hh) = (0.0, 0.0);
    for p in points {
        let h = radial_bracket(p.r, k, r_fov);
        he += h * p.e;
        hh += h * h;
    }
    let inv_c = he / hh;
    if !(inv_c > 0.0) || !inv_c.is_finite() {
        return None;
    }
    let sse = points
        .iter()
        .map(|p| (inv_c * radial_bracket(p.r, k, r_fov) - p.e).powi(2))
        .sum();
    Some((inv_c, sse))
}

/// SSE at unconstrained coordinates `θ = (ln r_fov, ln(1 + K̃))`.
fn radial_objective(points: &[RetinotopyPoint], theta: &[f64]) -> f64 {
    let r_fov = theta[0].exp();
    let k = (theta[1].exp() - 1.0) * r_fov;
    if !(r_fov.is_finite() && k.is_finite() && k > -r_fov) {
        return f64::INFINITY;
    }
    profile_scale(points, k, r_fov).map_or(f64::INFINITY, |(_, sse)| sse)
}

fn validate_points(points: &[RetinotopyPoint], needed: usize) -> Result<()> {
    if points.len() < needed {
        return Err(Error::InsufficientData {
            needed,
            got: points.len(),
        });
    }
    for p in points {
        if !p.r.is_finite() || !p.e.is_finite() || p.r < 0.0 || p.e < 0.0 {
            return Err(Error::Data(format!(
                "retinotopy points need finite r >= 0 and e >= 0, got ({}, {})",
                p.r, p.e
            )));
        }
    }
    Ok(())
}

/// SSE at every grid candidate (`INFINITY` where the profiled scale is infeasible).
pub fn grid_sse(points: &[RetinotopyPoint], grid: &InitGrid) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::with_capacity(grid.r_fov.len() * grid.k_tilde.len());
    for &r_fov in &grid.r_fov {
        for &kt in &grid.k_tilde {
            let sse = profile_scale(points, kt * r_fov, r_fov).map_or(f64::INFINITY, |(_, s)| s);
            out.push((r_fov, kt, sse));
        }
    }
    out
}

/// Multi-start fit of `e(r; C, K, r_fov)`: coarse grid over `(r_fov, K̃)` with
/// the optimal `C` in closed form, then simplex descent from the best five starts.
pub fn fit_radial_model(points: &[RetinotopyPoint], grid: &InitGrid) -> Result<FitResult> {
    validate_points(points, 4)?;
    if points.iter().filter(|p| p.r > 0.0).count() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: points.iter().filter(|p| p.r > 0.0).count(),
        });
    }
    let mut starts: Vec<(f64, f64, f64)> = grid_sse(points, grid)
        .into_iter()
        .filter(|s| s.2.is_finite())
        .collect();
    if starts.is_empty() {
        return Err(Error::Data("no feasible start for the radial fit".into()));
    }
    starts.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.total_cmp(&b.0)).then(a.1.total_cmp(&b.1)));

    let opts = SimplexOptions {
        initial_step: 0.05,
        ..SimplexOptions::default()
    };
    let mut best: Option<(f64, f64, f64)> = None;
    for &(r_fov, kt, _) in starts.iter().take(5) {
        let theta0 = [r_fov.ln(), (1.0 + kt).ln()];
        let res = minimize(|th| radial_objective(points, th), &theta0, &opts);
        // Polish from the result with a fresh simplex.
        let res = minimize(|th| radial_objective(points, th), &res.x, &opts);
        let cand = (res.f, res.x[0].exp(), res.x[1].exp() - 1.0);
        best = Some(match best {
            None => cand,
            Some(b) => {
                let ord = cand.0.total_cmp(&b.0).then(cand.1.total_cmp(&b.1)).then(cand.2.total_cmp(&b.2));
                if ord.is_lt() { cand } else { b }
            }
        });
    }
    let (_, r_fov, kt) = best.expect("at least one start");
    let k = kt * r_fov;
    let (inv_c, sse) = profile_scale(points, k, r_fov).ok_or_else(|| Error::Data("radial fit diverged".into()))?;
    let c = 1.0 / inv_c;
    let predicted: Vec<f64> = points.iter().map(|p| radial_bracket(p.r, k, r_fov) / c).collect();
    let observed: Vec<f64> = points.iter().map(|p| p.e).collect();
    let residuals: Vec<f64> = predicted.iter().zip(&observed).map(|(p, o)| o - p).collect();
    let below = points.iter().filter(|p| p.r < r_fov).count();
    let (c_tilde, k_tilde) = nondimensionalize(c, k, r_fov)?;
    Ok(FitResult {
        c,
        k,
        r_fov,
        c_tilde,
        k_tilde,
        r_squared: r_squared(&predicted, &observed)?,
        sse,
        residuals,
        degenerate: below == 0 || below == points.len(),
    })
}

fn exp_profile(points: &[RetinotopyPoint], beta: f64) -> Option<(f64, f64)> {
    let (mut xe, mut xx) = (0.0, 0.0);
    for p in points {
        let x = (beta * p.r).exp();
        xe += x * p.e;
        xx += x * x;
    }
    let alpha = xe / xx;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return None;
    }
    let sse = points
        .iter()
        .map(|p| (alpha * (beta * p.r).exp() - p.e).powi(2))
        .sum();
    Some((alpha, sse))
}

/// Fits `e = α·exp(β·r)` with `α > 0`; the fitted curve therefore never reaches zero.
pub fn fit_exponential(points: &[RetinotopyPoint]) -> Result<ExponentialFit> {
    validate_points(points, 3)?;
    if points.iter().any(|p| p.e <= 0.0) {
        return Err(Error::Data("exponential fit needs every e > 0".into()));
    }
    let rmin = points.iter().map(|p| p.r).fold(f64::INFINITY, f64::min);
    let rmax = points.iter().map(|p| p.r).fold(0.0, f64::max);
    let span = rmax - rmin;
    if !(span > 0.0) {
        return Err(Error::InsufficientData { needed: 2, got: 1 });
    }
    let objective = |b: &[f64]| exp_profile(points, b[0] / span).map_or(f64::INFINITY, |(_, s)| s);
    let mut starts: Vec<(f64, f64)> = (0..=80)
        .map(|i| -10.0 + 0.25 * i as f64)
        .map(|t| (t, objective(&[t])))
        .filter(|s| s.1.is_finite())
        .collect();
    starts.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
    let opts = SimplexOptions {
        initial_step: 0.1,
        ..SimplexOptions::default()
    };
    let mut best: Option<(f64, f64)> = None;
    for &(t, _) in starts.iter().take(5) {
        let res = minimize(objective, &[t], &opts);
        let cand = (res.f, res.x[0]);
        if best.is_none_or(|b| cand.0.total_cmp(&b.0).then(cand.1.total_cmp(&b.1)).is_lt()) {
            best = Some(cand);
        }
    }
    let (_, t) = best.ok_or_else(|| Error::Data("no feasible start for the exponential fit".into()))?;
    let beta = t / span;
    let (alpha, sse) = exp_profile(points, beta).ok_or_else(|| Error::Data("exponential fit diverged".into()))?;
    let predicted: Vec<f64> = points.iter().map(|p| alpha * (beta * p.r).exp()).collect();
    let observed: Vec<f64> = points.iter().map(|p| p.e).collect();
    Ok(ExponentialFit {
        alpha,
        beta,
        r_squared: r_squared(&predicted, &observed)?,
        sse,
    })
}

/// Percentile intervals for the radial-model parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapIntervals {
    pub resamples: usize,
    pub succeeded: usize,
    pub level: f64,
    pub c: [f64; 2],
    pub k: [f64; 2],
    pub r_fov: [f64; 2],
    pub k_tilde: [f64; 2],
}

pub fn bootstrap_intervals(points: &[RetinotopyPoint], resamples: usize, seed: u64) -> Result<BootstrapIntervals> {
    validate_points(points, 4)?;
    let fits: Vec<FitResult> = (0..resamples)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = view_rng(seed, "retinotopy-bootstrap", i as u64);
            let sample: Vec<RetinotopyPoint> = (0..points.len())
                .map(|_| points[rng.random_range(0..points.len())])
                .collect();
            fit_radial_model(&sample, &InitGrid::for_points(&sample)).ok()
        })
        .collect();
    if fits.is_empty() {
        return Err(Error::Data("every bootstrap resample failed to fit".into()));
    }
    let interval = |f: fn(&FitResult) -> f64| {
        let mut v: Vec<f64> = fits.iter().map(f).collect();
        v.sort_by(f64::total_cmp);
        [percentile(&v, 0.025), percentile(&v, 0.975)]
    };
    Ok(BootstrapIntervals {
        resamples,
        succeeded: fits.len(),
        level: 0.95,
        c: interval(|f| f.c),
        k: interval(|f| f.k),
        r_fov: interval(|f| f.r_fov),
        k_tilde: interval(|f| f.k_tilde),
    })
}

/// Linear-interpolated percentile of sorted data.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub ci_method: String,
    pub exponential_form: String,
    pub points: usize,
}

/// Everything `fit-retinotopy` writes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RetinotopyReport {
    pub radial: FitResult,
    pub exponential: Option<ExponentialFit>,
    pub bootstrap: Option<BootstrapIntervals>,
    pub metadata: ReportMetadata,
}

pub fn fit_report(points: &[RetinotopyPoint], resamples: usize, seed: u64) -> Result<RetinotopyReport> {
    let radial = fit_radial_model(points, &InitGrid::for_points(points))?;
    let exponential = if points.iter().all(|p| p.e > 0.0) {
        Some(fit_exponential(points)?)
    } else {
        None
    };
    let bootstrap = if resamples > 0 {
        Some(bootstrap_intervals(points, resamples, seed)?)
    } else {
        None
    };
    Ok(RetinotopyReport {
        radial,
        exponential,
        bootstrap,
        metadata: ReportMetadata {
            ci_method: format!("{BOOTSTRAP_METHOD}, {resamples} resamples, seed {seed}"),
            exponential_form: EXPONENTIAL_FORM.into(),
            points: points.len(),
        },
    })
}

/// Reads a CSV with header `r,e`.
pub fn read_points_csv(path: impl AsRef<Path>) -> Result<Vec<RetinotopyPoint>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_points_csv(file)
}

pub fn parse_points_csv<R: std::io::Read>(reader: R) -> Result<Vec<RetinotopyPoint>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Data(e.to_string()))?.clone();
    if headers.len() != 2 || &headers[0] != "r" || &headers[1] != "e" {
        return Err(Error::Data(format!("expected header `r,e`, got `{}`", headers.iter().collect::<Vec<_>>().join(","))));
    }
    rdr.deserialize()
        .map(|rec| rec.map_err(|e| Error::Data(e.to_string())))
        .collect()
}
