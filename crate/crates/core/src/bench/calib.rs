use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::Table;
use super::stats::{summarize, SummaryStats};
use crate::autoencoder::SlrModel;
use crate::calibration::{calibrate, rmse_vs_truth, stability, synth_observations, CalibrationContext, Method};
use crate::curves::{invert, ResponseCurve};
use crate::error::{Error, Result};
use crate::models::EmorBasis;

/// A synthetic camera: a known forward response.
#[derive(Debug, Clone, PartialEq)]
pub struct Camera {
    pub id: String,
    pub response: ResponseCurve,
}

/// `cameras` evenly spaced indices into a corpus of `count` curves.
pub fn holdout_indices(count: usize, cameras: usize) -> Vec<usize> {
    let cameras = cameras.min(count);
    (0..cameras).map(|k| ((2 * k + 1) * count) / (2 * cameras)).collect()
}

/// Cameras built from the held-out curves of a corpus.
pub fn camera_suite(curves: &[ResponseCurve], cameras: usize) -> Vec<Camera> {
    holdout_indices(curves.len(), cameras)
        .into_iter()
        .map(|i| Camera {
            id: curves[i].id().to_string(),
            response: curves[i].clone(),
        })
        .collect()
}

/// A labelled calibration method with the models it needs.
#[derive(Debug, Clone)]
pub struct BenchMethod<'a> {
    pub label: String,
    pub method: Method,
    pub slr: Option<&'a SlrModel>,
    pub emor: Option<Arc<EmorBasis>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBenchConfig {
    pub noccps: Vec<usize>,
    pub noise_sigma: f64,
    pub exposures: Vec<f64>,
    pub seeds: Vec<u64>,
    pub samples: usize,
}

impl Default for CalibrationBenchConfig {
    fn default() -> Self {
        Self {
            noccps: vec![3, 6, 12, 24],
            noise_sigma: 0.01,
            exposures: vec![0.25, 0.5, 1.0, 2.0],
            seeds: vec![0],
            samples: crate::curves::DEFAULT_SAMPLES,
        }
    }
}

/// Observation seed for one (seed, camera, patch count) triple; shared by
/// every method so they see identical data.
pub fn observation_seed(seed: u64, camera: usize, noccp: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((camera as u64) << 20)
        .wrapping_add(noccp as u64)
}

/// Results of one method on one camera.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraOutcome {
    pub camera_id: String,
    /// Mean inverse RMSE over seeds and patch counts.
    pub rmse: Option<f64>,
    /// Mean inverse RMSE per patch count, in `noccps` order.
    pub rmse_by_noccp: Vec<f64>,
    /// Mean (over seeds) summed variance across the patch-count curves.
    pub stability: Option<f64>,
    pub evaluations_mean: f64,
    pub evaluations_max: usize,
    pub failures: Vec<String>,
    /// Calibrated inverse curves of the first seed, in `noccps` order.
    #[serde(skip)]
    pub curves: Vec<ResponseCurve>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub label: String,
    pub cameras: Vec<CameraOutcome>,
    pub summary: Option<SummaryStats>,
    pub stability_mean: Option<f64>,
    pub evaluations_mean: f64,
    pub failures: usize,
}

fn run_camera(
    index: usize,
    camera: &Camera,
    method: &BenchMethod<'_>,
    config: &CalibrationBenchConfig,
) -> CameraOutcome {
    let truth = invert(&camera.response);
    let context = CalibrationContext {
        slr: method.slr,
        emor: method.emor.clone(),
        samples: Some(config.samples),
    };
    let mut per_noccp = vec![Vec::new(); config.noccps.len()];
    let mut stabilities = Vec::new();
    let mut evaluations = Vec::new();
    let mut failures = Vec::new();
    let mut first_curves = Vec::new();
    for (si, &seed) in config.seeds.iter().enumerate() {
        let mut curves = Vec::with_capacity(config.noccps.len());
        for (ni, &noccp) in config.noccps.iter().enumerate() {
            let attempt = synth_observations(
                &camera.response,
                noccp,
                config.noise_sigma,
                &config.exposures,
                observation_seed(seed, index, noccp),
            )
            .and_then(|obs| calibrate(&obs, method.method, &context))
            .and_then(|r| {
                let e = rmse_vs_truth(&r, &truth)?;
                Ok((r, e))
            });
            match attempt {
                Ok((r, e)) => {
                    per_noccp[ni].push(e);
                    evaluations.push(r.evaluations);
                    curves.push(r.inverse_curve);
                }
                Err(e) => failures.push(format!("seed {seed} noccp {noccp}: {e}")),
            }
        }
        if curves.len() == config.noccps.len() && curves.len() >= 2 {
            if let Ok(s) = stability(&curves) {
                stabilities.push(s);
            }
        }
        if si == 0 {
            first_curves = curves;
        }
    }
    let mean = |v: &[f64]| {
        if v.is_empty() {
            None
        } else {
            Some(v.iter().sum::<f64>() / v.len() as f64)
        }
    };
    let all: Vec<f64> = per_noccp.iter().flatten().copied().collect();
    CameraOutcome {
        camera_id: camera.id.clone(),
        rmse: mean(&all),
        rmse_by_noccp: per_noccp.iter().map(|v| mean(v).unwrap_or(f64::NAN)).collect(),
        stability: mean(&stabilities),
        evaluations_mean: if evaluations.is_empty() {
            0.0
        } else {
            evaluations.iter().sum::<usize>() as f64 / evaluations.len() as f64
        },
        evaluations_max: evaluations.iter().copied().max().unwrap_or(0),
        failures,
        curves: first_curves,
    }
}

/// Calibrates every camera with every method at every patch count and
/// seed. Per-camera errors are averaged into the result vector `h` and
/// summarized; failures are recorded, not fatal.
pub fn run_calibration_bench(
    cameras: &[Camera],
    methods: &[BenchMethod<'_>],
    config: &CalibrationBenchConfig,
) -> Result<Vec<MethodOutcome>> {
    if cameras.is_empty() || methods.is_empty() {
        return Err(Error::InvalidArgument("need at least one camera and one method".into()));
    }
    if config.noccps.is_empty() || config.seeds.is_empty() {
        return Err(Error::InvalidArgument(
            "need at least one patch count and one seed".into(),
        ));
    }
    methods
        .iter()
        .map(|method| {
            let start = Instant::now();
            let outcomes: Vec<CameraOutcome> = cameras
                .par_iter()
                .enumerate()
                .map(|(i, cam)| run_camera(i, cam, method, config))
                .collect();
            let elapsed: Duration = start.elapsed();
            let h: Vec<f64> = outcomes.iter().filter_map(|c| c.rmse).collect();
            let st: Vec<f64> = outcomes.iter().filter_map(|c| c.stability).collect();
            Ok(MethodOutcome {
                label: method.label.clone(),
                summary: if h.is_empty() {
                    None
                } else {
                    Some(summarize(&h, elapsed)?)
                },
                stability_mean: if st.is_empty() {
                    None
                } else {
                    Some(st.iter().sum::<f64>() / st.len() as f64)
                },
                evaluations_mean: outcomes.iter().map(|c| c.evaluations_mean).sum::<f64>() / outcomes.len() as f64,
                failures: outcomes.iter().map(|c| c.failures.len()).sum(),
                cameras: outcomes,
            })
        })
        .collect()
}

/// Summary row per method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub method: String,
    pub cameras: usize,
    pub mean: Option<f64>,
    pub median: Option<f64>,
    pub sd: Option<f64>,
    pub max: Option<f64>,
    pub p95: Option<f64>,
    pub stability: Option<f64>,
    pub evaluations_mean: f64,
    pub failures: usize,
    pub time_ms: f64,
}

impl Table for CalibrationRow {
    const HEADER: &'static [&'static str] = &[
        "method",
        "cameras",
        "mean",
        "median",
        "sd",
        "max",
        "p95",
        "stability",
        "evaluations_mean",
        "failures",
        "time_ms",
    ];
}

/// Detail row per method and camera.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraRow {
    pub method: String,
    pub camera_id: String,
    pub rmse: Option<f64>,
    pub stability: Option<f64>,
    pub evaluations_mean: f64,
    pub evaluations_max: usize,
    pub failures: usize,
}

impl Table for CameraRow {
    const HEADER: &'static [&'static str] = &[
        "method",
        "camera_id",
        "rmse",
        "stability",
        "evaluations_mean",
        "evaluations_max",
        "failures",
    ];
}

impl MethodOutcome {
    pub fn mean(&self) -> Option<f64> {
        self.summary.map(|s| s.mean)
    }

    pub fn row(&self) -> CalibrationRow {
        let s = self.summary;
        CalibrationRow {
            method: self.label.clone(),
            cameras: self.cameras.len(),
            mean: s.map(|s| s.mean),
            median: s.map(|s| s.median),
            sd: s.map(|s| s.sd),
            max: s.map(|s| s.max),
            p95: s.map(|s| s.p95),
            stability: self.stability_mean,
            evaluations_mean: self.evaluations_mean,
            failures: self.failures,
            time_ms: s.map(|s| s.time_ms).unwrap_or(0.0),
        }
    }

    pub fn camera_rows(&self) -> Vec<CameraRow> {
        self.cameras
            .iter()
            .map(|c| CameraRow {
                method: self.label.clone(),
                camera_id: c.camera_id.clone(),
                rmse: c.rmse,
                stability: c.stability,
                evaluations_mean: c.evaluations_mean,
                evaluations_max: c.evaluations_max,
                failures: c.failures.len(),
            })
            .collect()
    }
}
