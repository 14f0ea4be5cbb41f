//! Inverse response estimation from irradiance/intensity correspondences.

mod io;
mod synth;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::autoencoder::{CurveDomain, SlrModel};
use crate::curves::{invert, ResponseCurve, SampleGrid, DEFAULT_SAMPLES};
use crate::error::{Error, Result};
use crate::models::{EmorBasis, Family, GAMMA_MAX, GAMMA_MIN};
use crate::optim::{grid_then_golden, GridGolden, NelderMead};

pub use io::{parse_observations_csv, write_observations_csv};
pub use synth::synth_observations;

/// Latent search interval for the autoencoder family.
pub const LATENT_RANGE: (f64, f64) = (-4.0, 4.0);
/// Nelder–Mead evaluation cap for multi-parameter families.
pub const NM_MAX_EVALUATIONS: usize = 5000;
pub const NM_TOLERANCE: f64 = 1e-10;

/// One corresponding patch: scene irradiance and recorded intensity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub irradiance: f64,
    pub intensity: f64,
    /// Exposure multiplier the pair was recorded at.
    pub exposure: f64,
}

impl Observation {
    pub fn new(irradiance: f64, intensity: f64) -> Result<Self> {
        Self::with_exposure(irradiance, intensity, 1.0)
    }

    pub fn with_exposure(irradiance: f64, intensity: f64, exposure: f64) -> Result<Self> {
        for v in [irradiance, intensity] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(v));
            }
        }
        if !(exposure > 0.0 && exposure.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "exposure must be positive, got {exposure}"
            )));
        }
        Ok(Self {
            irradiance,
            intensity,
            exposure,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Channel {
    R,
    G,
    B,
    #[default]
    #[serde(rename = "mono")]
    Mono,
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Channel::R => "R",
            Channel::G => "G",
            Channel::B => "B",
            Channel::Mono => "mono",
        })
    }
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "R" | "r" => Ok(Channel::R),
            "G" | "g" => Ok(Channel::G),
            "B" | "b" => Ok(Channel::B),
            "mono" | "Mono" | "MONO" => Ok(Channel::Mono),
            other => Err(Error::InvalidArgument(format!("unknown channel '{other}'"))),
        }
    }
}

/// Correspondences for one camera and channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSet {
    pub camera_id: String,
    pub channel: Channel,
    pub observations: Vec<Observation>,
}

impl ObservationSet {
    pub fn new(camera_id: impl Into<String>, channel: Channel, observations: Vec<Observation>) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::InvalidArgument("observation set is empty".into()));
        }
        Ok(Self {
            camera_id: camera_id.into(),
            channel,
            observations,
        })
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// True when every intensity is the same value.
    pub fn is_degenerate(&self) -> bool {
        let first = self.observations[0].intensity;
        self.observations.iter().all(|o| o.intensity == first)
    }
}

/// Model family used for calibration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Slr,
    Classic(Family),
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Slr => f.write_str("slr"),
            Method::Classic(family) => family.fmt(f),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "slr" {
            Ok(Method::Slr)
        } else {
            Ok(Method::Classic(s.parse()?))
        }
    }
}

/// Models a calibration may need.
#[derive(Debug, Clone, Default)]
pub struct CalibrationContext<'a> {
    pub slr: Option<&'a SlrModel>,
    /// Basis of inverse responses for the EMoR family.
    pub emor: Option<Arc<EmorBasis>>,
    /// Samples of the produced inverse curve; defaults to 1024.
    pub samples: Option<usize>,
}

/// A calibrated inverse response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub camera_id: String,
    pub channel: Channel,
    pub family: String,
    /// Latent `z`, forward `gamma`, or the inverse-mapping coefficients.
    pub parameters: Vec<f64>,
    pub objective: f64,
    pub evaluations: usize,
    pub converged: bool,
    /// Every intensity was equal, so the data cannot identify a curve.
    pub ill_posed: bool,
    pub observations: usize,
    pub wall_time_ms: f64,
    pub inverse_curve: ResponseCurve,
}

impl CalibrationResult {
    pub fn wall_time(&self) -> Duration {
        Duration::from_secs_f64(self.wall_time_ms / 1e3)
    }
}

/// Mean squared error of `g(intensity)` against irradiance.
pub fn objective(obs: &ObservationSet, g: impl Fn(f64) -> f64) -> f64 {
    let n = obs.observations.len() as f64;
    let total: f64 = obs
        .observations
        .iter()
        .map(|o| {
            let d = g(o.intensity) - o.irradiance;
            d * d
        })
        .sum();
    let value = total / n;
    if value.is_nan() {
        f64::INFINITY
    } else {
        value
    }
}

fn curve_objective(obs: &ObservationSet, curve: &ResponseCurve) -> f64 {
    objective(obs, |x| curve.evaluate(x).unwrap_or(f64::NAN))
}

fn horner(coefficients: &[f64], x: f64) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Inverse mapping of the polynomial family with `g(1) = 1`: free
/// coefficients `w_1..w_{M-1}`, `w_M = 1 - sum`.
fn constrained_polynomial(free: &[f64]) -> Vec<f64> {
    let mut w = free.to_vec();
    w.push(1.0 - free.iter().sum::<f64>());
    w
}

fn polynomial_value(w: &[f64], x: f64) -> f64 {
    x * horner(w, x)
}

fn ggcm_inverse_value(w: &[f64], x: f64) -> f64 {
    if x <= 0.0 {
        return if w[0] > 0.0 { 0.0 } else { f64::INFINITY };
    }
    x.powf(horner(w, x))
}

fn sampled_curve(n: usize, g: impl Fn(f64) -> f64) -> Result<ResponseCurve> {
    let grid = SampleGrid::new(n)?;
    let raw: Vec<f64> = grid.positions().map(g).collect();
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("calibrated inverse curve".into()));
    }
    ResponseCurve::normalize(&raw)
}

struct Solved {
    parameters: Vec<f64>,
    objective: f64,
    evaluations: usize,
    converged: bool,
    curve: ResponseCurve,
}

fn slr_inverse(model: &SlrModel, z: f64) -> Result<ResponseCurve> {
    let decoded = model.decode(&[z])?;
    Ok(match model.domain() {
        CurveDomain::Forward => invert(&decoded),
        CurveDomain::Inverse => decoded,
    })
}

fn solve_slr(obs: &ObservationSet, model: &SlrModel) -> Result<Solved> {
    if model.arch().latent_dim != 1 {
        return Err(Error::InvalidArgument(
            "calibration needs a single-latent autoencoder".into(),
        ));
    }
    let (lo, hi) = LATENT_RANGE;
    let found = grid_then_golden(
        |z| match slr_inverse(model, z) {
            Ok(curve) => curve_objective(obs, &curve),
            Err(_) => f64::INFINITY,
        },
        lo,
        hi,
        GridGolden::default(),
    );
    let z = found.x[0];
    Ok(Solved {
        parameters: vec![z],
        objective: found.value,
        evaluations: found.evaluations,
        converged: found.value.is_finite(),
        curve: slr_inverse(model, z)?,
    })
}

fn solve_gamma(obs: &ObservationSet, n: usize) -> Result<Solved> {
    let found = grid_then_golden(
        |lg| {
            let inv = 1.0 / lg.exp();
            objective(obs, |x| x.powf(inv))
        },
        GAMMA_MIN.ln(),
        GAMMA_MAX.ln(),
        GridGolden::default(),
    );
    let gamma = found.x[0].exp();
    Ok(Solved {
        parameters: vec![gamma],
        objective: found.value,
        evaluations: found.evaluations,
        converged: true,
        curve: sampled_curve(n, |x| x.powf(1.0 / gamma))?,
    })
}

fn nelder_mead(f: impl FnMut(&[f64]) -> f64, start: &[f64]) -> (Vec<f64>, f64, usize, bool) {
    let solver = NelderMead {
        tol: NM_TOLERANCE,
        max_iterations: usize::MAX,
        max_evaluations: NM_MAX_EVALUATIONS,
        ..NelderMead::default()
    };
    match solver.minimize(f, start) {
        Ok(m) => (m.x, m.value, m.evaluations, true),
        Err(Error::NotConverged {
            best_params,
            best_value,
            ..
        }) => (best_params, best_value, NM_MAX_EVALUATIONS, false),
        Err(_) => unreachable!("Nelder–Mead only fails by budget"),
    }
}

fn solve_polynomial(obs: &ObservationSet, order: usize, n: usize) -> Result<Solved> {
    if order == 0 {
        return Err(Error::InvalidArgument("polynomial order must be at least 1".into()));
    }
    if order == 1 {
        let value = objective(obs, |x| x);
        return Ok(Solved {
            parameters: vec![1.0],
            objective: value,
            evaluations: 1,
            converged: true,
            curve: ResponseCurve::identity(n)?,
        });
    }
    let mut start = vec![0.0; order - 1];
    start[0] = 1.0;
    let (free, value, evaluations, converged) = nelder_mead(
        |p| {
            let w = constrained_polynomial(p);
            objective(obs, |x| polynomial_value(&w, x))
        },
        &start,
    );
    let w = constrained_polynomial(&free);
    Ok(Solved {
        curve: sampled_curve(n, |x| polynomial_value(&w, x))?,
        parameters: w,
        objective: value,
        evaluations,
        converged,
    })
}

fn solve_ggcm(obs: &ObservationSet, terms: usize, n: usize) -> Result<Solved> {
    if terms == 0 {
        return Err(Error::InvalidArgument("GGCM needs at least one coefficient".into()));
    }
    let mut start = vec![0.0; terms];
    start[0] = 1.0;
    let (w, value, evaluations, converged) = nelder_mead(|p| objective(obs, |x| ggcm_inverse_value(p, x)), &start);
    Ok(Solved {
        curve: sampled_curve(n, |x| if x > 0.0 { ggcm_inverse_value(&w, x) } else { 0.0 })?,
        parameters: w,
        objective: value,
        evaluations,
        converged,
    })
}

fn solve_emor(obs: &ObservationSet, basis: &EmorBasis, k: usize) -> Result<Solved> {
    if k == 0 || k > basis.rank() {
        return Err(Error::InvalidArgument(format!(
            "EMoR needs 1..={} components, got {k}",
            basis.rank()
        )));
    }
    let to_curve = |c: &[f64]| -> Option<ResponseCurve> {
        let raw = basis.combine(c);
        ResponseCurve::normalize(&raw).ok()
    };
    let (c, value, evaluations, converged) = nelder_mead(
        |c| match to_curve(c) {
            Some(curve) => curve_objective(obs, &curve),
            None => f64::INFINITY,
        },
        &vec![0.0; k],
    );
    let curve = to_curve(&c).ok_or(Error::DegenerateCurve(0.0))?;
    Ok(Solved {
        parameters: c,
        objective: value,
        evaluations,
        converged,
        curve,
    })
}

/// Calibrates the inverse response of `obs` with `method`, minimizing
/// `mean (g(intensity) - irradiance)^2`.
///
/// The autoencoder and gamma families search one variable (latent `z` on
/// `[-4, 4]`, `log gamma`) with a 64-point grid and golden-section
/// refinement; the polynomial, GGCM and EMoR families fit the inverse
/// mapping directly with Nelder–Mead from identity-like parameters.
pub fn calibrate(obs: &ObservationSet, method: Method, context: &CalibrationContext<'_>) -> Result<CalibrationResult> {
    if obs.observations.is_empty() {
        return Err(Error::InvalidArgument("observation set is empty".into()));
    }
    let n = context.samples.unwrap_or(DEFAULT_SAMPLES);
    let start = Instant::now();
    let solved = match method {
        Method::Slr => {
            let model = context
                .slr
                .ok_or_else(|| Error::InvalidArgument("autoencoder calibration needs trained weights".into()))?;
            solve_slr(obs, model)?
        }
        Method::Classic(Family::Gamma) => solve_gamma(obs, n)?,
        Method::Classic(Family::Polynomial(m)) => solve_polynomial(obs, m, n)?,
        Method::Classic(Family::Ggcm(m)) => solve_ggcm(obs, m, n)?,
        Method::Classic(Family::Emor(k)) => {
            let basis = context
                .emor
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument("EMoR calibration needs a basis".into()))?;
            solve_emor(obs, basis, k)?
        }
    };
    let ill_posed = obs.is_degenerate();
    if ill_posed {
        log::warn!(
            "{}/{}: all intensities are equal; the calibration is ill-posed",
            obs.camera_id,
            obs.channel
        );
    }
    Ok(CalibrationResult {
        camera_id: obs.camera_id.clone(),
        channel: obs.channel,
        family: method.to_string(),
        parameters: solved.parameters,
        objective: solved.objective,
        evaluations: solved.evaluations,
        converged: solved.converged,
        ill_posed,
        observations: obs.observations.len(),
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        inverse_curve: solved.curve,
    })
}

/// Summed per-sample population variance across `curves`.
pub fn stability(curves: &[ResponseCurve]) -> Result<f64> {
    if curves.len() < 2 {
        return Err(Error::InvalidArgument("stability needs at least 2 curves".into()));
    }
    let n = curves[0].len();
    if let Some(c) = curves.iter().find(|c| c.len() != n) {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: c.len(),
        });
    }
    let m = curves.len() as f64;
    Ok((0..n)
        .map(|i| {
            // deviations from the first curve keep identical inputs exact
            let pivot = curves[0].samples()[i];
            let mean = curves.iter().map(|c| c.samples()[i] - pivot).sum::<f64>() / m;
            curves
                .iter()
                .map(|c| (c.samples()[i] - pivot - mean).powi(2))
                .sum::<f64>()
                / m
        })
        .sum())
}

/// Inverse RMSE against a known inverse curve; the calibrated curve is
/// resampled onto the truth's grid when the lengths differ.
pub fn rmse_vs_truth(result: &CalibrationResult, truth: &ResponseCurve) -> Result<f64> {
    if result.inverse_curve.len() == truth.len() {
        crate::bench::rmse(result.inverse_curve.samples(), truth.samples())
    } else {
        let resampled = result.inverse_curve.resample(truth.len())?;
        crate::bench::rmse(resampled.samples(), truth.samples())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autoencoder::{train, ArchSpec, TrainConfig};
    use crate::curves::surrogate;
    use proptest::prelude::*;

    fn gamma_observations(gamma: f64, n: usize) -> ObservationSet {
        let truth = ResponseCurve::from_fn(1024, |x| x.powf(gamma)).unwrap();
        synth_observations(&truth, n, 0.0, &[1.0], 3).unwrap()
    }

    #[test]
    fn gamma_recovered_noiseless() {
        let obs = gamma_observations(2.0, 24);
        let r = calibrate(&obs, Method::Classic(Family::Gamma), &CalibrationContext::default()).unwrap();
        let truth = ResponseCurve::from_fn(1024, |x| x.sqrt()).unwrap();
        assert!(rmse_vs_truth(&r, &truth).unwrap() <= 1e-3);
        assert!((r.parameters[0] - 2.0).abs() < 1e-3);
        assert!(r.evaluations <= 164);
    }

    #[test]
    fn gamma_beats_every_grid_probe() {
        let obs = gamma_observations(1.7, 12);
        let r = calibrate(&obs, Method::Classic(Family::Gamma), &CalibrationContext::default()).unwrap();
        let (lo, hi) = (0.05f64.ln(), 20f64.ln());
        for i in 0..64 {
            let lg = lo + (hi - lo) * i as f64 / 63.0;
            let inv = 1.0 / lg.exp();
            assert!(r.objective <= objective(&obs, |x| x.powf(inv)));
        }
    }

    #[test]
    fn nelder_mead_families_in_family_noiseless() {
        let grid_truth = ResponseCurve::from_fn(1024, |x| x.powf(0.5)).unwrap();
        let forward = invert(&grid_truth);
        let obs = synth_observations(&forward, 24, 0.0, &[0.25, 0.5, 1.0, 2.0], 9).unwrap();
        let ctx = CalibrationContext::default();
        // x^0.5 is GGCM with one coefficient
        let r = calibrate(&obs, Method::Classic(Family::Ggcm(1)), &ctx).unwrap();
        assert!(rmse_vs_truth(&r, &grid_truth).unwrap() <= 1e-2, "{r:?}");
        // a cubic with g(1) = 1
        let w = [0.4, 0.9, -0.3];
        let poly_truth = ResponseCurve::from_fn(1024, |x| x * (w[0] + x * (w[1] + x * w[2]))).unwrap();
        let obs = synth_observations(&invert(&poly_truth), 24, 0.0, &[0.25, 0.5, 1.0, 2.0], 9).unwrap();
        let r = calibrate(&obs, Method::Classic(Family::Polynomial(3)), &ctx).unwrap();
        assert!(rmse_vs_truth(&r, &poly_truth).unwrap() <= 1e-2, "{r:?}");
        assert!(r.evaluations <= NM_MAX_EVALUATIONS);
    }

    #[test]
    fn emor_in_family() {
        let curves: Vec<ResponseCurve> = surrogate::generate(30, 256, 4).unwrap().iter().map(invert).collect();
        let basis = Arc::new(EmorBasis::build(&curves, 3).unwrap());
        let truth = ResponseCurve::normalize(&basis.combine(&[0.5, -0.2, 0.1])).unwrap();
        let obs = synth_observations(&invert(&truth), 24, 0.0, &[0.5, 1.0], 2).unwrap();
        let ctx = CalibrationContext {
            emor: Some(basis),
            samples: Some(256),
            ..Default::default()
        };
        let r = calibrate(&obs, Method::Classic(Family::Emor(3)), &ctx).unwrap();
        assert!(rmse_vs_truth(&r, &truth).unwrap() <= 1e-2);
        assert!(calibrate(&obs, Method::Classic(Family::Emor(3)), &CalibrationContext::default()).is_err());
    }

    #[test]
    fn single_zero_observation_is_ill_posed() {
        let obs = ObservationSet::new("cam", Channel::Mono, vec![Observation::new(0.0, 0.0).unwrap()]).unwrap();
        for method in [Method::Classic(Family::Gamma), Method::Classic(Family::Polynomial(3))] {
            let r = calibrate(&obs, method, &CalibrationContext::default()).unwrap();
            assert_eq!(r.objective, 0.0);
            assert!(r.ill_posed);
        }
    }

    #[test]
    fn missing_inputs() {
        assert!(ObservationSet::new("cam", Channel::R, vec![]).is_err());
        let obs = gamma_observations(2.0, 3);
        assert!(calibrate(&obs, Method::Slr, &CalibrationContext::default()).is_err());
    }

    #[test]
    fn slr_budget_and_grid_bound() {
        let curves = surrogate::generate(8, 64, 5).unwrap();
        let arch = ArchSpec::new(vec![6]).unwrap().with_input_size(64);
        let (model, _) = train(
            &curves,
            &arch,
            &TrainConfig {
                epochs: 100,
                ..Default::default()
            },
        )
        .unwrap();
        let obs = synth_observations(&curves[3], 12, 0.01, &[0.5, 1.0], 1).unwrap();
        let ctx = CalibrationContext {
            slr: Some(&model),
            samples: Some(64),
            ..Default::default()
        };
        let r = calibrate(&obs, Method::Slr, &ctx).unwrap();
        assert!(r.evaluations <= 164);
        for i in 0..64 {
            let z = -4.0 + 8.0 * i as f64 / 63.0;
            let g = invert(&model.decode(&[z]).unwrap());
            assert!(r.objective <= curve_objective(&obs, &g));
        }
        assert_eq!(r.inverse_curve.len(), 64);
    }

    #[test]
    fn stability_examples() {
        let a = ResponseCurve::from_fn(1024, |x| x * x).unwrap();
        assert_eq!(stability(&[a.clone(), a.clone(), a.clone()]).unwrap(), 0.0);
        let mut shifted = a.samples().to_vec();
        for v in &mut shifted[1..1023] {
            *v += 0.1;
        }
        let b = ResponseCurve::from_normalized(shifted.iter().map(|v| v.min(1.0)).collect()).unwrap();
        let expected: f64 = a
            .samples()
            .iter()
            .zip(b.samples())
            .map(|(x, y)| ((x - y) / 2.0).powi(2))
            .sum();
        assert!((stability(&[a.clone(), b.clone()]).unwrap() - expected).abs() < 1e-12);
        assert!(stability(std::slice::from_ref(&a)).is_err());
        assert!(stability(&[a, ResponseCurve::identity(10).unwrap()]).is_err());
    }

    #[test]
    fn stability_constant_offset() {
        // interior samples 0.4 and 0.5: population variance 0.0025 each
        let n = 1024;
        let mut lo = vec![0.4; n];
        let mut hi = vec![0.5; n];
        lo[0] = 0.0;
        hi[0] = 0.0;
        lo[n - 1] = 1.0;
        hi[n - 1] = 1.0;
        let s = stability(&[
            ResponseCurve::from_normalized(lo).unwrap(),
            ResponseCurve::from_normalized(hi).unwrap(),
        ])
        .unwrap();
        assert!((s - (n - 2) as f64 * 0.0025).abs() < 1e-9);
    }

    #[test]
    fn rmse_vs_truth_cases() {
        let obs = gamma_observations(2.0, 6);
        let r = calibrate(&obs, Method::Classic(Family::Gamma), &CalibrationContext::default()).unwrap();
        assert_eq!(rmse_vs_truth(&r, &r.inverse_curve.clone()).unwrap(), 0.0);
        let mut off = r.inverse_curve.samples().to_vec();
        for v in &mut off[1..1023] {
            *v = (*v - 0.1).max(0.0);
        }
        let shifted = ResponseCurve::from_normalized(off).unwrap();
        let oracle = crate::bench::rmse(r.inverse_curve.samples(), shifted.samples()).unwrap();
        assert_eq!(rmse_vs_truth(&r, &shifted).unwrap(), oracle);
        assert!((oracle - 0.1).abs() < 0.01);
    }

    #[test]
    fn more_patches_do_not_hurt_median() {
        let truth_curves = surrogate::generate(20, 1024, 77).unwrap();
        let ctx = CalibrationContext::default();
        let median = |patches: usize| {
            let mut errs: Vec<f64> = truth_curves
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let obs = synth_observations(c, patches, 0.01, &[1.0], i as u64).unwrap();
                    let r = calibrate(&obs, Method::Classic(Family::Polynomial(3)), &ctx).unwrap();
                    rmse_vs_truth(&r, &invert(c)).unwrap()
                })
                .collect();
            errs.sort_by(f64::total_cmp);
            (errs[9] + errs[10]) / 2.0
        };
        assert!(median(24) <= median(3));
    }

    proptest! {
        #[test]
        fn stability_permutation_and_scaling(seed in any::<u64>(), k in 0.1f64..0.9) {
            let curves = surrogate::generate(4, 32, seed).unwrap();
            let mut rev = curves.clone();
            rev.reverse();
            let s = stability(&curves).unwrap();
            prop_assert!((s - stability(&rev).unwrap()).abs() < 1e-12);
            // shrink deviations from the first curve by k
            let base = curves[0].clone();
            let scaled: Vec<ResponseCurve> = curves
                .iter()
                .map(|c| base.blend(c, 1.0 - k).unwrap())
                .collect();
            prop_assert!((stability(&scaled).unwrap() - k * k * s).abs() < 1e-9);
        }
    }
}
