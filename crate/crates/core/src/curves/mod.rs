//! Response curves sampled on a uniform grid over `[0, 1]`.
//!
//! A [`ResponseCurve`] stores `N` samples at positions `u_i = i / (N - 1)`
//! (zero-based), so both endpoints `(0, 0)` and `(1, 1)` sit on the grid.

mod dorf;
mod isotonic;
pub mod surrogate;

pub use dorf::{parse_curve_csv, parse_dorf, parse_dorf_sized, write_curve_csv, write_dorf};
pub use isotonic::pool_adjacent_violators;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Default number of samples per curve.
pub const DEFAULT_SAMPLES: usize = 1024;

/// Endpoint tolerance used when validating already-normalized samples.
const ENDPOINT_TOL: f64 = 1e-9;

/// Tie-breaking slope used by [`invert`] to make flat runs strictly increasing.
const TIE_EPSILON: f64 = 1e-9;

/// Uniform sampling grid with `n` points from 0 to 1 inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleGrid {
    n: usize,
}

impl SampleGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewSamples(n));
        }
        Ok(Self { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        1.0 / (self.n - 1) as f64
    }

    /// Position of zero-based sample `i`.
    pub fn position(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            1.0
        } else {
            i as f64 / (self.n - 1) as f64
        }
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.position(i))
    }
}

/// A camera response function sampled on a [`SampleGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseCurve {
    id: String,
    samples: Vec<f64>,
}

impl ResponseCurve {
    /// Affinely maps `raw` so the first sample becomes 0 and the last 1,
    /// then clamps to `[0, 1]`.
    pub fn normalize(raw: &[f64]) -> Result<Self> {
        if raw.len() < 2 {
            return Err(Error::TooFewSamples(raw.len()));
        }
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("curve samples".into()));
        }
        let first = raw[0];
        let last = raw[raw.len() - 1];
        let span = last - first;
        if span == 0.0 {
            return Err(Error::DegenerateCurve(first));
        }
        let n = raw.len();
        let samples = raw
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                if i == 0 {
                    0.0
                } else if i + 1 == n {
                    1.0
                } else {
                    ((x - first) / span).clamp(0.0, 1.0)
                }
            })
            .collect();
        Ok(Self {
            id: String::new(),
            samples,
        })
    }

    /// Builds a curve from samples that are expected to already satisfy the
    /// curve invariants. Endpoints within tolerance are pinned exactly.
    pub fn from_normalized(samples: Vec<f64>) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(Error::TooFewSamples(n));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("curve samples".into()));
        }
        if samples
            .iter()
            .any(|&v| !(-ENDPOINT_TOL..=1.0 + ENDPOINT_TOL).contains(&v))
        {
            return Err(Error::InvalidArgument("normalized samples must lie in [0, 1]".into()));
        }
        if samples[0].abs() > ENDPOINT_TOL || (samples[n - 1] - 1.0).abs() > ENDPOINT_TOL {
            return Err(Error::InvalidArgument(format!(
                "normalized curve must pass through (0,0) and (1,1), got {} and {}",
                samples[0],
                samples[n - 1]
            )));
        }
        let mut samples = samples;
        for v in samples.iter_mut() {
            *v = v.clamp(0.0, 1.0);
        }
        samples[0] = 0.0;
        samples[n - 1] = 1.0;
        Ok(Self {
            id: String::new(),
            samples,
        })
    }

    /// Samples `f` on an `n`-point grid and normalizes the result.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let grid = SampleGrid::new(n)?;
        let raw: Vec<f64> = grid.positions().map(f).collect();
        Self::normalize(&raw)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(n, |x| x)
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn grid(&self) -> SampleGrid {
        SampleGrid { n: self.samples.len() }
    }

    /// Piecewise-linear interpolation at `x`. Exact at grid positions.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(x));
        }
        Ok(interpolate(&self.samples, x))
    }

    /// Resamples the curve onto an `n`-point grid by linear interpolation.
    pub fn resample(&self, n: usize) -> Result<Self> {
        let grid = SampleGrid::new(n)?;
        let samples = grid.positions().map(|x| interpolate(&self.samples, x)).collect();
        Ok(Self::from_normalized(samples)?.with_id(self.id.clone()))
    }

    /// Pointwise blend `alpha * self + (1 - alpha) * other`.
    pub fn blend(&self, other: &Self, alpha: f64) -> Result<Self> {
        check_len(self.len(), other.len())?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
            .collect();
        Self::from_normalized(samples)
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.samples.windows(2).all(|w| w[1] >= w[0])
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch { expected, actual });
    }
    Ok(())
}

/// Linear interpolation of uniformly spaced `samples` at `x` in `[0, 1]`.
pub(crate) fn interpolate(samples: &[f64], x: f64) -> f64 {
    let n = samples.len();
    let t = x.clamp(0.0, 1.0) * (n - 1) as f64;
    let nearest = t.round();
    if (t - nearest).abs() <= 1e-9 {
        return samples[nearest as usize];
    }
    let i = (t.floor() as usize).min(n - 2);
    let frac = t - i as f64;
    samples[i] + frac * (samples[i + 1] - samples[i])
}

/// Normalizes raw samples. See [`ResponseCurve::normalize`].
pub fn normalize(raw: &[f64]) -> Result<ResponseCurve> {
    ResponseCurve::normalize(raw)
}

/// Evaluates `curve` at `x`. See [`ResponseCurve::evaluate`].
pub fn evaluate(curve: &ResponseCurve, x: f64) -> Result<f64> {
    curve.evaluate(x)
}

/// Numerically inverts a response curve.
///
/// The samples are projected onto the nearest non-decreasing sequence,
/// made strictly increasing with a `1e-9` per-index ramp, rescaled to
/// `[0, 1]`, and the swapped axes are resampled onto the uniform grid.
pub fn invert(curve: &ResponseCurve) -> ResponseCurve {
    let n = curve.len();
    let mut y = pool_adjacent_violators(curve.samples());
    for (i, v) in y.iter_mut().enumerate() {
        *v += i as f64 * TIE_EPSILON;
    }
    let lo = y[0];
    let span = y[n - 1] - lo;
    for v in y.iter_mut() {
        *v = (*v - lo) / span;
    }
    y[n - 1] = 1.0;

    let grid = curve.grid();
    let mut out = Vec::with_capacity(n);
    let mut k = 0usize;
    for (j, v) in grid.positions().enumerate() {
        if j == 0 {
            out.push(0.0);
            continue;
        }
        if j + 1 == n {
            out.push(1.0);
            continue;
        }
        while k + 2 < n && y[k + 1] < v {
            k += 1;
        }
        // y[k] < v <= y[k + 1] (or the last segment)
        let (y0, y1) = (y[k], y[k + 1]);
        let frac = if y1 > y0 { (v - y0) / (y1 - y0) } else { 0.0 };
        let u = grid.position(k) + frac.clamp(0.0, 1.0) * grid.step();
        out.push(u.clamp(0.0, 1.0));
    }
    ResponseCurve {
        id: curve.id.clone(),
        samples: out,
    }
}

/// Adjacent differences `s[i + 1] - s[i]`, unscaled by the grid step.
pub fn discrete_derivative(curve: &ResponseCurve) -> Vec<f64> {
    curve.samples.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Euclidean norm of the discrete derivative.
pub fn smoothness(curve: &ResponseCurve) -> f64 {
    smoothness_of(curve.samples())
}

pub(crate) fn smoothness_of(samples: &[f64]) -> f64 {
    samples
        .windows(2)
        .map(|w| (w[1] - w[0]) * (w[1] - w[0]))
        .sum::<f64>()
        .sqrt()
}

/// Signed area label: sum of `s_i - u_i` over the grid.
pub fn auc_label(curve: &ResponseCurve) -> f64 {
    auc_label_of(curve.samples())
}

pub(crate) fn auc_label_of(samples: &[f64]) -> f64 {
    let grid = SampleGrid { n: samples.len() };
    samples.iter().zip(grid.positions()).map(|(s, u)| s - u).sum()
}

/// A named collection of equally sized curves.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub name: String,
    pub curves: Vec<ResponseCurve>,
}

impl Corpus {
    pub fn new(name: impl Into<String>, curves: Vec<ResponseCurve>) -> Result<Self> {
        if let Some(first) = curves.first() {
            for c in &curves {
                check_len(first.len(), c.len())?;
            }
        }
        Ok(Self {
            name: name.into(),
            curves,
        })
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn sample_count(&self) -> usize {
        self.curves.first().map_or(0, |c| c.len())
    }

    /// SHA-256 over the little-endian bytes of every sample, hex encoded.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for c in &self.curves {
            for v in c.samples() {
                hasher.update(v.to_le_bytes());
            }
        }
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_curve(n: usize) -> ResponseCurve {
        let raw: Vec<f64> = (0..n).map(|i| if i < n / 2 { 0.0 } else { 1.0 }).collect();
        ResponseCurve::normalize(&raw).unwrap()
    }

    #[test]
    fn normalize_affine() {
        let c = normalize(&[0.1, 0.5, 0.9]).unwrap();
        assert_eq!(c.samples(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn normalize_identity_unchanged() {
        let id = ResponseCurve::identity(1024).unwrap();
        let again = normalize(id.samples()).unwrap();
        assert_eq!(id.samples(), again.samples());
    }

    #[test]
    fn normalize_constant_is_degenerate() {
        assert!(matches!(normalize(&[2.0, 2.0, 2.0]), Err(Error::DegenerateCurve(_))));
        assert!(matches!(normalize(&[1.0]), Err(Error::TooFewSamples(1))));
    }

    #[test]
    fn evaluate_identity_and_endpoints() {
        let id = ResponseCurve::identity(1024).unwrap();
        assert!((id.evaluate(0.25).unwrap() - 0.25).abs() < 1e-15);
        let sq = ResponseCurve::from_fn(1024, |x| x * x).unwrap();
        assert_eq!(sq.evaluate(0.0).unwrap(), 0.0);
        assert_eq!(sq.evaluate(1.0).unwrap(), 1.0);
        assert!(matches!(sq.evaluate(1.5), Err(Error::Domain(_))));
        assert!(matches!(sq.evaluate(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn evaluate_square_interpolation_error() {
        // Linear interpolation of x^2 errs by at most h^2/4 with h = 1/1023.
        let sq = ResponseCurve::from_fn(1024, |x| x * x).unwrap();
        let h = 1.0 / 1023.0;
        let bound = h * h / 4.0;
        assert!(bound < 1e-6);
        assert!((sq.evaluate(0.5).unwrap() - 0.25).abs() <= bound);
    }

    #[test]
    fn evaluate_exact_on_grid() {
        let c = ResponseCurve::from_fn(1024, |x| x.powf(0.45)).unwrap();
        let grid = c.grid();
        for i in 0..c.len() {
            assert_eq!(c.evaluate(grid.position(i)).unwrap(), c.samples()[i]);
        }
    }

    #[test]
    fn invert_identity() {
        let id = ResponseCurve::identity(1024).unwrap();
        let inv = invert(&id);
        let err = inv
            .samples()
            .iter()
            .zip(id.samples())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn invert_square_gives_sqrt() {
        let sq = ResponseCurve::from_fn(1024, |x| x * x).unwrap();
        let inv = invert(&sq);
        let grid = inv.grid();
        let mse: f64 = inv
            .samples()
            .iter()
            .zip(grid.positions())
            .map(|(a, u)| (a - u.sqrt()).powi(2))
            .sum::<f64>()
            / 1024.0;
        assert!(mse.sqrt() < 1e-3, "{}", mse.sqrt());
    }

    #[test]
    fn invert_non_monotone_output_is_monotone() {
        let raw: Vec<f64> = (0..200)
            .map(|i| {
                let x = i as f64 / 199.0;
                if (0.4..0.5).contains(&x) {
                    x - 0.2
                } else {
                    x
                }
            })
            .collect();
        let c = normalize(&raw).unwrap();
        assert!(!c.is_non_decreasing());
        let inv = invert(&c);
        assert!(inv.is_non_decreasing());
        assert_eq!(inv.samples()[0], 0.0);
        assert_eq!(inv.samples()[199], 1.0);
    }

    #[test]
    fn derivative_cases() {
        let id = ResponseCurve::identity(1024).unwrap();
        let d = discrete_derivative(&id);
        assert_eq!(d.len(), 1023);
        assert!(d.iter().all(|v| (v - 1.0 / 1023.0).abs() < 1e-15));

        let step = step_curve(64);
        let d = discrete_derivative(&step);
        assert_eq!(d.iter().filter(|v| **v != 0.0).count(), 1);
        assert_eq!(d.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn smoothness_cases() {
        let id = ResponseCurve::identity(1024).unwrap();
        let expected = (1023.0 * (1.0f64 / 1023.0).powi(2)).sqrt();
        assert!((smoothness(&id) - expected).abs() < 1e-15);
        assert!((smoothness(&id) - 0.031265).abs() < 1e-6);
        assert_eq!(smoothness(&step_curve(64)), 1.0);
    }

    #[test]
    fn auc_cases() {
        let id = ResponseCurve::identity(1024).unwrap();
        assert!(auc_label(&id).abs() < 1e-12);

        let mut raw = vec![0.5; 101];
        raw[0] = 0.0;
        raw[100] = 1.0;
        let c = normalize(&raw).unwrap();
        let mut brute = 0.0;
        for i in 0..101 {
            brute += c.samples()[i] - i as f64 / 100.0;
        }
        assert!((auc_label(&c) - brute).abs() < 1e-12);

        let g = ResponseCurve::from_fn(1024, |x| x.powf(0.5)).unwrap();
        assert!(auc_label(&g) > 0.0);
    }

    #[test]
    fn corpus_rejects_mixed_lengths() {
        let a = ResponseCurve::identity(8).unwrap();
        let b = ResponseCurve::identity(9).unwrap();
        assert!(Corpus::new("x", vec![a, b]).is_err());
    }
}
