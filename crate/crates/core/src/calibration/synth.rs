use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{Channel, Observation, ObservationSet};
use crate::curves::ResponseCurve;
use crate::error::{Error, Result};

/// Synthetic correspondences for a known forward response.
///
/// Base irradiances are `n_patches` stratified draws (one per stratum of
/// `[0, 1]`); each exposure scales them (clamped to `[0, 1]`). Intensities
/// are the curve values plus Gaussian noise, clamped to `[0, 1]`.
pub fn synth_observations(
    true_curve: &ResponseCurve,
    n_patches: usize,
    noise_sigma: f64,
    exposures: &[f64],
    seed: u64,
) -> Result<ObservationSet> {
    if n_patches == 0 {
        return Err(Error::InvalidArgument("need at least one patch".into()));
    }
    if exposures.is_empty() || exposures.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidArgument("exposures must be positive".into()));
    }
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("bad noise level {noise_sigma}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let base: Vec<f64> = (0..n_patches)
        .map(|k| (k as f64 + rng.random::<f64>()) / n_patches as f64)
        .collect();
    let mut observations = Vec::with_capacity(n_patches * exposures.len());
    for &exposure in exposures {
        for &b in &base {
            let irradiance = (b * exposure).clamp(0.0, 1.0);
            let clean = true_curve.evaluate(irradiance)?;
            let jitter = if noise_sigma > 0.0 { noise.sample(&mut rng) } else { 0.0 };
            let intensity = (clean + jitter).clamp(0.0, 1.0);
            observations.push(Observation::with_exposure(irradiance, intensity, exposure)?);
        }
    }
    let id = if true_curve.id().is_empty() {
        "synthetic".to_string()
    } else {
        true_curve.id().to_string()
    };
    ObservationSet::new(id, Channel::Mono, observations)
}
