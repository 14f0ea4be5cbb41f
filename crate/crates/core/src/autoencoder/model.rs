use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::arch::ArchSpec;
use super::loss::{Constraint, LatentVariance};
use super::network::{run_layers, MlpWeights};
use crate::curves::{Corpus, ResponseCurve};
use crate::error::{Error, Result};
use crate::optim::golden_section;

/// Whether the network reconstructs forward responses or inverse responses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CurveDomain {
    #[default]
    Forward,
    Inverse,
}

/// Identity of the corpus a model was trained on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusTag {
    pub name: String,
    pub fingerprint: String,
    pub curves: usize,
}

impl CorpusTag {
    pub fn of(corpus: &Corpus) -> Self {
        Self {
            name: corpus.name.clone(),
            fingerprint: corpus.fingerprint(),
            curves: corpus.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub seed: u64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub constraint: Constraint,
    pub lambda_smooth: f64,
    pub lambda_latent: f64,
    pub variance: LatentVariance,
    pub domain: CurveDomain,
    /// Corpus the model was trained on (all curves, before exclusions).
    #[serde(default)]
    pub corpus: Option<CorpusTag>,
    /// Curve ids held out of training.
    #[serde(default)]
    pub excluded_curves: Vec<String>,
}

/// A trained single-latent autoencoder ready for inference.
#[derive(Debug, Clone)]
pub struct SlrModel {
    arch: ArchSpec,
    weights: MlpWeights,
    metadata: TrainingMetadata,
    scaled: MlpWeights,
}

impl PartialEq for SlrModel {
    fn eq(&self, other: &Self) -> bool {
        self.arch == other.arch && self.weights == other.weights && self.metadata == other.metadata
    }
}

impl SlrModel {
    pub fn new(arch: ArchSpec, weights: MlpWeights, metadata: TrainingMetadata) -> Result<Self> {
        arch.validate()?;
        weights.check_shapes(&arch)?;
        if !weights.is_finite() {
            return Err(Error::NonFinite("model weights".into()));
        }
        let scaled = weights.inference_scaled(&arch);
        Ok(Self {
            arch,
            weights,
            metadata,
            scaled,
        })
    }

    pub fn arch(&self) -> &ArchSpec {
        &self.arch
    }

    pub fn weights(&self) -> &MlpWeights {
        &self.weights
    }

    pub fn metadata(&self) -> &TrainingMetadata {
        &self.metadata
    }

    pub fn metadata_mut(&mut self) -> &mut TrainingMetadata {
        &mut self.metadata
    }

    pub fn domain(&self) -> CurveDomain {
        self.metadata.domain
    }

    fn split(&self) -> usize {
        self.arch.latent_layer() + 1
    }

    /// Latent codes of a batch of curves (eval mode), one row per curve.
    pub fn encode_batch(&self, curves: &[ResponseCurve]) -> Result<Array2<f64>> {
        let n = self.arch.input_size;
        let mut x = Array2::zeros((curves.len(), n));
        for (mut row, c) in x.rows_mut().into_iter().zip(curves) {
            if c.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: c.len(),
                });
            }
            row.assign(&ndarray::ArrayView1::from(c.samples()));
        }
        let shapes = self.arch.layers();
        let split = self.split();
        run_layers(&self.scaled.layers[..split], &shapes[..split], x)
    }

    pub fn encode(&self, curve: &ResponseCurve) -> Result<Vec<f64>> {
        Ok(self.encode_batch(std::slice::from_ref(curve))?.row(0).to_vec())
    }

    /// Raw decoder output for latent `z` (no normalization).
    pub fn decode_raw(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.arch.latent_dim {
            return Err(Error::LengthMismatch {
                expected: self.arch.latent_dim,
                actual: z.len(),
            });
        }
        let shapes = self.arch.layers();
        let split = self.split();
        let input = Array2::from_shape_vec((1, z.len()), z.to_vec()).expect("row vector");
        let out = run_layers(&self.scaled.layers[split..], &shapes[split..], input)?;
        Ok(out.into_raw_vec_and_offset().0)
    }

    /// Decoder output normalized through `(0,0)` and `(1,1)`.
    pub fn decode(&self, z: &[f64]) -> Result<ResponseCurve> {
        ResponseCurve::normalize(&self.decode_raw(z)?)
    }

    /// Eval-mode `decode(encode(c))` RMSE for each curve.
    pub fn reconstruction_rmse(&self, curves: &[ResponseCurve]) -> Result<Vec<f64>> {
        let latents = self.encode_batch(curves)?;
        curves
            .iter()
            .zip(latents.rows())
            .map(|(c, z)| {
                let rec = self.decode(&z.to_vec())?;
                crate::bench::rmse(c.samples(), rec.samples())
            })
            .collect()
    }

    /// Represents `curve` by a latent code: the encoder output, refined for
    /// a single latent by golden-section search on the reconstruction RMSE
    /// within `±1` of it. Never worse than the plain encoder output.
    pub fn fit_curve(&self, curve: &ResponseCurve) -> Result<LatentFit> {
        let z0 = self.encode(curve)?;
        let rmse_at = |z: &[f64]| -> Result<f64> {
            let rec = self.decode(z)?;
            crate::bench::rmse(curve.samples(), rec.samples())
        };
        let initial = rmse_at(&z0)?;
        let mut best = LatentFit {
            z: z0.clone(),
            rmse: initial,
            evaluations: 1,
        };
        if self.arch.latent_dim == 1 {
            let centre = z0[0];
            let found = golden_section(
                |z| rmse_at(&[z]).unwrap_or(f64::INFINITY),
                centre - LATENT_REFINE_RADIUS,
                centre + LATENT_REFINE_RADIUS,
                1e-6,
                100,
            );
            best.evaluations += found.evaluations;
            if found.value < best.rmse {
                best.z = found.x;
                best.rmse = found.value;
            }
        }
        Ok(best)
    }
}

const LATENT_REFINE_RADIUS: f64 = 1.0;

/// Latent code chosen for a curve and its reconstruction error.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentFit {
    pub z: Vec<f64>,
    pub rmse: f64,
    pub evaluations: usize,
}
