//! Model files and latent histograms.

use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::arch::{Activation, ArchSpec};
use super::model::{SlrModel, TrainingMetadata};
use super::network::{Dense, MlpWeights};
use crate::curves::ResponseCurve;
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct ArchRecord {
    layer_sizes: Vec<usize>,
    input_size: usize,
    encoder_hidden: Vec<usize>,
    latent_dim: usize,
    activation: Activation,
    dropout_keep: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct LayerRecord {
    rows: usize,
    cols: usize,
    /// Row-major `rows x cols`.
    weights: Vec<f64>,
    biases: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    arch: ArchRecord,
    layers: Vec<LayerRecord>,
    training: TrainingMetadata,
}

/// Serializes a model to its JSON document.
pub fn model_to_json(model: &SlrModel) -> Result<Vec<u8>> {
    let arch = model.arch();
    let file = ModelFile {
        format_version: FORMAT_VERSION,
        arch: ArchRecord {
            layer_sizes: arch.layer_sizes(),
            input_size: arch.input_size,
            encoder_hidden: arch.encoder_hidden.clone(),
            latent_dim: arch.latent_dim,
            activation: arch.activation,
            dropout_keep: arch.dropout_keep,
        },
        layers: model
            .weights()
            .layers
            .iter()
            .map(|l| LayerRecord {
                rows: l.weights.nrows(),
                cols: l.weights.ncols(),
                weights: l.weights.iter().copied().collect(),
                biases: l.biases.to_vec(),
            })
            .collect(),
        training: model.metadata().clone(),
    };
    let mut bytes = crate::json::to_vec(&file)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Parses a model JSON document, validating version and shapes.
pub fn model_from_json(bytes: &[u8]) -> Result<SlrModel> {
    let file: ModelFile = serde_json::from_slice(bytes)?;
    if file.format_version != FORMAT_VERSION {
        return Err(Error::ModelFormat(format!(
            "unsupported format_version {} (expected {FORMAT_VERSION})",
            file.format_version
        )));
    }
    let a = file.arch;
    let arch = ArchSpec {
        input_size: a.input_size,
        encoder_hidden: a.encoder_hidden,
        latent_dim: a.latent_dim,
        activation: a.activation,
        dropout_keep: a.dropout_keep,
    };
    arch.validate()
        .map_err(|e| Error::ModelFormat(format!("invalid architecture: {e}")))?;
    if arch.layer_sizes() != a.layer_sizes {
        return Err(Error::ModelFormat(format!(
            "layer_sizes {:?} disagree with the architecture {:?}",
            a.layer_sizes,
            arch.layer_sizes()
        )));
    }
    let layers = file
        .layers
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            if l.weights.len() != l.rows * l.cols || l.biases.len() != l.rows {
                return Err(Error::ModelFormat(format!(
                    "layer {i}: {} weights and {} biases for a {}x{} layer",
                    l.weights.len(),
                    l.biases.len(),
                    l.rows,
                    l.cols
                )));
            }
            Ok(Dense {
                weights: Array2::from_shape_vec((l.rows, l.cols), l.weights).expect("length checked"),
                biases: Array1::from(l.biases),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SlrModel::new(arch, MlpWeights { layers }, file.training)
}

pub fn save_model(model: &SlrModel, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path.as_ref(), model_to_json(model)?)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SlrModel> {
    model_from_json(&std::fs::read(path.as_ref())?)
}

/// Histogram of the first latent coordinate over `[lower, upper)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatentHistogram {
    pub lower: f64,
    pub upper: f64,
    pub counts: Vec<usize>,
    pub underflow: usize,
    pub overflow: usize,
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator; 0 for one value).
    pub sd: f64,
    pub values: Vec<f64>,
}

impl LatentHistogram {
    pub const LOWER: f64 = -4.0;
    pub const UPPER: f64 = 4.0;

    pub fn from_values(values: Vec<f64>, bins: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("no latent values to histogram".into()));
        }
        if bins == 0 {
            return Err(Error::InvalidArgument("histogram needs at least one bin".into()));
        }
        let (lower, upper) = (Self::LOWER, Self::UPPER);
        let width = (upper - lower) / bins as f64;
        let mut counts = vec![0; bins];
        let (mut underflow, mut overflow) = (0, 0);
        for &v in &values {
            if v < lower {
                underflow += 1;
            } else if v >= upper {
                overflow += 1;
            } else {
                let idx = (((v - lower) / width) as usize).min(bins - 1);
                counts[idx] += 1;
            }
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Ok(Self {
            lower,
            upper,
            counts,
            underflow,
            overflow,
            mean,
            sd,
            values,
        })
    }

    pub fn bin_edges(&self) -> Vec<f64> {
        let bins = self.counts.len();
        let width = (self.upper - self.lower) / bins as f64;
        (0..=bins).map(|i| self.lower + width * i as f64).collect()
    }

    pub fn occupied_bins(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

/// Encodes `curves` and bins their first latent coordinate over `[-4, 4)`.
pub fn latent_histogram(model: &SlrModel, curves: &[ResponseCurve], bins: usize) -> Result<LatentHistogram> {
    if curves.is_empty() {
        return Err(Error::InvalidArgument("no curves to encode".into()));
    }
    let z = model.encode_batch(curves)?;
    LatentHistogram::from_values(z.column(0).to_vec(), bins)
}
