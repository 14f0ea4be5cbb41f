//! Dense layers, dropout masks, forward and reverse passes.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_distr::{Bernoulli, Distribution, Uniform};

use super::arch::{ArchSpec, LayerShape};
use crate::error::{Error, Result};

/// One dense layer: `weights` is `fan_out x fan_in` (row per output unit).
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weights: Array2<f64>,
    pub biases: Array1<f64>,
}

/// Parameters of every layer, input to reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpWeights {
    pub layers: Vec<Dense>,
}

impl MlpWeights {
    /// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn glorot(arch: &ArchSpec, rng: &mut impl Rng) -> Self {
        let layers = arch
            .layers()
            .iter()
            .map(|shape| {
                let limit = (6.0 / (shape.fan_in + shape.fan_out) as f64).sqrt();
                let dist = Uniform::new_inclusive(-limit, limit).expect("finite limit");
                Dense {
                    weights: Array2::from_shape_simple_fn((shape.fan_out, shape.fan_in), || dist.sample(rng)),
                    biases: Array1::zeros(shape.fan_out),
                }
            })
            .collect();
        Self { layers }
    }

    pub fn zeros(arch: &ArchSpec) -> Self {
        let layers = arch
            .layers()
            .iter()
            .map(|s| Dense {
                weights: Array2::zeros((s.fan_out, s.fan_in)),
                biases: Array1::zeros(s.fan_out),
            })
            .collect();
        Self { layers }
    }

    pub fn check_shapes(&self, arch: &ArchSpec) -> Result<()> {
        let shapes = arch.layers();
        if shapes.len() != self.layers.len() {
            return Err(Error::ModelFormat(format!(
                "expected {} layers, found {}",
                shapes.len(),
                self.layers.len()
            )));
        }
        for (i, (s, l)) in shapes.iter().zip(&self.layers).enumerate() {
            if l.weights.dim() != (s.fan_out, s.fan_in) || l.biases.len() != s.fan_out {
                return Err(Error::ModelFormat(format!(
                    "layer {i}: expected {}x{} weights, found {:?}",
                    s.fan_out,
                    s.fan_in,
                    l.weights.dim()
                )));
            }
        }
        Ok(())
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(l.biases.iter()).all(|v| v.is_finite()))
    }

    /// Weights with dropout-affected layers scaled by the keep probability.
    pub fn inference_scaled(&self, arch: &ArchSpec) -> MlpWeights {
        let p = arch.dropout_keep;
        let layers = self
            .layers
            .iter()
            .zip(arch.layers())
            .map(|(l, s)| Dense {
                weights: if s.dropout_input && p < 1.0 {
                    &l.weights * p
                } else {
                    l.weights.clone()
                },
                biases: l.biases.clone(),
            })
            .collect();
        MlpWeights { layers }
    }
}

/// Per-layer dropout masks (`None` for layers without dropout on input).
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMasks(pub Vec<Option<Array2<f64>>>);

impl DropoutMasks {
    /// Draws Bernoulli(keep) masks for a batch of `rows` inputs.
    pub fn sample(arch: &ArchSpec, rows: usize, rng: &mut impl Rng) -> Self {
        let p = arch.dropout_keep;
        if p >= 1.0 {
            return Self::none(arch);
        }
        let bernoulli = Bernoulli::new(p).expect("keep probability in (0, 1)");
        Self(
            arch.layers()
                .iter()
                .map(|s| {
                    s.dropout_input.then(|| {
                        Array2::from_shape_simple_fn((rows, s.fan_in), || if bernoulli.sample(rng) { 1.0 } else { 0.0 })
                    })
                })
                .collect(),
        )
    }

    pub fn none(arch: &ArchSpec) -> Self {
        Self(vec![None; arch.layers().len()])
    }
}

/// Everything recorded during a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    /// Input to each layer after masking.
    pub inputs: Vec<Array2<f64>>,
    /// Output of each layer after activation.
    pub outputs: Vec<Array2<f64>>,
    latent_layer: usize,
}

impl ForwardPass {
    pub fn latent(&self) -> &Array2<f64> {
        &self.outputs[self.latent_layer]
    }

    pub fn reconstruction(&self) -> &Array2<f64> {
        self.outputs.last().expect("at least one layer")
    }
}

fn dense_forward(layer: &Dense, input: &Array2<f64>, activated: bool) -> Array2<f64> {
    let mut out = input.dot(&layer.weights.t());
    out += &layer.biases;
    if activated {
        out.mapv_inplace(f64::tanh);
    }
    out
}

fn check_finite(values: &Array2<f64>, layer: usize) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("activations of layer {layer}")))
    }
}

/// Train-mode forward pass with explicit masks (rows are curves).
pub fn forward_masked(
    weights: &MlpWeights,
    arch: &ArchSpec,
    batch: &Array2<f64>,
    masks: &DropoutMasks,
) -> Result<ForwardPass> {
    if batch.ncols() != arch.input_size {
        return Err(Error::LengthMismatch {
            expected: arch.input_size,
            actual: batch.ncols(),
        });
    }
    let shapes = arch.layers();
    let mut inputs = Vec::with_capacity(shapes.len());
    let mut outputs: Vec<Array2<f64>> = Vec::with_capacity(shapes.len());
    for (j, (layer, shape)) in weights.layers.iter().zip(&shapes).enumerate() {
        let prev = if j == 0 { batch } else { &outputs[j - 1] };
        let input = match &masks.0[j] {
            Some(mask) => prev * mask,
            None => prev.clone(),
        };
        let out = dense_forward(layer, &input, shape.activated);
        check_finite(&out, j)?;
        inputs.push(input);
        outputs.push(out);
    }
    Ok(ForwardPass {
        inputs,
        outputs,
        latent_layer: arch.latent_layer(),
    })
}

/// Forward pass mode.
pub enum Mode<'a, R: Rng> {
    Train(&'a mut R),
    Eval,
}

/// Forward pass in train mode (fresh Bernoulli masks) or eval mode
/// (dropout-affected weights scaled by the keep probability).
pub fn forward<R: Rng>(
    weights: &MlpWeights,
    arch: &ArchSpec,
    batch: &Array2<f64>,
    mode: Mode<'_, R>,
) -> Result<ForwardPass> {
    match mode {
        Mode::Train(rng) => {
            let masks = DropoutMasks::sample(arch, batch.nrows(), rng);
            forward_masked(weights, arch, batch, &masks)
        }
        Mode::Eval => {
            let scaled = weights.inference_scaled(arch);
            forward_masked(&scaled, arch, batch, &DropoutMasks::none(arch))
        }
    }
}

/// Runs a slice of layers without dropout (weights already scaled).
pub(crate) fn run_layers(layers: &[Dense], shapes: &[LayerShape], input: Array2<f64>) -> Result<Array2<f64>> {
    let mut x = input;
    for (j, (layer, shape)) in layers.iter().zip(shapes).enumerate() {
        x = dense_forward(layer, &x, shape.activated);
        check_finite(&x, j)?;
    }
    Ok(x)
}

/// Reverse pass: gradients of a scalar loss given its derivatives with
/// respect to the reconstruction and (optionally) the latent layer output.
pub fn backward(
    weights: &MlpWeights,
    arch: &ArchSpec,
    pass: &ForwardPass,
    masks: &DropoutMasks,
    d_reconstruction: Array2<f64>,
    d_latent: Option<&Array2<f64>>,
) -> Result<MlpWeights> {
    let shapes = arch.layers();
    let latent = arch.latent_layer();
    let mut grads: Vec<Dense> = Vec::with_capacity(shapes.len());
    let mut upstream = d_reconstruction;
    for j in (0..shapes.len()).rev() {
        if j == latent {
            if let Some(extra) = d_latent {
                upstream += extra;
            }
        }
        let mut d_pre = upstream;
        if shapes[j].activated {
            d_pre.zip_mut_with(&pass.outputs[j], |d, &y| *d *= 1.0 - y * y);
        }
        let d_weights = d_pre.t().dot(&pass.inputs[j]);
        let d_biases = d_pre.sum_axis(Axis(0));
        grads.push(Dense {
            weights: d_weights,
            biases: d_biases,
        });
        if j > 0 {
            let mut d_input = d_pre.dot(&weights.layers[j].weights);
            if let Some(mask) = &masks.0[j] {
                d_input *= mask;
            }
            upstream = d_input;
        } else {
            upstream = Array2::zeros((0, 0));
        }
    }
    grads.reverse();
    let grads = MlpWeights { layers: grads };
    if !grads.is_finite() {
        return Err(Error::NonFinite("gradients".into()));
    }
    Ok(grads)
}
