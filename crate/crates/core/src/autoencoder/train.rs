//! Full-batch Adam training of the autoencoder.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::arch::ArchSpec;
use super::loss::{total_loss, Constraint, LatentVariance, LossBreakdown, LossWeights};
use super::model::{CurveDomain, SlrModel, TrainingMetadata};
use super::network::{backward, forward_masked, DropoutMasks, MlpWeights};
use crate::curves::{auc_label, invert, ResponseCurve};
use crate::error::{Error, Result};

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub lambda_smooth: f64,
    pub lambda_latent: f64,
    pub constraint: Constraint,
    /// Multiplier for area labels; `None` means `1 / N`.
    pub auc_scale: Option<f64>,
    pub variance: LatentVariance,
    /// Train on numerically inverted curves instead of forward responses.
    pub train_on_inverse: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 4000,
            learning_rate: 1e-3,
            seed: 0,
            lambda_smooth: 1e-3,
            lambda_latent: 1e-2,
            constraint: Constraint::Ldl,
            auc_scale: None,
            variance: LatentVariance::Mean,
            train_on_inverse: false,
        }
    }
}

impl TrainConfig {
    pub fn loss_weights(&self) -> LossWeights {
        LossWeights {
            smooth: self.lambda_smooth,
            latent: self.lambda_latent,
            constraint: self.constraint,
            variance: self.variance,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.epochs == 0 || !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::InvalidArgument(
                "epochs and learning rate must be positive".into(),
            ));
        }
        if self.lambda_smooth < 0.0 || self.lambda_latent < 0.0 {
            return Err(Error::InvalidArgument("loss weights must be non-negative".into()));
        }
        Ok(())
    }
}

/// Curves stacked row-wise with their scaled area labels.
#[derive(Debug, Clone)]
pub struct TrainingBatch {
    pub inputs: Array2<f64>,
    pub labels: Vec<f64>,
}

impl TrainingBatch {
    pub fn new(curves: &[ResponseCurve], config: &TrainConfig) -> Result<Self> {
        let first = curves
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty curve set".into()))?;
        let n = first.len();
        let scale = config.auc_scale.unwrap_or(1.0 / n as f64);
        let prepared: Vec<ResponseCurve> = if config.train_on_inverse {
            curves.iter().map(invert).collect()
        } else {
            curves.to_vec()
        };
        let mut inputs = Array2::zeros((prepared.len(), n));
        let mut labels = Vec::with_capacity(prepared.len());
        for (mut row, c) in inputs.rows_mut().into_iter().zip(&prepared) {
            if c.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: c.len(),
                });
            }
            row.assign(&ndarray::ArrayView1::from(c.samples()));
            labels.push(auc_label(c) * scale);
        }
        Ok(Self { inputs, labels })
    }

    pub fn len(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.nrows() == 0
    }
}

/// Loss and exact gradients for one step with the given dropout masks.
pub fn gradients(
    weights: &MlpWeights,
    arch: &ArchSpec,
    batch: &TrainingBatch,
    config: &TrainConfig,
    masks: &DropoutMasks,
) -> Result<(LossBreakdown, MlpWeights)> {
    let pass = forward_masked(weights, arch, &batch.inputs, masks)?;
    let loss = total_loss(
        &batch.inputs,
        pass.reconstruction(),
        pass.latent(),
        Some(&batch.labels),
        &config.loss_weights(),
    )?;
    let grads = backward(
        weights,
        arch,
        &pass,
        masks,
        loss.d_reconstruction,
        loss.d_latent.as_ref(),
    )?;
    Ok((loss.breakdown, grads))
}

/// Loss history and final fit quality of a training run.
#[derive(Debug, Clone, Serialize)]
pub struct TrainReport {
    pub losses: Vec<LossBreakdown>,
    /// Eval-mode reconstruction RMSE per training curve.
    pub final_rmse: Vec<f64>,
    pub mean_rmse: f64,
}

struct Adam {
    m: MlpWeights,
    v: MlpWeights,
    step: i32,
}

impl Adam {
    fn new(arch: &ArchSpec) -> Self {
        Self {
            m: MlpWeights::zeros(arch),
            v: MlpWeights::zeros(arch),
            step: 0,
        }
    }

    fn update(&mut self, weights: &mut MlpWeights, grads: &MlpWeights, lr: f64) {
        self.step += 1;
        let c1 = 1.0 - ADAM_BETA1.powi(self.step);
        let c2 = 1.0 - ADAM_BETA2.powi(self.step);
        let apply = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
            *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
            *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= lr * m_hat / (v_hat.sqrt() + ADAM_EPSILON);
        };
        for (((w, g), m), v) in weights
            .layers
            .iter_mut()
            .zip(&grads.layers)
            .zip(self.m.layers.iter_mut())
            .zip(self.v.layers.iter_mut())
        {
            ndarray::Zip::from(&mut w.weights)
                .and(&g.weights)
                .and(&mut m.weights)
                .and(&mut v.weights)
                .for_each(|p, &g, m, v| apply(p, g, m, v));
            ndarray::Zip::from(&mut w.biases)
                .and(&g.biases)
                .and(&mut m.biases)
                .and(&mut v.biases)
                .for_each(|p, &g, m, v| apply(p, g, m, v));
        }
    }
}

/// Trains an autoencoder on `curves`. Deterministic for a given seed.
pub fn train(curves: &[ResponseCurve], arch: &ArchSpec, config: &TrainConfig) -> Result<(SlrModel, TrainReport)> {
    train_with_progress(curves, arch, config, |_, _| {})
}

/// As [`train`], calling `progress(epoch, loss)` after every step.
pub fn train_with_progress(
    curves: &[ResponseCurve],
    arch: &ArchSpec,
    config: &TrainConfig,
    mut progress: impl FnMut(usize, &LossBreakdown),
) -> Result<(SlrModel, TrainReport)> {
    arch.validate()?;
    config.validate()?;
    if curves.len() < 2 {
        return Err(Error::InvalidArgument("training needs at least 2 curves".into()));
    }
    if curves[0].len() != arch.input_size {
        return Err(Error::LengthMismatch {
            expected: arch.input_size,
            actual: curves[0].len(),
        });
    }
    if config.constraint == Constraint::Auc && arch.latent_dim != 1 {
        return Err(Error::InvalidArgument(
            "the AUC constraint needs a single latent variable".into(),
        ));
    }
    let batch = TrainingBatch::new(curves, config)?;

    let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9E37_79B9_7F4A_7C15);
    let mut weights = MlpWeights::glorot(arch, &mut init_rng);
    let mut adam = Adam::new(arch);
    let mut losses = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        let masks = DropoutMasks::sample(arch, batch.len(), &mut dropout_rng);
        let (loss, grads) = gradients(&weights, arch, &batch, config, &masks).map_err(|e| match e {
            Error::NonFinite(_) => Error::Diverged { epoch },
            other => other,
        })?;
        if !loss.total.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        adam.update(&mut weights, &grads, config.learning_rate);
        progress(epoch, &loss);
        losses.push(loss);
    }
    if !weights.is_finite() {
        return Err(Error::Diverged { epoch: config.epochs });
    }

    let metadata = TrainingMetadata {
        seed: config.seed,
        epochs: config.epochs,
        learning_rate: config.learning_rate,
        constraint: config.constraint,
        lambda_smooth: config.lambda_smooth,
        lambda_latent: config.lambda_latent,
        variance: config.variance,
        domain: if config.train_on_inverse {
            CurveDomain::Inverse
        } else {
            CurveDomain::Forward
        },
        corpus: None,
        excluded_curves: Vec::new(),
    };
    let model = SlrModel::new(arch.clone(), weights, metadata)?;
    let targets: Vec<ResponseCurve> = if config.train_on_inverse {
        curves.iter().map(invert).collect()
    } else {
        curves.to_vec()
    };
    let final_rmse = model.reconstruction_rmse(&targets)?;
    let mean_rmse = final_rmse.iter().sum::<f64>() / final_rmse.len() as f64;
    Ok((
        model,
        TrainReport {
            losses,
            final_rmse,
            mean_rmse,
        },
    ))
}
