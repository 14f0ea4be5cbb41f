//! Reconstruction, smoothness and latent-constraint losses with their
//! derivatives.

use ndarray::{Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::curves::smoothness_of;
use crate::error::{Error, Result};

/// Floor applied to the fitted latent standard deviation.
pub const SIGMA_FLOOR: f64 = 1e-6;

/// Latent-distribution constraint applied during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Constraint {
    /// KL divergence of the fitted batch normal from N(0, 1).
    #[default]
    Ldl,
    /// Supervised latent targets from the signed area label.
    Auc,
    None,
}

impl Constraint {
    pub fn name(&self) -> &'static str {
        match self {
            Constraint::Ldl => "ldl",
            Constraint::Auc => "auc",
            Constraint::None => "none",
        }
    }
}

impl std::str::FromStr for Constraint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ldl" => Ok(Constraint::Ldl),
            "auc" => Ok(Constraint::Auc),
            "none" => Ok(Constraint::None),
            _ => Err(Error::InvalidArgument(format!(
                "unknown constraint '{s}' (expected ldl, auc or none)"
            ))),
        }
    }
}

/// Estimator for the fitted latent variance in the KL term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LatentVariance {
    /// `sigma^2 = (1/M) sum (z - mu)^2`.
    #[default]
    Mean,
    /// `sigma^2 = sum (z - mu)^2`, without the `1/M` factor.
    Sum,
}

/// Mean squared difference over the samples of one curve.
pub fn loss_recon(x: &[f64], reconstructed: &[f64]) -> Result<f64> {
    if x.len() != reconstructed.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            actual: reconstructed.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::InvalidArgument("empty curve".into()));
    }
    Ok(x.iter().zip(reconstructed).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / x.len() as f64)
}

fn fitted_normal(z: &[f64], variance: LatentVariance) -> Result<(f64, f64)> {
    if z.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "KL constraint needs a batch of at least 2, got {}",
            z.len()
        )));
    }
    let m = z.len() as f64;
    let mu = z.iter().sum::<f64>() / m;
    let ss: f64 = z.iter().map(|v| (v - mu) * (v - mu)).sum();
    let var = match variance {
        LatentVariance::Mean => ss / m,
        LatentVariance::Sum => ss,
    };
    Ok((mu, var.sqrt().max(SIGMA_FLOOR)))
}

/// `KL(N(mu, sigma) || N(0, 1)) = (mu^2 + sigma^2 - 2 log sigma - 1) / 2`
/// for the normal fitted to the batch `z`.
pub fn loss_kl_ldl(z: &[f64], variance: LatentVariance) -> Result<f64> {
    let (mu, sigma) = fitted_normal(z, variance)?;
    Ok(0.5 * (mu * mu + sigma * sigma - 2.0 * sigma.ln() - 1.0))
}

/// Derivative of [`loss_kl_ldl`] with respect to each batch entry.
pub fn kl_ldl_gradient(z: &[f64], variance: LatentVariance) -> Result<Vec<f64>> {
    let (mu, sigma) = fitted_normal(z, variance)?;
    let m = z.len() as f64;
    let var = sigma * sigma;
    let floored = var <= SIGMA_FLOOR * SIGMA_FLOOR;
    // dKL/dvar = (1 - 1/var) / 2; dvar/dz_i = 2 (z_i - mu) * scale
    let scale = match variance {
        LatentVariance::Mean => 1.0 / m,
        LatentVariance::Sum => 1.0,
    };
    Ok(z.iter()
        .map(|&zi| {
            let d_mu = mu / m;
            let d_var = if floored {
                0.0
            } else {
                0.5 * (1.0 - 1.0 / var) * 2.0 * (zi - mu) * scale
            };
            d_mu + d_var
        })
        .collect())
}

/// Mean squared difference between latents and their area labels.
pub fn loss_auc(z: &[f64], labels: &[f64]) -> Result<f64> {
    if z.len() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: labels.len(),
            actual: z.len(),
        });
    }
    if z.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    Ok(z.iter().zip(labels).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / z.len() as f64)
}

/// Weights and choices that define the training objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub smooth: f64,
    pub latent: f64,
    pub constraint: Constraint,
    pub variance: LatentVariance,
}

/// Components of the total loss for one batch.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct LossBreakdown {
    pub recon: f64,
    pub smooth: f64,
    pub latent: f64,
    pub total: f64,
}

/// Total loss and its derivatives with respect to the reconstruction and
/// the latent batch.
pub struct LossGradients {
    pub breakdown: LossBreakdown,
    pub d_reconstruction: Array2<f64>,
    pub d_latent: Option<Array2<f64>>,
}

/// `recon + w.smooth * mean(smoothness) + w.latent * constraint`.
///
/// `labels` are the scaled area labels, required for [`Constraint::Auc`]
/// (applied to the first latent coordinate).
pub fn total_loss(
    target: &Array2<f64>,
    reconstruction: &Array2<f64>,
    latent: &Array2<f64>,
    labels: Option<&[f64]>,
    weights: &LossWeights,
) -> Result<LossGradients> {
    let (rows, cols) = target.dim();
    if reconstruction.dim() != (rows, cols) {
        return Err(Error::LengthMismatch {
            expected: rows * cols,
            actual: reconstruction.len(),
        });
    }
    let b = rows as f64;
    let n = cols as f64;

    let diff = reconstruction - target;
    let recon = diff.iter().map(|d| d * d).sum::<f64>() / (b * n);
    let mut d_recon = diff * (2.0 / (b * n));

    let mut smooth = 0.0;
    if weights.smooth != 0.0 {
        for (mut grad_row, row) in d_recon.rows_mut().into_iter().zip(reconstruction.rows()) {
            let norm = row_smoothness(row);
            smooth += norm;
            if norm > 0.0 {
                let c = weights.smooth / (b * norm);
                // d||Dx||/dx_k = (d_{k-1} - d_k) / ||Dx|| with d_k = x_{k+1} - x_k
                for k in 0..cols {
                    let left = if k > 0 { row[k] - row[k - 1] } else { 0.0 };
                    let right = if k + 1 < cols { row[k + 1] - row[k] } else { 0.0 };
                    grad_row[k] += c * (left - right);
                }
            }
        }
        smooth /= b;
    } else {
        smooth = reconstruction.rows().into_iter().map(row_smoothness).sum::<f64>() / b;
    }

    let (latent_loss, d_latent) = match weights.constraint {
        Constraint::None => (0.0, None),
        Constraint::Ldl => {
            let mut total = 0.0;
            let mut grad = Array2::zeros(latent.dim());
            for (col, mut g) in latent.axis_iter(Axis(1)).zip(grad.axis_iter_mut(Axis(1))) {
                let z: Vec<f64> = col.to_vec();
                total += loss_kl_ldl(&z, weights.variance)?;
                for (gi, di) in g.iter_mut().zip(kl_ldl_gradient(&z, weights.variance)?) {
                    *gi = weights.latent * di;
                }
            }
            (total, Some(grad))
        }
        Constraint::Auc => {
            let labels = labels.ok_or_else(|| Error::InvalidArgument("AUC constraint requires area labels".into()))?;
            let z: Vec<f64> = latent.column(0).to_vec();
            let loss = loss_auc(&z, labels)?;
            let mut grad = Array2::zeros(latent.dim());
            for (i, (zi, li)) in z.iter().zip(labels).enumerate() {
                grad[[i, 0]] = weights.latent * 2.0 * (zi - li) / b;
            }
            (loss, Some(grad))
        }
    };

    let total = recon + weights.smooth * smooth + weights.latent * latent_loss;
    Ok(LossGradients {
        breakdown: LossBreakdown {
            recon,
            smooth,
            latent: latent_loss,
            total,
        },
        d_reconstruction: d_recon,
        d_latent,
    })
}

fn row_smoothness(row: ArrayView1<'_, f64>) -> f64 {
    match row.as_slice() {
        Some(s) => smoothness_of(s),
        None => smoothness_of(&row.to_vec()),
    }
}
