use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{emor_project, emor_reconstruct, EmorBasis, EmorModel, Family, GammaModel, GgcmModel, PolynomialModel};
use crate::curves::{ResponseCurve, SampleGrid};
use crate::error::{Error, Result};
use crate::optim::{golden_section, NelderMead};

pub(crate) const GAMMA_MIN: f64 = 0.05;
pub(crate) const GAMMA_MAX: f64 = 20.0;

/// A fitted instance of one of the classical families.
#[derive(Debug, Clone)]
pub enum FittedModel {
    Gamma(GammaModel),
    Polynomial(PolynomialModel),
    Ggcm(GgcmModel),
    Emor(EmorModel),
}

impl FittedModel {
    pub fn family(&self) -> Family {
        match self {
            FittedModel::Gamma(_) => Family::Gamma,
            FittedModel::Polynomial(p) => Family::Polynomial(p.order()),
            FittedModel::Ggcm(g) => Family::Ggcm(g.coefficients().len()),
            FittedModel::Emor(e) => Family::Emor(e.coefficients().len()),
        }
    }

    pub fn parameters(&self) -> Vec<f64> {
        match self {
            FittedModel::Gamma(g) => vec![g.gamma()],
            FittedModel::Polynomial(p) => p.coefficients().to_vec(),
            FittedModel::Ggcm(g) => g.coefficients().to_vec(),
            FittedModel::Emor(e) => e.coefficients().to_vec(),
        }
    }

    /// Model values on an `n`-point grid (unnormalized, except EMoR which
    /// is reconstructed through the endpoints).
    pub fn sample(&self, n: usize) -> Result<Vec<f64>> {
        let grid = SampleGrid::new(n)?;
        Ok(match self {
            FittedModel::Gamma(g) => grid.positions().map(|x| g.eval(x)).collect(),
            FittedModel::Polynomial(p) => grid.positions().map(|x| p.eval(x)).collect(),
            FittedModel::Ggcm(g) => grid.positions().map(|x| ggcm_value(g, x)).collect(),
            FittedModel::Emor(e) => {
                if e.basis().sample_count() != n {
                    return Err(Error::LengthMismatch {
                        expected: e.basis().sample_count(),
                        actual: n,
                    });
                }
                emor_reconstruct(e)?.samples().to_vec()
            }
        })
    }
}

/// GGCM value with the `x = 0` limit resolved: 0 for `P(0) > 0`, 1 for
/// `P(0) = 0`, infinity otherwise.
pub(crate) fn ggcm_value(model: &GgcmModel, x: f64) -> f64 {
    match model.eval(x) {
        Ok(v) => v,
        Err(_) if model.coefficients()[0] == 0.0 => 1.0,
        Err(_) => f64::INFINITY,
    }
}

/// A fitted model with its RMSE on the curve's grid.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub model: FittedModel,
    pub rmse: f64,
    pub evaluations: usize,
}

fn rmse_against(samples: &[f64], values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for (s, v) in samples.iter().zip(values) {
        sum += (s - v) * (s - v);
        n += 1;
    }
    (sum / n as f64).sqrt()
}

/// Fits `family` to `curve`, minimizing RMSE on the curve's grid.
///
/// * gamma: golden-section search on `log gamma` over `[log 0.05, log 20]`;
/// * polynomial: linear least squares on the monomial design matrix;
/// * GGCM: Nelder–Mead from `[1, 0, ...]` (x = 0 excluded from the objective);
/// * EMoR: closed-form projection onto `basis`.
pub fn fit_model(family: Family, curve: &ResponseCurve, basis: Option<&Arc<EmorBasis>>) -> Result<FitOutcome> {
    if family.parameter_count() == 0 {
        return Err(Error::InvalidArgument("n_params must be >= 1".into()));
    }
    let samples = curve.samples();
    let grid = curve.grid();
    match family {
        Family::Gamma => {
            let objective = |log_g: f64| {
                let g = log_g.exp();
                rmse_against(samples, grid.positions().map(|x| x.powf(g)))
            };
            let m = golden_section(objective, GAMMA_MIN.ln(), GAMMA_MAX.ln(), 1e-10, 500);
            let model = GammaModel::new(m.x[0].exp())?;
            Ok(FitOutcome {
                model: FittedModel::Gamma(model),
                rmse: m.value,
                evaluations: m.evaluations,
            })
        }
        Family::Polynomial(order) => {
            let n = samples.len();
            let design = DMatrix::from_fn(n, order, |i, j| grid.position(i).powi(j as i32 + 1));
            let target = DVector::from_column_slice(samples);
            let solution = design
                .svd(true, true)
                .solve(&target, 1e-14)
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            let model = PolynomialModel::new(solution.iter().copied().collect())?;
            let rmse = rmse_against(samples, grid.positions().map(|x| model.eval(x)));
            Ok(FitOutcome {
                model: FittedModel::Polynomial(model),
                rmse,
                evaluations: 1,
            })
        }
        Family::Ggcm(count) => {
            let interior: Vec<(f64, f64)> = grid.positions().zip(samples.iter().copied()).skip(1).collect();
            let objective = |w: &[f64]| {
                let mut sum = 0.0;
                for &(x, s) in &interior {
                    let v = x.powf(super::horner(w, x)) - s;
                    sum += v * v;
                }
                (sum / interior.len() as f64).sqrt()
            };
            let mut start = vec![0.0; count];
            start[0] = 1.0;
            let m = NelderMead::default().minimize(objective, &start)?;
            let model = GgcmModel::new(m.x)?;
            let rmse = rmse_against(samples, grid.positions().map(|x| ggcm_value(&model, x)));
            Ok(FitOutcome {
                model: FittedModel::Ggcm(model),
                rmse,
                evaluations: m.evaluations,
            })
        }
        Family::Emor(k) => {
            let basis = basis.ok_or_else(|| Error::InvalidArgument("EMoR fit needs a basis".into()))?;
            let model = emor_project(curve, basis, k)?;
            let rec = emor_reconstruct(&model)?;
            let rmse = rmse_against(samples, rec.samples().iter().copied());
            Ok(FitOutcome {
                model: FittedModel::Emor(model),
                rmse,
                evaluations: 1,
            })
        }
    }
}
