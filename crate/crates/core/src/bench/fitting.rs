use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::Table;
use super::stats::{summarize, SummaryStats};
use crate::autoencoder::SlrModel;
use crate::curves::ResponseCurve;
use crate::error::{Error, Result};
use crate::models::{fit_model, EmorBasis, Family, FittedModel, GgcmModel};

/// One column of the fitting table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FitCell {
    Classic(Family),
    Slr,
}

impl fmt::Display for FitCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitCell::Classic(family) => family.fmt(f),
            FitCell::Slr => f.write_str("slr"),
        }
    }
}

impl FromStr for FitCell {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "slr" {
            Ok(FitCell::Slr)
        } else {
            Ok(FitCell::Classic(s.parse()?))
        }
    }
}

impl FitCell {
    pub fn parameter_count(&self) -> usize {
        match self {
            FitCell::Classic(f) => f.parameter_count(),
            FitCell::Slr => 1,
        }
    }
}

/// Parses a comma list such as `gamma,poly:1..4,emor:3,slr`; `name:a..b`
/// expands to every count in the inclusive range.
pub fn parse_cells(list: &str) -> Result<Vec<FitCell>> {
    let mut cells = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once(':') {
            Some((name, range)) if range.contains("..") => {
                let (a, b) = range.split_once("..").expect("checked");
                let parse = |t: &str| {
                    t.parse::<usize>()
                        .map_err(|_| Error::InvalidArgument(format!("bad range in '{item}'")))
                };
                let (a, b) = (parse(a)?, parse(b)?);
                if a == 0 || b < a {
                    return Err(Error::InvalidArgument(format!("bad range in '{item}'")));
                }
                for k in a..=b {
                    cells.push(format!("{name}:{k}").parse()?);
                }
            }
            _ => cells.push(item.parse()?),
        }
    }
    if cells.is_empty() {
        return Err(Error::InvalidArgument("no models requested".into()));
    }
    Ok(cells)
}

/// Per-curve fit errors of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellOutcome {
    pub cell: FitCell,
    /// `(curve id, rmse)` for every curve that was fitted.
    pub rmse: Vec<(String, f64)>,
    /// Curves whose solver hit its budget; their best-so-far fit is kept.
    pub unconverged: Vec<String>,
    /// Curves that could not be fitted, with the reason.
    pub failures: Vec<(String, String)>,
    pub evaluations: usize,
    pub summary: Option<SummaryStats>,
}

/// One row of the fitting report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittingRow {
    pub model: String,
    pub parameters: usize,
    pub curves: usize,
    pub mean_rmse: Option<f64>,
    pub median_rmse: Option<f64>,
    pub sd_rmse: Option<f64>,
    pub max_rmse: Option<f64>,
    pub p95_rmse: Option<f64>,
    pub unconverged: usize,
    pub failed: usize,
    pub evaluations: usize,
    pub time_ms: f64,
}

impl Table for FittingRow {
    const HEADER: &'static [&'static str] = &[
        "model",
        "parameters",
        "curves",
        "mean_rmse",
        "median_rmse",
        "sd_rmse",
        "max_rmse",
        "p95_rmse",
        "unconverged",
        "failed",
        "evaluations",
        "time_ms",
    ];
}

impl CellOutcome {
    pub fn mean(&self) -> Option<f64> {
        self.summary.map(|s| s.mean)
    }

    pub fn row(&self) -> FittingRow {
        let s = self.summary;
        FittingRow {
            model: self.cell.to_string(),
            parameters: self.cell.parameter_count(),
            curves: self.rmse.len(),
            mean_rmse: s.map(|s| s.mean),
            median_rmse: s.map(|s| s.median),
            sd_rmse: s.map(|s| s.sd),
            max_rmse: s.map(|s| s.max),
            p95_rmse: s.map(|s| s.p95),
            unconverged: self.unconverged.len(),
            failed: self.failures.len(),
            evaluations: self.evaluations,
            time_ms: s.map(|s| s.time_ms).unwrap_or(0.0),
        }
    }
}

enum CurveFit {
    Done {
        rmse: f64,
        evaluations: usize,
        converged: bool,
    },
    Failed(String),
}

fn fit_one(cell: FitCell, curve: &ResponseCurve, basis: Option<&Arc<EmorBasis>>, slr: Option<&SlrModel>) -> CurveFit {
    match cell {
        FitCell::Slr => match slr.map(|m| m.fit_curve(curve)) {
            Some(Ok(fit)) => CurveFit::Done {
                rmse: fit.rmse,
                evaluations: fit.evaluations,
                converged: true,
            },
            Some(Err(e)) => CurveFit::Failed(e.to_string()),
            None => CurveFit::Failed("no autoencoder weights".into()),
        },
        FitCell::Classic(family) => match fit_model(family, curve, basis) {
            Ok(out) => CurveFit::Done {
                rmse: out.rmse,
                evaluations: out.evaluations,
                converged: true,
            },
            Err(Error::NotConverged {
                best_params,
                iterations,
                ..
            }) => match GgcmModel::new(best_params) {
                Ok(model) => {
                    let fitted = FittedModel::Ggcm(model);
                    match fitted
                        .sample(curve.len())
                        .and_then(|v| super::rmse(curve.samples(), &v))
                    {
                        Ok(rmse) if rmse.is_finite() => CurveFit::Done {
                            rmse,
                            evaluations: iterations,
                            converged: false,
                        },
                        Ok(_) => CurveFit::Failed("non-finite best-so-far fit".into()),
                        Err(e) => CurveFit::Failed(e.to_string()),
                    }
                }
                Err(e) => CurveFit::Failed(e.to_string()),
            },
            Err(e) => CurveFit::Failed(e.to_string()),
        },
    }
}

/// Fits every curve with every requested cell and summarizes per cell.
///
/// The EMoR cells use `basis` when given, otherwise a basis built from
/// `curves` themselves. The autoencoder cell encodes each curve and refines
/// its latent code.
pub fn run_fitting_bench(
    curves: &[ResponseCurve],
    cells: &[FitCell],
    slr: Option<&SlrModel>,
    basis: Option<Arc<EmorBasis>>,
) -> Result<Vec<CellOutcome>> {
    if curves.is_empty() {
        return Err(Error::InvalidArgument("no curves to fit".into()));
    }
    let needs_emor = cells
        .iter()
        .filter_map(|c| match c {
            FitCell::Classic(Family::Emor(k)) => Some(*k),
            _ => None,
        })
        .max();
    let basis = match (basis, needs_emor) {
        (Some(b), _) => Some(b),
        (None, Some(k)) => Some(Arc::new(EmorBasis::build(curves, k.min(curves.len()))?)),
        (None, None) => None,
    };
    if cells.contains(&FitCell::Slr) && slr.is_none() {
        return Err(Error::InvalidArgument("the slr cell needs a trained model".into()));
    }
    cells
        .iter()
        .map(|&cell| {
            let start = Instant::now();
            let fits: Vec<CurveFit> = curves
                .par_iter()
                .map(|c| fit_one(cell, c, basis.as_ref(), slr))
                .collect();
            let elapsed = start.elapsed();
            let mut outcome = CellOutcome {
                cell,
                rmse: Vec::new(),
                unconverged: Vec::new(),
                failures: Vec::new(),
                evaluations: 0,
                summary: None,
            };
            for (curve, fit) in curves.iter().zip(fits) {
                match fit {
                    CurveFit::Done {
                        rmse,
                        evaluations,
                        converged,
                    } => {
                        outcome.rmse.push((curve.id().to_string(), rmse));
                        outcome.evaluations += evaluations;
                        if !converged {
                            outcome.unconverged.push(curve.id().to_string());
                        }
                    }
                    CurveFit::Failed(reason) => {
                        log::warn!("{cell} on {}: {reason}", curve.id());
                        outcome.failures.push((curve.id().to_string(), reason));
                    }
                }
            }
            if !outcome.rmse.is_empty() {
                let h: Vec<f64> = outcome.rmse.iter().map(|(_, r)| *r).collect();
                outcome.summary = Some(summarize(&h, elapsed)?);
            }
            Ok(outcome)
        })
        .collect()
}
