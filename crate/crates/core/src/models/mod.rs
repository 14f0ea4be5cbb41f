//! Classical parametric response models: gamma, polynomial, generalized
//! gamma (GGCM) and the PCA-based empirical model (EMoR).

mod emor;
mod fit;

pub use emor::{emor_project, emor_reconstruct, EmorBasis, EmorModel};
pub use fit::{fit_model, FitOutcome, FittedModel};
pub(crate) use fit::{GAMMA_MAX, GAMMA_MIN};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `f(x) = x^gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaModel {
    gamma: f64,
}

impl GammaModel {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn eval(&self, x: f64) -> f64 {
        x.powf(self.gamma)
    }
}

/// `f(x) = sum_{i=1..M} w_i x^i`, no constant term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialModel {
    coefficients: Vec<f64>,
}

impl PolynomialModel {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidArgument(
                "polynomial needs at least one coefficient".into(),
            ));
        }
        Ok(Self { coefficients })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    pub fn eval(&self, x: f64) -> f64 {
        polynomial_no_constant(&self.coefficients, x)
    }
}

/// `f(x) = x^{P(x)}` with `P(x) = sum_{i=0..N} w_i x^i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GgcmModel {
    coefficients: Vec<f64>,
}

impl GgcmModel {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidArgument("GGCM needs at least one coefficient".into()));
        }
        Ok(Self { coefficients })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn exponent(&self, x: f64) -> f64 {
        horner(&self.coefficients, x)
    }

    /// Evaluates the model. At `x = 0` the limit is 0 when `P(0) > 0`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if x == 0.0 {
            if self.coefficients[0] > 0.0 {
                return Ok(0.0);
            }
            return Err(Error::Domain(x));
        }
        Ok(x.powf(self.exponent(x)))
    }
}

/// `sum_i c[i] x^i` (constant term first).
pub(crate) fn horner(coefficients: &[f64], x: f64) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// `sum_{i=1..M} c[i-1] x^i`.
pub(crate) fn polynomial_no_constant(coefficients: &[f64], x: f64) -> f64 {
    x * horner(coefficients, x)
}

pub fn eval_gamma(model: &GammaModel, x: f64) -> f64 {
    model.eval(x)
}

pub fn eval_polynomial(model: &PolynomialModel, x: f64) -> f64 {
    model.eval(x)
}

pub fn eval_ggcm(model: &GgcmModel, x: f64) -> Result<f64> {
    model.eval(x)
}

/// Model family with its parameter count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gamma,
    Polynomial(usize),
    Ggcm(usize),
    Emor(usize),
}

impl Family {
    pub fn parameter_count(&self) -> usize {
        match *self {
            Family::Gamma => 1,
            Family::Polynomial(n) | Family::Ggcm(n) | Family::Emor(n) => n,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Gamma => "gamma",
            Family::Polynomial(_) => "poly",
            Family::Ggcm(_) => "ggcm",
            Family::Emor(_) => "emor",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Gamma => write!(f, "gamma"),
            other => write!(f, "{}:{}", other.name(), other.parameter_count()),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    /// Accepts `gamma`, `poly:M`, `ggcm:M`, `emor:K` (`polynomial` is an
    /// alias of `poly`).
    fn from_str(s: &str) -> Result<Self> {
        let (name, count) = match s.split_once(':') {
            Some((n, c)) => {
                let count: usize = c
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad parameter count in '{s}'")))?;
                (n, Some(count))
            }
            None => (s, None),
        };
        if count == Some(0) {
            return Err(Error::InvalidArgument(format!("'{s}': parameter count must be >= 1")));
        }
        match (name, count) {
            ("gamma", None) | ("gamma", Some(1)) => Ok(Family::Gamma),
            ("gamma", Some(_)) => Err(Error::InvalidArgument("gamma has exactly one parameter".into())),
            ("poly" | "polynomial", c) => Ok(Family::Polynomial(c.unwrap_or(3))),
            ("ggcm", c) => Ok(Family::Ggcm(c.unwrap_or(3))),
            ("emor", c) => Ok(Family::Emor(c.unwrap_or(3))),
            _ => Err(Error::InvalidArgument(format!("unknown model family '{s}'"))),
        }
    }
}
