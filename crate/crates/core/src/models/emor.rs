use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::curves::ResponseCurve;
use crate::error::{Error, Result};

/// Mean curve plus the leading principal directions of a curve corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct EmorBasis {
    f0: Vec<f64>,
    /// `K` orthonormal columns, each of length `N`.
    eigenvectors: Vec<Vec<f64>>,
    /// Leading `K` covariance eigenvalues, descending.
    eigenvalues: Vec<f64>,
    /// Sum of all covariance eigenvalues (total variance).
    total_energy: f64,
}

impl EmorBasis {
    /// PCA of `curves` via the SVD of the mean-centered data matrix.
    ///
    /// Each eigenvector is sign-fixed so its largest-magnitude entry is
    /// positive.
    pub fn build(curves: &[ResponseCurve], k: usize) -> Result<Self> {
        if curves.len() < 2 {
            return Err(Error::InvalidArgument("PCA needs at least 2 curves".into()));
        }
        let n = curves[0].len();
        for c in curves {
            if c.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: c.len(),
                });
            }
        }
        let m = curves.len();
        if k == 0 || k > n.min(m) {
            return Err(Error::InvalidArgument(format!("K = {k} must be in 1..={}", n.min(m))));
        }

        let mut f0 = vec![0.0; n];
        for c in curves {
            for (acc, v) in f0.iter_mut().zip(c.samples()) {
                *acc += v;
            }
        }
        for v in f0.iter_mut() {
            *v /= m as f64;
        }

        // N x M so the left singular vectors are the principal directions.
        let centered = DMatrix::from_fn(n, m, |i, j| curves[j].samples()[i] - f0[i]);
        let svd = centered.svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

        let scale = 1.0 / (m - 1) as f64;
        let total_energy = svd.singular_values.iter().map(|s| s * s * scale).sum();
        let mut eigenvectors = Vec::with_capacity(k);
        let mut eigenvalues = Vec::with_capacity(k);
        for &col in order.iter().take(k) {
            let mut v: Vec<f64> = u.column(col).iter().copied().collect();
            let pivot = v
                .iter()
                .copied()
                .max_by(|a, b| a.abs().total_cmp(&b.abs()))
                .unwrap_or(0.0);
            if pivot < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            eigenvectors.push(v);
            let s = svd.singular_values[col];
            eigenvalues.push(s * s * scale);
        }
        Ok(Self {
            f0,
            eigenvectors,
            eigenvalues,
            total_energy,
        })
    }

    pub fn mean(&self) -> &[f64] {
        &self.f0
    }

    pub fn eigenvectors(&self) -> &[Vec<f64>] {
        &self.eigenvectors
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn total_energy(&self) -> f64 {
        self.total_energy
    }

    pub fn rank(&self) -> usize {
        self.eigenvectors.len()
    }

    pub fn sample_count(&self) -> usize {
        self.f0.len()
    }

    /// Fraction of total variance carried by the first `k` components.
    pub fn cumulative_energy(&self, k: usize) -> f64 {
        if self.total_energy == 0.0 {
            return 1.0;
        }
        self.eigenvalues.iter().take(k).sum::<f64>() / self.total_energy
    }

    /// `f0 + sum_i c_i h_i` without normalization.
    pub fn combine(&self, coefficients: &[f64]) -> Vec<f64> {
        let mut out = self.f0.clone();
        for (c, h) in coefficients.iter().zip(&self.eigenvectors) {
            for (o, v) in out.iter_mut().zip(h) {
                *o += c * v;
            }
        }
        out
    }

    /// Basis CSV: header, then one row per sample with `f0,h1..hK`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("f0");
        for i in 1..=self.rank() {
            let _ = write!(out, ",h{i}");
        }
        out.push('\n');
        for (row, f) in self.f0.iter().enumerate() {
            let _ = write!(out, "{f:e}");
            for h in &self.eigenvectors {
                let _ = write!(out, ",{:e}", h[row]);
            }
            out.push('\n');
        }
        out
    }

    /// Eigenvalue sidecar CSV: `component,eigenvalue,cumulative_energy`.
    pub fn eigenvalues_csv(&self) -> String {
        let mut out = String::from("component,eigenvalue,cumulative_energy\n");
        for (i, e) in self.eigenvalues.iter().enumerate() {
            let _ = writeln!(out, "{},{e:e},{:e}", i + 1, self.cumulative_energy(i + 1));
        }
        out
    }
}

/// A curve expressed by `k` coefficients against a shared basis.
#[derive(Debug, Clone)]
pub struct EmorModel {
    basis: Arc<EmorBasis>,
    coefficients: Vec<f64>,
}

impl EmorModel {
    pub fn new(basis: Arc<EmorBasis>, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() > basis.rank() {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients exceed basis rank {}",
                coefficients.len(),
                basis.rank()
            )));
        }
        Ok(Self { basis, coefficients })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn basis(&self) -> &Arc<EmorBasis> {
        &self.basis
    }
}

/// `c = H_k^T (f - f0)`.
pub fn emor_project(curve: &ResponseCurve, basis: &Arc<EmorBasis>, k: usize) -> Result<EmorModel> {
    if k > basis.rank() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds basis rank {}",
            basis.rank()
        )));
    }
    if curve.len() != basis.sample_count() {
        return Err(Error::LengthMismatch {
            expected: basis.sample_count(),
            actual: curve.len(),
        });
    }
    let coefficients = basis.eigenvectors[..k]
        .iter()
        .map(|h| {
            curve
                .samples()
                .iter()
                .zip(&basis.f0)
                .zip(h)
                .map(|((f, m), v)| (f - m) * v)
                .sum()
        })
        .collect();
    EmorModel::new(Arc::clone(basis), coefficients)
}

/// `f0 + c^T H`, normalized to pass through the endpoints.
pub fn emor_reconstruct(model: &EmorModel) -> Result<ResponseCurve> {
    ResponseCurve::normalize(&model.basis.combine(&model.coefficients))
}
