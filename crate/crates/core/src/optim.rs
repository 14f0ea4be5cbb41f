//! Derivative-free minimizers: golden-section search, a coarse-grid plus
//! golden-section 1-D scheme, and Nelder–Mead.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Result of a minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub iterations: usize,
}

/// Golden-section search on `[lo, hi]` until the bracket is narrower than
/// `tol` or `max_evals` evaluations are spent.
pub fn golden_section(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64, max_evals: usize) -> Minimum {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evals = 2;
    let mut iterations = 0;
    while (hi - lo) > tol && evals < max_evals {
        iterations += 1;
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
        evals += 1;
    }
    let (x, value) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    Minimum {
        x: vec![x],
        value,
        evaluations: evals,
        iterations,
    }
}

/// Settings for [`grid_then_golden`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGolden {
    pub grid_points: usize,
    pub tol: f64,
    pub max_golden_evals: usize,
}

impl Default for GridGolden {
    fn default() -> Self {
        Self {
            grid_points: 64,
            tol: 1e-6,
            max_golden_evals: 100,
        }
    }
}

/// Evaluates `f` on a uniform grid over `[lo, hi]`, then refines around the
/// best probe with golden-section search. The returned value is never worse
/// than the best grid probe.
pub fn grid_then_golden(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, settings: GridGolden) -> Minimum {
    let n = settings.grid_points.max(2);
    let step = (hi - lo) / (n - 1) as f64;
    let probes: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let x = if i + 1 == n { hi } else { lo + step * i as f64 };
            (x, f(x))
        })
        .collect();
    let best = probes
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let a = probes[best.saturating_sub(1)].0;
    let b = probes[(best + 1).min(n - 1)].0;
    let refined = golden_section(&mut f, a, b, settings.tol, settings.max_golden_evals);
    let (x, value) = if refined.value <= probes[best].1 {
        (refined.x[0], refined.value)
    } else {
        probes[best]
    };
    Minimum {
        x: vec![x],
        value,
        evaluations: n + refined.evaluations,
        iterations: refined.iterations,
    }
}

/// Nelder–Mead settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMead {
    /// Stop when both the spread of simplex values and the simplex diameter
    /// fall below this tolerance.
    pub tol: f64,
    pub max_iterations: usize,
    pub max_evaluations: usize,
    /// Initial simplex offset along each coordinate.
    pub initial_step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iterations: 2000,
            max_evaluations: usize::MAX,
            initial_step: 0.1,
        }
    }
}

impl NelderMead {
    /// Minimizes `f` from `start`. Non-convergence within the budget yields
    /// [`Error::NotConverged`] carrying the best vertex.
    pub fn minimize(&self, mut f: impl FnMut(&[f64]) -> f64, start: &[f64]) -> Result<Minimum> {
        let dim = start.len();
        if dim == 0 {
            return Err(Error::InvalidArgument("empty parameter vector".into()));
        }
        let mut evals = 0usize;
        let mut eval = |x: &[f64], evals: &mut usize| {
            *evals += 1;
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };

        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
        simplex.push(start.to_vec());
        for i in 0..dim {
            let mut v = start.to_vec();
            v[i] += self.initial_step;
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evals)).collect();

        let mut iterations = 0;
        loop {
            let mut order: Vec<usize> = (0..=dim).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            let spread = values[dim] - values[0];
            let diameter = simplex[1..]
                .iter()
                .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if spread <= self.tol && diameter <= self.tol {
                return Ok(Minimum {
                    x: simplex[0].clone(),
                    value: values[0],
                    evaluations: evals,
                    iterations,
                });
            }
            if iterations >= self.max_iterations || evals + dim + 2 > self.max_evaluations {
                return Err(Error::NotConverged {
                    best_params: simplex[0].clone(),
                    best_value: values[0],
                    iterations,
                });
            }
            iterations += 1;

            let centroid: Vec<f64> = (0..dim)
                .map(|j| simplex[..dim].iter().map(|v| v[j]).sum::<f64>() / dim as f64)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[dim])
                    .map(|(c, w)| c + t * (w - c))
                    .collect()
            };

            let reflected = along(-1.0);
            let fr = eval(&reflected, &mut evals);
            if fr < values[0] {
                let expanded = along(-2.0);
                let fe = eval(&expanded, &mut evals);
                if fe < fr {
                    simplex[dim] = expanded;
                    values[dim] = fe;
                } else {
                    simplex[dim] = reflected;
                    values[dim] = fr;
                }
                continue;
            }
            if fr < values[dim - 1] {
                simplex[dim] = reflected;
                values[dim] = fr;
                continue;
            }
            let (contracted, fc) = if fr < values[dim] {
                let c = along(-0.5);
                let fc = eval(&c, &mut evals);
                (c, fc)
            } else {
                let c = along(0.5);
                let fc = eval(&c, &mut evals);
                (c, fc)
            };
            if fc < values[dim].min(fr) {
                simplex[dim] = contracted;
                values[dim] = fc;
                continue;
            }
            // shrink toward the best vertex
            for i in 1..=dim {
                let shrunk: Vec<f64> = simplex[i]
                    .iter()
                    .zip(&simplex[0])
                    .map(|(x, b)| b + 0.5 * (x - b))
                    .collect();
                values[i] = eval(&shrunk, &mut evals);
                simplex[i] = shrunk;
            }
        }
    }
}
