//! Deterministic DoRF-like corpus used when the measured database is not
//! available locally.
//!
//! Curves are drawn from four shape families seen in measured responses:
//! power laws with a shoulder (digital), log-logistic film characteristics,
//! polynomial-exponent gammas, and a minority of contrast-expanding curves
//! below the diagonal. A small low-frequency wobble is added and the result
//! is projected back to a non-decreasing sequence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{pool_adjacent_violators, Corpus, ResponseCurve, SampleGrid, DEFAULT_SAMPLES};
use crate::error::Result;

/// Number of curves in the measured database.
pub const SURROGATE_COUNT: usize = 201;
pub const SURROGATE_SEED: u64 = 0x00D0_0F20_0401;
pub const SURROGATE_NAME: &str = "surrogate-dorf";

/// The default surrogate corpus: 201 curves of 1024 samples.
pub fn surrogate_corpus() -> Corpus {
    let curves = generate(SURROGATE_COUNT, DEFAULT_SAMPLES, SURROGATE_SEED).expect("surrogate parameters are valid");
    Corpus {
        name: SURROGATE_NAME.to_string(),
        curves,
    }
}

#[derive(Debug, Clone, Copy)]
enum Shape {
    Digital { gamma: f64, shoulder: f64 },
    Film { midpoint: f64, slope: f64 },
    PolyGamma { a: f64, b: f64, c: f64 },
    Expanding { gamma: f64 },
}

impl Shape {
    fn draw(rng: &mut ChaCha8Rng) -> Self {
        let r: f64 = rng.random();
        if r < 0.40 {
            Shape::Digital {
                gamma: rng.random_range(1.3..2.8),
                shoulder: rng.random_range(0.0..0.6),
            }
        } else if r < 0.75 {
            Shape::Film {
                midpoint: rng.random_range(0.08..0.7),
                slope: rng.random_range(0.9..2.4),
            }
        } else if r < 0.90 {
            Shape::PolyGamma {
                a: rng.random_range(0.3..0.9),
                b: rng.random_range(-0.2..0.5),
                c: rng.random_range(-0.2..0.2),
            }
        } else {
            Shape::Expanding {
                gamma: rng.random_range(1.05..2.0),
            }
        }
    }

    fn tag(&self) -> &'static str {
        match self {
            Shape::Digital { .. } => "digital",
            Shape::Film { .. } => "film",
            Shape::PolyGamma { .. } => "polygamma",
            Shape::Expanding { .. } => "expanding",
        }
    }

    fn eval(&self, x: f64) -> f64 {
        match *self {
            Shape::Digital { gamma, shoulder } => {
                let y = x.powf(1.0 / gamma);
                // smooth highlight roll-off, monotone for shoulder < 1
                y + shoulder * y * (1.0 - y) * (0.5 - y)
            }
            Shape::Film { midpoint, slope } => {
                let f = |t: f64| {
                    if t <= 0.0 {
                        0.0
                    } else {
                        1.0 / (1.0 + (midpoint / t).powf(slope))
                    }
                };
                f(x) / f(1.0)
            }
            Shape::PolyGamma { a, b, c } => {
                if x <= 0.0 {
                    0.0
                } else {
                    x.powf(a + b * x + c * x * x)
                }
            }
            Shape::Expanding { gamma } => x.powf(gamma),
        }
    }
}

/// Generates `count` curves of `n` samples from `seed`.
pub fn generate(count: usize, n: usize, seed: u64) -> Result<Vec<ResponseCurve>> {
    let grid = SampleGrid::new(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut curves = Vec::with_capacity(count);
    for index in 0..count {
        let shape = Shape::draw(&mut rng);
        let wobble: [f64; 3] = [
            rng.random_range(-0.004..0.004),
            rng.random_range(-0.003..0.003),
            rng.random_range(-0.002..0.002),
        ];
        let raw: Vec<f64> = grid
            .positions()
            .map(|x| {
                let w: f64 = wobble
                    .iter()
                    .enumerate()
                    .map(|(k, a)| a * ((k + 1) as f64 * std::f64::consts::PI * x).sin())
                    .sum();
                shape.eval(x) + w
            })
            .collect();
        let monotone = pool_adjacent_violators(&raw);
        let curve = ResponseCurve::normalize(&monotone)?.with_id(format!("surrogate-{index:03}-{}", shape.tag()));
        curves.push(curve);
    }
    Ok(curves)
}
