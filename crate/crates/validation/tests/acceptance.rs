//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero when
//! any criterion fails.

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use crf_atlas::autoencoder::{
    gradients, load_model, loss_kl_ldl, model_to_json, train, ArchSpec, Constraint, DropoutMasks, LatentVariance,
    MlpWeights, SlrModel, TrainConfig, TrainingBatch,
};
use crf_atlas::bench::{
    camera_suite, parse_cells, run_calibration_bench, run_fitting_bench, to_csv, BenchMethod, CalibrationBenchConfig,
    CalibrationRow, FitCell, FittingRow, MethodOutcome,
};
use crf_atlas::calibration::{calibrate, rmse_vs_truth, synth_observations, CalibrationContext, Method};
use crf_atlas::curves::{parse_dorf, surrogate, write_dorf, Corpus, ResponseCurve};
use crf_atlas::models::{fit_model, EmorBasis, Family};
use crf_atlas::nas::{enumerate_space, naive_nas, rank_candidates, report_csv, select, NasConfig, Score, SearchSpace};
use crf_atlas_validation::{assets_dir, load_corpus, within, Source, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EMOR_REFERENCE: [f64; 4] = [3.60e-2, 1.24e-2, 5.71e-3, 3.21e-3];
const GAMMA_REFERENCE: f64 = 7.34e-3;
const POLY1_REFERENCE: f64 = 8.79e-3;
const REFERENCE_TOLERANCE: f64 = 0.15;
const SLR_RMSE_BOUND: f64 = 2e-3;
const SLR_TRAIN_BUDGET: Duration = Duration::from_secs(600);
const SLR_EVALUATION_BUDGET: usize = 164;

struct Context {
    corpus: Corpus,
    source: Source,
}

impl Context {
    fn surrogate(&self) -> bool {
        self.source.is_surrogate()
    }
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn shipped(name: &str) -> Result<SlrModel, String> {
    let path = assets_dir().join(name);
    load_model(&path).map_err(|e| format!("{}: {e}", path.display()))
}

fn shipped_json(name: &str) -> Result<serde_json::Value, String> {
    let path = assets_dir().join(name);
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn c1(_: &Context) -> Verdict {
    let mut v = Verdict::new(1, "DoRF ingestion");
    let check = |v: &mut Verdict, text: &str| {
        let start = Instant::now();
        match parse_dorf(text) {
            Ok(curves) => {
                let elapsed = start.elapsed();
                let shape = curves.len() == 201 && curves.iter().all(|c| c.len() == 1024);
                let ends = curves
                    .iter()
                    .all(|c| c.samples()[0] == 0.0 && c.samples()[c.len() - 1] == 1.0 && c.is_non_decreasing());
                v.check(
                    shape,
                    format!(
                        "{} curves x {} samples",
                        curves.len(),
                        curves.first().map_or(0, |c| c.len())
                    ),
                )
                .check(ends, "endpoints 0/1, non-decreasing")
                .check(
                    elapsed < Duration::from_secs(5),
                    format!("{:.2} s (< 5 s)", elapsed.as_secs_f64()),
                );
            }
            Err(e) => {
                v.check(false, format!("parse error: {e}"));
            }
        }
    };
    match crf_atlas_validation::dorf_path() {
        Some(path) => match std::fs::read_to_string(&path) {
            Ok(text) => check(&mut v, &text),
            Err(e) => {
                v.check(false, format!("{}: {e}", path.display()));
            }
        },
        None => {
            v.on_surrogate(true);
            v.check(
                false,
                "public DoRF file not available (set CRF_DORF_PATH or add data/dorfCurves.txt)",
            );
            let text = write_dorf(&surrogate::surrogate_corpus().curves);
            check(&mut v, &text);
            v.detail
                .push_str(" [the parser checks above ran on the surrogate written in DoRF format]");
        }
    }
    v
}

fn c2(ctx: &Context) -> Verdict {
    let mut v = Verdict::new(2, "EMoR reproduction");
    v.on_surrogate(ctx.surrogate());
    let start = Instant::now();
    let curves = &ctx.corpus.curves;
    let basis = match EmorBasis::build(curves, 4) {
        Ok(b) => Arc::new(b),
        Err(e) => return v.check(false, format!("basis: {e}")).clone(),
    };
    for (k, target) in (1..=4).zip(EMOR_REFERENCE) {
        let rmse: Vec<f64> = curves
            .iter()
            .map(|c| {
                fit_model(Family::Emor(k), c, Some(&basis))
                    .map(|o| o.rmse)
                    .unwrap_or(f64::NAN)
            })
            .collect();
        let m = mean(&rmse);
        v.check(
            within(m, target, REFERENCE_TOLERANCE),
            format!("k={k} mean {m:.3e} (reference {target:.2e} +-15%)"),
        );
    }
    let energy = basis.cumulative_energy(3);
    v.check(energy >= 0.995, format!("top-3 energy {:.4} (>= 0.995)", energy));
    let elapsed = start.elapsed();
    v.check(
        elapsed < Duration::from_secs(60),
        format!("{:.1} s (< 60 s)", elapsed.as_secs_f64()),
    );
    v
}

fn c3(ctx: &Context) -> Verdict {
    let mut v = Verdict::new(3, "Gamma and polynomial reproduction");
    v.on_surrogate(ctx.surrogate());
    let curves = &ctx.corpus.curves;
    let cells = match parse_cells("gamma,poly:1..4,emor:1..4,ggcm:1") {
        Ok(c) => c,
        Err(e) => return v.check(false, e.to_string()).clone(),
    };
    let out = match run_fitting_bench(curves, &cells, None, None) {
        Ok(o) => o,
        Err(e) => return v.check(false, e.to_string()).clone(),
    };
    let mean_of = |cell: FitCell| {
        out.iter()
            .find(|o| o.cell == cell)
            .and_then(|o| o.mean())
            .unwrap_or(f64::NAN)
    };
    let gamma = mean_of(FitCell::Classic(Family::Gamma));
    let poly1 = mean_of(FitCell::Classic(Family::Polynomial(1)));
    v.check(
        within(gamma, GAMMA_REFERENCE, REFERENCE_TOLERANCE),
        format!("gamma mean {gamma:.3e} (reference {GAMMA_REFERENCE:.2e} +-15%)"),
    );
    v.check(
        within(poly1, POLY1_REFERENCE, REFERENCE_TOLERANCE),
        format!("poly dim-1 mean {poly1:.3e} (reference {POLY1_REFERENCE:.2e} +-15%)"),
    );
    let nested = |make: fn(usize) -> Family| {
        let means: Vec<f64> = (1..=4).map(|k| mean_of(FitCell::Classic(make(k)))).collect();
        (means.windows(2).all(|w| w[1] <= w[0] + 1e-12), means)
    };
    let (poly_ok, poly) = nested(Family::Polynomial);
    let (emor_ok, emor) = nested(Family::Emor);
    v.check(poly_ok, format!("poly means non-increasing {}", sci(&poly)));
    v.check(emor_ok, format!("emor means non-increasing {}", sci(&emor)));
    let per_curve = |cell: FitCell| -> Vec<(String, f64)> {
        out.iter()
            .find(|o| o.cell == cell)
            .map(|o| o.rmse.clone())
            .unwrap_or_default()
    };
    let g = per_curve(FitCell::Classic(Family::Gamma));
    let gg = per_curve(FitCell::Classic(Family::Ggcm(1)));
    let worst = g
        .iter()
        .zip(&gg)
        .map(|((a, x), (b, y))| if a == b { y - x } else { f64::INFINITY })
        .fold(f64::NEG_INFINITY, f64::max);
    v.check(
        g.len() == curves.len() && gg.len() == curves.len() && worst <= 1e-6,
        format!("GGCM(1) - gamma per curve <= {worst:.2e} (<= 1e-6)"),
    );
    v
}

fn c4(ctx: &Context) -> Verdict {
    let mut v = Verdict::new(4, "SLR curve fitting");
    v.on_surrogate(ctx.surrogate());
    let model = match shipped("slr_default.json") {
        Ok(m) => m,
        Err(e) => return v.check(false, e).clone(),
    };
    let meta = model.metadata();
    v.check(
        meta.constraint == Constraint::Ldl,
        format!("constraint {}", meta.constraint.name()),
    );
    match shipped_json("nas_selected.json") {
        Ok(nas) => {
            let hidden: Vec<usize> = nas["selected"]["encoder_hidden"]
                .as_array()
                .map(|a| a.iter().filter_map(|x| x.as_u64().map(|x| x as usize)).collect())
                .unwrap_or_default();
            v.check(
                hidden == model.arch().encoder_hidden,
                format!("arch {:?} (search selected {hidden:?})", model.arch().encoder_hidden),
            );
        }
        Err(e) => {
            v.check(false, e);
        }
    }
    if let Some(tag) = &meta.corpus {
        v.check(
            tag.fingerprint == ctx.corpus.fingerprint(),
            format!("trained on '{}' ({} curves)", tag.name, tag.curves),
        );
    }
    let cells = [FitCell::Slr];
    match run_fitting_bench(&ctx.corpus.curves, &cells, Some(&model), None) {
        Ok(out) => {
            let m = out[0].mean().unwrap_or(f64::NAN);
            v.check(
                m <= SLR_RMSE_BOUND,
                format!("mean reconstruction RMSE {m:.3e} (<= {SLR_RMSE_BOUND:.0e})"),
            );
        }
        Err(e) => {
            v.check(false, e.to_string());
        }
    }
    match shipped_json("slr_default_summary.json") {
        Ok(s) => {
            let ms = s["elapsed_ms"].as_f64().unwrap_or(f64::INFINITY);
            v.check(
                ms <= SLR_TRAIN_BUDGET.as_secs_f64() * 1e3,
                format!("recorded training time {:.0} s on 1 core (<= 600 s)", ms / 1e3),
            );
        }
        Err(e) => {
            v.check(false, e);
        }
    }
    v
}

fn flat(w: &MlpWeights) -> Vec<f64> {
    w.layers
        .iter()
        .flat_map(|l| l.weights.iter().chain(l.biases.iter()).copied())
        .collect()
}

fn nudged(w: &MlpWeights, index: usize, delta: f64) -> MlpWeights {
    let mut out = w.clone();
    let mut k = index;
    for l in out.layers.iter_mut() {
        let n = l.weights.len();
        if k < n {
            *l.weights.iter_mut().nth(k).expect("in range") += delta;
            return out;
        }
        k -= n;
        if k < l.biases.len() {
            l.biases[k] += delta;
            return out;
        }
        k -= l.biases.len();
    }
    panic!("parameter index out of range");
}

fn c5(_: &Context) -> Verdict {
    let mut v = Verdict::new(5, "Gradient correctness");
    let start = Instant::now();
    let arch = ArchSpec::new(vec![5])
        .expect("valid")
        .with_input_size(8)
        .with_dropout_keep(1.0);
    let curves = surrogate::generate(6, 8, 29).expect("valid");
    let h = 1e-5;
    for constraint in [Constraint::None, Constraint::Ldl, Constraint::Auc] {
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for (smooth, latent) in [(1e-3, 1e-2), (0.1, 0.5)] {
            let config = TrainConfig {
                constraint,
                lambda_smooth: smooth,
                lambda_latent: latent,
                ..Default::default()
            };
            let batch = TrainingBatch::new(&curves, &config).expect("batch");
            let weights = MlpWeights::glorot(&arch, &mut ChaCha8Rng::seed_from_u64(11));
            let masks = DropoutMasks::none(&arch);
            let loss = |w: &MlpWeights| gradients(w, &arch, &batch, &config, &masks).expect("finite").0.total;
            let analytic = flat(&gradients(&weights, &arch, &batch, &config, &masks).expect("finite").1);
            for (i, &a) in analytic.iter().enumerate() {
                let numeric = (loss(&nudged(&weights, i, h)) - loss(&nudged(&weights, i, -h))) / (2.0 * h);
                let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
                worst = worst.max(rel);
                count += 1;
            }
        }
        v.check(
            worst <= 1e-4,
            format!(
                "{}: max relative error {worst:.1e} over {count} parameters",
                constraint.name()
            ),
        );
    }
    let elapsed = start.elapsed();
    v.check(
        elapsed < Duration::from_secs(30),
        format!("{:.2} s (< 30 s)", elapsed.as_secs_f64()),
    );
    v
}

/// KL(N(mu, s^2) || N(0, 1)) by Simpson's rule over mu +- 12 s.
fn kl_quadrature(mu: f64, s: f64) -> f64 {
    let log_pdf =
        |x: f64, m: f64, sd: f64| -0.5 * ((x - m) / sd).powi(2) - sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln();
    let (a, b) = (mu - 12.0 * s, mu + 12.0 * s);
    let n = 20_000;
    let step = (b - a) / n as f64;
    let f = |x: f64| {
        let lp = log_pdf(x, mu, s);
        lp.exp() * (lp - log_pdf(x, 0.0, 1.0))
    };
    let mut total = f(a) + f(b);
    for i in 1..n {
        total += f(a + i as f64 * step) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    total * step / 3.0
}

fn c6(_: &Context) -> Verdict {
    let mut v = Verdict::new(6, "KL/LDL identities");
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let raw: Vec<f64> = (0..64).map(|_| rng.random::<f64>() * 3.0 - 1.0).collect();
    let m = mean(&raw);
    let sd = (raw.iter().map(|x| (x - m).powi(2)).sum::<f64>() / raw.len() as f64).sqrt();
    let standardized: Vec<f64> = raw.iter().map(|x| (x - m) / sd).collect();
    let zero = loss_kl_ldl(&standardized, LatentVariance::Mean).unwrap_or(f64::NAN);
    v.check(zero.abs() <= 1e-12, format!("standardized batch {zero:.1e}"));
    let half = loss_kl_ldl(&[0.0, 2.0], LatentVariance::Mean).unwrap_or(f64::NAN);
    v.check((half - 0.5).abs() <= 1e-12, format!("(mu, sigma) = (1, 1): {half}"));
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let size = rng.random_range(2..200);
        let shift = rng.random_range(-2.0..2.0);
        let scale = rng.random_range(0.2..3.0);
        let z: Vec<f64> = (0..size).map(|_| shift + scale * (rng.random::<f64>() - 0.5)).collect();
        let mu = mean(&z);
        let s = (z.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / z.len() as f64).sqrt();
        let got = loss_kl_ldl(&z, LatentVariance::Mean).unwrap_or(f64::NAN);
        worst = worst.max((got - kl_quadrature(mu, s)).abs());
    }
    v.check(
        worst <= 1e-6,
        format!("50 random batches vs quadrature, max error {worst:.1e} (<= 1e-6)"),
    );
    v
}

/// Selection by definition: a candidate is eligible when fewer than
/// `top_m` candidates beat it on (accuracy, order); the answer is the
/// eligible candidate no other eligible one beats on (complexity,
/// accuracy, order).
fn brute_force_select(scores: &[Score], top_m: usize) -> usize {
    let better = |a: &Score, b: &Score| (a.accuracy, a.order) < (b.accuracy, b.order);
    let eligible: Vec<usize> = (0..scores.len())
        .filter(|&i| scores.iter().filter(|s| better(s, &scores[i])).count() < top_m)
        .collect();
    let key = |s: &Score| (s.complexity, s.accuracy, s.order);
    *eligible
        .iter()
        .find(|&&i| {
            eligible.iter().all(|&j| {
                let (a, b) = (key(&scores[i]), key(&scores[j]));
                a.0 < b.0 || (a.0 == b.0 && (a.1 < b.1 || (a.1 == b.1 && a.2 <= b.2)))
            })
        })
        .expect("non-empty")
}

fn c7(ctx: &Context) -> Verdict {
    let mut v = Verdict::new(7, "NAS");
    v.on_surrogate(ctx.surrogate());
    let archs = enumerate_space(&SearchSpace::default(), 1024, 1).expect("space");
    v.check(
        archs.len() == 156,
        format!("{} candidates in the default space", archs.len()),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut agree = 0;
    for t in 0..100 {
        let top_m = rng.random_range(1..=20);
        let accuracies: Vec<f64> = archs
            .iter()
            .map(|_| {
                if t % 4 == 0 {
                    (rng.random_range(0..8) as f64) * 1e-3
                } else {
                    rng.random::<f64>() * 1e-2
                }
            })
            .collect();
        let scores: Vec<Score> = archs
            .iter()
            .zip(&accuracies)
            .enumerate()
            .map(|(order, (a, &accuracy))| Score {
                accuracy,
                complexity: a.complexity(),
                order,
            })
            .collect();
        let oracle = brute_force_select(&scores, top_m);
        let direct = select(&scores, top_m).ok();
        let ranked = rank_candidates(archs.clone(), accuracies.iter().map(|&a| Ok(a)).collect(), top_m, 3)
            .ok()
            .map(|o| o.selected);
        if direct == Some(oracle) && ranked == Some(oracle) {
            agree += 1;
        }
    }
    v.check(
        agree == 100,
        format!("{agree}/100 injected tables match the brute-force selection"),
    );

    let curves: Vec<ResponseCurve> = ctx
        .corpus
        .curves
        .iter()
        .map(|c| c.resample(64).expect("resample"))
        .collect();
    let space = SearchSpace {
        h1: vec![10, 20],
        h2: vec![0, 10],
        h3: vec![0],
    };
    let config = NasConfig {
        train: TrainConfig {
            epochs: 200,
            ..Default::default()
        },
        ..Default::default()
    };
    let start = Instant::now();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("pool")
            .install(|| naive_nas(&space, &curves, &config))
    };
    match (run(1), run(4)) {
        (Ok(a), Ok(b)) => {
            let elapsed = start.elapsed();
            v.check(
                report_csv(&a) == report_csv(&b) && a.selected == b.selected,
                "1-thread and 4-thread searches identical",
            );
            v.check(
                elapsed < Duration::from_secs(600),
                format!("smoke search x2 in {:.1} s (< 600 s)", elapsed.as_secs_f64()),
            );
        }
        (a, b) => {
            v.check(false, format!("smoke search failed: {:?} / {:?}", a.err(), b.err()));
        }
    }
    v
}

fn slr_evaluations(outcomes: &[MethodOutcome]) -> usize {
    outcomes
        .iter()
        .filter(|o| o.label.starts_with("slr"))
        .flat_map(|o| o.cameras.iter().map(|c| c.evaluations_max))
        .max()
        .unwrap_or(0)
}

fn c8(ctx: &Context, bench: &Option<Result<Vec<MethodOutcome>, String>>) -> Verdict {
    let mut v = Verdict::new(8, "Calibration, in-family noiseless");
    let forward = ResponseCurve::from_fn(1024, |x| x.sqrt()).expect("curve");
    let truth = ResponseCurve::from_fn(1024, |x| x * x).expect("curve");
    let result = synth_observations(&forward, 24, 0.0, &[1.0], 8)
        .and_then(|obs| calibrate(&obs, Method::Classic(Family::Gamma), &CalibrationContext::default()))
        .and_then(|r| rmse_vs_truth(&r, &truth).map(|e| (r, e)));
    match result {
        Ok((r, e)) => {
            v.check(
                e <= 1e-3,
                format!(
                    "gamma=2, 24 points: inverse RMSE {e:.2e} (<= 1e-3), gamma {:.5}",
                    1.0 / r.parameters[0]
                ),
            );
        }
        Err(e) => {
            v.check(false, e.to_string());
        }
    }
    match shipped("slr_default.json") {
        Ok(model) => {
            let context = CalibrationContext {
                slr: Some(&model),
                ..Default::default()
            };
            let mut worst = 0;
            for (i, curve) in ctx.corpus.curves.iter().step_by(20).enumerate() {
                for n in [3, 24] {
                    match synth_observations(curve, n, 0.01, &[0.5, 1.0], i as u64)
                        .and_then(|obs| calibrate(&obs, Method::Slr, &context))
                    {
                        Ok(r) => worst = worst.max(r.evaluations),
                        Err(_) => worst = usize::MAX,
                    }
                }
            }
            let from_bench = match bench {
                Some(Ok(outcomes)) => slr_evaluations(outcomes),
                _ => 0,
            };
            let worst = worst.max(from_bench);
            v.check(
                worst <= SLR_EVALUATION_BUDGET,
                format!("SLR evaluations per calibration <= {worst} (<= 164)"),
            );
        }
        Err(e) => {
            v.check(false, e);
        }
    }
    v
}

fn run_suite(ctx: &Context) -> Result<(Vec<MethodOutcome>, Duration, Vec<String>), String> {
    let ldl = shipped("slr_holdout_ldl.json")?;
    let none = shipped("slr_holdout_none.json")?;
    let cameras = camera_suite(&ctx.corpus.curves, 14);
    let mut notes = Vec::new();
    for (name, model) in [("ldl", &ldl), ("none", &none)] {
        let leaked = cameras
            .iter()
            .filter(|c| !model.metadata().excluded_curves.contains(&c.id))
            .count();
        if leaked > 0 {
            notes.push(format!("{name} model saw {leaked} benchmark cameras in training"));
        }
    }
    let methods = [
        BenchMethod {
            label: "slr-ldl".into(),
            method: Method::Slr,
            slr: Some(&ldl),
            emor: None,
        },
        BenchMethod {
            label: "slr-none".into(),
            method: Method::Slr,
            slr: Some(&none),
            emor: None,
        },
        BenchMethod {
            label: "poly:3".into(),
            method: Method::Classic(Family::Polynomial(3)),
            slr: None,
            emor: None,
        },
    ];
    let config = CalibrationBenchConfig {
        seeds: (0..20).collect(),
        samples: ctx.corpus.sample_count(),
        ..Default::default()
    };
    let start = Instant::now();
    let out = run_calibration_bench(&cameras, &methods, &config).map_err(|e| e.to_string())?;
    Ok((out, start.elapsed(), notes))
}

fn c9(ctx: &Context, suite: &Result<(Vec<MethodOutcome>, Duration, Vec<String>), String>) -> Verdict {
    let mut v = Verdict::new(9, "Calibration, synthetic suite");
    v.on_surrogate(ctx.surrogate());
    let (out, elapsed, notes) = match suite {
        Ok(s) => s,
        Err(e) => return v.check(false, e.clone()).clone(),
    };
    for n in notes {
        v.check(false, n.clone());
    }
    let get = |label: &str| out.iter().find(|o| o.label == label);
    let (Some(ldl), Some(none), Some(poly)) = (get("slr-ldl"), get("slr-none"), get("poly:3")) else {
        return v.check(false, "missing method outcome").clone();
    };
    let m = |o: &MethodOutcome| o.mean().unwrap_or(f64::NAN);
    let s = |o: &MethodOutcome| o.stability_mean.unwrap_or(f64::NAN);
    v.check(
        m(ldl) <= m(poly),
        format!("SLR+LDL mean {:.3e} vs poly(3) {:.3e}", m(ldl), m(poly)),
    );
    v.check(
        s(ldl) <= s(poly),
        format!("SLR stability {:.3e} vs poly(3) {:.3e}", s(ldl), s(poly)),
    );
    v.check(
        m(ldl) <= m(none),
        format!("SLR+LDL mean {:.3e} vs SLR+none {:.3e}", m(ldl), m(none)),
    );
    let failures: usize = out.iter().map(|o| o.failures).sum();
    v.check(failures == 0, format!("{failures} failed calibrations"));
    v.check(
        *elapsed < Duration::from_secs(900),
        format!(
            "14 cameras x 4 patch counts x 20 seeds in {:.1} s (< 900 s)",
            elapsed.as_secs_f64()
        ),
    );
    v
}

fn c10(ctx: &Context) -> Verdict {
    let mut v = Verdict::new(10, "Determinism");
    let curves = surrogate::generate(8, 64, 10).expect("curves");
    let arch = ArchSpec::new(vec![12, 6]).expect("arch").with_input_size(64);
    let config = TrainConfig {
        epochs: 60,
        seed: 4,
        ..Default::default()
    };
    let model_bytes = || train(&curves, &arch, &config).and_then(|(m, _)| model_to_json(&m)).ok();
    let (a, b) = (model_bytes(), model_bytes());
    v.check(a.is_some() && a == b, "model files");

    let fitting = || {
        let cells = parse_cells("gamma,poly:2,ggcm:2,emor:2").ok()?;
        let rows: Vec<FittingRow> = run_fitting_bench(&curves, &cells, None, None)
            .ok()?
            .iter()
            .map(|o| FittingRow {
                time_ms: 0.0,
                ..o.row()
            })
            .collect();
        to_csv(&rows).ok()
    };
    let (a, b) = (fitting(), fitting());
    v.check(a.is_some() && a == b, "fitting report");

    let calibration = || {
        let cameras = camera_suite(&ctx.corpus.curves, 3);
        let methods = [BenchMethod {
            label: "ggcm:2".into(),
            method: Method::Classic(Family::Ggcm(2)),
            slr: None,
            emor: None,
        }];
        let config = CalibrationBenchConfig {
            noccps: vec![6],
            samples: ctx.corpus.sample_count(),
            ..Default::default()
        };
        let rows: Vec<CalibrationRow> = run_calibration_bench(&cameras, &methods, &config)
            .ok()?
            .iter()
            .map(|o| CalibrationRow {
                time_ms: 0.0,
                ..o.row()
            })
            .collect();
        to_csv(&rows).ok()
    };
    let (a, b) = (calibration(), calibration());
    v.check(a.is_some() && a == b, "calibration report");

    match std::fs::read(assets_dir().join("slr_default.json")) {
        Ok(bytes) => {
            let again = crf_atlas::autoencoder::model_from_json(&bytes).and_then(|m| model_to_json(&m));
            v.check(
                again.as_ref().ok() == Some(&bytes),
                "shipped model load/save byte-identical",
            );
        }
        Err(e) => {
            v.check(false, format!("shipped model: {e}"));
        }
    }
    v
}

fn guarded(id: u8, f: impl FnOnce() -> Verdict) -> Verdict {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        let mut v = Verdict::new(id, "criterion");
        v.check(false, format!("panicked: {msg}"));
        v
    })
}

fn main() {
    // The harness passes libtest flags; a filter that does not name this
    // suite means another target was requested.
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return;
    }
    let (corpus, source) = match load_corpus() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("cannot load curves: {e}");
            std::process::exit(1);
        }
    };
    let ctx = Context { corpus, source };
    let mut out = std::io::stdout();
    let _ = writeln!(
        out,
        "acceptance: {} curves from {}",
        ctx.corpus.len(),
        match &ctx.source {
            Source::Dorf(p) => p.display().to_string(),
            Source::Surrogate => "the built-in surrogate (public DoRF file not found)".into(),
        }
    );
    let suite = run_suite(&ctx);
    let bench = Some(suite.as_ref().map(|s| s.0.clone()).map_err(Clone::clone));
    let verdicts: Vec<Verdict> = vec![
        guarded(1, || c1(&ctx)),
        guarded(2, || c2(&ctx)),
        guarded(3, || c3(&ctx)),
        guarded(4, || c4(&ctx)),
        guarded(5, || c5(&ctx)),
        guarded(6, || c6(&ctx)),
        guarded(7, || c7(&ctx)),
        guarded(8, || c8(&ctx, &bench)),
        guarded(9, || c9(&ctx, &suite)),
        guarded(10, || c10(&ctx)),
    ];
    for v in &verdicts {
        let _ = writeln!(out, "{v}");
    }
    let failed = verdicts.iter().filter(|v| !v.passed).count();
    let _ = writeln!(out, "acceptance: {} passed, {failed} failed", verdicts.len() - failed);
    let _ = out.flush();
    if failed > 0 {
        std::process::exit(1);
    }
}
