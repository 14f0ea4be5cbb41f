use std::collections::BTreeMap;

use crf_atlas::autoencoder::SlrModel;
use crf_atlas::bench::{
    camera_suite, curves_svg, emit_report, run_calibration_bench, BenchMethod, CalibrationBenchConfig, CalibrationRow,
    CameraRow,
};
use crf_atlas::calibration::Method;
use crf_atlas::curves::{invert, ResponseCurve};
use crf_atlas::models::Family;
use serde::Serialize;

use crate::args::BenchArgs;
use crate::assets::{load_corpus, load_slr, HOLDOUT_LDL_MODEL, HOLDOUT_NONE_MODEL};
use crate::config::{parse_list, usage, write_file, Settings};

const SECTION: &str = "bench";
pub const DEFAULT_METHODS: &str = "slr-ldl,slr-none,gamma,poly:3,ggcm:3,emor:3";

#[derive(Serialize)]
struct BenchDocument<'a> {
    config: &'a CalibrationBenchConfig,
    cameras: Vec<String>,
    corpus: String,
    methods: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_unix_s: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum ModelKey {
    Ldl,
    None,
}

fn parse_method(tag: &str) -> anyhow::Result<(Method, Option<ModelKey>)> {
    match tag {
        "slr" | "slr-ldl" => Ok((Method::Slr, Some(ModelKey::Ldl))),
        "slr-none" => Ok((Method::Slr, Some(ModelKey::None))),
        other => other
            .parse::<Family>()
            .map(|f| (Method::Classic(f), None))
            .map_err(|e| usage(format!("--methods: {e}"))),
    }
}

fn safe_name(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

pub fn run(settings: &Settings, a: BenchArgs) -> anyhow::Result<()> {
    let defaults = CalibrationBenchConfig::default();
    let cameras = settings.pick(SECTION, "cameras", a.cameras, 14)?;
    let noccps: Vec<usize> = match settings.get(Some(SECTION), "noccp", a.noccp)? {
        Some(text) => parse_list(&text, "noccp")?,
        None => defaults.noccps.clone(),
    };
    let exposures: Vec<f64> = match settings.get(Some(SECTION), "exposures", a.exposures)? {
        Some(text) => parse_list(&text, "exposures")?,
        None => defaults.exposures.clone(),
    };
    let seed_count = settings.pick(SECTION, "seeds", a.seeds, 1)?;
    if cameras == 0 || seed_count == 0 || noccps.contains(&0) {
        return Err(usage("--cameras, --seeds and --noccp must be positive"));
    }
    let tags: Vec<String> = parse_list(
        &settings.pick(SECTION, "methods", a.methods, DEFAULT_METHODS.to_string())?,
        "methods",
    )?;
    let parsed: Vec<(Method, Option<ModelKey>)> =
        tags.iter().map(|t| parse_method(t)).collect::<anyhow::Result<_>>()?;
    let format = super::format(settings, SECTION, a.format)?;
    let out = super::out_dir(settings, SECTION, a.out, "out/bench")?;
    let plot = settings.flag(Some(SECTION), "plot", a.plot)?;
    let flags = [
        (
            ModelKey::Ldl,
            settings.get(Some(SECTION), "model_ldl", a.model_ldl)?,
            HOLDOUT_LDL_MODEL,
        ),
        (
            ModelKey::None,
            settings.get(Some(SECTION), "model_none", a.model_none)?,
            HOLDOUT_NONE_MODEL,
        ),
    ];

    let corpus = load_corpus(settings)?;
    let suite = camera_suite(&corpus.curves, cameras);
    let camera_ids: Vec<String> = suite.iter().map(|c| c.id.clone()).collect();

    let mut models: BTreeMap<ModelKey, SlrModel> = BTreeMap::new();
    for (key, flag, name) in flags {
        if !parsed.iter().any(|(_, k)| *k == Some(key)) {
            continue;
        }
        let model = load_slr(settings, flag, name, Some(&corpus))?;
        let excluded = &model.metadata().excluded_curves;
        let seen: Vec<&String> = camera_ids.iter().filter(|id| !excluded.contains(id)).collect();
        if !seen.is_empty() {
            log::warn!("{name}: {} benchmark cameras were part of its training set", seen.len());
        }
        models.insert(key, model);
    }
    let max_k = parsed
        .iter()
        .filter_map(|(m, _)| match m {
            Method::Classic(Family::Emor(k)) => Some(*k),
            _ => None,
        })
        .max();
    let emor = match max_k {
        Some(k) => {
            let training: Vec<ResponseCurve> = corpus
                .curves
                .iter()
                .filter(|c| !camera_ids.iter().any(|id| id == c.id()))
                .cloned()
                .collect();
            Some(super::inverse_basis(&training, k)?)
        }
        None => None,
    };
    let methods: Vec<BenchMethod<'_>> = tags
        .iter()
        .zip(&parsed)
        .map(|(tag, (method, key))| BenchMethod {
            label: tag.clone(),
            method: *method,
            slr: key.and_then(|k| models.get(&k)),
            emor: emor.clone(),
        })
        .collect();
    let config = CalibrationBenchConfig {
        noccps,
        noise_sigma: settings.pick(SECTION, "noise", a.noise, defaults.noise_sigma)?,
        exposures,
        seeds: (0..seed_count as u64).map(|i| settings.seed.wrapping_add(i)).collect(),
        samples: corpus.sample_count(),
    };
    log::info!(
        "{} cameras x {} patch counts x {} seeds, {} methods",
        suite.len(),
        config.noccps.len(),
        config.seeds.len(),
        methods.len()
    );

    let outcomes = run_calibration_bench(&suite, &methods, &config)?;
    let rows: Vec<CalibrationRow> = outcomes
        .iter()
        .map(|o| {
            let row = o.row();
            CalibrationRow {
                time_ms: settings.wall_ms(row.time_ms),
                ..row
            }
        })
        .collect();
    let camera_rows: Vec<CameraRow> = outcomes.iter().flat_map(|o| o.camera_rows()).collect();
    let ext = super::extension(format);
    std::fs::create_dir_all(&out)?;
    emit_report(&rows, format, &out.join(format!("calibration.{ext}")))?;
    emit_report(&camera_rows, format, &out.join(format!("calibration_cameras.{ext}")))?;
    let doc = BenchDocument {
        config: &config,
        cameras: camera_ids,
        corpus: corpus.name.clone(),
        methods: tags.clone(),
        generated_unix_s: settings.timestamp(),
    };
    write_file(&out.join("bench_config.json"), crf_atlas::json::to_vec_pretty(&doc)?)?;

    if plot {
        let largest = config.noccps.len() - 1;
        for (ci, camera) in suite.iter().enumerate() {
            let truth = invert(&camera.response);
            let mut curves: Vec<(&str, &ResponseCurve)> = vec![("truth", &truth)];
            for o in &outcomes {
                if let Some(c) = o.cameras[ci].curves.get(largest) {
                    curves.push((o.label.as_str(), c));
                }
            }
            let title = format!("{} inverse response, {} patches", camera.id, config.noccps[largest]);
            write_file(
                &out.join(format!("camera_{}.svg", safe_name(&camera.id))),
                curves_svg(&curves, &title),
            )?;
        }
    }

    for row in &rows {
        let f = |v: Option<f64>| v.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into());
        println!(
            "{:<10} mean {} median {} p95 {} stability {} evaluations {:.0}",
            row.method,
            f(row.mean),
            f(row.median),
            f(row.p95),
            f(row.stability),
            row.evaluations_mean
        );
    }
    Ok(())
}
