use std::time::Instant;

use crf_atlas::autoencoder::TrainConfig;
use crf_atlas::nas::{naive_nas, report_csv, NasConfig, NasSummary, SearchSpace};
use serde::Serialize;

use crate::args::NasArgs;
use crate::config::{parse_list, usage, write_file, Settings};

const SECTION: &str = "nas";
const SMOKE_EPOCHS: usize = 200;
const SMOKE_SAMPLES: usize = 64;

#[derive(Serialize)]
struct NasDocument {
    #[serde(flatten)]
    summary: NasSummary,
    epochs: usize,
    learning_rate: f64,
    samples: usize,
    corpus: String,
    seed: u64,
    elapsed_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_unix_s: Option<u64>,
}

fn smoke_space() -> SearchSpace {
    SearchSpace {
        h1: vec![10, 20],
        h2: vec![0, 10],
        h3: vec![0],
    }
}

/// Applies `h1=10,20`-style overrides.
fn apply_space(space: &mut SearchSpace, overrides: &[String]) -> anyhow::Result<()> {
    for item in overrides.iter().flat_map(|s| s.split_whitespace()) {
        let (axis, values) = item
            .split_once('=')
            .ok_or_else(|| usage(format!("--space expects h1=..., got '{item}'")))?;
        let values: Vec<usize> = parse_list(values, axis)?;
        match axis {
            "h1" => space.h1 = values,
            "h2" => space.h2 = values,
            "h3" => space.h3 = values,
            _ => return Err(usage(format!("unknown search axis '{axis}'"))),
        }
    }
    Ok(())
}

/// Config form of `--space`: `{"h1": [10, 20]}` or `"h1=10,20 h2=0"`.
fn config_space(text: &str) -> anyhow::Result<Vec<String>> {
    if !text.trim_start().starts_with('{') {
        return Ok(vec![text.to_string()]);
    }
    let map: std::collections::BTreeMap<String, Vec<usize>> =
        serde_json::from_str(text).map_err(|e| usage(format!("config space: {e}")))?;
    Ok(map
        .into_iter()
        .map(|(axis, v)| {
            let list: Vec<String> = v.iter().map(usize::to_string).collect();
            format!("{axis}={}", list.join(","))
        })
        .collect())
}

pub fn run(settings: &Settings, a: NasArgs) -> anyhow::Result<()> {
    let smoke = settings.flag(Some(SECTION), "smoke", a.smoke)?;
    let mut space = if smoke { smoke_space() } else { SearchSpace::default() };
    let mut overrides = a.space;
    if overrides.is_empty() {
        if let Some(text) = settings.get::<String>(Some(SECTION), "space", None)? {
            overrides = config_space(&text)?;
        }
    }
    apply_space(&mut space, &overrides)?;
    let defaults = NasConfig::default();
    let (epochs, samples) = if smoke {
        (SMOKE_EPOCHS, Some(SMOKE_SAMPLES))
    } else {
        (defaults.train.epochs, None)
    };
    let train = TrainConfig {
        epochs: settings.pick(SECTION, "epochs", a.epochs, epochs)?,
        learning_rate: settings.pick(SECTION, "lr", a.lr, defaults.train.learning_rate)?,
        ..defaults.train.clone()
    };
    let config = NasConfig {
        train,
        folds: settings.pick(SECTION, "folds", a.folds, defaults.folds)?,
        top_m: settings.pick(SECTION, "top_m", a.top_m, defaults.top_m)?,
        seed: settings.seed,
        latent_dim: settings.pick(SECTION, "latent_dim", a.latent_dim, defaults.latent_dim)?,
        dropout_keep: settings.pick(SECTION, "dropout_keep", a.dropout_keep, defaults.dropout_keep)?,
    };
    let samples = settings.get(Some(SECTION), "samples", a.samples)?.or(samples);
    let out = super::out_dir(settings, SECTION, a.out, "out/nas")?;

    let corpus = crate::assets::load_corpus(settings)?;
    let curves = match samples {
        Some(n) => corpus
            .curves
            .iter()
            .map(|c| c.resample(n))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| usage(format!("--samples: {e}")))?,
        None => corpus.curves.clone(),
    };
    let candidates = space.hidden_layers().map_err(|e| usage(format!("{e}")))?.len();
    if config.top_m == 0 {
        return Err(usage("--top-m must be at least 1"));
    }
    log::info!(
        "searching {candidates} candidates, {} folds, {} epochs, {} samples",
        config.folds,
        config.train.epochs,
        curves[0].len()
    );
    let start = Instant::now();
    let outcome = naive_nas(&space, &curves, &config)?;
    let elapsed = start.elapsed();
    write_file(&out.join("nas_report.csv"), report_csv(&outcome))?;
    let summary = NasSummary::of(&outcome);
    let doc = NasDocument {
        summary: summary.clone(),
        epochs: config.train.epochs,
        learning_rate: config.train.learning_rate,
        samples: curves[0].len(),
        corpus: corpus.name.clone(),
        seed: config.seed,
        elapsed_ms: settings.wall_ms(elapsed.as_secs_f64() * 1e3),
        generated_unix_s: settings.timestamp(),
    };
    write_file(&out.join("nas_selected.json"), crf_atlas::json::to_vec_pretty(&doc)?)?;
    println!(
        "selected {:?} (accuracy {:.4e}, complexity {}) from {} candidates in {:.1} s",
        summary.selected.encoder_hidden,
        summary.accuracy_mse,
        summary.complexity,
        summary.candidates,
        elapsed.as_secs_f64()
    );
    Ok(())
}
