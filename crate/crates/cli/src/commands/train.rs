use std::time::Instant;

use anyhow::Context;
use crf_atlas::autoencoder::{
    latent_histogram, save_model, train_with_progress, ArchSpec, Constraint, CorpusTag, LatentVariance, TrainConfig,
};
use crf_atlas::bench::{camera_suite, histogram_svg};
use crf_atlas::curves::ResponseCurve;
use serde::Serialize;

use crate::args::TrainArgs;
use crate::config::{parse_list, usage, write_file, Settings};

/// Encoder hidden sizes used when no `--arch` is given.
pub const DEFAULT_ARCH: &str = "50";
const SECTION: &str = "train";
const HISTOGRAM_BINS: usize = 32;

#[derive(Serialize)]
struct TrainSummary<'a> {
    model: String,
    arch: &'a ArchSpec,
    config: &'a TrainConfig,
    corpus: CorpusTag,
    excluded_curves: &'a [String],
    mean_rmse: f64,
    max_rmse: f64,
    latent_mean: f64,
    latent_sd: f64,
    elapsed_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_unix_s: Option<u64>,
}

fn parse_arch(text: &str) -> anyhow::Result<Vec<usize>> {
    let hidden: Vec<usize> = parse_list(text, "arch")?;
    if hidden.len() > 3 || hidden.contains(&0) {
        return Err(usage(format!("--arch takes one to three positive sizes, got '{text}'")));
    }
    Ok(hidden)
}

pub(crate) fn loss_column(constraint: Constraint) -> Option<&'static str> {
    match constraint {
        Constraint::Ldl => Some("kl"),
        Constraint::Auc => Some("label"),
        Constraint::None => None,
    }
}

pub fn run(settings: &Settings, a: TrainArgs) -> anyhow::Result<()> {
    let s = |key, flag| settings.get(Some(SECTION), key, flag);
    let hidden = parse_arch(&settings.pick(SECTION, "arch", a.arch, DEFAULT_ARCH.to_string())?)?;
    let defaults = TrainConfig::default();
    let constraint: Constraint = s("constraint", a.constraint)?
        .map(|t: String| t.parse().map_err(|e| usage(format!("{e}"))))
        .transpose()?
        .unwrap_or(defaults.constraint);
    let variance = match s("variance", a.variance)?.as_deref() {
        None | Some("mean") => LatentVariance::Mean,
        Some("sum") => LatentVariance::Sum,
        Some(other) => return Err(usage(format!("--variance must be mean or sum, got '{other}'"))),
    };
    let config = TrainConfig {
        epochs: settings.pick(SECTION, "epochs", a.epochs, defaults.epochs)?,
        learning_rate: settings.pick(SECTION, "lr", a.lr, defaults.learning_rate)?,
        seed: settings.seed,
        lambda_smooth: settings.pick(SECTION, "lambda_smooth", a.lambda_smooth, defaults.lambda_smooth)?,
        lambda_latent: settings.pick(SECTION, "lambda_latent", a.lambda_latent, defaults.lambda_latent)?,
        constraint,
        auc_scale: None,
        variance,
        train_on_inverse: settings.flag(Some(SECTION), "inverse", a.inverse)?,
    };
    let latent_dim = settings.pick(SECTION, "latent_dim", a.latent_dim, 1)?;
    let dropout_keep = settings.pick(SECTION, "dropout_keep", a.dropout_keep, 0.9)?;
    let holdout = settings.get(Some(SECTION), "holdout", a.holdout)?;
    let out = super::out_dir(settings, SECTION, a.out, "out/train")?;
    let model_path = settings.pick(SECTION, "model", a.model, out.join("model.json"))?;
    let plot = settings.flag(Some(SECTION), "plot", a.plot)?;

    let corpus = crate::assets::load_corpus(settings)?;
    let arch = ArchSpec::new(hidden)
        .map_err(|e| usage(format!("{e}")))?
        .with_input_size(corpus.sample_count())
        .with_latent_dim(latent_dim)
        .with_dropout_keep(dropout_keep);
    arch.validate().map_err(|e| usage(format!("{e}")))?;

    let excluded: Vec<String> = match holdout {
        Some(n) => camera_suite(&corpus.curves, n).into_iter().map(|c| c.id).collect(),
        None => Vec::new(),
    };
    let curves: Vec<ResponseCurve> = corpus
        .curves
        .iter()
        .filter(|c| !excluded.iter().any(|id| id == c.id()))
        .cloned()
        .collect();
    log::info!(
        "training {:?} on {} curves ({} held out), {} epochs",
        arch.encoder_hidden,
        curves.len(),
        excluded.len(),
        config.epochs
    );

    let start = Instant::now();
    let report_every = (config.epochs / 20).max(1);
    let (mut model, report) = train_with_progress(&curves, &arch, &config, |epoch, loss| {
        if epoch % report_every == 0 {
            log::info!("epoch {epoch}: total {:.4e} recon {:.4e}", loss.total, loss.recon);
        }
    })?;
    let elapsed = start.elapsed();
    model.metadata_mut().corpus = Some(CorpusTag::of(&corpus));
    model.metadata_mut().excluded_curves = excluded.clone();

    if let Some(dir) = model_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    save_model(&model, &model_path).with_context(|| format!("writing {}", model_path.display()))?;

    let column = loss_column(config.constraint);
    let mut csv = String::from("epoch,total,recon,smooth");
    if let Some(c) = column {
        csv.push(',');
        csv.push_str(c);
    }
    csv.push('\n');
    for (epoch, l) in report.losses.iter().enumerate() {
        csv.push_str(&format!("{epoch},{:e},{:e},{:e}", l.total, l.recon, l.smooth));
        if column.is_some() {
            csv.push_str(&format!(",{:e}", l.latent));
        }
        csv.push('\n');
    }
    write_file(&out.join("train_report.csv"), csv)?;

    let histogram = latent_histogram(&model, &curves, HISTOGRAM_BINS)?;
    if plot {
        write_file(
            &out.join("latent_histogram.svg"),
            histogram_svg(&histogram, "latent distribution"),
        )?;
    }
    let summary = TrainSummary {
        model: model_path.display().to_string(),
        arch: model.arch(),
        config: &config,
        corpus: CorpusTag::of(&corpus),
        excluded_curves: &excluded,
        mean_rmse: report.mean_rmse,
        max_rmse: report.final_rmse.iter().copied().fold(0.0, f64::max),
        latent_mean: histogram.mean,
        latent_sd: histogram.sd,
        elapsed_ms: settings.wall_ms(elapsed.as_secs_f64() * 1e3),
        generated_unix_s: settings.timestamp(),
    };
    write_file(
        &out.join("train_summary.json"),
        crf_atlas::json::to_vec_pretty(&summary)?,
    )?;
    println!(
        "trained {:?}: mean reconstruction RMSE {:.4e} in {:.1} s -> {}",
        model.arch().encoder_hidden,
        report.mean_rmse,
        elapsed.as_secs_f64(),
        model_path.display()
    );
    Ok(())
}
