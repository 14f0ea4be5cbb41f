use anyhow::Context;
use crf_atlas::bench::curves_svg;
use crf_atlas::calibration::{
    calibrate, parse_observations_csv, rmse_vs_truth, CalibrationContext, CalibrationResult, Method,
};
use crf_atlas::curves::{invert, parse_curve_csv, ResponseCurve};
use crf_atlas::models::Family;
use serde::Serialize;

use crate::args::CalibrateArgs;
use crate::assets::{load_corpus, load_slr, DEFAULT_MODEL};
use crate::config::{usage, write_file, Settings};

const SECTION: &str = "calibrate";

#[derive(Serialize)]
struct Entry {
    #[serde(flatten)]
    result: CalibrationResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    inverse_rmse: Option<f64>,
}

/// The truth curve for a camera: matched by id, or the only curve given.
fn truth_for<'a>(truth: &'a [ResponseCurve], camera: &str) -> Option<&'a ResponseCurve> {
    truth
        .iter()
        .find(|c| c.id() == camera)
        .or(if truth.len() == 1 { truth.first() } else { None })
}

pub fn run(settings: &Settings, a: CalibrateArgs) -> anyhow::Result<()> {
    let family = settings.pick(SECTION, "family", a.family, "slr".to_string())?;
    let method: Method = family.parse().map_err(|e| usage(format!("--family: {e}")))?;
    let model_flag = settings.get(Some(SECTION), "model", a.model)?;
    if !a.observations.is_file() {
        return Err(usage(format!("{} does not exist", a.observations.display())));
    }
    let text =
        std::fs::read_to_string(&a.observations).with_context(|| format!("reading {}", a.observations.display()))?;
    let sets = parse_observations_csv(&text).with_context(|| format!("{}", a.observations.display()))?;
    if sets.is_empty() {
        anyhow::bail!("{} holds no observations", a.observations.display());
    }
    let truth = match &a.truth {
        Some(p) => {
            let t = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse_curve_csv(&t).with_context(|| format!("{}", p.display()))?
        }
        None => Vec::new(),
    };

    let slr = match method {
        Method::Slr => Some(load_slr(settings, model_flag, DEFAULT_MODEL, None)?),
        _ => None,
    };
    let emor = match method {
        Method::Classic(Family::Emor(k)) => Some(super::inverse_basis(&load_corpus(settings)?.curves, k)?),
        _ => None,
    };
    let context = CalibrationContext {
        slr: slr.as_ref(),
        emor,
        samples: None,
    };

    let mut entries = Vec::with_capacity(sets.len());
    for set in &sets {
        let mut result = calibrate(set, method, &context)
            .with_context(|| format!("calibrating {}/{}", set.camera_id, set.channel))?;
        result.wall_time_ms = settings.wall_ms(result.wall_time_ms);
        let inverse_rmse = truth_for(&truth, &set.camera_id)
            .map(|t| rmse_vs_truth(&result, &invert(t)))
            .transpose()?;
        eprintln!(
            "{}/{}: {} objective {:.3e} after {} evaluations{}",
            result.camera_id,
            result.channel,
            result.family,
            result.objective,
            result.evaluations,
            inverse_rmse
                .map(|r| format!(", inverse RMSE {r:.3e}"))
                .unwrap_or_default()
        );
        entries.push(Entry { result, inverse_rmse });
    }

    if let Some(plot) = &a.plot {
        let truths: Vec<(String, ResponseCurve)> = entries
            .iter()
            .filter_map(|e| {
                truth_for(&truth, &e.result.camera_id).map(|t| (format!("{} truth", e.result.camera_id), invert(t)))
            })
            .collect();
        let labels: Vec<String> = entries
            .iter()
            .map(|e| format!("{}/{} {}", e.result.camera_id, e.result.channel, e.result.family))
            .collect();
        let mut curves: Vec<(&str, &ResponseCurve)> = truths.iter().map(|(l, c)| (l.as_str(), c)).collect();
        curves.extend(
            labels
                .iter()
                .zip(&entries)
                .map(|(l, e)| (l.as_str(), &e.result.inverse_curve)),
        );
        write_file(plot, curves_svg(&curves, "inverse response"))?;
    }

    let json = crf_atlas::json::to_vec_pretty(&entries)?;
    match &a.out {
        Some(path) => write_file(path, json)?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&json)?;
        }
    }
    Ok(())
}
