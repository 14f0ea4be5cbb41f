pub mod bench;
pub mod calibrate;
pub mod fit;
pub mod nas;
pub mod train;
pub mod util;

use std::path::PathBuf;

use crf_atlas::bench::Format;

use crate::config::{usage, Settings};

pub(crate) fn out_dir(
    settings: &Settings,
    section: &str,
    flag: Option<PathBuf>,
    default: &str,
) -> anyhow::Result<PathBuf> {
    settings.pick(section, "out", flag, PathBuf::from(default))
}

pub(crate) fn format(settings: &Settings, section: &str, flag: Option<String>) -> anyhow::Result<Format> {
    let text = settings.pick(section, "format", flag, "csv".to_string())?;
    text.parse().map_err(|e| usage(format!("{e}")))
}

pub(crate) fn extension(format: Format) -> &'static str {
    match format {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

/// Principal-component basis of the inverted database curves, used by the
/// EMoR calibration family.
pub(crate) fn inverse_basis(
    curves: &[crf_atlas::curves::ResponseCurve],
    k: usize,
) -> anyhow::Result<std::sync::Arc<crf_atlas::models::EmorBasis>> {
    let inverted: Vec<_> = curves.iter().map(crf_atlas::curves::invert).collect();
    Ok(std::sync::Arc::new(crf_atlas::models::EmorBasis::build(
        &inverted,
        k.min(inverted.len()),
    )?))
}
