use std::path::{Path, PathBuf};

use anyhow::Context;
use crf_atlas::autoencoder::{load_model, CorpusTag, SlrModel};
use crf_atlas::curves::{parse_dorf_sized, surrogate, Corpus, DEFAULT_SAMPLES};

use crate::config::{usage, Settings};

pub const ASSETS_ENV: &str = "CRF_ATLAS_ASSETS";
pub const DORF_ENV: &str = "CRF_DORF_PATH";
pub const DORF_DEFAULT: &str = "data/dorfCurves.txt";

pub const DEFAULT_MODEL: &str = "slr_default.json";
pub const HOLDOUT_LDL_MODEL: &str = "slr_holdout_ldl.json";
pub const HOLDOUT_NONE_MODEL: &str = "slr_holdout_none.json";

/// Loads the curve database: `--dorf`, then `CRF_DORF_PATH`, then
/// `data/dorfCurves.txt`; falls back to the built-in surrogate.
pub fn load_corpus(settings: &Settings) -> anyhow::Result<Corpus> {
    let explicit = settings
        .dorf
        .clone()
        .or_else(|| std::env::var_os(DORF_ENV).filter(|s| !s.is_empty()).map(PathBuf::from));
    let path = match explicit {
        Some(p) if !p.is_file() => return Err(usage(format!("curve database {} does not exist", p.display()))),
        Some(p) => Some(p),
        None => Some(PathBuf::from(DORF_DEFAULT)).filter(|p| p.is_file()),
    };
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
            let curves =
                parse_dorf_sized(&text, dorf_width(&text)).with_context(|| format!("parsing {}", p.display()))?;
            log::info!("loaded {} curves from {}", curves.len(), p.display());
            let name = p
                .file_stem()
                .map_or("dorf".into(), |s| s.to_string_lossy().into_owned());
            Ok(Corpus::new(name, curves)?)
        }
        None => {
            log::warn!("no DoRF file found; using the built-in surrogate database");
            Ok(surrogate::surrogate_corpus())
        }
    }
}

/// Samples per curve, read from the first irradiance row.
fn dorf_width(text: &str) -> usize {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .nth(3)
        .map(|l| l.split_whitespace().count())
        .filter(|&n| n >= 2)
        .unwrap_or(DEFAULT_SAMPLES)
}

fn asset_dirs(settings: &Settings) -> Vec<PathBuf> {
    let mut dirs = Vec::new();
    dirs.extend(settings.assets.clone());
    if let Some(env) = std::env::var_os(ASSETS_ENV).filter(|s| !s.is_empty()) {
        dirs.push(PathBuf::from(env));
    }
    if let Some(dir) = std::env::current_exe()
        .ok()
        .and_then(|p| p.parent().map(Path::to_path_buf))
    {
        dirs.push(dir.join("assets"));
    }
    dirs.push(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../assets"));
    dirs
}

/// `flag` if given, else the first asset directory holding `name`.
pub fn find_asset(settings: &Settings, flag: Option<PathBuf>, name: &str) -> anyhow::Result<PathBuf> {
    if let Some(path) = flag {
        return if path.is_file() {
            Ok(path)
        } else {
            Err(usage(format!("{} does not exist", path.display())))
        };
    }
    asset_dirs(settings)
        .into_iter()
        .map(|d| d.join(name))
        .find(|p| p.is_file())
        .ok_or_else(|| usage(format!("no {name} found; pass a model file or set {ASSETS_ENV}")))
}

/// Loads a model and warns when it was trained on another corpus.
pub fn load_slr(
    settings: &Settings,
    flag: Option<PathBuf>,
    name: &str,
    corpus: Option<&Corpus>,
) -> anyhow::Result<SlrModel> {
    let path = find_asset(settings, flag, name)?;
    let model = load_model(&path).with_context(|| format!("loading {}", path.display()))?;
    log::info!("model {} ({:?})", path.display(), model.arch().encoder_hidden);
    if let (Some(corpus), Some(tag)) = (corpus, &model.metadata().corpus) {
        let here = CorpusTag::of(corpus);
        if here.fingerprint != tag.fingerprint {
            log::warn!(
                "{} was trained on '{}' ({} curves), not the loaded '{}'",
                path.display(),
                tag.name,
                tag.curves,
                here.name
            );
        }
    }
    Ok(model)
}
