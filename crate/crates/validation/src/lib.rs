//! Shared plumbing for the acceptance suite: locating the curve database
//! and the shipped model files, and recording per-criterion verdicts.

use std::fmt;
use std::path::{Path, PathBuf};

use crf_atlas::curves::{parse_dorf, surrogate, Corpus};

pub const DORF_ENV: &str = "CRF_DORF_PATH";
pub const ASSETS_ENV: &str = "CRF_ATLAS_ASSETS";

pub fn workspace_root() -> PathBuf {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    root.canonicalize().unwrap_or(root)
}

/// `CRF_DORF_PATH`, else `data/dorfCurves.txt` under the workspace root.
pub fn dorf_path() -> Option<PathBuf> {
    std::env::var_os(DORF_ENV)
        .filter(|s| !s.is_empty())
        .map(PathBuf::from)
        .or_else(|| Some(workspace_root().join("data/dorfCurves.txt")))
        .filter(|p| p.is_file())
}

pub fn assets_dir() -> PathBuf {
    std::env::var_os(ASSETS_ENV)
        .filter(|s| !s.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| workspace_root().join("assets"))
}

/// Where the curves under test came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Dorf(PathBuf),
    Surrogate,
}

impl Source {
    pub fn is_surrogate(&self) -> bool {
        matches!(self, Source::Surrogate)
    }
}

/// The measured database when present, else the built-in surrogate.
pub fn load_corpus() -> Result<(Corpus, Source), String> {
    match dorf_path() {
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            let curves = parse_dorf(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            let corpus = Corpus::new("dorf", curves).map_err(|e| e.to_string())?;
            Ok((corpus, Source::Dorf(path)))
        }
        None => Ok((surrogate::surrogate_corpus(), Source::Surrogate)),
    }
}

/// `|value - target| <= tolerance * |target|`.
pub fn within(value: f64, target: f64, tolerance: f64) -> bool {
    (value - target).abs() <= tolerance * target.abs()
}

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub surrogate: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(id: u8, title: &'static str) -> Self {
        Self {
            id,
            title,
            passed: true,
            surrogate: false,
            detail: String::new(),
        }
    }

    /// Records one sub-check; the criterion passes only if all do.
    pub fn check(&mut self, ok: bool, note: impl Into<String>) -> &mut Self {
        let note = note.into();
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        if !ok {
            self.detail.push_str("FAILED ");
        }
        self.detail.push_str(&note);
        self.passed &= ok;
        self
    }

    pub fn on_surrogate(&mut self, surrogate: bool) -> &mut Self {
        self.surrogate |= surrogate;
        self
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} C{}{} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            if self.surrogate { " [surrogate]" } else { "" },
            self.title,
            self.detail
        )
    }
}
