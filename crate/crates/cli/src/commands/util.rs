use crf_atlas::calibration::{synth_observations, write_observations_csv};
use crf_atlas::curves::{surrogate, write_curve_csv, write_dorf, ResponseCurve, DEFAULT_SAMPLES};
use crf_atlas::models::EmorBasis;

use crate::args::{BasisArgs, SurrogateArgs, SynthArgs};
use crate::assets::load_corpus;
use crate::config::{parse_list, usage, write_file, Settings};

pub fn synth(settings: &Settings, a: SynthArgs) -> anyhow::Result<()> {
    const SECTION: &str = "synth";
    let curve = match (a.gamma, a.curve) {
        (Some(g), _) => {
            if !g.is_finite() || g <= 0.0 {
                return Err(usage("--gamma must be positive"));
            }
            ResponseCurve::from_fn(DEFAULT_SAMPLES, |x| x.powf(1.0 / g))?.with_id(format!("gamma-{g}"))
        }
        (None, index) => {
            let corpus = load_corpus(settings)?;
            let i = index.unwrap_or(0);
            corpus
                .curves
                .get(i)
                .cloned()
                .ok_or_else(|| usage(format!("--curve {i} is out of range (database has {})", corpus.len())))?
        }
    };
    let patches = settings.pick(SECTION, "patches", a.patches, 24)?;
    let noise = settings.pick(SECTION, "noise", a.noise, 0.0)?;
    let exposures: Vec<f64> = match settings.get(Some(SECTION), "exposures", a.exposures)? {
        Some(text) => parse_list(&text, "exposures")?,
        None => vec![1.0],
    };
    let set =
        synth_observations(&curve, patches, noise, &exposures, settings.seed).map_err(|e| usage(format!("{e}")))?;
    write_file(&a.out, write_observations_csv(std::slice::from_ref(&set))?)?;
    if let Some(path) = &a.truth_out {
        write_file(path, write_curve_csv(std::slice::from_ref(&curve)))?;
    }
    eprintln!(
        "{} observations of '{}' -> {}",
        set.observations.len(),
        set.camera_id,
        a.out.display()
    );
    Ok(())
}

pub fn surrogate(settings: &Settings, a: SurrogateArgs) -> anyhow::Result<()> {
    const SECTION: &str = "surrogate";
    let count = settings.pick(SECTION, "count", a.count, surrogate::SURROGATE_COUNT)?;
    let samples = settings.pick(SECTION, "samples", a.samples, DEFAULT_SAMPLES)?;
    // Seed 0 selects the default database; any other seed draws a new one.
    let seed = if settings.seed == 0 {
        surrogate::SURROGATE_SEED
    } else {
        settings.seed
    };
    let curves = surrogate::generate(count, samples, seed).map_err(|e| usage(format!("{e}")))?;
    write_file(&a.out, write_dorf(&curves))?;
    eprintln!("{} curves x {samples} samples -> {}", curves.len(), a.out.display());
    Ok(())
}

pub fn basis(settings: &Settings, a: BasisArgs) -> anyhow::Result<()> {
    const SECTION: &str = "basis";
    let k = settings.pick(SECTION, "k", a.k, 4)?;
    let inverse = settings.flag(Some(SECTION), "inverse", a.inverse)?;
    let corpus = load_corpus(settings)?;
    let curves: Vec<ResponseCurve> = if inverse {
        corpus.curves.iter().map(crf_atlas::curves::invert).collect()
    } else {
        corpus.curves.clone()
    };
    let basis = EmorBasis::build(&curves, k).map_err(|e| usage(format!("{e}")))?;
    write_file(&a.out, basis.to_csv())?;
    if let Some(path) = &a.eigenvalues {
        write_file(path, basis.eigenvalues_csv())?;
    }
    eprintln!(
        "basis of {} components; first three carry {:.4} of the energy",
        basis.rank(),
        basis.cumulative_energy(3.min(basis.rank()))
    );
    Ok(())
}
