use crf_atlas::bench::{emit_report, parse_cells, run_fitting_bench, FitCell, FittingRow};

use crate::args::FitArgs;
use crate::assets::{load_corpus, load_slr, DEFAULT_MODEL};
use crate::config::{usage, Settings};

const SECTION: &str = "fit";
pub const DEFAULT_MODELS: &str = "gamma,poly:1..4,ggcm:1..4,emor:1..4,slr";

pub fn run(settings: &Settings, a: FitArgs) -> anyhow::Result<()> {
    let list = settings.pick(SECTION, "models", a.models, DEFAULT_MODELS.to_string())?;
    let cells = parse_cells(&list).map_err(|e| usage(format!("--models: {e}")))?;
    let format = super::format(settings, SECTION, a.format)?;
    let model_flag = settings.get(Some(SECTION), "model", a.model)?;
    let out = settings.pick(
        SECTION,
        "out",
        a.out,
        format!("out/fitting.{}", super::extension(format)).into(),
    )?;

    let corpus = load_corpus(settings)?;
    let slr = if cells.contains(&FitCell::Slr) {
        let model = load_slr(settings, model_flag, DEFAULT_MODEL, Some(&corpus))?;
        if model.arch().input_size != corpus.sample_count() {
            return Err(usage(format!(
                "model expects {} samples per curve, the database has {}",
                model.arch().input_size,
                corpus.sample_count()
            )));
        }
        Some(model)
    } else {
        None
    };
    let outcomes = run_fitting_bench(&corpus.curves, &cells, slr.as_ref(), None)?;
    let rows: Vec<FittingRow> = outcomes
        .iter()
        .map(|o| FittingRow {
            time_ms: settings.wall_ms(o.row().time_ms),
            ..o.row()
        })
        .collect();
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    emit_report(&rows, format, &out)?;
    for row in &rows {
        let mean = row.mean_rmse.map(|m| format!("{m:.3e}")).unwrap_or_else(|| "-".into());
        println!("{:<10} mean RMSE {mean} over {} curves", row.model, row.curves);
    }
    Ok(())
}
