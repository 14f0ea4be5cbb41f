//! Error metrics, summary statistics and the benchmark drivers.

mod calib;
mod fitting;
mod plot;
mod report;
mod stats;

pub use calib::{
    camera_suite, holdout_indices, observation_seed, run_calibration_bench, BenchMethod, CalibrationBenchConfig,
    CalibrationRow, Camera, CameraOutcome, CameraRow, MethodOutcome,
};
pub use fitting::{parse_cells, run_fitting_bench, CellOutcome, FitCell, FittingRow};
pub use plot::{curves_svg, emit_plot_data, histogram_svg};
pub use report::{emit_report, from_csv, to_csv, to_json, Format, Table};
pub use stats::{quantile_sorted, rmse, summarize, SummaryStats};
