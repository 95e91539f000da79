//! Benchmark runs, error metrics, the robustness sweep and file output.

mod benchmark;
mod export;
mod metrics;
mod model_file;

pub use benchmark::{
    default_cells, robustness_sweep, run_benchmark, BenchmarkConfig, HistoryEntry, ProblemSource, QuadratureSpec,
    RunArtifacts, RunReport, SweepRow, Timings, PLANE_CELLS, SLAB_CELL_WIDTH,
};
pub use export::{
    export_artifacts, hex_digest, history_csv, metrics_text, sweep_csv, ArtifactWriter, Manifest, MANIFEST_NAME,
};
pub use metrics::{error_metrics, relative_l2, ErrorMetrics};
pub use model_file::{read_model, write_model, SavedModel};
