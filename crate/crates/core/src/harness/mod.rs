//! Scenes, the end-to-end handover pipeline with its ablation modes, and
//! multi-run aggregation.

mod aggregate;
mod pipeline;
mod scene;
pub mod suite;

pub use aggregate::{
    aggregate, bench, run_all, ObjectRow, Summary, SummaryRow, SUMMARY_CSV_HEADER,
};
pub use pipeline::{
    failed_report, report_file_name, run_pipeline, AblationMode, Diagnostics, HandoverReport,
    PipelineRun, PositionSummary, PreparedScene, Stage, StageFailure,
};
pub use scene::{ContactSpec, HumanSpec, ObjectSource, Params, RobotSpec, Scene};
pub use suite::{bundled_scene, bundled_scenes, write_suite, SyntheticObject, MAPS_PER_OBJECT};
