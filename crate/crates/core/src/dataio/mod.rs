//! File formats: shot records, JSON reports and CSV plot tables.

mod report;
mod shots;
mod table;

pub use report::{
    read_report, write_report, AnalyticRow, BinDiagnostics, CalibrationSection, LabeledReconstruction, PointSummary,
    QEntry, Report, REPORT_SCHEMA, REPORT_SCHEMA_VERSION,
};
pub use shots::{
    aggregate, aggregate_path, open_shots, read_shots, write_shots, ShotFile, ShotHeader, ShotReader, ShotWriter,
    SHOT_FORMAT_VERSION,
};
pub use table::Table;
