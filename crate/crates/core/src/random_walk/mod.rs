//! Random walks Z_n = ω₁⋯ω_n on the building driven by a finitely supported
//! measure, and the estimators run on their trajectories.

mod estimate;
mod measure;
mod walk;

pub use estimate::{
    final_types, germ_stabilization, limit_flag, log_log_slope, lyapunov_estimate, lyapunov_from_types,
    opposition_from_limits, opposition_rate, stationarity_bootstrap, stationarity_residual, summarize_path,
    summarize_paths, tracking_deviation, CellTable, EstimateReport, GermStabilization, LimitFlag, OppositionReport,
    PathSummary, StationarityReport,
};
pub use measure::{Atom, MeasureSpec};
pub use walk::{sample_path, TrajectoryRecord, Walk};
