//! Learning a linear transform that removes bias directions from seed words
//! while preserving background geometry.
//!
//! The pipeline is [`build_problem`] → [`solve_sdp`] → [`apply_transform`],
//! with [`debias_report`] measuring the effect.

mod problem;
mod psd;
mod reduction;
mod report;
mod solver;
mod transform;

pub use problem::{
    build_problem, Background, BackgroundPolicy, BuildOptions, DebiasProblem, DEFAULT_DENSE_LIMIT,
    DEFAULT_LAMBDA,
};
pub use psd::{min_eigenvalue, project_psd};
pub use reduction::{reduce_via_gram, reduce_via_svd, SvdReduction};
pub use report::{
    debias_report, distance_distortion, write_points_csv, write_report_csv, AbsProjection,
    DebiasReport, DirectionReport, DistortionStats, GroupVariance, REFERENCE_VARIANCES,
};
pub use solver::{
    solve_objective, solve_sdp, write_trace_csv, DebiasObjective, DebiasSolution, ObjectiveParts,
    SolveOptions, StepPolicy, TraceEntry, DEFAULT_MAX_ITERS, DEFAULT_TOL,
};
pub use transform::{
    apply_transform, decode_transform, encode_transform, factor_transform, read_transform,
    write_transform,
};
