//! Truncated, discretized, shifted Dyson series.

pub mod extensions;
pub mod ordered_sum;
pub mod phase;
pub mod plan;

pub use extensions::{ill_posed_variant, inhomogeneous_expand, ExpandedSystem, Forcing, IllPosedOptions, IllPosedReport};
pub use ordered_sum::{ordered_sums, rotating_sums, MatPoly};
pub use phase::{
    approximate_exp_at_phase, approximate_time_dependent, eval_shifted_series, phase_series_constant,
    phase_series_terms, phase_series_time_dependent, SeriesOptions,
};
pub use plan::{plan_series, plan_unitary_segments, poisson_tail, PlanConstant, PlanMode, SeriesPlan};
