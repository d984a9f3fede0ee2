//! Weighted norms, estimate ratios, the sweep harness and the appendix
//! inequality suite.

mod bundle;
mod estimates;
mod inequalities;
mod sweep;

pub use bundle::{sobolev_surrogate, weighted_norms, NormBundle};
pub use estimates::{
    estimate_ratio, estimate_ratio_with, field_estimate, forcing_norm, EstimateId, EstimateKind, EstimateValue,
    ModeForcing,
};
pub use inequalities::{inequality_suite, inequality_suite_with, InequalityReport};
pub use sweep::{fit_exponent, sweep_and_fit, ModeShape, SlipRule, SweepPoint, SweepReport, SweepSpec};

