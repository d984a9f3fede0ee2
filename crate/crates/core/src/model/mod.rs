//! Flow parameters, background profile, radial discretization and regime
//! classification.

pub mod grid;
pub mod params;
pub mod regime;

pub use grid::{apply_delta4, build_grid, weighted_integral, RadialField, RadialGrid, Weight, C64};
pub use params::{poiseuille, FlowParams};
pub use regime::{classify_regime, classify_with, RegimeConstants, RegimeTag};
