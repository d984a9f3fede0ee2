//! Special functions used by the boundary-layer constructions.

pub mod airy;
pub mod bessel;
pub mod cutoff;
pub mod layers;

pub use airy::{airy_ai, airy_ai_unchecked, airy_ai_with_derivative, airy_ai_with_derivative_unchecked};
pub use bessel::{bessel_i0, bessel_i1, bessel_i1_scaled};
pub use cutoff::{cutoff_chi, cutoff_chi_derivative};
pub use layers::{airy_boundary_layer, exp_boundary_layer, AiryLayer, AiryLayerData, ExpLayerData, LayerData};
