use serde::{Deserialize, Serialize};

use super::params::FlowParams;
use crate::error::{Error, Result};

/// Parameter regime of a single Fourier mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegimeTag {
    ZeroMode,
    HighFrequency,
    Z1SmallSlip,
    Z2LargeSlip,
    Z3IntermediateSlip,
    SmallFlux,
}

impl RegimeTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegimeTag::ZeroMode => "ZeroMode",
            RegimeTag::HighFrequency => "HighFrequency",
            RegimeTag::Z1SmallSlip => "Z1_SmallSlip",
            RegimeTag::Z2LargeSlip => "Z2_LargeSlip",
            RegimeTag::Z3IntermediateSlip => "Z3_IntermediateSlip",
            RegimeTag::SmallFlux => "SmallFlux",
        }
    }
}

/// Constants of the regime partition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeConstants {
    pub eps1: f64,
    pub delta: f64,
    pub large_flux_threshold: f64,
}

impl Default for RegimeConstants {
    fn default() -> Self {
        Self { eps1: 0.1, delta: 0.1, large_flux_threshold: 100.0 }
    }
}

impl RegimeConstants {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps1 > 0.0 && self.eps1 < 1.0) {
            return Err(Error::Config(format!("eps1 must lie in (0,1), got {}", self.eps1)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!("delta must lie in (0,1), got {}", self.delta)));
        }
        if !(self.large_flux_threshold.is_finite() && self.large_flux_threshold > 0.0) {
            return Err(Error::Config("large_flux_threshold must be finite and > 0".into()));
        }
        Ok(())
    }
}

/// Regime of mode `n` with the default large-flux threshold.
pub fn classify_regime(params: &FlowParams, n: i64, eps1: f64, delta: f64) -> Result<RegimeTag> {
    classify_with(params, n, &RegimeConstants { eps1, delta, ..Default::default() })
}

/// The zero mode is tagged first, then the small-flux case, then the
/// frequency bands. Boundary ties go to the inclusive side of each inequality.
pub fn classify_with(params: &FlowParams, n: i64, c: &RegimeConstants) -> Result<RegimeTag> {
    c.validate()?;
    if n == 0 {
        return Ok(RegimeTag::ZeroMode);
    }
    let phi = params.flux;
    if phi < c.large_flux_threshold {
        return Ok(RegimeTag::SmallFlux);
    }
    let an = n.unsigned_abs() as f64;
    if an >= c.eps1 * phi.sqrt() {
        return Ok(RegimeTag::HighFrequency);
    }
    let scale = (phi * an).cbrt();
    let s = 4.0 + params.slip;
    if s <= c.delta * scale {
        Ok(RegimeTag::Z1SmallSlip)
    } else if s >= scale / c.delta {
        Ok(RegimeTag::Z2LargeSlip)
    } else {
        Ok(RegimeTag::Z3IntermediateSlip)
    }
}
