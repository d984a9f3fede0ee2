use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Flux, slip coefficient and axial period of the background flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowParams {
    pub flux: f64,
    pub slip: f64,
    pub period: f64,
}

impl FlowParams {
    pub fn new(flux: f64, slip: f64) -> Result<Self> {
        if !(flux.is_finite() && flux > 0.0) {
            return Err(Error::Config(format!("flux must be finite and > 0, got {flux}")));
        }
        if !(slip.is_finite() && slip >= 0.0) {
            return Err(Error::Config(format!("slip must be finite and >= 0, got {slip}")));
        }
        Ok(Self { flux, slip, period: 2.0 * PI })
    }

    /// Background axial velocity at radius `r`, no range check.
    #[inline]
    pub fn ubar(&self, r: f64) -> f64 {
        let a = self.slip;
        // (4+2a)/(4+a) * (1 - 2a/(4+2a) r^2) = (4 + 2a - 2a r^2)/(4+a)
        (4.0 + 2.0 * a * (1.0 - r * r)) / (4.0 + a) * self.flux / PI
    }

    #[inline]
    pub fn ubar_derivative(&self, r: f64) -> f64 {
        -4.0 * self.slip / (4.0 + self.slip) * self.flux / PI * r
    }

    /// Wall value 4Φ/(π(4+α)), the minimum of the profile.
    pub fn wall_velocity(&self) -> f64 {
        4.0 * self.flux / (PI * (4.0 + self.slip))
    }
}

/// Poiseuille profile value and derivative at `r` in [0, 1].
pub fn poiseuille(params: &FlowParams, r: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::Domain(format!("radius {r} outside [0, 1]")));
    }
    Ok((params.ubar(r), params.ubar_derivative(r)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_profile_without_slip() {
        let p = FlowParams::new(7.0, 0.0).unwrap();
        for r in [0.0, 0.3, 1.0] {
            let (u, du) = poiseuille(&p, r).unwrap();
            assert!((u - 7.0 / PI).abs() < 1e-15);
            assert_eq!(du, 0.0);
        }
    }

    #[test]
    fn large_slip_tends_to_hagen_poiseuille() {
        let p = FlowParams::new(3.0, 1e9).unwrap();
        let (u, _) = poiseuille(&p, 0.5).unwrap();
        let hp = 2.0 * 3.0 / PI * 0.75;
        assert!(((u - hp) / hp).abs() < 1e-6);
    }

    #[test]
    fn wall_value() {
        let p = FlowParams::new(10.0, 2.5).unwrap();
        let (u, _) = poiseuille(&p, 1.0).unwrap();
        assert!((u - p.wall_velocity()).abs() < 1e-14);
        assert!((u - 40.0 / (PI * 6.5)).abs() < 1e-14);
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let p = FlowParams::new(5.0, 3.0).unwrap();
        let h = 1e-6;
        let r = 0.4;
        let fd = (p.ubar(r + h) - p.ubar(r - h)) / (2.0 * h);
        assert!((fd - p.ubar_derivative(r)).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(FlowParams::new(0.0, 1.0).is_err());
        assert!(FlowParams::new(1.0, -1.0).is_err());
        let p = FlowParams::new(1.0, 1.0).unwrap();
        assert!(matches!(poiseuille(&p, 1.5), Err(Error::Domain(_))));
    }
}
