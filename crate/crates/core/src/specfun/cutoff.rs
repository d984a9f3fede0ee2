//! Smooth cutoff χ: 0 on [0, 1/4], 1 on [1/2, 1].

const LO: f64 = 0.25;
const HI: f64 = 0.5;

fn band(r: f64) -> Option<f64> {
    if r <= LO || r >= HI {
        None
    } else {
        Some((r - LO) / (HI - LO))
    }
}

/// Smoothstep 1/(1 + e^{1/t − 1/(1−t)}) on the transition band.
pub fn cutoff_chi(r: f64) -> f64 {
    match band(r) {
        None => {
            if r <= LO {
                0.0
            } else {
                1.0
            }
        }
        Some(t) => 1.0 / (1.0 + (1.0 / t - 1.0 / (1.0 - t)).exp()),
    }
}

/// dχ/dr.
pub fn cutoff_chi_derivative(r: f64) -> f64 {
    match band(r) {
        None => 0.0,
        Some(t) => {
            let s = 1.0 / (1.0 + (1.0 / t - 1.0 / (1.0 - t)).exp());
            let q = 1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t));
            let d = s * (1.0 - s) * q / (HI - LO);
            if d.is_finite() {
                d
            } else {
                0.0
            }
        }
    }
}
