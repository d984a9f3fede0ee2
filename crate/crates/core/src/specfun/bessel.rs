//! Modified Bessel functions I₀ and I₁ of real nonnegative argument.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const SERIES_LIMIT: f64 = 25.0;

fn series_i0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let kk = k as f64;
        term *= q / (kk * kk);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

fn series_i1(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 0.5 * x;
    let mut sum = term;
    for k in 1..200 {
        let kk = k as f64;
        term *= q / (kk * (kk + 1.0));
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

/// Σ (−1)^k a_k(ν)/x^k, truncated at the smallest term.
fn asymptotic_sum(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let kk = k as f64;
        let odd = 2.0 * kk - 1.0;
        term *= -(mu - odd * odd) / (kk * 8.0 * x);
        if term.abs() >= last {
            break;
        }
        sum += term;
        last = term.abs();
        if last < 1e-18 {
            break;
        }
    }
    sum
}

/// e^{−x} I_ν(x) for ν ∈ {0, 1}.
fn scaled(nu: u8, x: f64) -> f64 {
    if x <= SERIES_LIMIT {
        let v = if nu == 0 { series_i0(x) } else { series_i1(x) };
        v * (-x).exp()
    } else {
        asymptotic_sum(nu as f64, x) / (2.0 * PI * x).sqrt()
    }
}

fn check(x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!("modified Bessel argument must be >= 0, got {x}")));
    }
    Ok(())
}

/// e^{−x} I₁(x) and e^{−x} I₁′(x); finite for every x ≥ 0.
pub fn bessel_i1_scaled(x: f64) -> Result<(f64, f64)> {
    check(x)?;
    if x == 0.0 {
        return Ok((0.0, 0.5));
    }
    let i1 = scaled(1, x);
    let i0 = scaled(0, x);
    Ok((i1, i0 - i1 / x))
}

/// I₁(x) and its derivative I₁′(x) = I₀(x) − I₁(x)/x.
pub fn bessel_i1(x: f64) -> Result<(f64, f64)> {
    let (s, ds) = bessel_i1_scaled(x)?;
    let e = x.exp();
    let (v, d) = if e.is_finite() {
        (s * e, ds * e)
    } else {
        let h = (0.5 * x).exp();
        (s * h * h, ds * h * h)
    };
    if !v.is_finite() || !d.is_finite() {
        return Err(Error::Overflow(format!("I1({x}) exceeds the double range")));
    }
    Ok((v, d))
}

/// I₀(x).
pub fn bessel_i0(x: f64) -> Result<f64> {
    check(x)?;
    let s = scaled(0, x);
    let h = (0.5 * x).exp();
    let v = s * h * h;
    if !v.is_finite() {
        return Err(Error::Overflow(format!("I0({x}) exceeds the double range")));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    // direct power series with no truncation shortcuts
    fn oracle_i1(x: f64) -> f64 {
        let mut s = 0.0;
        let mut fact_k = 1.0;
        for k in 0..120 {
            if k > 0 {
                fact_k *= k as f64;
            }
            let e = 2 * k + 1;
            s += (0.5 * x).powi(e) / (fact_k * fact_k * (k as f64 + 1.0));
        }
        s
    }

    #[test]
    fn reference_values() {
        assert_eq!(bessel_i1(0.0).unwrap().0, 0.0);
        let (v, _) = bessel_i1(1.0).unwrap();
        assert!((v - 0.565_159_103_992_485).abs() < 1e-14);
        for x in [0.5, 2.0, 7.5, 12.0, 15.0] {
            let (v, _) = bessel_i1(x).unwrap();
            let o = oracle_i1(x);
            assert!(((v - o) / o).abs() < 1e-13, "{x}: {v} vs {o}");
        }
    }

    #[test]
    fn seam_continuity() {
        // both branches evaluated at the same points around the seam
        for x in [20.0, 25.0, 26.0, 30.0] {
            let s = series_i1(x) * (-x).exp();
            let a = asymptotic_sum(1.0, x) / (2.0 * PI * x).sqrt();
            assert!(((s - a) / s).abs() < 1e-13, "{x}");
        }
        for x in [16.0, 20.0, 25.0, 27.0] {
            let o = oracle_i1(x);
            let v = bessel_i1(x).unwrap().0;
            assert!(((v - o) / o).abs() < 1e-12, "{x}");
        }
    }

    #[test]
    fn satisfies_bessel_equation() {
        for x in [0.3f64, 1.0, 4.0, 14.0, 18.0, 40.0] {
            let h = 1e-4 * x.max(1.0);
            let f = |t: f64| bessel_i1(t).unwrap().0;
            let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
            let d1 = bessel_i1(x).unwrap().1;
            let res = x * x * d2 + x * d1 - (x * x + 1.0) * f(x);
            assert!(res.abs() < 1e-5 * (x * x + 1.0) * f(x), "{x}: {res}");
        }
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        for x in [0.2, 3.0, 15.5, 30.0] {
            let h = 1e-5;
            let fd = (bessel_i1(x + h).unwrap().0 - bessel_i1(x - h).unwrap().0) / (2.0 * h);
            let d = bessel_i1(x).unwrap().1;
            assert!(((fd - d) / d).abs() < 1e-8);
        }
    }

    #[test]
    fn lemma_bounds_example() {
        let (v, _) = bessel_i1(3.0).unwrap();
        assert!(1.5 <= v && v <= 1.5 * 3f64.cosh());
    }

    #[test]
    fn errors() {
        assert!(matches!(bessel_i1(-1.0), Err(Error::Domain(_))));
        assert!(bessel_i1(700.0).is_ok());
        assert!(matches!(bessel_i1(800.0), Err(Error::Overflow(_))));
        assert!(bessel_i1_scaled(800.0).is_ok());
    }
}
