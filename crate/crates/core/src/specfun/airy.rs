//! Complex Airy function Ai(z) and its derivative.
//!
//! Small |z| uses the Maclaurin series. Large |z| with |arg z| ≤ 2π/3 uses the
//! asymptotic expansion truncated at its smallest term. The annulus in between
//! is covered by Taylor stepping along the ray through z: inward from |z| = 16
//! where Ai is recessive (|arg z| ≤ π/3), outward from |z| = 2 elsewhere.
//! |arg z| > 2π/3 is reduced by the connection formula.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Ai(0) = 3^{−2/3}/Γ(2/3)
const AI0: f64 = 0.355_028_053_887_817_24;
/// −Ai′(0) = 3^{−1/3}/Γ(1/3)
const AIP0: f64 = 0.258_819_403_792_806_8;

const SERIES_RADIUS: f64 = 2.0;
const ASYMPTOTIC_RADIUS: f64 = 16.0;
const MAX_STEP: f64 = 0.5;
/// Largest |z| accepted by the public entry point.
pub const AIRY_MAX_ABS: f64 = 50.0;

fn maclaurin(z: C64) -> (C64, C64) {
    let z3 = z * z * z;
    let mut f = C64::new(1.0, 0.0);
    let mut g = z;
    let mut fp = 0.5 * z * z;
    let mut gp = C64::new(1.0, 0.0);
    let mut sf = f;
    let mut sg = g;
    let mut sfp = fp;
    let mut sgp = gp;
    for k in 1..200 {
        let k3 = 3.0 * k as f64;
        f *= z3 / ((k3 - 1.0) * k3);
        g *= z3 / (k3 * (k3 + 1.0));
        gp *= z3 / ((k3 - 2.0) * k3);
        if k > 1 {
            fp *= z3 / ((k3 - 3.0) * (k3 - 1.0));
        }
        sf += f;
        sg += g;
        sgp += gp;
        if k > 1 {
            sfp += fp;
        }
        let tiny = 1e-18 * (sf.norm() + sg.norm() + sfp.norm() + sgp.norm());
        if f.norm() + g.norm() + fp.norm() + gp.norm() < tiny {
            break;
        }
    }
    (AI0 * sf - AIP0 * sg, AI0 * sfp - AIP0 * sgp)
}

fn asymptotic(z: C64) -> (C64, C64) {
    let sq = z.sqrt();
    let zeta = 2.0 / 3.0 * z * sq;
    let q = z.powf(0.25);
    let pre = (-zeta).exp() / (2.0 * PI.sqrt());
    let mut u = 1.0f64;
    let mut su = C64::new(1.0, 0.0);
    let mut sv = C64::new(1.0, 0.0);
    let mut zk = C64::new(1.0, 0.0);
    let mut last = f64::INFINITY;
    let inv = 1.0 / zeta;
    for k in 1..200 {
        let kk = k as f64;
        u *= (6.0 * kk - 5.0) * (6.0 * kk - 3.0) * (6.0 * kk - 1.0) / ((2.0 * kk - 1.0) * 216.0 * kk);
        let v = -(6.0 * kk + 1.0) / (6.0 * kk - 1.0) * u;
        zk *= -inv;
        let tu = zk * u;
        let tv = zk * v;
        let mag = tu.norm().max(tv.norm());
        if mag >= last {
            break;
        }
        su += tu;
        sv += tv;
        last = mag;
        if mag < 1e-17 {
            break;
        }
    }
    (pre / q * su, -pre * q * sv)
}

/// Advances (Ai, Ai′) from z0 to z0 + h with a local Taylor series.
fn taylor_step(z0: C64, a: C64, ap: C64, h: C64) -> (C64, C64) {
    // c_{k+2} = (z0 c_k + c_{k-1}) / ((k+1)(k+2))
    let mut cm1 = a;
    let mut c0 = ap;
    let mut c1 = z0 * a * 0.5;
    let mut hk = h;
    let mut val = a + ap * h;
    let mut der = ap;
    let mut hkm1 = C64::new(1.0, 0.0);
    // term for k = 2
    hkm1 *= h;
    hk *= h;
    val += c1 * hk;
    der += c1 * 2.0 * hkm1;
    let scale = a.norm() + ap.norm() + 1e-300;
    let mut quiet = 0;
    for k in 1..150 {
        let kk = k as f64;
        let c2 = (z0 * c0 + cm1) / ((kk + 2.0) * (kk + 1.0));
        hkm1 *= h;
        hk *= h;
        let tv = c2 * hk;
        let td = c2 * (kk + 2.0) * hkm1;
        val += tv;
        der += td;
        if tv.norm() + td.norm() < 1e-18 * (scale + val.norm() + der.norm()) {
            quiet += 1;
            if quiet >= 3 && k > 4 {
                break;
            }
        } else {
            quiet = 0;
        }
        cm1 = c0;
        c0 = c1;
        c1 = c2;
    }
    (val, der)
}

fn march(mut z0: C64, mut a: C64, mut ap: C64, target: C64) -> (C64, C64) {
    let dist = (target - z0).norm();
    let steps = (dist / MAX_STEP).ceil().max(1.0) as usize;
    let h = (target - z0) / steps as f64;
    for _ in 0..steps {
        (a, ap) = taylor_step(z0, a, ap, h);
        z0 += h;
    }
    (a, ap)
}

fn principal(z: C64) -> (C64, C64) {
    let r = z.norm();
    if r <= SERIES_RADIUS {
        return maclaurin(z);
    }
    let arg = z.arg().abs();
    if r >= ASYMPTOTIC_RADIUS {
        return asymptotic(z);
    }
    let dir = z / r;
    if arg <= PI / 3.0 {
        let zs = dir * ASYMPTOTIC_RADIUS;
        let (a, ap) = asymptotic(zs);
        march(zs, a, ap, z)
    } else {
        let zs = dir * SERIES_RADIUS;
        let (a, ap) = maclaurin(zs);
        march(zs, a, ap, z)
    }
}

/// Ai(z) and Ai′(z) with no range restriction. Magnitudes below the double
/// range underflow to zero.
pub fn airy_ai_with_derivative_unchecked(z: C64) -> (C64, C64) {
    if z.norm() > SERIES_RADIUS && z.arg().abs() > 2.0 * PI / 3.0 {
        let w = C64::from_polar(1.0, 2.0 * PI / 3.0);
        let wb = w.conj();
        let (a1, d1) = principal(w * z);
        let (a2, d2) = principal(wb * z);
        // Ai(z) = −ω Ai(ωz) − ω̄ Ai(ω̄z)
        let a = -w * a1 - wb * a2;
        let d = -w * w * d1 - wb * wb * d2;
        return (a, d);
    }
    principal(z)
}

pub fn airy_ai_unchecked(z: C64) -> C64 {
    airy_ai_with_derivative_unchecked(z).0
}

/// Ai(z) for |z| ≤ 50.
pub fn airy_ai(z: C64) -> Result<C64> {
    if !(z.re.is_finite() && z.im.is_finite()) || z.norm() > AIRY_MAX_ABS {
        return Err(Error::Domain(format!("Airy argument {z} outside |z| <= {AIRY_MAX_ABS}")));
    }
    Ok(airy_ai_unchecked(z))
}

/// (Ai(z), Ai′(z)) for |z| ≤ 50.
pub fn airy_ai_with_derivative(z: C64) -> Result<(C64, C64)> {
    if !(z.re.is_finite() && z.im.is_finite()) || z.norm() > AIRY_MAX_ABS {
        return Err(Error::Domain(format!("Airy argument {z} outside |z| <= {AIRY_MAX_ABS}")));
    }
    Ok(airy_ai_with_derivative_unchecked(z))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn value_at_origin() {
        let v = airy_ai(c(0.0, 0.0)).unwrap();
        assert!((v.re - 0.355_028_053_887).abs() < 1e-12 && v.im == 0.0);
    }

    #[test]
    fn value_at_five() {
        // the raw Maclaurin series is still usable at |z| = 5 for absolute accuracy
        let v = airy_ai(c(5.0, 0.0)).unwrap();
        let (s, _) = maclaurin(c(5.0, 0.0));
        assert!((v - s).norm() < 1e-12);
        assert!((v.re - 1.0834e-4).abs() < 1e-8);
    }

    #[test]
    fn ode_residual_by_differences() {
        for z in [c(1.0, 1.0), c(-3.0, 0.5), c(6.0, -4.0), c(0.2, 9.0), c(-12.0, -1.0), c(20.0, 5.0)] {
            let h = 1e-4;
            let f = airy_ai_unchecked;
            let d2 = (f(z + h) - 2.0 * f(z) + f(z - h)) / (h * h);
            let res = d2 - z * f(z);
            let scale = f(z).norm() * (1.0 + z.norm());
            assert!(res.norm() <= 1e-6 * scale.max(1e-300) + 1e-6 * f64::EPSILON, "{z}: {res}");
        }
    }

    #[test]
    fn branches_agree_near_seams() {
        // series against stepping inside |z| = 2.5, stepping against the
        // asymptotic expansion at |z| = 15.5
        for th in [0.0, 0.4, 1.0, 1.6, 2.0] {
            let d = C64::from_polar(1.0, th);
            let z = d * 2.5;
            let a = maclaurin(z).0;
            let b = principal(z).0;
            assert!((a - b).norm() <= 1e-12 * a.norm(), "{th}: {a} {b}");
            let z = d * 15.5;
            let a = asymptotic(z).0;
            let b = principal(z).0;
            assert!((a - b).norm() <= 1e-11 * a.norm(), "{th}: {a} {b}");
        }
    }

    #[test]
    fn reference_values() {
        // mpmath airyai at 30 digits
        let cases = [
            (c(2.0, 0.0), c(0.0349241304232744, 0.0)),
            (c(1.0, 1.0), c(0.0604583083718381492, -0.151889565877181402)),
            (c(-3.0, 0.5), c(-0.528172341882349678, 0.186822985529678441)),
            (c(6.0, -4.0), c(-3.63040509235305880e-5, -2.96363815695583853e-5)),
            (c(0.2, 9.0), c(20373.8001544853217, -29582.3617549734573)),
            (c(-12.0, -1.0), c(-0.820346134151317549, -4.76955911654119675)),
            (c(20.0, 5.0), c(-5.96763084163484421e-27, 3.16733579492533886e-27)),
            (c(40.0, 10.0), c(2.60425703234737608e-73, -1.92936619589822016e-73)),
            (c(-30.0, 0.0), c(-0.0879681884568421628, 0.0)),
            (c(0.0, 10.0), c(-434317.249221974143, -189054.147130575190)),
        ];
        for (z, want) in cases {
            let v = airy_ai(z).unwrap();
            assert!((v - want).norm() <= 1e-11 * want.norm(), "{z}: {v}");
        }
    }

    #[test]
    fn derivative_consistent() {
        for z in [c(0.5, 0.2), c(4.0, 3.0), c(-7.0, 2.0), c(30.0, -10.0)] {
            let h = 1e-6;
            let fd = (airy_ai_unchecked(z + h) - airy_ai_unchecked(z - h)) / (2.0 * h);
            let (_, d) = airy_ai_with_derivative_unchecked(z);
            assert!((fd - d).norm() <= 1e-7 * d.norm(), "{z}");
        }
    }

    #[test]
    fn rejects_large_arguments() {
        assert!(airy_ai(c(51.0, 0.0)).is_err());
        assert!(airy_ai(c(f64::NAN, 0.0)).is_err());
    }
}
