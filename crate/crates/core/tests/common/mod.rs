//! Closed-form oracles shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64 as C64;

/// P(r)·e^{c r²} with complex polynomial P (coefficients in ascending order).
#[derive(Debug, Clone)]
pub struct PolyExp {
    pub p: Vec<C64>,
    pub c: f64,
}

impl PolyExp {
    pub fn poly(p: &[f64]) -> Self {
        Self { p: p.iter().map(|&x| C64::new(x, 0.0)).collect(), c: 0.0 }
    }

    pub fn with_exp(p: &[f64], c: f64) -> Self {
        Self { c, ..Self::poly(p) }
    }

    pub fn eval(&self, r: f64) -> C64 {
        let v = self.p.iter().rev().fold(C64::new(0.0, 0.0), |acc, a| acc * r + a);
        v * (self.c * r * r).exp()
    }

    fn trim(mut p: Vec<C64>) -> Vec<C64> {
        while p.len() > 1 && p.last().map(|v| v.norm() == 0.0).unwrap_or(false) {
            p.pop();
        }
        p
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.c, o.c);
        let n = self.p.len().max(o.p.len());
        let mut p = vec![C64::new(0.0, 0.0); n];
        for (i, v) in self.p.iter().enumerate() {
            p[i] += v;
        }
        for (i, v) in o.p.iter().enumerate() {
            p[i] += v;
        }
        Self { p: Self::trim(p), c: self.c }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { p: self.p.iter().map(|v| v * s).collect(), c: self.c }
    }

    /// Multiplication by a complex polynomial q(r).
    pub fn mul_poly(&self, q: &[C64]) -> Self {
        let mut p = vec![C64::new(0.0, 0.0); self.p.len() + q.len() - 1];
        for (i, a) in self.p.iter().enumerate() {
            for (j, b) in q.iter().enumerate() {
                p[i + j] += a * b;
            }
        }
        Self { p: Self::trim(p), c: self.c }
    }

    pub fn mul_r(&self, k: usize) -> Self {
        let mut p = vec![C64::new(0.0, 0.0); k];
        p.extend_from_slice(&self.p);
        Self { p, c: self.c }
    }

    /// d/dr: P′ + 2crP
    pub fn deriv(&self) -> Self {
        let mut p = vec![C64::new(0.0, 0.0); self.p.len() + 1];
        for (k, a) in self.p.iter().enumerate() {
            if k > 0 {
                p[k - 1] += a * k as f64;
            }
            p[k + 1] += a * (2.0 * self.c);
        }
        Self { p: Self::trim(p), c: self.c }
    }

    /// Division by r; requires a vanishing constant term.
    pub fn div_r(&self) -> Self {
        assert!(self.p[0].norm() < 1e-300, "not divisible by r");
        Self { p: if self.p.len() > 1 { self.p[1..].to_vec() } else { vec![C64::new(0.0, 0.0)] }, c: self.c }
    }

    /// Δ₄ = d² + (3/r)d
    pub fn lap4(&self) -> Self {
        let d = self.deriv();
        d.deriv().add(&d.div_r().scale(C64::new(3.0, 0.0)))
    }

    /// (Δ₄ − n²)
    pub fn ln(&self, n: i64) -> Self {
        self.lap4().add(&self.scale(C64::new(-(n * n) as f64, 0.0)))
    }
}

/// Ū(r) as a polynomial a₀ + a₂r².
pub fn ubar_poly(flux: f64, slip: f64) -> Vec<C64> {
    let s = flux / std::f64::consts::PI / (4.0 + slip);
    vec![C64::new((4.0 + 2.0 * slip) * s, 0.0), C64::new(0.0, 0.0), C64::new(-2.0 * slip * s, 0.0)]
}

/// Stream forcing f = r[inŪ(Δ₄−n²)φ − (Δ₄−n²)²φ] of a closed-form φ.
pub fn stream_forcing(phi: &PolyExp, flux: f64, slip: f64, n: i64) -> PolyExp {
    let w = phi.ln(n);
    let iu: Vec<C64> = ubar_poly(flux, slip).iter().map(|v| v * C64::new(0.0, n as f64)).collect();
    w.mul_poly(&iu).add(&w.ln(n).scale(C64::new(-1.0, 0.0))).mul_r(1)
}

/// Swirl forcing F = r[inŪV − (Δ₄−n²)V] of a closed-form V.
pub fn swirl_forcing(v: &PolyExp, flux: f64, slip: f64, n: i64) -> PolyExp {
    let iu: Vec<C64> = ubar_poly(flux, slip).iter().map(|x| x * C64::new(0.0, n as f64)).collect();
    v.mul_poly(&iu).add(&v.ln(n).scale(C64::new(-1.0, 0.0))).mul_r(1)
}

pub fn rel_err(a: &[C64], b: &[C64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let den = b.iter().map(|y| y.norm()).fold(0.0, f64::max);
    num / den
}
