//! Weighted integrals of single modes and Sobolev-type norms of assembled
//! velocity fields.
//!
//! Every integral is written in the reduced unknowns so the quadrature never
//! sees 1/r: with ψ = rφ,
//! ∫|ψ|²r = ∫|φ|²r³, ∫|(rψ)′|²/r = ∫|2φ + rφ′|²r and 𝓛ψ = rΔ₄φ.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linear::{ModeRef, StreamMode, SwirlMode, VelocityField};
use crate::model::{FlowParams, RadialGrid, C64};

/// Weighted integrals of one mode. For a stream mode the entries refer to ψ,
/// for a swirl mode to v^θ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormBundle {
    pub n: i64,
    /// ∫|ψ|²r
    pub l2: f64,
    /// ∫|(rψ)′|²/r
    pub grad: f64,
    /// ∫|𝓛ψ|²r
    pub lpsi: f64,
    /// ∫|(r𝓛ψ)′|²/r
    pub hi: f64,
    /// |(rψ)′(1)|² for a stream mode, |v^θ(1)|² for a swirl mode
    pub wall: f64,
    /// ∫Ū|(rψ)′|²/r
    pub ubar_grad: f64,
    /// ∫Ū|ψ|²r
    pub ubar_l2: f64,
    /// Left-hand sides of the mode estimates, keyed by estimate id.
    pub named: BTreeMap<String, f64>,
}

impl NormBundle {
    pub fn get(&self, key: &str) -> Option<f64> {
        self.named.get(key).copied()
    }
}

/// p ↦ 2p + rp′, the reduced form of (r·rp)′/r.
pub(crate) fn radial_grad(grid: &RadialGrid, p: &[C64]) -> Vec<C64> {
    let d = grid.diff1(p);
    p.iter().zip(&d).zip(grid.nodes()).map(|((a, b), r)| 2.0 * a + r * b).collect()
}

struct Base {
    l2: f64,
    grad: f64,
    lpsi: f64,
    hi: f64,
    wall: f64,
    ubar_grad: f64,
    ubar_l2: f64,
}

/// Integrals of rp with p sampled on the grid and h = Δ₄p.
fn base(grid: &RadialGrid, p: &[C64], h: &[C64], params: &FlowParams) -> Base {
    let g = radial_grad(grid, p);
    let hg = radial_grad(grid, h);
    let u = |r: f64| params.ubar(r);
    Base {
        l2: grid.norm_sq(p, 3),
        grad: grid.norm_sq(&g, 1),
        lpsi: grid.norm_sq(h, 3),
        hi: grid.norm_sq(&hg, 1),
        wall: g[grid.size()].norm_sqr(),
        ubar_grad: grid.inner_weighted(&g, &g, 1, u).re,
        ubar_l2: grid.inner_weighted(p, p, 3, u).re,
    }
}

fn stream_bundle(mode: &StreamMode, params: &FlowParams) -> NormBundle {
    let grid = mode.grid();
    let n2 = (mode.n * mode.n) as f64;
    let an = mode.n.unsigned_abs() as f64;
    let h: Vec<C64> = mode.w.values.iter().zip(&mode.phi.values).map(|(w, p)| w + n2 * p).collect();
    let mut b = base(grid, &mode.phi.values, &h, params);
    // the wall slope of a stream mode is (rψ)′(1) = (2φ + rφ′)(1)
    let g = mode.grad_factor();
    b.wall = g[grid.size()].norm_sqr();
    let mut named = BTreeMap::new();
    let grad_l2 = b.grad + n2 * b.l2;
    let high = b.lpsi + n2 * b.grad + n2 * n2 * b.l2;
    let ubar = an * b.ubar_grad + an * n2 * b.ubar_l2;
    named.insert("B-1".to_string(), b.lpsi);
    named.insert("case3-13".to_string(), grad_l2);
    named.insert("case3-15".to_string(), b.hi + n2 * b.lpsi + n2 * n2 * b.grad + n2 * n2 * n2 * b.l2);
    named.insert("highf1".to_string(), high);
    named.insert("highf2".to_string(), ubar);
    named.insert("6-0".to_string(), b.l2);
    named.insert("6-2".to_string(), ubar);
    named.insert("6-3".to_string(), high + params.slip * b.wall);
    finish(mode.n, b, named)
}

fn swirl_bundle(mode: &SwirlMode, params: &FlowParams) -> NormBundle {
    let grid = &mode.v.grid;
    let n2 = (mode.n * mode.n) as f64;
    let h = grid.lap4(&mode.v.values);
    let mut b = base(grid, &mode.v.values, &h, params);
    b.wall = mode.v.values[grid.size()].norm_sqr();
    let mut named = BTreeMap::new();
    named.insert("swirl-28".to_string(), b.grad + params.slip * b.wall + n2 * b.l2);
    named.insert("swirl-36".to_string(), b.l2);
    named.insert("swirl-37".to_string(), b.grad + n2 * b.l2);
    finish(mode.n, b, named)
}

fn finish(n: i64, b: Base, named: BTreeMap<String, f64>) -> NormBundle {
    NormBundle {
        n,
        l2: b.l2,
        grad: b.grad,
        lpsi: b.lpsi,
        hi: b.hi,
        wall: b.wall,
        ubar_grad: b.ubar_grad,
        ubar_l2: b.ubar_l2,
        named,
    }
}

/// Weighted integrals of a solved mode. The flow parameters enter only the
/// Ū-weighted entries and the α-weighted wall terms.
pub fn weighted_norms(mode: ModeRef<'_>, params: &FlowParams) -> NormBundle {
    match mode {
        ModeRef::Stream(m) => stream_bundle(m, params),
        ModeRef::Swirl(m) => swirl_bundle(m, params),
    }
}

/// Per-mode pieces of the Sobolev surrogates, each without the 2π factor.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct SobolevTerms {
    pub l2: f64,
    pub h1: f64,
    pub h2: f64,
}

pub(crate) fn sobolev_terms(stream: Option<&StreamMode>, swirl: Option<&SwirlMode>, n: i64) -> SobolevTerms {
    let n2 = (n * n) as f64;
    let mut t = SobolevTerms::default();
    if let Some(s) = stream {
        let grid = s.grid();
        let g = s.grad_factor();
        let l2 = n2 * grid.norm_sq(&s.phi.values, 3) + grid.norm_sq(&g, 1);
        let om = grid.norm_sq(&s.w.values, 3);
        let dom = grid.norm_sq(&radial_grad(grid, &s.w.values), 1);
        t.l2 += l2;
        t.h1 += n2 * l2 + om;
        t.h2 += n2 * n2 * l2 + n2 * om + dom;
    }
    if let Some(v) = swirl {
        let grid = &v.v.grid;
        let l2 = grid.norm_sq(&v.v.values, 3);
        let dv = grid.norm_sq(&radial_grad(grid, &v.v.values), 1);
        let lv = grid.norm_sq(&grid.lap4(&v.v.values), 3);
        t.l2 += l2;
        t.h1 += n2 * l2 + dv;
        t.h2 += n2 * n2 * l2 + lv + n2 * dv;
    }
    t
}

/// Squared surrogates (H⁰, H¹, H²) of a field, summed over its modes.
pub(crate) fn sobolev_squares<'a>(
    modes: impl Iterator<Item = (i64, Option<&'a StreamMode>, Option<&'a SwirlMode>)>,
) -> [f64; 3] {
    let mut acc = [0.0; 3];
    for (n, s, v) in modes {
        let t = sobolev_terms(s, v, n);
        acc[0] += t.l2;
        acc[1] += t.l2 + t.h1;
        acc[2] += t.l2 + t.h1 + t.h2;
    }
    acc.map(|x| 2.0 * PI * x)
}

pub(crate) fn surrogate_from_squares(sq: [f64; 3], s: f64) -> Result<f64> {
    if s == 0.0 {
        Ok(sq[0].sqrt())
    } else if s == 1.0 {
        Ok(sq[1].sqrt())
    } else if s == 1.5 {
        Ok((sq[1] * sq[2]).sqrt().sqrt())
    } else if s == 2.0 {
        Ok(sq[2].sqrt())
    } else {
        Err(Error::Config(format!("unsupported Sobolev index {s}; use 0, 1, 1.5 or 2")))
    }
}

/// Sobolev surrogate ‖v‖_{H^s} for s ∈ {0, 1, 1.5, 2} with
/// ‖v‖² = 2π Σₙ ∫(⋯) r dr. H¹ adds n²‖vₙ‖², ∫|ω|²r and ∫|(rv^θ)′|²/r;
/// H² adds n⁴‖vₙ‖², n²∫|ω|²r, ∫|(rω)′|²/r, ∫|𝓛v^θ|²r and n²∫|(rv^θ)′|²/r.
/// H^{3/2} is the geometric mean √(H¹·H²).
pub fn sobolev_surrogate(v: &VelocityField, s: f64) -> Result<f64> {
    let sq = sobolev_squares(v.modes.iter().map(|(n, (a, b))| (*n, Some(a), Some(b))));
    surrogate_from_squares(sq, s)
}
