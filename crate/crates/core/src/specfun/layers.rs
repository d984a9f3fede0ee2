//! Boundary-layer profiles near the wall.
//!
//! The exponential layer solves the frozen-coefficient model exactly. The
//! Airy layer is built from G̃(ρ) = Ai(C±(ρ ∓ i k²)), k = |n|/|β|, and
//! G(ρ) = ∫_ρ^∞ G̃(σ) sinh(k(σ−ρ))/k dσ, which is the nested exponential-kernel
//! integral with the inner variable eliminated.

use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::model::{FlowParams, RadialField, RadialGrid, C64};
use crate::specfun::airy::airy_ai_with_derivative_unchecked;

/// Length of the truncated integration range in ρ.
pub const G_TRUNCATION: f64 = 40.0;
const PANEL_ORDER: usize = 24;

#[derive(Debug, Clone)]
pub struct ExpLayerData {
    pub beta: f64,
    pub theta: f64,
    /// √β·e^{iθ/2}; the profile is exp(−λ(1−r)).
    pub lambda: C64,
    pub profile: RadialField,
}

impl ExpLayerData {
    /// ψ_BL, ψ_BL′, ψ_BL″ at r.
    pub fn eval(&self, r: f64) -> [C64; 3] {
        let v = (-self.lambda * (1.0 - r)).exp();
        [v, self.lambda * v, self.lambda * self.lambda * v]
    }
}

/// β, θ and the exponential profile of mode n.
pub fn exp_boundary_layer(params: &FlowParams, n: i64, grid: &Arc<RadialGrid>) -> Result<ExpLayerData> {
    if n == 0 {
        return Err(Error::Domain("boundary layer requires n != 0".into()));
    }
    let nf = n as f64;
    let c = 4.0 * params.flux * nf / (PI * (4.0 + params.slip));
    let n2 = nf * nf;
    let beta = n2.hypot(c);
    let theta = c.atan2(n2);
    let lambda = C64::from_polar(beta.sqrt(), 0.5 * theta);
    let profile = RadialField::from_fn(grid.clone(), |r| (-lambda * (1.0 - r)).exp());
    Ok(ExpLayerData { beta, theta, lambda, profile })
}

/// Evaluator for G̃ and G of a fixed mode.
#[derive(Debug)]
pub struct AiryLayer {
    /// |n|/|β|
    pub k: f64,
    rot: C64,
    shift: C64,
    rule: (Vec<f64>, Vec<f64>),
    // G̃ on the unit panels [j, j+1] at the rule nodes
    cache: Mutex<Vec<Vec<C64>>>,
}

impl Clone for AiryLayer {
    fn clone(&self) -> Self {
        Self {
            k: self.k,
            rot: self.rot,
            shift: self.shift,
            rule: self.rule.clone(),
            cache: Mutex::new(self.cache.lock().map(|c| c.clone()).unwrap_or_default()),
        }
    }
}

impl AiryLayer {
    pub fn new(n: i64, beta_abs: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("Airy layer requires n != 0".into()));
        }
        let k = n.unsigned_abs() as f64 / beta_abs;
        let s = n.signum() as f64;
        let rot = C64::from_polar(1.0, s * PI / 6.0);
        // π|β|n/(4iΦ) = −i·sign(n)·k²
        let shift = C64::new(0.0, -s * k * k);
        let g = RadialGrid::new(PANEL_ORDER)?;
        let rule = (g.nodes().to_vec(), g.weights().to_vec());
        Ok(Self { k, rot, shift, rule, cache: Mutex::new(Vec::new()) })
    }

    fn argument(&self, rho: f64) -> C64 {
        self.rot * (rho + self.shift)
    }

    /// G̃(ρ) and dG̃/dρ.
    pub fn gtilde(&self, rho: f64) -> (C64, C64) {
        let (a, d) = airy_ai_with_derivative_unchecked(self.argument(rho));
        (a, self.rot * d)
    }

    fn panel(&self, j: usize) -> Vec<C64> {
        let mut cache = self.cache.lock().unwrap_or_else(|e| e.into_inner());
        while cache.len() <= j {
            let base = cache.len() as f64;
            let vals = self.rule.0.iter().map(|&x| self.gtilde(base + x).0).collect();
            cache.push(vals);
        }
        cache[j].clone()
    }

    /// G(ρ) and G′(ρ) for ρ ≥ 0.
    pub fn g(&self, rho: f64) -> (C64, C64) {
        let k = self.k;
        let (xs, ws) = (&self.rule.0, &self.rule.1);
        let mut g = C64::new(0.0, 0.0);
        let mut gp = C64::new(0.0, 0.0);
        let mut acc = |s: f64, w: f64, v: C64| {
            let t = k * (s - rho);
            g += v * (w * t.sinh() / k);
            gp -= v * (w * t.cosh());
        };
        let first = rho.ceil();
        let len = first - rho;
        if len > 0.0 {
            for (x, w) in xs.iter().zip(ws) {
                let s = rho + len * x;
                acc(s, w * len, self.gtilde(s).0);
            }
        }
        let j0 = first as usize;
        for j in j0..j0 + G_TRUNCATION as usize {
            let vals = self.panel(j);
            for ((x, w), v) in xs.iter().zip(ws).zip(vals) {
                acc(j as f64 + x, *w, v);
            }
        }
        (g, gp)
    }

    /// G, G′, G″, G‴ at ρ from the ODE G″ = k²G + G̃.
    pub fn derivatives(&self, rho: f64) -> [C64; 4] {
        let (g, gp) = self.g(rho);
        let (t, tp) = self.gtilde(rho);
        let k2 = self.k * self.k;
        [g, gp, k2 * g + t, k2 * gp + tp]
    }
}

#[derive(Debug, Clone)]
pub struct AiryLayerData {
    pub beta_abs: f64,
    pub c0: C64,
    pub g0: C64,
    pub profile: RadialField,
    pub evaluator: AiryLayer,
}

impl AiryLayerData {
    /// ψ_BL, ψ_BL′, ψ_BL″ at r.
    pub fn eval(&self, r: f64) -> [C64; 3] {
        let b = self.beta_abs;
        let d = self.evaluator.derivatives(b * (1.0 - r).max(0.0));
        [self.c0 * d[0], -self.c0 * b * d[1], self.c0 * b * b * d[2]]
    }
}

/// Airy-type layer of mode n, normalized so that |ψ_BL(1)| ≤ 1.
pub fn airy_boundary_layer(params: &FlowParams, n: i64, grid: &Arc<RadialGrid>) -> Result<AiryLayerData> {
    if n == 0 {
        return Err(Error::Domain("boundary layer requires n != 0".into()));
    }
    let beta_abs = (4.0 * params.flux * n.unsigned_abs() as f64 / PI).cbrt();
    if beta_abs < 1.0 {
        return Err(Error::Regime(format!("Airy layer needs |beta| >= 1, got {beta_abs:.6}")));
    }
    let evaluator = AiryLayer::new(n, beta_abs)?;
    let g0 = evaluator.g(0.0).0;
    let c0 = if g0.norm() >= 1.0 { 1.0 / g0 } else { C64::new(1.0, 0.0) };
    let values = grid.nodes().iter().map(|&r| c0 * evaluator.g(beta_abs * (1.0 - r)).0).collect();
    let profile = RadialField::new(grid.clone(), values)?;
    Ok(AiryLayerData { beta_abs, c0, g0, profile, evaluator })
}

/// Either layer type, as chosen by the regime.
#[derive(Debug, Clone)]
pub enum LayerData {
    Exp(ExpLayerData),
    Airy(AiryLayerData),
}

impl LayerData {
    pub fn profile(&self) -> &RadialField {
        match self {
            LayerData::Exp(l) => &l.profile,
            LayerData::Airy(l) => &l.profile,
        }
    }

    pub fn eval(&self, r: f64) -> [C64; 3] {
        match self {
            LayerData::Exp(l) => l.eval(r),
            LayerData::Airy(l) => l.eval(r),
        }
    }
}
