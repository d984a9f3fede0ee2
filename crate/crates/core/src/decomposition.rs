//! Boundary-layer decomposition ψₙ = ψ_s + b(χψ_BL + ψ_e) + a·I₁(|n|r).
//!
//! ψ_s solves the slip problem, χψ_BL is the cut-off layer profile, ψ_e is
//! the slip-problem remainder that makes χψ_BL + ψ_e an exact discrete
//! solution of the homogeneous equation, and a, b restore ψ(1) = 0 and the
//! Navier condition.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linear::{stream_equation_abs, BcKind, StreamMode, StreamSolver};
use crate::model::{classify_with, FlowParams, RadialField, RadialGrid, RegimeConstants, RegimeTag, C64};
use crate::specfun::{airy_boundary_layer, bessel_i1, cutoff_chi, exp_boundary_layer, LayerData};

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub n: i64,
    pub regime: RegimeTag,
    pub psi_s: RadialField,
    /// χψ_BL sampled
    pub psi_bl: RadialField,
    pub psi_e: RadialField,
    /// I₁(|n|r) sampled
    pub psi_i: RadialField,
    pub a: C64,
    pub b: C64,
    pub j: C64,
    pub layer: LayerData,
    /// residual of the χψ_BL + ψ_e equation on the refined grid
    pub remainder_residual: f64,
    slip_mode: StreamMode,
}

impl Decomposition {
    pub fn reconstruction(&self) -> RadialField {
        let values = (0..self.psi_s.len())
            .map(|i| {
                self.psi_s.values[i] + self.b * (self.psi_bl.values[i] + self.psi_e.values[i]) + self.a * self.psi_i.values[i]
            })
            .collect();
        RadialField { grid: self.psi_s.grid.clone(), values }
    }

    /// Slip solution with its reduced fields.
    pub fn slip_mode(&self) -> &StreamMode {
        &self.slip_mode
    }
}

struct Remainder {
    phi_bl: Vec<C64>,
    phi_e: Vec<C64>,
    residual: f64,
}

fn remainder_fields(params: &FlowParams, n: i64, chi_psi_bl: &RadialField, slip: &StreamSolver) -> Result<Remainder> {
    let grid = chi_psi_bl.grid.clone();
    let r = grid.nodes();
    let np = grid.len();
    let m = grid.size();
    // φ_bl = χψ_BL/r vanishes identically near the axis
    let phi_bl: Vec<C64> = chi_psi_bl.values.iter().zip(r).map(|(v, &r)| if r > 0.0 { v / r } else { C64::new(0.0, 0.0) }).collect();
    let n2 = (n * n) as f64;
    let w_bl: Vec<C64> = grid.lap4(&phi_bl).iter().zip(&phi_bl).map(|(l, p)| l - n2 * p).collect();
    // the remainder carries every row of A(X_bl) except the two wall rows
    let a_bl = slip.apply_system(&phi_bl, &w_bl);
    let mut rhs: Vec<C64> = a_bl.iter().map(|v| -v).collect();
    rhs[m] = C64::new(0.0, 0.0);
    rhs[np + m] = C64::new(0.0, 0.0);
    let (phi_e, w_e) = slip.solve_system(rhs)?;
    // refined-grid residual of χψ_BL + ψ_e against zero forcing, relative to
    // the size of the layer source r(inŪ − Δ₄ + n²)w_bl
    let phi_sum: Vec<C64> = phi_bl.iter().zip(&phi_e.values).map(|(a, b)| a + b).collect();
    let w_sum: Vec<C64> = w_bl.iter().zip(&w_e.values).map(|(a, b)| a + b).collect();
    let sum = StreamMode::from_reduced(
        n,
        BcKind::Slip,
        RadialField { grid: grid.clone(), values: phi_sum },
        RadialField { grid: grid.clone(), values: w_sum },
    )?;
    let (eq, _) = stream_equation_abs(params, &sum, &RadialField::zeros(grid.clone()))?;
    let src = (1..m).map(|i| (a_bl[np + i] * r[i]).norm()).fold(0.0, f64::max);
    let residual = if eq == 0.0 { 0.0 } else { eq / src.max(f64::MIN_POSITIVE) };
    Ok(Remainder { phi_bl, phi_e: phi_e.values, residual })
}

/// Slip-condition remainder ψ_e for a sampled χψ_BL.
pub fn solve_remainder(params: &FlowParams, n: i64, chi_psi_bl: &RadialField) -> Result<RadialField> {
    if n == 0 {
        return Err(Error::Domain("remainder requires n != 0".into()));
    }
    let slip = StreamSolver::new(params, n, &chi_psi_bl.grid, BcKind::Slip)?;
    let rem = remainder_fields(params, n, chi_psi_bl, &slip)?;
    Ok(psi_of(&chi_psi_bl.grid, &rem.phi_e))
}

fn psi_of(grid: &Arc<RadialGrid>, phi: &[C64]) -> RadialField {
    RadialField { grid: grid.clone(), values: phi.iter().zip(grid.nodes()).map(|(p, r)| p * r).collect() }
}

/// ψ′(1) and ψ″(1) of ψ = rφ from collocation derivatives of φ.
fn wall_traces(grid: &RadialGrid, phi: &[C64]) -> (C64, C64, C64) {
    let m = grid.size();
    let d1 = grid.diff1(phi);
    let d2 = grid.diff2(phi);
    (phi[m], phi[m] + d1[m], 2.0 * d1[m] + d2[m])
}

/// (a, b, J) from the wall traces of ψ_s, ψ_e and the layer.
pub fn boundary_layer_constants(
    params: &FlowParams,
    n: i64,
    psi_s: &RadialField,
    psi_e: &RadialField,
    layer: &LayerData,
) -> Result<(C64, C64, C64)> {
    let grid = psi_s.grid.clone();
    let phi_of = |f: &RadialField| -> Vec<C64> {
        let d = grid.diff1(&f.values);
        f.values.iter().zip(grid.nodes()).enumerate().map(|(i, (v, &r))| if r > 0.0 { v / r } else { d[i] }).collect()
    };
    let chi: Vec<C64> = grid.nodes().iter().zip(&layer.profile().values).map(|(&r, v)| v * cutoff_chi(r)).collect();
    let phi_bl: Vec<C64> = chi.iter().zip(grid.nodes()).map(|(v, &r)| if r > 0.0 { v / r } else { C64::new(0.0, 0.0) }).collect();
    let (_, s1, _) = wall_traces(&grid, &phi_of(psi_s));
    let (_, e1, _) = wall_traces(&grid, &phi_of(psi_e));
    constants_from_traces(params, n, s1, e1, &wall_traces(&grid, &phi_bl), layer_scale(layer))
}

fn layer_scale(layer: &LayerData) -> f64 {
    match layer {
        LayerData::Exp(l) => l.beta,
        LayerData::Airy(l) => l.beta_abs * l.beta_abs,
    }
}

fn constants_from_traces(
    params: &FlowParams,
    n: i64,
    psi_s_d1: C64,
    psi_e_d1: C64,
    bl: &(C64, C64, C64),
    scale: f64,
) -> Result<(C64, C64, C64)> {
    let alpha = params.slip;
    let an = n.unsigned_abs() as f64;
    let (i1, di1) = bessel_i1(an)?;
    let (b0, b1, b2) = *bl;
    let j = -b0 * (an * an + alpha * an * di1 / i1) + (b2 + (1.0 + alpha) * b1 - b0 + alpha * psi_e_d1);
    if alpha == 0.0 {
        return Ok((C64::new(0.0, 0.0), C64::new(0.0, 0.0), j));
    }
    if !(j.norm() >= 1e-12 * scale) {
        return Err(Error::Regime(format!("degenerate decomposition: |J| = {:.3e} for n={n}", j.norm())));
    }
    let b = -alpha * psi_s_d1 / j;
    let a = -b * b0 / i1;
    Ok((a, b, j))
}

/// Builds the regime's layer (exponential in Z₁, Airy in Z₂).
pub fn layer_for_regime(params: &FlowParams, n: i64, regime: RegimeTag, grid: &Arc<RadialGrid>) -> Result<LayerData> {
    match regime {
        RegimeTag::Z1SmallSlip => Ok(LayerData::Exp(exp_boundary_layer(params, n, grid)?)),
        RegimeTag::Z2LargeSlip => Ok(LayerData::Airy(airy_boundary_layer(params, n, grid)?)),
        other => Err(Error::Regime(format!("no boundary-layer decomposition in regime {}", other.as_str()))),
    }
}

/// Decomposition with an explicitly supplied layer profile.
pub fn decompose_with_layer(params: &FlowParams, n: i64, f: &RadialField, regime: RegimeTag, layer: LayerData) -> Result<Decomposition> {
    if n == 0 {
        return Err(Error::Regime("no boundary-layer decomposition for the zero mode".into()));
    }
    let grid = f.grid.clone();
    let slip = StreamSolver::new(params, n, &grid, BcKind::Slip)?;
    let slip_mode = slip.solve(&f.values)?;
    let chi = RadialField {
        grid: grid.clone(),
        values: grid.nodes().iter().zip(&layer.profile().values).map(|(&r, v)| v * cutoff_chi(r)).collect(),
    };
    let rem = remainder_fields(params, n, &chi, &slip)?;
    let psi_e = psi_of(&grid, &rem.phi_e);
    let s = wall_traces(&grid, &slip_mode.phi.values);
    let e = wall_traces(&grid, &rem.phi_e);
    let bl = wall_traces(&grid, &rem.phi_bl);
    let (a, b, j) = constants_from_traces(params, n, s.1, e.1, &bl, layer_scale(&layer))?;
    let an = n.unsigned_abs() as f64;
    let mut psi_i = Vec::with_capacity(grid.len());
    for &r in grid.nodes() {
        psi_i.push(C64::from(bessel_i1(an * r)?.0));
    }
    Ok(Decomposition {
        n,
        regime,
        psi_s: slip_mode.psi.clone(),
        psi_bl: chi,
        psi_e,
        psi_i: RadialField { grid, values: psi_i },
        a,
        b,
        j,
        layer,
        remainder_residual: rem.residual,
        slip_mode,
    })
}

/// Regime-checked decomposition of mode n for the forcing samples f.
pub fn decompose_mode(params: &FlowParams, n: i64, f: &RadialField, eps1: f64, delta: f64) -> Result<Decomposition> {
    let regime = classify_with(params, n, &RegimeConstants { eps1, delta, ..Default::default() })?;
    let layer = layer_for_regime(params, n, regime, &f.grid)?;
    decompose_with_layer(params, n, f, regime, layer)
}

/// ‖reconstruction − ψ_direct‖ / ‖ψ_direct‖ in the r-weighted L² norm.
pub fn decomposition_residual(dec: &Decomposition, direct: &StreamMode) -> Result<f64> {
    let rec = dec.reconstruction();
    if rec.len() != direct.psi.len() || dec.n != direct.n {
        return Err(Error::Input("decomposition and direct solve differ in grid or mode".into()));
    }
    let grid = &rec.grid;
    let diff: Vec<C64> = rec.values.iter().zip(&direct.psi.values).map(|(a, b)| a - b).collect();
    let num = grid.norm_sq(&diff, 1).sqrt();
    let den = grid.norm_sq(&direct.psi.values, 1).sqrt();
    Ok(if num == 0.0 { 0.0 } else { num / den.max(f64::MIN_POSITIVE) })
}
