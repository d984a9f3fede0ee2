//! Residuals of solved modes, re-evaluated on a grid of twice the degree.
//!
//! The reduced unknowns and their first and second derivatives are
//! interpolated separately, so no differentiation takes place on the fine
//! grid and the r-multiplied equation stays regular at the axis.

use nalgebra::DMatrix;
use serde::Serialize;

use super::{BcKind, StreamMode, SwirlMode};
use crate::error::{Error, Result};
use crate::model::{FlowParams, RadialField, RadialGrid, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    /// max |operator − data| / max |data| on the refined grid
    pub equation: f64,
    /// max |r(w − (Δ₄−n²)φ)| / max |r w| (stream modes only)
    pub definition: f64,
    pub boundary: f64,
    pub total: f64,
}

impl ResidualReport {
    fn new(equation: f64, definition: f64, boundary: f64) -> Self {
        Self { equation, definition, boundary, total: equation.max(definition).max(boundary) }
    }
}

/// Mode accepted by [`linear_residual`].
#[derive(Debug, Clone, Copy)]
pub enum ModeRef<'a> {
    Stream(&'a StreamMode),
    Swirl(&'a SwirlMode),
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den.max(f64::MIN_POSITIVE)
    }
}

fn sup(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

struct Refined {
    nodes: Vec<f64>,
    interp: DMatrix<f64>,
}

impl Refined {
    fn new(grid: &RadialGrid) -> Result<Self> {
        let fine = RadialGrid::new(2 * grid.size())?;
        let nodes = fine.nodes().to_vec();
        let interp = grid.interpolation_matrix(&nodes);
        Ok(Self { nodes, interp })
    }

    fn up(&self, v: &[C64]) -> Vec<C64> {
        RadialGrid::apply(&self.interp, v)
    }

    /// r·(ic(r)·u − u″ − (3/r)u′ + n²u) − data, with u given through (u, u′, u″).
    fn operator(&self, grid: &RadialGrid, u: &[C64], ic: impl Fn(f64) -> C64, n2: f64) -> Vec<C64> {
        let uf = self.up(u);
        let d1 = self.up(&grid.diff1(u));
        let d2 = self.up(&grid.diff2(u));
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, &r)| r * (ic(r) + n2) * uf[i] - (r * d2[i] + 3.0 * d1[i]))
            .collect()
    }
}

fn check_grid(grid: &RadialGrid, data: &RadialField) -> Result<()> {
    if data.len() != grid.len() {
        return Err(Error::Input("mode and data live on different grids".into()));
    }
    Ok(())
}

/// Nodes of the refined grid and the interpolation matrix onto them.
pub(crate) fn refined_nodes(grid: &RadialGrid) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let r = Refined::new(grid)?;
    Ok((r.nodes, r.interp))
}

/// max |r(inŪ − Δ₄ + n²)w − f| on the refined grid, unnormalized.
pub(crate) fn stream_equation_abs(params: &FlowParams, mode: &StreamMode, f: &RadialField) -> Result<(f64, f64)> {
    let grid = mode.grid().clone();
    check_grid(&grid, f)?;
    let refined = Refined::new(&grid)?;
    let ff = refined.up(&f.values);
    let eq = equation_abs(&refined, params, &grid, mode.n, &mode.w.values, &ff);
    Ok((eq, sup(&ff)))
}

fn equation_abs(refined: &Refined, params: &FlowParams, grid: &RadialGrid, n: i64, u: &[C64], data: &[C64]) -> f64 {
    let nf = n as f64;
    let lhs = refined.operator(grid, u, |r| C64::new(0.0, nf * params.ubar(r)), nf * nf);
    lhs.iter().zip(data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

/// Unnormalized refined-grid equation residuals of a stream mode and a swirl
/// mode against data sampled directly at the refined nodes: f for the stream
/// equation and F^θ for the swirl equation.
pub(crate) fn equation_abs_fine(
    params: &FlowParams,
    stream: &StreamMode,
    swirl: &SwirlMode,
    f_fine: &[C64],
    ftheta_fine: &[C64],
) -> Result<(f64, f64)> {
    let grid = stream.grid().clone();
    let refined = Refined::new(&grid)?;
    if f_fine.len() != refined.nodes.len() || ftheta_fine.len() != refined.nodes.len() {
        return Err(Error::Input("data does not live on the refined grid".into()));
    }
    let es = equation_abs(&refined, params, &grid, stream.n, &stream.w.values, f_fine);
    let et = equation_abs(&refined, params, &grid, swirl.n, &swirl.v.values, ftheta_fine);
    Ok((es, et))
}

/// Residual of a stream mode against its forcing samples f.
pub fn stream_residual(params: &FlowParams, mode: &StreamMode, f: &RadialField) -> Result<ResidualReport> {
    let grid = mode.grid().clone();
    let (eq, fsup) = stream_equation_abs(params, mode, f)?;
    let equation = ratio(eq, fsup);
    let refined = Refined::new(&grid)?;
    let n2 = (mode.n * mode.n) as f64;
    let (phi, w) = (&mode.phi.values, &mode.w.values);

    // r(w − Lₙφ) = r·w + [r·(−φ″ − 3φ′/r + n²φ)]
    let lphi = refined.operator(&grid, phi, |_| C64::new(0.0, 0.0), n2);
    let wf = refined.up(w);
    let rw: Vec<C64> = wf.iter().zip(&refined.nodes).map(|(v, r)| v * r).collect();
    let def = rw.iter().zip(&lphi).map(|(a, b)| (a + b).norm()).fold(0.0, f64::max);
    let definition = ratio(def, sup(&rw));

    let m = grid.size();
    let dphi = grid.diff1(phi);
    let mut boundary = ratio(phi[m].norm(), sup(phi)).max(ratio(dphi[0].norm(), sup(&dphi)));
    let alpha = if mode.bc_kind == BcKind::Navier { params.slip } else { 0.0 };
    let wall = (w[m] + alpha * dphi[m]).norm();
    boundary = boundary.max(ratio(wall, sup(w) + alpha * sup(&dphi)));
    Ok(ResidualReport::new(equation, definition, boundary))
}

/// Residual of a swirl mode against its forcing samples F^θ.
pub fn swirl_residual(params: &FlowParams, mode: &SwirlMode, ftheta: &RadialField) -> Result<ResidualReport> {
    let grid = mode.v.grid.clone();
    check_grid(&grid, ftheta)?;
    let refined = Refined::new(&grid)?;
    let nf = mode.n as f64;
    let v = &mode.v.values;
    let ff = refined.up(&ftheta.values);
    let lhs = refined.operator(&grid, v, |r| C64::new(0.0, nf * params.ubar(r)), nf * nf);
    let eq = lhs.iter().zip(&ff).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let equation = ratio(eq, sup(&ff));
    let m = grid.size();
    let dv = grid.diff1(v);
    let boundary = if mode.n == 0 && params.slip == 0.0 {
        ratio(v[m].norm(), sup(v))
    } else {
        ratio((dv[m] + params.slip * v[m]).norm(), sup(&dv) + params.slip * sup(v))
    };
    Ok(ResidualReport::new(equation, 0.0, boundary))
}

/// Total refined-grid residual of a stream or swirl mode.
pub fn linear_residual(params: &FlowParams, mode: ModeRef<'_>, data: &RadialField) -> Result<f64> {
    let rep = match mode {
        ModeRef::Stream(m) => stream_residual(params, m, data)?,
        ModeRef::Swirl(m) => swirl_residual(params, m, data)?,
    };
    Ok(rep.total)
}
