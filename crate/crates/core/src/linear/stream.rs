use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::Factored;
use crate::error::{Error, Result};
use crate::model::{FlowParams, RadialField, RadialGrid, C64};

/// Wall condition of the stream problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BcKind {
    /// 𝓛ψ(1) = −αψ′(1)
    Navier,
    /// 𝓛ψ(1) = 0
    Slip,
}

/// Solved stream-function mode with derived velocity and vorticity.
#[derive(Debug, Clone)]
pub struct StreamMode {
    pub n: i64,
    pub bc_kind: BcKind,
    /// φ = ψ/r
    pub phi: RadialField,
    /// (Δ₄ − n²)φ, so that ω^θ = r·w
    pub w: RadialField,
    pub psi: RadialField,
    pub vr: RadialField,
    pub vz: RadialField,
    pub omega: RadialField,
}

impl StreamMode {
    /// Builds velocity and vorticity samples from (φ, w).
    pub fn from_reduced(n: i64, bc_kind: BcKind, phi: RadialField, w: RadialField) -> Result<Self> {
        let grid = phi.grid.clone();
        if w.len() != grid.len() {
            return Err(Error::Input("phi/w size mismatch".into()));
        }
        let r = grid.nodes();
        let dphi = grid.diff1(&phi.values);
        let nf = n as f64;
        let psi: Vec<C64> = phi.values.iter().zip(r).map(|(p, r)| p * r).collect();
        let vr = psi.iter().map(|p| C64::new(0.0, nf) * p).collect();
        // v^z = −(1/r)(rψ)′ = −(2φ + rφ′)
        let vz = phi.values.iter().zip(&dphi).zip(r).map(|((p, d), r)| -(2.0 * p + r * d)).collect();
        let omega = w.values.iter().zip(r).map(|(v, r)| v * r).collect();
        Ok(Self {
            n,
            bc_kind,
            psi: RadialField { grid: grid.clone(), values: psi },
            vr: RadialField { grid: grid.clone(), values: vr },
            vz: RadialField { grid: grid.clone(), values: vz },
            omega: RadialField { grid, values: omega },
            phi,
            w,
        })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.phi.grid
    }

    /// Mode −n of a real field.
    pub fn conjugate(&self) -> Self {
        let c = |f: &RadialField| f.map(|_, v| v.conj());
        Self {
            n: -self.n,
            bc_kind: self.bc_kind,
            phi: c(&self.phi),
            w: c(&self.w),
            psi: c(&self.psi),
            vr: c(&self.vr),
            vz: c(&self.vz),
            omega: c(&self.omega),
        }
    }

    /// (rψ)′/r = 2φ + rφ′ on the nodes.
    pub fn grad_factor(&self) -> Vec<C64> {
        self.vz.values.iter().map(|v| -v).collect()
    }
}

/// Factored collocation system of one stream mode.
///
/// Unknowns are (φ, w) with w = (Δ₄ − n²)φ, giving the coupled system
/// w − (Δ₄ − n²)φ = 0 and inŪw − (Δ₄ − n²)w = f/r. Axis rows carry
/// φ′(0) = 0 and the r-multiplied equation −3w′(0) = f(0); wall rows carry
/// φ(1) = 0 and w(1) + αφ′(1) = 0 (Navier) or w(1) = 0 (Slip).
#[derive(Debug, Clone)]
pub struct StreamSolver {
    pub params: FlowParams,
    pub n: i64,
    pub bc: BcKind,
    grid: Arc<RadialGrid>,
    system: Factored,
}

impl StreamSolver {
    pub fn new(params: &FlowParams, n: i64, grid: &Arc<RadialGrid>, bc: BcKind) -> Result<Self> {
        let m = grid.size();
        let np = m + 1;
        let nf = n as f64;
        let n2 = nf * nf;
        let (d1, lap) = (grid.d1(), grid.delta4());
        let r = grid.nodes();
        let mut a = DMatrix::<C64>::zeros(2 * np, 2 * np);
        for j in 0..np {
            a[(0, j)] = C64::from(d1[(0, j)]);
            a[(np, np + j)] = C64::from(-3.0 * d1[(0, j)]);
        }
        for i in 1..m {
            let iu = C64::new(0.0, nf * params.ubar(r[i]));
            a[(i, np + i)] = C64::from(1.0);
            for j in 0..np {
                let l = lap[(i, j)] - if i == j { n2 } else { 0.0 };
                a[(i, j)] -= l;
                a[(np + i, np + j)] -= l;
            }
            a[(np + i, np + i)] += iu;
        }
        a[(m, m)] = C64::from(1.0);
        a[(np + m, np + m)] = C64::from(1.0);
        if bc == BcKind::Navier {
            for j in 0..np {
                a[(np + m, j)] += params.slip * d1[(m, j)];
            }
        }
        let system = Factored::new(a, &format!("stream mode n={n}"))?;
        Ok(Self { params: *params, n, bc, grid: grid.clone(), system })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    /// Solves for the r-multiplied forcing samples f (f = inF^r − dF^z/dr).
    pub fn solve(&self, f: &[C64]) -> Result<StreamMode> {
        let np = self.grid.len();
        if f.len() != np {
            return Err(Error::Input(format!("forcing has {} samples, grid has {np}", f.len())));
        }
        let r = self.grid.nodes();
        let mut rhs = vec![C64::new(0.0, 0.0); 2 * np];
        rhs[np] = f[0];
        for i in 1..np - 1 {
            rhs[np + i] = f[i] / r[i];
        }
        let x = self.system.solve(rhs)?;
        let phi = RadialField { grid: self.grid.clone(), values: x[..np].to_vec() };
        let w = RadialField { grid: self.grid.clone(), values: x[np..].to_vec() };
        StreamMode::from_reduced(self.n, self.bc, phi, w)
    }

    /// Solves the block system for a full right-hand side laid out as
    /// (φ rows, w rows); returns (φ, w).
    pub fn solve_system(&self, rhs: Vec<C64>) -> Result<(RadialField, RadialField)> {
        let np = self.grid.len();
        if rhs.len() != 2 * np {
            return Err(Error::Input(format!("block right-hand side must have {} entries", 2 * np)));
        }
        let x = self.system.solve(rhs)?;
        Ok((
            RadialField { grid: self.grid.clone(), values: x[..np].to_vec() },
            RadialField { grid: self.grid.clone(), values: x[np..].to_vec() },
        ))
    }

    /// Block operator applied to (φ, w).
    pub fn apply_system(&self, phi: &[C64], w: &[C64]) -> Vec<C64> {
        let mut x = phi.to_vec();
        x.extend_from_slice(w);
        self.system.apply(&x)
    }

    pub fn condition_number(&self) -> f64 {
        self.system.condition_number()
    }
}

/// Solves inŪ(𝓛−n²)ψ − (𝓛−n²)²ψ = f with the given wall condition.
pub fn solve_stream_mode(params: &FlowParams, n: i64, f: &RadialField, bc: BcKind) -> Result<StreamMode> {
    StreamSolver::new(params, n, &f.grid, bc)?.solve(&f.values)
}

/// f = inF^r − dF^z/dr on the nodes.
pub fn curl_forcing(n: i64, fr: &RadialField, fz: &RadialField) -> Result<RadialField> {
    if fr.len() != fz.len() {
        return Err(Error::Input("F^r and F^z use different grids".into()));
    }
    let grid = fz.grid.clone();
    let dfz = grid.diff1(&fz.values);
    let i_n = C64::new(0.0, n as f64);
    let values = fr.values.iter().zip(&dfz).map(|(a, d)| i_n * a - d).collect();
    Ok(RadialField { grid, values })
}

/// Zero mode: 𝓛²ψ₀ = dF₀^z/dr with the Navier wall condition.
pub fn solve_zero_mode(params: &FlowParams, fz0: &RadialField) -> Result<StreamMode> {
    let grid = &fz0.grid;
    let f: Vec<C64> = grid.diff1(&fz0.values).into_iter().map(|v| -v).collect();
    StreamSolver::new(params, 0, grid, BcKind::Navier)?.solve(&f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_grid;

    fn re_poly(c: &[f64], r: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, v| acc * r + v)
    }

    #[test]
    fn zero_forcing_gives_zero() {
        let grid = build_grid(24).unwrap();
        let p = FlowParams::new(1e3, 1.0).unwrap();
        let m = solve_stream_mode(&p, 3, &RadialField::zeros(grid), BcKind::Navier).unwrap();
        assert!(m.psi.max_abs() == 0.0);
    }

    #[test]
    fn zero_mode_closed_forms() {
        let grid = build_grid(32).unwrap();
        let fz = RadialField::from_real_fn(grid.clone(), |r| r);
        for (alpha, c) in [(0.0, [7.0 / 360.0, 0.0, -1.0 / 24.0, 1.0 / 45.0]), (4.0, [11.0 / 720.0, 0.0, -3.0 / 80.0, 1.0 / 45.0])] {
            let p = FlowParams::new(1.0, alpha).unwrap();
            let m = solve_zero_mode(&p, &fz).unwrap();
            for (r, v) in grid.nodes().iter().zip(&m.psi.values) {
                let want = r * re_poly(&c, *r);
                assert!((v.re - want).abs() < 1e-13 && v.im.abs() < 1e-13);
            }
            assert!(m.vr.max_abs() == 0.0);
        }
        let p = FlowParams::new(1.0, 2.0).unwrap();
        let m = solve_zero_mode(&p, &RadialField::from_real_fn(grid, |_| 3.5)).unwrap();
        assert!(m.psi.max_abs() < 1e-13);
    }
}
