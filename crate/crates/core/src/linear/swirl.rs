use std::sync::Arc;

use nalgebra::DMatrix;

use super::Factored;
use crate::error::{Error, Result};
use crate::model::{FlowParams, RadialField, RadialGrid, C64};

/// Relative tolerance on ∫F₀^θ r² dr for the n = 0 swirl problem.
pub const COMPATIBILITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SwirlMode {
    pub n: i64,
    /// V = v^θ/r
    pub v: RadialField,
    pub vtheta: RadialField,
}

impl SwirlMode {
    pub fn from_reduced(n: i64, v: RadialField) -> Self {
        let vtheta = v.map(|r, x| x * r);
        Self { n, v, vtheta }
    }

    pub fn zeros(n: i64, grid: Arc<RadialGrid>) -> Self {
        Self::from_reduced(n, RadialField::zeros(grid))
    }

    pub fn conjugate(&self) -> Self {
        Self { n: -self.n, v: self.v.map(|_, x| x.conj()), vtheta: self.vtheta.map(|_, x| x.conj()) }
    }
}

/// Factored system inŪV − Δ₄V + n²V = F/r with −3V′(0) = F(0) on the axis
/// and V′(1) + αV(1) = 0 on the wall. For n = 0 and α = 0 the wall row is
/// V(1) = 0, which fixes the additive constant.
#[derive(Debug, Clone)]
pub struct SwirlSolver {
    pub params: FlowParams,
    pub n: i64,
    grid: Arc<RadialGrid>,
    system: Factored,
}

impl SwirlSolver {
    pub fn new(params: &FlowParams, n: i64, grid: &Arc<RadialGrid>) -> Result<Self> {
        let m = grid.size();
        let np = m + 1;
        let nf = n as f64;
        let (d1, lap) = (grid.d1(), grid.delta4());
        let r = grid.nodes();
        let mut a = DMatrix::<C64>::zeros(np, np);
        for j in 0..np {
            a[(0, j)] = C64::from(-3.0 * d1[(0, j)]);
        }
        for i in 1..m {
            for j in 0..np {
                a[(i, j)] = C64::from(-lap[(i, j)]);
            }
            a[(i, i)] += C64::new(nf * nf, nf * params.ubar(r[i]));
        }
        if n == 0 && params.slip == 0.0 {
            a[(m, m)] = C64::from(1.0);
        } else {
            for j in 0..np {
                a[(m, j)] = C64::from(d1[(m, j)]);
            }
            a[(m, m)] += params.slip;
        }
        let system = Factored::new(a, &format!("swirl mode n={n}"))?;
        Ok(Self { params: *params, n, grid: grid.clone(), system })
    }

    pub fn solve(&self, ftheta: &[C64]) -> Result<SwirlMode> {
        let np = self.grid.len();
        if ftheta.len() != np {
            return Err(Error::Input(format!("forcing has {} samples, grid has {np}", ftheta.len())));
        }
        if self.n == 0 && self.params.slip == 0.0 {
            let (c, scale) = swirl_compatibility(&self.grid, ftheta);
            if c.norm() > COMPATIBILITY_TOL * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::Input(format!(
                    "n=0 swirl forcing violates the compatibility condition: |int F r^2 dr| = {:.3e}",
                    c.norm()
                )));
            }
        }
        let r = self.grid.nodes();
        let mut rhs = vec![C64::new(0.0, 0.0); np];
        rhs[0] = ftheta[0];
        for i in 1..np - 1 {
            rhs[i] = ftheta[i] / r[i];
        }
        let x = self.system.solve(rhs)?;
        Ok(SwirlMode::from_reduced(self.n, RadialField { grid: self.grid.clone(), values: x }))
    }

    pub fn condition_number(&self) -> f64 {
        self.system.condition_number()
    }
}

/// (|∫F r² dr|, (∫|F|² r dr)^{1/2}) for the zero-mode compatibility check.
pub fn swirl_compatibility(grid: &RadialGrid, f: &[C64]) -> (C64, f64) {
    let ones = vec![C64::from(1.0); grid.len()];
    let c = grid.inner(f, &ones, 2);
    (c, grid.norm_sq(f, 1).sqrt())
}

/// Solves inŪv − (𝓛−n²)v = F^θ with v(0) = 0 and v′(1) = (1−α)v(1).
pub fn solve_swirl_mode(params: &FlowParams, n: i64, ftheta: &RadialField) -> Result<SwirlMode> {
    SwirlSolver::new(params, n, &ftheta.grid)?.solve(&ftheta.values)
}
