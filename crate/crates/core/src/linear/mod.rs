//! Mode-wise linear problems: the fourth-order stream-function equation, the
//! zero mode and the second-order swirl equation.
//!
//! Both equations are solved for the reduced unknowns φ = ψ/r and V = v^θ/r,
//! which are smooth radial functions on the four-dimensional unit ball.

mod residual;
mod stream;
mod swirl;
mod velocity;

pub(crate) use residual::{equation_abs_fine, refined_nodes, stream_equation_abs};
pub use residual::{linear_residual, stream_residual, swirl_residual, ModeRef, ResidualReport};
pub use stream::{curl_forcing, solve_stream_mode, solve_zero_mode, BcKind, StreamMode, StreamSolver};
pub use swirl::{solve_swirl_mode, swirl_compatibility, SwirlMode, SwirlSolver, COMPATIBILITY_TOL};
pub use velocity::{assemble_velocity, VelocityField};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::C64;

/// LU factors of a dense complex system, kept for repeated right-hand sides.
#[derive(Debug, Clone)]
pub(crate) struct Factored {
    matrix: DMatrix<C64>,
    lu: nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl Factored {
    pub(crate) fn new(matrix: DMatrix<C64>, what: &str) -> Result<Self> {
        let lu = matrix.clone().lu();
        let u = lu.u();
        let diag: Vec<f64> = (0..u.nrows()).map(|i| u[(i, i)].norm()).collect();
        let max = diag.iter().cloned().fold(0.0, f64::max);
        let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(min > 1e-14 * max) || !max.is_finite() {
            return Err(Error::Numerical(format!(
                "{what}: discrete operator is singular (pivot ratio {:.3e}, size {})",
                min / max,
                matrix.nrows()
            )));
        }
        Ok(Self { matrix, lu })
    }

    pub(crate) fn solve(&self, rhs: Vec<C64>) -> Result<Vec<C64>> {
        let b = DVector::from_vec(rhs);
        let x = self
            .lu
            .solve(&b)
            .ok_or_else(|| Error::Numerical("LU back-substitution failed".into()))?;
        if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Numerical("non-finite solution of the collocation system".into()));
        }
        Ok(x.as_slice().to_vec())
    }

    pub(crate) fn apply(&self, x: &[C64]) -> Vec<C64> {
        let v = &self.matrix * DVector::from_column_slice(x);
        v.as_slice().to_vec()
    }

    /// 2-norm condition number from the singular values.
    pub(crate) fn condition_number(&self) -> f64 {
        let sv = self.matrix.clone().singular_values();
        let max = sv.iter().cloned().fold(0.0, f64::max);
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        max / min
    }
}
