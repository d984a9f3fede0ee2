//! Picard iteration v^{j+1} = 𝒯(F + N(v^j)) on the truncated mode system.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::terms::{nonlinear_terms, ModeTerms};
use super::compatibility_shift;
use crate::error::{Error, Result};
use crate::linear::{assemble_velocity, curl_forcing, BcKind, StreamMode, StreamSolver, SwirlMode, SwirlSolver, VelocityField};
use crate::model::{RadialField, RadialGrid, C64};
use crate::norms::{sobolev_surrogate, ModeForcing};
use crate::model::FlowParams;

/// Truncation, grid and stopping rule of the Picard solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearConfig {
    pub truncation: usize,
    pub grid_size: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub relaxation: f64,
}

impl Default for NonlinearConfig {
    fn default() -> Self {
        Self { truncation: 16, grid_size: 48, tolerance: 1e-10, max_iterations: 50, relaxation: 1.0 }
    }
}

impl NonlinearConfig {
    pub fn validate(&self) -> Result<()> {
        if self.truncation < 1 {
            return Err(Error::Config("truncation N must be >= 1".into()));
        }
        if self.grid_size < 4 {
            return Err(Error::Config("grid size must be >= 4".into()));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::Config(format!("tolerance must be > 0, got {}", self.tolerance)));
        }
        if self.max_iterations < 1 {
            return Err(Error::Config("max_iterations must be >= 1".into()));
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return Err(Error::Config(format!("relaxation must lie in (0, 1], got {}", self.relaxation)));
        }
        Ok(())
    }
}

/// Default smallness threshold 0.05·(1 + Φ^{1/4})⁻¹ on ‖F‖.
pub fn smallness_threshold(flux: f64) -> f64 {
    0.05 / (1.0 + flux.powf(0.25))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    /// H^{3/2} surrogate of v^{k+1} − v^k
    pub update_norm: f64,
    /// L² norm of the convolution terms N(v^k)
    pub rhs_norm: f64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct IterationTrace {
    pub steps: Vec<StepRecord>,
    pub converged: bool,
    pub final_residual: Option<f64>,
}

/// Iterate or fixed point: modes n = 0..N.
#[derive(Debug, Clone)]
pub(crate) struct ModeSet {
    pub modes: Vec<(StreamMode, SwirlMode)>,
}

impl ModeSet {
    pub fn field(&self) -> Result<VelocityField> {
        assemble_velocity(self.modes.clone(), true)
    }

    fn combine(&self, other: &ModeSet, a: f64, b: f64) -> Result<ModeSet> {
        let mix = |x: &RadialField, y: &RadialField| RadialField {
            grid: x.grid.clone(),
            values: x.values.iter().zip(&y.values).map(|(p, q)| a * p + b * q).collect(),
        };
        let modes = self
            .modes
            .iter()
            .zip(&other.modes)
            .map(|((s, t), (s2, t2))| {
                let s = StreamMode::from_reduced(s.n, s.bc_kind, mix(&s.phi, &s2.phi), mix(&s.w, &s2.w))?;
                Ok((s, SwirlMode::from_reduced(t.n, mix(&t.v, &t2.v))))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ModeSet { modes })
    }

    pub fn distance(&self, other: &ModeSet) -> Result<f64> {
        sobolev_surrogate(&self.combine(other, 1.0, -1.0)?.field()?, 1.5)
    }
}

/// Solvers and external data per mode n = 0..N.
pub(crate) struct System {
    pub params: FlowParams,
    pub grid: std::sync::Arc<RadialGrid>,
    stream: Vec<StreamSolver>,
    swirl: Vec<SwirlSolver>,
    /// curl of the external data
    ext_curl: Vec<Vec<C64>>,
    ext_theta: Vec<Vec<C64>>,
}

impl System {
    pub fn new(params: &FlowParams, forcing: &[ModeForcing], cfg: &NonlinearConfig) -> Result<Self> {
        cfg.validate()?;
        let big_n = cfg.truncation as i64;
        let grid = match forcing.first() {
            Some(f) if f.fr.grid.size() == cfg.grid_size => f.fr.grid.clone(),
            Some(_) => return Err(Error::Config("forcing grid does not match grid_size".into())),
            None => crate::model::build_grid(cfg.grid_size)?,
        };
        let mut full: Vec<ModeForcing> = (0..=big_n)
            .map(|n| {
                let z = RadialField::zeros(grid.clone());
                ModeForcing { n, fr: z.clone(), fz: z.clone(), ftheta: z }
            })
            .collect();
        for f in forcing {
            if f.n < 0 || f.n > big_n {
                return Err(Error::Input(format!("forcing mode n={} outside 0..={big_n}", f.n)));
            }
            if f.fr.len() != grid.len() || f.fz.len() != grid.len() || f.ftheta.len() != grid.len() {
                return Err(Error::Input(format!("forcing mode n={} uses a different grid", f.n)));
            }
            full[f.n as usize] = f.clone();
        }
        let stream = (0..=big_n)
            .into_par_iter()
            .map(|n| StreamSolver::new(params, n, &grid, BcKind::Navier))
            .collect::<Result<Vec<_>>>()?;
        let swirl = (0..=big_n).into_par_iter().map(|n| SwirlSolver::new(params, n, &grid)).collect::<Result<Vec<_>>>()?;
        let ext_curl = full.iter().map(|f| curl_forcing(f.n, &f.fr, &f.fz).map(|c| c.values)).collect::<Result<Vec<_>>>()?;
        let ext_theta = full.iter().map(|f| f.ftheta.values.clone()).collect();
        Ok(Self { params: *params, grid, stream, swirl, ext_curl, ext_theta })
    }

    /// 𝒯(F + N): solves every mode n ≥ 0 with the given convolution terms.
    pub fn solve(&self, terms: Option<&std::collections::BTreeMap<i64, ModeTerms>>) -> Result<ModeSet> {
        let modes = (0..self.stream.len())
            .into_par_iter()
            .map(|k| {
                let n = k as i64;
                let mut f = self.ext_curl[k].clone();
                let mut ft = self.ext_theta[k].clone();
                if let Some(t) = terms.and_then(|t| t.get(&n)) {
                    for (a, b) in f.iter_mut().zip(t.curl().values) {
                        *a += b;
                    }
                    let mut nt = t.ftheta.clone();
                    if n == 0 && self.params.slip == 0.0 {
                        // the exact terms satisfy the compatibility condition;
                        // remove the discretization defect
                        nt = compatibility_shift(&nt);
                    }
                    for (a, b) in ft.iter_mut().zip(&nt.values) {
                        *a += b;
                    }
                }
                let s = self.stream[k].solve(&f)?;
                let v = self.swirl[k].solve(&ft)?;
                Ok((s, v))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ModeSet { modes })
    }
}

/// Largest |∂_r v^r + v^r/r + ∂_z v^z| over modes and nodes, relative to the
/// largest term.
fn divergence_defect(set: &ModeSet) -> f64 {
    let mut worst: f64 = 0.0;
    for (s, _) in &set.modes {
        let grid = s.grid();
        let i_n = C64::new(0.0, s.n as f64);
        let r = grid.nodes();
        let dphi = grid.diff1(&s.phi.values);
        // v^r = inψ, so ∂_r v^r + v^r/r = in(ψ′ + φ) with ψ′ = φ + rφ′
        let dpsi: Vec<C64> = (0..grid.len()).map(|i| s.phi.values[i] + r[i] * dphi[i]).collect();
        let mut scale: f64 = 0.0;
        let mut err: f64 = 0.0;
        for i in 0..grid.len() {
            let a = i_n * (dpsi[i] + s.phi.values[i]);
            let b = i_n * s.vz.values[i];
            scale = scale.max(a.norm()).max(b.norm());
            err = err.max((a + b).norm());
        }
        if scale > 0.0 {
            worst = worst.max(err / scale);
        }
    }
    worst
}

fn hermitian_defect(terms: &std::collections::BTreeMap<i64, ModeTerms>) -> f64 {
    let mut scale: f64 = 0.0;
    let mut err: f64 = 0.0;
    for (n, t) in terms.range(1..) {
        let c = &terms[&-n];
        for (a, b) in [(&t.fr, &c.fr), (&t.fz, &c.fz), (&t.ftheta, &c.ftheta)] {
            for (x, y) in a.values.iter().zip(&b.values) {
                scale = scale.max(x.norm());
                err = err.max((x - y.conj()).norm());
            }
        }
    }
    if let Some(t) = terms.get(&0) {
        for f in [&t.fr, &t.fz, &t.ftheta] {
            for x in &f.values {
                scale = scale.max(x.norm());
                err = err.max(x.im.abs());
            }
        }
    }
    if scale == 0.0 {
        0.0
    } else {
        err / scale
    }
}

fn terms_norm(terms: &std::collections::BTreeMap<i64, ModeTerms>, grid: &RadialGrid) -> f64 {
    let s: f64 = terms
        .values()
        .map(|t| grid.norm_sq(&t.fr.values, 1) + grid.norm_sq(&t.fz.values, 1) + grid.norm_sq(&t.ftheta.values, 1))
        .sum();
    (2.0 * std::f64::consts::PI * s).sqrt()
}

pub(crate) fn iterate(system: &System, start: ModeSet, cfg: &NonlinearConfig, trace: &mut IterationTrace) -> Result<ModeSet> {
    let mut v = start;
    let mut growth = 0;
    let mut last = f64::INFINITY;
    for step in 1..=cfg.max_iterations {
        let t0 = Instant::now();
        let field = v.field()?;
        let terms = nonlinear_terms(&field)?;
        let herm = hermitian_defect(&terms);
        if herm > 1e-10 {
            return Err(Error::Numerical(format!("convolution terms lost Hermitian symmetry ({herm:.2e})")));
        }
        let rhs_norm = terms_norm(&terms, &system.grid);
        let mut next = system.solve(Some(&terms))?;
        if cfg.relaxation < 1.0 {
            next = next.combine(&v, cfg.relaxation, 1.0 - cfg.relaxation)?;
        }
        let div = divergence_defect(&next);
        if div > 1e-10 {
            return Err(Error::Numerical(format!("iterate violates the divergence identity ({div:.2e})")));
        }
        let update = next.distance(&v)?;
        trace.steps.push(StepRecord { step, update_norm: update, rhs_norm, wall_seconds: t0.elapsed().as_secs_f64() });
        v = next;
        if !update.is_finite() {
            return Err(Error::Divergence { step, last_update: update });
        }
        if update <= cfg.tolerance {
            trace.converged = true;
            return Ok(v);
        }
        growth = if update > last { growth + 1 } else { 0 };
        if growth >= 3 {
            return Err(Error::Divergence { step, last_update: update });
        }
        last = update;
    }
    Err(Error::NonConvergence { iterations: cfg.max_iterations, last_update: last })
}

/// Picard solve that always returns the trace, with the outcome alongside.
pub fn picard_solve_traced(
    params: &FlowParams,
    forcing: &[ModeForcing],
    cfg: &NonlinearConfig,
) -> (Result<VelocityField>, IterationTrace) {
    let mut trace = IterationTrace::default();
    let mut run = || -> Result<VelocityField> {
        let system = System::new(params, forcing, cfg)?;
        let start = system.solve(None)?;
        let fixed = iterate(&system, start, cfg, &mut trace)?;
        fixed.field()
    };
    let out = run();
    if let Ok(v) = &out {
        trace.final_residual = super::nonlinear_residual(params, v, forcing).ok();
    }
    (out, trace)
}

/// Iterates from v⁰ = 𝒯F until the H^{3/2}-surrogate update is below the
/// tolerance. Forcing modes are n ≥ 0; negative modes follow by symmetry.
pub fn picard_solve(params: &FlowParams, forcing: &[ModeForcing], cfg: &NonlinearConfig) -> Result<(VelocityField, IterationTrace)> {
    let (v, trace) = picard_solve_traced(params, forcing, cfg);
    Ok((v?, trace))
}

/// Outcome of two Picard runs from different starts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub perturbation_norm: f64,
    pub iterations: [usize; 2],
    pub converged: [bool; 2],
    /// H^{3/2} surrogate of the difference of the fixed points
    pub distance: Option<f64>,
    pub inconclusive: bool,
    pub note: String,
}

/// Runs Picard from 𝒯F and from 𝒯F + P, where P = 𝒯G for a fixed smooth G
/// scaled to H^{3/2} surrogate `perturbation`.
pub fn uniqueness_probe(
    params: &FlowParams,
    forcing: &[ModeForcing],
    cfg: &NonlinearConfig,
    perturbation: f64,
) -> Result<UniquenessReport> {
    let system = System::new(params, forcing, cfg)?;
    let start = system.solve(None)?;
    let grid = system.grid.clone();
    let nmax = cfg.truncation.min(3) as i64;
    let shape: Vec<ModeForcing> = (0..=nmax)
        .map(|n| {
            let f = |c: f64| RadialField::from_real_fn(grid.clone(), move |r| c * (1.0 - r * r) * (1.0 + r));
            ModeForcing { n, fr: f(1.0), fz: f(0.5), ftheta: f(if n == 0 { 0.0 } else { 1.0 }) }
        })
        .collect();
    let psys = System::new(params, &shape, cfg)?;
    let p = psys.solve(None)?;
    let zero = ModeSet { modes: p.modes.iter().map(|(s, t)| (zeroed(s), SwirlMode::zeros(t.n, grid.clone()))).collect() };
    let pn = p.distance(&zero)?;
    let scale = if pn > 0.0 { perturbation / pn } else { 0.0 };
    let second = start.combine(&p, 1.0, scale)?;
    let mut runs = Vec::new();
    for s in [start, second] {
        let mut trace = IterationTrace::default();
        let r = iterate(&system, s, cfg, &mut trace);
        runs.push((r, trace));
    }
    let iterations = [runs[0].1.steps.len(), runs[1].1.steps.len()];
    let converged = [runs[0].1.converged, runs[1].1.converged];
    let (distance, inconclusive, note) = match (&runs[0].0, &runs[1].0) {
        (Ok(a), Ok(b)) => (Some(a.distance(b)?), false, String::new()),
        (Err(e), _) | (_, Err(e)) => (None, true, e.to_string()),
    };
    Ok(UniquenessReport { perturbation_norm: perturbation, iterations, converged, distance, inconclusive, note })
}

fn zeroed(s: &StreamMode) -> StreamMode {
    let z = RadialField::zeros(s.grid().clone());
    StreamMode::from_reduced(s.n, s.bc_kind, z.clone(), z).expect("same grid")
}
