//! Nonlinear problem on the truncated Fourier system: convolution terms,
//! the zero-mode compatibility projection, Picard iteration, the
//! refined-grid residual and the two-start uniqueness probe.

mod picard;
mod terms;

use std::collections::BTreeMap;

pub use picard::{
    picard_solve, picard_solve_traced, smallness_threshold, uniqueness_probe, IterationTrace, NonlinearConfig, StepRecord,
    UniquenessReport,
};
pub use terms::{dealiased_size, nonlinear_terms, ModeTerms};

use crate::error::{Error, Result};
use crate::linear::{
    assemble_velocity, equation_abs_fine, refined_nodes, stream_residual, swirl_residual, StreamMode, SwirlMode, VelocityField,
};
use crate::model::{FlowParams, RadialField, RadialGrid, C64};
use crate::norms::{sobolev_surrogate, ModeForcing};

/// F − c·r with c = 4∫F r² dr, so the result has ∫F r² dr = 0.
pub(crate) fn compatibility_shift(f: &RadialField) -> RadialField {
    let grid = &f.grid;
    let ones = vec![C64::from(1.0); grid.len()];
    let c = 4.0 * grid.inner(&f.values, &ones, 2);
    f.map(|r, v| v - c * r)
}

/// Replaces F₀^θ by its compatible part; every other component is returned
/// unchanged.
pub fn enforce_compatibility(forcing: &[ModeForcing]) -> Vec<ModeForcing> {
    forcing
        .iter()
        .map(|f| {
            let mut g = f.clone();
            if f.n == 0 {
                g.ftheta = compatibility_shift(&f.ftheta);
            }
            g
        })
        .collect()
}

/// H^s surrogate of a − b; modes present in only one field count as zero in
/// the other.
pub fn surrogate_distance(a: &VelocityField, b: &VelocityField, s: f64) -> Result<f64> {
    let mut modes = Vec::new();
    let keys: std::collections::BTreeSet<i64> = a.modes.keys().chain(b.modes.keys()).copied().collect();
    for n in keys {
        let (sa, ta) = match (a.modes.get(&n), b.modes.get(&n)) {
            (Some(x), None) | (None, Some(x)) => (x.0.clone(), x.1.clone()),
            (Some(x), Some(y)) => {
                if x.0.phi.len() != y.0.phi.len() {
                    return Err(Error::Input("fields live on different grids".into()));
                }
                let d = |p: &RadialField, q: &RadialField| RadialField {
                    grid: p.grid.clone(),
                    values: p.values.iter().zip(&q.values).map(|(u, v)| u - v).collect(),
                };
                let sm = StreamMode::from_reduced(n, x.0.bc_kind, d(&x.0.phi, &y.0.phi), d(&x.0.w, &y.0.w))?;
                (sm, SwirlMode::from_reduced(n, d(&x.1.v, &y.1.v)))
            }
            (None, None) => unreachable!(),
        };
        modes.push((sa, ta));
    }
    if modes.is_empty() {
        return Ok(0.0);
    }
    sobolev_surrogate(&assemble_velocity(modes, false)?, s)
}

/// Max over modes of the stream and swirl residuals including the
/// convolution terms, with the nonlinear terms re-evaluated from the
/// interpolated field on a grid of twice the degree. Equation residuals are
/// relative to the largest data sample over all modes; wall rows and the
/// vorticity definition are relative per mode and weighted by the mode
/// amplitude over the largest amplitude.
pub fn nonlinear_residual(params: &FlowParams, v: &VelocityField, forcing: &[ModeForcing]) -> Result<f64> {
    let Some((_, (s0, _))) = v.modes.iter().next() else {
        return Ok(0.0);
    };
    let grid = s0.grid().clone();
    let big_n = v.truncation as i64;
    let mut data: BTreeMap<i64, &ModeForcing> = BTreeMap::new();
    for f in forcing {
        if f.n < 0 || f.n > big_n {
            return Err(Error::Input(format!("forcing mode n={} outside 0..={big_n}", f.n)));
        }
        if f.fr.len() != grid.len() || f.fz.len() != grid.len() || f.ftheta.len() != grid.len() {
            return Err(Error::Input(format!("forcing mode n={} uses a different grid", f.n)));
        }
        if data.insert(f.n, f).is_some() {
            return Err(Error::Input(format!("duplicate forcing mode n={}", f.n)));
        }
    }
    let (nodes, interp) = refined_nodes(&grid)?;
    let fac = v.modes.iter().map(|(n, (s, t))| (*n, terms::factors_at(s, t, &nodes, &interp))).collect();
    let prods = terms::products(&fac, nodes.len(), big_n);
    let up = |x: &[C64]| RadialGrid::apply(&interp, x);
    let zero = vec![C64::new(0.0, 0.0); nodes.len()];

    let mut eq_stream: f64 = 0.0;
    let mut eq_swirl: f64 = 0.0;
    let mut sup_stream: f64 = 0.0;
    let mut sup_swirl: f64 = 0.0;
    let mut rows_stream = Vec::new();
    let mut rows_swirl = Vec::new();
    for (n, (s, t)) in v.modes.range(0..) {
        let [pr, _, pt, pdz] = &prods[(n + big_n) as usize];
        let i_n = C64::new(0.0, *n as f64);
        let (fr, dfz, ft) = match data.get(n) {
            Some(f) => (up(&f.fr.values), up(&grid.diff1(&f.fz.values)), up(&f.ftheta.values)),
            None => (zero.clone(), zero.clone(), zero.clone()),
        };
        let f: Vec<C64> = (0..nodes.len()).map(|i| i_n * (fr[i] + pr[i]) - (dfz[i] + pdz[i])).collect();
        let ftheta: Vec<C64> = ft.iter().zip(pt).map(|(a, b)| a + b).collect();
        let (es, et) = equation_abs_fine(params, s, t, &f, &ftheta)?;
        eq_stream = eq_stream.max(es);
        eq_swirl = eq_swirl.max(et);
        sup_stream = f.iter().map(|x| x.norm()).fold(sup_stream, f64::max);
        sup_swirl = ftheta.iter().map(|x| x.norm()).fold(sup_swirl, f64::max);
        let zf = RadialField::zeros(grid.clone());
        let sr = stream_residual(params, s, &zf)?;
        let tr = swirl_residual(params, t, &zf)?;
        let amp_s = s.phi.max_abs().max(s.w.max_abs());
        let amp_t = t.v.max_abs();
        rows_stream.push((sr.definition.max(sr.boundary), amp_s));
        rows_swirl.push((tr.boundary, amp_t));
    }
    let rel = |e: f64, s: f64| if e == 0.0 { 0.0 } else { e / s.max(f64::MIN_POSITIVE) };
    // per-mode relative row residuals, weighted by the mode amplitude
    let weighted = |rows: &[(f64, f64)]| {
        let top = rows.iter().map(|r| r.1).fold(0.0, f64::max);
        rows.iter().map(|&(e, a)| rel(e * a, top)).fold(0.0, f64::max)
    };
    Ok(rel(eq_stream, sup_stream).max(rel(eq_swirl, sup_swirl)).max(weighted(&rows_stream)).max(weighted(&rows_swirl)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_grid;

    fn forcing_theta(grid: &std::sync::Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> ModeForcing {
        let z = RadialField::zeros(grid.clone());
        ModeForcing { n: 0, fr: z.clone(), fz: z, ftheta: RadialField::from_real_fn(grid.clone(), f) }
    }

    #[test]
    fn compatibility_examples() {
        let grid = build_grid(24).unwrap();
        let out = enforce_compatibility(&[forcing_theta(&grid, |r| r)]);
        assert!(out[0].ftheta.max_abs() < 1e-14);
        let f = forcing_theta(&grid, |r| 4.0 * r - 5.0 * r * r);
        let out = enforce_compatibility(std::slice::from_ref(&f));
        for (a, b) in out[0].ftheta.values.iter().zip(&f.ftheta.values) {
            assert!((a - b).norm() < 1e-14);
        }
        let out = enforce_compatibility(&[forcing_theta(&grid, |_| 0.0)]);
        assert_eq!(out[0].ftheta.max_abs(), 0.0);
    }

    #[test]
    fn only_the_zero_mode_swirl_is_touched() {
        let grid = build_grid(16).unwrap();
        let mut f = forcing_theta(&grid, |r| r * r);
        f.fz = RadialField::from_real_fn(grid.clone(), |r| r);
        let mut g = f.clone();
        g.n = 2;
        let out = enforce_compatibility(&[f.clone(), g.clone()]);
        assert_eq!(out[0].fz.values, f.fz.values);
        assert_eq!(out[1].ftheta.values, g.ftheta.values);
        let ones = vec![C64::from(1.0); grid.len()];
        assert!(grid.inner(&out[0].ftheta.values, &ones, 2).norm() < 1e-15);
    }
}
