//! One function per subcommand. Each returns the artifact to be written;
//! `pass` is false when a checked bound fails.

use std::time::Instant;

use serde_json::{json, Value};
use slipflow_core::decomposition::{decompose_mode, decomposition_residual};
use slipflow_core::linear::{curl_forcing, stream_residual, swirl_residual, BcKind, StreamSolver, SwirlSolver};
use slipflow_core::model::{build_grid, classify_with, C64};
use slipflow_core::nonlinear::{picard_solve_traced, smallness_threshold, uniqueness_probe};
use slipflow_core::norms::{
    forcing_norm, inequality_suite_with, sobolev_surrogate, sweep_and_fit, EstimateId, ModeForcing, ModeShape, SweepSpec,
};
use slipflow_core::specfun::{airy_ai_with_derivative, bessel_i0, bessel_i1, cutoff_chi, cutoff_chi_derivative};
use slipflow_core::Error;

use crate::config::{RunConfig, SpecialFunction};
use crate::output::{Artifact, Cell};
use crate::CliError;

fn complex(z: C64) -> Value {
    json!([z.re, z.im])
}

fn regime_name(cfg: &RunConfig, n: i64) -> Result<&'static str, CliError> {
    let params = cfg.params()?;
    Ok(classify_with(&params, n, &cfg.regime())?.as_str())
}

pub fn solve_linear(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let params = cfg.params()?;
    let sec = &cfg.linear;
    let grid = build_grid(cfg.grid_size)?;
    let data = ModeShape { n: sec.n, fr: sec.fr.clone(), fz: sec.fz.clone(), ftheta: Vec::new() }.forcing(&grid);
    let f = curl_forcing(sec.n, &data.fr, &data.fz)?;
    let solver = StreamSolver::new(&params, sec.n, &grid, BcKind::from(sec.bc))?;
    let mode = solver.solve(&f.values)?;
    let rep = stream_residual(&params, &mode, &f)?;
    let mut a = Artifact::new(
        "solve-linear",
        vec!["r", "psi_re", "psi_im", "vr_re", "vr_im", "vz_re", "vz_im", "omega_re", "omega_im"],
    );
    for (i, &r) in grid.nodes().iter().enumerate() {
        let mut row: Vec<Cell> = vec![r.into()];
        for fld in [&mode.psi, &mode.vr, &mode.vz, &mode.omega] {
            row.push(fld.values[i].re.into());
            row.push(fld.values[i].im.into());
        }
        a.push(row);
    }
    a.pass = rep.total <= sec.residual_tolerance;
    a.summary = json!({
        "n": sec.n,
        "regime": regime_name(cfg, sec.n)?,
        "residual": rep,
        "residual_tolerance": sec.residual_tolerance,
    });
    Ok(a)
}

pub fn solve_swirl(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let params = cfg.params()?;
    let sec = &cfg.swirl;
    let grid = build_grid(cfg.grid_size)?;
    let data = ModeShape { n: sec.n, fr: Vec::new(), fz: Vec::new(), ftheta: sec.ftheta.clone() }.forcing(&grid);
    let mode = SwirlSolver::new(&params, sec.n, &grid)?.solve(&data.ftheta.values)?;
    let rep = swirl_residual(&params, &mode, &data.ftheta)?;
    let mut a = Artifact::new("solve-swirl", vec!["r", "v_re", "v_im", "vtheta_re", "vtheta_im"]);
    for (i, &r) in grid.nodes().iter().enumerate() {
        let (v, t) = (mode.v.values[i], mode.vtheta.values[i]);
        a.push(vec![r.into(), v.re.into(), v.im.into(), t.re.into(), t.im.into()]);
    }
    a.pass = rep.total <= sec.residual_tolerance;
    a.summary = json!({
        "n": sec.n,
        "regime": regime_name(cfg, sec.n)?,
        "residual": rep,
        "residual_tolerance": sec.residual_tolerance,
    });
    Ok(a)
}

pub fn decompose(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let params = cfg.params()?;
    let sec = &cfg.decompose;
    let grid = build_grid(cfg.grid_size)?;
    let data = ModeShape { n: sec.n, fr: sec.fr.clone(), fz: sec.fz.clone(), ftheta: Vec::new() }.forcing(&grid);
    let f = curl_forcing(sec.n, &data.fr, &data.fz)?;
    let dec = decompose_mode(&params, sec.n, &f, cfg.eps1, cfg.delta)?;
    let direct = StreamSolver::new(&params, sec.n, &grid, BcKind::Navier)?.solve(&f.values)?;
    let err = decomposition_residual(&dec, &direct)?;
    let rec = dec.reconstruction();
    let mut a = Artifact::new(
        "decompose",
        vec![
            "r", "psi_s_re", "psi_s_im", "psi_bl_re", "psi_bl_im", "psi_e_re", "psi_e_im", "psi_i", "psi_rec_re", "psi_rec_im",
            "psi_direct_re", "psi_direct_im",
        ],
    );
    for (i, &r) in grid.nodes().iter().enumerate() {
        let mut row: Vec<Cell> = vec![r.into()];
        for fld in [&dec.psi_s, &dec.psi_bl, &dec.psi_e] {
            row.push(fld.values[i].re.into());
            row.push(fld.values[i].im.into());
        }
        row.push(dec.psi_i.values[i].re.into());
        for fld in [&rec, &direct.psi] {
            row.push(fld.values[i].re.into());
            row.push(fld.values[i].im.into());
        }
        a.push(row);
    }
    a.pass = err <= sec.tolerance;
    let layer = match dec.layer {
        slipflow_core::specfun::LayerData::Exp(_) => "exp",
        slipflow_core::specfun::LayerData::Airy(_) => "airy",
    };
    a.summary = json!({
        "n": sec.n,
        "regime": dec.regime.as_str(),
        "layer": layer,
        "a": complex(dec.a),
        "b": complex(dec.b),
        "j": complex(dec.j),
        "remainder_residual": dec.remainder_residual,
        "reconstruction_error": err,
        "tolerance": sec.tolerance,
    });
    Ok(a)
}

pub fn sweep_estimates(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let sec = &cfg.sweep;
    let mut a = Artifact::new("sweep-estimates", vec!["estimate_id", "phi", "alpha", "n", "ratio", "fitted_exponent", "pass"]);
    let mut runs = Vec::new();
    for run in &sec.runs {
        let id: EstimateId = run.estimate.parse()?;
        let mut spec = SweepSpec::new(id, sec.fluxes.clone(), run.slips.clone(), run.modes.clone());
        spec.grid_size = sec.grid_size;
        spec.slack = sec.slack;
        spec.spread_bound = sec.spread_bound;
        spec.regime = cfg.regime();
        spec.resolve_family = sec.resolve_family;
        let rep = sweep_and_fit(&spec)?;
        for p in &rep.points {
            a.push(vec![
                p.estimate_id.as_str().into(),
                p.phi.into(),
                p.alpha.into(),
                p.n.into(),
                p.ratio.into(),
                p.fitted_exponent.into(),
                p.pass.into(),
            ]);
        }
        a.pass &= rep.pass;
        runs.push(json!({
            "estimate": id.as_str(),
            "target_exponent": rep.target_exponent,
            "slack": rep.slack,
            "spread_bound": rep.spread_bound,
            "grid_size": rep.grid_size,
            "fits": rep.fits,
            "spreads": rep.spreads,
            "resolved": rep.points.iter().map(|p| p.resolved.as_str()).collect::<std::collections::BTreeSet<_>>(),
            "pass": rep.pass,
        }));
    }
    a.summary = json!({ "runs": runs });
    Ok(a)
}

fn scaled(f: Vec<ModeForcing>, s: f64) -> Vec<ModeForcing> {
    let s = C64::from(s);
    f.into_iter().map(|m| ModeForcing { n: m.n, fr: m.fr.scale(s), fz: m.fz.scale(s), ftheta: m.ftheta.scale(s) }).collect()
}

pub fn solve_nonlinear(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let params = cfg.params()?;
    let sec = &cfg.nonlinear;
    let ncfg = cfg.nonlinear_config();
    let grid = build_grid(ncfg.grid_size)?;
    let mut forcing: Vec<ModeForcing> = sec.forcing.iter().map(|m| m.forcing(&grid)).collect();
    let threshold = smallness_threshold(params.flux);
    let target = if sec.scale_to_threshold { Some(threshold) } else { sec.forcing_norm };
    if let Some(t) = target {
        let norm = forcing_norm(&forcing, true);
        if norm == 0.0 && t > 0.0 {
            return Err(CliError::usage("`nonlinear.forcing_norm`: cannot rescale zero forcing"));
        }
        if norm > 0.0 {
            forcing = scaled(forcing, t / norm);
        }
    }
    let fnorm = forcing_norm(&forcing, true);
    let t0 = Instant::now();
    let (out, trace) = picard_solve_traced(&params, &forcing, &ncfg);
    let mut a = Artifact::new("solve-nonlinear", vec!["step", "update_norm", "rhs_norm"]);
    for s in &trace.steps {
        a.push(vec![s.step.into(), s.update_norm.into(), s.rhs_norm.into()]);
    }
    let mut summary = json!({
        "forcing_norm": fnorm,
        "smallness_threshold": threshold,
        "within_smallness": fnorm <= threshold,
        "large_flux_bound": params.flux.powf(1.0 / 32.0),
        "iterations": trace.steps.len(),
        "converged": trace.converged,
        "final_residual": trace.final_residual,
        "residual_bound": sec.residual_bound,
    });
    let mut pass = false;
    match out {
        Ok(v) => {
            let norms: Vec<f64> = [0.0, 1.0, 1.5, 2.0].iter().map(|&s| sobolev_surrogate(&v, s)).collect::<Result<_, _>>()?;
            let mut q = v.clone();
            q.modes.remove(&0);
            let qn = sobolev_surrogate(&q, 0.0)?;
            summary["surrogate_norms"] = json!({ "h0": norms[0], "h1": norms[1], "h3/2": norms[2], "h2": norms[3] });
            summary["h32_over_forcing"] = json!(if fnorm > 0.0 { Some(norms[2] / fnorm) } else { None });
            summary["projection_norm"] = json!(qn);
            summary["projection_scaled"] = json!(qn * params.flux.powf(7.0 / 12.0));
            pass = trace.converged && trace.final_residual.is_some_and(|r| r <= sec.residual_bound);
        }
        Err(e @ (Error::NonConvergence { .. } | Error::Divergence { .. } | Error::Numerical(_))) => {
            summary["error"] = json!(e.to_string());
        }
        Err(e) => return Err(e.into()),
    }
    if sec.uniqueness {
        let eps = sec.perturbation.unwrap_or(0.1 * params.flux.powf(1.0 / 64.0));
        let rep = uniqueness_probe(&params, &forcing, &ncfg, eps)?;
        pass &= !rep.inconclusive && rep.distance.is_some_and(|d| d <= sec.uniqueness_bound);
        summary["uniqueness"] = serde_json::to_value(&rep).map_err(|e| CliError::runtime(e.to_string()))?;
        summary["uniqueness_bound"] = json!(sec.uniqueness_bound);
    }
    eprintln!("solve-nonlinear: {} steps in {:.3} s", trace.steps.len(), t0.elapsed().as_secs_f64());
    a.pass = pass;
    a.summary = summary;
    Ok(a)
}

pub fn test_inequalities(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let sec = &cfg.inequalities;
    let reports = inequality_suite_with(sec.samples, cfg.seed, sec.grid_size)?;
    let mut a = Artifact::new(
        "test-inequalities",
        vec!["lemma", "inequality", "samples", "seed", "grid_size", "max_ratio", "max_ratio_refined", "fixed_constant", "pass"],
    );
    for r in &reports {
        a.push(vec![
            r.lemma.clone().into(),
            r.inequality.clone().into(),
            r.samples.into(),
            r.seed.into(),
            r.grid_size.into(),
            r.max_ratio.into(),
            r.max_ratio_refined.into(),
            r.fixed_constant.into(),
            r.pass.into(),
        ]);
    }
    a.pass = reports.iter().all(|r| r.pass);
    a.summary = json!({ "checks": reports.len(), "failed": reports.iter().filter(|r| !r.pass).count() });
    Ok(a)
}

pub fn specfun_eval(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let sec = &cfg.specfun;
    let mut a = Artifact::new(
        "specfun-eval",
        vec!["function", "x_re", "x_im", "value_re", "value_im", "derivative_re", "derivative_im"],
    );
    let name = match sec.function {
        SpecialFunction::BesselI0 => "bessel_i0",
        SpecialFunction::BesselI1 => "bessel_i1",
        SpecialFunction::AiryAi => "airy_ai",
        SpecialFunction::CutoffChi => "cutoff_chi",
    };
    for &[re, im] in &sec.points {
        let real_only = || {
            if im != 0.0 {
                Err(CliError::usage(format!("`specfun.points`: {name} takes real arguments, got imaginary part {im}")))
            } else {
                Ok(re)
            }
        };
        let (v, d) = match sec.function {
            SpecialFunction::BesselI0 => {
                let x = real_only()?;
                // I₀′ = I₁
                (C64::from(bessel_i0(x)?), C64::from(bessel_i1(x)?.0))
            }
            SpecialFunction::BesselI1 => {
                let (v, d) = bessel_i1(real_only()?)?;
                (C64::from(v), C64::from(d))
            }
            SpecialFunction::AiryAi => airy_ai_with_derivative(C64::new(re, im))?,
            SpecialFunction::CutoffChi => {
                let x = real_only()?;
                (C64::from(cutoff_chi(x)), C64::from(cutoff_chi_derivative(x)))
            }
        };
        a.pass &= [v.re, v.im, d.re, d.im].iter().all(|x| x.is_finite());
        a.push(vec![name.into(), re.into(), im.into(), v.re.into(), v.im.into(), d.re.into(), d.im.into()]);
    }
    a.summary = json!({ "function": name, "points": sec.points.len() });
    Ok(a)
}
