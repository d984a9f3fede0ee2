mod common;

use common::{rel_err, stream_forcing, swirl_forcing, PolyExp};
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use slipflow_core::linear::*;
use slipflow_core::model::{build_grid, FlowParams, RadialField};

fn sample(grid: &std::sync::Arc<slipflow_core::model::RadialGrid>, f: &PolyExp) -> RadialField {
    RadialField::from_fn(grid.clone(), |r| f.eval(r))
}

fn manufactured_error(m: usize, phi: &PolyExp, flux: f64, slip: f64, n: i64) -> f64 {
    let grid = build_grid(m).unwrap();
    let p = FlowParams::new(flux, slip).unwrap();
    let f = sample(&grid, &stream_forcing(phi, flux, slip, n));
    let mode = solve_stream_mode(&p, n, &f, BcKind::Navier).unwrap();
    let want: Vec<C64> = grid.nodes().iter().map(|&r| phi.eval(r) * r).collect();
    rel_err(&mode.psi.values, &want)
}

#[test]
fn manufactured_polynomial_recovered() {
    let phi = PolyExp::poly(&[1.0, 0.0, -3.0, 0.0, 3.0, 0.0, -1.0]);
    let e = manufactured_error(48, &phi, 1e3, 1.0, 2);
    assert!(e <= 1e-9, "{e}");
}

#[test]
fn manufactured_smooth_data_converges_spectrally() {
    // (1−r²)³ e^{r²}: not a polynomial, so the error is visible at small M
    let phi = PolyExp::with_exp(&[1.0, 0.0, -3.0, 0.0, 3.0, 0.0, -1.0], 1.0);
    let e8 = manufactured_error(8, &phi, 1e3, 1.0, 2);
    let e16 = manufactured_error(16, &phi, 1e3, 1.0, 2);
    let e32 = manufactured_error(32, &phi, 1e3, 1.0, 2);
    assert!(e16 <= e8 / 10.0, "{e8} {e16}");
    assert!(e32 <= 1e-11, "{e32}");
}

#[test]
fn solved_modes_have_small_refined_residual() {
    let grid = build_grid(48).unwrap();
    let phi = PolyExp::with_exp(&[1.0, 0.0, -3.0, 0.0, 3.0, 0.0, -1.0], 0.5);
    for (flux, slip, n, bc) in [(1e3, 1.0, 2, BcKind::Navier), (1e4, 0.0, 5, BcKind::Slip), (1e5, 1e3, -3, BcKind::Navier)] {
        let p = FlowParams::new(flux, slip).unwrap();
        let f = sample(&grid, &stream_forcing(&phi, flux, slip, n));
        let mode = solve_stream_mode(&p, n, &f, bc).unwrap();
        let rep = stream_residual(&p, &mode, &f).unwrap();
        assert!(rep.total <= 1e-8, "{rep:?}");
        // ψ(0) = ψ(1) = 0
        let s = mode.psi.max_abs();
        assert!(mode.psi.values[0].norm() <= 1e-10 * s);
        assert!(mode.psi.values.last().unwrap().norm() <= 1e-10 * s);
    }
}

#[test]
fn perturbed_mode_is_detected() {
    let grid = build_grid(32).unwrap();
    let p = FlowParams::new(1e3, 1.0).unwrap();
    let phi = PolyExp::poly(&[1.0, 0.0, -3.0, 0.0, 3.0, 0.0, -1.0]);
    let f = sample(&grid, &stream_forcing(&phi, 1e3, 1.0, 2));
    let mode = solve_stream_mode(&p, 2, &f, BcKind::Navier).unwrap();
    let mut noisy = mode.clone();
    for (i, v) in noisy.phi.values.iter_mut().enumerate() {
        *v += 1e-3 * ((i as f64 * 1.7).sin());
    }
    let r = linear_residual(&p, ModeRef::Stream(&noisy), &f).unwrap();
    assert!(r >= 1e-4, "{r}");
    let zero = RadialField::zeros(grid);
    let z = solve_zero_mode(&p, &zero).unwrap();
    assert_eq!(linear_residual(&p, ModeRef::Stream(&z), &zero).unwrap(), 0.0);
}

#[test]
fn swirl_manufactured_and_residual() {
    // v* = r(1−r²)², V* = (1−r²)²: V*′(1) = V*(1) = 0 for every α
    let v = PolyExp::poly(&[1.0, 0.0, -2.0, 0.0, 1.0]);
    let grid = build_grid(32).unwrap();
    for (flux, slip, n) in [(1e3, 0.0, 0), (1e3, 3.0, 0), (1e4, 1.0, 4), (1e6, 1e6, -2)] {
        let p = FlowParams::new(flux, slip).unwrap();
        let f = sample(&grid, &swirl_forcing(&v, flux, slip, n));
        let mode = solve_swirl_mode(&p, n, &f).unwrap();
        let want: Vec<C64> = grid.nodes().iter().map(|&r| v.eval(r) * r).collect();
        assert!(rel_err(&mode.vtheta.values, &want) <= 1e-9);
        assert!(swirl_residual(&p, &mode, &f).unwrap().total <= 1e-8);
        assert_eq!(mode.vtheta.values[0], C64::new(0.0, 0.0));
    }
}

fn energy_terms(grid: &slipflow_core::model::RadialGrid, p: &FlowParams, mode: &StreamMode, f: &[C64]) -> (f64, f64, f64, f64) {
    let n = mode.n as f64;
    let phi = &mode.phi.values;
    let g = mode.grad_factor();
    let lap: Vec<C64> = grid.lap4(phi);
    let g1 = *g.last().unwrap();
    let lhs = grid.norm_sq(&lap, 3) + 2.0 * n * n * grid.norm_sq(&g, 1) + n.powi(4) * grid.norm_sq(phi, 3) + p.slip * g1.norm_sqr();
    let fphi = grid.inner(f, phi, 2);
    let cross = grid.inner(&g, phi, 3);
    let rhs = -fphi.re - 4.0 * p.flux / std::f64::consts::PI * p.slip / (p.slip + 4.0) * n * cross.im;
    let im_lhs = n * grid.inner_weighted(&g, &g, 1, |r| p.ubar(r)).re + n.powi(3) * grid.inner_weighted(phi, phi, 3, |r| p.ubar(r)).re;
    (lhs, rhs, im_lhs, -fphi.im)
}

#[test]
fn stream_energy_identities() {
    let grid = build_grid(64).unwrap();
    for (flux, slip, n) in [(1e3, 1.0, 2), (1e4, 10.0, 1), (1e3, 0.0, -3)] {
        let p = FlowParams::new(flux, slip).unwrap();
        let f = RadialField::from_fn(grid.clone(), |r| C64::new(1.0 + r, 0.5 - r * r) * r);
        let mode = solve_stream_mode(&p, n, &f, BcKind::Navier).unwrap();
        let (a, b, c, d) = energy_terms(&grid, &p, &mode, &f.values);
        assert!((a - b).abs() <= 1e-8 * a.abs(), "{a} {b}");
        assert!((c - d).abs() <= 1e-8 * c.abs(), "{c} {d}");
    }
}

#[test]
fn swirl_energy_identities() {
    let grid = build_grid(64).unwrap();
    for (flux, slip, n) in [(1e3, 1.0, 2), (1e4, 0.0, 1), (1e3, 50.0, -3)] {
        let p = FlowParams::new(flux, slip).unwrap();
        let f = RadialField::from_fn(grid.clone(), |r| C64::new(1.0 - r, r * r) * r);
        let m = solve_swirl_mode(&p, n, &f).unwrap();
        let v = &m.v.values;
        let nf = n as f64;
        // (rv)′/r = 2V + rV′ for v = rV
        let dv = grid.diff1(v);
        let g: Vec<C64> = v.iter().zip(&dv).zip(grid.nodes()).map(|((a, b), r)| 2.0 * a + r * b).collect();
        let v1 = v.last().unwrap();
        let lhs = grid.norm_sq(&g, 1) + (slip - 2.0) * v1.norm_sqr() + nf * nf * grid.norm_sq(v, 3);
        let fv = grid.inner(&f.values, v, 2);
        assert!((lhs - fv.re).abs() <= 1e-8 * lhs.abs(), "{lhs} {}", fv.re);
        let im = nf * grid.inner_weighted(v, v, 3, |r| p.ubar(r)).re;
        assert!((im - fv.im).abs() <= 1e-8 * im.abs(), "{im} {}", fv.im);
    }
}

#[test]
fn velocity_relations_and_divergence() {
    let grid = build_grid(32).unwrap();
    let p = FlowParams::new(1e3, 1.0).unwrap();
    let phi = PolyExp::poly(&[1.0, 0.0, -3.0, 0.0, 3.0, 0.0, -1.0]);
    let f = sample(&grid, &stream_forcing(&phi, 1e3, 1.0, 1));
    let mode = solve_stream_mode(&p, 1, &f, BcKind::Navier).unwrap();
    // v^z = −(1/r)(rψ)′ from the closed form: −(2φ + rφ′), axis value −2φ(0)
    let dphi = phi.deriv();
    for (i, &r) in grid.nodes().iter().enumerate() {
        let want = -(2.0 * phi.eval(r) + r * dphi.eval(r));
        assert!((mode.vz.values[i] - want).norm() < 1e-10);
        assert!((mode.vr.values[i] - C64::new(0.0, 1.0) * mode.psi.values[i]).norm() == 0.0);
    }
    assert!((mode.vz.values[0] + 2.0).norm() < 1e-10);
    // r·div = (r v^r)′ + in r v^z on a grid where r² φ is exact
    let fine = build_grid(40).unwrap();
    let pf: Vec<C64> = grid.interpolate(&mode.phi.values, fine.nodes());
    let rvr: Vec<C64> = pf.iter().zip(fine.nodes()).map(|(v, r)| C64::new(0.0, 1.0) * v * r * r).collect();
    let d = fine.diff1(&rvr);
    let dpf = fine.diff1(&pf);
    for (i, &r) in fine.nodes().iter().enumerate() {
        let vz = -(2.0 * pf[i] + r * dpf[i]);
        let div = d[i] + C64::new(0.0, 1.0) * r * vz;
        assert!(div.norm() <= 1e-10, "{r} {div}");
    }
}

#[test]
fn hermitian_completion_and_duplicates() {
    let grid = build_grid(16).unwrap();
    let p = FlowParams::new(1e3, 1.0).unwrap();
    let f = RadialField::from_fn(grid.clone(), |r| C64::new(r, r * r));
    let s = solve_stream_mode(&p, 2, &f, BcKind::Navier).unwrap();
    let t = solve_swirl_mode(&p, 2, &f).unwrap();
    let v = assemble_velocity(vec![(s.clone(), t.clone())], true).unwrap();
    let (s2, t2) = v.get(-2).unwrap();
    for (a, b) in s.psi.values.iter().zip(&s2.psi.values) {
        assert_eq!(a.conj(), *b);
    }
    for (a, b) in t.vtheta.values.iter().zip(&t2.vtheta.values) {
        assert_eq!(a.conj(), *b);
    }
    assert_eq!(v.truncation, 2);
    // the conjugate mode solves the n = −2 problem with conjugate data
    let fm = f.map(|_, x| x.conj());
    let direct = solve_stream_mode(&p, -2, &fm, BcKind::Navier).unwrap();
    assert!(rel_err(&s2.psi.values, &direct.psi.values) < 1e-12);
    assert!(matches!(assemble_velocity(vec![(s.clone(), t.clone()), (s, t)], true), Err(slipflow_core::Error::Input(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_polynomial_forcing_solves(
        coef in proptest::collection::vec(-1.0f64..1.0, 1..8),
        n in -6i64..=6,
        log_flux in 0.0f64..4.5,
        slip in prop_oneof![Just(0.0), 0.0f64..10.0, Just(1e6)],
    ) {
        // resolved range: boundary layers of width ≳ (Φ|n|)^{-1/2} at M = 128
        let grid = build_grid(128).unwrap();
        let p = FlowParams::new(10f64.powf(log_flux), slip).unwrap();
        let f = RadialField::from_fn(grid.clone(), |r| {
            C64::new(coef.iter().rev().fold(0.0, |a, c| a * r + c), 0.0)
        });
        let mode = solve_stream_mode(&p, n, &f, BcKind::Navier).unwrap();
        let rep = stream_residual(&p, &mode, &f).unwrap();
        prop_assert!(rep.total <= 1e-8, "{:?}", rep);
        if n != 0 {
            let (a, b, c, d) = energy_terms(&grid, &p, &mode, &f.values);
            prop_assert!((a - b).abs() <= 1e-7 * a.abs().max(1e-300));
            prop_assert!((c - d).abs() <= 1e-7 * c.abs().max(1e-300));
        }
    }
}
