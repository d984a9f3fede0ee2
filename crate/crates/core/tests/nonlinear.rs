use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slipflow_core::linear::{assemble_velocity, StreamMode, SwirlMode, BcKind};
use slipflow_core::model::{build_grid, FlowParams, RadialField, C64};
use slipflow_core::nonlinear::*;
use slipflow_core::norms::{forcing_norm, sobolev_surrogate, ModeForcing, ModeShape};

fn data(m: usize, target: f64) -> Vec<ModeForcing> {
    let grid = build_grid(m).unwrap();
    let f: Vec<ModeForcing> = (0..=3)
        .map(|n| ModeShape { n, fr: vec![1.0, 0.0, -1.0], fz: vec![0.0, 0.0, 1.0], ftheta: vec![0.0, 1.0, 0.0, -1.0] }.forcing(&grid))
        .collect();
    let s = C64::from(target / forcing_norm(&f, true));
    f.into_iter().map(|m| ModeForcing { n: m.n, fr: m.fr.scale(s), fz: m.fz.scale(s), ftheta: m.ftheta.scale(s) }).collect()
}

#[test]
fn small_data_fixed_point_at_moderate_flux() {
    let p = FlowParams::new(1e3, 1.0).unwrap();
    let cfg = NonlinearConfig { truncation: 8, grid_size: 32, ..Default::default() };
    let f = data(32, smallness_threshold(1e3));
    let (v, tr) = picard_solve(&p, &f, &cfg).unwrap();
    assert!(tr.converged && tr.steps.len() <= 30);
    assert!(tr.final_residual.unwrap() <= 1e-9);
    assert!(nonlinear_residual(&p, &v, &f).unwrap() <= 1e-9);
    assert!(v.modes.len() == 17);
}

#[test]
fn zero_field_has_zero_residual() {
    let p = FlowParams::new(1e3, 1.0).unwrap();
    let grid = build_grid(16).unwrap();
    let z = RadialField::zeros(grid.clone());
    let s = StreamMode::from_reduced(0, BcKind::Navier, z.clone(), z.clone()).unwrap();
    let v = assemble_velocity(vec![(s, SwirlMode::zeros(0, grid))], true).unwrap();
    assert_eq!(nonlinear_residual(&p, &v, &[]).unwrap(), 0.0);
}

#[test]
fn incompatible_zero_mode_swirl_is_rejected_without_slip() {
    let p = FlowParams::new(1e3, 0.0).unwrap();
    let grid = build_grid(24).unwrap();
    let z = RadialField::zeros(grid.clone());
    let bad = ModeForcing { n: 0, fr: z.clone(), fz: z, ftheta: RadialField::from_real_fn(grid, |r| r) };
    let cfg = NonlinearConfig { truncation: 2, grid_size: 24, ..Default::default() };
    assert!(picard_solve(&p, std::slice::from_ref(&bad), &cfg).is_err());
    let fixed = enforce_compatibility(&[bad]);
    assert!(picard_solve(&p, &fixed, &cfg).is_ok());
}

#[test]
fn large_flux_projection_decays() {
    let cfg = NonlinearConfig { truncation: 8, grid_size: 32, ..Default::default() };
    let flux = 1e4f64;
    let p = FlowParams::new(flux, 1.0).unwrap();
    let (v, _) = picard_solve(&p, &data(32, flux.powf(1.0 / 32.0)), &cfg).unwrap();
    let mut q = v.clone();
    q.modes.remove(&0);
    assert!(sobolev_surrogate(&q, 0.0).unwrap() * flux.powf(7.0 / 12.0) <= 1.0);
}

fn random_real_field(seed: u64, big_n: i64) -> slipflow_core::linear::VelocityField {
    let grid = build_grid(12).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modes = Vec::new();
    for n in 0..=big_n {
        let mut poly = || -> Vec<C64> {
            let c: Vec<C64> = (0..5)
                .map(|_| {
                    let im = if n == 0 { 0.0 } else { rng.random_range(-1.0..1.0) };
                    C64::new(rng.random_range(-1.0..1.0), im)
                })
                .collect();
            grid.nodes().iter().map(|&r| c.iter().rev().fold(C64::new(0.0, 0.0), |a, b| a * r * r + b)).collect()
        };
        let phi = RadialField { grid: grid.clone(), values: poly() };
        let w = RadialField { grid: grid.clone(), values: poly() };
        let v = RadialField { grid: grid.clone(), values: poly() };
        modes.push((StreamMode::from_reduced(n, BcKind::Navier, phi, w).unwrap(), SwirlMode::from_reduced(n, v)));
    }
    assemble_velocity(modes, true).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn real_fields_give_hermitian_terms(seed in 0u64..1000, big_n in 1i64..6) {
        let t = nonlinear_terms(&random_real_field(seed, big_n)).unwrap();
        for n in 1..=big_n {
            for (a, b) in [(&t[&n].fr, &t[&-n].fr), (&t[&n].fz, &t[&-n].fz), (&t[&n].ftheta, &t[&-n].ftheta)] {
                for (x, y) in a.values.iter().zip(&b.values) {
                    prop_assert!((x - y.conj()).norm() <= 1e-12 * (1.0 + x.norm()));
                }
            }
        }
        for x in &t[&0].fz.values {
            prop_assert!(x.im.abs() <= 1e-12 * (1.0 + x.norm()));
        }
    }

    #[test]
    fn distance_is_symmetric(a in 0u64..100, b in 100u64..200) {
        let u = random_real_field(a, 3);
        let v = random_real_field(b, 2);
        let d1 = surrogate_distance(&u, &v, 1.5).unwrap();
        let d2 = surrogate_distance(&v, &u, 1.5).unwrap();
        prop_assert!((d1 - d2).abs() <= 1e-12 * d1);
        prop_assert_eq!(surrogate_distance(&u, &u, 1.5).unwrap(), 0.0);
    }
}
