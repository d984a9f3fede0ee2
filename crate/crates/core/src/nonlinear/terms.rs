//! Quadratic convolution terms of the mode system, evaluated
//! pseudo-spectrally in z at every radial node.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::linear::{StreamMode, SwirlMode, VelocityField};
use crate::model::{RadialField, RadialGrid, C64};

/// Nonlinear forcing of one mode. The terms enter the mode problems with a
/// plus sign, next to the external data F.
#[derive(Debug, Clone)]
pub struct ModeTerms {
    pub n: i64,
    /// −Σ v^z_{n−m} ω_m + Σ v^θ_{n−m} v^θ_m / r
    pub fr: RadialField,
    /// Σ v^r_m ω_{n−m}
    pub fz: RadialField,
    /// −Σ v^r_m (v^θ_{n−m})′ − Σ im v^z_{n−m} v^θ_m − Σ v^θ_{n−m} v^r_m / r
    pub ftheta: RadialField,
    /// d/dr of `fz` by the product rule
    pub dfz: RadialField,
}

impl ModeTerms {
    /// Stream forcing in·F^r − dF^z/dr of these terms.
    pub fn curl(&self) -> RadialField {
        let i_n = C64::new(0.0, self.n as f64);
        let values = self.fr.values.iter().zip(&self.dfz.values).map(|(a, d)| i_n * a - d).collect();
        RadialField { grid: self.fr.grid.clone(), values }
    }
}

/// Physical factors of one mode at the radial nodes.
pub(crate) struct Factors {
    pub vr: Vec<C64>,
    pub dvr: Vec<C64>,
    pub om: Vec<C64>,
    pub dom: Vec<C64>,
    pub vz: Vec<C64>,
    pub vt: Vec<C64>,
    pub dvt: Vec<C64>,
    /// ∂_z v^θ = i n v^θ
    pub zvt: Vec<C64>,
    /// v^θ / r = V
    pub vt_r: Vec<C64>,
}

pub(crate) fn factors(s: &StreamMode, t: &SwirlMode) -> Factors {
    let grid = s.grid();
    let (phi, w, v) = (&s.phi.values, &s.w.values, &t.v.values);
    let samples = [phi.clone(), grid.diff1(phi), w.clone(), grid.diff1(w), v.clone(), grid.diff1(v)];
    factors_from(s.n, grid.nodes(), samples)
}

/// Factors at arbitrary radii, from the interpolated reduced unknowns and
/// their derivatives.
pub(crate) fn factors_at(s: &StreamMode, t: &SwirlMode, nodes: &[f64], interp: &DMatrix<f64>) -> Factors {
    let grid = s.grid();
    let (phi, w, v) = (&s.phi.values, &s.w.values, &t.v.values);
    let up = |x: &[C64]| RadialGrid::apply(interp, x);
    let samples = [up(phi), up(&grid.diff1(phi)), up(w), up(&grid.diff1(w)), up(v), up(&grid.diff1(v))];
    factors_from(s.n, nodes, samples)
}

fn factors_from(n: i64, r: &[f64], [phi, dphi, w, dw, v, dv]: [Vec<C64>; 6]) -> Factors {
    let i_n = C64::new(0.0, n as f64);
    let k = r.len();
    let mut f = Factors {
        vr: Vec::with_capacity(k),
        dvr: Vec::with_capacity(k),
        om: Vec::with_capacity(k),
        dom: Vec::with_capacity(k),
        vz: Vec::with_capacity(k),
        vt: Vec::with_capacity(k),
        dvt: Vec::with_capacity(k),
        zvt: Vec::with_capacity(k),
        vt_r: Vec::with_capacity(k),
    };
    for i in 0..k {
        let ri = r[i];
        f.vr.push(i_n * ri * phi[i]);
        f.dvr.push(i_n * (phi[i] + ri * dphi[i]));
        f.om.push(ri * w[i]);
        f.dom.push(w[i] + ri * dw[i]);
        f.vz.push(-(2.0 * phi[i] + ri * dphi[i]));
        f.vt.push(ri * v[i]);
        f.dvt.push(v[i] + ri * dv[i]);
        f.zvt.push(i_n * ri * v[i]);
        f.vt_r.push(v[i]);
    }
    f
}

/// Number of z samples for exact quadratic products of modes |n| ≤ N
/// (3/2 rule on the 2N + 1 retained modes).
pub fn dealiased_size(truncation: usize) -> usize {
    (3 * (2 * truncation + 1)).div_ceil(2)
}

struct Transform {
    k: usize,
    inv: Arc<dyn Fft<f64>>,
    fwd: Arc<dyn Fft<f64>>,
}

impl Transform {
    fn new(k: usize) -> Self {
        let mut p = FftPlanner::new();
        Self { k, inv: p.plan_fft_inverse(k), fwd: p.plan_fft_forward(k) }
    }

    fn slot(&self, n: i64) -> usize {
        n.rem_euclid(self.k as i64) as usize
    }

    /// Mode coefficients (indexed n + N) to physical samples.
    fn to_physical(&self, coeffs: &[C64], big_n: i64) -> Vec<C64> {
        let mut buf = vec![C64::new(0.0, 0.0); self.k];
        for (j, c) in coeffs.iter().enumerate() {
            buf[self.slot(j as i64 - big_n)] = *c;
        }
        self.inv.process(&mut buf);
        buf
    }

    /// Physical samples to mode coefficients n = −N..N.
    fn to_modes(&self, mut buf: Vec<C64>, big_n: i64) -> Vec<C64> {
        self.fwd.process(&mut buf);
        let s = 1.0 / self.k as f64;
        (-big_n..=big_n).map(|n| buf[self.slot(n)] * s).collect()
    }
}

fn check_field(v: &VelocityField) -> Result<(Arc<RadialGrid>, i64)> {
    let (_, (s0, _)) = v.modes.iter().next().ok_or_else(|| Error::Input("velocity field has no modes".into()))?;
    let grid = s0.grid().clone();
    for (s, t) in v.modes.values() {
        if s.phi.len() != grid.len() || t.v.len() != grid.len() {
            return Err(Error::Input("velocity modes live on different grids".into()));
        }
    }
    Ok((grid, v.truncation as i64))
}

/// Convolution terms for every mode |n| ≤ N of the field, N = v.truncation.
/// Modes absent from `v` count as zero.
pub fn nonlinear_terms(v: &VelocityField) -> Result<BTreeMap<i64, ModeTerms>> {
    let (grid, big_n) = check_field(v)?;
    let fac: BTreeMap<i64, Factors> = v.modes.iter().map(|(n, (s, t))| (*n, factors(s, t))).collect();
    let out = products(&fac, grid.len(), big_n);
    let field = |values: Vec<C64>| RadialField { grid: grid.clone(), values };
    Ok(out
        .into_iter()
        .enumerate()
        .map(|(j, [fr, fz, ft, dfz])| {
            let n = j as i64 - big_n;
            (n, ModeTerms { n, fr: field(fr), fz: field(fz), ftheta: field(ft), dfz: field(dfz) })
        })
        .collect())
}

/// (F^r, F^z, F^θ, dF^z/dr) samples for modes −N..N from per-mode factors
/// sampled at `np` radii.
pub(crate) fn products(fac: &BTreeMap<i64, Factors>, np: usize, big_n: i64) -> Vec<[Vec<C64>; 4]> {
    let width = (2 * big_n + 1) as usize;
    let tr = Transform::new(dealiased_size(big_n as usize));
    let zero = C64::new(0.0, 0.0);
    let mut out = vec![[vec![zero; np], vec![zero; np], vec![zero; np], vec![zero; np]]; width];
    for i in 0..np {
        let gather = |pick: fn(&Factors) -> &Vec<C64>| -> Vec<C64> {
            let mut c = vec![zero; width];
            for (n, f) in fac {
                c[(n + big_n) as usize] = pick(f)[i];
            }
            tr.to_physical(&c, big_n)
        };
        let vr = gather(|f| &f.vr);
        let dvr = gather(|f| &f.dvr);
        let om = gather(|f| &f.om);
        let dom = gather(|f| &f.dom);
        let vz = gather(|f| &f.vz);
        let vt = gather(|f| &f.vt);
        let dvt = gather(|f| &f.dvt);
        let zvt = gather(|f| &f.zvt);
        let vt_r = gather(|f| &f.vt_r);
        let k = tr.k;
        let mut pr = Vec::with_capacity(k);
        let mut pz = Vec::with_capacity(k);
        let mut pt = Vec::with_capacity(k);
        let mut pdz = Vec::with_capacity(k);
        for j in 0..k {
            pr.push(-vz[j] * om[j] + vt[j] * vt_r[j]);
            pz.push(vr[j] * om[j]);
            pt.push(-vr[j] * dvt[j] - vz[j] * zvt[j] - vt_r[j] * vr[j]);
            pdz.push(dvr[j] * om[j] + vr[j] * dom[j]);
        }
        for (c, buf) in [pr, pz, pt, pdz].into_iter().enumerate() {
            for (j, val) in tr.to_modes(buf, big_n).into_iter().enumerate() {
                out[j][c][i] = val;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::{assemble_velocity, BcKind};
    use crate::model::build_grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(big_n: i64, grid: &Arc<RadialGrid>, rng: &mut ChaCha8Rng, swirl: bool) -> VelocityField {
        let mut modes = Vec::new();
        for n in 0..=big_n {
            let mut poly = |scale: f64| -> Vec<C64> {
                let c: Vec<C64> = (0..6).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
                grid.nodes().iter().map(|&r| c.iter().rev().fold(C64::new(0.0, 0.0), |a, b| a * r + b) * scale).collect()
            };
            let mut phi = poly(1.0);
            let mut w = poly(1.0);
            let mut v = poly(if swirl { 1.0 } else { 0.0 });
            if n == 0 {
                for x in phi.iter_mut().chain(w.iter_mut()).chain(v.iter_mut()) {
                    *x = C64::new(x.re, 0.0);
                }
            }
            let s = StreamMode::from_reduced(
                n,
                BcKind::Navier,
                RadialField { grid: grid.clone(), values: phi },
                RadialField { grid: grid.clone(), values: w },
            )
            .unwrap();
            let t = SwirlMode::from_reduced(n, RadialField { grid: grid.clone(), values: v });
            modes.push((s, t));
        }
        assemble_velocity(modes, true).unwrap()
    }

    /// Direct double sums over m.
    fn brute(v: &VelocityField) -> BTreeMap<i64, [Vec<C64>; 4]> {
        let big_n = v.truncation as i64;
        let fac: BTreeMap<i64, Factors> = v.modes.iter().map(|(n, (s, t))| (*n, factors(s, t))).collect();
        let np = v.modes.values().next().unwrap().0.phi.len();
        let mut out = BTreeMap::new();
        for n in -big_n..=big_n {
            let mut acc = [vec![C64::new(0.0, 0.0); np], vec![C64::new(0.0, 0.0); np], vec![C64::new(0.0, 0.0); np], vec![C64::new(0.0, 0.0); np]];
            for m in -big_n..=big_n {
                let (Some(a), Some(b)) = (fac.get(&m), fac.get(&(n - m))) else { continue };
                let im = C64::new(0.0, m as f64);
                for i in 0..np {
                    acc[0][i] += -b.vz[i] * a.om[i] + b.vt[i] * a.vt_r[i];
                    acc[1][i] += a.vr[i] * b.om[i];
                    acc[2][i] += -a.vr[i] * b.dvt[i] - im * b.vz[i] * a.vt[i] - b.vt_r[i] * a.vr[i];
                    acc[3][i] += a.dvr[i] * b.om[i] + a.vr[i] * b.dom[i];
                }
            }
            out.insert(n, acc);
        }
        out
    }

    #[test]
    fn matches_direct_convolution() {
        let grid = build_grid(12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = random_field(8, &grid, &mut rng, true);
        let fast = nonlinear_terms(&v).unwrap();
        let slow = brute(&v);
        let scale = slow.values().flat_map(|a| a.iter().flatten()).map(|x| x.norm()).fold(0.0, f64::max);
        for (n, t) in &fast {
            let s = &slow[n];
            for (c, f) in [&t.fr, &t.fz, &t.ftheta, &t.dfz].iter().enumerate() {
                for (a, b) in f.values.iter().zip(&s[c]) {
                    assert!((a - b).norm() <= 1e-12 * scale, "n={n} c={c}: {a} {b}");
                }
            }
        }
    }

    #[test]
    fn support_of_single_mode_products() {
        let grid = build_grid(10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let full = random_field(1, &grid, &mut rng, true);
        let mut v = full.clone();
        v.modes.remove(&0);
        v.truncation = 2;
        let t = nonlinear_terms(&v).unwrap();
        for (n, m) in &t {
            let size = [&m.fr, &m.fz, &m.ftheta, &m.dfz].iter().map(|f| f.max_abs()).fold(0.0, f64::max);
            if n % 2 != 0 {
                assert!(size < 1e-13, "mode {n} populated: {size}");
            }
        }
        assert!(t[&2].fr.max_abs() > 1e-6 && t[&0].fr.max_abs() > 1e-6);
    }

    #[test]
    fn swirl_free_field_has_no_centrifugal_term() {
        let grid = build_grid(10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v = random_field(3, &grid, &mut rng, false);
        let t = nonlinear_terms(&v).unwrap();
        let fac: BTreeMap<i64, Factors> = v.modes.iter().map(|(n, (s, t))| (*n, factors(s, t))).collect();
        for (n, m) in &t {
            // with v^θ ≡ 0 the radial term is exactly −Σ v^z ω and the swirl term vanishes
            assert_eq!(m.ftheta.max_abs(), 0.0);
            let mut want = vec![C64::new(0.0, 0.0); grid.len()];
            for k in -3..=3 {
                if let (Some(a), Some(b)) = (fac.get(&k), fac.get(&(n - k))) {
                    for i in 0..grid.len() {
                        want[i] -= b.vz[i] * a.om[i];
                    }
                }
            }
            for (a, b) in m.fr.values.iter().zip(&want) {
                assert!((a - b).norm() < 1e-12 * (1.0 + b.norm()));
            }
        }
    }
}
