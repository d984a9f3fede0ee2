//! Chebyshev–Lobatto collocation on [0, 1] with the four-dimensional radial
//! Laplacian used for the reduced unknowns φ = ψ/r and V = v^θ/r.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Polynomial collocation grid of degree `size` on [0, 1].
///
/// Nodes are r_j = sin²(jπ/(2M)), j = 0..M, ascending, so r_0 = 0 and r_M = 1
/// and the points cluster at both ends of the interval.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    size: usize,
    nodes: Vec<f64>,
    d1: DMatrix<f64>,
    d2: DMatrix<f64>,
    delta4: DMatrix<f64>,
    weights: Vec<f64>,
    qweights: Vec<f64>,
    qweights3: Vec<f64>,
    bary: Vec<f64>,
    fine_nodes: Vec<f64>,
    fine_weights: Vec<f64>,
    fine_interp: DMatrix<f64>,
}

/// Radial weight for [`weighted_integral`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    R,
    R3,
}

fn lobatto_nodes(m: usize) -> Vec<f64> {
    (0..=m)
        .map(|j| {
            let s = (j as f64 * PI / (2.0 * m as f64)).sin();
            s * s
        })
        .collect()
}

/// Clenshaw–Curtis weights for ∫₀¹ f dr on the nodes above.
fn clenshaw_curtis(m: usize) -> Vec<f64> {
    let n = m as f64;
    let mut w = vec![0.0; m + 1];
    if m % 2 == 0 {
        w[0] = 1.0 / (n * n - 1.0);
        w[m] = w[0];
    } else {
        w[0] = 1.0 / (n * n);
        w[m] = w[0];
    }
    for (j, wj) in w.iter_mut().enumerate().take(m).skip(1) {
        let th = j as f64 * PI / n;
        let mut v = 1.0;
        let kmax = if m % 2 == 0 { m / 2 - 1 } else { (m - 1) / 2 };
        for k in 1..=kmax {
            let kk = k as f64;
            v -= 2.0 * (2.0 * kk * th).cos() / (4.0 * kk * kk - 1.0);
        }
        if m % 2 == 0 {
            v -= (n * th).cos() / (n * n - 1.0);
        }
        *wj = 2.0 * v / n;
    }
    // map [-1, 1] to [0, 1]
    w.iter().map(|x| 0.5 * x).collect()
}

fn barycentric_weights(m: usize) -> Vec<f64> {
    (0..=m)
        .map(|j| {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == m {
                0.5 * s
            } else {
                s
            }
        })
        .collect()
}

/// First and second derivative matrices in r. Off-diagonal differences use
/// the sine product form and diagonals use the negative-sum rule.
fn derivative_matrices(m: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = m + 1;
    let th = PI / (2.0 * m as f64);
    let c: Vec<f64> = (0..n)
        .map(|j| {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == m {
                2.0 * s
            } else {
                s
            }
        })
        .collect();
    let dx = |i: usize, j: usize| -> f64 {
        2.0 * (((i + j) as f64) * th).sin() * (((i as f64) - (j as f64)) * th).sin()
    };
    let mut d = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                d[(i, j)] = c[i] / c[j] / dx(i, j);
            }
        }
    }
    negative_sum_diagonal(&mut d);
    let mut d2 = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                d2[(i, j)] = 2.0 * (c[i] / c[j] * d[(i, i)] - d[(i, j)]) / dx(i, j);
            }
        }
    }
    negative_sum_diagonal(&mut d2);
    // x in [-1, 1] maps to r = (1 + x)/2
    (d * 2.0, d2 * 4.0)
}

fn negative_sum_diagonal(d: &mut DMatrix<f64>) {
    let n = d.nrows();
    for i in 0..n {
        let mut row: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| d[(i, j)]).collect();
        row.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
        d[(i, i)] = -row.iter().sum::<f64>();
    }
}

/// Barycentric interpolation matrix from Lobatto nodes to arbitrary points.
fn interp_matrix(nodes: &[f64], bary: &[f64], points: &[f64]) -> DMatrix<f64> {
    let mut p = DMatrix::<f64>::zeros(points.len(), nodes.len());
    for (k, &x) in points.iter().enumerate() {
        if let Some(j) = nodes.iter().position(|&r| (x - r).abs() < 1e-15) {
            p[(k, j)] = 1.0;
            continue;
        }
        let t: Vec<f64> = nodes.iter().zip(bary).map(|(&r, &b)| b / (x - r)).collect();
        let s: f64 = t.iter().sum();
        for (j, tj) in t.iter().enumerate() {
            p[(k, j)] = tj / s;
        }
    }
    p
}

impl RadialGrid {
    pub fn new(size: usize) -> Result<Self> {
        if size < 4 {
            return Err(Error::Config(format!("grid size must be >= 4, got {size}")));
        }
        let nodes = lobatto_nodes(size);
        let (d1, d2) = derivative_matrices(size);
        let mut delta4 = d2.clone();
        for i in 1..=size {
            let s = 3.0 / nodes[i];
            for j in 0..=size {
                delta4[(i, j)] += s * d1[(i, j)];
            }
        }
        for j in 0..=size {
            delta4[(0, j)] = 4.0 * d2[(0, j)];
        }
        let weights = clenshaw_curtis(size);
        let qweights = weights.iter().zip(&nodes).map(|(w, r)| w * r).collect();
        let qweights3 = weights.iter().zip(&nodes).map(|(w, r)| w * r * r * r).collect();
        let bary = barycentric_weights(size);
        let fine = 2 * size + 4;
        let fine_nodes = lobatto_nodes(fine);
        let fine_weights = clenshaw_curtis(fine);
        let fine_interp = interp_matrix(&nodes, &bary, &fine_nodes);
        Ok(Self {
            size,
            nodes,
            d1,
            d2,
            delta4,
            weights,
            qweights,
            qweights3,
            bary,
            fine_nodes,
            fine_weights,
            fine_interp,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }
    pub fn len(&self) -> usize {
        self.size + 1
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn d1(&self) -> &DMatrix<f64> {
        &self.d1
    }
    pub fn d2(&self) -> &DMatrix<f64> {
        &self.d2
    }
    pub fn delta4(&self) -> &DMatrix<f64> {
        &self.delta4
    }
    /// Weights for ∫₀¹ f dr.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    /// Weights for ∫₀¹ f r dr.
    pub fn qweights(&self) -> &[f64] {
        &self.qweights
    }
    /// Weights for ∫₀¹ f r³ dr.
    pub fn qweights3(&self) -> &[f64] {
        &self.qweights3
    }

    pub fn apply(mat: &DMatrix<f64>, v: &[C64]) -> Vec<C64> {
        let n = mat.nrows();
        let m = mat.ncols();
        assert_eq!(m, v.len(), "operator/field size mismatch");
        (0..n)
            .map(|i| {
                let mut acc = C64::new(0.0, 0.0);
                for (j, vj) in v.iter().enumerate() {
                    acc += vj * mat[(i, j)];
                }
                acc
            })
            .collect()
    }

    pub fn diff1(&self, v: &[C64]) -> Vec<C64> {
        Self::apply(&self.d1, v)
    }
    pub fn diff2(&self, v: &[C64]) -> Vec<C64> {
        Self::apply(&self.d2, v)
    }
    pub fn lap4(&self, v: &[C64]) -> Vec<C64> {
        Self::apply(&self.delta4, v)
    }

    /// Quadrature on the collocation nodes.
    pub fn integrate(&self, v: &[C64], weight: Weight) -> C64 {
        let w = match weight {
            Weight::R => &self.qweights,
            Weight::R3 => &self.qweights3,
        };
        v.iter().zip(w).map(|(a, b)| a * b).sum()
    }

    /// Interpolation matrix from the nodes to arbitrary points in [0, 1].
    pub fn interpolation_matrix(&self, points: &[f64]) -> DMatrix<f64> {
        interp_matrix(&self.nodes, &self.bary, points)
    }

    /// Evaluates the interpolating polynomial at arbitrary points.
    pub fn interpolate(&self, v: &[C64], points: &[f64]) -> Vec<C64> {
        Self::apply(&self.interpolation_matrix(points), v)
    }

    /// Samples of the node polynomial on the product-quadrature grid.
    pub fn to_fine(&self, v: &[C64]) -> Vec<C64> {
        Self::apply(&self.fine_interp, v)
    }

    /// Exact integral ∫₀¹ |p|² r^k dr for the interpolant p of `v` (degree
    /// ≤ M), up to k ≤ 3.
    pub fn norm_sq(&self, v: &[C64], k: i32) -> f64 {
        let f = self.to_fine(v);
        f.iter()
            .zip(&self.fine_nodes)
            .zip(&self.fine_weights)
            .map(|((a, r), w)| a.norm_sqr() * r.powi(k) * w)
            .sum()
    }

    /// Exact integral ∫₀¹ p q̄ r^k dr for interpolants of degree ≤ M.
    pub fn inner(&self, p: &[C64], q: &[C64], k: i32) -> C64 {
        let fp = self.to_fine(p);
        let fq = self.to_fine(q);
        fp.iter()
            .zip(&fq)
            .zip(self.fine_nodes.iter().zip(&self.fine_weights))
            .map(|((a, b), (r, w))| a * b.conj() * (r.powi(k) * w))
            .sum()
    }

    /// Same as [`RadialGrid::inner`] with an extra real weight g(r).
    pub fn inner_weighted(&self, p: &[C64], q: &[C64], k: i32, g: impl Fn(f64) -> f64) -> C64 {
        let fp = self.to_fine(p);
        let fq = self.to_fine(q);
        fp.iter()
            .zip(&fq)
            .zip(self.fine_nodes.iter().zip(&self.fine_weights))
            .map(|((a, b), (r, w))| a * b.conj() * (r.powi(k) * g(*r) * w))
            .sum()
    }

    /// Fine product-quadrature nodes and weights (for ∫ · dr).
    pub fn fine_rule(&self) -> (&[f64], &[f64]) {
        (&self.fine_nodes, &self.fine_weights)
    }
}

/// Builds a shareable grid of polynomial degree `size`.
pub fn build_grid(size: usize) -> Result<Arc<RadialGrid>> {
    RadialGrid::new(size).map(Arc::new)
}

/// Samples of a complex field on a grid.
#[derive(Debug, Clone)]
pub struct RadialField {
    pub grid: Arc<RadialGrid>,
    pub values: Vec<C64>,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Input(format!(
                "field has {} samples, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        Self { grid, values: vec![C64::new(0.0, 0.0); n] }
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> C64) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self { grid, values }
    }

    pub fn from_real_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |r| C64::new(f(r), 0.0))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| v * s).collect() }
    }

    pub fn map(&self, f: impl Fn(f64, C64) -> C64) -> Self {
        let values = self.grid.nodes().iter().zip(&self.values).map(|(&r, &v)| f(r, v)).collect();
        Self { grid: self.grid.clone(), values }
    }
}

/// Pointwise Δ₄ = d² + (3/r)d with the axis limit 4φ″(0).
pub fn apply_delta4(grid: &RadialGrid, field: &RadialField) -> Result<RadialField> {
    if field.len() != grid.len() {
        return Err(Error::Input("field/grid size mismatch".into()));
    }
    Ok(RadialField { grid: field.grid.clone(), values: grid.lap4(&field.values) })
}

/// Quadrature of ∫₀¹ f w(r) dr with w = r or r³ on the collocation nodes.
pub fn weighted_integral(grid: &RadialGrid, field: &RadialField, weight: Weight) -> C64 {
    grid.integrate(&field.values, weight)
}
