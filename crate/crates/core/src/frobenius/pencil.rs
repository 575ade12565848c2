//! The connection pencil `∇_λ = ∇_0 + λ C` built from the multiplication
//! tensor `C = Γ` of a Kähler metric, its curvature, and the
//! Hermitian–Einstein trace of the deformed Chern connection.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::kahler::MetricData;
use crate::tensor::Tensor4;

pub const DEFAULT_LAMBDA_GRID: [f64; 5] = [-1.0, -0.5, 0.5, 1.0, 2.0];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `Ginv * m * Ginv`
fn sandwich(md: &MetricData, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    &md.g_inv * m * &md.g_inv
}

/// `D[k][i][j][a] = ∂_a Γ^k_{ij}`
pub fn christoffel_holo_derivative(md: &MetricData) -> Tensor4 {
    let n = md.dim();
    let d_inv: Vec<DMatrix<Complex64>> = (0..n).map(|a| -sandwich(md, &md.dg_holo(a))).collect();
    Tensor4::from_fn(n, |k, i, j, a| {
        let mut acc = ZERO;
        for e in 0..n {
            acc += md.phi4.get(i, j, a, e) * md.g_inv[(e, k)] + md.phi3.get(i, j, e) * d_inv[a][(e, k)];
        }
        acc
    })
}

/// `Dbar[k][i][j][d] = ∂bar_d Γ^k_{ij}`
pub fn christoffel_anti_derivative(md: &MetricData) -> Tensor4 {
    let n = md.dim();
    let d_inv: Vec<DMatrix<Complex64>> = (0..n).map(|d| -sandwich(md, &md.dg_anti(d))).collect();
    Tensor4::from_fn(n, |k, i, j, d| {
        let mut acc = ZERO;
        for e in 0..n {
            acc += md.dd_metric.get(i, e, j, d) * md.g_inv[(e, k)] + md.phi3.get(i, j, e) * d_inv[d][(e, k)];
        }
        acc
    })
}

/// Curvature two-form of `d + λ C` with `C^k_j = Γ^k_{aj} dz^a`, split by type.
#[derive(Debug, Clone, PartialEq)]
pub struct PencilCurvature {
    pub lambda: f64,
    /// `holo[k][j][a][b]`: coefficient of `dz^a ∧ dz^b`
    pub holo: Tensor4,
    /// `mixed[k][j][a][d]`: coefficient of `dz^a ∧ dzbar^d`
    pub mixed: Tensor4,
}

impl PencilCurvature {
    pub fn max_norm(&self) -> f64 {
        self.holo.max_norm().max(self.mixed.max_norm())
    }

    pub fn max_abs_diff(&self, other: &PencilCurvature) -> f64 {
        self.holo.max_abs_diff(&other.holo).max(self.mixed.max_abs_diff(&other.mixed))
    }
}

pub fn pencil_form(md: &MetricData, lambda: f64) -> PencilCurvature {
    let n = md.dim();
    let gamma = &md.christoffel;
    let d = christoffel_holo_derivative(md);
    let dbar = christoffel_anti_derivative(md);
    let l = Complex64::new(lambda, 0.0);
    let holo = Tensor4::from_fn(n, |k, j, a, b| {
        let exterior = d.get(k, b, j, a) - d.get(k, a, j, b);
        let mut wedge = ZERO;
        for m in 0..n {
            wedge += gamma.get(k, a, m) * gamma.get(m, b, j) - gamma.get(k, b, m) * gamma.get(m, a, j);
        }
        l * exterior + l * l * wedge
    });
    let mixed = Tensor4::from_fn(n, |k, j, a, dd| -l * dbar.get(k, a, j, dd));
    PencilCurvature { lambda, holo, mixed }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PencilSample {
    pub lambda: f64,
    /// `max |F_λ|` over components
    pub curvature_norm: f64,
    /// trace-free part of `Λ F` for the deformed Chern connection
    pub trace_norm: f64,
}

pub fn pencil_curvature(md: &MetricData, lambda: f64) -> PencilSample {
    PencilSample {
        lambda,
        curvature_norm: pencil_form(md, lambda).max_norm(),
        trace_norm: hermitian_einstein_trace(md, lambda),
    }
}

pub fn pencil_sweep(md: &MetricData, grid: &[f64]) -> Vec<PencilSample> {
    grid.iter().map(|&lambda| pencil_curvature(md, lambda)).collect()
}

/// `T[(k, j)] = Σ g^{bbar a} F^k_{j a bbar}` for the connection
/// `∇_0 + λ C`, where `∇_0` is the Chern connection of `g`.
pub fn he_trace_matrix(md: &MetricData, lambda: f64) -> DMatrix<Complex64> {
    let n = md.dim();
    let dbar = christoffel_anti_derivative(md);
    // mixed curvature of the Chern connection is -∂bar Γ; the deformation adds λ times it
    let scale = -Complex64::new(1.0 + lambda, 0.0);
    DMatrix::from_fn(n, n, |k, j| {
        let mut acc = ZERO;
        for a in 0..n {
            for b in 0..n {
                acc += md.g_inv[(b, a)] * dbar.get(k, a, j, b);
            }
        }
        scale * acc
    })
}

/// `max |T - κ I|` with `κ = tr T / n`.
pub fn hermitian_einstein_trace(md: &MetricData, lambda: f64) -> f64 {
    let n = md.dim();
    let t = he_trace_matrix(md, lambda);
    let kappa = t.trace() / Complex64::new(n as f64, 0.0);
    let mut worst = 0.0f64;
    for k in 0..n {
        for j in 0..n {
            let target = if k == j { kappa } else { ZERO };
            worst = worst.max((t[(k, j)] - target).norm());
        }
    }
    worst
}
