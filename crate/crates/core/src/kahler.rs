//! Metric, Christoffel symbols, curvature and Ricci form of a Kähler
//! potential at a chart point, plus the hermitian WDVV residual.
//!
//! Index conventions (all zero-based):
//!
//! * `g[(a, b)]` is `g_{a bbar} = ∂_a ∂bar_b Φ`.
//! * `g_inv[(e, f)]` is `g^{ebar f}`, i.e. `Σ_e g[(a, e)] g_inv[(e, f)] = δ_af`.
//! * `phi3[a][b][c]` is `Φ_{a b cbar}`; `phi3_bar[a][b][c]` is
//!   `Φ_{abar bbar c} = conj(phi3[a][b][c])`.
//! * `christoffel[k][i][j]` is `Γ^k_{ij} = Σ_e Φ_{i j ebar} g^{ebar k}`.
//! * `curvature[a][b][c][d]` is
//!   `R_{a bbar c dbar} = ∂_c ∂bar_d g_{a bbar} - Σ g^{γbar e} ∂_c g_{a γbar} ∂bar_d g_{e bbar}`.
//! * `ricci[(c, d)]` is `Σ_{a,b} g^{bbar a} R_{a bbar c dbar}`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::expr::{EvalError, PotentialExpr};
use crate::tensor::{Tensor3, Tensor4};
use crate::wirtinger::{jet_eval, Jet};

/// `g` is rejected when its smallest singular value falls below this
/// fraction of the largest.
pub const DEGENERACY_RATIO: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KahlerError {
    #[error("degenerate metric: smallest singular value {min:e} against largest {max:e}")]
    Degenerate { min: f64, max: f64 },
    #[error("non-finite derivatives of the potential at {label}")]
    NonFinite { label: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint {
    pub coords: Vec<Complex64>,
    pub label: String,
}

impl ChartPoint {
    pub fn new(coords: Vec<Complex64>) -> Self {
        Self { coords, label: String::new() }
    }

    pub fn labeled(coords: Vec<Complex64>, label: impl Into<String>) -> Self {
        Self { coords, label: label.into() }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Everything derived from one order-4 jet of the potential.
#[derive(Debug, Clone)]
pub struct MetricData {
    pub point: ChartPoint,
    pub g: DMatrix<Complex64>,
    pub g_inv: DMatrix<Complex64>,
    pub phi3: Tensor3,
    pub phi3_bar: Tensor3,
    /// `phi4[a][b][c][d] = Φ_{a b c dbar}`
    pub phi4: Tensor4,
    /// `dd_metric[a][b][c][d] = ∂_c ∂bar_d g_{a bbar}`
    pub dd_metric: Tensor4,
    pub christoffel: Tensor3,
    pub christoffel_bar: Tensor3,
    pub curvature: Tensor4,
    pub ricci: DMatrix<Complex64>,
    pub min_singular: f64,
    pub max_singular: f64,
    /// smallest eigenvalue of the hermitian part of `g`
    pub min_eigenvalue: f64,
}

impl MetricData {
    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn condition_number(&self) -> f64 {
        self.max_singular / self.min_singular
    }

    pub fn is_positive_definite(&self) -> bool {
        self.min_eigenvalue > 0.0
    }

    /// `∂_a g_{m pbar}` as a matrix in `(m, p)`.
    pub fn dg_holo(&self, a: usize) -> DMatrix<Complex64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |m, p| self.phi3.get(a, m, p))
    }

    /// `∂bar_d g_{m pbar}` as a matrix in `(m, p)`.
    pub fn dg_anti(&self, d: usize) -> DMatrix<Complex64> {
        let n = self.dim();
        // ∂bar_d ∂_m ∂bar_p Φ = conj(Φ_{p d mbar})
        DMatrix::from_fn(n, n, |m, p| self.phi3.get(p, d, m).conj())
    }

    pub fn max_curvature(&self) -> f64 {
        self.curvature.max_norm()
    }
}

/// All Kähler tensors of `phi` at `p`, from a single jet evaluation.
pub fn metric_at(phi: &PotentialExpr, p: &ChartPoint) -> Result<MetricData, KahlerError> {
    let jet = jet_eval(phi, &p.coords)?;
    metric_from_jet(&jet, p)
}

pub fn metric_from_jet(jet: &Jet, p: &ChartPoint) -> Result<MetricData, KahlerError> {
    let n = jet.dim();
    let g = DMatrix::from_fn(n, n, |a, b| jet.d(&[a], &[b]));
    let phi3 = Tensor3::from_fn(n, |a, b, c| jet.d(&[a, b], &[c]));
    let phi4 = Tensor4::from_fn(n, |a, b, c, d| jet.d(&[a, b, c], &[d]));
    let dd_metric = Tensor4::from_fn(n, |a, b, c, d| jet.d(&[a, c], &[b, d]));

    let finite = g.iter().chain(phi3.as_slice()).chain(phi4.as_slice()).chain(dd_metric.as_slice())
        .all(|z| z.re.is_finite() && z.im.is_finite());
    if !finite {
        return Err(KahlerError::NonFinite { label: p.label.clone() });
    }

    let sv = g.clone().singular_values();
    let max_singular = sv.iter().cloned().fold(0.0, f64::max);
    let min_singular = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(max_singular > 0.0) || min_singular < DEGENERACY_RATIO * max_singular {
        return Err(KahlerError::Degenerate { min: min_singular, max: max_singular });
    }
    // LU with partial pivoting
    let g_inv = g
        .clone()
        .lu()
        .try_inverse()
        .ok_or(KahlerError::Degenerate { min: min_singular, max: max_singular })?;

    let hermitian_part = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
    let min_eigenvalue = hermitian_part.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);

    let christoffel = Tensor3::from_fn(n, |k, i, j| (0..n).map(|e| phi3.get(i, j, e) * g_inv[(e, k)]).sum());
    let christoffel_bar = christoffel.conj();
    let phi3_bar = phi3.conj();

    let curvature = Tensor4::from_fn(n, |a, b, c, d| {
        let mut gradient = ZERO;
        for gamma in 0..n {
            let left = phi3.get(c, a, gamma);
            if left == ZERO {
                continue;
            }
            for e in 0..n {
                // ∂bar_d g_{e bbar} = conj(Φ_{b d ebar})
                gradient += left * g_inv[(gamma, e)] * phi3.get(b, d, e).conj();
            }
        }
        dd_metric.get(a, b, c, d) - gradient
    });

    let ricci = DMatrix::from_fn(n, n, |c, d| {
        let mut acc = ZERO;
        for a in 0..n {
            for b in 0..n {
                acc += g_inv[(b, a)] * curvature.get(a, b, c, d);
            }
        }
        acc
    });

    Ok(MetricData {
        point: p.clone(),
        g,
        g_inv,
        phi3,
        phi3_bar,
        phi4,
        dd_metric,
        christoffel,
        christoffel_bar,
        curvature,
        ricci,
        min_singular,
        max_singular,
        min_eigenvalue,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KahlerResiduals {
    /// closedness of the Kähler form together with consistency of `md.g`
    /// against the jet (hermiticity, agreement of entries)
    pub closure: f64,
    /// `Φ_{a b cbar} = Φ_{b a cbar}` and the conjugate family
    pub rank3_symmetry: f64,
}

impl KahlerResiduals {
    pub fn max(&self) -> f64 {
        self.closure.max(self.rank3_symmetry)
    }
}

pub fn kahler_residuals(md: &MetricData, jet: &Jet) -> KahlerResiduals {
    let n = md.dim();
    let mut closure = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            closure = closure.max((md.g[(a, b)] - jet.d(&[a], &[b])).norm());
            closure = closure.max((md.g[(a, b)] - md.g[(b, a)].conj()).norm());
            for c in 0..n {
                // ∂_a g_{b cbar} = ∂_b g_{a cbar}
                closure = closure.max((jet.d(&[a, b], &[c]) - jet.d(&[b, a], &[c])).norm());
                // ∂bar_c g_{a bbar} = ∂bar_b g_{a cbar}
                closure = closure.max((jet.d(&[a], &[b, c]) - jet.d(&[a], &[c, b])).norm());
            }
        }
    }
    let mut rank3 = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                rank3 = rank3.max((md.phi3.get(a, b, c) - md.phi3.get(b, a, c)).norm());
                rank3 = rank3.max((md.phi3_bar.get(a, b, c) - md.phi3_bar.get(b, a, c)).norm());
                rank3 = rank3.max((md.phi3_bar.get(a, b, c) - md.phi3.get(a, b, c).conj()).norm());
            }
        }
    }
    KahlerResiduals { closure, rank3_symmetry: rank3 }
}

/// Largest difference between the two sides of
/// `Σ Φ_{a b ebar} g^{ebar f} Φ_{f cbar dbar} = Σ Φ_{b cbar ebar} g^{ebar f} Φ_{f a dbar}`.
pub fn wdvv_residual_at(md: &MetricData) -> f64 {
    let n = md.dim();
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut lhs = ZERO;
                    let mut rhs = ZERO;
                    for e in 0..n {
                        for f in 0..n {
                            let ginv = md.g_inv[(e, f)];
                            // Φ_{f cbar dbar} = phi3_bar[c][d][f]
                            lhs += md.phi3.get(a, b, e) * ginv * md.phi3_bar.get(c, d, f);
                            // Φ_{b cbar ebar} = phi3_bar[c][e][b]
                            rhs += md.phi3_bar.get(c, e, b) * ginv * md.phi3.get(f, a, d);
                        }
                    }
                    worst = worst.max((lhs - rhs).norm());
                }
            }
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicciCheck {
    pub hermiticity: f64,
    pub max_abs: f64,
}

/// Hermiticity defect and largest entry of the Ricci form (the `c_1`
/// representative up to the constant `i / 2π`).
pub fn ricci_c1_check(md: &MetricData) -> RicciCheck {
    let r = &md.ricci;
    let hermiticity = (r - r.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let max_abs = r.iter().map(|z| z.norm()).fold(0.0, f64::max);
    RicciCheck { hermiticity, max_abs }
}

/// Hermiticity defect of `g`.
pub fn metric_hermiticity(md: &MetricData) -> f64 {
    (&md.g - md.g.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Default step of [`fd_curvature_discrepancy`].
pub const FD_STEP: f64 = 1e-2;

/// Relative gap between `md.curvature` and the curvature rebuilt with
/// `∂_c ∂bar_d g_{a bbar}` taken by central differences of `g` (one
/// Richardson level), scaled by `max(1, max|R|)`.
pub fn fd_curvature_discrepancy(phi: &PotentialExpr, md: &MetricData, step: f64) -> Result<f64, KahlerError> {
    let n = md.dim();
    let p = &md.point.coords;
    let metric = |shift: &[(usize, f64)]| -> Result<DMatrix<Complex64>, KahlerError> {
        let mut q = p.clone();
        for &(u, h) in shift {
            if u < n {
                q[u].re += h;
            } else {
                q[u - n].im += h;
            }
        }
        let jet = jet_eval(phi, &q)?;
        Ok(DMatrix::from_fn(n, n, |a, b| jet.d(&[a], &[b])))
    };
    // hessian[u][v] of every entry of g in the real coordinates (x_1..x_n, y_1..y_n)
    let second = |u: usize, v: usize, h: f64| -> Result<DMatrix<Complex64>, KahlerError> {
        let pp = metric(&[(u, h), (v, h)])?;
        let pm = metric(&[(u, h), (v, -h)])?;
        let mp = metric(&[(u, -h), (v, h)])?;
        let mm = metric(&[(u, -h), (v, -h)])?;
        Ok((pp - pm - mp + mm) / Complex64::new(4.0 * h * h, 0.0))
    };
    let mut hessian = vec![vec![DMatrix::zeros(n, n); 2 * n]; 2 * n];
    for u in 0..2 * n {
        for v in u..2 * n {
            let coarse = second(u, v, step)?;
            let fine = second(u, v, step / 2.0)?;
            let h = (fine * Complex64::new(4.0, 0.0) - coarse) / Complex64::new(3.0, 0.0);
            hessian[v][u] = h.clone();
            hessian[u][v] = h;
        }
    }
    let i = Complex64::i();
    // ∂_c ∂bar_d = ¼ (∂x_c - i ∂y_c)(∂x_d + i ∂y_d)
    let dd = Tensor4::from_fn(n, |a, b, c, d| {
        let xx = hessian[c][d][(a, b)];
        let xy = hessian[c][n + d][(a, b)];
        let yx = hessian[n + c][d][(a, b)];
        let yy = hessian[n + c][n + d][(a, b)];
        (xx + i * xy - i * yx + yy) / 4.0
    });
    // the connection term is shared, so the curvature gap is the gap in `dd`
    Ok(dd.max_abs_diff(&md.dd_metric) / md.max_curvature().max(1.0))
}
