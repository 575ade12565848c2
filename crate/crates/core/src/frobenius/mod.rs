//! Algebra structures on tangent fibres: structure constants, the
//! commutator / associator / invariance defects, units, and the algebras
//! induced by a Kähler metric through its Christoffel symbols.

mod affine;
mod pencil;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::kahler::MetricData;
use crate::tensor::Tensor3;

pub use affine::{affine_vector_field_check, AffineCheck, AFFINE_TOLERANCE};
pub use pencil::{
    christoffel_anti_derivative, christoffel_holo_derivative, he_trace_matrix, hermitian_einstein_trace,
    pencil_curvature, pencil_form, pencil_sweep, PencilCurvature, PencilSample, DEFAULT_LAMBDA_GRID,
};

/// Residual below which a least-squares unit is accepted.
pub const UNIT_TOLERANCE: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("structure constants have dimension {constants}, form has dimension {form}")]
    DimensionMismatch { constants: usize, form: usize },
    #[error("non-finite structure constant")]
    NonFinite,
    #[error("bilinear form is not symmetric (defect {0:e})")]
    AsymmetricForm(f64),
}

/// Finite-dimensional complex algebra with `e_i ∘ e_j = Σ_k C^k_{ij} e_k`
/// and a symmetric bilinear form.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberAlgebra {
    /// `constants[k][i][j] = C^k_{ij}`
    constants: Tensor3,
    form: DMatrix<Complex64>,
    unit: Option<Vec<Complex64>>,
}

impl FiberAlgebra {
    pub fn new(constants: Tensor3, form: DMatrix<Complex64>) -> Result<Self, AlgebraError> {
        let n = constants.dim();
        if form.nrows() != n || form.ncols() != n {
            return Err(AlgebraError::DimensionMismatch { constants: n, form: form.nrows() });
        }
        if constants.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(AlgebraError::NonFinite);
        }
        let defect = (&form - form.transpose()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if defect > 1e-12 {
            return Err(AlgebraError::AsymmetricForm(defect));
        }
        let mut alg = Self { constants, form, unit: None };
        alg.unit = find_unit(&alg);
        Ok(alg)
    }

    /// Algebra with all structure constants zero.
    pub fn zero(n: usize) -> Self {
        Self::new(Tensor3::zeros(n), DMatrix::zeros(n, n)).expect("zero algebra is valid")
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize, usize) -> Complex64) -> Self {
        Self::new(Tensor3::from_fn(n, f), DMatrix::zeros(n, n)).expect("finite constants with zero form")
    }

    pub fn with_form(mut self, form: DMatrix<Complex64>) -> Result<Self, AlgebraError> {
        let unit = self.unit.take();
        let mut alg = Self::new(self.constants, form)?;
        alg.unit = unit;
        Ok(alg)
    }

    pub fn dim(&self) -> usize {
        self.constants.dim()
    }

    pub fn constants(&self) -> &Tensor3 {
        &self.constants
    }

    pub fn form(&self) -> &DMatrix<Complex64> {
        &self.form
    }

    pub fn unit(&self) -> Option<&[Complex64]> {
        self.unit.as_deref()
    }

    /// `(x ∘ y)^k = Σ C^k_{ij} x^i y^j`
    pub fn multiply(&self, x: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        (0..n)
            .map(|k| {
                let mut acc = ZERO;
                for i in 0..n {
                    if x[i] == ZERO {
                        continue;
                    }
                    for j in 0..n {
                        acc += self.constants.get(k, i, j) * x[i] * y[j];
                    }
                }
                acc
            })
            .collect()
    }

    pub fn basis(&self, i: usize) -> Vec<Complex64> {
        let mut v = vec![ZERO; self.dim()];
        v[i] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn pairing(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        let n = self.dim();
        let mut acc = ZERO;
        for i in 0..n {
            for j in 0..n {
                acc += x[i] * self.form[(i, j)] * y[j];
            }
        }
        acc
    }
}

fn max_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |C^k_{ij} - C^k_{ji}|`
pub fn commutator(alg: &FiberAlgebra) -> f64 {
    let n = alg.dim();
    let c = alg.constants();
    let mut worst = 0.0f64;
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((c.get(k, i, j) - c.get(k, j, i)).norm());
            }
        }
    }
    worst
}

/// `max |(e_i ∘ e_j) ∘ e_k - e_i ∘ (e_j ∘ e_k)|` over basis triples.
pub fn associator(alg: &FiberAlgebra) -> f64 {
    let n = alg.dim();
    let mut worst = 0.0f64;
    for i in 0..n {
        let ei = alg.basis(i);
        for j in 0..n {
            let ej = alg.basis(j);
            let ij = alg.multiply(&ei, &ej);
            for k in 0..n {
                let ek = alg.basis(k);
                let left = alg.multiply(&ij, &ek);
                let right = alg.multiply(&ei, &alg.multiply(&ej, &ek));
                let diff: Vec<Complex64> = left.iter().zip(&right).map(|(a, b)| a - b).collect();
                worst = worst.max(max_norm(&diff));
            }
        }
    }
    worst
}

/// `max |⟨e_i ∘ e_j, e_k⟩ - ⟨e_i, e_j ∘ e_k⟩|` over basis triples.
pub fn frobenius_compat(alg: &FiberAlgebra) -> f64 {
    let n = alg.dim();
    let mut worst = 0.0f64;
    for i in 0..n {
        let ei = alg.basis(i);
        for j in 0..n {
            let ej = alg.basis(j);
            let ij = alg.multiply(&ei, &ej);
            for k in 0..n {
                let ek = alg.basis(k);
                let jk = alg.multiply(&ej, &ek);
                worst = worst.max((alg.pairing(&ij, &ek) - alg.pairing(&ei, &jk)).norm());
            }
        }
    }
    worst
}

/// Least-squares solution of `e ∘ x = x` for every basis vector `x`,
/// returned when the residual is below [`UNIT_TOLERANCE`].
pub fn find_unit(alg: &FiberAlgebra) -> Option<Vec<Complex64>> {
    let n = alg.dim();
    if n == 0 {
        return None;
    }
    let c = alg.constants();
    // row (j, k): Σ_i e_i C^k_{ij} = δ_jk
    let system = DMatrix::from_fn(n * n, n, |row, i| {
        let (j, k) = (row / n, row % n);
        c.get(k, i, j)
    });
    let rhs = DVector::from_fn(n * n, |row, _| {
        if row / n == row % n {
            Complex64::new(1.0, 0.0)
        } else {
            ZERO
        }
    });
    let svd = system.clone().svd(true, true);
    let solution = svd.solve(&rhs, 1e-12).ok()?;
    let residual = (&system * &solution - &rhs).iter().map(|z| z.norm()).fold(0.0, f64::max);
    (residual < UNIT_TOLERANCE).then(|| solution.iter().cloned().collect())
}

/// Holomorphic and antiholomorphic fibre algebras `∂_a ∘ ∂_b = Γ^k_{ab} ∂_k`.
///
/// The bilinear form on each summand is the restriction of `g`, which is
/// zero because `g_{ab} = g_{abar bbar} = 0` for a Kähler metric.
pub fn fiber_algebra_from_metric(md: &MetricData) -> (FiberAlgebra, FiberAlgebra) {
    let n = md.dim();
    let holo = FiberAlgebra::new(md.christoffel.clone(), DMatrix::zeros(n, n)).expect("finite christoffel");
    let anti = FiberAlgebra::new(md.christoffel_bar.clone(), DMatrix::zeros(n, n)).expect("finite christoffel");
    (holo, anti)
}

/// Algebra on `T^{1,0} ⊕ T^{0,1}` with basis `(∂_1..∂_n, ∂bar_1..∂bar_n)`,
/// mixed products zero, and the block form `⟨∂_a, ∂bar_b⟩ = g_{a bbar}`.
pub fn direct_sum_algebra(md: &MetricData) -> FiberAlgebra {
    let n = md.dim();
    let constants = Tensor3::from_fn(2 * n, |k, i, j| {
        if k < n && i < n && j < n {
            md.christoffel.get(k, i, j)
        } else if k >= n && i >= n && j >= n {
            md.christoffel_bar.get(k - n, i - n, j - n)
        } else {
            ZERO
        }
    });
    let form = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if i < n && j >= n {
            md.g[(i, j - n)]
        } else if i >= n && j < n {
            md.g[(j, i - n)]
        } else {
            ZERO
        }
    });
    FiberAlgebra::new(constants, form).expect("block form is symmetric")
}

/// `e_i ∘ (e_j ∘ e_k) - e_j ∘ (e_i ∘ e_k)` in `alg`.
pub fn algebraic_curvature(alg: &FiberAlgebra, i: usize, j: usize, k: usize) -> Vec<Complex64> {
    let (ei, ej, ek) = (alg.basis(i), alg.basis(j), alg.basis(k));
    let left = alg.multiply(&ei, &alg.multiply(&ej, &ek));
    let right = alg.multiply(&ej, &alg.multiply(&ei, &ek));
    left.iter().zip(&right).map(|(a, b)| a - b).collect()
}

/// [`algebraic_curvature`] in the holomorphic fibre algebra of `md`.
pub fn curvature_via_algebra(md: &MetricData, (i, j, k): (usize, usize, usize)) -> Vec<Complex64> {
    let (holo, _) = fiber_algebra_from_metric(md);
    algebraic_curvature(&holo, i, j, k)
}
