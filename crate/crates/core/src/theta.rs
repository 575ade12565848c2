//! Riemann theta functions with characteristics, their factors of
//! automorphy, and the dimension of spaces of level-s theta functions.
//!
//! A type `(L, J)` is stored per lattice generator `l_j`: a row `r_j` with
//! `L(x, l_j) = r_j · x` and a constant `J(l_j)`. The factor of a general
//! lattice vector is assembled by walking the generators one step at a time,
//! `H(x + l + l_j) = e(L(x + l, l_j) + J(l_j)) H(x + l)`, so the quadratic
//! cross terms of the cocycle never need to be stored.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::catalog::Lattice;
use crate::sampling::HaltonSampler;

pub const DEFAULT_RADIUS: u32 = 30;
/// Relative singular-value threshold for numerical rank.
pub const RANK_THRESHOLD: f64 = 1e-8;
/// `|H|` is floored at this fraction of the absolute series sum when
/// normalising residuals, so zeros of `H` do not divide by zero.
pub const RESIDUAL_FLOOR_RATIO: f64 = 1e-6;
/// Independent resamplings used by [`level_space_dimension`].
pub const RESAMPLINGS: u64 = 3;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThetaError {
    #[error("tau not in Siegel upper half space")]
    NotSiegel,
    #[error("tau is not symmetric (defect {0:e})")]
    NotSymmetric(f64),
    #[error("inconsistent dimensions: {0}")]
    Shape(String),
    #[error("truncation radius must be at least 1")]
    InvalidRadius,
    #[error("types live on different lattices")]
    LatticeMismatch,
    #[error("level {level} in genus {genus} is outside the supported range (genus 1-2, level 1-4)")]
    OutOfRange { genus: usize, level: u32 },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("numerical rank changed between resamplings ({ranks:?}); use more samples")]
    UnstableRank { ranks: Vec<usize> },
}

/// `e(x) = exp(2πi x)`
pub fn e(x: Complex64) -> Complex64 {
    (Complex64::new(0.0, 2.0 * PI) * x).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiemannThetaSpec {
    tau: DMatrix<Complex64>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    level: u32,
    min_im_eigenvalue: f64,
}

impl RiemannThetaSpec {
    pub fn new(tau: DMatrix<Complex64>, alpha: Vec<f64>, beta: Vec<f64>, level: u32) -> Result<Self, ThetaError> {
        let g = tau.nrows();
        if g == 0 || !tau.is_square() || alpha.len() != g || beta.len() != g {
            return Err(ThetaError::Shape(format!(
                "tau {}x{}, alpha {}, beta {}",
                tau.nrows(),
                tau.ncols(),
                alpha.len(),
                beta.len()
            )));
        }
        if level == 0 {
            return Err(ThetaError::Shape("level must be positive".into()));
        }
        if tau.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(ThetaError::NotSiegel);
        }
        let defect = (&tau - tau.transpose()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if defect > 1e-12 {
            return Err(ThetaError::NotSymmetric(defect));
        }
        let im = tau.map(|z| z.im);
        let min_im_eigenvalue = im.symmetric_eigenvalues().min();
        if !(min_im_eigenvalue > 0.0) {
            return Err(ThetaError::NotSiegel);
        }
        Ok(Self { tau, alpha, beta, level, min_im_eigenvalue })
    }

    /// Characteristics zero, level 1.
    pub fn plain(tau: DMatrix<Complex64>) -> Result<Self, ThetaError> {
        let g = tau.nrows();
        Self::new(tau, vec![0.0; g], vec![0.0; g], 1)
    }

    pub fn genus(&self) -> usize {
        self.tau.nrows()
    }

    pub fn tau(&self) -> &DMatrix<Complex64> {
        &self.tau
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn min_im_eigenvalue(&self) -> f64 {
        self.min_im_eigenvalue
    }

    /// Lattice `ℤ^g + τℤ^g` with generators `e_1..e_g, τe_1..τe_g`.
    pub fn lattice(&self) -> Lattice {
        let g = self.genus();
        let mut gens = Vec::with_capacity(2 * g);
        for k in 0..g {
            gens.push((0..g).map(|i| if i == k { Complex64::new(1.0, 0.0) } else { ZERO }).collect());
        }
        for k in 0..g {
            gens.push(self.tau.column(k).iter().cloned().collect());
        }
        Lattice::new(gens).expect("Im tau positive definite")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaValue {
    pub value: Complex64,
    /// bound on the omitted terms `|n|∞ > R`
    pub tail_bound: f64,
    /// `Σ |term|` over the included terms
    pub abs_sum: f64,
}

fn for_each_index(g: usize, radius: i64, mut f: impl FnMut(&[i64])) {
    let mut n = vec![-radius; g];
    loop {
        f(&n);
        let mut k = 0;
        loop {
            if k == g {
                return;
            }
            if n[k] < radius {
                n[k] += 1;
                break;
            }
            n[k] = -radius;
            k += 1;
        }
    }
}

fn tail_bound(spec: &RiemannThetaSpec, z: &[Complex64], radius: u32) -> f64 {
    let g = spec.genus() as i32;
    let lambda = spec.min_im_eigenvalue;
    let shift = spec.alpha.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let im_z = z.iter().map(|w| w.im * w.im).sum::<f64>().sqrt();
    // |term| ≤ exp(-πλ|m|² + 2π|m||Im z|) with |m| ≥ k - |α|∞ on the shell |n|∞ = k
    let mut total = 0.0;
    for k in radius as i64 + 1..radius as i64 + 400 {
        let r = k as f64 - shift;
        if r <= im_z / lambda {
            return f64::INFINITY;
        }
        let shell = (2 * k + 1) as f64;
        let count = shell.powi(g) - (shell - 2.0).powi(g);
        let term = count * (-PI * lambda * r * r + 2.0 * PI * r * im_z).exp();
        total += term;
        if term < total * 1e-17 {
            break;
        }
    }
    total
}

/// `Σ_{|n|∞≤R} exp(πi (n+α)ᵀτ(n+α) + 2πi (n+α)ᵀ(z+β))`
pub fn eval_riemann_theta(spec: &RiemannThetaSpec, z: &[Complex64], radius: u32) -> Result<ThetaValue, ThetaError> {
    let g = spec.genus();
    if z.len() != g {
        return Err(ThetaError::Shape(format!("point has {} coordinates, genus is {g}", z.len())));
    }
    if radius == 0 {
        return Err(ThetaError::InvalidRadius);
    }
    let pi_i = Complex64::new(0.0, PI);
    let shifted: Vec<Complex64> = z.iter().zip(&spec.beta).map(|(w, b)| w + b).collect();
    let mut value = ZERO;
    let mut abs_sum = 0.0;
    let mut m = vec![0.0; g];
    for_each_index(g, radius as i64, |n| {
        for k in 0..g {
            m[k] = n[k] as f64 + spec.alpha[k];
        }
        let mut quad = ZERO;
        let mut lin = ZERO;
        for i in 0..g {
            for j in 0..g {
                quad += spec.tau[(i, j)] * (m[i] * m[j]);
            }
            lin += shifted[i] * m[i];
        }
        let term = (pi_i * quad + 2.0 * pi_i * lin).exp();
        value += term;
        abs_sum += term.norm();
    });
    Ok(ThetaValue { value, tail_bound: tail_bound(spec, z, radius), abs_sum })
}

/// Factor-of-automorphy data `(L, J)` on a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaType {
    lattice: Lattice,
    /// `rows[j] · x = L(x, l_j)`
    rows: Vec<Vec<Complex64>>,
    /// `J(l_j)`
    constants: Vec<Complex64>,
}

impl ThetaType {
    pub fn new(lattice: Lattice, rows: Vec<Vec<Complex64>>, constants: Vec<Complex64>) -> Result<Self, ThetaError> {
        let g = lattice.dim();
        if rows.len() != 2 * g || constants.len() != 2 * g || rows.iter().any(|r| r.len() != g) {
            return Err(ThetaError::Shape(format!("type data for {} generators in genus {g}", rows.len())));
        }
        Ok(Self { lattice, rows, constants })
    }

    /// `L = 0, J = 0`
    pub fn trivial(lattice: Lattice) -> Self {
        let g = lattice.dim();
        Self { lattice, rows: vec![vec![ZERO; g]; 2 * g], constants: vec![ZERO; 2 * g] }
    }

    pub fn genus(&self) -> usize {
        self.lattice.dim()
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn rows(&self) -> &[Vec<Complex64>] {
        &self.rows
    }

    pub fn constants(&self) -> &[Complex64] {
        &self.constants
    }

    /// `L(x, l_j) + J(l_j)`
    pub fn exponent(&self, x: &[Complex64], j: usize) -> Complex64 {
        self.rows[j].iter().zip(x).map(|(r, w)| r * w).sum::<Complex64>() + self.constants[j]
    }

    /// Factor `H(x + l) / H(x)` for `l = Σ m_j l_j`.
    pub fn factor(&self, x: &[Complex64], coefficients: &[i64]) -> Complex64 {
        let mut point = x.to_vec();
        let mut factor = Complex64::new(1.0, 0.0);
        for (j, &count) in coefficients.iter().enumerate() {
            let l = &self.lattice.generators()[j];
            for _ in 0..count.abs() {
                if count > 0 {
                    factor *= e(self.exponent(&point, j));
                    point.iter_mut().zip(l).for_each(|(p, d)| *p += d);
                } else {
                    point.iter_mut().zip(l).for_each(|(p, d)| *p -= d);
                    factor /= e(self.exponent(&point, j));
                }
            }
        }
        factor
    }
}

/// Type of `θ[α, β](·, τ)` on `ℤ^g + τℤ^g`:
/// `θ(z + e_k) = e(α_k) θ(z)` and `θ(z + τe_k) = e(-z_k - τ_kk/2 - β_k) θ(z)`.
pub fn riemann_type_of(spec: &RiemannThetaSpec) -> ThetaType {
    let g = spec.genus();
    let mut rows = vec![vec![ZERO; g]; 2 * g];
    let mut constants = vec![ZERO; 2 * g];
    for k in 0..g {
        constants[k] = Complex64::new(spec.alpha[k], 0.0);
        rows[g + k][k] = Complex64::new(-1.0, 0.0);
        constants[g + k] = -spec.tau[(k, k)] / 2.0 - spec.beta[k];
    }
    ThetaType { lattice: spec.lattice(), rows, constants }
}

pub fn multiply_types(t1: &ThetaType, t2: &ThetaType) -> Result<ThetaType, ThetaError> {
    if t1.lattice != t2.lattice {
        return Err(ThetaError::LatticeMismatch);
    }
    let rows = t1
        .rows
        .iter()
        .zip(&t2.rows)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
        .collect();
    let constants = t1.constants.iter().zip(&t2.constants).map(|(a, b)| a + b).collect();
    Ok(ThetaType { lattice: t1.lattice.clone(), rows, constants })
}

/// `|H(z + l) - factor·H(z)| / (|factor| · max(|H(z)|, floor))` for any
/// evaluator `h` returning the value and its absolute series sum.
pub fn law_residual<F>(ty: &ThetaType, h: F, z: &[Complex64], coefficients: &[i64]) -> Result<f64, ThetaError>
where
    F: Fn(&[Complex64]) -> Result<(Complex64, f64), ThetaError>,
{
    let g = ty.genus();
    if z.len() != g || coefficients.len() != 2 * g {
        return Err(ThetaError::Shape("point or lattice vector has the wrong length".into()));
    }
    let mut moved = z.to_vec();
    for (j, &m) in coefficients.iter().enumerate() {
        for (p, d) in moved.iter_mut().zip(&ty.lattice.generators()[j]) {
            *p += *d * m as f64;
        }
    }
    let (at_z, abs_sum) = h(z)?;
    let (at_moved, _) = h(&moved)?;
    let factor = ty.factor(z, coefficients);
    let scale = factor.norm() * at_z.norm().max(RESIDUAL_FLOOR_RATIO * abs_sum);
    Ok((at_moved - factor * at_z).norm() / scale)
}

/// Residual of the law for the `k`-th lattice generator.
pub fn quasi_periodicity_residual(spec: &RiemannThetaSpec, z: &[Complex64], k: usize, radius: u32) -> Result<f64, ThetaError> {
    let g = spec.genus();
    if k >= 2 * g {
        return Err(ThetaError::Shape(format!("generator {k} out of range for genus {g}")));
    }
    let mut coefficients = vec![0; 2 * g];
    coefficients[k] = 1;
    let ty = riemann_type_of(spec);
    law_residual(&ty, |x| eval_riemann_theta(spec, x, radius).map(|v| (v.value, v.abs_sum)), z, &coefficients)
}

/// Law residual of the product `θ_1 θ_2` against the product type.
pub fn product_residual(
    s1: &RiemannThetaSpec,
    s2: &RiemannThetaSpec,
    z: &[Complex64],
    coefficients: &[i64],
    radius: u32,
) -> Result<f64, ThetaError> {
    let ty = multiply_types(&riemann_type_of(s1), &riemann_type_of(s2))?;
    law_residual(
        &ty,
        |x| {
            let a = eval_riemann_theta(s1, x, radius)?;
            let b = eval_riemann_theta(s2, x, radius)?;
            Ok((a.value * b.value, a.abs_sum * b.abs_sum))
        },
        z,
        coefficients,
    )
}

/// Numerical rank with the relative threshold [`RANK_THRESHOLD`].
pub fn numerical_rank(m: &DMatrix<Complex64>) -> usize {
    let sv = m.clone().singular_values();
    let max = sv.max();
    if !(max > 0.0) {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_THRESHOLD * max).count()
}

/// The candidate basis `θ[k/s, 0](s z, s τ)`, `k ∈ (ℤ/s)^g`.
pub fn level_basis(tau: &DMatrix<Complex64>, s: u32) -> Result<Vec<RiemannThetaSpec>, ThetaError> {
    let g = tau.nrows();
    let scaled = tau * Complex64::new(s as f64, 0.0);
    let mut out = Vec::new();
    let total = (s as usize).pow(g as u32);
    for idx in 0..total {
        let mut rest = idx;
        let alpha: Vec<f64> = (0..g)
            .map(|_| {
                let k = rest % s as usize;
                rest /= s as usize;
                k as f64 / s as f64
            })
            .collect();
        out.push(RiemannThetaSpec::new(scaled.clone(), alpha, vec![0.0; g], s)?);
    }
    Ok(out)
}

/// Evaluation matrix of the level-`s` basis at `z = a + τ b`, with `(a, b)`
/// the given unit-cube points; each row is scaled by its largest entry.
pub fn level_evaluation_matrix(
    tau: &DMatrix<Complex64>,
    s: u32,
    cube_points: &[Vec<f64>],
    radius: u32,
) -> Result<DMatrix<Complex64>, ThetaError> {
    let g = tau.nrows();
    let basis = level_basis(tau, s)?;
    let rows: Vec<Vec<Complex64>> = cube_points
        .par_iter()
        .map(|u| {
            let z: Vec<Complex64> = (0..g)
                .map(|i| {
                    let shift: Complex64 = (0..g).map(|j| tau[(i, j)] * u[g + j]).sum();
                    (Complex64::new(u[i], 0.0) + shift) * s as f64
                })
                .collect();
            let row = basis
                .iter()
                .map(|b| eval_riemann_theta(b, &z, radius).map(|v| v.value))
                .collect::<Result<Vec<_>, _>>()?;
            let scale = row.iter().map(|w| w.norm()).fold(0.0, f64::max);
            Ok(if scale > 0.0 { row.iter().map(|w| w / scale).collect() } else { row })
        })
        .collect::<Result<_, ThetaError>>()?;
    Ok(DMatrix::from_fn(rows.len(), basis.len(), |i, j| rows[i][j]))
}

/// Numerical dimension of the space spanned by level-`s` theta functions,
/// required to agree across [`RESAMPLINGS`] independent point sets.
pub fn level_space_dimension(
    g: usize,
    s: u32,
    tau: &DMatrix<Complex64>,
    samples: usize,
    seed: u64,
) -> Result<usize, ThetaError> {
    if !(1..=2).contains(&g) || !(1..=4).contains(&s) {
        return Err(ThetaError::OutOfRange { genus: g, level: s });
    }
    if tau.nrows() != g {
        return Err(ThetaError::Shape(format!("tau has size {}, genus is {g}", tau.nrows())));
    }
    RiemannThetaSpec::plain(tau.clone())?;
    let needed = 4 * (s as usize).pow(g as u32);
    if samples < needed {
        return Err(ThetaError::TooFewSamples { needed, got: samples });
    }
    let radius = 12;
    let mut ranks = Vec::new();
    for r in 0..RESAMPLINGS {
        let points = HaltonSampler::new(2 * g, seed.wrapping_add(r)).points(samples);
        ranks.push(numerical_rank(&level_evaluation_matrix(tau, s, &points, radius)?));
    }
    if ranks.windows(2).any(|w| w[0] != w[1]) {
        return Err(ThetaError::UnstableRank { ranks });
    }
    Ok(ranks[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tau_i() -> DMatrix<Complex64> {
        DMatrix::from_element(1, 1, c(0.0, 1.0))
    }

    #[test]
    fn rejects_bad_tau() {
        let bad = DMatrix::from_element(1, 1, c(0.3, -1.0));
        assert_eq!(RiemannThetaSpec::plain(bad).unwrap_err().to_string(), "tau not in Siegel upper half space");
        let asym = DMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.1, 0.0), c(0.0, 0.0), c(0.0, 1.0)]);
        assert!(matches!(RiemannThetaSpec::plain(asym), Err(ThetaError::NotSymmetric(_))));
    }

    #[test]
    fn evenness() {
        let spec = RiemannThetaSpec::plain(tau_i()).unwrap();
        for z in [c(0.13, 0.4), c(-0.7, 0.05), c(0.5, -0.3)] {
            let a = eval_riemann_theta(&spec, &[z], 30).unwrap().value;
            let b = eval_riemann_theta(&spec, &[-z], 30).unwrap().value;
            assert!((a - b).norm() < 1e-12 * a.norm().max(1.0));
        }
    }

    #[test]
    fn classical_zero() {
        let spec = RiemannThetaSpec::plain(tau_i()).unwrap();
        let v = eval_riemann_theta(&spec, &[c(0.5, 0.5)], 30).unwrap();
        assert!(v.value.norm() < 1e-10);
        assert!(v.tail_bound < 1e-100);
    }

    #[test]
    fn both_generators_satisfy_the_law() {
        let spec = RiemannThetaSpec::new(tau_i(), vec![0.25], vec![-0.5], 1).unwrap();
        for z in [c(0.1, 0.2), c(0.5, 0.5), c(-0.3, -0.6)] {
            for k in 0..2 {
                assert!(quasi_periodicity_residual(&spec, &[z], k, 30).unwrap() < 1e-8);
            }
        }
    }

    #[test]
    fn wrong_type_fails() {
        let spec = RiemannThetaSpec::plain(tau_i()).unwrap();
        let mut ty = riemann_type_of(&spec);
        ty.constants[1] += 0.1;
        let r = law_residual(&ty, |x| eval_riemann_theta(&spec, x, 30).map(|v| (v.value, v.abs_sum)), &[c(0.1, 0.2)], &[0, 1]).unwrap();
        assert!(r > 0.1);
    }

    #[test]
    fn composite_lattice_vectors() {
        let tau = DMatrix::from_row_slice(2, 2, &[c(0.1, 1.0), c(0.2, 0.3), c(0.2, 0.3), c(-0.1, 0.9)]);
        let spec = RiemannThetaSpec::new(tau, vec![0.5, 0.0], vec![0.0, 0.5], 1).unwrap();
        let ty = riemann_type_of(&spec);
        let z = [c(0.1, -0.1), c(0.2, 0.05)];
        let h = |x: &[Complex64]| eval_riemann_theta(&spec, x, 30).map(|v| (v.value, v.abs_sum));
        for coefficients in [[1, -1, 0, 1], [0, 2, -1, 0], [-1, 0, 1, 1]] {
            assert!(law_residual(&ty, h, &z, &coefficients).unwrap() < 1e-8, "{coefficients:?}");
        }
    }

    #[test]
    fn type_group_laws() {
        let spec = RiemannThetaSpec::new(tau_i(), vec![0.5], vec![0.25], 1).unwrap();
        let t = riemann_type_of(&spec);
        let one = ThetaType::trivial(spec.lattice());
        assert_eq!(multiply_types(&t, &one).unwrap(), t);
        let other = RiemannThetaSpec::plain(DMatrix::from_element(1, 1, c(0.0, 2.0))).unwrap();
        assert_eq!(multiply_types(&t, &riemann_type_of(&other)), Err(ThetaError::LatticeMismatch));
    }

    #[test]
    fn product_of_thetas_has_product_type() {
        let s1 = RiemannThetaSpec::new(tau_i(), vec![0.5], vec![0.0], 1).unwrap();
        let s2 = RiemannThetaSpec::new(tau_i(), vec![0.0], vec![0.5], 1).unwrap();
        for coefficients in [[1, 0], [0, 1], [2, -1]] {
            assert!(product_residual(&s1, &s2, &[c(0.2, 0.1)], &coefficients, 30).unwrap() < 1e-7);
        }
    }

    #[test]
    fn level_dimensions() {
        assert_eq!(level_space_dimension(1, 2, &tau_i(), 32, 1).unwrap(), 2);
        assert_eq!(level_space_dimension(1, 3, &tau_i(), 32, 1).unwrap(), 3);
        let tau2 = DMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 2.0)]);
        assert_eq!(level_space_dimension(2, 2, &tau2, 32, 1).unwrap(), 4);
        assert!(matches!(level_space_dimension(1, 2, &tau_i(), 7, 1), Err(ThetaError::TooFewSamples { .. })));
        assert!(matches!(level_space_dimension(3, 2, &tau_i(), 64, 1), Err(ThetaError::OutOfRange { .. })));
    }
}
