//! Truncated power series ("jets") in the `2n` formal variables
//! `z_1..z_n, zbar_1..zbar_n`.
//!
//! A jet of a function `f(z, zbar)` at a point stores the Taylor coefficients
//! `c_{αβ}` of `f(p + dz, conj(p) + dzbar)` for every pair of multi-indices
//! with `|α| + |β| <= 4`. The Wirtinger partial `∂^α ∂bar^β f(p)` is then
//! `α! β! c_{αβ}`. Order 4 is what curvature needs (second derivatives of the
//! metric, itself a second derivative of the potential).

use std::collections::HashMap;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::expr::{Algebra, EvalError, ExprError, PotentialExpr, LOG_SINGULARITY_FLOOR};

/// The only supported truncation order.
pub const JET_ORDER: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("unsupported jet order {0}; only order {JET_ORDER} is available")]
    UnsupportedOrder(usize),
    #[error("multi-index pair of total order {0} lies outside the order-{JET_ORDER} simplex")]
    OutOfSimplex(usize),
    #[error("multi-index has length {got}, chart dimension is {dim}")]
    IndexLength { dim: usize, got: usize },
}

/// Pair of holomorphic / antiholomorphic multi-indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndexPair {
    pub alpha: Vec<u8>,
    pub beta: Vec<u8>,
}

impl MultiIndexPair {
    pub fn new(alpha: Vec<u8>, beta: Vec<u8>) -> Result<Self, JetError> {
        let order = total(&alpha) + total(&beta);
        if order > JET_ORDER {
            return Err(JetError::OutOfSimplex(order));
        }
        Ok(Self { alpha, beta })
    }

    /// Build from lists of variable indices, e.g. `([a, b], [c])` for
    /// `∂_a ∂_b ∂bar_c`.
    pub fn from_indices(dim: usize, holo: &[usize], anti: &[usize]) -> Result<Self, JetError> {
        let mut alpha = vec![0u8; dim];
        let mut beta = vec![0u8; dim];
        for &a in holo {
            if a >= dim {
                return Err(JetError::IndexLength { dim, got: a + 1 });
            }
            alpha[a] += 1;
        }
        for &b in anti {
            if b >= dim {
                return Err(JetError::IndexLength { dim, got: b + 1 });
            }
            beta[b] += 1;
        }
        Self::new(alpha, beta)
    }

    pub fn order(&self) -> usize {
        total(&self.alpha) + total(&self.beta)
    }
}

fn total(v: &[u8]) -> usize {
    v.iter().map(|&x| x as usize).sum()
}

fn factorial(k: u8) -> f64 {
    (1..=k as u32).map(f64::from).product()
}

/// Monomial enumeration and product table for one chart dimension.
#[derive(Debug)]
pub struct Layout {
    dim: usize,
    /// exponents over `2 * dim` variables, holomorphic first
    monomials: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    /// `(i, j, k)`: monomial i times monomial j is monomial k
    products: Vec<(u32, u32, u32)>,
    /// monomial index with α and β swapped
    swapped: Vec<usize>,
}

impl Layout {
    pub fn new(dim: usize) -> Self {
        let vars = 2 * dim;
        let mut monomials = Vec::new();
        for degree in 0..=JET_ORDER {
            let mut current = vec![0u8; vars];
            push_compositions(&mut current, 0, degree, &mut monomials);
        }
        let index: HashMap<Vec<u8>, usize> =
            monomials.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();

        let mut products = Vec::new();
        for (i, a) in monomials.iter().enumerate() {
            let da = total(a);
            for (j, b) in monomials.iter().enumerate() {
                if da + total(b) > JET_ORDER {
                    continue;
                }
                let sum: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                products.push((i as u32, j as u32, index[&sum] as u32));
            }
        }
        let swapped = monomials
            .iter()
            .map(|m| {
                let mut s = m[dim..].to_vec();
                s.extend_from_slice(&m[..dim]);
                index[&s]
            })
            .collect();
        Self { dim, monomials, index, products, swapped }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    fn position(&self, pair: &MultiIndexPair) -> Result<usize, JetError> {
        if pair.alpha.len() != self.dim || pair.beta.len() != self.dim {
            return Err(JetError::IndexLength { dim: self.dim, got: pair.alpha.len().max(pair.beta.len()) });
        }
        let mut key = pair.alpha.clone();
        key.extend_from_slice(&pair.beta);
        self.index.get(&key).copied().ok_or(JetError::OutOfSimplex(pair.order()))
    }
}

// All exponent vectors with entries summing to `remaining`, in lexicographic
// order from the first variable.
fn push_compositions(current: &mut Vec<u8>, var: usize, remaining: usize, out: &mut Vec<Vec<u8>>) {
    if var + 1 == current.len() {
        current[var] = remaining as u8;
        out.push(current.clone());
        current[var] = 0;
        return;
    }
    for k in (0..=remaining).rev() {
        current[var] = k as u8;
        push_compositions(current, var + 1, remaining - k, out);
    }
    current[var] = 0;
}

/// Truncated series around a point; dense over the order-4 simplex.
#[derive(Debug, Clone)]
pub struct Jet {
    layout: Arc<Layout>,
    coeffs: Vec<Complex64>,
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.layout.dim == other.layout.dim && self.coeffs == other.coeffs
    }
}

impl Jet {
    pub fn constant(layout: &Arc<Layout>, value: Complex64) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); layout.len()];
        coeffs[0] = value;
        Self { layout: Arc::clone(layout), coeffs }
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.dim
    }

    pub fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Raw Taylor coefficient at `(α, β)`.
    pub fn coefficient(&self, pair: &MultiIndexPair) -> Result<Complex64, JetError> {
        Ok(self.coeffs[self.layout.position(pair)?])
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// True mixed partial `∂^α ∂bar^β` at the expansion point.
    pub fn partial(&self, pair: &MultiIndexPair) -> Result<Complex64, JetError> {
        let scale: f64 = pair.alpha.iter().chain(&pair.beta).map(|&k| factorial(k)).product();
        Ok(self.coefficient(pair)? * scale)
    }

    /// Shorthand for `partial` with index lists, e.g. `d(&[a, b], &[c])`.
    pub fn d(&self, holo: &[usize], anti: &[usize]) -> Complex64 {
        let pair = MultiIndexPair::from_indices(self.dim(), holo, anti)
            .expect("derivative indices within chart and order");
        self.partial(&pair).expect("pair inside simplex")
    }

    /// Jet of `conj(f)`: swaps α with β and conjugates.
    pub fn conj(&self) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.coeffs.len()];
        for (i, &c) in self.coeffs.iter().enumerate() {
            coeffs[self.layout.swapped[i]] = c.conj();
        }
        Self { layout: Arc::clone(&self.layout), coeffs }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { layout: Arc::clone(&self.layout), coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    fn nilpotent(&self) -> Self {
        let mut n = self.clone();
        n.coeffs[0] = Complex64::new(0.0, 0.0);
        n
    }

    /// `Σ_k weights[k] N^k` for the nilpotent part `N`; terms past order 4 vanish.
    fn series_in_nilpotent(&self, weights: [Complex64; JET_ORDER + 1]) -> Self {
        let n = self.nilpotent();
        let mut power = Jet::constant(&self.layout, Complex64::new(1.0, 0.0));
        let mut acc = Jet::constant(&self.layout, weights[0]);
        for w in weights.iter().skip(1) {
            power = &power * &n;
            acc = &acc + &power.scale(*w);
        }
        acc
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        let w = [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0].map(|x| e * x);
        self.series_in_nilpotent(w)
    }

    pub fn ln(&self) -> Result<Self, EvalError> {
        let c = self.value();
        let modulus = c.norm();
        if modulus < LOG_SINGULARITY_FLOOR {
            return Err(EvalError::LogSingularity { modulus });
        }
        let inv = c.inv();
        let mut w = [Complex64::new(0.0, 0.0); JET_ORDER + 1];
        w[0] = c.ln();
        let mut p = Complex64::new(1.0, 0.0);
        for (k, wk) in w.iter_mut().enumerate().skip(1) {
            p *= inv;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            *wk = p * (sign / k as f64);
        }
        Ok(self.series_in_nilpotent(w))
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut result = Jet::constant(&self.layout, Complex64::new(1.0, 0.0));
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn re(&self) -> Self {
        let c = self.conj();
        Self {
            layout: Arc::clone(&self.layout),
            coeffs: self.coeffs.iter().zip(&c.coeffs).map(|(a, b)| (a + b) * 0.5).collect(),
        }
    }

    pub fn im(&self) -> Self {
        let c = self.conj();
        let half_i = Complex64::new(0.0, -0.5);
        Self {
            layout: Arc::clone(&self.layout),
            coeffs: self.coeffs.iter().zip(&c.coeffs).map(|(a, b)| (a - b) * half_i).collect(),
        }
    }

    /// Largest `|c_{αβ} - conj(c_{βα})|`; zero for jets of real functions.
    pub fn reality_defect(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| (c - self.coeffs[self.layout.swapped[i]].conj()).norm())
            .fold(0.0, f64::max)
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        Jet {
            layout: Arc::clone(&self.layout),
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        Jet {
            layout: Arc::clone(&self.layout),
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.coeffs.len()];
        for &(i, j, k) in &self.layout.products {
            coeffs[k as usize] += self.coeffs[i as usize] * rhs.coeffs[j as usize];
        }
        Jet { layout: Arc::clone(&self.layout), coeffs }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet { layout: Arc::clone(&self.layout), coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

/// Coordinate jets `z_1..z_n, zbar_1..zbar_n` expanded at `point`.
pub fn seed(point: &[Complex64], order: usize) -> Result<Vec<Jet>, JetError> {
    if order != JET_ORDER {
        return Err(JetError::UnsupportedOrder(order));
    }
    let layout = Arc::new(Layout::new(point.len()));
    Ok(seed_with(&layout, point))
}

fn seed_with(layout: &Arc<Layout>, point: &[Complex64]) -> Vec<Jet> {
    let n = point.len();
    let mut out = Vec::with_capacity(2 * n);
    for var in 0..2 * n {
        let value = if var < n { point[var] } else { point[var - n].conj() };
        let mut jet = Jet::constant(layout, value);
        let mut unit = vec![0u8; 2 * n];
        unit[var] = 1;
        jet.coeffs[layout.index[&unit]] = Complex64::new(1.0, 0.0);
        out.push(jet);
    }
    out
}

struct JetAlgebra {
    layout: Arc<Layout>,
    seeds: Vec<Jet>,
}

impl Algebra for JetAlgebra {
    type Value = Jet;

    fn constant(&self, c: f64) -> Jet {
        Jet::constant(&self.layout, Complex64::new(c, 0.0))
    }
    fn var(&self, index: usize) -> Jet {
        self.seeds[index].clone()
    }
    fn conj_var(&self, index: usize) -> Jet {
        self.seeds[self.layout.dim + index].clone()
    }
    fn add(&self, a: Jet, b: Jet) -> Jet {
        &a + &b
    }
    fn sub(&self, a: Jet, b: Jet) -> Jet {
        &a - &b
    }
    fn mul(&self, a: Jet, b: Jet) -> Jet {
        &a * &b
    }
    fn neg(&self, a: Jet) -> Jet {
        -&a
    }
    fn powi(&self, a: Jet, k: u32) -> Jet {
        a.powi(k)
    }
    fn exp(&self, a: Jet) -> Jet {
        a.exp()
    }
    fn log(&self, a: Jet) -> Result<Jet, EvalError> {
        a.ln()
    }
    fn re(&self, a: Jet) -> Jet {
        a.re()
    }
    fn im(&self, a: Jet) -> Jet {
        a.im()
    }
}

/// Order-4 jet of `expr` at `point`.
pub fn jet_eval(expr: &PotentialExpr, point: &[Complex64]) -> Result<Jet, EvalError> {
    if point.len() != expr.dim() {
        return Err(ExprError::PointDimension { expected: expr.dim(), got: point.len() }.into());
    }
    let layout = Arc::new(Layout::new(point.len()));
    jet_eval_with(expr, point, &layout)
}

/// As [`jet_eval`], reusing a prebuilt layout across many points.
pub fn jet_eval_with(expr: &PotentialExpr, point: &[Complex64], layout: &Arc<Layout>) -> Result<Jet, EvalError> {
    if point.len() != expr.dim() || layout.dim != expr.dim() {
        return Err(ExprError::PointDimension { expected: expr.dim(), got: point.len() }.into());
    }
    let alg = JetAlgebra { layout: Arc::clone(layout), seeds: seed_with(layout, point) };
    expr.fold(&alg)
}

/// `α! β!` times the `(α, β)` coefficient.
pub fn partial(jet: &Jet, alpha: &[u8], beta: &[u8]) -> Result<Complex64, JetError> {
    jet.partial(&MultiIndexPair::new(alpha.to_vec(), beta.to_vec())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn simplex_sizes() {
        // C(2n + 4, 4)
        assert_eq!(Layout::new(1).len(), 15);
        assert_eq!(Layout::new(2).len(), 70);
        assert_eq!(Layout::new(3).len(), 210);
        assert_eq!(Layout::new(4).len(), 495);
    }

    #[test]
    fn seeded_variables() {
        let s = seed(&[c(0.0, 0.0)], 4).unwrap();
        assert_eq!(s[0].value(), c(0.0, 0.0));
        assert_eq!(partial(&s[0], &[1], &[0]).unwrap(), c(1.0, 0.0));

        let s = seed(&[c(1.0, 1.0)], 4).unwrap();
        assert_eq!(s[1].value(), c(1.0, -1.0));
        assert_eq!(partial(&s[1], &[0], &[1]).unwrap(), c(1.0, 0.0));
        for jet in &s {
            let nonzero = jet.coefficients().iter().skip(1).filter(|x| x.norm() != 0.0).count();
            assert_eq!(nonzero, 1);
        }
    }

    #[test]
    fn only_order_four() {
        assert_eq!(seed(&[c(0.0, 0.0)], 3).unwrap_err(), JetError::UnsupportedOrder(3));
    }

    #[test]
    fn out_of_simplex() {
        let jet = jet_eval(&parse("z1*zbar1", 1).unwrap(), &[c(0.0, 0.0)]).unwrap();
        assert_eq!(partial(&jet, &[3], &[2]).unwrap_err(), JetError::OutOfSimplex(5));
    }

    #[test]
    fn modulus_squared_derivatives() {
        let e = parse("z1*zbar1", 1).unwrap();
        let p = c(0.3, -0.7);
        let jet = jet_eval(&e, &[p]).unwrap();
        assert_relative_eq!(jet.d(&[0], &[0]).re, 1.0);
        assert_eq!(jet.d(&[], &[]), p * p.conj());
        for (h, a) in [(2, 1), (1, 2), (3, 0), (2, 2), (3, 1), (4, 0)] {
            assert_eq!(jet.d(&vec![0; h], &vec![0; a]), c(0.0, 0.0));
        }
    }

    #[test]
    fn log_potential_at_origin() {
        // log(1 + r) = r - r^2/2 + ..., r = z zbar; ∂²∂bar² (z zbar)² = 2!·2!
        let jet = jet_eval(&parse("log(1+z1*zbar1)", 1).unwrap(), &[c(0.0, 0.0)]).unwrap();
        assert_relative_eq!(jet.d(&[0], &[0]).re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(jet.d(&[0, 0], &[0, 0]).re, -2.0, epsilon = 1e-14);
    }

    #[test]
    fn quartic_at_origin() {
        let jet = jet_eval(&parse("(z1*zbar1)^2", 1).unwrap(), &[c(0.0, 0.0)]).unwrap();
        assert_eq!(jet.d(&[0], &[0]), c(0.0, 0.0));
        assert_relative_eq!(jet.d(&[0, 0], &[0, 0]).re, 4.0);
    }

    #[test]
    fn exp_of_holomorphic_variable() {
        // ∂^k exp(z) = exp(z)
        let p = c(0.2, 0.5);
        let jet = jet_eval(&parse("exp(z1)", 1).unwrap(), &[p]).unwrap();
        for k in 0..=4 {
            let d = jet.d(&vec![0; k], &[]);
            assert_relative_eq!(d.re, p.exp().re, epsilon = 1e-14);
            assert_relative_eq!(d.im, p.exp().im, epsilon = 1e-14);
        }
        assert_eq!(jet.d(&[0], &[0]), c(0.0, 0.0));
    }

    #[test]
    fn re_and_im_of_variable() {
        let jet = jet_eval(&parse("re(z1)", 1).unwrap(), &[c(3.0, -4.0)]).unwrap();
        assert_eq!(jet.value(), c(3.0, 0.0));
        assert_eq!(jet.d(&[0], &[]), c(0.5, 0.0));
        assert_eq!(jet.d(&[], &[0]), c(0.5, 0.0));
        let jet = jet_eval(&parse("im(z1)", 1).unwrap(), &[c(3.0, -4.0)]).unwrap();
        assert_eq!(jet.value(), c(-4.0, 0.0));
        assert_eq!(jet.d(&[0], &[]), c(0.0, -0.5));
        assert_eq!(jet.d(&[], &[0]), c(0.0, 0.5));
    }

    #[test]
    fn log_domain_error_propagates() {
        let e = parse("log(z1*zbar1)", 1).unwrap();
        assert!(matches!(jet_eval(&e, &[c(0.0, 0.0)]), Err(EvalError::LogSingularity { .. })));
    }

    #[test]
    fn reality_of_real_potentials() {
        let e = parse("log(1 + z1*zbar1 + 2*z2*zbar2) + re(z1^3*zbar2) + exp(z1*zbar2 + z2*zbar1)", 2).unwrap();
        let jet = jet_eval(&e, &[c(0.2, -0.1), c(-0.3, 0.25)]).unwrap();
        assert!(jet.reality_defect() < 1e-12);
    }
}
