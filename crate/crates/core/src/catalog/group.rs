//! Lattices, affine maps and finite group actions on complex tori.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::smith::smith_normal_form;
use super::CatalogError;

/// Slack used when deciding whether a real number is an integer.
pub const INTEGRALITY_TOLERANCE: f64 = 1e-9;
/// Upper bound on element orders and group sizes searched.
pub const MAX_ORDER: usize = 120;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn near_integer(x: f64) -> bool {
    (x - x.round()).abs() < INTEGRALITY_TOLERANCE
}

fn realify(v: &[Complex64]) -> DVector<f64> {
    let n = v.len();
    DVector::from_fn(2 * n, |i, _| if i < n { v[i].re } else { v[i - n].im })
}

fn complexify(v: &DVector<f64>) -> Vec<Complex64> {
    let n = v.len() / 2;
    (0..n).map(|i| Complex64::new(v[i], v[i + n])).collect()
}

/// `A` acting on `ℂ^n ≅ ℝ^{2n}` in the `[Re; Im]` ordering.
fn realify_matrix(a: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = a.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = a[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Full-rank lattice `Λ ⊂ ℂ^n` given by `2n` generators.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    generators: Vec<Vec<Complex64>>,
    basis: DMatrix<f64>,
    basis_inv: DMatrix<f64>,
}

impl Lattice {
    pub fn new(generators: Vec<Vec<Complex64>>) -> Result<Self, CatalogError> {
        let n = generators.first().map_or(0, Vec::len);
        if n == 0 || generators.len() != 2 * n || generators.iter().any(|g| g.len() != n) {
            return Err(CatalogError::LatticeShape { count: generators.len(), dim: n });
        }
        if generators.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(CatalogError::LatticeDegenerate);
        }
        let mut basis = DMatrix::zeros(2 * n, 2 * n);
        for (j, g) in generators.iter().enumerate() {
            basis.set_column(j, &realify(g));
        }
        let sv = basis.clone().singular_values();
        let max = sv.max();
        if !(max > 0.0) || sv.min() < 1e-12 * max {
            return Err(CatalogError::LatticeDegenerate);
        }
        let basis_inv = basis.clone().try_inverse().ok_or(CatalogError::LatticeDegenerate)?;
        Ok(Self { generators, basis, basis_inv })
    }

    /// Product of one-dimensional lattices `ℤω_1 ⊕ ℤω_2`, one per coordinate.
    pub fn from_periods(periods: &[(Complex64, Complex64)]) -> Result<Self, CatalogError> {
        let n = periods.len();
        let mut gens = Vec::with_capacity(2 * n);
        for (k, &(w1, w2)) in periods.iter().enumerate() {
            for w in [w1, w2] {
                let mut v = vec![ZERO; n];
                v[k] = w;
                gens.push(v);
            }
        }
        Self::new(gens)
    }

    /// `(ℤ ⊕ ℤi)^n`
    pub fn gaussian(n: usize) -> Self {
        Self::from_periods(&vec![(Complex64::new(1.0, 0.0), Complex64::i()); n]).expect("gaussian lattice")
    }

    pub fn dim(&self) -> usize {
        self.generators[0].len()
    }

    pub fn generators(&self) -> &[Vec<Complex64>] {
        &self.generators
    }

    /// Real coordinates of `x` in the generator basis.
    pub fn coordinates(&self, x: &[Complex64]) -> DVector<f64> {
        &self.basis_inv * realify(x)
    }

    pub fn from_coordinates(&self, y: &DVector<f64>) -> Vec<Complex64> {
        complexify(&(&self.basis * y))
    }

    pub fn contains(&self, x: &[Complex64]) -> bool {
        self.coordinates(x).iter().all(|&c| near_integer(c))
    }

    /// Representative of `x mod Λ` with coordinates in `[0, 1)`.
    pub fn reduce(&self, x: &[Complex64]) -> Vec<Complex64> {
        let y = self.coordinates(x).map(|c| {
            let f = c - c.floor();
            if f > 1.0 - INTEGRALITY_TOLERANCE || f < INTEGRALITY_TOLERANCE {
                0.0
            } else {
                f
            }
        });
        self.from_coordinates(&y)
    }

    /// Lattice generated by `Λ` and the extra vectors, which must have
    /// rational coordinates with denominator dividing `denominator`.
    pub fn extended(&self, extra: &[Vec<Complex64>], denominator: i64) -> Result<Self, CatalogError> {
        let size = self.basis.nrows();
        let mut columns: Vec<DVector<i64>> = (0..size)
            .map(|i| DVector::from_fn(size, |r, _| if r == i { denominator } else { 0 }))
            .collect();
        for v in extra {
            let y = self.coordinates(v) * denominator as f64;
            if !y.iter().all(|&c| near_integer(c)) {
                return Err(CatalogError::LatticeDegenerate);
            }
            columns.push(y.map(|c| c.round() as i64));
        }
        let m = DMatrix::from_columns(&columns);
        let smith = smith_normal_form(&m);
        let p_inv = smith.p.map(|v| v as f64).try_inverse().ok_or(CatalogError::LatticeDegenerate)?;
        let gens = (0..size)
            .map(|i| {
                let y = p_inv.column(i) * (smith.diagonal[i] as f64 / denominator as f64);
                self.from_coordinates(&y.into_owned())
            })
            .collect();
        Self::new(gens)
    }

    /// The integer matrix of `A` in the generator basis, if `A Λ ⊆ Λ`.
    pub fn integer_matrix(&self, a: &DMatrix<Complex64>) -> Option<DMatrix<i64>> {
        let m = &self.basis_inv * realify_matrix(a) * &self.basis;
        m.iter().all(|&v| near_integer(v)).then(|| m.map(|v| v.round() as i64))
    }
}

/// `x ↦ A x + t`
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    pub a: DMatrix<Complex64>,
    pub t: Vec<Complex64>,
}

impl AffineMap {
    pub fn new(a: DMatrix<Complex64>, t: Vec<Complex64>) -> Result<Self, CatalogError> {
        if !a.is_square() || a.nrows() != t.len() {
            return Err(CatalogError::MapShape);
        }
        if a.iter().chain(&t).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(CatalogError::MapShape);
        }
        let sv = a.clone().singular_values();
        if sv.len() > 0 && sv.min() < 1e-12 * sv.max().max(1.0) {
            return Err(CatalogError::SingularMap);
        }
        Ok(Self { a, t })
    }

    pub fn identity(n: usize) -> Self {
        Self { a: DMatrix::identity(n, n), t: vec![ZERO; n] }
    }

    pub fn diagonal(diag: &[Complex64], t: Vec<Complex64>) -> Result<Self, CatalogError> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)), t)
    }

    pub fn dim(&self) -> usize {
        self.t.len()
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let ax = &self.a * DVector::from_column_slice(x);
        ax.iter().zip(&self.t).map(|(u, v)| u + v).collect()
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        AffineMap { a: &self.a * &other.a, t: self.apply(&other.t) }
    }

    pub fn inverse(&self) -> AffineMap {
        let a_inv = self.a.clone().try_inverse().expect("invertible by construction");
        let t = (&a_inv * DVector::from_column_slice(&self.t)).iter().map(|z| -z).collect();
        AffineMap { a: a_inv, t }
    }

    pub fn linear_is_identity(&self) -> bool {
        let n = self.dim();
        (&self.a - DMatrix::<Complex64>::identity(n, n)).iter().all(|z| z.norm() < 1e-12)
    }

    /// Same map on the torus: equal linear parts, translations differing by `Λ`.
    pub fn equivalent(&self, other: &AffineMap, lattice: &Lattice) -> bool {
        let linear = (&self.a - &other.a).iter().all(|z| z.norm() < INTEGRALITY_TOLERANCE);
        let dt: Vec<Complex64> = self.t.iter().zip(&other.t).map(|(u, v)| u - v).collect();
        linear && lattice.contains(&dt)
    }

    fn reduced(mut self, lattice: &Lattice) -> Self {
        self.t = lattice.reduce(&self.t);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupAction {
    pub name: String,
    pub lattice: Lattice,
    /// identity first
    pub elements: Vec<AffineMap>,
}

impl GroupAction {
    /// Elements as given; no closure is attempted.
    pub fn new(name: impl Into<String>, lattice: Lattice, elements: Vec<AffineMap>) -> Result<Self, CatalogError> {
        if elements.iter().any(|g| g.dim() != lattice.dim()) {
            return Err(CatalogError::MapShape);
        }
        Ok(Self { name: name.into(), lattice, elements })
    }

    /// Closure of `generators` modulo the lattice.
    pub fn generate(name: impl Into<String>, lattice: Lattice, generators: &[AffineMap]) -> Result<Self, CatalogError> {
        let n = lattice.dim();
        if generators.iter().any(|g| g.dim() != n) {
            return Err(CatalogError::MapShape);
        }
        let mut elements = vec![AffineMap::identity(n)];
        let mut frontier = 0;
        while frontier < elements.len() {
            let current = elements[frontier].clone();
            frontier += 1;
            for g in generators {
                let next = g.compose(&current).reduced(&lattice);
                if !elements.iter().any(|e| e.equivalent(&next, &lattice)) {
                    if elements.len() >= MAX_ORDER {
                        return Err(CatalogError::GroupTooLarge(MAX_ORDER));
                    }
                    elements.push(next);
                }
            }
        }
        Ok(Self { name: name.into(), lattice, elements })
    }

    /// The same quotient presented with every pure translation absorbed into
    /// the lattice, so that the remaining group acts without translations.
    pub fn without_translations(&self, denominator: i64) -> Result<GroupAction, CatalogError> {
        let shifts: Vec<Vec<Complex64>> = self
            .elements
            .iter()
            .filter(|g| g.linear_is_identity() && !self.is_identity(g))
            .map(|g| g.t.clone())
            .collect();
        if shifts.is_empty() {
            return Ok(self.clone());
        }
        let lattice = self.lattice.extended(&shifts, denominator)?;
        let generators: Vec<AffineMap> = self.elements.iter().skip(1).cloned().collect();
        GroupAction::generate(self.name.clone(), lattice, &generators)
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    fn is_identity(&self, g: &AffineMap) -> bool {
        g.equivalent(&AffineMap::identity(self.dim()), &self.lattice)
    }

    fn position(&self, g: &AffineMap) -> Option<usize> {
        self.elements.iter().position(|e| e.equivalent(g, &self.lattice))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupReport {
    pub closure: bool,
    pub identity: bool,
    pub inverses: bool,
    pub lattice_stable: bool,
    pub finite: bool,
    pub faithful: bool,
}

impl GroupReport {
    pub fn is_valid(&self) -> bool {
        self.closure && self.identity && self.inverses && self.lattice_stable && self.finite && self.faithful
    }
}

pub fn validate_group(action: &GroupAction) -> GroupReport {
    let els = &action.elements;
    let closure = els.iter().all(|g| els.iter().all(|h| action.position(&g.compose(h)).is_some()));
    let identity = els.iter().any(|g| action.is_identity(g));
    let inverses = els.iter().all(|g| action.position(&g.inverse()).is_some());
    let lattice_stable = els.iter().all(|g| action.lattice.integer_matrix(&g.a).is_some());
    let finite = els.iter().all(|g| {
        let mut power = g.clone();
        for _ in 0..MAX_ORDER {
            if action.is_identity(&power) {
                return true;
            }
            power = g.compose(&power).reduced(&action.lattice);
        }
        false
    });
    let faithful = (0..els.len()).all(|i| (i + 1..els.len()).all(|j| !els[i].equivalent(&els[j], &action.lattice)));
    GroupReport { closure, identity, inverses, lattice_stable, finite, faithful }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    /// index into `GroupAction::elements`
    pub element: usize,
    pub point: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Freeness {
    pub free: bool,
    pub witness: Option<FixedPoint>,
}

/// Fixed point of `x ↦ A x + t` on `ℂ^n / Λ`, if one exists.
///
/// In lattice coordinates the condition is `(M - I) y ≡ -τ (mod ℤ^{2n})`.
/// With `P (M - I) Q = D` it is solvable iff `(P(-τ))_i` is an integer for
/// every `i` past the rank of `D`.
pub fn fixed_point(g: &AffineMap, lattice: &Lattice) -> Result<Option<Vec<Complex64>>, CatalogError> {
    let m = lattice.integer_matrix(&g.a).ok_or(CatalogError::LatticeNotPreserved)?;
    let k = &m - DMatrix::<i64>::identity(m.nrows(), m.ncols());
    let smith = smith_normal_form(&k);
    let w = -lattice.coordinates(&g.t);
    let pw = smith.p.map(|v| v as f64) * &w;
    if (smith.rank..pw.len()).any(|i| !near_integer(pw[i])) {
        return Ok(None);
    }
    let y_prime = DVector::from_fn(pw.len(), |i, _| if i < smith.rank { pw[i] / smith.diagonal[i] as f64 } else { 0.0 });
    let y = smith.q.map(|v| v as f64) * y_prime;
    let x = lattice.from_coordinates(&y);
    let moved: Vec<Complex64> = g.apply(&x).iter().zip(&x).map(|(u, v)| u - v).collect();
    if !lattice.contains(&moved) {
        return Err(CatalogError::WitnessFailed);
    }
    Ok(Some(x))
}

pub fn is_free(action: &GroupAction) -> Result<Freeness, CatalogError> {
    for (index, g) in action.elements.iter().enumerate() {
        if action.is_identity(g) {
            continue;
        }
        if let Some(point) = fixed_point(g, &action.lattice)? {
            return Ok(Freeness { free: false, witness: Some(FixedPoint { element: index, point }) });
        }
    }
    Ok(Freeness { free: true, witness: None })
}

/// Some non-identity element is a pure translation.
pub fn contains_translations(action: &GroupAction) -> bool {
    action.elements.iter().any(|g| g.linear_is_identity() && !action.is_identity(g))
}

/// `max |A* A - I|`: the flat metric is invariant iff every linear part is unitary.
pub fn unitarity_defect(action: &GroupAction) -> f64 {
    let n = action.dim();
    action
        .elements
        .iter()
        .map(|g| (g.a.adjoint() * &g.a - DMatrix::<Complex64>::identity(n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max))
        .fold(0.0, f64::max)
}
