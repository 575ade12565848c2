//! Flat tori, their free quotients, and the classification tables of
//! compact Kähler–Frobenius surfaces and threefolds.

mod group;
mod smith;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::expr::PotentialExpr;

pub use group::{
    contains_translations, fixed_point, is_free, unitarity_defect, validate_group, AffineMap, FixedPoint, Freeness,
    GroupAction, GroupReport, Lattice, INTEGRALITY_TOLERANCE, MAX_ORDER,
};
pub use smith::{smith_normal_form, Smith};

/// Number of compact Kähler–Frobenius manifolds in complex dimension 3.
pub const THREEFOLD_COUNT: usize = 174;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("lattice needs 2n generators of length n (got {count} of length {dim})")]
    LatticeShape { count: usize, dim: usize },
    #[error("lattice generators are not linearly independent over the reals")]
    LatticeDegenerate,
    #[error("affine map has inconsistent or non-finite data")]
    MapShape,
    #[error("linear part is not invertible")]
    SingularMap,
    #[error("linear part does not preserve the lattice")]
    LatticeNotPreserved,
    #[error("group closure exceeded {0} elements")]
    GroupTooLarge(usize),
    #[error("fixed-point witness failed verification")]
    WitnessFailed,
    #[error("unknown catalog entry {0:?}")]
    UnknownEntry(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExpectedClass {
    Torus,
    Hyperelliptic,
    NegativeControl,
}

impl ExpectedClass {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Torus => "torus",
            Self::Hyperelliptic => "hyperelliptic",
            Self::NegativeControl => "negative-control",
        }
    }
}

impl fmt::Display for ExpectedClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExpectedClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "torus" => Ok(Self::Torus),
            "hyperelliptic" => Ok(Self::Hyperelliptic),
            "negative-control" => Ok(Self::NegativeControl),
            other => Err(format!("unknown class {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub name: String,
    pub dim: usize,
    pub potential: PotentialExpr,
    pub lattice: Lattice,
    /// acting without translations on `lattice`
    pub action: Option<GroupAction>,
    /// the group as listed for the family, acting on `E × F`
    pub product_action: Option<GroupAction>,
    pub expected_class: ExpectedClass,
    /// `b_0, ..., b_{2n}`
    pub betti: Vec<u32>,
    pub holonomy: String,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rho() -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI / 3.0)
}

fn binomial(n: u32, k: u32) -> u32 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// `ℂ^n / (ℤ ⊕ ℤi)^n` with the flat potential.
pub fn torus(dim: usize) -> CatalogEntry {
    let name = if dim == 2 { "complex-torus".to_string() } else { format!("complex-torus-{dim}") };
    CatalogEntry {
        name,
        dim,
        potential: PotentialExpr::flat(dim),
        lattice: Lattice::gaussian(dim),
        action: None,
        product_action: None,
        expected_class: ExpectedClass::Torus,
        betti: (0..=2 * dim as u32).map(|k| binomial(2 * dim as u32, k)).collect(),
        holonomy: "1".into(),
    }
}

fn hyperelliptic(label: &str, eisenstein: bool, generators: &[(Complex64, Complex64, Complex64)]) -> CatalogEntry {
    let second = if eisenstein { rho() } else { Complex64::i() };
    let lattice = Lattice::from_periods(&[(c(1.0, 0.0), second), (c(1.0, 0.0), second)]).expect("product lattice");
    // (z1, z2) ↦ (z1 + e, r z2 + f)
    let maps: Vec<AffineMap> = generators
        .iter()
        .map(|&(e, r, f)| AffineMap::diagonal(&[c(1.0, 0.0), r], vec![e, f]).expect("unit diagonal"))
        .collect();
    let name = format!("hyperelliptic-{label}");
    let product = GroupAction::generate(name.clone(), lattice, &maps).expect("finite group");
    // translation parts have denominators dividing 12 in the period basis
    let action = product.without_translations(12).expect("rational translations");
    CatalogEntry {
        name,
        dim: 2,
        potential: PotentialExpr::flat(2),
        lattice: action.lattice.clone(),
        action: Some(action),
        product_action: Some(product),
        expected_class: ExpectedClass::Hyperelliptic,
        betti: vec![1, 2, 2, 2, 1],
        holonomy: label.replace('x', "⊕").replace('Z', "ℤ"),
    }
}

/// The complex torus and the seven hyperelliptic families, each realised
/// on `E × F` with `E`, `F` sharing the lattice the family needs.
pub fn hyperelliptic_catalog() -> Vec<CatalogEntry> {
    let zero = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let rho = rho();
    vec![
        torus(2),
        hyperelliptic("Z2", false, &[(c(0.5, 0.0), -one, zero)]),
        hyperelliptic("Z2xZ2", false, &[(c(0.5, 0.0), -one, zero), (c(0.0, 0.5), one, c(0.5, 0.0))]),
        hyperelliptic("Z4", false, &[(c(0.25, 0.0), Complex64::i(), zero)]),
        hyperelliptic("Z4xZ2", false, &[(c(0.25, 0.0), Complex64::i(), zero), (c(0.0, 0.5), one, c(0.5, 0.5))]),
        hyperelliptic("Z3", true, &[(c(1.0 / 3.0, 0.0), rho, zero)]),
        hyperelliptic("Z3xZ3", true, &[(c(1.0 / 3.0, 0.0), rho, zero), (rho / 3.0, one, (one - rho) / 3.0)]),
        hyperelliptic("Z6", true, &[(c(1.0 / 6.0, 0.0), -rho, zero)]),
    ]
}

pub fn find_entry(name: &str) -> Result<CatalogEntry, CatalogError> {
    hyperelliptic_catalog()
        .into_iter()
        .chain((1..=3).filter(|&d| d != 2).map(torus))
        .find(|e| e.name == name)
        .ok_or_else(|| CatalogError::UnknownEntry(name.to_string()))
}

/// Unitarity defect of the entry's action; zero without one.
pub fn isometry_check(entry: &CatalogEntry) -> f64 {
    entry.action.as_ref().map_or(0.0, unitarity_defect)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfVerdict {
    /// `0 < |a| ≤ |b| < 1` and `(a - b^m) c = 0`
    pub valid: bool,
    /// `c (m - 1) = 0`
    pub affine: bool,
    pub frobenius: bool,
    pub kahler: bool,
}

/// Primary Hopf surface of the contraction `(x, y) ↦ (a x + c y^m, b y)`.
pub fn hopf_affine_condition(a: Complex64, b: Complex64, c: Complex64, m: u32) -> HopfVerdict {
    let (na, nb) = (a.norm(), b.norm());
    let resonance = (a - b.powu(m)) * c;
    let valid = m >= 1 && na > 0.0 && na <= nb && nb < 1.0 && resonance.norm() < 1e-12;
    let affine = c.norm() == 0.0 || m == 1;
    HopfVerdict { valid, affine, frobenius: false, kahler: false }
}

/// One row of the surface or threefold classification tables that is kept
/// as data only.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub name: &'static str,
    pub kodaira_class: &'static str,
    pub betti: &'static str,
    pub frobenius: bool,
    pub affine_structure: bool,
    pub kahler: bool,
    pub expected_class: Option<ExpectedClass>,
}

pub fn negative_controls() -> Vec<TableRow> {
    let row = |name, kodaira_class, betti, affine_structure, kahler| TableRow {
        name,
        kodaira_class,
        betti,
        frobenius: false,
        affine_structure,
        kahler,
        expected_class: Some(ExpectedClass::NegativeControl),
    };
    vec![
        row("hopf-VII0", "VII0", "b1=1, b2=0", true, false),
        row("inoue-VII0", "VII0", "b1=1, b2=0", true, false),
        row("elliptic-VIII0", "VIII0", "odd b1", true, false),
        row("ruled", "", "b1=2g, b2=2", false, true),
        row("k3", "", "b1=0, b2=22", false, true),
    ]
}

/// Threefold sources without constructive generators.
pub fn threefold_rows() -> Vec<TableRow> {
    let row = |name, betti| TableRow {
        name,
        kodaira_class: "",
        betti,
        frobenius: true,
        affine_structure: true,
        kahler: true,
        expected_class: None,
    };
    vec![row("hantzsche-wendt", "b1=0"), row("flat-calabi-yau", "b1=b3=b5=0")]
}

/// Representative data of the primary Hopf control.
pub const HOPF_CONTROL: (f64, f64, f64, u32) = (0.5, 0.5, 0.0, 3);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassificationCounts {
    pub surfaces: usize,
    pub threefolds: usize,
}

pub fn classification_counts() -> ClassificationCounts {
    ClassificationCounts { surfaces: hyperelliptic_catalog().len(), threefolds: THREEFOLD_COUNT }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eight_surfaces() {
        let cat = hyperelliptic_catalog();
        assert_eq!(cat.len(), 8);
        assert_eq!(classification_counts(), ClassificationCounts { surfaces: 8, threefolds: 174 });
        let holonomy: Vec<&str> = cat.iter().map(|e| e.holonomy.as_str()).collect();
        assert_eq!(holonomy, ["1", "ℤ2", "ℤ2⊕ℤ2", "ℤ4", "ℤ4⊕ℤ2", "ℤ3", "ℤ3⊕ℤ3", "ℤ6"]);
    }

    #[test]
    fn orders_match_names() {
        let cat = hyperelliptic_catalog();
        let orders: Vec<usize> = cat.iter().skip(1).map(|e| e.product_action.as_ref().unwrap().order()).collect();
        assert_eq!(orders, [2, 4, 4, 8, 3, 9, 6]);
        // the translation subgroup of the split families is absorbed into the lattice
        let reduced: Vec<usize> = cat.iter().skip(1).map(|e| e.action.as_ref().unwrap().order()).collect();
        assert_eq!(reduced, [2, 2, 4, 4, 3, 3, 6]);
    }

    #[test]
    fn every_family_is_a_free_quotient_without_translations() {
        for entry in hyperelliptic_catalog().iter().skip(1) {
            let action = entry.action.as_ref().unwrap();
            assert!(validate_group(action).is_valid(), "{}", entry.name);
            assert!(is_free(action).unwrap().free, "{}", entry.name);
            assert!(!contains_translations(action), "{}", entry.name);
            assert!(isometry_check(entry) < 1e-12, "{}", entry.name);
            let product = entry.product_action.as_ref().unwrap();
            assert!(validate_group(product).is_valid(), "{}", entry.name);
            assert!(is_free(product).unwrap().free, "{}", entry.name);
        }
    }

    #[test]
    fn torus_entries() {
        let t = torus(2);
        assert_eq!(t.betti, vec![1, 4, 6, 4, 1]);
        assert_eq!(isometry_check(&t), 0.0);
        assert_eq!(find_entry("complex-torus-3").unwrap().dim, 3);
        assert!(find_entry("hyperelliptic-Z4").is_ok());
        assert!(matches!(find_entry("nope"), Err(CatalogError::UnknownEntry(_))));
    }

    #[test]
    fn hopf_rows() {
        let (a, b, cc, m) = HOPF_CONTROL;
        let v = hopf_affine_condition(c(a, 0.0), c(b, 0.0), c(cc, 0.0), m);
        assert_eq!(v, HopfVerdict { valid: true, affine: true, frobenius: false, kahler: false });
        assert!(!hopf_affine_condition(c(0.5, 0.0), c(0.7, 0.0), c(1.0, 0.0), 1).valid);
        let v = hopf_affine_condition(c(0.3, 0.0), c(0.6, 0.0), c(1.0, 0.0), 2);
        assert!(!v.valid);
        // resonant and polynomial: valid but no affine structure
        let v = hopf_affine_condition(c(0.36, 0.0), c(0.6, 0.0), c(1.0, 0.0), 2);
        assert!(v.valid && !v.affine);
    }

    #[test]
    fn control_flags() {
        for row in negative_controls() {
            assert!(!row.frobenius);
        }
        let k3 = negative_controls().into_iter().find(|r| r.name == "k3").unwrap();
        assert!(!k3.affine_structure && k3.kahler);
        assert_eq!(threefold_rows().len(), 2);
    }
}
