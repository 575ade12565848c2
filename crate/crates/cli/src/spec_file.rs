//! The JSON manifold spec file and its validated form.

use kahler_frobenius::catalog::{AffineMap, CatalogEntry, CatalogError, ExpectedClass, GroupAction, Lattice};
use kahler_frobenius::expr::{parse, print, ParseError, PotentialExpr};
use kahler_frobenius::sampling::MAX_DIM;
use kahler_frobenius::Complex64;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Complex numbers travel as `[re, im]`.
pub type Pair = [f64; 2];

#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed spec file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("potential does not parse: {0}")]
    Potential(#[from] ParseError),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

fn invalid(msg: impl Into<String>) -> InputError {
    InputError::Invalid(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub re: Vec<Pair>,
    pub im: Vec<Pair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub generators: Vec<Vec<Pair>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementSpec {
    #[serde(rename = "A")]
    pub a: Vec<Vec<Pair>>,
    pub t: Vec<Pair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub elements: Vec<ElementSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldSpec {
    pub name: String,
    pub dim: usize,
    pub potential: String,
    /// defaults to `[-0.5, 0.5]` for every real and imaginary part
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_domain: Option<DomainSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_class: Option<String>,
}

/// A spec that has passed every check.
#[derive(Debug, Clone)]
pub struct Manifold {
    pub name: String,
    pub dim: usize,
    pub source: String,
    pub potential: PotentialExpr,
    pub domain_re: Vec<(f64, f64)>,
    pub domain_im: Vec<(f64, f64)>,
    pub lattice: Option<Lattice>,
    pub action: Option<GroupAction>,
    pub expected_class: Option<ExpectedClass>,
}

fn complex(p: &Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

fn vector(v: &[Pair], n: usize, what: &str) -> Result<Vec<Complex64>, InputError> {
    if v.len() != n {
        return Err(invalid(format!("{what} has {} entries, expected {n}", v.len())));
    }
    Ok(v.iter().map(complex).collect())
}

fn ranges(v: &[Pair], n: usize, what: &str) -> Result<Vec<(f64, f64)>, InputError> {
    if v.len() != n {
        return Err(invalid(format!("sample_domain.{what} has {} ranges, expected {n}", v.len())));
    }
    v.iter()
        .map(|&[lo, hi]| {
            if lo.is_finite() && hi.is_finite() && lo < hi {
                Ok((lo, hi))
            } else {
                Err(invalid(format!("degenerate sample_domain.{what} range [{lo}, {hi}]")))
            }
        })
        .collect()
}

impl ManifoldSpec {
    pub fn from_json(text: &str) -> Result<Self, InputError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &str) -> Result<Self, InputError> {
        let text = std::fs::read_to_string(path).map_err(|source| InputError::Io { path: path.to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<Manifold, InputError> {
        let n = self.dim;
        if n == 0 || 2 * n > MAX_DIM {
            return Err(invalid(format!("dim must lie in 1..={}", MAX_DIM / 2)));
        }
        let potential = parse(&self.potential, n)?;
        let (domain_re, domain_im) = match &self.sample_domain {
            Some(d) => (ranges(&d.re, n, "re")?, ranges(&d.im, n, "im")?),
            None => (vec![(-0.5, 0.5); n], vec![(-0.5, 0.5); n]),
        };
        let lattice = self
            .lattice
            .as_ref()
            .map(|l| {
                if l.generators.len() != 2 * n {
                    return Err(invalid(format!("lattice needs {} generators, got {}", 2 * n, l.generators.len())));
                }
                let gens = l.generators.iter().map(|g| vector(g, n, "lattice generator")).collect::<Result<_, _>>()?;
                Ok(Lattice::new(gens)?)
            })
            .transpose()?;
        let action = match (&self.group, &lattice) {
            (None, _) => None,
            (Some(_), None) => return Err(invalid("a group needs a lattice")),
            (Some(group), Some(lattice)) => {
                if group.elements.is_empty() {
                    return Err(invalid("group has no elements"));
                }
                let elements = group
                    .elements
                    .iter()
                    .map(|e| {
                        if e.a.len() != n {
                            return Err(invalid(format!("group matrix has {} rows, expected {n}", e.a.len())));
                        }
                        let rows = e.a.iter().map(|r| vector(r, n, "group matrix row")).collect::<Result<Vec<_>, _>>()?;
                        let a = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
                        Ok(AffineMap::new(a, vector(&e.t, n, "translation")?)?)
                    })
                    .collect::<Result<Vec<_>, InputError>>()?;
                Some(GroupAction::new(self.name.clone(), lattice.clone(), elements)?)
            }
        };
        let expected_class = self.expected_class.as_deref().map(str::parse).transpose().map_err(InputError::Invalid)?;
        Ok(Manifold {
            name: self.name.clone(),
            dim: n,
            source: self.potential.clone(),
            potential,
            domain_re,
            domain_im,
            lattice,
            action,
            expected_class,
        })
    }

    /// Spec-file form of a catalog entry; the action is written in its
    /// translation-free presentation.
    pub fn from_entry(entry: &CatalogEntry) -> Self {
        let n = entry.dim;
        let lattice = LatticeSpec { generators: entry.lattice.generators().iter().map(|g| g.iter().copied().map(pair).collect()).collect() };
        let group = entry.action.as_ref().map(|action| GroupSpec {
            elements: action
                .elements
                .iter()
                .map(|g| ElementSpec {
                    a: (0..n).map(|i| (0..n).map(|j| pair(g.a[(i, j)])).collect()).collect(),
                    t: g.t.iter().copied().map(pair).collect(),
                })
                .collect(),
        });
        ManifoldSpec {
            name: entry.name.clone(),
            dim: n,
            potential: print(&entry.potential),
            sample_domain: Some(DomainSpec { re: vec![[-0.5, 0.5]; n], im: vec![[-0.5, 0.5]; n] }),
            lattice: Some(lattice),
            group,
            expected_class: Some(entry.expected_class.as_str().to_string()),
        }
    }
}

impl Manifold {
    /// Built directly from the catalog, without a round trip through text.
    pub fn from_entry(entry: &CatalogEntry) -> Self {
        let n = entry.dim;
        Manifold {
            name: entry.name.clone(),
            dim: n,
            source: print(&entry.potential),
            potential: entry.potential.clone(),
            domain_re: vec![(-0.5, 0.5); n],
            domain_im: vec![(-0.5, 0.5); n],
            lattice: Some(entry.lattice.clone()),
            action: entry.action.clone(),
            expected_class: Some(entry.expected_class),
        }
    }
}
