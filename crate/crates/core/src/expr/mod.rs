//! Real-valued potentials written in the chart variables `z1..zn` and their
//! conjugates `zbar1..zbarn`.
//!
//! Expressions are parsed from a small closed grammar (see [`parse`]) and can
//! be folded over any [`Algebra`]: plain complex numbers for point evaluation,
//! or truncated jets for differentiation.

mod parser;
mod printer;

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

pub use parser::{parse, ParseError, ParseErrorKind};
pub use printer::print;

/// Arguments of `log` with modulus below this value are rejected.
pub const LOG_SINGULARITY_FLOOR: f64 = 1e-300;

/// Byte range into the parsed source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

/// Expression tree. Variable indices are zero-based internally and printed
/// one-based (`Var(0)` is `z1`).
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var(usize),
    ConjVar(usize),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Neg(Box<Node>),
    Pow(Box<Node>, u32),
    Exp(Box<Node>),
    Log(Box<Node>),
    Re(Box<Node>),
    Im(Box<Node>),
}

impl Node {
    /// Largest variable index referenced, if any.
    pub fn max_index(&self) -> Option<usize> {
        match self {
            Node::Const(_) => None,
            Node::Var(i) | Node::ConjVar(i) => Some(*i),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) => {
                match (a.max_index(), b.max_index()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
            Node::Neg(a)
            | Node::Pow(a, _)
            | Node::Exp(a)
            | Node::Log(a)
            | Node::Re(a)
            | Node::Im(a) => a.max_index(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Const(_) | Node::Var(_) | Node::ConjVar(_) => 1,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) => 1 + a.depth().max(b.depth()),
            Node::Neg(a)
            | Node::Pow(a, _)
            | Node::Exp(a)
            | Node::Log(a)
            | Node::Re(a)
            | Node::Im(a) => 1 + a.depth(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("variable index {index} out of range for chart dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("chart dimension must be at least 1")]
    ZeroDimension,
    #[error("point has {got} coordinates, expected {expected}")]
    PointDimension { expected: usize, got: usize },
}

/// Failure while evaluating an expression over some algebra.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("log argument has modulus {modulus:e}, below the singularity floor")]
    LogSingularity { modulus: f64 },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// A potential together with the chart dimension it lives on.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialExpr {
    root: Node,
    dim: usize,
}

impl PotentialExpr {
    pub fn new(root: Node, dim: usize) -> Result<Self, ExprError> {
        if dim == 0 {
            return Err(ExprError::ZeroDimension);
        }
        if let Some(index) = root.max_index() {
            if index >= dim {
                return Err(ExprError::IndexOutOfRange { index: index + 1, dim });
            }
        }
        Ok(Self { root, dim })
    }

    /// `Σ_a z_a zbar_a`, the flat potential on `C^dim`.
    pub fn flat(dim: usize) -> Self {
        assert!(dim >= 1, "flat potential needs dim >= 1");
        let mut terms = (0..dim).map(|a| {
            Node::Mul(Box::new(Node::Var(a)), Box::new(Node::ConjVar(a)))
        });
        let first = terms.next().unwrap();
        let root = terms.fold(first, |acc, t| Node::Add(Box::new(acc), Box::new(t)));
        Self { root, dim }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Fold the tree bottom-up through `alg`.
    pub fn fold<A: Algebra>(&self, alg: &A) -> Result<A::Value, EvalError> {
        fold_node(&self.root, alg)
    }

    /// Value at `point`, with `zbar_a` bound to the conjugate of `point[a]`.
    pub fn eval_point(&self, point: &[Complex64]) -> Result<Complex64, EvalError> {
        if point.len() != self.dim {
            return Err(ExprError::PointDimension { expected: self.dim, got: point.len() }.into());
        }
        self.fold(&PointAlgebra { point })
    }

    /// Largest `|Im Φ|` over the given points.
    pub fn realness_defect<'a, I>(&self, points: I) -> Result<f64, EvalError>
    where
        I: IntoIterator<Item = &'a [Complex64]>,
    {
        let mut worst = 0.0f64;
        for p in points {
            worst = worst.max(self.eval_point(p)?.im.abs());
        }
        Ok(worst)
    }
}

impl fmt::Display for PotentialExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

/// Target of an expression fold.
pub trait Algebra {
    type Value: Clone;

    fn constant(&self, c: f64) -> Self::Value;
    fn var(&self, index: usize) -> Self::Value;
    fn conj_var(&self, index: usize) -> Self::Value;
    fn add(&self, a: Self::Value, b: Self::Value) -> Self::Value;
    fn sub(&self, a: Self::Value, b: Self::Value) -> Self::Value;
    fn mul(&self, a: Self::Value, b: Self::Value) -> Self::Value;
    fn neg(&self, a: Self::Value) -> Self::Value;
    fn powi(&self, a: Self::Value, k: u32) -> Self::Value;
    fn exp(&self, a: Self::Value) -> Self::Value;
    fn log(&self, a: Self::Value) -> Result<Self::Value, EvalError>;
    fn re(&self, a: Self::Value) -> Self::Value;
    fn im(&self, a: Self::Value) -> Self::Value;
}

fn fold_node<A: Algebra>(node: &Node, alg: &A) -> Result<A::Value, EvalError> {
    Ok(match node {
        Node::Const(c) => alg.constant(*c),
        Node::Var(i) => alg.var(*i),
        Node::ConjVar(i) => alg.conj_var(*i),
        Node::Add(a, b) => alg.add(fold_node(a, alg)?, fold_node(b, alg)?),
        Node::Sub(a, b) => alg.sub(fold_node(a, alg)?, fold_node(b, alg)?),
        Node::Mul(a, b) => alg.mul(fold_node(a, alg)?, fold_node(b, alg)?),
        Node::Neg(a) => alg.neg(fold_node(a, alg)?),
        Node::Pow(a, k) => alg.powi(fold_node(a, alg)?, *k),
        Node::Exp(a) => alg.exp(fold_node(a, alg)?),
        Node::Log(a) => alg.log(fold_node(a, alg)?)?,
        Node::Re(a) => alg.re(fold_node(a, alg)?),
        Node::Im(a) => alg.im(fold_node(a, alg)?),
    })
}

struct PointAlgebra<'a> {
    point: &'a [Complex64],
}

impl Algebra for PointAlgebra<'_> {
    type Value = Complex64;

    fn constant(&self, c: f64) -> Complex64 {
        Complex64::new(c, 0.0)
    }
    fn var(&self, index: usize) -> Complex64 {
        self.point[index]
    }
    fn conj_var(&self, index: usize) -> Complex64 {
        self.point[index].conj()
    }
    fn add(&self, a: Complex64, b: Complex64) -> Complex64 {
        a + b
    }
    fn sub(&self, a: Complex64, b: Complex64) -> Complex64 {
        a - b
    }
    fn mul(&self, a: Complex64, b: Complex64) -> Complex64 {
        a * b
    }
    fn neg(&self, a: Complex64) -> Complex64 {
        -a
    }
    fn powi(&self, a: Complex64, k: u32) -> Complex64 {
        a.powu(k)
    }
    fn exp(&self, a: Complex64) -> Complex64 {
        a.exp()
    }
    fn log(&self, a: Complex64) -> Result<Complex64, EvalError> {
        let modulus = a.norm();
        if modulus < LOG_SINGULARITY_FLOOR {
            return Err(EvalError::LogSingularity { modulus });
        }
        Ok(a.ln())
    }
    fn re(&self, a: Complex64) -> Complex64 {
        Complex64::new(a.re, 0.0)
    }
    fn im(&self, a: Complex64) -> Complex64 {
        Complex64::new(a.im, 0.0)
    }
}
