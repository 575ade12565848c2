//! Affine holomorphic vector fields: all second derivatives vanish in the chart.

use num_complex::Complex64;

use crate::expr::{EvalError, PotentialExpr};
use crate::wirtinger::jet_eval;

pub const AFFINE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineCheck {
    pub is_affine: bool,
    /// largest second derivative of any component over all points
    pub residual: f64,
}

/// Components `E^m(z, zbar)` of a vector field, checked for vanishing
/// second derivatives of every type at each point.
pub fn affine_vector_field_check(field: &[PotentialExpr], points: &[Vec<Complex64>]) -> Result<AffineCheck, EvalError> {
    let mut residual = 0.0f64;
    for component in field {
        let n = component.dim();
        for p in points {
            let jet = jet_eval(component, p)?;
            for i in 0..n {
                for j in 0..n {
                    residual = residual
                        .max(jet.d(&[i, j], &[]).norm())
                        .max(jet.d(&[i], &[j]).norm())
                        .max(jet.d(&[], &[i, j]).norm());
                }
            }
        }
    }
    Ok(AffineCheck { is_affine: residual < AFFINE_TOLERANCE, residual })
}
