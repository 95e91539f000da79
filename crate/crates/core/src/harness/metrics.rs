use crate::discretization::DgSpace;
use crate::error::{Error, Result};

/// Absolute and relative L² errors of a candidate solution against a
/// reference, maximized over directions for the fields.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorMetrics {
    pub e_f: f64,
    /// `None` if some reference field has zero norm.
    pub r_f: Option<f64>,
    pub e_rho: f64,
    /// `None` if the reference density has zero norm.
    pub r_rho: Option<f64>,
    /// Smallest reference field norm, kept for the consistency bound.
    pub min_reference_norm: f64,
}

impl ErrorMetrics {
    /// `R_f ≤ E_f / min_j ‖f_F(Ω_j)‖`, up to rounding.
    pub fn is_consistent(&self) -> bool {
        match self.r_f {
            None => true,
            Some(r) => r <= self.e_f / self.min_reference_norm * (1.0 + 1e-12) + f64::MIN_POSITIVE,
        }
    }
}

pub fn error_metrics(
    space: &DgSpace,
    reference_fields: &[Vec<f64>],
    reference_rho: &[f64],
    fields: &[Vec<f64>],
    rho: &[f64],
) -> Result<ErrorMetrics> {
    if reference_fields.len() != fields.len() {
        return Err(Error::LengthMismatch {
            expected: reference_fields.len(),
            got: fields.len(),
        });
    }
    let mut e_f = 0.0f64;
    let mut r_f = Some(0.0f64);
    let mut min_norm = f64::INFINITY;
    for (a, b) in reference_fields.iter().zip(fields) {
        let err = space.l2_distance(a, b)?;
        let norm = space.l2_norm(a)?;
        e_f = e_f.max(err);
        min_norm = min_norm.min(norm);
        r_f = match r_f {
            Some(r) if norm > 0.0 => Some(r.max(err / norm)),
            _ => None,
        };
    }
    let e_rho = space.l2_distance(reference_rho, rho)?;
    let rho_norm = space.l2_norm(reference_rho)?;
    Ok(ErrorMetrics {
        e_f,
        r_f: if reference_fields.is_empty() { None } else { r_f },
        e_rho,
        r_rho: (rho_norm > 0.0).then(|| e_rho / rho_norm),
        min_reference_norm: if min_norm.is_finite() { min_norm } else { 0.0 },
    })
}

/// `‖a − b‖ / ‖b‖`, or `None` if `b` is zero.
pub fn relative_l2(space: &DgSpace, a: &[f64], b: &[f64]) -> Result<Option<f64>> {
    let norm = space.l2_norm(b)?;
    Ok((norm > 0.0).then_some(space.l2_distance(a, b)? / norm))
}
