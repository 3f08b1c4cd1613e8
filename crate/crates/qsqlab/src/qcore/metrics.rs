//! Trace distance, optimal discrimination and classical distribution distances.

use super::linalg::{c, hermitian_eigen, hermitian_trace_norm, CMatrix, C64};
use super::state::{DensityMatrix, Distribution, Observable, PureState, QuantumState};
use crate::error::{Error, Result};

/// `√(1 − |⟨a|b⟩|²)`.
pub fn trace_distance_pure(a: &PureState, b: &PureState) -> Result<f64> {
    let ov = a.inner(b)?.norm_sqr();
    Ok((1.0 - ov).max(0.0).sqrt())
}

/// `½‖a − b‖₁` from the eigenvalues of the difference.
pub fn trace_distance_mixed(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    Ok(0.5 * hermitian_trace_norm(&(a.matrix() - b.matrix())))
}

/// Pure pairs use the overlap formula, anything else the Schatten-1 norm.
pub fn trace_distance(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    match (a, b) {
        (QuantumState::Pure(x), QuantumState::Pure(y)) => trace_distance_pure(x, y),
        _ => trace_distance_mixed(&a.to_density(), &b.to_density()),
    }
}

/// Projector onto the eigenvectors of `h` with eigenvalue `>= 0` (ties land here).
pub fn positive_part_projector(h: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(h);
    let d = h.nrows();
    let mut p = CMatrix::zeros(d, d);
    for (k, &v) in vals.iter().enumerate() {
        if v >= 0.0 {
            let col = vecs.column(k);
            p += col * col.adjoint();
        }
    }
    p
}

/// Helstrom observable `Π₊ − Π₋` for `a − b` and its value `tr(M(a − b))`.
pub fn helstrom(a: &DensityMatrix, b: &DensityMatrix) -> Result<(Observable, f64)> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    let diff = a.matrix() - b.matrix();
    let (vals, vecs) = hermitian_eigen(&diff);
    let d = diff.nrows();
    let mut m = CMatrix::zeros(d, d);
    let mut value = 0.0;
    for (k, &v) in vals.iter().enumerate() {
        let col = vecs.column(k);
        let proj = col * col.adjoint();
        // Zero eigenvalues go to Π₊; they do not change the value.
        let sign = if v >= 0.0 { 1.0 } else { -1.0 };
        m += proj * c(sign, 0.0);
        value += sign * v;
    }
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    Ok((Observable::new(m)?, value))
}

/// Optimal success probability for telling `psi0` from `psi1` with equal priors.
pub fn distinguish_success_prob(psi0: &PureState, psi1: &PureState) -> Result<f64> {
    Ok(0.5 + 0.5 * trace_distance_pure(psi0, psi1)?)
}

/// Total variation and Hellinger distance, with `hellinger² = 1 − Σ √(pq)`.
pub fn dist_metrics(p: &Distribution, q: &Distribution) -> Result<(f64, f64)> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: q.len() });
    }
    let tv = 0.5 * p.probs().iter().zip(q.probs()).map(|(a, b)| (a - b).abs()).sum::<f64>();
    let bc: f64 = p.probs().iter().zip(q.probs()).map(|(a, b)| (a * b).sqrt()).sum();
    let hellinger = (1.0 - bc).clamp(0.0, 1.0).sqrt();
    Ok((tv.clamp(0.0, 1.0), hellinger))
}
