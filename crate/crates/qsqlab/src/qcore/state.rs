//! Pure states, density matrices, observables and outcome distributions.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::linalg::{
    c, gaussian_vector, hermitian_eigen, hermitian_eigenvalues, hermitian_operator_norm,
    is_hermitian, qubits_for_dim, quadratic_form, trace_product, CMatrix, CVector, C64, TOL,
};
use crate::error::{Error, Result};

fn dim_qubits(dim: usize) -> Result<usize> {
    qubits_for_dim(dim)
        .ok_or_else(|| Error::InvalidArgument(format!("dimension {dim} is not a power of two")))
}

fn check_same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, got: b });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amps: CVector,
    qubits: usize,
}

impl PureState {
    /// Wraps amplitudes that are already normalized (within 1e-9).
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        let qubits = dim_qubits(amps.len())?;
        let amps = CVector::from_vec(amps);
        let norm_sq = amps.norm_squared();
        if (norm_sq - 1.0).abs() > TOL {
            return Err(Error::InvalidState(format!("squared norm {norm_sq} is not 1")));
        }
        Ok(PureState { amps, qubits })
    }

    pub fn from_unnormalized(amps: Vec<C64>) -> Result<Self> {
        let v = CVector::from_vec(amps);
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        PureState::new((v / c(norm, 0.0)).as_slice().to_vec())
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        PureState::new(amps.iter().map(|&a| c(a, 0.0)).collect())
    }

    pub fn basis(qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << qubits;
        if index >= dim {
            return Err(Error::InvalidArgument(format!("basis index {index} >= {dim}")));
        }
        let mut v = vec![C64::default(); dim];
        v[index] = c(1.0, 0.0);
        PureState::new(v)
    }

    /// `|+⟩^{⊗m}`.
    pub fn uniform(qubits: usize) -> Self {
        let dim = 1usize << qubits;
        let a = 1.0 / (dim as f64).sqrt();
        PureState { amps: CVector::from_element(dim, c(a, 0.0)), qubits }
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amps[index]
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// `self ⊗ other`; `other` occupies the least significant index bits.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let amps = self.amps.kronecker(&other.amps);
        PureState { amps, qubits: self.qubits + other.qubits }
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix { mat: &self.amps * self.amps.adjoint(), qubits: self.qubits }
    }

    pub fn expectation(&self, m: &Observable) -> Result<f64> {
        check_same_dim(self.dim(), m.dim())?;
        Ok(quadratic_form(&m.mat, &self.amps).re)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
    qubits: usize,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity (all within 1e-9).
    pub fn new(mat: CMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::InvalidState("density matrix must be square".into()));
        }
        let qubits = dim_qubits(mat.nrows())?;
        if !is_hermitian(&mat, TOL) {
            return Err(Error::InvalidState("not Hermitian".into()));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > TOL || tr.im.abs() > TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = hermitian_eigenvalues(&mat).first().copied().unwrap_or(0.0);
        if min < -TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min}")));
        }
        Ok(DensityMatrix { mat, qubits })
    }

    pub fn maximally_mixed(qubits: usize) -> Self {
        let dim = 1usize << qubits;
        DensityMatrix { mat: CMatrix::identity(dim, dim) * c(1.0 / dim as f64, 0.0), qubits }
    }

    /// Weighted mixture `Σ w_i |ψ_i⟩⟨ψ_i|`.
    pub fn mixture(states: &[PureState], weights: &[f64]) -> Result<Self> {
        let first = states.first().ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?;
        if states.len() != weights.len() {
            return Err(Error::DimensionMismatch { expected: states.len(), got: weights.len() });
        }
        let mut mat = CMatrix::zeros(first.dim(), first.dim());
        for (s, &w) in states.iter().zip(weights) {
            check_same_dim(first.dim(), s.dim())?;
            mat += s.to_density().mat * c(w, 0.0);
        }
        DensityMatrix::new(mat)
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    /// Eigenvalues ascending with eigenvectors as columns.
    pub fn eigen(&self) -> (Vec<f64>, CMatrix) {
        hermitian_eigen(&self.mat)
    }

    pub fn purity(&self) -> f64 {
        trace_product(&self.mat, &self.mat).re
    }

    pub fn expectation(&self, m: &Observable) -> Result<f64> {
        check_same_dim(self.dim(), m.dim())?;
        Ok(trace_product(&m.mat, &self.mat).re)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix { mat: self.mat.kronecker(&other.mat), qubits: self.qubits + other.qubits }
    }

    /// Reduced state on `keep` (qubit positions, 0 = most significant), in the given order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let m = self.qubits;
        if keep.iter().any(|&q| q >= m) {
            return Err(Error::InvalidArgument("qubit out of range".into()));
        }
        let traced: Vec<usize> = (0..m).filter(|q| !keep.contains(q)).collect();
        let compose = |kept: usize, rest: usize| {
            let mut idx = 0usize;
            for (pos, &q) in keep.iter().enumerate() {
                idx |= ((kept >> (keep.len() - 1 - pos)) & 1) << (m - 1 - q);
            }
            for (pos, &q) in traced.iter().enumerate() {
                idx |= ((rest >> (traced.len() - 1 - pos)) & 1) << (m - 1 - q);
            }
            idx
        };
        let dk = 1usize << keep.len();
        let dr = 1usize << traced.len();
        let mut out = CMatrix::zeros(dk, dk);
        for a in 0..dk {
            for b in 0..dk {
                let mut acc = C64::default();
                for r in 0..dr {
                    acc += self.mat[(compose(a, r), compose(b, r))];
                }
                out[(a, b)] = acc;
            }
        }
        DensityMatrix::new(out)
    }
}

/// Hermitian matrix used as a query payload. The unit operator-norm bound is
/// checked by [`Observable::bounded`] and enforced at query time by the oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    mat: CMatrix,
    qubits: usize,
}

impl Observable {
    pub fn new(mat: CMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::InvalidObservable("must be square".into()));
        }
        let qubits = dim_qubits(mat.nrows())?;
        if !is_hermitian(&mat, TOL) {
            return Err(Error::InvalidObservable("not Hermitian".into()));
        }
        Ok(Observable { mat, qubits })
    }

    /// Like [`Observable::new`] but also requires operator norm at most 1.
    pub fn bounded(mat: CMatrix) -> Result<Self> {
        let o = Observable::new(mat)?;
        let norm = o.operator_norm();
        if norm > 1.0 + TOL {
            return Err(Error::NormViolation { norm });
        }
        Ok(o)
    }

    pub fn identity(qubits: usize) -> Self {
        let d = 1usize << qubits;
        Observable { mat: CMatrix::identity(d, d), qubits }
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let qubits = dim_qubits(values.len())?;
        let mat = CMatrix::from_diagonal(&CVector::from_iterator(
            values.len(),
            values.iter().map(|&v| c(v, 0.0)),
        ));
        Ok(Observable { mat, qubits })
    }

    pub fn projector(psi: &PureState) -> Self {
        Observable { mat: psi.to_density().mat, qubits: psi.num_qubits() }
    }

    /// Random observable `U diag(±1) U†` with a balanced spectrum and Haar `U`.
    pub fn haar_reflection<R: Rng + ?Sized>(qubits: usize, rng: &mut R) -> Self {
        let d = 1usize << qubits;
        let u = super::linalg::haar_unitary(d, rng);
        let signs = CVector::from_fn(d, |i, _| c(if i < d / 2 { 1.0 } else { -1.0 }, 0.0));
        let mut mat = &u * CMatrix::from_diagonal(&signs) * u.adjoint();
        // Exact Hermitian symmetrization keeps the check tolerance meaningful.
        mat = (&mat + mat.adjoint()) * c(0.5, 0.0);
        Observable { mat, qubits }
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn operator_norm(&self) -> f64 {
        hermitian_operator_norm(&self.mat)
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn tensor(&self, other: &Observable) -> Observable {
        Observable { mat: self.mat.kronecker(&other.mat), qubits: self.qubits + other.qubits }
    }

    /// Scales by a real factor.
    pub fn scaled(&self, s: f64) -> Observable {
        Observable { mat: &self.mat * c(s, 0.0), qubits: self.qubits }
    }
}

/// Anything with a real expectation value on pure states; lets Pauli strings skip dense matrices.
pub trait Expectation: Sync {
    fn num_qubits(&self) -> usize;
    fn expectation_pure(&self, psi: &PureState) -> f64;
    fn trace(&self) -> f64;
    fn trace_of_square(&self) -> f64;
}

impl Expectation for Observable {
    fn num_qubits(&self) -> usize {
        self.qubits
    }

    fn expectation_pure(&self, psi: &PureState) -> f64 {
        quadratic_form(&self.mat, psi.amplitudes()).re
    }

    fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    fn trace_of_square(&self) -> f64 {
        trace_product(&self.mat, &self.mat).re
    }
}

/// A pure or mixed state.
#[derive(Clone, Debug, PartialEq)]
pub enum QuantumState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl QuantumState {
    pub fn dim(&self) -> usize {
        match self {
            QuantumState::Pure(p) => p.dim(),
            QuantumState::Mixed(d) => d.dim(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        match self {
            QuantumState::Pure(p) => p.num_qubits(),
            QuantumState::Mixed(d) => d.num_qubits(),
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        match self {
            QuantumState::Pure(p) => p.to_density(),
            QuantumState::Mixed(d) => d.clone(),
        }
    }

    pub fn expectation(&self, m: &Observable) -> Result<f64> {
        match self {
            QuantumState::Pure(p) => p.expectation(m),
            QuantumState::Mixed(d) => d.expectation(m),
        }
    }

    pub fn as_pure(&self) -> Option<&PureState> {
        match self {
            QuantumState::Pure(p) => Some(p),
            QuantumState::Mixed(_) => None,
        }
    }
}

impl From<PureState> for QuantumState {
    fn from(p: PureState) -> Self {
        QuantumState::Pure(p)
    }
}

impl From<DensityMatrix> for QuantumState {
    fn from(d: DensityMatrix) -> Self {
        QuantumState::Mixed(d)
    }
}

/// Probability vector over outcomes `0..len`, usually bit strings by index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidArgument("empty distribution".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0)) {
            return Err(Error::InvalidArgument(format!("negative probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > TOL {
            return Err(Error::InvalidArgument(format!("probabilities sum to {total}")));
        }
        Ok(Distribution { probs })
    }

    pub fn uniform(len: usize) -> Self {
        Distribution { probs: vec![1.0 / len as f64; len] }
    }

    /// Empirical distribution of `samples` over `len` outcomes.
    pub fn empirical(samples: &[usize], len: usize) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("no samples".into()));
        }
        let mut counts = vec![0.0; len];
        for &s in samples {
            *counts
                .get_mut(s)
                .ok_or_else(|| Error::InvalidArgument(format!("sample {s} out of range")))? += 1.0;
        }
        let n = samples.len() as f64;
        Ok(Distribution { probs: counts.into_iter().map(|c| c / n).collect() })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, x: usize) -> f64 {
        self.probs[x]
    }

    /// The state `Σ_x √p(x) |x⟩`; needs a power-of-two outcome count.
    pub fn coherent_encoding(&self) -> Result<PureState> {
        PureState::from_real(&self.probs.iter().map(|p| p.sqrt()).collect::<Vec<_>>())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        super::linalg::sample_index(&self.probs, rng)
    }
}

/// Haar-random pure state on `m` qubits: a normalized complex Gaussian vector.
pub fn haar_state<R: Rng + ?Sized>(m: usize, rng: &mut R) -> PureState {
    let v = gaussian_vector(1usize << m, rng);
    let norm = v.norm();
    PureState { amps: v / c(norm, 0.0), qubits: m }
}

/// `|amplitude(x)|²` for every basis string.
pub fn born_distribution(psi: &PureState) -> Distribution {
    Distribution { probs: psi.probabilities() }
}

#[cfg(test)]
pub(crate) fn cmatrix_from_real(d: usize, f: impl Fn(usize, usize) -> f64) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| c(f(i, j), 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn born_distribution_squares_amplitudes() {
        let psi = PureState::from_real(&[0.5, 0.0, 0.0, 0.75f64.sqrt()]).unwrap();
        let p = born_distribution(&psi);
        assert!((p.prob(0) - 0.25).abs() < 1e-12);
        assert!((p.prob(3) - 0.75).abs() < 1e-12);
        let u = born_distribution(&PureState::uniform(2));
        assert!(u.probs().iter().all(|&q| (q - 0.25).abs() < 1e-12));
    }

    #[test]
    fn density_validation_rejects_bad_input() {
        let bad = cmatrix_from_real(2, |i, j| if i == j { 0.7 } else { 0.0 });
        assert!(DensityMatrix::new(bad).is_err());
        let neg = cmatrix_from_real(2, |i, j| match (i, j) {
            (0, 0) => 1.2,
            (1, 1) => -0.2,
            _ => 0.0,
        });
        assert!(DensityMatrix::new(neg).is_err());
    }

    #[test]
    fn partial_trace_of_product_state() {
        let a = PureState::from_real(&[0.6, 0.8]).unwrap();
        let b = PureState::uniform(1);
        let ab = a.tensor(&b).to_density();
        let ra = ab.partial_trace(&[0]).unwrap();
        assert!((ra.matrix() - a.to_density().matrix()).norm() < 1e-12);
        let rb = ab.partial_trace(&[1]).unwrap();
        assert!((rb.matrix() - b.to_density().matrix()).norm() < 1e-12);
    }

    #[test]
    fn bounded_observable_rejects_large_norm() {
        let m = cmatrix_from_real(2, |i, j| if i == j { 1.5 } else { 0.0 });
        assert!(matches!(Observable::bounded(m), Err(Error::NormViolation { .. })));
    }
}
