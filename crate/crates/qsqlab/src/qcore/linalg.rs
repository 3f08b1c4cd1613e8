//! Dense complex helpers shared by the state types.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Absolute tolerance for every "exact" comparison.
pub const TOL: f64 = 1e-9;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square()
        && (0..m.nrows()).all(|i| (i..m.ncols()).all(|j| (m[(i, j)] - m[(j, i)].conj()).norm() <= tol))
}

/// Eigenvalues (ascending) and eigenvectors (as columns) of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let sym = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMatrix::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i)).collect::<Vec<_>>());
    (vals, vecs)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if is_diagonal(m) {
        let mut v: Vec<f64> = m.diagonal().iter().map(|z| z.re).collect();
        v.sort_by(f64::total_cmp);
        return v;
    }
    hermitian_eigen(m).0
}

pub fn is_diagonal(m: &CMatrix) -> bool {
    (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)] == C64::default()))
}

/// Largest absolute eigenvalue, which is the operator norm for Hermitian input.
pub fn hermitian_operator_norm(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Schatten 1-norm of a Hermitian matrix.
pub fn hermitian_trace_norm(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).iter().map(|v| v.abs()).sum()
}

/// `tr(a b)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let mut acc = C64::default();
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// `⟨v|m|v⟩`.
pub fn quadratic_form(m: &CMatrix, v: &CVector) -> C64 {
    v.dotc(&(m * v))
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Unnormalized complex Gaussian vector.
pub fn gaussian_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    CVector::from_fn(dim, |_, _| {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

/// Haar-random unitary via QR of a Ginibre matrix with the phase correction on R's diagonal.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Normalized Walsh-Hadamard transform `H^{⊗m}` applied in place.
pub fn walsh_hadamard(v: &mut [C64]) {
    let n = v.len();
    assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (v[i], v[i + h]);
                v[i] = a + b;
                v[i + h] = a - b;
            }
        }
        h *= 2;
    }
    let s = 1.0 / (n as f64).sqrt();
    v.iter_mut().for_each(|z| *z *= s);
}

/// Draws an index with probability proportional to `weights`.
pub fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    // Rounding left u just past the end: return the last positive weight.
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

/// Number of qubits for a power-of-two dimension.
pub fn qubits_for_dim(dim: usize) -> Option<usize> {
    dim.is_power_of_two().then(|| dim.trailing_zeros() as usize)
}
