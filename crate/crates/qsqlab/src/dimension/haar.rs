//! Haar moments, design distances and concentration of `tr(Mψ)` for Haar states.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::ensembles::Ensemble;
use crate::error::{Error, Result};
use crate::qcore::linalg::{c, hermitian_trace_norm, CMatrix};
use crate::qcore::{haar_state, DensityMatrix, Expectation};
use crate::rng::stream_rng;

/// `tr(M²)/(4^m + 2^m) − tr(M)²/(2^m(4^m + 2^m))`.
pub fn haar_variance_exact(m: &dyn Expectation) -> f64 {
    let d = (1u64 << m.num_qubits()) as f64;
    let norm = d * d + d;
    m.trace_of_square() / norm - m.trace().powi(2) / (d * norm)
}

/// `(I + SWAP)/(4^m + 2^m)` on two `m`-qubit registers.
pub fn haar_second_moment(m: usize) -> CMatrix {
    let d = 1usize << m;
    let norm = (d * d + d) as f64;
    CMatrix::from_fn(d * d, d * d, |r, col| {
        let (a, b) = (r / d, r % d);
        let swap = col == b * d + a;
        c(((r == col) as u8 + swap as u8) as f64 / norm, 0.0)
    })
}

/// `(d₁, d₂)`: trace distances of `E[ρ]` from `I/2^m` and of `E[ρ⊗ρ]` from the Haar second moment.
pub fn design_check(ens: &Ensemble) -> Result<(f64, f64)> {
    let m = ens.num_qubits();
    if m > 5 {
        return Err(Error::Unsupported(format!("design check on {m} qubits")));
    }
    let d = ens.dim();
    let mean = ens.mean_density();
    let d1 = 0.5 * hermitian_trace_norm(&(mean.matrix() - DensityMatrix::maximally_mixed(m).matrix()));
    let mut second = CMatrix::zeros(d * d, d * d);
    for (s, &w) in ens.states().zip(ens.weights()) {
        let rho = s.to_density().into_matrix();
        second += rho.kronecker(&rho) * c(w, 0.0);
    }
    let d2 = 0.5 * hermitian_trace_norm(&(second - haar_second_moment(m)));
    Ok((d1, d2))
}

/// `2 exp(−2^{m+1} τ² / (36π³))`.
pub fn levy_bound(m: usize, tau: f64) -> f64 {
    2.0 * (-(2f64.powi(m as i32 + 1)) * tau * tau / (36.0 * PI.powi(3))).exp()
}

#[derive(Clone, Debug, Serialize)]
pub struct TailReport {
    pub m: usize,
    pub tau: f64,
    pub trials: usize,
    /// Fraction of Haar states with `|tr(Mψ) − tr(M)/2^m| > τ`.
    pub tail: f64,
    pub levy_bound: f64,
    pub haar_variance: f64,
    /// `haar_variance / τ²`.
    pub chebyshev_bound: f64,
}

/// Samples `trials` Haar states (trial `t` uses its own RNG stream) and
/// measures how often `tr(Mψ)` strays more than `τ` from its mean.
pub fn purity_tail_experiment(obs: &dyn Expectation, tau: f64, trials: usize, seed: u64) -> Result<TailReport> {
    if trials < 1000 {
        return Err(Error::InvalidArgument(format!("need at least 1000 trials, got {trials}")));
    }
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tau} must be positive")));
    }
    let m = obs.num_qubits();
    let center = obs.trace() / (1u64 << m) as f64;
    let hits: usize = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, t as u64, 0x7a11);
            let psi = haar_state(m, &mut rng);
            ((obs.expectation_pure(&psi) - center).abs() > tau) as usize
        })
        .sum();
    let haar_variance = haar_variance_exact(obs);
    Ok(TailReport {
        m,
        tau,
        trials,
        tail: hits as f64 / trials as f64,
        levy_bound: levy_bound(m, tau),
        haar_variance,
        chebyshev_bound: haar_variance / (tau * tau),
    })
}
