//! Statistical query oracles over a hidden state, plus measurement sampling.
//!
//! Every response is checked against the truthful value before it leaves the
//! oracle; the process-wide counters behind [`soundness_counters`] record how
//! many responses were checked and how many broke the tolerance promise.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::qcore::linalg::{sample_index, TOL};
use crate::qcore::{BitVector, DensityMatrix, Observable, PureState, QuantumState};
use crate::rng;

static CHECKED: AtomicU64 = AtomicU64::new(0);
static VIOLATIONS: AtomicU64 = AtomicU64::new(0);

/// `(responses checked, responses outside tolerance)` since process start.
pub fn soundness_counters() -> (u64, u64) {
    (CHECKED.load(Ordering::Relaxed), VIOLATIONS.load(Ordering::Relaxed))
}

/// How the oracle answers within its tolerance.
#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum Policy {
    /// The exact expectation value.
    Exact,
    /// Exact value plus uniform noise in `[−τ, τ]`.
    IntervalNoise(rng::Rng),
    /// Answers as if the hidden state were `σ` whenever that stays within `τ`.
    AdversarialReference(DensityMatrix),
}

impl Policy {
    pub fn name(&self) -> &'static str {
        match self {
            Policy::Exact => "exact",
            Policy::IntervalNoise(_) => "interval-noise",
            Policy::AdversarialReference(_) => "adversarial-reference",
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct LedgerEntry {
    pub hash: String,
    pub tau: f64,
    pub response: f64,
}

/// Accepted queries in order. Rejected queries never reach it.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Ledger {
    entries: Vec<LedgerEntry>,
}

impl Ledger {
    pub fn queries(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }
}

/// Hex prefix of the SHA-256 of the matrix entries (row-major, re then im bits).
pub fn observable_hash(m: &Observable) -> String {
    let mut h = Sha256::new();
    let mat = m.matrix();
    for i in 0..mat.nrows() {
        for j in 0..mat.ncols() {
            h.update(mat[(i, j)].re.to_bits().to_le_bytes());
            h.update(mat[(i, j)].im.to_bits().to_le_bytes());
        }
    }
    h.finalize().iter().take(16).map(|b| format!("{b:02x}")).collect()
}

/// Classical statistical query: a table `φ: {0,1}^{m} → [−1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StatQuery {
    phi: Vec<f64>,
}

impl StatQuery {
    pub fn new(phi: Vec<f64>) -> Result<Self> {
        if !phi.len().is_power_of_two() {
            return Err(Error::InvalidArgument("table length must be a power of two".into()));
        }
        if let Some(v) = phi.iter().find(|v| !(v.abs() <= 1.0)) {
            return Err(Error::InvalidArgument(format!("φ value {v} outside [−1, 1]")));
        }
        Ok(StatQuery { phi })
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn to_observable(&self) -> Observable {
        Observable::diagonal(&self.phi).expect("power-of-two length")
    }
}

pub struct QstatOracle {
    hidden: QuantumState,
    tau: f64,
    policy: Policy,
    ledger: Ledger,
}

impl QstatOracle {
    pub fn new(hidden: impl Into<QuantumState>, tau: f64, policy: Policy) -> Result<Self> {
        let hidden = hidden.into();
        check_tau(tau)?;
        if let Policy::AdversarialReference(sigma) = &policy {
            if sigma.dim() != hidden.dim() {
                return Err(Error::DimensionMismatch { expected: hidden.dim(), got: sigma.dim() });
            }
        }
        Ok(QstatOracle { hidden, tau, policy, ledger: Ledger::default() })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn dim(&self) -> usize {
        self.hidden.dim()
    }

    pub fn num_qubits(&self) -> usize {
        self.hidden.num_qubits()
    }

    pub fn policy_name(&self) -> &'static str {
        self.policy.name()
    }

    pub fn ledger(&self) -> &Ledger {
        &self.ledger
    }

    pub fn queries(&self) -> usize {
        self.ledger.queries()
    }

    /// Query at the oracle's own tolerance.
    pub fn qstat(&mut self, m: &Observable) -> Result<f64> {
        self.qstat_at(m, self.tau)
    }

    /// Query at an explicit tolerance in `(0, 1]`.
    pub fn qstat_at(&mut self, m: &Observable, tau: f64) -> Result<f64> {
        check_tau(tau)?;
        if m.dim() != self.hidden.dim() {
            return Err(Error::DimensionMismatch { expected: self.hidden.dim(), got: m.dim() });
        }
        let norm = m.operator_norm();
        if norm > 1.0 + TOL {
            return Err(Error::NormViolation { norm });
        }
        let truth = self.hidden.expectation(m)?;
        let response = match &mut self.policy {
            Policy::Exact => truth,
            Policy::IntervalNoise(rng) => truth + rng.random_range(-tau..=tau),
            Policy::AdversarialReference(sigma) => {
                let fake = sigma.expectation(m)?;
                if (fake - truth).abs() <= tau {
                    fake
                } else {
                    truth
                }
            }
        };
        CHECKED.fetch_add(1, Ordering::Relaxed);
        if (response - truth).abs() > tau + 1e-12 {
            VIOLATIONS.fetch_add(1, Ordering::Relaxed);
            panic!("oracle response {response} is more than {tau} from {truth}");
        }
        self.ledger.entries.push(LedgerEntry { hash: observable_hash(m), tau, response });
        Ok(response)
    }

    /// Statistical query through the diagonal observable `Σ_x φ(x)|x⟩⟨x|`.
    pub fn stat(&mut self, q: &StatQuery) -> Result<f64> {
        self.qstat(&q.to_observable())
    }

    pub fn stat_at(&mut self, q: &StatQuery, tau: f64) -> Result<f64> {
        self.qstat_at(&q.to_observable(), tau)
    }

    /// `{queries, tau, policy, transcript: [{hash, tau, response}]}`.
    pub fn export_ledger(&self) -> serde_json::Value {
        serde_json::json!({
            "queries": self.ledger.queries(),
            "tau": self.tau,
            "policy": self.policy.name(),
            "transcript": self.ledger.entries,
        })
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tau} outside (0, 1]")));
    }
    Ok(())
}

/// Draws copies and measurement outcomes from a fixed state. Mixed states are
/// treated as their eigen-ensemble.
#[derive(Clone, Debug)]
pub struct StateSampler {
    components: Vec<PureState>,
    weights: Vec<f64>,
}

impl StateSampler {
    pub fn new(state: &QuantumState) -> Self {
        match state {
            QuantumState::Pure(p) => StateSampler { components: vec![p.clone()], weights: vec![1.0] },
            QuantumState::Mixed(d) => {
                let (vals, vecs) = d.eigen();
                let mut components = Vec::new();
                let mut weights = Vec::new();
                for (k, &v) in vals.iter().enumerate() {
                    if v > 1e-12 {
                        let col = vecs.column(k).iter().copied().collect();
                        components.push(PureState::from_unnormalized(col).expect("unit eigenvector"));
                        weights.push(v);
                    }
                }
                StateSampler { components, weights }
            }
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.components[0].num_qubits()
    }

    /// One pure copy; for mixed states, an eigenvector drawn by its eigenvalue.
    pub fn draw_copy<R: Rng + ?Sized>(&self, rng: &mut R) -> PureState {
        self.components[sample_index(&self.weights, rng)].clone()
    }

    pub fn measure<R: Rng + ?Sized>(&self, rng: &mut R) -> BitVector {
        let psi = &self.components[sample_index(&self.weights, rng)];
        let x = sample_index(&psi.probabilities(), rng);
        BitVector::from_index(x, psi.num_qubits().max(1)).expect("index fits")
    }
}

/// Computational-basis measurement of `state`.
pub fn measure_sample<R: Rng + ?Sized>(state: &QuantumState, rng: &mut R) -> BitVector {
    StateSampler::new(state).measure(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{degree2_table, function_state};

    #[test]
    fn identity_query_returns_one() {
        let mut o = QstatOracle::new(PureState::uniform(2), 0.1, Policy::Exact).unwrap();
        assert!((o.qstat(&Observable::identity(2)).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(o.queries(), 1);
    }

    #[test]
    fn rejected_queries_are_not_counted() {
        let mut o = QstatOracle::new(PureState::uniform(1), 0.1, Policy::Exact).unwrap();
        let big = Observable::identity(1).scaled(2.0);
        assert!(matches!(o.qstat(&big), Err(Error::NormViolation { .. })));
        assert!(o.qstat(&Observable::identity(2)).is_err());
        assert_eq!(o.queries(), 0);
    }

    #[test]
    fn adversary_reveals_large_gaps() {
        let n = 2;
        let psi = function_state(&degree2_table(n, 5).unwrap()).unwrap();
        let sigma = DensityMatrix::maximally_mixed(n + 1);
        let mut o = QstatOracle::new(psi.clone(), 0.2, Policy::AdversarialReference(sigma)).unwrap();
        let r = o.qstat(&Observable::projector(&psi)).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        // Identity has zero gap, so the reference value is returned (also 1).
        let z = Observable::diagonal(&[1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0]).unwrap();
        let r = o.qstat(&z).unwrap();
        assert!(r.abs() <= 0.2 + 1e-12);
    }

    #[test]
    fn stat_query_constant_one() {
        let mut o = QstatOracle::new(PureState::uniform(2), 0.05, Policy::Exact).unwrap();
        let q = StatQuery::new(vec![1.0; 4]).unwrap();
        assert!((o.stat(&q).unwrap() - 1.0).abs() < 1e-12);
        assert!(StatQuery::new(vec![1.5; 4]).is_err());
    }

    #[test]
    fn ledger_export_shape() {
        let mut o = QstatOracle::new(PureState::uniform(1), 0.1, Policy::Exact).unwrap();
        o.qstat(&Observable::identity(1)).unwrap();
        let j = o.export_ledger();
        assert_eq!(j["queries"], 1);
        assert_eq!(j["policy"], "exact");
        assert_eq!(j["transcript"][0]["hash"].as_str().unwrap().len(), 32);
    }
}
