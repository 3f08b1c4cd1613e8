//! Learners that see the hidden state only through statistical queries.

use serde::Serialize;

use super::LearnerReport;
use crate::ensembles::register_qubits;
use crate::error::{Error, Result};
use crate::oracle::QstatOracle;
use crate::qcore::linalg::{c, hermitian_trace_norm, CMatrix};
use crate::qcore::{f2_solve, BitMatrix, BitVector, DensityMatrix, Echelon, Observable, PauliString};

// Responses this close to a decision threshold are treated as ties.
const TIE: f64 = 1e-12;
// Slack when checking a tolerance against its required bound.
const TOL_TAU: f64 = 1e-12;

fn interval_projector(qubits: usize, lo: usize, hi: usize) -> Observable {
    let values: Vec<f64> = (0..1usize << qubits).map(|i| (lo <= i && i < hi) as u8 as f64).collect();
    Observable::diagonal(&values).expect("power-of-two length")
}

/// Recovers the hidden `k`-subset of `[n]` from the coupon state by binary
/// search. Each tree node's count is known; querying the left child's
/// interval projector gives `|left ∩ S| / k`, and the right count follows.
///
/// A response exactly halfway between two counts can only occur when
/// `τ = 1/(2k)`; it is settled by one more query of `P_left − P_right`.
pub fn learn_coupon(oracle: &mut QstatOracle, n: usize, k: usize) -> Result<LearnerReport<Vec<usize>>> {
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("subset size {k} must lie in 1..={n}")));
    }
    if oracle.tau() > 1.0 / (2.0 * k as f64) + TOL_TAU {
        return Err(Error::Precondition(format!("tolerance {} exceeds 1/(2k)", oracle.tau())));
    }
    let p = register_qubits(n);
    if oracle.num_qubits() != p {
        return Err(Error::DimensionMismatch { expected: p, got: oracle.num_qubits() });
    }
    let start = oracle.queries();
    let kf = k as f64;
    let mut found = Vec::new();
    // (lo, hi, count) over the padded register, clipped to [0, n).
    let mut stack = vec![(0usize, 1usize << p, k)];
    while let Some((lo, hi, count)) = stack.pop() {
        let top = hi.min(n);
        if count == 0 || lo >= top {
            continue;
        }
        if count == top - lo {
            found.extend(lo + 1..=top);
            continue;
        }
        let mid = (lo + hi) / 2;
        let r = oracle.qstat(&interval_projector(p, lo, mid))?;
        let scaled = kf * r;
        let mut left = scaled.round();
        if (scaled - left).abs() >= 0.5 - TIE {
            let a = scaled.floor();
            let mut diff = interval_projector(p, lo, mid).matrix().clone();
            diff -= interval_projector(p, mid, hi).matrix();
            let t = oracle.qstat(&Observable::new(diff)?)?;
            // (2c − count)/k for c ∈ {a, a+1}; pick the nearer one.
            let va = (2.0 * a - count as f64) / kf;
            left = if (t - va).abs() <= (t - va - 2.0 / kf).abs() { a } else { a + 1.0 };
        }
        let left = (left.max(0.0) as usize).min(count);
        stack.push((mid, hi, count - left));
        stack.push((lo, mid, left));
    }
    found.sort_unstable();
    let queries = oracle.queries() - start;
    if found.len() != k {
        return Ok(LearnerReport::failed(0, queries));
    }
    Ok(LearnerReport::found(found, 0, queries))
}

/// Recovers `x` from the codeword state of `Gx` with one query per pivot row
/// of `G`: `M_j = |j⟩⟨j| ⊗ |0⟩⟨0|` has value `1/n` when `(Gx)_j = 0` and 0
/// otherwise. A response exactly at `1/(2n)` is settled with `|j⟩⟨j| ⊗ Z`.
pub fn learn_codeword(oracle: &mut QstatOracle, g: &BitMatrix) -> Result<LearnerReport<BitVector>> {
    let (n, k) = (g.nrows(), g.ncols());
    if g.rank() != k {
        return Err(Error::InvalidArgument("generator must have full column rank".into()));
    }
    let nf = n as f64;
    if oracle.tau() > 1.0 / (2.0 * nf) + TOL_TAU {
        return Err(Error::Precondition(format!("tolerance {} exceeds 1/(2n)", oracle.tau())));
    }
    let p = register_qubits(n);
    if oracle.num_qubits() != p + 1 {
        return Err(Error::DimensionMismatch { expected: p + 1, got: oracle.num_qubits() });
    }
    let start = oracle.queries();
    let mut span = Echelon::new(k);
    let mut constraints = Vec::with_capacity(k);
    for j in 0..n {
        if span.rank() == k {
            break;
        }
        if !span.insert(*g.row(j), false) {
            continue;
        }
        let mut diag = vec![0.0; 2 << p];
        diag[j << 1] = 1.0;
        let r = oracle.qstat(&Observable::diagonal(&diag)?)?;
        let half = 1.0 / (2.0 * nf);
        let bit = if (r - half).abs() <= TIE {
            diag[(j << 1) | 1] = -1.0;
            oracle.qstat(&Observable::diagonal(&diag)?)? < 0.0
        } else {
            r < half
        };
        constraints.push((*g.row(j), bit));
    }
    let queries = oracle.queries() - start;
    match f2_solve(k, &constraints) {
        Ok(sol) if sol.is_unique() => Ok(LearnerReport::found(sol.particular, 0, queries)),
        Ok(_) | Err(Error::Infeasible) => Ok(LearnerReport::failed(0, queries)),
        Err(e) => Err(e),
    }
}

/// Per-query tolerances for the two phases of [`learn_fourier_sparse`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FourierSchedule {
    pub support_tau: f64,
    pub estimate_tau: f64,
}

impl FourierSchedule {
    /// `1/(2k)` for support finding and `ε/(2k)` for estimation.
    pub fn new(k: usize, eps: f64) -> Self {
        let k = k as f64;
        FourierSchedule { support_tau: 1.0 / (2.0 * k), estimate_tau: eps / (2.0 * k) }
    }
}

/// Output of [`learn_fourier_sparse`]: the sign hypothesis and the
/// coefficient estimates it was built from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SparseHypothesis {
    pub table: Vec<bool>,
    pub support: Vec<(usize, f64)>,
}

/// Smallest magnitude a nonzero coefficient of a `k`-sparse function can have.
pub fn sparse_granularity(k: usize) -> f64 {
    if k <= 1 {
        1.0
    } else {
        2f64.powi(1 - k.ilog2() as i32)
    }
}

/// Learns a `k`-Fourier-sparse `f` from its example state `|x, f(x)⟩`.
///
/// Every character `S` is tested with `φ(x, b) = (−1)^{b + S·x}`, whose value
/// is `f̂(S)`. Coefficients above half the granularity form the support, which
/// is re-estimated at `ε/(2k)`; the hypothesis is `sign(Σ α_S χ_S)`.
pub fn learn_fourier_sparse(oracle: &mut QstatOracle, k: usize, eps: f64) -> Result<LearnerReport<SparseHypothesis>> {
    if k == 0 || !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidArgument(format!("need k >= 1 and eps in (0, 1], got {k}, {eps}")));
    }
    let q = oracle.num_qubits();
    if q < 2 {
        return Err(Error::InvalidState("example state needs n >= 1 plus a label qubit".into()));
    }
    let n = q - 1;
    let schedule = FourierSchedule::new(k, eps);
    let threshold = sparse_granularity(k) / 2.0;
    let start = oracle.queries();
    let character = |s: usize| -> Result<Observable> {
        let values: Vec<f64> = (0..2usize << n)
            .map(|i| if (((i >> 1) & s).count_ones() as usize + (i & 1)) % 2 == 1 { -1.0 } else { 1.0 })
            .collect();
        Observable::diagonal(&values)
    };
    let mut support = Vec::new();
    for s in 0..1usize << n {
        let r = oracle.qstat_at(&character(s)?, schedule.support_tau)?;
        if r.abs() > threshold {
            support.push(s);
            if support.len() > k {
                return Ok(LearnerReport::failed(0, oracle.queries() - start));
            }
        }
    }
    if support.is_empty() {
        return Ok(LearnerReport::failed(0, oracle.queries() - start));
    }
    let mut estimates = Vec::with_capacity(support.len());
    for &s in &support {
        estimates.push((s, oracle.qstat_at(&character(s)?, schedule.estimate_tau)?));
    }
    let table = (0..1usize << n)
        .map(|x| {
            let v: f64 = estimates
                .iter()
                .map(|&(s, a)| if (x & s).count_ones() % 2 == 1 { -a } else { a })
                .sum();
            v < 0.0
        })
        .collect();
    let queries = oracle.queries() - start;
    Ok(LearnerReport::found(SparseHypothesis { table, support: estimates }, 0, queries))
}

/// Reconstruction of one `D`-qubit marginal from its Pauli expectations.
#[derive(Clone, Debug)]
pub struct PatchEstimate {
    pub qubits: Vec<usize>,
    /// `(I + Σ α_P P) / 2^D`; Hermitian with unit trace, not necessarily PSD.
    pub estimate: CMatrix,
    pub queries: usize,
}

impl PatchEstimate {
    /// `½‖ρ̂ − ρ‖₁` against a true marginal.
    pub fn trace_distance_to(&self, marginal: &DensityMatrix) -> Result<f64> {
        if marginal.dim() != self.estimate.nrows() {
            return Err(Error::DimensionMismatch { expected: self.estimate.nrows(), got: marginal.dim() });
        }
        Ok(0.5 * hermitian_trace_norm(&(&self.estimate - marginal.matrix())))
    }
}

/// All `D`-subsets of `0..m` in lexicographic order.
fn combinations(m: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..d).collect();
    if d > m {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..d).rev().find(|&i| cur[i] < m - d + i) else { break };
        cur[i] += 1;
        for j in i + 1..d {
            cur[j] = cur[j - 1] + 1;
        }
    }
    out
}

/// Estimates every `D`-qubit marginal by querying its `4^D − 1` non-identity
/// Pauli strings at the oracle tolerance.
pub fn local_tomography(oracle: &mut QstatOracle, d: usize) -> Result<Vec<PatchEstimate>> {
    let m = oracle.num_qubits();
    if d == 0 || d > m {
        return Err(Error::InvalidArgument(format!("patch size {d} must lie in 1..={m}")));
    }
    let dim = 1usize << d;
    let mut out = Vec::new();
    for qubits in combinations(m, d) {
        let before = oracle.queries();
        let mut est = CMatrix::identity(dim, dim);
        for p in PauliString::all(d).filter(|p| !p.is_identity()) {
            let global = p.embed(&qubits, m)?;
            let alpha = oracle.qstat(&global.to_observable())?;
            est += p.to_matrix() * c(alpha, 0.0);
        }
        est *= c(1.0 / dim as f64, 0.0);
        out.push(PatchEstimate { qubits, estimate: est, queries: oracle.queries() - before });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{codeword_state, coupon_state, function_state};
    use crate::oracle::Policy;
    use crate::qcore::boolean::majority3_table;
    use crate::qcore::PureState;

    #[test]
    fn coupon_first_query_splits_evenly() {
        let psi = coupon_state(8, &[2, 5]).unwrap();
        let mut o = QstatOracle::new(psi, 0.25, Policy::Exact).unwrap();
        let r = learn_coupon(&mut o, 8, 2).unwrap();
        assert_eq!(r.recovered.unwrap(), vec![2, 5]);
        assert!((o.ledger().entries()[0].response - 0.5).abs() < 1e-12);
    }

    #[test]
    fn coupon_rejects_loose_tolerance() {
        let psi = coupon_state(8, &[2, 5]).unwrap();
        let mut o = QstatOracle::new(psi, 0.3, Policy::Exact).unwrap();
        assert!(matches!(learn_coupon(&mut o, 8, 2), Err(Error::Precondition(_))));
    }

    #[test]
    fn codeword_example() {
        let g = BitMatrix::from_u8_rows(&[&[1, 0], &[0, 1], &[1, 1]]).unwrap();
        let x: BitVector = "10".parse().unwrap();
        let psi = codeword_state(&g, &x).unwrap();
        let mut o = QstatOracle::new(psi, 1.0 / 6.0, Policy::Exact).unwrap();
        let r = learn_codeword(&mut o, &g).unwrap();
        assert_eq!(r.recovered.unwrap(), x);
        assert_eq!(r.qstat_queries, 2);
        let resp: Vec<f64> = o.ledger().entries().iter().map(|e| e.response).collect();
        assert!(resp[0].abs() < 1e-12 && (resp[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn majority_is_recovered() {
        let f = majority3_table();
        let mut o = QstatOracle::new(function_state(&f).unwrap(), 0.5, Policy::Exact).unwrap();
        let r = learn_fourier_sparse(&mut o, 4, 0.1).unwrap();
        let h = r.recovered.unwrap();
        assert_eq!(h.table, f);
        assert_eq!(h.support.len(), 4);
    }

    #[test]
    fn combinations_count() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn tomography_of_zero_state_is_exact() {
        let psi = PureState::basis(3, 0).unwrap();
        let mut o = QstatOracle::new(psi, 0.01, Policy::Exact).unwrap();
        let patches = local_tomography(&mut o, 2).unwrap();
        assert_eq!(patches.len(), 3);
        let zero = PureState::basis(2, 0).unwrap().to_density();
        for p in &patches {
            assert_eq!(p.queries, 15);
            assert!(p.trace_distance_to(&zero).unwrap() < 1e-12);
        }
    }
}
