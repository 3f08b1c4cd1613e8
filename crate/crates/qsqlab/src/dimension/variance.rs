//! Variance of `tr(Mρ)` over an ensemble, and scans for observables that make it large.

use rayon::prelude::*;
use serde::Serialize;

use super::moments::{fourth_moment, third_moment};
use crate::ensembles::Ensemble;
use crate::error::{Error, Result};
use crate::qcore::linalg::{c, haar_unitary, CMatrix, C64};
use crate::qcore::{Observable, PauliString};
use crate::rng::stream_rng;

fn member_values(ens: &Ensemble, m: &Observable) -> Result<Vec<f64>> {
    if m.dim() != ens.dim() {
        return Err(Error::DimensionMismatch { expected: ens.dim(), got: m.dim() });
    }
    ens.states().map(|s| s.expectation(m)).collect()
}

/// `E[tr(Mρ)²] − E[tr(Mρ)]²`, clamped at zero.
pub fn variance_of(ens: &Ensemble, m: &Observable) -> Result<f64> {
    let v = member_values(ens, m)?;
    let w = ens.weights();
    let mean: f64 = v.iter().zip(w).map(|(x, p)| p * x).sum();
    let square: f64 = v.iter().zip(w).map(|(x, p)| p * x * x).sum();
    Ok((square - mean * mean).max(0.0))
}

/// `Σ w_i (v_i − v̄)²`.
pub fn variance_centered(ens: &Ensemble, m: &Observable) -> Result<f64> {
    let v = member_values(ens, m)?;
    let w = ens.weights();
    let mean: f64 = v.iter().zip(w).map(|(x, p)| p * x).sum();
    Ok(v.iter().zip(w).map(|(x, p)| p * (x - mean) * (x - mean)).sum())
}

/// Anything that can report `Var_ρ tr(Mρ)` for an observable.
pub trait VarianceModel: Sync {
    fn num_qubits(&self) -> usize;
    fn variance(&self, m: &Observable) -> Result<f64>;
}

impl VarianceModel for Ensemble {
    fn num_qubits(&self) -> usize {
        Ensemble::num_qubits(self)
    }

    fn variance(&self, m: &Observable) -> Result<f64> {
        variance_of(self, m)
    }
}

/// Example states `ψ_A` of uniformly random degree-2 forms on `n` bits,
/// evaluated through the character expansion of `A ↦ tr(Mψ_A)` instead of by
/// enumerating all `2^{n(n+1)/2}` states.
#[derive(Clone, Debug)]
pub struct Degree2Examples {
    n: usize,
    // Monomial mask of x: bit k set when x_i x_j = 1 for the k-th pair i <= j.
    masks: Vec<u32>,
}

/// Variances of the three random parts of `tr(Mψ_A)` after moving the label
/// qubit to the `±` basis, plus the total.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct BlockTerms {
    /// `Var ⟨φ|M₋₋|φ⟩`
    pub t11: f64,
    /// `Var ⟨u|M₊₋|φ⟩`
    pub t22: f64,
    /// `Var ⟨φ|M₋₊|u⟩`
    pub t33: f64,
    /// `|Cov(⟨u|M₊₋|φ⟩, ⟨φ|M₋₊|u⟩)|`
    pub t23: f64,
    pub variance: f64,
}

impl BlockTerms {
    pub fn max_case(&self) -> f64 {
        self.t11.max(self.t22).max(self.t33)
    }
}

impl Degree2Examples {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n * (n + 1) / 2 > 32 {
            return Err(Error::Unsupported(format!("degree-2 character expansion for n = {n}")));
        }
        let masks = (0..1usize << n)
            .map(|x| {
                let bit = |i: usize| (x >> (n - 1 - i)) & 1 == 1;
                let mut mask = 0u32;
                let mut k = 0;
                for i in 0..n {
                    for j in i..n {
                        if bit(i) && bit(j) {
                            mask |= 1 << k;
                        }
                        k += 1;
                    }
                }
                mask
            })
            .collect();
        Ok(Degree2Examples { n, masks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn check(&self, m: &Observable) -> Result<()> {
        if m.num_qubits() != self.n + 1 {
            return Err(Error::DimensionMismatch { expected: 1 << (self.n + 1), got: m.dim() });
        }
        Ok(())
    }

    /// `Σ_{α≠0} |c_α|²` for contributions `(α, c)` with repeated `α` summed.
    fn nonconstant_power(mut terms: Vec<(u32, C64)>) -> f64 {
        terms.sort_unstable_by_key(|t| t.0);
        let mut total = 0.0;
        let mut i = 0;
        while i < terms.len() {
            let alpha = terms[i].0;
            let mut acc = C64::new(0.0, 0.0);
            while i < terms.len() && terms[i].0 == alpha {
                acc += terms[i].1;
                i += 1;
            }
            if alpha != 0 {
                total += acc.norm_sqr();
            }
        }
        total
    }

    /// Writes `[a = f(x)] = ½(1 + (−1)^{a + f(x)})` and collects the
    /// coefficient of every character `χ_α(A)` of `tr(Mψ_A)`.
    fn characters(&self, m: &Observable) -> Vec<(u32, C64)> {
        let d = 1usize << self.n;
        let mat = m.matrix();
        let scale = 1.0 / (4.0 * d as f64);
        let sgn = |a: usize| if a == 0 { 1.0 } else { -1.0 };
        let mut terms = Vec::with_capacity(d * d + 2 * d);
        let mut row_part = vec![C64::new(0.0, 0.0); d];
        let mut col_part = vec![C64::new(0.0, 0.0); d];
        for x in 0..d {
            for y in 0..d {
                let mut both = C64::new(0.0, 0.0);
                for a in 0..2 {
                    for b in 0..2 {
                        let e = mat[((x << 1) | a, (y << 1) | b)];
                        row_part[x] += e * sgn(a);
                        col_part[y] += e * sgn(b);
                        both += e * (sgn(a) * sgn(b));
                    }
                }
                terms.push((self.masks[x] ^ self.masks[y], both * scale));
            }
        }
        for x in 0..d {
            terms.push((self.masks[x], row_part[x] * scale));
            terms.push((self.masks[x], col_part[x] * scale));
        }
        terms
    }

    /// `t₁, t₂, t₃` character coefficients from the `±`-basis blocks.
    fn block_characters(&self, m: &Observable) -> [Vec<(u32, C64)>; 3] {
        let d = 1usize << self.n;
        let mp = label_hadamard(m.matrix());
        let df = d as f64;
        let mut t1 = Vec::with_capacity(d * d);
        let mut t2 = Vec::with_capacity(d);
        let mut t3 = Vec::with_capacity(d);
        for x in 0..d {
            for y in 0..d {
                t1.push((self.masks[x] ^ self.masks[y], mp[((x << 1) | 1, (y << 1) | 1)] / df));
            }
        }
        for y in 0..d {
            let s: C64 = (0..d).map(|x| mp[(x << 1, (y << 1) | 1)]).sum();
            t2.push((self.masks[y], s / df));
        }
        for x in 0..d {
            let s: C64 = (0..d).map(|y| mp[((x << 1) | 1, y << 1)]).sum();
            t3.push((self.masks[x], s / df));
        }
        [t1, t2, t3]
    }

    pub fn block_terms(&self, m: &Observable) -> Result<BlockTerms> {
        self.check(m)?;
        let [t1, t2, t3] = self.block_characters(m);
        let t23 = {
            let collect = |t: &[(u32, C64)]| {
                let mut v = vec![C64::new(0.0, 0.0); 1 << self.n];
                // Single-variable terms carry masks of distinct x, so index by x.
                for (x, (_, coef)) in t.iter().enumerate() {
                    v[x] += coef;
                }
                v
            };
            let (a, b) = (collect(&t2), collect(&t3));
            a.iter().zip(&b).skip(1).map(|(p, q)| p * q.conj()).sum::<C64>().norm()
        };
        let mut all = t1.clone();
        all.extend(t2.iter().copied());
        all.extend(t3.iter().copied());
        Ok(BlockTerms {
            t11: Self::nonconstant_power(t1),
            t22: Self::nonconstant_power(t2),
            t33: Self::nonconstant_power(t3),
            t23,
            variance: 0.25 * Self::nonconstant_power(all),
        })
    }

    /// Variance assembled from the closed-form first to fourth moments of the
    /// phase states, via `tr(Mψ_A) = ½(c + t₁ + 2 Re t₂)`.
    pub fn variance_from_moments(&self, m: &Observable) -> Result<f64> {
        self.check(m)?;
        let d = 1usize << self.n;
        let df = d as f64;
        let mp = label_hadamard(m.matrix());
        // t₁ = φᵀ S φ with S the real symmetric part of M₋₋; Re t₂ = r·φ.
        let s = |a: usize, b: usize| 0.5 * (mp[((a << 1) | 1, (b << 1) | 1)].re + mp[((b << 1) | 1, (a << 1) | 1)].re);
        let r: Vec<f64> = (0..d).map(|b| (0..d).map(|x| mp[(x << 1, (b << 1) | 1)].re).sum::<f64>() / df.sqrt()).collect();
        let m1 = |a: usize| if a == 0 { 1.0 / df.sqrt() } else { 0.0 };
        let m2 = |a: usize, b: usize| if a == b { 1.0 / df } else { 0.0 };
        let mut e_t1 = 0.0;
        let mut e_t1_sq = 0.0;
        let mut e_cross = 0.0;
        for a in 0..d {
            for b in 0..d {
                let sab = s(a, b);
                e_t1 += sab * m2(a, b);
                for (c2, &rc) in r.iter().enumerate() {
                    e_cross += sab * rc * third_moment(d, a, b, c2);
                    for e in 0..d {
                        e_t1_sq += sab * s(c2, e) * fourth_moment(d, a, b, c2, e);
                    }
                }
            }
        }
        let e_t2: f64 = (0..d).map(|b| r[b] * m1(b)).sum();
        let e_t2_sq: f64 = (0..d).map(|b| r[b] * r[b] * m2(b, b)).sum();
        let var_t1 = e_t1_sq - e_t1 * e_t1;
        let var_t2 = e_t2_sq - e_t2 * e_t2;
        let cov = e_cross - e_t1 * e_t2;
        Ok(0.25 * (var_t1 + 4.0 * var_t2 + 4.0 * cov))
    }
}

impl VarianceModel for Degree2Examples {
    fn num_qubits(&self) -> usize {
        self.n + 1
    }

    fn variance(&self, m: &Observable) -> Result<f64> {
        self.check(m)?;
        Ok(Self::nonconstant_power(self.characters(m)))
    }
}

/// Pauli strings are listed exhaustively up to this many qubits.
pub const EXHAUSTIVE_PAULI_QUBITS: usize = 7;

/// Candidate observables for a variance scan, generated lazily by index:
/// every Pauli string (when the register is small enough), four fixed
/// `±`-basis block observables, then `random` draws cycling through Haar
/// reflections and random block observables.
#[derive(Clone, Debug)]
pub struct CandidateSet {
    qubits: usize,
    paulis: usize,
    random: usize,
    seed: u64,
}

pub struct Candidate {
    pub description: String,
    pub observable: Observable,
}

const FIXED_BLOCKS: usize = 4;
const RANDOM_KINDS: usize = 5;

impl CandidateSet {
    pub fn new(qubits: usize, random: usize, seed: u64) -> Result<Self> {
        if qubits == 0 || qubits > 12 {
            return Err(Error::Unsupported(format!("variance scan on {qubits} qubits")));
        }
        let paulis = if qubits <= EXHAUSTIVE_PAULI_QUBITS { 1usize << (2 * qubits) } else { 0 };
        Ok(CandidateSet { qubits, paulis, random, seed })
    }

    /// Only the Pauli strings.
    pub fn paulis_only(qubits: usize) -> Result<Self> {
        if qubits == 0 || qubits > EXHAUSTIVE_PAULI_QUBITS {
            return Err(Error::Unsupported(format!("exhaustive Pauli scan on {qubits} qubits")));
        }
        Ok(CandidateSet { qubits, paulis: 1 << (2 * qubits), random: 0, seed: 0 })
    }

    pub fn len(&self) -> usize {
        self.paulis + if self.random > 0 || self.paulis == 0 { FIXED_BLOCKS + self.random } else { 0 }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn exhaustive_paulis(&self) -> bool {
        self.paulis > 0
    }

    pub fn get(&self, i: usize) -> Candidate {
        if i < self.paulis {
            let p = PauliString::from_index(i, self.qubits);
            return Candidate { description: format!("pauli {p}"), observable: p.to_observable() };
        }
        let j = i - self.paulis;
        let d = 1usize << (self.qubits - 1);
        if j < FIXED_BLOCKS {
            let u = CMatrix::from_element(d, d, c(1.0 / d as f64, 0.0));
            let zero = CMatrix::from_fn(d, d, |a, b| c((a == 0 && b == 0) as u8 as f64, 0.0));
            let (name, proj) = if j.is_multiple_of(2) { ("uniform", u) } else { ("zero", zero) };
            let k = proj * c(2.0, 0.0) - CMatrix::identity(d, d);
            let cross = j >= 2;
            let kind = if cross { "cross" } else { "minus" };
            return Candidate {
                description: format!("block {kind} reflection-{name}"),
                observable: block_observable(&k, cross),
            };
        }
        let r = j - FIXED_BLOCKS;
        let mut rng = stream_rng(self.seed, r as u64, 0x5ca7);
        let random_signs = |rng: &mut crate::rng::Rng| {
            use rand::Rng;
            CMatrix::from_diagonal(&crate::qcore::CVector::from_fn(d, |_, _| {
                c(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0)
            }))
        };
        let (description, observable) = match r % RANDOM_KINDS {
            0 => ("haar reflection".to_string(), Observable::haar_reflection(self.qubits, &mut rng)),
            1 => {
                let k = Observable::haar_reflection(self.qubits - 1, &mut rng);
                ("block minus haar-reflection".to_string(), block_observable(k.matrix(), false))
            }
            2 => ("block minus signs".to_string(), block_observable(&random_signs(&mut rng), false)),
            3 => ("block cross haar-unitary".to_string(), block_observable(&haar_unitary(d, &mut rng), true)),
            _ => ("block cross signs".to_string(), block_observable(&random_signs(&mut rng), true)),
        };
        Candidate { description: format!("{description} #{r}"), observable }
    }
}

/// `(I ⊗ H) M (I ⊗ H)` with `H` on the last qubit, one 2×2 block at a time.
pub fn label_hadamard(m: &CMatrix) -> CMatrix {
    let mut out = m.clone();
    for x in (0..m.nrows()).step_by(2) {
        for y in (0..m.ncols()).step_by(2) {
            let (a, b) = (m[(x, y)], m[(x, y + 1)]);
            let (cc, dd) = (m[(x + 1, y)], m[(x + 1, y + 1)]);
            out[(x, y)] = (a + b + cc + dd) * 0.5;
            out[(x, y + 1)] = (a - b + cc - dd) * 0.5;
            out[(x + 1, y)] = (a + b - cc - dd) * 0.5;
            out[(x + 1, y + 1)] = (a - b - cc + dd) * 0.5;
        }
    }
    out
}

/// `(I ⊗ H) M' (I ⊗ H)` where `M'` has `K` in the `−−` block, or `K` and `K†`
/// in the off-diagonal blocks when `cross`.
pub fn block_observable(k: &CMatrix, cross: bool) -> Observable {
    let d = k.nrows();
    let mut mp = CMatrix::zeros(2 * d, 2 * d);
    for x in 0..d {
        for y in 0..d {
            if cross {
                mp[(x << 1, (y << 1) | 1)] = k[(x, y)];
                mp[((x << 1) | 1, y << 1)] = k[(y, x)].conj();
            } else {
                mp[((x << 1) | 1, (y << 1) | 1)] = k[(x, y)];
            }
        }
    }
    let mut m = label_hadamard(&mp);
    m = (&m + m.adjoint()) * c(0.5, 0.0);
    Observable::new(m).expect("Hermitian by construction")
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanResult {
    pub value: f64,
    pub argmax: String,
    pub candidates: usize,
    pub exhaustive_paulis: bool,
}

/// Largest variance over the candidate set; a lower bound on the supremum
/// over all `‖M‖ ≤ 1`.
pub fn max_variance_scan(model: &dyn VarianceModel, set: &CandidateSet) -> Result<ScanResult> {
    if set.qubits != model.num_qubits() {
        return Err(Error::DimensionMismatch { expected: model.num_qubits(), got: set.qubits });
    }
    let best = (0..set.len())
        .into_par_iter()
        .map(|i| model.variance(&set.get(i).observable).map(|v| (v, i)))
        .try_reduce(|| (f64::NEG_INFINITY, usize::MAX), |a, b| Ok(pick(a, b)))?;
    Ok(ScanResult {
        value: best.0.max(0.0),
        argmax: if best.1 == usize::MAX { String::new() } else { set.get(best.1).description },
        candidates: set.len(),
        exhaustive_paulis: set.exhaustive_paulis(),
    })
}

// Larger value wins, then the lower index, so the result ignores scheduling.
fn pick(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

/// `τ² / maxvar` with its bookkeeping.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub quantity: String,
    /// Infinite (serialized as null) when `unbounded`.
    pub value: f64,
    pub tau: f64,
    pub n: usize,
    pub ensemble: String,
    pub method: String,
    /// True unless `maxvar` is known to upper-bound the supremum.
    pub heuristic: bool,
    pub unbounded: bool,
}

pub fn qsd_variance_bound(ensemble: &str, n: usize, tau: f64, maxvar: f64, certified: bool) -> Result<BoundReport> {
    if !(maxvar >= 0.0) || !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!("need maxvar >= 0 and tau > 0, got {maxvar}, {tau}")));
    }
    let unbounded = maxvar == 0.0;
    Ok(BoundReport {
        quantity: "qsd".into(),
        value: if unbounded { f64::INFINITY } else { tau * tau / maxvar },
        tau,
        n,
        ensemble: ensemble.into(),
        method: "variance".into(),
        heuristic: !certified,
        unbounded,
    })
}
