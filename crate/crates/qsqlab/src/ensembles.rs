//! Constructors for the state families used by the learners and bounds.
//!
//! Boolean functions are passed as truth tables indexed by amplitude index
//! (bit 0 most significant). Example states put the label qubit last.

use std::collections::{HashSet, VecDeque};
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::linalg::{c, qubits_for_dim, CMatrix, C64};
use crate::qcore::{
    quadratic_truth_table, BitMatrix, BitVector, DensityMatrix, Distribution, PauliString,
    PureState, QuantumState,
};

#[derive(Clone, Debug)]
pub struct Member {
    pub label: String,
    pub state: QuantumState,
}

/// Finite weighted family of states of a common dimension.
#[derive(Clone, Debug)]
pub struct Ensemble {
    name: String,
    members: Vec<Member>,
    weights: Vec<f64>,
}

#[derive(Serialize)]
struct ManifestEntry<'a> {
    label: &'a str,
    kind: &'static str,
    weight: f64,
}

impl Ensemble {
    pub fn uniform(name: impl Into<String>, members: Vec<Member>) -> Result<Self> {
        let w = 1.0 / members.len().max(1) as f64;
        let weights = vec![w; members.len()];
        Ensemble::weighted(name, members, weights)
    }

    pub fn weighted(name: impl Into<String>, members: Vec<Member>, weights: Vec<f64>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty ensemble".into()))?;
        if weights.len() != members.len() {
            return Err(Error::DimensionMismatch { expected: members.len(), got: weights.len() });
        }
        if let Some(m) = members.iter().find(|m| m.state.dim() != first.state.dim()) {
            return Err(Error::DimensionMismatch { expected: first.state.dim(), got: m.state.dim() });
        }
        if weights.iter().any(|w| !(*w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument("weights must be a probability vector".into()));
        }
        Ok(Ensemble { name: name.into(), members, weights })
    }

    /// Uniform ensemble of labelled pure states.
    pub fn from_pure(name: impl Into<String>, states: Vec<(String, PureState)>) -> Result<Self> {
        Ensemble::uniform(
            name,
            states.into_iter().map(|(label, s)| Member { label, state: s.into() }).collect(),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.members[0].state.dim()
    }

    pub fn num_qubits(&self) -> usize {
        self.members[0].state.num_qubits()
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> impl Iterator<Item = &QuantumState> {
        self.members.iter().map(|m| &m.state)
    }

    /// `E[ρ]`.
    pub fn mean_density(&self) -> DensityMatrix {
        let d = self.dim();
        let mut acc = CMatrix::zeros(d, d);
        for (m, &w) in self.members.iter().zip(&self.weights) {
            acc += m.state.to_density().into_matrix() * c(w, 0.0);
        }
        DensityMatrix::new(acc).expect("mixture of valid states")
    }

    /// JSON manifest: ensemble name, dimension and per-member label/kind/weight.
    pub fn manifest(&self) -> serde_json::Value {
        let entries: Vec<_> = self
            .members
            .iter()
            .zip(&self.weights)
            .map(|(m, &w)| ManifestEntry {
                label: &m.label,
                kind: match m.state {
                    QuantumState::Pure(_) => "pure",
                    QuantumState::Mixed(_) => "mixed",
                },
                weight: w,
            })
            .collect();
        serde_json::json!({
            "name": self.name,
            "dimension": self.dim(),
            "qubits": self.num_qubits(),
            "members": entries,
        })
    }

    /// Writes `member,index,re,im` rows for every pure member.
    pub fn write_amplitudes_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::InvalidArgument(e.to_string());
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["member", "index", "re", "im"]).map_err(io)?;
        for m in &self.members {
            if let QuantumState::Pure(p) = &m.state {
                for (i, a) in p.amplitudes().iter().enumerate() {
                    w.write_record([m.label.clone(), i.to_string(), a.re.to_string(), a.im.to_string()])
                        .map_err(io)?;
                }
            }
        }
        w.flush().map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(())
    }
}

fn table_qubits(table: &[bool]) -> Result<usize> {
    match qubits_for_dim(table.len()) {
        Some(n) if n >= 1 => Ok(n),
        _ => Err(Error::InvalidArgument(format!(
            "truth table length {} is not 2^n with n >= 1",
            table.len()
        ))),
    }
}

/// `2^{-n/2} Σ_x |x, f(x)⟩`.
pub fn function_state(table: &[bool]) -> Result<PureState> {
    noisy_example_state(table, 0.0)
}

/// `2^{-n/2} Σ_x (−1)^{f(x)} |x⟩`.
pub fn phase_state(table: &[bool]) -> Result<PureState> {
    let n = table_qubits(table)?;
    let a = 1.0 / ((1usize << n) as f64).sqrt();
    PureState::from_real(&table.iter().map(|&b| if b { -a } else { a }).collect::<Vec<_>>())
}

/// `2^{-n/2} Σ_x |x⟩(√(1−η)|f(x)⟩ + √η|1⊕f(x)⟩)`.
pub fn noisy_example_state(table: &[bool], eta: f64) -> Result<PureState> {
    if !(0.0..=0.5).contains(&eta) {
        return Err(Error::InvalidArgument(format!("noise rate {eta} outside [0, 1/2]")));
    }
    let n = table_qubits(table)?;
    let a = 1.0 / ((1usize << n) as f64).sqrt();
    let (keep, flip) = ((1.0 - eta).sqrt() * a, eta.sqrt() * a);
    let mut amps = vec![0.0; 2 << n];
    for (x, &fx) in table.iter().enumerate() {
        amps[(x << 1) | fx as usize] = keep;
        amps[(x << 1) | !fx as usize] = flip;
    }
    PureState::from_real(&amps)
}

/// `(1/2^{n−1}) Σ_{x̄} |x̄⟩⟨x̄|` with `|x̄⟩ = (|x⟩ + |x⊕s⟩)/√2`, one term per coset of `{0, s}`.
pub fn coset_state(s: &BitVector) -> Result<DensityMatrix> {
    if s.is_zero() {
        return Err(Error::InvalidArgument("hidden shift s must be nonzero".into()));
    }
    let n = s.len();
    let d = 1usize << n;
    let shift = s.index();
    let w = 1.0 / (d / 2) as f64;
    let mut mat = CMatrix::zeros(d, d);
    for x in 0..d {
        let y = x ^ shift;
        if x < y {
            // (|x⟩+|y⟩)(⟨x|+⟨y|)/2 weighted by 1/2^{n-1}
            for &(i, j) in &[(x, x), (x, y), (y, x), (y, y)] {
                mat[(i, j)] += c(0.5 * w, 0.0);
            }
        }
    }
    DensityMatrix::new(mat)
}

/// Qubits of the padded register that holds `[n]`.
pub fn register_qubits(n: usize) -> usize {
    n.next_power_of_two().trailing_zeros().max(1) as usize
}

/// `(1/√k) Σ_{i∈S} |i⟩` with elements of `S` numbered from 1; `|i⟩` is basis index `i − 1`.
pub fn coupon_state(n: usize, subset: &[usize]) -> Result<PureState> {
    if subset.is_empty() {
        return Err(Error::InvalidArgument("coupon subset must be nonempty".into()));
    }
    let distinct: HashSet<_> = subset.iter().collect();
    if distinct.len() != subset.len() || subset.iter().any(|&i| i == 0 || i > n) {
        return Err(Error::InvalidArgument("subset must hold distinct elements of [n]".into()));
    }
    let d = 1usize << register_qubits(n);
    let a = 1.0 / (subset.len() as f64).sqrt();
    let mut amps = vec![0.0; d];
    for &i in subset {
        amps[i - 1] = a;
    }
    PureState::from_real(&amps)
}

/// `(1/√n) Σ_i |i⟩|(Gx)_i⟩` for an `n × k` generator of full column rank.
pub fn codeword_state(g: &BitMatrix, x: &BitVector) -> Result<PureState> {
    if g.rank() != g.ncols() {
        return Err(Error::InvalidArgument("generator must have full column rank".into()));
    }
    let n = g.nrows();
    let word = g.mul_vec(x)?;
    let d = 2usize << register_qubits(n);
    let a = 1.0 / (n as f64).sqrt();
    let mut amps = vec![0.0; d];
    for i in 0..n {
        amps[(i << 1) | word.get(i) as usize] = a;
    }
    PureState::from_real(&amps)
}

/// Planted biclique: `n` bits, hidden subset `S` (numbered from 1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BicliqueParams {
    n: usize,
    subset: Vec<usize>,
}

impl BicliqueParams {
    pub fn new(n: usize, subset: Vec<usize>) -> Result<Self> {
        let distinct: HashSet<_> = subset.iter().collect();
        if subset.is_empty() || distinct.len() != subset.len() || subset.iter().any(|&i| i == 0 || i > n) {
            return Err(Error::InvalidArgument("need 1 <= k <= n distinct elements of [n]".into()));
        }
        Ok(BicliqueParams { n, subset })
    }

    /// `S = {1, …, k}`.
    pub fn leading(n: usize, k: usize) -> Result<Self> {
        BicliqueParams::new(n, (1..=k).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.subset.len()
    }

    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    fn block_mask(&self) -> usize {
        self.subset.iter().fold(0, |m, &i| m | 1 << (self.n - i))
    }
}

/// `D_S`: extra mass `k/n` spread over `{x : x_S = 1_S}`, the rest uniform.
pub fn biclique_distribution(p: &BicliqueParams) -> Distribution {
    let (n, k) = (p.n as i32, p.k() as i32);
    let r = p.k() as f64 / p.n as f64;
    let inside = r / 2f64.powi(n - k) + (1.0 - r) / 2f64.powi(n);
    let outside = (1.0 - r) / 2f64.powi(n);
    let mask = p.block_mask();
    let probs = (0..1usize << p.n)
        .map(|x| if x & mask == mask { inside } else { outside })
        .collect();
    Distribution::new(probs).expect("biclique mass sums to one")
}

pub fn biclique_state(p: &BicliqueParams) -> Result<PureState> {
    biclique_distribution(p).coherent_encoding()
}

/// `(k/n)(1 − 2^{−k})`.
pub fn biclique_tv_closed_form(n: usize, k: usize) -> f64 {
    (k as f64 / n as f64) * (1.0 - 2f64.powi(-(k as i32)))
}

/// Exact `⟨+^n|ψ_S⟩ = √(1−k/n)(1 − 2^{−k}) + 2^{−k/2} √(k/n + (1−k/n)/2^k)`.
pub fn biclique_overlap_closed_form(n: usize, k: usize) -> f64 {
    let r = k as f64 / n as f64;
    let tk = 2f64.powi(-(k as i32));
    (1.0 - r).sqrt() * (1.0 - tk) + tk.sqrt() * (r + (1.0 - r) * tk).sqrt()
}

/// `(I + 3ε P)/2^n`.
pub fn shadow_state(pauli: &PauliString, eps: f64) -> Result<DensityMatrix> {
    if pauli.is_identity() {
        return Err(Error::InvalidArgument("Pauli must not be the identity".into()));
    }
    if !(eps > 0.0 && 3.0 * eps <= 1.0) {
        return Err(Error::InvalidArgument(format!("need 0 < 3ε <= 1, got ε = {eps}")));
    }
    let d = 1usize << pauli.len();
    let mat = (CMatrix::identity(d, d) + pauli.to_matrix() * c(3.0 * eps, 0.0)) * c(1.0 / d as f64, 0.0);
    DensityMatrix::new(mat)
}

/// Coset states for every nonzero shift on `n` bits, labelled by the shift.
pub fn coset_ensemble(n: usize) -> Result<Ensemble> {
    if n == 0 || n > 8 {
        return Err(Error::Unsupported(format!("coset enumeration for n = {n}")));
    }
    let members = (1..1usize << n)
        .map(|s| {
            let v = BitVector::from_index(s, n)?;
            Ok(Member { label: v.to_string(), state: coset_state(&v)?.into() })
        })
        .collect::<Result<Vec<_>>>()?;
    Ensemble::uniform(format!("coset-n{n}"), members)
}

/// Shadow states for all `4^m − 1` non-identity Pauli strings.
pub fn shadow_ensemble(m: usize, eps: f64) -> Result<Ensemble> {
    if m == 0 || m > 4 {
        return Err(Error::Unsupported(format!("shadow enumeration for m = {m}")));
    }
    let members = PauliString::all(m)
        .filter(|p| !p.is_identity())
        .map(|p| Ok(Member { label: p.to_string(), state: shadow_state(&p, eps)?.into() }))
        .collect::<Result<Vec<_>>>()?;
    Ensemble::uniform(format!("shadow-m{m}"), members)
}

/// `ψ ⊗ |0^k⟩`.
pub fn padded_state(psi: &PureState, k: usize) -> PureState {
    if k == 0 {
        return psi.clone();
    }
    psi.tensor(&PureState::basis(k, 0).expect("valid basis state"))
}

/// Truth table of `f_A` for the `idx`-th canonical matrix.
pub fn degree2_table(n: usize, idx: usize) -> Result<Vec<bool>> {
    quadratic_truth_table(&BitMatrix::upper_triangular_from_index(n, idx)?)
}

/// Example states `ψ_A` (n+1 qubits) for every canonical `A`, labelled by matrix index.
pub fn degree2_example_ensemble(n: usize) -> Result<Ensemble> {
    degree2_family(n, function_state, "degree2-example")
}

/// Phase states `φ_A` (n qubits) for every canonical `A`.
pub fn degree2_phase_ensemble(n: usize) -> Result<Ensemble> {
    degree2_family(n, phase_state, "degree2-phase")
}

fn degree2_family(n: usize, build: fn(&[bool]) -> Result<PureState>, name: &str) -> Result<Ensemble> {
    if n == 0 || n > 5 {
        return Err(Error::Unsupported(format!("degree-2 enumeration for n = {n}")));
    }
    let states = (0..BitMatrix::upper_triangular_count(n))
        .map(|idx| Ok((format!("A{idx}"), build(&degree2_table(n, idx)?)?)))
        .collect::<Result<Vec<_>>>()?;
    Ensemble::from_pure(format!("{name}-n{n}"), states)
}

/// All `m`-qubit stabilizer states (6 for m=1, 60 for m=2), uniform weights.
pub fn stabilizer_ensemble(m: usize) -> Result<Ensemble> {
    if !(1..=2).contains(&m) {
        return Err(Error::Unsupported(format!("stabilizer enumeration for m = {m}")));
    }
    let d = 1usize << m;
    let h = 1.0 / 2f64.sqrt();
    let mut gates: Vec<CMatrix> = Vec::new();
    for q in 0..m {
        let single = |g: CMatrix| {
            (0..m).fold(CMatrix::identity(1, 1), |acc, p| {
                acc.kronecker(&if p == q { g.clone() } else { CMatrix::identity(2, 2) })
            })
        };
        gates.push(single(CMatrix::from_row_slice(2, 2, &[c(h, 0.), c(h, 0.), c(h, 0.), c(-h, 0.)])));
        gates.push(single(CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 1.)])));
    }
    if m == 2 {
        // CNOT with control qubit 0 (most significant) and target qubit 1.
        let mut cx = CMatrix::zeros(4, 4);
        for (i, j) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
            cx[(i, j)] = c(1., 0.);
        }
        gates.push(cx);
    }
    let key = |v: &[C64]| -> Vec<(i64, i64)> {
        let lead = v.iter().find(|a| a.norm() > 1e-9).copied().unwrap_or(c(1., 0.));
        let phase = lead.conj() / lead.norm();
        v.iter()
            .map(|a| {
                let z = a * phase;
                ((z.re * 1e6).round() as i64, (z.im * 1e6).round() as i64)
            })
            .collect()
    };
    let start: Vec<C64> = (0..d).map(|i| c(if i == 0 { 1. } else { 0. }, 0.)).collect();
    let mut seen = HashSet::new();
    let mut found = Vec::new();
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        if !seen.insert(key(&v)) {
            continue;
        }
        for g in &gates {
            let w = g * crate::qcore::CVector::from_vec(v.clone());
            queue.push_back(w.as_slice().to_vec());
        }
        found.push(v);
    }
    let states = found
        .into_iter()
        .enumerate()
        .map(|(i, v)| Ok((format!("stab{i}"), PureState::from_unnormalized(v)?)))
        .collect::<Result<Vec<_>>>()?;
    Ensemble::from_pure(format!("stabilizer-m{m}"), states)
}

/// Minimum and mean pairwise disagreement fraction over a class of distinct functions.
pub fn class_eta(tables: &[Vec<bool>]) -> Result<(f64, f64)> {
    if tables.len() < 2 {
        return Err(Error::InvalidArgument("need at least two concepts".into()));
    }
    let len = tables[0].len();
    if tables.iter().any(|t| t.len() != len) {
        return Err(Error::InvalidArgument("truth tables differ in length".into()));
    }
    let distinct: HashSet<&Vec<bool>> = tables.iter().collect();
    if distinct.len() != tables.len() {
        return Err(Error::InvalidArgument("concept class contains duplicates".into()));
    }
    let (mut min, mut sum, mut pairs) = (f64::INFINITY, 0.0, 0usize);
    for i in 0..tables.len() {
        for j in i + 1..tables.len() {
            let d = tables[i].iter().zip(&tables[j]).filter(|(a, b)| a != b).count() as f64 / len as f64;
            min = min.min(d);
            sum += d;
            pairs += 1;
        }
    }
    Ok((min, sum / pairs as f64))
}
