//! Low-order moments of degree-2 phase states, averaged over all canonical `A`.
//!
//! Phase-state amplitudes are real, so every moment is a symmetric tensor in
//! its indices regardless of which slots are kets and which are bras. Tensors
//! are stored flat, row-major over `(i_1, …, i_r)` with `i_k ∈ [0, 2^n)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::{quadratic_truth_table, BitMatrix};

/// Exact `E_A` of `φ_A^{⊗r}` for `r = 1..=4`.
#[derive(Clone, Debug)]
pub struct Degree2Moments {
    n: usize,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    pub third: Vec<f64>,
    pub fourth: Vec<f64>,
}

impl Degree2Moments {
    /// Averages over all `2^{n(n+1)/2}` upper-triangular `A`.
    pub fn exhaustive(n: usize) -> Result<Self> {
        if n == 0 || n > 4 {
            return Err(Error::Unsupported(format!("exhaustive moments for n = {n}")));
        }
        let d = 1usize << n;
        let count = BitMatrix::upper_triangular_count(n);
        let mut m = Degree2Moments {
            n,
            first: vec![0.0; d],
            second: vec![0.0; d * d],
            third: vec![0.0; d * d * d],
            fourth: vec![0.0; d * d * d * d],
        };
        let amp = 1.0 / (d as f64).sqrt();
        let w = 1.0 / count as f64;
        for idx in 0..count {
            let table = quadratic_truth_table(&BitMatrix::upper_triangular_from_index(n, idx)?)?;
            let phi: Vec<f64> = table.iter().map(|&b| if b { -amp } else { amp }).collect();
            for a in 0..d {
                let pa = w * phi[a];
                m.first[a] += pa;
                for b in 0..d {
                    let pab = pa * phi[b];
                    m.second[a * d + b] += pab;
                    for c in 0..d {
                        let pabc = pab * phi[c];
                        let base = (a * d + b) * d + c;
                        m.third[base] += pabc;
                        let row = &mut m.fourth[base * d..base * d + d];
                        for (slot, &pd) in row.iter_mut().zip(&phi) {
                            *slot += pabc * pd;
                        }
                    }
                }
            }
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn tensor(&self, rank: usize) -> &[f64] {
        match rank {
            1 => &self.first,
            2 => &self.second,
            3 => &self.third,
            _ => &self.fourth,
        }
    }
}

/// One of the seven stated moment formulas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MomentIdentity {
    /// `E|φ⟩ = |0⟩/√2^n`
    Mean,
    /// `E|φ⟩^{⊗2} = |Φ⁺⟩/√2^n`
    KetKet,
    /// `E|φ⟩⟨φ| = I/2^n`
    Density,
    /// `E|φ⟩⊗⟨φ| = 2^{-n} Σ_x |x⟩⊗⟨x|`
    KetBra,
    /// `E|φ⟩⊗|φ⟩⟨φ| = |0⟩⊗|0⟩⟨0| / 2^{3n/2}`
    KetDensity,
    /// `E|φ⟩⟨φ|⊗|φ⟩`, the symmetric third moment
    DensityKet,
    /// `E|φ⟩⟨φ|^{⊗2}`
    DensityDensity,
}

impl MomentIdentity {
    pub const ALL: [MomentIdentity; 7] = [
        MomentIdentity::Mean,
        MomentIdentity::KetKet,
        MomentIdentity::Density,
        MomentIdentity::KetBra,
        MomentIdentity::KetDensity,
        MomentIdentity::DensityKet,
        MomentIdentity::DensityDensity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MomentIdentity::Mean => "E[|phi>]",
            MomentIdentity::KetKet => "E[|phi>|phi>]",
            MomentIdentity::Density => "E[|phi><phi|]",
            MomentIdentity::KetBra => "E[|phi> (x) <phi|]",
            MomentIdentity::KetDensity => "E[|phi> (x) |phi><phi|]",
            MomentIdentity::DensityKet => "E[|phi><phi| (x) |phi>]",
            MomentIdentity::DensityDensity => "E[|phi><phi| (x) |phi><phi|]",
        }
    }

    pub fn rank(self) -> usize {
        match self {
            MomentIdentity::Mean => 1,
            MomentIdentity::KetKet | MomentIdentity::Density | MomentIdentity::KetBra => 2,
            MomentIdentity::KetDensity | MomentIdentity::DensityKet => 3,
            MomentIdentity::DensityDensity => 4,
        }
    }

    /// The formula's entry at `idx`, with `d = 2^n`.
    ///
    /// Index order: kets of the first factor, then the second factor's ket and
    /// bra. For `DensityKet` that is `(row, col, ket)`; for `DensityDensity`
    /// it is `(row₁, col₁, row₂, col₂)`.
    pub fn claimed(self, d: usize, idx: &[usize]) -> f64 {
        let df = d as f64;
        let is = |b: bool| b as u8 as f64;
        match self {
            MomentIdentity::Mean => is(idx[0] == 0) / df.sqrt(),
            MomentIdentity::KetKet | MomentIdentity::Density | MomentIdentity::KetBra => {
                is(idx[0] == idx[1]) / df
            }
            MomentIdentity::KetDensity => is(idx.iter().all(|&i| i == 0)) / df.powf(1.5),
            MomentIdentity::DensityKet => third_moment(d, idx[0], idx[1], idx[2]),
            MomentIdentity::DensityDensity => {
                // ⟨r₁ r₂| · |c₁ c₂⟩ with I, SWAP and Φ⁺Φ⁺† pairings.
                let (r1, c1, r2, c2) = (idx[0], idx[1], idx[2], idx[3]);
                let all = r1 == c1 && c1 == r2 && r2 == c2;
                (is(r1 == c1 && r2 == c2) + is(r1 == c2 && r2 == c1) + is(r1 == r2 && c1 == c2)
                    - 2.0 * is(all))
                    / (df * df)
            }
        }
    }
}

/// `E[φ(a)φ(b)φ(c)] = 2^{-3n/2}([a=b][c=0] + [a=c][b=0] + [b=c][a=0] − 2[a=b=c=0])`.
pub fn third_moment(d: usize, a: usize, b: usize, c: usize) -> f64 {
    let is = |x: bool| x as u8 as f64;
    (is(a == b && c == 0) + is(a == c && b == 0) + is(b == c && a == 0) - 2.0 * is(a == 0 && b == 0 && c == 0))
        / (d as f64).powf(1.5)
}

/// `E[φ(a)φ(b)φ(c)φ(e)]`: the three pairings minus twice the full diagonal, over `4^n`.
pub fn fourth_moment(d: usize, a: usize, b: usize, c: usize, e: usize) -> f64 {
    MomentIdentity::DensityDensity.claimed(d, &[a, b, c, e])
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentCheck {
    pub identity: MomentIdentity,
    pub name: &'static str,
    pub n: usize,
    pub max_error: f64,
    pub pass: bool,
}

/// Largest entrywise gap between the exhaustive average and each formula.
pub fn check_moment_identities(moments: &Degree2Moments, tol: f64) -> Vec<MomentCheck> {
    let d = 1usize << moments.n;
    MomentIdentity::ALL
        .iter()
        .map(|&id| {
            let r = id.rank();
            let data = moments.tensor(r);
            let mut idx = vec![0usize; r];
            let mut max_error = 0.0f64;
            for (flat, &value) in data.iter().enumerate() {
                let mut rest = flat;
                for slot in idx.iter_mut().rev() {
                    *slot = rest % d;
                    rest /= d;
                }
                max_error = max_error.max((value - id.claimed(d, &idx)).abs());
            }
            MomentCheck { identity: id, name: id.name(), n: moments.n, max_error, pass: max_error <= tol }
        })
        .collect()
}
