//! Pauli strings with matrix-free expectation values.

use std::fmt;
use std::str::FromStr;

use super::linalg::{c, CMatrix, C64};
use super::state::{Expectation, Observable, PureState};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> CMatrix {
        let (o, l, i) = (c(0., 0.), c(1., 0.), c(0., 1.));
        match self {
            Pauli::I => CMatrix::from_row_slice(2, 2, &[l, o, o, l]),
            Pauli::X => CMatrix::from_row_slice(2, 2, &[o, l, l, o]),
            Pauli::Y => CMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
            Pauli::Z => CMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
        }
    }

    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of single-qubit Paulis; `ops[0]` acts on the most significant qubit.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    ops: Vec<Pauli>,
}

impl PauliString {
    pub fn new(ops: Vec<Pauli>) -> Self {
        PauliString { ops }
    }

    pub fn identity(m: usize) -> Self {
        PauliString { ops: vec![Pauli::I; m] }
    }

    /// Base-4 digits of `index` (I=0, X=1, Y=2, Z=3), most significant digit on qubit 0.
    pub fn from_index(index: usize, m: usize) -> Self {
        let ops = (0..m)
            .map(|q| Pauli::ALL[(index >> (2 * (m - 1 - q))) & 3])
            .collect();
        PauliString { ops }
    }

    /// All `4^m` strings in index order.
    pub fn all(m: usize) -> impl Iterator<Item = PauliString> {
        (0..1usize << (2 * m)).map(move |i| PauliString::from_index(i, m))
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.ops.iter().all(|&p| p == Pauli::I)
    }

    /// Embeds this string on the given qubits of an `m`-qubit register.
    pub fn embed(&self, qubits: &[usize], m: usize) -> Result<PauliString> {
        if qubits.len() != self.ops.len() || qubits.iter().any(|&q| q >= m) {
            return Err(Error::InvalidArgument("bad embedding".into()));
        }
        let mut ops = vec![Pauli::I; m];
        for (&q, &p) in qubits.iter().zip(&self.ops) {
            ops[q] = p;
        }
        Ok(PauliString { ops })
    }

    pub fn to_matrix(&self) -> CMatrix {
        self.ops
            .iter()
            .fold(CMatrix::identity(1, 1), |acc, p| acc.kronecker(&p.matrix()))
    }

    pub fn to_observable(&self) -> Observable {
        Observable::new(self.to_matrix()).expect("Pauli strings are Hermitian")
    }

    fn masks(&self) -> (usize, usize, u32) {
        let m = self.ops.len();
        let (mut flip, mut phase, mut ys) = (0usize, 0usize, 0u32);
        for (q, p) in self.ops.iter().enumerate() {
            let bit = 1usize << (m - 1 - q);
            match p {
                Pauli::I => {}
                Pauli::X => flip |= bit,
                Pauli::Y => {
                    flip |= bit;
                    phase |= bit;
                    ys += 1;
                }
                Pauli::Z => phase |= bit,
            }
        }
        (flip, phase, ys)
    }
}

impl Expectation for PauliString {
    fn num_qubits(&self) -> usize {
        self.ops.len()
    }

    fn expectation_pure(&self, psi: &PureState) -> f64 {
        // P|x⟩ = i^{#Y} (-1)^{|x ∧ phase|} |x ⊕ flip⟩
        let (flip, phase, ys) = self.masks();
        let amps = psi.amplitudes();
        let mut acc = C64::default();
        for x in 0..amps.len() {
            let sign = if (x & phase).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            acc += amps[x ^ flip].conj() * amps[x] * sign;
        }
        let i_pow = [c(1., 0.), c(0., 1.), c(-1., 0.), c(0., -1.)][(ys % 4) as usize];
        (acc * i_pow).re
    }

    fn trace(&self) -> f64 {
        if self.is_identity() {
            (1usize << self.ops.len()) as f64
        } else {
            0.0
        }
    }

    fn trace_of_square(&self) -> f64 {
        (1usize << self.ops.len()) as f64
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.ops {
            write!(f, "{}", p.letter())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let ops = s
            .chars()
            .map(|ch| match ch {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::InvalidArgument(format!("bad Pauli letter {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliString { ops })
    }
}
