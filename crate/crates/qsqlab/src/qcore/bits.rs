//! Bit strings and matrices over GF(2).
//!
//! Bit `i` (0-based) of a [`BitVector`] is the `i+1`-th character of its
//! string form and the most significant bit of the amplitude index, so
//! `BitVector::from_index(idx, n).index() == idx`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Longest supported bit string.
pub const MAX_BITS: usize = 64;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitVector {
    len: usize,
    word: u64,
}

impl BitVector {
    pub fn zeros(len: usize) -> Result<Self> {
        check_len(len)?;
        Ok(BitVector { len, word: 0 })
    }

    /// Builds the vector whose amplitude index is `index`.
    pub fn from_index(index: usize, len: usize) -> Result<Self> {
        check_len(len)?;
        let index = index as u64;
        if len < 64 && index >> len != 0 {
            return Err(Error::InvalidArgument(format!(
                "index {index} does not fit in {len} bits"
            )));
        }
        Ok(BitVector { len, word: index })
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let mut v = BitVector::zeros(bits.len())?;
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        Ok(v)
    }

    /// Unit vector with a single one at position `i`.
    pub fn unit(i: usize, len: usize) -> Result<Self> {
        let mut v = BitVector::zeros(len)?;
        if i >= len {
            return Err(Error::InvalidArgument(format!("bit {i} out of range")));
        }
        v.set(i, true);
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn index(&self) -> usize {
        self.word as usize
    }

    fn mask(&self, i: usize) -> u64 {
        1u64 << (self.len - 1 - i)
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        self.word & self.mask(i) != 0
    }

    pub fn set(&mut self, i: usize, b: bool) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        let m = self.mask(i);
        if b {
            self.word |= m;
        } else {
            self.word &= !m;
        }
    }

    pub fn xor(&self, other: &BitVector) -> BitVector {
        assert_eq!(self.len, other.len);
        BitVector { len: self.len, word: self.word ^ other.word }
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len);
        (self.word & other.word).count_ones() % 2 == 1
    }

    pub fn weight(&self) -> usize {
        self.word.count_ones() as usize
    }

    pub fn is_zero(&self) -> bool {
        self.word == 0
    }

    pub fn bits(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    /// Index of the first set bit, scanning from bit 0.
    pub fn leading_one(&self) -> Option<usize> {
        (0..self.len).find(|&i| self.get(i))
    }
}

fn check_len(len: usize) -> Result<()> {
    if len == 0 || len > MAX_BITS {
        return Err(Error::InvalidArgument(format!(
            "bit string length {len} outside 1..={MAX_BITS}"
        )));
    }
    Ok(())
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidArgument(format!("bad bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        BitVector::from_bits(&bits)
    }
}

/// Dense matrix over GF(2), stored as rows.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitMatrix {
    rows: Vec<BitVector>,
    cols: usize,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 {
            return Err(Error::InvalidArgument("matrix needs at least one row".into()));
        }
        Ok(BitMatrix { rows: vec![BitVector::zeros(cols)?; rows], cols })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = BitMatrix::zeros(n, n)?;
        for i in 0..n {
            m.set(i, i, true);
        }
        Ok(m)
    }

    pub fn from_rows(rows: Vec<BitVector>) -> Result<Self> {
        let cols = rows
            .first()
            .ok_or_else(|| Error::InvalidArgument("matrix needs at least one row".into()))?
            .len();
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch { expected: cols, got: bad.len() });
        }
        Ok(BitMatrix { rows, cols })
    }

    /// Parses rows given as 0/1 integers, e.g. `&[&[1, 0], &[0, 1]]`.
    pub fn from_u8_rows(rows: &[&[u8]]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| BitVector::from_bits(&r.iter().map(|&b| b != 0).collect::<Vec<_>>()))
            .collect::<Result<Vec<_>>>()?;
        BitMatrix::from_rows(rows)
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows.len() == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, b: bool) {
        self.rows[i].set(j, b);
    }

    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows.len()).expect("nonempty");
        for i in 0..self.rows.len() {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn add(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.nrows() != other.nrows() || self.cols != other.cols {
            return Err(Error::DimensionMismatch { expected: self.nrows(), got: other.nrows() });
        }
        let rows = self.rows.iter().zip(&other.rows).map(|(a, b)| a.xor(b)).collect();
        Ok(BitMatrix { rows, cols: self.cols })
    }

    pub fn mul_vec(&self, x: &BitVector) -> Result<BitVector> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, got: x.len() });
        }
        let mut out = BitVector::zeros(self.rows.len())?;
        for (i, r) in self.rows.iter().enumerate() {
            out.set(i, r.dot(x));
        }
        Ok(out)
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.nrows()).all(|i| (0..i.min(self.cols)).all(|j| !self.get(i, j)))
    }

    pub fn rank(&self) -> usize {
        Echelon::from_vectors(self.cols, self.rows.iter().copied()).rank()
    }

    /// Number of canonical (upper-triangular) n×n matrices, `2^{n(n+1)/2}`.
    pub fn upper_triangular_count(n: usize) -> usize {
        1usize << (n * (n + 1) / 2)
    }

    /// The `idx`-th upper-triangular matrix. Entry `(i, j)` with `i <= j`
    /// takes the bit of `idx` at row-major position, first entry most significant.
    pub fn upper_triangular_from_index(n: usize, idx: usize) -> Result<BitMatrix> {
        let slots = n * (n + 1) / 2;
        if slots >= usize::BITS as usize || idx >> slots != 0 {
            return Err(Error::InvalidArgument(format!("index {idx} out of range for n={n}")));
        }
        let mut m = BitMatrix::zeros(n, n)?;
        let mut pos = slots;
        for i in 0..n {
            for j in i..n {
                pos -= 1;
                m.set(i, j, (idx >> pos) & 1 == 1);
            }
        }
        Ok(m)
    }

    /// Inverse of [`BitMatrix::upper_triangular_from_index`]; lower entries are ignored.
    pub fn upper_triangular_index(&self) -> usize {
        let n = self.nrows();
        let mut idx = 0usize;
        for i in 0..n {
            for j in i..n {
                idx = (idx << 1) | self.get(i, j) as usize;
            }
        }
        idx
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self.rows.iter().map(|r| r.to_string()).collect();
        write!(f, "BitMatrix[{}]", rows.join(","))
    }
}

/// `x^T A x mod 2`.
pub fn quad_form_eval(a: &BitMatrix, x: &BitVector) -> Result<bool> {
    if !a.is_square() {
        return Err(Error::InvalidArgument("quadratic form needs a square matrix".into()));
    }
    if a.nrows() != x.len() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: x.len() });
    }
    let mut acc = false;
    for i in 0..x.len() {
        if x.get(i) {
            acc ^= a.row(i).dot(x);
        }
    }
    Ok(acc)
}

/// Upper-triangular representative: keeps the diagonal and folds `A_ji` into `A_ij` for `i < j`.
pub fn canonicalize_quadratic(a: &BitMatrix) -> Result<BitMatrix> {
    if !a.is_square() {
        return Err(Error::InvalidArgument("quadratic form needs a square matrix".into()));
    }
    let n = a.nrows();
    let mut c = BitMatrix::zeros(n, n)?;
    for i in 0..n {
        c.set(i, i, a.get(i, i));
        for j in i + 1..n {
            c.set(i, j, a.get(i, j) ^ a.get(j, i));
        }
    }
    Ok(c)
}

/// Truth table of `f_A`, indexed by amplitude index.
pub fn quadratic_truth_table(a: &BitMatrix) -> Result<Vec<bool>> {
    let n = a.nrows();
    (0..1usize << n)
        .map(|x| quad_form_eval(a, &BitVector::from_index(x, n)?))
        .collect()
}

/// Incremental row echelon form over GF(2), with the right-hand side carried along.
#[derive(Clone, Debug)]
pub struct Echelon {
    n: usize,
    // (pivot column, row, rhs)
    rows: Vec<(usize, BitVector, bool)>,
}

impl Echelon {
    pub fn new(n: usize) -> Self {
        Echelon { n, rows: Vec::new() }
    }

    pub fn from_vectors(n: usize, vs: impl IntoIterator<Item = BitVector>) -> Self {
        let mut e = Echelon::new(n);
        for v in vs {
            e.insert(v, false);
        }
        e
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `(v, b)` against the stored rows. Returns the residual.
    fn reduce(&self, mut v: BitVector, mut b: bool) -> (BitVector, bool) {
        for (p, r, rb) in &self.rows {
            if v.get(*p) {
                v = v.xor(r);
                b ^= rb;
            }
        }
        (v, b)
    }

    /// Adds `v` as a homogeneous row; true if it raised the rank.
    pub fn insert(&mut self, v: BitVector, b: bool) -> bool {
        self.try_insert(v, b).unwrap_or(false)
    }

    /// Adds a constraint `v·z = b`. Returns `Ok(true)` if it raised the rank,
    /// `Ok(false)` if it was implied, and `Err(Infeasible)` if it contradicts.
    pub fn try_insert(&mut self, v: BitVector, b: bool) -> Result<bool> {
        assert_eq!(v.len(), self.n);
        let (v, b) = self.reduce(v, b);
        match v.leading_one() {
            None if b => Err(Error::Infeasible),
            None => Ok(false),
            Some(p) => {
                // Keep the form fully reduced so pivots stay unique per column.
                for (_, r, rb) in self.rows.iter_mut() {
                    if r.get(p) {
                        *r = r.xor(&v);
                        *rb ^= b;
                    }
                }
                self.rows.push((p, v, b));
                Ok(true)
            }
        }
    }

    pub fn is_independent(&self, v: &BitVector) -> bool {
        !self.reduce(*v, false).0.is_zero()
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.rows.iter().map(|(p, _, _)| *p).collect()
    }

    /// One solution with all free variables set to zero.
    pub fn particular(&self) -> BitVector {
        let mut z = BitVector::zeros(self.n).expect("n > 0");
        for (p, _, b) in &self.rows {
            z.set(*p, *b);
        }
        z
    }

    /// Basis of `{z : v·z = 0 for every stored v}`.
    pub fn nullspace(&self) -> Vec<BitVector> {
        let pivots = self.pivots();
        (0..self.n)
            .filter(|c| !pivots.contains(c))
            .map(|free| {
                let mut z = BitVector::unit(free, self.n).expect("in range");
                for (p, r, _) in &self.rows {
                    if r.get(free) {
                        z.set(*p, true);
                    }
                }
                z
            })
            .collect()
    }
}

/// Solution set of a linear system over GF(2): `particular + span(nullspace)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct F2Solution {
    pub particular: BitVector,
    pub rank: usize,
    pub nullspace: Vec<BitVector>,
}

impl F2Solution {
    pub fn is_unique(&self) -> bool {
        self.nullspace.is_empty()
    }

    /// Every element of the affine solution space. Only for small nullspaces.
    pub fn enumerate(&self) -> Vec<BitVector> {
        let d = self.nullspace.len();
        assert!(d < 24, "solution space too large to enumerate");
        (0..1usize << d)
            .map(|mask| {
                let mut z = self.particular;
                for (i, v) in self.nullspace.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        z = z.xor(v);
                    }
                }
                z
            })
            .collect()
    }
}

/// Solves `{v·z = b}` over GF(2) in `n` unknowns by Gaussian elimination.
pub fn f2_solve(n: usize, constraints: &[(BitVector, bool)]) -> Result<F2Solution> {
    check_len(n)?;
    let mut e = Echelon::new(n);
    for (v, b) in constraints {
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: v.len() });
        }
        e.try_insert(*v, *b)?;
    }
    Ok(F2Solution { particular: e.particular(), rank: e.rank(), nullspace: e.nullspace() })
}
