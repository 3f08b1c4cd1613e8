//! Hidden subgroup sampling for the order-two subgroup `{0, s}`.

use rand::RngCore;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::linalg::{c, sample_index, walsh_hadamard, C64};
use crate::qcore::{BitVector, Echelon};

/// Fourier sampling of a random coset state `(|x⟩ + |x⊕s⟩)/√2`: the outcome
/// is uniform over `{y : y·s = 0}`.
pub fn fourier_sample_coset(s: &BitVector, rng: &mut dyn RngCore) -> Result<BitVector> {
    if s.is_zero() {
        return Err(Error::InvalidArgument("hidden shift s must be nonzero".into()));
    }
    let n = s.len();
    let d = 1usize << n;
    let x = rand::Rng::random_range(rng, 0..d);
    let mut amps = vec![C64::new(0.0, 0.0); d];
    let a = c(1.0 / 2f64.sqrt(), 0.0);
    amps[x] = a;
    amps[x ^ s.index()] = a;
    walsh_hadamard(&mut amps);
    let probs: Vec<f64> = amps.iter().map(|z| z.norm_sqr()).collect();
    BitVector::from_index(sample_index(&probs, rng), n)
}

/// The unique nonzero `s` with `y·s = 0` for all `ys`, once they span an
/// `(n−1)`-dimensional space.
pub fn solve_simon(n: usize, ys: &[BitVector]) -> Result<BitVector> {
    if n == 0 || n > 64 {
        return Err(Error::InvalidArgument(format!("bit length {n} outside 1..=64")));
    }
    if let Some(y) = ys.iter().find(|y| y.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    let null = Echelon::from_vectors(n, ys.iter().copied()).nullspace();
    match null.len() {
        1 => Ok(null[0]),
        0 => Err(Error::Infeasible),
        k => Err(Error::NeedMoreSamples(format!("solution space has dimension {k}"))),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ShiftRecovery {
    pub recovered: Option<BitVector>,
    pub samples_used: usize,
}

/// Draws Fourier samples until [`solve_simon`] succeeds or `max_samples` run out.
pub fn recover_hidden_shift(s: &BitVector, max_samples: usize, rng: &mut dyn RngCore) -> Result<ShiftRecovery> {
    let n = s.len();
    let mut ys = Vec::new();
    loop {
        match solve_simon(n, &ys) {
            Ok(found) => return Ok(ShiftRecovery { recovered: Some(found), samples_used: ys.len() }),
            Err(Error::NeedMoreSamples(_)) if ys.len() < max_samples => {}
            Err(Error::NeedMoreSamples(_)) => return Ok(ShiftRecovery { recovered: None, samples_used: ys.len() }),
            Err(e) => return Err(e),
        }
        ys.push(fourier_sample_coset(s, rng)?);
    }
}
