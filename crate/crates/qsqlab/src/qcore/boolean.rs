//! Boolean functions as truth tables and their ±1 Fourier spectrum.

use crate::error::{Error, Result};

/// `F̂(S) = 2^{-n} Σ_x (−1)^{f(x) + S·x}` for every `S`, indexed like the table.
pub fn fourier_coefficients(table: &[bool]) -> Result<Vec<f64>> {
    let len = table.len();
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("truth table length {len} is not 2^n")));
    }
    let mut v: Vec<f64> = table.iter().map(|&b| if b { -1.0 } else { 1.0 }).collect();
    let mut h = 1;
    while h < len {
        for block in (0..len).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (v[i], v[i + h]);
                v[i] = a + b;
                v[i + h] = a - b;
            }
        }
        h *= 2;
    }
    Ok(v.into_iter().map(|c| c / len as f64).collect())
}

/// `f(x) = S·x`.
pub fn parity_table(n: usize, s: usize) -> Vec<bool> {
    (0..1usize << n).map(|x| (x & s).count_ones() % 2 == 1).collect()
}

/// Majority of three bits.
pub fn majority3_table() -> Vec<bool> {
    (0..8usize).map(|x| x.count_ones() >= 2).collect()
}

/// Fraction of inputs where two tables agree.
pub fn agreement(f: &[bool], g: &[bool]) -> f64 {
    f.iter().zip(g).filter(|(a, b)| a == b).count() as f64 / f.len() as f64
}
