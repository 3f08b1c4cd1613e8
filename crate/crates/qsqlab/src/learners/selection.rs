//! Hypothesis selection among candidate distributions from samples.

use crate::error::{Error, Result};
use crate::qcore::Distribution;

/// `⌈10 ln|Q| / ε²⌉` samples.
pub fn scheffe_sample_count(candidates: usize, eps: f64) -> usize {
    if candidates <= 1 {
        return 0;
    }
    (10.0 * (candidates as f64).ln() / (eps * eps)).ceil() as usize
}

/// Minimum-distance estimate over the Scheffé sets `W_ij = {x : q_i(x) > q_j(x)}`:
/// returns the `i` minimizing `max_{W} |q_i(W) − p̂(W)|`, with `p̂` the empirical
/// distribution of `samples`. Ties go to the lower index.
pub fn scheffe_select(samples: &[usize], candidates: &[Distribution], eps: f64) -> Result<usize> {
    let Some(first) = candidates.first() else {
        return Err(Error::InvalidArgument("no candidates".into()));
    };
    if candidates.len() == 1 {
        return Ok(0);
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps {eps} must be positive")));
    }
    let len = first.len();
    if let Some(q) = candidates.iter().find(|q| q.len() != len) {
        return Err(Error::DimensionMismatch { expected: len, got: q.len() });
    }
    let need = scheffe_sample_count(candidates.len(), eps);
    if samples.len() < need {
        return Err(Error::NeedMoreSamples(format!("{} samples given, {need} required", samples.len())));
    }
    let emp = Distribution::empirical(samples, len)?;
    let m = candidates.len();
    let mut worst = vec![0.0f64; m];
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            let set: Vec<usize> = (0..len).filter(|&x| candidates[i].prob(x) > candidates[j].prob(x)).collect();
            let p_hat: f64 = set.iter().map(|&x| emp.prob(x)).sum();
            for (k, q) in candidates.iter().enumerate() {
                let qw: f64 = set.iter().map(|&x| q.prob(x)).sum();
                worst[k] = worst[k].max((qw - p_hat).abs());
            }
        }
    }
    let best = (0..m).fold(0, |b, k| if worst[k] < worst[b] { k } else { b });
    Ok(best)
}
