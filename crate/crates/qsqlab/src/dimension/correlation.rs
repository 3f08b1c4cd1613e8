//! Pairwise correlations of normalized deviations from a reference state, and
//! the subset-based bound built from them.

use serde::Serialize;

use crate::ensembles::Ensemble;
use crate::error::{Error, Result};
use crate::qcore::linalg::{c, trace_product, CMatrix};
use crate::qcore::DensityMatrix;

/// `g[i][j] = tr(ρ̂_i ρ̂_j σ)` with `ρ̂ = ρσ^{-1} − I`.
#[derive(Clone, Debug, Serialize)]
pub struct CorrelationMatrix {
    pub entries: Vec<Vec<f64>>,
    /// `λ_max(σ) / λ_min(σ)`.
    pub condition: f64,
}

impl CorrelationMatrix {
    pub fn new(ens: &Ensemble, sigma: &DensityMatrix) -> Result<Self> {
        if ens.dim() != sigma.dim() {
            return Err(Error::DimensionMismatch { expected: sigma.dim(), got: ens.dim() });
        }
        let (vals, vecs) = sigma.eigen();
        let (lo, hi) = vals.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
        if lo <= 1e-12 * hi.max(1.0) {
            return Err(Error::InvalidState(format!("reference state is singular (smallest eigenvalue {lo})")));
        }
        let inv_diag = CMatrix::from_diagonal(&crate::qcore::CVector::from_iterator(
            vals.len(),
            vals.iter().map(|&v| c(1.0 / v, 0.0)),
        ));
        let sigma_inv = &vecs * inv_diag * vecs.adjoint();
        let rhos: Vec<CMatrix> = ens.states().map(|s| s.to_density().into_matrix()).collect();
        let left: Vec<CMatrix> = rhos.iter().map(|r| r * &sigma_inv).collect();
        let k = rhos.len();
        let mut entries = vec![vec![0.0; k]; k];
        // tr(ρ̂_i ρ̂_j σ) = tr(ρ_i σ^{-1} ρ_j) − 1 for unit-trace ρ.
        for i in 0..k {
            for j in i..k {
                let g = trace_product(&left[i], &rhos[j]).re - 1.0;
                entries[i][j] = g;
                entries[j][i] = g;
            }
        }
        Ok(CorrelationMatrix { entries, condition: hi / lo })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `γ(C′) = |C′|^{-2} Σ_{i,j∈C′} |g_ij|`.
    pub fn avg_correlation(&self, subset: &[usize]) -> f64 {
        if subset.is_empty() {
            return 0.0;
        }
        let sum: f64 = subset.iter().flat_map(|&i| subset.iter().map(move |&j| self.entries[i][j].abs())).sum();
        sum / (subset.len() * subset.len()) as f64
    }

    /// Largest entrywise distance from `scale · I`.
    pub fn distance_from_scaled_identity(&self, scale: f64) -> f64 {
        let mut worst = 0.0f64;
        for (i, row) in self.entries.iter().enumerate() {
            for (j, &g) in row.iter().enumerate() {
                let want = if i == j { scale } else { 0.0 };
                worst = worst.max((g - want).abs());
            }
        }
        worst
    }
}

/// Strictly above `τ`, with slack so that `c/s` landing on `τ` by rounding
/// counts as equal.
fn exceeds(gamma: f64, tau: f64) -> bool {
    gamma > tau + 1e-12
}

#[derive(Clone, Debug, Serialize)]
pub struct QacReport {
    /// `|C0| / max(1, largest admissible |C′|)`.
    pub value: f64,
    pub ensemble_size: usize,
    pub largest_subset: usize,
    pub enumerated: Option<usize>,
    pub closed_form: Option<usize>,
    /// No nonempty subset has `γ > τ`.
    pub empty_cover: bool,
    /// Every member fits in one admissible subset, so the bound is 1.
    pub trivial: bool,
}

/// Subset enumeration is used up to this ensemble size.
pub const DEFAULT_SUBSET_LIMIT: usize = 12;

/// Largest `|C′|` with `γ(C′) > τ`, by enumeration when `|C0| ≤ subset_limit`
/// and in closed form when the matrix is `c · I`; both when both apply.
pub fn qac_bound(corr: &CorrelationMatrix, tau: f64, subset_limit: usize) -> Result<QacReport> {
    let k = corr.len();
    if k == 0 {
        return Err(Error::InvalidArgument("empty ensemble".into()));
    }
    if subset_limit > 20 {
        return Err(Error::InvalidArgument(format!("subset limit {subset_limit} too large to enumerate")));
    }
    let enumerated = (k <= subset_limit).then(|| {
        let mut best = 0;
        let mut members = Vec::with_capacity(k);
        for mask in 1usize..1 << k {
            let size = mask.count_ones() as usize;
            if size <= best {
                continue;
            }
            members.clear();
            members.extend((0..k).filter(|i| mask >> i & 1 == 1));
            if exceeds(corr.avg_correlation(&members), tau) {
                best = size;
            }
        }
        best
    });
    let diag = corr.entries[0][0];
    let structured = corr.distance_from_scaled_identity(diag) <= 1e-9;
    let closed_form = structured.then(|| {
        // γ(C′) = |c|/|C′|; grow |C′| while it stays admissible.
        let cabs = diag.abs();
        let guess = if tau > 0.0 { (cabs / tau).ceil() as usize } else { k };
        let mut s = guess.saturating_sub(1).min(k);
        while s > 0 && !exceeds(cabs / s as f64, tau) {
            s -= 1;
        }
        while s < k && exceeds(cabs / (s + 1) as f64, tau) {
            s += 1;
        }
        s
    });
    let largest = match (enumerated, closed_form) {
        (None, None) => {
            return Err(Error::Unsupported(
                "correlations are not a multiple of the identity and the ensemble is too large to enumerate".into(),
            ))
        }
        (a, b) => a.unwrap_or(0).max(b.unwrap_or(0)),
    };
    Ok(QacReport {
        value: k as f64 / largest.max(1) as f64,
        ensemble_size: k,
        largest_subset: largest,
        enumerated,
        closed_form,
        empty_cover: largest == 0,
        trivial: largest >= k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{coset_ensemble, shadow_ensemble};

    #[test]
    fn coset_example() {
        let ens = coset_ensemble(3).unwrap();
        let g = CorrelationMatrix::new(&ens, &DensityMatrix::maximally_mixed(3)).unwrap();
        assert!(g.distance_from_scaled_identity(1.0) < 1e-9);
        let q = qac_bound(&g, 0.3, DEFAULT_SUBSET_LIMIT).unwrap();
        assert_eq!(q.enumerated, Some(3));
        assert_eq!(q.closed_form, Some(3));
        assert!((q.value - 7.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn shadow_example_is_trivial() {
        let ens = shadow_ensemble(2, 0.1).unwrap();
        let g = CorrelationMatrix::new(&ens, &DensityMatrix::maximally_mixed(2)).unwrap();
        assert!(g.distance_from_scaled_identity(0.09) < 1e-9);
        let q = qac_bound(&g, 0.005, DEFAULT_SUBSET_LIMIT).unwrap();
        assert_eq!(q.closed_form, Some(15));
        assert!(q.trivial && (q.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_cover_when_tau_is_large() {
        let ens = coset_ensemble(2).unwrap();
        let g = CorrelationMatrix::new(&ens, &DensityMatrix::maximally_mixed(2)).unwrap();
        let q = qac_bound(&g, 1.5, DEFAULT_SUBSET_LIMIT).unwrap();
        assert!(q.empty_cover);
        assert_eq!(q.value, 3.0);
    }

    #[test]
    fn singular_reference_is_rejected() {
        let ens = coset_ensemble(1).unwrap();
        let zero = crate::qcore::PureState::basis(1, 0).unwrap().to_density();
        assert!(CorrelationMatrix::new(&ens, &zero).is_err());
    }
}
