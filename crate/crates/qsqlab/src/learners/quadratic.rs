//! Bell sampling for degree-2 phase states, and label-noise removal.

use rand::RngCore;

use super::{CopySource, LearnerReport};
use crate::error::{Error, Result};
use crate::qcore::linalg::{c, sample_index, walsh_hadamard, C64};
use crate::qcore::{f2_solve, BitMatrix, BitVector, Echelon, PureState};

/// One Bell-sampling round on two fresh copies of `φ_A`.
///
/// CNOTs from copy 1 into copy 2 map `|x⟩|w⟩` to `|x⟩|x⊕w⟩`; measuring copy 2
/// gives `y` and leaves copy 1 in `Σ_x a(x) b(x⊕y)|x⟩`, which is then
/// Hadamard-transformed and measured to give `z`. For phase states
/// `z = (A + Aᵀ) y`.
pub fn bell_round(source: &mut dyn CopySource, rng: &mut dyn RngCore) -> Result<(BitVector, BitVector)> {
    let a = source.next_copy(rng)?;
    let b = source.next_copy(rng)?;
    if a.dim() != b.dim() || a.num_qubits() == 0 {
        return Err(Error::InvalidState("copies must share a nonzero qubit count".into()));
    }
    let n = a.num_qubits();
    let d = a.dim();
    let (aa, ba) = (a.amplitudes(), b.amplitudes());
    let joint = |x: usize, y: usize| aa[x] * ba[x ^ y];
    let marginal: Vec<f64> = (0..d).map(|y| (0..d).map(|x| joint(x, y).norm_sqr()).sum()).collect();
    let y = sample_index(&marginal, rng);
    let scale = 1.0 / marginal[y].sqrt();
    let mut post: Vec<C64> = (0..d).map(|x| joint(x, y) * scale).collect();
    walsh_hadamard(&mut post);
    let probs: Vec<f64> = post.iter().map(|z| z.norm_sqr()).collect();
    let z = sample_index(&probs, rng);
    Ok((BitVector::from_index(y, n)?, BitVector::from_index(z, n)?))
}

/// Default number of Bell rounds, `3n + 4`.
pub fn default_round_budget(n: usize) -> usize {
    3 * n + 4
}

/// Learns a canonical `Â` with `f_Â = f_A` from copies of `φ_A`.
///
/// Bell rounds continue until the `y`s span `F_2^n` or `round_budget` is
/// spent; the off-diagonal part then comes from solving `B y = z` row by row.
/// One more copy has its off-diagonal phases undone so that a Hadamard
/// transform reveals the diagonal.
pub fn learn_quadratic(
    source: &mut dyn CopySource,
    rng: &mut dyn RngCore,
    round_budget: usize,
) -> Result<LearnerReport<BitMatrix>> {
    let start = source.copies_used();
    let used = |s: &dyn CopySource| s.copies_used() - start;
    let mut rounds: Vec<(BitVector, BitVector)> = Vec::new();
    let mut span: Option<Echelon> = None;
    loop {
        if let Some(e) = &span {
            if e.rank() == rounds[0].0.len() {
                break;
            }
        }
        if rounds.len() >= round_budget {
            return Ok(LearnerReport::failed(used(source), 0));
        }
        let (y, z) = match bell_round(source, rng) {
            Ok(r) => r,
            Err(Error::SamplerExhausted { .. }) => return Ok(LearnerReport::failed(used(source), 0)),
            Err(e) => return Err(e),
        };
        span.get_or_insert_with(|| Echelon::new(y.len())).insert(y, false);
        rounds.push((y, z));
    }
    let n = rounds[0].0.len();
    let mut a = BitMatrix::zeros(n, n)?;
    for i in 0..n {
        let constraints: Vec<_> = rounds.iter().map(|(y, z)| (*y, z.get(i))).collect();
        let row = match f2_solve(n, &constraints) {
            Ok(sol) => sol.particular,
            Err(Error::Infeasible) => return Ok(LearnerReport::failed(used(source), 0)),
            Err(e) => return Err(e),
        };
        for j in i + 1..n {
            a.set(i, j, row.get(j));
        }
    }
    let phi = match source.next_copy(rng) {
        Ok(p) => p,
        Err(Error::SamplerExhausted { .. }) => return Ok(LearnerReport::failed(used(source), 0)),
        Err(e) => return Err(e),
    };
    if phi.num_qubits() != n {
        return Err(Error::InvalidState("copy changed size".into()));
    }
    let mut amps: Vec<C64> = phi.amplitudes().iter().copied().collect();
    for (x, amp) in amps.iter_mut().enumerate() {
        let xv = BitVector::from_index(x, n)?;
        let mut sign = false;
        for i in 0..n {
            for j in i + 1..n {
                sign ^= a.get(i, j) && xv.get(i) && xv.get(j);
            }
        }
        if sign {
            *amp = -*amp;
        }
    }
    walsh_hadamard(&mut amps);
    let probs: Vec<f64> = amps.iter().map(|z| z.norm_sqr()).collect();
    let diag = BitVector::from_index(sample_index(&probs, rng), n)?;
    for i in 0..n {
        a.set(i, i, diag.get(i));
    }
    Ok(LearnerReport::found(a, used(source), 0))
}

/// `p = ½(1 − 2√(η(1−η)))`, the chance that one noisy copy yields `φ_f`.
pub fn denoise_success_probability(eta: f64) -> f64 {
    0.5 * (1.0 - 2.0 * (eta * (1.0 - eta)).sqrt())
}

/// Applies `I ⊗ H` to a noisy example copy and measures the label qubit.
/// On outcome 1 returns the remaining `n`-qubit register.
pub fn denoise_copy(copy: &PureState, rng: &mut dyn RngCore) -> Result<Option<PureState>> {
    if copy.num_qubits() < 2 {
        return Err(Error::InvalidState("example copies need n >= 1 plus a label qubit".into()));
    }
    let amps = copy.amplitudes();
    let h = 1.0 / 2f64.sqrt();
    let branch: Vec<C64> = (0..copy.dim() / 2).map(|x| (amps[2 * x] - amps[2 * x + 1]) * h).collect();
    let p1: f64 = branch.iter().map(|z| z.norm_sqr()).sum();
    let u: f64 = rand::Rng::random(rng);
    if u >= p1 || p1 <= 0.0 {
        return Ok(None);
    }
    let s = 1.0 / p1.sqrt();
    Ok(Some(PureState::from_unnormalized(branch.into_iter().map(|z| z * c(s, 0.0)).collect())?))
}

/// Phase-state copies distilled from a noisy example source, with a cap on
/// the noisy copies consumed.
pub struct DenoisedCopies<'a> {
    inner: &'a mut dyn CopySource,
    budget: usize,
    start: usize,
    delivered: usize,
}

impl<'a> DenoisedCopies<'a> {
    pub fn new(inner: &'a mut dyn CopySource, budget: usize) -> Self {
        let start = inner.copies_used();
        DenoisedCopies { inner, budget, start, delivered: 0 }
    }

    pub fn delivered(&self) -> usize {
        self.delivered
    }
}

impl CopySource for DenoisedCopies<'_> {
    fn next_copy(&mut self, rng: &mut dyn RngCore) -> Result<PureState> {
        loop {
            let used = self.copies_used();
            if used >= self.budget {
                return Err(Error::SamplerExhausted { used });
            }
            let noisy = self.inner.next_copy(rng)?;
            if let Some(phi) = denoise_copy(&noisy, rng)? {
                self.delivered += 1;
                return Ok(phi);
            }
        }
    }

    /// Noisy copies consumed.
    fn copies_used(&self) -> usize {
        self.inner.copies_used() - self.start
    }
}

/// `⌈40 n / (1 − 2η)²⌉`.
pub fn noisy_copy_budget(n: usize, eta: f64) -> usize {
    (40.0 * n as f64 / (1.0 - 2.0 * eta).powi(2)).ceil() as usize
}

/// Denoises each copy and feeds the survivors to [`learn_quadratic`].
/// `samples_used` counts noisy copies.
pub fn learn_quadratic_noisy(
    noisy: &mut dyn CopySource,
    n: usize,
    eta: f64,
    rng: &mut dyn RngCore,
    copy_budget: usize,
) -> Result<LearnerReport<BitMatrix>> {
    if !(0.0..0.5).contains(&eta) {
        return Err(Error::Precondition(format!("noise rate {eta} must lie in [0, 1/2)")));
    }
    let mut denoised = DenoisedCopies::new(noisy, copy_budget);
    let mut report = learn_quadratic(&mut denoised, rng, default_round_budget(n))?;
    report.samples_used = denoised.copies_used();
    Ok(report)
}
