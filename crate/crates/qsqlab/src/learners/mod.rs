//! Learning algorithms over copies of a state or a statistical query oracle.

mod decider;
mod hsp;
mod qsq;
mod quadratic;
mod selection;

use rand::RngCore;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::StateSampler;
use crate::qcore::{PureState, QuantumState};

pub use decider::{Decision, DeciderReport, DeciderSetup, LearnerOutput};
pub use hsp::{fourier_sample_coset, recover_hidden_shift, solve_simon, ShiftRecovery};
pub use qsq::{
    learn_codeword, learn_coupon, learn_fourier_sparse, local_tomography, sparse_granularity,
    FourierSchedule, PatchEstimate, SparseHypothesis,
};
pub use quadratic::{
    bell_round, default_round_budget, denoise_copy, denoise_success_probability,
    learn_quadratic, learn_quadratic_noisy, noisy_copy_budget, DenoisedCopies,
};
pub use selection::{scheffe_sample_count, scheffe_select};

/// Outcome of one learner run. `samples_used` counts state copies consumed,
/// `qstat_queries` counts accepted oracle queries.
#[derive(Clone, Debug, Serialize)]
pub struct LearnerReport<T> {
    pub recovered: Option<T>,
    pub samples_used: usize,
    pub qstat_queries: usize,
    pub success: bool,
}

impl<T> LearnerReport<T> {
    fn found(value: T, samples_used: usize, qstat_queries: usize) -> Self {
        LearnerReport { recovered: Some(value), samples_used, qstat_queries, success: true }
    }

    fn failed(samples_used: usize, qstat_queries: usize) -> Self {
        LearnerReport { recovered: None, samples_used, qstat_queries, success: false }
    }
}

/// Supplies fresh copies of some state.
pub trait CopySource {
    fn next_copy(&mut self, rng: &mut dyn RngCore) -> Result<PureState>;
    fn copies_used(&self) -> usize;
}

/// Copies of a fixed (possibly mixed) state, optionally capped.
#[derive(Clone, Debug)]
pub struct StateCopies {
    sampler: StateSampler,
    limit: Option<usize>,
    used: usize,
}

impl StateCopies {
    pub fn new(state: &QuantumState, limit: Option<usize>) -> Self {
        StateCopies { sampler: StateSampler::new(state), limit, used: 0 }
    }

    pub fn unlimited(state: impl Into<QuantumState>) -> Self {
        StateCopies::new(&state.into(), None)
    }
}

impl CopySource for StateCopies {
    fn next_copy(&mut self, rng: &mut dyn RngCore) -> Result<PureState> {
        if self.limit.is_some_and(|l| self.used >= l) {
            return Err(Error::SamplerExhausted { used: self.used });
        }
        self.used += 1;
        Ok(self.sampler.draw_copy(rng))
    }

    fn copies_used(&self) -> usize {
        self.used
    }
}
