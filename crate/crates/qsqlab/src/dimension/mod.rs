//! Lower-bound quantities: variances, correlations, design distances and
//! concentration of expectation values.

mod correlation;
mod haar;
mod moments;
mod variance;

pub use correlation::{qac_bound, CorrelationMatrix, QacReport, DEFAULT_SUBSET_LIMIT};
pub use haar::{
    design_check, haar_second_moment, haar_variance_exact, levy_bound, purity_tail_experiment,
    TailReport,
};
pub use moments::{
    check_moment_identities, fourth_moment, third_moment, Degree2Moments, MomentCheck,
    MomentIdentity,
};
pub use variance::{
    block_observable, label_hadamard, max_variance_scan, qsd_variance_bound, variance_centered, variance_of,
    BlockTerms, BoundReport, Candidate, CandidateSet, Degree2Examples, ScanResult, VarianceModel,
    EXHAUSTIVE_PAULI_QUBITS,
};
