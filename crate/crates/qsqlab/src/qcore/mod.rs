//! Exact linear algebra over complex state spaces and GF(2).

pub mod bits;
pub mod boolean;
pub mod linalg;
pub mod metrics;
pub mod pauli;
pub mod state;

pub use bits::{
    canonicalize_quadratic, f2_solve, quad_form_eval, quadratic_truth_table, BitMatrix, BitVector,
    Echelon, F2Solution,
};
pub use linalg::{CMatrix, CVector, C64, TOL};
pub use metrics::{
    dist_metrics, distinguish_success_prob, helstrom, positive_part_projector, trace_distance,
    trace_distance_mixed, trace_distance_pure,
};
pub use pauli::{Pauli, PauliString};
pub use state::{
    born_distribution, haar_state, DensityMatrix, Distribution, Expectation, Observable,
    PureState, QuantumState,
};
