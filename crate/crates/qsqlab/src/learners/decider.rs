//! Turning a learner for a class into a tester against a fixed state `σ`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::QstatOracle;
use crate::qcore::{positive_part_projector, trace_distance, DensityMatrix, Observable, QuantumState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Decision {
    InClass,
    IsSigma,
}

/// What a learner hands back to the decider. `hypothesis: None` means the
/// learner gave up.
#[derive(Clone, Debug)]
pub struct LearnerOutput {
    pub hypothesis: Option<QuantumState>,
    pub samples_used: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeciderReport {
    pub decision: Decision,
    /// Index of the class member nearest to the hypothesis, if one was within `ε`.
    pub nearest: Option<usize>,
    pub learner_queries: usize,
    pub total_queries: usize,
    pub samples_used: usize,
}

/// A class `C`, a reference state `σ` and the learner accuracy `ε`, checked
/// once for `min_{ρ∈C} d_tr(ρ, σ) > 2(τ + ε)`.
#[derive(Clone, Debug)]
pub struct DeciderSetup {
    class: Vec<QuantumState>,
    sigma: DensityMatrix,
    tau: f64,
    eps: f64,
    gap: f64,
}

impl DeciderSetup {
    pub fn new(class: Vec<QuantumState>, sigma: DensityMatrix, tau: f64, eps: f64) -> Result<Self> {
        if class.is_empty() {
            return Err(Error::InvalidArgument("empty class".into()));
        }
        if !(tau > 0.0 && eps >= 0.0) {
            return Err(Error::InvalidArgument(format!("need tau > 0 and eps >= 0, got {tau}, {eps}")));
        }
        let sig = QuantumState::Mixed(sigma.clone());
        let mut gap = f64::INFINITY;
        for rho in &class {
            if rho.dim() != sigma.dim() {
                return Err(Error::DimensionMismatch { expected: sigma.dim(), got: rho.dim() });
            }
            gap = gap.min(trace_distance(rho, &sig)?);
        }
        if gap <= 2.0 * (tau + eps) {
            return Err(Error::Precondition(format!(
                "class is only {gap} from sigma, need more than {}",
                2.0 * (tau + eps)
            )));
        }
        Ok(DeciderSetup { class, sigma, tau, eps, gap })
    }

    /// `min_{ρ∈C} d_tr(ρ, σ)`.
    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn class(&self) -> &[QuantumState] {
        &self.class
    }

    /// Runs `learner` on `oracle`, then spends one query on the positive part
    /// of `ν − σ` for the class member `ν` nearest the hypothesis.
    pub fn decide<F>(&self, oracle: &mut QstatOracle, learner: F) -> Result<DeciderReport>
    where
        F: FnOnce(&mut QstatOracle) -> Result<LearnerOutput>,
    {
        if oracle.dim() != self.sigma.dim() {
            return Err(Error::DimensionMismatch { expected: self.sigma.dim(), got: oracle.dim() });
        }
        if oracle.tau() > self.tau + 1e-12 {
            return Err(Error::Precondition(format!("oracle tolerance {} exceeds {}", oracle.tau(), self.tau)));
        }
        let start = oracle.queries();
        let out = learner(oracle)?;
        let learner_queries = oracle.queries() - start;
        let report = |decision, nearest, total| DeciderReport {
            decision,
            nearest,
            learner_queries,
            total_queries: total,
            samples_used: out.samples_used,
        };
        let nearest = match &out.hypothesis {
            Some(h) if h.dim() == self.sigma.dim() => self.nearest_within_eps(h)?,
            _ => None,
        };
        let Some(idx) = nearest else {
            return Ok(report(Decision::IsSigma, None, learner_queries));
        };
        let diff = self.class[idx].to_density().matrix() - self.sigma.matrix();
        let pi = Observable::new(positive_part_projector(&diff))?;
        let expected = self.sigma.expectation(&pi)?;
        let r = oracle.qstat(&pi)?;
        let decision = if (r - expected).abs() > oracle.tau() { Decision::InClass } else { Decision::IsSigma };
        Ok(report(decision, Some(idx), oracle.queries() - start))
    }

    fn nearest_within_eps(&self, h: &QuantumState) -> Result<Option<usize>> {
        let mut best: Option<(usize, f64)> = None;
        for (i, rho) in self.class.iter().enumerate() {
            let d = trace_distance(h, rho)?;
            if best.is_none_or(|(_, b)| d < b) {
                best = Some((i, d));
            }
        }
        Ok(best.filter(|&(_, d)| d <= self.eps + 1e-9).map(|(i, _)| i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Policy;
    use crate::qcore::PureState;

    fn setup() -> DeciderSetup {
        let class = vec![PureState::basis(1, 0).unwrap().into(), PureState::basis(1, 1).unwrap().into()];
        DeciderSetup::new(class, DensityMatrix::maximally_mixed(1), 0.1, 0.1).unwrap()
    }

    #[test]
    fn gap_precondition_is_checked() {
        let class = vec![PureState::basis(1, 0).unwrap().into()];
        assert!(DeciderSetup::new(class, DensityMatrix::maximally_mixed(1), 0.2, 0.1).is_err());
    }

    #[test]
    fn sigma_is_never_in_class() {
        let s = setup();
        let mut o = QstatOracle::new(DensityMatrix::maximally_mixed(1), 0.1, Policy::Exact).unwrap();
        let r = s
            .decide(&mut o, |_| {
                Ok(LearnerOutput { hypothesis: Some(PureState::basis(1, 1).unwrap().into()), samples_used: 0 })
            })
            .unwrap();
        assert_eq!(r.decision, Decision::IsSigma);
        assert_eq!(r.total_queries, 1);
    }

    #[test]
    fn perfect_learner_gives_in_class() {
        let s = setup();
        let psi = PureState::basis(1, 1).unwrap();
        let mut o = QstatOracle::new(psi.clone(), 0.1, Policy::Exact).unwrap();
        let r = s
            .decide(&mut o, |_| Ok(LearnerOutput { hypothesis: Some(psi.into()), samples_used: 0 }))
            .unwrap();
        assert_eq!(r.decision, Decision::InClass);
        assert_eq!(r.nearest, Some(1));
    }

    #[test]
    fn failed_learner_means_sigma() {
        let s = setup();
        let mut o = QstatOracle::new(PureState::basis(1, 0).unwrap(), 0.1, Policy::Exact).unwrap();
        let r = s.decide(&mut o, |_| Ok(LearnerOutput { hypothesis: None, samples_used: 3 })).unwrap();
        assert_eq!(r.decision, Decision::IsSigma);
        assert_eq!(r.total_queries, 0);
    }
}
