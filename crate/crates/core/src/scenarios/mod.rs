//! The four worked scenarios, each run end to end into a [`ScenarioReport`].
//!
//! Qubit ordering, factor 0 leftmost:
//! - example 1: `S, A -> R, B`
//! - example 2: `S, A -> S, B`
//! - Frauchiger-Renner: `Lbar, S`, then `Lbar, L`
//! - Hardy: `M, N -> R, S`

mod example1;
mod example2;
mod frauchiger_renner;
mod hardy;
pub mod report;

pub use example1::run_example1;
pub use example2::run_example2;
pub use frauchiger_renner::run_frauchiger_renner;
pub use hardy::{hardy_constants, run_hardy, HardyConstants};
pub use report::{
    emit_report, emit_reports, Headline, OutputFormat, ScenarioReport, StateRecord, Step,
};

use crate::bayes::{ClassicalBasis, Prior};
use crate::causal::{CausalCheck, Direction, InferenceVerdict};
use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::linalg::DEFAULT_TOL;
use crate::states::{DensityOperator, PureState};

/// Reference prior requested for the quantum inversions.
#[derive(Clone, Debug, Default)]
pub enum PriorChoice {
    #[default]
    Uniform,
    SteadyState,
    /// Used for every inversion whose input dimension matches; other
    /// inversions fall back to the uniform prior.
    Explicit(DensityOperator),
}

impl PriorChoice {
    pub fn name(&self) -> &'static str {
        match self {
            PriorChoice::Uniform => "uniform",
            PriorChoice::SteadyState => "steady_state",
            PriorChoice::Explicit(_) => "explicit",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScenarioOptions {
    pub tolerance: f64,
    pub prior: PriorChoice,
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOL,
            prior: PriorChoice::Uniform,
        }
    }
}

impl ScenarioOptions {
    pub fn prior_for(&self, channel: &Channel) -> Result<Prior> {
        match &self.prior {
            PriorChoice::Uniform => Ok(Prior::uniform(channel.dims_in())),
            PriorChoice::SteadyState => Prior::steady_state(channel),
            PriorChoice::Explicit(state) if state.dim() == channel.dim_in() => {
                Ok(Prior::explicit(state.with_dims(channel.dims_in().clone())?))
            }
            PriorChoice::Explicit(_) => Ok(Prior::uniform(channel.dims_in())),
        }
    }
}

/// Runs all four scenarios with their reference parameters, one thread each.
pub fn run_all(options: &ScenarioOptions) -> Result<Vec<ScenarioReport>> {
    std::thread::scope(|scope| {
        let handles = [
            scope.spawn(|| run_example1(0.5, options)),
            scope.spawn(|| run_example2(options)),
            scope.spawn(|| run_frauchiger_renner(options)),
            scope.spawn(|| run_hardy(0.8, 0.6, options)),
        ];
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario thread panicked"))
            .collect()
    })
}

pub(crate) type FactorBasis = Vec<(&'static str, PureState)>;

pub(crate) fn real_qubit(a: f64, b: f64) -> PureState {
    PureState::from_real(&[a, b]).expect("nonzero qubit")
}

pub(crate) fn product_basis(factors: &[&FactorBasis]) -> Result<ClassicalBasis> {
    let owned: Vec<Vec<(&str, PureState)>> = factors.iter().map(|f| f.to_vec()).collect();
    let refs: Vec<&[(&str, PureState)]> = owned.iter().map(|f| f.as_slice()).collect();
    ClassicalBasis::product(&refs)
}

/// Probability of `event` given `given`, both read off the joint statistics
/// of `state` in a product basis. Predicates see per-factor indices.
pub(crate) fn classical_conditional(
    state: &PureState,
    basis: &ClassicalBasis,
    event: impl Fn(&[usize]) -> bool,
    given: impl Fn(&[usize]) -> bool,
) -> Result<f64> {
    let probs = basis.probabilities(&state.density())?;
    let dims = state.dims();
    let (mut joint, mut marginal) = (0.0, 0.0);
    for (i, p) in probs.iter().enumerate() {
        let d = dims.digits(i);
        if given(&d) {
            marginal += p;
            if event(&d) {
                joint += p;
            }
        }
    }
    if marginal < crate::states::IMPOSSIBLE_PROBABILITY {
        return Err(Error::ImpossibleOutcome(marginal));
    }
    Ok(joint / marginal)
}

/// Verdict for steps that are not a single channel query.
pub(crate) struct CustomVerdict<'a> {
    pub direction: Direction,
    pub cause_label: &'a str,
    pub effect_label: &'a str,
    pub basis_in: &'a ClassicalBasis,
    pub basis_out: &'a ClassicalBasis,
    pub ccr_probability: f64,
    pub check: &'a CausalCheck,
    pub effect_probability: f64,
    pub narrative: String,
}

impl CustomVerdict<'_> {
    pub fn build(self, tol: f64) -> InferenceVerdict {
        InferenceVerdict {
            direction: self.direction,
            cause_label: self.cause_label.to_string(),
            effect_label: self.effect_label.to_string(),
            basis_in: self.basis_in.labels().to_vec(),
            basis_out: self.basis_out.labels().to_vec(),
            ccr_probability: self.ccr_probability,
            qcr_probability: self.check.fidelity,
            qcr_match_fidelity: self.check.fidelity,
            effect_probability: self.effect_probability,
            trace_distance: self.check.trace_distance,
            support_weight: self.check.support_weight,
            deterministic_ccr: self.ccr_probability >= 1.0 - tol,
            deterministic_qcr: self.check.holds && self.check.fidelity >= 1.0 - tol,
            qcr_state: self.check.image.to_file(),
            narrative: self.narrative,
        }
    }
}

/// Literal reading: every step CCR calls certain but QCR rejects records a
/// match fidelity strictly below `1 - tol`.
pub(crate) fn contradiction_resolved(steps: &[Step], tol: f64) -> bool {
    steps
        .iter()
        .filter(|s| s.verdict.is_contradiction())
        .all(|s| s.verdict.qcr_match_fidelity < 1.0 - tol)
}
