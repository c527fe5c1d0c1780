//! Deterministic cause/effect checks for the quantum causal relation and the
//! paired classical/quantum verdicts built on top of them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bayes::{
    bayes_invert, causal_conditional_state, classical_bayes, classical_predict,
    classical_transition, propagate, propagate_unnormalized, ClassicalBasis, Prior,
    StochasticMatrix,
};
use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DimSpec, DEFAULT_TOL};
use crate::states::{
    hermitize, DensityMatrixFile, DensityOperator, PureState, IMPOSSIBLE_PROBABILITY,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Predict,
    Infer,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Predict => "predict",
            Direction::Infer => "infer",
        })
    }
}

/// Outcome of a single-system prediction or inference check.
#[derive(Clone, Debug)]
pub struct CausalCheck {
    pub holds: bool,
    /// Forward image of the cause, or normalized retrodicted image of the effect.
    pub image: DensityOperator,
    /// Fidelity of `image` with the target state.
    pub fidelity: f64,
    pub trace_distance: f64,
    /// Weight of the propagated input inside the support of the relevant
    /// marginal; one for predictions.
    pub support_weight: f64,
}

fn both_pure(a: &DensityOperator, b: &DensityOperator, tol: f64) -> bool {
    a.purity() > 1.0 - tol && b.purity() > 1.0 - tol
}

/// Compares a state against a target: fidelity for pure pairs, trace
/// distance otherwise.
pub fn match_states(
    image: DensityOperator,
    target: &DensityOperator,
    tol: f64,
) -> Result<CausalCheck> {
    judge(image, target, 1.0, tol)
}

fn judge(
    image: DensityOperator,
    target: &DensityOperator,
    support_weight: f64,
    tol: f64,
) -> Result<CausalCheck> {
    if image.dim() != target.dim() {
        return Err(Error::DimensionMismatch(format!(
            "image of dimension {} against target of dimension {}",
            image.dim(),
            target.dim()
        )));
    }
    let fidelity = image.fidelity(target)?;
    let trace_distance = image.trace_distance(target)?;
    let holds = if both_pure(&image, target, tol) {
        fidelity >= 1.0 - tol
    } else {
        trace_distance <= tol
    };
    Ok(CausalCheck {
        holds,
        image,
        fidelity,
        trace_distance,
        support_weight,
    })
}

/// Does `cause` deterministically predict `effect` through `channel`?
pub fn check_prediction(
    channel: &Channel,
    cause: &DensityOperator,
    effect: &DensityOperator,
    tol: f64,
) -> Result<CausalCheck> {
    if effect.dim() != channel.dim_out() {
        return Err(Error::DimensionMismatch(format!(
            "effect of dimension {} for channel output {}",
            effect.dim(),
            channel.dim_out()
        )));
    }
    let image = propagate(&causal_conditional_state(channel), cause)?;
    judge(image, effect, 1.0, tol)
}

/// Does `effect` let the retrodicted process infer `cause` with certainty?
pub fn check_inference(
    channel: &Channel,
    prior: &Prior,
    effect: &DensityOperator,
    cause: &DensityOperator,
    tol: f64,
) -> Result<CausalCheck> {
    if cause.dim() != channel.dim_in() {
        return Err(Error::DimensionMismatch(format!(
            "cause of dimension {} for channel input {}",
            cause.dim(),
            channel.dim_in()
        )));
    }
    let retro = bayes_invert(&causal_conditional_state(channel), prior, channel)?;
    let raw = propagate_unnormalized(&retro, effect.matrix())?;
    let weight = raw.trace().re;
    if weight < IMPOSSIBLE_PROBABILITY {
        return Err(Error::ImpossibleOutcome(weight.max(0.0)));
    }
    let image = DensityOperator::new(
        hermitize(&raw.scale_real(1.0 / weight)),
        channel.dims_in().clone(),
    )?;
    judge(image, cause, weight, tol)
}

/// Outcome of a system/apparatus measurement-relation check.
#[derive(Clone, Debug)]
pub struct MeasurementCheck {
    pub holds: bool,
    pub forward_holds: bool,
    pub backward_holds: bool,
    /// Born probability of the pointer effect after the interaction.
    pub effect_probability: f64,
    /// Fidelity of the pointer marginal with the effect.
    pub pointer_fidelity: f64,
    /// Fidelity of the system marginal with the cause.
    pub system_fidelity: f64,
    /// Fidelity of the retrodicted composite with `cause ⊗ ready`.
    pub backward_fidelity: f64,
    pub backward_image: DensityOperator,
}

/// Cause on the system, effect on the pointer. The channel acts on
/// `system ⊗ apparatus`; its output is read as `system ⊗ pointer` with the
/// pointer as the last `effect.dim()` levels.
pub fn check_measurement_relation(
    channel: &Channel,
    ready: &PureState,
    cause: &PureState,
    effect: &PureState,
    tol: f64,
) -> Result<MeasurementCheck> {
    if cause.dim() * ready.dim() != channel.dim_in() {
        return Err(Error::DimensionMismatch(format!(
            "cause {} and apparatus {} for channel input {}",
            cause.dim(),
            ready.dim(),
            channel.dim_in()
        )));
    }
    let d_b = effect.dim();
    if !channel.dim_out().is_multiple_of(d_b) {
        return Err(Error::DimensionMismatch(format!(
            "pointer of dimension {d_b} does not divide channel output {}",
            channel.dim_out()
        )));
    }
    let d_r = channel.dim_out() / d_b;
    let out_dims = DimSpec::new(vec![d_r, d_b])?;
    let in_dims = DimSpec::new(vec![cause.dim(), ready.dim()])?;
    let bipartite = channel.with_dims(in_dims.clone(), out_dims)?;

    let initial = cause.tensor(ready).with_dims(in_dims)?.density();
    let evolved = bipartite.apply(&initial)?;
    let pointer = evolved.reduced(&[1])?;
    let system = evolved.reduced(&[0])?;
    let pointer_fidelity = pointer.probability(effect)?;
    let system_fidelity = if d_r == cause.dim() {
        system.probability(cause)?
    } else {
        0.0
    };
    let forward_holds = pointer_fidelity >= 1.0 - tol && system_fidelity >= 1.0 - tol;

    let (effect_probability, collapsed) = evolved.project(&[1], effect)?;
    let target = initial;
    let back = check_inference(
        &bipartite,
        &Prior::uniform(bipartite.dims_in()),
        &collapsed,
        &target,
        tol,
    )?;
    Ok(MeasurementCheck {
        holds: forward_holds && back.holds,
        forward_holds,
        backward_holds: back.holds,
        effect_probability,
        pointer_fidelity,
        system_fidelity,
        backward_fidelity: back.fidelity,
        backward_image: back.image,
    })
}

/// A (cause, effect) question posed to both the classical and quantum readings.
#[derive(Clone, Debug)]
pub struct CausalQuery {
    pub channel: Channel,
    /// Reference prior for the quantum inversion.
    pub prior: Prior,
    /// Actual input state; its basis statistics are the classical prior.
    pub preparation: DensityOperator,
    pub cause: DensityOperator,
    pub effect: DensityOperator,
    pub direction: Direction,
    pub basis_in: ClassicalBasis,
    pub basis_out: ClassicalBasis,
    pub tolerance: f64,
}

impl CausalQuery {
    /// Retrodiction of `cause` from `effect`, uniform reference prior.
    pub fn infer(
        channel: Channel,
        preparation: DensityOperator,
        effect: DensityOperator,
        cause: DensityOperator,
        basis_in: ClassicalBasis,
        basis_out: ClassicalBasis,
    ) -> Self {
        let prior = Prior::uniform(channel.dims_in());
        Self {
            channel,
            prior,
            preparation,
            cause,
            effect,
            direction: Direction::Infer,
            basis_in,
            basis_out,
            tolerance: DEFAULT_TOL,
        }
    }

    /// Prediction of `effect` from `cause`; the cause is also the preparation.
    pub fn predict(
        channel: Channel,
        cause: DensityOperator,
        effect: DensityOperator,
        basis_in: ClassicalBasis,
        basis_out: ClassicalBasis,
    ) -> Self {
        let prior = Prior::uniform(channel.dims_in());
        Self {
            channel,
            prior,
            preparation: cause.clone(),
            cause,
            effect,
            direction: Direction::Predict,
            basis_in,
            basis_out,
            tolerance: DEFAULT_TOL,
        }
    }

    pub fn with_prior(mut self, prior: Prior) -> Self {
        self.prior = prior;
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    /// Classical transition table of the channel in the query's bases.
    pub fn transition(&self) -> Result<StochasticMatrix> {
        let u = self.channel.as_unitary().ok_or_else(|| {
            Error::InvalidParameter("the classical reading needs a unitary channel".into())
        })?;
        classical_transition(u, &self.basis_in, &self.basis_out)
    }
}

/// Paired classical (CCR) and quantum (QCR) answers to one query.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InferenceVerdict {
    pub direction: Direction,
    pub cause_label: String,
    pub effect_label: String,
    pub basis_in: Vec<String>,
    pub basis_out: Vec<String>,
    /// Classical posterior (infer) or total-probability prediction (predict).
    pub ccr_probability: f64,
    /// Quantum counterpart: Born probability of the effect (predict) or
    /// fidelity of the retrodicted image with the cause (infer).
    pub qcr_probability: f64,
    pub qcr_match_fidelity: f64,
    /// Born probability of the effect for the actual preparation.
    pub effect_probability: f64,
    pub trace_distance: f64,
    pub support_weight: f64,
    pub deterministic_ccr: bool,
    pub deterministic_qcr: bool,
    pub qcr_state: DensityMatrixFile,
    pub narrative: String,
}

impl InferenceVerdict {
    /// True when CCR claims certainty that QCR does not grant.
    pub fn is_contradiction(&self) -> bool {
        self.deterministic_ccr && !self.deterministic_qcr
    }
}

fn label_of(basis: &ClassicalBasis, state: &DensityOperator, tol: f64) -> Option<String> {
    let psi = state.as_pure(tol)?;
    basis.find(&psi, tol).map(|i| basis.labels()[i].clone())
}

fn require_label(
    basis: &ClassicalBasis,
    state: &DensityOperator,
    role: &str,
    tol: f64,
) -> Result<String> {
    label_of(basis, state, tol).ok_or_else(|| {
        Error::NotInBasis(format!("{role} is not an element of the classical basis"))
    })
}

/// Fills both sides of the verdict for `query`.
pub fn compare_ccr_qcr(query: &CausalQuery) -> Result<InferenceVerdict> {
    let tol = query.tolerance;
    let t = query.transition()?;
    let effect_label = require_label(&query.basis_out, &query.effect, "effect", tol)?;
    match query.direction {
        Direction::Predict => {
            let probs = query.basis_in.probabilities(&query.cause)?;
            let ccr = classical_predict(&t, &probs, &effect_label)?;
            let check = check_prediction(&query.channel, &query.cause, &query.effect, tol)?;
            let born = born(&query.channel, &query.cause, &query.effect)?;
            let cause_label = label_of(&query.basis_in, &query.cause, tol)
                .unwrap_or_else(|| "prepared state".into());
            let deterministic_qcr = check.holds && check.fidelity >= 1.0 - tol;
            let narrative = format!(
                "CCR predicts {effect_label} from {cause_label} with probability {ccr:.6}; QCR gives Born probability {born:.6}"
            );
            Ok(InferenceVerdict {
                direction: Direction::Predict,
                cause_label,
                effect_label,
                basis_in: query.basis_in.labels().to_vec(),
                basis_out: query.basis_out.labels().to_vec(),
                ccr_probability: ccr,
                qcr_probability: born,
                qcr_match_fidelity: check.fidelity,
                effect_probability: born,
                trace_distance: check.trace_distance,
                support_weight: check.support_weight,
                deterministic_ccr: ccr >= 1.0 - tol,
                deterministic_qcr,
                qcr_state: check.image.to_file(),
                narrative,
            })
        }
        Direction::Infer => {
            let cause_label = require_label(&query.basis_in, &query.cause, "cause", tol)?;
            let probs = query.basis_in.probabilities(&query.preparation)?;
            let posterior = classical_bayes(&t, &probs, &effect_label)?;
            let ccr = posterior[query.basis_in.index_of(&cause_label)?];
            let check = check_inference(
                &query.channel,
                &query.prior,
                &query.effect,
                &query.cause,
                tol,
            )?;
            let effect_probability = born(&query.channel, &query.preparation, &query.effect)?;
            let deterministic_qcr = check.holds && check.fidelity >= 1.0 - tol;
            let narrative = format!(
                "CCR infers {cause_label} from {effect_label} with probability {ccr:.6}; QCR retrodicted state matches it with fidelity {:.6}",
                check.fidelity
            );
            Ok(InferenceVerdict {
                direction: Direction::Infer,
                cause_label,
                effect_label,
                basis_in: query.basis_in.labels().to_vec(),
                basis_out: query.basis_out.labels().to_vec(),
                ccr_probability: ccr,
                qcr_probability: check.fidelity,
                qcr_match_fidelity: check.fidelity,
                effect_probability,
                trace_distance: check.trace_distance,
                support_weight: check.support_weight,
                deterministic_ccr: ccr >= 1.0 - tol,
                deterministic_qcr,
                qcr_state: check.image.to_file(),
                narrative,
            })
        }
    }
}

/// `Tr[Λ(ρ) E]`.
fn born(channel: &Channel, rho: &DensityOperator, effect: &DensityOperator) -> Result<f64> {
    let out = channel.apply_matrix(rho.matrix())?;
    let p: ComplexMatrix = &out * effect.matrix();
    Ok(p.trace().re.clamp(0.0, 1.0))
}
