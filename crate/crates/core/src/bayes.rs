//! Conditional states, the star product, the quantum Bayes inversion and the
//! Petz recovery channel, together with the classical stochastic analog used
//! for side-by-side comparisons.
//!
//! A [`ConditionalState`] always stores its matrix on `conditioning ⊗ output`
//! (conditioning system first). The forward state of a channel `S -> R` lives
//! on `S ⊗ R`; its Bayes inverse lives on `R ⊗ S`, so the same [`propagate`]
//! serves both directions.

use std::fmt;

use crate::channels::{Channel, KrausMap};
use crate::error::{Error, Result};
use crate::linalg::{
    self, herm_sqrt, partial_trace, permute_factors, pinv_psd, pinv_sqrt_psd, support_projector,
    tensor, ComplexMatrix, DimSpec, C64, DEFAULT_TOL,
};
use crate::states::{hermitize, DensityOperator, PureState, IMPOSSIBLE_PROBABILITY};

/// Convergence threshold for the steady-state power iteration.
pub const STEADY_STATE_TOL: f64 = 1e-12;
/// Iteration cap for the steady-state power iteration.
pub const STEADY_STATE_MAX_ITER: usize = 100_000;

/// `Y^{1/2} X Y^{1/2}`.
pub fn star(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<ComplexMatrix> {
    if x.rows() != y.rows() || x.cols() != y.cols() || !x.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "star product of {}x{} and {}x{}",
            x.rows(),
            x.cols(),
            y.rows(),
            y.cols()
        )));
    }
    let s = herm_sqrt(y)?;
    Ok(&(&s * x) * &s)
}

/// Bipartite operator encoding a process from a conditioning system to an output.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalState {
    matrix: ComplexMatrix,
    conditioning: DimSpec,
    output: DimSpec,
}

impl ConditionalState {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn conditioning_dims(&self) -> &DimSpec {
        &self.conditioning
    }

    pub fn output_dims(&self) -> &DimSpec {
        &self.output
    }

    /// Two-factor view `[d_conditioning, d_output]`.
    pub fn bipartite_dims(&self) -> DimSpec {
        DimSpec::single(self.conditioning.total()).concat(&DimSpec::single(self.output.total()))
    }

    /// Partial trace over the output system.
    pub fn conditioning_marginal(&self) -> Result<ComplexMatrix> {
        partial_trace(&self.matrix, &self.bipartite_dims(), &[0])
    }

    /// `max |Tr_out P - I|`; zero for the forward state of any channel.
    pub fn marginal_deviation(&self) -> Result<f64> {
        let m = self.conditioning_marginal()?;
        Ok(m.max_abs_diff(&ComplexMatrix::identity(self.conditioning.total())))
    }

    /// Same operator with conditioning and output exchanged.
    pub fn mirrored(&self) -> Result<ComplexMatrix> {
        Ok(permute_factors(&self.matrix, &self.bipartite_dims(), &[1, 0])?.0)
    }
}

/// `Σ_{m,n} |n><m| ⊗ Λ(|m><n|)` in the standard basis of the input.
pub fn causal_conditional_state(channel: &Channel) -> ConditionalState {
    let d_in = channel.dim_in();
    let d_out = channel.dim_out();
    let mut p = ComplexMatrix::zeros(d_in * d_out, d_in * d_out);
    for m in 0..d_in {
        for n in 0..d_in {
            let mut e_mn = ComplexMatrix::zeros(d_in, d_in);
            e_mn.set(m, n, linalg::re(1.0));
            let image = channel
                .apply_matrix(&e_mn)
                .expect("input dimension matches");
            p = &p + &tensor(&e_mn.transpose(), &image);
        }
    }
    ConditionalState {
        matrix: p,
        conditioning: channel.dims_in().clone(),
        output: channel.dims_out().clone(),
    }
}

/// `Tr_cond[P ⋆ (ρ ⊗ I)]` without normalization. Retrodictive states give a
/// trace below one for inputs that leave the support of their output prior.
pub fn propagate_unnormalized(p: &ConditionalState, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d_cond = p.conditioning.total();
    if rho.rows() != d_cond || rho.cols() != d_cond {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} for conditioning system of dimension {d_cond}",
            rho.rows()
        )));
    }
    let lifted = tensor(rho, &ComplexMatrix::identity(p.output.total()));
    let starred = star(&p.matrix, &lifted)?;
    partial_trace(&starred, &p.bipartite_dims(), &[1])
}

/// `Tr_cond[P ⋆ ρ]`, the state the conditional state assigns to the output.
pub fn propagate(p: &ConditionalState, rho: &DensityOperator) -> Result<DensityOperator> {
    let out = propagate_unnormalized(p, rho.matrix())?;
    let tr = out.trace().re;
    if (tr - 1.0).abs() > DEFAULT_TOL {
        return Err(Error::InvalidTrace(tr));
    }
    DensityOperator::new(hermitize(&out), p.output.clone())
}

/// Source of a prior state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PriorKind {
    Uniform,
    SteadyState,
    Explicit,
}

impl fmt::Display for PriorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PriorKind::Uniform => "uniform",
            PriorKind::SteadyState => "steady_state",
            PriorKind::Explicit => "explicit",
        })
    }
}

/// Reference input state used to invert a channel.
#[derive(Clone, Debug, PartialEq)]
pub struct Prior {
    kind: PriorKind,
    state: DensityOperator,
}

impl Prior {
    /// `I/d`.
    pub fn uniform(dims: &DimSpec) -> Self {
        Self {
            kind: PriorKind::Uniform,
            state: DensityOperator::maximally_mixed(dims),
        }
    }

    /// The channel's fixed point found by [`steady_state`].
    pub fn steady_state(channel: &Channel) -> Result<Self> {
        Ok(Self {
            kind: PriorKind::SteadyState,
            state: steady_state(channel)?,
        })
    }

    /// A caller-supplied fixed point; rejected unless `Λ(γ) ≈ γ`.
    pub fn known_steady_state(channel: &Channel, gamma: DensityOperator) -> Result<Self> {
        let image = channel.apply(&gamma)?;
        let dev = image.matrix().max_abs_diff(gamma.matrix());
        if dev > DEFAULT_TOL {
            return Err(Error::InvalidPrior(format!(
                "state is not a fixed point of the channel (deviation {dev:e})"
            )));
        }
        Ok(Self {
            kind: PriorKind::SteadyState,
            state: gamma,
        })
    }

    pub fn explicit(state: DensityOperator) -> Self {
        Self {
            kind: PriorKind::Explicit,
            state,
        }
    }

    pub fn kind(&self) -> PriorKind {
        self.kind
    }

    pub fn state(&self) -> &DensityOperator {
        &self.state
    }

    fn check_for(&self, channel: &Channel) -> Result<()> {
        if self.state.dim() != channel.dim_in() {
            return Err(Error::DimensionMismatch(format!(
                "prior of dimension {} for channel input {}",
                self.state.dim(),
                channel.dim_in()
            )));
        }
        Ok(())
    }
}

/// `P ⋆ (ρ_S ⊗ ρ_R^{-1})` with `ρ_R = Λ(ρ_S)` and a support-restricted inverse,
/// returned on `R ⊗ S`.
pub fn bayes_invert(
    p: &ConditionalState,
    prior: &Prior,
    channel: &Channel,
) -> Result<ConditionalState> {
    prior.check_for(channel)?;
    if p.conditioning.total() != channel.dim_in() || p.output.total() != channel.dim_out() {
        return Err(Error::DimensionMismatch(
            "conditional state does not match the channel".into(),
        ));
    }
    let rho_s = prior.state.matrix();
    let rho_r = channel.apply_matrix(rho_s)?;
    let weight = tensor(rho_s, &pinv_psd(&hermitize(&rho_r))?);
    let inverted = star(&p.matrix, &weight)?;
    let (mirrored, _) = permute_factors(&inverted, &p.bipartite_dims(), &[1, 0])?;
    Ok(ConditionalState {
        matrix: mirrored,
        conditioning: channel.dims_out().clone(),
        output: channel.dims_in().clone(),
    })
}

/// Raw Petz map `X -> ρ_S^{1/2} Λ†(ρ_R^{-1/2} X ρ_R^{-1/2}) ρ_S^{1/2}`, trace
/// preserving only on the support of `ρ_R`.
pub fn petz_map(channel: &Channel, prior: &Prior) -> Result<KrausMap> {
    prior.check_for(channel)?;
    let rho_s = prior.state.matrix();
    let sqrt_s = herm_sqrt(rho_s)?;
    let rho_r = hermitize(&channel.apply_matrix(rho_s)?);
    let inv_sqrt_r = pinv_sqrt_psd(&rho_r)?;
    let kraus = channel
        .kraus()
        .iter()
        .map(|k| &(&sqrt_s * &k.adjoint()) * &inv_sqrt_r)
        .collect();
    KrausMap::new(kraus, channel.dims_out().clone(), channel.dims_in().clone())
}

/// Petz recovery channel. When `ρ_R` is rank deficient, inputs orthogonal to
/// its support are sent to the prior so the result stays trace preserving.
pub fn petz_channel(channel: &Channel, prior: &Prior) -> Result<Channel> {
    let raw = petz_map(channel, prior)?;
    let rho_r = hermitize(&channel.apply_matrix(prior.state.matrix())?);
    let outside = &ComplexMatrix::identity(channel.dim_out()) - &support_projector(&rho_r)?;
    let mut kraus = raw.kraus().to_vec();
    if outside.max_abs() > DEFAULT_TOL {
        let (pvals, pvecs) = linalg::eigh(prior.state.matrix())?;
        let (ovals, ovecs) = linalg::eigh(&outside)?;
        let d_in = channel.dim_in();
        let d_out = channel.dim_out();
        for (j, &ov) in ovals.iter().enumerate() {
            if ov < 0.5 {
                continue;
            }
            let r: Vec<C64> = (0..d_out).map(|i| ovecs.get(i, j)).collect();
            for (k, &pv) in pvals.iter().enumerate() {
                if pv <= 0.0 {
                    continue;
                }
                let s: Vec<C64> = (0..d_in).map(|i| pvecs.get(i, k)).collect();
                kraus.push(ComplexMatrix::outer(&s, &r).scale_real(pv.sqrt()));
            }
        }
    }
    KrausMap::new(kraus, channel.dims_out().clone(), channel.dims_in().clone())?.into_channel()
}

/// Fixed point of `Λ` by power iteration from `I/d`.
pub fn steady_state(channel: &Channel) -> Result<DensityOperator> {
    if channel.dim_in() != channel.dim_out() {
        return Err(Error::DimensionMismatch(format!(
            "steady state needs a square channel, got {} -> {}",
            channel.dim_in(),
            channel.dim_out()
        )));
    }
    let mut rho = DensityOperator::maximally_mixed(channel.dims_in())
        .matrix()
        .clone();
    for _ in 0..STEADY_STATE_MAX_ITER {
        let next = hermitize(&channel.apply_matrix(&rho)?);
        let diff = next.max_abs_diff(&rho);
        rho = next;
        if diff < STEADY_STATE_TOL {
            return DensityOperator::new(rho, channel.dims_in().clone());
        }
    }
    Err(Error::NoConvergence(STEADY_STATE_MAX_ITER))
}

/// Labeled orthonormal basis used to read a quantum process classically.
#[derive(Clone, Debug)]
pub struct ClassicalBasis {
    labels: Vec<String>,
    states: Vec<PureState>,
}

impl ClassicalBasis {
    /// Requires an orthonormal, complete set of states.
    pub fn new(entries: Vec<(String, PureState)>) -> Result<Self> {
        let dim = entries
            .first()
            .map(|(_, s)| s.dim())
            .ok_or_else(|| Error::IncompleteBasis("empty basis".into()))?;
        if entries.len() != dim {
            return Err(Error::IncompleteBasis(format!(
                "{} states for a space of dimension {dim}",
                entries.len()
            )));
        }
        for (a, (la, sa)) in entries.iter().enumerate() {
            for (lb, sb) in entries.iter().skip(a + 1) {
                let ov = sa.inner(sb).map_err(|_| {
                    Error::IncompleteBasis("basis states differ in dimension".into())
                })?;
                if ov.norm() > DEFAULT_TOL {
                    return Err(Error::IncompleteBasis(format!(
                        "{la} and {lb} are not orthogonal"
                    )));
                }
            }
        }
        let (labels, states) = entries.into_iter().unzip();
        Ok(Self { labels, states })
    }

    /// Standard basis of `dims` labeled by per-factor symbols, e.g. `["0","1"]`
    /// for each qubit gives labels `00, 01, 10, 11`.
    pub fn computational(dims: &DimSpec, symbols: &[&[&str]]) -> Result<Self> {
        if symbols.len() != dims.len()
            || symbols
                .iter()
                .zip(dims.factors())
                .any(|(s, &d)| s.len() != d)
        {
            return Err(Error::IncompleteBasis(
                "one symbol per basis state of each factor is required".into(),
            ));
        }
        let entries = (0..dims.total())
            .map(|i| {
                let label: String = dims
                    .digits(i)
                    .iter()
                    .enumerate()
                    .map(|(f, &m)| symbols[f][m])
                    .collect();
                Ok((label, PureState::basis(dims, i)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }

    /// Product basis from per-factor labeled bases, leftmost first.
    pub fn product(factors: &[&[(&str, PureState)]]) -> Result<Self> {
        let mut entries: Vec<(String, PureState)> =
            vec![(String::new(), PureState::from_real(&[1.0])?)];
        for factor in factors {
            let mut next = Vec::with_capacity(entries.len() * factor.len());
            for (label, state) in &entries {
                for (l, s) in factor.iter() {
                    let st = if state.dim() == 1 {
                        s.clone()
                    } else {
                        state.tensor(s)
                    };
                    next.push((format!("{label}{l}"), st));
                }
            }
            entries = next;
        }
        Self::new(entries)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::NotInBasis(label.to_string()))
    }

    /// Index of the basis element equal (up to phase) to `state`.
    pub fn find(&self, state: &PureState, tol: f64) -> Option<usize> {
        self.states.iter().position(|s| s.same_ray(state, tol))
    }

    /// Born probabilities of each basis element in `rho`.
    pub fn probabilities(&self, rho: &DensityOperator) -> Result<Vec<f64>> {
        self.states.iter().map(|s| rho.probability(s)).collect()
    }
}

/// Column-stochastic transition table `T[out][in] = P(out | in)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMatrix {
    transition: Vec<Vec<f64>>,
    input_labels: Vec<String>,
    output_labels: Vec<String>,
}

impl StochasticMatrix {
    pub fn new(
        transition: Vec<Vec<f64>>,
        input_labels: Vec<String>,
        output_labels: Vec<String>,
    ) -> Result<Self> {
        if transition.len() != output_labels.len()
            || transition.iter().any(|row| row.len() != input_labels.len())
        {
            return Err(Error::InvalidStochastic(
                "shape does not match labels".into(),
            ));
        }
        for (j, label) in input_labels.iter().enumerate() {
            let mut sum = 0.0;
            for row in &transition {
                let p = row[j];
                if !(-DEFAULT_TOL..=1.0 + DEFAULT_TOL).contains(&p) {
                    return Err(Error::InvalidStochastic(format!(
                        "entry {p} in column {label} outside [0, 1]"
                    )));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > DEFAULT_TOL {
                return Err(Error::InvalidStochastic(format!(
                    "column {label} sums to {sum}"
                )));
            }
        }
        Ok(Self {
            transition,
            input_labels,
            output_labels,
        })
    }

    /// `P(out | in)`.
    pub fn get(&self, out: usize, input: usize) -> f64 {
        self.transition[out][input]
    }

    pub fn by_label(&self, out: &str, input: &str) -> Result<f64> {
        Ok(self.get(self.output_index(out)?, self.input_index(input)?))
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn input_labels(&self) -> &[String] {
        &self.input_labels
    }

    pub fn output_labels(&self) -> &[String] {
        &self.output_labels
    }

    pub fn input_index(&self, label: &str) -> Result<usize> {
        self.input_labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::NotInBasis(label.to_string()))
    }

    pub fn output_index(&self, label: &str) -> Result<usize> {
        self.output_labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::NotInBasis(label.to_string()))
    }
}

/// `P(n|m) = |<out_n|U|in_m>|²`.
pub fn classical_transition(
    u: &ComplexMatrix,
    basis_in: &ClassicalBasis,
    basis_out: &ClassicalBasis,
) -> Result<StochasticMatrix> {
    if u.cols() != basis_in.dim() || u.rows() != basis_out.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator with bases of size {} -> {}",
            u.rows(),
            u.cols(),
            basis_in.dim(),
            basis_out.dim()
        )));
    }
    let images: Vec<Vec<C64>> = basis_in
        .states()
        .iter()
        .map(|s| u.apply(s.amplitudes()))
        .collect::<Result<_>>()?;
    let transition = basis_out
        .states()
        .iter()
        .map(|o| {
            images
                .iter()
                .map(|img| linalg::inner(o.amplitudes(), img).norm_sqr())
                .collect()
        })
        .collect();
    StochasticMatrix::new(
        transition,
        basis_in.labels().to_vec(),
        basis_out.labels().to_vec(),
    )
}

fn check_probabilities(probs: &[f64], n: usize) -> Result<()> {
    if probs.len() != n {
        return Err(Error::InvalidProbabilities(format!(
            "{} probabilities for {n} inputs",
            probs.len()
        )));
    }
    if probs.iter().any(|&p| p < -DEFAULT_TOL || !p.is_finite()) {
        return Err(Error::InvalidProbabilities("negative entry".into()));
    }
    let s: f64 = probs.iter().sum();
    if (s - 1.0).abs() > DEFAULT_TOL {
        return Err(Error::InvalidProbabilities(format!("sum is {s}")));
    }
    Ok(())
}

/// Total-probability forward prediction `Σ_m T(outcome|m) p(m)`.
pub fn classical_predict(t: &StochasticMatrix, prior: &[f64], outcome: &str) -> Result<f64> {
    check_probabilities(prior, t.input_labels.len())?;
    let o = t.output_index(outcome)?;
    Ok(t.transition[o].iter().zip(prior).map(|(a, b)| a * b).sum())
}

/// Bayes retrodiction `P(m|outcome) = T(outcome|m) p(m) / P(outcome)`.
pub fn classical_bayes(t: &StochasticMatrix, prior: &[f64], outcome: &str) -> Result<Vec<f64>> {
    let evidence = classical_predict(t, prior, outcome)?;
    if evidence < IMPOSSIBLE_PROBABILITY {
        return Err(Error::ImpossibleOutcome(evidence));
    }
    let o = t.output_index(outcome)?;
    Ok(t.transition[o]
        .iter()
        .zip(prior)
        .map(|(a, b)| a * b / evidence)
        .collect())
}
