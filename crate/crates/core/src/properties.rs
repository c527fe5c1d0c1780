//! Seeded numerical invariant suite over random channels and priors.
//!
//! Each property draws `trials` random instances per dimension and records
//! the largest residual seen; it passes when that residual stays within
//! its threshold.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bayes::{
    bayes_invert, causal_conditional_state, classical_bayes, petz_channel, propagate,
    ClassicalBasis, Prior, StochasticMatrix,
};
use crate::causal::{compare_ccr_qcr, CausalQuery};
use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::linalg::{re, ComplexMatrix, DimSpec};
use crate::random::{
    classical_channel, permutation_unitary, random_channel, random_density, random_hermitian,
    random_permutation, random_stochastic, random_unitary,
};
use crate::states::{DensityOperator, PureState};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyConfig {
    pub dims: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for PropertyConfig {
    fn default() -> Self {
        Self {
            dims: vec![2, 3, 4],
            trials: 100,
            seed: 7,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub threshold: f64,
    pub max_residual: f64,
    pub trials: usize,
    pub passed: bool,
}

impl fmt::Display for PropertyOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<28} trials={:<5} max_residual={:.3e} threshold={:.0e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.trials,
            self.max_residual,
            self.threshold
        )
    }
}

type Property = fn(usize, &mut ChaCha8Rng) -> Result<f64>;

/// Name, threshold and single-trial residual of every property.
pub const PROPERTIES: &[(&str, f64, Property)] = &[
    ("petz_recovery", 1e-8, petz_recovery),
    (
        "unitary_prior_independence",
        1e-8,
        unitary_prior_independence,
    ),
    ("trace_duality", 1e-9, trace_duality),
    ("propagate_matches_channel", 1e-9, propagate_matches_channel),
    ("conditional_marginal", 1e-9, conditional_marginal),
    ("classical_reduction", 1e-9, classical_reduction),
    ("permutation_ccr_qcr", 1e-9, permutation_ccr_qcr),
    ("double_inversion", 1e-8, double_inversion),
];

pub fn run_property_suite(config: &PropertyConfig) -> Result<Vec<PropertyOutcome>> {
    if config.dims.is_empty() || config.dims.contains(&0) || config.dims.contains(&1) {
        return Err(Error::InvalidParameter(format!(
            "dimensions must be at least 2, got {:?}",
            config.dims
        )));
    }
    let mut out = Vec::with_capacity(PROPERTIES.len());
    for (k, (name, threshold, property)) in PROPERTIES.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(k as u64));
        let mut worst = 0.0f64;
        for &d in &config.dims {
            for _ in 0..config.trials {
                let r = property(d, &mut rng)?;
                // NaN must count as a failure
                worst = if r.is_nan() {
                    f64::INFINITY
                } else {
                    worst.max(r)
                };
            }
        }
        out.push(PropertyOutcome {
            name,
            threshold: *threshold,
            max_residual: worst,
            trials: config.trials * config.dims.len(),
            passed: worst <= *threshold,
        });
    }
    Ok(out)
}

fn n_kraus(rng: &mut ChaCha8Rng) -> usize {
    rng.random_range(1..=3)
}

/// `D(Λ̄(Λ(ρ)), ρ)` for the prior `ρ` itself.
pub fn petz_recovery(d: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let d_out = rng.random_range(2..=d.max(2));
    let k = n_kraus(rng);
    let ch = random_channel(d, d_out, k, rng);
    let prior = Prior::explicit(random_density(&DimSpec::single(d), rng));
    let rec = petz_channel(&ch, &prior)?;
    rec.apply(&ch.apply(prior.state())?)?
        .trace_distance(prior.state())
}

/// For unitary `U`, the recovery channel is `U†` up to phase for three priors.
pub fn unitary_prior_independence(d: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let u = random_unitary(d, rng);
    let ch = Channel::unitary(&u, DimSpec::single(d))?;
    let ud = u.adjoint();
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let prior = Prior::explicit(random_density(&DimSpec::single(d), rng));
        let rec = petz_channel(&ch, &prior)?;
        if rec.kraus().len() != 1 {
            return Ok(f64::INFINITY);
        }
        let k = &rec.kraus()[0];
        let overlap = ud.hs_inner(k);
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            re(1.0)
        };
        worst = worst.max(k.max_abs_diff(&ud.scale(phase)));
    }
    Ok(worst)
}

/// `|Tr[Y Λ(X)] - Tr[Λ†(Y) X]|` for random Hermitian `X`, `Y`.
pub fn trace_duality(d: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let d_out = rng.random_range(2..=d.max(2));
    let k = n_kraus(rng);
    let ch = random_channel(d, d_out, k, rng);
    let x = random_hermitian(d, rng);
    let y = random_hermitian(d_out, rng);
    let lhs = (&y * &ch.apply_matrix(&x)?).trace();
    let rhs = (&ch.adjoint().apply_matrix(&y)? * &x).trace();
    Ok((lhs - rhs).norm())
}

/// Propagating through the conditional state agrees with the Kraus form.
pub fn propagate_matches_channel(d: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let d_out = rng.random_range(2..=d.max(2));
    let k = n_kraus(rng);
    let ch = random_channel(d, d_out, k, rng);
    let rho = random_density(&DimSpec::single(d), rng);
    let p = causal_conditional_state(&ch);
    Ok(propagate(&p, &rho)?
        .matrix()
        .max_abs_diff(ch.apply(&rho)?.matrix()))
}

/// `Tr_R P_{R|S} = I` on the conditioning system.
pub fn conditional_marginal(d: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let d_out = rng.random_range(2..=d.max(2));
    let k = n_kraus(rng);
    causal_conditional_state(&random_channel(d, d_out, k, rng)).marginal_deviation()
}

fn random_probabilities(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..d).map(|_| rng.random::<f64>() + 0.05).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|p| p / s).collect()
}

fn labels(prefix: &str, d: usize) -> Vec<String> {
    (0..d).map(|i| format!("{prefix}{i}")).collect()
}

/// The diagonal of the inverted conditional state of a classical channel
/// equals the Bayes posterior table.
pub fn classical_reduction(d: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let d_out = rng.random_range(2..=d.max(2));
    let t = random_stochastic(d, d_out, rng);
    let ch = classical_channel(&t);
    let p = random_probabilities(d, rng);
    let diag = ComplexMatrix::from_real_diagonal(&p);
    let prior = Prior::explicit(DensityOperator::new(diag, DimSpec::single(d))?);
    let inv = bayes_invert(&causal_conditional_state(&ch), &prior, &ch)?;
    let table = StochasticMatrix::new(t, labels("s", d), labels("r", d_out))?;
    let mut worst = 0.0f64;
    for r in 0..d_out {
        let post = classical_bayes(&table, &p, &format!("r{r}"))?;
        for (s, q) in post.iter().enumerate() {
            let i = r * d + s;
            worst = worst.max((inv.matrix().get(i, i).re - q).abs());
        }
    }
    Ok(worst)
}

/// On permutation channels the classical and quantum verdicts coincide for
/// every basis-state prediction and retrodiction.
pub fn permutation_ccr_qcr(d: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let perm = random_permutation(d, rng);
    let dims = DimSpec::single(d);
    let ch = Channel::unitary(&permutation_unitary(&perm), dims.clone())?;
    let in_labels = labels("s", d);
    let out_labels = labels("r", d);
    let bin = ClassicalBasis::new(
        (0..d)
            .map(|i| Ok((in_labels[i].clone(), PureState::basis(&dims, i)?)))
            .collect::<Result<_>>()?,
    )?;
    let bout = ClassicalBasis::new(
        (0..d)
            .map(|i| Ok((out_labels[i].clone(), PureState::basis(&dims, i)?)))
            .collect::<Result<_>>()?,
    )?;
    let prep = DensityOperator::maximally_mixed(&dims);
    let mut worst = 0.0f64;
    for j in 0..d {
        for i in 0..d {
            let cause = PureState::basis(&dims, j)?.density();
            let effect = PureState::basis(&dims, i)?.density();
            let fwd = compare_ccr_qcr(&CausalQuery::predict(
                ch.clone(),
                cause.clone(),
                effect.clone(),
                bin.clone(),
                bout.clone(),
            ))?;
            let back = compare_ccr_qcr(&CausalQuery::infer(
                ch.clone(),
                prep.clone(),
                effect,
                cause,
                bin.clone(),
                bout.clone(),
            ))?;
            worst = worst
                .max((fwd.ccr_probability - fwd.qcr_probability).abs())
                .max((back.ccr_probability - back.qcr_match_fidelity).abs());
            if fwd.deterministic_ccr != fwd.deterministic_qcr
                || back.deterministic_ccr != back.deterministic_qcr
            {
                return Ok(f64::INFINITY);
            }
        }
    }
    Ok(worst)
}

/// Inverting the inverse with the induced output prior returns the original
/// conditional state.
pub fn double_inversion(d: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let ch = random_channel(d, d, 2, rng);
    let prior = Prior::explicit(random_density(&DimSpec::single(d), rng));
    let p = causal_conditional_state(&ch);
    let inv = bayes_invert(&p, &prior, &ch)?;
    let rec = petz_channel(&ch, &prior)?;
    let output_prior = Prior::explicit(ch.apply(prior.state())?);
    let back = bayes_invert(&inv, &output_prior, &rec)?;
    Ok(back.matrix().max_abs_diff(p.matrix()))
}
