//! Hardy's two-qubit setup `ψ_MN` with local unitaries `U_M`, `U_N`.
//!
//! `ψ_MN` is built from its `u/v` expansion
//! `√(αβ)(uv + vu) + (α - β) vv`, which is `-(α|00> - β|11>)` for the basis
//! `|u> = -i(√β|0> + √α|1>)/√s`, `|v> = -i(√α|0> - √β|1>)/√s`, `s = α + β`.
//! `U_M`, `U_N` send `u -> a c - b d`, `v -> b c + a d` with `c = |0>`,
//! `d = |1>` on the output qubit.

use std::collections::BTreeMap;

use crate::bayes::classical_bayes;
use crate::causal::{check_inference, compare_ccr_qcr, CausalQuery, Direction, InferenceVerdict};
use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::linalg::{c, re, tensor, tensor_vec, ComplexMatrix, DimSpec, C64};
use crate::states::{DensityOperator, PureState};

use super::{
    contradiction_resolved, product_basis, CustomVerdict, FactorBasis, Headline, ScenarioOptions,
    ScenarioReport, StateRecord, Step,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HardyConstants {
    pub alpha: f64,
    pub beta: f64,
    /// `A = √α/√(α+β)`.
    pub big_a: f64,
    /// `B = i√β/√(α+β)`.
    pub big_b: C64,
    /// `a = √(αβ)/√(1-αβ)`.
    pub a: f64,
    /// `b = (α-β)/√(1-αβ)`.
    pub b: f64,
    /// `n = (1-αβ)/(α-β)`.
    pub n: f64,
}

/// Validates `(α, β)` and derives the basis-change and unitary constants.
pub fn hardy_constants(alpha: f64, beta: f64, tol: f64) -> Result<HardyConstants> {
    if !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::InvalidParameter("α and β must be finite".into()));
    }
    if alpha.abs() < tol || beta.abs() < tol {
        return Err(Error::DegenerateParameters(format!(
            "zero amplitude (α = {alpha}, β = {beta})"
        )));
    }
    if alpha < 0.0 || beta < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "α and β must be positive, got α = {alpha}, β = {beta}"
        )));
    }
    let norm = alpha * alpha + beta * beta;
    if (norm - 1.0).abs() > tol {
        return Err(Error::InvalidParameter(format!(
            "α² + β² = {norm}, expected 1"
        )));
    }
    if (alpha - beta).abs() < tol {
        return Err(Error::DegenerateParameters(format!(
            "|α| = |β| = {alpha} leaves a, b and n undefined"
        )));
    }
    let s = alpha + beta;
    let k = (1.0 - alpha * beta).sqrt();
    Ok(HardyConstants {
        alpha,
        beta,
        big_a: alpha.sqrt() / s.sqrt(),
        big_b: c(0.0, beta.sqrt() / s.sqrt()),
        a: (alpha * beta).sqrt() / k,
        b: (alpha - beta) / k,
        n: (1.0 - alpha * beta) / (alpha - beta),
    })
}

impl HardyConstants {
    /// `|u>` in the computational basis.
    pub fn u(&self) -> [C64; 2] {
        let s = (self.alpha + self.beta).sqrt();
        [
            c(0.0, -self.beta.sqrt() / s),
            c(0.0, -self.alpha.sqrt() / s),
        ]
    }

    /// `|v>` in the computational basis.
    pub fn v(&self) -> [C64; 2] {
        let s = (self.alpha + self.beta).sqrt();
        [c(0.0, -self.alpha.sqrt() / s), c(0.0, self.beta.sqrt() / s)]
    }

    /// `U: u -> a c - b d, v -> b c + a d`.
    pub fn local_unitary(&self) -> ComplexMatrix {
        let (u, v) = (self.u(), self.v());
        let cket = [re(1.0), re(0.0)];
        let dket = [re(0.0), re(1.0)];
        let (a, b) = (re(self.a), re(self.b));
        let terms = [
            ComplexMatrix::outer(&cket, &u).scale(a),
            ComplexMatrix::outer(&dket, &u).scale(-b),
            ComplexMatrix::outer(&cket, &v).scale(b),
            ComplexMatrix::outer(&dket, &v).scale(a),
        ];
        terms
            .iter()
            .skip(1)
            .fold(terms[0].clone(), |acc, t| &acc + t)
    }

    /// `√(αβ)(uv + vu) + (α - β) vv`.
    pub fn initial_state(&self) -> Result<PureState> {
        let (u, v) = (self.u(), self.v());
        let uv = tensor_vec(&u, &v);
        let vu = tensor_vec(&v, &u);
        let vv = tensor_vec(&v, &v);
        let (p, q) = ((self.alpha * self.beta).sqrt(), self.alpha - self.beta);
        let amps = (0..4).map(|i| (uv[i] + vu[i]) * p + vv[i] * q).collect();
        PureState::new(amps, DimSpec::qubits(2))
    }
}

fn lin(terms: &[(C64, &[C64])]) -> Vec<C64> {
    let n = terms[0].1.len();
    (0..n)
        .map(|i| terms.iter().map(|(w, v)| w * v[i]).sum())
        .collect()
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Closed forms of `ψ_RN`, `ψ_MS` and `ψ_RS` in the computational basis.
fn closed_forms(k: &HardyConstants) -> [Vec<C64>; 3] {
    let (u, v) = (k.u(), k.v());
    let cket = [re(1.0), re(0.0)];
    let dket = [re(0.0), re(1.0)];
    let (a, b, n) = (re(k.a), re(k.b), re(k.n));
    let a2 = a * a;
    let au_bv = lin(&[(a, &u), (b, &v)]);
    let ac_bd = lin(&[(a, &cket), (-b, &dket)]);
    let rn = lin(&[
        (n, &tensor_vec(&cket, &au_bv)),
        (-n * a2, &tensor_vec(&ac_bd, &u)),
    ]);
    let ms = lin(&[
        (n, &tensor_vec(&au_bv, &cket)),
        (-n * a2, &tensor_vec(&u, &ac_bd)),
    ]);
    let rs = lin(&[
        (n, &tensor_vec(&cket, &cket)),
        (-n * a2, &tensor_vec(&ac_bd, &ac_bd)),
    ]);
    [rn, ms, rs]
}

/// Classical probability that factor `factor` stays `u` in the input given
/// it reads `u` in the output, summed over the other factor's outcomes.
fn classical_local_persistence(
    query: &CausalQuery,
    prior: &[f64],
    outcomes: &[&str],
    cause_indices: &[usize],
) -> Result<f64> {
    let t = query.transition()?;
    let (mut num, mut den) = (0.0, 0.0);
    for o in outcomes {
        let p_o = crate::bayes::classical_predict(&t, prior, o)?;
        if p_o < crate::states::IMPOSSIBLE_PROBABILITY {
            continue;
        }
        let post = classical_bayes(&t, prior, o)?;
        num += p_o * cause_indices.iter().map(|&i| post[i]).sum::<f64>();
        den += p_o;
    }
    if den < crate::states::IMPOSSIBLE_PROBABILITY {
        return Err(Error::ImpossibleOutcome(den));
    }
    Ok(num / den)
}

pub fn run_hardy(alpha: f64, beta: f64, options: &ScenarioOptions) -> Result<ScenarioReport> {
    let tol = options.tolerance;
    let k = hardy_constants(alpha, beta, tol)?;
    let dims = DimSpec::qubits(2);
    let ukets = PureState::new(k.u().to_vec(), DimSpec::single(2))?;
    let vkets = PureState::new(k.v().to_vec(), DimSpec::single(2))?;
    let ck = PureState::basis(&DimSpec::single(2), 0)?;
    let dk = PureState::basis(&DimSpec::single(2), 1)?;
    let uv_m: FactorBasis = vec![("u_M", ukets.clone()), ("v_M", vkets.clone())];
    let uv_n: FactorBasis = vec![("u_N", ukets.clone()), ("v_N", vkets.clone())];
    let cd_r: FactorBasis = vec![("c_R", ck.clone()), ("d_R", dk.clone())];
    let cd_s: FactorBasis = vec![("c_S", ck.clone()), ("d_S", dk.clone())];

    let u_loc = k.local_unitary();
    let id = ComplexMatrix::identity(2);
    let um_i = tensor(&u_loc, &id);
    let i_un = tensor(&id, &u_loc);
    let um_un = tensor(&u_loc, &u_loc);

    let psi_mn = k.initial_state()?;
    let psi_rn = psi_mn.evolve(&um_i)?;
    let psi_ms = psi_mn.evolve(&i_un)?;
    let psi_rs = psi_rn.evolve(&i_un)?;
    let psi_rs_other = psi_ms.evolve(&um_i)?;
    let [rn_form, ms_form, rs_form] = closed_forms(&k);

    let uu = ukets.tensor(&ukets).with_dims(dims.clone())?;
    let dd = dk.tensor(&dk).with_dims(dims.clone())?;
    let d_r_u_n = dk.tensor(&ukets).with_dims(dims.clone())?;
    let u_m_d_s = ukets.tensor(&dk).with_dims(dims.clone())?;

    let basis_mn = product_basis(&[&uv_m, &uv_n])?;
    let basis_rn = product_basis(&[&cd_r, &uv_n])?;
    let basis_ms = product_basis(&[&uv_m, &cd_s])?;
    let basis_rs = product_basis(&[&cd_r, &cd_s])?;

    let ch_um_i = Channel::unitary(&um_i, dims.clone())?;
    let ch_i_un = Channel::unitary(&i_un, dims.clone())?;
    let ch_um_un = Channel::unitary(&um_un, dims.clone())?;
    let ch_id = Channel::identity(dims.clone());

    let query = |q: CausalQuery, ch: &Channel| -> Result<InferenceVerdict> {
        compare_ccr_qcr(&q.with_prior(options.prior_for(ch)?).with_tolerance(tol))
    };

    let h0 = query(
        CausalQuery::predict(
            ch_id.clone(),
            psi_mn.density(),
            uu.density(),
            basis_mn.clone(),
            basis_mn.clone(),
        ),
        &ch_id,
    )?;
    let h1 = query(
        CausalQuery::predict(
            ch_um_un.clone(),
            psi_mn.density(),
            dd.density(),
            basis_mn.clone(),
            basis_rs.clone(),
        ),
        &ch_um_un,
    )?;
    let h2_query = CausalQuery::infer(
        ch_i_un.clone(),
        psi_rn.density(),
        dd.density(),
        d_r_u_n.density(),
        basis_rn.clone(),
        basis_rs.clone(),
    );
    let t_h2 = h2_query.transition()?;
    let h2 = query(h2_query, &ch_i_un)?;
    let h4 = query(
        CausalQuery::infer(
            ch_um_i.clone(),
            psi_ms.density(),
            dd.density(),
            u_m_d_s.density(),
            basis_ms.clone(),
            basis_rs.clone(),
        ),
        &ch_um_i,
    )?;

    // H3 / H5: a local u on the untouched qubit is retrodicted through the
    // other qubit's unitary, with no information about the evolved qubit
    let half = DensityOperator::maximally_mixed(&DimSpec::single(2));
    let local = |keep_first: bool| -> Result<InferenceVerdict> {
        let (ch, prep, basis_in, basis_out, outcomes, causes, effect_label): (
            _,
            _,
            _,
            _,
            [&str; 2],
            [usize; 2],
            _,
        ) = if keep_first {
            // u_M seen in ψ_MS, retrodicted through I ⊗ U_N
            (
                &ch_i_un,
                &psi_mn,
                &basis_mn,
                &basis_ms,
                ["u_Mc_S", "u_Md_S"],
                [0, 1],
                "u_M",
            )
        } else {
            (
                &ch_um_i,
                &psi_mn,
                &basis_mn,
                &basis_rn,
                ["c_Ru_N", "d_Ru_N"],
                [0, 2],
                "u_N",
            )
        };
        let ulocal = ukets.density();
        let (effect, cause) = if keep_first {
            (ulocal.tensor(&half), ulocal.tensor(&half))
        } else {
            (half.tensor(&ulocal), half.tensor(&ulocal))
        };
        let effect = effect.with_dims(dims.clone())?;
        let cause = cause.with_dims(dims.clone())?;
        let q = CausalQuery::infer(
            ch.clone(),
            prep.density(),
            effect.clone(),
            cause.clone(),
            basis_in.clone(),
            basis_out.clone(),
        );
        let prior_probs = basis_in.probabilities(&prep.density())?;
        let ccr = classical_local_persistence(&q, &prior_probs, &outcomes, &causes)?;
        let check = check_inference(ch, &options.prior_for(ch)?, &effect, &cause, tol)?;
        let evolved = ch.apply(&prep.density())?;
        let effect_probability = (evolved.matrix() * effect.matrix()).trace().re * 2.0;
        Ok(CustomVerdict {
            direction: Direction::Infer,
            cause_label: effect_label,
            effect_label,
            basis_in,
            basis_out,
            ccr_probability: ccr,
            check: &check,
            effect_probability,
            narrative: format!(
                "{effect_label} persists classically with probability {ccr:.6}; its retrodicted local state matches with fidelity {:.6}",
                check.fidelity
            ),
        }
        .build(tol))
    };
    let h3 = local(false)?;
    let h5 = local(true)?;

    let chain_check = check_inference(
        &ch_um_un,
        &options.prior_for(&ch_um_un)?,
        &dd.density(),
        &uu.density(),
        tol,
    )?;
    let chain_ccr: f64 = [&h2, &h3, &h4, &h5]
        .iter()
        .map(|v| v.ccr_probability)
        .product();
    let chain = CustomVerdict {
        direction: Direction::Infer,
        cause_label: "u_Mu_N",
        effect_label: "d_Rd_S",
        basis_in: &basis_mn,
        basis_out: &basis_rs,
        ccr_probability: chain_ccr,
        check: &chain_check,
        effect_probability: psi_rs.probability(&dd)?,
        narrative: format!(
            "H1-H5 chain to u_Mu_N with probability {chain_ccr:.6}; U_M† ⊗ U_N† d_Rd_S carries u_Mu_N weight {:.6}",
            chain_check.fidelity
        ),
    }
    .build(tol);

    // direct classical retrodiction of u_Mu_N from d_Rd_S through both unitaries
    let direct_query = CausalQuery::infer(
        ch_um_un.clone(),
        psi_mn.density(),
        dd.density(),
        uu.density(),
        basis_mn.clone(),
        basis_rs.clone(),
    );
    let direct_posterior = classical_bayes(
        &direct_query.transition()?,
        &basis_mn.probabilities(&psi_mn.density())?,
        "d_Rd_S",
    )?[0];
    let global = check_inference(
        &ch_um_un,
        &options.prior_for(&ch_um_un)?,
        &psi_rs.density(),
        &psi_mn.density(),
        tol,
    )?;

    let (a, b, n) = (k.a, k.b, k.n);
    let literal = {
        let amps = vec![re(alpha), re(0.0), re(0.0), re(beta)];
        PureState::new(amps, dims.clone())?
    };
    let mut q = BTreeMap::new();
    q.insert("<u_Mu_N|psi_MN>".into(), psi_mn.inner(&uu)?.norm());
    q.insert("P(d_Rd_S)".into(), psi_rs.probability(&dd)?);
    q.insert("|n a² b²|²".into(), (n * a * a * b * b).powi(2));
    q.insert("P(d_Ru_N)".into(), psi_rn.probability(&d_r_u_n)?);
    q.insert("|n a² b|²".into(), (n * a * a * b).powi(2));
    q.insert(
        "T(d_Rd_S|d_Ru_N)".into(),
        t_h2.by_label("d_Rd_S", "d_Ru_N")?,
    );
    q.insert("|b|²".into(), b * b);
    q.insert("|b|⁴".into(), b.powi(4));
    q.insert("a".into(), a);
    q.insert("b".into(), b);
    q.insert("n".into(), n);
    q.insert(
        "ccr_direct_posterior(u_Mu_N|d_Rd_S)".into(),
        direct_posterior,
    );
    q.insert("qcr_global_retrodiction_fidelity".into(), global.fidelity);
    q.insert(
        "max|psi_RS orderings|".into(),
        max_diff(psi_rs.amplitudes(), psi_rs_other.amplitudes()),
    );
    q.insert(
        "max|psi_RN - closed form|".into(),
        max_diff(psi_rn.amplitudes(), &rn_form),
    );
    q.insert(
        "max|psi_MS - closed form|".into(),
        max_diff(psi_ms.amplitudes(), &ms_form),
    );
    q.insert(
        "max|psi_RS - closed form|".into(),
        max_diff(psi_rs.amplitudes(), &rs_form),
    );
    q.insert("norm(psi_RN closed form)".into(), norm(&rn_form));
    q.insert("norm(psi_MS closed form)".into(), norm(&ms_form));
    q.insert("norm(psi_RS closed form)".into(), norm(&rs_form));
    q.insert("|<u_Mu_N|α00+β11>|²".into(), literal.probability(&uu)?);

    let steps: Vec<Step> = [
        ("H0", "u_Mu_N is absent from psi_MN", h0),
        ("H1", "d_Rd_S is found in psi_RS", h1),
        ("H2", "d_Rd_S retrodicted through I ⊗ U_N to d_Ru_N", h2),
        (
            "H3",
            "u_N in psi_RN retrodicted through U_M ⊗ I to u_N in psi_MN",
            h3,
        ),
        ("H4", "d_Rd_S retrodicted through U_M ⊗ I to u_Md_S", h4),
        (
            "H5",
            "u_M in psi_MS retrodicted through I ⊗ U_N to u_M in psi_MN",
            h5,
        ),
        (
            "chain",
            "d_Rd_S retrodicted through U_M ⊗ U_N to u_Mu_N",
            chain,
        ),
    ]
    .into_iter()
    .map(|(label, description, verdict)| Step {
        label: label.into(),
        description: description.into(),
        verdict,
    })
    .collect();

    let get = |l: &str| {
        steps
            .iter()
            .find(|s| s.label == l)
            .map(|s| &s.verdict)
            .expect("step present")
    };
    let qcr_consistent = (get("H2").qcr_match_fidelity * get("H4").qcr_match_fidelity
        - get("chain").qcr_match_fidelity)
        .abs()
        <= tol
        && global.holds
        && psi_mn.inner(&uu)?.norm() <= tol;
    let headline = Headline {
        ccr_conclusion: format!(
            "H1-H5 demand the cause u_Mu_N for d_Rd_S with probability {chain_ccr:.6}, yet H0 excludes u_Mu_N"
        ),
        qcr_conclusion: format!(
            "U_M† ⊗ U_N† d_Rd_S has u_Mu_N weight |b|⁴ = {:.6}; retrodicting the whole psi_RS gives psi_MN with fidelity {:.6}, so H0 holds",
            get("chain").qcr_match_fidelity,
            global.fidelity
        ),
        contradiction_resolved: contradiction_resolved(&steps, tol),
        qcr_consistent,
    };

    let mut parameters = BTreeMap::new();
    parameters.insert("alpha".into(), alpha);
    parameters.insert("beta".into(), beta);
    Ok(ScenarioReport {
        scenario: "hardy".into(),
        parameters,
        prior: options.prior.name().into(),
        states: vec![
            StateRecord::new("psi_MN", &psi_mn),
            StateRecord::new("psi_RN", &psi_rn),
            StateRecord::new("psi_MS", &psi_ms),
            StateRecord::new("psi_RS", &psi_rs),
        ],
        quantities: q,
        steps,
        headline,
        notes: vec![
            "psi_MN is built from its u/v expansion, which equals -(α|00> - β|11>); α|00> + β|11> has nonzero u_Mu_N weight in this basis".into(),
            "α and β are restricted to positive reals".into(),
            "classical bases: u,v on M and N; c,d on R and S".into(),
            "closed-form norms are reported as computed, without renormalization".into(),
        ],
    })
}
