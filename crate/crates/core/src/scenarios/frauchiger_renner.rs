//! The Frauchiger-Renner state chain: `ψ_R -> ψ_L̄S -> ψ_L̄L`.
//!
//! Basis encodings: `h̄ = |0>, t̄ = |1>` on L̄ (and `h, t` on R), `↓ = |0>,
//! ↑ = |1>` on S, `f = |0>, o = |1>` on L. `f̄, ō = (h̄ ± t̄)/√2` and
//! `→, ← = (↓ ± ↑)/√2`.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::bayes::{bayes_invert, causal_conditional_state, propagate, ClassicalBasis};
use crate::causal::{compare_ccr_qcr, match_states, CausalQuery, Direction};
use crate::channels::{complete_isometry, Channel, PartialIsometrySpec};
use crate::error::Result;
use crate::linalg::{re, tensor, tensor_vec, ComplexMatrix, DimSpec};
use crate::states::{measure_project, PureState};

use super::{
    classical_conditional, contradiction_resolved, product_basis, real_qubit, CustomVerdict,
    FactorBasis, Headline, ScenarioOptions, ScenarioReport, StateRecord, Step,
};

const H: f64 = FRAC_1_SQRT_2;

struct Kets {
    zero: PureState,
    one: PureState,
    plus: PureState,
    minus: PureState,
}

fn kets() -> Kets {
    Kets {
        zero: real_qubit(1.0, 0.0),
        one: real_qubit(0.0, 1.0),
        plus: real_qubit(H, H),
        minus: real_qubit(H, -H),
    }
}

/// `ψ_R = (1/√3)|h> + √(2/3)|t>`.
pub fn initial_state() -> PureState {
    real_qubit((1.0 / 3f64).sqrt(), (2.0 / 3f64).sqrt())
}

/// `V₁⁽²⁾` on L̄ ⊗ S: `h̄↓ -> h̄↓`, `t̄↓ -> t̄→`, completed to a unitary.
pub fn v12() -> Result<ComplexMatrix> {
    let k = kets();
    let spec = PartialIsometrySpec::new(vec![
        (k.zero.tensor(&k.zero), k.zero.tensor(&k.zero)),
        (k.one.tensor(&k.zero), k.one.tensor(&k.plus)),
    ])?;
    complete_isometry(&spec)
}

/// `V₂` on S: `↓ -> (f + o)/√2`, `↑ -> (f - o)/√2`.
pub fn v2() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[H, H], &[H, -H]]).expect("2x2")
}

pub fn run_frauchiger_renner(options: &ScenarioOptions) -> Result<ScenarioReport> {
    let tol = options.tolerance;
    let k = kets();
    let dims = DimSpec::qubits(2);
    let lbar_comp: FactorBasis = vec![("h̄", k.zero.clone()), ("t̄", k.one.clone())];
    let lbar_fo: FactorBasis = vec![("f̄", k.plus.clone()), ("ō", k.minus.clone())];
    let s_comp: FactorBasis = vec![("↓", k.zero.clone()), ("↑", k.one.clone())];
    let s_lr: FactorBasis = vec![("→", k.plus.clone()), ("←", k.minus.clone())];
    let l_comp: FactorBasis = vec![("f", k.zero.clone()), ("o", k.one.clone())];

    // F0, F1
    let psi_r = initial_state();
    let v11 = ComplexMatrix::identity(2);
    let before_v12 = psi_r
        .evolve(&v11)?
        .tensor(&k.zero)
        .with_dims(dims.clone())?;
    let v12 = v12()?;
    let v12_channel = Channel::unitary(&v12, dims.clone())?;
    let psi_ls = before_v12.evolve(&v12)?;
    let fbar = &k.plus;
    let obar = &k.minus;
    let psi_ls_rotated = {
        let a = fbar.tensor(&k.zero).amplitudes().to_vec();
        let b = fbar.tensor(&k.one).amplitudes().to_vec();
        let c = obar.tensor(&k.one).amplitudes().to_vec();
        let (ca, cb) = ((2.0 / 3f64).sqrt(), 1.0 / 6f64.sqrt());
        let v = (0..4).map(|i| a[i] * ca + b[i] * cb - c[i] * cb).collect();
        PureState::new(v, dims.clone())?
    };
    // F2
    let v2_full = tensor(&ComplexMatrix::identity(2), &v2());
    let v2_channel = Channel::unitary(&v2_full, dims.clone())?;
    let psi_ll = psi_ls.evolve(&v2_full)?;
    let obar_o = obar.tensor(&k.one).with_dims(dims.clone())?;
    let p_direct = psi_ll.probability(&obar_o)?;

    let basis_ls_fo = product_basis(&[&lbar_fo, &s_comp])?;
    let basis_ls = product_basis(&[&lbar_comp, &s_comp])?;
    let basis_ls_lr = product_basis(&[&lbar_comp, &s_lr])?;
    let basis_ll_fo = product_basis(&[&lbar_fo, &l_comp])?;
    let basis_s_lr = ClassicalBasis::product(&[&s_lr])?;
    let basis_l = ClassicalBasis::product(&[&l_comp])?;

    // A1: ō in ψ_L̄S comes with ↑
    let a1 = {
        let ccr = classical_conditional(&psi_ls, &basis_ls_fo, |d| d[1] == 1, |d| d[0] == 1)?;
        let (p_obar, post) = measure_project(&psi_ls, &[0], obar)?;
        let check = match_states(post.reduced(&[1])?, &k.one.density(), tol)?;
        CustomVerdict {
            direction: Direction::Infer,
            cause_label: "↑",
            effect_label: "ō",
            basis_in: &basis_ls_fo,
            basis_out: &basis_ls_fo,
            ccr_probability: ccr,
            check: &check,
            effect_probability: p_obar,
            narrative: format!(
                "P(↑|ō) = {ccr:.6} in ψ_L̄S; collapsing on ō leaves S in ↑ with fidelity {:.6}",
                check.fidelity
            ),
        }
        .build(tol)
    };
    // A2: ↑ comes with t̄
    let a2 = {
        let ccr = classical_conditional(&psi_ls, &basis_ls, |d| d[0] == 1, |d| d[1] == 1)?;
        let (p_up, post) = measure_project(&psi_ls, &[1], &k.one)?;
        let check = match_states(post.reduced(&[0])?, &k.one.density(), tol)?;
        CustomVerdict {
            direction: Direction::Infer,
            cause_label: "t̄",
            effect_label: "↑",
            basis_in: &basis_ls,
            basis_out: &basis_ls,
            ccr_probability: ccr,
            check: &check,
            effect_probability: p_up,
            narrative: format!(
                "P(t̄|↑) = {ccr:.6} in ψ_L̄S; collapsing on ↑ leaves L̄ in t̄ with fidelity {:.6}",
                check.fidelity
            ),
        }
        .build(tol)
    };
    // A3: t̄↑ retrodicted through V₁⁽²⁾
    let tbar_up = k.one.tensor(&k.one).with_dims(dims.clone())?;
    let tbar_down = k.one.tensor(&k.zero).with_dims(dims.clone())?;
    let tbar_left = k.one.tensor(&k.minus).with_dims(dims.clone())?;
    let a3_query = CausalQuery::infer(
        v12_channel.clone(),
        before_v12.density(),
        tbar_up.density(),
        tbar_down.density(),
        basis_ls.clone(),
        basis_ls.clone(),
    )
    .with_prior(options.prior_for(&v12_channel)?)
    .with_tolerance(tol);
    let a3 = compare_ccr_qcr(&a3_query)?;
    let t_a3 = a3_query.transition()?;
    let a3_image_left = a3
        .qcr_state
        .to_density(Some(dims.clone()))?
        .probability(&tbar_left)?;
    // V₂ sends t̄← to t̄o
    let tbar_o = k.one.tensor(&k.one).with_dims(dims.clone())?;
    let v2_on_left = tbar_left.evolve(&v2_full)?.probability(&tbar_o)?;
    // A4: t̄↓ predicts t̄→ under V₁⁽²⁾
    let a4 = compare_ccr_qcr(
        &CausalQuery::predict(
            v12_channel.clone(),
            tbar_down.density(),
            k.one.tensor(&k.plus).with_dims(dims.clone())?.density(),
            basis_ls.clone(),
            basis_ls_lr,
        )
        .with_tolerance(tol),
    )?;
    // A5: → predicts f under V₂
    let v2_single = Channel::unitary(&v2(), DimSpec::single(2))?;
    let a5 = compare_ccr_qcr(
        &CausalQuery::predict(
            v2_single,
            k.plus.density(),
            k.zero.density(),
            basis_s_lr,
            basis_l,
        )
        .with_tolerance(tol),
    )?;
    // A6: direct prediction of ō o from ψ_L̄S
    let a6 = compare_ccr_qcr(
        &CausalQuery::predict(
            v2_channel.clone(),
            psi_ls.density(),
            obar_o.density(),
            basis_ls_fo.clone(),
            basis_ll_fo,
        )
        .with_tolerance(tol),
    )?;

    // QCR propagation: retrodict ψ_L̄S through V₁⁽²⁾, then push the cause
    // forward through V₂ ∘ V₁⁽²⁾
    let retro = bayes_invert(
        &causal_conditional_state(&v12_channel),
        &options.prior_for(&v12_channel)?,
        &v12_channel,
    )?;
    let cause_state = propagate(&retro, &psi_ls.density())?;
    let forward = causal_conditional_state(&v12_channel.then(&v2_channel)?);
    let propagated = propagate(&forward, &cause_state)?;
    let p_qcr_propagation = propagated.probability(&obar_o)?;
    // chain: weight of ō↑ in ψ_L̄S times P(o) for its cause pushed forward
    let obar_up = obar.tensor(&k.one).with_dims(dims.clone())?;
    let p_obar_up = psi_ls.probability(&obar_up)?;
    let obar_up_cause = propagate(&retro, &obar_up.density())?;
    let pushed = propagate(&forward, &obar_up_cause)?;
    let p_o_given_cause = pushed.reduced(&[1])?.probability(&k.one)?;
    let p_qcr_chain = p_obar_up * p_o_given_cause;

    let mut quantities = BTreeMap::new();
    quantities.insert("P(ō o) direct".into(), p_direct);
    quantities.insert("P(ō o) qcr_propagation".into(), p_qcr_propagation);
    quantities.insert("P(ō o) qcr_chain".into(), p_qcr_chain);
    let ccr_chain_certain = [&a1, &a2, &a3, &a4, &a5]
        .iter()
        .all(|v| v.deterministic_ccr);
    // a certain chain ō -> t -> → -> f rules out ō o
    if ccr_chain_certain {
        quantities.insert("P(ō o) ccr_chain".into(), 0.0);
    }
    quantities.insert("P(ō↑)".into(), p_obar_up);
    quantities.insert("P(o | V₂ V₁⁽²⁾ V₁⁽²⁾†(ō↑))".into(), p_o_given_cause);
    quantities.insert("P(t̄↓)".into(), before_v12.probability(&tbar_down)?);
    quantities.insert("P(t̄↑)".into(), psi_ls.probability(&tbar_up)?);
    quantities.insert("T(t̄↑|t̄↓)".into(), t_a3.by_label("t̄↑", "t̄↓")?);
    quantities.insert("F(V₁⁽²⁾†(t̄↑), t̄←)".into(), a3_image_left);
    quantities.insert("P(t̄o | V₂(t̄←))".into(), v2_on_left);
    quantities.insert(
        "max|ψ_L̄S - ψ_L̄S(f̄,ō)|".into(),
        max_amp_diff(&psi_ls, &psi_ls_rotated),
    );
    quantities.insert(
        "max|ψ_L̄L - closed form|".into(),
        max_amp_diff(&psi_ll, &closed_form_psi_ll(&dims)?),
    );

    let steps: Vec<Step> = [
        ("A1", "observing ō in ψ_L̄S ensures ↑", a1),
        ("A2", "observing ↑ in ψ_L̄S ensures t̄", a2),
        ("A3", "t̄↑ retrodicted through V₁⁽²⁾ to t̄↓", a3),
        ("A4", "t̄↓ predicts t̄→ through V₁⁽²⁾", a4),
        ("A5", "→ predicts f through V₂", a5),
        ("A6", "ō o predicted from ψ_L̄S through V₂", a6),
    ]
    .into_iter()
    .map(|(label, description, verdict)| Step {
        label: label.into(),
        description: description.into(),
        verdict,
    })
    .collect();

    let headline = Headline {
        ccr_conclusion: "A1-A5 each hold with certainty, so ō is always accompanied by f and ō o is never observed; A6 finds it with probability 1/12".into(),
        qcr_conclusion: format!(
            "t̄↑ retrodicts to t̄←, not t̄↓ (fidelity {:.6}); propagating ψ_L̄S through V₂ ∘ V₁⁽²⁾† gives P(ō o) = {:.6}",
            steps[2].verdict.qcr_match_fidelity, p_qcr_propagation
        ),
        contradiction_resolved: contradiction_resolved(&steps, tol),
        qcr_consistent: (p_qcr_propagation - p_direct).abs() <= tol
            && (p_qcr_chain - p_direct).abs() <= tol,
    };

    Ok(ScenarioReport {
        scenario: "frauchiger_renner".into(),
        parameters: BTreeMap::new(),
        prior: options.prior.name().into(),
        states: vec![
            StateRecord::new("psi_R", &psi_r),
            StateRecord::new("psi_LbarS (h̄,t̄)", &psi_ls),
            StateRecord::new("psi_LbarS (f̄,ō)", &psi_ls_rotated),
            StateRecord::new("psi_LbarL", &psi_ll),
        ],
        quantities,
        steps,
        headline,
        notes: vec![
            "V₁⁽¹⁾ relabels h, t on R as h̄, t̄ on L̄".into(),
            "V₁⁽²⁾ is completed by h̄↑ -> h̄↑ and t̄↑ -> t̄←".into(),
            "classical bases for A3: computational h̄,t̄ x ↓,↑ on both sides".into(),
            "the quantum chain probability is P(ō↑) times P(o) for the retrodicted cause of ō↑ pushed forward through V₂ ∘ V₁⁽²⁾".into(),
        ],
    })
}

fn max_amp_diff(a: &PureState, b: &PureState) -> f64 {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `(1/√12)[ō(o - f) + f̄(o + 3f)]` on L̄ ⊗ L.
fn closed_form_psi_ll(dims: &DimSpec) -> Result<PureState> {
    let k = kets();
    let unnormalized = |f: f64, o: f64| [re(f), re(o)];
    let a = tensor_vec(k.minus.amplitudes(), &unnormalized(-1.0, 1.0));
    let b = tensor_vec(k.plus.amplitudes(), &unnormalized(3.0, 1.0));
    let s = 1.0 / 12f64.sqrt();
    let v: Vec<_> = a.iter().zip(&b).map(|(x, y)| (x + y) * s).collect();
    // norm is checked by the caller against the evolved state
    PureState::new(v, dims.clone())
}
