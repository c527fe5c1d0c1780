//! Entangled system and apparatus with a local unitary on the apparatus.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::bayes::ClassicalBasis;
use crate::causal::{compare_ccr_qcr, CausalQuery};
use crate::channels::Channel;
use crate::error::Result;
use crate::linalg::{c, re, tensor, ComplexMatrix, DimSpec};
use crate::states::PureState;

use super::{contradiction_resolved, Headline, ScenarioOptions, ScenarioReport, StateRecord, Step};

/// `U_A`: `|0_A> -> (|0_B> + i|1_B>)/√2`, `|1_A> -> (i|0_B> + |1_B>)/√2`.
pub fn apparatus_unitary() -> ComplexMatrix {
    let h = FRAC_1_SQRT_2;
    ComplexMatrix::from_rows(&[vec![re(h), c(0.0, h)], vec![c(0.0, h), re(h)]]).expect("2x2")
}

/// `(i|0_S1_A> + i|1_S0_A> + |1_S1_A>)/√3`.
pub fn initial_state() -> PureState {
    let s = 1.0 / 3f64.sqrt();
    PureState::new(
        vec![re(0.0), c(0.0, s), c(0.0, s), re(s)],
        DimSpec::qubits(2),
    )
    .expect("normalized")
}

pub fn run_example2(options: &ScenarioOptions) -> Result<ScenarioReport> {
    let tol = options.tolerance;
    let dims = DimSpec::qubits(2);
    let u = tensor(&ComplexMatrix::identity(2), &apparatus_unitary());
    let channel = Channel::unitary(&u, dims.clone())?;
    let prior = options.prior_for(&channel)?;
    let basis_in = ClassicalBasis::computational(&dims, &[&["0_S", "1_S"], &["0_A", "1_A"]])?;
    let basis_out = ClassicalBasis::computational(&dims, &[&["0_S", "1_S"], &["0_B", "1_B"]])?;

    let psi_sa = initial_state();
    let psi_sb = psi_sa.evolve(&u)?;
    let basis_state = |i: usize| PureState::basis(&dims, i);

    let retro = compare_ccr_qcr(
        &CausalQuery::infer(
            channel.clone(),
            psi_sa.density(),
            basis_state(1)?.density(),
            basis_state(1)?.density(),
            basis_in.clone(),
            basis_out.clone(),
        )
        .with_prior(prior.clone())
        .with_tolerance(tol),
    )?;
    let predict = compare_ccr_qcr(
        &CausalQuery::predict(
            channel.clone(),
            psi_sa.density(),
            basis_state(3)?.density(),
            basis_in.clone(),
            basis_out.clone(),
        )
        .with_prior(prior)
        .with_tolerance(tol),
    )?;
    let transition = CausalQuery::predict(
        channel,
        psi_sa.density(),
        basis_state(3)?.density(),
        basis_in,
        basis_out,
    )
    .transition()?;

    let mut quantities = BTreeMap::new();
    quantities.insert("P(0_S1_A)".into(), psi_sa.probability(&basis_state(1)?)?);
    quantities.insert("P(0_S1_B)".into(), psi_sb.probability(&basis_state(1)?)?);
    quantities.insert("|<1_S1_B|psi_SB>|".into(), psi_sb.amplitude(3).norm());
    quantities.insert(
        "T(0_S1_B|0_S1_A)".into(),
        transition.by_label("0_S1_B", "0_S1_A")?,
    );

    let steps = vec![
        Step {
            label: "retrodict".into(),
            description: "effect 0_S1_B retrodicted to cause 0_S1_A".into(),
            verdict: retro,
        },
        Step {
            label: "predict".into(),
            description: "prediction of effect 1_S1_B from psi_SA".into(),
            verdict: predict,
        },
    ];
    let (r, p) = (&steps[0].verdict, &steps[1].verdict);
    let headline = Headline {
        ccr_conclusion: format!(
            "0_S1_B infers 0_S1_A with probability {:.6}; 1_S1_B is predicted with probability {:.6}",
            r.ccr_probability, p.ccr_probability
        ),
        qcr_conclusion: format!(
            "the inverse image of 0_S1_B matches 0_S1_A with fidelity {:.6}; 1_S1_B has Born probability {:.6}",
            r.qcr_match_fidelity, p.qcr_probability
        ),
        contradiction_resolved: contradiction_resolved(&steps, tol),
        qcr_consistent: (r.qcr_match_fidelity - quantities["T(0_S1_B|0_S1_A)"]).abs() <= tol
            && p.qcr_probability <= tol,
    };

    Ok(ScenarioReport {
        scenario: "example2".into(),
        parameters: BTreeMap::new(),
        prior: options.prior.name().into(),
        states: vec![
            StateRecord::new("psi_SA", &psi_sa),
            StateRecord::new("psi_SB", &psi_sb),
        ],
        quantities,
        steps,
        headline,
        notes: vec!["classical bases: computational on S,A and S,B".into()],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn final_state_matches_hand_expansion() {
        let psi = initial_state()
            .evolve(&tensor(&ComplexMatrix::identity(2), &apparatus_unitary()))
            .unwrap();
        let s = 1.0 / 6f64.sqrt();
        let expected = [re(-s), c(0.0, s), c(0.0, 2.0 * s), re(0.0)];
        for (a, e) in psi.amplitudes().iter().zip(expected) {
            assert!((a - e).norm() < 1e-12);
        }
    }

    #[test]
    fn reference_run() {
        let rep = run_example2(&ScenarioOptions::default()).unwrap();
        let r = &rep.step("retrodict").unwrap().verdict;
        assert!((r.ccr_probability - 1.0).abs() < 1e-12);
        assert!((r.qcr_match_fidelity - 0.5).abs() < 1e-12);
        let p = &rep.step("predict").unwrap().verdict;
        assert!((p.ccr_probability - 1.0 / 3.0).abs() < 1e-12);
        assert!(p.qcr_probability.abs() < 1e-12);
        assert!(rep.state("psi_SB").unwrap().weight(3) < 1e-24);
        assert!(rep.headline.qcr_consistent);
    }

    #[test]
    fn retrodicted_image_is_the_inverse_image() {
        // U_A†|1_B> = (|1_A> - i|0_A>)/√2 on the 0_S branch
        let rep = run_example2(&ScenarioOptions::default()).unwrap();
        let img = &rep.step("retrodict").unwrap().verdict.qcr_state;
        assert!((img.entries[0][0].re - 0.5).abs() < 1e-12);
        assert!((img.entries[1][1].re - 0.5).abs() < 1e-12);
        // <00|ρ|01> = (-i)(1)* / 2 → -i/2
        assert!((img.entries[0][1].im + 0.5).abs() < 1e-12);
    }
}
