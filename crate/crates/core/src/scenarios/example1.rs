//! Uncorrelated system and apparatus driven by a global isometry
//! `|0_S 0_A> -> |0_R 0_B>`, `|1_S 0_A> -> |1_R +_B>`.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::bayes::ClassicalBasis;
use crate::causal::{check_measurement_relation, compare_ccr_qcr, CausalQuery};
use crate::channels::{complete_isometry, Channel, PartialIsometrySpec};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DimSpec};
use crate::states::PureState;

use super::{
    contradiction_resolved, real_qubit, Headline, ScenarioOptions, ScenarioReport, StateRecord,
    Step,
};

/// The completed two-qubit unitary `V` on `S ⊗ A -> R ⊗ B`.
pub fn example1_unitary() -> Result<ComplexMatrix> {
    let zero = real_qubit(1.0, 0.0);
    let one = real_qubit(0.0, 1.0);
    let plus = real_qubit(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
    let spec = PartialIsometrySpec::new(vec![
        (zero.tensor(&zero), zero.tensor(&zero)),
        (one.tensor(&zero), one.tensor(&plus)),
    ])?;
    complete_isometry(&spec)
}

fn bases() -> Result<(ClassicalBasis, ClassicalBasis)> {
    let dims = DimSpec::qubits(2);
    Ok((
        ClassicalBasis::computational(&dims, &[&["0_S", "1_S"], &["0_A", "1_A"]])?,
        ClassicalBasis::computational(&dims, &[&["0_R", "1_R"], &["0_B", "1_B"]])?,
    ))
}

pub fn run_example1(r: f64, options: &ScenarioOptions) -> Result<ScenarioReport> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "r must lie in (0, 1), got {r}"
        )));
    }
    let tol = options.tolerance;
    let dims = DimSpec::qubits(2);
    let v = example1_unitary()?;
    let channel = Channel::unitary(&v, dims.clone())?;
    let prior = options.prior_for(&channel)?;
    let (basis_in, basis_out) = bases()?;

    let zero = real_qubit(1.0, 0.0);
    let one = real_qubit(0.0, 1.0);
    let phi_s = real_qubit((1.0 - r).sqrt(), r.sqrt());
    let phi_sa = phi_s.tensor(&zero).with_dims(dims.clone())?;
    let phi_rb = phi_sa.evolve(&v)?;

    let basis_state = |i: usize| PureState::basis(&dims, i);
    let p_11 = phi_rb.probability(&basis_state(3)?)?;
    // R conditioned on 0_B
    let (p_0b, post) = crate::states::measure_project(&phi_rb, &[1], &zero)?;
    let r_given_0b = post
        .reduced(&[0])?
        .as_pure(tol)
        .ok_or_else(|| Error::InvalidParameter("collapse on 0_B left R mixed".into()))?;

    let forward = compare_ccr_qcr(
        &CausalQuery::predict(
            channel.clone(),
            basis_state(0)?.density(),
            basis_state(0)?.density(),
            basis_in.clone(),
            basis_out.clone(),
        )
        .with_prior(prior.clone())
        .with_tolerance(tol),
    )?;
    let retro = compare_ccr_qcr(
        &CausalQuery::infer(
            channel.clone(),
            phi_sa.density(),
            basis_state(3)?.density(),
            basis_state(2)?.density(),
            basis_in.clone(),
            basis_out.clone(),
        )
        .with_prior(prior.clone())
        .with_tolerance(tol),
    )?;
    let transition = CausalQuery::infer(
        channel.clone(),
        phi_sa.density(),
        basis_state(3)?.density(),
        basis_state(2)?.density(),
        basis_in,
        basis_out,
    )
    .transition()?;
    let t_11_10 = transition.by_label("1_R1_B", "1_S0_A")?;

    let measurement = check_measurement_relation(&channel, &zero, &one, &one, tol)?;
    let steps = vec![
        Step {
            label: "predict".into(),
            description: "cause 0_S0_A predicts effect 0_R0_B".into(),
            verdict: forward,
        },
        Step {
            label: "retrodict".into(),
            description: "effect 1_R1_B retrodicted to cause 1_S0_A".into(),
            verdict: retro,
        },
    ];
    let retro = &steps[1].verdict;

    let mut quantities = BTreeMap::new();
    quantities.insert("P(1_R1_B)".into(), p_11);
    quantities.insert("P(1_S0_A)".into(), r);
    quantities.insert("P(0_B)".into(), p_0b);
    quantities.insert("T(1_R1_B|1_S0_A)".into(), t_11_10);
    quantities.insert(
        "measurement_relation_1_S_1_B".into(),
        f64::from(u8::from(measurement.holds)),
    );
    quantities.insert(
        "measurement_effect_probability_1_B".into(),
        measurement.effect_probability,
    );

    let headline = Headline {
        ccr_conclusion: format!(
            "1_R1_B infers 1_S0_A with probability {:.6}, independent of r",
            retro.ccr_probability
        ),
        qcr_conclusion: format!(
            "the inverse image of 1_R1_B is 1_S(-)_A, matching 1_S0_A with fidelity {:.6}",
            retro.qcr_match_fidelity
        ),
        contradiction_resolved: contradiction_resolved(&steps, tol),
        qcr_consistent: (retro.qcr_match_fidelity - t_11_10).abs() <= tol,
    };

    let mut parameters = BTreeMap::new();
    parameters.insert("r".into(), r);
    Ok(ScenarioReport {
        scenario: "example1".into(),
        parameters,
        prior: options.prior.name().into(),
        states: vec![
            StateRecord::new("phi_S", &phi_s),
            StateRecord::new("phi_SA", &phi_sa),
            StateRecord::new("phi_RB", &phi_rb),
            StateRecord::new("R_given_0_B", &r_given_0b),
        ],
        quantities,
        steps,
        headline,
        notes: vec![
            "V is completed to a unitary by pairing 0_S1_A with 0_R1_B and 1_S1_A with 1_R(-)_B"
                .into(),
            "classical bases: computational on S,A and R,B".into(),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;

    #[test]
    fn completion_sends_11_back_to_1_minus() {
        let v = example1_unitary().unwrap();
        let image = v
            .adjoint()
            .apply(&[re(0.0), re(0.0), re(0.0), re(1.0)])
            .unwrap();
        let h = FRAC_1_SQRT_2;
        let expected = [0.0, 0.0, h, -h];
        for (a, e) in image.iter().zip(expected) {
            assert!((a - re(e)).norm() < 1e-12);
        }
    }

    #[test]
    fn reference_run() {
        let rep = run_example1(0.5, &ScenarioOptions::default()).unwrap();
        let v = &rep.step("retrodict").unwrap().verdict;
        assert!((v.ccr_probability - 1.0).abs() < 1e-12);
        assert!((v.qcr_match_fidelity - 0.5).abs() < 1e-12);
        assert!(!v.deterministic_qcr);
        assert!((rep.quantity("P(1_R1_B)").unwrap() - 0.25).abs() < 1e-12);
        assert!(rep.step("predict").unwrap().verdict.deterministic_qcr);
        assert!(rep.headline.contradiction_resolved && rep.headline.qcr_consistent);
        assert_eq!(rep.quantity("measurement_relation_1_S_1_B"), Some(0.0));
        assert!((rep.quantity("measurement_effect_probability_1_B").unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn collapse_on_0b_oracle() {
        // R part of the 0_B branch: sqrt(1-r)|0> + sqrt(r/2)|1>, normalized
        for r in [0.5, 0.2, 0.9] {
            let rep = run_example1(r, &ScenarioOptions::default()).unwrap();
            let s = rep.state("R_given_0_B").unwrap();
            let n2 = (1.0 - r) + r / 2.0;
            assert!((s.weight(0) - (1.0 - r) / n2).abs() < 1e-12);
            assert!((s.weight(1) - (r / 2.0) / n2).abs() < 1e-12);
            assert!((rep.step("retrodict").unwrap().verdict.ccr_probability - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn out_of_range_r() {
        for r in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(run_example1(r, &ScenarioOptions::default()).is_err());
        }
    }
}
