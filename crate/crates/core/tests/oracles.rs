//! Scenario and inversion results checked against hand-built state vectors.

use std::f64::consts::FRAC_1_SQRT_2 as H;

use qbayes::bayes::{petz_channel, Prior};
use qbayes::channels::Channel;
use qbayes::linalg::{re, ComplexMatrix, ComplexRepr, DimSpec};
use qbayes::random::random_density;
use qbayes::scenarios::{run_example1, run_frauchiger_renner, run_hardy, ScenarioOptions};
use qbayes::states::DensityOperator;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn overlap_sq(a: &[ComplexRepr], b: &[(f64, f64)]) -> f64 {
    let (mut re_, mut im_) = (0.0, 0.0);
    for (x, &(br, bi)) in a.iter().zip(b) {
        // conj(b) * a
        re_ += br * x.re + bi * x.im;
        im_ += br * x.im - bi * x.re;
    }
    re_ * re_ + im_ * im_
}

#[test]
fn example1_collapse_on_0b() {
    // V|φ_S 0_A> = √(1-r)|00> + √r|1>|+>, so the 0_B branch keeps
    // √(1-r)|0_R> + √(r/2)|1_R>
    for r in [0.1, 0.5, 0.75] {
        let rep = run_example1(r, &ScenarioOptions::default()).unwrap();
        let (w0, w1) = (1.0 - r, r / 2.0);
        let p0b = w0 + w1;
        assert!((rep.quantity("P(0_B)").unwrap() - p0b).abs() < 1e-12);
        let s = rep.state("R_given_0_B").unwrap();
        let oracle = [((w0 / p0b).sqrt(), 0.0), ((w1 / p0b).sqrt(), 0.0)];
        assert!((overlap_sq(&s.amplitudes, &oracle) - 1.0).abs() < 1e-12);
        // classical Bayes: only 1_S0_A reaches 1_R1_B, whatever r is
        let p11 = r * 0.5;
        assert!((rep.quantity("P(1_R1_B)").unwrap() - p11).abs() < 1e-12);
        let v = &rep.step("retrodict").unwrap().verdict;
        assert!((v.ccr_probability - (0.5 * r) / p11).abs() < 1e-12);
    }
}

#[test]
fn example1_inverse_image_is_one_minus() {
    let rep = run_example1(0.5, &ScenarioOptions::default()).unwrap();
    let img = &rep.step("retrodict").unwrap().verdict.qcr_state;
    // |1_S -_A><1_S -_A| has entries ±1/2 on the 10/11 block
    let expected = [
        [0.0; 4],
        [0.0; 4],
        [0.0, 0.0, 0.5, -0.5],
        [0.0, 0.0, -0.5, 0.5],
    ];
    for (row, exp) in img.entries.iter().zip(expected) {
        for (z, e) in row.iter().zip(exp) {
            assert!((z.re - e).abs() < 1e-12 && z.im.abs() < 1e-12);
        }
    }
}

#[test]
fn frauchiger_renner_final_state() {
    // ψ_L̄S = (h̄↓ + t̄↓ + t̄↑)/√3; V₂ on S gives
    // ψ_L̄L = h̄(f + o)/√6 + t̄ f √(2/3)
    let s6 = 1.0 / 6f64.sqrt();
    let oracle = [(s6, 0.0), (s6, 0.0), ((2.0 / 3f64).sqrt(), 0.0), (0.0, 0.0)];
    let rep = run_frauchiger_renner(&ScenarioOptions::default()).unwrap();
    let ll = rep.state("psi_LbarL").unwrap();
    assert!((overlap_sq(&ll.amplitudes, &oracle) - 1.0).abs() < 1e-12);
    // <ō o| = (<h̄ o| - <t̄ o|)/√2
    let amp = H * (oracle[1].0 - oracle[3].0);
    assert!((rep.quantity("P(ō o) direct").unwrap() - amp * amp).abs() < 1e-12);
    // <ō ↑|ψ_L̄S> = -1/√6
    assert!((rep.quantity("P(ō↑)").unwrap() - 1.0 / 6.0).abs() < 1e-12);
    let ls = rep.state("psi_LbarS (h̄,t̄)").unwrap();
    let s3 = 1.0 / 3f64.sqrt();
    assert!(
        (overlap_sq(
            &ls.amplitudes,
            &[(s3, 0.0), (0.0, 0.0), (s3, 0.0), (s3, 0.0)]
        ) - 1.0)
            .abs()
            < 1e-12
    );
}

#[test]
fn hardy_final_state_by_brute_force() {
    for (alpha, beta) in [(0.8f64, 0.6f64), (0.6, 0.8), (0.28, 0.96)] {
        let s = (alpha + beta).sqrt();
        // u, v as (re, im) pairs; both are purely imaginary
        let u = [-beta.sqrt() / s, -alpha.sqrt() / s];
        let v = [-alpha.sqrt() / s, beta.sqrt() / s];
        let k = (1.0 - alpha * beta).sqrt();
        let (a, b) = ((alpha * beta).sqrt() / k, (alpha - beta) / k);
        // U[i][j] = coefficient of |i><j|; <u| contributes conj(i u_j) = -i u_j
        // so every entry is -i times a real number
        let mut m = [[0.0; 2]; 2];
        for j in 0..2 {
            m[0][j] = a * u[j] + b * v[j];
            m[1][j] = -b * u[j] + a * v[j];
        }
        // (U⊗U)(α|00> - β|11>): each term picks up (-i)² = -1
        let mut out = [0.0; 4];
        for i in 0..2 {
            for l in 0..2 {
                out[2 * i + l] = -(alpha * m[i][0] * m[l][0] - beta * m[i][1] * m[l][1]);
            }
        }
        let rep = run_hardy(alpha, beta, &ScenarioOptions::default()).unwrap();
        let rs = rep.state("psi_RS").unwrap();
        let oracle: Vec<(f64, f64)> = out.iter().map(|&x| (x, 0.0)).collect();
        assert!(
            (overlap_sq(&rs.amplitudes, &oracle) - 1.0).abs() < 1e-12,
            "α = {alpha}"
        );
        assert!((rep.quantity("P(d_Rd_S)").unwrap() - out[3] * out[3]).abs() < 1e-12);
    }
}

#[test]
fn petz_of_a_reset_channel_prepares_the_prior() {
    // Kraus |0><i|: Λ(X) = Tr(X)|0><0|, and the recovery map is Tr(X) ρ
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for d in [2, 3, 4] {
        let kraus = (0..d)
            .map(|i| {
                let mut k = ComplexMatrix::zeros(d, d);
                k.set(0, i, re(1.0));
                k
            })
            .collect();
        let ch = Channel::from_kraus(kraus).unwrap();
        let rho = random_density(&DimSpec::single(d), &mut rng);
        let rec = petz_channel(&ch, &Prior::explicit(rho.clone())).unwrap();
        for x in [
            DensityOperator::maximally_mixed(&DimSpec::single(d)),
            random_density(&DimSpec::single(d), &mut rng),
        ] {
            let out = rec.apply(&x).unwrap();
            assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-10, "d = {d}");
        }
    }
}
