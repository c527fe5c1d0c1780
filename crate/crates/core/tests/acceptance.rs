//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero on failure.

use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qbayes::linalg::{c, re, C64};
use qbayes::properties::{run_property_suite, PropertyConfig};
use qbayes::scenarios::{
    run_example1, run_example2, run_frauchiger_renner, run_hardy, ScenarioOptions, ScenarioReport,
};

const TOL: f64 = 1e-9;

type Check = fn(&mut Criterion) -> qbayes::Result<()>;

struct Criterion {
    failures: Vec<String>,
}

impl Criterion {
    fn new() -> Self {
        Self {
            failures: Vec::new(),
        }
    }

    fn near(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        // written so that NaN fails
        let ok = (got - want).abs() <= tol;
        if !ok {
            self.failures
                .push(format!("{what}: got {got:.15}, want {want:.15} ± {tol:e}"));
        }
    }

    fn truth(&mut self, what: &str, ok: bool) {
        if !ok {
            self.failures.push(what.to_string());
        }
    }
}

fn quantity(rep: &ScenarioReport, name: &str) -> f64 {
    rep.quantity(name).unwrap_or(f64::NAN)
}

fn criterion_1(k: &mut Criterion) -> qbayes::Result<()> {
    let rep = run_example1(0.5, &ScenarioOptions::default())?;
    let v = &rep.step("retrodict").expect("retrodict step").verdict;
    k.near("ccr P(1_S0_A|1_R1_B)", v.ccr_probability, 1.0, TOL);
    k.near("P(1_R1_B)", quantity(&rep, "P(1_R1_B)"), 0.25, TOL);
    k.near("qcr_match_fidelity", v.qcr_match_fidelity, 0.5, TOL);
    k.truth("deterministic_qcr must be false", !v.deterministic_qcr);
    Ok(())
}

fn criterion_2(k: &mut Criterion) -> qbayes::Result<()> {
    let rep = run_example2(&ScenarioOptions::default())?;
    let retro = &rep.step("retrodict").expect("retrodict step").verdict;
    let predict = &rep.step("predict").expect("predict step").verdict;
    k.near("ccr P(0_S1_A|0_S1_B)", retro.ccr_probability, 1.0, TOL);
    k.near("ccr P(1_S1_B)", predict.ccr_probability, 1.0 / 3.0, TOL);
    let amp = rep.state("psi_SB").expect("psi_SB").amplitudes[3];
    k.near("|<1_S1_B|psi_SB>|", amp.re.hypot(amp.im), 0.0, TOL);
    Ok(())
}

fn criterion_3(k: &mut Criterion) -> qbayes::Result<()> {
    let rep = run_frauchiger_renner(&ScenarioOptions::default())?;
    let a3 = &rep.step("A3").expect("A3 step").verdict;
    k.near(
        "direct P(ō o)",
        quantity(&rep, "P(ō o) direct"),
        1.0 / 12.0,
        TOL,
    );
    k.near("A3 ccr posterior", a3.ccr_probability, 1.0, TOL);
    k.near("F(V₁⁽²⁾†|t̄↑>, |t̄↓>)", a3.qcr_match_fidelity, 0.5, TOL);
    k.near(
        "qcr propagation P(ō o)",
        quantity(&rep, "P(ō o) qcr_propagation"),
        1.0 / 12.0,
        TOL,
    );
    Ok(())
}

fn mat_vec(m: &[[C64; 2]; 2], v: [C64; 2]) -> [C64; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

/// Brute-force `|<d_R d_S|(U ⊗ U)(α|00> - β|11>)|²` built from the
/// basis-change and unitary constants, independent of the library.
fn hardy_dd_oracle(alpha: f64, beta: f64) -> (f64, f64, f64) {
    let s = (alpha + beta).sqrt();
    let u = [c(0.0, -beta.sqrt() / s), c(0.0, -alpha.sqrt() / s)];
    let v = [c(0.0, -alpha.sqrt() / s), c(0.0, beta.sqrt() / s)];
    let k = (1.0 - alpha * beta).sqrt();
    let a = (alpha * beta).sqrt() / k;
    let b = (alpha - beta) / k;
    let n = (1.0 - alpha * beta) / (alpha - beta);
    // U = (a c - b d)<u| + (b c + a d)<v|
    let mut m = [[re(0.0); 2]; 2];
    for j in 0..2 {
        m[0][j] = u[j].conj() * a + v[j].conj() * b;
        m[1][j] = -u[j].conj() * b + v[j].conj() * a;
    }
    let psi = [[re(alpha), re(0.0)], [re(0.0), re(-beta)]];
    let mut amp = re(0.0);
    for j in 0..2 {
        for l in 0..2 {
            amp += m[1][j] * m[1][l] * psi[j][l];
        }
    }
    // sanity: U is unitary
    let e0 = mat_vec(&m, [re(1.0), re(0.0)]);
    let e1 = mat_vec(&m, [re(0.0), re(1.0)]);
    assert!((e0[0].conj() * e1[0] + e0[1].conj() * e1[1]).norm() < 1e-12);
    (amp.norm_sqr(), (n * a * a * b * b).powi(2), b * b)
}

fn criterion_4(k: &mut Criterion) -> qbayes::Result<()> {
    let (alpha, beta) = (0.8, 0.6);
    let rep = run_hardy(alpha, beta, &ScenarioOptions::default())?;
    let (brute, formula, b2) = hardy_dd_oracle(alpha, beta);
    let dd = rep.state("psi_RS").expect("psi_RS").weight(3);
    k.near("|<dd|psi_RS>|² vs |n a² b²|²", dd, formula, TOL);
    k.near("|<dd|psi_RS>|² vs brute force", dd, brute, TOL);
    k.near("P(d_Rd_S) ≈ 0.0340828", dd, 0.0340828, 1e-7);
    let h2 = &rep.step("H2").expect("H2 step").verdict;
    k.near("H2 ccr P(d_Ru_N|d_Rd_S)", h2.ccr_probability, 1.0, TOL);
    k.near("H2 qcr fidelity = |b|²", h2.qcr_match_fidelity, b2, TOL);
    k.near("|b|² = 0.04/0.52", b2, 0.04 / 0.52, TOL);
    k.near(
        "<u_Mu_N|psi_MN>",
        quantity(&rep, "<u_Mu_N|psi_MN>"),
        0.0,
        1e-12,
    );
    let chain = &rep.step("chain").expect("chain step").verdict;
    k.near(
        "u_Mu_N weight of U_M†⊗U_N†|d_Rd_S> = |b|⁴",
        chain.qcr_match_fidelity,
        b2 * b2,
        TOL,
    );
    Ok(())
}

fn criterion_5(k: &mut Criterion) -> qbayes::Result<()> {
    let cfg = PropertyConfig {
        dims: vec![2, 3, 4],
        trials: 100,
        seed: 2024,
    };
    for o in run_property_suite(&cfg)? {
        println!("    {o}");
        k.truth(
            &format!("{} residual {:e}", o.name, o.max_residual),
            o.passed,
        );
    }
    Ok(())
}

fn criterion_6(k: &mut Criterion) -> qbayes::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut done = 0;
    while done < 20 {
        let alpha: f64 = rng.random_range(0.02..0.999);
        let beta = (1.0 - alpha * alpha).sqrt();
        if (alpha - beta).abs() < 1e-3 {
            continue;
        }
        done += 1;
        let rep = run_hardy(alpha, beta, &ScenarioOptions::default())?;
        let tag = format!("α={alpha:.6}");
        k.near(
            &format!("{tag} ordering"),
            quantity(&rep, "max|psi_RS orderings|"),
            0.0,
            TOL,
        );
        for s in &rep.states {
            let norm: f64 = (0..s.amplitudes.len()).map(|i| s.weight(i)).sum();
            k.near(&format!("{tag} norm {}", s.label), norm, 1.0, TOL);
        }
        for name in [
            "norm(psi_RN closed form)",
            "norm(psi_MS closed form)",
            "norm(psi_RS closed form)",
        ] {
            k.near(&format!("{tag} {name}"), quantity(&rep, name), 1.0, TOL);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 6] = [
        ("1 example-1 retrodiction", criterion_1),
        ("2 example-2 retrodiction and prediction", criterion_2),
        ("3 frauchiger-renner 1/12", criterion_3),
        ("4 hardy α=0.8 β=0.6", criterion_4),
        ("5 property suite", criterion_5),
        ("6 hardy ordering and normalization", criterion_6),
    ];
    let mut all = true;
    for (name, run) in criteria {
        let mut k = Criterion::new();
        if let Err(e) = run(&mut k) {
            k.failures.push(format!("error: {e}"));
        }
        if k.failures.is_empty() {
            println!("PASS criterion {name}");
        } else {
            all = false;
            println!("FAIL criterion {name}");
            for f in &k.failures {
                println!("    {f}");
            }
        }
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
