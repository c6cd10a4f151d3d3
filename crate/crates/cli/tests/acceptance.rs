//! Acceptance criteria: one PASS/FAIL line each, non-zero exit on failure.

use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use bergman_cli::{render, Command, ExperimentConfig};
use bergman_core::duality::{prop32_ratio, prop32_sweep, residue_pairing};
use bergman_core::estimates::{verify_prop12, Prop12Case};
use bergman_core::interpolation::{bekolle_check, default_bekolle_grid, verify_interpolation, InterpolationProblem};
use bergman_core::report::default_lambda_grid;
use bergman_core::theorems::{
    higher_order_suite, main1_sweep, parameter_gate, verify_higher_order, verify_inner_est, verify_main1_lower,
    verify_main1_upper, verify_power_growth, zero_sum, Branch, Direction, GateExtra, GateVariant, TheoremId,
};
use bergman_core::{BlaschkeProduct, DiskPoint, Polynomial, QuadOptions, Weight, ZeroSequence};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (usize, &'static str, Option<Duration>, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn std_w(alpha: f64) -> Weight {
    Weight::standard(alpha).unwrap()
}

fn opts() -> QuadOptions {
    QuadOptions::default()
}

/// Area-uniform point of modulus at most `r_max`.
fn random_point(rng: &mut ChaCha8Rng, r_max: f64) -> Complex64 {
    let r = r_max * rng.random::<f64>().sqrt();
    Complex64::from_polar(r, TAU * rng.random::<f64>())
}

fn random_product(rng: &mut ChaCha8Rng, degree: usize, r_max: f64) -> BlaschkeProduct {
    let zeros: Vec<Complex64> = (0..degree).map(|_| random_point(rng, r_max)).collect();
    BlaschkeProduct::from_complex(&zeros).unwrap()
}

fn single_zero(z: f64) -> BlaschkeProduct {
    BlaschkeProduct::new(vec![DiskPoint::from_complex(Complex64::new(z, 0.0)).unwrap()]).unwrap()
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let t = Instant::now();
    let mut o = f();
    let el = t.elapsed();
    match limit {
        Some(l) => {
            o.passed &= el < l;
            o.detail.push_str(&format!("; {:.1} s (limit {} s)", el.as_secs_f64(), l.as_secs()));
        }
        None => o.detail.push_str(&format!("; {:.1} s", el.as_secs_f64())),
    }
    o
}

fn c1_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    let mut failures = 0;
    for _ in 0..100 {
        let d = rng.random_range(1..=8);
        let b = random_product(&mut rng, d, 0.95);
        let g = Polynomial::random(rng.random_range(0..=5), &mut rng);
        match residue_pairing(&b, &g, &opts()) {
            Ok(r) => worst = worst.max(r.max_discrepancy),
            Err(_) => failures += 1,
        }
    }
    outcome(
        failures == 0 && worst <= 1e-7,
        format!("100 products: max relative discrepancy {worst:e} (tol 1e-7), {failures} identity errors"),
    )
}

fn c2_preimages() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    let mut bad = 0;
    for _ in 0..100 {
        let d = rng.random_range(1..=16);
        let b = random_product(&mut rng, d, 0.95);
        let zeta = random_point(&mut rng, 0.9);
        match b.preimages(zeta) {
            Ok(roots) => {
                if roots.len() != d || roots.iter().any(|r| !(r.modulus() < 1.0)) {
                    bad += 1;
                }
                for r in &roots {
                    worst = worst.max((b.eval(r) - zeta).norm());
                }
            }
            Err(_) => bad += 1,
        }
    }
    outcome(
        bad == 0 && worst < 1e-9,
        format!("100 cases: max |B(root) - zeta| {worst:e} (tol 1e-9), {bad} with wrong count or modulus"),
    )
}

fn c3_change_of_variables() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let w = std_w(-0.5);
    let mut worst = 0.0f64;
    let mut errors = 0;
    for _ in 0..20 {
        let d = rng.random_range(1..=6);
        let b = random_product(&mut rng, d, 0.9);
        for eps in [0.1, 0.25] {
            match verify_inner_est(&b, 1.0, &w, eps, &opts()) {
                Ok(r) => worst = worst.max(r.relative_difference),
                Err(e) => {
                    eprintln!("criterion 3 error: {e}");
                    errors += 1
                }
            }
        }
    }
    outcome(
        errors == 0 && worst <= 1e-3,
        format!("20 products x 2 eps: max relative difference {worst:e} (tol 1e-3), {errors} errors"),
    )
}

fn c4_prop12_i() -> Outcome {
    let grid = default_lambda_grid();
    let mut parts = Vec::new();
    let mut ok = true;
    for alpha in [-0.5, 0.0, 0.5] {
        let r = verify_prop12(Prop12Case::I, alpha + 1.0, &std_w(alpha), &grid, &opts()).unwrap();
        let slope = r.slope.unwrap_or(f64::NAN);
        ok &= r.spread <= 20.0 && slope.abs() <= 0.1;
        parts.push(format!("alpha {alpha}: spread {:.4}, slope {slope:.4}", r.spread));
    }
    outcome(ok, format!("{} (spread <= 20, |slope| <= 0.1)", parts.join("; ")))
}

fn c5_prop12_iii() -> Outcome {
    let grid = default_lambda_grid();
    let mut parts = Vec::new();
    let mut ok = true;
    for alpha in [-0.5, 0.0, 0.5] {
        let r = verify_prop12(Prop12Case::III, alpha, &std_w(alpha), &grid, &opts()).unwrap();
        let env = if r.ratios.is_empty() { f64::NAN } else { r.upper_envelope_spread() };
        ok &= env <= 50.0;
        parts.push(format!("alpha {alpha}: envelope spread {env:.4}"));
    }
    outcome(ok, format!("{} (<= 50)", parts.join("; ")))
}

const MAIN1_PAIRS: [(f64, f64); 2] = [(1.0, -0.5), (1.5, -0.4)];
const MAIN1_NS: [usize; 4] = [5, 10, 20, 30];

fn c6_main1_upper() -> Outcome {
    let mut ok = true;
    let mut worst = 0.0f64;
    for sigma in [0.3, 0.5, 0.7] {
        for (p, alpha) in MAIN1_PAIRS {
            let t = main1_sweep(Direction::Upper, sigma, &MAIN1_NS, p, &std_w(alpha), GateVariant::AsPrinted, &opts())
                .unwrap();
            let r = &t.report;
            ok &= r.c_max <= 2.0 * r.median;
            worst = worst.max(r.c_max / r.median);
        }
    }
    let anchor = verify_main1_upper(&single_zero(0.0), 1.0, &std_w(-0.5), &opts()).unwrap().report.ratios[0];
    ok &= (anchor - 2.0).abs() <= 1e-6;
    outcome(ok, format!("worst max/median {worst:.4} (<= 2); anchor {anchor} (2 +- 1e-6)"))
}

fn c7_main1_lower() -> Outcome {
    let mut ok = true;
    let mut worst = f64::INFINITY;
    for sigma in [0.3, 0.5, 0.7] {
        for (p, alpha) in MAIN1_PAIRS {
            let variant = if p > 1.0 { GateVariant::Harmonized } else { GateVariant::AsPrinted };
            let t = main1_sweep(Direction::Lower, sigma, &MAIN1_NS, p, &std_w(alpha), variant, &opts()).unwrap();
            let r = &t.report;
            ok &= r.c_min >= 0.5 * r.median;
            worst = worst.min(r.c_min / r.median);
        }
    }
    let anchor = verify_main1_lower(&single_zero(0.0), 1.0, &std_w(-0.5), GateVariant::AsPrinted, &opts())
        .unwrap()
        .report
        .ratios[0];
    ok &= (anchor - 0.5).abs() <= 1e-6;
    outcome(
        ok,
        format!("worst min/median {worst:.4} (>= 0.5, harmonized window at p = 1.5); anchor {anchor} (0.5 +- 1e-6)"),
    )
}

fn c8_prop32() -> Outcome {
    let w = std_w(-0.4);
    let t = prop32_sweep(0.5, &[4, 8, 16], 1.5, &w, &opts()).unwrap();
    let anchor = prop32_ratio(&single_zero(0.0), 1.5, &w, &opts()).unwrap().report.ratios[0];
    let ok = t.report.spread <= 10.0 && (anchor - 1.0 / 0.6).abs() <= 1e-6;
    outcome(
        ok,
        format!(
            "band spread {:.4} (<= 10), ratios {:?}; anchor {anchor} (1/0.6 +- 1e-6)",
            t.report.spread, t.report.ratios
        ),
    )
}

fn c9_interpolation() -> Outcome {
    let w = std_w(0.0);
    let seq = ZeroSequence::from_spec("exp:sigma=0.5,n=10").unwrap();
    let prob = InterpolationProblem::new(seq, vec![Complex64::new(0.0, 0.0); 10], 2.0, w.clone(), Some(1.0)).unwrap();
    let r = verify_interpolation(&prob, 20, &mut ChaCha8Rng::seed_from_u64(909), &opts()).unwrap();
    let bek = bekolle_check(&w, 2.0, 1.0, &default_bekolle_grid()).unwrap();
    let ok = r.max_residual < 1e-8 && r.band <= 3.0 && (bek.constant - 1.0 / 3.0).abs() <= 1e-6;
    outcome(
        ok,
        format!(
            "max residual {:e} (< 1e-8), band {:.4} (<= 3); Bekolle constant {} (1/3 +- 1e-6)",
            r.max_residual, r.band, bek.constant
        ),
    )
}

fn c10_higher_order() -> Outcome {
    let anchor = verify_higher_order(&Polynomial::monomial(2), 1, 2.0, &std_w(0.0), &opts()).unwrap();
    let (l, r) = (anchor.report.lhs[0], anchor.report.rhs[0]);
    let ratio = anchor.report.ratios[0];
    let suite =
        higher_order_suite(50, 10, 2, 2.0, &std_w(0.5), &mut ChaCha8Rng::seed_from_u64(1010), &opts()).unwrap();
    let ok = (ratio - 1.0).abs() <= 1e-9 && suite.report.spread <= 50.0;
    outcome(
        ok,
        format!("anchor ratio {ratio} (1 +- 1e-9; sides {l}, {r}); suite spread {:.4} (<= 50)", suite.report.spread),
    )
}

fn c11_power_growth() -> Outcome {
    let w = std_w(-0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    let cases = [("z", single_zero(0.0)), ("degree 2", random_product(&mut rng, 2, 0.9))];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, b) in cases {
        let r = verify_power_growth(&b, &w, &[4, 8, 16, 32], &opts()).unwrap();
        let base = zero_sum(&b, 1.0, &w, false);
        let exact = r.zero_sums.iter().zip([4.0, 8.0, 16.0, 32.0]).all(|(s, n)| *s == n * base);
        ok &= r.strictly_decreasing && exact && r.zero_sum_exact;
        parts.push(format!("{name}: ratios {:?}, zero sums exact {exact}", r.ratios));
    }
    outcome(ok, parts.join("; "))
}

fn c12_gates() -> Outcome {
    use Branch::*;
    use TheoremId::*;
    let plain = GateExtra::default;
    let harmonized = GateExtra {
        variant: GateVariant::Harmonized,
        ..GateExtra::default()
    };
    let p2 = |x: f64| GateExtra {
        p2: Some(x),
        ..GateExtra::default()
    };
    let s = |x: f64| GateExtra {
        s: Some(x),
        ..GateExtra::default()
    };
    let table: [(TheoremId, f64, f64, GateExtra, Branch); 12] = [
        (Main1Upper, 1.0, -0.5, plain(), SubLimit),
        (Main1Upper, 1.0, 0.0, plain(), Limit),
        (Main1Upper, 1.5, -0.4, plain(), SubLimit),
        (Main1Upper, 1.5, 0.5, plain(), Limit),
        (Main1Lower, 1.5, -0.4, plain(), Inadmissible),
        (Main1Lower, 1.5, -0.4, harmonized, SubLimit),
        (InnerEstimate, 1.0, -0.5, plain(), SubLimit),
        (InnerEstimate, 2.0, 0.0, plain(), Inadmissible),
        (Cor24, 1.6, 0.3, p2(2.0), SubLimit),
        (Cor24, 0.8, 0.3, p2(1.2), Inadmissible),
        (CohnAnalogue, 3.0, 0.2, s(1.5), SubLimit),
        (CohnAnalogue, 3.0, -0.3, s(1.5), Inadmissible),
    ];
    let mut wrong = Vec::new();
    for (id, p, alpha, extra, expected) in table {
        let got = parameter_gate(id, p, &std_w(alpha), extra).map(|g| g.branch);
        if got.as_ref() != Ok(&expected) {
            wrong.push(format!("{} p={p} alpha={alpha}: {got:?}", id.as_str()));
        }
    }
    outcome(wrong.is_empty(), format!("12 triples, mismatches: [{}]", wrong.join(", ")))
}

fn determinism_configs() -> Vec<ExperimentConfig> {
    let mk = |c: Command, sets: &[(&str, &str)]| {
        let mut cfg = ExperimentConfig::new(c);
        cfg.set("drift", "false").unwrap();
        for (k, v) in sets {
            cfg.set(k, v).unwrap();
        }
        cfg
    };
    vec![
        mk(Command::Prop12, &[("alpha", "0"), ("lambda_points", "8")]),
        mk(Command::Main1, &[("sequence", "exp:sigma=0.5,n=10"), ("drift", "true")]),
        mk(Command::Mashregi, &[("sequence", "exp:sigma=0.5,n=4")]),
        mk(Command::Inner, &[("sequence", "exp:sigma=0.5,n=3")]),
        mk(Command::Cor24, &[("p1", "1.6"), ("p2", "2"), ("alpha", "0.3"), ("sequence", "exp:sigma=0.5,n=6")]),
        mk(Command::Higher, &[("trials", "8"), ("p", "2"), ("alpha", "0.5"), ("drift", "true")]),
        mk(Command::Interp, &[("sequence", "exp:sigma=0.5,n=6"), ("trials", "5"), ("p", "2"), ("alpha", "0")]),
        mk(Command::Duality, &[("sequence", "exp:sigma=0.5,n=8"), ("p", "1.5"), ("alpha", "-0.4")]),
        mk(Command::Cohn, &[("sequence", "exp:sigma=0.5,n=4"), ("p", "3"), ("s", "1.5"), ("alpha", "0.2"), ("trials", "5")]),
        mk(Command::PowerGrowth, &[("sequence", "radial:moduli=0.3;0.6")]),
    ]
}

fn c13_determinism() -> Outcome {
    let mut differing = Vec::new();
    for cfg in determinism_configs() {
        let a = render(&cfg).map(|r| r.csv);
        let b = render(&cfg).map(|r| r.csv);
        match (a, b) {
            (Ok(a), Ok(b)) if a == b => {}
            (a, b) => differing.push(format!("{} ({})", cfg.command, if a.is_err() || b.is_err() { "error" } else { "differs" })),
        }
    }
    outcome(
        differing.is_empty(),
        format!("10 commands rendered twice, not bit-identical: [{}]", differing.join(", ")),
    )
}

fn main() {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria: Vec<Criterion> = vec![
        (1, "exact pairing identities", secs(60), c1_identities),
        (2, "preimage solver", secs(30), c2_preimages),
        (3, "change-of-variable cross-check", secs(120), c3_change_of_variables),
        (4, "kernel integral two-sided estimate", secs(60), c4_prop12_i),
        (5, "kernel integral limit case", None, c5_prop12_iii),
        (6, "derivative norm upper bound", None, c6_main1_upper),
        (7, "derivative norm lower bound", None, c7_main1_lower),
        (8, "quotient-sum band", None, c8_prop32),
        (9, "interpolation", None, c9_interpolation),
        (10, "higher-order norms", None, c10_higher_order),
        (11, "o(n) growth of powers", None, c11_power_growth),
        (12, "parameter gates", None, c12_gates),
        (13, "deterministic CSV", None, c13_determinism),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (id, name, limit, f) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let o = timed(limit, f);
        println!("{} criterion {id:>2} ({name}): {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        if !o.passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all selected criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
