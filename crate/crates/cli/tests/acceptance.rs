//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and exits nonzero if
//! any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use locc_core::convert::{concentration_experiment, dilution_experiment};
use locc_core::infospec::entropy_proxies;
use locc_core::suites::{run_suite, SuiteConfig};
use locc_core::{Budgets, SequenceModel};

const H: f64 = 0.325_082_973_391_448_2;
const LN2: f64 = std::f64::consts::LN_2;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn skewed() -> SequenceModel {
    SequenceModel::iid_from_probs(&[0.9, 0.1]).unwrap()
}

/// Rate quantiles of `-ln 0.9 + (K / n) ln 9` with `K ~ Bin(n, 0.1)`.
fn binomial_quantiles(n: u32, eps: f64) -> (f64, f64) {
    let mut pmf = 0.9f64.powi(n as i32);
    let mut cdf = 0.0;
    let (mut under, mut over) = (f64::NAN, f64::NAN);
    for k in 0..=n {
        cdf += pmf;
        let rate = -0.9f64.ln() + f64::from(k) / f64::from(n) * 9f64.ln();
        if under.is_nan() && cdf > eps {
            under = rate;
        }
        if over.is_nan() && cdf >= 1.0 - eps {
            over = rate;
        }
        pmf *= f64::from(n - k) / f64::from(k + 1) * (0.1 / 0.9);
    }
    (under, over)
}

fn aep() -> Outcome {
    let s = skewed().generate(400, &Budgets::default()).unwrap();
    let (u, o) = entropy_proxies(&s, 400, 0.1).unwrap();
    let (ou, oo) = binomial_quantiles(400, 0.1);
    let pass = (u - H).abs() < 0.03 && (o - H).abs() < 0.03;
    outcome(
        pass,
        format!(
            "underline {u:.6} overline {o:.6} (binomial oracle {ou:.6} / {oo:.6}), |dev| {:.4} / {:.4}, need < 0.03",
            (u - H).abs(),
            (o - H).abs()
        ),
    )
}

fn mixture() -> Outcome {
    let model = SequenceModel::mixture(vec![
        (0.5, skewed()),
        (0.5, SequenceModel::iid_from_probs(&[0.5, 0.5]).unwrap()),
    ])
    .unwrap();
    let s = model.generate(400, &Budgets::default()).unwrap();
    let (u, o) = entropy_proxies(&s, 400, 0.25).unwrap();
    let pass = (u - H).abs() < 0.05 && (o - LN2).abs() < 0.05;
    outcome(
        pass,
        format!("underline {u:.6} (target {H:.6}), overline {o:.6} (target {LN2:.6})"),
    )
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn achievability() -> Outcome {
    let grid = [50, 100, 200];
    let b = Budgets::default();
    let conc = concentration_experiment(&skewed(), 0.2, &grid, &b)
        .unwrap()
        .errors();
    let dil = dilution_experiment(&skewed(), 0.45, &grid, &b)
        .unwrap()
        .errors();
    let ok = |e: &[f64]| strictly_decreasing(e) && *e.last().unwrap() < 0.2;
    outcome(
        ok(&conc) && ok(&dil),
        format!("concentration R=0.2 {conc:.4?}, dilution R=0.45 {dil:.4?}"),
    )
}

fn obstruction() -> Outcome {
    let grid = [100, 150, 200];
    let b = Budgets::default();
    let conc = concentration_experiment(&skewed(), 0.45, &grid, &b)
        .unwrap()
        .errors();
    let dil = dilution_experiment(&skewed(), 0.2, &grid, &b)
        .unwrap()
        .errors();
    let pass = conc.iter().chain(&dil).all(|&e| e >= 0.5);
    outcome(
        pass,
        format!("concentration R=0.45 {conc:.4?}, dilution R=0.2 {dil:.4?}"),
    )
}

fn suites(names: &[&str], instances: Option<usize>) -> Outcome {
    let config = SuiteConfig {
        seed: 7,
        instances,
        max_dim: 8,
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for name in names {
        let r = run_suite(name, &config).unwrap();
        pass &= r.passed();
        parts.push(format!(
            "{name}: {} inst, {} viol, worst slack {:.2e}",
            r.instances, r.violations, r.worst_slack
        ));
    }
    outcome(pass, parts.join("; "))
}

fn lemma_suites() -> Outcome {
    suites(
        &[
            "np",
            "bdm",
            "bd",
            "continuity",
            "product",
            "projection",
            "traceless",
        ],
        Some(1000),
    )
}

fn kh() -> Outcome {
    suites(&["kh"], Some(500))
}

fn oracle_gap() -> Outcome {
    let r = run_suite("greedy-vs-brute", &SuiteConfig::default()).unwrap();
    let histogram: Vec<String> = r
        .gap_histogram
        .as_ref()
        .unwrap()
        .iter()
        .map(|b| format!("{}: {}", b.label, b.count))
        .collect();
    outcome(
        r.passed(),
        format!(
            "{} instances, {} violations, gap histogram [{}], max gap {:.4}",
            r.instances,
            r.violations,
            histogram.join(", "),
            r.max_gap.unwrap()
        ),
    )
}

fn transfer() -> Outcome {
    suites(&["transfer"], Some(500))
}

fn locc(args: &[&str]) -> (Vec<u8>, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_locc"))
        .args(args)
        .output()
        .expect("locc runs");
    (out.stdout, out.status.code().unwrap_or(-1))
}

fn determinism() -> Outcome {
    let runs: [&[&str]; 3] = [
        &["verify", "all", "--seed", "7", "--format", "json"],
        &[
            "concentrate",
            "iid:0.9,0.1",
            "--rate",
            "0.2",
            "--n",
            "50,100,200",
            "--format",
            "json",
        ],
        &[
            "rates",
            "mix:0.5*iid:0.9,0.1+0.5*iid:0.5,0.5",
            "--n",
            "100,400",
            "--eps",
            "0.1,0.25",
        ],
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for args in runs {
        let (a, code_a) = locc(args);
        let (b, code_b) = locc(args);
        let same = a == b && !a.is_empty() && code_a == 0 && code_b == 0;
        pass &= same;
        parts.push(format!(
            "`{}` {} bytes {}",
            args[0],
            a.len(),
            if same { "identical" } else { "DIFFER" }
        ));
    }
    outcome(pass, parts.join("; "))
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 AEP convergence", aep, Duration::from_secs(5)),
        (
            "2 mixed-source rate splitting",
            mixture,
            Duration::from_secs(10),
        ),
        ("3 achievability", achievability, Duration::from_secs(30)),
        ("4 obstruction", obstruction, Duration::from_secs(60)),
        ("5 lemma suites", lemma_suites, Duration::from_secs(60)),
        ("6 pushforward majorization", kh, Duration::from_secs(60)),
        (
            "7 greedy vs exhaustive",
            oracle_gap,
            Duration::from_secs(60),
        ),
        ("8 transfer matrices", transfer, Duration::from_secs(60)),
        ("9 determinism", determinism, Duration::from_secs(120)),
    ];
    let mut failed = 0;
    for (name, check, limit) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let pass = result.pass && elapsed < limit;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {name} ({:.2}s, limit {}s): {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs(),
            result.detail
        );
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
