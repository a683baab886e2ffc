//! Named randomized suites over the operator inequalities, the pushforward lemma, transfer
//! matrices and the greedy map synthesis.
//!
//! Instance `i` of suite `s` draws from `instance_rng(seed, s, i)`, so a report depends only on
//! `(seed, instances)` and not on thread scheduling.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::hermitian::random::{self, instance_rng};
use crate::hermitian::verify::{self, Check, Report};
use crate::hermitian::{HermitianOperator, TPMap};
use crate::majorize::{self, DeterministicMap};
use crate::randgen;
use crate::spectra::{Budgets, Spectrum};

/// Suites in the order `all` runs them.
pub const SUITE_NAMES: &[&str] = &[
    "np",
    "bdm",
    "bd",
    "continuity",
    "product",
    "monotonicity",
    "kh",
    "transfer",
    "greedy-vs-brute",
    "projection",
    "split",
    "traceless",
    "unital",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Overrides every suite's default instance count.
    pub instances: Option<usize>,
    /// Largest operator dimension drawn.
    pub max_dim: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            instances: None,
            max_dim: 8,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub index: usize,
    pub instance: Value,
    pub failed: Vec<Check>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapBin {
    pub label: &'static str,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub seed: u64,
    pub instances: usize,
    pub checks: usize,
    pub violations: usize,
    pub worst_slack: f64,
    pub violating_instances: Vec<Violation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_histogram: Option<Vec<GapBin>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_gap: Option<f64>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

type Outcome = (Report, Value);

fn dim(rng: &mut ChaCha8Rng, max_dim: usize) -> usize {
    rng.random_range(1..=max_dim)
}

fn nested(a: &HermitianOperator) -> Value {
    serde_json::to_value(a).unwrap_or(Value::Null)
}

fn random_map(d: usize, rng: &mut ChaCha8Rng) -> TPMap {
    match rng.random_range(0..3) {
        0 => {
            let rank = rng.random_range(1..=3);
            random::cptp(d, rank, rng)
        }
        1 => random::stochastic(d, rng),
        _ => random::transpose_mix(rng),
    }
}

fn state_pair(d: usize, rng: &mut ChaCha8Rng) -> (HermitianOperator, HermitianOperator) {
    let rho = random::density(d, rng);
    let sigma = if rng.random::<f64>() < 0.3 {
        HermitianOperator::identity(d)
    } else {
        random::density(d, rng)
    };
    (rho, sigma)
}

fn np(rng: &mut ChaCha8Rng, max_dim: usize) -> Result<Outcome> {
    let a = random::hermitian(dim(rng, max_dim), rng);
    let report = verify::verify_lemma_np(&a, 1, rng);
    Ok((report, json!({ "A": nested(&a) })))
}

fn bdm(rng: &mut ChaCha8Rng, max_dim: usize) -> Result<Outcome> {
    let d = dim(rng, max_dim);
    let a = random::hermitian(d, rng);
    let f = random_map(d, rng);
    Ok((
        verify::verify_lemma_bdm(&f, &a)?,
        json!({ "A": nested(&a), "F": f }),
    ))
}

fn bd(rng: &mut ChaCha8Rng, max_dim: usize) -> Result<Outcome> {
    let (rho, sigma) = state_pair(dim(rng, max_dim), rng);
    let n = rng.random_range(1..=4);
    let a = rng.random_range(-2.0..=2.0);
    let gamma = if rng.random::<bool>() { 0.1 } else { 0.5 };
    let report = verify::verify_bd_sandwich(&rho, &sigma, n, a, gamma)?;
    let inst =
        json!({ "rho": nested(&rho), "sigma": nested(&sigma), "n": n, "a": a, "gamma": gamma });
    Ok((report, inst))
}

fn continuity(rng: &mut ChaCha8Rng, max_dim: usize) -> Result<Outcome> {
    let (rho, sigma) = state_pair(dim(rng, max_dim), rng);
    let rho_prime = random::density(rho.dimension(), rng);
    let n = rng.random_range(1..=4);
    let a = rng.random_range(-2.0..=2.0);
    let report = verify::verify_continuity(&rho, &rho_prime, &sigma, n, a)?;
    let inst = json!({
        "rho": nested(&rho), "rho_prime": nested(&rho_prime), "sigma": nested(&sigma), "n": n, "a": a
    });
    Ok((report, inst))
}

fn product(rng: &mut ChaCha8Rng, _max_dim: usize) -> Result<Outcome> {
    let pa = random::spectrum(12, rng);
    let sb = random::spectrum(12, rng);
    let n = rng.random_range(1..=4);
    let a = rng.random_range(0.0..=3.0);
    let report = verify::verify_product_tails(&pa, &sb, n, a)?;
    Ok((report, json!({ "pA": pa, "sB": sb, "n": n, "a": a })))
}

fn monotonicity(rng: &mut ChaCha8Rng, max_dim: usize) -> Result<Outcome> {
    let d = dim(rng, max_dim);
    let (rho, sigma) = state_pair(d, rng);
    let f = random_map(d, rng);
    let n = rng.random_range(1..=4);
    let a = rng.random_range(-2.0..=2.0);
    let report = verify::verify_tail_monotonicity(&rho, &sigma, &f, n, a)?;
    let inst = json!({ "rho": nested(&rho), "sigma": nested(&sigma), "F": f, "n": n, "a": a });
    Ok((report, inst))
}

/// Unital maps fix `sigma = I`, so `Tr(F(rho) - e^{na} I)_+ <= Tr(rho - e^{na} I)_+`.
fn unital(rng: &mut ChaCha8Rng, max_dim: usize) -> Result<Outcome> {
    let d = dim(rng, max_dim);
    let rho = if rng.random::<bool>() {
        random::diagonal_density(d, rng)
    } else {
        random::density(d, rng)
    };
    let f = match rng.random_range(0..3) {
        0 => {
            let terms = rng.random_range(1..=4);
            random::unital_channel(d, terms, rng)
        }
        1 => {
            let terms = rng.random_range(1..=4);
            TPMap::Stochastic {
                matrix: random::doubly_stochastic(d, terms, rng),
            }
        }
        _ => random::transpose_mix(rng),
    };
    let n = rng.random_range(1..=4);
    let a = rng.random_range(-3.0..=0.5);
    let mut report =
        verify::verify_tail_monotonicity(&rho, &HermitianOperator::identity(d), &f, n, a)?;
    report
        .checks
        .push(Check::eq("F(I) = I", f.is_unital(d) as u8 as f64, 1.0, 0.0));
    Ok((
        report,
        json!({ "rho": nested(&rho), "F": f, "n": n, "a": a }),
    ))
}

fn projection(rng: &mut ChaCha8Rng, max_dim: usize) -> Result<Outcome> {
    let d = dim(rng, max_dim);
    let a = random::hermitian(d, rng);
    let b = random::hermitian(d, rng);
    let report = verify::verify_projection_dominance(&a, &b)?;
    Ok((report, json!({ "A": nested(&a), "B": nested(&b) })))
}

fn split(rng: &mut ChaCha8Rng, max_dim: usize) -> Result<Outcome> {
    let d = dim(rng, max_dim);
    let a = random::hermitian(d, rng);
    let b = random::hermitian(d, rng);
    let report = verify::verify_positive_part_split(&a, &b)?;
    Ok((report, json!({ "A": nested(&a), "B": nested(&b) })))
}

fn traceless(rng: &mut ChaCha8Rng, max_dim: usize) -> Result<Outcome> {
    let a = random::traceless_hermitian(dim(rng, max_dim), rng);
    let report = verify::verify_traceless_norm(&a, 1, rng);
    Ok((report, json!({ "A": nested(&a) })))
}

fn kh(rng: &mut ChaCha8Rng, _max_dim: usize) -> Result<Outcome> {
    let x = rng.random_range(1..=64);
    let mut p = random::probability_vector(x, rng);
    if x > 1 && rng.random::<f64>() < 0.3 {
        let v = p[0];
        let k = rng.random_range(1..x);
        p[0] = 0.5 * (v + p[k]);
        p[k] = p[0];
    }
    let y = rng.random_range(1..=x);
    let targets: Vec<usize> = (0..x).map(|_| rng.random_range(0..y)).collect();
    let phi = DeterministicMap::new(targets, y)?;

    let source = Spectrum::from_probabilities(&p)?;
    let image = Spectrum::from_probabilities(&majorize::pushforward_vec(&p, &phi)?)?;
    let cert = majorize::kh_certificate_vec(&p, &phi)?;
    let mut report = Report::default();
    let lemma = majorize::majorization_violation(&source, &image);
    report.checks.push(Check::eq(
        "p majorized by phi_* p",
        lemma.map_or(0.0, |(_, lhs, rhs)| lhs - rhs),
        0.0,
        majorize::MAJORIZATION_TOL,
    ));
    report.checks.push(Check::eq(
        "certificate residual",
        cert.residual(&p),
        0.0,
        1e-10,
    ));
    Ok((report, json!({ "p": p, "phi": phi })))
}

fn transfer(rng: &mut ChaCha8Rng, _max_dim: usize) -> Result<Outcome> {
    let m = rng.random_range(1..=32);
    let q = random::probability_vector(m, rng);
    let terms = rng.random_range(1..=4);
    let mix = random::doubly_stochastic(m, terms, rng);
    let p: Vec<f64> = mix
        .iter()
        .map(|row| row.iter().zip(&q).map(|(d, x)| d * x).sum())
        .collect();
    let d = majorize::transfer_matrix_vec(&p, &q)?;
    let sorted = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    };
    let out = d.apply(&sorted(&q));
    let err = out
        .iter()
        .zip(sorted(&p))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let mut report = Report::default();
    report
        .checks
        .push(Check::eq("bistochastic", d.deviation(), 0.0, 1e-10));
    report.checks.push(Check::eq("D q = p", err, 0.0, 1e-8));
    Ok((report, json!({ "p": p, "q": q })))
}

/// Greedy against exhaustive search on one random pair with the given expanded sizes.
/// Returns the report and the gap `greedy - optimum`.
fn greedy_vs_brute(rng: &mut ChaCha8Rng, x: usize, y: usize) -> Result<(Report, Value, f64)> {
    let p = Spectrum::from_probabilities(&random::probability_vector(x, rng))?;
    let q = Spectrum::from_probabilities(&random::probability_vector(y, rng))?;
    let greedy = randgen::synthesize_map(&p, &q)?;
    let optimum = randgen::brute_force_optimal(&p, &q, &Budgets::default())?;
    let px = p.expand(64)?;
    let qy = q.expand(64)?;
    let (_, reference) = randgen::synthesize_map_expanded(&px, &qy);

    let gap = greedy.achieved_distance - optimum.achieved_distance;
    let mut report = Report::default();
    report.checks.push(Check::le(
        "optimum <= greedy",
        optimum.achieved_distance,
        greedy.achieved_distance,
    ));
    report.checks.push(Check::eq(
        "compressed = expanded greedy",
        greedy.achieved_distance,
        reference,
        1e-9,
    ));
    let recomputed: f64 = greedy
        .bins
        .iter()
        .map(|b| b.count * (b.target - b.assigned).abs())
        .sum();
    report.checks.push(Check::eq(
        "distance recomputed",
        greedy.achieved_distance,
        recomputed,
        1e-12,
    ));
    let lemma = majorize::majorization_violation(&p, &greedy.pushforward);
    report.checks.push(Check::eq(
        "p majorized by pushforward",
        lemma.map_or(0.0, |(_, lhs, rhs)| lhs - rhs),
        0.0,
        majorize::MAJORIZATION_TOL,
    ));
    Ok((report, json!({ "p": p, "q": q, "gap": gap }), gap))
}

const GAP_LABELS: [&str; 6] = [
    "0",
    "(0,0.01]",
    "(0.01,0.05]",
    "(0.05,0.1]",
    "(0.1,0.2]",
    ">0.2",
];

fn gap_bucket(gap: f64) -> usize {
    match gap {
        g if g <= 1e-12 => 0,
        g if g <= 0.01 => 1,
        g if g <= 0.05 => 2,
        g if g <= 0.1 => 3,
        g if g <= 0.2 => 4,
        _ => 5,
    }
}

fn default_instances(name: &str) -> usize {
    match name {
        "product" | "kh" | "transfer" | "projection" | "split" | "unital" => 500,
        // 18 size cells (|X| <= 6, |Y| <= 3) with 30 draws each.
        "greedy-vs-brute" => 540,
        _ => 1000,
    }
}

fn assemble(
    name: &str,
    config: &SuiteConfig,
    outcomes: Vec<Result<Outcome>>,
) -> Result<SuiteReport> {
    let instances = outcomes.len();
    let mut checks = 0;
    let mut worst = f64::INFINITY;
    let mut violating = Vec::new();
    for (index, outcome) in outcomes.into_iter().enumerate() {
        let (report, instance) = outcome?;
        checks += report.checks.len();
        worst = worst.min(report.worst_slack());
        if !report.holds() {
            let failed = report.violations().cloned().collect();
            violating.push(Violation {
                index,
                instance,
                failed,
            });
        }
    }
    Ok(SuiteReport {
        name: name.to_string(),
        seed: config.seed,
        instances,
        checks,
        violations: violating.len(),
        worst_slack: worst,
        violating_instances: violating,
        gap_histogram: None,
        max_gap: None,
    })
}

pub fn run_suite(name: &str, config: &SuiteConfig) -> Result<SuiteReport> {
    let count = config.instances.unwrap_or_else(|| default_instances(name));
    let max_dim = config.max_dim.max(1);
    if name == "greedy-vs-brute" {
        let cells: Vec<(usize, usize)> =
            (1..=6).flat_map(|x| (1..=3).map(move |y| (x, y))).collect();
        let results: Vec<Result<(Report, Value, f64)>> = (0..count)
            .into_par_iter()
            .map(|i| {
                let (x, y) = cells[i % cells.len()];
                let mut rng = instance_rng(config.seed, name, i as u64);
                greedy_vs_brute(&mut rng, x, y)
            })
            .collect();
        let mut histogram = vec![0usize; GAP_LABELS.len()];
        let mut max_gap = 0.0f64;
        let mut outcomes = Vec::with_capacity(results.len());
        for r in results {
            let (report, inst, gap) = r?;
            histogram[gap_bucket(gap)] += 1;
            max_gap = max_gap.max(gap);
            outcomes.push(Ok((report, inst)));
        }
        let mut suite = assemble(name, config, outcomes)?;
        suite.gap_histogram = Some(
            GAP_LABELS
                .iter()
                .zip(histogram)
                .map(|(&label, count)| GapBin { label, count })
                .collect(),
        );
        suite.max_gap = Some(max_gap);
        return Ok(suite);
    }

    let instance: fn(&mut ChaCha8Rng, usize) -> Result<Outcome> = match name {
        "np" => np,
        "bdm" => bdm,
        "bd" => bd,
        "continuity" => continuity,
        "product" => product,
        "monotonicity" => monotonicity,
        "kh" => kh,
        "transfer" => transfer,
        "projection" => projection,
        "split" => split,
        "traceless" => traceless,
        "unital" => unital,
        other => return Err(Error::InvalidArgument(format!("unknown suite `{other}`"))),
    };
    let outcomes = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = instance_rng(config.seed, name, i as u64);
            instance(&mut rng, max_dim)
        })
        .collect();
    assemble(name, config, outcomes)
}

/// Resolve `all` and validate names before running anything.
pub fn resolve_names(names: &[String]) -> Result<Vec<&'static str>> {
    let mut out = Vec::new();
    for name in names {
        if name == "all" {
            out.extend_from_slice(SUITE_NAMES);
            continue;
        }
        let known = SUITE_NAMES
            .iter()
            .find(|&&s| s == name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite `{name}`")))?;
        out.push(*known);
    }
    out.dedup();
    Ok(out)
}

pub fn run_suites(names: &[&str], config: &SuiteConfig) -> Result<Vec<SuiteReport>> {
    names.iter().map(|name| run_suite(name, config)).collect()
}
