//! Finite-dimensional checks of the positive-part inequalities.
//!
//! Each check records `lhs`, `rhs` and `slack = rhs - lhs` for an inequality `lhs <= rhs`
//! (or `-|lhs - rhs|` for an identity) and holds when the slack is at least `-TOL`.

use rand::Rng;
use serde::Serialize;

use super::{apply_tp, check_dims, jordan, random, trace_plus, HermitianOperator, TPMap};
use crate::error::Result;
use crate::infospec::{tail_C, tail_D};
use crate::spectra::Spectrum;

/// Absolute tolerance for every inequality.
pub const TOL: f64 = 1e-9;

/// Expanded cross-check of product tails runs up to this many pairs.
pub const PRODUCT_CROSS_CHECK_LIMIT: f64 = 16384.0;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
    /// The offending auxiliary object (e.g. a sampled contraction) when the check fails.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
}

impl Check {
    /// `lhs <= rhs` within `TOL`.
    pub fn le(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        Self {
            name: name.into(),
            lhs,
            rhs,
            slack,
            holds: slack >= -TOL,
            witness: None,
        }
    }

    /// `lhs == rhs` within `tol`.
    pub fn eq(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let slack = -(lhs - rhs).abs();
        Self {
            name: name.into(),
            lhs,
            rhs,
            slack,
            holds: -slack <= tol,
            witness: None,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn holds(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn worst_slack(&self) -> f64 {
        self.checks
            .iter()
            .map(|c| c.slack)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn violations(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.holds)
    }

    fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }
}

/// `Tr A T <= Tr A_+` for `trials` random contractions, with equality at `T = {A > 0}`.
pub fn verify_lemma_np<R: Rng + ?Sized>(
    a: &HermitianOperator,
    trials: usize,
    rng: &mut R,
) -> Report {
    let plus = trace_plus(a);
    let mut report = Report::default();
    let j = jordan(a);
    report.push(Check::eq(
        "attained at {A>0}",
        a.trace_product(&j.proj_pos),
        plus,
        1e-10,
    ));
    for _ in 0..trials {
        let t = random::contraction(a.dimension(), rng);
        let mut check = Check::le("Tr AT <= Tr A+", a.trace_product(t.entries()), plus);
        if !check.holds {
            check.witness = serde_json::to_value(t.operator()).ok();
        }
        report.push(check);
    }
    report
}

/// `Tr F(A)_+ <= Tr A_+`, plus trace preservation.
pub fn verify_lemma_bdm(f: &TPMap, a: &HermitianOperator) -> Result<Report> {
    let image = apply_tp(f, a)?;
    let mut report = Report::default();
    report.push(Check::le(
        "Tr F(A)+ <= Tr A+",
        trace_plus(&image),
        trace_plus(a),
    ));
    report.push(Check::eq("Tr F(A) = Tr A", image.trace(), a.trace(), TOL));
    Ok(report)
}

/// `tail_C(a) <= tail_D(a)` and `tail_C(a) >= tail_D(a + gamma) - e^{-n gamma}`.
pub fn verify_bd_sandwich(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    n: u32,
    a: f64,
    gamma: f64,
) -> Result<Report> {
    let c = tail_C(rho, sigma, n, a)?;
    let d = tail_D(rho, sigma, n, a)?;
    let d_shifted = tail_D(rho, sigma, n, a + gamma)?;
    let mut report = Report::default();
    report.push(Check::le("tail_C(a) <= tail_D(a)", c, d));
    report.push(Check::le(
        "tail_D(a+gamma) - exp(-n gamma) <= tail_C(a)",
        d_shifted - (-f64::from(n) * gamma).exp(),
        c,
    ));
    Ok(report)
}

/// `Tr(rho - e^{na} sigma)_+ <= Tr(rho' - e^{na} sigma)_+ + ||rho - rho'||_1 / 2`, both ways.
pub fn verify_continuity(
    rho: &HermitianOperator,
    rho_prime: &HermitianOperator,
    sigma: &HermitianOperator,
    n: u32,
    a: f64,
) -> Result<Report> {
    check_dims(rho, rho_prime)?;
    let half_dist = 0.5 * rho.add_scaled(-1.0, rho_prime)?.trace_norm();
    let c = tail_C(rho, sigma, n, a)?;
    let c_prime = tail_C(rho_prime, sigma, n, a)?;
    let mut report = Report::default();
    report.push(Check::le(
        "tail_C(rho) <= tail_C(rho') + td",
        c,
        c_prime + half_dist,
    ));
    report.push(Check::le(
        "tail_C(rho') <= tail_C(rho) + td",
        c_prime,
        c + half_dist,
    ));
    Ok(report)
}

fn pair_tail_compressed(pa: &Spectrum, sb: &Spectrum, n: u32, a: f64) -> f64 {
    let n = f64::from(n);
    let mut total = 0.0;
    for x in pa.atoms() {
        for y in sb.atoms() {
            if -(x.ln_prob() + y.ln_prob()) / n <= a {
                total += x.mass() * y.mass();
            }
        }
    }
    total
}

fn pair_tail_expanded(pa: &[f64], sb: &[f64], n: u32, a: f64) -> f64 {
    let n = f64::from(n);
    let mut total = 0.0;
    for &x in pa {
        for &y in sb {
            if -(x.ln() + y.ln()) / n <= a {
                total += x * y;
            }
        }
    }
    total
}

/// Mass of product eigenvalues with rate at most `a` never exceeds the matching mass of the
/// first factor alone.
pub fn verify_product_tails(pa: &Spectrum, sb: &Spectrum, n: u32, a: f64) -> Result<Report> {
    let pairs = pair_tail_compressed(pa, sb, n, a);
    let singles: f64 = pa
        .atoms()
        .iter()
        .filter(|x| x.rate(n) <= a)
        .map(|x| x.mass())
        .sum();
    let mut report = Report::default();
    report.push(Check::le("pair tail <= single tail", pairs, singles));
    if pa.total_dim() * sb.total_dim() <= PRODUCT_CROSS_CHECK_LIMIT {
        let limit = PRODUCT_CROSS_CHECK_LIMIT as u64;
        let expanded = pair_tail_expanded(&pa.expand(limit)?, &sb.expand(limit)?, n, a);
        report.push(Check::eq("compressed = expanded", pairs, expanded, 1e-12));
    }
    Ok(report)
}

/// `Tr(F(rho) - e^{na} F(sigma))_+ <= Tr(rho - e^{na} sigma)_+`.
pub fn verify_tail_monotonicity(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    f: &TPMap,
    n: u32,
    a: f64,
) -> Result<Report> {
    let before = tail_C(rho, sigma, n, a)?;
    let after = tail_C(&apply_tp(f, rho)?, &apply_tp(f, sigma)?, n, a)?;
    let mut report = Report::default();
    report.push(Check::le(
        "tail_C(F rho, F sigma) <= tail_C(rho, sigma)",
        after,
        before,
    ));
    Ok(report)
}

/// `Tr A {A - B > 0} >= Tr B {A - B > 0}`.
pub fn verify_projection_dominance(a: &HermitianOperator, b: &HermitianOperator) -> Result<Report> {
    let proj = a.add_scaled(-1.0, b)?.positive_projection();
    let mut report = Report::default();
    report.push(Check::le(
        "Tr B{A-B>0} <= Tr A{A-B>0}",
        b.trace_product(&proj),
        a.trace_product(&proj),
    ));
    Ok(report)
}

/// `Tr (A - B)_+ = Tr (A - B){A - B > 0} = Tr A{A - B > 0} - Tr B{A - B > 0}`.
pub fn verify_positive_part_split(a: &HermitianOperator, b: &HermitianOperator) -> Result<Report> {
    let diff = a.add_scaled(-1.0, b)?;
    let proj = diff.positive_projection();
    let on_proj = diff.trace_product(&proj);
    let split = a.trace_product(&proj) - b.trace_product(&proj);
    let mut report = Report::default();
    report.push(Check::eq(
        "Tr(A-B)+ = Tr(A-B)P",
        trace_plus(&diff),
        on_proj,
        TOL,
    ));
    report.push(Check::eq("Tr(A-B)P = Tr AP - Tr BP", on_proj, split, TOL));
    Ok(report)
}

/// For traceless `A`: `Tr|A| = 2 Tr A_+`, and sampled contractions never beat `{A > 0}`.
pub fn verify_traceless_norm<R: Rng + ?Sized>(
    a: &HermitianOperator,
    trials: usize,
    rng: &mut R,
) -> Report {
    let mut report = Report::default();
    report.push(Check::eq(
        "Tr|A| = 2 Tr A+",
        a.trace_norm(),
        2.0 * trace_plus(a),
        1e-10,
    ));
    report.extend(verify_lemma_np(a, trials, rng));
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(v: &[f64]) -> HermitianOperator {
        HermitianOperator::from_real_diagonal(v)
    }

    #[test]
    fn np_on_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = diag(&[1.0, -1.0]);
        let half = HermitianOperator::identity(2).scale(0.5);
        assert_eq!(a.trace_product(half.entries()), 0.0);
        let report = verify_lemma_np(&a, 50, &mut rng);
        assert!(report.holds());
        assert_eq!(report.checks.len(), 51);
    }

    #[test]
    fn bdm_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random::traceless_hermitian(4, &mut rng);
        let id = verify_lemma_bdm(&TPMap::identity(4), &a).unwrap();
        assert!(id.holds());
        assert!(id.checks[0].slack.abs() < 1e-12);
        let dep = verify_lemma_bdm(&TPMap::depolarizing(4), &a).unwrap();
        assert!(dep.holds());
        assert!(dep.checks[0].lhs.abs() < 1e-10);
    }

    #[test]
    fn bd_sandwich_examples() {
        let rho = diag(&[0.6, 0.4]);
        let r = verify_bd_sandwich(&rho, &rho, 3, 0.0, 0.1).unwrap();
        assert!(r.holds());
        assert_eq!(r.checks[0].lhs, 0.0);

        // rho = (0.7, 0.3), sigma = I, n = 1, a = -0.5: e^a = 0.6065, so only 0.7 survives.
        let rho = diag(&[0.7, 0.3]);
        let r = verify_bd_sandwich(&rho, &HermitianOperator::identity(2), 1, -0.5, 0.2).unwrap();
        assert!(r.holds());
        assert!((r.checks[0].lhs - (0.7 - (-0.5f64).exp())).abs() < 1e-12);
        assert!((r.checks[0].rhs - 0.7).abs() < 1e-12);
        // b = -0.3: e^b = 0.7408 > 0.7, the projection is empty.
        assert!((r.checks[1].lhs + (-0.2f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn continuity_equality_case() {
        let r = verify_continuity(
            &diag(&[1.0, 0.0]),
            &diag(&[0.5, 0.5]),
            &diag(&[0.5, 0.5]),
            1,
            0.0,
        )
        .unwrap();
        assert!(r.holds());
        assert!((r.checks[0].lhs - 0.5).abs() < 1e-12);
        assert!((r.checks[0].rhs - 0.5).abs() < 1e-12);
    }

    #[test]
    fn product_tail_examples() {
        let pa = Spectrum::from_probabilities(&[0.9, 0.1]).unwrap();
        let sb = Spectrum::from_atoms(&[(0.5, 2.0)]).unwrap();
        let r = verify_product_tails(&pa, &sb, 1, 0.2).unwrap();
        assert!(r.holds());
        assert_eq!(r.checks[0].lhs, 0.0);
        assert!((r.checks[0].rhs - 0.9).abs() < 1e-15);

        let r = verify_product_tails(&pa, &Spectrum::point(), 1, 0.2).unwrap();
        assert!(r.checks[0].slack.abs() < 1e-15);
    }

    #[test]
    fn monotonicity_examples() {
        let rho = diag(&[0.8, 0.2]);
        let sigma = diag(&[0.3, 0.7]);
        let id = verify_tail_monotonicity(&rho, &sigma, &TPMap::identity(2), 2, 0.1).unwrap();
        assert!(id.holds() && id.checks[0].slack.abs() < 1e-12);
        let dep = verify_tail_monotonicity(&rho, &sigma, &TPMap::depolarizing(2), 1, 0.0).unwrap();
        assert!(dep.holds());
        assert!(dep.checks[0].lhs.abs() < 1e-12);
    }

    #[test]
    fn identities_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = random::hermitian(5, &mut rng);
            let b = random::hermitian(5, &mut rng);
            assert!(verify_projection_dominance(&a, &b).unwrap().holds());
            assert!(verify_positive_part_split(&a, &b).unwrap().holds());
            let t = random::traceless_hermitian(5, &mut rng);
            assert!(verify_traceless_norm(&t, 10, &mut rng).holds());
        }
    }
}
