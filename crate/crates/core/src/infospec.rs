//! Finite-`n` spectral tail functionals and entropy-rate proxies.
//!
//! For a spectrum with atoms `p` the self-information rate of an atom is `-(1/n) ln p`. The
//! distribution function `F_n(a)` is the mass of atoms whose rate is at most `a`, i.e.
//! `Tr rho {rho >= e^{-na} I}`. The inf-rate proxy is the `eps`-quantile of that distribution
//! and the sup-rate proxy the `(1 - eps)`-quantile, both read off the atom grid exactly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{check_dims, HermitianOperator};
use crate::spectra::{Budgets, SequenceModel, Spectrum};

/// Slack used when comparing accumulated masses against quantile levels.
const QUANTILE_TOL: f64 = 1e-12;

/// How atoms sitting exactly on the threshold are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Rate `<= a`, i.e. `Tr rho {rho >= e^{-na}}`.
    #[default]
    NonStrict,
    /// Rate `< a`, i.e. the strict projection `Tr rho {rho > e^{-na}}`.
    Strict,
}

/// `F_n(a)`: mass of atoms with self-information rate `<= a` (or `< a` when strict).
pub fn cdf_selfinfo(s: &Spectrum, n: u32, a: f64, boundary: Boundary) -> f64 {
    if a == f64::INFINITY {
        return 1.0;
    }
    let threshold = f64::from(n) * a;
    let mass: f64 = s
        .atoms()
        .iter()
        .take_while(|atom| match boundary {
            Boundary::NonStrict => -atom.ln_prob() <= threshold,
            Boundary::Strict => -atom.ln_prob() < threshold,
        })
        .map(|atom| atom.mass())
        .sum();
    mass.clamp(0.0, 1.0)
}

/// Finite-`n` proxies `(underline, overline)` of the inf/sup spectral entropy rates.
///
/// `overline = inf{a : F_n(a) >= 1 - eps}` and `underline = sup{a : F_n(a) <= eps}`, both
/// restricted to the atom grid. At `eps = 1` the underline proxy is the largest atom rate and
/// the overline proxy the smallest.
pub fn entropy_proxies(s: &Spectrum, n: u32, epsilon: f64) -> Result<(f64, f64)> {
    check_epsilon(epsilon)?;
    let mut underline = None;
    let mut overline = None;
    let mut cumulative = 0.0;
    for atom in s.atoms() {
        cumulative += atom.mass();
        let rate = atom.rate(n);
        if overline.is_none() && cumulative >= 1.0 - epsilon - QUANTILE_TOL {
            overline = Some(rate);
        }
        if underline.is_none() && cumulative > epsilon + QUANTILE_TOL {
            underline = Some(rate);
        }
        if underline.is_some() && overline.is_some() {
            break;
        }
    }
    let last = s.atoms().last().map_or(0.0, |a| a.rate(n));
    Ok((underline.unwrap_or(last), overline.unwrap_or(last)))
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if (0.0..=1.0).contains(&epsilon) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "epsilon {epsilon} outside [0, 1]"
        )))
    }
}

/// Sampled `a -> F_n(a)` for one `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCurve {
    pub n: u32,
    pub samples: Vec<(f64, f64)>,
}

impl TailCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("a,mass\n");
        for (a, m) in &self.samples {
            out.push_str(&format!("{a},{m}\n"));
        }
        out
    }
}

pub fn tail_curve(s: &Spectrum, n: u32, grid: &[f64], boundary: Boundary) -> TailCurve {
    TailCurve {
        n,
        samples: grid
            .iter()
            .map(|&a| (a, cdf_selfinfo(s, n, a, boundary)))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateQuery {
    pub epsilon: f64,
    pub n_grid: Vec<u32>,
}

impl RateQuery {
    pub fn new(epsilon: f64, n_grid: Vec<u32>) -> Result<Self> {
        check_epsilon(epsilon)?;
        if n_grid.is_empty() || n_grid[0] == 0 || n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "n grid must be nonempty, positive and strictly increasing".into(),
            ));
        }
        Ok(Self { epsilon, n_grid })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub n: u32,
    pub underline: f64,
    pub overline: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCurve {
    pub epsilon: f64,
    pub points: Vec<RatePoint>,
}

/// Evaluate [`entropy_proxies`] on every `n` of the grid. Grid points run in parallel; the
/// output keeps grid order.
pub fn rate_curve(
    model: &SequenceModel,
    query: &RateQuery,
    budgets: &Budgets,
) -> Result<RateCurve> {
    let points = query
        .n_grid
        .par_iter()
        .map(|&n| {
            let s = model.generate(n, budgets)?;
            let (underline, overline) = entropy_proxies(&s, n, query.epsilon)?;
            Ok(RatePoint {
                n,
                underline,
                overline,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RateCurve {
        epsilon: query.epsilon,
        points,
    })
}

/// Spectral decomposition of `rho - e^{na} sigma` shared by the two tail functionals.
fn shifted(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    n: u32,
    a: f64,
) -> Result<HermitianOperator> {
    check_dims(rho, sigma)?;
    rho.add_scaled(-(f64::from(n) * a).exp(), sigma)
}

/// `Tr rho {rho - e^{na} sigma > 0}`.
#[allow(non_snake_case)]
pub fn tail_D(rho: &HermitianOperator, sigma: &HermitianOperator, n: u32, a: f64) -> Result<f64> {
    let proj = shifted(rho, sigma, n, a)?.positive_projection();
    Ok(rho.trace_product(&proj))
}

/// `Tr (rho - e^{na} sigma)_+`.
#[allow(non_snake_case)]
pub fn tail_C(rho: &HermitianOperator, sigma: &HermitianOperator, n: u32, a: f64) -> Result<f64> {
    Ok(crate::hermitian::trace_plus(&shifted(rho, sigma, n, a)?))
}

/// `tail_D(rho, I, n, a)` for the diagonal `rho` of a spectrum, without building matrices:
/// the mass of atoms with `p > e^{na}`, i.e. rate strictly below `-a`.
pub fn tail_d_identity(s: &Spectrum, n: u32, a: f64) -> f64 {
    cdf_selfinfo(s, n, -a, Boundary::Strict)
}
