//! Pure-state conversion through an intermediate state: synthesize a map onto the target's
//! Schmidt basis, check Nielsen's criterion for the intermediate spectrum and score it against
//! the target by fidelity.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::majorize::{majorizes, transfer_matrix, BistochasticMatrix};
use crate::randgen::synthesize_map;
use crate::spectra::{maxent_rank, maxent_spectrum, Budgets, SequenceModel, Spectrum};

/// Largest expanded length for which a transfer-matrix certificate is attached.
pub const CERTIFICATE_DIM: f64 = 64.0;

#[derive(Debug, Clone, Serialize)]
pub struct ConversionReport {
    pub n: u32,
    pub source_spectrum: Spectrum,
    pub target_spectrum: Spectrum,
    pub intermediate_spectrum: Spectrum,
    pub nielsen_ok: bool,
    pub fidelity: f64,
    pub trace_distance_lower: f64,
    pub trace_distance_upper: f64,
    /// Variational distance between the intermediate and target distributions.
    pub map_distance: f64,
    /// `D` with `D q~ = p` (descending order), for small instances that pass Nielsen's test.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<BistochasticMatrix>,
}

impl ConversionReport {
    pub fn error(&self) -> f64 {
        self.trace_distance_upper
    }
}

/// Convert `p` into an approximation of `q` and report the Fuchs–van de Graaf interval
/// `[1 - F, sqrt(1 - F^2)]`.
pub fn direct_convert(p: &Spectrum, q: &Spectrum, n: u32) -> Result<ConversionReport> {
    let synth = synthesize_map(p, q)?;
    let intermediate = synth.pushforward.clone();
    let nielsen_ok = majorizes(p, &intermediate);

    // 1 - F written as half the squared Hellinger distance, so equal inputs give exactly 0.
    let one_minus_f: f64 = 0.5
        * synth
            .bins
            .iter()
            .map(|b| b.count * (b.target.sqrt() - b.assigned.sqrt()).powi(2))
            .sum::<f64>();
    let one_minus_f = one_minus_f.clamp(0.0, 1.0);
    let fidelity = 1.0 - one_minus_f;
    let upper = (one_minus_f * (1.0 + fidelity)).sqrt();

    let small = p.total_dim().max(intermediate.total_dim()) <= CERTIFICATE_DIM;
    let certificate = if nielsen_ok && small {
        transfer_matrix(p, &intermediate, CERTIFICATE_DIM as u64).ok()
    } else {
        None
    };

    Ok(ConversionReport {
        n,
        source_spectrum: p.clone(),
        target_spectrum: q.clone(),
        intermediate_spectrum: intermediate,
        nielsen_ok,
        fidelity,
        trace_distance_lower: one_minus_f,
        trace_distance_upper: upper,
        map_distance: synth.achieved_distance,
        certificate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Concentration,
    Dilution,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub n: u32,
    pub error: f64,
    pub fidelity: f64,
    pub nielsen_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateVerdict {
    pub task: Task,
    /// Rate in nats per copy.
    pub rate: f64,
    pub series: Vec<SeriesPoint>,
}

impl RateVerdict {
    pub fn errors(&self) -> Vec<f64> {
        self.series.iter().map(|pt| pt.error).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,error,fidelity,nielsen_ok\n");
        for pt in &self.series {
            out.push_str(&format!(
                "{},{},{},{}\n",
                pt.n, pt.error, pt.fidelity, pt.nielsen_ok
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdict serialization is infallible")
    }
}

fn run_series<F>(task: Task, rate: f64, n_grid: &[u32], pair: F) -> Result<RateVerdict>
where
    F: Fn(u32) -> Result<(Spectrum, Spectrum)> + Sync,
{
    let series = n_grid
        .par_iter()
        .map(|&n| {
            let (p, q) = pair(n)?;
            let report = direct_convert(&p, &q, n)?;
            Ok(SeriesPoint {
                n,
                error: report.error(),
                fidelity: report.fidelity,
                nielsen_ok: report.nielsen_ok,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RateVerdict { task, rate, series })
}

/// `source^n` into a maximally entangled state of rank `ceil(e^{nR})`.
pub fn concentration_experiment(
    source: &SequenceModel,
    rate: f64,
    n_grid: &[u32],
    budgets: &Budgets,
) -> Result<RateVerdict> {
    run_series(Task::Concentration, rate, n_grid, |n| {
        Ok((
            source.generate(n, budgets)?,
            maxent_spectrum(maxent_rank(rate, n))?,
        ))
    })
}

/// A maximally entangled state of rank `ceil(e^{nR})` into `target^n`.
pub fn dilution_experiment(
    target: &SequenceModel,
    rate: f64,
    n_grid: &[u32],
    budgets: &Budgets,
) -> Result<RateVerdict> {
    run_series(Task::Dilution, rate, n_grid, |n| {
        Ok((
            maxent_spectrum(maxent_rank(rate, n))?,
            target.generate(n, budgets)?,
        ))
    })
}
