//! Positive-part calculus for Hermitian operators.
//!
//! For `A = sum_k a_k E_k` the positive part is `A_+ = sum_{a_k > 0} a_k E_k` and the negative
//! part `A_- = sum_{a_k <= 0} (-a_k) E_k`, with projections `{A > 0}` and `{A <= 0}`. Zero
//! eigenvalues, and eigenvalues within `POSITIVITY_CUTOFF * ||A||` of zero, belong to the
//! non-positive side.

pub mod random;
pub mod verify;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Relative eigenvalue cutoff (against the spectral norm) below which an eigenvalue is
/// treated as non-positive.
pub const POSITIVITY_CUTOFF: f64 = 1e-10;

const HERMITIAN_TOL: f64 = 1e-10;

/// Dense complex Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    entries: CMatrix,
}

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: DVector<f64>,
    pub vectors: CMatrix,
}

impl Eigen {
    /// Eigenvalues above the positivity cutoff.
    pub fn cutoff(&self) -> f64 {
        let norm = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        POSITIVITY_CUTOFF * norm
    }

    /// Projection onto the span of eigenvectors selected by `keep`.
    fn projection(&self, keep: impl Fn(f64) -> bool) -> CMatrix {
        let d = self.values.len();
        let mut out = CMatrix::zeros(d, d);
        for (k, &v) in self.values.iter().enumerate() {
            if keep(v) {
                let col = self.vectors.column(k);
                out += col * col.adjoint();
            }
        }
        out
    }

    fn weighted(&self, weight: impl Fn(f64) -> f64) -> CMatrix {
        let d = self.values.len();
        let mut out = CMatrix::zeros(d, d);
        for (k, &v) in self.values.iter().enumerate() {
            let w = weight(v);
            if w != 0.0 {
                let col = self.vectors.column(k);
                out += (col * col.adjoint()) * Complex64::new(w, 0.0);
            }
        }
        out
    }
}

impl HermitianOperator {
    /// Accept `entries` if it equals its adjoint within `1e-10 * max|entry|`; the stored
    /// matrix is the exact Hermitian part.
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::NotSquare(entries.nrows(), entries.ncols()));
        }
        if entries.nrows() == 0 {
            return Err(Error::EmptyDimension);
        }
        let scale = entries.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let deviation = (&entries - entries.adjoint())
            .iter()
            .fold(0.0f64, |m, z| m.max(z.norm()));
        if deviation > HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NotHermitian(deviation));
        }
        Ok(Self::from_hermitian_part(entries))
    }

    fn from_hermitian_part(entries: CMatrix) -> Self {
        let adj = entries.adjoint();
        Self {
            entries: (entries + adj) * Complex64::new(0.5, 0.0),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        Self {
            entries: CMatrix::from_fn(d, d, |i, j| {
                if i == j {
                    Complex64::new(diag[i], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
        }
    }

    pub fn identity(d: usize) -> Self {
        Self {
            entries: CMatrix::identity(d, d),
        }
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            entries: CMatrix::zeros(d, d),
        }
    }

    /// Real symmetric matrix from row-major values.
    pub fn from_real(d: usize, values: &[f64]) -> Result<Self> {
        if values.len() != d * d {
            return Err(Error::SizeMismatch {
                expected: d * d,
                found: values.len(),
            });
        }
        Self::new(CMatrix::from_fn(d, d, |i, j| {
            Complex64::new(values[i * d + j], 0.0)
        }))
    }

    pub fn dimension(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|z| z.re).sum()
    }

    /// `Re Tr(self * other)`.
    pub fn trace_product(&self, other: &CMatrix) -> f64 {
        let d = self.dimension();
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += (self.entries[(i, j)] * other[(j, i)]).re;
            }
        }
        acc
    }

    pub fn eigen(&self) -> Eigen {
        let eig = self.entries.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = DVector::from_iterator(order.len(), order.iter().map(|&k| eig.eigenvalues[k]));
        let vectors = CMatrix::from_columns(
            &order
                .iter()
                .map(|&k| eig.eigenvectors.column(k).into_owned())
                .collect::<Vec<_>>(),
        );
        Eigen { values, vectors }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigen().values.iter().copied().collect()
    }

    /// `self + scale * other`.
    pub fn add_scaled(&self, scale: f64, other: &HermitianOperator) -> Result<Self> {
        check_dims(self, other)?;
        Ok(Self {
            entries: &self.entries + &other.entries * Complex64::new(scale, 0.0),
        })
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            entries: &self.entries * Complex64::new(factor, 0.0),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            entries: self.entries.transpose(),
        }
    }

    /// Trace norm `Tr|A|`.
    pub fn trace_norm(&self) -> f64 {
        self.eigen().values.iter().map(|v| v.abs()).sum()
    }

    /// Whether this is a density operator (PSD, unit trace) within `tol`.
    pub fn is_density(&self, tol: f64) -> bool {
        (self.trace() - 1.0).abs() <= tol && self.eigen().values.iter().all(|&v| v >= -tol)
    }

    /// Projection `{self > 0}` as a matrix.
    pub fn positive_projection(&self) -> CMatrix {
        let eig = self.eigen();
        let cut = eig.cutoff();
        eig.projection(|v| v > cut)
    }
}

pub(crate) fn check_dims(a: &HermitianOperator, b: &HermitianOperator) -> Result<()> {
    if a.dimension() != b.dimension() {
        return Err(Error::DimensionMismatch(a.dimension(), b.dimension()));
    }
    Ok(())
}

/// Jordan decomposition `A = A_+ - A_-` with the two spectral projections.
#[derive(Debug, Clone)]
pub struct Jordan {
    pub plus: CMatrix,
    pub minus: CMatrix,
    pub proj_pos: CMatrix,
    pub proj_nonpos: CMatrix,
}

pub fn jordan(a: &HermitianOperator) -> Jordan {
    let eig = a.eigen();
    let cut = eig.cutoff();
    Jordan {
        plus: eig.weighted(|v| if v > cut { v } else { 0.0 }),
        minus: eig.weighted(|v| if v > cut { 0.0 } else { -v }),
        proj_pos: eig.projection(|v| v > cut),
        proj_nonpos: eig.projection(|v| v <= cut),
    }
}

/// `Tr A_+`, the sum of the positive eigenvalues.
pub fn trace_plus(a: &HermitianOperator) -> f64 {
    let eig = a.eigen();
    let cut = eig.cutoff();
    eig.values.iter().filter(|&&v| v > cut).sum()
}

/// An operator `T` with `0 <= T <= I`.
#[derive(Debug, Clone)]
pub struct Contraction {
    op: HermitianOperator,
}

impl Contraction {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        for v in op.eigenvalues() {
            if !(-1e-10..=1.0 + 1e-10).contains(&v) {
                return Err(Error::NotContraction(v));
            }
        }
        Ok(Self { op })
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn entries(&self) -> &CMatrix {
        self.op.entries()
    }
}

/// A trace-preserving linear map on `d x d` matrices.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TPMap {
    /// `A -> sum_i K_i A K_i^dagger` with `sum_i K_i^dagger K_i = I`.
    Cptp {
        #[serde(with = "kraus_serde")]
        kraus: Vec<CMatrix>,
    },
    /// Dephase in the computational basis and apply a column-stochastic matrix to the
    /// diagonal: `A -> diag(S diag(A))`. On diagonal (commuting) inputs this acts on the
    /// spectrum vector directly.
    Stochastic { matrix: Vec<Vec<f64>> },
    /// `A -> (1 - t) A + t A^T`: positive and trace preserving, not completely positive.
    TransposeMix { t: f64 },
}

impl TPMap {
    pub fn cptp(kraus: Vec<CMatrix>) -> Result<Self> {
        let map = TPMap::Cptp { kraus };
        map.validate()?;
        Ok(map)
    }

    pub fn stochastic(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let map = TPMap::Stochastic { matrix };
        map.validate()?;
        Ok(map)
    }

    pub fn transpose_mix(t: f64) -> Result<Self> {
        let map = TPMap::TransposeMix { t };
        map.validate()?;
        Ok(map)
    }

    pub fn identity(d: usize) -> Self {
        TPMap::Cptp {
            kraus: vec![CMatrix::identity(d, d)],
        }
    }

    /// `A -> Tr(A) I / d`, written with Kraus operators `|i><j| / sqrt(d)`.
    pub fn depolarizing(d: usize) -> Self {
        let scale = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
        let mut kraus = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut k = CMatrix::zeros(d, d);
                k[(i, j)] = scale;
                kraus.push(k);
            }
        }
        TPMap::Cptp { kraus }
    }

    /// Input dimension, if fixed by the map.
    pub fn dimension(&self) -> Option<usize> {
        match self {
            TPMap::Cptp { kraus } => kraus.first().map(|k| k.ncols()),
            TPMap::Stochastic { matrix } => Some(matrix.len()),
            TPMap::TransposeMix { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TPMap::Cptp { kraus } => {
                let first = kraus
                    .first()
                    .ok_or_else(|| Error::InvalidMap("no Kraus operators".into()))?;
                let d = first.ncols();
                let mut sum = CMatrix::zeros(d, d);
                for k in kraus {
                    if k.ncols() != d || k.nrows() != d {
                        return Err(Error::InvalidMap("Kraus operators must be d x d".into()));
                    }
                    sum += k.adjoint() * k;
                }
                let dev = (sum - CMatrix::identity(d, d))
                    .iter()
                    .fold(0.0f64, |m, z| m.max(z.norm()));
                if dev > 1e-10 {
                    return Err(Error::InvalidMap(format!(
                        "Kraus completeness violated by {dev}"
                    )));
                }
                Ok(())
            }
            TPMap::Stochastic { matrix } => {
                let d = matrix.len();
                if d == 0 || matrix.iter().any(|row| row.len() != d) {
                    return Err(Error::InvalidMap("stochastic matrix must be square".into()));
                }
                if matrix.iter().flatten().any(|&x| x.is_nan() || x < 0.0) {
                    return Err(Error::InvalidMap("negative stochastic entry".into()));
                }
                for j in 0..d {
                    let col: f64 = matrix.iter().map(|row| row[j]).sum();
                    if (col - 1.0).abs() > 1e-10 {
                        return Err(Error::InvalidMap(format!("column {j} sums to {col}")));
                    }
                }
                Ok(())
            }
            TPMap::TransposeMix { t } => {
                if (0.0..=1.0).contains(t) {
                    Ok(())
                } else {
                    Err(Error::InvalidMap(format!(
                        "mixing weight {t} outside [0, 1]"
                    )))
                }
            }
        }
    }

    /// Whether the map sends `I` to `I` (within 1e-10).
    pub fn is_unital(&self, d: usize) -> bool {
        match apply_tp(self, &HermitianOperator::identity(d)) {
            Ok(out) => (out.entries() - CMatrix::identity(d, d))
                .iter()
                .all(|z| z.norm() <= 1e-10),
            Err(_) => false,
        }
    }
}

/// Apply a trace-preserving map.
pub fn apply_tp(map: &TPMap, a: &HermitianOperator) -> Result<HermitianOperator> {
    let d = a.dimension();
    if let Some(md) = map.dimension() {
        if md != d {
            return Err(Error::DimensionMismatch(md, d));
        }
    }
    let entries = match map {
        TPMap::Cptp { kraus } => {
            let mut out = CMatrix::zeros(d, d);
            for k in kraus {
                out += k * a.entries() * k.adjoint();
            }
            out
        }
        TPMap::Stochastic { matrix } => {
            let mut out = CMatrix::zeros(d, d);
            for (i, row) in matrix.iter().enumerate() {
                let v: f64 = row
                    .iter()
                    .enumerate()
                    .map(|(j, s)| s * a.entries()[(j, j)].re)
                    .sum();
                out[(i, i)] = Complex64::new(v, 0.0);
            }
            out
        }
        TPMap::TransposeMix { t } => {
            a.entries() * Complex64::new(1.0 - t, 0.0)
                + a.entries().transpose() * Complex64::new(*t, 0.0)
        }
    };
    Ok(HermitianOperator::from_hermitian_part(entries))
}

mod kraus_serde {
    use super::CMatrix;
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(kraus: &[CMatrix], s: S) -> Result<S::Ok, S::Error> {
        let nested: Vec<Vec<Vec<[f64; 2]>>> = kraus.iter().map(super::matrix_to_nested).collect();
        nested.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CMatrix>, D::Error> {
        let nested: Vec<Vec<Vec<[f64; 2]>>> = Vec::deserialize(d)?;
        Ok(nested
            .into_iter()
            .map(|rows| {
                let r = rows.len();
                let c = rows.first().map_or(0, Vec::len);
                CMatrix::from_fn(r, c, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1]))
            })
            .collect())
    }
}

/// Row-major nested `[re, im]` pairs, the JSON layout used for matrices in reports.
pub fn matrix_to_nested(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

impl Serialize for HermitianOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_nested(&self.entries).serialize(s)
    }
}
