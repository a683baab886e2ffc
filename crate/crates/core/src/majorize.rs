//! Majorization, pushforwards under deterministic maps and doubly stochastic certificates.
//!
//! `p ≺ q` holds when every descending prefix sum of `p` is at most the matching prefix sum
//! of `q`, with shorter vectors padded by zeros. The predicate runs on compressed spectra:
//! both prefix-sum functions are piecewise linear in the prefix length with kinks only at
//! multiplicity-run boundaries, so checking the union of those boundaries is exact.

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::spectra::Spectrum;

/// Absolute tolerance on prefix-sum comparisons.
pub const MAJORIZATION_TOL: f64 = 1e-10;

/// A total function `{0..domain_size} -> {0..codomain_size}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicMap {
    targets: Vec<usize>,
    codomain_size: usize,
}

impl DeterministicMap {
    pub fn new(targets: Vec<usize>, codomain_size: usize) -> Result<Self> {
        if targets.is_empty() || codomain_size == 0 {
            return Err(Error::EmptyDimension);
        }
        if let Some(&bad) = targets.iter().find(|&&t| t >= codomain_size) {
            return Err(Error::InvalidArgument(format!(
                "target {bad} outside codomain of size {codomain_size}"
            )));
        }
        Ok(Self {
            targets,
            codomain_size,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            targets: (0..n).collect(),
            codomain_size: n,
        }
    }

    pub fn constant(domain_size: usize) -> Self {
        Self {
            targets: vec![0; domain_size],
            codomain_size: 1,
        }
    }

    pub fn domain_size(&self) -> usize {
        self.targets.len()
    }

    pub fn codomain_size(&self) -> usize {
        self.codomain_size
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn apply(&self, x: usize) -> usize {
        self.targets[x]
    }

    /// Preimage of each codomain element, in increasing domain order.
    pub fn fibers(&self) -> Vec<Vec<usize>> {
        let mut fibers = vec![Vec::new(); self.codomain_size];
        for (x, &y) in self.targets.iter().enumerate() {
            fibers[y].push(x);
        }
        fibers
    }
}

/// Serialized as a plain JSON integer array; the codomain is read back as `max + 1`.
impl Serialize for DeterministicMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.targets.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DeterministicMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let targets = Vec::<usize>::deserialize(d)?;
        let codomain = targets.iter().max().map_or(0, |m| m + 1);
        DeterministicMap::new(targets, codomain).map_err(serde::de::Error::custom)
    }
}

/// Square matrix with nonnegative entries and unit row and column sums.
#[derive(Debug, Clone, PartialEq)]
pub struct BistochasticMatrix {
    entries: DMatrix<f64>,
}

impl BistochasticMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let m = Self { entries };
        let dev = m.deviation();
        if dev > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "matrix is not bistochastic (deviation {dev})"
            )));
        }
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            entries: DMatrix::identity(n, n),
        }
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Largest violation among row sums, column sums and negative entries.
    pub fn deviation(&self) -> f64 {
        let e = &self.entries;
        if e.nrows() != e.ncols() {
            return f64::INFINITY;
        }
        let mut dev = 0.0f64;
        for i in 0..e.nrows() {
            dev = dev.max((e.row(i).sum() - 1.0).abs());
            dev = dev.max((e.column(i).sum() - 1.0).abs());
        }
        let min = e.iter().fold(0.0f64, |m, &x| m.min(x));
        if min < -1e-12 {
            dev = dev.max(-min);
        }
        dev
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let x = nalgebra::DVector::from_column_slice(v);
        (&self.entries * x).iter().copied().collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.entries.nrows() {
            let row: Vec<String> = self.entries.row(i).iter().map(|x| x.to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

impl Serialize for BistochasticMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = (0..self.entries.nrows())
            .map(|i| self.entries.row(i).iter().copied().collect())
            .collect();
        rows.serialize(s)
    }
}

/// Run boundaries of a spectrum: `(end index, prefix mass at end, probability)` per atom.
fn runs(s: &Spectrum) -> Vec<(f64, f64, f64)> {
    let mut end = 0.0;
    let mut mass = 0.0;
    s.atoms()
        .iter()
        .map(|a| {
            end += a.count();
            mass += a.mass();
            (end, mass, a.prob())
        })
        .collect()
}

/// Sum of the `k` largest entries (zero padded beyond the support).
fn prefix_at(runs: &[(f64, f64, f64)], k: f64) -> f64 {
    let idx = runs.partition_point(|&(end, _, _)| end < k);
    match runs.get(idx) {
        None => runs.last().map_or(0.0, |r| r.1),
        Some(&(end, mass, p)) => mass - (end - k) * p,
    }
}

/// First prefix length where `p`'s prefix sum exceeds `q`'s by more than the tolerance.
pub fn majorization_violation(p: &Spectrum, q: &Spectrum) -> Option<(f64, f64, f64)> {
    let rp = runs(p);
    let rq = runs(q);
    let mut points: Vec<f64> = rp.iter().chain(&rq).map(|r| r.0).collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    points.into_iter().find_map(|k| {
        let lhs = prefix_at(&rp, k);
        let rhs = prefix_at(&rq, k);
        (lhs > rhs + MAJORIZATION_TOL).then_some((k, lhs, rhs))
    })
}

/// `p ≺ q`.
pub fn majorizes(p: &Spectrum, q: &Spectrum) -> bool {
    majorization_violation(p, q).is_none()
}

/// `q(y) = sum over the fiber of y of p(x)`, as a labelled vector on the codomain.
pub fn pushforward_vec(p: &[f64], phi: &DeterministicMap) -> Result<Vec<f64>> {
    if p.len() != phi.domain_size() {
        return Err(Error::SizeMismatch {
            expected: phi.domain_size(),
            found: p.len(),
        });
    }
    let mut q = vec![0.0; phi.codomain_size()];
    for (x, &px) in p.iter().enumerate() {
        q[phi.apply(x)] += px;
    }
    Ok(q)
}

/// Induced spectrum of `phi` applied to `p`, whose expansion (descending order) indexes the
/// domain.
pub fn pushforward(p: &Spectrum, phi: &DeterministicMap) -> Result<Spectrum> {
    if p.total_dim() != phi.domain_size() as f64 {
        return Err(Error::SizeMismatch {
            expected: phi.domain_size(),
            found: p.total_dim() as usize,
        });
    }
    let expanded = p.expand(phi.domain_size() as u64)?;
    Spectrum::from_probabilities(&pushforward_vec(&expanded, phi)?)
}

/// Block-diagonal doubly stochastic witness that `p ≺ phi_* p`.
///
/// Rows and columns are ordered fiber by fiber (codomain order, then increasing domain index).
/// `beta` stacks `(q(y), 0, ..., 0)` per fiber, `alpha` stacks `p` restricted to each fiber,
/// and `matrix * beta = alpha`.
#[derive(Debug, Clone, Serialize)]
pub struct KhCertificate {
    pub matrix: BistochasticMatrix,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// Domain index of each row.
    pub order: Vec<usize>,
}

impl KhCertificate {
    /// Worst entrywise error of `matrix * beta - alpha`, combined with the bistochastic
    /// deviation and the check that `alpha` is a rearrangement of `p`.
    pub fn residual(&self, p: &[f64]) -> f64 {
        let applied = self.matrix.apply(&self.beta);
        let mut worst = self.matrix.deviation();
        for (a, b) in applied.iter().zip(&self.alpha) {
            worst = worst.max((a - b).abs());
        }
        let mut sorted_alpha = self.alpha.clone();
        let mut sorted_p = p.to_vec();
        sorted_alpha.sort_by(|a, b| b.total_cmp(a));
        sorted_p.sort_by(|a, b| b.total_cmp(a));
        if sorted_alpha.len() != sorted_p.len() {
            return f64::INFINITY;
        }
        for (a, b) in sorted_alpha.iter().zip(&sorted_p) {
            worst = worst.max((a - b).abs());
        }
        worst
    }
}

/// Certificate for a labelled probability vector.
pub fn kh_certificate_vec(p: &[f64], phi: &DeterministicMap) -> Result<KhCertificate> {
    let q = pushforward_vec(p, phi)?;
    let dim = p.len();
    let mut matrix = DMatrix::zeros(dim, dim);
    let mut alpha = Vec::with_capacity(dim);
    let mut beta = Vec::with_capacity(dim);
    let mut order = Vec::with_capacity(dim);
    let mut offset = 0;
    for (y, fiber) in phi.fibers().iter().enumerate() {
        let size = fiber.len();
        if size == 0 {
            continue;
        }
        if q[y] <= 0.0 {
            for i in 0..size {
                matrix[(offset + i, offset + i)] = 1.0;
            }
        } else {
            // sum_j w_j U_j, where U_j swaps coordinates 1 and j (U_1 = I).
            let weights: Vec<f64> = fiber.iter().map(|&x| p[x] / q[y]).collect();
            matrix[(offset, offset)] = weights[0];
            for j in 1..size {
                matrix[(offset + j, offset)] = weights[j];
                matrix[(offset, offset + j)] = weights[j];
                matrix[(offset + j, offset + j)] = 1.0 - weights[j];
            }
        }
        for (j, &x) in fiber.iter().enumerate() {
            alpha.push(p[x]);
            beta.push(if j == 0 { q[y] } else { 0.0 });
            order.push(x);
        }
        offset += size;
    }
    Ok(KhCertificate {
        matrix: BistochasticMatrix { entries: matrix },
        alpha,
        beta,
        order,
    })
}

pub fn kh_certificate(p: &Spectrum, phi: &DeterministicMap) -> Result<KhCertificate> {
    if p.total_dim() != phi.domain_size() as f64 {
        return Err(Error::SizeMismatch {
            expected: phi.domain_size(),
            found: p.total_dim() as usize,
        });
    }
    kh_certificate_vec(&p.expand(phi.domain_size() as u64)?, phi)
}

/// Doubly stochastic `D` with `D q↓ = p↓`, built from at most `m - 1` T-transforms.
pub fn transfer_matrix_vec(p: &[f64], q: &[f64]) -> Result<BistochasticMatrix> {
    let m = p.len().max(q.len());
    let sorted = |v: &[f64]| {
        let mut s = v.to_vec();
        s.resize(m, 0.0);
        s.sort_by(|a, b| b.total_cmp(a));
        s
    };
    let target = sorted(p);
    let mut x = sorted(q);

    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for k in 0..m {
        lhs += target[k];
        rhs += x[k];
        if lhs > rhs + MAJORIZATION_TOL {
            return Err(Error::NotMajorized {
                index: k + 1,
                lhs,
                rhs,
            });
        }
    }
    if (lhs - rhs).abs() > MAJORIZATION_TOL {
        return Err(Error::NotMajorized { index: m, lhs, rhs });
    }

    let mut d = DMatrix::<f64>::identity(m, m);
    const EQ: f64 = 1e-15;
    for _ in 0..m {
        let Some(j) = (0..m).rev().find(|&i| x[i] > target[i] + EQ) else {
            break;
        };
        let Some(k) = (j + 1..m).find(|&i| x[i] < target[i] - EQ) else {
            break;
        };
        let gap = x[j] - x[k];
        let delta = (x[j] - target[j]).min(target[k] - x[k]);
        let lambda = 1.0 - delta / gap;
        for c in 0..m {
            let (rj, rk) = (d[(j, c)], d[(k, c)]);
            d[(j, c)] = lambda * rj + (1.0 - lambda) * rk;
            d[(k, c)] = (1.0 - lambda) * rj + lambda * rk;
        }
        if x[j] - target[j] <= target[k] - x[k] {
            x[k] += x[j] - target[j];
            x[j] = target[j];
        } else {
            x[j] -= target[k] - x[k];
            x[k] = target[k];
        }
    }
    Ok(BistochasticMatrix { entries: d })
}

/// Transfer matrix between two spectra, expanded (with zero padding) to a common length.
pub fn transfer_matrix(p: &Spectrum, q: &Spectrum, max_dim: u64) -> Result<BistochasticMatrix> {
    if let Some((k, lhs, rhs)) = majorization_violation(p, q) {
        return Err(Error::NotMajorized {
            index: k as usize,
            lhs,
            rhs,
        });
    }
    transfer_matrix_vec(&p.expand(max_dim)?, &q.expand(max_dim)?)
}
