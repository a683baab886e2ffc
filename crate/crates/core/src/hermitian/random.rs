//! Seeded random ensembles for the verification suites.
//!
//! Every instance draws from its own ChaCha stream derived from `(seed, suite, index)`, so
//! suites give identical results regardless of evaluation order or thread count.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{CMatrix, Contraction, HermitianOperator, TPMap};
use crate::spectra::Spectrum;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent generator for instance `index` of the stream named `stream`.
pub fn instance_rng(seed: u64, stream: &str, index: u64) -> ChaCha8Rng {
    let mut h = splitmix(seed);
    for b in stream.bytes() {
        h = splitmix(h ^ u64::from(b));
    }
    ChaCha8Rng::seed_from_u64(splitmix(h ^ index))
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(gaussian(rng), gaussian(rng))
    })
}

/// Haar unitary from the QR decomposition of a complex Gaussian matrix, with the phases of
/// `R`'s diagonal absorbed into `Q`.
pub fn unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    isometry(d, d, rng)
}

/// `rows x cols` isometry (`rows >= cols`), `V^dagger V = I`.
pub fn isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let qr = gaussian_matrix(rows, cols, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..cols {
        let z = r[(k, k)];
        let phase = if z.norm() > 0.0 {
            z / z.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

/// Gaussian Hermitian ensemble `(G + G^dagger) / 2`.
pub fn hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianOperator {
    let g = gaussian_matrix(d, d, rng);
    HermitianOperator::new((&g + g.adjoint()) * Complex64::new(0.5, 0.0))
        .expect("hermitian by construction")
}

/// Traceless Gaussian Hermitian operator.
pub fn traceless_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianOperator {
    let h = hermitian(d, rng);
    let shift = h.trace() / d as f64;
    h.add_scaled(-shift, &HermitianOperator::identity(d))
        .expect("same dimension")
}

/// Normalized Wishart density operator `G G^dagger / Tr`.
pub fn density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianOperator {
    let g = gaussian_matrix(d, d, rng);
    let w = &g * g.adjoint();
    let tr: f64 = w.diagonal().iter().map(|z| z.re).sum();
    HermitianOperator::new(w * Complex64::new(1.0 / tr, 0.0)).expect("hermitian by construction")
}

/// Diagonal density operator with a random probability vector.
pub fn diagonal_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianOperator {
    HermitianOperator::from_real_diagonal(&probability_vector(d, rng))
}

/// `U diag(u) U^dagger` with `u_i` uniform in `[0, 1]`.
pub fn contraction<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Contraction {
    let u = unitary(d, rng);
    let diag = CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            Complex64::new(rng.random::<f64>(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let t = HermitianOperator::new(&u * diag * u.adjoint()).expect("hermitian by construction");
    Contraction::new(t).expect("eigenvalues in [0, 1]")
}

/// CPTP map with `rank` Kraus operators cut from a random isometry.
pub fn cptp<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> TPMap {
    let v = isometry(d * rank, d, rng);
    let kraus = (0..rank).map(|i| v.rows(i * d, d).into_owned()).collect();
    TPMap::Cptp { kraus }
}

/// Random mixture of unitary conjugations, a unital CPTP map.
pub fn unital_channel<R: Rng + ?Sized>(d: usize, terms: usize, rng: &mut R) -> TPMap {
    let weights = probability_vector(terms, rng);
    let kraus = weights
        .iter()
        .map(|w| unitary(d, rng) * Complex64::new(w.sqrt(), 0.0))
        .collect();
    TPMap::Cptp { kraus }
}

/// Column-stochastic matrix with independent Dirichlet-like columns.
pub fn stochastic<R: Rng + ?Sized>(d: usize, rng: &mut R) -> TPMap {
    let cols: Vec<Vec<f64>> = (0..d).map(|_| probability_vector(d, rng)).collect();
    let matrix = (0..d)
        .map(|i| (0..d).map(|j| cols[j][i]).collect())
        .collect();
    TPMap::Stochastic { matrix }
}

/// Doubly stochastic matrix as a random convex combination of permutation matrices.
pub fn doubly_stochastic<R: Rng + ?Sized>(d: usize, terms: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let weights = probability_vector(terms, rng);
    let mut m = vec![vec![0.0; d]; d];
    let mut perm: Vec<usize> = (0..d).collect();
    for w in weights {
        perm.shuffle(rng);
        for (i, &j) in perm.iter().enumerate() {
            m[i][j] += w;
        }
    }
    m
}

pub fn transpose_mix<R: Rng + ?Sized>(rng: &mut R) -> TPMap {
    TPMap::TransposeMix {
        t: rng.random::<f64>(),
    }
}

/// Probability vector from normalized exponential draws, occasionally sparsified.
pub fn probability_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = (0..d).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    if d > 1 && rng.random::<f64>() < 0.2 {
        let k = rng.random_range(0..d);
        v[k] = 0.0;
    }
    let total: f64 = v.iter().sum();
    if total == 0.0 {
        return vec![1.0 / d as f64; d];
    }
    v.iter().map(|x| x / total).collect()
}

/// Random spectrum with expanded length at most `max_dim`; sometimes draws repeated values so
/// that multiplicities above one occur.
pub fn spectrum<R: Rng + ?Sized>(max_dim: usize, rng: &mut R) -> Spectrum {
    let d = rng.random_range(1..=max_dim);
    let mut v = probability_vector(d, rng);
    if d > 2 && rng.random::<f64>() < 0.3 {
        let a = rng.random_range(0..d);
        let b = rng.random_range(0..d);
        let avg = 0.5 * (v[a] + v[b]);
        v[a] = avg;
        v[b] = avg;
    }
    Spectrum::from_probabilities(&v).expect("normalized by construction")
}
