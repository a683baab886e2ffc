//! Schmidt spectra of bipartite pure states and the spectra of standard state sequences.
//!
//! A [`Spectrum`] is kept in compressed form: one [`Atom`] per distinct probability value,
//! carrying a multiplicity. Probabilities are stored as natural logarithms so that i.i.d.
//! spectra in the hundreds of copies (atoms like `0.1^400`) stay representable, and
//! multiplicities are integer-valued `f64` so that counts like `2^400` fit. Counts are exact
//! below `2^53`.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a constructed spectrum.
pub const MASS_TOL: f64 = 1e-9;
/// Relative tolerance under which two probabilities are treated as the same atom.
pub const MERGE_TOL: f64 = 1e-12;
/// Squared singular values at or below this are treated as zero Schmidt coefficients.
pub const SCHMIDT_ZERO: f64 = 1e-14;
/// Largest integer for which an `f64` multiplicity is exact.
pub const EXACT_COUNT_LIMIT: f64 = 9_007_199_254_740_992.0;

/// Enumeration and expansion limits shared by the whole crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    /// Maximum number of i.i.d. type classes enumerated for one spectrum.
    pub max_type_classes: u64,
    /// Maximum length a compressed spectrum may be expanded to.
    pub max_expanded_dim: u64,
    /// Maximum number of maps enumerated by the brute-force oracle.
    pub brute_force_cap: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            max_type_classes: 1_000_000,
            max_expanded_dim: 1 << 20,
            brute_force_cap: 1_000_000,
        }
    }
}

/// One distinct probability value of a spectrum together with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    ln_prob: f64,
    count: f64,
}

impl Atom {
    pub fn ln_prob(&self) -> f64 {
        self.ln_prob
    }

    /// The probability of one element. Underflows to zero below `f64::MIN_POSITIVE`.
    pub fn prob(&self) -> f64 {
        self.ln_prob.exp()
    }

    pub fn count(&self) -> f64 {
        self.count
    }

    /// Total probability carried by the atom, `count * prob`.
    pub fn mass(&self) -> f64 {
        (self.ln_prob + self.count.ln()).exp()
    }

    /// Self-information rate `-(1/n) ln p` in nats.
    pub fn rate(&self, n: u32) -> f64 {
        -self.ln_prob / f64::from(n)
    }
}

/// A finite probability vector in compressed form: atoms sorted by probability descending,
/// all strictly positive, distinct probability values merged.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    atoms: Vec<Atom>,
    total_dim: f64,
}

fn check_count(count: f64) -> Result<()> {
    if !count.is_finite() || count < 1.0 || (count < EXACT_COUNT_LIMIT && count.fract() != 0.0) {
        return Err(Error::InvalidMultiplicity(count));
    }
    Ok(())
}

fn same_atom(a: f64, b: f64) -> bool {
    (a - b).abs() <= MERGE_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Sort descending and merge equal probabilities. Mass is not checked here.
fn canonicalize(mut atoms: Vec<Atom>) -> Vec<Atom> {
    atoms.retain(|a| a.count > 0.0 && a.ln_prob.is_finite());
    atoms.sort_by(|a, b| b.ln_prob.total_cmp(&a.ln_prob));
    let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
    let mut anchor = f64::NAN;
    for atom in atoms {
        match out.last_mut() {
            Some(last) if same_atom(anchor, atom.ln_prob) => {
                let count = last.count + atom.count;
                last.ln_prob = (last.ln_prob * last.count + atom.ln_prob * atom.count) / count;
                last.count = count;
            }
            _ => {
                anchor = atom.ln_prob;
                out.push(atom);
            }
        }
    }
    out
}

impl Spectrum {
    fn from_canonical(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptyDimension);
        }
        let spectrum = Self {
            total_dim: atoms.iter().map(|a| a.count).sum(),
            atoms,
        };
        let mass = spectrum.mass();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::NotNormalized { norm: mass });
        }
        Ok(spectrum)
    }

    /// Build from `(ln p, multiplicity)` pairs.
    pub fn from_log_atoms<I>(atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut out = Vec::new();
        for (ln_prob, count) in atoms {
            check_count(count)?;
            if ln_prob.is_nan() || ln_prob > 1e-12 {
                return Err(Error::InvalidProbability {
                    value: ln_prob.exp(),
                    reason: "probability must lie in (0, 1]",
                });
            }
            out.push(Atom {
                ln_prob: ln_prob.min(0.0),
                count,
            });
        }
        Self::from_canonical(canonicalize(out))
    }

    /// Build from `(p, multiplicity)` pairs. Zero probabilities are dropped.
    pub fn from_atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        let mut out = Vec::with_capacity(atoms.len());
        for &(p, count) in atoms {
            if !(0.0..=1.0 + 1e-12).contains(&p) {
                return Err(Error::InvalidProbability {
                    value: p,
                    reason: "probability must lie in [0, 1]",
                });
            }
            check_count(count)?;
            if p > 0.0 {
                out.push((p.min(1.0).ln(), count));
            }
        }
        Self::from_log_atoms(out)
    }

    /// Build from an expanded probability vector. Zeros are dropped.
    pub fn from_probabilities(probs: &[f64]) -> Result<Self> {
        let pairs: Vec<(f64, f64)> = probs.iter().map(|&p| (p, 1.0)).collect();
        Self::from_atoms(&pairs)
    }

    /// The deterministic spectrum `{(1, x1)}`.
    pub fn point() -> Self {
        Self {
            atoms: vec![Atom {
                ln_prob: 0.0,
                count: 1.0,
            }],
            total_dim: 1.0,
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Number of distinct atoms.
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Number of (nonzero) Schmidt coefficients, the sum of multiplicities.
    pub fn total_dim(&self) -> f64 {
        self.total_dim
    }

    pub fn mass(&self) -> f64 {
        self.atoms.iter().map(Atom::mass).sum()
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        let h = -self.atoms.iter().map(|a| a.mass() * a.ln_prob).sum::<f64>();
        // Rounding in ln p can leave a pure state at -1e-16; adding 0.0 also clears -0.0.
        h.max(0.0) + 0.0
    }

    /// Whether every probability is the same value.
    pub fn is_flat(&self) -> bool {
        self.atoms.len() == 1
    }

    /// The expanded probability vector in descending order.
    pub fn expand(&self, max_len: u64) -> Result<Vec<f64>> {
        if self.total_dim > max_len as f64 {
            return Err(Error::BudgetExceeded {
                budget: "max_expanded_dim",
                required: self.total_dim,
                limit: max_len,
            });
        }
        let mut out = Vec::with_capacity(self.total_dim as usize);
        for atom in &self.atoms {
            let p = atom.prob();
            out.extend(std::iter::repeat_n(p, atom.count as usize));
        }
        Ok(out)
    }

    /// Multiply every probability by `weight`; the result is a sub-normalized block.
    fn scaled_atoms(&self, weight: f64) -> impl Iterator<Item = Atom> + '_ {
        let shift = weight.ln();
        self.atoms.iter().map(move |a| Atom {
            ln_prob: a.ln_prob + shift,
            count: a.count,
        })
    }

    /// Plain-text form, one `p mult` pair per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for atom in &self.atoms {
            let _ = writeln!(
                out,
                "{} {}",
                fmt_float(display_prob(atom)),
                fmt_count(atom.count)
            );
        }
        out
    }

    /// Parse the plain-text form. Blank lines and `#` comments are ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let parse = |field: Option<&str>| -> Result<f64> {
                field
                    .ok_or_else(|| Error::Parse(format!("line {}: expected `p mult`", lineno + 1)))?
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            let p = parse(fields.next())?;
            let count = parse(fields.next())?;
            if fields.next().is_some() {
                return Err(Error::Parse(format!(
                    "line {}: trailing fields",
                    lineno + 1
                )));
            }
            pairs.push((p, count));
        }
        Self::from_atoms(&pairs)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spectrum serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Probability rounded to 15 significant digits, hiding the `exp(ln p)` round trip.
fn display_prob(atom: &Atom) -> f64 {
    let p = atom.prob();
    format!("{p:.14e}").parse().unwrap_or(p)
}

fn fmt_float(x: f64) -> String {
    if x == 0.0 || (1e-5..1e16).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn fmt_count(c: f64) -> String {
    if c < EXACT_COUNT_LIMIT {
        format!("{}", c as u64)
    } else {
        format!("{c:e}")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CountRepr {
    Exact(u64),
    Approx(f64),
}

#[derive(Serialize, Deserialize)]
struct SpectrumRepr {
    atoms: Vec<(f64, CountRepr)>,
}

impl Serialize for Spectrum {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| {
                let count = if a.count < EXACT_COUNT_LIMIT {
                    CountRepr::Exact(a.count as u64)
                } else {
                    CountRepr::Approx(a.count)
                };
                (display_prob(a), count)
            })
            .collect();
        SpectrumRepr { atoms }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Spectrum {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = SpectrumRepr::deserialize(deserializer)?;
        let pairs: Vec<(f64, f64)> = repr
            .atoms
            .into_iter()
            .map(|(p, c)| match c {
                CountRepr::Exact(c) => (p, c as f64),
                CountRepr::Approx(c) => (p, c),
            })
            .collect();
        Spectrum::from_atoms(&pairs).map_err(serde::de::Error::custom)
    }
}

/// Exact binomial coefficient while it stays below `2^53`, correctly rounded beyond.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut r = 1.0f64;
    for i in 1..=k {
        r = r * (n - k + i) as f64 / i as f64;
        if r < EXACT_COUNT_LIMIT {
            r = r.round();
        }
    }
    r
}

/// Spectrum of the `n`-fold tensor power of `base`, one atom per type class.
pub fn iid_spectrum(base: &Spectrum, n: u32, budgets: &Budgets) -> Result<Spectrum> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let k = base.len() as u64;
    let classes = binomial(u64::from(n) + k - 1, k - 1);
    if classes > budgets.max_type_classes as f64 {
        return Err(Error::BudgetExceeded {
            budget: "max_type_classes",
            required: classes,
            limit: budgets.max_type_classes,
        });
    }
    let log_dim = f64::from(n) * base.total_dim.ln();
    if log_dim > 700.0 {
        return Err(Error::BudgetExceeded {
            budget: "max_log_dimension",
            required: log_dim,
            limit: 700,
        });
    }

    let mut atoms = Vec::with_capacity(classes as usize);
    let mut composition = vec![0u32; base.len()];
    enumerate_compositions(n, 0, &mut composition, &mut |c| {
        let mut ln_prob = 0.0;
        let mut count = 1.0;
        let mut used = 0u64;
        for (atom, &ci) in base.atoms.iter().zip(c) {
            ln_prob += f64::from(ci) * atom.ln_prob;
            used += u64::from(ci);
            count *= binomial(used, u64::from(ci)) * atom.count.powi(ci as i32);
        }
        atoms.push(Atom { ln_prob, count });
    });
    Spectrum::from_canonical(canonicalize(atoms))
}

fn enumerate_compositions(
    remaining: u32,
    index: usize,
    current: &mut Vec<u32>,
    visit: &mut impl FnMut(&[u32]),
) {
    if index + 1 == current.len() {
        current[index] = remaining;
        visit(current);
        return;
    }
    for take in (0..=remaining).rev() {
        current[index] = take;
        enumerate_compositions(remaining - take, index + 1, current, visit);
    }
}

/// Schmidt spectrum of a maximally entangled state of rank `rank`.
pub fn maxent_spectrum(rank: f64) -> Result<Spectrum> {
    if rank < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "maximally entangled rank must be at least 1, got {rank}"
        )));
    }
    check_count(rank)?;
    Spectrum::from_log_atoms([(-rank.ln(), rank)])
}

/// `M_n = ceil(e^{n R})`, snapping to the nearest integer when `e^{nR}` is within
/// floating-point noise of one (so `R = ln 2` gives exactly `2^n`).
pub fn maxent_rank(rate: f64, n: u32) -> f64 {
    let x = (f64::from(n) * rate).exp();
    let nearest = x.round();
    let rank = if (x - nearest).abs() <= 1e-9 * x.max(1.0) {
        nearest
    } else {
        x.ceil()
    };
    rank.max(1.0)
}

/// Generator of the `n`-th Schmidt spectrum of a sequence of bipartite pure states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SequenceModel {
    /// Tensor powers of a single state.
    Iid { base: Spectrum },
    /// Maximally entangled states of rank `ceil(e^{n rate})`.
    MaxEnt { rate: f64 },
    /// Maximally entangled states with rank `ranks[n - 1]`.
    MaxEntExplicit { ranks: Vec<f64> },
    /// Weighted direct sum: the reduced state is block diagonal over components.
    Mixture {
        components: Vec<(f64, SequenceModel)>,
    },
    /// Arbitrary spectra, `spectra[n - 1]` at index `n`.
    Explicit { spectra: Vec<Spectrum> },
}

impl SequenceModel {
    pub fn iid(base: Spectrum) -> Self {
        SequenceModel::Iid { base }
    }

    /// I.i.d. model from a probability vector such as `[0.9, 0.1]`.
    pub fn iid_from_probs(probs: &[f64]) -> Result<Self> {
        Ok(SequenceModel::Iid {
            base: Spectrum::from_probabilities(probs)?,
        })
    }

    pub fn maxent(rate: f64) -> Result<Self> {
        let model = SequenceModel::MaxEnt { rate };
        model.validate()?;
        Ok(model)
    }

    pub fn mixture(components: Vec<(f64, SequenceModel)>) -> Result<Self> {
        let model = SequenceModel::Mixture { components };
        model.validate()?;
        Ok(model)
    }

    /// Check the structural invariants (weights, rates, ranks).
    pub fn validate(&self) -> Result<()> {
        match self {
            SequenceModel::Iid { .. } | SequenceModel::Explicit { .. } => Ok(()),
            SequenceModel::MaxEnt { rate } => {
                if rate.is_finite() && *rate >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidModel(format!(
                        "rate must be finite and >= 0, got {rate}"
                    )))
                }
            }
            SequenceModel::MaxEntExplicit { ranks } => {
                ranks.iter().try_for_each(|&m| check_count(m))
            }
            SequenceModel::Mixture { components } => {
                if components.is_empty() {
                    return Err(Error::InvalidModel(
                        "mixture needs at least one component".into(),
                    ));
                }
                let mut total = 0.0;
                for (w, component) in components {
                    if w.is_nan() || *w <= 0.0 {
                        return Err(Error::InvalidModel(format!(
                            "mixture weight must be positive, got {w}"
                        )));
                    }
                    total += w;
                    component.validate()?;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidModel(format!(
                        "mixture weights sum to {total}, expected 1"
                    )));
                }
                Ok(())
            }
        }
    }

    /// The spectrum of the `n`-th element of the sequence.
    pub fn generate(&self, n: u32, budgets: &Budgets) -> Result<Spectrum> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        match self {
            SequenceModel::Iid { base } => iid_spectrum(base, n, budgets),
            SequenceModel::MaxEnt { rate } => maxent_spectrum(maxent_rank(*rate, n)),
            SequenceModel::MaxEntExplicit { ranks } => {
                let rank = ranks
                    .get(n as usize - 1)
                    .ok_or_else(|| Error::InvalidModel(format!("no rank given for n = {n}")))?;
                maxent_spectrum(*rank)
            }
            SequenceModel::Mixture { components } => {
                let mut atoms = Vec::new();
                for (w, component) in components {
                    let s = component.generate(n, budgets)?;
                    atoms.extend(s.scaled_atoms(*w));
                }
                Spectrum::from_canonical(canonicalize(atoms))
            }
            SequenceModel::Explicit { spectra } => spectra
                .get(n as usize - 1)
                .cloned()
                .ok_or_else(|| Error::InvalidModel(format!("no spectrum given for n = {n}"))),
        }
    }
}

/// Free-function form of [`SequenceModel::generate`].
pub fn generate(model: &SequenceModel, n: u32, budgets: &Budgets) -> Result<Spectrum> {
    model.generate(n, budgets)
}

/// Entropy `-sum mult p ln p` in nats.
pub fn entropy(s: &Spectrum) -> f64 {
    s.entropy()
}

/// Coefficients `C_ij` of `|psi> = sum C_ij |i>|j>`.
#[derive(Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Pair([f64; 2]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeMatrix {
    entries: DMatrix<Complex64>,
}

impl AmplitudeMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::EmptyDimension);
        }
        let norm = entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm * norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { entries })
    }

    /// Real coefficients, row-major.
    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::SizeMismatch {
                expected: rows * cols,
                found: values.len(),
            });
        }
        Self::new(DMatrix::from_fn(rows, cols, |i, j| {
            Complex64::new(values[i * cols + j], 0.0)
        }))
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// Parse nested arrays of `[re, im]` pairs, one inner array per row. Bare numbers are
    /// read as real entries.
    pub fn from_json(text: &str) -> Result<Self> {
        let rows: Vec<Vec<Entry>> = serde_json::from_str(text)?;
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
            return Err(Error::SizeMismatch {
                expected: ncols,
                found: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(nrows, ncols, |i, j| match rows[i][j] {
            Entry::Real(re) => Complex64::new(re, 0.0),
            Entry::Pair([re, im]) => Complex64::new(re, im),
        }))
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.entries.nrows())
            .map(|i| {
                (0..self.entries.ncols())
                    .map(|j| {
                        let z = self.entries[(i, j)];
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        serde_json::to_string(&rows).expect("amplitude serialization is infallible")
    }
}

/// Schmidt spectrum: the squared singular values of the amplitude matrix.
pub fn schmidt_from_amplitudes(c: &AmplitudeMatrix) -> Result<Spectrum> {
    let singular = c.entries.clone().svd(false, false).singular_values;
    let atoms: Vec<Atom> = singular
        .iter()
        .map(|s| s * s)
        .filter(|&p| p > SCHMIDT_ZERO)
        .map(|p| Atom {
            ln_prob: p.min(1.0).ln(),
            count: 1.0,
        })
        .collect();
    let spectrum = Spectrum::from_canonical(canonicalize(atoms))?;
    if (spectrum.mass() - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized {
            norm: spectrum.mass().sqrt(),
        });
    }
    Ok(spectrum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(s: &Spectrum) -> Vec<(f64, f64)> {
        s.atoms().iter().map(|a| (a.prob(), a.count())).collect()
    }

    fn assert_pairs(s: &Spectrum, expected: &[(f64, f64)]) {
        let got = pairs(s);
        assert_eq!(got.len(), expected.len(), "{got:?} vs {expected:?}");
        for ((p, c), (ep, ec)) in got.iter().zip(expected) {
            assert!((p - ep).abs() < 1e-12, "{got:?} vs {expected:?}");
            assert_eq!(c, ec);
        }
    }

    #[test]
    fn schmidt_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = AmplitudeMatrix::from_real(2, 2, &[h, 0.0, 0.0, h]).unwrap();
        assert_pairs(&schmidt_from_amplitudes(&bell).unwrap(), &[(0.5, 2.0)]);

        let product = AmplitudeMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_pairs(&schmidt_from_amplitudes(&product).unwrap(), &[(1.0, 1.0)]);

        let diag =
            AmplitudeMatrix::from_real(2, 2, &[0.9f64.sqrt(), 0.0, 0.0, 0.1f64.sqrt()]).unwrap();
        assert_pairs(
            &schmidt_from_amplitudes(&diag).unwrap(),
            &[(0.9, 1.0), (0.1, 1.0)],
        );
    }

    #[test]
    fn schmidt_rejects_bad_input() {
        let err = AmplitudeMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, 0.0]).unwrap_err();
        match err {
            Error::NotNormalized { norm } => assert!((norm - 2f64.sqrt()).abs() < 1e-12),
            other => panic!("unexpected {other}"),
        }
        assert!(matches!(
            AmplitudeMatrix::new(DMatrix::zeros(0, 3)),
            Err(Error::EmptyDimension)
        ));
    }

    #[test]
    fn amplitude_json_round_trip() {
        let text = "[[[0.6,0.0],[0.0,0.0]],[[0.0,0.0],[0.0,0.8]]]";
        let c = AmplitudeMatrix::from_json(text).unwrap();
        assert_eq!(AmplitudeMatrix::from_json(&c.to_json()).unwrap(), c);
        assert_pairs(
            &schmidt_from_amplitudes(&c).unwrap(),
            &[(0.64, 1.0), (0.36, 1.0)],
        );
        assert!(AmplitudeMatrix::from_json("[[[1,0]],[[0,0],[0,0]]]").is_err());
    }

    #[test]
    fn iid_examples() {
        let b = Budgets::default();
        let bell = Spectrum::from_atoms(&[(0.5, 2.0)]).unwrap();
        assert_pairs(&iid_spectrum(&bell, 3, &b).unwrap(), &[(0.125, 8.0)]);

        let skew = Spectrum::from_probabilities(&[0.9, 0.1]).unwrap();
        assert_pairs(
            &iid_spectrum(&skew, 2, &b).unwrap(),
            &[(0.81, 1.0), (0.09, 2.0), (0.01, 1.0)],
        );

        let big = iid_spectrum(&skew, 200, &b).unwrap();
        assert_eq!(big.len(), 201);
        assert_eq!(big.total_dim(), 2f64.powi(200));
        assert!((big.mass() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn iid_binomial_masses_match_direct_sum() {
        // Oracle: binomial pmf summed term by term in log space.
        let skew = Spectrum::from_probabilities(&[0.9, 0.1]).unwrap();
        let s = iid_spectrum(&skew, 60, &Budgets::default()).unwrap();
        for (k, atom) in s.atoms().iter().enumerate() {
            let ln_choose: f64 = (1..=k).map(|i| ((60 - k + i) as f64 / i as f64).ln()).sum();
            let ln_mass = ln_choose + (60 - k) as f64 * 0.9f64.ln() + k as f64 * 0.1f64.ln();
            assert!((atom.mass() - ln_mass.exp()).abs() < 1e-12 * (1.0 + ln_mass.exp()));
        }
    }

    #[test]
    fn iid_merges_coinciding_type_classes() {
        // 0.2^2 = 0.4 * 0.1, so two compositions share a probability value.
        let base = Spectrum::from_probabilities(&[0.4, 0.3, 0.2, 0.1]).unwrap();
        let s = iid_spectrum(&base, 2, &Budgets::default()).unwrap();
        let shared = s
            .atoms()
            .iter()
            .find(|a| (a.prob() - 0.04).abs() < 1e-12)
            .unwrap();
        assert_eq!(shared.count(), 3.0);
        assert_eq!(s.total_dim(), 16.0);
    }

    #[test]
    fn iid_budget_is_enforced() {
        let base = Spectrum::from_probabilities(&[0.4, 0.3, 0.2, 0.1]).unwrap();
        let b = Budgets {
            max_type_classes: 100,
            ..Budgets::default()
        };
        match iid_spectrum(&base, 50, &b).unwrap_err() {
            Error::BudgetExceeded { budget, limit, .. } => {
                assert_eq!(budget, "max_type_classes");
                assert_eq!(limit, 100);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn maxent_examples() {
        assert_pairs(&maxent_spectrum(1.0).unwrap(), &[(1.0, 1.0)]);
        assert_pairs(&maxent_spectrum(4.0).unwrap(), &[(0.25, 4.0)]);
        assert!(maxent_spectrum(0.0).is_err());
        assert_eq!(maxent_rank(0.2, 10), 8.0);
        assert_eq!(maxent_rank(std::f64::consts::LN_2, 5), 32.0);
        assert_eq!(maxent_rank(0.0, 7), 1.0);
        let s = SequenceModel::maxent(0.2)
            .unwrap()
            .generate(10, &Budgets::default())
            .unwrap();
        assert_pairs(&s, &[(0.125, 8.0)]);
    }

    #[test]
    fn generate_examples() {
        let b = Budgets::default();
        let mix = SequenceModel::mixture(vec![
            (0.5, SequenceModel::iid_from_probs(&[0.9, 0.1]).unwrap()),
            (0.5, SequenceModel::iid_from_probs(&[0.5, 0.5]).unwrap()),
        ])
        .unwrap();
        assert_pairs(
            &mix.generate(1, &b).unwrap(),
            &[(0.45, 1.0), (0.25, 2.0), (0.05, 1.0)],
        );

        let s1 = Spectrum::point();
        let s2 = Spectrum::from_atoms(&[(0.5, 2.0)]).unwrap();
        let explicit = SequenceModel::Explicit {
            spectra: vec![s1, s2.clone()],
        };
        assert_eq!(explicit.generate(2, &b).unwrap(), s2);
        assert!(explicit.generate(3, &b).is_err());

        let flat = SequenceModel::maxent(std::f64::consts::LN_2).unwrap();
        assert_pairs(&flat.generate(5, &b).unwrap(), &[(1.0 / 32.0, 32.0)]);

        let ranks = SequenceModel::MaxEntExplicit {
            ranks: vec![1.0, 3.0],
        };
        assert_pairs(&ranks.generate(2, &b).unwrap(), &[(1.0 / 3.0, 3.0)]);
    }

    #[test]
    fn mixture_validation() {
        let iid = SequenceModel::iid_from_probs(&[0.5, 0.5]).unwrap();
        assert!(SequenceModel::mixture(vec![(0.5, iid.clone()), (0.4, iid.clone())]).is_err());
        assert!(SequenceModel::mixture(vec![(-0.5, iid.clone()), (1.5, iid)]).is_err());
        assert!(SequenceModel::maxent(-1.0).is_err());
    }

    #[test]
    fn entropy_examples() {
        let bell = Spectrum::from_atoms(&[(0.5, 2.0)]).unwrap();
        assert!((entropy(&bell) - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(entropy(&Spectrum::point()), 0.0);
        let skew = Spectrum::from_probabilities(&[0.9, 0.1]).unwrap();
        let expected = -0.9 * 0.9f64.ln() - 0.1 * 0.1f64.ln();
        assert!((entropy(&skew) - expected).abs() < 1e-15);
        assert!((entropy(&skew) - 0.325083).abs() < 1e-6);
    }

    #[test]
    fn constructor_invariants() {
        assert!(Spectrum::from_probabilities(&[0.5, 0.4]).is_err());
        assert!(Spectrum::from_atoms(&[(0.5, 1.5)]).is_err());
        assert!(Spectrum::from_atoms(&[(1.2, 1.0)]).is_err());
        let s = Spectrum::from_probabilities(&[0.2, 0.0, 0.5, 0.3, 0.0]).unwrap();
        assert_pairs(&s, &[(0.5, 1.0), (0.3, 1.0), (0.2, 1.0)]);
        let merged = Spectrum::from_probabilities(&[0.25, 0.25, 0.5]).unwrap();
        assert_pairs(&merged, &[(0.5, 1.0), (0.25, 2.0)]);
    }

    #[test]
    fn text_and_json_formats() {
        let s = Spectrum::from_atoms(&[(0.9, 1.0), (0.05, 2.0)]).unwrap();
        assert_eq!(s.to_json(), r#"{"atoms":[[0.9,1],[0.05,2]]}"#);
        assert_eq!(s.to_text(), "0.9 1\n0.05 2\n");
        assert_eq!(
            Spectrum::from_text("# comment\n0.9 1\n\n0.05 2\n").unwrap(),
            s
        );
        assert_eq!(Spectrum::from_json(&s.to_json()).unwrap(), s);
        assert!(Spectrum::from_text("0.9").is_err());
        assert!(Spectrum::from_json(r#"{"atoms":[[0.9,1]]}"#).is_err());
    }

    #[test]
    fn huge_counts_serialize_as_floats() {
        let flat = SequenceModel::iid_from_probs(&[0.5, 0.5])
            .unwrap()
            .generate(100, &Budgets::default())
            .unwrap();
        let back = Spectrum::from_json(&flat.to_json()).unwrap();
        assert_eq!(back.total_dim(), flat.total_dim());
    }

    #[test]
    fn model_json_round_trip() {
        let mix = SequenceModel::mixture(vec![
            (0.25, SequenceModel::maxent(0.3).unwrap()),
            (0.75, SequenceModel::iid_from_probs(&[0.7, 0.3]).unwrap()),
        ])
        .unwrap();
        let text = serde_json::to_string(&mix).unwrap();
        let back: SequenceModel = serde_json::from_str(&text).unwrap();
        assert_eq!(back, mix);
    }
}
