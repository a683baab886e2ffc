//! Deterministic maps that push a source distribution close to a target.
//!
//! Source atoms are processed in descending probability; each goes to the codomain element with
//! the largest remaining deficit `q(y) - assigned(y)`, lower index first on ties. Runs of equal
//! atoms are placed in one step: the greedy sequence for a run of `c` atoms of mass `p` takes
//! the `c` largest "slots" `deficit(y) - j p`, so a threshold search over slot values gives the
//! per-bin counts without expanding either side.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::majorize::DeterministicMap;
use crate::spectra::{Budgets, SequenceModel, Spectrum};

/// A contiguous range of codomain elements that share target and assigned mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bin {
    pub start: f64,
    pub count: f64,
    pub target: f64,
    pub assigned: f64,
}

impl Bin {
    fn deficit(&self) -> f64 {
        self.target - self.assigned
    }
}

/// `per_bin` consecutive elements of source atom `source_atom` go to each of the codomain
/// elements `start .. start + count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Block {
    pub source_atom: usize,
    pub start: f64,
    pub count: f64,
    pub per_bin: f64,
}

/// A deterministic map in block form. Elements of each source atom are consumed in block order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompressedMap {
    pub domain_size: f64,
    pub codomain_size: f64,
    pub blocks: Vec<Block>,
}

impl CompressedMap {
    /// Expand to an explicit map; the domain is `p` expanded in descending order.
    pub fn expand(&self, p: &Spectrum, max_dim: u64) -> Result<DeterministicMap> {
        let need = self.domain_size.max(self.codomain_size);
        if need > max_dim as f64 {
            return Err(Error::BudgetExceeded {
                budget: "max_expanded_dim",
                required: need,
                limit: max_dim,
            });
        }
        let mut offsets = Vec::with_capacity(p.len());
        let mut acc = 0usize;
        for a in p.atoms() {
            offsets.push(acc);
            acc += a.count() as usize;
        }
        let mut targets = vec![usize::MAX; self.domain_size as usize];
        for b in &self.blocks {
            let cursor = &mut offsets[b.source_atom];
            for y in b.start as usize..(b.start + b.count) as usize {
                for _ in 0..b.per_bin as usize {
                    targets[*cursor] = y;
                    *cursor += 1;
                }
            }
        }
        if targets.contains(&usize::MAX) {
            return Err(Error::InvalidArgument(
                "map blocks do not cover the domain".into(),
            ));
        }
        DeterministicMap::new(targets, self.codomain_size as usize)
    }

    fn from_explicit(p: &Spectrum, map: &DeterministicMap) -> Self {
        let mut blocks = Vec::with_capacity(map.domain_size());
        let mut x = 0;
        for (a, atom) in p.atoms().iter().enumerate() {
            for _ in 0..atom.count() as usize {
                blocks.push(Block {
                    source_atom: a,
                    start: map.apply(x) as f64,
                    count: 1.0,
                    per_bin: 1.0,
                });
                x += 1;
            }
        }
        Self {
            domain_size: map.domain_size() as f64,
            codomain_size: map.codomain_size() as f64,
            blocks,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MapSynthesisReport {
    pub map: CompressedMap,
    /// Codomain partition in index order, with target and achieved mass per element.
    pub bins: Vec<Bin>,
    /// `sum_y |q(y) - q~(y)|`.
    pub achieved_distance: f64,
    pub target: Spectrum,
    pub pushforward: Spectrum,
}

impl MapSynthesisReport {
    fn from_bins(map: CompressedMap, bins: Vec<Bin>, target: &Spectrum) -> Result<Self> {
        let achieved_distance = bins.iter().map(|b| b.count * b.deficit().abs()).sum();
        let pushforward = Spectrum::from_log_atoms(
            bins.iter()
                .filter(|b| b.assigned > 0.0)
                .map(|b| (b.assigned.ln(), b.count)),
        )?;
        Ok(Self {
            map,
            bins,
            achieved_distance,
            target: target.clone(),
            pushforward,
        })
    }

    /// `sum_y sqrt(q(y) q~(y))` on matching labels.
    pub fn fidelity(&self) -> f64 {
        self.bins
            .iter()
            .map(|b| b.count * (b.target * b.assigned).sqrt())
            .sum()
    }
}

fn initial_bins(q: &Spectrum) -> Vec<Bin> {
    let mut start = 0.0;
    q.atoms()
        .iter()
        .map(|a| {
            let bin = Bin {
                start,
                count: a.count(),
                target: a.prob(),
                assigned: 0.0,
            };
            start += a.count();
            bin
        })
        .collect()
}

/// Slots of value at least `tau` in one bin with deficit `d`.
fn slots(d: f64, tau: f64, p: f64) -> f64 {
    if d < tau {
        0.0
    } else {
        ((d - tau) / p).floor() + 1.0
    }
}

/// Place `c` atoms of mass `p`, returning `(bin index, per-bin count)` per touched bin after
/// splitting bins so that each receives a uniform count.
fn place_run(bins: &mut Vec<Bin>, p: f64, c: f64) -> Vec<(usize, f64)> {
    if p <= 0.0 {
        let best = (0..bins.len())
            .max_by(|&i, &j| {
                bins[i]
                    .deficit()
                    .total_cmp(&bins[j].deficit())
                    .then(j.cmp(&i))
            })
            .expect("codomain is nonempty");
        let whole = bins[best].count;
        if whole > 1.0 {
            split(bins, best, 1.0);
        }
        return vec![(best, c)];
    }

    let dmax = bins
        .iter()
        .map(Bin::deficit)
        .fold(f64::NEG_INFINITY, f64::max);
    let total = |tau: f64| -> f64 {
        bins.iter()
            .map(|b| b.count * slots(b.deficit(), tau, p))
            .sum()
    };
    let mut lo = dmax - (c + 1.0) * p;
    let mut hi = dmax + p;
    for _ in 0..2200 {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if total(mid) >= c {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let above: Vec<f64> = bins.iter().map(|b| slots(b.deficit(), hi, p)).collect();
    let window: Vec<f64> = bins
        .iter()
        .zip(&above)
        .map(|(b, &a)| slots(b.deficit(), lo, p) - a)
        .collect();
    let taken: f64 = bins.iter().zip(&above).map(|(b, a)| b.count * a).sum();
    let capacity: f64 = bins.iter().zip(&window).map(|(b, w)| b.count * w).sum();
    let mut rest = (c - taken).clamp(0.0, capacity);

    let mut per_bin = above;
    let mut round = 0.0;
    while rest > 0.0 {
        let eligible: Vec<usize> = (0..bins.len()).filter(|&i| window[i] > round).collect();
        if eligible.is_empty() {
            break;
        }
        let round_capacity: f64 = eligible.iter().map(|&i| bins[i].count).sum();
        let full = (rest / round_capacity).floor();
        if full >= 1.0 {
            // Several complete rounds at once while the eligible set stays the same.
            let depth = eligible
                .iter()
                .map(|&i| window[i] - round)
                .fold(f64::INFINITY, f64::min);
            let step = full.min(depth);
            for &i in &eligible {
                per_bin[i] += step;
            }
            rest = (rest - step * round_capacity).max(0.0);
            round += step;
            continue;
        }
        for &i in &eligible {
            if rest <= 0.0 {
                break;
            }
            if bins[i].count <= rest {
                per_bin[i] += 1.0;
                rest -= bins[i].count;
            } else {
                // Only the leading `rest` elements of this bin receive the extra atom.
                split(bins, i, rest);
                per_bin.insert(i + 1, per_bin[i]);
                per_bin[i] += 1.0;
                rest = 0.0;
            }
        }
        break;
    }
    per_bin
        .into_iter()
        .enumerate()
        .filter(|&(_, k)| k > 0.0)
        .collect()
}

/// Split `bins[i]` into its first `head` elements and the remainder.
fn split(bins: &mut Vec<Bin>, i: usize, head: f64) {
    let b = bins[i];
    bins[i].count = head;
    bins.insert(
        i + 1,
        Bin {
            start: b.start + head,
            count: b.count - head,
            ..b
        },
    );
}

/// Greedy largest-deficit map from `p` onto the codomain of `q`, in compressed form.
pub fn synthesize_map(p: &Spectrum, q: &Spectrum) -> Result<MapSynthesisReport> {
    let mut bins = initial_bins(q);
    let mut blocks = Vec::new();
    for (a, atom) in p.atoms().iter().enumerate() {
        let prob = atom.prob();
        for (i, k) in place_run(&mut bins, prob, atom.count()) {
            let b = &mut bins[i];
            b.assigned += k * prob;
            blocks.push(Block {
                source_atom: a,
                start: b.start,
                count: b.count,
                per_bin: k,
            });
        }
    }
    let map = CompressedMap {
        domain_size: p.total_dim(),
        codomain_size: q.total_dim(),
        blocks,
    };
    MapSynthesisReport::from_bins(map, bins, q)
}

#[derive(PartialEq)]
struct Key(f64, Reverse<usize>);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Reference greedy on explicit vectors: returns the map and its distance.
pub fn synthesize_map_expanded(p: &[f64], q: &[f64]) -> (DeterministicMap, f64) {
    let mut assigned = vec![0.0; q.len()];
    let mut heap: BinaryHeap<Key> = q
        .iter()
        .enumerate()
        .map(|(y, &t)| Key(t, Reverse(y)))
        .collect();
    let mut targets = Vec::with_capacity(p.len());
    for &px in p {
        let Key(_, Reverse(y)) = heap.pop().expect("codomain is nonempty");
        assigned[y] += px;
        targets.push(y);
        heap.push(Key(q[y] - assigned[y], Reverse(y)));
    }
    let distance = q.iter().zip(&assigned).map(|(t, m)| (t - m).abs()).sum();
    (
        DeterministicMap::new(targets, q.len()).expect("targets index the codomain"),
        distance,
    )
}

/// Exhaustive minimum of the variational distance over all `|Y|^|X|` maps. Ties keep the
/// lexicographically first map.
pub fn brute_force_optimal(
    p: &Spectrum,
    q: &Spectrum,
    budgets: &Budgets,
) -> Result<MapSynthesisReport> {
    let maps = q.total_dim().powf(p.total_dim());
    if maps > budgets.brute_force_cap as f64 {
        return Err(Error::BudgetExceeded {
            budget: "brute_force_cap",
            required: maps,
            limit: budgets.brute_force_cap,
        });
    }
    let px = p.expand(budgets.max_expanded_dim)?;
    let qy = q.expand(budgets.max_expanded_dim)?;
    let (nx, ny) = (px.len(), qy.len());

    let mut current = vec![0usize; nx];
    let mut best = current.clone();
    let mut best_distance = f64::INFINITY;
    let mut masses = vec![0.0; ny];
    loop {
        masses.iter_mut().for_each(|m| *m = 0.0);
        for (x, &y) in current.iter().enumerate() {
            masses[y] += px[x];
        }
        let d: f64 = qy.iter().zip(&masses).map(|(t, m)| (t - m).abs()).sum();
        if d < best_distance - 1e-15 {
            best_distance = d;
            best.clone_from(&current);
        }
        // Odometer increment, last coordinate fastest.
        let mut i = nx;
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            current[i] += 1;
            if current[i] < ny {
                break;
            }
            current[i] = 0;
        }
        if current.iter().all(|&y| y == 0) {
            break;
        }
    }

    let map = DeterministicMap::new(best, ny)?;
    let mut assigned = vec![0.0; ny];
    for x in 0..nx {
        assigned[map.apply(x)] += px[x];
    }
    let bins = qy
        .iter()
        .zip(&assigned)
        .enumerate()
        .map(|(y, (&target, &assigned))| Bin {
            start: y as f64,
            count: 1.0,
            target,
            assigned,
        })
        .collect();
    MapSynthesisReport::from_bins(CompressedMap::from_explicit(p, &map), bins, q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergencePoint {
    pub n: u32,
    pub distance: f64,
}

/// Greedy distance between the generated source and target at each block length.
pub fn convergence_experiment(
    source: &SequenceModel,
    target: &SequenceModel,
    n_grid: &[u32],
    budgets: &Budgets,
) -> Result<Vec<ConvergencePoint>> {
    n_grid
        .par_iter()
        .map(|&n| {
            let p = source.generate(n, budgets)?;
            let q = target.generate(n, budgets)?;
            let report = synthesize_map(&p, &q)?;
            Ok(ConvergencePoint {
                n,
                distance: report.achieved_distance,
            })
        })
        .collect()
}

pub fn convergence_csv(points: &[ConvergencePoint]) -> String {
    let mut out = String::from("n,distance\n");
    for pt in points {
        out.push_str(&format!("{},{}\n", pt.n, pt.distance));
    }
    out
}
