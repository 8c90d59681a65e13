//! Constant-degree expanders for forwarding leader messages.
//!
//! Candidates are unions of random Hamiltonian cycles, then checked: every
//! vertex set of size ⌈2εn⌉ must have an open neighbourhood of at least
//! ⌈(1−2ε)n⌉ vertices.

use crate::predictions::Rational;
use crate::sim::{stream_rng, Stream};
use crate::types::ProcessId;
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Largest n checked exhaustively.
pub const EXHAUSTIVE_MAX_N: usize = 24;
/// Subsets drawn when the check is sampled.
pub const SAMPLED_SUBSETS: usize = 100_000;
/// Swap-descent starts run alongside sampling.
pub const DESCENT_RESTARTS: usize = 24;
pub const DEFAULT_DEGREE_CAP: usize = 16;
const RETRIES_PER_DEGREE: u64 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpanderError {
    #[error("epsilon must lie strictly between 0 and 1/2")]
    BadEpsilon,
    #[error("no graph of degree at most {cap} passed the expansion check for n = {n}")]
    ConstructionFailed { n: usize, cap: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpanderGraph {
    n: usize,
    eps: Rational,
    adjacency: Vec<Vec<ProcessId>>,
}

/// Set sizes the expansion property talks about: (⌈2εn⌉, ⌈(1−2ε)n⌉).
pub fn expansion_sizes(n: usize, eps: Rational) -> (usize, usize) {
    let n_r = Rational::from_integer(n as i64);
    let two_eps = Rational::from_integer(2) * eps;
    let set = (two_eps * n_r).ceil().to_integer().max(1) as usize;
    let need = ((Rational::from_integer(1) - two_eps) * n_r).ceil().to_integer().max(0) as usize;
    (set.min(n), need)
}

#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn or(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
}

impl ExpanderGraph {
    /// Build from adjacency lists; edges are symmetrised, loops and
    /// duplicates dropped.
    pub fn from_edges(n: usize, eps: Rational, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for (a, b) in edges {
            if a != b {
                adjacency[a].push(ProcessId(b as u32));
                adjacency[b].push(ProcessId(a as u32));
            }
        }
        for list in &mut adjacency {
            list.sort();
            list.dedup();
        }
        ExpanderGraph { n, eps, adjacency }
    }

    pub fn complete(n: usize, eps: Rational) -> Self {
        Self::from_edges(n, eps, (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eps(&self) -> Rational {
        self.eps
    }

    pub fn neighbors(&self, p: ProcessId) -> &[ProcessId] {
        &self.adjacency[p.index()]
    }

    pub fn is_neighbor(&self, a: ProcessId, b: ProcessId) -> bool {
        self.adjacency[a.index()].binary_search(&b).is_ok()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn is_complete(&self) -> bool {
        self.adjacency.iter().all(|a| a.len() + 1 == self.n)
    }

    fn masks(&self) -> Vec<Bits> {
        self.adjacency
            .iter()
            .map(|list| {
                let mut b = Bits::new(self.n);
                for p in list {
                    b.set(p.index());
                }
                b
            })
            .collect()
    }

    /// Smallest open neighbourhood over every subset of the checked size.
    /// Exponential; meant for small n.
    pub fn min_neighborhood_exhaustive(&self) -> usize {
        let (size, _) = expansion_sizes(self.n, self.eps);
        let masks = self.masks();
        let mut best = usize::MAX;
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let mut acc = Bits::new(self.n);
            for &i in &idx {
                acc.or(&masks[i]);
            }
            best = best.min(acc.count());
            // Next combination in lexicographic order.
            let Some(pos) = (0..size).rev().find(|&k| idx[k] < self.n - size + k) else { break };
            idx[pos] += 1;
            for k in pos + 1..size {
                idx[k] = idx[k - 1] + 1;
            }
        }
        best
    }

    /// Smallest open neighbourhood over `samples` random subsets.
    pub fn min_neighborhood_sampled(&self, rng: &mut ChaCha8Rng, samples: usize) -> usize {
        let (size, _) = expansion_sizes(self.n, self.eps);
        let masks = self.masks();
        (0..samples)
            .map(|_| {
                let mut acc = Bits::new(self.n);
                for i in sample(rng, self.n, size) {
                    acc.or(&masks[i]);
                }
                acc.count()
            })
            .min()
            .unwrap_or(usize::MAX)
    }

    /// Smallest open neighbourhood reached by swap descent: from a random
    /// subset, exchange a member for a non-member while that shrinks the
    /// neighbourhood. Finds bad sets that uniform sampling misses.
    pub fn min_neighborhood_descent(&self, rng: &mut ChaCha8Rng, restarts: usize) -> usize {
        let (size, _) = expansion_sizes(self.n, self.eps);
        let n = self.n;
        let mut best = usize::MAX;
        for _ in 0..restarts {
            let mut member = vec![false; n];
            // cover[v]: members adjacent to v.
            let mut cover = vec![0u32; n];
            for i in sample(rng, n, size) {
                member[i] = true;
                for p in &self.adjacency[i] {
                    cover[p.index()] += 1;
                }
            }
            let mut size_now = cover.iter().filter(|&&c| c > 0).count();
            loop {
                let mut improved = false;
                let members: Vec<usize> = (0..n).filter(|&u| member[u]).collect();
                for u in members {
                    for p in &self.adjacency[u] {
                        cover[p.index()] -= 1;
                    }
                    let lost = self.adjacency[u].iter().filter(|p| cover[p.index()] == 0).count();
                    let pick = (0..n)
                        .filter(|&v| !member[v] && v != u)
                        .map(|v| (self.adjacency[v].iter().filter(|p| cover[p.index()] == 0).count(), v))
                        .min();
                    match pick {
                        Some((gained, v)) if gained < lost => {
                            member[u] = false;
                            member[v] = true;
                            for p in &self.adjacency[v] {
                                cover[p.index()] += 1;
                            }
                            size_now = size_now - lost + gained;
                            improved = true;
                        }
                        _ => {
                            for p in &self.adjacency[u] {
                                cover[p.index()] += 1;
                            }
                        }
                    }
                }
                if !improved {
                    break;
                }
            }
            best = best.min(size_now);
        }
        best
    }

    /// Expansion check: exhaustive up to [`EXHAUSTIVE_MAX_N`]; beyond that,
    /// random sampling plus swap descent.
    pub fn check_expansion(&self, seed: u64) -> bool {
        let (_, need) = expansion_sizes(self.n, self.eps);
        if self.n <= EXHAUSTIVE_MAX_N {
            return self.min_neighborhood_exhaustive() >= need;
        }
        let mut rng = stream_rng(seed, Stream::Expander, self.n as u64, u64::MAX);
        self.min_neighborhood_descent(&mut rng, DESCENT_RESTARTS) >= need
            && self.min_neighborhood_sampled(&mut rng, SAMPLED_SUBSETS) >= need
    }
}

/// Union of `degree / 2` random Hamiltonian cycles.
fn random_cycles(n: usize, eps: Rational, degree: usize, rng: &mut ChaCha8Rng) -> ExpanderGraph {
    let mut edges = Vec::with_capacity(n * degree / 2);
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..degree / 2 {
        order.shuffle(rng);
        edges.extend((0..n).map(|i| (order[i], order[(i + 1) % n])));
    }
    ExpanderGraph::from_edges(n, eps, edges)
}

/// Deterministic in `(n, eps, seed)`. Tries even degrees from 4 up to
/// `degree_cap`, a few candidates each; systems too small for a sparse graph
/// get the complete graph.
pub fn build_expander(n: usize, eps: Rational, seed: u64, degree_cap: usize) -> Result<ExpanderGraph, ExpanderError> {
    let zero = Rational::from_integer(0);
    if eps <= zero || eps >= Rational::new(1, 2) {
        return Err(ExpanderError::BadEpsilon);
    }
    if n <= 1 || n <= degree_cap.max(4) + 1 {
        return Ok(ExpanderGraph::complete(n, eps));
    }
    for degree in (4..=degree_cap).step_by(2) {
        for attempt in 0..RETRIES_PER_DEGREE {
            let mut rng = stream_rng(seed, Stream::Expander, n as u64, (degree as u64) << 32 | attempt);
            let g = random_cycles(n, eps, degree, &mut rng);
            if g.check_expansion(seed) {
                return Ok(g);
            }
        }
    }
    Err(ExpanderError::ConstructionFailed { n, cap: degree_cap })
}
