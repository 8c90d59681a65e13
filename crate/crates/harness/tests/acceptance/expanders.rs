//! Expansion of the graphs the authenticated protocol builds, checked with
//! an independent bitmask counter.

use bapred::auth::expander::DEFAULT_DEGREE_CAP;
use bapred::predictions::Rational;
use bapred::protocol::cached_expander;
use bapred::ProcessId;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const EXHAUSTIVE_MAX: usize = 24;
pub const N_MAX: usize = 128;
pub const SAMPLES: usize = 100_000;

pub struct GraphCheck {
    pub n: usize,
    /// A single vertex sees at most n − 1 others, so no graph meets the
    /// bound; the complete graph is then the best possible and is required.
    pub unattainable: bool,
    pub complete: bool,
    pub exhaustive: bool,
    pub min_neighborhood: usize,
    pub need: usize,
    pub max_degree: usize,
    pub symmetric: bool,
}

impl GraphCheck {
    pub fn ok(&self) -> bool {
        let degree_ok = self.n <= DEFAULT_DEGREE_CAP + 1 || self.max_degree <= DEFAULT_DEGREE_CAP;
        if self.unattainable {
            return self.symmetric && self.complete;
        }
        self.symmetric && degree_ok && self.min_neighborhood >= self.need
    }
}

/// ⌈p/q · n⌉ for a non-negative rational p/q.
fn ceil_frac(r: Rational, n: usize) -> usize {
    let (p, q) = (*r.numer() as u128, *r.denom() as u128);
    (p * n as u128).div_ceil(q) as usize
}

fn union(masks: &[u128], members: impl Iterator<Item = usize>) -> u32 {
    members.fold(0u128, |acc, i| acc | masks[i]).count_ones()
}

pub fn check(n: usize, eps: Rational) -> GraphCheck {
    let g = cached_expander(n, eps, 0).expect("expander builds");
    let masks: Vec<u128> = (0..n)
        .map(|i| g.neighbors(ProcessId(i as u32)).iter().fold(0u128, |m, p| m | 1u128 << p.index()))
        .collect();
    let symmetric =
        (0..n).all(|i| masks[i] >> i & 1 == 0 && (0..n).all(|j| (masks[i] >> j & 1) == (masks[j] >> i & 1)));
    let max_degree = masks.iter().map(|m| m.count_ones() as usize).max().unwrap_or(0);
    let two_eps = eps * Rational::from_integer(2);
    let size = ceil_frac(two_eps, n).clamp(1, n);
    let need = ceil_frac(Rational::from_integer(1) - two_eps, n);

    let exhaustive = n <= EXHAUSTIVE_MAX;
    let min_neighborhood = if exhaustive {
        // Gosper's hack over all `size`-subsets of n bits.
        let mut best = u32::MAX;
        let mut s: u64 = (1 << size) - 1;
        while s < 1 << n {
            best = best.min(union(&masks, (0..n).filter(|&i| s >> i & 1 == 1)));
            let c = s & s.wrapping_neg();
            let r = s + c;
            s = (((r ^ s) >> 2) / c) | r;
        }
        best
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0xe7a0 ^ n as u64);
        let mut order: Vec<usize> = (0..n).collect();
        (0..SAMPLES)
            .map(|_| {
                // Partial Fisher-Yates: the first `size` slots are a uniform subset.
                for k in 0..size {
                    let j = rng.gen_range(k..n);
                    order.swap(k, j);
                }
                union(&masks, order[..size].iter().copied())
            })
            .min()
            .unwrap_or(0)
    };
    let unattainable = size == 1 && need > n - 1;
    let complete = masks.iter().all(|m| m.count_ones() as usize == n - 1);
    GraphCheck { n, unattainable, complete, exhaustive, min_neighborhood: min_neighborhood as usize, need, max_degree, symmetric }
}
