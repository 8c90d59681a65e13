//! Election contracts: exact rounds, bit counts against the closed forms,
//! and the large-group list bounds by direct set computation.

use bapred::adversary::{place_faults, strategy, PlacementRule, StrategyId};
use bapred::elections::{
    authenticated_election, candidate_cap, large_group_election, simple_election, small_group_election, ElectionOutcome,
};
use bapred::predictions::{count_errors, generate_predictions, misclassified_set, GroundTruth, Placement, PredictionMatrix, Rational};
use bapred::protocol::ProtocolId;
use bapred::sim::{run_processes, Adversary, NullAdversary, SimSetup};
use bapred::wire::Scope;
use bapred::ProcessId;
use std::collections::BTreeSet;
use std::future::Future;
use std::pin::Pin;

pub const N: usize = 64;
pub const SMALL_GROUP: usize = 8;
pub const KAPPA: u64 = 256;
/// Measured bits must lie within this factor of the closed form, both ways.
pub const BIT_FACTOR: f64 = 2.0;
pub const BOUND_NS: [usize; 2] = [3600, 4096];

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Alg {
    Simple,
    Small,
    Large,
    Authenticated,
}

impl Alg {
    pub const ALL: [Alg; 4] = [Alg::Simple, Alg::Small, Alg::Large, Alg::Authenticated];

    pub fn name(self) -> &'static str {
        match self {
            Alg::Simple => "simple",
            Alg::Small => "small_group",
            Alg::Large => "large_group",
            Alg::Authenticated => "authenticated",
        }
    }

    pub fn rounds(self) -> u64 {
        match self {
            Alg::Simple => 1,
            Alg::Small | Alg::Authenticated => 2,
            Alg::Large => 3,
        }
    }

    /// The large-group election runs on G = Π; the others on the first
    /// `SMALL_GROUP` ids.
    pub fn group(self, n: usize) -> Vec<ProcessId> {
        let len = if self == Alg::Large { n } else { SMALL_GROUP };
        ProcessId::all(len).collect()
    }

    /// Closed-form bit counts with ⌈log₂ n⌉-bit ids and κ-bit signatures.
    pub fn formula_bits(self, n: usize) -> f64 {
        let g = self.group(n).len() as f64;
        let n_f = n as f64;
        let log = (n as f64).log2().ceil();
        match self {
            Alg::Simple => n_f * n_f * g,
            Alg::Small => n_f * g * (g + log),
            Alg::Large => {
                let l = g.min(candidate_cap(n) as f64);
                n_f * g * l * log + g * g * l * log + n_f * g * log
            }
            Alg::Authenticated => 2.0 * n_f * g * KAPPA as f64,
        }
    }
}

type ElectionFuture = Pin<Box<dyn Future<Output = ElectionOutcome>>>;

fn elect(alg: Alg, ctx: bapred::sim::Ctx, group: Vec<ProcessId>, row: Vec<bool>) -> ElectionFuture {
    Box::pin(async move {
        let scope = Scope::new(0, 0);
        match alg {
            Alg::Simple => simple_election(&ctx, scope, &group, &row).await,
            Alg::Small => small_group_election(&ctx, scope, &group, &row).await,
            Alg::Large => large_group_election(&ctx, scope, &group, &row).await,
            Alg::Authenticated => authenticated_election(&ctx, scope, &group, &row).await,
        }
    })
}

pub struct ContractRun {
    pub rounds: u64,
    pub bits: u64,
    /// Every honest process elected the same honest member.
    pub common_honest: bool,
}

/// One election with perfect predictions.
pub fn run_election(alg: Alg, n: usize, faulty: BTreeSet<ProcessId>, adversary: &mut dyn Adversary, seed: u64) -> ContractRun {
    let t = (n - 1) / 3;
    let mut setup = SimSetup::new(n, t.max(faulty.len()), faulty.clone(), seed);
    setup.kappa = KAPPA as u32;
    let group = alg.group(n);
    let row: Vec<bool> = (0..n).map(|j| !faulty.contains(&ProcessId(j as u32))).collect();
    let out = run_processes(setup, adversary, |ctx| elect(alg, ctx, group.clone(), row.clone())).expect("election runs");
    let leaders: BTreeSet<Option<ProcessId>> = out.outputs.values().map(|o| o.ok()).collect();
    let common_honest = matches!(leaders.iter().collect::<Vec<_>>().as_slice(), [Some(p)] if !faulty.contains(p));
    ContractRun { rounds: out.rounds_used, bits: out.bits_sent, common_honest }
}

/// Round counts under every strategy with n/8 faults at the front.
pub fn rounds_under_attack(alg: Alg) -> Vec<(StrategyId, u64)> {
    let faulty = place_faults(N, N / 8, PlacementRule::First);
    StrategyId::ALL
        .into_iter()
        .map(|s| {
            let mut adv = strategy(s, 7);
            (s, run_election(alg, N, faulty.clone(), adv.as_mut(), 7).rounds)
        })
        .collect()
}

pub fn clean_run(alg: Alg) -> ContractRun {
    run_election(alg, N, BTreeSet::new(), &mut NullAdversary, 1)
}

// ---- large-group bounds ----

#[derive(Copy, Clone, Debug)]
pub enum ErrorPattern {
    Perfect,
    Uniform,
    /// Faulty ids marked honest by just under the misclassification count of
    /// honest rows each, shifting voters' capped windows.
    FaultyLookHonest,
    /// Honest ids inside the window marked faulty the same way.
    WindowMarkedFaulty,
}

#[derive(Copy, Clone, Debug)]
pub enum ByzVotes {
    Silent,
    /// Every Byzantine process votes for every member, to every receiver.
    StuffAll,
    /// Stuff every member for even receivers only.
    Split,
    /// Votes for candidates short of the threshold by at most f, to a
    /// rotating third of the receivers.
    Borderline,
}

pub struct BoundInstance {
    pub n: usize,
    pub f: usize,
    pub pattern: ErrorPattern,
    pub byz: ByzVotes,
    pub preconditions: bool,
    pub union: usize,
    pub intersection: usize,
    pub faulty_listed: bool,
}

pub fn union_bound(n: usize) -> usize {
    ceil_sqrt_times(35, n)
}

pub fn intersection_bound(n: usize) -> usize {
    let target = 400 * n as u64;
    let mut c = (target as f64).sqrt() as u64;
    while c * c > target {
        c -= 1;
    }
    while (c + 1) * (c + 1) <= target {
        c += 1;
    }
    c as usize
}

/// ⌈a·√n⌉ in integers.
fn ceil_sqrt_times(a: u64, n: usize) -> usize {
    let target = a * a * n as u64;
    let mut c = (target as f64).sqrt() as u64;
    while c * c < target {
        c += 1;
    }
    while c > 0 && (c - 1) * (c - 1) >= target {
        c -= 1;
    }
    c as usize
}

fn budget(n: usize, eps: Rational) -> u64 {
    // ⌊ε·n·√n⌋ with √n exact for the sizes used (3600 = 60², 4096 = 64²).
    let root = (n as f64).sqrt().round() as i64;
    assert_eq!((root * root) as usize, n);
    (eps * Rational::from_integer(n as i64 * root)).floor().to_integer() as u64
}

fn predictions(truth: &GroundTruth, pattern: ErrorPattern, b: u64) -> PredictionMatrix {
    let n = truth.n();
    let honest: Vec<ProcessId> = truth.honest().collect();
    let per = bapred::predictions::misclassification_cost(n, truth.f()).saturating_sub(1);
    let mut m = PredictionMatrix::perfect(truth);
    let targets: Vec<ProcessId> = match pattern {
        ErrorPattern::Perfect => return m,
        ErrorPattern::Uniform => return generate_predictions(truth, b, &Placement::Uniform, 5).expect("budget fits"),
        ErrorPattern::FaultyLookHonest => truth.faulty().iter().copied().collect(),
        ErrorPattern::WindowMarkedFaulty => honest.iter().copied().take(candidate_cap(n)).collect(),
    };
    let mut left = b;
    let mut offset = 0usize;
    for j in targets {
        if left == 0 || per == 0 {
            break;
        }
        let take = (per as u64).min(left) as usize;
        for r in 0..take {
            m.flip(honest[(offset + r) % honest.len()], j);
        }
        // Rotate so that different rows carry different numbers of errors.
        offset = (offset + take / 2 + 1) % honest.len();
        left -= take as u64;
    }
    m
}

/// Per-candidate Byzantine vote counts, one vector per class of receivers.
/// Every class contains honest receivers.
fn byz_classes(byz: ByzVotes, n: usize, f: usize, honest_counts: &[u32]) -> Vec<Vec<u32>> {
    let fu = f as u32;
    match byz {
        ByzVotes::Silent => vec![vec![0; n]],
        ByzVotes::StuffAll => vec![vec![fu; n]],
        ByzVotes::Split => vec![vec![fu; n], vec![0; n]],
        ByzVotes::Borderline => (0..3)
            .map(|class| {
                (0..n)
                    .map(|p| {
                        let c = honest_counts[p] as usize;
                        let short = 2 * c <= n && 2 * (c + f) > n;
                        if short && p % 3 == class {
                            fu
                        } else {
                            0
                        }
                    })
                    .collect()
            })
            .collect(),
    }
}

pub fn bound_instance(n: usize, f: usize, pattern: ErrorPattern, byz: ByzVotes) -> BoundInstance {
    let eps = ProtocolId::UnauthSubcubic.default_eps();
    let faulty = place_faults(n, f, PlacementRule::First);
    let truth = GroundTruth::new(n, f, faulty.clone()).expect("valid truth");
    let b = budget(n, eps);
    let matrix = predictions(&truth, pattern, b);
    let errors = count_errors(&matrix, &truth);
    let honest_majority = 2 * (n - f) > n;
    let preconditions = misclassified_set(&matrix, &truth).is_empty()
        && errors <= b
        && honest_majority
        && Rational::from_integer(f as i64) < (Rational::new(1, 2) - eps) * Rational::from_integer(n as i64);

    // Honest voters send their first `cap` predicted-honest members of G = Π.
    let cap = candidate_cap(n);
    let mut counts = vec![0u32; n];
    for v in truth.honest() {
        let mut picked = 0;
        for p in ProcessId::all(n) {
            if picked == cap {
                break;
            }
            if matrix.get(v, p) {
                counts[p.index()] += 1;
                picked += 1;
            }
        }
    }
    let mut union: BTreeSet<usize> = BTreeSet::new();
    let mut inter: Option<BTreeSet<usize>> = None;
    for extra in byz_classes(byz, n, f, &counts) {
        let list: BTreeSet<usize> = (0..n).filter(|&p| 2 * (counts[p] + extra[p]) as usize > n).take(cap).collect();
        union.extend(&list);
        inter = Some(match inter {
            None => list,
            Some(acc) => acc.intersection(&list).copied().collect(),
        });
    }
    let inter = inter.unwrap_or_default();
    let faulty_listed = union.iter().any(|&p| faulty.contains(&ProcessId(p as u32)));
    BoundInstance { n, f, pattern, byz, preconditions, union: union.len(), intersection: inter.len(), faulty_listed }
}

pub fn bound_instances() -> Vec<BoundInstance> {
    let eps = ProtocolId::UnauthSubcubic.default_eps();
    let mut out = Vec::new();
    for n in BOUND_NS {
        let f_max = ((Rational::new(1, 2) - eps) * Rational::from_integer(n as i64)).ceil().to_integer() as usize - 1;
        for f in [0, n / 8, f_max] {
            for pattern in [ErrorPattern::Perfect, ErrorPattern::Uniform, ErrorPattern::FaultyLookHonest, ErrorPattern::WindowMarkedFaulty] {
                for byz in [ByzVotes::Silent, ByzVotes::StuffAll, ByzVotes::Split, ByzVotes::Borderline] {
                    out.push(bound_instance(n, f, pattern, byz));
                }
            }
        }
    }
    out
}
