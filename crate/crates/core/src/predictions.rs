//! Classification predictions: matrices, error counting, misclassification,
//! m-grouping, c-good groups and the good-group lemma checkers.

use crate::sim::{stream_rng, Stream};
use crate::types::ProcessId;
use num_rational::Ratio;
use rand::seq::{index, SliceRandom};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use thiserror::Error;

pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PredictionError {
    #[error("m={m} is not in 1..={n}")]
    InvalidGrouping { n: usize, m: usize },
    #[error("budget B={budget} exceeds the {max} bits held by honest rows")]
    InfeasibleBudget { budget: u64, max: u64 },
    #[error("no integer m satisfies c1*k < m < c2*n for n={n}, k={k}")]
    PreconditionUnsatisfiable { n: usize, k: usize },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("invalid ground truth: {0}")]
    InvalidTruth(String),
}

/// Parse `a/b` or a decimal such as `0.25`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let (a, b): (i64, i64) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
        return (b != 0).then(|| Ratio::new(a, b));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 12 || !frac.bytes().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let den = 10i64.pow(frac.len() as u32);
    let neg = int.starts_with('-');
    let int: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse().ok()? };
    let frac: i64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    let mag = int.abs().checked_mul(den)?.checked_add(frac)?;
    Some(Ratio::new(if neg { -mag } else { mag }, den))
}

fn floor_usize(r: Rational) -> usize {
    r.floor().to_integer().max(0) as usize
}

fn ceil_usize(r: Rational) -> usize {
    r.ceil().to_integer().max(0) as usize
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundTruth {
    n: usize,
    t: usize,
    faulty: BTreeSet<ProcessId>,
}

impl GroundTruth {
    pub fn new(n: usize, t: usize, faulty: BTreeSet<ProcessId>) -> Result<Self, PredictionError> {
        if t >= n.max(1) {
            return Err(PredictionError::InvalidTruth(format!("t={t} must be below n={n}")));
        }
        if faulty.len() > t {
            return Err(PredictionError::InvalidTruth(format!("{} faults exceed t={t}", faulty.len())));
        }
        if faulty.iter().any(|p| p.index() >= n) {
            return Err(PredictionError::InvalidTruth("faulty id out of range".into()));
        }
        Ok(GroundTruth { n, t, faulty })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn f(&self) -> usize {
        self.faulty.len()
    }

    pub fn faulty(&self) -> &BTreeSet<ProcessId> {
        &self.faulty
    }

    pub fn is_faulty(&self, p: ProcessId) -> bool {
        self.faulty.contains(&p)
    }

    pub fn honest(&self) -> impl Iterator<Item = ProcessId> + '_ {
        ProcessId::all(self.n).filter(|p| !self.faulty.contains(p))
    }
}

/// Row i is aᵢ; bit j set means pᵢ predicts pⱼ honest.
#[derive(Clone, PartialEq, Eq)]
pub struct PredictionMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl std::fmt::Debug for PredictionMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PredictionMatrix(n={})", self.n)
    }
}

impl PredictionMatrix {
    /// Every process predicts everyone Byzantine.
    pub fn zeros(n: usize) -> Self {
        let words = n.div_ceil(64);
        PredictionMatrix { n, words, bits: vec![0; words * n] }
    }

    /// Every row equals the ground truth.
    pub fn perfect(truth: &GroundTruth) -> Self {
        let mut m = Self::zeros(truth.n);
        for i in 0..truth.n {
            for j in truth.honest() {
                m.set(ProcessId(i as u32), j, true);
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: ProcessId, j: ProcessId) -> bool {
        let (w, b) = (j.index() / 64, j.index() % 64);
        self.bits[i.index() * self.words + w] >> b & 1 == 1
    }

    pub fn set(&mut self, i: ProcessId, j: ProcessId, honest: bool) {
        let (w, b) = (j.index() / 64, j.index() % 64);
        let word = &mut self.bits[i.index() * self.words + w];
        if honest {
            *word |= 1 << b;
        } else {
            *word &= !(1 << b);
        }
    }

    pub fn flip(&mut self, i: ProcessId, j: ProcessId) {
        let v = self.get(i, j);
        self.set(i, j, !v);
    }

    /// Row i restricted to `group`, packed LSB-first.
    pub fn row_bits(&self, i: ProcessId, group: &[ProcessId]) -> Vec<u8> {
        crate::wire::pack_bits(group.iter().map(|&j| self.get(i, j)), group.len())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.n * (self.n + 6));
        for i in ProcessId::all(self.n) {
            let _ = write!(s, "{} ", i.0 + 1);
            for j in ProcessId::all(self.n) {
                s.push(if self.get(i, j) { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }

    /// Inverse of [`to_text`](Self::to_text). Blank lines and `#` comments are
    /// skipped; every row 1..=n must appear exactly once with n bits.
    pub fn parse_text(text: &str) -> Result<Self, PredictionError> {
        let err = |line: usize, reason: &str| PredictionError::Parse { line, reason: reason.into() };
        let rows: Vec<(usize, &str, &str)> = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .map(|(k, l)| {
                let (idx, bits) = l.split_once(char::is_whitespace).ok_or_else(|| err(k, "expected `<row> <bits>`"))?;
                Ok((k, idx, bits.trim()))
            })
            .collect::<Result<_, _>>()?;
        let n = rows.len();
        if n == 0 {
            return Err(err(0, "no rows"));
        }
        if n > 1 << 16 {
            return Err(err(0, "too many rows"));
        }
        let mut m = Self::zeros(n);
        let mut seen = vec![false; n];
        for (line, idx, bits) in rows {
            let i: usize = idx.parse().map_err(|_| err(line, "row index is not a number"))?;
            if i == 0 || i > n {
                return Err(err(line, "row index out of range"));
            }
            if std::mem::replace(&mut seen[i - 1], true) {
                return Err(err(line, "duplicate row"));
            }
            if bits.len() != n {
                return Err(err(line, "row length differs from row count"));
            }
            for (j, c) in bits.bytes().enumerate() {
                match c {
                    b'1' => m.set(ProcessId(i as u32 - 1), ProcessId(j as u32), true),
                    b'0' => {}
                    _ => return Err(err(line, "row contains a character other than 0/1")),
                }
            }
        }
        Ok(m)
    }

    /// Honest rows predicting each column honest.
    fn honest_votes(&self, truth: &GroundTruth) -> Vec<usize> {
        let mut votes = vec![0usize; self.n];
        for i in truth.honest() {
            let row = &self.bits[i.index() * self.words..(i.index() + 1) * self.words];
            for (w, &word) in row.iter().enumerate() {
                let mut x = word;
                while x != 0 {
                    let b = x.trailing_zeros() as usize;
                    votes[w * 64 + b] += 1;
                    x &= x - 1;
                }
            }
        }
        votes
    }
}

/// Wrong bits in honest rows.
pub fn count_errors(matrix: &PredictionMatrix, truth: &GroundTruth) -> u64 {
    let votes = matrix.honest_votes(truth);
    let honest_rows = (truth.n - truth.f()) as u64;
    ProcessId::all(truth.n)
        .map(|j| {
            let v = votes[j.index()] as u64;
            if truth.is_faulty(j) {
                v
            } else {
                honest_rows - v
            }
        })
        .sum()
}

/// Honest rows needed to misclassify one process: a count c with
/// c ≥ n/2 − f, i.e. 2c ≥ n − 2f. The same threshold applies to Byzantine
/// processes predicted honest and honest processes predicted Byzantine.
pub fn misclassification_cost(n: usize, f: usize) -> usize {
    (n.saturating_sub(2 * f)).div_ceil(2)
}

pub fn misclassified_set(matrix: &PredictionMatrix, truth: &GroundTruth) -> BTreeSet<ProcessId> {
    let votes = matrix.honest_votes(truth);
    let (n, f) = (truth.n as i64, truth.f() as i64);
    let honest_rows = n - f;
    ProcessId::all(truth.n)
        .filter(|&j| {
            let wrong = if truth.is_faulty(j) { votes[j.index()] as i64 } else { honest_rows - votes[j.index()] as i64 };
            // wrong ≥ n/2 − f (Byzantine) or wrong ≥ n − f − n/2 (honest); both are 2·wrong ≥ n − 2f.
            2 * wrong >= n - 2 * f
        })
        .collect()
}

/// Disjoint contiguous groups covering p1..pn.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupAssignment {
    pub groups: Vec<Vec<ProcessId>>,
}

impl GroupAssignment {
    pub fn m(&self) -> usize {
        self.groups.len()
    }
}

/// Group j (0-based) is the j-th contiguous slice; the first n mod m groups
/// get ⌈n/m⌉ members.
pub fn m_grouping(n: usize, m: usize) -> Result<GroupAssignment, PredictionError> {
    if m == 0 || m > n {
        return Err(PredictionError::InvalidGrouping { n, m });
    }
    let (base, extra) = (n / m, n % m);
    let mut start = 0u32;
    let groups = (0..m)
        .map(|j| {
            let len = (base + (j < extra) as usize) as u32;
            let g = (start..start + len).map(ProcessId).collect();
            start += len;
            g
        })
        .collect();
    Ok(GroupAssignment { groups })
}

pub fn is_c_good_with(group: &[ProcessId], c: Rational, misclassified: &BTreeSet<ProcessId>, truth: &GroundTruth) -> bool {
    let byzantine = group.iter().filter(|p| truth.is_faulty(**p)).count();
    let limit = ceil_usize(c * Rational::from_integer(group.len() as i64));
    group.iter().all(|p| !misclassified.contains(p)) && byzantine < limit
}

pub fn is_c_good(group: &[ProcessId], c: Rational, matrix: &PredictionMatrix, truth: &GroundTruth) -> bool {
    is_c_good_with(group, c, &misclassified_set(matrix, truth), truth)
}

/// The three good-group lemmas.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum GoodGroupLemma {
    /// f < (1/3 − ε)n ⇒ more than 2m/3 groups are 1-good.
    OneGoodTwoThirds,
    /// f < (1/6 − ε)n ⇒ more than 2m/3 groups are ½-good.
    HalfGoodTwoThirds,
    /// f < (1/2 − ε)n ⇒ at least one group is 1-good.
    OneGoodExists,
}

impl GoodGroupLemma {
    pub const ALL: [GoodGroupLemma; 3] =
        [GoodGroupLemma::OneGoodTwoThirds, GoodGroupLemma::HalfGoodTwoThirds, GoodGroupLemma::OneGoodExists];

    pub fn name(self) -> &'static str {
        match self {
            GoodGroupLemma::OneGoodTwoThirds => "one_good_23",
            GoodGroupLemma::HalfGoodTwoThirds => "half_good_23",
            GoodGroupLemma::OneGoodExists => "one_good_exists",
        }
    }

    /// Faults must stay below `fault_fraction(ε)·n`.
    pub fn fault_fraction(self, eps: Rational) -> Rational {
        let base = match self {
            GoodGroupLemma::OneGoodTwoThirds => Ratio::new(1, 3),
            GoodGroupLemma::HalfGoodTwoThirds => Ratio::new(1, 6),
            GoodGroupLemma::OneGoodExists => Ratio::new(1, 2),
        };
        base - eps
    }

    pub fn goodness(self) -> Rational {
        match self {
            GoodGroupLemma::HalfGoodTwoThirds => Ratio::new(1, 2),
            _ => Ratio::from_integer(1),
        }
    }

    /// (c₁, c₂) with c₁k < m < c₂n.
    pub fn constants(self, eps: Rational) -> (Rational, Rational) {
        let one = Rational::from_integer(1);
        match self {
            GoodGroupLemma::OneGoodTwoThirds => (Rational::from_integer(2) / eps, eps / (Ratio::new(2, 3) - eps)),
            GoodGroupLemma::HalfGoodTwoThirds => (one / eps, eps / (Ratio::new(1, 3) - eps)),
            GoodGroupLemma::OneGoodExists => (Rational::from_integer(2) / eps, eps / (one - eps)),
        }
    }

    pub fn eps_in_range(self, eps: Rational) -> bool {
        eps > Rational::from_integer(0) && self.fault_fraction(eps) > Rational::from_integer(0)
    }

    /// Integer window (lo, hi) of admissible m, inclusive. Empty if lo > hi.
    pub fn m_window(self, eps: Rational, n: usize, k: usize) -> (usize, usize) {
        let (c1, c2) = self.constants(eps);
        let lo = floor_usize(c1 * Rational::from_integer(k as i64)) + 1;
        let hi = ceil_usize(c2 * Rational::from_integer(n as i64)).saturating_sub(1).min(n);
        (lo, hi)
    }

    pub fn resilience_ok(self, eps: Rational, n: usize, f: usize) -> bool {
        Rational::from_integer(f as i64) < self.fault_fraction(eps) * Rational::from_integer(n as i64)
    }

    /// Does `good` groups out of `m` meet the lemma's conclusion?
    pub fn bound_met(self, good: usize, m: usize) -> bool {
        match self {
            GoodGroupLemma::OneGoodExists => good >= 1,
            _ => 3 * good > 2 * m,
        }
    }
}

/// Number of groups for a phase with estimate `k_hat`.
///
/// Targets ⌊c₁·k̂⌋ + 1 and caps at the largest integer below c₂·n (and at n).
/// Returns `None` when no positive m fits under the cap.
pub fn choose_group_count(lemma: GoodGroupLemma, eps: Rational, n: usize, k_hat: usize) -> Option<usize> {
    let (lo, hi) = lemma.m_window(eps, n, k_hat);
    let m = lo.min(hi);
    (m >= 1).then_some(m)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaReport {
    pub lemma: GoodGroupLemma,
    pub n: usize,
    pub f: usize,
    pub k: usize,
    pub m: usize,
    /// Resilience bound and c₁k < m < c₂n both satisfied.
    pub preconditions_met: bool,
    pub good_count: usize,
    /// Conclusion satisfied by the counted groups.
    pub bound_met: bool,
    /// More than m/2 groups good; the third lemma's proof gives this.
    pub majority_good: bool,
    /// `bound_met`, or vacuously true outside the preconditions.
    pub holds: bool,
}

/// Count good groups by brute force and compare with the lemma's conclusion.
pub fn check_good_group_lemma(
    lemma: GoodGroupLemma,
    eps: Rational,
    matrix: &PredictionMatrix,
    truth: &GroundTruth,
    grouping: &GroupAssignment,
) -> Result<LemmaReport, PredictionError> {
    let misclassified = misclassified_set(matrix, truth);
    check_good_group_lemma_with(lemma, eps, &misclassified, truth, grouping)
}

pub fn check_good_group_lemma_with(
    lemma: GoodGroupLemma,
    eps: Rational,
    misclassified: &BTreeSet<ProcessId>,
    truth: &GroundTruth,
    grouping: &GroupAssignment,
) -> Result<LemmaReport, PredictionError> {
    let (n, f, k, m) = (truth.n, truth.f(), misclassified.len(), grouping.m());
    let (lo, hi) = lemma.m_window(eps, n, k);
    if !lemma.eps_in_range(eps) || lo > hi {
        return Err(PredictionError::PreconditionUnsatisfiable { n, k });
    }
    let preconditions_met = lemma.resilience_ok(eps, n, f) && (lo..=hi).contains(&m);
    let c = lemma.goodness();
    let good_count = grouping.groups.iter().filter(|g| is_c_good_with(g, c, misclassified, truth)).count();
    let bound_met = lemma.bound_met(good_count, m);
    Ok(LemmaReport {
        lemma,
        n,
        f,
        k,
        m,
        preconditions_met,
        good_count,
        bound_met,
        majority_good: 2 * good_count > m,
        holds: bound_met || !preconditions_met,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Placement {
    /// B distinct wrong bits chosen uniformly over honest rows.
    Uniform,
    /// Wrong bits fill the listed columns first, in order, then spill uniformly.
    ConcentratedOnTargets(Vec<ProcessId>),
    /// Spend the budget misclassifying as many processes as possible.
    AdversarialMisclassify,
}

impl Placement {
    pub fn name(&self) -> &'static str {
        match self {
            Placement::Uniform => "uniform",
            Placement::ConcentratedOnTargets(_) => "concentrated_on_targets",
            Placement::AdversarialMisclassify => "adversarial_misclassify",
        }
    }
}

/// Indices 0..n in van der Corput order, so every prefix is spread evenly over
/// the id range and lands in distinct contiguous groups.
pub fn spread_order(n: usize) -> Vec<usize> {
    let bits = crate::types::ceil_log2(n.max(1));
    (0..1usize << bits)
        .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
        .filter(|&i| i < n)
        .collect()
}

/// A matrix with exactly `budget` wrong bits in honest rows.
pub fn generate_predictions(
    truth: &GroundTruth,
    budget: u64,
    placement: &Placement,
    seed: u64,
) -> Result<PredictionMatrix, PredictionError> {
    let n = truth.n;
    let honest: Vec<ProcessId> = truth.honest().collect();
    let max = (honest.len() * n) as u64;
    if budget > max {
        return Err(PredictionError::InfeasibleBudget { budget, max });
    }
    let mut rng = stream_rng(seed, Stream::Predictions, budget, 0);
    let mut m = PredictionMatrix::perfect(truth);
    let mut flipped = vec![false; honest.len() * n];
    let mut remaining = budget;

    let targets: Vec<ProcessId> = match placement {
        Placement::Uniform => Vec::new(),
        Placement::ConcentratedOnTargets(t) => t.clone(),
        Placement::AdversarialMisclassify => {
            let order = spread_order(n);
            let (h, b): (Vec<usize>, Vec<usize>) = order.into_iter().partition(|&j| !truth.is_faulty(ProcessId(j as u32)));
            h.into_iter().chain(b).map(|j| ProcessId(j as u32)).collect()
        }
    };
    let per_target = match placement {
        Placement::AdversarialMisclassify => misclassification_cost(n, truth.f()).max(1),
        _ => honest.len(),
    };
    let mut rows: Vec<usize> = (0..honest.len()).collect();
    for j in targets {
        if remaining == 0 {
            break;
        }
        if j.index() >= n {
            continue;
        }
        rows.shuffle(&mut rng);
        let free: Vec<usize> = rows.iter().copied().filter(|&r| !flipped[r * n + j.index()]).collect();
        let take = (per_target.min(free.len()) as u64).min(remaining) as usize;
        for &r in &free[..take] {
            flipped[r * n + j.index()] = true;
            m.flip(honest[r], j);
        }
        remaining -= take as u64;
    }
    if remaining > 0 {
        let free: Vec<u32> = (0..flipped.len() as u32).filter(|&c| !flipped[c as usize]).collect();
        for pick in index::sample(&mut rng, free.len(), remaining as usize) {
            let c = free[pick] as usize;
            m.flip(honest[c / n], ProcessId((c % n) as u32));
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn truth(n: usize, t: usize, faulty: &[u32]) -> GroundTruth {
        GroundTruth::new(n, t, faulty.iter().map(|&i| ProcessId(i)).collect()).unwrap()
    }

    #[test]
    fn error_count_examples() {
        let tr = truth(3, 1, &[2]);
        let mut m = PredictionMatrix::perfect(&tr);
        assert_eq!(count_errors(&m, &tr), 0);
        m.set(ProcessId(0), ProcessId(2), true);
        assert_eq!(count_errors(&m, &tr), 1);
        for j in 0..3 {
            m.flip(ProcessId(2), ProcessId(j));
        }
        assert_eq!(count_errors(&m, &tr), 1, "Byzantine rows never count");
    }

    #[test]
    fn misclassification_threshold_is_exact() {
        // n=4, f=1: n/2 − f = 1, so a single honest row suffices for p4.
        let tr = truth(4, 1, &[3]);
        let mut m = PredictionMatrix::perfect(&tr);
        assert!(misclassified_set(&m, &tr).is_empty());
        m.set(ProcessId(0), ProcessId(3), true);
        assert_eq!(misclassified_set(&m, &tr), [ProcessId(3)].into());
        // Honest p1 predicted Byzantine by every honest row.
        let mut m = PredictionMatrix::perfect(&tr);
        for i in 0..3 {
            m.set(ProcessId(i), ProcessId(0), false);
        }
        assert!(misclassified_set(&m, &tr).contains(&ProcessId(0)));
        // Odd n: n=5, f=1 → 2c ≥ 3 needs c = 2.
        let tr = truth(5, 1, &[4]);
        let mut m = PredictionMatrix::perfect(&tr);
        m.set(ProcessId(0), ProcessId(4), true);
        assert!(misclassified_set(&m, &tr).is_empty());
        m.set(ProcessId(1), ProcessId(4), true);
        assert_eq!(misclassified_set(&m, &tr), [ProcessId(4)].into());
    }

    #[test]
    fn grouping_examples() {
        let sizes = |n, m| m_grouping(n, m).unwrap().groups.iter().map(Vec::len).collect::<Vec<_>>();
        assert_eq!(sizes(10, 3), vec![4, 3, 3]);
        assert_eq!(m_grouping(10, 3).unwrap().groups[0], (0..4).map(ProcessId).collect::<Vec<_>>());
        assert_eq!(sizes(7, 7), vec![1; 7]);
        assert_eq!(sizes(7, 1), vec![7]);
        assert_eq!(m_grouping(3, 4), Err(PredictionError::InvalidGrouping { n: 3, m: 4 }));
        assert!(m_grouping(3, 0).is_err());
    }

    #[test]
    fn c_good_examples() {
        let tr = truth(8, 2, &[0, 1]);
        let m = PredictionMatrix::perfect(&tr);
        let g: Vec<ProcessId> = (0..4).map(ProcessId).collect();
        assert!(!is_c_good(&g, Ratio::new(1, 2), &m, &tr));
        assert!(is_c_good(&g, Ratio::from_integer(1), &m, &tr));
        let honest: Vec<ProcessId> = (4..8).map(ProcessId).collect();
        assert!(is_c_good(&honest, Ratio::new(1, 100), &m, &tr));
    }

    #[test]
    fn lemma_constants_match_proofs() {
        let e = Ratio::new(1, 12);
        assert_eq!(GoodGroupLemma::OneGoodTwoThirds.constants(e), (Ratio::from(24), Ratio::new(1, 7)));
        let e = Ratio::new(1, 24);
        assert_eq!(GoodGroupLemma::HalfGoodTwoThirds.constants(e), (Ratio::from(24), Ratio::new(1, 7)));
        let e = Ratio::new(1, 6);
        assert_eq!(GoodGroupLemma::OneGoodExists.constants(e), (Ratio::from(12), Ratio::new(1, 5)));
    }

    #[test]
    fn group_count_caps_below_c2n() {
        let e = Ratio::new(1, 12);
        assert_eq!(choose_group_count(GoodGroupLemma::OneGoodTwoThirds, e, 96, 1), Some(13));
        assert_eq!(choose_group_count(GoodGroupLemma::OneGoodTwoThirds, e, 7, 1), None);
        assert_eq!(choose_group_count(GoodGroupLemma::OneGoodTwoThirds, e, 1000, 1), Some(25));
        assert_eq!(choose_group_count(GoodGroupLemma::OneGoodExists, Ratio::new(1, 6), 64, 1), Some(12));
    }

    #[test]
    fn precondition_outside_resilience_is_not_failure() {
        let e = Ratio::new(1, 12);
        let n = 120;
        let f = 31; // (1/3 − 1/12)·120 = 30
        let tr = truth(n, 40, &(0..f).collect::<Vec<_>>());
        let m = PredictionMatrix::perfect(&tr);
        let r = check_good_group_lemma(GoodGroupLemma::OneGoodTwoThirds, e, &m, &tr, &m_grouping(n, 10).unwrap()).unwrap();
        assert!(!r.preconditions_met);
        assert!(r.holds);
    }

    #[test]
    fn text_round_trip_and_errors() {
        let tr = truth(5, 1, &[2]);
        let m = generate_predictions(&tr, 7, &Placement::Uniform, 3).unwrap();
        assert_eq!(PredictionMatrix::parse_text(&m.to_text()).unwrap(), m);
        assert!(PredictionMatrix::parse_text("1 01\n1 10\n").is_err());
        assert!(PredictionMatrix::parse_text("1 012\n2 000\n3 000\n").is_err());
        assert!(PredictionMatrix::parse_text("").is_err());
        assert!(PredictionMatrix::parse_text("# c\n2 01\n\n1 11\n").is_ok());
    }

    #[test]
    fn adversarial_budget_buys_expected_misclassifications() {
        // n=48, f=4: cost = ⌈(48−8)/2⌉ = 20 honest rows per process.
        let tr = truth(48, 11, &[0, 1, 2, 3]);
        let cost = misclassification_cost(48, 4) as u64;
        assert_eq!(cost, 20);
        let m = generate_predictions(&tr, 3 * cost, &Placement::AdversarialMisclassify, 1).unwrap();
        assert_eq!(count_errors(&m, &tr), 3 * cost);
        assert_eq!(misclassified_set(&m, &tr).len(), 3);
    }

    #[test]
    fn budget_above_maximum_rejected() {
        let tr = truth(4, 1, &[0]);
        assert!(generate_predictions(&tr, 12, &Placement::Uniform, 0).is_ok());
        assert_eq!(
            generate_predictions(&tr, 13, &Placement::Uniform, 0),
            Err(PredictionError::InfeasibleBudget { budget: 13, max: 12 })
        );
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("1/12"), Some(Ratio::new(1, 12)));
        assert_eq!(parse_rational("0.25"), Some(Ratio::new(1, 4)));
        assert_eq!(parse_rational("2"), Some(Ratio::from(2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }

    #[test]
    fn spread_order_is_a_permutation() {
        for n in 1..70 {
            let mut o = spread_order(n);
            assert_eq!(o.len(), n);
            o.sort();
            assert_eq!(o, (0..n).collect::<Vec<_>>());
        }
        assert_eq!(spread_order(8), vec![0, 4, 2, 6, 1, 5, 3, 7]);
    }
}
