//! Good-group lemma grid, recounted here from the raw matrix.

use bapred::predictions::GoodGroupLemma;
use bapred::ProcessId;
use bapred_harness::lemmas::{run_lemma_grid, LemmaSummary, LemmaTrial};

pub const TRIALS: usize = 10_000;
pub const N_RANGE: (usize, usize) = (16, 128);

pub struct LemmaCheck {
    pub summary: LemmaSummary,
    /// Trials where the recount disagrees with the library's report.
    pub recount_mismatches: usize,
    /// Trials where the recounted bound fails.
    pub recount_failures: usize,
    pub adversarial_trials: usize,
}

/// A process is misclassified when at least n/2 − f honest rows get it wrong:
/// the faulty rows can then tip the majority vote either way.
fn misclassified(tr: &LemmaTrial) -> Vec<bool> {
    let n = tr.truth.n();
    let f = tr.truth.f();
    (0..n)
        .map(|j| {
            let pj = ProcessId(j as u32);
            let truly_honest = !tr.truth.is_faulty(pj);
            let wrong = (0..n)
                .filter(|&i| !tr.truth.is_faulty(ProcessId(i as u32)))
                .filter(|&i| tr.matrix.get(ProcessId(i as u32), pj) != truly_honest)
                .count();
            2 * (wrong + f) >= n
        })
        .collect()
}

/// Good groups under contiguous grouping into m parts, larger parts first.
fn recount(lemma: GoodGroupLemma, tr: &LemmaTrial) -> (usize, usize) {
    let n = tr.truth.n();
    let m = tr.report.m;
    let mis = misclassified(tr);
    let mut good = 0;
    let mut start = 0;
    for g in 0..m {
        let len = n / m + usize::from(g < n % m);
        let members = start..start + len;
        start += len;
        let honest = members.clone().filter(|&p| !tr.truth.is_faulty(ProcessId(p as u32))).count();
        let clean = members.clone().all(|p| !mis[p]);
        let enough = match lemma {
            GoodGroupLemma::HalfGoodTwoThirds => 2 * honest > len,
            _ => honest >= 1,
        };
        good += usize::from(clean && enough);
    }
    (good, mis.iter().filter(|&&x| x).count())
}

pub fn check(lemma: GoodGroupLemma) -> LemmaCheck {
    let (summary, trials) = run_lemma_grid(lemma, TRIALS, N_RANGE);
    let mut recount_mismatches = 0;
    let mut recount_failures = 0;
    let mut adversarial_trials = 0;
    for tr in &trials {
        let (good, k) = recount(lemma, tr);
        if good != tr.report.good_count || k != tr.report.k {
            recount_mismatches += 1;
        }
        let m = tr.report.m;
        let bound = match lemma {
            GoodGroupLemma::OneGoodExists => good >= 1,
            _ => 3 * good > 2 * m,
        };
        if !bound {
            recount_failures += 1;
        }
        adversarial_trials += usize::from(tr.prediction_rule == "adversarial_misclassify");
    }
    LemmaCheck { summary, recount_mismatches, recount_failures, adversarial_trials }
}
