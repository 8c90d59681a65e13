//! Early-stopping agreement with doubling king committees.
//!
//! Phase i uses committee Kᵢ = the next 2ⁱ processes in id order; a final
//! phase uses all of Π. Each phase is graded consensus, the committee agreeing
//! on a king value via [`phase_king`], a broadcast of that value (adopted on
//! grade 0), and a second graded consensus whose grade-1 output decides.
//! Deciders take part in one more phase and then fall silent. With f faults
//! the first committee holding under a third of faults is reached after
//! O(f) rounds.

use super::graded::{graded_consensus, plurality, tally, GC_ROUNDS};
use super::phase_king::{phase_king, phase_king_rounds};
use crate::sim::Ctx;
use crate::types::{ProcessId, Value};
use crate::wire::{Kind, Msg, Scope};

/// Per-fault round constant: `ES_ALPHA · k` rounds reach a decision whenever
/// at most k processes are faulty.
pub const ES_ALPHA: u64 = 14;

/// Committee slot ranges, doubling, followed by the whole system.
pub fn committees(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let (mut start, mut size) = (0usize, 1usize);
    while start < n {
        out.push((start, (start + size).min(n)));
        start += size;
        size *= 2;
    }
    out.push((0, n));
    out
}

pub fn phase_rounds(len: usize) -> u64 {
    2 * GC_ROUNDS + 1 + phase_king_rounds(len)
}

/// Rounds for running every phase.
pub fn full_rounds(n: usize) -> u64 {
    committees(n).iter().map(|(lo, hi)| phase_rounds(hi - lo)).sum()
}

/// Worst-case rounds until every honest process decides when at most `f`
/// processes are faulty: the adversary spends faults spoiling committees in
/// order, each needing at least a third of its members.
pub fn rounds_to_decide(n: usize, f: usize) -> Option<u64> {
    let (mut spent, mut total) = (0usize, 0u64);
    for (lo, hi) in committees(n) {
        total += phase_rounds(hi - lo);
        spent += (hi - lo).div_ceil(3);
        if spent > f {
            return Some(total);
        }
    }
    None
}

/// Run for exactly `min(budget, full_rounds(n))` rounds. Returns the decided
/// value, or the current estimate if the budget ran out first.
pub async fn early_stopping_ba(ctx: &Ctx, scope: Scope, input: Value, budget: u64) -> Value {
    let n = ctx.n();
    let start = ctx.round();
    let deadline = start + budget.min(full_rounds(n));
    let mut v = input;
    let mut decided: Option<(Value, usize)> = None;
    for (i, (lo, hi)) in committees(n).into_iter().enumerate() {
        if decided.is_some_and(|(_, at)| i > at + 1) || ctx.round() + phase_rounds(hi - lo) > deadline {
            break;
        }
        let step = scope.step + 3 * i as u16;
        let (x, grade) = graded_consensus(ctx, Scope { step, ..scope }, v).await;
        v = x;
        let roster: Vec<Option<ProcessId>> = (lo..hi).map(|j| Some(ProcessId(j as u32))).collect();
        let king_scope = Scope { step: step + 1, ..scope };
        let king = phase_king(ctx, king_scope, &roster, v).await;
        if (lo..hi).contains(&ctx.id().index()) {
            ctx.broadcast(king_scope.tag(Kind::KingResult), &Msg::Value(king));
        }
        let inbox = ctx.next_round().await;
        let results = inbox.collect(king_scope.tag(Kind::KingResult));
        let counts = tally(results.iter().filter(|(s, _)| (lo..hi).contains(&s.index())).filter_map(|(_, m)| match m {
            Msg::Value(v) => Some(*v),
            _ => None,
        }));
        if let Some((x, c)) = plurality(&counts) {
            if 2 * c > hi - lo && !grade {
                v = x;
            }
        }
        let (x, grade) = graded_consensus(ctx, Scope { step: step + 2, ..scope }, v).await;
        v = x;
        if grade && decided.is_none() {
            decided = Some((v, i));
        }
    }
    ctx.idle_until(deadline).await;
    decided.map_or(v, |(d, _)| d)
}
