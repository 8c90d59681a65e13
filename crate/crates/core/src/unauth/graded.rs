use crate::sim::Ctx;
use crate::types::Value;
use crate::wire::{Kind, Msg, Scope};
use std::collections::BTreeMap;

/// Output of graded consensus: a value and grade 1 (`true`) or 0.
pub type Graded = (Value, bool);

pub const GC_ROUNDS: u64 = 2;

/// Most frequent value with its count; ties go to the smaller value.
pub(crate) fn plurality(counts: &BTreeMap<Value, usize>) -> Option<(Value, usize)> {
    counts.iter().map(|(v, c)| (*v, *c)).max_by_key(|&(v, c)| (c, std::cmp::Reverse(v)))
}

pub(crate) fn tally(values: impl IntoIterator<Item = Value>) -> BTreeMap<Value, usize> {
    let mut counts = BTreeMap::new();
    for v in values {
        *counts.entry(v).or_insert(0) += 1;
    }
    counts
}

/// Two-round graded consensus among all n processes with threshold t.
///
/// Round 1 broadcasts the input; a value seen n−t times is echoed in round 2.
/// Output (x, 1) on n−t echoes of x, (x, 0) on t+1 echoes. Otherwise
/// (y, 0) for the round-1 plurality y if more than t processes sent it, else
/// (input, 0); without faults every process then holds the same y.
/// With n > 3t: a grade-1 output for x forces every honest output to carry x,
/// and unanimous inputs give grade 1 everywhere.
pub async fn graded_consensus(ctx: &Ctx, scope: Scope, input: Value) -> Graded {
    let (n, t) = (ctx.n(), ctx.t());
    ctx.broadcast(scope.tag(Kind::GcValue), &Msg::Value(input));
    let inbox = ctx.next_round().await;
    let values = inbox.collect(scope.tag(Kind::GcValue));
    let first = plurality(&tally(values.iter().filter_map(|(_, m)| match m {
        Msg::Value(v) => Some(*v),
        _ => None,
    })));
    if let Some((x, c)) = first {
        if c + t >= n {
            ctx.broadcast(scope.tag(Kind::GcEcho), &Msg::Value(x));
        }
    }
    let inbox = ctx.next_round().await;
    let echoes = inbox.collect(scope.tag(Kind::GcEcho));
    let counts = tally(echoes.iter().filter_map(|(_, m)| match m {
        Msg::Value(v) => Some(*v),
        _ => None,
    }));
    match plurality(&counts) {
        Some((x, c)) if c + t >= n => (x, true),
        Some((x, c)) if c > t => (x, false),
        _ => match first {
            Some((y, c)) if c > t => (y, false),
            _ => (input, false),
        },
    }
}
