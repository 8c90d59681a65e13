//! Recursive phase king over a roster of slots.
//!
//! A roster is the caller's view of who occupies each slot. A message for
//! slot j is accepted only from the process the receiver has in slot j, so
//! processes whose views disagree on a slot look like a faulty slot to
//! everyone else. Correct when fewer than a third of the slots are faulty.
//!
//! Each level splits the roster into two halves and runs two phases, each
//! using one half as its king committee; the committee agrees on the king value
//! by recursing. At least one half has under a third faulty slots, so one of
//! the two phases has a consistent king. Rosters of at most three slots are
//! assumed fault-free and settle in one round.

use super::graded::{plurality, tally};
use crate::sim::Ctx;
use crate::types::{ProcessId, Value};
use crate::wire::{Kind, Msg, Scope};
use std::collections::BTreeMap;
use std::future::Future;
use std::pin::Pin;

/// Fixed round count for a roster of `len` slots.
pub fn phase_king_rounds(len: usize) -> u64 {
    match len {
        0 | 1 => 0,
        2 | 3 => 1,
        _ => 6 + phase_king_rounds(len.div_ceil(2)) + phase_king_rounds(len / 2),
    }
}

/// Run agreement over `roster`. Processes not on their own roster idle for
/// the same number of rounds and return `input`.
pub async fn phase_king(ctx: &Ctx, scope: Scope, roster: &[Option<ProcessId>], input: Value) -> Value {
    match roster.iter().position(|s| *s == Some(ctx.id())) {
        Some(me) => run_range(ctx, scope, roster, 0, roster.len(), me, input).await,
        None => {
            ctx.idle(phase_king_rounds(roster.len())).await;
            input
        }
    }
}

fn targets(roster: &[Option<ProcessId>]) -> Vec<ProcessId> {
    let mut ids: Vec<ProcessId> = roster.iter().flatten().copied().collect();
    ids.sort();
    ids.dedup();
    ids
}

/// Values per slot in `lo..hi`, accepted only from the slot's occupant.
fn accepted(msgs: Vec<(ProcessId, Msg)>, roster: &[Option<ProcessId>], lo: usize, hi: usize) -> BTreeMap<usize, Value> {
    let mut out = BTreeMap::new();
    for (sender, msg) in msgs {
        if let Msg::Slot { slot, value } = msg {
            let s = slot as usize;
            if (lo..hi).contains(&s) && roster[s] == Some(sender) {
                out.entry(s).or_insert(value);
            }
        }
    }
    out
}

fn run_range<'a>(
    ctx: &'a Ctx,
    scope: Scope,
    roster: &'a [Option<ProcessId>],
    lo: usize,
    hi: usize,
    me: usize,
    input: Value,
) -> Pin<Box<dyn Future<Output = Value> + 'a>> {
    Box::pin(async move {
        let len = hi - lo;
        let mut v = input;
        if len <= 1 {
            return v;
        }
        let to = targets(&roster[lo..hi]);
        let slot = me as u32;
        if len <= 3 {
            ctx.multicast(to, scope.tag(Kind::PkBase), &Msg::Slot { slot, value: v });
            let inbox = ctx.next_round().await;
            let got = accepted(inbox.collect(scope.tag(Kind::PkBase)), roster, lo, hi);
            return got.values().next().copied().unwrap_or(v);
        }
        let t = (len - 1) / 3;
        let mid = lo + len.div_ceil(2);
        for (klo, khi) in [(lo, mid), (mid, hi)] {
            ctx.multicast(to.iter().copied(), scope.tag(Kind::PkValue), &Msg::Slot { slot, value: v });
            let inbox = ctx.next_round().await;
            let counts = tally(accepted(inbox.collect(scope.tag(Kind::PkValue)), roster, lo, hi).into_values());
            if let Some((x, c)) = plurality(&counts) {
                if c + t >= len {
                    ctx.multicast(to.iter().copied(), scope.tag(Kind::PkEcho), &Msg::Slot { slot, value: x });
                }
            }
            let inbox = ctx.next_round().await;
            let counts = tally(accepted(inbox.collect(scope.tag(Kind::PkEcho)), roster, lo, hi).into_values());
            let mut strong = false;
            if let Some((x, c)) = plurality(&counts) {
                if c > t {
                    v = x;
                }
                strong = c + t >= len;
            }
            let in_committee = (klo..khi).contains(&me);
            let king = if in_committee {
                run_range(ctx, scope, roster, klo, khi, me, v).await
            } else {
                ctx.idle(phase_king_rounds(khi - klo)).await;
                v
            };
            if in_committee {
                ctx.multicast(to.iter().copied(), scope.tag(Kind::PkKing), &Msg::Slot { slot, value: king });
            }
            let inbox = ctx.next_round().await;
            let counts = tally(accepted(inbox.collect(scope.tag(Kind::PkKing)), roster, klo, khi).into_values());
            if let Some((x, c)) = plurality(&counts) {
                if 2 * c > khi - klo && !strong {
                    v = x;
                }
            }
        }
        v
    })
}
