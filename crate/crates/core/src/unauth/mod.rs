//! Unauthenticated agreement with classification predictions.

pub mod early_stopping;
pub mod graded;
pub mod phase_king;

pub use early_stopping::{early_stopping_ba, ES_ALPHA};
pub use graded::{graded_consensus, Graded};
pub use phase_king::{phase_king, phase_king_rounds};

use crate::elections::{preprocess_votes, subcubic_elections};
use crate::predictions::{choose_group_count, m_grouping, GoodGroupLemma, Rational};
use crate::sim::{Ctx, Subprotocol};
use crate::types::{phase_count, ProcessId, Value};
use crate::wire::{Kind, Msg, Scope};
use graded::{plurality, tally};
use std::collections::BTreeSet;

/// Agreement over an implicit committee: each process supplies its own view
/// of the committee (`roster`, with `None` for failed slots). Members run
/// [`phase_king`] over their view and broadcast the result; everyone outputs
/// the most common result sent by processes in its view.
///
/// Needs more than 2/3 of the slots to hold the same honest process in every
/// honest view.
pub async fn implicit_committee_ba(ctx: &Ctx, scope: Scope, input: Value, roster: &[Option<ProcessId>]) -> Value {
    let v = phase_king(ctx, scope, roster, input).await;
    let members: BTreeSet<ProcessId> = roster.iter().flatten().copied().collect();
    let tag = scope.tag(Kind::CommitteeDecision);
    if members.contains(&ctx.id()) {
        ctx.broadcast(tag, &Msg::Value(v));
    }
    let inbox = ctx.next_round().await;
    let counts = tally(inbox.collect(tag).into_iter().filter(|(s, _)| members.contains(s)).filter_map(|(_, m)| match m {
        Msg::Value(x) => Some(x),
        _ => None,
    }));
    plurality(&counts).map_or(v, |(x, _)| x)
}

pub fn committee_rounds(roster_len: usize) -> u64 {
    phase_king_rounds(roster_len) + 1
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum UnauthMode {
    /// Elections from a one-time exchange of full prediction rows.
    Cubic,
    /// Group elections run per phase, bits sent only to group members.
    Subcubic,
}

impl UnauthMode {
    pub fn lemma(self) -> GoodGroupLemma {
        match self {
            UnauthMode::Cubic => GoodGroupLemma::OneGoodTwoThirds,
            UnauthMode::Subcubic => GoodGroupLemma::HalfGoodTwoThirds,
        }
    }

    pub fn default_eps(self) -> Rational {
        match self {
            UnauthMode::Cubic => Rational::new(1, 12),
            UnauthMode::Subcubic => Rational::new(1, 24),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct UnauthParams {
    pub mode: UnauthMode,
    pub eps: Rational,
}

/// Guess-and-double agreement. Phase φ assumes at most k̂ = 2^(φ−1) faults
/// or misclassified processes and runs, each guarded by graded consensus, an
/// early-stopping agreement cut at `ES_ALPHA·k̂` rounds and an agreement over
/// the committee of group leaders. A process returns one phase after it
/// decides; `None` means it never decided.
pub async fn unauth_agreement(ctx: &Ctx, params: UnauthParams, input: Value, row: Vec<bool>) -> Option<Value> {
    let n = ctx.n();
    ctx.enter(0, Subprotocol::Preprocessing);
    let table = match params.mode {
        UnauthMode::Cubic => Some(preprocess_votes(ctx, Scope::new(0, 0), &row).await),
        UnauthMode::Subcubic => None,
    };
    let mut v = input;
    let mut decision = None;
    for phi in 1..=phase_count(ctx.t()) {
        let k_hat = 1usize << (phi - 1);
        let p = phi as u16;

        ctx.enter(phi, Subprotocol::GradedConsensus);
        let (x, grade) = graded_consensus(ctx, Scope::new(p, 0), v).await;
        v = x;
        ctx.enter(phi, Subprotocol::EarlyStopping);
        let es = early_stopping_ba(ctx, Scope::new(p, 16), v, ES_ALPHA * k_hat as u64).await;
        if !grade {
            v = es;
        }

        ctx.enter(phi, Subprotocol::GradedConsensus);
        let (x, grade) = graded_consensus(ctx, Scope::new(p, 1), v).await;
        v = x;
        ctx.enter(phi, Subprotocol::Election);
        let roster: Vec<Option<ProcessId>> = match choose_group_count(params.mode.lemma(), params.eps, n, k_hat) {
            None => Vec::new(),
            Some(m) => {
                let groups = m_grouping(n, m).expect("m within 1..=n").groups;
                match &table {
                    Some(t) => groups.iter().map(|g| t.elect(g).ok()).collect(),
                    None => subcubic_elections(ctx, Scope::new(p, 2), &groups, &row)
                        .await
                        .into_iter()
                        .map(Result::ok)
                        .collect(),
                }
            }
        };
        ctx.enter(phi, Subprotocol::CommitteeAgreement);
        let c = implicit_committee_ba(ctx, Scope::new(p, 3), v, &roster).await;
        if !grade {
            v = c;
        }

        ctx.enter(phi, Subprotocol::GradedConsensus);
        let (x, grade) = graded_consensus(ctx, Scope::new(p, 4), v).await;
        v = x;
        if decision.is_some() {
            return decision;
        }
        if grade {
            decision = Some(v);
        }
    }
    decision
}
