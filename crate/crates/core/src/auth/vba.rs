//! Validated agreement driven by a per-process leader schedule.
//!
//! A [`VbaState`] holds the commit and decision across views and is reused
//! across outer phases, so the whole run behaves as one instance whose
//! views are numbered globally from 1.

use super::certification::ex_valid;
use super::expander::ExpanderGraph;
use crate::crypto::{received_share, PartialSig, Statement};
use crate::sim::Ctx;
use crate::types::ProcessId;
use crate::wire::{CommitRef, Kind, Msg, Scope, SigBytes, ValuePair};
use std::collections::BTreeMap;

pub const VIEW_ROUNDS: u64 = 7;

/// Quorum for leader proofs, commit certificates and decision proofs.
pub fn quorum(n: usize, t: usize) -> usize {
    n - t
}

#[derive(Clone, Debug)]
pub struct VbaState {
    input: ValuePair,
    commit: Option<(ValuePair, CommitRef)>,
    decision: Option<(ValuePair, SigBytes)>,
    next_view: u32,
}

impl VbaState {
    /// `input` must be externally valid.
    pub fn new(input: ValuePair) -> Self {
        VbaState { input, commit: None, decision: None, next_view: 1 }
    }

    pub fn commit(&self) -> Option<&(ValuePair, CommitRef)> {
        self.commit.as_ref()
    }

    pub fn commit_view(&self) -> u32 {
        self.commit.as_ref().map_or(0, |(_, c)| c.view)
    }

    pub fn decision(&self) -> Option<&(ValuePair, SigBytes)> {
        self.decision.as_ref()
    }

    pub fn adopt_decision(&mut self, value: ValuePair, proof: SigBytes) {
        self.decision.get_or_insert((value, proof));
    }

    /// View number the next call to [`run_view`] will use.
    pub fn next_view(&self) -> u32 {
        self.next_view
    }

    fn current(&self) -> (ValuePair, Option<CommitRef>) {
        match &self.commit {
            Some((v, c)) => (v.clone(), Some(c.clone())),
            None => (self.input.clone(), None),
        }
    }

    fn store_commit(&mut self, value: ValuePair, view: u32, cert: SigBytes) {
        if view >= self.commit_view() {
            self.commit = Some((value, CommitRef { view, cert }));
        }
    }
}

fn leader_ok(ctx: &Ctx, leader: ProcessId, view: u32, proof: &SigBytes) -> bool {
    let q = quorum(ctx.n(), ctx.t());
    ctx.scheme().verify(q, &Statement::Leader { leader, view }, proof)
}

fn commit_ok(ctx: &Ctx, value: &ValuePair, c: &CommitRef) -> bool {
    let q = quorum(ctx.n(), ctx.t());
    ctx.scheme().verify(q, &Statement::Commit { value: value.clone(), view: c.view }, &c.cert)
}

/// The leader's own signature over its proposal.
fn signed_by(ctx: &Ctx, leader: ProcessId, value: &ValuePair, view: u32, sig: &SigBytes) -> bool {
    ctx.scheme().share_verify(leader, 1, &Statement::Propose { value: value.clone(), view }, sig)
}

/// Externally valid, and any attached commit is from an earlier view and verifies.
fn carried_ok(ctx: &Ctx, value: &ValuePair, commit: &Option<CommitRef>, view: u32) -> bool {
    ex_valid(ctx, value) && commit.as_ref().is_none_or(|c| c.view < view && commit_ok(ctx, value, c))
}

/// First value with a quorum of valid shares, smallest value on ties.
fn quorum_value(
    ctx: &Ctx,
    q: usize,
    msgs: impl IntoIterator<Item = (ProcessId, ValuePair, SigBytes)>,
    stmt: impl Fn(&ValuePair) -> Statement,
) -> Option<(ValuePair, Vec<PartialSig>)> {
    let mut groups: BTreeMap<ValuePair, Vec<PartialSig>> = BTreeMap::new();
    for (s, value, share) in msgs {
        let st = stmt(&value);
        if ctx.scheme().share_verify(s, q, &st, &share) {
            groups.entry(value).or_default().push(received_share(s, q, &st, share));
        }
    }
    groups.into_iter().find(|(_, shares)| shares.len() >= q)
}

/// One view, [`VIEW_ROUNDS`] rounds. `leader` is this process's choice for
/// the view; `None` means it backs nobody but still serves as a potential
/// leader and relay.
pub async fn run_view(ctx: &Ctx, scope: Scope, graph: &ExpanderGraph, state: &mut VbaState, leader: Option<ProcessId>) {
    let (n, t) = (ctx.n(), ctx.t());
    let q = quorum(n, t);
    let me = ctx.id();
    let view = state.next_view;
    state.next_view += 1;
    let neighbors = graph.neighbors(me).to_vec();
    let relayed = |s: ProcessId| graph.is_neighbor(me, s);

    // val
    let val_tag = scope.tag(Kind::Val);
    if let Some(l) = leader {
        let share = ctx.signer().share_sign(q, &Statement::Leader { leader: l, view });
        let (value, commit) = state.current();
        ctx.send(l, val_tag, &Msg::Val { value, commit, share: share.bytes });
    }
    let inbox = ctx.next_round().await;

    // propose
    let propose_tag = scope.tag(Kind::Propose);
    let my_stmt = Statement::Leader { leader: me, view };
    let mut shares = Vec::new();
    let mut best = state.current();
    for (s, m) in inbox.collect(val_tag) {
        let Msg::Val { value, commit, share } = m else { continue };
        if !ctx.scheme().share_verify(s, q, &my_stmt, &share) || !carried_ok(ctx, &value, &commit, view) {
            continue;
        }
        shares.push(received_share(s, q, &my_stmt, share));
        let v = commit.as_ref().map_or(0, |c| c.view);
        if v > best.1.as_ref().map_or(0, |c| c.view) {
            best = (value, commit);
        }
    }
    let my_proof = if shares.len() >= q {
        let lp = ctx.scheme().combine_statement(q, &my_stmt, &shares[..q]).expect("shares verified");
        let (value, commit) = best;
        let sig = ctx.signer().share_sign(1, &Statement::Propose { value: value.clone(), view }).bytes;
        ctx.broadcast(propose_tag, &Msg::Propose { value, commit, leader_proof: lp.clone(), sig });
        Some(lp)
    } else {
        None
    };
    let inbox = ctx.next_round().await;

    // forward
    let forward_tag = scope.tag(Kind::Forward);
    let mut accepted: Option<ValuePair> = None;
    if let Some(l) = leader {
        for (s, m) in inbox.collect(propose_tag) {
            let Msg::Propose { value, commit, leader_proof, sig } = m else { continue };
            let from_view = commit.as_ref().map_or(0, |c| c.view);
            if s == l
                && leader_ok(ctx, l, view, &leader_proof)
                && signed_by(ctx, l, &value, view, &sig)
                && carried_ok(ctx, &value, &commit, view)
                && from_view >= state.commit_view()
            {
                let fwd = Msg::Forward { leader: l, value: value.clone(), leader_proof, sig };
                ctx.multicast(neighbors.iter().copied(), forward_tag, &fwd);
                accepted = Some(value);
            }
        }
    }
    let inbox = ctx.next_round().await;

    // ack
    let ack_tag = scope.tag(Kind::Ack);
    if let (Some(l), Some(v)) = (leader, &accepted) {
        let conflict = inbox.collect(forward_tag).into_iter().any(|(s, m)| match m {
            Msg::Forward { leader, value, leader_proof, sig } => {
                relayed(s) && value != *v && leader_ok(ctx, leader, view, &leader_proof) && signed_by(ctx, leader, &value, view, &sig)
            }
            _ => false,
        });
        if !conflict {
            let share = ctx.signer().share_sign(q, &Statement::Commit { value: v.clone(), view });
            ctx.send(l, ack_tag, &Msg::Ack { value: v.clone(), share: share.bytes });
        }
    }
    let inbox = ctx.next_round().await;

    // commit
    let commit_tag = scope.tag(Kind::Commit);
    if let Some(lp) = &my_proof {
        let acks = inbox.collect(ack_tag).into_iter().filter_map(|(s, m)| match m {
            Msg::Ack { value, share } => Some((s, value, share)),
            _ => None,
        });
        if let Some((value, shares)) = quorum_value(ctx, q, acks, |v| Statement::Commit { value: v.clone(), view }) {
            let stmt = Statement::Commit { value: value.clone(), view };
            let cert = ctx.scheme().combine_statement(q, &stmt, &shares[..q]).expect("shares verified");
            ctx.broadcast(commit_tag, &Msg::Commit { value, cert, leader_proof: lp.clone() });
        }
    }
    let inbox = ctx.next_round().await;

    // forward-commit, decide share
    let fc_tag = scope.tag(Kind::ForwardCommit);
    let ds_tag = scope.tag(Kind::DecideShare);
    if let Some(l) = leader {
        for (s, m) in inbox.collect(commit_tag) {
            let Msg::Commit { value, cert, leader_proof } = m else { continue };
            let c = CommitRef { view, cert };
            if s != l || !leader_ok(ctx, l, view, &leader_proof) || !ex_valid(ctx, &value) || !commit_ok(ctx, &value, &c) {
                continue;
            }
            state.store_commit(value.clone(), view, c.cert.clone());
            ctx.multicast(
                neighbors.iter().copied(),
                fc_tag,
                &Msg::ForwardCommit { leader: l, value: value.clone(), cert: c.cert, leader_proof },
            );
            let share = ctx.signer().share_sign(q, &Statement::Decide(value.clone()));
            ctx.send(l, ds_tag, &Msg::DecideShare { value, share: share.bytes });
        }
    }
    let inbox = ctx.next_round().await;

    // decide
    for (s, m) in inbox.collect(fc_tag) {
        let Msg::ForwardCommit { leader, value, cert, leader_proof } = m else { continue };
        let c = CommitRef { view, cert };
        if relayed(s) && leader_ok(ctx, leader, view, &leader_proof) && ex_valid(ctx, &value) && commit_ok(ctx, &value, &c) {
            state.store_commit(value, view, c.cert);
        }
    }
    let decide_tag = scope.tag(Kind::Decide);
    if let Some(lp) = &my_proof {
        let shares = inbox.collect(ds_tag).into_iter().filter_map(|(s, m)| match m {
            Msg::DecideShare { value, share } => Some((s, value, share)),
            _ => None,
        });
        if let Some((value, shares)) = quorum_value(ctx, q, shares, |v| Statement::Decide(v.clone())) {
            let proof = ctx.scheme().combine_statement(q, &Statement::Decide(value.clone()), &shares[..q]).expect("shares verified");
            ctx.broadcast(decide_tag, &Msg::Decide { value, proof, leader_proof: lp.clone() });
        }
    }
    let inbox = ctx.next_round().await;

    if let Some(l) = leader {
        for (s, m) in inbox.collect(decide_tag) {
            let Msg::Decide { value, proof, leader_proof } = m else { continue };
            if s == l && leader_ok(ctx, l, view, &leader_proof) && decision_ok(ctx, &value, &proof) {
                state.adopt_decision(value, proof);
            }
        }
    }
}

/// A decision proof verifies and the decided pair is externally valid.
pub fn decision_ok(ctx: &Ctx, value: &ValuePair, proof: &SigBytes) -> bool {
    let q = quorum(ctx.n(), ctx.t());
    ex_valid(ctx, value) && ctx.scheme().verify(q, &Statement::Decide(value.clone()), proof)
}

/// Run one view per entry of `leaders`; scopes are `scope.indexed(j)`.
pub async fn validated_agreement(
    ctx: &Ctx,
    scope: Scope,
    graph: &ExpanderGraph,
    state: &mut VbaState,
    leaders: &[Option<ProcessId>],
) -> Option<(ValuePair, SigBytes)> {
    for (j, &l) in leaders.iter().enumerate() {
        run_view(ctx, scope.indexed(j as u32), graph, state, l).await;
    }
    state.decision.clone()
}
