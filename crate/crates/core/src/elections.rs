//! Group leader elections.
//!
//! Each election picks one member of a group G. On a good group every honest
//! process outputs the same honest member; elsewhere outputs may differ or
//! fail, and a failure shows up as an error the caller turns into an empty
//! slot.

use crate::crypto::{received_share, Statement};
use crate::sim::{join_all, Ctx};
use crate::types::ProcessId;
use crate::wire::{bit_at, pack_bits, Kind, Msg, Scope, WireFormat};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ElectionError {
    #[error("no member received votes from more than n/2 processes")]
    NoQualifiedLeader,
    #[error("no leader was named by a majority of the group")]
    NoMajorityLeader,
    #[error("committee member found no candidate with more than n/2 votes")]
    EmptyCandidateSet,
    #[error("no member presented a valid vote proof")]
    NoProofReceived,
}

pub type ElectionOutcome = Result<ProcessId, ElectionError>;

/// Which election a mode uses per group.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ElectionKind {
    Simple,
    SmallGroup,
    LargeGroup,
    Authenticated,
}

/// ⌈30√n⌉: cap on candidate list lengths in large-group elections.
pub fn candidate_cap(n: usize) -> usize {
    let target = 900 * n as u64;
    let mut c = (target as f64).sqrt() as u64;
    while c * c < target {
        c += 1;
    }
    while c > 0 && (c - 1) * (c - 1) >= target {
        c -= 1;
    }
    c as usize
}

/// Large-group path when |G| ≥ 60√n.
pub fn uses_large_group(n: usize, group_len: usize) -> bool {
    (group_len as u64).pow(2) >= 3600 * n as u64
}

pub fn subcubic_kind(n: usize, group_len: usize) -> ElectionKind {
    if uses_large_group(n, group_len) {
        ElectionKind::LargeGroup
    } else {
        ElectionKind::SmallGroup
    }
}

pub fn election_rounds(kind: ElectionKind) -> u64 {
    match kind {
        ElectionKind::Simple => 1,
        ElectionKind::SmallGroup | ElectionKind::Authenticated => 2,
        ElectionKind::LargeGroup => 3,
    }
}

fn group_bits(row: &[bool], group: &[ProcessId]) -> Vec<u8> {
    pack_bits(group.iter().map(|p| row[p.index()]), group.len())
}

/// Count, per group index, the senders whose bitstring marks it.
fn count_bits(msgs: &[(ProcessId, Msg)], group_len: usize) -> Vec<usize> {
    let want = WireFormat::bitstring_bytes(group_len);
    let mut counts = vec![0usize; group_len];
    for (_, m) in msgs {
        if let Msg::Bits(b) = m {
            if b.len() == want {
                for (j, c) in counts.iter_mut().enumerate() {
                    *c += bit_at(b, j) as usize;
                }
            }
        }
    }
    counts
}

/// One-round election: everyone broadcasts its bits for G; the smallest member
/// with more than n/2 votes wins.
pub async fn simple_election(ctx: &Ctx, scope: Scope, group: &[ProcessId], row: &[bool]) -> ElectionOutcome {
    let tag = scope.tag(Kind::VoteBits);
    ctx.broadcast(tag, &Msg::Bits(group_bits(row, group)));
    let inbox = ctx.next_round().await;
    let counts = count_bits(&inbox.collect(tag), group.len());
    let n = ctx.n();
    counts.iter().position(|&c| 2 * c > n).map(|j| group[j]).ok_or(ElectionError::NoQualifiedLeader)
}

/// Vote totals from a one-time exchange of full prediction rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VoteTable {
    n: usize,
    support: Vec<usize>,
}

impl VoteTable {
    pub fn from_rows<'a>(n: usize, rows: impl IntoIterator<Item = &'a [u8]>) -> Self {
        let want = WireFormat::bitstring_bytes(n);
        let mut support = vec![0; n];
        for r in rows {
            if r.len() == want {
                for (j, s) in support.iter_mut().enumerate() {
                    *s += bit_at(r, j) as usize;
                }
            }
        }
        VoteTable { n, support }
    }

    pub fn support(&self, p: ProcessId) -> usize {
        self.support[p.index()]
    }

    /// Same rule as [`simple_election`], evaluated locally.
    pub fn elect(&self, group: &[ProcessId]) -> ElectionOutcome {
        group.iter().copied().find(|p| 2 * self.support[p.index()] > self.n).ok_or(ElectionError::NoQualifiedLeader)
    }
}

/// One round: broadcast the whole row. Later simple elections are local.
pub async fn preprocess_votes(ctx: &Ctx, scope: Scope, row: &[bool]) -> VoteTable {
    let tag = scope.tag(Kind::VoteRow);
    ctx.broadcast(tag, &Msg::Bits(pack_bits(row.iter().copied(), ctx.n())));
    let inbox = ctx.next_round().await;
    let msgs = inbox.collect(tag);
    VoteTable::from_rows(
        ctx.n(),
        msgs.iter().filter_map(|(_, m)| match m {
            Msg::Bits(b) => Some(b.as_slice()),
            _ => None,
        }),
    )
}

/// Count leader claims from group members; a claim backed by more than half
/// of the group wins.
fn majority_claim(msgs: &[(ProcessId, Msg)], group: &[ProcessId]) -> ElectionOutcome {
    let members: BTreeSet<ProcessId> = group.iter().copied().collect();
    let mut counts: BTreeMap<ProcessId, usize> = BTreeMap::new();
    for (s, m) in msgs {
        if let (true, Msg::Leader(p)) = (members.contains(s), m) {
            *counts.entry(*p).or_insert(0) += 1;
        }
    }
    counts.into_iter().find(|&(_, c)| 2 * c > group.len()).map(|(p, _)| p).ok_or(ElectionError::NoMajorityLeader)
}

/// Two rounds: bits go only to G's members, who pick the smallest member with
/// more than n/2 votes and announce it; the claim held by a majority of G wins.
pub async fn small_group_election(ctx: &Ctx, scope: Scope, group: &[ProcessId], row: &[bool]) -> ElectionOutcome {
    let vote = scope.tag(Kind::VoteBits);
    let claim = scope.tag(Kind::LeaderClaim);
    ctx.multicast(group.iter().copied(), vote, &Msg::Bits(group_bits(row, group)));
    let inbox = ctx.next_round().await;
    if group.contains(&ctx.id()) {
        let counts = count_bits(&inbox.collect(vote), group.len());
        if let Some(j) = counts.iter().position(|&c| 2 * c > ctx.n()) {
            ctx.broadcast(claim, &Msg::Leader(group[j]));
        }
    }
    let inbox = ctx.next_round().await;
    majority_claim(&inbox.collect(claim), group)
}

/// Conciliation among a set of processes that each hold a candidate list.
///
/// `received` maps each sender to its (value, list). Process a reaches b when
/// a chain of lists leads from a to b (a ∈ L_x, x ∈ L_y, …, ∈ L_b), and every
/// process reaches itself. For each j in `my_list` take the smallest value
/// sent by any process reaching j; output the most common of those, smallest
/// on ties.
pub fn conciliate(my_list: &[ProcessId], received: &BTreeMap<ProcessId, (ProcessId, Vec<ProcessId>)>) -> Option<ProcessId> {
    let mut picks: BTreeMap<ProcessId, usize> = BTreeMap::new();
    for &j in my_list {
        let mut reach: BTreeSet<ProcessId> = BTreeSet::from([j]);
        let mut stack = vec![j];
        while let Some(x) = stack.pop() {
            if let Some((_, list)) = received.get(&x) {
                for &a in list {
                    if reach.insert(a) {
                        stack.push(a);
                    }
                }
            }
        }
        if let Some(m) = reach.iter().filter_map(|x| received.get(x).map(|(v, _)| *v)).min() {
            *picks.entry(m).or_insert(0) += 1;
        }
    }
    picks.into_iter().max_by_key(|&(v, c)| (c, std::cmp::Reverse(v))).map(|(v, _)| v)
}

/// One round of conciliation among `participants`.
pub async fn conciliation_round(
    ctx: &Ctx,
    scope: Scope,
    participants: &[ProcessId],
    mine: Option<(ProcessId, Vec<ProcessId>)>,
) -> Option<ProcessId> {
    let tag = scope.tag(Kind::Conciliate);
    if let Some((value, list)) = &mine {
        ctx.multicast(participants.iter().copied(), tag, &Msg::Conciliate { value: *value, list: list.clone() });
    }
    let inbox = ctx.next_round().await;
    let members: BTreeSet<ProcessId> = participants.iter().copied().collect();
    let received = inbox
        .collect(tag)
        .into_iter()
        .filter(|(s, _)| members.contains(s))
        .filter_map(|(s, m)| match m {
            Msg::Conciliate { value, list } => Some((s, (value, list))),
            _ => None,
        })
        .collect();
    mine.and_then(|(_, list)| conciliate(&list, &received))
}

/// Three rounds. Each process sends G's members the (capped) list of members
/// it predicts honest; members keep candidates with more than n/2 votes,
/// conciliate among G, and announce the result.
pub async fn large_group_election(ctx: &Ctx, scope: Scope, group: &[ProcessId], row: &[bool]) -> ElectionOutcome {
    let n = ctx.n();
    let cap = candidate_cap(n);
    let vote = scope.tag(Kind::VoteIndices);
    let claim = scope.tag(Kind::LeaderClaim);
    let picks: Vec<ProcessId> = group.iter().copied().filter(|p| row[p.index()]).take(cap).collect();
    if !picks.is_empty() {
        ctx.multicast(group.iter().copied(), vote, &Msg::Indices(picks));
    }
    let inbox = ctx.next_round().await;
    let member = group.contains(&ctx.id());
    let mut mine = None;
    let mut empty = false;
    if member {
        let members: BTreeSet<ProcessId> = group.iter().copied().collect();
        let mut counts: BTreeMap<ProcessId, usize> = BTreeMap::new();
        for (_, m) in inbox.collect(vote) {
            if let Msg::Indices(list) = m {
                for p in list.into_iter().filter(|p| members.contains(p)) {
                    *counts.entry(p).or_insert(0) += 1;
                }
            }
        }
        let list: Vec<ProcessId> = counts.into_iter().filter(|&(_, c)| 2 * c > n).map(|(p, _)| p).take(cap).collect();
        match list.first() {
            Some(&v) => mine = Some((v, list)),
            None => empty = true,
        }
    }
    let agreed = conciliation_round(ctx, scope, if member { group } else { &[] }, mine).await;
    if let Some(leader) = agreed {
        ctx.broadcast(claim, &Msg::Leader(leader));
    }
    let inbox = ctx.next_round().await;
    if empty {
        return Err(ElectionError::EmptyCandidateSet);
    }
    majority_claim(&inbox.collect(claim), group)
}

/// Run the subcubic-mode election for every group in parallel. Groups of
/// different kinds share rounds; the stage lasts as long as its longest
/// election, so every process spends the same number of rounds.
pub async fn subcubic_elections(ctx: &Ctx, scope: Scope, groups: &[Vec<ProcessId>], row: &[bool]) -> Vec<ElectionOutcome> {
    let n = ctx.n();
    let futs: Vec<_> = groups
        .iter()
        .enumerate()
        .map(|(j, g)| {
            let s = scope.indexed(j as u32);
            async move {
                match subcubic_kind(n, g.len()) {
                    ElectionKind::LargeGroup => large_group_election(ctx, s, g, row).await,
                    _ => small_group_election(ctx, s, g, row).await,
                }
            }
        })
        .collect();
    let stage = groups.iter().map(|g| election_rounds(subcubic_kind(n, g.len()))).max().unwrap_or(0);
    let start = ctx.round();
    let out = join_all(futs).await;
    ctx.idle_until(start + stage).await;
    out
}

/// Threshold for vote proofs: ⌈(n+1)/2⌉.
pub fn vote_threshold(n: usize) -> usize {
    (n + 2) / 2
}

/// Members of some group that obtained a vote proof.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProofTable {
    proven: BTreeSet<ProcessId>,
}

impl ProofTable {
    pub fn proven(&self) -> &BTreeSet<ProcessId> {
        &self.proven
    }

    /// Smallest member of `group` with a valid proof.
    pub fn elect(&self, group: &[ProcessId]) -> ElectionOutcome {
        group.iter().copied().find(|p| self.proven.contains(p)).ok_or(ElectionError::NoProofReceived)
    }
}

/// Two rounds. Each process sends a vote share to every member of G it
/// predicts honest; a member with ⌈(n+1)/2⌉ shares combines them into a vote
/// proof and broadcasts it. Run once over Π, later elections are local.
pub async fn authenticated_votes(ctx: &Ctx, scope: Scope, group: &[ProcessId], row: &[bool]) -> ProofTable {
    let n = ctx.n();
    let k = vote_threshold(n);
    let vote = scope.tag(Kind::AuthVote);
    let proof_tag = scope.tag(Kind::VoteProof);
    for &p in group.iter().filter(|p| row[p.index()]) {
        let share = ctx.signer().share_sign(k, &Statement::Vote(p));
        ctx.send(p, vote, &Msg::AuthVote { target: p, share: share.bytes });
    }
    let inbox = ctx.next_round().await;
    let me = ctx.id();
    if group.contains(&me) {
        let stmt = Statement::Vote(me);
        let shares: Vec<_> = inbox
            .collect(vote)
            .into_iter()
            .filter_map(|(s, m)| match m {
                Msg::AuthVote { target, share } if target == me && ctx.scheme().share_verify(s, k, &stmt, &share) => {
                    Some(received_share(s, k, &stmt, share))
                }
                _ => None,
            })
            .collect();
        if shares.len() >= k {
            if let Ok(proof) = ctx.scheme().combine_statement(k, &stmt, &shares) {
                ctx.broadcast(proof_tag, &Msg::VoteProof { holder: me, proof });
            }
        }
    }
    let inbox = ctx.next_round().await;
    let members: BTreeSet<ProcessId> = group.iter().copied().collect();
    let proven = inbox
        .collect(proof_tag)
        .into_iter()
        .filter_map(|(s, m)| match m {
            Msg::VoteProof { holder, proof }
                if holder == s && members.contains(&s) && ctx.scheme().verify(k, &Statement::Vote(s), &proof) =>
            {
                Some(s)
            }
            _ => None,
        })
        .collect();
    ProofTable { proven }
}

/// Authenticated election on a single group.
pub async fn authenticated_election(ctx: &Ctx, scope: Scope, group: &[ProcessId], row: &[bool]) -> ElectionOutcome {
    authenticated_votes(ctx, scope, group, row).await.elect(group)
}
