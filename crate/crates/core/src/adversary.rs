//! Byzantine strategies and fault placement.
//!
//! Every strategy is rushing: it reads the round's honest envelopes before
//! choosing its own. Strategies that need signatures sign through
//! [`ByzantineKeys`](crate::crypto::ByzantineKeys), so they can only produce
//! shares for faulty ids.

use crate::crypto::{received_share, PartialSig, Statement};
use crate::elections::vote_threshold;
use crate::predictions::m_grouping;
use crate::sim::{stream_rng, Adversary, AdversaryView, Envelope, Stream};
use crate::types::{ProcessId, Value};
use crate::wire::{pack_bits, Kind, Msg, Scope, SigBytes, Tag, ValuePair};
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdversaryError {
    #[error("unknown adversary strategy {0:?}")]
    UnknownStrategy(String),
    #[error("unknown placement rule {0:?}")]
    UnknownPlacement(String),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyId {
    Silent,
    EquivocateValues,
    VoteStuffElections,
    SplitLeaderViews,
    CertificateWithhold,
    RandomBytes,
}

impl StrategyId {
    pub const ALL: [StrategyId; 6] = [
        StrategyId::Silent,
        StrategyId::EquivocateValues,
        StrategyId::VoteStuffElections,
        StrategyId::SplitLeaderViews,
        StrategyId::CertificateWithhold,
        StrategyId::RandomBytes,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyId::Silent => "silent",
            StrategyId::EquivocateValues => "equivocate_values",
            StrategyId::VoteStuffElections => "vote_stuff_elections",
            StrategyId::SplitLeaderViews => "split_leader_views",
            StrategyId::CertificateWithhold => "certificate_withhold",
            StrategyId::RandomBytes => "random_bytes",
        }
    }
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyId {
    type Err = AdversaryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StrategyId::ALL.into_iter().find(|id| id.name() == s).ok_or_else(|| AdversaryError::UnknownStrategy(s.to_string()))
    }
}

/// Build a strategy. `seed` only feeds strategies that draw randomness.
pub fn strategy(id: StrategyId, seed: u64) -> Box<dyn Adversary> {
    Box::new(Strategy { id, seed, pending: Vec::new(), leaders: HashMap::new(), slots: HashMap::new() })
}

pub fn strategy_by_name(name: &str, seed: u64) -> Result<Box<dyn Adversary>, AdversaryError> {
    Ok(strategy(name.parse()?, seed))
}

/// Where the faulty processes sit.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum PlacementRule {
    /// p1..pf.
    First,
    /// Evenly spaced: ⌊i·n/f⌋ for i < f.
    Spread,
    /// Smallest member of each group of the m-grouping, then the second
    /// smallest of each, and so on.
    TargetSmallestPerGroup { m: usize },
}

impl PlacementRule {
    pub fn name(self) -> &'static str {
        match self {
            PlacementRule::First => "first",
            PlacementRule::Spread => "spread",
            PlacementRule::TargetSmallestPerGroup { .. } => "target_smallest_per_group",
        }
    }

    /// Parse a rule name; `m` is used by the group-targeting rule.
    pub fn parse(s: &str, m: usize) -> Result<Self, AdversaryError> {
        match s {
            "first" => Ok(PlacementRule::First),
            "spread" => Ok(PlacementRule::Spread),
            "target_smallest_per_group" => Ok(PlacementRule::TargetSmallestPerGroup { m }),
            _ => Err(AdversaryError::UnknownPlacement(s.to_string())),
        }
    }
}

/// Deterministic fault set of size `min(f, n)`.
pub fn place_faults(n: usize, f: usize, rule: PlacementRule) -> BTreeSet<ProcessId> {
    let f = f.min(n);
    let ids: Vec<usize> = match rule {
        PlacementRule::First => (0..f).collect(),
        PlacementRule::Spread => (0..f).map(|i| i * n / f).collect(),
        PlacementRule::TargetSmallestPerGroup { m } => {
            let m = m.clamp(1, n.max(1));
            let groups = m_grouping(n, m).map(|g| g.groups).unwrap_or_default();
            let depth = groups.iter().map(Vec::len).max().unwrap_or(0);
            (0..depth).flat_map(|d| groups.iter().filter_map(move |g| g.get(d).map(|p| p.index()))).take(f).collect()
        }
    };
    ids.into_iter().map(|i| ProcessId(i as u32)).collect()
}

type Out = Vec<(ProcessId, ProcessId, Tag, Vec<u8>)>;

/// Progress of a faulty process acting as a view leader.
#[derive(Clone, Debug)]
struct LeaderRun {
    view: u32,
    proof: SigBytes,
    values: Vec<ValuePair>,
}

struct Strategy {
    id: StrategyId,
    seed: u64,
    /// Messages scheduled for a later round: (round, sender, receiver, tag, payload).
    pending: Vec<(u64, ProcessId, ProcessId, Tag, Vec<u8>)>,
    leaders: HashMap<(Scope, ProcessId), LeaderRun>,
    /// Inferred slot of each faulty process per phase-king scope.
    slots: HashMap<Scope, BTreeMap<ProcessId, u32>>,
}

/// Per-round facts every strategy uses.
struct Round<'a> {
    v: &'a AdversaryView<'a>,
    honest: Vec<ProcessId>,
    byz: Vec<ProcessId>,
    by_tag: BTreeMap<Tag, Vec<&'a Envelope>>,
}

impl<'a> Round<'a> {
    fn new(v: &'a AdversaryView<'a>) -> Self {
        let honest = ProcessId::all(v.n).filter(|p| !v.faulty.contains(p)).collect();
        let mut by_tag: BTreeMap<Tag, Vec<&Envelope>> = BTreeMap::new();
        for e in v.honest {
            by_tag.entry(e.tag).or_default().push(e);
        }
        Round { v, honest, byz: v.faulty.iter().copied().collect(), by_tag }
    }

    fn first_half(&self, p: ProcessId) -> bool {
        self.honest.iter().position(|h| *h == p).is_some_and(|i| 2 * i < self.honest.len())
    }

    /// Honest receivers of `tag` this round.
    fn receivers(&self, tag: Tag) -> BTreeSet<ProcessId> {
        self.by_tag.get(&tag).into_iter().flatten().map(|e| e.receiver).filter(|r| !self.v.faulty.contains(r)).collect()
    }

    /// All receivers (faulty included) of the first honest sender of `tag`.
    fn audience(&self, tag: Tag) -> Vec<ProcessId> {
        let Some(list) = self.by_tag.get(&tag) else { return Vec::new() };
        let first = list[0].sender;
        let mut r: Vec<ProcessId> = list.iter().filter(|e| e.sender == first).map(|e| e.receiver).collect();
        r.sort();
        r.dedup();
        r
    }

    fn template(&self, tag: Tag) -> Option<Msg> {
        self.by_tag.get(&tag)?.iter().find_map(|e| Msg::decode(tag.kind, &e.payload, self.v.wire).ok())
    }

    fn encode(&self, m: &Msg) -> Vec<u8> {
        m.encode(self.v.wire)
    }

    fn quorum(&self) -> usize {
        self.v.n - self.v.t
    }

    fn sign(&self, b: ProcessId, k: usize, stmt: &Statement) -> Option<PartialSig> {
        self.v.keys.share_sign(b, k, stmt).ok()
    }
}

impl Strategy {
    fn flush(&mut self, round: u64) -> Out {
        let (now, later): (Vec<_>, Vec<_>) = self.pending.drain(..).partition(|e| e.0 <= round);
        self.pending = later;
        now.into_iter().map(|(_, s, r, t, p)| (s, r, t, p)).collect()
    }

    /// Slot `b` occupies in the roster behind `tag`, inferred from honest
    /// senders' slots: first a contiguous offset (committees), then an
    /// m-grouping whose group indices match (elected rosters).
    fn slot_for(&mut self, r: &Round<'_>, tag: Tag, b: ProcessId) -> Option<u32> {
        let scope = tag.scope();
        if !self.slots.contains_key(&scope) {
            let known: Vec<(ProcessId, u32)> = r
                .by_tag
                .get(&tag)
                .into_iter()
                .flatten()
                .filter_map(|e| match Msg::decode(tag.kind, &e.payload, r.v.wire) {
                    Ok(Msg::Slot { slot, .. }) => Some((e.sender, slot)),
                    _ => None,
                })
                .collect();
            let mut table = BTreeMap::new();
            if let Some(&(s0, k0)) = known.first() {
                let offset = s0.0 as i64 - k0 as i64;
                if known.iter().all(|&(s, k)| s.0 as i64 - k as i64 == offset) && offset >= 0 {
                    for &p in &r.byz {
                        if p.0 as i64 >= offset {
                            table.insert(p, (p.0 as i64 - offset) as u32);
                        }
                    }
                } else if let Some(groups) = (1..=r.v.n)
                    .filter_map(|m| m_grouping(r.v.n, m).ok())
                    .find(|g| known.iter().all(|&(s, k)| g.groups.get(k as usize).is_some_and(|grp| grp.contains(&s))))
                {
                    for &p in &r.byz {
                        if let Some(j) = groups.groups.iter().position(|g| g.contains(&p)) {
                            table.insert(p, j as u32);
                        }
                    }
                }
            }
            self.slots.insert(scope, table);
        }
        self.slots[&scope].get(&b).copied()
    }

    /// Unauthenticated value traffic, split by half: first half sees `lo`,
    /// second half sees `hi`.
    fn split_values(&mut self, r: &Round<'_>, out: &mut Out, kinds: &[Kind], lo: Value, hi: Value) {
        let tags: Vec<Tag> = r.by_tag.keys().copied().filter(|t| kinds.contains(&t.kind)).collect();
        for tag in tags {
            let receivers = r.receivers(tag);
            for &b in &r.byz {
                let slot = if matches!(tag.kind, Kind::PkValue | Kind::PkEcho | Kind::PkKing | Kind::PkBase) {
                    match self.slot_for(r, tag, b) {
                        Some(s) => Some(s),
                        None => continue,
                    }
                } else {
                    None
                };
                for &to in &receivers {
                    let x = if r.first_half(to) { lo } else { hi };
                    let msg = match slot {
                        Some(slot) => Msg::Slot { slot, value: x },
                        None => Msg::Value(x),
                    };
                    out.push((b, to, tag, r.encode(&msg)));
                }
            }
        }
    }

    fn equivocate(&mut self, r: &Round<'_>, out: &mut Out) {
        self.split_values(
            r,
            out,
            &[Kind::GcValue, Kind::GcEcho, Kind::KingResult, Kind::CommitteeDecision, Kind::PkValue, Kind::PkEcho, Kind::PkKing, Kind::PkBase],
            0,
            1,
        );
        let k = r.v.t + 1;
        for (&tag, _) in r.by_tag.iter().filter(|(t, _)| t.kind == Kind::Certify) {
            for &b in &r.byz {
                for to in r.receivers(tag) {
                    let x: Value = if r.first_half(to) { 0 } else { 1 };
                    if let Some(s) = r.sign(b, k, &Statement::Certify(Some(x))) {
                        out.push((b, to, tag, r.encode(&Msg::Certify { value: x, share: s.bytes })));
                    }
                }
            }
        }
        for (&tag, _) in r.by_tag.iter().filter(|(t, _)| t.kind == Kind::Conciliate) {
            let Some(Msg::Conciliate { list, .. }) = r.template(tag) else { continue };
            for &b in &r.byz {
                for to in r.receivers(tag) {
                    let value = if r.first_half(to) { b } else { list.first().copied().unwrap_or(b) };
                    out.push((b, to, tag, r.encode(&Msg::Conciliate { value, list: vec![b] })));
                }
            }
        }
    }

    fn stuff_votes(&mut self, r: &Round<'_>, out: &mut Out) {
        let n = r.v.n;
        for (&tag, _) in r.by_tag.iter() {
            match tag.kind {
                Kind::VoteRow => {
                    let row = pack_bits((0..n).map(|j| r.v.faulty.contains(&ProcessId(j as u32))), n);
                    for &b in &r.byz {
                        for to in r.receivers(tag) {
                            out.push((b, to, tag, r.encode(&Msg::Bits(row.clone()))));
                        }
                    }
                }
                Kind::VoteBits => {
                    let group = r.audience(tag);
                    let bits = pack_bits(group.iter().map(|p| r.v.faulty.contains(p)), group.len());
                    for &b in &r.byz {
                        for to in r.receivers(tag) {
                            out.push((b, to, tag, r.encode(&Msg::Bits(bits.clone()))));
                        }
                    }
                }
                Kind::VoteIndices => {
                    let group = r.audience(tag);
                    let mine: Vec<ProcessId> = group.iter().copied().filter(|p| r.v.faulty.contains(p)).collect();
                    if mine.is_empty() {
                        continue;
                    }
                    for &b in &r.byz {
                        for to in r.receivers(tag) {
                            out.push((b, to, tag, r.encode(&Msg::Indices(mine.clone()))));
                        }
                    }
                }
                Kind::LeaderClaim => {
                    for &b in &r.byz {
                        for &to in &r.honest {
                            out.push((b, to, tag, r.encode(&Msg::Leader(b))));
                        }
                    }
                }
                Kind::Conciliate => {
                    for &b in &r.byz {
                        for to in r.receivers(tag) {
                            out.push((b, to, tag, r.encode(&Msg::Conciliate { value: b, list: vec![b] })));
                        }
                    }
                }
                Kind::AuthVote => self.harvest_votes(r, tag),
                _ => {}
            }
        }
    }

    /// Pool honest votes addressed to faulty processes with the faulty
    /// processes' own votes; any faulty target reaching the threshold
    /// broadcasts its proof next round.
    fn harvest_votes(&mut self, r: &Round<'_>, tag: Tag) {
        let k = vote_threshold(r.v.n);
        let proof_tag = tag.scope().tag(Kind::VoteProof);
        for &target in &r.byz {
            let stmt = Statement::Vote(target);
            let mut shares: Vec<PartialSig> = r.by_tag[&tag]
                .iter()
                .filter(|e| e.receiver == target)
                .filter_map(|e| match Msg::decode(tag.kind, &e.payload, r.v.wire) {
                    Ok(Msg::AuthVote { target: t, share }) if t == target => Some(received_share(e.sender, k, &stmt, share)),
                    _ => None,
                })
                .collect();
            shares.extend(r.byz.iter().filter_map(|&b| r.sign(b, k, &stmt)));
            if shares.len() < k {
                continue;
            }
            let Ok(proof) = r.v.keys.scheme().combine_statement(k, &stmt, &shares[..k]) else { continue };
            let payload = r.encode(&Msg::VoteProof { holder: target, proof });
            for &to in &r.honest {
                self.pending.push((r.v.round + 1, target, to, proof_tag, payload.clone()));
            }
        }
    }

    /// Try to become a view leader from honest ⟨val⟩ shares addressed to
    /// faulty processes. Returns the new leaders for this scope.
    fn claim_leadership(&mut self, r: &Round<'_>, tag: Tag) -> Vec<ProcessId> {
        let q = r.quorum();
        let max_view = (r.v.round / crate::auth::VIEW_ROUNDS + 2) as u32;
        let mut won = Vec::new();
        for &b in &r.byz {
            let vals: Vec<(ProcessId, ValuePair, SigBytes)> = r.by_tag[&tag]
                .iter()
                .filter(|e| e.receiver == b)
                .filter_map(|e| match Msg::decode(tag.kind, &e.payload, r.v.wire) {
                    Ok(Msg::Val { value, share, .. }) => Some((e.sender, value, share)),
                    _ => None,
                })
                .collect();
            let Some((s0, _, sh0)) = vals.first() else { continue };
            let scheme = r.v.keys.scheme();
            let Some(view) = (1..=max_view).find(|&v| scheme.share_verify(*s0, q, &Statement::Leader { leader: b, view: v }, sh0)) else {
                continue;
            };
            let stmt = Statement::Leader { leader: b, view };
            let mut shares: Vec<PartialSig> = vals
                .iter()
                .filter(|(s, _, sh)| scheme.share_verify(*s, q, &stmt, sh))
                .map(|(s, _, sh)| received_share(*s, q, &stmt, sh.clone()))
                .collect();
            shares.extend(r.byz.iter().filter_map(|&x| r.sign(x, q, &stmt)));
            if shares.len() < q {
                continue;
            }
            let Ok(proof) = scheme.combine_statement(q, &stmt, &shares[..q]) else { continue };
            let mut values: Vec<ValuePair> = vals.iter().map(|(_, v, _)| v.clone()).collect();
            values.sort();
            values.dedup();
            self.leaders.insert((tag.scope(), b), LeaderRun { view, proof, values });
            won.push(b);
        }
        won
    }

    /// Combine honest shares of kind `kind` sent to faulty leaders into a
    /// certificate, padding with faulty shares.
    fn leader_quorum(
        &self,
        r: &Round<'_>,
        tag: Tag,
        b: ProcessId,
        stmt_of: impl Fn(&ValuePair, u32) -> Statement,
    ) -> Option<(ValuePair, SigBytes, LeaderRun)> {
        let run = self.leaders.get(&(tag.scope(), b))?.clone();
        let q = r.quorum();
        let mut groups: BTreeMap<ValuePair, Vec<PartialSig>> = BTreeMap::new();
        for e in r.by_tag.get(&tag)?.iter().filter(|e| e.receiver == b) {
            let (value, share) = match Msg::decode(tag.kind, &e.payload, r.v.wire) {
                Ok(Msg::Ack { value, share }) | Ok(Msg::DecideShare { value, share }) => (value, share),
                _ => continue,
            };
            let stmt = stmt_of(&value, run.view);
            if r.v.keys.scheme().share_verify(e.sender, q, &stmt, &share) {
                groups.entry(value).or_default().push(received_share(e.sender, q, &stmt, share));
            }
        }
        for (value, mut shares) in groups {
            let stmt = stmt_of(&value, run.view);
            shares.extend(r.byz.iter().filter_map(|&x| r.sign(x, q, &stmt)));
            if shares.len() >= q {
                if let Ok(sig) = r.v.keys.scheme().combine_statement(q, &stmt, &shares[..q]) {
                    return Some((value, sig, run));
                }
            }
        }
        None
    }

    /// Faulty leaders: propose conflicting values to the two honest halves,
    /// relay the conflict, and finish any certificate they can.
    fn split_views(&mut self, r: &Round<'_>, withhold: bool) {
        let next = r.v.round + 1;
        let tags: Vec<Tag> = r.by_tag.keys().copied().collect();
        for tag in tags {
            let scope = tag.scope();
            match tag.kind {
                Kind::Val => {
                    for b in self.claim_leadership(r, tag) {
                        let run = self.leaders[&(scope, b)].clone();
                        let a = run.values.first().cloned();
                        let z = run.values.last().cloned();
                        for &to in &r.honest {
                            let pick = if withhold || r.first_half(to) { a.clone() } else { z.clone() };
                            if let Some(value) = pick {
                                if withhold && !r.first_half(to) {
                                    continue;
                                }
                                let Some(sig) = r.sign(b, 1, &Statement::Propose { value: value.clone(), view: run.view }) else { continue };
                                let msg = Msg::Propose { value, commit: None, leader_proof: run.proof.clone(), sig: sig.bytes };
                                self.pending.push((next, b, to, scope.tag(Kind::Propose), r.encode(&msg)));
                            }
                        }
                        if !withhold && a != z {
                            // Relay the other half's value so honest receivers see a conflict.
                            for &to in &r.honest {
                                let value = if r.first_half(to) { z.clone() } else { a.clone() }.expect("non-empty");
                                let Some(sig) = r.sign(b, 1, &Statement::Propose { value: value.clone(), view: run.view }) else { continue };
                                let msg = Msg::Forward { leader: b, value, leader_proof: run.proof.clone(), sig: sig.bytes };
                                for &x in &r.byz {
                                    self.pending.push((next + 1, x, to, scope.tag(Kind::Forward), r.encode(&msg)));
                                }
                            }
                        }
                    }
                }
                Kind::Ack => {
                    for &b in &r.byz {
                        let Some((value, cert, run)) =
                            self.leader_quorum(r, tag, b, |v, view| Statement::Commit { value: v.clone(), view })
                        else {
                            continue;
                        };
                        let msg = Msg::Commit { value, cert, leader_proof: run.proof };
                        for &to in r.honest.iter().filter(|p| !withhold || r.first_half(**p)) {
                            self.pending.push((next, b, to, scope.tag(Kind::Commit), r.encode(&msg)));
                        }
                    }
                }
                Kind::DecideShare => {
                    for &b in &r.byz {
                        let Some((value, proof, run)) = self.leader_quorum(r, tag, b, |v, _| Statement::Decide(v.clone())) else {
                            continue;
                        };
                        let msg = Msg::Decide { value, proof, leader_proof: run.proof };
                        let to_all = !withhold;
                        for &to in r.honest.iter().take(if to_all { usize::MAX } else { 1 }) {
                            self.pending.push((next, b, to, scope.tag(Kind::Decide), r.encode(&msg)));
                        }
                    }
                }
                _ => {}
            }
        }
    }

    fn split_leaders(&mut self, r: &Round<'_>, out: &mut Out) {
        // Unauthenticated kings and committee members split the honest halves.
        self.split_values(r, out, &[Kind::PkKing, Kind::PkBase, Kind::KingResult, Kind::CommitteeDecision], 1, 0);
        let smallest = r.honest.first().copied();
        for (&tag, _) in r.by_tag.iter().filter(|(t, _)| t.kind == Kind::LeaderClaim) {
            for &b in &r.byz {
                for &to in &r.honest {
                    let leader = if r.first_half(to) { b } else { smallest.unwrap_or(b) };
                    out.push((b, to, tag, r.encode(&Msg::Leader(leader))));
                }
            }
        }
        self.split_views(r, false);
    }

    fn withhold(&mut self, r: &Round<'_>, out: &mut Out) {
        // Certify shares for the first honest proposal reach only the first half.
        let k = r.v.t + 1;
        for (&tag, _) in r.by_tag.iter().filter(|(t, _)| t.kind == Kind::Certify) {
            let Some(Msg::Certify { value, .. }) = r.template(tag) else { continue };
            for &b in &r.byz {
                let Some(s) = r.sign(b, k, &Statement::Certify(Some(value))) else { continue };
                for to in r.receivers(tag).into_iter().filter(|p| r.first_half(*p)) {
                    out.push((b, to, tag, r.encode(&Msg::Certify { value, share: s.bytes.clone() })));
                }
            }
        }
        self.split_views(r, true);
    }

    fn random_bytes(&mut self, r: &Round<'_>, out: &mut Out) {
        if r.honest.is_empty() {
            return;
        }
        let mut rng = stream_rng(self.seed, Stream::Adversary, r.v.round, 0);
        let tags: Vec<Tag> = r.by_tag.keys().copied().collect();
        for &b in &r.byz {
            for _ in 0..4 {
                let tag = if !tags.is_empty() && rng.gen_bool(0.8) {
                    tags[rng.gen_range(0..tags.len())]
                } else {
                    let kind = Kind::ALL[rng.gen_range(0..Kind::ALL.len())];
                    Tag::new(kind, rng.gen_range(0..8), rng.gen_range(0..32), rng.gen_range(0..4))
                };
                let to = r.honest[rng.gen_range(0..r.honest.len())];
                let payload: Vec<u8> = match r.by_tag.get(&tag).and_then(|l| l.first()) {
                    // Mutate a real payload half the time.
                    Some(e) if rng.gen_bool(0.5) => {
                        let mut p = e.payload.to_vec();
                        let i = rng.gen_range(0..p.len());
                        p[i] ^= 1 << rng.gen_range(0..8);
                        p
                    }
                    _ => {
                        let len = rng.gen_range(1..=80);
                        (0..len).map(|_| rng.gen()).collect()
                    }
                };
                out.push((b, to, tag, payload));
            }
        }
    }
}

impl Adversary for Strategy {
    fn act(&mut self, view: &AdversaryView<'_>) -> Out {
        let mut out = self.flush(view.round);
        if self.id == StrategyId::Silent || view.faulty.is_empty() {
            return out;
        }
        let r = Round::new(view);
        match self.id {
            StrategyId::Silent => {}
            StrategyId::EquivocateValues => self.equivocate(&r, &mut out),
            StrategyId::VoteStuffElections => self.stuff_votes(&r, &mut out),
            StrategyId::SplitLeaderViews => self.split_leaders(&r, &mut out),
            StrategyId::CertificateWithhold => self.withhold(&r, &mut out),
            StrategyId::RandomBytes => self.random_bytes(&r, &mut out),
        }
        out
    }
}
