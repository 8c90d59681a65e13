//! Synchronous lockstep simulation.
//!
//! Each honest process is an `async` state machine driven by [`Engine`]. A
//! process yields at every round boundary through [`Ctx::next_round`]; the
//! engine then collects all outboxes, shows them to the (rushing) adversary,
//! and delivers every message atomically before the next poll.

mod engine;
mod rng;

pub use engine::{run_processes, Adversary, AdversaryView, Engine, Envelope, NullAdversary, RunOutcome, SimError, SimSetup};
pub use rng::{stream_rng, Stream};

use crate::crypto::{Signer, ThresholdScheme};
use crate::types::ProcessId;
use crate::wire::{Msg, Tag, WireFormat};
use std::cell::{Cell, RefCell};
use std::collections::HashMap;
use std::future::Future;
use std::pin::Pin;
use std::rc::Rc;
use std::task::{Context, Poll};

/// Coarse label for the trace of where rounds are spent.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subprotocol {
    Setup,
    Preprocessing,
    GradedConsensus,
    EarlyStopping,
    Election,
    CommitteeAgreement,
    Certification,
    ValidatedAgreement,
    DecisionBroadcast,
}

impl Subprotocol {
    pub fn name(self) -> &'static str {
        match self {
            Subprotocol::Setup => "setup",
            Subprotocol::Preprocessing => "preprocessing",
            Subprotocol::GradedConsensus => "graded-consensus",
            Subprotocol::EarlyStopping => "early-stopping",
            Subprotocol::Election => "election",
            Subprotocol::CommitteeAgreement => "committee-agreement",
            Subprotocol::Certification => "certification",
            Subprotocol::ValidatedAgreement => "validated-agreement",
            Subprotocol::DecisionBroadcast => "decision-broadcast",
        }
    }
}

/// Contiguous run of rounds spent in one subprotocol of one phase.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhaseSegment {
    pub phase: u32,
    pub subprotocol: Subprotocol,
    pub start: u64,
    pub rounds: u64,
}

/// Messages delivered to one process in one round, grouped by tag.
#[derive(Debug, Default)]
pub struct Inbox {
    by_tag: HashMap<Tag, Vec<(ProcessId, Rc<[u8]>)>>,
    wire: Option<WireFormat>,
}

impl Inbox {
    fn push(&mut self, sender: ProcessId, tag: Tag, payload: Rc<[u8]>) {
        self.by_tag.entry(tag).or_default().push((sender, payload));
    }

    /// Raw payloads for a tag in delivery order, duplicates included.
    pub fn raw(&self, tag: Tag) -> &[(ProcessId, Rc<[u8]>)] {
        self.by_tag.get(&tag).map(Vec::as_slice).unwrap_or(&[])
    }

    /// First well-formed message per sender for `tag`, in sender order.
    pub fn collect(&self, tag: Tag) -> Vec<(ProcessId, Msg)> {
        let Some(wire) = &self.wire else { return Vec::new() };
        let mut out: Vec<(ProcessId, Msg)> = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for (sender, payload) in self.raw(tag) {
            if seen.contains(sender) {
                continue;
            }
            if let Ok(msg) = Msg::decode(tag.kind, payload, wire) {
                seen.insert(*sender);
                out.push((*sender, msg));
            }
        }
        out.sort_by_key(|(s, _)| *s);
        out
    }

    pub fn is_empty(&self) -> bool {
        self.by_tag.is_empty()
    }
}

pub(crate) struct Shared {
    n: usize,
    t: usize,
    wire: WireFormat,
    scheme: Rc<ThresholdScheme>,
    round: Cell<u64>,
}

pub(crate) struct Io {
    id: ProcessId,
    outbox: RefCell<Vec<(ProcessId, Tag, Rc<[u8]>)>>,
    inbox: RefCell<Rc<Inbox>>,
    marks: RefCell<Vec<(u64, u32, Subprotocol)>>,
}

/// Handle a process uses to talk to the engine.
#[derive(Clone)]
pub struct Ctx {
    shared: Rc<Shared>,
    io: Rc<Io>,
    signer: Signer,
}

impl Ctx {
    pub fn id(&self) -> ProcessId {
        self.io.id
    }

    pub fn n(&self) -> usize {
        self.shared.n
    }

    /// Configured resilience threshold.
    pub fn t(&self) -> usize {
        self.shared.t
    }

    pub fn wire(&self) -> &WireFormat {
        &self.shared.wire
    }

    pub fn signer(&self) -> &Signer {
        &self.signer
    }

    pub fn scheme(&self) -> &ThresholdScheme {
        &self.shared.scheme
    }

    /// Rounds completed so far.
    pub fn round(&self) -> u64 {
        self.shared.round.get()
    }

    pub fn send(&self, to: ProcessId, tag: Tag, msg: &Msg) {
        let payload: Rc<[u8]> = msg.encode(&self.shared.wire).into();
        self.io.outbox.borrow_mut().push((to, tag, payload));
    }

    pub fn multicast(&self, to: impl IntoIterator<Item = ProcessId>, tag: Tag, msg: &Msg) {
        let payload: Rc<[u8]> = msg.encode(&self.shared.wire).into();
        let mut out = self.io.outbox.borrow_mut();
        for p in to {
            out.push((p, tag, payload.clone()));
        }
    }

    /// Send to all n processes, including self.
    pub fn broadcast(&self, tag: Tag, msg: &Msg) {
        self.multicast(ProcessId::all(self.shared.n), tag, msg);
    }

    /// Resolves once the current round's messages are delivered.
    pub fn next_round(&self) -> NextRound {
        NextRound { shared: self.shared.clone(), io: self.io.clone(), target: self.round() + 1 }
    }

    pub async fn idle(&self, rounds: u64) {
        for _ in 0..rounds {
            self.next_round().await;
        }
    }

    pub async fn idle_until(&self, round: u64) {
        while self.round() < round {
            self.next_round().await;
        }
    }

    /// Mark the start of a traced segment.
    pub fn enter(&self, phase: u32, sub: Subprotocol) {
        self.io.marks.borrow_mut().push((self.round(), phase, sub));
    }
}

pub struct NextRound {
    shared: Rc<Shared>,
    io: Rc<Io>,
    target: u64,
}

impl Future for NextRound {
    type Output = Rc<Inbox>;

    fn poll(self: Pin<&mut Self>, _cx: &mut Context<'_>) -> Poll<Rc<Inbox>> {
        if self.shared.round.get() >= self.target {
            Poll::Ready(self.io.inbox.borrow().clone())
        } else {
            Poll::Pending
        }
    }
}

/// Await several subprotocol futures that share the same rounds.
pub async fn join_all<F: Future>(futs: Vec<F>) -> Vec<F::Output> {
    JoinAll { futs: futs.into_iter().map(|f| JoinSlot::Pending(Box::pin(f))).collect() }.await
}

enum JoinSlot<F: Future> {
    Pending(Pin<Box<F>>),
    Done(Option<F::Output>),
}

struct JoinAll<F: Future> {
    futs: Vec<JoinSlot<F>>,
}

// Outputs are moved out, never pinned; the futures themselves are boxed.
impl<F: Future> Unpin for JoinAll<F> {}

impl<F: Future> Future for JoinAll<F> {
    type Output = Vec<F::Output>;

    fn poll(mut self: Pin<&mut Self>, cx: &mut Context<'_>) -> Poll<Self::Output> {
        let mut all_done = true;
        for slot in self.futs.iter_mut() {
            if let JoinSlot::Pending(f) = slot {
                match f.as_mut().poll(cx) {
                    Poll::Ready(v) => *slot = JoinSlot::Done(Some(v)),
                    Poll::Pending => all_done = false,
                }
            }
        }
        if !all_done {
            return Poll::Pending;
        }
        let out = self
            .futs
            .iter_mut()
            .map(|s| match s {
                JoinSlot::Done(v) => v.take().expect("join output taken twice"),
                JoinSlot::Pending(_) => unreachable!(),
            })
            .collect();
        Poll::Ready(out)
    }
}
