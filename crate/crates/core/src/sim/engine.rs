use super::{Ctx, Inbox, Io, PhaseSegment, Shared, Subprotocol};
use crate::crypto::{ByzantineKeys, SignatureAudit, Signer, ThresholdScheme};
use crate::types::ProcessId;
use crate::wire::{Tag, WireError, WireFormat};
use std::cell::{Cell, RefCell};
use std::collections::{BTreeMap, BTreeSet};
use std::future::Future;
use std::pin::Pin;
use std::rc::Rc;
use std::task::{Context, Poll, Waker};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("round cap {0} exceeded before every honest process halted")]
    RoundCapExceeded(u64),
    #[error("adversary sent as {0}, which is not in the fault set")]
    ImpersonationAttempt(ProcessId),
    #[error("message addressed to {0}, outside the system")]
    UnknownReceiver(ProcessId),
    #[error("empty payload from {0}")]
    EmptyPayload(ProcessId),
    #[error("protocol invariant violated: {0}")]
    ProtocolViolation(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Wire(#[from] WireError),
}

#[derive(Clone, Debug)]
pub struct SimSetup {
    pub n: usize,
    pub t: usize,
    pub faulty: BTreeSet<ProcessId>,
    pub kappa: u32,
    pub seed: u64,
    pub round_cap: u64,
}

impl SimSetup {
    /// Default round cap: 20·n, at least 64.
    pub fn default_round_cap(n: usize) -> u64 {
        (20 * n as u64).max(64)
    }

    pub fn new(n: usize, t: usize, faulty: BTreeSet<ProcessId>, seed: u64) -> Self {
        SimSetup { n, t, faulty, kappa: 256, seed, round_cap: Self::default_round_cap(n) }
    }

    pub fn honest(&self) -> impl Iterator<Item = ProcessId> + '_ {
        ProcessId::all(self.n).filter(|p| !self.faulty.contains(p))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Envelope {
    pub sender: ProcessId,
    pub receiver: ProcessId,
    pub tag: Tag,
    pub payload: Rc<[u8]>,
    pub round: u64,
}

/// What the adversary sees when choosing a round's Byzantine traffic.
pub struct AdversaryView<'a> {
    pub round: u64,
    pub n: usize,
    pub t: usize,
    pub seed: u64,
    pub faulty: &'a BTreeSet<ProcessId>,
    pub wire: &'a WireFormat,
    pub keys: &'a ByzantineKeys,
    /// Every honest envelope of this round, before delivery.
    pub honest: &'a [Envelope],
}

pub trait Adversary {
    /// Byzantine traffic for the current round: `(sender, receiver, tag, payload)`.
    fn act(&mut self, view: &AdversaryView<'_>) -> Vec<(ProcessId, ProcessId, Tag, Vec<u8>)>;
}

/// Byzantine processes that never send.
#[derive(Debug, Default, Clone, Copy)]
pub struct NullAdversary;

impl Adversary for NullAdversary {
    fn act(&mut self, _: &AdversaryView<'_>) -> Vec<(ProcessId, ProcessId, Tag, Vec<u8>)> {
        Vec::new()
    }
}

#[derive(Debug)]
pub struct RunOutcome<O> {
    pub outputs: BTreeMap<ProcessId, O>,
    pub rounds_used: u64,
    pub messages_sent: u64,
    pub bits_sent: u64,
    pub phase_trace: Vec<PhaseSegment>,
    /// Round at which each honest process stopped, trailing sends included.
    pub halted_at: BTreeMap<ProcessId, u64>,
    pub audit: SignatureAudit,
}

type Task<O> = Pin<Box<dyn Future<Output = O>>>;

pub struct Engine<O> {
    setup: SimSetup,
    shared: Rc<Shared>,
    keys: ByzantineKeys,
    ios: Vec<Option<Rc<Io>>>,
    tasks: Vec<Option<Task<O>>>,
    outputs: BTreeMap<ProcessId, O>,
    halted_at: BTreeMap<ProcessId, u64>,
    messages: u64,
    bits: u64,
}

impl<O> Engine<O> {
    pub fn new(setup: SimSetup) -> Result<Self, SimError> {
        let wire = WireFormat::new(setup.n, setup.kappa)?;
        if let Some(p) = setup.faulty.iter().find(|p| p.index() >= setup.n) {
            return Err(SimError::Config(format!("faulty process {p} outside 1..={}", setup.n)));
        }
        let scheme = ThresholdScheme::new(setup.n, setup.kappa, setup.seed);
        let shared = Rc::new(Shared { n: setup.n, t: setup.t, wire, scheme: scheme.clone(), round: Cell::new(0) });
        let ios = ProcessId::all(setup.n)
            .map(|id| {
                (!setup.faulty.contains(&id)).then(|| {
                    Rc::new(Io {
                        id,
                        outbox: RefCell::default(),
                        inbox: RefCell::new(Rc::new(Inbox::default())),
                        marks: RefCell::default(),
                    })
                })
            })
            .collect();
        let keys = ByzantineKeys::new(scheme, setup.faulty.clone());
        Ok(Engine {
            tasks: (0..setup.n).map(|_| None).collect(),
            setup,
            shared,
            keys,
            ios,
            outputs: BTreeMap::new(),
            halted_at: BTreeMap::new(),
            messages: 0,
            bits: 0,
        })
    }

    pub fn setup(&self) -> &SimSetup {
        &self.setup
    }

    pub fn round(&self) -> u64 {
        self.shared.round.get()
    }

    pub fn messages_sent(&self) -> u64 {
        self.messages
    }

    pub fn bits_sent(&self) -> u64 {
        self.bits
    }

    pub fn scheme(&self) -> &ThresholdScheme {
        &self.shared.scheme
    }

    /// Context for an honest process. `None` for faulty ones.
    pub fn ctx(&self, p: ProcessId) -> Option<Ctx> {
        let io = self.ios.get(p.index())?.as_ref()?;
        Some(Ctx {
            shared: self.shared.clone(),
            io: io.clone(),
            signer: Signer::new(self.shared.scheme.clone(), p),
        })
    }

    pub fn spawn(&mut self, p: ProcessId, task: impl Future<Output = O> + 'static) {
        assert!(self.ios[p.index()].is_some(), "cannot spawn faulty process {p}");
        self.tasks[p.index()] = Some(Box::pin(task));
    }

    fn poll_all(&mut self) {
        let mut cx = Context::from_waker(Waker::noop());
        let round = self.round();
        for (i, slot) in self.tasks.iter_mut().enumerate() {
            let Some(task) = slot else { continue };
            if let Poll::Ready(out) = task.as_mut().poll(&mut cx) {
                let p = ProcessId(i as u32);
                let trailing = !self.ios[i].as_ref().expect("honest").outbox.borrow().is_empty();
                self.halted_at.insert(p, round + trailing as u64);
                self.outputs.insert(p, out);
                *slot = None;
            }
        }
    }

    fn live(&self) -> bool {
        self.tasks.iter().any(Option::is_some)
    }

    fn outboxes_empty(&self) -> bool {
        self.ios.iter().flatten().all(|io| io.outbox.borrow().is_empty())
    }

    /// Deliver everything queued this round, plus the adversary's traffic, and
    /// advance the round counter. Only honest sends are accounted.
    pub fn deliver_round(&mut self, adversary: &mut dyn Adversary) -> Result<(), SimError> {
        let round = self.round();
        let mut honest = Vec::new();
        for io in self.ios.iter().flatten() {
            for (receiver, tag, payload) in io.outbox.borrow_mut().drain(..) {
                if receiver.index() >= self.setup.n {
                    return Err(SimError::UnknownReceiver(receiver));
                }
                if payload.is_empty() {
                    return Err(SimError::EmptyPayload(io.id));
                }
                self.messages += 1;
                self.bits += 8 * payload.len() as u64;
                honest.push(Envelope { sender: io.id, receiver, tag, payload, round });
            }
        }
        let view = AdversaryView {
            round,
            n: self.setup.n,
            t: self.setup.t,
            seed: self.setup.seed,
            faulty: &self.setup.faulty,
            wire: &self.shared.wire,
            keys: &self.keys,
            honest: &honest,
        };
        let byzantine = adversary.act(&view);

        let mut inboxes: Vec<Inbox> = (0..self.setup.n)
            .map(|_| Inbox { by_tag: Default::default(), wire: Some(self.shared.wire) })
            .collect();
        for env in honest {
            if self.ios[env.receiver.index()].is_some() {
                inboxes[env.receiver.index()].push(env.sender, env.tag, env.payload);
            }
        }
        for (sender, receiver, tag, payload) in byzantine {
            if !self.setup.faulty.contains(&sender) {
                return Err(SimError::ImpersonationAttempt(sender));
            }
            if receiver.index() >= self.setup.n {
                return Err(SimError::UnknownReceiver(receiver));
            }
            if payload.is_empty() {
                return Err(SimError::EmptyPayload(sender));
            }
            if self.ios[receiver.index()].is_some() {
                inboxes[receiver.index()].push(sender, tag, payload.into());
            }
        }
        for (io, inbox) in self.ios.iter().zip(inboxes) {
            if let Some(io) = io {
                *io.inbox.borrow_mut() = Rc::new(inbox);
            }
        }
        self.shared.round.set(round + 1);
        Ok(())
    }

    /// Drive every spawned process to completion.
    pub fn run(mut self, adversary: &mut dyn Adversary) -> Result<RunOutcome<O>, SimError> {
        loop {
            self.poll_all();
            if !self.live() && self.outboxes_empty() {
                break;
            }
            if self.round() >= self.setup.round_cap {
                return Err(SimError::RoundCapExceeded(self.setup.round_cap));
            }
            self.deliver_round(adversary)?;
        }
        let rounds_used = self.round();
        let phase_trace = self.trace(rounds_used);
        Ok(RunOutcome {
            outputs: self.outputs,
            rounds_used,
            messages_sent: self.messages,
            bits_sent: self.bits,
            phase_trace,
            halted_at: self.halted_at,
            audit: self.shared.scheme.audit(),
        })
    }

    /// Segments of the longest-running honest process (smallest id on ties),
    /// covering `[0, rounds_used)`.
    fn trace(&self, rounds_used: u64) -> Vec<PhaseSegment> {
        let Some((&who, _)) = self.halted_at.iter().max_by_key(|(p, r)| (**r, std::cmp::Reverse(**p))) else {
            return Vec::new();
        };
        let marks = self.ios[who.index()].as_ref().expect("honest").marks.borrow().clone();
        let mut starts: Vec<(u64, u32, Subprotocol)> = Vec::new();
        if marks.first().is_none_or(|m| m.0 > 0) {
            starts.push((0, 0, Subprotocol::Setup));
        }
        for m in marks {
            match starts.last_mut() {
                Some(last) if (last.1, last.2) == (m.1, m.2) => {}
                Some(last) if last.0 == m.0 => *last = m,
                _ => starts.push(m),
            }
        }
        let mut out: Vec<PhaseSegment> = Vec::new();
        for (i, &(start, phase, sub)) in starts.iter().enumerate() {
            let end = starts.get(i + 1).map_or(rounds_used, |s| s.0).min(rounds_used);
            if end <= start {
                continue;
            }
            match out.last_mut() {
                Some(last) if (last.phase, last.subprotocol) == (phase, sub) => last.rounds += end - start,
                _ => out.push(PhaseSegment { phase, subprotocol: sub, start, rounds: end - start }),
            }
        }
        out
    }
}

/// Build an engine, spawn one task per honest process and run it.
pub fn run_processes<O, F, Fut>(
    setup: SimSetup,
    adversary: &mut dyn Adversary,
    mut spawn: F,
) -> Result<RunOutcome<O>, SimError>
where
    F: FnMut(Ctx) -> Fut,
    Fut: Future<Output = O> + 'static,
{
    let mut engine = Engine::new(setup)?;
    let honest: Vec<ProcessId> = engine.setup().honest().collect();
    for p in honest {
        let ctx = engine.ctx(p).expect("honest");
        engine.spawn(p, spawn(ctx));
    }
    engine.run(adversary)
}
