//! Payload encoding.
//!
//! Every protocol message is a typed [`Msg`] that serialises to the bytes the
//! engine accounts for. Field widths depend only on `n` and κ:
//!
//! | field            | width                         |
//! |------------------|-------------------------------|
//! | value            | 1 byte                        |
//! | process id/index | ⌈⌈log₂ n⌉ / 8⌉ bytes (min 1)  |
//! | view number      | 4 bytes                       |
//! | signature        | κ / 8 bytes                   |
//! | vote bitstring   | ⌈\|G\| / 8⌉ bytes             |
//!
//! The [`Tag`] routes a payload to a protocol step and is not accounted.
//! Decoding is strict: short input, trailing bytes, out-of-range ids, unsorted
//! index lists and bad flags are all rejected, and receivers drop anything that
//! fails to decode.

use crate::types::{ceil_log2, ProcessId, Value};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("payload truncated")]
    Truncated,
    #[error("{0} trailing bytes after payload")]
    Trailing(usize),
    #[error("process id {0} out of range")]
    IdOutOfRange(u64),
    #[error("index list is empty or not strictly increasing")]
    BadIndexList,
    #[error("invalid flag byte {0:#04x}")]
    BadFlag(u8),
    #[error("unknown message kind {0}")]
    UnknownKind(u8),
    #[error("security parameter must be a positive multiple of 8 no larger than 1024, got {0}")]
    BadKappa(u32),
    #[error("n must be at least 1")]
    BadN,
}

/// Fixed widths for one system size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WireFormat {
    n: usize,
    id_bytes: usize,
    sig_bytes: usize,
}

impl WireFormat {
    pub fn new(n: usize, kappa: u32) -> Result<Self, WireError> {
        if n == 0 {
            return Err(WireError::BadN);
        }
        if kappa == 0 || kappa % 8 != 0 || kappa > 1024 {
            return Err(WireError::BadKappa(kappa));
        }
        let id_bits = ceil_log2(n).max(1) as usize;
        Ok(WireFormat { n, id_bytes: id_bits.div_ceil(8), sig_bytes: kappa as usize / 8 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn id_bytes(&self) -> usize {
        self.id_bytes
    }

    pub fn sig_bytes(&self) -> usize {
        self.sig_bytes
    }

    pub fn bitstring_bytes(group_len: usize) -> usize {
        group_len.div_ceil(8)
    }
}

/// Signature bytes as carried on the wire.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SigBytes(pub Box<[u8]>);

impl std::fmt::Debug for SigBytes {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "sig:")?;
        for b in self.0.iter().take(4) {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

/// Strong-unanimity certificate: a (t+1)-threshold signature over either the
/// carried value or ⊥.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StrongCert {
    pub bottom: bool,
    pub sig: SigBytes,
}

/// A value together with the certificate that makes it externally valid.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ValuePair {
    pub value: Value,
    pub cert: StrongCert,
}

/// A commit certificate and the view it was formed in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommitRef {
    pub view: u32,
    pub cert: SigBytes,
}

/// Message kinds. The kind fixes the payload shape.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum Kind {
    GcValue = 0,
    GcEcho = 1,
    PkValue = 2,
    PkEcho = 3,
    PkKing = 4,
    PkBase = 5,
    KingResult = 6,
    CommitteeDecision = 7,
    VoteBits = 8,
    VoteRow = 9,
    LeaderClaim = 10,
    VoteIndices = 11,
    Conciliate = 12,
    Certify = 13,
    Certified = 14,
    NoCommon = 15,
    AuthVote = 16,
    VoteProof = 17,
    Val = 18,
    Propose = 19,
    Forward = 20,
    Ack = 21,
    Commit = 22,
    ForwardCommit = 23,
    DecideShare = 24,
    Decide = 25,
    Decision = 26,
}

impl Kind {
    pub const ALL: [Kind; 27] = [
        Kind::GcValue,
        Kind::GcEcho,
        Kind::PkValue,
        Kind::PkEcho,
        Kind::PkKing,
        Kind::PkBase,
        Kind::KingResult,
        Kind::CommitteeDecision,
        Kind::VoteBits,
        Kind::VoteRow,
        Kind::LeaderClaim,
        Kind::VoteIndices,
        Kind::Conciliate,
        Kind::Certify,
        Kind::Certified,
        Kind::NoCommon,
        Kind::AuthVote,
        Kind::VoteProof,
        Kind::Val,
        Kind::Propose,
        Kind::Forward,
        Kind::Ack,
        Kind::Commit,
        Kind::ForwardCommit,
        Kind::DecideShare,
        Kind::Decide,
        Kind::Decision,
    ];

    pub fn from_u8(b: u8) -> Result<Kind, WireError> {
        Kind::ALL.get(b as usize).copied().ok_or(WireError::UnknownKind(b))
    }
}

/// Routing metadata: which step of which protocol instance a payload belongs to.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tag {
    pub kind: Kind,
    pub phase: u16,
    pub step: u16,
    pub index: u32,
}

impl Tag {
    pub fn new(kind: Kind, phase: u16, step: u16, index: u32) -> Tag {
        Tag { kind, phase, step, index }
    }

    pub fn scope(self) -> Scope {
        Scope { phase: self.phase, step: self.step, index: self.index }
    }
}

/// The non-kind part of a tag: identifies one subprotocol instance.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Scope {
    pub phase: u16,
    pub step: u16,
    pub index: u32,
}

impl Scope {
    pub fn new(phase: u16, step: u16) -> Scope {
        Scope { phase, step, index: 0 }
    }

    pub fn tag(self, kind: Kind) -> Tag {
        Tag { kind, phase: self.phase, step: self.step, index: self.index }
    }

    pub fn indexed(self, index: u32) -> Scope {
        Scope { index, ..self }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Msg {
    /// `GcValue`, `GcEcho`, `KingResult`, `CommitteeDecision`.
    Value(Value),
    /// `PkValue`, `PkEcho`, `PkKing`, `PkBase`: roster slot of the sender plus a value.
    Slot { slot: u32, value: Value },
    /// `VoteBits`, `VoteRow`: raw bitstring, LSB-first within each byte.
    Bits(Vec<u8>),
    /// `LeaderClaim`.
    Leader(ProcessId),
    /// `VoteIndices`: non-empty, strictly increasing.
    Indices(Vec<ProcessId>),
    /// `Conciliate`: candidate value plus the sender's candidate list.
    Conciliate { value: ProcessId, list: Vec<ProcessId> },
    Certify { value: Value, share: SigBytes },
    Certified { value: Value, cert: SigBytes },
    NoCommon { share: SigBytes },
    AuthVote { target: ProcessId, share: SigBytes },
    VoteProof { holder: ProcessId, proof: SigBytes },
    Val { value: ValuePair, commit: Option<CommitRef>, share: SigBytes },
    /// `sig` is the leader's own signature over the proposal, so relayed copies stay attributable.
    Propose { value: ValuePair, commit: Option<CommitRef>, leader_proof: SigBytes, sig: SigBytes },
    Forward { leader: ProcessId, value: ValuePair, leader_proof: SigBytes, sig: SigBytes },
    Ack { value: ValuePair, share: SigBytes },
    Commit { value: ValuePair, cert: SigBytes, leader_proof: SigBytes },
    ForwardCommit { leader: ProcessId, value: ValuePair, cert: SigBytes, leader_proof: SigBytes },
    DecideShare { value: ValuePair, share: SigBytes },
    Decide { value: ValuePair, proof: SigBytes, leader_proof: SigBytes },
    Decision { value: ValuePair, proof: SigBytes },
}

struct Writer<'a> {
    fmt: &'a WireFormat,
    out: Vec<u8>,
}

impl Writer<'_> {
    fn u8(&mut self, b: u8) {
        self.out.push(b);
    }

    fn id(&mut self, id: u64) {
        let w = self.fmt.id_bytes;
        self.out.extend_from_slice(&id.to_be_bytes()[8 - w..]);
    }

    fn view(&mut self, v: u32) {
        self.out.extend_from_slice(&v.to_be_bytes());
    }

    fn sig(&mut self, s: &SigBytes) {
        debug_assert_eq!(s.0.len(), self.fmt.sig_bytes, "signature width");
        self.out.extend_from_slice(&s.0);
    }

    fn pair(&mut self, p: &ValuePair) {
        self.u8(p.value);
        self.u8(p.cert.bottom as u8);
        self.sig(&p.cert.sig);
    }

    fn commit(&mut self, c: &Option<CommitRef>) {
        match c {
            None => self.u8(0),
            Some(c) => {
                self.u8(1);
                self.view(c.view);
                self.sig(&c.cert);
            }
        }
    }
}

struct Reader<'a> {
    fmt: &'a WireFormat,
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8], WireError> {
        if self.buf.len() < k {
            return Err(WireError::Truncated);
        }
        let (head, rest) = self.buf.split_at(k);
        self.buf = rest;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, WireError> {
        Ok(self.take(1)?[0])
    }

    fn flag(&mut self) -> Result<bool, WireError> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            b => Err(WireError::BadFlag(b)),
        }
    }

    fn raw_id(&mut self) -> Result<u64, WireError> {
        let bytes = self.take(self.fmt.id_bytes)?;
        Ok(bytes.iter().fold(0u64, |acc, b| (acc << 8) | *b as u64))
    }

    fn id(&mut self) -> Result<ProcessId, WireError> {
        let raw = self.raw_id()?;
        if raw >= self.fmt.n as u64 {
            return Err(WireError::IdOutOfRange(raw));
        }
        Ok(ProcessId(raw as u32))
    }

    fn slot(&mut self) -> Result<u32, WireError> {
        // Roster slots index lists of at most n entries.
        Ok(self.id()?.0)
    }

    fn view(&mut self) -> Result<u32, WireError> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn sig(&mut self) -> Result<SigBytes, WireError> {
        Ok(SigBytes(self.take(self.fmt.sig_bytes)?.into()))
    }

    fn pair(&mut self) -> Result<ValuePair, WireError> {
        let value = self.u8()?;
        let bottom = self.flag()?;
        let sig = self.sig()?;
        Ok(ValuePair { value, cert: StrongCert { bottom, sig } })
    }

    fn commit(&mut self) -> Result<Option<CommitRef>, WireError> {
        if self.flag()? {
            let view = self.view()?;
            let cert = self.sig()?;
            Ok(Some(CommitRef { view, cert }))
        } else {
            Ok(None)
        }
    }

    fn id_list(&mut self) -> Result<Vec<ProcessId>, WireError> {
        let w = self.fmt.id_bytes;
        if self.buf.is_empty() || self.buf.len() % w != 0 {
            return Err(if self.buf.is_empty() { WireError::BadIndexList } else { WireError::Truncated });
        }
        let mut out = Vec::with_capacity(self.buf.len() / w);
        while !self.buf.is_empty() {
            let id = self.id()?;
            if out.last().is_some_and(|last: &ProcessId| *last >= id) {
                return Err(WireError::BadIndexList);
            }
            out.push(id);
        }
        Ok(out)
    }

    fn rest(&mut self) -> &'a [u8] {
        std::mem::take(&mut self.buf)
    }

    fn finish(self) -> Result<(), WireError> {
        match self.buf.len() {
            0 => Ok(()),
            k => Err(WireError::Trailing(k)),
        }
    }
}

impl Msg {
    pub fn encode(&self, fmt: &WireFormat) -> Vec<u8> {
        let mut w = Writer { fmt, out: Vec::with_capacity(8) };
        match self {
            Msg::Value(v) => w.u8(*v),
            Msg::Slot { slot, value } => {
                w.id(*slot as u64);
                w.u8(*value);
            }
            Msg::Bits(b) => w.out.extend_from_slice(b),
            Msg::Leader(p) => w.id(p.0 as u64),
            Msg::Indices(list) => {
                for p in list {
                    w.id(p.0 as u64);
                }
            }
            Msg::Conciliate { value, list } => {
                w.id(value.0 as u64);
                for p in list {
                    w.id(p.0 as u64);
                }
            }
            Msg::Certify { value, share } => {
                w.u8(*value);
                w.sig(share);
            }
            Msg::Certified { value, cert } => {
                w.u8(*value);
                w.sig(cert);
            }
            Msg::NoCommon { share } => w.sig(share),
            Msg::AuthVote { target, share } => {
                w.id(target.0 as u64);
                w.sig(share);
            }
            Msg::VoteProof { holder, proof } => {
                w.id(holder.0 as u64);
                w.sig(proof);
            }
            Msg::Val { value, commit, share } => {
                w.pair(value);
                w.commit(commit);
                w.sig(share);
            }
            Msg::Propose { value, commit, leader_proof, sig } => {
                w.pair(value);
                w.commit(commit);
                w.sig(leader_proof);
                w.sig(sig);
            }
            Msg::Forward { leader, value, leader_proof, sig } => {
                w.id(leader.0 as u64);
                w.pair(value);
                w.sig(leader_proof);
                w.sig(sig);
            }
            Msg::Ack { value, share } | Msg::DecideShare { value, share } => {
                w.pair(value);
                w.sig(share);
            }
            Msg::Commit { value, cert, leader_proof } => {
                w.pair(value);
                w.sig(cert);
                w.sig(leader_proof);
            }
            Msg::ForwardCommit { leader, value, cert, leader_proof } => {
                w.id(leader.0 as u64);
                w.pair(value);
                w.sig(cert);
                w.sig(leader_proof);
            }
            Msg::Decide { value, proof, leader_proof } => {
                w.pair(value);
                w.sig(proof);
                w.sig(leader_proof);
            }
            Msg::Decision { value, proof } => {
                w.pair(value);
                w.sig(proof);
            }
        }
        w.out
    }

    pub fn decode(kind: Kind, bytes: &[u8], fmt: &WireFormat) -> Result<Msg, WireError> {
        let mut r = Reader { fmt, buf: bytes };
        let msg = match kind {
            Kind::GcValue | Kind::GcEcho | Kind::KingResult | Kind::CommitteeDecision => Msg::Value(r.u8()?),
            Kind::PkValue | Kind::PkEcho | Kind::PkKing | Kind::PkBase => {
                let slot = r.slot()?;
                Msg::Slot { slot, value: r.u8()? }
            }
            Kind::VoteBits | Kind::VoteRow => {
                let rest = r.rest();
                if rest.is_empty() {
                    return Err(WireError::Truncated);
                }
                Msg::Bits(rest.to_vec())
            }
            Kind::LeaderClaim => Msg::Leader(r.id()?),
            Kind::VoteIndices => Msg::Indices(r.id_list()?),
            Kind::Conciliate => {
                let value = r.id()?;
                Msg::Conciliate { value, list: r.id_list()? }
            }
            Kind::Certify => {
                let value = r.u8()?;
                Msg::Certify { value, share: r.sig()? }
            }
            Kind::Certified => {
                let value = r.u8()?;
                Msg::Certified { value, cert: r.sig()? }
            }
            Kind::NoCommon => Msg::NoCommon { share: r.sig()? },
            Kind::AuthVote => {
                let target = r.id()?;
                Msg::AuthVote { target, share: r.sig()? }
            }
            Kind::VoteProof => {
                let holder = r.id()?;
                Msg::VoteProof { holder, proof: r.sig()? }
            }
            Kind::Val => {
                let value = r.pair()?;
                let commit = r.commit()?;
                Msg::Val { value, commit, share: r.sig()? }
            }
            Kind::Propose => {
                let value = r.pair()?;
                let commit = r.commit()?;
                Msg::Propose { value, commit, leader_proof: r.sig()?, sig: r.sig()? }
            }
            Kind::Forward => {
                let leader = r.id()?;
                let value = r.pair()?;
                Msg::Forward { leader, value, leader_proof: r.sig()?, sig: r.sig()? }
            }
            Kind::Ack => {
                let value = r.pair()?;
                Msg::Ack { value, share: r.sig()? }
            }
            Kind::DecideShare => {
                let value = r.pair()?;
                Msg::DecideShare { value, share: r.sig()? }
            }
            Kind::Commit => {
                let value = r.pair()?;
                let cert = r.sig()?;
                Msg::Commit { value, cert, leader_proof: r.sig()? }
            }
            Kind::ForwardCommit => {
                let leader = r.id()?;
                let value = r.pair()?;
                let cert = r.sig()?;
                Msg::ForwardCommit { leader, value, cert, leader_proof: r.sig()? }
            }
            Kind::Decide => {
                let value = r.pair()?;
                let proof = r.sig()?;
                Msg::Decide { value, proof, leader_proof: r.sig()? }
            }
            Kind::Decision => {
                let value = r.pair()?;
                Msg::Decision { value, proof: r.sig()? }
            }
        };
        r.finish()?;
        Ok(msg)
    }

    /// Decode a frame of the form `kind byte ‖ payload`. Used by fuzzing and by
    /// tools that store raw traffic.
    pub fn decode_framed(bytes: &[u8], fmt: &WireFormat) -> Result<(Kind, Msg), WireError> {
        let (&k, rest) = bytes.split_first().ok_or(WireError::Truncated)?;
        let kind = Kind::from_u8(k)?;
        Ok((kind, Msg::decode(kind, rest, fmt)?))
    }
}

/// Bitstring helpers, LSB-first within each byte.
pub fn pack_bits(bits: impl IntoIterator<Item = bool>, len: usize) -> Vec<u8> {
    let mut out = vec![0u8; WireFormat::bitstring_bytes(len)];
    for (i, b) in bits.into_iter().enumerate().take(len) {
        if b {
            out[i / 8] |= 1 << (i % 8);
        }
    }
    out
}

pub fn bit_at(bytes: &[u8], i: usize) -> bool {
    bytes.get(i / 8).is_some_and(|b| b & (1 << (i % 8)) != 0)
}
