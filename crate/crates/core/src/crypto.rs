//! Simulated threshold signatures.
//!
//! Secrets are derived from the run seed and never leave [`ThresholdScheme`].
//! A partial signature is a keyed SHA-256 PRF of `(k, statement)` under the
//! signer's secret; a threshold signature is the same PRF under a master
//! secret, so it is unique per `(k, statement)` whichever shares produced it.
//! Outputs are truncated or extended (counter mode) to κ bits.
//!
//! Honest code signs through a [`Signer`] bound to its own id. The adversary
//! holds [`ByzantineKeys`], which refuse any signer outside the fault set.
//! Every successful combine is registered; a `verify` that succeeds for a
//! `(k, statement)` never combined is counted as a forgery breach.

use crate::types::{ProcessId, Value};
use crate::wire::{SigBytes, ValuePair};
use sha2::{Digest, Sha256};
use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CryptoError {
    #[error("{0} is not in the fault set and cannot be signed for")]
    ImpersonationAttempt(ProcessId),
    #[error("{have} valid shares from distinct signers, {need} required")]
    InsufficientShares { have: usize, need: usize },
    #[error("shares cover different messages or thresholds")]
    MixedMessages,
    #[error("signer {0} appears more than once")]
    DuplicateSigners(ProcessId),
    #[error("share from {0} does not verify")]
    InvalidShare(ProcessId),
}

/// Everything the protocols sign.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Statement {
    /// ⟨certify, v⟩, or ⟨certify, ⊥⟩ for `None`.
    Certify(Option<Value>),
    /// ⟨vote, p⟩.
    Vote(ProcessId),
    /// ⟨leader, p, view⟩.
    Leader { leader: ProcessId, view: u32 },
    /// ⟨commit, v, view⟩.
    Commit { value: ValuePair, view: u32 },
    /// ⟨decide, v⟩.
    Decide(ValuePair),
    /// A leader's proposal for a view, signed at threshold 1.
    Propose { value: ValuePair, view: u32 },
    /// Arbitrary bytes.
    Raw(Vec<u8>),
}

impl Statement {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(48);
        let pair = |out: &mut Vec<u8>, p: &ValuePair| {
            out.push(p.value);
            out.push(p.cert.bottom as u8);
            out.extend_from_slice(&p.cert.sig.0);
        };
        match self {
            Statement::Certify(v) => {
                out.push(0);
                match v {
                    Some(v) => out.extend([1, *v]),
                    None => out.push(0),
                }
            }
            Statement::Vote(p) => {
                out.push(1);
                out.extend(p.0.to_be_bytes());
            }
            Statement::Leader { leader, view } => {
                out.push(2);
                out.extend(leader.0.to_be_bytes());
                out.extend(view.to_be_bytes());
            }
            Statement::Commit { value, view } => {
                out.push(3);
                out.extend(view.to_be_bytes());
                pair(&mut out, value);
            }
            Statement::Decide(value) => {
                out.push(4);
                pair(&mut out, value);
            }
            Statement::Propose { value, view } => {
                out.push(6);
                out.extend(view.to_be_bytes());
                pair(&mut out, value);
            }
            Statement::Raw(b) => {
                out.push(5);
                out.extend_from_slice(b);
            }
        }
        out
    }

    pub fn digest(&self) -> [u8; 32] {
        Sha256::digest(self.to_bytes()).into()
    }
}

/// A share as held by the combiner: who signed what, at which threshold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialSig {
    pub signer: ProcessId,
    pub k: usize,
    pub digest: [u8; 32],
    pub bytes: SigBytes,
}

/// Audit summary of one run's signature activity.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SignatureAudit {
    pub shares_issued: u64,
    pub combines: u64,
    pub forgery_breaches: u64,
    /// Largest number of distinct leaders holding a leader proof for one view.
    pub max_leader_proofs_per_view: usize,
    /// Largest number of distinct values holding a commit certificate in one view.
    pub max_commit_values_per_view: usize,
    /// Distinct values that obtained a decision proof.
    pub decided_values: usize,
    /// Values (or ⊥ as `None`) that obtained a strong-unanimity certificate.
    pub certified_subjects: BTreeSet<Option<Value>>,
}

#[derive(Default)]
struct Registry {
    shares_issued: u64,
    combined: HashMap<(usize, [u8; 32]), BTreeSet<ProcessId>>,
    leader_proofs: BTreeMap<u32, BTreeSet<ProcessId>>,
    commit_values: BTreeMap<u32, BTreeSet<ValuePair>>,
    decided: BTreeSet<ValuePair>,
    certified: BTreeSet<Option<Value>>,
    combines: u64,
    breaches: u64,
}

pub struct ThresholdScheme {
    n: usize,
    sig_bytes: usize,
    master: [u8; 32],
    secrets: Vec<[u8; 32]>,
    registry: RefCell<Registry>,
}

impl std::fmt::Debug for ThresholdScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ThresholdScheme").field("n", &self.n).field("kappa", &(self.sig_bytes * 8)).finish()
    }
}

fn derive(label: &[u8], seed: u64, i: u64) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(label);
    h.update(seed.to_be_bytes());
    h.update(i.to_be_bytes());
    h.finalize().into()
}

impl ThresholdScheme {
    /// `kappa` must be a positive multiple of 8; the wire format enforces the
    /// same constraint.
    pub fn new(n: usize, kappa: u32, seed: u64) -> Rc<Self> {
        assert!(kappa > 0 && kappa % 8 == 0, "kappa must be a positive multiple of 8");
        Rc::new(ThresholdScheme {
            n,
            sig_bytes: kappa as usize / 8,
            master: derive(b"threshold-master", seed, 0),
            secrets: (0..n as u64).map(|i| derive(b"threshold-share", seed, i)).collect(),
            registry: RefCell::default(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn prf(&self, key: &[u8; 32], k: usize, digest: &[u8; 32]) -> SigBytes {
        let mut out = Vec::with_capacity(self.sig_bytes);
        let mut ctr = 0u32;
        while out.len() < self.sig_bytes {
            let mut h = Sha256::new();
            h.update(key);
            h.update(ctr.to_be_bytes());
            h.update((k as u64).to_be_bytes());
            h.update(digest);
            let block: [u8; 32] = h.finalize().into();
            let take = (self.sig_bytes - out.len()).min(32);
            out.extend_from_slice(&block[..take]);
            ctr += 1;
        }
        SigBytes(out.into())
    }

    fn sign_unchecked(&self, signer: ProcessId, k: usize, stmt: &Statement) -> PartialSig {
        let digest = stmt.digest();
        self.registry.borrow_mut().shares_issued += 1;
        PartialSig { signer, k, digest, bytes: self.prf(&self.secrets[signer.index()], k, &digest) }
    }

    pub fn share_verify(&self, signer: ProcessId, k: usize, stmt: &Statement, bytes: &SigBytes) -> bool {
        signer.index() < self.n && *bytes == self.prf(&self.secrets[signer.index()], k, &stmt.digest())
    }

    fn share_valid(&self, s: &PartialSig) -> bool {
        s.signer.index() < self.n && s.bytes == self.prf(&self.secrets[s.signer.index()], s.k, &s.digest)
    }

    /// Combine shares into a k-threshold signature. All shares must carry the
    /// same `(k, statement)`, signers must be distinct, every share must verify
    /// and there must be at least `k` of them.
    pub fn combine(&self, shares: &[PartialSig]) -> Result<SigBytes, CryptoError> {
        let first = shares.first().ok_or(CryptoError::InsufficientShares { have: 0, need: 1 })?;
        let (k, digest) = (first.k, first.digest);
        let mut signers = BTreeSet::new();
        for s in shares {
            if s.k != k || s.digest != digest {
                return Err(CryptoError::MixedMessages);
            }
            if !signers.insert(s.signer) {
                return Err(CryptoError::DuplicateSigners(s.signer));
            }
            if !self.share_valid(s) {
                return Err(CryptoError::InvalidShare(s.signer));
            }
        }
        if signers.len() < k {
            return Err(CryptoError::InsufficientShares { have: signers.len(), need: k });
        }
        let mut reg = self.registry.borrow_mut();
        reg.combines += 1;
        reg.combined.entry((k, digest)).or_insert(signers);
        Ok(self.prf(&self.master, k, &digest))
    }

    /// [`combine`](Self::combine) for a typed statement; also files the result
    /// in the per-view audit.
    pub fn combine_statement(&self, k: usize, stmt: &Statement, shares: &[PartialSig]) -> Result<SigBytes, CryptoError> {
        let digest = stmt.digest();
        if shares.iter().any(|s| s.k != k || s.digest != digest) {
            return Err(CryptoError::MixedMessages);
        }
        let sig = self.combine(shares)?;
        let mut reg = self.registry.borrow_mut();
        match stmt {
            Statement::Leader { leader, view } => {
                reg.leader_proofs.entry(*view).or_default().insert(*leader);
            }
            Statement::Commit { value, view } => {
                reg.commit_values.entry(*view).or_default().insert(value.clone());
            }
            Statement::Decide(value) => {
                reg.decided.insert(value.clone());
            }
            Statement::Certify(v) => {
                reg.certified.insert(*v);
            }
            Statement::Vote(_) | Statement::Propose { .. } | Statement::Raw(_) => {}
        }
        Ok(sig)
    }

    pub fn verify(&self, k: usize, stmt: &Statement, sig: &SigBytes) -> bool {
        let digest = stmt.digest();
        let ok = *sig == self.prf(&self.master, k, &digest);
        if ok && !self.registry.borrow().combined.contains_key(&(k, digest)) {
            self.registry.borrow_mut().breaches += 1;
        }
        ok
    }

    /// Signer sets recorded for a combined `(k, statement)`.
    pub fn combined_signers(&self, k: usize, stmt: &Statement) -> Option<BTreeSet<ProcessId>> {
        self.registry.borrow().combined.get(&(k, stmt.digest())).cloned()
    }

    pub fn audit(&self) -> SignatureAudit {
        let reg = self.registry.borrow();
        SignatureAudit {
            shares_issued: reg.shares_issued,
            combines: reg.combines,
            forgery_breaches: reg.breaches,
            max_leader_proofs_per_view: reg.leader_proofs.values().map(BTreeSet::len).max().unwrap_or(0),
            max_commit_values_per_view: reg.commit_values.values().map(BTreeSet::len).max().unwrap_or(0),
            decided_values: reg.decided.len(),
            certified_subjects: reg.certified.clone(),
        }
    }
}

/// Signing capability for exactly one honest process.
#[derive(Clone, Debug)]
pub struct Signer {
    scheme: Rc<ThresholdScheme>,
    id: ProcessId,
}

impl Signer {
    pub fn new(scheme: Rc<ThresholdScheme>, id: ProcessId) -> Self {
        Signer { scheme, id }
    }

    pub fn id(&self) -> ProcessId {
        self.id
    }

    pub fn scheme(&self) -> &ThresholdScheme {
        &self.scheme
    }

    pub fn share_sign(&self, k: usize, stmt: &Statement) -> PartialSig {
        self.scheme.sign_unchecked(self.id, k, stmt)
    }
}

/// Signing capability for the fault set.
#[derive(Clone, Debug)]
pub struct ByzantineKeys {
    scheme: Rc<ThresholdScheme>,
    faulty: BTreeSet<ProcessId>,
}

impl ByzantineKeys {
    pub fn new(scheme: Rc<ThresholdScheme>, faulty: BTreeSet<ProcessId>) -> Self {
        ByzantineKeys { scheme, faulty }
    }

    pub fn scheme(&self) -> &ThresholdScheme {
        &self.scheme
    }

    pub fn share_sign(&self, signer: ProcessId, k: usize, stmt: &Statement) -> Result<PartialSig, CryptoError> {
        if !self.faulty.contains(&signer) {
            return Err(CryptoError::ImpersonationAttempt(signer));
        }
        Ok(self.scheme.sign_unchecked(signer, k, stmt))
    }
}

/// Rebuild a share received on the wire so it can be checked and combined.
pub fn received_share(signer: ProcessId, k: usize, stmt: &Statement, bytes: SigBytes) -> PartialSig {
    PartialSig { signer, k, digest: stmt.digest(), bytes }
}
