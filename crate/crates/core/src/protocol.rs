//! Top-level runner: one simulation of one protocol against one adversary.

use crate::auth::{self, build_expander, AuthParams, ExpanderGraph};
use crate::crypto::SignatureAudit;
use crate::predictions::{PredictionMatrix, Rational};
use crate::sim::{run_processes, Adversary, PhaseSegment, SimError, SimSetup};
use crate::types::{ProcessId, Value};
use crate::unauth::{unauth_agreement, UnauthMode, UnauthParams};
use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProtocolId {
    UnauthCubic,
    UnauthSubcubic,
    Auth,
}

impl ProtocolId {
    pub const ALL: [ProtocolId; 3] = [ProtocolId::UnauthCubic, ProtocolId::UnauthSubcubic, ProtocolId::Auth];

    pub fn name(self) -> &'static str {
        match self {
            ProtocolId::UnauthCubic => "unauth-cubic",
            ProtocolId::UnauthSubcubic => "unauth-subcubic",
            ProtocolId::Auth => "auth",
        }
    }

    pub fn default_eps(self) -> Rational {
        match self {
            ProtocolId::UnauthCubic => UnauthMode::Cubic.default_eps(),
            ProtocolId::UnauthSubcubic => UnauthMode::Subcubic.default_eps(),
            ProtocolId::Auth => auth::default_eps(),
        }
    }

    /// t must stay below `fault_fraction(ε)·n`.
    pub fn fault_fraction(self, eps: Rational) -> Rational {
        let base = match self {
            ProtocolId::UnauthCubic => Rational::new(1, 3),
            ProtocolId::UnauthSubcubic => Rational::new(1, 6),
            ProtocolId::Auth => Rational::new(1, 2),
        };
        base - eps
    }

    pub fn resilience_ok(self, n: usize, t: usize, eps: Rational) -> bool {
        Rational::from_integer(t as i64) < self.fault_fraction(eps) * Rational::from_integer(n as i64)
    }

    /// Largest t within resilience, if any t ≥ 0 is.
    pub fn max_t(self, n: usize, eps: Rational) -> Option<usize> {
        let bound = self.fault_fraction(eps) * Rational::from_integer(n as i64);
        if bound <= Rational::from_integer(0) {
            return None;
        }
        Some((bound.ceil().to_integer() - 1).max(0) as usize)
    }
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        ProtocolId::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| format!("unknown protocol {s:?}"))
    }
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub protocol: ProtocolId,
    pub n: usize,
    pub t: usize,
    pub faulty: BTreeSet<ProcessId>,
    pub predictions: PredictionMatrix,
    /// One entry per process; entries of faulty processes are ignored.
    pub inputs: Vec<Value>,
    pub eps: Rational,
    pub kappa: u32,
    pub seed: u64,
    /// `None` for the default of max(20n, 64).
    pub round_cap: Option<u64>,
    pub expander_seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExecutionReport {
    pub protocol: ProtocolId,
    pub n: usize,
    pub t: usize,
    pub f: usize,
    pub seed: u64,
    pub rounds_used: u64,
    pub messages_sent: u64,
    pub bits_sent: u64,
    /// Every honest process; `None` if it never decided.
    pub decisions: BTreeMap<ProcessId, Option<Value>>,
    pub halted_at: BTreeMap<ProcessId, u64>,
    pub phase_trace: Vec<PhaseSegment>,
    pub audit: SignatureAudit,
}

impl ExecutionReport {
    pub fn decided_count(&self) -> usize {
        self.decisions.values().filter(|d| d.is_some()).count()
    }
}

/// All decided values equal.
pub fn agreement_ok(decisions: &BTreeMap<ProcessId, Option<Value>>) -> bool {
    let vals: BTreeSet<Value> = decisions.values().flatten().copied().collect();
    vals.len() <= 1
}

/// If honest inputs are unanimous at v, nobody decided anything else.
pub fn unanimity_ok(decisions: &BTreeMap<ProcessId, Option<Value>>, inputs: &[Value], faulty: &BTreeSet<ProcessId>) -> bool {
    let honest: BTreeSet<Value> =
        inputs.iter().enumerate().filter(|(i, _)| !faulty.contains(&ProcessId(*i as u32))).map(|(_, v)| *v).collect();
    match honest.iter().next() {
        Some(&v) if honest.len() == 1 => decisions.values().flatten().all(|&d| d == v),
        _ => true,
    }
}

pub fn all_decided(decisions: &BTreeMap<ProcessId, Option<Value>>) -> bool {
    decisions.values().all(Option::is_some)
}

thread_local! {
    static EXPANDERS: RefCell<HashMap<(usize, Rational, u64), Rc<ExpanderGraph>>> = RefCell::default();
}

/// Expander for `(n, eps, seed)`, built once per thread.
pub fn cached_expander(n: usize, eps: Rational, seed: u64) -> Result<Rc<ExpanderGraph>, SimError> {
    if let Some(g) = EXPANDERS.with(|c| c.borrow().get(&(n, eps, seed)).cloned()) {
        return Ok(g);
    }
    let g = Rc::new(
        build_expander(n, eps, seed, auth::expander::DEFAULT_DEGREE_CAP).map_err(|e| SimError::Config(e.to_string()))?,
    );
    EXPANDERS.with(|c| c.borrow_mut().insert((n, eps, seed), g.clone()));
    Ok(g)
}

fn validate(cfg: &SimConfig) -> Result<(), SimError> {
    let bad = |m: String| Err(SimError::Config(m));
    if cfg.n == 0 {
        return bad("n must be positive".into());
    }
    if cfg.t >= cfg.n {
        return bad(format!("t={} must be below n={}", cfg.t, cfg.n));
    }
    if cfg.faulty.len() > cfg.t {
        return bad(format!("{} faults exceed t={}", cfg.faulty.len(), cfg.t));
    }
    if cfg.inputs.len() != cfg.n {
        return bad(format!("{} inputs for n={}", cfg.inputs.len(), cfg.n));
    }
    if cfg.predictions.n() != cfg.n {
        return bad(format!("prediction matrix is {}x{0}, n={}", cfg.predictions.n(), cfg.n));
    }
    if cfg.eps <= Rational::from_integer(0) || cfg.protocol.fault_fraction(cfg.eps) <= Rational::from_integer(0) {
        return bad(format!("epsilon {} out of range for {}", cfg.eps, cfg.protocol));
    }
    Ok(())
}

/// Run one protocol instance. The report is a pure function of the config
/// and the adversary's behaviour.
pub fn run_protocol(cfg: &SimConfig, adversary: &mut dyn Adversary) -> Result<ExecutionReport, SimError> {
    validate(cfg)?;
    let n = cfg.n;
    let mut setup = SimSetup::new(n, cfg.t, cfg.faulty.clone(), cfg.seed);
    setup.kappa = cfg.kappa;
    if let Some(cap) = cfg.round_cap {
        setup.round_cap = cap;
    }
    let row = |p: ProcessId| -> Vec<bool> { ProcessId::all(n).map(|j| cfg.predictions.get(p, j)).collect() };
    let outcome = match cfg.protocol {
        ProtocolId::UnauthCubic | ProtocolId::UnauthSubcubic => {
            let mode = if cfg.protocol == ProtocolId::UnauthCubic { UnauthMode::Cubic } else { UnauthMode::Subcubic };
            let params = UnauthParams { mode, eps: cfg.eps };
            run_processes(setup, adversary, |ctx| {
                let (input, row) = (cfg.inputs[ctx.id().index()], row(ctx.id()));
                async move { unauth_agreement(&ctx, params, input, row).await }
            })?
        }
        ProtocolId::Auth => {
            let graph = cached_expander(n, cfg.eps, cfg.expander_seed)?;
            run_processes(setup, adversary, |ctx| {
                let (input, row) = (cfg.inputs[ctx.id().index()], row(ctx.id()));
                let params = AuthParams { eps: cfg.eps, graph: graph.clone() };
                async move { auth::auth_agreement(&ctx, params, input, row).await }
            })?
        }
    };
    Ok(ExecutionReport {
        protocol: cfg.protocol,
        n,
        t: cfg.t,
        f: cfg.faulty.len(),
        seed: cfg.seed,
        rounds_used: outcome.rounds_used,
        messages_sent: outcome.messages_sent,
        bits_sent: outcome.bits_sent,
        decisions: outcome.outputs,
        halted_at: outcome.halted_at,
        phase_trace: outcome.phase_trace,
        audit: outcome.audit,
    })
}
