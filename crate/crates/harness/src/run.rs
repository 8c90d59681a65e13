use crate::config::{ConfigError, ExperimentConfig, InputPolicy};
use bapred::adversary::{place_faults, strategy};
use bapred::predictions::{generate_predictions, GroundTruth};
use bapred::protocol::{run_protocol, ExecutionReport, SimConfig};
use bapred::sim::{stream_rng, SimError, Stream};
use bapred::{ProcessId, Value};
use std::collections::{BTreeMap, BTreeSet};
use rand::Rng;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("simulation failed: {0}")]
    Sim(SimError),
}

impl RunError {
    /// Round-cap hits and engine-detected violations count as invariant
    /// failures; everything else is a configuration problem.
    pub fn is_invariant(&self) -> bool {
        matches!(self, RunError::Sim(SimError::RoundCapExceeded(_) | SimError::ProtocolViolation(_)))
    }
}

pub const CSV_HEADER: [&str; 15] = [
    "fingerprint",
    "protocol",
    "n",
    "t",
    "f",
    "epsilon",
    "B",
    "adversary",
    "seed",
    "rounds",
    "messages",
    "bits",
    "decided_count",
    "agreement_ok",
    "unanimity_ok",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResultRow {
    pub fingerprint: String,
    pub protocol: String,
    pub n: usize,
    pub t: usize,
    pub f: usize,
    pub epsilon: String,
    pub b: u64,
    pub adversary: String,
    pub seed: u64,
    pub rounds: u64,
    pub messages: u64,
    pub bits: u64,
    pub decided_count: usize,
    pub agreement_ok: bool,
    pub unanimity_ok: bool,
}

impl ResultRow {
    pub fn to_record(&self) -> Vec<String> {
        vec![
            self.fingerprint.clone(),
            self.protocol.clone(),
            self.n.to_string(),
            self.t.to_string(),
            self.f.to_string(),
            self.epsilon.clone(),
            self.b.to_string(),
            self.adversary.clone(),
            self.seed.to_string(),
            self.rounds.to_string(),
            self.messages.to_string(),
            self.bits.to_string(),
            self.decided_count.to_string(),
            self.agreement_ok.to_string(),
            self.unanimity_ok.to_string(),
        ]
    }

    pub fn from_record(r: &csv::StringRecord) -> Option<ResultRow> {
        if r.len() != CSV_HEADER.len() {
            return None;
        }
        Some(ResultRow {
            fingerprint: r[0].to_string(),
            protocol: r[1].to_string(),
            n: r[2].parse().ok()?,
            t: r[3].parse().ok()?,
            f: r[4].parse().ok()?,
            epsilon: r[5].to_string(),
            b: r[6].parse().ok()?,
            adversary: r[7].to_string(),
            seed: r[8].parse().ok()?,
            rounds: r[9].parse().ok()?,
            messages: r[10].parse().ok()?,
            bits: r[11].parse().ok()?,
            decided_count: r[12].parse().ok()?,
            agreement_ok: r[13].parse().ok()?,
            unanimity_ok: r[14].parse().ok()?,
        })
    }

    /// Value of a numeric column by CSV name.
    pub fn metric(&self, column: &str) -> Option<f64> {
        Some(match column {
            "n" => self.n as f64,
            "t" => self.t as f64,
            "f" => self.f as f64,
            "B" => self.b as f64,
            "seed" => self.seed as f64,
            "rounds" => self.rounds as f64,
            "messages" => self.messages as f64,
            "bits" => self.bits as f64,
            "decided_count" => self.decided_count as f64,
            _ => return None,
        })
    }
}

/// Hex SHA-256 of the canonical config rendering for one seed.
pub fn fingerprint(cfg: &ExperimentConfig, seed: u64) -> String {
    let digest = Sha256::digest(cfg.canonical(seed).as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn inputs(policy: InputPolicy, n: usize, seed: u64) -> Vec<Value> {
    match policy {
        InputPolicy::Unanimous(v) => vec![v; n],
        InputPolicy::Split => (0..n).map(|i| u8::from(i >= n.div_ceil(2))).collect(),
        InputPolicy::Random => {
            let mut rng = stream_rng(seed, Stream::Inputs, 0, 0);
            (0..n).map(|_| rng.gen_range(0..2)).collect()
        }
    }
}

/// Materialize the simulator config for one seed.
pub fn sim_config(cfg: &ExperimentConfig, seed: u64) -> Result<SimConfig, ConfigError> {
    cfg.validate()?;
    let (n, t) = (cfg.n, cfg.t());
    let faulty = place_faults(n, cfg.f(), cfg.placement_rule());
    let truth = GroundTruth::new(n, t, faulty.clone()).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let placement = cfg.prediction_placement.to_placement(&truth);
    let predictions = generate_predictions(&truth, cfg.budget.resolve(n, t), &placement, seed)
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    Ok(SimConfig {
        protocol: cfg.protocol,
        n,
        t,
        faulty,
        predictions,
        inputs: inputs(cfg.inputs, n, seed),
        eps: cfg.eps(),
        kappa: cfg.kappa,
        seed,
        round_cap: cfg.round_cap,
        expander_seed: 0,
    })
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub row: ResultRow,
    pub report: ExecutionReport,
    /// Names of violated invariants; empty when the run is clean.
    pub violations: Vec<&'static str>,
}

impl RunResult {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    /// Human-readable multi-line summary.
    pub fn summary(&self) -> String {
        let r = &self.report;
        let mut s = String::new();
        let _ = writeln!(s, "fingerprint {}", self.row.fingerprint);
        let _ = writeln!(s, "protocol    {} n={} t={} f={} B={}", r.protocol, r.n, r.t, r.f, self.row.b);
        let _ = writeln!(s, "rounds      {}", r.rounds_used);
        let _ = writeln!(s, "messages    {}", r.messages_sent);
        let _ = writeln!(s, "bits        {}", r.bits_sent);
        let decided: Vec<String> = r.decisions.values().map(|d| d.map_or("-".into(), |v| v.to_string())).collect();
        let _ = writeln!(s, "decided     {}/{} [{}]", self.row.decided_count, r.decisions.len(), decided.join(""));
        let _ = writeln!(s, "agreement   {}", self.row.agreement_ok);
        let _ = writeln!(s, "unanimity   {}", self.row.unanimity_ok);
        for seg in &r.phase_trace {
            let _ = writeln!(s, "  phase {:>2} {:<22} rounds {}..{}", seg.phase, seg.subprotocol.name(), seg.start, seg.start + seg.rounds);
        }
        if !self.ok() {
            let _ = writeln!(s, "VIOLATED    {}", self.violations.join(", "));
        }
        s
    }
}

/// No two honest decisions differ.
pub fn agreement_holds(decisions: &BTreeMap<ProcessId, Option<Value>>) -> bool {
    let mut decided = decisions.values().flatten();
    match decided.next() {
        Some(first) => decided.all(|v| v == first),
        None => true,
    }
}

/// When every honest input is v, every honest decision is v.
pub fn unanimity_holds(decisions: &BTreeMap<ProcessId, Option<Value>>, inputs: &[Value], faulty: &BTreeSet<ProcessId>) -> bool {
    let mut honest = (0..inputs.len()).filter(|&i| !faulty.contains(&ProcessId(i as u32))).map(|i| inputs[i]);
    let Some(v) = honest.next() else { return true };
    if honest.any(|w| w != v) {
        return true;
    }
    decisions.values().flatten().all(|&d| d == v)
}

/// One simulation. Safety flags are recomputed here from the raw decisions.
pub fn run_one(cfg: &ExperimentConfig, seed: u64) -> Result<RunResult, RunError> {
    let sim = sim_config(cfg, seed)?;
    let mut adversary = strategy(cfg.adversary, seed);
    let report = run_protocol(&sim, adversary.as_mut()).map_err(|e| match e {
        SimError::Config(m) => RunError::Config(ConfigError::Invalid(m)),
        e => RunError::Sim(e),
    })?;
    let agreement = agreement_holds(&report.decisions);
    let unanimity = unanimity_holds(&report.decisions, &sim.inputs, &sim.faulty);
    let mut violations = Vec::new();
    if !agreement {
        violations.push("agreement");
    }
    if !unanimity {
        violations.push("unanimity");
    }
    let in_resilience = cfg.protocol.resilience_ok(cfg.n, sim.t, sim.eps);
    if in_resilience && report.decisions.values().any(Option::is_none) {
        violations.push("termination");
    }
    if report.audit.forgery_breaches > 0 {
        violations.push("unforgeability");
    }
    let row = ResultRow {
        fingerprint: fingerprint(cfg, seed),
        protocol: cfg.protocol.to_string(),
        n: cfg.n,
        t: sim.t,
        f: sim.faulty.len(),
        epsilon: cfg.eps().to_string(),
        b: cfg.budget.resolve(cfg.n, sim.t),
        adversary: cfg.adversary.to_string(),
        seed,
        rounds: report.rounds_used,
        messages: report.messages_sent,
        bits: report.bits_sent,
        decided_count: report.decided_count(),
        agreement_ok: agreement,
        unanimity_ok: unanimity,
    };
    Ok(RunResult { row, report, violations })
}

