//! Seeded safety fuzz over protocols × adversary strategies.

use bapred::adversary::StrategyId;
use bapred::crypto::SignatureAudit;
use bapred::predictions::Rational;
use bapred::protocol::ProtocolId;
use bapred::sim::{stream_rng, Stream};
use bapred_harness::config::{FaultPlacement, PredictionPlacement};
use bapred_harness::{run_one, Budget, ExperimentConfig, FaultCount, InputPolicy};
use rand::Rng;
use rayon::prelude::*;

pub const RUNS_PER_CELL: u64 = 2000;
pub const NS: [usize; 3] = [16, 32, 64];
/// Fraction of runs with unanimous honest inputs, in percent.
pub const UNANIMOUS_PERCENT: u32 = 30;

#[derive(Default)]
pub struct CellReport {
    pub runs: u64,
    /// (seed, what went wrong)
    pub failures: Vec<(u64, String)>,
    pub unanimous_runs: u64,
    pub audits: Vec<(Rational, SignatureAudit)>,
}

pub fn fuzz_config(protocol: ProtocolId, adversary: StrategyId, seed: u64) -> ExperimentConfig {
    let mut rng = stream_rng(seed, Stream::Faults, protocol as u64, adversary as u64 + 100);
    let n = NS[(seed % NS.len() as u64) as usize];
    let t = protocol.max_t(n, protocol.default_eps()).expect("n large enough");
    let f = rng.gen_range(0..=t);
    let fault_placement = [FaultPlacement::First, FaultPlacement::Spread, FaultPlacement::TargetSmallestPerGroup]
        [rng.gen_range(0..3)]
    .clone();
    let prediction_placement = [
        PredictionPlacement::Uniform,
        PredictionPlacement::AdversarialMisclassify,
        PredictionPlacement::SmallestHonest,
        PredictionPlacement::FaultyAsHonest,
    ][rng.gen_range(0..4)]
    .clone();
    let b = [0, n, 4 * n, 16 * n][rng.gen_range(0..4)].min((n - f) * n) as u64;
    let inputs = if rng.gen_range(0..100) < UNANIMOUS_PERCENT {
        InputPolicy::Unanimous(rng.gen_range(0..2))
    } else {
        InputPolicy::Random
    };
    ExperimentConfig {
        protocol,
        n,
        t: Some(t),
        f: FaultCount::Exact(f),
        eps: None,
        budget: Budget::Bits(b),
        fault_placement,
        prediction_placement,
        inputs,
        adversary,
        seeds: vec![seed],
        ..ExperimentConfig::default()
    }
}

pub fn fuzz_cell(protocol: ProtocolId, adversary: StrategyId) -> CellReport {
    let results: Vec<_> = (0..RUNS_PER_CELL)
        .into_par_iter()
        .map(|seed| {
            let cfg = fuzz_config(protocol, adversary, seed);
            let unanimous = matches!(cfg.inputs, InputPolicy::Unanimous(_));
            let res = run_one(&cfg, seed);
            (seed, unanimous, cfg.eps(), res)
        })
        .collect();
    let mut report = CellReport::default();
    for (seed, unanimous, eps, res) in results {
        report.runs += 1;
        report.unanimous_runs += u64::from(unanimous);
        match res {
            Ok(r) => {
                if !r.ok() {
                    report.failures.push((seed, r.violations.join("+")));
                }
                if protocol == ProtocolId::Auth {
                    report.audits.push((eps, r.report.audit));
                }
            }
            Err(e) => report.failures.push((seed, e.to_string())),
        }
    }
    report
}

/// Auth audits for every strategy, when criterion 1 did not run.
pub fn fuzz_cell_audits_only() -> Vec<(Rational, SignatureAudit)> {
    StrategyId::ALL.into_iter().flat_map(|s| fuzz_cell(ProtocolId::Auth, s).audits).collect()
}
