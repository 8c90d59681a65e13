//! Round scaling in B and communication slopes in n.

use bapred::adversary::StrategyId;
use bapred::protocol::ProtocolId;
use bapred_harness::config::{FaultPlacement, PredictionPlacement};
use bapred_harness::scaling::median;
use bapred_harness::{check_scaling, sweep, Budget, ExperimentConfig, FaultCount, FitReport, ResultRow};

/// Round constant, frozen from a calibration sweep on seeds disjoint from
/// the ones below.
pub const ROUND_C: u64 = 128;
pub const ROUND_N: usize = 96;
pub const ROUND_B_MULTIPLES: [u64; 5] = [0, 1, 4, 16, 64];
pub const ROUND_SEEDS: std::ops::Range<u64> = 0..5;
/// One guess-and-double step.
pub const ENVELOPE_FACTOR: u64 = 2;

pub const SLOPE_NS: [usize; 3] = [32, 64, 128];
pub const SLOPE_SEEDS: std::ops::Range<u64> = 0..5;

/// (protocol, metric, expected slope, half-width)
pub const SLOPE_WINDOWS: [(ProtocolId, &str, f64, f64); 6] = [
    (ProtocolId::Auth, "bits", 2.0, 0.2),
    (ProtocolId::UnauthCubic, "bits", 3.0, 0.3),
    (ProtocolId::UnauthSubcubic, "bits", 2.5, 0.3),
    (ProtocolId::Auth, "messages", 2.0, 0.2),
    (ProtocolId::UnauthCubic, "messages", 2.0, 0.2),
    (ProtocolId::UnauthSubcubic, "messages", 2.0, 0.2),
];

fn base(protocol: ProtocolId, n: usize) -> ExperimentConfig {
    ExperimentConfig {
        protocol,
        n,
        t: None,
        f: FaultCount::T,
        fault_placement: FaultPlacement::First,
        prediction_placement: PredictionPlacement::AdversarialMisclassify,
        ..ExperimentConfig::default()
    }
}

pub struct RoundRow {
    pub protocol: ProtocolId,
    pub b: u64,
    pub f: usize,
    pub median_rounds: f64,
    pub bound: u64,
}

pub struct RoundReport {
    pub rows: Vec<RoundRow>,
    pub violations: usize,
}

pub fn round_sweep() -> RoundReport {
    let mut cells = Vec::new();
    for protocol in ProtocolId::ALL {
        for k in ROUND_B_MULTIPLES {
            for adversary in StrategyId::ALL {
                cells.push(ExperimentConfig {
                    budget: Budget::TimesN(k),
                    adversary,
                    seeds: ROUND_SEEDS.collect(),
                    ..base(protocol, ROUND_N)
                });
            }
        }
    }
    let report = sweep(&cells, None).expect("round sweep runs");
    let mut rows = Vec::new();
    for protocol in ProtocolId::ALL {
        for k in ROUND_B_MULTIPLES {
            let b = k * ROUND_N as u64;
            let picked: Vec<&ResultRow> = report.rows.iter().filter(|r| r.protocol == protocol.name() && r.b == b).collect();
            let f = picked[0].f;
            let mut rounds: Vec<f64> = picked.iter().map(|r| r.rounds as f64).collect();
            let med = median(&mut rounds).expect("rows");
            let bound = ROUND_C * ((b / ROUND_N as u64).min(f as u64) + 1);
            rows.push(RoundRow { protocol, b, f, median_rounds: med, bound });
        }
    }
    RoundReport { rows, violations: report.violations.len() }
}

pub struct SlopeReport {
    pub fits: Vec<(ProtocolId, &'static str, FitReport)>,
    pub violations: usize,
}

/// Worst case for the prediction-dependent term: B = t·n placed to
/// misclassify, all t faults present.
pub fn slope_sweep() -> SlopeReport {
    let mut cells = Vec::new();
    for protocol in ProtocolId::ALL {
        for n in SLOPE_NS {
            cells.push(ExperimentConfig {
                budget: Budget::TimesTN,
                adversary: StrategyId::Silent,
                seeds: SLOPE_SEEDS.collect(),
                ..base(protocol, n)
            });
        }
    }
    let report = sweep(&cells, None).expect("slope sweep runs");
    let fits = SLOPE_WINDOWS
        .iter()
        .map(|&(protocol, metric, expected, tol)| {
            let rows: Vec<ResultRow> = report.rows.iter().filter(|r| r.protocol == protocol.name()).cloned().collect();
            (protocol, metric, check_scaling(&rows, "n", metric, expected, tol).expect("three sizes"))
        })
        .collect();
    SlopeReport { fits, violations: report.violations.len() }
}
