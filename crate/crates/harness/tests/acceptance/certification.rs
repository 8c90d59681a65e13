//! Strong-unanimity certification as a standalone two-round exchange.

use bapred::adversary::{place_faults, strategy, PlacementRule, StrategyId};
use bapred::auth::certification::{ex_valid, strong_certification};
use bapred::sim::{run_processes, stream_rng, SimSetup, Stream};
use bapred::wire::Scope;
use rand::Rng;
use rayon::prelude::*;

pub const RUNS: u64 = 2000;
pub const NS: [usize; 2] = [16, 32];

#[derive(Default)]
pub struct CertReport {
    pub runs: u64,
    pub wrong_rounds: Vec<u64>,
    /// Seeds where some honest output was missing, invalid, or not v.
    pub unanimity_failures: Vec<u64>,
    pub errors: Vec<(u64, String)>,
}

/// Largest t below n/2.
pub fn t_for(n: usize) -> usize {
    n.div_ceil(2) - 1
}

enum Outcome {
    Ok { rounds: u64, unanimous: bool },
    Err(String),
}

fn one(seed: u64) -> Outcome {
    let mut rng = stream_rng(seed, Stream::Faults, 0xce, 0);
    let n = NS[(seed % NS.len() as u64) as usize];
    let t = t_for(n);
    let f = if rng.gen_bool(0.5) { t } else { rng.gen_range(0..=t) };
    let rule = if rng.gen_bool(0.5) { PlacementRule::First } else { PlacementRule::Spread };
    let faulty = place_faults(n, f, rule);
    let v: u8 = rng.gen_range(0..2);
    let id = StrategyId::ALL[(seed / NS.len() as u64 % StrategyId::ALL.len() as u64) as usize];
    let mut adversary = strategy(id, seed);
    let setup = SimSetup::new(n, t, faulty, seed);
    let out = run_processes(setup, adversary.as_mut(), |ctx| async move {
        let pair = strong_certification(&ctx, Scope::new(0, 0), v).await;
        let valid = pair.as_ref().is_some_and(|p| ex_valid(&ctx, p));
        (pair.map(|p| p.value), valid)
    });
    match out {
        Ok(o) => Outcome::Ok {
            rounds: o.rounds_used,
            unanimous: o.outputs.values().all(|(value, valid)| *valid && *value == Some(v)),
        },
        Err(e) => Outcome::Err(e.to_string()),
    }
}

pub fn run() -> CertReport {
    let results: Vec<(u64, Outcome)> = (0..RUNS).into_par_iter().map(|s| (s, one(s))).collect();
    let mut r = CertReport::default();
    for (seed, o) in results {
        r.runs += 1;
        match o {
            Outcome::Ok { rounds, unanimous } => {
                if rounds != 2 {
                    r.wrong_rounds.push(seed);
                }
                if !unanimous {
                    r.unanimity_failures.push(seed);
                }
            }
            Outcome::Err(e) => r.errors.push((seed, e)),
        }
    }
    r
}
