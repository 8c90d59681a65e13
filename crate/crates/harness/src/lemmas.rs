//! Randomized grid over the good-group lemmas.
//!
//! Each trial draws n, ε, f and a target misclassification count, picks m
//! from the admissible window, places faults and prediction errors (some
//! placements aim at the m-grouping), then counts good groups by brute force.
//! Trials whose realized misclassification count leaves the window are
//! recorded as out of preconditions.

use bapred::adversary::{place_faults, PlacementRule};
use bapred::predictions::{
    check_good_group_lemma, generate_predictions, m_grouping, misclassification_cost, GoodGroupLemma, GroundTruth,
    LemmaReport, Placement, PredictionMatrix, Rational,
};
use bapred::sim::{stream_rng, Stream};
use bapred::ProcessId;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use std::collections::BTreeSet;

/// ε values sampled per lemma.
pub fn eps_grid(lemma: GoodGroupLemma) -> Vec<Rational> {
    let r = Rational::new;
    match lemma {
        GoodGroupLemma::OneGoodTwoThirds => vec![r(1, 12), r(1, 6), r(1, 4)],
        GoodGroupLemma::HalfGoodTwoThirds => vec![r(1, 24), r(1, 12), r(1, 8)],
        GoodGroupLemma::OneGoodExists => vec![r(1, 6), r(1, 4), r(1, 3)],
    }
}

#[derive(Clone, Debug)]
pub struct LemmaTrial {
    pub seed: u64,
    pub eps: Rational,
    pub fault_rule: &'static str,
    pub prediction_rule: &'static str,
    pub truth: GroundTruth,
    pub matrix: PredictionMatrix,
    pub report: LemmaReport,
}

/// Draw one instance. `None` when no admissible m exists for the draw.
pub fn sample_trial(lemma: GoodGroupLemma, seed: u64, n_range: (usize, usize)) -> Option<LemmaTrial> {
    let mut rng = stream_rng(seed, Stream::Faults, lemma as u64, 0x1e);
    let n = rng.gen_range(n_range.0..=n_range.1);
    let eps = *eps_grid(lemma).choose(&mut rng).expect("non-empty");
    let bound = lemma.fault_fraction(eps) * Rational::from_integer(n as i64);
    let f_max = (bound.ceil().to_integer() - 1).max(0) as usize;
    let f = if rng.gen_bool(0.5) { f_max } else { rng.gen_range(0..=f_max) };

    // Largest k with a non-empty window, then a target k and m within it.
    let k_max = (0..=n).take_while(|&k| {
        let (lo, hi) = lemma.m_window(eps, n, k);
        lo <= hi
    });
    let k_max = k_max.last()?;
    let k_target = rng.gen_range(0..=k_max);
    let (lo, hi) = lemma.m_window(eps, n, k_target);
    let m = rng.gen_range(lo..=hi);

    let (fault_rule, rule) = match rng.gen_range(0..3) {
        0 => ("first", PlacementRule::First),
        1 => ("spread", PlacementRule::Spread),
        _ => ("target_smallest_per_group", PlacementRule::TargetSmallestPerGroup { m }),
    };
    let faulty = place_faults(n, f, rule);
    let truth = GroundTruth::new(n, f, faulty.clone()).ok()?;
    let honest: Vec<ProcessId> = truth.honest().collect();
    let cost = misclassification_cost(n, f).max(1) as u64;
    let cap = (honest.len() * n) as u64;
    let (prediction_rule, placement, budget) = match rng.gen_range(0..3) {
        0 => ("adversarial_misclassify", Placement::AdversarialMisclassify, k_target as u64 * cost),
        1 => {
            // One honest member per group, so each error lands in a distinct group.
            let groups = m_grouping(n, m).ok()?.groups;
            let targets: Vec<ProcessId> =
                groups.iter().filter_map(|g| g.iter().copied().find(|p| !faulty.contains(p))).collect();
            ("concentrated_per_group", Placement::ConcentratedOnTargets(targets), k_target as u64 * cost)
        }
        _ => ("uniform", Placement::Uniform, rng.gen_range(0..=cap.min(4 * n as u64))),
    };
    let matrix = generate_predictions(&truth, budget.min(cap), &placement, seed).ok()?;
    let grouping = m_grouping(n, m).ok()?;
    let report = check_good_group_lemma(lemma, eps, &matrix, &truth, &grouping).ok()?;
    Some(LemmaTrial { seed, eps, fault_rule, prediction_rule, truth, matrix, report })
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LemmaSummary {
    pub trials: usize,
    pub within_preconditions: usize,
    /// Seeds of in-precondition trials whose bound failed.
    pub failures: Vec<u64>,
    /// In-precondition trials with at least one misclassified process.
    pub with_misclassified: usize,
    /// Smallest good_count − required over in-precondition trials.
    pub min_slack: Option<i64>,
    pub rules: BTreeSet<(&'static str, &'static str)>,
}

fn required(lemma: GoodGroupLemma, m: usize) -> i64 {
    match lemma {
        GoodGroupLemma::OneGoodExists => 1,
        _ => (2 * m / 3 + 1) as i64,
    }
}

/// Draw trials from seed 0 upward until `target` satisfy the preconditions
/// (or `target · 20` draws pass).
pub fn run_lemma_grid(lemma: GoodGroupLemma, target: usize, n_range: (usize, usize)) -> (LemmaSummary, Vec<LemmaTrial>) {
    let mut summary = LemmaSummary::default();
    let mut kept = Vec::new();
    let batch = target.max(64) as u64;
    let mut next = 0u64;
    while summary.within_preconditions < target && next < 20 * target as u64 {
        let trials: Vec<LemmaTrial> =
            (next..next + batch).into_par_iter().filter_map(|s| sample_trial(lemma, s, n_range)).collect();
        next += batch;
        for tr in trials {
            summary.trials += 1;
            if !tr.report.preconditions_met || summary.within_preconditions >= target {
                continue;
            }
            summary.within_preconditions += 1;
            summary.with_misclassified += usize::from(tr.report.k > 0);
            summary.rules.insert((tr.fault_rule, tr.prediction_rule));
            let slack = tr.report.good_count as i64 - required(lemma, tr.report.m);
            summary.min_slack = Some(summary.min_slack.map_or(slack, |s| s.min(slack)));
            if !tr.report.bound_met {
                summary.failures.push(tr.seed);
            }
            kept.push(tr);
        }
    }
    (summary, kept)
}
