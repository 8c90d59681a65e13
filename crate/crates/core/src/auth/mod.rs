//! Authenticated agreement with classification predictions.

pub mod certification;
pub mod expander;
pub mod vba;

pub use certification::{ex_valid, strong_certification};
pub use expander::{build_expander, ExpanderError, ExpanderGraph};
pub use vba::{validated_agreement, VbaState, VIEW_ROUNDS};

use crate::elections::authenticated_votes;
use crate::predictions::{choose_group_count, m_grouping, GoodGroupLemma, Rational};
use crate::sim::{Ctx, Subprotocol};
use crate::types::{phase_count, ProcessId, Value};
use crate::wire::{Kind, Msg, Scope};
use std::rc::Rc;

pub const AUTH_LEMMA: GoodGroupLemma = GoodGroupLemma::OneGoodExists;

pub fn default_eps() -> Rational {
    Rational::new(1, 6)
}

#[derive(Clone, Debug)]
pub struct AuthParams {
    pub eps: Rational,
    pub graph: Rc<ExpanderGraph>,
}

/// Leader schedule for a phase with estimate `k_hat`: p1..p(k̂+1), then the
/// election winner of each group (`None` where the election failed).
pub fn leader_schedule(n: usize, eps: Rational, k_hat: usize, elect: impl Fn(&[ProcessId]) -> Option<ProcessId>) -> Vec<Option<ProcessId>> {
    let mut l: Vec<Option<ProcessId>> = ProcessId::all(n).take(k_hat + 1).map(Some).collect();
    if let Some(m) = choose_group_count(AUTH_LEMMA, eps, n, k_hat) {
        let groups = m_grouping(n, m).expect("m within 1..=n").groups;
        l.extend(groups.iter().map(|g| elect(g)));
    }
    l
}

/// Rounds spent by phase `phi`: its views plus one decision round.
pub fn phase_rounds(n: usize, eps: Rational, phi: u32) -> u64 {
    let k_hat = 1usize << (phi - 1);
    let m = choose_group_count(AUTH_LEMMA, eps, n, k_hat).unwrap_or(0);
    VIEW_ROUNDS * ((k_hat + 1).min(n) + m) as u64 + 1
}

/// Certification, one round of vote preprocessing over all processes, then
/// guess-and-double phases of validated agreement. A process that holds a
/// decision proof at the end of a phase broadcasts it and returns; others
/// adopt a valid broadcast decision at the end of the following phase.
/// `None` means no decision by the last phase.
pub async fn auth_agreement(ctx: &Ctx, params: AuthParams, input: Value, row: Vec<bool>) -> Option<Value> {
    let n = ctx.n();
    ctx.enter(0, Subprotocol::Certification);
    let pair = strong_certification(ctx, Scope::new(0, 0), input).await?;
    ctx.enter(0, Subprotocol::Preprocessing);
    let all: Vec<ProcessId> = ProcessId::all(n).collect();
    let table = authenticated_votes(ctx, Scope::new(0, 1), &all, &row).await;

    let mut state = VbaState::new(pair);
    let mut pending = None;
    for phi in 1..=phase_count(ctx.t()) {
        let k_hat = 1usize << (phi - 1);
        let p = phi as u16;
        let leaders = leader_schedule(n, params.eps, k_hat, |g| table.elect(g).ok());
        ctx.enter(phi, Subprotocol::ValidatedAgreement);
        validated_agreement(ctx, Scope::new(p, 1), &params.graph, &mut state, &leaders).await;
        if let Some((value, proof)) = pending.take() {
            state.adopt_decision(value, proof);
        }

        ctx.enter(phi, Subprotocol::DecisionBroadcast);
        let tag = Scope::new(p, 0).tag(Kind::Decision);
        if let Some((value, proof)) = state.decision() {
            ctx.broadcast(tag, &Msg::Decision { value: value.clone(), proof: proof.clone() });
            return Some(value.value);
        }
        let inbox = ctx.next_round().await;
        pending = inbox
            .collect(tag)
            .into_iter()
            .filter_map(|(_, m)| match m {
                Msg::Decision { value, proof } => Some((value, proof)),
                _ => None,
            })
            .find(|(value, proof)| vba::decision_ok(ctx, value, proof));
    }
    None
}
