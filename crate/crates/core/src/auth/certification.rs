use crate::crypto::{received_share, Statement};
use crate::sim::Ctx;
use crate::types::Value;
use crate::wire::{Kind, Msg, Scope, SigBytes, StrongCert, ValuePair};
use std::collections::BTreeMap;

/// Threshold for strong-unanimity certificates.
pub fn cert_threshold(t: usize) -> usize {
    t + 1
}

pub fn cert_statement(pair_value: Value, bottom: bool) -> Statement {
    Statement::Certify((!bottom).then_some(pair_value))
}

/// External validity: the certificate verifies for the carried value, or is
/// a ⊥ certificate.
pub fn ex_valid(ctx: &Ctx, pair: &ValuePair) -> bool {
    let k = cert_threshold(ctx.t());
    ctx.scheme().verify(k, &cert_statement(pair.value, pair.cert.bottom), &pair.cert.sig)
}

/// Two rounds. Each process broadcasts a share for its proposal; anyone
/// seeing t+1 shares for one value combines and broadcasts the certificate,
/// everyone else broadcasts a share for ⊥. A process returns the first
/// certified value it receives (smallest on ties), else its own proposal
/// with a combined ⊥ certificate.
///
/// Returns `None` only if neither path completed, which takes more than t
/// faults.
pub async fn strong_certification(ctx: &Ctx, scope: Scope, proposal: Value) -> Option<ValuePair> {
    let k = cert_threshold(ctx.t());
    let certify = scope.tag(Kind::Certify);
    let certified = scope.tag(Kind::Certified);
    let no_common = scope.tag(Kind::NoCommon);

    let share = ctx.signer().share_sign(k, &Statement::Certify(Some(proposal)));
    ctx.broadcast(certify, &Msg::Certify { value: proposal, share: share.bytes });
    let inbox = ctx.next_round().await;

    let mut by_value: BTreeMap<Value, Vec<_>> = BTreeMap::new();
    for (s, m) in inbox.collect(certify) {
        if let Msg::Certify { value, share } = m {
            let stmt = Statement::Certify(Some(value));
            if ctx.scheme().share_verify(s, k, &stmt, &share) {
                by_value.entry(value).or_default().push(received_share(s, k, &stmt, share));
            }
        }
    }
    // Most shares first, smallest value on ties.
    let common = by_value.iter().filter(|(_, v)| v.len() >= k).max_by_key(|(v, s)| (s.len(), std::cmp::Reverse(**v)));
    match common {
        Some((&value, shares)) => {
            let cert = ctx
                .scheme()
                .combine_statement(k, &Statement::Certify(Some(value)), &shares[..k])
                .expect("shares verified");
            ctx.broadcast(certified, &Msg::Certified { value, cert });
        }
        None => {
            let share = ctx.signer().share_sign(k, &Statement::Certify(None));
            ctx.broadcast(no_common, &Msg::NoCommon { share: share.bytes });
        }
    }
    let inbox = ctx.next_round().await;

    let best = inbox
        .collect(certified)
        .into_iter()
        .filter_map(|(_, m)| match m {
            Msg::Certified { value, cert } => Some((value, cert)),
            _ => None,
        })
        .filter(|(value, cert)| ctx.scheme().verify(k, &Statement::Certify(Some(*value)), cert))
        .min_by_key(|(value, _)| *value);
    if let Some((value, sig)) = best {
        return Some(ValuePair { value, cert: StrongCert { bottom: false, sig } });
    }
    let stmt = Statement::Certify(None);
    let shares: Vec<_> = inbox
        .collect(no_common)
        .into_iter()
        .filter_map(|(s, m)| match m {
            Msg::NoCommon { share } if ctx.scheme().share_verify(s, k, &stmt, &share) => {
                Some(received_share(s, k, &stmt, share))
            }
            _ => None,
        })
        .take(k)
        .collect();
    let sig: SigBytes = ctx.scheme().combine_statement(k, &stmt, &shares).ok()?;
    Some(ValuePair { value: proposal, cert: StrongCert { bottom: true, sig } })
}
