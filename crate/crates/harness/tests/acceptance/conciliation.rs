//! Conciliation checked over every valid honest configuration at n ≤ 6.
//!
//! Honest processes are 0..h, Byzantine ones h..n. Honest configurations are
//! enumerated up to relabelling of the honest ids: list assignments first
//! (one representative per orbit, with its stabilizer), then value patterns
//! (weak orders, canonical under the stabilizer). Honest values are odd;
//! Byzantine values range over every even gap and every honest value, so
//! each order relation a Byzantine value can have with honest ones occurs.
//! Byzantine lists range over all subsets of Π.

use bapred::elections::conciliate;
use bapred::ProcessId;
use std::collections::{BTreeMap, BTreeSet};

/// Cases with at most this many conciliate calls enumerate the full product
/// of Byzantine messages. Larger ones enumerate each Byzantine sender's full
/// domain against a fixed set of messages from the others.
pub const FULL_PRODUCT_LIMIT: u64 = 60_000_000;

pub struct CaseReport {
    pub honest_configs: u64,
    pub calls: u64,
    pub full_product: bool,
    pub oracle_mismatches: u64,
    pub agreement_failures: u64,
    pub validity_failures: u64,
}

impl CaseReport {
    pub fn ok(&self) -> bool {
        self.oracle_mismatches == 0 && self.agreement_failures == 0 && self.validity_failures == 0
    }
}

fn permutations(h: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                go(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; h], &mut out);
    out
}

fn map_mask(mask: u32, perm: &[usize]) -> u32 {
    (0..perm.len()).filter(|&i| mask >> i & 1 == 1).fold(0, |acc, i| acc | 1 << perm[i])
}

fn permute<T: Copy + Default>(xs: &[T], perm: &[usize], f: impl Fn(T) -> T) -> Vec<T> {
    let mut out = vec![T::default(); xs.len()];
    for (i, &x) in xs.iter().enumerate() {
        out[perm[i]] = f(x);
    }
    out
}

/// Some core C ⊆ ∩Lᵢ has |C| > |Lᵢ|/2 for every i; taking C = ∩Lᵢ is
/// the best choice.
fn core_valid(lists: &[u32]) -> bool {
    let inter = lists.iter().fold(u32::MAX, |a, &l| a & l);
    lists.iter().all(|l| 2 * inter.count_ones() > l.count_ones())
}

/// Orbit representatives of valid list assignments, with stabilizers.
fn list_reps(h: usize, perms: &[Vec<usize>]) -> Vec<(Vec<u32>, Vec<usize>)> {
    let subsets = (1u32 << h) - 1;
    let total = (subsets as u64).pow(h as u32);
    let mut reps = Vec::new();
    for code in 0..total {
        let mut c = code;
        let lists: Vec<u32> = (0..h)
            .map(|_| {
                let s = (c % subsets as u64) as u32 + 1;
                c /= subsets as u64;
                s
            })
            .collect();
        if !core_valid(&lists) {
            continue;
        }
        let mut minimal = true;
        let mut stab = Vec::new();
        for (pi, p) in perms.iter().enumerate() {
            let img = permute(&lists, p, |m| map_mask(m, p));
            match img.cmp(&lists) {
                std::cmp::Ordering::Less => {
                    minimal = false;
                    break;
                }
                std::cmp::Ordering::Equal => stab.push(pi),
                std::cmp::Ordering::Greater => {}
            }
        }
        if minimal {
            reps.push((lists, stab));
        }
    }
    reps
}

/// Rank vectors onto 0..k for every k: all weak orders of h items.
fn weak_orders(h: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut cur = vec![0u8; h];
    loop {
        let k = cur.iter().copied().max().unwrap_or(0);
        if (0..=k).all(|r| cur.contains(&r)) {
            out.push(cur.clone());
        }
        let Some(pos) = (0..h).find(|&i| (cur[i] as usize) < h - 1) else { break };
        cur[pos] += 1;
        for x in cur.iter_mut().take(pos) {
            *x = 0;
        }
    }
    out
}

/// Independent reimplementation over bitmasks. `sent[x]` is x's (value, list).
fn oracle(my_list: u32, sent: &[Option<(u32, u32)>]) -> Option<u32> {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for j in 0..sent.len() {
        if my_list >> j & 1 == 0 {
            continue;
        }
        let mut reach = 1u32 << j;
        loop {
            let next = (0..sent.len())
                .filter(|&x| reach >> x & 1 == 1)
                .filter_map(|x| sent[x].map(|(_, l)| l))
                .fold(reach, |a, l| a | l);
            if next == reach {
                break;
            }
            reach = next;
        }
        let min = (0..sent.len()).filter(|&x| reach >> x & 1 == 1).filter_map(|x| sent[x].map(|(v, _)| v)).min();
        if let Some(m) = min {
            *counts.entry(m).or_insert(0) += 1;
        }
    }
    let best = counts.values().copied().max()?;
    counts.into_iter().find(|&(_, c)| c == best).map(|(v, _)| v)
}

fn ids(mask: u32) -> Vec<ProcessId> {
    (0..32).filter(|&i| mask >> i & 1 == 1).map(ProcessId).collect()
}

/// Every message one Byzantine sender can send: silence or (value, list).
fn byz_domain(n: usize, distinct: usize) -> Vec<Option<(u32, u32)>> {
    let mut d = vec![None];
    for v in 0..=2 * distinct as u32 {
        for l in 0..1u32 << n {
            d.push(Some((v, l)));
        }
    }
    d
}

struct Checker {
    report: CaseReport,
}

impl Checker {
    /// One receiver, one assignment of Byzantine messages.
    fn call(&mut self, received: &BTreeMap<ProcessId, (ProcessId, Vec<ProcessId>)>, mine: &[ProcessId], sent: &[Option<(u32, u32)>], my_mask: u32) -> Option<u32> {
        self.report.calls += 1;
        let got = conciliate(mine, received).map(|p| p.0);
        if got != oracle(my_mask, sent) {
            self.report.oracle_mismatches += 1;
        }
        got
    }
}

pub fn check_case(n: usize, f: usize) -> CaseReport {
    let h = n - f;
    let perms = permutations(h);
    let reps = list_reps(h, &perms);
    let orders = weak_orders(h);
    let mut ck = Checker {
        report: CaseReport {
            honest_configs: 0,
            calls: 0,
            full_product: true,
            oracle_mismatches: 0,
            agreement_failures: 0,
            validity_failures: 0,
        },
    };
    let mut configs = Vec::new();
    for (lists, stab) in &reps {
        for ranks in &orders {
            let canonical = stab.iter().all(|&pi| permute(ranks, &perms[pi], |r| r) >= *ranks);
            if canonical {
                configs.push((lists.clone(), ranks.clone()));
            }
        }
    }
    ck.report.honest_configs = configs.len() as u64;

    let domain_len = |ranks: &[u8]| (2 * (*ranks.iter().max().unwrap() as u64 + 1) + 1) * (1 << n) + 1;
    let planned: u64 = configs.iter().map(|(_, r)| h as u64 * domain_len(r).pow(f as u32)).sum();
    // With one Byzantine sender, sweeping its domain is the full product.
    ck.report.full_product = planned <= FULL_PRODUCT_LIMIT || f <= 1;

    for (lists, ranks) in &configs {
        let distinct = *ranks.iter().max().unwrap() as usize + 1;
        let values: Vec<u32> = ranks.iter().map(|&r| 2 * r as u32 + 1).collect();
        let honest_values: BTreeSet<u32> = values.iter().copied().collect();
        let domain = byz_domain(n, distinct);
        let mut sent: Vec<Option<(u32, u32)>> = (0..h).map(|i| Some((values[i], lists[i]))).collect();
        sent.resize(n, None);
        let base: BTreeMap<ProcessId, (ProcessId, Vec<ProcessId>)> =
            (0..h).map(|i| (ProcessId(i as u32), (ProcessId(values[i]), ids(lists[i])))).collect();

        let mut outputs = BTreeSet::new();
        for i in 0..h {
            let mine = ids(lists[i]);
            let mut received = base.clone();
            let mut assign = |ck: &mut Checker, choice: &[usize]| {
                for (b, &c) in choice.iter().enumerate() {
                    let who = h + b;
                    sent[who] = domain[c];
                    match domain[c] {
                        Some((v, l)) => {
                            received.insert(ProcessId(who as u32), (ProcessId(v), ids(l)));
                        }
                        None => {
                            received.remove(&ProcessId(who as u32));
                        }
                    }
                }
                ck.call(&received, &mine, &sent, lists[i])
            };
            if ck.report.full_product {
                let mut choice = vec![0usize; f];
                loop {
                    outputs.insert(assign(&mut ck, &choice));
                    let Some(pos) = (0..f).find(|&b| choice[b] + 1 < domain.len()) else { break };
                    choice[pos] += 1;
                    for c in choice.iter_mut().take(pos) {
                        *c = 0;
                    }
                }
            } else {
                // Sender b sweeps its domain; the others are silent, copy b's
                // message, or send the domain's last message.
                let last = domain.len() - 1;
                let mut choices = BTreeSet::new();
                for b in 0..f {
                    for fill in 0..3 {
                        for c in 0..domain.len() {
                            choices.insert((0..f).map(|x| if x == b { c } else { [0, c, last][fill] }).collect::<Vec<_>>());
                        }
                    }
                }
                for choice in &choices {
                    outputs.insert(assign(&mut ck, choice));
                }
            }
        }
        match outputs.iter().collect::<Vec<_>>().as_slice() {
            [Some(v)] => {
                if !honest_values.contains(v) {
                    ck.report.validity_failures += 1;
                }
            }
            _ => ck.report.agreement_failures += 1,
        }
    }
    ck.report
}

/// (n, f) pairs checked: every f at n ≤ 5, and honest majority with at
/// least one Byzantine process at n = 6.
pub fn cases() -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for n in 1..=6usize {
        for f in 0..n {
            if n <= 5 || (f > 0 && 2 * f < n) {
                out.push((n, f));
            }
        }
    }
    out
}

