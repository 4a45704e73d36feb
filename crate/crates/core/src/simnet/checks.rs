//! Transcript scans for cross-chain timing: nothing crosses faster than the
//! fastest uncensored relayer, and with an honest uncensored relayer every
//! root crosses within that relayer's delay.

use std::collections::HashMap;

use crate::contract::{ChainId, Tick};
use crate::field::FieldElement;

use super::scenario::Scenario;
use super::transcript::{Event, Transcript};

/// Descriptions of every timing violation in `transcript`.
pub fn delay_violations(transcript: &Transcript, scenario: &Scenario) -> Vec<String> {
    let mut out = Vec::new();
    let mut root_origin: HashMap<FieldElement, (ChainId, Tick)> = HashMap::new();
    let mut exposed: HashMap<(ChainId, FieldElement), Tick> = HashMap::new();
    let mut installed: HashMap<(ChainId, FieldElement), Tick> = HashMap::new();
    for r in transcript.iter() {
        match &r.event {
            Event::Deposit { root, .. } => {
                root_origin.entry(*root).or_insert((r.chain, r.tick));
            }
            Event::WithdrawalSubmitted { nullifier, .. } => {
                exposed.entry((r.chain, *nullifier)).or_insert(r.tick);
            }
            Event::RemoteRootInstalled { root } => {
                installed.entry((r.chain, *root)).or_insert(r.tick);
                match root_origin.get(root) {
                    Some(&(from, t0)) => check_gap(&mut out, scenario, from, r.chain, t0, r.tick, "root", root),
                    None => out.push(format!("root {root} installed on {} before any deposit created it", r.chain)),
                }
            }
            Event::RemoteNullifierInstalled { nullifier } | Event::DuplicateNullifier { nullifier, .. } => {
                let from = r.chain.other();
                match exposed.get(&(from, *nullifier)) {
                    Some(&t0) => check_gap(&mut out, scenario, from, r.chain, t0, r.tick, "nullifier", nullifier),
                    None => out.push(format!("nullifier {nullifier} relayed to {} before {from} exposed it", r.chain)),
                }
            }
            _ => {}
        }
    }
    for (root, (from, t0)) in sorted(&root_origin) {
        let Some(bound) = scenario.min_reliable_delay(from) else { continue };
        if t0 + bound > scenario.horizon {
            continue;
        }
        match installed.get(&(from.other(), root)) {
            Some(&t) if t <= t0 + bound => {}
            Some(&t) => out.push(format!("root {root} from {from} installed after {} ticks, bound {bound}", t - t0)),
            None => out.push(format!("root {root} from {from} never installed within {bound} ticks")),
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn check_gap(
    out: &mut Vec<String>,
    scenario: &Scenario,
    from: ChainId,
    to: ChainId,
    t0: Tick,
    t: Tick,
    what: &str,
    value: &FieldElement,
) {
    if from == to {
        out.push(format!("{what} {value} relayed from {from} to itself"));
        return;
    }
    match scenario.min_delivery_delay(from) {
        Some(min) if t - t0 >= min => {}
        Some(min) => out.push(format!("{what} {value} crossed {from}->{to} in {} ticks, fastest relayer {min}", t - t0)),
        None => out.push(format!("{what} {value} crossed {from}->{to} with every relayer censored")),
    }
}

fn sorted(m: &HashMap<FieldElement, (ChainId, Tick)>) -> Vec<(FieldElement, (ChainId, Tick))> {
    let mut v: Vec<_> = m.iter().map(|(k, v)| (*k, *v)).collect();
    v.sort_by_key(|(k, (c, t))| (*t, *c, *k));
    v
}
