//! Exhaustive double-withdrawal timing sweep.
//!
//! A note is withdrawn on one chain at `t` and on the other at `t + t'`. With
//! relay delay `D` and processing delay `P = D + epsilon`, the first
//! withdrawal's nullifier reaches the second chain at `t + D` and the second's
//! reaches the first at `t + t' + D`. Deliveries land before same-tick
//! processing, so for `t' < D` the first pays iff `P < t' + D` and the second
//! pays iff `t' + P < D`; for `t' >= D` the second is rejected on submission.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contract::{AccountId, ChainId, Tick};

use super::engine::{run, SimOutcome};
use super::scenario::{AdversarySpec, Scenario, ScenarioError, ScriptEvent};
use super::transcript::Event;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RaceError {
    #[error("scenario has no double_withdraw adversary")]
    MissingAdversary,
    #[error("t' range is empty")]
    EmptyRange,
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RaceRow {
    pub t_prime: Tick,
    pub first_chain: ChainId,
    pub payouts: u32,
    pub cancellations: u32,
    pub rejections: u32,
    /// Payouts of the single-withdrawal control run on `first_chain`.
    pub honest_payouts: u32,
    /// Every duplicate detection happened while both withdrawals were pending.
    pub both_pending_at_detection: bool,
    pub predicted_both_cancel: bool,
    pub predicted_payouts: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RaceReport {
    pub relay_delay: Tick,
    pub epsilon: i64,
    pub processing_delay: Tick,
    pub rows: Vec<RaceRow>,
}

impl RaceReport {
    pub fn max_payouts(&self) -> u32 {
        self.rows.iter().map(|r| r.payouts).max().unwrap_or(0)
    }

    pub fn double_payout_rows(&self) -> Vec<&RaceRow> {
        self.rows.iter().filter(|r| r.payouts > 1).collect()
    }

    /// Rows where observation and the closed-form timing model disagree.
    pub fn mismatches(&self) -> Vec<&RaceRow> {
        self.rows
            .iter()
            .filter(|r| r.payouts != r.predicted_payouts || r.both_pending_at_detection != r.predicted_both_cancel)
            .collect()
    }

    /// Rows where both withdrawals were pending at detection yet something paid.
    pub fn missed_cancellations(&self) -> Vec<&RaceRow> {
        self.rows.iter().filter(|r| r.both_pending_at_detection && r.payouts > 0).collect()
    }

    pub fn to_table(&self) -> String {
        let mut out = String::from(
            "t_prime first_chain payouts cancellations rejections honest_payouts both_pending predicted_both_cancel predicted_payouts\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{} {} {} {} {} {} {} {} {}\n",
                r.t_prime,
                r.first_chain,
                r.payouts,
                r.cancellations,
                r.rejections,
                r.honest_payouts,
                r.both_pending_at_detection,
                r.predicted_both_cancel,
                r.predicted_payouts
            ));
        }
        let violating: Vec<_> = self
            .double_payout_rows()
            .iter()
            .map(|r| serde_json::json!({ "t_prime": r.t_prime, "first_chain": r.first_chain }))
            .collect();
        let summary = serde_json::json!({
            "relay_delay": self.relay_delay,
            "epsilon": self.epsilon,
            "processing_delay": self.processing_delay,
            "rows": self.rows.len(),
            "max_payouts": self.max_payouts(),
            "double_payouts": violating.len(),
            "model_mismatches": self.mismatches().len(),
            "violating": violating,
        });
        out.push_str(&format!("#summary {summary}\n"));
        out
    }
}

/// Closed-form `(payouts, both_cancel)` for one race.
pub fn predict(t_prime: Tick, relay_delay: Tick, processing_delay: Tick) -> (u32, bool) {
    let (d, p) = (relay_delay, processing_delay);
    if t_prime >= d {
        return (1, false);
    }
    let first = p < t_prime + d;
    let second = t_prime + p < d;
    (first as u32 + second as u32, p >= t_prime + d)
}

fn race_row(out: &SimOutcome, note: &str, t_prime: Tick, first_chain: ChainId, honest_payouts: u32) -> RaceRow {
    let summary = out.note(note).expect("race note exists");
    let sn = summary.nullifier;
    let (mut submitted, mut finalized, mut detections, mut both_pending) = (0, 0, 0, true);
    for r in out.transcript.iter() {
        match &r.event {
            Event::WithdrawalSubmitted { nullifier, .. } if *nullifier == sn => submitted += 1,
            Event::WithdrawalFinalized { nullifier, .. } if *nullifier == sn => finalized += 1,
            Event::DuplicateNullifier { nullifier, .. } if *nullifier == sn => {
                detections += 1;
                both_pending &= submitted == 2 && finalized == 0;
            }
            _ => {}
        }
    }
    let (predicted_payouts, predicted_both_cancel) = predict(t_prime, out.delay_bound, out.processing_delay);
    RaceRow {
        t_prime,
        first_chain,
        payouts: summary.payouts,
        cancellations: summary.cancellations,
        rejections: summary.rejections,
        honest_payouts,
        both_pending_at_detection: detections > 0 && both_pending,
        predicted_both_cancel,
        predicted_payouts,
    }
}

/// Runs the double withdrawal for every `t'` in `range` and both submission
/// orders, plus a single honest withdrawal per order as a control. The
/// horizon is extended so every submission settles.
pub fn explore_races(base: &Scenario, range: RangeInclusive<Tick>) -> Result<RaceReport, RaceError> {
    let Some(AdversarySpec::DoubleWithdraw { note, first_chain, at, .. }) = base.adversary.clone() else {
        return Err(RaceError::MissingAdversary);
    };
    if range.is_empty() {
        return Err(RaceError::EmptyRange);
    }
    base.validate()?;
    let d = base.delay_bound().expect("validated");
    let p = (d as i64 + base.epsilon).max(0) as Tick;
    let horizon = base.horizon.max(at + range.end() + p + d + 1);

    let orders = [first_chain, first_chain.other()];
    let controls: Vec<u32> = orders
        .par_iter()
        .map(|&chain| {
            let mut sc = base.clone();
            sc.horizon = horizon;
            sc.adversary = None;
            let recipient = AccountId::new("honest").expect("valid");
            sc.push(ScriptEvent::Withdraw { at, chain, note: note.clone(), recipient });
            run(&sc).map(|o| o.note(&note).map_or(0, |n| n.payouts))
        })
        .collect::<Result<_, _>>()?;

    let combos: Vec<(Tick, usize)> = range.flat_map(|t| (0..orders.len()).map(move |o| (t, o))).collect();
    let rows = combos
        .par_iter()
        .map(|&(t_prime, o)| {
            let mut sc = base.clone();
            sc.horizon = horizon;
            sc.adversary = Some(AdversarySpec::DoubleWithdraw {
                note: note.clone(),
                first_chain: orders[o],
                at,
                t_prime,
                t_prime_range: None,
            });
            run(&sc).map(|out| race_row(&out, &note, t_prime, orders[o], controls[o]))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RaceReport { relay_delay: d, epsilon: base.epsilon, processing_delay: p, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prediction_cases() {
        // D = 3, P = 4.
        assert_eq!(predict(0, 3, 4), (0, true));
        assert_eq!(predict(1, 3, 4), (0, true));
        assert_eq!(predict(2, 3, 4), (1, false));
        assert_eq!(predict(3, 3, 4), (1, false));
        // Delay mis-set to D - 1.
        assert_eq!(predict(0, 3, 2), (2, false));
        assert_eq!(predict(1, 3, 2), (1, false));
    }

    #[test]
    fn prediction_never_doubles_with_full_delay() {
        for d in 1..8 {
            for eps in 0..4 {
                for t in 0..3 * (d + eps) {
                    let (payouts, both) = predict(t, d, d + eps);
                    assert!(payouts <= 1);
                    assert_eq!(both, payouts == 0);
                    assert_eq!(both, t <= eps && t < d);
                }
            }
        }
    }
}
