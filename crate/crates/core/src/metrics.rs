//! Structural anonymity and linkability analysis over public transcripts.
//!
//! A withdrawal's anonymity set is the set of deposits accumulated under the
//! two roots it references: leaves under its chain A root plus leaves under
//! its chain B root.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::contract::ChainId;
use crate::field::FieldElement;
use crate::simnet::transcript::{Event, Transcript};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnonymityError {
    #[error("no withdrawal {id} on chain {chain}")]
    UnknownWithdrawal { chain: ChainId, id: u64 },
    #[error("root {root} is not a recorded root of chain {chain}")]
    UnknownRoot { chain: ChainId, root: FieldElement },
}

/// Leaf count behind every root each chain ever produced.
#[derive(Debug, Clone, Default)]
pub struct RootIndex {
    counts: [HashMap<FieldElement, usize>; 2],
}

impl RootIndex {
    pub fn from_transcript(t: &Transcript) -> Self {
        let mut idx = Self::default();
        for r in t.iter() {
            let map = &mut idx.counts[r.chain.index()];
            match &r.event {
                Event::Setup { empty_root, .. } => {
                    map.entry(*empty_root).or_insert(0);
                }
                Event::Deposit { leaf_index, root, .. } => {
                    map.entry(*root).or_insert(leaf_index + 1);
                }
                _ => {}
            }
        }
        idx
    }

    pub fn leaf_count(&self, chain: ChainId, root: FieldElement) -> Result<usize, AnonymityError> {
        self.counts[chain.index()].get(&root).copied().ok_or(AnonymityError::UnknownRoot { chain, root })
    }

    /// Set size and the chains contributing at least one deposit.
    pub fn set_for(&self, root_a: FieldElement, root_b: FieldElement) -> Result<(usize, BTreeSet<ChainId>), AnonymityError> {
        let a = self.leaf_count(ChainId::A, root_a)?;
        let b = self.leaf_count(ChainId::B, root_b)?;
        let chains = [(ChainId::A, a), (ChainId::B, b)].into_iter().filter(|c| c.1 > 0).map(|c| c.0).collect();
        Ok((a + b, chains))
    }
}

/// Anonymity set size of withdrawal `id` submitted on `chain`.
pub fn anonymity_set(transcript: &Transcript, chain: ChainId, id: u64) -> Result<usize, AnonymityError> {
    let (root_a, root_b) = transcript
        .on(chain)
        .find_map(|r| match &r.event {
            Event::WithdrawalSubmitted { id: i, root_a, root_b, .. } if *i == id => Some((*root_a, *root_b)),
            _ => None,
        })
        .ok_or(AnonymityError::UnknownWithdrawal { chain, id })?;
    Ok(RootIndex::from_transcript(transcript).set_for(root_a, root_b)?.0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WithdrawalAnonymity {
    pub chain: ChainId,
    pub id: u64,
    pub anonymity_set: usize,
    pub contributing: BTreeSet<ChainId>,
    pub finalized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnonymityReport {
    pub withdrawals: Vec<WithdrawalAnonymity>,
    pub min: usize,
    pub mean: f64,
}

impl AnonymityReport {
    /// Every accepted withdrawal in submission order; min and mean over the finalized ones.
    pub fn from_transcript(t: &Transcript) -> Result<Self, AnonymityError> {
        let idx = RootIndex::from_transcript(t);
        let finalized: HashSet<(ChainId, u64)> = t
            .iter()
            .filter_map(|r| match r.event {
                Event::WithdrawalFinalized { id, .. } => Some((r.chain, id)),
                _ => None,
            })
            .collect();
        let mut withdrawals = Vec::new();
        for r in t.iter() {
            if let Event::WithdrawalSubmitted { id, root_a, root_b, .. } = r.event {
                let (size, contributing) = idx.set_for(root_a, root_b)?;
                withdrawals.push(WithdrawalAnonymity {
                    chain: r.chain,
                    id,
                    anonymity_set: size,
                    contributing,
                    finalized: finalized.contains(&(r.chain, id)),
                });
            }
        }
        let done: Vec<usize> = withdrawals.iter().filter(|w| w.finalized).map(|w| w.anonymity_set).collect();
        let min = done.iter().copied().min().unwrap_or(0);
        let mean = if done.is_empty() { 0.0 } else { done.iter().sum::<usize>() as f64 / done.len() as f64 };
        Ok(Self { withdrawals, min, mean })
    }

    pub fn to_table(&self) -> String {
        let mut out = String::from("chain id anonymity_set contributing finalized\n");
        for w in &self.withdrawals {
            let chains: Vec<String> = w.contributing.iter().map(|c| c.to_string()).collect();
            let chains = if chains.is_empty() { "-".to_string() } else { chains.join(",") };
            out.push_str(&format!("{} {} {} {} {}\n", w.chain, w.id, w.anonymity_set, chains, w.finalized));
        }
        let summary = serde_json::json!({
            "withdrawals": self.withdrawals.len(),
            "finalized": self.withdrawals.iter().filter(|w| w.finalized).count(),
            "min": self.min,
            "mean": self.mean,
        });
        out.push_str(&format!("#summary {summary}\n"));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkFlag {
    /// Position of the offending record in the transcript.
    pub record: usize,
    pub field: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditResult {
    pub checked: usize,
    pub flags: Vec<LinkFlag>,
}

impl AuditResult {
    pub fn is_clean(&self) -> bool {
        self.flags.is_empty()
    }
}

fn is_withdrawal(ev: &Event) -> bool {
    matches!(
        ev,
        Event::WithdrawalSubmitted { .. }
            | Event::WithdrawalRejected { .. }
            | Event::WithdrawalFinalized { .. }
            | Event::WithdrawalCancelled { .. }
    )
}

/// Flags withdrawal records whose public fields carry a deposit commitment or
/// a leaf position.
pub fn linkability_audit(transcript: &Transcript) -> AuditResult {
    let commitments: HashSet<String> = transcript
        .iter()
        .filter_map(|r| match &r.event {
            Event::Deposit { commitment, .. } => Some(commitment.to_hex()),
            _ => None,
        })
        .collect();
    let mut result = AuditResult::default();
    for (i, r) in transcript.iter().enumerate().filter(|(_, r)| is_withdrawal(&r.event)) {
        result.checked += 1;
        for (key, value) in r.event.fields() {
            if key == "leaf_index" || key == "index" {
                result.flags.push(LinkFlag { record: i, field: key.into(), reason: "leaf position".into() });
            } else if commitments.contains(&value) {
                result.flags.push(LinkFlag { record: i, field: key.into(), reason: "deposit commitment".into() });
            }
        }
    }
    result
}
