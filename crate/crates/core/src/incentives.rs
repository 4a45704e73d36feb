//! Lock-time rewards and the vampire-attack liquidity measurement.
//!
//! A claim proves membership of an unspent note against a pair of roots, and
//! the claimable age is measured from the younger of the two: the OR relation
//! lets the non-selected root be arbitrarily old, so only the younger one
//! bounds how long the note has been locked.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::contract::{AccountId, ChainId, ContractState, Tick};
use crate::field::FieldElement;
use crate::simnet::scenario::{IncentiveSpec, RelayerSpec, Scenario, ScriptEvent};
use crate::simnet::transcript::{Event, Transcript};
use crate::contract::Payout;
use crate::zkrel::{Proof, Statement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewardConfig {
    /// Governance tokens per tick locked.
    pub rate: u64,
    pub min_lock: Tick,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewardClaim {
    pub statement: Statement,
    pub proof: Proof,
    pub claimed_age: Tick,
    pub claimant: AccountId,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RewardError {
    #[error("root for chain {0} is not known")]
    UnknownRoot(ChainId),
    #[error("proof does not verify")]
    InvalidProof,
    #[error("note already withdrawn")]
    NoteSpent,
    #[error("referenced roots are {age} ticks old, below the minimum {min_lock}")]
    TooYoung { age: Tick, min_lock: Tick },
    #[error("claimed age {claimed} exceeds the provable age {provable}")]
    ClaimExceedsAge { claimed: Tick, provable: Tick },
    #[error("age {claimed} already paid up to {paid}")]
    NonIncremental { claimed: Tick, paid: Tick },
}

impl RewardError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::UnknownRoot(_) => "unknown_root",
            Self::InvalidProof => "invalid_proof",
            Self::NoteSpent => "note_spent",
            Self::TooYoung { .. } => "too_young",
            Self::ClaimExceedsAge { .. } => "claim_exceeds_age",
            Self::NonIncremental { .. } => "non_incremental",
        }
    }
}

/// One paid interval `(from_age, to_age]` for a nullifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaidInterval {
    pub nullifier: FieldElement,
    pub from_age: Tick,
    pub to_age: Tick,
    pub amount: u64,
}

/// Per-chain reward accounting.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RewardBook {
    paid_age: HashMap<FieldElement, Tick>,
    balances: BTreeMap<AccountId, u64>,
    intervals: Vec<PaidInterval>,
    minted: u64,
}

impl RewardBook {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn paid_age(&self, sn: &FieldElement) -> Tick {
        self.paid_age.get(sn).copied().unwrap_or(0)
    }

    pub fn balance(&self, who: &AccountId) -> u64 {
        self.balances.get(who).copied().unwrap_or(0)
    }

    pub fn balances(&self) -> &BTreeMap<AccountId, u64> {
        &self.balances
    }

    pub fn intervals(&self) -> &[PaidInterval] {
        &self.intervals
    }

    pub fn total_minted(&self) -> u64 {
        self.minted
    }
}

/// Ticks a claim over `stmt` can prove at `now`: the age of its younger root.
pub fn provable_age(state: &ContractState, stmt: &Statement, now: Tick) -> Result<Tick, RewardError> {
    let mut youngest = 0;
    for (side, root) in [(ChainId::A, stmt.root_a), (ChainId::B, stmt.root_b)] {
        let known = if side == state.chain() { state.knows_local_root(root) } else { state.knows_remote_root(root) };
        let ts = state.root_timestamp(root).filter(|_| known).ok_or(RewardError::UnknownRoot(side))?;
        youngest = youngest.max(ts);
    }
    Ok(now.saturating_sub(youngest))
}

/// Pays `rate * (claimed_age - previously paid age)` to the claimant.
pub fn claim_reward(
    state: &ContractState,
    book: &mut RewardBook,
    cfg: &RewardConfig,
    claim: &RewardClaim,
    now: Tick,
) -> Result<u64, RewardError> {
    let stmt = &claim.statement;
    let provable = provable_age(state, stmt, now)?;
    let params = state.params().ok_or(RewardError::InvalidProof)?;
    if !state.backend().verify(params, stmt, &claim.proof) {
        return Err(RewardError::InvalidProof);
    }
    if state.nullifier(&stmt.nullifier).is_some() {
        return Err(RewardError::NoteSpent);
    }
    if provable < cfg.min_lock || claim.claimed_age < cfg.min_lock {
        return Err(RewardError::TooYoung { age: provable.min(claim.claimed_age), min_lock: cfg.min_lock });
    }
    if claim.claimed_age > provable {
        return Err(RewardError::ClaimExceedsAge { claimed: claim.claimed_age, provable });
    }
    let paid = book.paid_age(&stmt.nullifier);
    if claim.claimed_age <= paid {
        return Err(RewardError::NonIncremental { claimed: claim.claimed_age, paid });
    }
    let amount = cfg.rate * (claim.claimed_age - paid);
    book.paid_age.insert(stmt.nullifier, claim.claimed_age);
    *book.balances.entry(claim.claimant.clone()).or_default() += amount;
    book.intervals.push(PaidInterval { nullifier: stmt.nullifier, from_age: paid, to_age: claim.claimed_age, amount });
    book.minted += amount;
    Ok(amount)
}

/// Parameters of a reward-seeking population.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VampireConfig {
    pub seed: u64,
    pub agents_a: usize,
    pub agents_b: usize,
    pub rate_a: u64,
    pub rate_b: u64,
    pub min_lock: Tick,
    pub relay_delay: Tick,
    pub horizon: Tick,
    pub tree_height: usize,
    pub denomination: u64,
}

impl Default for VampireConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            agents_a: 6,
            agents_b: 0,
            rate_a: 0,
            rate_b: 2,
            min_lock: 4,
            relay_delay: 2,
            horizon: 80,
            tree_height: 5,
            denomination: 10,
        }
    }
}

/// Scripted agents: each deposits on its home chain, then at shared review
/// epochs moves to the other chain when the other chain's rate over the
/// remaining horizon, net of one relock period, beats staying. A move is a
/// withdrawal on the destination chain followed by a fresh deposit there once
/// the withdrawal has settled. Agents claim accrued rewards at every review
/// and before moving.
pub fn vampire_scenario(cfg: &VampireConfig) -> Scenario {
    let delay = cfg.relay_delay + 1;
    let relock = delay + 1 + cfg.min_lock;
    let period = cfg.min_lock.max(1);
    let mut sc = Scenario::new(cfg.seed, cfg.horizon, cfg.tree_height, cfg.denomination, cfg.relay_delay);
    sc.relayers = vec![RelayerSpec::honest("relay", cfg.relay_delay)];
    sc.incentives = Some(IncentiveSpec { rate_a: cfg.rate_a, rate_b: cfg.rate_b, min_lock: cfg.min_lock });
    let rate = |c: ChainId| if c == ChainId::A { cfg.rate_a } else { cfg.rate_b };

    let homes: Vec<ChainId> =
        (0..cfg.agents_a).map(|_| ChainId::A).chain((0..cfg.agents_b).map(|_| ChainId::B)).collect();
    let first_review = homes.len() as Tick + 1 + cfg.min_lock + cfg.relay_delay;
    for (i, &home) in homes.iter().enumerate() {
        let agent = AccountId::new(format!("agent{i}")).expect("valid id");
        let mut chain = home;
        let mut generation = 0;
        let mut note = format!("agent{i}-g0");
        let mut locked_at = 1 + i as Tick;
        sc.push(ScriptEvent::Deposit { at: locked_at, chain, note: note.clone(), amount: None });

        let mut t = first_review;
        while t + relock <= cfg.horizon {
            if t < locked_at + cfg.min_lock + cfg.relay_delay {
                t += period;
                continue;
            }
            let remaining = cfg.horizon - t;
            let other = chain.other();
            if rate(chain) > 0 {
                sc.push(ScriptEvent::ClaimReward { at: t, chain, note: note.clone(), claimant: agent.clone() });
            }
            if rate(other) * remaining.saturating_sub(relock) > rate(chain) * remaining {
                sc.push(ScriptEvent::Withdraw { at: t + 1, chain: other, note: note.clone(), recipient: agent.clone() });
                generation += 1;
                chain = other;
                note = format!("agent{i}-g{generation}");
                locked_at = t + 1 + delay + 1;
                sc.push(ScriptEvent::Deposit { at: locked_at, chain, note: note.clone(), amount: None });
            }
            t += period;
        }
    }
    sc.events.sort_by_key(|e| e.at());
    sc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LiquidityPoint {
    pub tick: Tick,
    pub locked_a: u64,
    pub locked_b: u64,
    pub wrapped_b: u64,
    pub rewards_a: u64,
    pub rewards_b: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiquiditySeries {
    pub points: Vec<LiquidityPoint>,
}

impl LiquiditySeries {
    pub fn last(&self) -> LiquidityPoint {
        self.points.last().copied().unwrap_or_default()
    }

    pub fn to_table(&self) -> String {
        let mut out = String::from("tick locked_A locked_B wrapped_B rewards_A rewards_B\n");
        for p in &self.points {
            out.push_str(&format!(
                "{} {} {} {} {} {}\n",
                p.tick, p.locked_a, p.locked_b, p.wrapped_b, p.rewards_a, p.rewards_b
            ));
        }
        let last = self.last();
        let summary = serde_json::json!({
            "ticks": self.points.len(),
            "final": last,
        });
        out.push_str(&format!("#summary {summary}\n"));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("malformed transcript: {0}")]
    Malformed(String),
}

/// Per-tick locked value, wrapped supply on B and cumulative rewards, from a
/// transcript. Covers ticks `0..=last tick`; an empty transcript yields a
/// single zero row.
pub fn vampire_metrics(transcript: &Transcript) -> Result<LiquiditySeries, MetricsError> {
    let mut last_tick = 0;
    for r in transcript.iter() {
        if r.tick < last_tick {
            return Err(MetricsError::Malformed(format!("tick {} after {}", r.tick, last_tick)));
        }
        last_tick = r.tick;
    }
    let mut denomination = [0u64; 2];
    let mut cur = LiquidityPoint::default();
    let mut points = Vec::with_capacity(last_tick as usize + 1);
    let mut records = transcript.iter().peekable();
    for tick in 0..=last_tick {
        while let Some(r) = records.peek().filter(|r| r.tick == tick) {
            let side = r.chain.index();
            match &r.event {
                Event::Setup { denomination: d, .. } => denomination[side] = *d,
                Event::Deposit { .. } => {
                    let d = denomination[side];
                    if d == 0 {
                        return Err(MetricsError::Malformed(format!("deposit on {} before setup", r.chain)));
                    }
                    *locked_mut(&mut cur, r.chain) += d;
                }
                Event::WithdrawalFinalized { amount, payout, .. } => match payout {
                    Payout::Native => {
                        let l = locked_mut(&mut cur, r.chain);
                        *l = l.checked_sub(*amount).ok_or_else(|| {
                            MetricsError::Malformed(format!("native payout exceeds locked value on {}", r.chain))
                        })?;
                    }
                    Payout::Wrapped if r.chain == ChainId::B => cur.wrapped_b += amount,
                    Payout::Wrapped => {}
                },
                Event::RewardPaid { amount, .. } => match r.chain {
                    ChainId::A => cur.rewards_a += amount,
                    ChainId::B => cur.rewards_b += amount,
                },
                _ => {}
            }
            records.next();
        }
        cur.tick = tick;
        points.push(cur);
    }
    Ok(LiquiditySeries { points })
}

fn locked_mut(p: &mut LiquidityPoint, chain: ChainId) -> &mut u64 {
    match chain {
        ChainId::A => &mut p.locked_a,
        ChainId::B => &mut p.locked_b,
    }
}
