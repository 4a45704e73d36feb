//! Scenario description: chain parameters, relayers, the scripted user
//! actions and an optional adversary. Scenarios are read from TOML.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::contract::{AccountId, ChainId, Tick};
use crate::merkle::MAX_HEIGHT;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScenarioError {
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("invalid scenario field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

impl ScenarioError {
    fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::Invalid { field: field.into(), reason: reason.into() }
    }
}

fn default_epsilon() -> i64 {
    1
}

fn default_difficulty() -> u64 {
    4
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelayerSpec {
    pub id: String,
    /// Source chain. Absent means the relayer serves both directions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<ChainId>,
    pub delay: Tick,
    #[serde(default)]
    pub censored: bool,
    #[serde(default = "default_true")]
    pub honest: bool,
}

impl RelayerSpec {
    pub fn honest(id: &str, delay: Tick) -> Self {
        Self { id: id.into(), from: None, delay, censored: false, honest: true }
    }

    pub fn serves(&self, from: ChainId) -> bool {
        self.from.map_or(true, |f| f == from)
    }

    pub fn is_reliable(&self) -> bool {
        self.honest && !self.censored
    }
}

/// One scripted user action.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScriptEvent {
    Deposit {
        at: Tick,
        chain: ChainId,
        note: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        amount: Option<u64>,
    },
    Withdraw {
        at: Tick,
        chain: ChainId,
        note: String,
        recipient: AccountId,
    },
    ClaimReward {
        at: Tick,
        chain: ChainId,
        note: String,
        claimant: AccountId,
    },
}

impl ScriptEvent {
    pub fn at(&self) -> Tick {
        match self {
            Self::Deposit { at, .. } | Self::Withdraw { at, .. } | Self::ClaimReward { at, .. } => *at,
        }
    }

    pub fn chain(&self) -> ChainId {
        match self {
            Self::Deposit { chain, .. } | Self::Withdraw { chain, .. } | Self::ClaimReward { chain, .. } => *chain,
        }
    }

    pub fn note(&self) -> &str {
        match self {
            Self::Deposit { note, .. } | Self::Withdraw { note, .. } | Self::ClaimReward { note, .. } => note,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AdversarySpec {
    /// Withdraws `note` on `first_chain` at `at` and on the other chain at `at + t_prime`.
    DoubleWithdraw {
        note: String,
        first_chain: ChainId,
        at: Tick,
        t_prime: Tick,
        /// Inclusive sweep bounds for race exploration.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t_prime_range: Option<[Tick; 2]>,
    },
    /// Copies the first honest withdrawal of `note` and resubmits it to its own
    /// address `lag` ticks later. With `lag = 0` on the same chain the copy
    /// lands first.
    Replay {
        note: String,
        lag: Tick,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        chain: Option<ChainId>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncentiveSpec {
    #[serde(default)]
    pub rate_a: u64,
    #[serde(default)]
    pub rate_b: u64,
    #[serde(default)]
    pub min_lock: Tick,
}

impl IncentiveSpec {
    pub fn rate(&self, chain: ChainId) -> u64 {
        match chain {
            ChainId::A => self.rate_a,
            ChainId::B => self.rate_b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub seed: u64,
    pub horizon: Tick,
    pub tree_height: usize,
    pub denomination: u64,
    #[serde(default = "default_epsilon")]
    pub epsilon: i64,
    /// Contract delay bound `D`. Derived from the relayers when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relay_delay: Option<Tick>,
    /// Proof-of-work target divisor (expected hashes per header).
    #[serde(default = "default_difficulty")]
    pub difficulty: u64,
    #[serde(default)]
    pub relayers: Vec<RelayerSpec>,
    #[serde(default)]
    pub events: Vec<ScriptEvent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adversary: Option<AdversarySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub incentives: Option<IncentiveSpec>,
}

impl Scenario {
    /// A bare scenario with one honest bidirectional relayer of delay `d`.
    pub fn new(seed: u64, horizon: Tick, tree_height: usize, denomination: u64, d: Tick) -> Self {
        Self {
            seed,
            horizon,
            tree_height,
            denomination,
            epsilon: 1,
            relay_delay: None,
            difficulty: default_difficulty(),
            relayers: vec![RelayerSpec::honest("r0", d)],
            events: Vec::new(),
            adversary: None,
            incentives: None,
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self, ScenarioError> {
        let sc: Self = toml::from_str(s).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn push(&mut self, ev: ScriptEvent) -> &mut Self {
        self.events.push(ev);
        self
    }

    /// Smallest delay among honest, uncensored relayers for `from -> other`.
    pub fn min_reliable_delay(&self, from: ChainId) -> Option<Tick> {
        self.relayers.iter().filter(|r| r.serves(from) && r.is_reliable()).map(|r| r.delay).min()
    }

    /// Smallest delay among all uncensored relayers for `from -> other`.
    pub fn min_delivery_delay(&self, from: ChainId) -> Option<Tick> {
        self.relayers.iter().filter(|r| r.serves(from) && !r.censored).map(|r| r.delay).min()
    }

    /// The contract's `D`: explicit, or the worse direction's best honest delay.
    pub fn delay_bound(&self) -> Option<Tick> {
        self.relay_delay.or_else(|| {
            let a = self.min_reliable_delay(ChainId::A)?;
            let b = self.min_reliable_delay(ChainId::B)?;
            Some(a.max(b))
        })
    }

    pub fn notes(&self) -> BTreeSet<&str> {
        let mut out: BTreeSet<&str> = self.events.iter().map(|e| e.note()).collect();
        match &self.adversary {
            Some(AdversarySpec::DoubleWithdraw { note, .. }) | Some(AdversarySpec::Replay { note, .. }) => {
                out.insert(note);
            }
            None => {}
        }
        out
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.tree_height == 0 || self.tree_height > MAX_HEIGHT {
            return Err(ScenarioError::invalid("tree_height", format!("must be in 1..={MAX_HEIGHT}")));
        }
        if self.denomination == 0 {
            return Err(ScenarioError::invalid("denomination", "must be positive"));
        }
        if self.difficulty == 0 {
            return Err(ScenarioError::invalid("difficulty", "must be positive"));
        }
        let mut ids = BTreeSet::new();
        for (i, r) in self.relayers.iter().enumerate() {
            if r.delay == 0 {
                return Err(ScenarioError::invalid(format!("relayers[{i}].delay"), "must be positive"));
            }
            if !ids.insert(r.id.as_str()) {
                return Err(ScenarioError::invalid(format!("relayers[{i}].id"), format!("duplicate id `{}`", r.id)));
            }
        }
        let d = match self.delay_bound() {
            Some(d) => d,
            None => {
                return Err(ScenarioError::invalid(
                    "relayers",
                    "each direction needs an honest uncensored relayer unless relay_delay is set",
                ))
            }
        };
        if d == 0 {
            return Err(ScenarioError::invalid("relay_delay", "must be positive"));
        }
        if d as i64 + self.epsilon < 0 {
            return Err(ScenarioError::invalid("epsilon", "processing delay would be negative"));
        }
        for (i, ev) in self.events.iter().enumerate() {
            if ev.at() > self.horizon {
                return Err(ScenarioError::invalid(format!("events[{i}].at"), "beyond horizon"));
            }
            if let ScriptEvent::Deposit { amount: Some(0), .. } = ev {
                return Err(ScenarioError::invalid(format!("events[{i}].amount"), "must be positive"));
            }
            if ev.note().is_empty() {
                return Err(ScenarioError::invalid(format!("events[{i}].note"), "empty label"));
            }
        }
        if let Some(AdversarySpec::DoubleWithdraw { at, t_prime, t_prime_range, .. }) = &self.adversary {
            if at + t_prime > self.horizon {
                return Err(ScenarioError::invalid("adversary.t_prime", "second submission beyond horizon"));
            }
            if let Some([lo, hi]) = t_prime_range {
                if lo > hi {
                    return Err(ScenarioError::invalid("adversary.t_prime_range", "empty range"));
                }
            }
        }
        Ok(())
    }
}
