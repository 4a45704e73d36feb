//! Line-delimited event log: `tick chain Kind key=value ...`, field elements
//! in canonical hex.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::contract::{AccountId, ChainId, Payout, Tick};
use crate::field::FieldElement;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    Setup { empty_root: FieldElement, denomination: u64, processing_delay: Tick },
    Deposit { leaf_index: usize, commitment: FieldElement, root: FieldElement },
    DepositRejected { commitment: FieldElement, reason: String },
    WithdrawalSubmitted {
        id: u64,
        root_a: FieldElement,
        root_b: FieldElement,
        nullifier: FieldElement,
        recipient: AccountId,
        finalize_at: Tick,
    },
    WithdrawalRejected {
        root_a: FieldElement,
        root_b: FieldElement,
        nullifier: FieldElement,
        recipient: AccountId,
        reason: String,
    },
    WithdrawalFinalized { id: u64, nullifier: FieldElement, recipient: AccountId, amount: u64, payout: Payout },
    WithdrawalCancelled { id: u64, nullifier: FieldElement },
    DuplicateNullifier { nullifier: FieldElement, cancelled: usize },
    HeaderMined { height: u64, digest: FieldElement, commitment: FieldElement },
    HeaderAccepted { relayer: String, height: u64 },
    HeaderIgnored { relayer: String, height: u64 },
    HeaderRejected { relayer: String, height: u64, reason: String },
    BridgeStateAccepted { relayer: String, header: u64, roots: usize, nullifiers: usize },
    BridgeStateRejected { relayer: String, header: u64, reason: String },
    RemoteRootInstalled { root: FieldElement },
    RemoteNullifierInstalled { nullifier: FieldElement },
    RewardPaid { claimant: AccountId, nullifier: FieldElement, age: Tick, amount: u64 },
    RewardRejected { claimant: AccountId, nullifier: FieldElement, reason: String },
    InvariantViolation { detail: String },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("transcript line {line}: {reason}")]
pub struct TranscriptError {
    pub line: usize,
    pub reason: String,
}

/// Turns free text into a single whitespace-free token.
pub fn token(s: &str) -> String {
    let t: String = s.chars().map(|c| if c.is_whitespace() || c == '=' { '_' } else { c }).collect();
    if t.is_empty() {
        "-".into()
    } else {
        t
    }
}

impl Event {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Setup { .. } => "Setup",
            Self::Deposit { .. } => "Deposit",
            Self::DepositRejected { .. } => "DepositRejected",
            Self::WithdrawalSubmitted { .. } => "WithdrawalSubmitted",
            Self::WithdrawalRejected { .. } => "WithdrawalRejected",
            Self::WithdrawalFinalized { .. } => "WithdrawalFinalized",
            Self::WithdrawalCancelled { .. } => "WithdrawalCancelled",
            Self::DuplicateNullifier { .. } => "DuplicateNullifier",
            Self::HeaderMined { .. } => "HeaderMined",
            Self::HeaderAccepted { .. } => "HeaderAccepted",
            Self::HeaderIgnored { .. } => "HeaderIgnored",
            Self::HeaderRejected { .. } => "HeaderRejected",
            Self::BridgeStateAccepted { .. } => "BridgeStateAccepted",
            Self::BridgeStateRejected { .. } => "BridgeStateRejected",
            Self::RemoteRootInstalled { .. } => "RemoteRootInstalled",
            Self::RemoteNullifierInstalled { .. } => "RemoteNullifierInstalled",
            Self::RewardPaid { .. } => "RewardPaid",
            Self::RewardRejected { .. } => "RewardRejected",
            Self::InvariantViolation { .. } => "InvariantViolation",
        }
    }

    /// Ordered `(key, value)` pairs as written to the log.
    pub fn fields(&self) -> Vec<(&'static str, String)> {
        let fe = |f: &FieldElement| f.to_hex();
        match self {
            Self::Setup { empty_root, denomination, processing_delay } => vec![
                ("empty_root", fe(empty_root)),
                ("denomination", denomination.to_string()),
                ("processing_delay", processing_delay.to_string()),
            ],
            Self::Deposit { leaf_index, commitment, root } => {
                vec![("leaf_index", leaf_index.to_string()), ("commitment", fe(commitment)), ("root", fe(root))]
            }
            Self::DepositRejected { commitment, reason } => {
                vec![("commitment", fe(commitment)), ("reason", token(reason))]
            }
            Self::WithdrawalSubmitted { id, root_a, root_b, nullifier, recipient, finalize_at } => vec![
                ("id", id.to_string()),
                ("root_a", fe(root_a)),
                ("root_b", fe(root_b)),
                ("nullifier", fe(nullifier)),
                ("recipient", recipient.to_string()),
                ("finalize_at", finalize_at.to_string()),
            ],
            Self::WithdrawalRejected { root_a, root_b, nullifier, recipient, reason } => vec![
                ("root_a", fe(root_a)),
                ("root_b", fe(root_b)),
                ("nullifier", fe(nullifier)),
                ("recipient", recipient.to_string()),
                ("reason", token(reason)),
            ],
            Self::WithdrawalFinalized { id, nullifier, recipient, amount, payout } => vec![
                ("id", id.to_string()),
                ("nullifier", fe(nullifier)),
                ("recipient", recipient.to_string()),
                ("amount", amount.to_string()),
                ("payout", payout.to_string()),
            ],
            Self::WithdrawalCancelled { id, nullifier } => vec![("id", id.to_string()), ("nullifier", fe(nullifier))],
            Self::DuplicateNullifier { nullifier, cancelled } => {
                vec![("nullifier", fe(nullifier)), ("cancelled", cancelled.to_string())]
            }
            Self::HeaderMined { height, digest, commitment } => {
                vec![("height", height.to_string()), ("digest", fe(digest)), ("commitment", fe(commitment))]
            }
            Self::HeaderAccepted { relayer, height } | Self::HeaderIgnored { relayer, height } => {
                vec![("relayer", token(relayer)), ("height", height.to_string())]
            }
            Self::HeaderRejected { relayer, height, reason } => {
                vec![("relayer", token(relayer)), ("height", height.to_string()), ("reason", token(reason))]
            }
            Self::BridgeStateAccepted { relayer, header, roots, nullifiers } => vec![
                ("relayer", token(relayer)),
                ("header", header.to_string()),
                ("roots", roots.to_string()),
                ("nullifiers", nullifiers.to_string()),
            ],
            Self::BridgeStateRejected { relayer, header, reason } => {
                vec![("relayer", token(relayer)), ("header", header.to_string()), ("reason", token(reason))]
            }
            Self::RemoteRootInstalled { root } => vec![("root", fe(root))],
            Self::RemoteNullifierInstalled { nullifier } => vec![("nullifier", fe(nullifier))],
            Self::RewardPaid { claimant, nullifier, age, amount } => vec![
                ("claimant", claimant.to_string()),
                ("nullifier", fe(nullifier)),
                ("age", age.to_string()),
                ("amount", amount.to_string()),
            ],
            Self::RewardRejected { claimant, nullifier, reason } => {
                vec![("claimant", claimant.to_string()), ("nullifier", fe(nullifier)), ("reason", token(reason))]
            }
            Self::InvariantViolation { detail } => vec![("detail", token(detail))],
        }
    }

    fn parse(kind: &str, f: &Fields) -> Result<Self, String> {
        Ok(match kind {
            "Setup" => Self::Setup {
                empty_root: f.fe("empty_root")?,
                denomination: f.num("denomination")?,
                processing_delay: f.num("processing_delay")?,
            },
            "Deposit" => Self::Deposit {
                leaf_index: f.num("leaf_index")?,
                commitment: f.fe("commitment")?,
                root: f.fe("root")?,
            },
            "DepositRejected" => Self::DepositRejected { commitment: f.fe("commitment")?, reason: f.text("reason")? },
            "WithdrawalSubmitted" => Self::WithdrawalSubmitted {
                id: f.num("id")?,
                root_a: f.fe("root_a")?,
                root_b: f.fe("root_b")?,
                nullifier: f.fe("nullifier")?,
                recipient: f.account("recipient")?,
                finalize_at: f.num("finalize_at")?,
            },
            "WithdrawalRejected" => Self::WithdrawalRejected {
                root_a: f.fe("root_a")?,
                root_b: f.fe("root_b")?,
                nullifier: f.fe("nullifier")?,
                recipient: f.account("recipient")?,
                reason: f.text("reason")?,
            },
            "WithdrawalFinalized" => Self::WithdrawalFinalized {
                id: f.num("id")?,
                nullifier: f.fe("nullifier")?,
                recipient: f.account("recipient")?,
                amount: f.num("amount")?,
                payout: match f.text("payout")?.as_str() {
                    "native" => Payout::Native,
                    "wrapped" => Payout::Wrapped,
                    other => return Err(format!("bad payout `{other}`")),
                },
            },
            "WithdrawalCancelled" => Self::WithdrawalCancelled { id: f.num("id")?, nullifier: f.fe("nullifier")? },
            "DuplicateNullifier" => {
                Self::DuplicateNullifier { nullifier: f.fe("nullifier")?, cancelled: f.num("cancelled")? }
            }
            "HeaderMined" => Self::HeaderMined {
                height: f.num("height")?,
                digest: f.fe("digest")?,
                commitment: f.fe("commitment")?,
            },
            "HeaderAccepted" => Self::HeaderAccepted { relayer: f.text("relayer")?, height: f.num("height")? },
            "HeaderIgnored" => Self::HeaderIgnored { relayer: f.text("relayer")?, height: f.num("height")? },
            "HeaderRejected" => Self::HeaderRejected {
                relayer: f.text("relayer")?,
                height: f.num("height")?,
                reason: f.text("reason")?,
            },
            "BridgeStateAccepted" => Self::BridgeStateAccepted {
                relayer: f.text("relayer")?,
                header: f.num("header")?,
                roots: f.num("roots")?,
                nullifiers: f.num("nullifiers")?,
            },
            "BridgeStateRejected" => Self::BridgeStateRejected {
                relayer: f.text("relayer")?,
                header: f.num("header")?,
                reason: f.text("reason")?,
            },
            "RemoteRootInstalled" => Self::RemoteRootInstalled { root: f.fe("root")? },
            "RemoteNullifierInstalled" => Self::RemoteNullifierInstalled { nullifier: f.fe("nullifier")? },
            "RewardPaid" => Self::RewardPaid {
                claimant: f.account("claimant")?,
                nullifier: f.fe("nullifier")?,
                age: f.num("age")?,
                amount: f.num("amount")?,
            },
            "RewardRejected" => Self::RewardRejected {
                claimant: f.account("claimant")?,
                nullifier: f.fe("nullifier")?,
                reason: f.text("reason")?,
            },
            "InvariantViolation" => Self::InvariantViolation { detail: f.text("detail")? },
            other => return Err(format!("unknown event kind `{other}`")),
        })
    }
}

struct Fields(BTreeMap<String, String>);

impl Fields {
    fn text(&self, key: &str) -> Result<String, String> {
        self.0.get(key).cloned().ok_or_else(|| format!("missing field `{key}`"))
    }

    fn num<T: FromStr>(&self, key: &str) -> Result<T, String> {
        self.text(key)?.parse().map_err(|_| format!("field `{key}` is not an integer"))
    }

    fn fe(&self, key: &str) -> Result<FieldElement, String> {
        FieldElement::from_hex(&self.text(key)?).map_err(|e| format!("field `{key}`: {e}"))
    }

    fn account(&self, key: &str) -> Result<AccountId, String> {
        AccountId::new(self.text(key)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub tick: Tick,
    pub chain: ChainId,
    pub event: Event,
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.tick, self.chain, self.event.kind())?;
        for (k, v) in self.event.fields() {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

impl FromStr for Record {
    type Err = String;
    fn from_str(line: &str) -> Result<Self, String> {
        let mut parts = line.split_whitespace();
        let tick = parts.next().ok_or("empty line")?.parse().map_err(|_| "bad tick".to_string())?;
        let chain = parts.next().ok_or("missing chain")?.parse()?;
        let kind = parts.next().ok_or("missing event kind")?;
        let mut map = BTreeMap::new();
        for kv in parts {
            let (k, v) = kv.split_once('=').ok_or_else(|| format!("malformed field `{kv}`"))?;
            map.insert(k.to_string(), v.to_string());
        }
        Ok(Self { tick, chain, event: Event::parse(kind, &Fields(map))? })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    pub records: Vec<Record>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, tick: Tick, chain: ChainId, event: Event) {
        self.records.push(Record { tick, chain, event });
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Record> {
        self.records.iter()
    }

    pub fn on(&self, chain: ChainId) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(move |r| r.chain == chain)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, TranscriptError> {
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec = line.parse().map_err(|reason| TranscriptError { line: i + 1, reason })?;
            records.push(rec);
        }
        Ok(Self { records })
    }

    pub fn violations(&self) -> Vec<&str> {
        self.records
            .iter()
            .filter_map(|r| match &r.event {
                Event::InvariantViolation { detail } => Some(detail.as_str()),
                _ => None,
            })
            .collect()
    }
}
