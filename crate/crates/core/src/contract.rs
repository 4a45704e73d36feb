//! The bridge contract deployed on each chain: fixed-denomination deposits
//! into the local accumulator, withdrawals against (chain A root, chain B root)
//! pairs with a `D + epsilon` processing delay, and cancellation of every
//! pending withdrawal whose nullifier turns up on the other chain.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::field::FieldElement;
use crate::lightclient::{
    commit_state, AttestationRejection, BlockHeader, HeaderAdmission, HeaderRejection, LightClient,
    StateAttestation,
};
use crate::merkle::{MerkleError, MerkleTree};
use crate::zkrel::{circuit_id_for_height, Proof, ProofParams, ProofSystem, Statement, TransparentBackend, ZkError};

pub type Tick = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChainId {
    A,
    B,
}

impl ChainId {
    pub const BOTH: [ChainId; 2] = [ChainId::A, ChainId::B];

    pub fn other(self) -> Self {
        match self {
            Self::A => Self::B,
            Self::B => Self::A,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ChainId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::A => "A",
            Self::B => "B",
        })
    }
}

impl FromStr for ChainId {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "A" | "a" => Ok(Self::A),
            "B" | "b" => Ok(Self::B),
            other => Err(format!("unknown chain `{other}`")),
        }
    }
}

/// Account identifier: non-empty `[A-Za-z0-9_.-]+`, so it stays one token in
/// line-oriented logs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct AccountId(String);

impl AccountId {
    pub fn new(id: impl Into<String>) -> std::result::Result<Self, String> {
        let id = id.into();
        if !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || "_.-".contains(c)) {
            Ok(Self(id))
        } else {
            Err(format!("invalid account id `{id}`"))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for AccountId {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<Self, String> {
        Self::new(s)
    }
}

impl From<AccountId> for String {
    fn from(a: AccountId) -> String {
        a.0
    }
}

impl fmt::Display for AccountId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ContractError {
    #[error("contract already initialised")]
    AlreadyInitialised,
    #[error("contract not initialised")]
    NotInitialised,
    #[error("denomination must be positive")]
    ZeroDenomination,
    #[error(transparent)]
    Tree(#[from] MerkleError),
    #[error(transparent)]
    Zk(#[from] ZkError),
    #[error("deposit of {got} does not equal the denomination {expected}")]
    WrongAmount { got: u64, expected: u64 },
    #[error("commitment already deposited")]
    DuplicateCommitment,
    #[error("merkle tree is full")]
    TreeFull,
    #[error("root for chain {0} is not in the known collection")]
    UnknownRoot(ChainId),
    #[error("nullifier already recorded")]
    NullifierSpent,
    #[error("proof does not verify")]
    InvalidProof,
    #[error("header rejected: {0}")]
    Header(#[from] HeaderRejection),
    #[error("attestation rejected: {0}")]
    Attestation(#[from] AttestationRejection),
}

impl ContractError {
    /// Short machine-readable reason, used in transcripts.
    pub fn code(&self) -> &'static str {
        match self {
            Self::AlreadyInitialised => "already_initialised",
            Self::NotInitialised => "not_initialised",
            Self::ZeroDenomination => "zero_denomination",
            Self::Tree(_) => "tree",
            Self::Zk(_) => "zk",
            Self::WrongAmount { .. } => "wrong_amount",
            Self::DuplicateCommitment => "duplicate_commitment",
            Self::TreeFull => "tree_full",
            Self::UnknownRoot(ChainId::A) => "unknown_root_a",
            Self::UnknownRoot(ChainId::B) => "unknown_root_b",
            Self::NullifierSpent => "nullifier_spent",
            Self::InvalidProof => "invalid_proof",
            Self::Header(h) => h.code(),
            Self::Attestation(a) => a.code(),
        }
    }
}

pub type Result<T> = std::result::Result<T, ContractError>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractConfig {
    pub chain: ChainId,
    pub tree_height: usize,
    pub security: u32,
    pub denomination: u64,
    /// Relay delay bound `D`.
    pub relay_delay: Tick,
    /// Extra processing ticks. Negative values exist only for negative controls.
    pub epsilon: i64,
}

impl ContractConfig {
    pub fn new(chain: ChainId, tree_height: usize, denomination: u64, relay_delay: Tick) -> Self {
        Self { chain, tree_height, security: 128, denomination, relay_delay, epsilon: 1 }
    }

    /// `D + epsilon`, clamped at zero.
    pub fn processing_delay(&self) -> Tick {
        (self.relay_delay as i64 + self.epsilon).max(0) as Tick
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NullifierOrigin {
    Local,
    Remote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NullifierRecord {
    pub inserted_at: Tick,
    pub origin: NullifierOrigin,
    pub burned: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WithdrawalStatus {
    Pending,
    Finalized,
    Cancelled,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PendingWithdrawal {
    pub id: u64,
    pub statement: Statement,
    pub proof: Proof,
    pub recipient: AccountId,
    pub submitted_at: Tick,
    pub finalize_at: Tick,
    pub status: WithdrawalStatus,
}

/// How a finalized withdrawal was paid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Payout {
    /// From the contract's locked balance.
    Native,
    /// Newly minted wrapped units.
    Wrapped,
}

impl fmt::Display for Payout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Native => "native",
            Self::Wrapped => "wrapped",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finalization {
    pub id: u64,
    pub nullifier: FieldElement,
    pub recipient: AccountId,
    pub amount: u64,
    pub payout: Payout,
}

/// Result of a nullifier arriving from the other chain when it already exists here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cancellation {
    pub nullifier: FieldElement,
    pub cancelled: Vec<u64>,
    pub at: Tick,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BridgeStateOutcome {
    pub installed_roots: Vec<FieldElement>,
    pub installed_nullifiers: Vec<FieldElement>,
    pub duplicates: Vec<Cancellation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimedRoot {
    pub root: FieldElement,
    pub at: Tick,
}

/// Stored entry counts and byte sizes per category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StorageCounts {
    pub local_roots: usize,
    pub remote_roots: usize,
    pub nullifiers: usize,
    pub headers: usize,
}

impl StorageCounts {
    pub const ROOT_BYTES: usize = 8;
    /// Value plus insertion tick.
    pub const NULLIFIER_BYTES: usize = 16;
    pub const HEADER_BYTES: usize = BlockHeader::ENCODED_LEN;

    pub fn roots(&self) -> usize {
        self.local_roots + self.remote_roots
    }

    pub fn root_bytes(&self) -> usize {
        self.roots() * Self::ROOT_BYTES
    }

    pub fn nullifier_bytes(&self) -> usize {
        self.nullifiers * Self::NULLIFIER_BYTES
    }

    pub fn header_bytes(&self) -> usize {
        self.headers * Self::HEADER_BYTES
    }

    /// Category with the most bytes.
    pub fn dominant(&self) -> &'static str {
        let cats = [("roots", self.root_bytes()), ("nullifiers", self.nullifier_bytes()), ("headers", self.header_bytes())];
        cats.iter().max_by_key(|c| c.1).map(|c| c.0).unwrap_or("headers")
    }

    /// Entry growth since `baseline`.
    pub fn since(&self, baseline: &StorageCounts) -> StorageCounts {
        StorageCounts {
            local_roots: self.local_roots - baseline.local_roots,
            remote_roots: self.remote_roots - baseline.remote_roots,
            nullifiers: self.nullifiers - baseline.nullifiers,
            headers: self.headers - baseline.headers,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ContractState {
    config: ContractConfig,
    backend: Arc<dyn ProofSystem>,
    initialised: bool,
    params: Option<ProofParams>,
    tree: Option<MerkleTree>,
    local_roots: Vec<TimedRoot>,
    remote_roots: Vec<TimedRoot>,
    root_times: HashMap<FieldElement, Tick>,
    local_root_set: HashSet<FieldElement>,
    remote_root_set: HashSet<FieldElement>,
    commitments: HashSet<FieldElement>,
    nullifiers: HashMap<FieldElement, NullifierRecord>,
    /// Nullifiers accepted by this contract's own withdrawals, in order.
    exposed: Vec<FieldElement>,
    /// Nullifiers already consumed from the other chain's attestations.
    relayed_in: HashSet<FieldElement>,
    light_client: Option<LightClient>,
    withdrawals: Vec<PendingWithdrawal>,
    balance: u64,
    wrapped_minted: u64,
    deposits: u64,
    native_paid: u64,
}

impl ContractState {
    /// An uninitialised deployment using the transparent proof backend.
    pub fn deploy(config: ContractConfig) -> Self {
        Self::deploy_with_backend(config, Arc::new(TransparentBackend))
    }

    pub fn deploy_with_backend(config: ContractConfig, backend: Arc<dyn ProofSystem>) -> Self {
        Self {
            config,
            backend,
            initialised: false,
            params: None,
            tree: None,
            local_roots: Vec::new(),
            remote_roots: Vec::new(),
            root_times: HashMap::new(),
            local_root_set: HashSet::new(),
            remote_root_set: HashSet::new(),
            commitments: HashSet::new(),
            nullifiers: HashMap::new(),
            exposed: Vec::new(),
            relayed_in: HashSet::new(),
            light_client: None,
            withdrawals: Vec::new(),
            balance: 0,
            wrapped_minted: 0,
            deposits: 0,
            native_paid: 0,
        }
    }

    /// Creates the tree and proof parameters and trusts `genesis` as the first
    /// remote header. The remote chain's empty root is installed as its first
    /// known root.
    pub fn setup(&mut self, genesis: BlockHeader) -> Result<()> {
        if self.initialised {
            return Err(ContractError::AlreadyInitialised);
        }
        if self.config.denomination == 0 {
            return Err(ContractError::ZeroDenomination);
        }
        let tree = MerkleTree::new(self.config.tree_height)?;
        let params = self.backend.setup(self.config.security, &circuit_id_for_height(self.config.tree_height))?;
        let empty = tree.empty_root();
        self.local_roots.push(TimedRoot { root: empty, at: 0 });
        self.local_root_set.insert(empty);
        self.remote_roots.push(TimedRoot { root: empty, at: 0 });
        self.remote_root_set.insert(empty);
        self.root_times.insert(empty, 0);
        self.tree = Some(tree);
        self.params = Some(params);
        self.light_client = Some(LightClient::new(genesis));
        self.initialised = true;
        Ok(())
    }

    fn ensure_init(&self) -> Result<()> {
        if self.initialised {
            Ok(())
        } else {
            Err(ContractError::NotInitialised)
        }
    }

    pub fn config(&self) -> &ContractConfig {
        &self.config
    }

    pub fn chain(&self) -> ChainId {
        self.config.chain
    }

    pub fn is_initialised(&self) -> bool {
        self.initialised
    }

    pub fn params(&self) -> Option<&ProofParams> {
        self.params.as_ref()
    }

    pub fn backend(&self) -> &Arc<dyn ProofSystem> {
        &self.backend
    }

    pub fn tree(&self) -> Option<&MerkleTree> {
        self.tree.as_ref()
    }

    pub fn local_roots(&self) -> &[TimedRoot] {
        &self.local_roots
    }

    pub fn remote_roots(&self) -> &[TimedRoot] {
        &self.remote_roots
    }

    pub fn latest_local_root(&self) -> Option<FieldElement> {
        self.local_roots.last().map(|r| r.root)
    }

    pub fn latest_remote_root(&self) -> Option<FieldElement> {
        self.remote_roots.last().map(|r| r.root)
    }

    pub fn knows_local_root(&self, root: FieldElement) -> bool {
        self.local_root_set.contains(&root)
    }

    pub fn knows_remote_root(&self, root: FieldElement) -> bool {
        self.remote_root_set.contains(&root)
    }

    /// Tick at which this contract first learned `root`.
    pub fn root_timestamp(&self, root: FieldElement) -> Option<Tick> {
        self.root_times.get(&root).copied()
    }

    pub fn nullifier(&self, sn: &FieldElement) -> Option<&NullifierRecord> {
        self.nullifiers.get(sn)
    }

    pub fn nullifier_count(&self) -> usize {
        self.nullifiers.len()
    }

    pub fn exposed_nullifiers(&self) -> &[FieldElement] {
        &self.exposed
    }

    pub fn light_client(&self) -> Option<&LightClient> {
        self.light_client.as_ref()
    }

    pub fn remote_headers(&self) -> &[BlockHeader] {
        self.light_client.as_ref().map(|lc| lc.headers()).unwrap_or(&[])
    }

    pub fn withdrawals(&self) -> &[PendingWithdrawal] {
        &self.withdrawals
    }

    pub fn balance(&self) -> u64 {
        self.balance
    }

    pub fn wrapped_minted(&self) -> u64 {
        self.wrapped_minted
    }

    pub fn deposit_count(&self) -> u64 {
        self.deposits
    }

    pub fn native_paid(&self) -> u64 {
        self.native_paid
    }

    /// Whether `root` is acceptable as the statement's root for `side`.
    fn knows_root_for(&self, side: ChainId, root: FieldElement) -> bool {
        if side == self.config.chain {
            self.knows_local_root(root)
        } else {
            self.knows_remote_root(root)
        }
    }

    /// The commitment a header of this chain would carry right now.
    pub fn state_commitment(&self) -> FieldElement {
        let roots: Vec<_> = self.local_roots.iter().map(|r| r.root).collect();
        commit_state(&roots, &self.exposed)
    }

    pub fn deposit(&mut self, amount: u64, commitment: FieldElement, now: Tick) -> Result<usize> {
        self.ensure_init()?;
        let d = self.config.denomination;
        if amount != d {
            return Err(ContractError::WrongAmount { got: amount, expected: d });
        }
        if self.commitments.contains(&commitment) {
            return Err(ContractError::DuplicateCommitment);
        }
        let tree = self.tree.as_mut().expect("initialised");
        let index = tree.len();
        if !tree.add(commitment) {
            return Err(ContractError::TreeFull);
        }
        let root = tree.root();
        self.commitments.insert(commitment);
        self.local_roots.push(TimedRoot { root, at: now });
        self.local_root_set.insert(root);
        self.root_times.entry(root).or_insert(now);
        self.balance += d;
        self.deposits += 1;
        Ok(index)
    }

    /// Validates and queues a withdrawal. The nullifier is recorded at once so
    /// relayers expose it to the other chain.
    pub fn submit_withdrawal(
        &mut self,
        stmt: Statement,
        proof: Proof,
        recipient: AccountId,
        now: Tick,
    ) -> Result<u64> {
        self.ensure_init()?;
        for side in ChainId::BOTH {
            let root = match side {
                ChainId::A => stmt.root_a,
                ChainId::B => stmt.root_b,
            };
            if !self.knows_root_for(side, root) {
                return Err(ContractError::UnknownRoot(side));
            }
        }
        if self.nullifiers.contains_key(&stmt.nullifier) {
            return Err(ContractError::NullifierSpent);
        }
        let params = self.params.as_ref().expect("initialised");
        if !self.backend.verify(params, &stmt, &proof) {
            return Err(ContractError::InvalidProof);
        }
        self.nullifiers.insert(
            stmt.nullifier,
            NullifierRecord { inserted_at: now, origin: NullifierOrigin::Local, burned: false },
        );
        self.exposed.push(stmt.nullifier);
        let id = self.withdrawals.len() as u64;
        self.withdrawals.push(PendingWithdrawal {
            id,
            statement: stmt,
            proof,
            recipient,
            submitted_at: now,
            finalize_at: now + self.config.processing_delay(),
            status: WithdrawalStatus::Pending,
        });
        Ok(id)
    }

    /// Finalizes every pending withdrawal whose delay has elapsed. Pays from
    /// the locked balance while it covers the denomination, else mints wrapped
    /// units.
    pub fn process_tick(&mut self, now: Tick) -> Vec<Finalization> {
        let d = self.config.denomination;
        let mut out = Vec::new();
        for w in self.withdrawals.iter_mut() {
            if w.status != WithdrawalStatus::Pending || w.finalize_at > now {
                continue;
            }
            let payout = if self.balance >= d {
                self.balance -= d;
                self.native_paid += d;
                Payout::Native
            } else {
                self.wrapped_minted += d;
                Payout::Wrapped
            };
            w.status = WithdrawalStatus::Finalized;
            out.push(Finalization {
                id: w.id,
                nullifier: w.statement.nullifier,
                recipient: w.recipient.clone(),
                amount: d,
                payout,
            });
        }
        out
    }

    pub fn add_header(&mut self, header: BlockHeader) -> Result<HeaderAdmission> {
        self.ensure_init()?;
        Ok(self.light_client.as_mut().expect("initialised").add_header(header)?)
    }

    /// Verifies `att` against its header, installs unseen remote roots and
    /// merges relayed nullifiers, cancelling on duplicates.
    pub fn add_bridge_state(&mut self, att: &StateAttestation, now: Tick) -> Result<BridgeStateOutcome> {
        self.ensure_init()?;
        self.light_client.as_ref().expect("initialised").verify_attestation(att)?;
        let mut outcome = BridgeStateOutcome::default();
        for &root in &att.new_roots {
            if self.remote_root_set.insert(root) {
                self.remote_roots.push(TimedRoot { root, at: now });
                self.root_times.entry(root).or_insert(now);
                outcome.installed_roots.push(root);
            }
        }
        for &sn in &att.new_nullifiers {
            if !self.relayed_in.insert(sn) {
                continue;
            }
            if self.nullifiers.contains_key(&sn) {
                outcome.duplicates.push(self.on_duplicate_nullifier(sn, now));
            } else {
                self.nullifiers.insert(
                    sn,
                    NullifierRecord { inserted_at: now, origin: NullifierOrigin::Remote, burned: false },
                );
                outcome.installed_nullifiers.push(sn);
            }
        }
        Ok(outcome)
    }

    /// Burns `sn` and cancels every pending withdrawal carrying it.
    pub fn on_duplicate_nullifier(&mut self, sn: FieldElement, now: Tick) -> Cancellation {
        if let Some(rec) = self.nullifiers.get_mut(&sn) {
            rec.burned = true;
        }
        let cancelled = self
            .withdrawals
            .iter_mut()
            .filter(|w| w.status == WithdrawalStatus::Pending && w.statement.nullifier == sn)
            .map(|w| {
                w.status = WithdrawalStatus::Cancelled;
                w.id
            })
            .collect();
        Cancellation { nullifier: sn, cancelled, at: now }
    }

    pub fn storage(&self) -> StorageCounts {
        StorageCounts {
            local_roots: self.local_roots.len(),
            remote_roots: self.remote_roots.len(),
            nullifiers: self.nullifiers.len(),
            headers: self.remote_headers().len(),
        }
    }

    /// Internal consistency; returns a description of the first violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let d = self.config.denomination;
        if self.balance != d * self.deposits - self.native_paid {
            return Err(format!("chain {}: balance {} != d*deposits - native_paid", self.chain(), self.balance));
        }
        if let Some(tree) = &self.tree {
            let history = tree.root_history();
            if history.len() != self.local_roots.len()
                || history.iter().zip(&self.local_roots).any(|(h, l)| h.root != l.root)
            {
                return Err(format!("chain {}: local roots diverge from tree history", self.chain()));
            }
        }
        for w in &self.withdrawals {
            if w.finalize_at - w.submitted_at != self.config.processing_delay() {
                return Err(format!("chain {}: withdrawal {} has wrong delay", self.chain(), w.id));
            }
            if w.status == WithdrawalStatus::Finalized && !self.nullifiers.contains_key(&w.statement.nullifier) {
                return Err(format!("chain {}: finalized withdrawal {} lacks its nullifier", self.chain(), w.id));
            }
        }
        Ok(())
    }
}

/// Deploys and initialises in one step.
pub fn contract_setup(config: ContractConfig, genesis: BlockHeader) -> Result<ContractState> {
    let mut state = ContractState::deploy(config);
    state.setup(genesis)?;
    Ok(state)
}
