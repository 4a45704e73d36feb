//! Simulator for a private two-chain bridge: Merkle accumulators of note
//! commitments, an OR-membership relation over the two chains' roots,
//! proof-of-work light clients relaying state between chains, and the
//! delayed-withdrawal contract that cancels double spends.

pub mod contract;
pub mod field;
pub mod incentives;
pub mod lightclient;
pub mod merkle;
pub mod metrics;
pub mod simnet;
pub mod zkrel;

pub use contract::{AccountId, ChainId, ContractConfig, ContractError, ContractState, Payout, StorageCounts, Tick};
pub use field::{FieldElement, HashParams};
pub use incentives::{LiquiditySeries, RewardBook, RewardConfig, VampireConfig};
pub use lightclient::{BlockHeader, LightClient, StateAttestation};
pub use merkle::{MerklePath, MerkleTree};
pub use metrics::{AnonymityReport, AuditResult};
pub use simnet::{explore_races, run, RaceReport, Scenario, SimOutcome, Transcript};
pub use zkrel::{DepositNote, Proof, ProofParams, ProofSystem, Statement, TransparentBackend, Witness};
