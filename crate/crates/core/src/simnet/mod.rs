//! Deterministic discrete-event simulation of two chains, their relayers,
//! honest users and adversaries.

pub mod checks;
pub mod engine;
pub mod races;
pub mod scenario;
pub mod transcript;

pub use engine::{relay_step, run, ChainView, Credit, Delivery, NoteSummary, RelayCursor, SimOutcome};
pub use races::{explore_races, RaceError, RaceReport, RaceRow};
pub use scenario::{AdversarySpec, IncentiveSpec, RelayerSpec, Scenario, ScenarioError, ScriptEvent};
pub use transcript::{Event, Record, Transcript, TranscriptError};
