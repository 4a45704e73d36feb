//! Tick-driven two-chain simulation.
//!
//! Within a tick the phases run in a fixed order: relayed deliveries, user and
//! adversary actions, withdrawal processing, header mining, then relaying.
//! Inside a phase, actions run in insertion order.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::contract::{
    AccountId, ChainId, ContractConfig, ContractState, Payout, StorageCounts, Tick,
};
use crate::field::{hash_bytes, FieldElement, HashParams};
use crate::incentives::{claim_reward, provable_age, RewardBook, RewardClaim, RewardConfig};
use crate::lightclient::{commit_state, easy_target, mine_header, BlockHeader, HeaderAdmission, StateAttestation, StateOpening};
use crate::merkle::{zero_subtree_roots, MerklePath};
use crate::zkrel::{DepositNote, Proof, RootSelector, Statement, Witness};

use super::scenario::{AdversarySpec, RelayerSpec, Scenario, ScenarioError, ScriptEvent};
use super::transcript::{token, Event, Transcript};

const PHASE_DELIVER: u8 = 0;
const PHASE_USER: u8 = 1;

pub const FIRST_ADVERSARY: &str = "adv-first";
pub const SECOND_ADVERSARY: &str = "adv-second";
pub const REPLAYER: &str = "mallory";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Credit {
    pub native: u64,
    pub wrapped: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoteSummary {
    pub commitment: FieldElement,
    pub nullifier: FieldElement,
    pub origin: Option<(ChainId, usize)>,
    pub submissions: u32,
    pub rejections: u32,
    pub payouts: u32,
    pub cancellations: u32,
    pub burned: bool,
}

#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub transcript: Transcript,
    pub contracts: [ContractState; 2],
    pub rewards: [RewardBook; 2],
    pub credits: BTreeMap<(ChainId, AccountId), Credit>,
    pub notes: BTreeMap<String, NoteSummary>,
    pub violations: Vec<String>,
    /// Storage right after setup, before any scripted activity.
    pub baseline: [StorageCounts; 2],
    pub delay_bound: Tick,
    pub processing_delay: Tick,
}

impl SimOutcome {
    pub fn contract(&self, chain: ChainId) -> &ContractState {
        &self.contracts[chain.index()]
    }

    pub fn note(&self, label: &str) -> Option<&NoteSummary> {
        self.notes.get(label)
    }

    pub fn double_payouts(&self) -> Vec<&str> {
        self.notes.iter().filter(|(_, n)| n.payouts > 1).map(|(l, _)| l.as_str()).collect()
    }

    pub fn total_payouts(&self) -> u32 {
        self.notes.values().map(|n| n.payouts).sum()
    }

    pub fn credit(&self, chain: ChainId, who: &str) -> Credit {
        AccountId::new(who).ok().and_then(|a| self.credits.get(&(chain, a)).copied()).unwrap_or_default()
    }

    pub fn storage_growth(&self, chain: ChainId) -> StorageCounts {
        self.contract(chain).storage().since(&self.baseline[chain.index()])
    }

    /// Per-chain entry growth since setup, byte sizes, and the dominant category.
    pub fn storage_table(&self) -> String {
        let mut out = String::from(
            "chain local_roots remote_roots nullifiers headers root_bytes nullifier_bytes header_bytes dominant\n",
        );
        let mut summary = serde_json::Map::new();
        for chain in ChainId::BOTH {
            let g = self.storage_growth(chain);
            out.push_str(&format!(
                "{chain} {} {} {} {} {} {} {} {}\n",
                g.local_roots,
                g.remote_roots,
                g.nullifiers,
                g.headers,
                g.root_bytes(),
                g.nullifier_bytes(),
                g.header_bytes(),
                g.dominant()
            ));
            summary.insert(
                chain.to_string(),
                serde_json::json!({ "roots": g.roots(), "nullifiers": g.nullifiers, "headers": g.headers, "dominant": g.dominant() }),
            );
        }
        out.push_str(&format!("#summary {}\n", serde_json::Value::Object(summary)));
        out
    }
}

/// Per-direction relayer progress.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelayCursor {
    pub spec: RelayerSpec,
    pub from: ChainId,
    pub headers_sent: usize,
    pub roots_sent: usize,
    pub nullifiers_sent: usize,
}

impl RelayCursor {
    pub fn new(spec: RelayerSpec, from: ChainId) -> Self {
        // The genesis header and the setup root are known on both sides already.
        Self { spec, from, headers_sent: 1, roots_sent: 1, nullifiers_sent: 0 }
    }
}

/// Headers and an attestation for delivery at `at`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Delivery {
    pub at: Tick,
    pub headers: Vec<BlockHeader>,
    pub attestation: Option<StateAttestation>,
}

/// One chain as the simulator sees it: the contract plus its own header chain.
/// `snapshots[i]` holds the local root and exposed nullifier counts committed
/// by `mined[i]`.
#[derive(Debug, Clone)]
pub struct ChainView {
    pub contract: ContractState,
    pub mined: Vec<BlockHeader>,
    pub snapshots: Vec<(usize, usize)>,
}

impl ChainView {
    fn attestation(&self, index: usize, roots_from: usize, nulls_from: usize) -> StateAttestation {
        let (rl, nl) = self.snapshots[index];
        let roots: Vec<_> = self.contract.local_roots()[..rl].iter().map(|r| r.root).collect();
        let nulls = self.contract.exposed_nullifiers()[..nl].to_vec();
        StateAttestation {
            header_index: index,
            new_roots: roots[roots_from.min(rl)..].to_vec(),
            new_nullifiers: nulls[nulls_from.min(nl)..].to_vec(),
            opening: StateOpening::new(roots, nulls),
        }
    }
}

/// Everything `from` has mined and committed since the cursor, scheduled at
/// `now + delay`. Censored relayers emit nothing; dishonest ones emit a
/// forged attestation that claims an extra root.
pub fn relay_step(from: &ChainView, cursor: &mut RelayCursor, now: Tick) -> Option<Delivery> {
    if cursor.spec.censored || from.mined.len() <= cursor.headers_sent {
        return None;
    }
    let latest = from.mined.len() - 1;
    let at = now + cursor.spec.delay;
    if !cursor.spec.honest {
        cursor.headers_sent = from.mined.len();
        let mut att = from.attestation(latest, from.snapshots[latest].0, from.snapshots[latest].1);
        let mut seed = b"forged".to_vec();
        seed.extend_from_slice(&from.mined[latest].digest().to_bytes());
        let fake = hash_bytes(&seed);
        att.new_roots = vec![fake];
        let mut roots = att.opening.roots.clone();
        roots.push(fake);
        att.opening = StateOpening::new(roots, att.opening.nullifiers.clone());
        return Some(Delivery { at, headers: Vec::new(), attestation: Some(att) });
    }
    let headers = from.mined[cursor.headers_sent..].to_vec();
    let (rl, nl) = from.snapshots[latest];
    let attestation = if rl > cursor.roots_sent || nl > cursor.nullifiers_sent {
        Some(from.attestation(latest, cursor.roots_sent, cursor.nullifiers_sent))
    } else {
        None
    };
    cursor.headers_sent = from.mined.len();
    cursor.roots_sent = rl;
    cursor.nullifiers_sent = nl;
    Some(Delivery { at, headers, attestation })
}

#[derive(Debug, Clone)]
enum Action {
    Script(ScriptEvent),
    Withdraw { chain: ChainId, note: String, recipient: AccountId },
    Submit { chain: ChainId, note: String, stmt: Statement, proof: Proof, recipient: AccountId },
    Deliver { relayer: String, to: ChainId, headers: Vec<BlockHeader>, attestation: Option<StateAttestation> },
}

#[derive(Debug)]
struct Queued {
    at: Tick,
    phase: u8,
    seq: u64,
    action: Action,
}

impl Queued {
    fn key(&self) -> (Tick, u8, u64) {
        (self.at, self.phase, self.seq)
    }
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

struct Note {
    secret: DepositNote,
    summary: NoteSummary,
}

struct Sim<'a> {
    scenario: &'a Scenario,
    chains: [ChainView; 2],
    rewards: [RewardBook; 2],
    queue: BinaryHeap<Reverse<Queued>>,
    seq: u64,
    transcript: Transcript,
    notes: BTreeMap<String, Note>,
    by_nullifier: HashMap<FieldElement, String>,
    relays: Vec<RelayCursor>,
    credits: BTreeMap<(ChainId, AccountId), Credit>,
    violations: Vec<String>,
    seen_violations: HashSet<String>,
    replay_armed: bool,
    deposits: u64,
    baseline: [StorageCounts; 2],
}

/// Runs `scenario` to its horizon.
pub fn run(scenario: &Scenario) -> Result<SimOutcome, ScenarioError> {
    scenario.validate()?;
    let mut sim = Sim::new(scenario);
    sim.execute();
    Ok(sim.finish())
}

fn chain_tag(chain: ChainId) -> FieldElement {
    hash_bytes(format!("genesis-{chain}").as_bytes())
}

impl<'a> Sim<'a> {
    fn new(scenario: &'a Scenario) -> Self {
        let d = scenario.delay_bound().expect("validated");
        let target = easy_target(scenario.difficulty);
        let empty = zero_subtree_roots(scenario.tree_height, &HashParams::standard())[scenario.tree_height];
        let genesis = |c: ChainId| mine_header(0, chain_tag(c), commit_state(&[empty], &[]), target);
        let view = |c: ChainId| {
            let config = ContractConfig {
                chain: c,
                tree_height: scenario.tree_height,
                security: 128,
                denomination: scenario.denomination,
                relay_delay: d,
                epsilon: scenario.epsilon,
            };
            let mut contract = ContractState::deploy(config);
            contract.setup(genesis(c.other())).expect("validated scenario sets up");
            ChainView { contract, mined: vec![genesis(c)], snapshots: vec![(1, 0)] }
        };

        let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
        let mut notes = BTreeMap::new();
        let mut by_nullifier = HashMap::new();
        for label in scenario.notes() {
            let secret = DepositNote::random(&mut rng);
            by_nullifier.insert(secret.nullifier(), label.to_string());
            let summary = NoteSummary {
                commitment: secret.commitment(),
                nullifier: secret.nullifier(),
                origin: None,
                submissions: 0,
                rejections: 0,
                payouts: 0,
                cancellations: 0,
                burned: false,
            };
            notes.insert(label.to_string(), Note { secret, summary });
        }

        let mut relays = Vec::new();
        for spec in &scenario.relayers {
            for from in ChainId::BOTH {
                if spec.serves(from) {
                    relays.push(RelayCursor::new(spec.clone(), from));
                }
            }
        }

        let chains = [view(ChainId::A), view(ChainId::B)];
        let baseline = [chains[0].contract.storage(), chains[1].contract.storage()];
        let mut sim = Self {
            scenario,
            chains,
            baseline,
            rewards: [RewardBook::new(), RewardBook::new()],
            queue: BinaryHeap::new(),
            seq: 0,
            transcript: Transcript::new(),
            notes,
            by_nullifier,
            relays,
            credits: BTreeMap::new(),
            violations: Vec::new(),
            seen_violations: HashSet::new(),
            replay_armed: matches!(scenario.adversary, Some(AdversarySpec::Replay { .. })),
            deposits: 0,
        };
        for ev in &scenario.events {
            sim.schedule(ev.at(), PHASE_USER, Action::Script(ev.clone()));
        }
        if let Some(AdversarySpec::DoubleWithdraw { note, first_chain, at, t_prime, .. }) = &scenario.adversary {
            let first = Action::Withdraw {
                chain: *first_chain,
                note: note.clone(),
                recipient: AccountId::new(FIRST_ADVERSARY).expect("valid"),
            };
            let second = Action::Withdraw {
                chain: first_chain.other(),
                note: note.clone(),
                recipient: AccountId::new(SECOND_ADVERSARY).expect("valid"),
            };
            sim.schedule(*at, PHASE_USER, first);
            sim.schedule(at + t_prime, PHASE_USER, second);
        }
        sim
    }

    fn schedule(&mut self, at: Tick, phase: u8, action: Action) {
        self.queue.push(Reverse(Queued { at, phase, seq: self.seq, action }));
        self.seq += 1;
    }

    fn log(&mut self, tick: Tick, chain: ChainId, event: Event) {
        self.transcript.push(tick, chain, event);
    }

    fn violation(&mut self, tick: Tick, chain: ChainId, detail: String) {
        if self.seen_violations.insert(detail.clone()) {
            self.log(tick, chain, Event::InvariantViolation { detail: detail.clone() });
            self.violations.push(detail);
        }
    }

    fn execute(&mut self) {
        for c in ChainId::BOTH {
            let contract = &self.chains[c.index()].contract;
            let ev = Event::Setup {
                empty_root: contract.latest_local_root().expect("set up"),
                denomination: contract.config().denomination,
                processing_delay: contract.config().processing_delay(),
            };
            self.log(0, c, ev);
        }
        for now in 0..=self.scenario.horizon {
            while self.queue.peek().is_some_and(|q| q.0.at == now) {
                let q = self.queue.pop().expect("peeked").0;
                self.dispatch(q.action, now);
            }
            for c in ChainId::BOTH {
                self.process(c, now);
            }
            if now > 0 {
                for c in ChainId::BOTH {
                    self.mine(c, now);
                }
            }
            for i in 0..self.relays.len() {
                let from = self.relays[i].from;
                if let Some(d) = relay_step(&self.chains[from.index()], &mut self.relays[i], now) {
                    let relayer = self.relays[i].spec.id.clone();
                    let action =
                        Action::Deliver { relayer, to: from.other(), headers: d.headers, attestation: d.attestation };
                    self.schedule(d.at, PHASE_DELIVER, action);
                }
            }
            self.check(now);
        }
    }

    fn dispatch(&mut self, action: Action, now: Tick) {
        match action {
            Action::Script(ScriptEvent::Deposit { chain, note, amount, .. }) => self.deposit(chain, &note, amount, now),
            Action::Script(ScriptEvent::Withdraw { chain, note, recipient, .. }) => {
                self.honest_withdraw(chain, &note, recipient, now)
            }
            Action::Script(ScriptEvent::ClaimReward { chain, note, claimant, .. }) => {
                self.claim(chain, &note, claimant, now)
            }
            Action::Withdraw { chain, note, recipient } => {
                if let Some((stmt, proof)) = self.build_withdrawal(chain, &note, &recipient, now) {
                    self.submit(chain, &note, stmt, proof, recipient, now);
                }
            }
            Action::Submit { chain, note, stmt, proof, recipient } => {
                self.submit(chain, &note, stmt, proof, recipient, now);
            }
            Action::Deliver { relayer, to, headers, attestation } => self.deliver(&relayer, to, headers, attestation, now),
        }
    }

    fn deposit(&mut self, chain: ChainId, label: &str, amount: Option<u64>, now: Tick) {
        let amount = amount.unwrap_or(self.scenario.denomination);
        let commitment = self.notes[label].summary.commitment;
        let contract = &mut self.chains[chain.index()].contract;
        match contract.deposit(amount, commitment, now) {
            Ok(leaf_index) => {
                let root = contract.latest_local_root().expect("set up");
                self.deposits += 1;
                let note = self.notes.get_mut(label).expect("known note");
                note.summary.origin.get_or_insert((chain, leaf_index));
                self.log(now, chain, Event::Deposit { leaf_index, commitment, root });
            }
            Err(e) => self.log(now, chain, Event::DepositRejected { commitment, reason: e.code().into() }),
        }
    }

    /// The note's membership path against the newest root of its origin tree
    /// that `target` knows and that contains it. Falls back to the origin's
    /// current root, which `target` will reject if it has not seen it.
    fn origin_path(&self, target: ChainId, label: &str, earliest: bool) -> Option<(ChainId, FieldElement, MerklePath)> {
        let (origin, index) = self.notes.get(label)?.summary.origin?;
        let tree = self.chains[origin.index()].contract.tree().expect("set up");
        let known = &self.chains[target.index()].contract;
        let candidates =
            if target == origin { known.local_roots() } else { known.remote_roots() };
        let contains = |root: &FieldElement| tree.leaf_count_for_root(*root).filter(|&lc| lc > index);
        let hit = if earliest {
            candidates.iter().find_map(|r| contains(&r.root).map(|lc| (r.root, lc)))
        } else {
            candidates.iter().rev().find_map(|r| contains(&r.root).map(|lc| (r.root, lc)))
        };
        let (root, leaf_count) = hit.unwrap_or((tree.root(), tree.len()));
        let path = tree.path_at(index, leaf_count).ok()?;
        Some((origin, root, path))
    }

    fn statement_for(&self, target: ChainId, label: &str, earliest: bool) -> Option<(Statement, Witness)> {
        let (origin, root, path) = self.origin_path(target, label, earliest)?;
        let known = &self.chains[target.index()].contract;
        let other = origin.other();
        let other_root = match (other == target, earliest) {
            (true, false) => known.latest_local_root(),
            (false, false) => known.latest_remote_root(),
            (true, true) => known.local_roots().first().map(|r| r.root),
            (false, true) => known.remote_roots().first().map(|r| r.root),
        }?;
        let (root_a, root_b, selector) = match origin {
            ChainId::A => (root, other_root, RootSelector::A),
            ChainId::B => (other_root, root, RootSelector::B),
        };
        let note = &self.notes[label].secret;
        let stmt = Statement { root_a, root_b, nullifier: note.nullifier() };
        Some((stmt, Witness::new(note, path, selector)))
    }

    fn build_withdrawal(
        &mut self,
        chain: ChainId,
        label: &str,
        recipient: &AccountId,
        now: Tick,
    ) -> Option<(Statement, Proof)> {
        let built = self.statement_for(chain, label, false).and_then(|(stmt, wit)| {
            let c = &self.chains[chain.index()].contract;
            c.backend().prove(c.params()?, &stmt, &wit).ok().map(|p| (stmt, p))
        });
        if built.is_none() {
            let nullifier = self.notes[label].summary.nullifier;
            let ev = Event::WithdrawalRejected {
                root_a: FieldElement::ZERO,
                root_b: FieldElement::ZERO,
                nullifier,
                recipient: recipient.clone(),
                reason: "note_not_deposited".into(),
            };
            self.notes.get_mut(label).expect("known").summary.rejections += 1;
            self.log(now, chain, ev);
        }
        built
    }

    fn honest_withdraw(&mut self, chain: ChainId, label: &str, recipient: AccountId, now: Tick) {
        let Some((stmt, proof)) = self.build_withdrawal(chain, label, &recipient, now) else { return };
        let replay = match &self.scenario.adversary {
            Some(AdversarySpec::Replay { note, lag, chain: target }) if self.replay_armed && note == label => {
                Some((*lag, target.unwrap_or(chain)))
            }
            _ => None,
        };
        let mallory = AccountId::new(REPLAYER).expect("valid");
        match replay {
            Some((0, target)) if target == chain => {
                self.replay_armed = false;
                self.submit(chain, label, stmt, proof.clone(), mallory, now);
                self.submit(chain, label, stmt, proof, recipient, now);
            }
            Some((lag, target)) => {
                self.replay_armed = false;
                let copy = Action::Submit { chain: target, note: label.into(), stmt, proof: proof.clone(), recipient: mallory };
                self.submit(chain, label, stmt, proof, recipient, now);
                self.schedule(now + lag, PHASE_USER, copy);
            }
            None => self.submit(chain, label, stmt, proof, recipient, now),
        }
    }

    fn submit(&mut self, chain: ChainId, label: &str, stmt: Statement, proof: Proof, recipient: AccountId, now: Tick) {
        let contract = &mut self.chains[chain.index()].contract;
        let result = contract.submit_withdrawal(stmt, proof, recipient.clone(), now);
        let summary = &mut self.notes.get_mut(label).expect("known").summary;
        let ev = match result {
            Ok(id) => {
                summary.submissions += 1;
                let finalize_at = contract.withdrawals()[id as usize].finalize_at;
                Event::WithdrawalSubmitted {
                    id,
                    root_a: stmt.root_a,
                    root_b: stmt.root_b,
                    nullifier: stmt.nullifier,
                    recipient,
                    finalize_at,
                }
            }
            Err(e) => {
                summary.rejections += 1;
                Event::WithdrawalRejected {
                    root_a: stmt.root_a,
                    root_b: stmt.root_b,
                    nullifier: stmt.nullifier,
                    recipient,
                    reason: e.code().into(),
                }
            }
        };
        self.log(now, chain, ev);
    }

    /// Claims the whole provable age against the earliest roots containing the note.
    fn claim(&mut self, chain: ChainId, label: &str, claimant: AccountId, now: Tick) {
        let nullifier = self.notes[label].summary.nullifier;
        let cfg = RewardConfig {
            rate: self.scenario.incentives.map_or(0, |i| i.rate(chain)),
            min_lock: self.scenario.incentives.map_or(0, |i| i.min_lock),
        };
        let contract = &self.chains[chain.index()].contract;
        let built = self.statement_for(chain, label, true).and_then(|(stmt, wit)| {
            let proof = contract.backend().prove(contract.params()?, &stmt, &wit).ok()?;
            let age = provable_age(contract, &stmt, now).unwrap_or(0);
            Some(RewardClaim { statement: stmt, proof, claimed_age: age, claimant: claimant.clone() })
        });
        let ev = match built {
            None => Event::RewardRejected { claimant, nullifier, reason: "note_not_deposited".into() },
            Some(claim) => match claim_reward(contract, &mut self.rewards[chain.index()], &cfg, &claim, now) {
                Ok(amount) => Event::RewardPaid { claimant, nullifier, age: claim.claimed_age, amount },
                Err(e) => Event::RewardRejected { claimant, nullifier, reason: e.code().into() },
            },
        };
        self.log(now, chain, ev);
    }

    fn deliver(
        &mut self,
        relayer: &str,
        to: ChainId,
        headers: Vec<BlockHeader>,
        attestation: Option<StateAttestation>,
        now: Tick,
    ) {
        for h in headers {
            let ev = match self.chains[to.index()].contract.add_header(h) {
                Ok(HeaderAdmission::Accepted) => Event::HeaderAccepted { relayer: relayer.into(), height: h.height },
                Ok(HeaderAdmission::AlreadyKnown) => Event::HeaderIgnored { relayer: relayer.into(), height: h.height },
                Err(e) => Event::HeaderRejected { relayer: relayer.into(), height: h.height, reason: e.code().into() },
            };
            self.log(now, to, ev);
        }
        let Some(att) = attestation else { return };
        let header = att.header_index as u64;
        match self.chains[to.index()].contract.add_bridge_state(&att, now) {
            Err(e) => {
                let ev = Event::BridgeStateRejected { relayer: relayer.into(), header, reason: e.code().into() };
                self.log(now, to, ev);
            }
            Ok(out) => {
                let ev = Event::BridgeStateAccepted {
                    relayer: relayer.into(),
                    header,
                    roots: out.installed_roots.len(),
                    nullifiers: out.installed_nullifiers.len(),
                };
                self.log(now, to, ev);
                for root in out.installed_roots {
                    self.log(now, to, Event::RemoteRootInstalled { root });
                }
                for nullifier in out.installed_nullifiers {
                    self.log(now, to, Event::RemoteNullifierInstalled { nullifier });
                }
                for dup in out.duplicates {
                    self.log(now, to, Event::DuplicateNullifier { nullifier: dup.nullifier, cancelled: dup.cancelled.len() });
                    let label = self.by_nullifier.get(&dup.nullifier).cloned();
                    for id in dup.cancelled {
                        self.log(now, to, Event::WithdrawalCancelled { id, nullifier: dup.nullifier });
                        if let Some(l) = &label {
                            self.notes.get_mut(l).expect("known").summary.cancellations += 1;
                        }
                    }
                    if let Some(l) = &label {
                        self.notes.get_mut(l).expect("known").summary.burned = true;
                    }
                }
            }
        }
    }

    fn process(&mut self, chain: ChainId, now: Tick) {
        let done = self.chains[chain.index()].contract.process_tick(now);
        for f in done {
            let credit = self.credits.entry((chain, f.recipient.clone())).or_default();
            match f.payout {
                Payout::Native => credit.native += f.amount,
                Payout::Wrapped => credit.wrapped += f.amount,
            }
            let ev = Event::WithdrawalFinalized {
                id: f.id,
                nullifier: f.nullifier,
                recipient: f.recipient,
                amount: f.amount,
                payout: f.payout,
            };
            self.log(now, chain, ev);
            if let Some(label) = self.by_nullifier.get(&f.nullifier).cloned() {
                let summary = &mut self.notes.get_mut(&label).expect("known").summary;
                summary.payouts += 1;
                if summary.payouts > 1 {
                    let detail = format!("double_payout note={label} payouts={}", summary.payouts);
                    self.violation(now, chain, detail);
                }
            }
        }
    }

    fn mine(&mut self, chain: ChainId, now: Tick) {
        let view = &mut self.chains[chain.index()];
        let prev = view.mined.last().expect("genesis").digest();
        let commitment = view.contract.state_commitment();
        let target = view.mined[0].work_target;
        let header = mine_header(now, prev, commitment, target);
        view.mined.push(header);
        view.snapshots.push((view.contract.local_roots().len(), view.contract.exposed_nullifiers().len()));
        self.log(now, chain, Event::HeaderMined { height: header.height, digest: header.digest(), commitment });
    }

    fn check(&mut self, now: Tick) {
        for c in ChainId::BOTH {
            if let Err(e) = self.chains[c.index()].contract.check_invariants() {
                self.violation(now, c, token(&e));
            }
        }
        let d = self.scenario.denomination;
        let locked: u64 = self.chains.iter().map(|v| v.contract.balance()).sum();
        let native: u64 = self.credits.values().map(|c| c.native).sum();
        if locked + native != d * self.deposits {
            self.violation(now, ChainId::A, format!("conservation locked={locked} native_credits={native}"));
        }
        let all_credits: u64 = self.credits.values().map(|c| c.native + c.wrapped).sum();
        let (mut unsettled, mut burned) = (0u64, 0u64);
        for n in self.notes.values().filter(|n| n.summary.origin.is_some()) {
            if n.summary.payouts == 0 {
                if n.summary.burned {
                    burned += 1;
                } else {
                    unsettled += 1;
                }
            }
        }
        if all_credits + d * (unsettled + burned) != d * self.deposits {
            self.violation(now, ChainId::A, format!("value_accounting credits={all_credits} unsettled={unsettled} burned={burned}"));
        }
    }

    fn finish(mut self) -> SimOutcome {
        let horizon = self.scenario.horizon;
        for detail in super::checks::delay_violations(&self.transcript, self.scenario) {
            self.violation(horizon, ChainId::A, detail);
        }
        let [a, b] = self.chains;
        SimOutcome {
            transcript: self.transcript,
            delay_bound: a.contract.config().relay_delay,
            processing_delay: a.contract.config().processing_delay(),
            contracts: [a.contract, b.contract],
            rewards: self.rewards,
            credits: self.credits,
            notes: self.notes.into_iter().map(|(l, n)| (l, n.summary)).collect(),
            violations: self.violations,
            baseline: self.baseline,
        }
    }
}
