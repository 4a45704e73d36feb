//! Property tests over the contract, relation, light client, rewards and
//! the simulator.

use std::collections::HashMap;

use bridge_core::contract::contract_setup;
use bridge_core::incentives::{claim_reward, RewardClaim};
use bridge_core::lightclient::{easy_target, mine_header};
use bridge_core::metrics::{linkability_audit, RootIndex};
use bridge_core::simnet::races::predict;
use bridge_core::simnet::{AdversarySpec, Event, RelayerSpec, ScriptEvent};
use bridge_core::zkrel::{circuit_id_for_height, RootSelector};
use bridge_core::{
    run, AccountId, BlockHeader, ChainId, ContractConfig, ContractState, DepositNote, FieldElement, LightClient,
    MerklePath, MerkleTree, Proof, ProofSystem, RewardBook, RewardConfig, Scenario, Statement, Tick, Transcript,
    TransparentBackend, Witness,
};
use proptest::prelude::*;

const D: Tick = 2;

fn acct(s: &str) -> AccountId {
    AccountId::new(s).unwrap()
}

fn genesis() -> BlockHeader {
    mine_header(0, FieldElement::ZERO, FieldElement::ZERO, easy_target(4))
}

fn note(i: u64) -> DepositNote {
    DepositNote::new(FieldElement::new(1000 + i), FieldElement::new(2000 + i))
}

fn local_proof(c: &ContractState, n: &DepositNote, index: usize) -> (Statement, Proof) {
    let tree = c.tree().unwrap();
    let stmt = Statement { root_a: tree.root(), root_b: c.latest_remote_root().unwrap(), nullifier: n.nullifier() };
    let wit = Witness::new(n, tree.path(index).unwrap(), RootSelector::A);
    (stmt, c.backend().prove(c.params().unwrap(), &stmt, &wit).unwrap())
}

#[derive(Debug, Clone)]
enum Op {
    Deposit,
    Withdraw(usize),
    Advance(Tick),
    Duplicate(usize),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        3 => Just(Op::Deposit),
        3 => (0..16usize).prop_map(Op::Withdraw),
        2 => (1..4 as Tick).prop_map(Op::Advance),
        1 => (0..16usize).prop_map(Op::Duplicate),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn contract_histories_only_grow(ops in prop::collection::vec(op(), 1..40)) {
        let d = 10;
        let mut c = contract_setup(ContractConfig::new(ChainId::A, 4, d, D), genesis()).unwrap();
        let mut now = 1;
        let mut deposited = Vec::new();
        for op in ops {
            let (nulls, locals, remotes) =
                (c.exposed_nullifiers().to_vec(), c.local_roots().to_vec(), c.remote_roots().to_vec());
            match op {
                Op::Deposit => {
                    let n = note(deposited.len() as u64);
                    if c.deposit(d, n.commitment(), now).is_ok() {
                        deposited.push(n);
                    }
                }
                Op::Withdraw(i) if i < deposited.len() => {
                    let (stmt, proof) = local_proof(&c, &deposited[i], i);
                    let _ = c.submit_withdrawal(stmt, proof, acct("w"), now);
                }
                Op::Advance(dt) => {
                    for _ in 0..dt {
                        now += 1;
                        c.process_tick(now);
                    }
                }
                Op::Duplicate(i) if i < deposited.len() => {
                    c.on_duplicate_nullifier(deposited[i].nullifier(), now);
                }
                _ => {}
            }
            prop_assert!(c.check_invariants().is_ok(), "{:?}", c.check_invariants());
            prop_assert!(c.exposed_nullifiers().starts_with(&nulls));
            prop_assert!(c.local_roots().starts_with(&locals));
            prop_assert!(c.remote_roots().starts_with(&remotes));
            prop_assert_eq!(c.balance() + c.native_paid(), d * c.deposit_count());
        }
    }

    #[test]
    fn completeness_and_statement_binding(
        h in 1usize..=4,
        seeds in prop::collection::vec(any::<u64>(), 2..32),
        pick in any::<prop::sample::Index>(),
        field in 0..3usize,
        delta in 1..u64::MAX,
    ) {
        let zk = TransparentBackend;
        let params = zk.setup(128, &circuit_id_for_height(h)).unwrap();
        let cap = 1usize << h;
        let notes: Vec<DepositNote> = seeds.iter().map(|&x| DepositNote::new(FieldElement::new(x), FieldElement::new(!x))).collect();
        let split = (notes.len() / 2).min(cap);
        let (a_notes, b_notes) = (&notes[..split.max(1)], &notes[split.max(1)..(split.max(1) + cap).min(notes.len())]);
        let mut ta = MerkleTree::new(h).unwrap();
        let mut tb = MerkleTree::new(h).unwrap();
        a_notes.iter().for_each(|n| { ta.add(n.commitment()); });
        b_notes.iter().for_each(|n| { tb.add(n.commitment()); });
        let all: Vec<(RootSelector, usize)> = (0..ta.len()).map(|i| (RootSelector::A, i))
            .chain((0..tb.len()).map(|i| (RootSelector::B, i))).collect();
        let (sel, idx) = all[pick.index(all.len())];
        let (n, tree) = if sel == RootSelector::A { (&a_notes[idx], &ta) } else { (&b_notes[idx], &tb) };
        let stmt = Statement { root_a: ta.root(), root_b: tb.root(), nullifier: n.nullifier() };
        let proof = zk.prove(&params, &stmt, &Witness::new(n, tree.path(idx).unwrap(), sel)).unwrap();
        prop_assert!(zk.verify(&params, &stmt, &proof));
        let bump = FieldElement::new(delta);
        let mut m = stmt;
        match field {
            0 => m.root_a = m.root_a + bump,
            1 => m.root_b = m.root_b + bump,
            _ => m.nullifier = m.nullifier + bump,
        }
        prop_assert!(!zk.verify(&params, &m, &proof));
    }

    /// Two-leaf trees whose notes have byte-sized secrets; a witness drawn from
    /// the same subdomain verifies only if its commitment is under the chosen root.
    #[test]
    fn or_soundness_on_two_leaf_trees(
        tree_a in [(any::<u8>(), any::<u8>()), (any::<u8>(), any::<u8>())],
        tree_b in [(any::<u8>(), any::<u8>()), (any::<u8>(), any::<u8>())],
        r in any::<u8>(), s in any::<u8>(),
        sel_b in any::<bool>(),
        source in 0..4usize,
        dirs in 0..2usize,
    ) {
        let zk = TransparentBackend;
        let params = zk.setup(128, &circuit_id_for_height(1)).unwrap();
        let mk = |(r, s): (u8, u8)| DepositNote::new(FieldElement::new(r as u64), FieldElement::new(s as u64));
        let build = |pair: [(u8, u8); 2]| {
            let mut t = MerkleTree::new(1).unwrap();
            pair.iter().for_each(|&p| { t.add(mk(p).commitment()); });
            t
        };
        let (ta, tb) = (build(tree_a), build(tree_b));
        let witness_note = mk((r, s));
        let stmt = Statement { root_a: ta.root(), root_b: tb.root(), nullifier: witness_note.nullifier() };
        let sibling_tree = if source < 2 { &ta } else { &tb };
        let siblings = sibling_tree.path(source % 2).unwrap().siblings;
        let path = MerklePath::from_index(dirs, siblings);
        let sel = if sel_b { RootSelector::B } else { RootSelector::A };
        let mut payload = Vec::new();
        payload.extend_from_slice(&params.digest().to_bytes());
        payload.extend_from_slice(&stmt.digest().to_bytes());
        payload.extend_from_slice(&witness_note.r.to_bytes());
        payload.extend_from_slice(&witness_note.s.to_bytes());
        payload.push(sel_b as u8);
        payload.push(1);
        payload.extend_from_slice(&path.siblings[0].to_bytes());
        payload.push(path.directions[0] as u8);
        let accepted = zk.verify(&params, &stmt, &Proof { backend_tag: TransparentBackend::TAG, payload });
        let members = if sel_b { tree_b } else { tree_a };
        if accepted {
            prop_assert!(members.contains(&(r, s)), "false accept of ({r},{s}) under {sel:?}");
        }
    }

    #[test]
    fn light_client_keeps_a_valid_chain(kinds in prop::collection::vec(0..5u8, 1..24)) {
        let g = genesis();
        let mut lc = LightClient::new(g);
        let target = lc.work_target();
        let mut mined = vec![g];
        for (i, k) in kinds.into_iter().enumerate() {
            let tip = *mined.last().unwrap();
            let commitment = FieldElement::new(i as u64);
            let candidate = match k {
                0 | 1 => mine_header(tip.height + 1, tip.digest(), commitment, target),
                2 => mine_header(tip.height + 1, FieldElement::new(7), commitment, target),
                3 => mine_header(tip.height + 2, tip.digest(), commitment, target),
                _ => {
                    let mut h = mine_header(tip.height + 1, tip.digest(), commitment, target);
                    h.state_commitment = h.state_commitment + FieldElement::ONE;
                    h
                }
            };
            if lc.add_header(candidate).is_ok() && k < 2 {
                mined.push(candidate);
            }
            let hs = lc.headers();
            prop_assert!(lc.is_valid_chain());
            prop_assert_eq!(hs[0], g);
            for w in hs.windows(2) {
                prop_assert_eq!(w[1].prev_hash, w[0].digest());
                prop_assert_eq!(w[1].height, w[0].height + 1);
                prop_assert!(w[1].meets_target());
                prop_assert_eq!(w[1].work_target, target);
            }
        }
    }

    #[test]
    fn rewards_conserve_and_never_repay(
        rate in 1u64..5,
        min_lock in 0 as Tick..6,
        claims in prop::collection::vec((0usize..3, 0 as Tick..30, 0 as Tick..40), 1..30),
    ) {
        let mut c = contract_setup(ContractConfig::new(ChainId::A, 2, 10, D), genesis()).unwrap();
        let notes: Vec<DepositNote> = (0..3).map(note).collect();
        for n in &notes {
            c.deposit(10, n.commitment(), 0).unwrap();
        }
        let cfg = RewardConfig { rate, min_lock };
        let mut book = RewardBook::new();
        let mut paid_to: HashMap<usize, Tick> = HashMap::new();
        let mut minted = 0;
        let mut now = 0;
        for (i, age, dt) in claims {
            now += dt;
            let (stmt, proof) = local_proof(&c, &notes[i], i);
            let claim = RewardClaim { statement: stmt, proof, claimed_age: age, claimant: acct("c") };
            let provable = now.saturating_sub(c.root_timestamp(stmt.root_a).unwrap());
            match claim_reward(&c, &mut book, &cfg, &claim, now) {
                Ok(amount) => {
                    let prev = paid_to.insert(i, age).unwrap_or(0);
                    prop_assert!(age >= min_lock && age <= provable && age > prev);
                    prop_assert_eq!(amount, rate * (age - prev));
                    minted += amount;
                }
                Err(_) => prop_assert!(age < min_lock || age > provable || age <= paid_to.get(&i).copied().unwrap_or(0)),
            }
        }
        prop_assert_eq!(book.total_minted(), minted);
        prop_assert_eq!(book.balance(&acct("c")), minted);
    }
}

#[derive(Debug, Clone)]
struct Plan {
    seed: u64,
    delays: (Tick, Tick),
    censored_extra: bool,
    deposits: Vec<(ChainId, Tick)>,
    withdrawals: Vec<(usize, ChainId, Tick)>,
    claims: Vec<(usize, ChainId, Tick)>,
}

fn chain() -> impl Strategy<Value = ChainId> {
    prop_oneof![Just(ChainId::A), Just(ChainId::B)]
}

fn plan() -> impl Strategy<Value = Plan> {
    (
        any::<u64>(),
        (1..4 as Tick, 1..4 as Tick),
        any::<bool>(),
        prop::collection::vec((chain(), 1..10 as Tick), 1..8),
        prop::collection::vec((0..8usize, chain(), 1..25 as Tick), 0..8),
        prop::collection::vec((0..8usize, chain(), 1..30 as Tick), 0..6),
    )
        .prop_map(|(seed, delays, censored_extra, deposits, withdrawals, claims)| Plan {
            seed,
            delays,
            censored_extra,
            deposits,
            withdrawals,
            claims,
        })
}

fn scenario(p: &Plan) -> Scenario {
    let mut sc = Scenario::new(p.seed, 40, 3, 10, p.delays.0);
    sc.relayers = vec![
        RelayerSpec { from: Some(ChainId::A), ..RelayerSpec::honest("ra", p.delays.0) },
        RelayerSpec { from: Some(ChainId::B), ..RelayerSpec::honest("rb", p.delays.1) },
    ];
    if p.censored_extra {
        sc.relayers.push(RelayerSpec { censored: true, ..RelayerSpec::honest("cx", 1) });
    }
    sc.incentives = Some(bridge_core::simnet::IncentiveSpec { rate_a: 1, rate_b: 2, min_lock: 3 });
    for (i, &(c, t)) in p.deposits.iter().enumerate() {
        sc.push(ScriptEvent::Deposit { at: t, chain: c, note: format!("n{i}"), amount: None });
    }
    for &(i, c, t) in &p.withdrawals {
        sc.push(ScriptEvent::Withdraw { at: t, chain: c, note: format!("n{}", i % p.deposits.len()), recipient: acct("w") });
    }
    for &(i, c, t) in &p.claims {
        sc.push(ScriptEvent::ClaimReward { at: t, chain: c, note: format!("n{}", i % p.deposits.len()), claimant: acct("c") });
    }
    sc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_runs_hold_every_invariant(p in plan()) {
        let sc = scenario(&p);
        let out = run(&sc).unwrap();
        prop_assert!(out.violations.is_empty(), "{:?}", out.violations);
        prop_assert!(out.double_payouts().is_empty());
        prop_assert!(linkability_audit(&out.transcript).is_clean());

        let text = out.transcript.render();
        prop_assert_eq!(&run(&sc).unwrap().transcript.render(), &text);
        prop_assert_eq!(&Transcript::parse(&text).unwrap(), &out.transcript);

        // Later roots of a chain never cover fewer deposits.
        let idx = RootIndex::from_transcript(&out.transcript);
        for c in ChainId::BOTH {
            let counts: Vec<usize> = out.transcript.on(c).filter_map(|r| match r.event {
                Event::Deposit { root, .. } => Some(idx.leaf_count(c, root).unwrap()),
                _ => None,
            }).collect();
            prop_assert!(counts.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn single_race_matches_timing_model(d in 1..5 as Tick, eps in -1i64..3, t_prime in 0..10 as Tick, first in chain()) {
        let mut sc = Scenario::new(1, d + 2 + t_prime + 2 * (d + 3) + 2, 2, 10, d);
        sc.epsilon = eps;
        sc.push(ScriptEvent::Deposit { at: 1, chain: ChainId::A, note: "x".into(), amount: None });
        sc.adversary = Some(AdversarySpec::DoubleWithdraw { note: "x".into(), first_chain: first, at: d + 2, t_prime, t_prime_range: None });
        let out = run(&sc).unwrap();
        let p = (d as i64 + eps).max(0) as Tick;
        let (payouts, both_cancel) = predict(t_prime, d, p);
        let s = out.note("x").unwrap();
        prop_assert_eq!(s.payouts, payouts);
        prop_assert_eq!(s.cancellations == 2, both_cancel);
        if eps >= 0 {
            prop_assert!(s.payouts <= 1);
        }
    }
}
