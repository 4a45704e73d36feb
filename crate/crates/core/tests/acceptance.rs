//! End-to-end acceptance criteria, one test per criterion. Each prints a
//! PASS/FAIL line with its measured runtime (visible with `--nocapture`).

use std::collections::{BTreeMap, HashMap, HashSet};
use std::time::{Duration, Instant};

use bridge_core::field::hash2;
use bridge_core::incentives::vampire_metrics;
use bridge_core::merkle::{MerklePath, MerkleTree};
use bridge_core::simnet::{AdversarySpec, Event, IncentiveSpec, ScriptEvent};
use bridge_core::zkrel::{circuit_id_for_height, DepositNote, Proof, ProofParams, ProofSystem, RootSelector, Statement,
    TransparentBackend, Witness};
use bridge_core::{explore_races, run, AccountId, AnonymityReport, ChainId, FieldElement, Scenario, SimOutcome, Tick};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Verdict = Result<String, String>;

fn acct(s: &str) -> AccountId {
    AccountId::new(s).unwrap()
}

fn deposit(at: Tick, chain: ChainId, note: &str) -> ScriptEvent {
    ScriptEvent::Deposit { at, chain, note: note.into(), amount: None }
}

fn withdraw(at: Tick, chain: ChainId, note: &str, to: &str) -> ScriptEvent {
    ScriptEvent::Withdraw { at, chain, note: note.into(), recipient: acct(to) }
}

fn claim(at: Tick, chain: ChainId, note: &str, who: &str) -> ScriptEvent {
    ScriptEvent::ClaimReward { at, chain, note: note.into(), claimant: acct(who) }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn clean(out: &SimOutcome) -> Result<(), String> {
    ensure(out.violations.is_empty(), || format!("violations: {:?}", out.violations))
}

fn reason_of(out: &SimOutcome, chain: ChainId, sn: FieldElement) -> Option<String> {
    out.transcript.on(chain).find_map(|r| match &r.event {
        Event::WithdrawalRejected { nullifier, reason, .. } if *nullifier == sn => Some(reason.clone()),
        _ => None,
    })
}

fn liveness() -> Verdict {
    let mut finalized = 0;
    let mut total = 0;
    for i in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i);
        let h = rng.gen_range(1..=4);
        let d = rng.gen_range(1..=5);
        let denom = rng.gen_range(1..=50);
        let n = rng.gen_range(1..=(1usize << h).min(6));
        let mut sc = Scenario::new(i, 0, h, denom, d);
        let mut last = 0;
        for k in 0..n {
            let t0 = rng.gen_range(1..=12);
            let label = format!("n{k}");
            let w = t0 + d + 1;
            sc.push(deposit(t0, ChainId::A, &label));
            sc.push(withdraw(w, ChainId::B, &label, &format!("u{k}")));
            last = last.max(w);
        }
        sc.horizon = last + d + 2;
        let out = run(&sc).map_err(|e| format!("scenario {i}: {e}"))?;
        clean(&out).map_err(|e| format!("scenario {i}: {e}"))?;
        total += n;
        finalized += out.notes.values().filter(|s| s.payouts == 1).count();
        ensure(out.double_payouts().is_empty(), || format!("scenario {i}: double payout"))?;
    }
    ensure(finalized == total, || format!("{finalized}/{total} finalized"))?;
    Ok(format!("{finalized}/{total} withdrawals finalized over 100 scenarios"))
}

fn race_base(d: Tick, origin: ChainId, epsilon: i64) -> Scenario {
    let mut sc = Scenario::new(7, 3 * d + 6, 2, 10, d);
    sc.epsilon = epsilon;
    sc.push(deposit(1, origin, "x"));
    sc.adversary =
        Some(AdversarySpec::DoubleWithdraw { note: "x".into(), first_chain: origin, at: d + 2, t_prime: 0, t_prime_range: None });
    sc
}

fn races() -> Verdict {
    let mut rows = 0;
    let mut cancelled = 0;
    for d in 1..=4 {
        let end = 2 * (d + 1);
        for origin in ChainId::BOTH {
            let rep = explore_races(&race_base(d, origin, 1), 0..=end).map_err(|e| e.to_string())?;
            let tag = format!("D={d} origin={origin}");
            ensure(rep.rows.len() as Tick == 2 * (end + 1), || format!("{tag}: {} rows", rep.rows.len()))?;
            ensure(rep.max_payouts() <= 1, || format!("{tag}: double payout {:?}", rep.double_payout_rows()))?;
            ensure(rep.missed_cancellations().is_empty(), || format!("{tag}: missed {:?}", rep.missed_cancellations()))?;
            ensure(rep.mismatches().is_empty(), || format!("{tag}: model mismatch {:?}", rep.mismatches()))?;
            for r in &rep.rows {
                ensure(r.honest_payouts == 1, || format!("{tag}: control paid {}", r.honest_payouts))?;
                if r.both_pending_at_detection {
                    ensure(r.cancellations == 2 && r.payouts == 0, || format!("{tag}: {r:?}"))?;
                    cancelled += 1;
                }
            }
            rows += rep.rows.len();

            let neg = explore_races(&race_base(d, origin, -1), 0..=end).map_err(|e| e.to_string())?;
            ensure(!neg.double_payout_rows().is_empty(), || format!("{tag}: negative control paid at most once"))?;
            ensure(neg.mismatches().is_empty(), || format!("{tag}: negative control mismatch {:?}", neg.mismatches()))?;
        }
    }
    Ok(format!("{rows} interleavings, 0 double payouts, {cancelled} both-cancel rows; negative control doubles for every D"))
}

/// Proof bytes for an arbitrary, possibly invalid, witness.
fn forge(params: &ProofParams, stmt: &Statement, r: FieldElement, s: FieldElement, sel: RootSelector, path: &MerklePath) -> Proof {
    let mut out = Vec::new();
    out.extend_from_slice(&params.digest().to_bytes());
    out.extend_from_slice(&stmt.digest().to_bytes());
    out.extend_from_slice(&r.to_bytes());
    out.extend_from_slice(&s.to_bytes());
    out.push(matches!(sel, RootSelector::B) as u8);
    out.push(path.siblings.len() as u8);
    for (sib, &dir) in path.siblings.iter().zip(&path.directions) {
        out.extend_from_slice(&sib.to_bytes());
        out.push(dir as u8);
    }
    Proof { backend_tag: TransparentBackend::TAG, payload: out }
}

fn tree_of(h: usize, notes: &[DepositNote]) -> MerkleTree {
    let mut t = MerkleTree::new(h).unwrap();
    for n in notes {
        assert!(t.add(n.commitment()));
    }
    t
}

fn relation() -> Verdict {
    let zk = TransparentBackend;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut mutations = 0;
    for i in 0..200 {
        let h = rng.gen_range(1..=4);
        let params = zk.setup(128, &circuit_id_for_height(h)).unwrap();
        let cap = 1usize << h;
        let notes_a: Vec<DepositNote> = (0..rng.gen_range(1..=cap)).map(|_| DepositNote::random(&mut rng)).collect();
        let notes_b: Vec<DepositNote> = (0..rng.gen_range(1..=cap)).map(|_| DepositNote::random(&mut rng)).collect();
        let (ta, tb) = (tree_of(h, &notes_a), tree_of(h, &notes_b));
        let sel = if rng.gen() { RootSelector::A } else { RootSelector::B };
        let (notes, tree) = match sel {
            RootSelector::A => (&notes_a, &ta),
            RootSelector::B => (&notes_b, &tb),
        };
        let idx = rng.gen_range(0..notes.len());
        let stmt = Statement { root_a: ta.root(), root_b: tb.root(), nullifier: notes[idx].nullifier() };
        let wit = Witness::new(&notes[idx], tree.path(idx).unwrap(), sel);
        let proof = zk.prove(&params, &stmt, &wit).map_err(|e| format!("instance {i}: prove failed: {e}"))?;
        ensure(zk.verify(&params, &stmt, &proof), || format!("instance {i}: valid proof rejected"))?;
        let bump = FieldElement::new(rng.gen_range(1..u64::MAX));
        let mutated = [
            Statement { root_a: stmt.root_a + bump, ..stmt },
            Statement { root_b: stmt.root_b + bump, ..stmt },
            Statement { nullifier: stmt.nullifier + bump, ..stmt },
        ];
        for m in mutated {
            ensure(!zk.verify(&params, &m, &proof), || format!("instance {i}: mutated statement accepted"))?;
            mutations += 1;
        }
    }

    // Brute force over secrets in 0..4 and a height-2 universe.
    let h = 2;
    let params = zk.setup(128, &circuit_id_for_height(h)).unwrap();
    let note = |r: u64, s: u64| DepositNote::new(FieldElement::new(r), FieldElement::new(s));
    let sets: [Vec<DepositNote>; 4] = [
        vec![note(0, 0), note(1, 1), note(2, 2)],
        vec![note(0, 0)],
        vec![note(3, 3), note(1, 2)],
        vec![],
    ];
    let trees: Vec<MerkleTree> = sets.iter().map(|s| tree_of(h, s)).collect();
    let members: Vec<HashSet<FieldElement>> = sets.iter().map(|s| s.iter().map(|n| n.commitment()).collect()).collect();
    let mut paths: Vec<MerklePath> = Vec::new();
    for t in &trees {
        let sibling_sets: Vec<Vec<FieldElement>> = if t.is_empty() {
            vec![t.zero_subtree_roots()[..h].to_vec()]
        } else {
            (0..t.len()).map(|idx| t.path(idx).unwrap().siblings).collect()
        };
        for siblings in sibling_sets {
            for dirs in 0..4usize {
                let p = MerklePath::from_index(dirs, siblings.clone());
                if !paths.contains(&p) {
                    paths.push(p);
                }
            }
        }
    }
    let mut statements = Vec::new();
    for a in [0, 1] {
        for b in [2, 3] {
            for r in 0..4 {
                statements.push((a, b, Statement { root_a: trees[a].root(), root_b: trees[b].root(), nullifier: note(r, 0).nullifier() }));
            }
        }
    }
    let results: Vec<(usize, usize, usize)> = statements
        .par_iter()
        .map(|&(a, b, stmt)| {
            let (mut checked, mut accepted, mut false_accepts) = (0, 0, 0);
            for r in 0..4 {
                for s in 0..4 {
                    let n = note(r, s);
                    for sel in [RootSelector::A, RootSelector::B] {
                        let tree = if sel == RootSelector::A { a } else { b };
                        let sound = members[tree].contains(&n.commitment()) && n.nullifier() == stmt.nullifier;
                        for p in &paths {
                            let proof = forge(&params, &stmt, n.r, n.s, sel, p);
                            checked += 1;
                            if zk.verify(&params, &stmt, &proof) {
                                accepted += 1;
                                false_accepts += !sound as usize;
                            }
                        }
                    }
                }
            }
            (checked, accepted, false_accepts)
        })
        .collect();
    let checked: usize = results.iter().map(|r| r.0).sum();
    let accepted: usize = results.iter().map(|r| r.1).sum();
    let false_accepts: usize = results.iter().map(|r| r.2).sum();
    ensure(false_accepts == 0, || format!("{false_accepts} false accepts out of {checked}"))?;
    ensure(accepted > 0, || "brute force accepted nothing".into())?;
    Ok(format!("200/200 verify, {mutations} mutations rejected, {checked} forged proofs with {accepted} sound accepts and 0 false accepts"))
}

fn naive_root(leaves: &[FieldElement], h: usize) -> FieldElement {
    let mut layer: Vec<FieldElement> = leaves.to_vec();
    layer.resize(1 << h, FieldElement::ZERO);
    while layer.len() > 1 {
        layer = layer.chunks(2).map(|p| hash2(p[0], p[1])).collect();
    }
    layer[0]
}

fn merkle_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut roots, mut paths) = (0, 0);
    for h in [2usize, 3, 4] {
        for _ in 0..40 {
            let n = rng.gen_range(0..=64usize.min(1 << h));
            let leaves: Vec<FieldElement> = (0..n).map(|_| FieldElement::new(rng.gen())).collect();
            let mut tree = MerkleTree::new(h).unwrap();
            ensure(tree.root() == naive_root(&[], h), || format!("h={h}: empty root differs"))?;
            for (i, &leaf) in leaves.iter().enumerate() {
                ensure(tree.add(leaf), || format!("h={h}: add {i} refused"))?;
                ensure(tree.root() == naive_root(&leaves[..=i], h), || format!("h={h} n={}: root differs", i + 1))?;
                roots += 1;
            }
            for (i, &leaf) in leaves.iter().enumerate() {
                let p = tree.path(i).unwrap();
                ensure(p.fold(leaf, tree.params()) == tree.root(), || format!("h={h}: path {i} fails"))?;
                ensure(p.fold(leaf + FieldElement::ONE, tree.params()) != tree.root(), || format!("h={h}: wrong leaf verifies"))?;
                for count in i + 1..=n {
                    let p = tree.path_at(i, count).unwrap();
                    ensure(p.fold(leaf, tree.params()) == naive_root(&leaves[..count], h), || {
                        format!("h={h}: historical path {i}@{count} fails")
                    })?;
                    paths += 1;
                }
            }
            ensure(!tree.is_full() || !tree.add(FieldElement::ONE), || format!("h={h}: full tree accepted a leaf"))?;
        }
    }
    Ok(format!("{roots} incremental roots and {paths} paths match the rebuild oracle"))
}

fn free_mixer() -> Verdict {
    let d = 2;
    let p = d + 1;
    let mut passed = 0;
    for origin in ChainId::BOTH {
        for first in [origin, origin.other()] {
            let second = first.other();
            let w1 = d + 2;
            let w2 = w1 + p + d + 1;
            let mut sc = Scenario::new(5, w2 + p + 2, 2, 10, d);
            sc.push(deposit(1, origin, "n"));
            sc.push(withdraw(w1, first, "n", "alice"));
            sc.push(withdraw(w2, second, "n", "alice"));
            let out = run(&sc).map_err(|e| e.to_string())?;
            let tag = format!("origin={origin} first={first}");
            clean(&out).map_err(|e| format!("{tag}: {e}"))?;
            let s = out.note("n").unwrap();
            ensure(s.payouts == 1, || format!("{tag}: {} payouts", s.payouts))?;
            let paid_on = out.transcript.iter().find(|r| matches!(r.event, Event::WithdrawalFinalized { .. })).map(|r| r.chain);
            ensure(paid_on == Some(first), || format!("{tag}: paid on {paid_on:?}"))?;
            let reason = reason_of(&out, second, s.nullifier);
            ensure(reason.as_deref() == Some("nullifier_spent"), || format!("{tag}: second withdrawal {reason:?}"))?;
            passed += 1;
        }
    }
    Ok(format!("{passed}/4 scenarios"))
}

fn anonymity() -> Verdict {
    let d = 2;
    let mut sc = Scenario::new(6, 30, 3, 10, d);
    for (i, t) in [1, 2, 3].into_iter().enumerate() {
        sc.push(deposit(t, ChainId::A, &format!("a{i}")));
    }
    for (i, t) in [2, 4].into_iter().enumerate() {
        sc.push(deposit(t, ChainId::B, &format!("b{i}")));
    }
    sc.push(withdraw(4 + d + 1, ChainId::B, "a1", "w"));
    sc.push(deposit(12, ChainId::A, "late"));
    let out = run(&sc).map_err(|e| e.to_string())?;
    clean(&out)?;
    let id = out
        .transcript
        .on(ChainId::B)
        .find_map(|r| match r.event {
            Event::WithdrawalSubmitted { id, .. } => Some(id),
            _ => None,
        })
        .ok_or("withdrawal not submitted")?;
    let size = bridge_core::metrics::anonymity_set(&out.transcript, ChainId::B, id).map_err(|e| e.to_string())?;
    ensure(size == 5, || format!("anonymity_set = {size}"))?;
    Ok("anonymity_set = 5".into())
}

fn rewards() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (d, min_lock) = (2, 5);
    let mut sc = Scenario::new(11, 90, 6, 10, d);
    sc.incentives = Some(IncentiveSpec { rate_a: 3, rate_b: 2, min_lock });
    for k in 0..50 {
        let label = format!("n{k}");
        let chain = if rng.gen_bool(0.6) { ChainId::A } else { ChainId::B };
        sc.push(deposit(rng.gen_range(1..=30), chain, &label));
        for _ in 0..rng.gen_range(0..5) {
            let c = if rng.gen() { ChainId::A } else { ChainId::B };
            sc.push(claim(rng.gen_range(1..=80), c, &label, &format!("c{}", rng.gen_range(0..5))));
        }
        if rng.gen_bool(0.25) {
            sc.push(withdraw(rng.gen_range(35..=60), chain.other(), &label, "exit"));
        }
    }
    let out = run(&sc).map_err(|e| e.to_string())?;
    clean(&out)?;

    // Tick at which each chain first learned each root.
    let mut learned: HashMap<(ChainId, FieldElement), Tick> = HashMap::new();
    let mut deposit_root: HashMap<FieldElement, (ChainId, FieldElement)> = HashMap::new();
    for r in out.transcript.iter() {
        match &r.event {
            Event::Deposit { commitment, root, .. } => {
                learned.entry((r.chain, *root)).or_insert(r.tick);
                deposit_root.insert(*commitment, (r.chain, *root));
            }
            Event::RemoteRootInstalled { root } => {
                learned.entry((r.chain, *root)).or_insert(r.tick);
            }
            _ => {}
        }
    }
    let by_nullifier: HashMap<FieldElement, FieldElement> = out.notes.values().map(|n| (n.nullifier, n.commitment)).collect();
    let expected_age = |chain: ChainId, sn: FieldElement, now: Tick| -> Option<Tick> {
        let root = deposit_root.get(by_nullifier.get(&sn)?)?;
        learned.get(&(chain, root.1)).and_then(|&t| now.checked_sub(t))
    };

    let (mut paid, mut young_rejected) = (0, 0);
    let mut minted_seen: BTreeMap<ChainId, u64> = BTreeMap::new();
    for r in out.transcript.iter() {
        match &r.event {
            Event::RewardPaid { nullifier, age, amount, .. } => {
                ensure(*age >= min_lock, || format!("{r}: paid below min_lock"))?;
                let exp = expected_age(r.chain, *nullifier, r.tick);
                ensure(exp == Some(*age), || format!("{r}: expected age {exp:?}"))?;
                *minted_seen.entry(r.chain).or_default() += amount;
                paid += 1;
            }
            Event::RewardRejected { nullifier, reason, .. } => {
                if let Some(age) = expected_age(r.chain, *nullifier, r.tick) {
                    if age < min_lock {
                        ensure(reason == "too_young", || format!("{r}: young claim rejected as {reason}"))?;
                        young_rejected += 1;
                    }
                }
            }
            _ => {}
        }
    }
    for chain in ChainId::BOTH {
        let book = &out.rewards[chain.index()];
        let rate = sc.incentives.unwrap().rate(chain);
        let mut last: HashMap<FieldElement, Tick> = HashMap::new();
        let mut sum = 0u64;
        for iv in book.intervals() {
            let prev = last.insert(iv.nullifier, iv.to_age).unwrap_or(0);
            ensure(iv.from_age == prev && iv.to_age > iv.from_age, || format!("{chain}: non-incremental {iv:?}"))?;
            ensure(iv.amount == rate * (iv.to_age - iv.from_age), || format!("{chain}: amount {iv:?}"))?;
            sum += iv.amount;
        }
        let balances: u64 = book.balances().values().sum();
        let seen = minted_seen.get(&chain).copied().unwrap_or(0);
        ensure(sum == book.total_minted() && balances == sum && seen == sum, || {
            format!("{chain}: intervals {sum} minted {} balances {balances} transcript {seen}", book.total_minted())
        })?;
    }
    ensure(paid > 0 && young_rejected > 0, || format!("degenerate run: {paid} paid, {young_rejected} young"))?;
    let minted: u64 = out.rewards.iter().map(|b| b.total_minted()).sum();
    Ok(format!("{paid} claims paid {minted} exactly; {young_rejected} young claims rejected"))
}

fn storage() -> Verdict {
    let d = 2;
    let (n_a, n_b, m, k) = (60usize, 40usize, 40usize, 200);
    let mut sc = Scenario::new(8, k + d, 7, 1, d);
    for i in 0..n_a {
        sc.push(deposit(1 + i as Tick, ChainId::A, &format!("a{i}")));
    }
    for i in 0..n_b {
        sc.push(deposit(1 + i as Tick, ChainId::B, &format!("b{i}")));
    }
    for i in 0..m {
        let (label, chain) = if i % 2 == 0 { (format!("a{i}"), ChainId::B) } else { (format!("b{i}"), ChainId::A) };
        sc.push(withdraw(100 + i as Tick, chain, &label, "out"));
    }
    let out = run(&sc).map_err(|e| e.to_string())?;
    clean(&out)?;
    ensure(out.total_payouts() as usize == m, || format!("{} payouts", out.total_payouts()))?;
    let n = n_a + n_b;
    for chain in ChainId::BOTH {
        let g = out.storage_growth(chain);
        let local = if chain == ChainId::A { n_a } else { n_b };
        ensure(g.local_roots == local && g.remote_roots == n - local, || format!("{chain}: roots {g:?}"))?;
        ensure(g.roots() + g.nullifiers + g.headers as usize == n + m + k as usize, || format!("{chain}: total {g:?}"))?;
        ensure(g.nullifiers == m && g.headers as u64 == k, || format!("{chain}: {g:?}"))?;
        ensure(g.dominant() == "headers", || format!("{chain}: dominant {}", g.dominant()))?;
    }
    Ok(format!("each side stores {n} roots + {m} nullifiers + {k} headers; headers dominate bytes"))
}

fn reports(out: &SimOutcome) -> String {
    let mut s = out.transcript.render();
    s.push_str(&AnonymityReport::from_transcript(&out.transcript).map(|r| r.to_table()).unwrap_or_default());
    s.push_str(&vampire_metrics(&out.transcript).map(|r| r.to_table()).unwrap_or_default());
    s.push_str(&out.storage_table());
    s
}

fn determinism() -> Verdict {
    let mut scenarios = vec![race_base(3, ChainId::A, 1), race_base(2, ChainId::B, -1)];
    let mut sc = Scenario::new(21, 40, 3, 10, 2);
    sc.incentives = Some(IncentiveSpec { rate_a: 1, rate_b: 2, min_lock: 3 });
    for i in 0..6 {
        let chain = if i % 2 == 0 { ChainId::A } else { ChainId::B };
        sc.push(deposit(1 + i, chain, &format!("n{i}")));
        sc.push(claim(15 + i, chain.other(), &format!("n{i}"), "c"));
        sc.push(withdraw(20 + i, chain.other(), &format!("n{i}"), "w"));
    }
    scenarios.push(sc);
    scenarios.push(bridge_core::incentives::vampire_scenario(&Default::default()));
    for (i, sc) in scenarios.iter().enumerate() {
        let (a, b) = (run(sc).map_err(|e| e.to_string())?, run(sc).map_err(|e| e.to_string())?);
        ensure(reports(&a) == reports(&b), || format!("scenario {i}: reports differ"))?;
        if sc.adversary.is_some() {
            let ra = explore_races(sc, 0..=6).map_err(|e| e.to_string())?.to_table();
            let rb = explore_races(sc, 0..=6).map_err(|e| e.to_string())?.to_table();
            ensure(ra == rb, || format!("scenario {i}: race tables differ"))?;
        }
        let text = sc.to_toml_string();
        let reparsed = Scenario::from_toml_str(&text).map_err(|e| e.to_string())?;
        let c = run(&reparsed).map_err(|e| e.to_string())?;
        ensure(reports(&a) == reports(&c), || format!("scenario {i}: reparsed run differs"))?;
    }
    Ok(format!("{} scenarios byte-identical across runs", scenarios.len()))
}

/// Runs one criterion, prints its PASS/FAIL line and fails the test on FAIL.
fn check(n: usize, name: &str, f: fn() -> Verdict, bound: Option<u64>) {
    let start = Instant::now();
    let verdict = f();
    let took = start.elapsed();
    let verdict = match (verdict, bound) {
        (Ok(_), Some(b)) if took > Duration::from_secs(b) => Err(format!("took {took:.2?}, bound {b}s")),
        (v, _) => v,
    };
    let limit = bound.map(|b| format!(", bound {b}s")).unwrap_or_default();
    match verdict {
        Ok(detail) => println!("PASS criterion {n}: {name}: {detail} ({took:.2?}{limit})"),
        Err(why) => {
            println!("FAIL criterion {n}: {name}: {why} ({took:.2?}{limit})");
            panic!("criterion {n} failed: {why}");
        }
    }
}

#[test]
fn criterion_1_liveness() {
    check(1, "liveness", liveness, Some(10));
}

#[test]
fn criterion_2_race_safety() {
    check(2, "race safety", races, Some(30));
}

#[test]
fn criterion_3_relation_completeness_and_soundness() {
    check(3, "relation completeness and soundness", relation, Some(20));
}

#[test]
fn criterion_4_merkle_oracle_equivalence() {
    check(4, "merkle oracle equivalence", merkle_oracle, Some(5));
}

#[test]
fn criterion_5_free_mixer() {
    check(5, "free mixer", free_mixer, None);
}

#[test]
fn criterion_6_combined_anonymity_set() {
    check(6, "combined anonymity set", anonymity, None);
}

#[test]
fn criterion_7_incentive_accounting() {
    check(7, "incentive accounting", rewards, None);
}

#[test]
fn criterion_8_storage_linearity() {
    check(8, "storage linearity", storage, None);
}

#[test]
fn criterion_9_determinism() {
    check(9, "determinism", determinism, None);
}
