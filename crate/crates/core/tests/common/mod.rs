#![allow(dead_code)]

use std::collections::BTreeSet;

use inexa_core::abstraction::AbstractionRef;
use inexa_core::ocel::{parse_log, AbstractionKind, EventLog, LogFormat, ObjectType};
use inexa_core::ocpn::{explore, AcceptingOcpn, Transition, TransitionId};
use rand::rngs::StdRng;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde_json::{json, Map, Value};

pub const BANK: &str = "workflow:bank";
pub const CLIENT: &str = "workflow:client";
pub const LC: &str = "workflow:lc:finalize account opening";

pub fn ot(s: &str) -> ObjectType {
    ObjectType::parse(s).unwrap()
}

pub fn tids(v: &[&str]) -> BTreeSet<TransitionId> {
    v.iter().map(|&s| s.into()).collect()
}

pub fn seq_ref() -> AbstractionRef {
    AbstractionRef {
        kind: AbstractionKind::Seq,
        otype: ot(BANK),
        transitions: tids(&["t5", "t6", "t7", "t8"]),
    }
}

pub fn client_ref() -> AbstractionRef {
    AbstractionRef {
        kind: AbstractionKind::Caa,
        otype: ot(CLIENT),
        transitions: tids(&["t0", "t3", "t4"]),
    }
}

/// A bank-only chain: one place before, between and after the given
/// transitions.
pub fn bank_chain(ts: Vec<Transition>) -> AcceptingOcpn {
    let bank = ot(BANK);
    let mut n = AcceptingOcpn::new();
    let mut prev = n.add_place("g0", &bank).unwrap();
    n.mark_initial(&prev, 1).unwrap();
    for (i, t) in ts.into_iter().enumerate() {
        let t = n.add_transition(t).unwrap();
        let next = n.add_place(format!("g{}", i + 1), &bank).unwrap();
        n.add_input(&prev, &t).unwrap();
        n.add_output(&t, &next).unwrap();
        prev = next;
    }
    n.mark_final(&prev, 1).unwrap();
    n
}

pub fn labeled(id: &str, label: &str, refs: &[&str], members: &[&str]) -> Transition {
    let mut t = Transition::labeled(id, label);
    t.refs = refs.iter().map(|r| ot(r)).collect();
    t.members = members.iter().map(|m| m.to_string()).collect();
    t
}

pub const FINE: [&str; 4] = [
    "click open account",
    "insert account meta data",
    "check account conditions",
    "retrieve acceptance signature",
];

fn lifecycle() -> Transition {
    let stages = ["start", "on hold", "continue", "end"].map(|s| format!("finalize account opening - {s}"));
    let stages: Vec<&str> = stages.iter().map(String::as_str).collect();
    labeled("g_cla", "finalize account opening", &[], &stages)
}

fn head() -> Vec<Transition> {
    vec![
        labeled("g_ask", "ask for customer needs", &[CLIENT], &[]),
        labeled("g_chk", "check if customer is client", &[], &[]),
        labeled("g_crd", "check client's credit status", &[], &[]),
        labeled("g_inf", "inform client", &[CLIENT], &[]),
        labeled("g_typ", "check type of account to be created", &[CLIENT], &[]),
    ]
}

/// The bank model with the lifecycle collapsed and the client removed.
pub fn golden_upper() -> AcceptingOcpn {
    let mut ts = head();
    for (i, l) in FINE.iter().enumerate() {
        ts.push(labeled(&format!("g_f{i}"), l, &[], &[]));
    }
    ts.push(lifecycle());
    bank_chain(ts)
}

/// The same with the four fine-grained activities aggregated.
pub fn golden_lower() -> AcceptingOcpn {
    let mut ts = head();
    ts.push(labeled(
        "g_seq",
        "→(?click open account, ..., ?retrieve acceptance signature)",
        &[],
        &FINE,
    ));
    ts.push(lifecycle());
    bank_chain(ts)
}

/// Whether `net` can fire a sequence with labels `trace` from the initial
/// to the final marking, silent steps allowed anywhere.
pub fn accepts(net: &AcceptingOcpn, trace: &[String]) -> bool {
    let space = explore(net, 1_000_000).expect("bounded state space");
    let fin: Vec<u32> = space
        .places
        .iter()
        .map(|p| net.final_marking().get(p).copied().unwrap_or(0))
        .collect();
    let label = |t: usize| net.transition(&space.transitions[t]).and_then(|t| t.label.clone());
    let close = |mut set: BTreeSet<usize>| {
        let mut stack: Vec<usize> = set.iter().copied().collect();
        while let Some(s) = stack.pop() {
            for &(t, d) in &space.edges[s] {
                if label(t).is_none() && set.insert(d) {
                    stack.push(d);
                }
            }
        }
        set
    };
    let mut cur = close(BTreeSet::from([0]));
    for a in trace {
        let next: BTreeSet<usize> = cur
            .iter()
            .flat_map(|&s| space.edges[s].iter())
            .filter(|(t, _)| label(*t).as_deref() == Some(a.as_str()))
            .map(|&(_, d)| d)
            .collect();
        cur = close(next);
        if cur.is_empty() {
            return false;
        }
    }
    cur.iter().any(|&s| space.markings[s] == fin)
}

const TYPE_POOL: [&str; 8] = [
    "workflow:order",
    "workflow:item",
    "workflow:res:clerk",
    "workflow:sp:packing",
    "workflow:lc:ship",
    "workflow:dev:scanner",
    "workflow:invoice",
    "workflow:sp:billing",
];

/// A random multi-type log: up to five workflow types, 50 objects and 500
/// events. Some events relate a second object of another type.
pub fn random_log(rng: &mut StdRng) -> EventLog {
    let k = rng.random_range(1..=5);
    let mut pool = TYPE_POOL.to_vec();
    pool.shuffle(rng);
    let types: Vec<&str> = pool[..k].to_vec();
    let alphabets: Vec<Vec<String>> = types
        .iter()
        .enumerate()
        .map(|(i, _)| (0..rng.random_range(2..=5)).map(|j| format!("act{i}_{j}")).collect())
        .collect();
    let per_type = (50 / k).min(10);
    let mut objects = Map::new();
    let mut queues: Vec<(usize, String, Vec<String>)> = Vec::new();
    for (i, t) in types.iter().enumerate() {
        for o in 0..rng.random_range(1..=per_type) {
            let oid = format!("o{i}_{o}");
            objects.insert(oid.clone(), json!({"type": t}));
            let len = rng.random_range(1..=9);
            let trace = (0..len).map(|_| alphabets[i].choose(rng).unwrap().clone()).collect();
            queues.push((i, oid, trace));
        }
    }
    for q in &mut queues {
        q.2.reverse();
    }
    let mut events = Vec::new();
    let mut clock = 0u32;
    while events.len() < 500 {
        let live: Vec<usize> = (0..queues.len()).filter(|&q| !queues[q].2.is_empty()).collect();
        let Some(&q) = live.choose(rng) else { break };
        let act = queues[q].2.pop().unwrap();
        let (ti, oid) = (queues[q].0, queues[q].1.clone());
        let mut rel = Map::new();
        rel.insert(types[ti].to_string(), json!([oid]));
        if k > 1 && rng.random_bool(0.2) {
            let other: Vec<&(usize, String, Vec<String>)> = queues.iter().filter(|o| o.0 != ti).collect();
            if let Some(o) = other.choose(rng) {
                rel.insert(types[o.0].to_string(), json!([o.1.clone()]));
            }
        }
        events.push(json!({
            "id": format!("e{}", events.len()),
            "activity": act,
            "timestamp": format!("2024-01-01T{:02}:{:02}:{:02}Z", clock / 3600, clock / 60 % 60, clock % 60),
            "relations": Value::Object(rel),
        }));
        clock += 1;
    }
    let doc = json!({"objects": Value::Object(objects), "events": events});
    parse_log(doc.to_string().as_bytes(), LogFormat::OcelJson).unwrap()
}
