use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{AcceptingOcpn, Arc, TransitionId};
use crate::ocel::{EventId, EventLog, ObjectId, ObjectType};

/// Cap on the markings explored by one silent closure.
const CLOSURE_BOUND: usize = 200_000;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayResult {
    pub fits: bool,
    pub et: BTreeMap<EventId, TransitionId>,
    pub covered: BTreeSet<TransitionId>,
    pub diagnostics: Vec<(EventId, String)>,
}

type Local = Vec<u16>;

/// The subnet of one object type with dense local place numbering.
struct TypeNet {
    init: Local,
    fin: Local,
    /// transition id → (local preset, local postset)
    moves: HashMap<TransitionId, (Vec<usize>, Vec<usize>)>,
    silent: Vec<TransitionId>,
}

impl TypeNet {
    fn new(net: &AcceptingOcpn, otype: &ObjectType) -> Self {
        let places: Vec<_> = net.places().filter(|p| &p.otype == otype).map(|p| &p.id).collect();
        let ix: HashMap<_, _> = places.iter().enumerate().map(|(i, p)| (*p, i)).collect();
        let mut moves: HashMap<TransitionId, (Vec<usize>, Vec<usize>)> = HashMap::new();
        for a in net.arcs() {
            let Some(&p) = ix.get(a.place()) else { continue };
            let entry = moves.entry(a.transition().clone()).or_default();
            match a {
                Arc::Input { .. } => entry.0.push(p),
                Arc::Output { .. } => entry.1.push(p),
            }
        }
        let mut silent: Vec<TransitionId> = moves
            .keys()
            .filter(|t| net.transition(t).is_some_and(|t| t.is_silent()))
            .cloned()
            .collect();
        silent.sort();
        let vec = |m: &super::Marking| -> Local {
            places.iter().map(|p| m.get(*p).copied().unwrap_or(0) as u16).collect()
        };
        TypeNet {
            init: vec(net.initial_marking()),
            fin: vec(net.final_marking()),
            moves,
            silent,
        }
    }

    fn step(&self, m: &Local, t: &TransitionId) -> Option<Local> {
        let (pre, post) = self.moves.get(t)?;
        if pre.iter().any(|&p| m[p] == 0) {
            return None;
        }
        let mut n = m.clone();
        for &p in pre {
            n[p] -= 1;
        }
        for &p in post {
            n[p] = n[p].saturating_add(1);
        }
        Some(n)
    }

    /// All markings reachable from `set` through silent transitions.
    fn closure(&self, set: &HashSet<Local>) -> Option<HashSet<Local>> {
        let mut seen = set.clone();
        let mut queue: VecDeque<Local> = set.iter().cloned().collect();
        while let Some(m) = queue.pop_front() {
            for t in &self.silent {
                if let Some(n) = self.step(&m, t) {
                    if seen.insert(n.clone()) {
                        if seen.len() > CLOSURE_BOUND {
                            return None;
                        }
                        queue.push_back(n);
                    }
                }
            }
        }
        Some(seen)
    }
}

/// Token replay of a workflow-projected log.
///
/// Every object plays its own token game on the subnet of its type. An
/// event is mapped to the lowest labeled transition carrying its activity
/// that every related object can fire, possibly after silent moves.
/// Misfits are collected as diagnostics, never raised.
pub fn replay(log: &EventLog, net: &AcceptingOcpn) -> ReplayResult {
    let mut res = ReplayResult::default();
    let mut nets: BTreeMap<ObjectType, TypeNet> = BTreeMap::new();
    let mut state: HashMap<ObjectId, HashSet<Local>> = HashMap::new();
    let mut broken: HashSet<ObjectId> = HashSet::new();

    for ev in log.events() {
        let mut candidates: Vec<&TransitionId> =
            net.transitions_labeled(&ev.activity).map(|t| &t.id).collect();
        candidates.sort();
        if candidates.is_empty() {
            res.diagnostics
                .push((ev.id.clone(), format!("no transition labeled `{}`", ev.activity)));
            continue;
        }
        let mut next: Vec<(ObjectId, HashSet<Local>)> = Vec::new();
        let mut chosen = None;
        let mut reason = String::new();
        'cand: for t in candidates {
            next.clear();
            for (otype, oid) in ev.workflow_objects() {
                let tn = nets
                    .entry(otype.clone())
                    .or_insert_with(|| TypeNet::new(net, otype));
                if !tn.moves.contains_key(t) {
                    reason = format!("transition {t} has no place of type `{otype}`");
                    continue 'cand;
                }
                let cur = state
                    .entry(oid.clone())
                    .or_insert_with(|| HashSet::from([tn.init.clone()]));
                let Some(reach) = tn.closure(cur) else {
                    reason = format!("silent closure of object {oid} exceeds {CLOSURE_BOUND} markings");
                    continue 'cand;
                };
                let fired: HashSet<Local> = reach.iter().filter_map(|m| tn.step(m, t)).collect();
                if fired.is_empty() {
                    reason = format!("transition {t} is not enabled for object {oid}");
                    continue 'cand;
                }
                next.push((oid.clone(), fired));
            }
            chosen = Some(t.clone());
            break;
        }
        match chosen {
            Some(t) => {
                for (oid, set) in next.drain(..) {
                    state.insert(oid, set);
                }
                res.covered.insert(t.clone());
                res.et.insert(ev.id.clone(), t);
            }
            None => {
                for (_, oid) in ev.workflow_objects() {
                    broken.insert(oid.clone());
                }
                res.diagnostics.push((ev.id.clone(), reason));
            }
        }
    }

    let mut last_event: HashMap<&ObjectId, &EventId> = HashMap::new();
    for ev in log.events() {
        for (_, oid) in ev.workflow_objects() {
            last_event.insert(oid, &ev.id);
        }
    }
    let mut finals: Vec<(&ObjectId, &EventId)> = last_event.into_iter().collect();
    finals.sort();
    for (oid, eid) in finals {
        if broken.contains(oid) {
            continue;
        }
        let Some(otype) = log.object_type(oid) else { continue };
        let tn = &nets[otype];
        let done = state
            .get(oid)
            .and_then(|s| tn.closure(s))
            .is_some_and(|s| s.contains(&tn.fin));
        if !done {
            res.diagnostics.push((
                eid.clone(),
                format!("object {oid} does not reach the final marking"),
            ));
        }
    }
    res.fits = res.diagnostics.is_empty() && res.et.len() == log.len();
    res
}
