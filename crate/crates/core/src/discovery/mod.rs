//! Object-centric discovery: one process tree per workflow type, compiled
//! to typed workflow nets and merged by fusing equally labeled transitions.

mod compile;
mod im;
mod tree;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ocel::{EventId, EventLog, ObjectType};
use crate::ocpn::{replay, AcceptingOcpn, Arc, ReplayResult, TransitionId};

pub use compile::compile_tree;
pub(crate) use compile::subtree_transitions;
pub use im::mine_tree;
pub use tree::{Operator, ProcessTree, TreeNode};

/// Discovery result for one workflow type. `net` uses the ids of the
/// merged net, so it equals the merged net's projection onto `otype`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypedModel {
    pub otype: ObjectType,
    pub tree: ProcessTree,
    pub net: AcceptingOcpn,
    /// Preorder node id → transitions that node generated itself.
    pub node_transitions: BTreeMap<usize, Vec<TransitionId>>,
}

impl TypedModel {
    /// All transitions generated within the subtree rooted at `node`.
    pub fn subtree_transitions(&self, node: usize) -> BTreeSet<TransitionId> {
        subtree_transitions(&self.tree, &self.node_transitions, node)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Discovery {
    pub net: AcceptingOcpn,
    pub models: BTreeMap<ObjectType, TypedModel>,
    /// Replay of the workflow-projected log on `net`; always fitting.
    pub replay: ReplayResult,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiscoveryError {
    #[error("the log has no events")]
    EmptyLog,
    #[error("discovered net does not fit the log ({} misfit(s), first: {})", .diagnostics.len(), first(.diagnostics))]
    Unfit { diagnostics: Vec<(EventId, String)> },
    #[error("transitions never fired by the log: {transitions:?}")]
    Uncovered { transitions: Vec<TransitionId> },
}

fn first(d: &[(EventId, String)]) -> String {
    d.first().map(|(e, m)| format!("{e}: {m}")).unwrap_or_default()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiscoveryOptions {
    /// Mine the per-type trees on the rayon pool. Ignored without the
    /// `parallel` feature.
    pub parallel: bool,
}

impl Default for DiscoveryOptions {
    fn default() -> Self {
        DiscoveryOptions { parallel: true }
    }
}

/// One activity sequence per object of `otype`, in log order. Objects
/// without events are skipped with a warning.
pub fn extract_traces(log: &EventLog, otype: &ObjectType) -> Vec<Vec<String>> {
    let mut traces: BTreeMap<_, Vec<String>> = log
        .objects()
        .iter()
        .filter(|(_, t)| *t == otype)
        .map(|(o, _)| (o.clone(), Vec::new()))
        .collect();
    for ev in log.events() {
        for oid in ev.wfomap.get(otype).into_iter().flatten() {
            if let Some(t) = traces.get_mut(oid) {
                t.push(ev.activity.clone());
            }
        }
    }
    traces
        .into_iter()
        .filter_map(|(o, t)| {
            if t.is_empty() {
                log::warn!("object {o} of type {otype} has no events; skipped");
                None
            } else {
                Some(t)
            }
        })
        .collect()
}

fn mine_all(log: &EventLog, types: &[ObjectType], opts: DiscoveryOptions) -> Vec<ProcessTree> {
    let one = |t: &ObjectType| mine_tree(&extract_traces(log, t));
    #[cfg(feature = "parallel")]
    if opts.parallel {
        use rayon::prelude::*;
        return types.par_iter().map(one).collect();
    }
    let _ = opts;
    types.iter().map(one).collect()
}

pub fn discover(log: &EventLog) -> Result<Discovery, DiscoveryError> {
    discover_with(log, DiscoveryOptions::default())
}

pub fn discover_with(log: &EventLog, opts: DiscoveryOptions) -> Result<Discovery, DiscoveryError> {
    let log = log.project_workflow();
    if log.is_empty() {
        return Err(DiscoveryError::EmptyLog);
    }
    let types: Vec<ObjectType> = log
        .workflow_types()
        .into_iter()
        .filter(|t| !extract_traces(&log, t).is_empty())
        .collect();
    let trees = mine_all(&log, &types, opts);

    // (type, activity) pairs where some event relates several objects
    let mut variable: BTreeSet<(ObjectType, String)> = BTreeSet::new();
    for ev in log.events() {
        for (t, ids) in &ev.wfomap {
            if ids.len() > 1 {
                variable.insert((t.clone(), ev.activity.clone()));
            }
        }
    }
    let is_var = |net: &AcceptingOcpn, a: &Arc| {
        let p = net.place(a.place()).expect("arc endpoint");
        let label = net.transition(a.transition()).and_then(|t| t.label.clone());
        label.is_some_and(|l| variable.contains(&(p.otype.clone(), l)))
    };

    let mut alloc = compile::IdAlloc::default();
    let mut net = AcceptingOcpn::new();
    let mut models = BTreeMap::new();
    for (otype, tree) in types.into_iter().zip(trees) {
        let c = compile::compile_with(&tree, &otype, &mut alloc);
        let mut typed = c.net;
        let vars: Vec<Arc> = typed.arcs().filter(|a| is_var(&typed, a)).cloned().collect();
        for a in &vars {
            typed.set_variable(a);
        }
        for p in typed.places() {
            net.add_place(p.id.as_str(), &p.otype).expect("fresh place id");
        }
        for t in typed.transitions() {
            if net.transition(&t.id).is_none() {
                net.add_transition(t.clone()).expect("checked absent");
            }
        }
        for a in typed.arcs() {
            net.add_arc(a.clone(), typed.is_variable(a)).expect("endpoints added");
        }
        for (p, n) in typed.initial_marking() {
            net.mark_initial(p, *n).expect("place added");
        }
        for (p, n) in typed.final_marking() {
            net.mark_final(p, *n).expect("place added");
        }
        models.insert(
            otype.clone(),
            TypedModel {
                otype,
                tree,
                net: typed,
                node_transitions: c.node_transitions,
            },
        );
    }

    let replay = replay(&log, &net);
    if !replay.fits {
        return Err(DiscoveryError::Unfit {
            diagnostics: replay.diagnostics,
        });
    }
    let uncovered: Vec<TransitionId> = net
        .transitions()
        .filter(|t| !t.is_silent() && !replay.covered.contains(&t.id))
        .map(|t| t.id.clone())
        .collect();
    if !uncovered.is_empty() {
        return Err(DiscoveryError::Uncovered {
            transitions: uncovered,
        });
    }
    Ok(Discovery {
        net,
        models,
        replay,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::ocel::{parse_log, LogFormat};
    use crate::ocpn::{check_soundness, isomorphic};

    fn ot(n: &str) -> ObjectType {
        ObjectType::parse(n).unwrap()
    }

    #[test]
    fn client_trace_of_the_fixture() {
        let log = fixtures::bank();
        assert_eq!(
            extract_traces(&log, &ot("workflow:client")),
            vec![vec![
                "ask for customer needs".to_string(),
                "inform client".into(),
                "check type of account to be created".into()
            ]]
        );
        let lc = extract_traces(&log, &ot("workflow:lc:finalize account opening"));
        assert_eq!(lc.len(), 1);
        let want: Vec<String> = ["start", "on hold", "continue", "end"]
            .iter()
            .map(|s| format!("finalize account opening - {s}"))
            .collect();
        assert_eq!(lc[0], want);
    }

    #[test]
    fn fixture_discovery_fits_and_numbers_bank_first() {
        let d = discover(&fixtures::bank()).unwrap();
        assert!(d.replay.fits);
        assert_eq!(d.net.size().elements, 36);
        let bank = &d.models[&ot("workflow:bank")];
        assert!(matches!(bank.tree, ProcessTree::Seq(ref c) if c.len() == 13));
        let t5 = d.net.transition(&"t5".into()).unwrap();
        assert_eq!(t5.label.as_deref(), Some("click open account"));
        assert_eq!(d.replay.et[&EventId::from("260f5")], TransitionId::from("t5"));
        for (t, m) in &d.models {
            assert_eq!(&d.net.project_type(t).unwrap(), &m.net, "{t}");
            assert_eq!(check_soundness(&m.net), Ok(true), "{t}");
        }
    }

    #[test]
    fn single_type_merge_is_identity() {
        let src = br#"{"objects": {"o": {"type": "workflow:a"}, "q": {"type": "workflow:a"}}, "events": [
            {"id": "1", "activity": "x", "timestamp": "2024-01-01T00:00:00Z", "relations": {"workflow:a": ["o"]}},
            {"id": "2", "activity": "y", "timestamp": "2024-01-01T00:00:01Z", "relations": {"workflow:a": ["o"]}},
            {"id": "3", "activity": "x", "timestamp": "2024-01-01T00:00:02Z", "relations": {"workflow:a": ["q"]}},
            {"id": "4", "activity": "z", "timestamp": "2024-01-01T00:00:03Z", "relations": {"workflow:a": ["q"]}}]}"#;
        let log = parse_log(src, LogFormat::OcelJson).unwrap();
        let d = discover(&log).unwrap();
        let tree = mine_tree(&extract_traces(&log, &ot("workflow:a")));
        assert!(isomorphic(&d.net, &compile_tree(&tree, &ot("workflow:a"))));
    }

    #[test]
    fn variable_arcs_follow_multi_object_events() {
        let src = br#"{"objects": {"b1": {"type": "workflow:bank"}, "b2": {"type": "workflow:bank"}, "c": {"type": "workflow:client"}}, "events": [
            {"id": "1", "activity": "open", "timestamp": "2024-01-01T00:00:00Z", "relations": {"workflow:bank": ["b1"], "workflow:client": ["c"]}},
            {"id": "2", "activity": "merge", "timestamp": "2024-01-01T00:00:01Z", "relations": {"workflow:bank": ["b1", "b2"], "workflow:client": ["c"]}},
            {"id": "3", "activity": "open", "timestamp": "2024-01-01T00:00:02Z", "relations": {"workflow:bank": ["b2"]}}]}"#;
        let d = discover(&parse_log(src, LogFormat::OcelJson).unwrap()).unwrap();
        let merge = d.net.transitions_labeled("merge").next().unwrap().id.clone();
        for a in d.net.arcs().filter(|a| *a.transition() == merge) {
            let bank = d.net.place(a.place()).unwrap().otype == ot("workflow:bank");
            assert_eq!(d.net.is_variable(a), bank);
        }
        assert_eq!(d.net.transitions_labeled("open").count(), 1);
    }

    #[test]
    fn parallel_and_sequential_mining_agree() {
        let log = fixtures::bank();
        let a = discover_with(&log, DiscoveryOptions { parallel: true }).unwrap();
        let b = discover_with(&log, DiscoveryOptions { parallel: false }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_log_is_rejected() {
        assert_eq!(discover(&EventLog::empty()), Err(DiscoveryError::EmptyLog));
    }
}
