use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ocel::{AbstractionKind, ObjectType};
use crate::ocpn::{AcceptingOcpn, Arc, PlaceId, Transition, TransitionId};

/// A (possibly abstracted) net together with the map from the originally
/// discovered transitions to the transitions that currently stand for them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Model {
    net: AcceptingOcpn,
    /// original id → current id; `None` once removed.
    provenance: BTreeMap<TransitionId, Option<TransitionId>>,
    /// Aggregate transitions and the abstraction that created them.
    aggregates: BTreeMap<TransitionId, AbstractionKind>,
}

impl Model {
    pub fn original(net: &AcceptingOcpn) -> Self {
        Model {
            provenance: net
                .transitions()
                .map(|t| (t.id.clone(), Some(t.id.clone())))
                .collect(),
            net: net.clone(),
            aggregates: BTreeMap::new(),
        }
    }

    pub fn net(&self) -> &AcceptingOcpn {
        &self.net
    }

    pub fn into_net(self) -> AcceptingOcpn {
        self.net
    }

    /// Current transition standing for an original one.
    pub fn current(&self, original: &TransitionId) -> Option<&TransitionId> {
        self.provenance.get(original).and_then(Option::as_ref)
    }

    /// Original transitions a current transition stands for.
    pub fn originals(&self, current: &TransitionId) -> BTreeSet<TransitionId> {
        self.provenance
            .iter()
            .filter(|(_, c)| c.as_ref() == Some(current))
            .map(|(o, _)| o.clone())
            .collect()
    }

    pub fn aggregate_kind(&self, current: &TransitionId) -> Option<AbstractionKind> {
        self.aggregates.get(current).copied()
    }

    /// Removes every place of `target`. Transitions left without places
    /// disappear; the others get `target` as a reference when `add_ref`.
    pub(crate) fn remove_type(&self, target: &ObjectType, add_ref: bool) -> Model {
        let mut m = self.clone();
        let places: BTreeSet<PlaceId> = self
            .net
            .places()
            .filter(|p| &p.otype == target)
            .map(|p| p.id.clone())
            .collect();
        let touched: BTreeSet<TransitionId> = places
            .iter()
            .flat_map(|p| self.net.adjacent_transitions(p))
            .collect();
        m.net.remove_nodes(&places, &BTreeSet::new());
        let mut gone = BTreeSet::new();
        for t in &touched {
            if m.net.transition_types(t).is_empty() {
                gone.insert(t.clone());
            } else if add_ref {
                m.net.transition_mut(t).expect("touched transition").refs.insert(target.clone());
            }
        }
        m.drop_transitions(&gone);
        m
    }

    fn drop_transitions(&mut self, gone: &BTreeSet<TransitionId>) {
        self.net.remove_nodes(&BTreeSet::new(), gone);
        for c in self.provenance.values_mut() {
            if c.as_ref().is_some_and(|c| gone.contains(c)) {
                *c = None;
            }
        }
        self.aggregates.retain(|t, _| !gone.contains(t));
    }

    /// Places adjacent only to `members` and not marked initially or finally.
    pub(crate) fn internal_places(&self, members: &BTreeSet<TransitionId>) -> BTreeSet<PlaceId> {
        let init = self.net.initial_marking();
        let fin = self.net.final_marking();
        members
            .iter()
            .flat_map(|t| self.net.preset(t).into_iter().chain(self.net.postset(t)))
            .filter(|p| !init.contains_key(p) && !fin.contains_key(p))
            .filter(|p| self.net.adjacent_transitions(p).is_subset(members))
            .collect()
    }

    /// Replaces `members` and their internal places by `agg`, wired to the
    /// remaining pre- and post-places. Without remaining places the members
    /// are simply dropped.
    pub(crate) fn contract(
        &self,
        members: &BTreeSet<TransitionId>,
        mut agg: Transition,
        kind: AbstractionKind,
    ) -> Model {
        let mut m = self.clone();
        let internal = self.internal_places(members);
        let mut pre: BTreeMap<PlaceId, bool> = BTreeMap::new();
        let mut post: BTreeMap<PlaceId, bool> = BTreeMap::new();
        for a in self.net.arcs().filter(|a| members.contains(a.transition())) {
            if internal.contains(a.place()) {
                continue;
            }
            let side = match a {
                Arc::Input { .. } => &mut pre,
                Arc::Output { .. } => &mut post,
            };
            *side.entry(a.place().clone()).or_default() |= self.net.is_variable(a);
        }
        for t in members {
            if let Some(t) = self.net.transition(t) {
                agg.refs.extend(t.refs.iter().cloned());
            }
        }
        m.net.remove_nodes(&internal, &BTreeSet::new());
        m.drop_transitions(members);
        if pre.is_empty() && post.is_empty() {
            return m;
        }
        let id = m.net.add_transition(agg).expect("fresh aggregate id");
        for (p, var) in pre {
            m.net.add_arc(Arc::input(&p, &id), var).expect("surviving place");
        }
        for (p, var) in post {
            m.net.add_arc(Arc::output(&id, &p), var).expect("surviving place");
        }
        for (o, c) in self.provenance.iter() {
            if c.as_ref().is_some_and(|c| members.contains(c)) {
                m.provenance.insert(o.clone(), Some(id.clone()));
            }
        }
        m.aggregates.insert(id, kind);
        m
    }
}
