//! Accepting object-centric Petri nets: typed places, labeled (or silent)
//! transitions, variable arcs, initial and final markings.

mod iso;
mod render;
mod replay;
mod soundness;
mod statespace;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ocel::ObjectType;

pub use iso::isomorphic;
pub use render::{to_dot, GraphEdge, GraphMetrics, GraphNode, ModelGraphPayload, NodeKind};
pub use replay::{replay, ReplayResult};
pub use soundness::{check_soundness, check_soundness_bounded, SoundnessError, DEFAULT_STATE_BOUND};
pub use statespace::{explore, StateSpace, StateSpaceExceeded};

/// Compares ids so that embedded numbers sort numerically (`t2` < `t10`).
fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (mut x, mut y) = (a.as_bytes(), b.as_bytes());
    loop {
        match (x.first(), y.first()) {
            (None, None) => return Ordering::Equal,
            (None, _) => return Ordering::Less,
            (_, None) => return Ordering::Greater,
            (Some(c), Some(d)) if c.is_ascii_digit() && d.is_ascii_digit() => {
                let xn = x.iter().take_while(|c| c.is_ascii_digit()).count();
                let yn = y.iter().take_while(|c| c.is_ascii_digit()).count();
                let (xd, yd) = (&x[..xn], &y[..yn]);
                let xs = xd.iter().skip_while(|&&c| c == b'0').count();
                let ys = yd.iter().skip_while(|&&c| c == b'0').count();
                let ord = xs
                    .cmp(&ys)
                    .then_with(|| xd[xn - xs..].cmp(&yd[yn - ys..]))
                    .then_with(|| xn.cmp(&yn));
                if ord != Ordering::Equal {
                    return ord;
                }
                x = &x[xn..];
                y = &y[yn..];
            }
            (Some(c), Some(d)) => {
                if c != d {
                    return c.cmp(d);
                }
                x = &x[1..];
                y = &y[1..];
            }
        }
    }
}

macro_rules! node_id {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                $name(s.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl PartialOrd for $name {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }

        impl Ord for $name {
            fn cmp(&self, other: &Self) -> Ordering {
                natural_cmp(&self.0, &other.0)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_string())
            }
        }
    };
}

node_id!(PlaceId);
node_id!(TransitionId);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Place {
    pub id: PlaceId,
    pub otype: ObjectType,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub id: TransitionId,
    /// `None` for silent transitions.
    pub label: Option<String>,
    /// Completely aggregated workflow types this transition used to
    /// interact with, rendered as `↔ <name>`.
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub refs: BTreeSet<ObjectType>,
    /// Original activity labels aggregated into this transition, in
    /// control-flow order. Empty for discovered transitions.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub members: Vec<String>,
}

impl Transition {
    pub fn labeled(id: impl Into<String>, label: impl Into<String>) -> Self {
        Transition {
            id: TransitionId(id.into()),
            label: Some(label.into()),
            refs: BTreeSet::new(),
            members: Vec::new(),
        }
    }

    pub fn silent(id: impl Into<String>) -> Self {
        Transition {
            id: TransitionId(id.into()),
            label: None,
            refs: BTreeSet::new(),
            members: Vec::new(),
        }
    }

    pub fn is_silent(&self) -> bool {
        self.label.is_none()
    }

    /// Label followed by the `↔` references, one per line.
    pub fn display_label(&self) -> String {
        let mut s = self.label.clone().unwrap_or_else(|| "τ".to_string());
        for r in &self.refs {
            s.push_str("\n↔ ");
            s.push_str(r.short_name());
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "dir", rename_all = "snake_case")]
pub enum Arc {
    Input {
        place: PlaceId,
        transition: TransitionId,
    },
    Output {
        transition: TransitionId,
        place: PlaceId,
    },
}

impl Arc {
    pub fn input(place: &PlaceId, transition: &TransitionId) -> Arc {
        Arc::Input {
            place: place.clone(),
            transition: transition.clone(),
        }
    }

    pub fn output(transition: &TransitionId, place: &PlaceId) -> Arc {
        Arc::Output {
            transition: transition.clone(),
            place: place.clone(),
        }
    }

    pub fn place(&self) -> &PlaceId {
        match self {
            Arc::Input { place, .. } | Arc::Output { place, .. } => place,
        }
    }

    pub fn transition(&self) -> &TransitionId {
        match self {
            Arc::Input { transition, .. } | Arc::Output { transition, .. } => transition,
        }
    }
}

pub type Marking = BTreeMap<PlaceId, u32>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetSize {
    /// `|P| + |T|`.
    pub elements: usize,
    pub arcs: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetError {
    #[error("unknown place `{0}`")]
    UnknownPlace(PlaceId),
    #[error("unknown transition `{0}`")]
    UnknownTransition(TransitionId),
    #[error("duplicate node id `{0}`")]
    Duplicate(String),
    #[error("no place of type `{0}`")]
    UnknownType(String),
    #[error("places must have workflow types, got `{0}`")]
    NotWorkflowType(String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcceptingOcpn {
    places: BTreeMap<PlaceId, Place>,
    transitions: BTreeMap<TransitionId, Transition>,
    arcs: BTreeSet<Arc>,
    variable_arcs: BTreeSet<Arc>,
    initial: Marking,
    #[serde(rename = "final")]
    final_marking: Marking,
}

impl AcceptingOcpn {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_place(&mut self, id: impl Into<String>, otype: &ObjectType) -> Result<PlaceId, NetError> {
        let id = PlaceId(id.into());
        if !otype.is_workflow() {
            return Err(NetError::NotWorkflowType(otype.name().to_string()));
        }
        if self.places.contains_key(&id) {
            return Err(NetError::Duplicate(id.0));
        }
        self.places.insert(
            id.clone(),
            Place {
                id: id.clone(),
                otype: otype.clone(),
            },
        );
        Ok(id)
    }

    pub fn add_transition(&mut self, t: Transition) -> Result<TransitionId, NetError> {
        if self.transitions.contains_key(&t.id) {
            return Err(NetError::Duplicate(t.id.0));
        }
        let id = t.id.clone();
        self.transitions.insert(id.clone(), t);
        Ok(id)
    }

    pub fn add_arc(&mut self, arc: Arc, variable: bool) -> Result<(), NetError> {
        if !self.places.contains_key(arc.place()) {
            return Err(NetError::UnknownPlace(arc.place().clone()));
        }
        if !self.transitions.contains_key(arc.transition()) {
            return Err(NetError::UnknownTransition(arc.transition().clone()));
        }
        if variable {
            self.variable_arcs.insert(arc.clone());
        }
        self.arcs.insert(arc);
        Ok(())
    }

    pub fn add_input(&mut self, place: &PlaceId, t: &TransitionId) -> Result<(), NetError> {
        self.add_arc(Arc::input(place, t), false)
    }

    pub fn add_output(&mut self, t: &TransitionId, place: &PlaceId) -> Result<(), NetError> {
        self.add_arc(Arc::output(t, place), false)
    }

    pub fn set_variable(&mut self, arc: &Arc) {
        if self.arcs.contains(arc) {
            self.variable_arcs.insert(arc.clone());
        }
    }

    pub fn mark_initial(&mut self, place: &PlaceId, tokens: u32) -> Result<(), NetError> {
        if !self.places.contains_key(place) {
            return Err(NetError::UnknownPlace(place.clone()));
        }
        *self.initial.entry(place.clone()).or_default() += tokens;
        Ok(())
    }

    pub fn mark_final(&mut self, place: &PlaceId, tokens: u32) -> Result<(), NetError> {
        if !self.places.contains_key(place) {
            return Err(NetError::UnknownPlace(place.clone()));
        }
        *self.final_marking.entry(place.clone()).or_default() += tokens;
        Ok(())
    }

    pub fn places(&self) -> impl Iterator<Item = &Place> {
        self.places.values()
    }

    pub fn place(&self, id: &PlaceId) -> Option<&Place> {
        self.places.get(id)
    }

    pub fn transitions(&self) -> impl Iterator<Item = &Transition> {
        self.transitions.values()
    }

    pub fn transition(&self, id: &TransitionId) -> Option<&Transition> {
        self.transitions.get(id)
    }

    pub fn transition_mut(&mut self, id: &TransitionId) -> Option<&mut Transition> {
        self.transitions.get_mut(id)
    }

    pub fn arcs(&self) -> impl Iterator<Item = &Arc> {
        self.arcs.iter()
    }

    pub fn is_variable(&self, arc: &Arc) -> bool {
        self.variable_arcs.contains(arc)
    }

    pub fn initial_marking(&self) -> &Marking {
        &self.initial
    }

    pub fn final_marking(&self) -> &Marking {
        &self.final_marking
    }

    pub fn place_count(&self) -> usize {
        self.places.len()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn size(&self) -> NetSize {
        NetSize {
            elements: self.places.len() + self.transitions.len(),
            arcs: self.arcs.len(),
        }
    }

    pub fn preset(&self, t: &TransitionId) -> BTreeSet<PlaceId> {
        self.arcs
            .iter()
            .filter_map(|a| match a {
                Arc::Input { place, transition } if transition == t => Some(place.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn postset(&self, t: &TransitionId) -> BTreeSet<PlaceId> {
        self.arcs
            .iter()
            .filter_map(|a| match a {
                Arc::Output { transition, place } if transition == t => Some(place.clone()),
                _ => None,
            })
            .collect()
    }

    /// Transitions adjacent to a place, in either direction.
    pub fn adjacent_transitions(&self, p: &PlaceId) -> BTreeSet<TransitionId> {
        self.arcs
            .iter()
            .filter(|a| a.place() == p)
            .map(|a| a.transition().clone())
            .collect()
    }

    /// Object types of the places adjacent to `t`.
    pub fn transition_types(&self, t: &TransitionId) -> BTreeSet<ObjectType> {
        self.arcs
            .iter()
            .filter(|a| a.transition() == t)
            .filter_map(|a| self.places.get(a.place()))
            .map(|p| p.otype.clone())
            .collect()
    }

    /// Workflow types that still have at least one place.
    pub fn object_types(&self) -> BTreeSet<ObjectType> {
        self.places.values().map(|p| p.otype.clone()).collect()
    }

    /// `AN↾ot`: places of `otype`, transitions adjacent to them, the arcs
    /// between the two, and markings restricted to the kept places.
    pub fn project_type(&self, otype: &ObjectType) -> Result<AcceptingOcpn, NetError> {
        let places: BTreeMap<PlaceId, Place> = self
            .places
            .iter()
            .filter(|(_, p)| &p.otype == otype)
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        if places.is_empty() {
            return Err(NetError::UnknownType(otype.name().to_string()));
        }
        let arcs: BTreeSet<Arc> = self
            .arcs
            .iter()
            .filter(|a| places.contains_key(a.place()))
            .cloned()
            .collect();
        let kept: BTreeSet<&TransitionId> = arcs.iter().map(|a| a.transition()).collect();
        let transitions = self
            .transitions
            .iter()
            .filter(|(k, _)| kept.contains(k))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        let restrict = |m: &Marking| -> Marking {
            m.iter()
                .filter(|(p, _)| places.contains_key(*p))
                .map(|(p, n)| (p.clone(), *n))
                .collect()
        };
        Ok(AcceptingOcpn {
            variable_arcs: self
                .variable_arcs
                .iter()
                .filter(|a| arcs.contains(*a))
                .cloned()
                .collect(),
            initial: restrict(&self.initial),
            final_marking: restrict(&self.final_marking),
            places,
            transitions,
            arcs,
        })
    }

    /// Removes places and transitions (with all incident arcs and marking
    /// entries).
    pub fn remove_nodes(&mut self, places: &BTreeSet<PlaceId>, transitions: &BTreeSet<TransitionId>) {
        for p in places {
            self.places.remove(p);
            self.initial.remove(p);
            self.final_marking.remove(p);
        }
        for t in transitions {
            self.transitions.remove(t);
        }
        let keep = |a: &Arc| !places.contains(a.place()) && !transitions.contains(a.transition());
        self.arcs.retain(keep);
        self.variable_arcs.retain(keep);
    }

    /// Checks that arcs and markings only mention existing nodes and that
    /// variable arcs are arcs.
    pub fn validate(&self) -> Result<(), NetError> {
        for a in &self.arcs {
            if !self.places.contains_key(a.place()) {
                return Err(NetError::UnknownPlace(a.place().clone()));
            }
            if !self.transitions.contains_key(a.transition()) {
                return Err(NetError::UnknownTransition(a.transition().clone()));
            }
        }
        for a in &self.variable_arcs {
            if !self.arcs.contains(a) {
                return Err(NetError::UnknownPlace(a.place().clone()));
            }
        }
        for p in self.initial.keys().chain(self.final_marking.keys()) {
            if !self.places.contains_key(p) {
                return Err(NetError::UnknownPlace(p.clone()));
            }
        }
        Ok(())
    }

    /// Labeled transitions whose label equals `label`.
    pub fn transitions_labeled<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a Transition> {
        self.transitions
            .values()
            .filter(move |t| t.label.as_deref() == Some(label))
    }
}
