//! Object-centric event logs with abstraction objects and the abstraction
//! history, plus the log transitions that record (and retract) an applied
//! model abstraction.
//!
//! Workflow objects are never modified once a log is built. Abstractions
//! only ever add or remove abstraction objects in the events' `aomap` and
//! entries of the history object, so the workflow projection of a log is
//! stable under every transition defined here.

mod ids;
mod json;
mod types;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

pub use ids::IdGenerator;
pub use json::{parse_log, serialize_log, LogFormat};
pub use types::{
    AbstractionHistory, AbstractionKind, Event, EventId, ObjectId, ObjectMap, ObjectType,
    TypeClass, HISTORY_TYPE,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("malformed document at line {line}, column {column}: {message}")]
    Schema {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("object type `{0}` is neither a workflow, abstraction nor history type")]
    UnclassifiedType(String),
    #[error("abstraction type `{0}` does not end in a known `$` suffix")]
    UnknownAbstractionSuffix(String),
    #[error("duplicate event id `{0}`")]
    DuplicateEvent(EventId),
    #[error("event `{event}` has invalid timestamp `{value}`")]
    Timestamp { event: EventId, value: String },
    #[error("event `{event}` refers to undeclared object `{object}`")]
    UnknownObject { event: EventId, object: ObjectId },
    #[error("object `{object}` is declared as `{declared}` but related as `{used}`")]
    InconsistentType {
        object: ObjectId,
        declared: String,
        used: String,
    },
    #[error("event `{0}` relates to no workflow object")]
    NoWorkflowObject(EventId),
    #[error("event `{0}` relates to the history object")]
    HistoryRelated(EventId),
    #[error("more than one history object (`{0}` and `{1}`)")]
    DuplicateHistory(ObjectId, ObjectId),
    #[error("history entry `{0}` appears more than once")]
    DuplicateHistoryEntry(ObjectId),
    #[error("history entry `{0}` is not an abstraction object carried by any event")]
    DanglingHistoryEntry(ObjectId),
    #[error("abstraction object `{0}` is not recorded in the history")]
    UnrecordedAbstraction(ObjectId),
    #[error("object id `{0}` is already in use")]
    NonFreshId(ObjectId),
    #[error("unknown event `{0}`")]
    UnknownEvent(EventId),
    #[error("`{0}` is not an abstraction object type")]
    NotAbstractionType(String),
    #[error("an abstraction must target at least one event")]
    EmptyTargets,
    #[error("abstraction object `{0}` is not in the history (never applied or already redone)")]
    NotApplied(ObjectId),
}

/// An object-centric event log `(E, ⪯_E, history)`.
///
/// Events are kept in a total order (timestamp, then event id). The object
/// registry holds every workflow and abstraction object with its type; the
/// history object is kept separately.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventLog {
    events: Vec<Event>,
    objects: BTreeMap<ObjectId, ObjectType>,
    history: AbstractionHistory,
}

impl EventLog {
    /// Builds a log, ordering the events and checking every invariant.
    pub fn new(
        mut events: Vec<Event>,
        objects: BTreeMap<ObjectId, ObjectType>,
        history: AbstractionHistory,
    ) -> Result<Self, LogError> {
        events.sort_by(|a, b| (a.timestamp, &a.id).cmp(&(b.timestamp, &b.id)));
        let log = EventLog {
            events,
            objects,
            history,
        };
        log.validate()?;
        Ok(log)
    }

    pub fn empty() -> Self {
        EventLog {
            events: Vec::new(),
            objects: BTreeMap::new(),
            history: AbstractionHistory::default(),
        }
    }

    fn validate(&self) -> Result<(), LogError> {
        let mut seen = BTreeSet::new();
        let mut carried: BTreeSet<&ObjectId> = BTreeSet::new();
        for e in &self.events {
            if !seen.insert(&e.id) {
                return Err(LogError::DuplicateEvent(e.id.clone()));
            }
            if e.wfomap.values().all(|s| s.is_empty()) {
                return Err(LogError::NoWorkflowObject(e.id.clone()));
            }
            for (map, workflow) in [(&e.wfomap, true), (&e.aomap, false)] {
                for (t, ids) in map {
                    if t.class() == TypeClass::History {
                        return Err(LogError::HistoryRelated(e.id.clone()));
                    }
                    if t.is_workflow() != workflow {
                        return Err(LogError::InconsistentType {
                            object: ids.iter().next().cloned().unwrap_or_else(|| ObjectId::new("")),
                            declared: t.name().to_string(),
                            used: if workflow { "workflow map" } else { "abstraction map" }.into(),
                        });
                    }
                    for id in ids {
                        match self.objects.get(id) {
                            None => {
                                return Err(LogError::UnknownObject {
                                    event: e.id.clone(),
                                    object: id.clone(),
                                })
                            }
                            Some(declared) if declared != t => {
                                return Err(LogError::InconsistentType {
                                    object: id.clone(),
                                    declared: declared.name().to_string(),
                                    used: t.name().to_string(),
                                })
                            }
                            Some(_) => {}
                        }
                        if !workflow {
                            carried.insert(id);
                        }
                    }
                }
            }
        }
        let mut in_history = BTreeSet::new();
        for oid in &self.history.applied {
            if !in_history.insert(oid) {
                return Err(LogError::DuplicateHistoryEntry(oid.clone()));
            }
            if !carried.contains(oid) {
                return Err(LogError::DanglingHistoryEntry(oid.clone()));
            }
        }
        for (oid, t) in &self.objects {
            if t.is_abstraction() && !in_history.contains(oid) {
                return Err(LogError::UnrecordedAbstraction(oid.clone()));
            }
            if t.class() == TypeClass::History {
                return Err(LogError::DuplicateHistory(self.history.id.clone(), oid.clone()));
            }
        }
        Ok(())
    }

    /// Events in log order.
    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn event(&self, id: &EventId) -> Option<&Event> {
        self.events.iter().find(|e| &e.id == id)
    }

    pub fn objects(&self) -> &BTreeMap<ObjectId, ObjectType> {
        &self.objects
    }

    pub fn object_type(&self, oid: &ObjectId) -> Option<&ObjectType> {
        self.objects.get(oid)
    }

    pub fn history(&self) -> &AbstractionHistory {
        &self.history
    }

    /// A log is augmented iff at least one abstraction has been recorded.
    pub fn is_augmented(&self) -> bool {
        !self.history.applied.is_empty()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Workflow types related to at least one event, sorted by name.
    pub fn workflow_types(&self) -> BTreeSet<ObjectType> {
        self.events
            .iter()
            .flat_map(|e| e.wfomap.iter())
            .filter(|(_, ids)| !ids.is_empty())
            .map(|(t, _)| t.clone())
            .collect()
    }

    /// Abstraction types present in any event.
    pub fn abstraction_types(&self) -> BTreeSet<ObjectType> {
        self.events
            .iter()
            .flat_map(|e| e.aomap.keys().cloned())
            .collect()
    }

    /// `L↾WFOT`: the log without abstraction objects and with an empty history.
    pub fn project_workflow(&self) -> EventLog {
        EventLog {
            events: self
                .events
                .iter()
                .map(|e| Event {
                    aomap: ObjectMap::new(),
                    ..e.clone()
                })
                .collect(),
            objects: self
                .objects
                .iter()
                .filter(|(_, t)| t.is_workflow())
                .map(|(o, t)| (o.clone(), t.clone()))
                .collect(),
            history: AbstractionHistory {
                id: self.history.id.clone(),
                applied: Vec::new(),
            },
        }
    }

    /// Records one applied abstraction: each targeted event gains `oid`
    /// under `abstraction_type` and `oid` is appended to the history.
    pub fn st_abs(
        &self,
        targets: &BTreeSet<EventId>,
        abstraction_type: &ObjectType,
        oid: ObjectId,
    ) -> Result<EventLog, LogError> {
        if !abstraction_type.is_abstraction() {
            return Err(LogError::NotAbstractionType(abstraction_type.name().to_string()));
        }
        if targets.is_empty() {
            return Err(LogError::EmptyTargets);
        }
        if self.objects.contains_key(&oid) || oid == self.history.id {
            return Err(LogError::NonFreshId(oid));
        }
        for t in targets {
            if self.event(t).is_none() {
                return Err(LogError::UnknownEvent(t.clone()));
            }
        }
        let mut next = self.clone();
        for e in next.events.iter_mut().filter(|e| targets.contains(&e.id)) {
            e.aomap
                .entry(abstraction_type.clone())
                .or_default()
                .insert(oid.clone());
        }
        next.objects.insert(oid.clone(), abstraction_type.clone());
        next.history.applied.push(oid);
        Ok(next)
    }

    /// Retracts an applied abstraction by removing its object from every
    /// event and its entry from the history, wherever it sits.
    pub fn st_abs_inverse(&self, oid: &ObjectId) -> Result<EventLog, LogError> {
        let pos = self
            .history
            .applied
            .iter()
            .position(|o| o == oid)
            .ok_or_else(|| LogError::NotApplied(oid.clone()))?;
        let mut next = self.clone();
        next.history.applied.remove(pos);
        next.objects.remove(oid);
        for e in &mut next.events {
            e.aomap.retain(|_, ids| {
                ids.remove(oid);
                !ids.is_empty()
            });
        }
        Ok(next)
    }

    /// Events carrying abstraction object `oid`.
    pub fn events_with<'a>(&'a self, oid: &'a ObjectId) -> impl Iterator<Item = &'a Event> + 'a {
        self.events.iter().filter(move |e| e.carries_abstraction(oid))
    }

    /// True if `oid` is used by any object or by the history object.
    pub fn is_taken(&self, oid: &str) -> bool {
        self.history.id.as_str() == oid || self.objects.keys().any(|o| o.as_str() == oid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn fixture() -> EventLog {
        fixtures::bank()
    }

    fn events_named(log: &EventLog, activities: &[&str]) -> BTreeSet<EventId> {
        log.events()
            .iter()
            .filter(|e| activities.iter().any(|a| e.activity.starts_with(a)))
            .map(|e| e.id.clone())
            .collect()
    }

    #[test]
    fn st_abs_marks_lifecycle_events() {
        let log = fixture();
        let targets = events_named(&log, &["finalize account opening"]);
        assert_eq!(targets.len(), 4);
        let t = ObjectType::parse("abstraction:workflow:lc:finalize account opening$cla").unwrap();
        let aug = log.st_abs(&targets, &t, ObjectId::new("kl273")).unwrap();
        let marked: Vec<_> = aug
            .events_with(&ObjectId::new("kl273"))
            .map(|e| e.id.clone())
            .collect();
        assert_eq!(marked.len(), 4);
        assert_eq!(aug.history().applied, vec![ObjectId::new("kl273")]);
        assert!(aug.is_augmented());
        assert_eq!(aug.project_workflow(), log.project_workflow());
    }

    #[test]
    fn st_abs_marks_exactly_the_client_interactions() {
        let log = fixture();
        let targets: BTreeSet<EventId> =
            ["0ab63", "9c7f8", "207g2"].into_iter().map(EventId::from).collect();
        let t = ObjectType::parse("abstraction:workflow:client$caa").unwrap();
        let aug = log.st_abs(&targets, &t, ObjectId::new("uih13")).unwrap();
        let marked: BTreeSet<_> = aug
            .events_with(&ObjectId::new("uih13"))
            .map(|e| e.id.clone())
            .collect();
        assert_eq!(marked, targets);
    }

    #[test]
    fn inverse_restores_input() {
        let log = fixture();
        let targets = events_named(&log, &["click open account", "insert account meta data"]);
        let t = ObjectType::parse("abstraction:workflow:bank$seq").unwrap();
        let aug = log.st_abs(&targets, &t, ObjectId::new("x1")).unwrap();
        assert_eq!(aug.st_abs_inverse(&ObjectId::new("x1")).unwrap(), log);
    }

    #[test]
    fn inverse_removes_from_the_middle_of_the_history() {
        let aug = fixtures::bank_augmented();
        let out = aug.st_abs_inverse(&ObjectId::new("kl273")).unwrap();
        assert_eq!(out.history().applied, vec![ObjectId::new("uih13")]);
        assert_eq!(out.events_with(&ObjectId::new("kl273")).count(), 0);
        assert_eq!(out.events_with(&ObjectId::new("uih13")).count(), 3);
    }

    #[test]
    fn inverse_of_unknown_oid_is_an_error() {
        let log = fixture();
        assert_eq!(
            log.st_abs_inverse(&ObjectId::new("nope")),
            Err(LogError::NotApplied(ObjectId::new("nope")))
        );
    }

    #[test]
    fn st_abs_error_paths() {
        let log = fixture();
        let t = ObjectType::parse("abstraction:workflow:bank$seq").unwrap();
        let one: BTreeSet<EventId> = [EventId::from("260f5")].into();
        assert!(matches!(
            log.st_abs(&one, &t, ObjectId::new("151a3")),
            Err(LogError::NonFreshId(_))
        ));
        let unknown: BTreeSet<EventId> = [EventId::from("zzzzz")].into();
        assert!(matches!(
            log.st_abs(&unknown, &t, ObjectId::new("q1")),
            Err(LogError::UnknownEvent(_))
        ));
        let wf = ObjectType::parse("workflow:bank").unwrap();
        assert!(matches!(
            log.st_abs(&one, &wf, ObjectId::new("q1")),
            Err(LogError::NotAbstractionType(_))
        ));
        assert!(matches!(
            log.st_abs(&BTreeSet::new(), &t, ObjectId::new("q1")),
            Err(LogError::EmptyTargets)
        ));
    }

    #[test]
    fn projection_of_unaugmented_log_is_identity() {
        let log = fixture();
        assert_eq!(log.project_workflow(), log);
    }

    #[test]
    fn type_classes_follow_namespaces() {
        let cases = [
            ("workflow:bank", TypeClass::WorkflowBusiness),
            ("workflow:lc:finalize account opening", TypeClass::WorkflowLifecycle),
            ("workflow:sp:spawn production", TypeClass::WorkflowSubprocess),
            ("workflow:res:clerk", TypeClass::WorkflowResource),
            ("workflow:dev:lathe", TypeClass::WorkflowDevice),
            ("abstraction:workflow:client$caa", TypeClass::Abstraction),
            ("history", TypeClass::History),
        ];
        for (name, class) in cases {
            assert_eq!(ObjectType::parse(name).unwrap().class(), class, "{name}");
        }
        assert!(matches!(
            ObjectType::parse("abstraction:workflow:client$foo"),
            Err(LogError::UnknownAbstractionSuffix(_))
        ));
        assert!(matches!(
            ObjectType::parse("order"),
            Err(LogError::UnclassifiedType(_))
        ));
        let t = ObjectType::parse("abstraction:workflow:lc:finalize account opening$cla").unwrap();
        let (target, kind) = t.abstraction_parts().unwrap();
        assert_eq!(target.name(), "workflow:lc:finalize account opening");
        assert_eq!(kind, AbstractionKind::Cla);
        assert_eq!(target.short_name(), "finalize account opening");
    }
}
