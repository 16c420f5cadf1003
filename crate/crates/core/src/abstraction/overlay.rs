use std::collections::BTreeSet;

use super::{apply_abstraction, AbstractionError, AbstractionRecord, AbstractionRef, Model, Repository};
use crate::discovery::Discovery;
use crate::ocel::{EventId, EventLog, ObjectId};

/// Reconstructs the record carried by abstraction object `oid`.
pub fn record_of(log: &EventLog, d: &Discovery, oid: &ObjectId) -> Result<AbstractionRecord, AbstractionError> {
    let atype = log
        .object_type(oid)
        .ok_or_else(|| AbstractionError::UnknownObject(oid.clone()))?;
    let mut transitions = BTreeSet::new();
    for e in log.events_with(oid) {
        let t = d
            .replay
            .et
            .get(&e.id)
            .ok_or_else(|| AbstractionError::UnmappedEvent(e.id.clone()))?;
        transitions.insert(t.clone());
    }
    AbstractionRecord::new(atype, transitions, Some(oid.clone()))
}

/// The model after each prefix of the history, starting with the
/// discovered net.
pub fn replay_history(log: &EventLog, d: &Discovery, repo: &Repository) -> Result<Vec<Model>, AbstractionError> {
    let mut models = vec![Model::original(&d.net)];
    for oid in &log.history().applied {
        let rec = record_of(log, d, oid)?;
        let next = apply_abstraction(d, models.last().expect("non-empty"), &rec, repo)?;
        models.push(next);
    }
    Ok(models)
}

/// The abstracted model encoded by an augmented log.
pub fn overlay(log: &EventLog, d: &Discovery, repo: &Repository) -> Result<Model, AbstractionError> {
    Ok(replay_history(log, d, repo)?.pop().expect("non-empty"))
}

/// Events that fired one of the transitions aggregated by `r`.
pub fn record_events(d: &Discovery, r: &AbstractionRef) -> BTreeSet<EventId> {
    d.replay
        .et
        .iter()
        .filter(|(_, t)| r.transitions.contains(*t))
        .map(|(e, _)| e.clone())
        .collect()
}
