//! The OCEL JSON profile.
//!
//! ```json
//! {
//!   "objects": {
//!     "151a3": { "type": "workflow:bank" },
//!     "uih13": { "type": "abstraction:workflow:client$caa" },
//!     "absHistory": { "type": "history", "applied": ["uih13"] }
//!   },
//!   "events": [
//!     { "id": "0ab63", "activity": "ask for customer needs",
//!       "timestamp": "2023-05-19T10:42:49Z",
//!       "relations": { "workflow:bank": ["151a3"],
//!                      "abstraction:workflow:client$caa": ["uih13"] } }
//!   ]
//! }
//! ```
//!
//! Timestamps are ISO-8601; values without an offset are read as UTC and
//! always written back in UTC with a `Z` suffix.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, NaiveDateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use super::types::{AbstractionHistory, Event, EventId, ObjectId, ObjectMap, ObjectType, TypeClass};
use super::{EventLog, LogError};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LogFormat {
    #[default]
    OcelJson,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    #[serde(default)]
    objects: BTreeMap<String, ObjectEntry>,
    #[serde(default)]
    events: Vec<EventEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectEntry {
    #[serde(rename = "type")]
    otype: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    applied: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventEntry {
    id: String,
    activity: String,
    timestamp: String,
    #[serde(default)]
    relations: BTreeMap<String, Vec<String>>,
}

fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.with_timezone(&Utc));
    }
    ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .map(|n| n.and_utc())
}

pub fn parse_log(source: &[u8], format: LogFormat) -> Result<EventLog, LogError> {
    let LogFormat::OcelJson = format;
    let doc: Document = serde_json::from_slice(source).map_err(|e| {
        let (line, column, message) = (e.line(), e.column(), e.to_string());
        if e.is_data() {
            LogError::Schema {
                line,
                column,
                message,
            }
        } else {
            LogError::Syntax {
                line,
                column,
                message,
            }
        }
    })?;

    let mut objects = BTreeMap::new();
    let mut history: Option<AbstractionHistory> = None;
    for (id, entry) in doc.objects {
        let otype = ObjectType::parse(&entry.otype)?;
        let oid = ObjectId(id);
        if otype.class() == TypeClass::History {
            if let Some(h) = &history {
                return Err(LogError::DuplicateHistory(h.id.clone(), oid));
            }
            history = Some(AbstractionHistory {
                id: oid,
                applied: entry
                    .applied
                    .unwrap_or_default()
                    .into_iter()
                    .map(ObjectId)
                    .collect(),
            });
        } else {
            objects.insert(oid, otype);
        }
    }

    let mut events = Vec::with_capacity(doc.events.len());
    let mut ids = BTreeSet::new();
    for entry in doc.events {
        let id = EventId(entry.id);
        if !ids.insert(id.clone()) {
            return Err(LogError::DuplicateEvent(id));
        }
        let timestamp = parse_timestamp(&entry.timestamp).ok_or_else(|| LogError::Timestamp {
            event: id.clone(),
            value: entry.timestamp.clone(),
        })?;
        let mut wfomap = ObjectMap::new();
        let mut aomap = ObjectMap::new();
        for (tname, oids) in entry.relations {
            if oids.is_empty() {
                continue;
            }
            let otype = ObjectType::parse(&tname)?;
            let target = match otype.class() {
                TypeClass::History => return Err(LogError::HistoryRelated(id)),
                TypeClass::Abstraction => &mut aomap,
                _ => &mut wfomap,
            };
            target
                .entry(otype)
                .or_default()
                .extend(oids.into_iter().map(ObjectId));
        }
        events.push(Event {
            id,
            activity: entry.activity,
            timestamp,
            wfomap,
            aomap,
        });
    }
    EventLog::new(events, objects, history.unwrap_or_default())
}

pub fn serialize_log(log: &EventLog, format: LogFormat) -> Vec<u8> {
    let LogFormat::OcelJson = format;
    let mut objects: BTreeMap<String, ObjectEntry> = log
        .objects()
        .iter()
        .map(|(id, t)| {
            (
                id.0.clone(),
                ObjectEntry {
                    otype: t.name().to_string(),
                    applied: None,
                },
            )
        })
        .collect();
    let h = log.history();
    objects.insert(
        h.id.0.clone(),
        ObjectEntry {
            otype: ObjectType::history().name().to_string(),
            applied: Some(h.applied.iter().map(|o| o.0.clone()).collect()),
        },
    );
    let events = log
        .events()
        .iter()
        .map(|e| EventEntry {
            id: e.id.0.clone(),
            activity: e.activity.clone(),
            timestamp: e.timestamp.to_rfc3339_opts(SecondsFormat::AutoSi, true),
            relations: e
                .wfomap
                .iter()
                .chain(e.aomap.iter())
                .map(|(t, ids)| (t.name().to_string(), ids.iter().map(|o| o.0.clone()).collect()))
                .collect(),
        })
        .collect();
    let mut out = serde_json::to_vec_pretty(&Document { objects, events })
        .expect("document serialization cannot fail");
    out.push(b'\n');
    out
}
