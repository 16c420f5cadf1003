use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::LogError;

/// The seven aggregations of the abstraction repository, listed from the
/// coarsest granularity level to the finest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AbstractionKind {
    /// Complete artifact aggregation (business objects, resources, devices).
    Caa,
    /// Complete subprocess aggregation.
    Csa,
    Seq,
    Xor,
    And,
    Loop,
    /// Complete lifecycle aggregation.
    Cla,
}

impl AbstractionKind {
    pub const ALL: [AbstractionKind; 7] = [
        AbstractionKind::Caa,
        AbstractionKind::Csa,
        AbstractionKind::Seq,
        AbstractionKind::Xor,
        AbstractionKind::And,
        AbstractionKind::Loop,
        AbstractionKind::Cla,
    ];

    pub fn suffix(self) -> &'static str {
        match self {
            AbstractionKind::Cla => "cla",
            AbstractionKind::Csa => "csa",
            AbstractionKind::Caa => "caa",
            AbstractionKind::Seq => "seq",
            AbstractionKind::Xor => "xor",
            AbstractionKind::And => "and",
            AbstractionKind::Loop => "loop",
        }
    }

    pub fn from_suffix(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.suffix() == s)
    }

    /// Complete aggregations remove (or collapse) a whole workflow type.
    pub fn is_complete(self) -> bool {
        matches!(
            self,
            AbstractionKind::Cla | AbstractionKind::Csa | AbstractionKind::Caa
        )
    }

    /// Human-readable class name used in listings.
    pub fn display_name(self) -> &'static str {
        match self {
            AbstractionKind::Cla => "Complete lifecycle",
            AbstractionKind::Csa => "Complete subprocess",
            AbstractionKind::Caa => "Complete artifact",
            AbstractionKind::Seq => "Sequence control-flow structure",
            AbstractionKind::Xor => "XOR control-flow structure",
            AbstractionKind::And => "AND control-flow structure",
            AbstractionKind::Loop => "LOOP control-flow structure",
        }
    }
}

impl fmt::Display for AbstractionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.suffix())
    }
}

/// Classification of an object type, derived from its namespaced name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TypeClass {
    WorkflowBusiness,
    WorkflowLifecycle,
    WorkflowSubprocess,
    WorkflowResource,
    WorkflowDevice,
    Abstraction,
    History,
}

impl TypeClass {
    pub fn is_workflow(self) -> bool {
        !matches!(self, TypeClass::Abstraction | TypeClass::History)
    }

    /// The complete aggregation that removes a workflow type of this class.
    pub fn complete_aggregation(self) -> Option<AbstractionKind> {
        match self {
            TypeClass::WorkflowBusiness | TypeClass::WorkflowResource | TypeClass::WorkflowDevice => {
                Some(AbstractionKind::Caa)
            }
            TypeClass::WorkflowSubprocess => Some(AbstractionKind::Csa),
            TypeClass::WorkflowLifecycle => Some(AbstractionKind::Cla),
            TypeClass::Abstraction | TypeClass::History => None,
        }
    }
}

const WORKFLOW: &str = "workflow:";
const ABSTRACTION: &str = "abstraction:";
pub const HISTORY_TYPE: &str = "history";

/// A namespaced object type name such as `workflow:bank`,
/// `workflow:lc:finalize account opening` or `abstraction:workflow:client$caa`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ObjectType {
    name: String,
    class: TypeClass,
}

impl ObjectType {
    pub fn parse(name: &str) -> Result<Self, LogError> {
        let class = if name == HISTORY_TYPE {
            TypeClass::History
        } else if let Some(rest) = name.strip_prefix(ABSTRACTION) {
            let (target, suffix) = rest
                .rsplit_once('$')
                .ok_or_else(|| LogError::UnknownAbstractionSuffix(name.to_string()))?;
            if AbstractionKind::from_suffix(suffix).is_none() {
                return Err(LogError::UnknownAbstractionSuffix(name.to_string()));
            }
            let target = ObjectType::parse(target)?;
            if !target.class.is_workflow() {
                return Err(LogError::UnclassifiedType(name.to_string()));
            }
            TypeClass::Abstraction
        } else if let Some(rest) = name.strip_prefix(WORKFLOW) {
            if rest.is_empty() {
                return Err(LogError::UnclassifiedType(name.to_string()));
            }
            if rest.starts_with("lc:") {
                TypeClass::WorkflowLifecycle
            } else if rest.starts_with("sp:") {
                TypeClass::WorkflowSubprocess
            } else if rest.starts_with("res:") {
                TypeClass::WorkflowResource
            } else if rest.starts_with("dev:") {
                TypeClass::WorkflowDevice
            } else {
                TypeClass::WorkflowBusiness
            }
        } else {
            return Err(LogError::UnclassifiedType(name.to_string()));
        };
        Ok(ObjectType {
            name: name.to_string(),
            class,
        })
    }

    /// Builds the abstraction type encoding `kind` applied to `target`.
    pub fn abstraction(target: &ObjectType, kind: AbstractionKind) -> ObjectType {
        ObjectType {
            name: format!("{ABSTRACTION}{}${}", target.name, kind.suffix()),
            class: TypeClass::Abstraction,
        }
    }

    pub fn history() -> ObjectType {
        ObjectType {
            name: HISTORY_TYPE.to_string(),
            class: TypeClass::History,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn class(&self) -> TypeClass {
        self.class
    }

    pub fn is_workflow(&self) -> bool {
        self.class.is_workflow()
    }

    pub fn is_abstraction(&self) -> bool {
        self.class == TypeClass::Abstraction
    }

    /// For abstraction types: the targeted workflow type and the encoded kind.
    pub fn abstraction_parts(&self) -> Option<(ObjectType, AbstractionKind)> {
        if self.class != TypeClass::Abstraction {
            return None;
        }
        let rest = self.name.strip_prefix(ABSTRACTION)?;
        let (target, suffix) = rest.rsplit_once('$')?;
        Some((ObjectType::parse(target).ok()?, AbstractionKind::from_suffix(suffix)?))
    }

    /// Name without the namespace, e.g. `client` or `finalize account opening`.
    pub fn short_name(&self) -> &str {
        let rest = self.name.strip_prefix(WORKFLOW).unwrap_or(&self.name);
        for prefix in ["lc:", "sp:", "res:", "dev:"] {
            if let Some(s) = rest.strip_prefix(prefix) {
                return s;
            }
        }
        rest
    }
}

impl PartialOrd for ObjectType {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ObjectType {
    fn cmp(&self, other: &Self) -> Ordering {
        self.name.cmp(&other.name)
    }
}

impl fmt::Display for ObjectType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl Serialize for ObjectType {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.name)
    }
}

impl<'de> Deserialize<'de> for ObjectType {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let name = String::deserialize(d)?;
        ObjectType::parse(&name).map_err(serde::de::Error::custom)
    }
}

macro_rules! string_id {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
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

string_id!(
    /// Identifier of an object; unique within a log.
    ObjectId
);
string_id!(
    /// Identifier of an event; unique within a log.
    EventId
);

/// Object type → related objects. Used for both the workflow and the
/// abstraction object maps of an event.
pub type ObjectMap = BTreeMap<ObjectType, BTreeSet<ObjectId>>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub id: EventId,
    pub activity: String,
    pub timestamp: DateTime<Utc>,
    pub wfomap: ObjectMap,
    pub aomap: ObjectMap,
}

impl Event {
    /// Workflow objects related to the event, with their types.
    pub fn workflow_objects(&self) -> impl Iterator<Item = (&ObjectType, &ObjectId)> {
        self.wfomap
            .iter()
            .flat_map(|(t, ids)| ids.iter().map(move |id| (t, id)))
    }

    pub fn carries_abstraction(&self, oid: &ObjectId) -> bool {
        self.aomap.values().any(|ids| ids.contains(oid))
    }
}

/// The distinguished history object: the ordered abstraction journey.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbstractionHistory {
    pub id: ObjectId,
    pub applied: Vec<ObjectId>,
}

impl Default for AbstractionHistory {
    fn default() -> Self {
        AbstractionHistory {
            id: ObjectId::new("absHistory"),
            applied: Vec::new(),
        }
    }
}
