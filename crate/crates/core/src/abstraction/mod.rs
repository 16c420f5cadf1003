//! The abstraction repository and the log-model link.
//!
//! An abstraction is identified by its kind, its target workflow type and
//! the set of originally discovered labeled transitions it aggregates.
//! [`overlay`] rebuilds the abstracted model from an augmented log by
//! reapplying, in history order, the record carried by each abstraction
//! object.

mod checks;
mod fragment;
mod model;
mod overlay;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::discovery::Discovery;
use crate::ocel::{AbstractionKind, EventId, ObjectId, ObjectType};
use crate::ocpn::{Transition, TransitionId};

pub use fragment::{find_fragment, is_sese, Fragment};
pub use model::Model;
pub use overlay::{overlay, record_events, record_of, replay_history};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AbstractionError {
    #[error("`{0}` is not an abstraction object type")]
    NotAbstractionType(String),
    #[error("no repository entry for `{0}`")]
    UnknownKind(AbstractionKind),
    #[error("no discovered model for `{0}`")]
    UnknownTarget(ObjectType),
    #[error("{reference} is not admissible: {reason}")]
    Inadmissible { reference: String, reason: String },
    #[error("event {0} has no transition in the discovered net")]
    UnmappedEvent(EventId),
    #[error("abstraction object {0} is not registered in the log")]
    UnknownObject(ObjectId),
}

/// Wire form of an abstraction: kind, target type and the sorted original
/// transition ids. Enough to reconstruct the abstraction.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AbstractionRef {
    pub kind: AbstractionKind,
    pub otype: ObjectType,
    pub transitions: BTreeSet<TransitionId>,
}

impl AbstractionRef {
    pub fn atype(&self) -> ObjectType {
        ObjectType::abstraction(&self.otype, self.kind)
    }

    pub fn record(&self, oid: Option<ObjectId>) -> AbstractionRecord {
        AbstractionRecord {
            atype: self.atype(),
            target: self.otype.clone(),
            kind: self.kind,
            transitions: self.transitions.clone(),
            oid,
        }
    }
}

impl fmt::Display for AbstractionRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ts: Vec<&str> = self.transitions.iter().map(|t| t.as_str()).collect();
        write!(f, "{} {} {{{}}}", self.kind, self.otype, ts.join(","))
    }
}

/// A reconstructable abstraction instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractionRecord {
    pub atype: ObjectType,
    pub target: ObjectType,
    pub kind: AbstractionKind,
    /// Original labeled transitions.
    pub transitions: BTreeSet<TransitionId>,
    pub oid: Option<ObjectId>,
}

impl AbstractionRecord {
    pub fn new(
        atype: &ObjectType,
        transitions: BTreeSet<TransitionId>,
        oid: Option<ObjectId>,
    ) -> Result<Self, AbstractionError> {
        let (target, kind) = atype
            .abstraction_parts()
            .ok_or_else(|| AbstractionError::NotAbstractionType(atype.name().to_string()))?;
        Ok(AbstractionRecord {
            atype: atype.clone(),
            target,
            kind,
            transitions,
            oid,
        })
    }

    pub fn to_ref(&self) -> AbstractionRef {
        AbstractionRef {
            kind: self.kind,
            otype: self.target.clone(),
            transitions: self.transitions.clone(),
        }
    }

    fn reject(&self, reason: impl Into<String>) -> AbstractionError {
        AbstractionError::Inadmissible {
            reference: self.to_ref().to_string(),
            reason: reason.into(),
        }
    }
}

/// Builds the abstracted model, or explains why the record does not apply.
pub type Applier = fn(&Discovery, &Model, &AbstractionRecord) -> Result<Model, AbstractionError>;

#[derive(Clone)]
pub struct Repository {
    entries: BTreeMap<AbstractionKind, Applier>,
}

impl fmt::Debug for Repository {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.entries.keys()).finish()
    }
}

impl Default for Repository {
    fn default() -> Self {
        Self::standard()
    }
}

impl Repository {
    /// The seven aggregations.
    pub fn standard() -> Self {
        let mut entries: BTreeMap<AbstractionKind, Applier> = BTreeMap::new();
        entries.insert(AbstractionKind::Caa, remove_type);
        entries.insert(AbstractionKind::Csa, remove_type);
        entries.insert(AbstractionKind::Cla, collapse_lifecycle);
        for k in [
            AbstractionKind::Seq,
            AbstractionKind::Xor,
            AbstractionKind::And,
            AbstractionKind::Loop,
        ] {
            entries.insert(k, contract_fragment);
        }
        Repository { entries }
    }

    pub fn empty() -> Self {
        Repository {
            entries: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, kind: AbstractionKind, applier: Applier) {
        self.entries.insert(kind, applier);
    }

    pub fn get(&self, kind: AbstractionKind) -> Option<Applier> {
        self.entries.get(&kind).copied()
    }

    pub fn kinds(&self) -> impl Iterator<Item = AbstractionKind> + '_ {
        self.entries.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn labeled_of(d: &Discovery, target: &ObjectType) -> Result<BTreeSet<TransitionId>, AbstractionError> {
    let m = d
        .models
        .get(target)
        .ok_or_else(|| AbstractionError::UnknownTarget(target.clone()))?;
    Ok(m.net
        .transitions()
        .filter(|t| !t.is_silent())
        .map(|t| t.id.clone())
        .collect())
}

fn check_complete(d: &Discovery, model: &Model, rec: &AbstractionRecord) -> Result<(), AbstractionError> {
    if rec.target.class().complete_aggregation() != Some(rec.kind) {
        return Err(rec.reject(format!(
            "{} does not apply to types of class {:?}",
            rec.kind,
            rec.target.class()
        )));
    }
    if labeled_of(d, &rec.target)? != rec.transitions {
        return Err(rec.reject("transitions are not exactly those of the target type"));
    }
    let types = model.net().object_types();
    if !types.contains(&rec.target) {
        return Err(rec.reject("target type is no longer in the model"));
    }
    if types.len() == 1 {
        return Err(rec.reject("the last object type cannot be aggregated"));
    }
    Ok(())
}

fn remove_type(d: &Discovery, model: &Model, rec: &AbstractionRecord) -> Result<Model, AbstractionError> {
    check_complete(d, model, rec)?;
    Ok(model.remove_type(&rec.target, true))
}

fn aggregate_id(rec: &AbstractionRecord, order: &[TransitionId]) -> String {
    match &rec.oid {
        Some(o) => format!("a:{o}"),
        None => format!(
            "a:{}:{}",
            rec.kind,
            order.first().map(|t| t.as_str()).unwrap_or("")
        ),
    }
}

fn collapse_lifecycle(d: &Discovery, model: &Model, rec: &AbstractionRecord) -> Result<Model, AbstractionError> {
    check_complete(d, model, rec)?;
    let typed = &d.models[&rec.target];
    let own: BTreeSet<TransitionId> = typed.net.transitions().map(|t| t.id.clone()).collect();
    let members: BTreeSet<TransitionId> = model
        .net()
        .places()
        .filter(|p| p.otype == rec.target)
        .flat_map(|p| model.net().adjacent_transitions(&p.id))
        .collect();
    for m in &members {
        if !model.originals(m).is_subset(&own) {
            return Err(rec.reject(format!("{m} aggregates activities of other types")));
        }
    }
    let order = fragment::leaf_order(typed, 0);
    let mut agg = Transition::labeled(aggregate_id(rec, &order), rec.target.short_name());
    agg.members = order
        .iter()
        .filter_map(|t| d.net.transition(t).and_then(|t| t.label.clone()))
        .collect();
    Ok(model
        .contract(&members, agg, AbstractionKind::Cla)
        .remove_type(&rec.target, false))
}

fn contract_fragment(d: &Discovery, model: &Model, rec: &AbstractionRecord) -> Result<Model, AbstractionError> {
    let typed = d
        .models
        .get(&rec.target)
        .ok_or_else(|| AbstractionError::UnknownTarget(rec.target.clone()))?;
    let frag = find_fragment(typed, rec.kind, &rec.transitions).ok_or_else(|| {
        rec.reject(format!("not a {} structure of the type's process tree", rec.kind))
    })?;
    let mut members = BTreeSet::new();
    for o in &frag.transitions {
        match model.current(o) {
            Some(c) => {
                members.insert(c.clone());
            }
            None => return Err(rec.reject(format!("{o} is no longer in the model"))),
        }
    }
    for m in &members {
        if !model.originals(m).is_subset(&frag.transitions) {
            return Err(rec.reject(format!("{m} extends beyond the fragment")));
        }
        let types = model.net().transition_types(m);
        if types.len() != 1 || !types.contains(&rec.target) {
            return Err(rec.reject(format!("{m} interacts with other object types")));
        }
    }
    if members.len() < 2 {
        return Err(rec.reject("fragment is already a single transition"));
    }
    let mut atoms: Vec<String> = Vec::new();
    let mut seen = BTreeSet::new();
    for o in &frag.order {
        let c = model.current(o).expect("checked above");
        if !seen.insert(c.clone()) {
            continue;
        }
        let t = model.net().transition(c).expect("current transition");
        match model.aggregate_kind(c) {
            Some(k) if !k.is_complete() => atoms.extend(t.members.iter().cloned()),
            _ => atoms.extend(t.label.clone()),
        }
    }
    let glyph = fragment::kind_operator(rec.kind).expect("control-flow kind").glyph();
    let label = match atoms.as_slice() {
        [a, b] => format!("{glyph}(?{a}, ?{b})"),
        [a, .., z] => format!("{glyph}(?{a}, ..., ?{z})"),
        _ => return Err(rec.reject("fragment has fewer than two activities")),
    };
    let mut agg = Transition::labeled(aggregate_id(rec, &frag.order), label);
    agg.members = atoms;
    Ok(model.contract(&members, agg, rec.kind))
}

/// Applies `rec` to `model`: structural admissibility and applicability
/// via the repository entry, then size reduction, soundness preservation
/// and order preservation on every per-type projection that changed.
pub fn apply_abstraction(
    d: &Discovery,
    model: &Model,
    rec: &AbstractionRecord,
    repo: &Repository,
) -> Result<Model, AbstractionError> {
    let applier = repo.get(rec.kind).ok_or(AbstractionError::UnknownKind(rec.kind))?;
    let after = applier(d, model, rec)?;
    let (sb, sa) = (model.net().size(), after.net().size());
    if sa.elements >= sb.elements {
        return Err(rec.reject("does not reduce the model"));
    }
    for t in after.net().object_types() {
        let pb = model.net().project_type(&t).expect("type present before");
        let pa = after.net().project_type(&t).expect("type present after");
        if pb == pa {
            continue;
        }
        match checks::preserves_soundness(&pb, &pa) {
            Some(false) => return Err(rec.reject(format!("breaks soundness of {t}"))),
            None => log::debug!("soundness of {t} undecided within bound; not checked"),
            Some(true) => {}
        }
        match checks::preserves_order(&pb, &pa) {
            Some(false) => return Err(rec.reject(format!("reverses an order constraint of {t}"))),
            None => log::debug!("order of {t} undecided within bound; not checked"),
            Some(true) => {}
        }
    }
    Ok(after)
}

/// Whether `rec` can be applied to `model`.
pub fn admissible(d: &Discovery, model: &Model, rec: &AbstractionRecord, repo: &Repository) -> bool {
    apply_abstraction(d, model, rec, repo).is_ok()
}

/// The complete aggregation of a workflow type as a reference.
pub fn complete_ref(d: &Discovery, otype: &ObjectType) -> Option<AbstractionRef> {
    let kind = otype.class().complete_aggregation()?;
    Some(AbstractionRef {
        kind,
        otype: otype.clone(),
        transitions: labeled_of(d, otype).ok()?,
    })
}
