//! Interactive exploration sessions: automatic initialization down to a
//! goal, then apply and redo steps driven by the analyst. The augmented
//! log is the only state; the model is always its overlay.

mod tree;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

use crate::abstraction::{
    apply_abstraction, overlay, record_events, AbstractionError, AbstractionRecord, AbstractionRef,
    Model, Repository,
};
use crate::discovery::{discover_with, Discovery, DiscoveryError, DiscoveryOptions};
use crate::ocel::{
    serialize_log, AbstractionKind, EventLog, IdGenerator, LogError, LogFormat, ObjectId, ObjectType,
    TypeClass,
};
use crate::ocpn::AcceptingOcpn;

pub use tree::{build_tree, AbstractionTree, TreeEntry};

pub const DEFAULT_THRESHOLD: usize = 37;
pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SessionError {
    #[error(transparent)]
    Log(#[from] LogError),
    #[error(transparent)]
    Discovery(#[from] DiscoveryError),
    #[error("the log's abstraction history does not reconstruct: {0}")]
    History(#[from] AbstractionError),
    #[error("{0} is not available")]
    NotAvailable(AbstractionRef),
    #[error("{0} is not redoable")]
    NotRedoable(ObjectId),
}

/// When initialization may stop abstracting.
pub trait Goal: Send + Sync {
    fn reached(&self, net: &AcceptingOcpn) -> bool;
}

/// At most `threshold` places and transitions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SizeGoal {
    pub threshold: usize,
}

impl Goal for SizeGoal {
    fn reached(&self, net: &AcceptingOcpn) -> bool {
        net.size().elements <= self.threshold
    }
}

pub struct SessionConfig {
    pub goal: Box<dyn Goal>,
    pub seed: u64,
    pub discovery: DiscoveryOptions,
    pub repository: Repository,
}

impl SessionConfig {
    pub fn with_threshold(threshold: usize) -> Self {
        SessionConfig {
            goal: Box::new(SizeGoal { threshold }),
            ..Self::default()
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            goal: Box::new(SizeGoal {
                threshold: DEFAULT_THRESHOLD,
            }),
            seed: DEFAULT_SEED,
            discovery: DiscoveryOptions::default(),
            repository: Repository::standard(),
        }
    }
}

/// Why a record is offered for redo.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RedoRule {
    /// Not nested inside another applied abstraction of the same type.
    CoarsestApplied,
    /// The last entry of the history.
    MostRecent,
}

/// An abstraction as offered to the analyst.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Offer {
    pub reference: AbstractionRef,
    pub class_name: &'static str,
    /// Activity labels of the covered transitions, in id order.
    pub activities: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oid: Option<ObjectId>,
    #[serde(skip_serializing_if = "BTreeSet::is_empty")]
    pub rules: BTreeSet<RedoRule>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HistoryEntry {
    pub oid: ObjectId,
    pub reference: AbstractionRef,
}

pub struct Session {
    discovery: Discovery,
    tree: AbstractionTree,
    repo: Repository,
    log: EventLog,
    model: Model,
    ids: IdGenerator,
    last_business: Option<ObjectType>,
    warnings: Vec<String>,
    /// Tree ids of the available nodes; reset on every change.
    available: OnceLock<Vec<usize>>,
    redoable: OnceLock<Vec<Offer>>,
}

impl std::fmt::Debug for Session {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Session")
            .field("history", &self.log.history().applied)
            .field("size", &self.model.net().size())
            .finish_non_exhaustive()
    }
}

impl Session {
    /// Discovers the model, builds the abstraction tree and reconstructs
    /// the log's history. A log without history is then abstracted until
    /// the goal holds or nothing is left to retrieve.
    pub fn initialize(log: EventLog, config: SessionConfig) -> Result<Session, SessionError> {
        let fresh = !log.is_augmented();
        let goal = config.goal;
        let mut s = Self::build(log, config.seed, config.discovery, config.repository)?;
        if fresh {
            s.auto_apply(goal.as_ref());
        }
        Ok(s)
    }

    /// Like [`Session::initialize`] but never applies anything on its own.
    pub fn import(log: EventLog, config: SessionConfig) -> Result<Session, SessionError> {
        Self::build(log, config.seed, config.discovery, config.repository)
    }

    fn build(log: EventLog, seed: u64, opts: DiscoveryOptions, repo: Repository) -> Result<Session, SessionError> {
        let discovery = discover_with(&log, opts)?;
        let tree = build_tree(&discovery, &repo);
        let model = overlay(&log, &discovery, &repo)?;
        Ok(Session {
            discovery,
            tree,
            repo,
            log,
            model,
            ids: IdGenerator::seeded(seed),
            last_business: None,
            warnings: Vec::new(),
            available: OnceLock::new(),
            redoable: OnceLock::new(),
        })
    }

    fn auto_apply(&mut self, goal: &dyn Goal) {
        while !goal.reached(self.model.net()) {
            let Some(r) = self.retrieve_next() else {
                let msg = format!(
                    "abstraction tree exhausted at {} elements; goal not reached",
                    self.model.net().size().elements
                );
                log::warn!("{msg}");
                self.warnings.push(msg);
                return;
            };
            log::info!("initialize applies {r}");
            self.apply(&r).expect("retrieved from the available set");
        }
    }

    pub fn discovery(&self) -> &Discovery {
        &self.discovery
    }

    pub fn original_net(&self) -> &AcceptingOcpn {
        &self.discovery.net
    }

    pub fn tree(&self) -> &AbstractionTree {
        &self.tree
    }

    pub fn repository(&self) -> &Repository {
        &self.repo
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn net(&self) -> &AcceptingOcpn {
        self.model.net()
    }

    /// Warnings raised by initialization.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    fn record_of(&self, oid: &ObjectId) -> AbstractionRecord {
        crate::abstraction::record_of(&self.log, &self.discovery, oid).expect("history reconstructs")
    }

    pub fn history(&self) -> Vec<HistoryEntry> {
        self.log
            .history()
            .applied
            .iter()
            .map(|oid| HistoryEntry {
                oid: oid.clone(),
                reference: self.record_of(oid).to_ref(),
            })
            .collect()
    }

    fn applied(&self) -> BTreeMap<AbstractionRef, ObjectId> {
        self.history().into_iter().map(|h| (h.reference, h.oid)).collect()
    }

    fn offer(&self, r: &AbstractionRef) -> Offer {
        Offer {
            reference: r.clone(),
            class_name: r.kind.display_name(),
            activities: r
                .transitions
                .iter()
                .filter_map(|t| self.discovery.net.transition(t)?.label.clone())
                .collect(),
            node: self.tree.find(r).map(|e| e.id),
            oid: None,
            rules: BTreeSet::new(),
        }
    }

    fn available_nodes(&self) -> Vec<&TreeEntry> {
        self.available
            .get_or_init(|| self.compute_available())
            .iter()
            .map(|&i| &self.tree.entries()[i])
            .collect()
    }

    fn compute_available(&self) -> Vec<usize> {
        let applied = self.applied();
        let is_applied = |e: &TreeEntry| applied.contains_key(&e.reference);
        self.tree
            .entries()
            .iter()
            .filter(|e| !is_applied(e))
            .filter(|e| !self.tree.ancestors(e.id).any(is_applied))
            .filter(|e| {
                e.parent.is_none()
                    || e.children.is_empty()
                    || e.children.iter().any(|&c| is_applied(&self.tree.entries()[c]))
            })
            .filter(|e| {
                apply_abstraction(&self.discovery, &self.model, &e.reference.record(None), &self.repo).is_ok()
            })
            .map(|e| e.id)
            .collect()
    }

    fn changed(&mut self) {
        self.available = OnceLock::new();
        self.redoable = OnceLock::new();
    }

    /// Tree nodes that can be applied now: roots, leaves and parents of
    /// applied nodes, as long as nothing above them is applied.
    pub fn available(&self) -> Vec<Offer> {
        self.available_nodes().into_iter().map(|e| self.offer(&e.reference)).collect()
    }

    /// Applied abstractions that can be retracted: the latest one and,
    /// per type, those not nested in another applied abstraction. Entries
    /// whose removal would leave an unreconstructable history are dropped.
    pub fn redoable(&self) -> Vec<Offer> {
        self.redoable.get_or_init(|| self.compute_redoable()).clone()
    }

    fn compute_redoable(&self) -> Vec<Offer> {
        let history = self.history();
        let mut out = Vec::new();
        for (i, h) in history.iter().enumerate() {
            let mut rules = BTreeSet::new();
            if i + 1 == history.len() {
                rules.insert(RedoRule::MostRecent);
            }
            let nested = history.iter().enumerate().any(|(j, o)| {
                j != i
                    && o.reference.otype == h.reference.otype
                    && h.reference.transitions.is_subset(&o.reference.transitions)
                    && (h.reference.transitions != o.reference.transitions || j > i)
            });
            if !nested {
                rules.insert(RedoRule::CoarsestApplied);
            }
            if rules.is_empty() {
                continue;
            }
            let ok = self
                .log
                .st_abs_inverse(&h.oid)
                .is_ok_and(|l| overlay(&l, &self.discovery, &self.repo).is_ok());
            if !ok {
                continue;
            }
            out.push(Offer {
                oid: Some(h.oid.clone()),
                rules,
                ..self.offer(&h.reference)
            });
        }
        out
    }

    /// Records `r` in the log and returns the new abstraction object.
    pub fn apply(&mut self, r: &AbstractionRef) -> Result<ObjectId, SessionError> {
        if !self.available_nodes().iter().any(|e| &e.reference == r) {
            return Err(SessionError::NotAvailable(r.clone()));
        }
        let log = &self.log;
        let oid = self.ids.fresh(|s| log.is_taken(s));
        let events = record_events(&self.discovery, r);
        let next = self.log.st_abs(&events, &r.atype(), oid.clone())?;
        let rec = r.record(Some(oid.clone()));
        self.model = apply_abstraction(&self.discovery, &self.model, &rec, &self.repo)?;
        self.log = next;
        self.changed();
        if r.otype.class() == TypeClass::WorkflowBusiness {
            self.last_business = Some(r.otype.clone());
        }
        Ok(oid)
    }

    /// Retracts the abstraction carried by `oid`.
    pub fn redo(&mut self, oid: &ObjectId) -> Result<AbstractionRef, SessionError> {
        let offer = self
            .redoable()
            .into_iter()
            .find(|o| o.oid.as_ref() == Some(oid))
            .ok_or_else(|| SessionError::NotRedoable(oid.clone()))?;
        let next = self.log.st_abs_inverse(oid)?;
        self.model = overlay(&next, &self.discovery, &self.repo)?;
        self.log = next;
        self.changed();
        Ok(offer.reference)
    }

    /// The subprocess type related to the most events.
    fn coarsest_subprocess(&self) -> Option<ObjectType> {
        let mut count: BTreeMap<&ObjectType, usize> = BTreeMap::new();
        for e in self.log.events() {
            for t in e.wfomap.keys().filter(|t| t.class() == TypeClass::WorkflowSubprocess) {
                *count.entry(t).or_default() += 1;
            }
        }
        let max = count.values().copied().max()?;
        count.into_iter().find(|(_, c)| *c == max).map(|(t, _)| t.clone())
    }

    /// The next abstraction initialization would apply: lifecycle
    /// collapses first, then complete aggregations of subprocesses,
    /// resources and devices, then control flow, rotating over business
    /// types and taking the deepest node first.
    pub fn retrieve_next(&self) -> Option<AbstractionRef> {
        let nodes = self.available_nodes();
        let coarsest = self.coarsest_subprocess();
        let class = |e: &TreeEntry| {
            let t = &e.reference.otype;
            match (t.class(), e.reference.kind) {
                (TypeClass::WorkflowLifecycle, AbstractionKind::Cla) => 1,
                (TypeClass::WorkflowSubprocess, _) if Some(t) == coarsest.as_ref() => 3,
                (TypeClass::WorkflowSubprocess | TypeClass::WorkflowResource | TypeClass::WorkflowDevice, k)
                    if k.is_complete() =>
                {
                    2
                }
                (TypeClass::WorkflowBusiness, _) => 3,
                _ => 4,
            }
        };
        let order = |e: &&TreeEntry| {
            (
                e.reference.otype.clone(),
                std::cmp::Reverse(e.depth),
                e.reference.transitions.iter().next().cloned(),
            )
        };
        for c in [1, 2] {
            if let Some(e) = nodes.iter().filter(|e| class(e) == c).min_by_key(|e| order(e)) {
                return Some(e.reference.clone());
            }
        }
        let third: Vec<&&TreeEntry> = nodes.iter().filter(|e| class(e) == 3).collect();
        let types: BTreeSet<&ObjectType> = third.iter().map(|e| &e.reference.otype).collect();
        let next_type = match &self.last_business {
            Some(last) => types.iter().find(|t| **t > last).or_else(|| types.first()),
            None => types.first(),
        }?;
        third
            .into_iter()
            .filter(|e| &e.reference.otype == *next_type)
            .min_by_key(|e| order(e))
            .map(|e| e.reference.clone())
    }

    /// The current augmented log in its file format.
    pub fn export(&self) -> Vec<u8> {
        serialize_log(&self.log, LogFormat::OcelJson)
    }
}
