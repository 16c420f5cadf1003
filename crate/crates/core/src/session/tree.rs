use std::collections::BTreeSet;

use serde::Serialize;

use crate::abstraction::{
    admissible, complete_ref, find_fragment, AbstractionRef, Model, Repository,
};
use crate::discovery::{Discovery, Operator, ProcessTree, TypedModel};
use crate::ocel::{AbstractionKind, ObjectType, TypeClass};
use crate::ocpn::TransitionId;

/// One abstraction tree node. `span` holds every original transition the
/// node covers, silent ones included, and decides the nesting.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreeEntry {
    pub id: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub depth: usize,
    pub reference: AbstractionRef,
    #[serde(skip)]
    span: BTreeSet<TransitionId>,
}

/// Per workflow type: the complete aggregation at the root and the
/// control-flow aggregations below it, nested by containment.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AbstractionTree {
    entries: Vec<TreeEntry>,
}

impl AbstractionTree {
    pub fn entries(&self) -> &[TreeEntry] {
        &self.entries
    }

    pub fn get(&self, id: usize) -> Option<&TreeEntry> {
        self.entries.get(id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn roots(&self) -> impl Iterator<Item = &TreeEntry> {
        self.entries.iter().filter(|e| e.parent.is_none())
    }

    pub fn find(&self, r: &AbstractionRef) -> Option<&TreeEntry> {
        self.entries.iter().find(|e| &e.reference == r)
    }

    pub fn ancestors(&self, id: usize) -> impl Iterator<Item = &TreeEntry> {
        std::iter::successors(self.entries[id].parent, |&p| self.entries[p].parent)
            .map(|p| &self.entries[p])
    }

    pub fn of_type<'a>(&'a self, t: &'a ObjectType) -> impl Iterator<Item = &'a TreeEntry> + 'a {
        self.entries.iter().filter(move |e| &e.reference.otype == t)
    }
}

fn operator_kind(op: Operator) -> AbstractionKind {
    match op {
        Operator::Seq => AbstractionKind::Seq,
        Operator::Xor => AbstractionKind::Xor,
        Operator::And => AbstractionKind::And,
        Operator::Loop => AbstractionKind::Loop,
    }
}

fn labeled(d: &Discovery, span: &BTreeSet<TransitionId>) -> BTreeSet<TransitionId> {
    span.iter()
        .filter(|t| d.net.transition(t).is_some_and(|t| !t.is_silent()))
        .cloned()
        .collect()
}

/// Control-flow candidates of one type: every operator node and the
/// maximal runs of sequence children free of interaction transitions.
fn candidates(d: &Discovery, m: &TypedModel) -> Vec<(AbstractionRef, BTreeSet<TransitionId>)> {
    let exclusive = |span: &BTreeSet<TransitionId>| {
        span.iter().all(|t| {
            let ts = d.net.transition_types(t);
            ts.len() == 1 && ts.contains(&m.otype)
        })
    };
    let mut out = Vec::new();
    let mut push = |kind, span: BTreeSet<TransitionId>| {
        let labeled = labeled(d, &span);
        if labeled.len() >= 2 {
            out.push((
                AbstractionRef {
                    kind,
                    otype: m.otype.clone(),
                    transitions: labeled,
                },
                span,
            ));
        }
    };
    for n in m.tree.preorder() {
        let Some(op) = n.node.operator() else { continue };
        push(operator_kind(op), m.subtree_transitions(n.id));
        let ProcessTree::Seq(kids) = n.node else { continue };
        let ids: Vec<usize> = m
            .tree
            .preorder()
            .iter()
            .filter(|c| c.parent == Some(n.id))
            .map(|c| c.id)
            .collect();
        let spans: Vec<BTreeSet<TransitionId>> = ids.iter().map(|&c| m.subtree_transitions(c)).collect();
        let mut i = 0;
        while i < kids.len() {
            if !exclusive(&spans[i]) {
                i += 1;
                continue;
            }
            let mut j = i;
            while j + 1 < kids.len() && exclusive(&spans[j + 1]) {
                j += 1;
            }
            if j > i && !(i == 0 && j + 1 == kids.len()) {
                push(AbstractionKind::Seq, spans[i..=j].iter().flatten().cloned().collect());
            }
            i = j + 1;
        }
    }
    out
}

/// Builds the abstraction tree. Nodes not admissible on the discovered net
/// or unknown to `repo` are left out.
pub fn build_tree(d: &Discovery, repo: &Repository) -> AbstractionTree {
    let original = Model::original(&d.net);
    let ok = |r: &AbstractionRef| repo.get(r.kind).is_some() && admissible(d, &original, &r.record(None), repo);
    let mut entries: Vec<TreeEntry> = Vec::new();
    for (t, m) in &d.models {
        let Some(root) = complete_ref(d, t) else { continue };
        if !ok(&root) {
            log::debug!("no complete aggregation for {t}");
            continue;
        }
        let base = entries.len();
        entries.push(TreeEntry {
            id: base,
            parent: None,
            children: Vec::new(),
            depth: 0,
            reference: root,
            span: m.net.transitions().map(|t| t.id.clone()).collect(),
        });
        if t.class() == TypeClass::WorkflowLifecycle {
            continue;
        }
        let mut seen = BTreeSet::new();
        let mut nodes: Vec<(AbstractionRef, BTreeSet<TransitionId>)> = candidates(d, m)
            .into_iter()
            .filter(|(r, _)| seen.insert(r.clone()))
            .filter(|(r, _)| find_fragment(m, r.kind, &r.transitions).is_some() && ok(r))
            .collect();
        // larger spans first so parents precede their children
        nodes.sort_by(|(ra, a), (rb, b)| b.len().cmp(&a.len()).then_with(|| ra.cmp(rb)));
        for (r, span) in nodes {
            let parent = entries[base..]
                .iter()
                .filter(|e| span.is_subset(&e.span) && span != e.span)
                .min_by_key(|e| e.span.len())
                .map(|e| e.id)
                .unwrap_or(base);
            let id = entries.len();
            let depth = entries[parent].depth + 1;
            entries[parent].children.push(id);
            entries.push(TreeEntry {
                id,
                parent: Some(parent),
                children: Vec::new(),
                depth,
                reference: r,
                span,
            });
        }
    }
    AbstractionTree { entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discovery::discover;
    use crate::fixtures;

    fn ids(v: &[&str]) -> BTreeSet<TransitionId> {
        v.iter().map(|&s| s.into()).collect()
    }

    #[test]
    fn fixture_tree() {
        let d = discover(&fixtures::bank()).unwrap();
        let tree = build_tree(&d, &Repository::standard());
        let shape: Vec<(Option<usize>, AbstractionKind, &str, usize)> = tree
            .entries()
            .iter()
            .map(|e| (e.parent, e.reference.kind, e.reference.otype.short_name(), e.reference.transitions.len()))
            .collect();
        assert_eq!(
            shape,
            [
                (None, AbstractionKind::Caa, "bank", 13),
                (Some(0), AbstractionKind::Seq, "bank", 4),
                (Some(0), AbstractionKind::Seq, "bank", 2),
                (None, AbstractionKind::Caa, "client", 3),
                (None, AbstractionKind::Cla, "finalize account opening", 4),
            ]
        );
        assert_eq!(tree.get(1).unwrap().reference.transitions, ids(&["t5", "t6", "t7", "t8"]));
        assert_eq!(tree.get(2).unwrap().reference.transitions, ids(&["t1", "t2"]));
        assert_eq!(tree.ancestors(1).map(|e| e.id).collect::<Vec<_>>(), [0]);
    }

    #[test]
    fn single_activity_type_is_root_only() {
        let src = br#"{"objects": {"o": {"type": "workflow:a"}, "r": {"type": "workflow:res:clerk"}}, "events": [
            {"id": "1", "activity": "x", "timestamp": "2024-01-01T00:00:00Z", "relations": {"workflow:a": ["o"], "workflow:res:clerk": ["r"]}},
            {"id": "2", "activity": "y", "timestamp": "2024-01-01T00:00:01Z", "relations": {"workflow:a": ["o"]}}]}"#;
        let log = crate::ocel::parse_log(src, crate::ocel::LogFormat::OcelJson).unwrap();
        let d = discover(&log).unwrap();
        let tree = build_tree(&d, &Repository::standard());
        let res = ObjectType::parse("workflow:res:clerk").unwrap();
        assert_eq!(tree.of_type(&res).count(), 1);
    }
}
