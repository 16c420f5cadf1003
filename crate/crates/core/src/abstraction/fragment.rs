use std::collections::BTreeSet;

use crate::discovery::{Operator, ProcessTree, TypedModel};
use crate::ocel::AbstractionKind;
use crate::ocpn::TransitionId;

/// A control-flow region of a typed model: either one operator node or a
/// contiguous run of children of a sequence node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fragment {
    pub node: usize,
    /// Child range for sequence runs; `None` for a whole node.
    pub range: Option<(usize, usize)>,
    /// Every original transition generated inside, silent ones included.
    pub transitions: BTreeSet<TransitionId>,
    /// Labeled original transitions in left-to-right leaf order.
    pub order: Vec<TransitionId>,
}

pub(crate) fn kind_operator(kind: AbstractionKind) -> Option<Operator> {
    match kind {
        AbstractionKind::Seq => Some(Operator::Seq),
        AbstractionKind::Xor => Some(Operator::Xor),
        AbstractionKind::And => Some(Operator::And),
        AbstractionKind::Loop => Some(Operator::Loop),
        _ => None,
    }
}

/// Labeled original transitions below `node`, in leaf order.
pub(crate) fn leaf_order(model: &TypedModel, node: usize) -> Vec<TransitionId> {
    let nodes = model.tree.preorder();
    let mut inside = vec![false; nodes.len()];
    let mut out = Vec::new();
    for n in &nodes {
        inside[n.id] = n.id == node || n.parent.is_some_and(|p| inside[p]);
        if inside[n.id] && matches!(n.node, ProcessTree::Activity(_)) {
            out.extend(model.node_transitions.get(&n.id).into_iter().flatten().cloned());
        }
    }
    out
}

/// Preorder ids of the children of `node`.
pub(crate) fn child_ids(model: &TypedModel, node: usize) -> Vec<usize> {
    model
        .tree
        .preorder()
        .iter()
        .filter(|n| n.parent == Some(node))
        .map(|n| n.id)
        .collect()
}

pub(crate) fn node_fragment(model: &TypedModel, node: usize, range: Option<(usize, usize)>) -> Fragment {
    match range {
        None => Fragment {
            node,
            range,
            transitions: model.subtree_transitions(node),
            order: leaf_order(model, node),
        },
        Some((i, j)) => {
            let kids = child_ids(model, node);
            Fragment {
                node,
                range,
                transitions: kids[i..=j].iter().flat_map(|&c| model.subtree_transitions(c)).collect(),
                order: kids[i..=j].iter().flat_map(|&c| leaf_order(model, c)).collect(),
            }
        }
    }
}

/// Locates the fragment of `kind` whose labeled transitions are exactly
/// `labeled`. Sequence runs are the shortest child range with that label
/// set; fragments with fewer than two labeled transitions are rejected.
pub fn find_fragment(model: &TypedModel, kind: AbstractionKind, labeled: &BTreeSet<TransitionId>) -> Option<Fragment> {
    let op = kind_operator(kind)?;
    if labeled.len() < 2 {
        return None;
    }
    for n in model.tree.preorder() {
        if n.node.operator() != Some(op) {
            continue;
        }
        let all: BTreeSet<TransitionId> = leaf_order(model, n.id).into_iter().collect();
        if !labeled.is_subset(&all) {
            continue;
        }
        if &all == labeled {
            return Some(node_fragment(model, n.id, None));
        }
        if op != Operator::Seq {
            continue;
        }
        let sets: Vec<BTreeSet<TransitionId>> = child_ids(model, n.id)
            .into_iter()
            .map(|c| leaf_order(model, c).into_iter().collect())
            .collect();
        let (Some(first), Some(last)) = (
            sets.iter().position(|s| !s.is_disjoint(labeled)),
            sets.iter().rposition(|s| !s.is_disjoint(labeled)),
        ) else {
            continue;
        };
        if first == last {
            continue;
        }
        let union: BTreeSet<TransitionId> = sets[first..=last].iter().flatten().cloned().collect();
        return (&union == labeled).then(|| node_fragment(model, n.id, Some((first, last))));
    }
    None
}

/// Whether `labeled` is a single-entry single-exit structure of `kind` in
/// the type's process tree.
pub fn is_sese(model: &TypedModel, labeled: &BTreeSet<TransitionId>, kind: AbstractionKind) -> bool {
    find_fragment(model, kind, labeled).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discovery::discover;
    use crate::fixtures;
    use crate::ocel::ObjectType;

    fn bank() -> TypedModel {
        let d = discover(&fixtures::bank()).unwrap();
        d.models[&ObjectType::parse("workflow:bank").unwrap()].clone()
    }

    fn set(ids: &[&str]) -> BTreeSet<TransitionId> {
        ids.iter().map(|&s| TransitionId::from(s)).collect()
    }

    #[test]
    fn click_to_retrieve_is_a_sequence() {
        let m = bank();
        let f = find_fragment(&m, AbstractionKind::Seq, &set(&["t5", "t6", "t7", "t8"])).unwrap();
        assert_eq!(f.range, Some((5, 8)));
        assert_eq!(f.order, ["t5", "t6", "t7", "t8"].map(TransitionId::from));
        assert!(!is_sese(&m, &set(&["t5", "t6", "t7", "t8"]), AbstractionKind::And));
    }

    #[test]
    fn degenerate_and_gapped_sets_are_rejected() {
        let m = bank();
        assert!(!is_sese(&m, &set(&["t5"]), AbstractionKind::Seq));
        assert!(!is_sese(&m, &set(&["t5", "t7"]), AbstractionKind::Seq));
        assert!(is_sese(&m, &set(&["t5", "t6"]), AbstractionKind::Seq));
    }

    #[test]
    fn whole_tree_is_a_node_fragment() {
        let m = bank();
        let all: BTreeSet<_> = (0..13).map(|i| TransitionId::new(format!("t{i}"))).collect();
        let f = find_fragment(&m, AbstractionKind::Seq, &all).unwrap();
        assert_eq!((f.node, f.range), (0, None));
    }
}
