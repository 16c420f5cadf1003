use std::collections::{BTreeMap, BTreeSet};

use super::tree::ProcessTree;
use crate::ocel::ObjectType;
use crate::ocpn::{AcceptingOcpn, PlaceId, Transition, TransitionId};

/// Hands out `p<n>`/`t<n>` ids and remembers which transition carries each
/// label, so that compiling several trees into one net fuses equal labels.
#[derive(Debug, Default)]
pub(crate) struct IdAlloc {
    places: usize,
    transitions: usize,
    labels: BTreeMap<String, TransitionId>,
}

impl IdAlloc {
    fn place(&mut self, net: &mut AcceptingOcpn, otype: &ObjectType) -> PlaceId {
        let id = format!("p{}", self.places);
        self.places += 1;
        net.add_place(id, otype).expect("fresh place id")
    }

    fn silent(&mut self, net: &mut AcceptingOcpn) -> TransitionId {
        let id = format!("t{}", self.transitions);
        self.transitions += 1;
        net.add_transition(Transition::silent(id)).expect("fresh transition id")
    }

    fn labeled(&mut self, net: &mut AcceptingOcpn, label: &str) -> TransitionId {
        if let Some(t) = self.labels.get(label) {
            if net.transition(t).is_none() {
                net.add_transition(Transition::labeled(t.as_str(), label))
                    .expect("label id unused in this net");
            }
            return t.clone();
        }
        let id = format!("t{}", self.transitions);
        self.transitions += 1;
        let t = net.add_transition(Transition::labeled(id, label)).expect("fresh transition id");
        self.labels.insert(label.to_string(), t.clone());
        t
    }
}

/// Result of compiling one tree: the single-type net plus, per preorder
/// node id, the transitions that node itself generated.
#[derive(Debug, Clone)]
pub(crate) struct Compiled {
    pub net: AcceptingOcpn,
    pub node_transitions: BTreeMap<usize, Vec<TransitionId>>,
}

struct Ctx<'a> {
    otype: &'a ObjectType,
    alloc: &'a mut IdAlloc,
    net: AcceptingOcpn,
    own: BTreeMap<usize, Vec<TransitionId>>,
    next_node: usize,
}

impl Ctx<'_> {
    fn arc_in(&mut self, p: &PlaceId, t: &TransitionId) {
        self.net.add_input(p, t).expect("known endpoints");
    }

    fn arc_out(&mut self, t: &TransitionId, p: &PlaceId) {
        self.net.add_output(t, p).expect("known endpoints");
    }

    fn place(&mut self) -> PlaceId {
        self.alloc.place(&mut self.net, self.otype)
    }

    fn silent(&mut self, node: usize) -> TransitionId {
        let t = self.alloc.silent(&mut self.net);
        self.own.entry(node).or_default().push(t.clone());
        t
    }

    fn compile(&mut self, tree: &ProcessTree, pin: &PlaceId, pout: &PlaceId) {
        let node = self.next_node;
        self.next_node += 1;
        match tree {
            ProcessTree::Activity(a) => {
                let t = self.alloc.labeled(&mut self.net, a);
                self.own.entry(node).or_default().push(t.clone());
                self.arc_in(pin, &t);
                self.arc_out(&t, pout);
            }
            ProcessTree::Silent => {
                let t = self.silent(node);
                self.arc_in(pin, &t);
                self.arc_out(&t, pout);
            }
            ProcessTree::Seq(children) => {
                let mut from = pin.clone();
                for (i, c) in children.iter().enumerate() {
                    let to = if i + 1 == children.len() {
                        pout.clone()
                    } else {
                        self.place()
                    };
                    self.compile(c, &from, &to);
                    from = to;
                }
            }
            ProcessTree::Xor(children) => {
                for c in children {
                    self.compile(c, pin, pout);
                }
            }
            ProcessTree::And(children) => {
                let split = self.silent(node);
                let join = self.silent(node);
                self.arc_in(pin, &split);
                self.arc_out(&join, pout);
                for c in children {
                    let (a, b) = (self.place(), self.place());
                    self.arc_out(&split, &a);
                    self.arc_in(&b, &join);
                    self.compile(c, &a, &b);
                }
            }
            ProcessTree::Loop(children) => {
                let enter = self.silent(node);
                let exit = self.silent(node);
                let (l1, l2) = (self.place(), self.place());
                self.arc_in(pin, &enter);
                self.arc_out(&enter, &l1);
                self.arc_in(&l2, &exit);
                self.arc_out(&exit, pout);
                self.compile(&children[0], &l1, &l2);
                for c in &children[1..] {
                    self.compile(c, &l2, &l1);
                }
            }
        }
    }
}

pub(crate) fn compile_with(tree: &ProcessTree, otype: &ObjectType, alloc: &mut IdAlloc) -> Compiled {
    let mut ctx = Ctx {
        otype,
        alloc,
        net: AcceptingOcpn::new(),
        own: BTreeMap::new(),
        next_node: 0,
    };
    let src = ctx.place();
    let snk = ctx.place();
    ctx.compile(tree, &src, &snk);
    let mut net = ctx.net;
    net.mark_initial(&src, 1).expect("source exists");
    net.mark_final(&snk, 1).expect("sink exists");
    Compiled {
        net,
        node_transitions: ctx.own,
    }
}

/// Standard block-structured translation of a process tree into a workflow
/// net of one object type. Ids are `p<n>`/`t<n>` in tree preorder.
pub fn compile_tree(tree: &ProcessTree, otype: &ObjectType) -> AcceptingOcpn {
    compile_with(tree, otype, &mut IdAlloc::default()).net
}

/// Transitions generated anywhere in the subtree rooted at `node`.
pub(crate) fn subtree_transitions(
    tree: &ProcessTree,
    own: &BTreeMap<usize, Vec<TransitionId>>,
    node: usize,
) -> BTreeSet<TransitionId> {
    let nodes = tree.preorder();
    let mut inside = vec![false; nodes.len()];
    let mut out = BTreeSet::new();
    for n in &nodes {
        inside[n.id] = n.id == node || n.parent.is_some_and(|p| inside[p]);
        if inside[n.id] {
            out.extend(own.get(&n.id).into_iter().flatten().cloned());
        }
    }
    out
}
