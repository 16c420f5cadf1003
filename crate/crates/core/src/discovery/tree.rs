use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Operator {
    Seq,
    Xor,
    And,
    Loop,
}

impl Operator {
    pub fn glyph(self) -> &'static str {
        match self {
            Operator::Seq => "→",
            Operator::Xor => "×",
            Operator::And => "∧",
            Operator::Loop => "↺",
        }
    }
}

/// Process tree. `Loop` children are the do-part followed by redo parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessTree {
    Activity(String),
    Silent,
    Seq(Vec<ProcessTree>),
    Xor(Vec<ProcessTree>),
    And(Vec<ProcessTree>),
    Loop(Vec<ProcessTree>),
}

/// Position of a node inside a tree. Ids are preorder indices.
#[derive(Clone, Copy, Debug)]
pub struct TreeNode<'a> {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    /// Index among the parent's children.
    pub index: usize,
    pub node: &'a ProcessTree,
}

impl ProcessTree {
    pub fn activity(label: impl Into<String>) -> Self {
        ProcessTree::Activity(label.into())
    }

    pub fn operator(&self) -> Option<Operator> {
        match self {
            ProcessTree::Seq(_) => Some(Operator::Seq),
            ProcessTree::Xor(_) => Some(Operator::Xor),
            ProcessTree::And(_) => Some(Operator::And),
            ProcessTree::Loop(_) => Some(Operator::Loop),
            _ => None,
        }
    }

    pub fn children(&self) -> &[ProcessTree] {
        match self {
            ProcessTree::Seq(c) | ProcessTree::Xor(c) | ProcessTree::And(c) | ProcessTree::Loop(c) => c,
            _ => &[],
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, ProcessTree::Activity(_) | ProcessTree::Silent)
    }

    /// All nodes in preorder.
    pub fn preorder(&self) -> Vec<TreeNode<'_>> {
        fn walk<'a>(t: &'a ProcessTree, parent: Option<usize>, depth: usize, index: usize, out: &mut Vec<TreeNode<'a>>) {
            let id = out.len();
            out.push(TreeNode {
                id,
                parent,
                depth,
                index,
                node: t,
            });
            for (i, c) in t.children().iter().enumerate() {
                walk(c, Some(id), depth + 1, i, out);
            }
        }
        let mut out = Vec::new();
        walk(self, None, 0, 0, &mut out);
        out
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(ProcessTree::node_count).sum::<usize>()
    }

    /// Activity labels of the leaves, left to right.
    pub fn labels(&self) -> Vec<&str> {
        match self {
            ProcessTree::Activity(a) => vec![a.as_str()],
            ProcessTree::Silent => Vec::new(),
            _ => self.children().iter().flat_map(ProcessTree::labels).collect(),
        }
    }

    pub fn alphabet(&self) -> BTreeSet<&str> {
        self.labels().into_iter().collect()
    }

    /// Flattens nested `Seq`/`Xor`/`And` of the same operator and unwraps
    /// single-child nodes of those operators.
    pub fn normalize(self) -> ProcessTree {
        fn flat(op: Operator, children: Vec<ProcessTree>) -> ProcessTree {
            let mut out = Vec::new();
            for c in children.into_iter().map(ProcessTree::normalize) {
                if c.operator() == Some(op) && op != Operator::Loop {
                    out.extend(c.into_children());
                } else {
                    out.push(c);
                }
            }
            if out.len() == 1 && op != Operator::Loop {
                return out.pop().unwrap();
            }
            match op {
                Operator::Seq => ProcessTree::Seq(out),
                Operator::Xor => ProcessTree::Xor(out),
                Operator::And => ProcessTree::And(out),
                Operator::Loop => ProcessTree::Loop(out),
            }
        }
        match self {
            ProcessTree::Seq(c) => flat(Operator::Seq, c),
            ProcessTree::Xor(c) => flat(Operator::Xor, c),
            ProcessTree::And(c) => flat(Operator::And, c),
            ProcessTree::Loop(c) => flat(Operator::Loop, c),
            leaf => leaf,
        }
    }

    fn into_children(self) -> Vec<ProcessTree> {
        match self {
            ProcessTree::Seq(c) | ProcessTree::Xor(c) | ProcessTree::And(c) | ProcessTree::Loop(c) => c,
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for ProcessTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProcessTree::Activity(a) => f.write_str(a),
            ProcessTree::Silent => f.write_str("τ"),
            _ => {
                f.write_str(self.operator().unwrap().glyph())?;
                f.write_str("(")?;
                for (i, c) in self.children().iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
        }
    }
}
