use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{AcceptingOcpn, Arc};
use crate::ocel::{ObjectType, TypeClass};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Place,
    Transition,
    Silent,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: String,
    pub kind: NodeKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Place type.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub otype: Option<String>,
    /// Completely aggregated types referenced by a transition.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub refs: Vec<String>,
    /// `↔ <name>` badge texts, one per ref.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub badges: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub members: Vec<String>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub initial: u32,
    #[serde(rename = "final", default, skip_serializing_if = "is_zero")]
    pub final_tokens: u32,
}

fn is_zero(n: &u32) -> bool {
    *n == 0
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub src: String,
    pub dst: String,
    pub variable: bool,
    /// Type of the place end, for colouring.
    pub otype: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphMetrics {
    pub elements: usize,
    pub arcs: usize,
    pub object_types: usize,
    pub subprocesses: usize,
}

/// JSON rendering of a net for graphical clients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelGraphPayload {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
    pub metrics: GraphMetrics,
}

impl GraphMetrics {
    pub fn of(net: &AcceptingOcpn) -> Self {
        let size = net.size();
        let types = net.object_types();
        GraphMetrics {
            elements: size.elements,
            arcs: size.arcs,
            subprocesses: types
                .iter()
                .filter(|t| t.class() == TypeClass::WorkflowSubprocess)
                .count(),
            object_types: types.len(),
        }
    }
}

impl ModelGraphPayload {
    pub fn from_net(net: &AcceptingOcpn) -> Self {
        let mut nodes = Vec::with_capacity(net.size().elements);
        for p in net.places() {
            nodes.push(GraphNode {
                id: p.id.to_string(),
                kind: NodeKind::Place,
                label: None,
                otype: Some(p.otype.name().to_string()),
                refs: Vec::new(),
                badges: Vec::new(),
                members: Vec::new(),
                initial: net.initial_marking().get(&p.id).copied().unwrap_or(0),
                final_tokens: net.final_marking().get(&p.id).copied().unwrap_or(0),
            });
        }
        for t in net.transitions() {
            nodes.push(GraphNode {
                id: t.id.to_string(),
                kind: if t.is_silent() {
                    NodeKind::Silent
                } else {
                    NodeKind::Transition
                },
                label: t.label.clone(),
                otype: None,
                refs: t.refs.iter().map(|r| r.name().to_string()).collect(),
                badges: t.refs.iter().map(|r| format!("↔ {}", r.short_name())).collect(),
                members: t.members.clone(),
                initial: 0,
                final_tokens: 0,
            });
        }
        let edges = net
            .arcs()
            .map(|a| {
                let (src, dst) = match a {
                    Arc::Input { place, transition } => (place.to_string(), transition.to_string()),
                    Arc::Output { transition, place } => (transition.to_string(), place.to_string()),
                };
                GraphEdge {
                    src,
                    dst,
                    variable: net.is_variable(a),
                    otype: net
                        .place(a.place())
                        .map(|p| p.otype.name().to_string())
                        .unwrap_or_default(),
                }
            })
            .collect();
        ModelGraphPayload {
            nodes,
            edges,
            metrics: GraphMetrics::of(net),
        }
    }
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n")
}

/// Graphviz rendering: places as circles coloured per type, transitions as
/// boxes (silent ones filled), variable arcs double-stroked.
pub fn to_dot(net: &AcceptingOcpn) -> String {
    let colors: BTreeMap<ObjectType, &str> = net
        .object_types()
        .into_iter()
        .enumerate()
        .map(|(i, t)| (t, PALETTE[i % PALETTE.len()]))
        .collect();
    let mut out = String::from("digraph ocpn {\n  rankdir=LR;\n  node [fontname=\"Helvetica\"];\n");
    for p in net.places() {
        let c = colors[&p.otype];
        let init = net.initial_marking().get(&p.id).copied().unwrap_or(0);
        let fin = net.final_marking().get(&p.id).copied().unwrap_or(0);
        let label = if init > 0 { "●".to_string() } else { String::new() };
        let shape = if fin > 0 { "doublecircle" } else { "circle" };
        let _ = writeln!(
            out,
            "  \"{}\" [shape={shape}, label=\"{label}\", color=\"{c}\", tooltip=\"{}\"];",
            p.id,
            escape(p.otype.name())
        );
    }
    for t in net.transitions() {
        if t.is_silent() {
            let _ = writeln!(
                out,
                "  \"{}\" [shape=box, style=filled, fillcolor=black, label=\"\", width=0.15];",
                t.id
            );
        } else {
            let _ = writeln!(
                out,
                "  \"{}\" [shape=box, label=\"{}\"];",
                t.id,
                escape(&t.display_label())
            );
        }
    }
    for a in net.arcs() {
        let c = net.place(a.place()).map(|p| colors[&p.otype]).unwrap_or("black");
        let color = if net.is_variable(a) {
            format!("{c}:invis:{c}")
        } else {
            c.to_string()
        };
        let (s, d) = match a {
            Arc::Input { place, transition } => (place.as_str(), transition.as_str()),
            Arc::Output { transition, place } => (transition.as_str(), place.as_str()),
        };
        let _ = writeln!(out, "  \"{s}\" -> \"{d}\" [color=\"{color}\"];");
    }
    out.push_str("}\n");
    out
}
