use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use super::{AcceptingOcpn, Arc, Marking, PlaceId, TransitionId};

/// Dense view of a net: places and transitions numbered in id order.
pub(crate) struct NetIndex {
    pub places: Vec<PlaceId>,
    pub transitions: Vec<TransitionId>,
    pub pre: Vec<Vec<usize>>,
    pub post: Vec<Vec<usize>>,
}

impl NetIndex {
    pub fn new(net: &AcceptingOcpn) -> Self {
        let places: Vec<PlaceId> = net.places().map(|p| p.id.clone()).collect();
        let transitions: Vec<TransitionId> = net.transitions().map(|t| t.id.clone()).collect();
        let pix: HashMap<&PlaceId, usize> = places.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let tix: HashMap<&TransitionId, usize> =
            transitions.iter().enumerate().map(|(i, t)| (t, i)).collect();
        let mut pre = vec![Vec::new(); transitions.len()];
        let mut post = vec![Vec::new(); transitions.len()];
        for a in net.arcs() {
            let (p, t) = (pix[a.place()], tix[a.transition()]);
            match a {
                Arc::Input { .. } => pre[t].push(p),
                Arc::Output { .. } => post[t].push(p),
            }
        }
        NetIndex {
            places,
            transitions,
            pre,
            post,
        }
    }

    pub fn vector(&self, m: &Marking) -> Vec<u32> {
        self.places.iter().map(|p| m.get(p).copied().unwrap_or(0)).collect()
    }

    pub fn enabled(&self, m: &[u32], t: usize) -> bool {
        self.pre[t].iter().all(|&p| m[p] > 0)
    }

    pub fn fire(&self, m: &[u32], t: usize) -> Vec<u32> {
        let mut n = m.to_vec();
        for &p in &self.pre[t] {
            n[p] -= 1;
        }
        for &p in &self.post[t] {
            n[p] += 1;
        }
        n
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("state space exceeds {bound} markings")]
pub struct StateSpaceExceeded {
    pub bound: usize,
}

/// Reachability graph. State 0 is the initial marking.
#[derive(Debug, Clone)]
pub struct StateSpace {
    pub places: Vec<PlaceId>,
    pub transitions: Vec<TransitionId>,
    pub markings: Vec<Vec<u32>>,
    /// Per state: `(transition index, successor state)`.
    pub edges: Vec<Vec<(usize, usize)>>,
}

impl StateSpace {
    pub fn state_of(&self, m: &[u32]) -> Option<usize> {
        self.markings.iter().position(|x| x == m)
    }

    /// States from which some state in `targets` is reachable.
    pub fn coreachable(&self, targets: &[usize]) -> Vec<bool> {
        let mut rev = vec![Vec::new(); self.markings.len()];
        for (s, out) in self.edges.iter().enumerate() {
            for &(_, d) in out {
                rev[d].push(s);
            }
        }
        let mut seen = vec![false; self.markings.len()];
        let mut queue: VecDeque<usize> = targets.iter().copied().collect();
        for &t in targets {
            seen[t] = true;
        }
        while let Some(s) = queue.pop_front() {
            for &p in &rev[s] {
                if !seen[p] {
                    seen[p] = true;
                    queue.push_back(p);
                }
            }
        }
        seen
    }
}

/// Breadth-first exploration of the markings reachable from the initial
/// marking, failing once more than `bound` markings are found.
pub fn explore(net: &AcceptingOcpn, bound: usize) -> Result<StateSpace, StateSpaceExceeded> {
    let ix = NetIndex::new(net);
    let init = ix.vector(net.initial_marking());
    let mut seen: HashMap<Vec<u32>, usize> = HashMap::new();
    let mut markings = vec![init.clone()];
    let mut edges: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
    seen.insert(init, 0);
    let mut next = 0;
    while next < markings.len() {
        let m = markings[next].clone();
        for t in 0..ix.transitions.len() {
            if !ix.enabled(&m, t) {
                continue;
            }
            let n = ix.fire(&m, t);
            let d = match seen.get(&n) {
                Some(&d) => d,
                None => {
                    if markings.len() >= bound {
                        return Err(StateSpaceExceeded { bound });
                    }
                    let d = markings.len();
                    seen.insert(n.clone(), d);
                    markings.push(n);
                    edges.push(Vec::new());
                    d
                }
            };
            edges[next].push((t, d));
        }
        next += 1;
    }
    Ok(StateSpace {
        places: ix.places,
        transitions: ix.transitions,
        markings,
        edges,
    })
}
