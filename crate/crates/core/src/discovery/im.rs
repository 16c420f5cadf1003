//! Inductive Miner without noise filtering.
//!
//! Cuts are tried in the order exclusive choice, sequence, parallel, loop
//! on the directly-follows graph of the (sub)log; the fall-through is a
//! flower loop. Every input trace is in the language of the result.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::tree::ProcessTree;

type Trace = Vec<usize>;

struct Dfg {
    acts: Vec<usize>,
    succ: BTreeMap<usize, BTreeSet<usize>>,
    start: BTreeSet<usize>,
    end: BTreeSet<usize>,
}

impl Dfg {
    fn new(log: &[Trace]) -> Self {
        let mut acts = BTreeSet::new();
        let mut succ: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        let mut start = BTreeSet::new();
        let mut end = BTreeSet::new();
        for t in log {
            acts.extend(t.iter().copied());
            if let (Some(&f), Some(&l)) = (t.first(), t.last()) {
                start.insert(f);
                end.insert(l);
            }
            for w in t.windows(2) {
                succ.entry(w[0]).or_default().insert(w[1]);
            }
        }
        Dfg {
            acts: acts.into_iter().collect(),
            succ,
            start,
            end,
        }
    }

    fn edge(&self, a: usize, b: usize) -> bool {
        self.succ.get(&a).is_some_and(|s| s.contains(&b))
    }

    fn reach(&self) -> BTreeMap<usize, BTreeSet<usize>> {
        self.acts
            .iter()
            .map(|&a| {
                let mut seen = BTreeSet::new();
                let mut q: VecDeque<usize> = self.succ.get(&a).into_iter().flatten().copied().collect();
                while let Some(x) = q.pop_front() {
                    if seen.insert(x) {
                        q.extend(self.succ.get(&x).into_iter().flatten().copied());
                    }
                }
                (a, seen)
            })
            .collect()
    }
}

/// Connected components of an undirected graph over `nodes`, each sorted,
/// listed by smallest member.
fn components(nodes: &[usize], adjacent: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut comp: BTreeMap<usize, usize> = BTreeMap::new();
    let mut out: Vec<Vec<usize>> = Vec::new();
    for &n in nodes {
        if comp.contains_key(&n) {
            continue;
        }
        let id = out.len();
        let mut members = vec![n];
        comp.insert(n, id);
        let mut i = 0;
        while i < members.len() {
            let x = members[i];
            for &y in nodes {
                if !comp.contains_key(&y) && adjacent(x, y) {
                    comp.insert(y, id);
                    members.push(y);
                }
            }
            i += 1;
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

fn xor_cut(dfg: &Dfg) -> Option<Vec<Vec<usize>>> {
    let c = components(&dfg.acts, |a, b| dfg.edge(a, b) || dfg.edge(b, a));
    (c.len() > 1).then_some(c)
}

fn seq_cut(dfg: &Dfg) -> Option<Vec<Vec<usize>>> {
    let reach = dfg.reach();
    // strongly connected components: mutual reachability
    let sccs = components(&dfg.acts, |a, b| reach[&a].contains(&b) && reach[&b].contains(&a));
    if sccs.len() < 2 {
        return None;
    }
    // topological order of the condensation, smallest member first on ties
    let reaches = |x: &Vec<usize>, y: &Vec<usize>| reach[&x[0]].contains(&y[0]);
    let mut remaining: Vec<usize> = (0..sccs.len()).collect();
    let mut order = Vec::new();
    while !remaining.is_empty() {
        let pos = remaining
            .iter()
            .position(|&i| {
                !remaining
                    .iter()
                    .any(|&j| j != i && reaches(&sccs[j], &sccs[i]))
            })
            .expect("condensation is acyclic");
        order.push(remaining.remove(pos));
    }
    // a prefix of the order is a valid cut iff it reaches all of the rest
    let mut groups = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    for k in 0..order.len() {
        current.extend(&sccs[order[k]]);
        let valid = k + 1 < order.len()
            && order[..=k].iter().all(|&i| {
                order[k + 1..].iter().all(|&j| reaches(&sccs[i], &sccs[j]))
            });
        if valid {
            current.sort_unstable();
            groups.push(std::mem::take(&mut current));
        }
    }
    if groups.is_empty() {
        return None;
    }
    current.sort_unstable();
    groups.push(current);
    Some(groups)
}

fn par_cut(dfg: &Dfg) -> Option<Vec<Vec<usize>>> {
    let c = components(&dfg.acts, |a, b| !(dfg.edge(a, b) && dfg.edge(b, a)));
    let ok = c.len() > 1
        && c.iter().all(|g| {
            g.iter().any(|a| dfg.start.contains(a)) && g.iter().any(|a| dfg.end.contains(a))
        });
    ok.then_some(c)
}

fn loop_cut(dfg: &Dfg) -> Option<Vec<Vec<usize>>> {
    let mut body: BTreeSet<usize> = dfg.start.union(&dfg.end).copied().collect();
    loop {
        let rest: Vec<usize> = dfg.acts.iter().copied().filter(|a| !body.contains(a)).collect();
        let comps = components(&rest, |a, b| dfg.edge(a, b) || dfg.edge(b, a));
        let mut changed = false;
        for c in &comps {
            let ok = c.iter().all(|&y| {
                let entered = body.iter().filter(|&&x| dfg.edge(x, y)).collect::<Vec<_>>();
                let exits = body.iter().filter(|&&x| dfg.edge(y, x)).collect::<Vec<_>>();
                entered.iter().all(|x| dfg.end.contains(x))
                    && exits.iter().all(|x| dfg.start.contains(x))
                    && (entered.is_empty() || dfg.end.iter().all(|&e| dfg.edge(e, y)))
                    && (exits.is_empty() || dfg.start.iter().all(|&s| dfg.edge(y, s)))
            });
            if !ok {
                body.extend(c.iter().copied());
                changed = true;
            }
        }
        if !changed {
            if comps.is_empty() {
                return None;
            }
            let mut out = vec![body.into_iter().collect()];
            out.extend(comps);
            return Some(out);
        }
    }
}

fn group_of(groups: &[Vec<usize>]) -> BTreeMap<usize, usize> {
    groups
        .iter()
        .enumerate()
        .flat_map(|(i, g)| g.iter().map(move |&a| (a, i)))
        .collect()
}

fn mine(log: Vec<Trace>, names: &[String]) -> ProcessTree {
    if log.iter().all(|t| t.is_empty()) {
        return ProcessTree::Silent;
    }
    if log.iter().any(|t| t.is_empty()) {
        let rest: Vec<Trace> = log.into_iter().filter(|t| !t.is_empty()).collect();
        return ProcessTree::Xor(vec![ProcessTree::Silent, mine(rest, names)]);
    }
    let dfg = Dfg::new(&log);
    if dfg.acts.len() == 1 {
        let a = ProcessTree::Activity(names[dfg.acts[0]].clone());
        return if log.iter().all(|t| t.len() == 1) {
            a
        } else {
            ProcessTree::Loop(vec![a, ProcessTree::Silent])
        };
    }
    if let Some(groups) = xor_cut(&dfg) {
        let g = group_of(&groups);
        let mut sub = vec![Vec::new(); groups.len()];
        for t in log {
            let i = g[&t[0]];
            sub[i].push(t);
        }
        return ProcessTree::Xor(sub.into_iter().map(|l| mine(l, names)).collect());
    }
    if let Some(groups) = seq_cut(&dfg) {
        let g = group_of(&groups);
        let mut sub = vec![Vec::new(); groups.len()];
        for t in &log {
            let mut parts = vec![Vec::new(); groups.len()];
            for &a in t {
                parts[g[&a]].push(a);
            }
            for (i, p) in parts.into_iter().enumerate() {
                sub[i].push(p);
            }
        }
        return ProcessTree::Seq(sub.into_iter().map(|l| mine(l, names)).collect());
    }
    if let Some(groups) = par_cut(&dfg) {
        let g = group_of(&groups);
        let mut sub = vec![Vec::new(); groups.len()];
        for t in &log {
            for (i, s) in sub.iter_mut().enumerate() {
                s.push(t.iter().copied().filter(|a| g[a] == i).collect());
            }
        }
        return ProcessTree::And(sub.into_iter().map(|l| mine(l, names)).collect());
    }
    if let Some(groups) = loop_cut(&dfg) {
        let g = group_of(&groups);
        let mut sub: Vec<Vec<Trace>> = vec![Vec::new(); groups.len()];
        for t in &log {
            let mut run: Trace = Vec::new();
            let mut cur = g[&t[0]];
            for &a in t {
                if g[&a] != cur {
                    sub[cur].push(std::mem::take(&mut run));
                    cur = g[&a];
                }
                run.push(a);
            }
            sub[cur].push(run);
        }
        return ProcessTree::Loop(sub.into_iter().map(|l| mine(l, names)).collect());
    }
    let leaves = dfg
        .acts
        .iter()
        .map(|&a| ProcessTree::Activity(names[a].clone()))
        .collect();
    ProcessTree::Loop(vec![ProcessTree::Xor(leaves), ProcessTree::Silent])
}

/// Mines a process tree from a multiset of activity sequences.
///
/// The result is normalized and deterministic: it depends only on the set
/// of distinct traces.
pub fn mine_tree(traces: &[Vec<String>]) -> ProcessTree {
    let names: Vec<String> = traces
        .iter()
        .flatten()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let ix: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let log: BTreeSet<Trace> = traces
        .iter()
        .map(|t| t.iter().map(|a| ix[a.as_str()]).collect())
        .collect();
    if log.is_empty() {
        return ProcessTree::Silent;
    }
    mine(log.into_iter().collect(), &names).normalize()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Language of a tree restricted to traces of length ≤ `max`, by direct
    /// interpretation of the operators.
    pub(crate) fn language(t: &ProcessTree, max: usize) -> BTreeSet<Vec<String>> {
        fn concat(a: &BTreeSet<Vec<String>>, b: &BTreeSet<Vec<String>>, max: usize) -> BTreeSet<Vec<String>> {
            let mut out = BTreeSet::new();
            for x in a {
                for y in b {
                    if x.len() + y.len() <= max {
                        out.insert(x.iter().chain(y).cloned().collect());
                    }
                }
            }
            out
        }
        fn shuffle(x: &[String], y: &[String], out: &mut BTreeSet<Vec<String>>, acc: &mut Vec<String>) {
            if x.is_empty() && y.is_empty() {
                out.insert(acc.clone());
                return;
            }
            if let Some((h, r)) = x.split_first() {
                acc.push(h.clone());
                shuffle(r, y, out, acc);
                acc.pop();
            }
            if let Some((h, r)) = y.split_first() {
                acc.push(h.clone());
                shuffle(x, r, out, acc);
                acc.pop();
            }
        }
        match t {
            ProcessTree::Activity(a) if max >= 1 => [vec![a.clone()]].into(),
            ProcessTree::Activity(_) => BTreeSet::new(),
            ProcessTree::Silent => [vec![]].into(),
            ProcessTree::Seq(c) => c
                .iter()
                .fold([vec![]].into(), |acc, ch| concat(&acc, &language(ch, max), max)),
            ProcessTree::Xor(c) => c.iter().flat_map(|ch| language(ch, max)).collect(),
            ProcessTree::And(c) => c.iter().fold([vec![]].into(), |acc, ch| {
                let l = language(ch, max);
                let mut out = BTreeSet::new();
                for x in &acc {
                    for y in &l {
                        if x.len() + y.len() <= max {
                            shuffle(x, y, &mut out, &mut Vec::new());
                        }
                    }
                }
                out
            }),
            ProcessTree::Loop(c) => {
                let body = language(&c[0], max);
                let redo: BTreeSet<Vec<String>> = c[1..].iter().flat_map(|ch| language(ch, max)).collect();
                let step = concat(&redo, &body, max);
                let mut all = body.clone();
                let mut frontier = body;
                loop {
                    let next: BTreeSet<_> = concat(&frontier, &step, max).difference(&all).cloned().collect();
                    if next.is_empty() {
                        return all;
                    }
                    all.extend(next.iter().cloned());
                    frontier = next;
                }
            }
        }
    }

    fn traces(ts: &[&str]) -> Vec<Vec<String>> {
        ts.iter()
            .map(|t| t.chars().map(|c| c.to_string()).collect())
            .collect()
    }

    #[test]
    fn seq_of_choice() {
        let t = mine_tree(&traces(&["ab", "ac"]));
        assert_eq!(t.to_string(), "→(a, ×(b, c))");
    }

    #[test]
    fn singleton() {
        assert_eq!(mine_tree(&traces(&["a"])), ProcessTree::activity("a"));
    }

    #[test]
    fn parallel_and_loop() {
        assert_eq!(mine_tree(&traces(&["ab", "ba"])).to_string(), "∧(a, b)");
        assert_eq!(mine_tree(&traces(&["ab", "abcab"])).to_string(), "↺(→(a, b), c)");
        assert_eq!(mine_tree(&traces(&["a", "aa"])).to_string(), "↺(a, τ)");
        assert_eq!(mine_tree(&traces(&["", "a"])).to_string(), "×(τ, a)");
    }

    #[test]
    fn bank_like_chain_is_a_sequence() {
        let t = mine_tree(&traces(&["abcdef"]));
        assert_eq!(t.to_string(), "→(a, b, c, d, e, f)");
    }

    /// Textbook cut conditions checked by brute force over all ordered
    /// two-block partitions.
    fn brute_force_root(ts: &[Vec<String>]) -> Option<&'static str> {
        let acts: Vec<String> = ts.iter().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        let mut edge = BTreeSet::new();
        for t in ts {
            for w in t.windows(2) {
                edge.insert((w[0].clone(), w[1].clone()));
            }
        }
        let reach = |a: &String, b: &String| {
            let mut seen = BTreeSet::new();
            let mut q = vec![a.clone()];
            while let Some(x) = q.pop() {
                for (s, d) in &edge {
                    if *s == x && seen.insert(d.clone()) {
                        q.push(d.clone());
                    }
                }
            }
            seen.contains(b)
        };
        let n = acts.len();
        let mut seq = false;
        let mut xor = false;
        for mask in 1..(1u32 << n) - 1 {
            let (a, b): (Vec<_>, Vec<_>) = (0..n).partition(|i| mask & (1 << i) != 0);
            let cross = a.iter().any(|&i| {
                b.iter().any(|&j| {
                    edge.contains(&(acts[i].clone(), acts[j].clone()))
                        || edge.contains(&(acts[j].clone(), acts[i].clone()))
                })
            });
            if !cross {
                xor = true;
            }
            let forward = a.iter().all(|&i| b.iter().all(|&j| reach(&acts[i], &acts[j]) && !reach(&acts[j], &acts[i])));
            if forward {
                seq = true;
            }
        }
        if xor {
            Some("xor")
        } else if seq {
            Some("seq")
        } else {
            None
        }
    }

    proptest! {
        #[test]
        fn input_traces_are_in_the_language(ts in prop::collection::vec("[a-d]{1,5}", 1..6)) {
            let ts: Vec<Vec<String>> = ts.iter().map(|t| t.chars().map(|c| c.to_string()).collect()).collect();
            let tree = mine_tree(&ts);
            let max = ts.iter().map(Vec::len).max().unwrap();
            let lang = language(&tree, max);
            for t in &ts {
                prop_assert!(lang.contains(t), "{:?} not in {}", t, tree);
            }
        }

        #[test]
        fn root_cut_agrees_with_brute_force(ts in prop::collection::vec("[a-d]{1,4}", 1..5)) {
            let ts: Vec<Vec<String>> = ts.iter().map(|t| t.chars().map(|c| c.to_string()).collect()).collect();
            if ts.iter().flatten().collect::<BTreeSet<_>>().len() < 2 {
                return Ok(());
            }
            let tree = mine_tree(&ts);
            match brute_force_root(&ts) {
                Some("xor") => prop_assert!(matches!(tree, ProcessTree::Xor(_)), "{}", tree),
                Some("seq") => prop_assert!(matches!(tree, ProcessTree::Seq(_)), "{}", tree),
                _ => prop_assert!(!matches!(tree, ProcessTree::Xor(_) | ProcessTree::Seq(_)), "{}", tree),
            }
        }
    }
}
