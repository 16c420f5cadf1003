use std::collections::{BTreeMap, HashMap};

use super::{AcceptingOcpn, Arc};

/// Node-and-arc-labeled digraph used for the isomorphism test.
struct Graph {
    colors: Vec<String>,
    /// `(neighbor, edge label)`; label encodes direction and variability.
    adj: Vec<Vec<(usize, u8)>>,
    edges: HashMap<(usize, usize), u8>,
}

fn graph(net: &AcceptingOcpn) -> Graph {
    let mut ix = HashMap::new();
    let mut colors = Vec::new();
    for p in net.places() {
        ix.insert(format!("p{}", p.id), colors.len());
        colors.push(format!(
            "P|{}|{}|{}",
            p.otype,
            net.initial_marking().get(&p.id).copied().unwrap_or(0),
            net.final_marking().get(&p.id).copied().unwrap_or(0)
        ));
    }
    for t in net.transitions() {
        ix.insert(format!("t{}", t.id), colors.len());
        let refs: Vec<&str> = t.refs.iter().map(|r| r.name()).collect();
        colors.push(format!(
            "T|{}|{}|{}",
            t.label.as_deref().unwrap_or("\u{0}tau"),
            refs.join(","),
            t.members.join("\u{1}")
        ));
    }
    let mut adj = vec![Vec::new(); colors.len()];
    let mut edges = HashMap::new();
    for a in net.arcs() {
        let p = ix[&format!("p{}", a.place())];
        let t = ix[&format!("t{}", a.transition())];
        let var = u8::from(net.is_variable(a)) << 1;
        let (src, dst) = match a {
            Arc::Input { .. } => (p, t),
            Arc::Output { .. } => (t, p),
        };
        adj[src].push((dst, var));
        adj[dst].push((src, var | 1));
        edges.insert((src, dst), var);
    }
    Graph { colors, adj, edges }
}

/// Joint colour refinement so colours are comparable across both graphs.
fn refine(a: &Graph, b: &Graph) -> (Vec<usize>, Vec<usize>) {
    let n = a.colors.len();
    let intern = |sigs: Vec<String>| -> Vec<usize> {
        let dict: BTreeMap<&String, usize> = {
            let mut keys: Vec<&String> = sigs.iter().collect();
            keys.sort();
            keys.dedup();
            keys.into_iter().enumerate().map(|(i, k)| (k, i)).collect()
        };
        sigs.iter().map(|s| dict[s]).collect()
    };
    let mut col = intern(a.colors.iter().chain(&b.colors).cloned().collect());
    let mut classes = col.iter().collect::<std::collections::BTreeSet<_>>().len();
    loop {
        let sig = |g: &Graph, off: usize, col: &[usize]| -> Vec<String> {
            (0..g.colors.len())
                .map(|v| {
                    let mut nb: Vec<(u8, usize)> =
                        g.adj[v].iter().map(|&(u, l)| (l, col[off + u])).collect();
                    nb.sort_unstable();
                    format!("{}:{:?}", col[off + v], nb)
                })
                .collect()
        };
        let mut sigs = sig(a, 0, &col);
        sigs.extend(sig(b, n, &col));
        let next = intern(sigs);
        let k = next.iter().collect::<std::collections::BTreeSet<_>>().len();
        col = next;
        if k == classes {
            break;
        }
        classes = k;
    }
    let cb = col.split_off(n);
    (col, cb)
}

/// Structural isomorphism of accepting nets: a bijection on places and
/// transitions preserving place types, markings, transition labels,
/// references, arcs and variable flags. Node ids are ignored.
pub fn isomorphic(x: &AcceptingOcpn, y: &AcceptingOcpn) -> bool {
    if x.place_count() != y.place_count()
        || x.transition_count() != y.transition_count()
        || x.size().arcs != y.size().arcs
    {
        return false;
    }
    let (a, b) = (graph(x), graph(y));
    let (ca, cb) = refine(&a, &b);
    let mut ha = ca.clone();
    let mut hb = cb.clone();
    ha.sort_unstable();
    hb.sort_unstable();
    if ha != hb {
        return false;
    }
    let mut by_color: HashMap<usize, Vec<usize>> = HashMap::new();
    for (v, &c) in cb.iter().enumerate() {
        by_color.entry(c).or_default().push(v);
    }
    let mut order: Vec<usize> = (0..ca.len()).collect();
    order.sort_by_key(|&v| (by_color[&ca[v]].len(), v));
    let mut map = vec![usize::MAX; ca.len()];
    let mut used = vec![false; cb.len()];
    search(&a, &b, &ca, &by_color, &order, 0, &mut map, &mut used)
}

#[allow(clippy::too_many_arguments)]
fn search(
    a: &Graph,
    b: &Graph,
    ca: &[usize],
    by_color: &HashMap<usize, Vec<usize>>,
    order: &[usize],
    depth: usize,
    map: &mut [usize],
    used: &mut [bool],
) -> bool {
    let Some(&v) = order.get(depth) else {
        return true;
    };
    for &w in &by_color[&ca[v]] {
        if used[w] {
            continue;
        }
        let consistent = a.adj[v].iter().all(|&(u, _)| {
            let fu = map[u];
            fu == usize::MAX
                || (a.edges.get(&(v, u)) == b.edges.get(&(w, fu))
                    && a.edges.get(&(u, v)) == b.edges.get(&(fu, w)))
        });
        if !consistent {
            continue;
        }
        map[v] = w;
        used[w] = true;
        if search(a, b, ca, by_color, order, depth + 1, map, used) {
            return true;
        }
        map[v] = usize::MAX;
        used[w] = false;
    }
    false
}
