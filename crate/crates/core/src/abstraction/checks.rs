//! Semantic side conditions of an aggregation: soundness preservation and
//! order preservation on the affected per-type projections.

use std::collections::BTreeSet;

use crate::ocpn::{check_soundness_bounded, explore, AcceptingOcpn, StateSpaceExceeded, TransitionId};

/// State bound for the soundness comparison.
pub(crate) const SOUNDNESS_BOUND: usize = 100_000;
/// State bound for the eventually-follows comparison.
pub(crate) const ORDER_BOUND: usize = 10_000;

type Pairs = BTreeSet<(TransitionId, TransitionId)>;

/// Pairs `(x, y)` of labeled transitions such that some run fires `x` and
/// later `y`.
pub(crate) fn eventually_follows(net: &AcceptingOcpn, bound: usize) -> Result<Pairs, StateSpaceExceeded> {
    let space = explore(net, bound)?;
    let labeled: Vec<bool> = space
        .transitions
        .iter()
        .map(|t| net.transition(t).is_some_and(|t| !t.is_silent()))
        .collect();
    let n = space.transitions.len();
    let words = n.div_ceil(64).max(1);
    let mut later = vec![vec![0u64; words]; space.markings.len()];
    loop {
        let mut changed = false;
        for s in (0..space.markings.len()).rev() {
            for &(t, d) in &space.edges[s] {
                let mut acc = later[d].clone();
                if labeled[t] {
                    acc[t / 64] |= 1 << (t % 64);
                }
                for (w, a) in later[s].iter_mut().zip(acc) {
                    if *w | a != *w {
                        *w |= a;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut out = Pairs::new();
    for out_edges in &space.edges {
        for &(x, d) in out_edges {
            if !labeled[x] {
                continue;
            }
            for y in 0..n {
                if later[d][y / 64] & (1 << (y % 64)) != 0 {
                    out.insert((space.transitions[x].clone(), space.transitions[y].clone()));
                }
            }
        }
    }
    Ok(out)
}

/// No strict order between transitions surviving in both nets is reversed.
/// `None` when either state space exceeds the bound.
pub(crate) fn preserves_order(before: &AcceptingOcpn, after: &AcceptingOcpn) -> Option<bool> {
    let b = eventually_follows(before, ORDER_BOUND).ok()?;
    let a = eventually_follows(after, ORDER_BOUND).ok()?;
    let kept = |t: &TransitionId| before.transition(t).is_some() && after.transition(t).is_some();
    let strict = |r: &Pairs, x: &TransitionId, y: &TransitionId| {
        r.contains(&(x.clone(), y.clone())) && !r.contains(&(y.clone(), x.clone()))
    };
    Some(
        b.iter()
            .filter(|(x, y)| kept(x) && kept(y))
            .all(|(x, y)| !(strict(&b, x, y) && strict(&a, y, x))),
    )
}

/// Soundness before implies soundness after. `None` when undecided within
/// the bound.
pub(crate) fn preserves_soundness(before: &AcceptingOcpn, after: &AcceptingOcpn) -> Option<bool> {
    match check_soundness_bounded(before, SOUNDNESS_BOUND) {
        Ok(true) => check_soundness_bounded(after, SOUNDNESS_BOUND).ok(),
        Ok(false) => Some(true),
        Err(_) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discovery::{compile_tree, ProcessTree};
    use crate::ocel::ObjectType;

    fn net(t: &ProcessTree) -> AcceptingOcpn {
        compile_tree(t, &ObjectType::parse("workflow:x").unwrap())
    }

    fn a(s: &str) -> ProcessTree {
        ProcessTree::activity(s)
    }

    #[test]
    fn sequence_orders_strictly() {
        let n = net(&ProcessTree::Seq(vec![a("a"), a("b"), a("c")]));
        let ef = eventually_follows(&n, 100).unwrap();
        let t = |s: &str| TransitionId::from(s);
        assert!(ef.contains(&(t("t0"), t("t2"))));
        assert!(!ef.contains(&(t("t2"), t("t0"))));
        assert_eq!(ef.len(), 3);
    }

    #[test]
    fn parallel_is_unordered_and_loop_self_follows() {
        let n = net(&ProcessTree::And(vec![a("a"), a("b")]));
        let ef = eventually_follows(&n, 100).unwrap();
        assert_eq!(ef.len(), 2);
        let l = net(&ProcessTree::Loop(vec![a("a"), ProcessTree::Silent]));
        let ef = eventually_follows(&l, 100).unwrap();
        let la = l.transitions_labeled("a").next().unwrap().id.clone();
        assert!(ef.contains(&(la.clone(), la)));
    }

    /// Chain firing the given `(id, label)` transitions in order.
    fn chain(ts: &[(&str, &str)]) -> AcceptingOcpn {
        let o = ObjectType::parse("workflow:x").unwrap();
        let mut n = AcceptingOcpn::new();
        let mut prev = n.add_place("p0", &o).unwrap();
        n.mark_initial(&prev, 1).unwrap();
        for (i, (id, label)) in ts.iter().enumerate() {
            let t = n.add_transition(crate::ocpn::Transition::labeled(*id, *label)).unwrap();
            let next = n.add_place(format!("p{}", i + 1), &o).unwrap();
            n.add_input(&prev, &t).unwrap();
            n.add_output(&t, &next).unwrap();
            prev = next;
        }
        n.mark_final(&prev, 1).unwrap();
        n
    }

    #[test]
    fn reversal_is_detected() {
        let x = chain(&[("t0", "a"), ("t1", "b")]);
        let z = chain(&[("t1", "b"), ("t0", "a")]);
        assert_eq!(preserves_order(&x, &x), Some(true));
        assert_eq!(preserves_order(&x, &z), Some(false));
        assert_eq!(preserves_soundness(&x, &z), Some(true));
    }
}
