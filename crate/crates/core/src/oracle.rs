//! Naive reference implementations kept deliberately independent of the main
//! algorithms: boolean-matrix τ-closure, greatest-fixed-point bisimulation
//! by pair removal, and exhaustive trace enumeration. These exist to
//! cross-check the partition-refinement and DFA paths in tests and the
//! acceptance suite; do not use them for real workloads.

// Matrix-style index loops are deliberate here.
#![allow(clippy::needless_range_loop)]

use std::collections::BTreeSet;

use crate::lts::ProcessGraph;
use crate::term::{ActName, Label};

/// Reflexive-transitive closure of the τ-edges as a boolean matrix,
/// computed by Floyd–Warshall-style saturation.
pub fn tau_closure_matrix(g: &ProcessGraph) -> Vec<Vec<bool>> {
    let n = g.n_states();
    let mut reach = vec![vec![false; n]; n];
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
    }
    for (src, l, dst) in g.transitions() {
        if l.is_tau() {
            reach[src][dst] = true;
        }
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    reach
}

/// Weak single-step successors: `p ⇒ q` for `label = τ`, `p ⇒ a ⇒ q`
/// otherwise.
pub fn weak_successors(
    g: &ProcessGraph,
    closure: &[Vec<bool>],
    from: usize,
    label: &Label,
) -> BTreeSet<usize> {
    let n = g.n_states();
    let mut out = BTreeSet::new();
    match label {
        Label::Tau => {
            for q in 0..n {
                if closure[from][q] {
                    out.insert(q);
                }
            }
        }
        Label::Act(_) => {
            for mid in 0..n {
                if !closure[from][mid] {
                    continue;
                }
                for (l, t) in g.out(mid) {
                    if l == label {
                        for q in 0..n {
                            if closure[*t][q] {
                                out.insert(q);
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Greatest weak bisimulation between two graphs by naive pair removal:
/// start from the full relation and delete pairs with an unmatched weak
/// step until nothing changes. Returns whether the initial states remain
/// related. Weak successor sets are tabulated up front.
pub fn naive_weak_bisim(g1: &ProcessGraph, g2: &ProcessGraph) -> bool {
    let c1 = tau_closure_matrix(g1);
    let c2 = tau_closure_matrix(g2);
    let mut labels: BTreeSet<Label> = g1.alphabet();
    labels.extend(g2.alphabet());
    labels.insert(Label::Tau);
    let labels: Vec<Label> = labels.into_iter().collect();

    let tabulate = |g: &ProcessGraph, c: &[Vec<bool>]| -> Vec<Vec<Vec<usize>>> {
        (0..g.n_states())
            .map(|s| {
                labels
                    .iter()
                    .map(|l| weak_successors(g, c, s, l).into_iter().collect())
                    .collect()
            })
            .collect()
    };
    let succ1 = tabulate(g1, &c1);
    let succ2 = tabulate(g2, &c2);

    let n1 = g1.n_states();
    let n2 = g2.n_states();
    let mut related = vec![vec![true; n2]; n1];
    loop {
        let mut changed = false;
        for p in 0..n1 {
            for q in 0..n2 {
                if !related[p][q] {
                    continue;
                }
                let ok = (0..labels.len()).all(|li| {
                    let ps = &succ1[p][li];
                    let qs = &succ2[q][li];
                    ps.iter()
                        .all(|p2| qs.iter().any(|q2| related[*p2][*q2]))
                        && qs
                            .iter()
                            .all(|q2| ps.iter().any(|p2| related[*p2][*q2]))
                });
                if !ok {
                    related[p][q] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return related[g1.initial][g2.initial];
        }
    }
}

/// Greatest strong bisimulation by naive pair removal.
pub fn naive_strong_bisim(g1: &ProcessGraph, g2: &ProcessGraph) -> bool {
    let mut labels: BTreeSet<Label> = g1.alphabet();
    labels.extend(g2.alphabet());
    let succ = |g: &ProcessGraph, s: usize, l: &Label| -> Vec<usize> {
        g.out(s)
            .iter()
            .filter(|(m, _)| m == l)
            .map(|(_, t)| *t)
            .collect()
    };
    let n1 = g1.n_states();
    let n2 = g2.n_states();
    let mut related = vec![vec![true; n2]; n1];
    loop {
        let mut changed = false;
        for p in 0..n1 {
            for q in 0..n2 {
                if !related[p][q] {
                    continue;
                }
                let ok = labels.iter().all(|l| {
                    let ps = succ(g1, p, l);
                    let qs = succ(g2, q, l);
                    ps.iter().all(|p2| qs.iter().any(|q2| related[*p2][*q2]))
                        && qs.iter().all(|q2| ps.iter().any(|p2| related[*p2][*q2]))
                });
                if !ok {
                    related[p][q] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return related[g1.initial][g2.initial];
        }
    }
}

/// States reachable from `from` by the weak string `word` (visible labels
/// with arbitrary τ-padding).
pub fn weak_string_successors(
    g: &ProcessGraph,
    closure: &[Vec<bool>],
    from: usize,
    word: &[ActName],
) -> BTreeSet<usize> {
    let mut current = weak_successors(g, closure, from, &Label::Tau);
    for a in word {
        let mut next = BTreeSet::new();
        for &s in &current {
            next.extend(weak_successors(g, closure, s, &Label::Act(a.clone())));
        }
        current = next;
    }
    current
}

/// Exhaustive enumeration of the traces of length ≤ `max_len` directly from
/// the graph, with τ handled by explicit search.
pub fn enumerate_traces(g: &ProcessGraph, max_len: usize) -> BTreeSet<Vec<ActName>> {
    let mut out: BTreeSet<Vec<ActName>> = BTreeSet::new();
    let mut seen: BTreeSet<(usize, Vec<ActName>)> = BTreeSet::new();
    let mut stack: Vec<(usize, Vec<ActName>)> = vec![(g.initial, Vec::new())];
    while let Some((state, word)) = stack.pop() {
        if !seen.insert((state, word.clone())) {
            continue;
        }
        out.insert(word.clone());
        for (l, t) in g.out(state) {
            match l {
                Label::Tau => stack.push((*t, word.clone())),
                Label::Act(a) => {
                    if word.len() < max_len {
                        let mut w = word.clone();
                        w.push(a.clone());
                        stack.push((*t, w));
                    }
                }
            }
        }
    }
    out
}

/// Checks the string-indexed transfer property of a weak bisimulation
/// candidate: for every related pair and every visible string up to
/// `max_len` (and the empty string), each weak move of one side is matched
/// by the other into a related pair.
pub fn is_weak_bisimulation_up_to_strings(
    g1: &ProcessGraph,
    g2: &ProcessGraph,
    pairs: &[(usize, usize)],
    max_len: usize,
) -> bool {
    let c1 = tau_closure_matrix(g1);
    let c2 = tau_closure_matrix(g2);
    let mut letters: BTreeSet<ActName> = g1.visible_alphabet();
    letters.extend(g2.visible_alphabet());
    let letters: Vec<ActName> = letters.into_iter().collect();

    let mut words: Vec<Vec<ActName>> = vec![Vec::new()];
    let mut layer: Vec<Vec<ActName>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for a in &letters {
                let mut v = w.clone();
                v.push(a.clone());
                next.push(v.clone());
                words.push(v);
            }
        }
        layer = next;
    }

    let related: BTreeSet<(usize, usize)> = pairs.iter().copied().collect();
    for &(p, q) in pairs {
        for w in &words {
            let ps = weak_string_successors(g1, &c1, p, w);
            let qs = weak_string_successors(g2, &c2, q, w);
            let forward = ps
                .iter()
                .all(|p2| qs.iter().any(|q2| related.contains(&(*p2, *q2))));
            let backward = qs
                .iter()
                .all(|q2| ps.iter().any(|p2| related.contains(&(*p2, *q2))));
            if !forward || !backward {
                return false;
            }
        }
    }
    true
}
