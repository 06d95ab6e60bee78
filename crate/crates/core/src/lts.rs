//! Process graphs: bounded exploration of the CCS/CSP steppers, weak
//! (τ-abstracting) closure, divergence and deadlock detection, and the
//! Aldebaran `.aut` / DOT exchange formats.

use std::collections::{BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::parse::{ParseError, Scanner};
use crate::term::{Label, LangId, Term, VarName};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StepError {
    #[error("recursion unfolded {depth} times without producing a transition; the term is unguarded")]
    UnguardedRecursion { depth: usize },
    #[error("cannot step an open term: variable {0} is free")]
    OpenTerm(VarName),
    #[error("expected a {expected} term but found a {found} construct")]
    WrongLanguage { expected: LangId, found: LangId },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("operation requires a completely explored graph (state cap was hit)")]
    Incomplete,
}

/// A language front end: its stepper and printer. Implementations are pure;
/// shared terms may be stepped from several threads.
pub trait Semantics: Send + Sync {
    fn lang(&self) -> LangId;
    /// Transitions of a closed term, deduplicated up to α-equivalence.
    fn step(&self, term: &Term) -> Result<BTreeSet<(Label, Term)>, StepError>;
    fn print(&self, term: &Term) -> String;
}

pub fn semantics_for(lang: LangId) -> Box<dyn Semantics> {
    match lang {
        LangId::Ccs => Box::new(crate::ccs::CcsSemantics::default()),
        LangId::Csp => Box::new(crate::csp::CspSemantics),
    }
}

/// Deduplicates `(label, term)` pairs up to α-equivalence of the terms,
/// keeping the first representative of each class.
pub fn dedup_alpha(
    items: impl IntoIterator<Item = (Label, Term)>,
) -> BTreeSet<(Label, Term)> {
    let mut seen: BTreeSet<(Label, Term)> = BTreeSet::new();
    let mut out = BTreeSet::new();
    for (l, t) in items {
        if seen.insert((l.clone(), t.canon())) {
            out.insert((l, t));
        }
    }
    out
}

/// A rooted labelled transition system with states identified by index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessGraph {
    /// Canonical printed form of each state.
    pub states: Vec<String>,
    pub initial: usize,
    adj: Vec<Vec<(Label, usize)>>,
    /// False iff exploration stopped at the state cap.
    pub complete: bool,
}

impl ProcessGraph {
    pub fn from_parts(
        states: Vec<String>,
        initial: usize,
        transitions: impl IntoIterator<Item = (usize, Label, usize)>,
        complete: bool,
    ) -> Self {
        let mut adj = vec![Vec::new(); states.len()];
        for (src, label, dst) in transitions {
            assert!(src < states.len() && dst < states.len(), "transition endpoint out of range");
            adj[src].push((label, dst));
        }
        for row in &mut adj {
            row.sort();
            row.dedup();
        }
        assert!(initial < states.len(), "initial state out of range");
        ProcessGraph {
            states,
            initial,
            adj,
            complete,
        }
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn n_transitions(&self) -> usize {
        self.adj.iter().map(Vec::len).sum()
    }

    pub fn out(&self, state: usize) -> &[(Label, usize)] {
        &self.adj[state]
    }

    pub fn transitions(&self) -> impl Iterator<Item = (usize, &Label, usize)> {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(src, row)| row.iter().map(move |(l, dst)| (src, l, *dst)))
    }

    /// All labels occurring on transitions.
    pub fn alphabet(&self) -> BTreeSet<Label> {
        self.transitions().map(|(_, l, _)| l.clone()).collect()
    }

    /// Visible labels occurring on transitions.
    pub fn visible_alphabet(&self) -> BTreeSet<crate::term::ActName> {
        self.transitions()
            .filter_map(|(_, l, _)| l.visible().cloned())
            .collect()
    }

    /// States reachable from `from` following any transitions.
    pub fn reachable_from(&self, from: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([from]);
        let mut queue = VecDeque::from([from]);
        while let Some(s) = queue.pop_front() {
            for (_, t) in self.out(s) {
                if seen.insert(*t) {
                    queue.push_back(*t);
                }
            }
        }
        seen
    }

    /// Disjoint union; states of `other` are shifted by `self.n_states()`.
    /// The initial state is taken from `self`.
    pub fn disjoint_union(&self, other: &ProcessGraph) -> (ProcessGraph, usize) {
        let offset = self.n_states();
        let mut states = self.states.clone();
        states.extend(other.states.iter().cloned());
        let mut adj = self.adj.clone();
        adj.extend(other.adj.iter().map(|row| {
            row.iter()
                .map(|(l, t)| (l.clone(), t + offset))
                .collect::<Vec<_>>()
        }));
        (
            ProcessGraph {
                states,
                initial: self.initial,
                adj,
                complete: self.complete && other.complete,
            },
            offset,
        )
    }
}

/// Breadth-first exploration of the reachable part of a closed term's
/// transition system, deduplicating states by α-canonical term identity.
/// Hitting `max_states` is not an error; the graph is returned with
/// `complete = false`.
pub fn explore(
    term: &Term,
    sem: &dyn Semantics,
    max_states: usize,
) -> Result<ProcessGraph, StepError> {
    assert!(max_states >= 1, "max_states must be positive");
    if let Some(v) = term.free_vars_ordered().first() {
        return Err(StepError::OpenTerm(v.clone()));
    }
    if let Err(crate::term::TermError::MixedLanguages(found, expected)) =
        term.check_lang(sem.lang())
    {
        return Err(StepError::WrongLanguage { expected, found });
    }

    let mut index: HashMap<Term, usize> = HashMap::new();
    let mut reps: Vec<Term> = Vec::new();
    let mut states: Vec<String> = Vec::new();
    let mut adj: Vec<Vec<(Label, usize)>> = Vec::new();
    let mut complete = true;

    index.insert(term.canon(), 0);
    reps.push(term.clone());
    states.push(sem.print(term));
    adj.push(Vec::new());

    let mut cursor = 0;
    while cursor < reps.len() {
        let successors = sem.step(&reps[cursor])?;
        let mut row = Vec::new();
        for (label, target) in successors {
            let key = target.canon();
            let idx = match index.get(&key) {
                Some(&i) => i,
                None => {
                    if reps.len() >= max_states {
                        complete = false;
                        continue;
                    }
                    let i = reps.len();
                    index.insert(key, i);
                    states.push(sem.print(&target));
                    reps.push(target);
                    adj.push(Vec::new());
                    i
                }
            };
            row.push((label, idx));
        }
        row.sort();
        row.dedup();
        adj[cursor] = row;
        cursor += 1;
    }

    Ok(ProcessGraph {
        states,
        initial: 0,
        adj,
        complete,
    })
}

/// The weak-transition closure: `p ⇒ q` (reflexive-transitive closure of τ)
/// becomes a τ-edge, and `p ⇒ a ⇒ q` becomes an `a`-edge. Every state gains
/// a reflexive τ-loop; the operation is idempotent on its own output.
pub fn weak_closure(g: &ProcessGraph) -> Result<ProcessGraph, GraphError> {
    if !g.complete {
        return Err(GraphError::Incomplete);
    }
    let n = g.n_states();
    let mut tau_reach: Vec<BTreeSet<usize>> = Vec::with_capacity(n);
    for s in 0..n {
        let mut seen = BTreeSet::from([s]);
        let mut queue = VecDeque::from([s]);
        while let Some(p) = queue.pop_front() {
            for (l, q) in g.out(p) {
                if l.is_tau() && seen.insert(*q) {
                    queue.push_back(*q);
                }
            }
        }
        tau_reach.push(seen);
    }

    let mut adj: Vec<Vec<(Label, usize)>> = vec![Vec::new(); n];
    for p in 0..n {
        let mut row: BTreeSet<(Label, usize)> = BTreeSet::new();
        for &q in &tau_reach[p] {
            row.insert((Label::Tau, q));
            for (l, s) in g.out(q) {
                if let Label::Act(_) = l {
                    for &r in &tau_reach[*s] {
                        row.insert((l.clone(), r));
                    }
                }
            }
        }
        adj[p] = row.into_iter().collect();
    }

    Ok(ProcessGraph {
        states: g.states.clone(),
        initial: g.initial,
        adj,
        complete: true,
    })
}

/// Whether a τ-cycle is reachable from `state`; on success returns a witness
/// path that ends by repeating the entry state of the cycle.
pub fn diverges(g: &ProcessGraph, state: usize) -> Result<Option<Vec<usize>>, GraphError> {
    if !g.complete {
        return Err(GraphError::Incomplete);
    }
    let reachable = g.reachable_from(state);

    // Look for a τ-cycle inside the reachable part.
    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Grey,
        Black,
    }
    let n = g.n_states();
    let mut color = vec![Color::White; n];
    let mut cycle_entry: Option<usize> = None;
    let mut stack_path: Vec<usize> = Vec::new();

    fn dfs(
        g: &ProcessGraph,
        u: usize,
        color: &mut Vec<Color>,
        stack_path: &mut Vec<usize>,
        cycle_entry: &mut Option<usize>,
    ) {
        color[u] = Color::Grey;
        stack_path.push(u);
        for (l, v) in g.out(u) {
            if cycle_entry.is_some() {
                break;
            }
            if !l.is_tau() {
                continue;
            }
            match color[*v] {
                Color::Grey => {
                    *cycle_entry = Some(*v);
                    return;
                }
                Color::White => dfs(g, *v, color, stack_path, cycle_entry),
                Color::Black => {}
            }
        }
        if cycle_entry.is_none() {
            stack_path.pop();
            color[u] = Color::Black;
        }
    }

    for &s in &reachable {
        if color[s] == Color::White && cycle_entry.is_none() {
            stack_path.clear();
            dfs(g, s, &mut color, &mut stack_path, &mut cycle_entry);
        }
        if cycle_entry.is_some() {
            break;
        }
    }

    let Some(entry) = cycle_entry else {
        return Ok(None);
    };
    // τ-cycle: suffix of the DFS stack from the entry state, closed again.
    let pos = stack_path.iter().position(|&u| u == entry).unwrap();
    let mut cycle: Vec<usize> = stack_path[pos..].to_vec();
    cycle.push(entry);

    // Any-label path from `state` into the cycle entry point.
    let mut prev: HashMap<usize, usize> = HashMap::new();
    let mut queue = VecDeque::from([state]);
    let mut seen = BTreeSet::from([state]);
    while let Some(p) = queue.pop_front() {
        if p == cycle[0] {
            break;
        }
        for (_, q) in g.out(p) {
            if seen.insert(*q) {
                prev.insert(*q, p);
                queue.push_back(*q);
            }
        }
    }
    let mut path = vec![cycle[0]];
    let mut cur = cycle[0];
    while cur != state {
        cur = prev[&cur];
        path.push(cur);
    }
    path.reverse();
    path.extend_from_slice(&cycle[1..]);
    Ok(Some(path))
}

/// States with no outgoing transitions. Assumes a completely explored graph.
pub fn deadlocks(g: &ProcessGraph) -> Vec<usize> {
    debug_assert!(g.complete, "deadlock detection needs a complete graph");
    (0..g.n_states()).filter(|&s| g.out(s).is_empty()).collect()
}

// ---------------------------------------------------------------------------
// Aldebaran (.aut) and DOT formats
// ---------------------------------------------------------------------------

/// Serialises a graph in Aldebaran format: a `des (initial, #transitions,
/// #states)` header followed by one `(src, "label", dst)` line per
/// transition, with τ rendered as `"tau"`. Byte-deterministic.
pub fn export_aut(g: &ProcessGraph) -> String {
    let mut out = format!(
        "des ({}, {}, {})\n",
        g.initial,
        g.n_transitions(),
        g.n_states()
    );
    for (src, label, dst) in g.transitions() {
        out.push_str(&format!("({src}, \"{label}\", {dst})\n"));
    }
    out
}

/// Parses Aldebaran format; the inverse of [`export_aut`] up to state
/// renumbering. State texts are the state numbers.
pub fn import_aut(text: &str) -> Result<ProcessGraph, ParseError> {
    let mut lines = text.lines().enumerate();
    let err = |line: usize, col: usize, msg: &str| ParseError {
        line: line + 1,
        col,
        msg: msg.to_string(),
    };

    let (header_no, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| err(0, 1, "empty input, expected a `des` header"))?;
    let h = header.trim();
    let inner = h
        .strip_prefix("des")
        .map(str::trim)
        .and_then(|r| r.strip_prefix('('))
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| err(header_no, 1, "malformed header, expected `des (i, t, s)`"))?;
    let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(err(header_no, 1, "header must have three fields"));
    }
    let parse_num = |s: &str, what: &str| {
        s.parse::<usize>()
            .map_err(|_| err(header_no, 1, &format!("invalid {what} `{s}` in header")))
    };
    let initial = parse_num(parts[0], "initial state")?;
    let n_trans = parse_num(parts[1], "transition count")?;
    let n_states = parse_num(parts[2], "state count")?;
    if initial >= n_states {
        return Err(err(header_no, 1, "initial state out of range"));
    }

    let mut transitions = Vec::new();
    for (no, line) in lines {
        let l = line.trim();
        if l.is_empty() {
            continue;
        }
        let inner = l
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| err(no, 1, "expected `(src, \"label\", dst)`"))?;
        // Split on the outermost commas around the label field.
        let first_comma = inner
            .find(',')
            .ok_or_else(|| err(no, 1, "missing fields in transition"))?;
        let last_comma = inner
            .rfind(',')
            .ok_or_else(|| err(no, 1, "missing fields in transition"))?;
        if first_comma == last_comma {
            return Err(err(no, 1, "transition must have three fields"));
        }
        let src: usize = inner[..first_comma]
            .trim()
            .parse()
            .map_err(|_| err(no, 1, "invalid source state"))?;
        let dst: usize = inner[last_comma + 1..]
            .trim()
            .parse()
            .map_err(|_| err(no, 1, "invalid target state"))?;
        let mut label_text = inner[first_comma + 1..last_comma].trim();
        if label_text.len() >= 2 && label_text.starts_with('"') && label_text.ends_with('"') {
            label_text = &label_text[1..label_text.len() - 1];
        }
        let label = if label_text == "tau" {
            Label::Tau
        } else {
            let mut s = Scanner::new(label_text);
            let a = s.act_name(true).map_err(|e| err(no, 1, &e.msg))?;
            if !s.at_end() {
                return Err(err(no, 1, &format!("invalid label `{label_text}`")));
            }
            Label::Act(a)
        };
        if src >= n_states || dst >= n_states {
            return Err(err(no, 1, "transition endpoint out of range"));
        }
        transitions.push((src, label, dst));
    }
    if transitions.len() != n_trans {
        return Err(err(
            0,
            1,
            &format!(
                "header declares {n_trans} transitions but {} were given",
                transitions.len()
            ),
        ));
    }
    Ok(ProcessGraph::from_parts(
        (0..n_states).map(|i| i.to_string()).collect(),
        initial,
        transitions,
        true,
    ))
}

/// DOT rendering with dashed τ-edges; byte-deterministic.
pub fn export_dot(g: &ProcessGraph) -> String {
    let mut out = String::from("digraph lts {\n  rankdir=LR;\n  node [shape=circle];\n");
    out.push_str(&format!("  init [shape=point, label=\"\"];\n  init -> s{};\n", g.initial));
    for (i, text) in g.states.iter().enumerate() {
        let escaped = text.replace('\\', "\\\\").replace('"', "\\\"");
        out.push_str(&format!("  s{i} [label=\"{i}: {escaped}\"];\n"));
    }
    for (src, label, dst) in g.transitions() {
        let style = if label.is_tau() { ", style=dashed" } else { "" };
        out.push_str(&format!("  s{src} -> s{dst} [label=\"{label}\"{style}];\n"));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccs::{parse_ccs, CcsSemantics};
    use crate::csp::{parse_csp, CspSemantics};

    fn explore_ccs(src: &str) -> ProcessGraph {
        explore(&parse_ccs(src).unwrap(), &CcsSemantics::default(), 20_000).unwrap()
    }

    fn explore_csp(src: &str) -> ProcessGraph {
        explore(&parse_csp(src).unwrap(), &CspSemantics, 20_000).unwrap()
    }

    #[test]
    fn explore_inaction() {
        let g = explore_ccs("0");
        assert_eq!(g.n_states(), 1);
        assert_eq!(g.n_transitions(), 0);
        assert!(g.complete);
    }

    #[test]
    fn explore_branching_choice() {
        let g = explore_ccs("b.0 + b.c.0");
        assert_eq!(g.n_states(), 3);
        assert_eq!(g.n_transitions(), 3);
        let b = Label::Act(crate::term::ActName::plain("b"));
        let c = Label::Act(crate::term::ActName::plain("c"));
        let from_initial: Vec<_> = g.out(g.initial).to_vec();
        assert_eq!(from_initial.iter().filter(|(l, _)| *l == b).count(), 2);
        assert_eq!(
            g.transitions().filter(|(_, l, _)| **l == c).count(),
            1
        );
    }

    #[test]
    fn explore_divergence_constant() {
        let g = explore_csp("DIV");
        assert_eq!(g.n_states(), 1);
        assert_eq!(g.out(0), &[(Label::Tau, 0)]);
    }

    #[test]
    fn explore_respects_state_cap() {
        let g = explore(
            &parse_ccs("a.b.c.0").unwrap(),
            &CcsSemantics::default(),
            2,
        )
        .unwrap();
        assert!(!g.complete);
        assert_eq!(g.n_states(), 2);
    }

    #[test]
    fn explore_rejects_open_terms() {
        let t = parse_ccs("a.X").unwrap();
        assert!(matches!(
            explore(&t, &CcsSemantics::default(), 10),
            Err(StepError::OpenTerm(_))
        ));
    }

    #[test]
    fn weak_closure_spans_tau_prefix() {
        let g = explore_ccs("tau.a.0");
        let w = weak_closure(&g).unwrap();
        let a = Label::Act(crate::term::ActName::plain("a"));
        // The initial state reaches the final state by a weak a-step.
        assert!(w.out(0).iter().any(|(l, t)| *l == a && w.out(*t).len() == 1));
        // Reflexive ε present everywhere.
        for s in 0..w.n_states() {
            assert!(w.out(s).contains(&(Label::Tau, s)));
        }
    }

    #[test]
    fn weak_closure_of_inaction_is_reflexive_only() {
        let g = explore_ccs("0");
        let w = weak_closure(&g).unwrap();
        assert_eq!(w.out(0), &[(Label::Tau, 0)]);
    }

    #[test]
    fn weak_closure_idempotent() {
        for src in ["tau.a.0 + b.tau.0", "fix X {X = a.tau.X}", "tau.tau.0"] {
            let g = explore_ccs(src);
            let w = weak_closure(&g).unwrap();
            assert_eq!(weak_closure(&w).unwrap(), w, "idempotence on {src}");
        }
    }

    #[test]
    fn weak_closure_requires_complete() {
        let g = explore(&parse_ccs("a.b.0").unwrap(), &CcsSemantics::default(), 1).unwrap();
        assert_eq!(weak_closure(&g), Err(GraphError::Incomplete));
    }

    #[test]
    fn divergence_of_div_and_absence_for_prefix() {
        let g = explore_csp("DIV");
        let witness = diverges(&g, 0).unwrap().expect("DIV diverges");
        assert_eq!(witness, vec![0, 0]);

        let g = explore_ccs("b.0");
        assert_eq!(diverges(&g, 0).unwrap(), None);
    }

    #[test]
    fn divergence_of_unguarded_mu() {
        let g = explore_csp("mu X . X");
        assert!(diverges(&g, 0).unwrap().is_some());
    }

    #[test]
    fn divergence_witness_reaches_cycle_through_visible_steps() {
        let g = explore_ccs("a.fix X {X = tau.X}");
        let witness = diverges(&g, 0).unwrap().expect("diverges after a");
        assert_eq!(witness.first(), Some(&0));
        let last = *witness.last().unwrap();
        assert!(witness[..witness.len() - 1].contains(&last));
    }

    #[test]
    fn deadlock_sets() {
        assert_eq!(deadlocks(&explore_ccs("0")), vec![0]);
        assert_eq!(deadlocks(&explore_csp("DIV")), Vec::<usize>::new());
        assert_eq!(deadlocks(&explore_ccs("a.0")), vec![1]);
    }

    #[test]
    fn aut_export_golden() {
        assert_eq!(export_aut(&explore_ccs("0")), "des (0, 0, 1)\n");
        assert_eq!(
            export_aut(&explore_ccs("a.0")),
            "des (0, 1, 2)\n(0, \"a\", 1)\n"
        );
    }

    #[test]
    fn aut_round_trip() {
        let g = explore_ccs("a.0 | 'a.b.0");
        let back = import_aut(&export_aut(&g)).unwrap();
        assert_eq!(back.initial, g.initial);
        assert_eq!(back.n_states(), g.n_states());
        let orig: Vec<_> = g.transitions().map(|(s, l, t)| (s, l.clone(), t)).collect();
        let imported: Vec<_> = back
            .transitions()
            .map(|(s, l, t)| (s, l.clone(), t))
            .collect();
        assert_eq!(orig, imported);
    }

    #[test]
    fn aut_import_errors_have_positions() {
        let err = import_aut("des (0, 1, 1)\nnot a transition\n").unwrap_err();
        assert_eq!(err.line, 2);
        let err = import_aut("dex (0, 0, 1)\n").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(import_aut("des (0, 2, 2)\n(0, \"a\", 1)\n").is_err());
    }

    #[test]
    fn dot_export_marks_tau_dashed() {
        let dot = export_dot(&explore_csp("DIV"));
        assert!(dot.contains("style=dashed"));
        assert!(dot.starts_with("digraph lts {"));
    }
}
