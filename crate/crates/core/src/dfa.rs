//! Trace sets as canonical deterministic finite automata over visible
//! labels. Built by subset construction from a process graph (τ-edges act as
//! ε-moves), then Hopcroft-minimised and renumbered breadth-first, so that
//! structural equality of two `TraceDfa`s over the same alphabet coincides
//! with language equality; they double as fingerprints.
//!
//! Trace languages are prefix-closed and always contain ε, so every state is
//! accepting and the reject sink is left implicit: a missing transition
//! means the word is not a trace.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::lts::{GraphError, ProcessGraph};
use crate::term::{ActName, Label};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceDfa {
    pub alphabet: BTreeSet<ActName>,
    pub n_states: usize,
    pub initial: usize,
    trans: BTreeMap<(usize, ActName), usize>,
}

impl TraceDfa {
    /// The trace set of a completely explored graph.
    pub fn from_graph(g: &ProcessGraph) -> Result<TraceDfa, GraphError> {
        if !g.complete {
            return Err(GraphError::Incomplete);
        }
        let alphabet: BTreeSet<ActName> = g.visible_alphabet();

        // ε-closures of the underlying NFA (ε = τ).
        let n = g.n_states();
        let mut closure: Vec<BTreeSet<usize>> = Vec::with_capacity(n);
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
            closure.push(seen);
        }

        // Subset construction.
        let start: BTreeSet<usize> = closure[g.initial].clone();
        let mut index: HashMap<BTreeSet<usize>, usize> = HashMap::new();
        let mut subsets: Vec<BTreeSet<usize>> = vec![start.clone()];
        index.insert(start, 0);
        let mut trans: BTreeMap<(usize, ActName), usize> = BTreeMap::new();
        let mut cursor = 0;
        while cursor < subsets.len() {
            for a in &alphabet {
                let mut next: BTreeSet<usize> = BTreeSet::new();
                for &s in &subsets[cursor] {
                    for (l, t) in g.out(s) {
                        if l == &Label::Act(a.clone()) {
                            next.extend(closure[*t].iter().copied());
                        }
                    }
                }
                if next.is_empty() {
                    continue;
                }
                let idx = match index.get(&next) {
                    Some(&i) => i,
                    None => {
                        let i = subsets.len();
                        index.insert(next.clone(), i);
                        subsets.push(next);
                        i
                    }
                };
                trans.insert((cursor, a.clone()), idx);
            }
            cursor += 1;
        }

        let raw = TraceDfa {
            alphabet,
            n_states: subsets.len(),
            initial: 0,
            trans,
        };
        Ok(raw.minimised())
    }

    /// The DFA of the prefix closure of the given words.
    pub fn from_words<I, W>(words: I) -> TraceDfa
    where
        I: IntoIterator<Item = W>,
        W: IntoIterator<Item = ActName>,
    {
        let mut alphabet = BTreeSet::new();
        let mut n_states = 1usize;
        let mut trans: BTreeMap<(usize, ActName), usize> = BTreeMap::new();
        for word in words {
            let mut state = 0;
            for a in word {
                alphabet.insert(a.clone());
                state = match trans.get(&(state, a.clone())) {
                    Some(&s) => s,
                    None => {
                        let s = n_states;
                        n_states += 1;
                        trans.insert((state, a), s);
                        s
                    }
                };
            }
        }
        TraceDfa {
            alphabet,
            n_states,
            initial: 0,
            trans,
        }
        .minimised()
    }

    pub fn step(&self, state: usize, a: &ActName) -> Option<usize> {
        self.trans.get(&(state, a.clone())).copied()
    }

    /// Whether the word is a trace.
    pub fn accepts(&self, word: &[ActName]) -> bool {
        let mut state = self.initial;
        for a in word {
            match self.step(state, a) {
                Some(s) => state = s,
                None => return false,
            }
        }
        true
    }

    /// All traces of length at most `max_len`, in length-lexicographic order.
    pub fn words_up_to(&self, max_len: usize) -> Vec<Vec<ActName>> {
        let mut out = Vec::new();
        let mut layer: Vec<(usize, Vec<ActName>)> = vec![(self.initial, Vec::new())];
        out.push(Vec::new());
        for _ in 0..max_len {
            let mut next = Vec::new();
            for (state, word) in &layer {
                for a in &self.alphabet {
                    if let Some(t) = self.step(*state, a) {
                        let mut w = word.clone();
                        w.push(a.clone());
                        out.push(w.clone());
                        next.push((t, w));
                    }
                }
            }
            layer = next;
        }
        out
    }

    /// Language equality (alphabet-independent).
    pub fn equivalent(&self, other: &TraceDfa) -> bool {
        self.distinguishing_word(other).is_none()
    }

    /// The shortest word (first in label order among shortest) accepted by
    /// exactly one of the two automata, if any.
    pub fn distinguishing_word(&self, other: &TraceDfa) -> Option<Vec<ActName>> {
        let alphabet: BTreeSet<ActName> = self
            .alphabet
            .union(&other.alphabet)
            .cloned()
            .collect();
        let mut seen: BTreeSet<(Option<usize>, Option<usize>)> = BTreeSet::new();
        let mut queue: VecDeque<(Option<usize>, Option<usize>, Vec<ActName>)> = VecDeque::new();
        let start = (Some(self.initial), Some(other.initial));
        seen.insert(start);
        queue.push_back((start.0, start.1, Vec::new()));
        while let Some((s1, s2, word)) = queue.pop_front() {
            match (s1, s2) {
                (None, None) => continue,
                (Some(_), None) | (None, Some(_)) => return Some(word),
                (Some(a), Some(b)) => {
                    for l in &alphabet {
                        let t1 = self.step(a, l);
                        let t2 = other.step(b, l);
                        if t1.is_none() && t2.is_none() {
                            continue;
                        }
                        if seen.insert((t1, t2)) {
                            let mut w = word.clone();
                            w.push(l.clone());
                            queue.push_back((t1, t2, w));
                        }
                    }
                }
            }
        }
        None
    }

    /// Hopcroft minimisation followed by breadth-first canonical renumbering.
    fn minimised(&self) -> TraceDfa {
        // Complete the automaton with an explicit reject sink, then refine
        // the accepting/rejecting split.
        let sink = self.n_states;
        let n = self.n_states + 1;
        let letters: Vec<ActName> = self.alphabet.iter().cloned().collect();
        let delta = |s: usize, a: &ActName| -> usize {
            if s == sink {
                sink
            } else {
                self.step(s, a).unwrap_or(sink)
            }
        };

        // Inverse transition tables per letter.
        let mut inverse: BTreeMap<&ActName, Vec<Vec<usize>>> = BTreeMap::new();
        for a in &letters {
            let mut pre = vec![Vec::new(); n];
            for s in 0..n {
                pre[delta(s, a)].push(s);
            }
            inverse.insert(a, pre);
        }

        let accepting: BTreeSet<usize> = (0..self.n_states).collect();
        let rejecting: BTreeSet<usize> = BTreeSet::from([sink]);
        let mut blocks: Vec<BTreeSet<usize>> = vec![accepting.clone(), rejecting.clone()];
        let mut worklist: VecDeque<BTreeSet<usize>> =
            VecDeque::from([accepting, rejecting]);

        while let Some(splitter) = worklist.pop_front() {
            for a in &letters {
                let pre = &inverse[a];
                let x: BTreeSet<usize> = splitter
                    .iter()
                    .flat_map(|&s| pre[s].iter().copied())
                    .collect();
                if x.is_empty() {
                    continue;
                }
                let mut next_blocks = Vec::new();
                for block in blocks.drain(..) {
                    let inside: BTreeSet<usize> = block.intersection(&x).copied().collect();
                    if inside.is_empty() || inside.len() == block.len() {
                        next_blocks.push(block);
                        continue;
                    }
                    let outside: BTreeSet<usize> = block.difference(&x).copied().collect();
                    // Replace the block in the worklist, or add the smaller half.
                    if let Some(pos) = worklist.iter().position(|w| *w == block) {
                        worklist.remove(pos);
                        worklist.push_back(inside.clone());
                        worklist.push_back(outside.clone());
                    } else if inside.len() <= outside.len() {
                        worklist.push_back(inside.clone());
                    } else {
                        worklist.push_back(outside.clone());
                    }
                    next_blocks.push(inside);
                    next_blocks.push(outside);
                }
                blocks = next_blocks;
            }
        }

        let mut block_of = vec![0usize; n];
        for (i, b) in blocks.iter().enumerate() {
            for &s in b {
                block_of[s] = i;
            }
        }
        let sink_block = block_of[sink];

        // Canonical renumbering by BFS from the initial block.
        let mut renumber: BTreeMap<usize, usize> = BTreeMap::new();
        let mut order: Vec<usize> = Vec::new();
        let start_block = block_of[self.initial];
        renumber.insert(start_block, 0);
        order.push(start_block);
        let mut cursor = 0;
        let mut new_trans: BTreeMap<(usize, ActName), usize> = BTreeMap::new();
        while cursor < order.len() {
            let block = order[cursor];
            let rep = *blocks[block].iter().next().unwrap();
            for a in &letters {
                let target = block_of[delta(rep, a)];
                if target == sink_block {
                    continue;
                }
                let idx = match renumber.get(&target) {
                    Some(&i) => i,
                    None => {
                        let i = order.len();
                        renumber.insert(target, i);
                        order.push(target);
                        i
                    }
                };
                new_trans.insert((cursor, a.clone()), idx);
            }
            cursor += 1;
        }

        // Keep only letters that still occur.
        let alphabet: BTreeSet<ActName> = new_trans.keys().map(|(_, a)| a.clone()).collect();
        TraceDfa {
            alphabet,
            n_states: order.len(),
            initial: 0,
            trans: new_trans,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccs::{parse_ccs, CcsSemantics};
    use crate::csp::{parse_csp, CspSemantics};
    use crate::lts::explore;
    use crate::term::ActName;

    fn ccs_traces(src: &str) -> TraceDfa {
        let g = explore(&parse_ccs(src).unwrap(), &CcsSemantics::default(), 20_000).unwrap();
        TraceDfa::from_graph(&g).unwrap()
    }

    fn csp_traces(src: &str) -> TraceDfa {
        let g = explore(&parse_csp(src).unwrap(), &CspSemantics, 20_000).unwrap();
        TraceDfa::from_graph(&g).unwrap()
    }

    fn word(s: &str) -> Vec<ActName> {
        s.chars().map(|c| ActName::plain(c.to_string())).collect()
    }

    #[test]
    fn traces_of_prefix() {
        let d = csp_traces("a -> STOP");
        assert!(d.accepts(&word("")));
        assert!(d.accepts(&word("a")));
        assert!(!d.accepts(&word("aa")));
        assert_eq!(d, TraceDfa::from_words([word("a")]));
    }

    #[test]
    fn traces_of_branching_choice() {
        let d = csp_traces("(b -> STOP) [] (b -> (c -> STOP))");
        assert_eq!(d, TraceDfa::from_words([word("b"), word("bc")]));
    }

    #[test]
    fn traces_of_divergence_are_empty_word_only() {
        let d = csp_traces("DIV");
        assert_eq!(d, TraceDfa::from_words::<_, Vec<ActName>>([]));
        assert!(d.accepts(&[]));
        assert_eq!(d.n_states, 1);
    }

    #[test]
    fn tau_is_abstracted() {
        let d1 = ccs_traces("tau.a.0");
        let d2 = ccs_traces("a.0");
        assert!(d1.equivalent(&d2));
        assert_eq!(d1, d2);
    }

    #[test]
    fn distinguishing_word_is_shortest() {
        let d1 = ccs_traces("a.0");
        let d2 = ccs_traces("a.a.0");
        let w = d1.distinguishing_word(&d2).unwrap();
        assert_eq!(w, word("aa"));
        assert!(!d1.accepts(&w) && d2.accepts(&w));
    }

    #[test]
    fn nondeterminism_is_determinised() {
        // b.0 + b.c.0 and b.c.0 + b.0 have equal trace sets.
        let d1 = ccs_traces("b.0 + b.c.0");
        let d2 = ccs_traces("b.c.0 + b.0");
        assert_eq!(d1, d2);
        // And the minimal DFA has 3 live states: ε, b, bc.
        assert_eq!(d1.n_states, 3);
    }

    #[test]
    fn minimisation_merges_equivalent_states() {
        let d = ccs_traces("a.b.0 + a.b.0 + a.b.0");
        assert_eq!(d.n_states, 3);
    }

    #[test]
    fn words_up_to_enumerates_prefix_closed() {
        let d = csp_traces("a -> (b -> STOP)");
        let words = d.words_up_to(2);
        assert_eq!(words, vec![word(""), word("a"), word("ab")]);
    }

    #[test]
    fn alphabet_difference_is_detected() {
        let d1 = ccs_traces("a.0");
        let d2 = ccs_traces("a.0 + b.0");
        assert_eq!(d1.distinguishing_word(&d2), Some(word("b")));
    }
}
