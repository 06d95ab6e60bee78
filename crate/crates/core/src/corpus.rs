//! Seeded random corpora: closed CCS/CSP terms, hole punching for open-term
//! sampling, relation-preserving mutations for valuation sampling, α-variants
//! and random graphs. Everything is deterministic in the seed.
//!
//! Generated recursion is regular: an in-scope recursion variable is never
//! placed under a parallel composition, restriction, relabelling,
//! concealment or renaming, so every generated term is finite-state. With
//! `guarded_recursion` (the default) a recursion variable also only occurs
//! under at least one action prefix.

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::equiv::RelationId;
use crate::lts::ProcessGraph;
use crate::term::{ActName, Label, LangId, Relabelling, Renaming, Term, VarName};

#[derive(Debug, Clone)]
pub struct GenParams {
    pub lang: LangId,
    pub alphabet: Vec<ActName>,
    pub size: usize,
    pub max_depth: usize,
    pub guarded_recursion: bool,
}

impl GenParams {
    pub fn defaults(lang: LangId) -> GenParams {
        GenParams {
            lang,
            alphabet: ["a", "b", "c"].map(ActName::plain).to_vec(),
            size: 30,
            max_depth: 4,
            guarded_recursion: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub seed: u64,
    pub params: GenParams,
    pub terms: Vec<Term>,
}

pub fn generate(seed: u64, params: GenParams) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut terms = Vec::new();
    let mut seen: BTreeSet<Term> = BTreeSet::new();
    let mut attempts = 0;
    while terms.len() < params.size && attempts < params.size * 50 {
        attempts += 1;
        let mut gen = Generator {
            rng: &mut rng,
            params: &params,
            next_var: 0,
        };
        let term = gen.term(params.max_depth, &mut Vec::new());
        if term.is_closed() && seen.insert(term.canon()) {
            terms.push(term);
        }
    }
    Corpus {
        seed,
        params,
        terms,
    }
}

struct ScopeVar {
    name: VarName,
    guarded: bool,
    usable: bool,
}

struct Generator<'a, R: Rng> {
    rng: &'a mut R,
    params: &'a GenParams,
    next_var: usize,
}

impl<'a, R: Rng> Generator<'a, R> {
    fn act(&mut self) -> ActName {
        let i = self.rng.gen_range(0..self.params.alphabet.len());
        self.params.alphabet[i].clone()
    }

    fn fresh_var(&mut self, scope: &[ScopeVar]) -> VarName {
        loop {
            let v = VarName::new(format!("V{}", self.next_var));
            self.next_var += 1;
            if !scope.iter().any(|s| s.name == v) {
                return v;
            }
        }
    }

    fn usable_vars(&self, scope: &[ScopeVar]) -> Vec<VarName> {
        scope
            .iter()
            .filter(|s| s.usable && (s.guarded || !self.params.guarded_recursion))
            .map(|s| s.name.clone())
            .collect()
    }

    fn subset(&mut self) -> BTreeSet<ActName> {
        let mut out = BTreeSet::new();
        for a in &self.params.alphabet {
            if self.rng.gen_bool(0.5) {
                out.insert(a.clone());
            }
        }
        out
    }

    fn term(&mut self, depth: usize, scope: &mut Vec<ScopeVar>) -> Term {
        match self.params.lang {
            LangId::Csp => self.csp(depth, scope),
            LangId::Ccs => self.ccs(depth, scope),
        }
    }

    /// Marks every in-scope variable guarded (an action prefix was passed).
    fn guard_scope(scope: &mut [ScopeVar]) -> Vec<bool> {
        let saved: Vec<bool> = scope.iter().map(|s| s.guarded).collect();
        for s in scope.iter_mut() {
            s.guarded = true;
        }
        saved
    }

    /// Marks every in-scope variable unusable (a static operator encloses).
    fn freeze_scope(scope: &mut [ScopeVar]) -> Vec<bool> {
        let saved: Vec<bool> = scope.iter().map(|s| s.usable).collect();
        for s in scope.iter_mut() {
            s.usable = false;
        }
        saved
    }

    fn restore_guards(scope: &mut [ScopeVar], saved: &[bool]) {
        for (s, g) in scope.iter_mut().zip(saved) {
            s.guarded = *g;
        }
    }

    fn restore_usable(scope: &mut [ScopeVar], saved: &[bool]) {
        for (s, u) in scope.iter_mut().zip(saved) {
            s.usable = *u;
        }
    }

    fn csp(&mut self, depth: usize, scope: &mut Vec<ScopeVar>) -> Term {
        let vars = self.usable_vars(scope);
        // (weight, constructor id)
        let mut menu: Vec<(u32, u8)> = vec![(3, 0), (1, 1)];
        if !vars.is_empty() {
            menu.push((3, 2));
        }
        if depth > 0 {
            menu.extend_from_slice(&[(10, 3), (4, 4), (3, 5), (3, 6), (2, 7), (1, 8)]);
            if depth >= 2 {
                menu.push((3, 9));
            }
        }
        let total: u32 = menu.iter().map(|(w, _)| w).sum();
        let mut pick = self.rng.gen_range(0..total);
        let choice = menu
            .iter()
            .find(|(w, _)| {
                if pick < *w {
                    true
                } else {
                    pick -= w;
                    false
                }
            })
            .unwrap()
            .1;
        match choice {
            0 => Term::stop(),
            1 => Term::div(),
            2 => {
                let i = self.rng.gen_range(0..vars.len());
                Term::Var(vars[i].clone())
            }
            3 => {
                let a = self.act();
                let saved = Self::guard_scope(scope);
                let body = self.csp(depth - 1, scope);
                Self::restore_guards(scope, &saved);
                Term::arrow(a, body)
            }
            4 => Term::ext_choice(self.csp(depth - 1, scope), self.csp(depth - 1, scope)),
            5 => Term::int_choice(self.csp(depth - 1, scope), self.csp(depth - 1, scope)),
            6 => {
                let set = self.subset();
                let saved = Self::freeze_scope(scope);
                let left = self.csp(depth - 1, scope);
                let right = self.csp(depth - 1, scope);
                Self::restore_usable(scope, &saved);
                Term::sync(left, set, right)
            }
            7 => {
                let b = self.act();
                let saved = Self::freeze_scope(scope);
                let body = self.csp(depth - 1, scope);
                Self::restore_usable(scope, &saved);
                Term::conceal(body, b)
            }
            8 => {
                let old = self.act();
                let new = self.act();
                let f = Renaming::new([(old, new)]).unwrap();
                let saved = Self::freeze_scope(scope);
                let body = self.csp(depth - 1, scope);
                Self::restore_usable(scope, &saved);
                Term::rename(body, f)
            }
            9 => {
                let v = self.fresh_var(scope);
                scope.push(ScopeVar {
                    name: v.clone(),
                    guarded: false,
                    usable: true,
                });
                let body = self.csp(depth - 1, scope);
                scope.pop();
                Term::mu(v, body)
            }
            _ => unreachable!(),
        }
    }

    fn ccs(&mut self, depth: usize, scope: &mut Vec<ScopeVar>) -> Term {
        let vars = self.usable_vars(scope);
        let mut menu: Vec<(u32, u8)> = vec![(3, 0)];
        if !vars.is_empty() {
            menu.push((3, 1));
        }
        if depth > 0 {
            menu.extend_from_slice(&[(8, 2), (2, 3), (4, 4), (3, 5), (2, 6), (1, 7)]);
            if depth >= 2 {
                menu.push((3, 8));
                menu.push((1, 9));
            }
        }
        let total: u32 = menu.iter().map(|(w, _)| w).sum();
        let mut pick = self.rng.gen_range(0..total);
        let choice = menu
            .iter()
            .find(|(w, _)| {
                if pick < *w {
                    true
                } else {
                    pick -= w;
                    false
                }
            })
            .unwrap()
            .1;
        match choice {
            0 => Term::nil(),
            1 => {
                let i = self.rng.gen_range(0..vars.len());
                Term::Var(vars[i].clone())
            }
            2 => {
                let a = self.act();
                let label = if self.rng.gen_bool(1.0 / 3.0) {
                    Label::Act(a.bar())
                } else {
                    Label::Act(a)
                };
                let saved = Self::guard_scope(scope);
                let body = self.ccs(depth - 1, scope);
                Self::restore_guards(scope, &saved);
                Term::prefix(label, body)
            }
            3 => {
                let saved = Self::guard_scope(scope);
                let body = self.ccs(depth - 1, scope);
                Self::restore_guards(scope, &saved);
                Term::prefix(Label::Tau, body)
            }
            4 => Term::choice(vec![
                self.ccs(depth - 1, scope),
                self.ccs(depth - 1, scope),
            ]),
            5 => {
                let saved = Self::freeze_scope(scope);
                let left = self.ccs(depth - 1, scope);
                let right = self.ccs(depth - 1, scope);
                Self::restore_usable(scope, &saved);
                Term::par(left, right)
            }
            6 => {
                let mut set = BTreeSet::new();
                set.insert(self.act());
                let saved = Self::freeze_scope(scope);
                let body = self.ccs(depth - 1, scope);
                Self::restore_usable(scope, &saved);
                Term::restrict(body, set)
            }
            7 => {
                let old = self.act();
                let new = self.act();
                let f = Relabelling::new([(old, new)]).unwrap();
                let saved = Self::freeze_scope(scope);
                let body = self.ccs(depth - 1, scope);
                Self::restore_usable(scope, &saved);
                Term::relabel(body, f)
            }
            8 => {
                let v = self.fresh_var(scope);
                scope.push(ScopeVar {
                    name: v.clone(),
                    guarded: false,
                    usable: true,
                });
                let body = self.ccs(depth - 1, scope);
                scope.pop();
                Term::fix(&v, vec![(v.clone(), body)])
            }
            9 => {
                // Two mutually recursive equations.
                let v = self.fresh_var(scope);
                scope.push(ScopeVar {
                    name: v.clone(),
                    guarded: false,
                    usable: true,
                });
                let w = self.fresh_var(scope);
                scope.push(ScopeVar {
                    name: w.clone(),
                    guarded: false,
                    usable: true,
                });
                let body_v = self.ccs(depth - 1, scope);
                let body_w = self.ccs(depth - 1, scope);
                scope.pop();
                scope.pop();
                Term::fix(&v, vec![(v.clone(), body_v), (w, body_w)])
            }
            _ => unreachable!(),
        }
    }
}

// ---------------------------------------------------------------------------
// Hole punching and α-variants
// ---------------------------------------------------------------------------

fn positions(t: &Term) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    fn walk(t: &Term, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if !path.is_empty() {
            out.push(path.clone());
        }
        let children: &[Term] = match t {
            Term::Var(_) => &[],
            Term::Op(_, args) => args,
            Term::Binder(_, _, bodies) => bodies,
        };
        for (i, c) in children.iter().enumerate() {
            path.push(i);
            walk(c, path, out);
            path.pop();
        }
    }
    walk(t, &mut Vec::new(), &mut out);
    out
}

fn replace_at(t: &Term, path: &[usize], new: Term) -> Term {
    if path.is_empty() {
        return new;
    }
    match t {
        Term::Var(_) => unreachable!("path leads through a leaf"),
        Term::Op(op, args) => {
            let mut args = args.clone();
            args[path[0]] = replace_at(&args[path[0]], &path[1..], new);
            Term::Op(op.clone(), args)
        }
        Term::Binder(kind, vars, bodies) => {
            let mut bodies = bodies.clone();
            bodies[path[0]] = replace_at(&bodies[path[0]], &path[1..], new);
            Term::Binder(*kind, vars.clone(), bodies)
        }
    }
}

/// Replaces up to `max_holes` random subterm positions by fresh free
/// variables, turning a closed corpus term into an open sampling context.
/// Returns the open term and its hole variables.
pub fn punch_holes(
    t: &Term,
    rng: &mut impl Rng,
    max_holes: usize,
) -> (Term, Vec<VarName>) {
    let pool = ["X", "Y", "Z", "W", "U"];
    let used = t.all_vars();
    let mut available: Vec<VarName> = pool
        .iter()
        .map(|n| VarName::new(*n))
        .filter(|v| !used.contains(v))
        .collect();
    let mut term = t.clone();
    let mut holes = Vec::new();
    let n_holes = rng.gen_range(1..=max_holes.max(1));
    for _ in 0..n_holes {
        let pos = positions(&term);
        if pos.is_empty() || available.is_empty() {
            break;
        }
        let path = pos[rng.gen_range(0..pos.len())].clone();
        let var = available.remove(0);
        term = replace_at(&term, &path, Term::Var(var.clone()));
        holes.push(var);
    }
    // Punching may erase earlier holes; keep only surviving ones.
    let free = term.free_vars();
    holes.retain(|h| free.contains(h));
    (term, holes)
}

/// Renames bound variables to fresh names, producing an α-equivalent term.
pub fn alpha_variant(t: &Term, rng: &mut impl Rng) -> Term {
    let mut used = t.all_vars();
    fn walk(
        t: &Term,
        env: &mut Vec<(VarName, VarName)>,
        used: &mut BTreeSet<VarName>,
        rng: &mut impl Rng,
    ) -> Term {
        match t {
            Term::Var(x) => {
                for (orig, fresh) in env.iter().rev() {
                    if orig == x {
                        return Term::Var(fresh.clone());
                    }
                }
                Term::Var(x.clone())
            }
            Term::Op(op, args) => Term::Op(
                op.clone(),
                args.iter().map(|a| walk(a, env, used, rng)).collect(),
            ),
            Term::Binder(kind, vars, bodies) => {
                let depth = env.len();
                let mut new_vars = Vec::new();
                for v in vars {
                    let fresh = loop {
                        let candidate = VarName::new(format!("R{}", rng.gen_range(0..100_000)));
                        if used.insert(candidate.clone()) {
                            break candidate;
                        }
                    };
                    env.push((v.clone(), fresh.clone()));
                    new_vars.push(fresh);
                }
                let new_bodies = bodies.iter().map(|b| walk(b, env, used, rng)).collect();
                env.truncate(depth);
                Term::Binder(*kind, new_vars, new_bodies)
            }
        }
    }
    let out = walk(t, &mut Vec::new(), &mut used, rng);
    debug_assert!(out.alpha_eq(t));
    out
}

// ---------------------------------------------------------------------------
// Relation-preserving mutations
// ---------------------------------------------------------------------------

fn fresh_action(t: &Term) -> ActName {
    let used = t.action_names();
    for candidate in ["z", "zz", "zzz"] {
        let a = ActName::plain(candidate);
        if !used.contains(&a) {
            return a;
        }
    }
    let mut n = 0;
    loop {
        let a = ActName::plain(format!("z{n}"));
        if !used.contains(&a) {
            return a;
        }
        n += 1;
    }
}

/// A variant of a closed term related to it by `rel`: wrappers that are
/// strongly bisimilar for the finer relations, with τ-introducing variants
/// added for the weak ones. Used to sample equivalent valuations.
pub fn mutate_preserving(
    t: &Term,
    lang: LangId,
    rel: RelationId,
    rng: &mut impl Rng,
) -> Term {
    let weak_ok = matches!(
        rel,
        RelationId::WeakBisim | RelationId::ConvergentWeakBisim | RelationId::Trace
    );
    match lang {
        LangId::Ccs => {
            let mut options: Vec<Term> = vec![
                Term::par(Term::nil(), t.clone()),
                Term::restrict(t.clone(), BTreeSet::from([fresh_action(t)])),
            ];
            if weak_ok {
                options.push(Term::prefix(Label::Tau, t.clone()));
                options.push(Term::choice(vec![t.clone(), Term::nil()]));
            } else if rel == RelationId::StrongBisim {
                options.push(Term::choice(vec![t.clone(), Term::nil()]));
            }
            options.swap_remove(rng.gen_range(0..options.len()))
        }
        LangId::Csp => {
            let mut options: Vec<Term> = vec![
                Term::conceal(t.clone(), fresh_action(t)),
                Term::sync(t.clone(), BTreeSet::new(), Term::stop()),
            ];
            if weak_ok {
                options.push(Term::int_choice(t.clone(), t.clone()));
                let v = crate::term::fresh_name("V", &t.all_vars());
                options.push(Term::mu(v, t.clone()));
            }
            options.swap_remove(rng.gen_range(0..options.len()))
        }
    }
}

// ---------------------------------------------------------------------------
// Random graphs
// ---------------------------------------------------------------------------

/// A random process graph with at most `max_states` states over labels
/// {τ, a, b}.
pub fn random_graph(rng: &mut impl Rng, max_states: usize) -> ProcessGraph {
    let labels = [
        Label::Tau,
        Label::Act(ActName::plain("a")),
        Label::Act(ActName::plain("b")),
    ];
    let n = rng.gen_range(1..=max_states.max(1));
    let mut transitions = Vec::new();
    for s in 0..n {
        for _ in 0..rng.gen_range(0..=2) {
            let l = labels[rng.gen_range(0..labels.len())].clone();
            let t = rng.gen_range(0..n);
            transitions.push((s, l, t));
        }
    }
    ProcessGraph::from_parts(
        (0..n).map(|i| format!("s{i}")).collect(),
        0,
        transitions,
        true,
    )
}

/// A graph weakly bisimilar to `g`: the initial state is prefixed by a
/// fresh τ-state, or τ-self-loops are added (the latter changes divergence
/// but not weak bisimilarity).
pub fn weak_variant(g: &ProcessGraph, rng: &mut impl Rng) -> ProcessGraph {
    let n = g.n_states();
    let mut transitions: Vec<(usize, Label, usize)> = g
        .transitions()
        .map(|(s, l, t)| (s, l.clone(), t))
        .collect();
    let mut states = g.states.clone();
    if rng.gen_bool(0.5) {
        // Fresh τ-prefixed initial state.
        states.push("pad".to_string());
        transitions.push((n, Label::Tau, g.initial));
        ProcessGraph::from_parts(states, n, transitions, true)
    } else {
        let s = rng.gen_range(0..n);
        transitions.push((s, Label::Tau, s));
        ProcessGraph::from_parts(states, g.initial, transitions, true)
    }
}

/// Convenience: a reproducible standard RNG for tests.
pub fn rng_from_seed(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccs::CcsSemantics;
    use crate::csp::CspSemantics;
    use crate::lts::{explore, Semantics};

    #[test]
    fn generation_is_deterministic() {
        let a = generate(42, GenParams::defaults(LangId::Csp));
        let b = generate(42, GenParams::defaults(LangId::Csp));
        assert_eq!(a.terms, b.terms);
        let c = generate(43, GenParams::defaults(LangId::Csp));
        assert_ne!(a.terms, c.terms);
    }

    #[test]
    fn generated_terms_are_closed_and_well_formed() {
        for lang in [LangId::Ccs, LangId::Csp] {
            let corpus = generate(7, GenParams::defaults(lang));
            assert_eq!(corpus.terms.len(), corpus.params.size);
            for t in &corpus.terms {
                assert!(t.is_closed());
                t.check_lang(lang).unwrap();
            }
        }
    }

    #[test]
    fn generated_terms_are_finite_state_under_default_cap() {
        let csp = generate(42, GenParams::defaults(LangId::Csp));
        for t in &csp.terms {
            let g = explore(t, &CspSemantics, 20_000).unwrap();
            assert!(g.complete, "state blow-up for {}", CspSemantics.print(t));
        }
        let ccs = generate(42, GenParams::defaults(LangId::Ccs));
        let sem = CcsSemantics::default();
        for t in &ccs.terms {
            let g = explore(t, &sem, 20_000).unwrap();
            assert!(g.complete, "state blow-up for {}", sem.print(t));
        }
    }

    #[test]
    fn punched_holes_are_free() {
        let corpus = generate(5, GenParams::defaults(LangId::Csp));
        let mut rng = rng_from_seed(1);
        let mut found = 0;
        for t in &corpus.terms {
            let (open, holes) = punch_holes(t, &mut rng, 2);
            let free = open.free_vars();
            for h in &holes {
                assert!(free.contains(h));
            }
            found += holes.len();
        }
        assert!(found > 0);
    }

    #[test]
    fn alpha_variant_is_alpha_equivalent() {
        let mut rng = rng_from_seed(9);
        for lang in [LangId::Ccs, LangId::Csp] {
            let corpus = generate(11, GenParams::defaults(lang));
            for t in &corpus.terms {
                let v = alpha_variant(t, &mut rng);
                assert!(v.alpha_eq(t));
            }
        }
    }

    #[test]
    fn mutations_preserve_their_relation() {
        use crate::equiv::check_relation;
        let mut rng = rng_from_seed(3);
        for lang in [LangId::Ccs, LangId::Csp] {
            let mut params = GenParams::defaults(lang);
            params.max_depth = 2;
            params.size = 8;
            let corpus = generate(13, params);
            let sem = crate::lts::semantics_for(lang);
            for t in &corpus.terms {
                for rel in [
                    RelationId::StrongBisim,
                    RelationId::WeakBisim,
                    RelationId::ConvergentWeakBisim,
                    RelationId::Trace,
                ] {
                    let m = mutate_preserving(t, lang, rel, &mut rng);
                    let g1 = explore(t, sem.as_ref(), 20_000).unwrap();
                    let g2 = explore(&m, sem.as_ref(), 20_000).unwrap();
                    let v = check_relation(rel, &g1, &g2).unwrap();
                    assert!(
                        v.holds,
                        "{rel} mutation broke relation: {} vs {}",
                        sem.print(t),
                        sem.print(&m)
                    );
                }
            }
        }
    }

    #[test]
    fn random_graphs_are_valid_and_seeded() {
        let mut rng1 = rng_from_seed(5);
        let mut rng2 = rng_from_seed(5);
        let g1 = random_graph(&mut rng1, 40);
        let g2 = random_graph(&mut rng2, 40);
        assert_eq!(g1, g2);
        assert!(g1.n_states() <= 40);
    }

    #[test]
    fn weak_variant_stays_weakly_bisimilar() {
        let mut rng = rng_from_seed(17);
        for _ in 0..20 {
            let g = random_graph(&mut rng, 10);
            let v = weak_variant(&g, &mut rng);
            assert!(crate::equiv::weak_bisim(&g, &v).unwrap().holds);
        }
    }
}
