//! Language-generic terms: variables, operators and binding constructs shared
//! by the CCS and CSP front ends, together with capture-avoiding substitution,
//! α-equivalence, the syntactic prefix preorder and head decomposition.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Which language a construct belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LangId {
    Ccs,
    Csp,
}

impl fmt::Display for LangId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LangId::Ccs => write!(f, "ccs"),
            LangId::Csp => write!(f, "csp"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("a single variable has no head")]
    HeadOfVariable,
    #[error("term mixes languages: {0} construct inside a {1} term")]
    MixedLanguages(LangId, LangId),
}

// ---------------------------------------------------------------------------
// Variables
// ---------------------------------------------------------------------------

/// A process variable. Distinct ids denote distinct variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarName(String);

impl VarName {
    /// Creates a variable name. Ids must be nonempty and must not start with
    /// `%`, which is reserved for internal α-canonical names.
    pub fn new(id: impl Into<String>) -> Self {
        let id = id.into();
        assert!(!id.is_empty(), "variable names must be nonempty");
        assert!(
            !id.starts_with('%'),
            "variable names starting with '%' are reserved"
        );
        VarName(id)
    }

    /// Internal constructor for α-canonical bound names. Never printed.
    fn canonical(level: usize) -> Self {
        VarName(format!("%{level}"))
    }

    pub fn id(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Picks a name based on `base` that does not occur in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<VarName>) -> VarName {
    let candidate = VarName::new(base);
    if !avoid.contains(&candidate) {
        return candidate;
    }
    for n in 1usize.. {
        let candidate = VarName::new(format!("{base}{n}"));
        if !avoid.contains(&candidate) {
            return candidate;
        }
    }
    unreachable!()
}

// ---------------------------------------------------------------------------
// Action names and labels
// ---------------------------------------------------------------------------

/// Decoration distinguishes the three copies `a`, `a'`, `a''` of a base name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Decoration {
    Plain,
    Primed,
    DoublyPrimed,
}

/// Polarity of a visible CCS label; CSP labels are always `Name`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    Name,
    Coname,
}

/// A visible action name: a base identifier, one of three decorated copies,
/// and a polarity. `bar` is an involution; τ is not an `ActName` but a
/// separate case of [`Label`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActName {
    pub base: String,
    pub decoration: Decoration,
    pub polarity: Polarity,
}

impl ActName {
    pub fn plain(base: impl Into<String>) -> Self {
        ActName {
            base: base.into(),
            decoration: Decoration::Plain,
            polarity: Polarity::Name,
        }
    }

    pub fn primed(base: impl Into<String>) -> Self {
        ActName {
            base: base.into(),
            decoration: Decoration::Primed,
            polarity: Polarity::Name,
        }
    }

    pub fn doubly_primed(base: impl Into<String>) -> Self {
        ActName {
            base: base.into(),
            decoration: Decoration::DoublyPrimed,
            polarity: Polarity::Name,
        }
    }

    /// The complementary label: `bar(bar(a)) = a`.
    pub fn bar(&self) -> Self {
        ActName {
            base: self.base.clone(),
            decoration: self.decoration,
            polarity: match self.polarity {
                Polarity::Name => Polarity::Coname,
                Polarity::Coname => Polarity::Name,
            },
        }
    }

    /// The underlying name with polarity stripped.
    pub fn unbarred(&self) -> Self {
        ActName {
            base: self.base.clone(),
            decoration: self.decoration,
            polarity: Polarity::Name,
        }
    }

    pub fn is_plain_name(&self) -> bool {
        self.decoration == Decoration::Plain && self.polarity == Polarity::Name
    }
}

impl fmt::Display for ActName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.polarity == Polarity::Coname {
            write!(f, "'")?;
        }
        write!(f, "{}", self.base)?;
        match self.decoration {
            Decoration::Plain => Ok(()),
            Decoration::Primed => write!(f, "'"),
            Decoration::DoublyPrimed => write!(f, "''"),
        }
    }
}

/// A transition label: τ or a visible action.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Tau,
    Act(ActName),
}

impl Label {
    pub fn visible(&self) -> Option<&ActName> {
        match self {
            Label::Tau => None,
            Label::Act(a) => Some(a),
        }
    }

    pub fn is_tau(&self) -> bool {
        matches!(self, Label::Tau)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Tau => write!(f, "tau"),
            Label::Act(a) => write!(f, "{a}"),
        }
    }
}

// ---------------------------------------------------------------------------
// Relabelling (CCS) and renaming (CSP)
// ---------------------------------------------------------------------------

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MapError {
    #[error("duplicate source name {0}")]
    DuplicateSource(ActName),
    #[error("source name {0} must have name polarity")]
    ConameSource(ActName),
}

/// A CCS relabelling function `f : L -> L` with `f(ā) = f(a)̄` and `f(τ) = τ`.
/// Only name-polarity entries are stored; bar-closure is by construction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Relabelling {
    map: BTreeMap<ActName, ActName>,
}

impl Relabelling {
    /// Builds a relabelling from `(old, new)` pairs of name-polarity actions.
    pub fn new(pairs: impl IntoIterator<Item = (ActName, ActName)>) -> Result<Self, MapError> {
        let mut map = BTreeMap::new();
        for (old, new) in pairs {
            if old.polarity == Polarity::Coname || new.polarity == Polarity::Coname {
                return Err(MapError::ConameSource(if old.polarity == Polarity::Coname {
                    old
                } else {
                    new
                }));
            }
            if map.insert(old.clone(), new).is_some() {
                return Err(MapError::DuplicateSource(old));
            }
        }
        Ok(Relabelling { map })
    }

    pub fn apply_act(&self, a: &ActName) -> ActName {
        match a.polarity {
            Polarity::Name => self.map.get(a).cloned().unwrap_or_else(|| a.clone()),
            Polarity::Coname => {
                let plain = a.unbarred();
                self.map
                    .get(&plain)
                    .map(|n| n.bar())
                    .unwrap_or_else(|| a.clone())
            }
        }
    }

    pub fn apply(&self, l: &Label) -> Label {
        match l {
            Label::Tau => Label::Tau,
            Label::Act(a) => Label::Act(self.apply_act(a)),
        }
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&ActName, &ActName)> {
        self.map.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// A CSP renaming function `f : Act -> Act` with `f(τ) = τ`; plain names only.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Renaming {
    map: BTreeMap<ActName, ActName>,
}

impl Renaming {
    pub fn new(pairs: impl IntoIterator<Item = (ActName, ActName)>) -> Result<Self, MapError> {
        let mut map = BTreeMap::new();
        for (old, new) in pairs {
            if map.insert(old.clone(), new).is_some() {
                return Err(MapError::DuplicateSource(old));
            }
        }
        Ok(Renaming { map })
    }

    pub fn apply_act(&self, a: &ActName) -> ActName {
        self.map.get(a).cloned().unwrap_or_else(|| a.clone())
    }

    pub fn apply(&self, l: &Label) -> Label {
        match l {
            Label::Tau => Label::Tau,
            Label::Act(a) => Label::Act(self.apply_act(a)),
        }
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&ActName, &ActName)> {
        self.map.iter()
    }

    /// Reinterprets a CSP renaming as a CCS relabelling (used when a renamed
    /// CSP process is carried over into CCS).
    pub fn as_relabelling(&self) -> Relabelling {
        Relabelling {
            map: self.map.clone(),
        }
    }
}

// ---------------------------------------------------------------------------
// Terms
// ---------------------------------------------------------------------------

/// Operator symbols, with their static payloads. Payloads (actions, name
/// sets, relabellings) are part of the symbol, not subterms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Op {
    // CCS
    /// `α.E` for `α` an action (τ or visible, possibly a coname).
    Prefix(Label),
    /// Finite choice `Σ E_i`; variadic, the empty sum is `0`.
    Choice,
    /// Parallel composition `E | F`.
    Par,
    /// Restriction `E \ L` for a finite set of names.
    Restrict(BTreeSet<ActName>),
    /// Relabelling `E[f]`.
    Relabel(Relabelling),
    // CSP
    Stop,
    Div,
    /// Prefixing `a -> E` for a plain communication.
    Arrow(ActName),
    /// External choice `E [] F`.
    ExtChoice,
    /// Internal choice `E |~| F`.
    IntChoice,
    /// Parallel composition `E [|A|] F` synchronising on the set `A`.
    Sync(BTreeSet<ActName>),
    /// Concealment `E \ b` of a single communication.
    Conceal(ActName),
    /// Renaming `f(E)`.
    Rename(Renaming),
}

impl Op {
    /// Declared arity; `None` means variadic.
    pub fn arity(&self) -> Option<usize> {
        match self {
            Op::Choice => None,
            Op::Stop | Op::Div => Some(0),
            Op::Prefix(_) | Op::Restrict(_) | Op::Relabel(_) => Some(1),
            Op::Arrow(_) | Op::Conceal(_) | Op::Rename(_) => Some(1),
            Op::Par | Op::ExtChoice | Op::IntChoice | Op::Sync(_) => Some(2),
        }
    }

    pub fn lang(&self) -> LangId {
        match self {
            Op::Prefix(_) | Op::Choice | Op::Par | Op::Restrict(_) | Op::Relabel(_) => LangId::Ccs,
            _ => LangId::Csp,
        }
    }
}

/// Binding constructs. `Fix` is the CCS recursion over a finite recursive
/// specification with the main variable at position 0; `Mu` is CSP `μX·E`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinderKind {
    Fix,
    Mu,
}

impl BinderKind {
    pub fn lang(&self) -> LangId {
        match self {
            BinderKind::Fix => LangId::Ccs,
            BinderKind::Mu => LangId::Csp,
        }
    }
}

/// Abstract syntax shared by CCS and CSP.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(VarName),
    Op(Op, Vec<Term>),
    /// `Binder(kind, bound_vars, bodies)`, with `bound_vars` pairwise
    /// distinct and `bodies.len() == bound_vars.len()`. For `Fix` the main
    /// variable is `bound_vars[0]` and the equation list is normalised to
    /// reference-discovery order from it (see [`Term::fix`]).
    Binder(BinderKind, Vec<VarName>, Vec<Term>),
}

impl Term {
    // -- constructors -------------------------------------------------------

    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(VarName::new(name))
    }

    pub fn op(op: Op, args: Vec<Term>) -> Term {
        if let Some(n) = op.arity() {
            assert_eq!(n, args.len(), "arity mismatch for {op:?}");
        }
        Term::Op(op, args)
    }

    /// The CCS empty sum `0`.
    pub fn nil() -> Term {
        Term::Op(Op::Choice, vec![])
    }

    pub fn prefix(label: Label, body: Term) -> Term {
        Term::Op(Op::Prefix(label), vec![body])
    }

    pub fn prefix_act(a: ActName, body: Term) -> Term {
        Term::prefix(Label::Act(a), body)
    }

    /// n-ary CCS choice. Empty input yields `0`; a single summand is returned
    /// unchanged, since `Σ` over a singleton index set is not expressible in
    /// the concrete syntax.
    pub fn choice(mut summands: Vec<Term>) -> Term {
        match summands.len() {
            1 => summands.pop().unwrap(),
            _ => Term::Op(Op::Choice, summands),
        }
    }

    pub fn par(left: Term, right: Term) -> Term {
        Term::Op(Op::Par, vec![left, right])
    }

    pub fn restrict(body: Term, names: BTreeSet<ActName>) -> Term {
        Term::Op(Op::Restrict(names), vec![body])
    }

    pub fn relabel(body: Term, f: Relabelling) -> Term {
        Term::Op(Op::Relabel(f), vec![body])
    }

    /// CCS recursion `fix_main S`. Equations are reordered so that position 0
    /// holds the main variable and the rest follow in order of first
    /// reference from it; equations unreachable from the main variable keep
    /// their given order. This normalisation makes α-comparison positional.
    pub fn fix(main: &VarName, eqns: Vec<(VarName, Term)>) -> Term {
        let dom: BTreeSet<VarName> = eqns.iter().map(|(v, _)| v.clone()).collect();
        assert_eq!(dom.len(), eqns.len(), "recursion variables must be distinct");
        assert!(dom.contains(main), "main variable must be defined");
        let by_var: BTreeMap<&VarName, &Term> = eqns.iter().map(|(v, t)| (v, t)).collect();

        let mut order: Vec<VarName> = vec![main.clone()];
        let mut seen: BTreeSet<VarName> = order.iter().cloned().collect();
        let mut cursor = 0;
        while cursor < order.len() {
            let body = by_var[&order[cursor]];
            for v in body.free_vars_ordered() {
                if dom.contains(&v) && seen.insert(v.clone()) {
                    order.push(v);
                }
            }
            cursor += 1;
        }
        for (v, _) in &eqns {
            if seen.insert(v.clone()) {
                order.push(v.clone());
            }
        }
        let bodies = order.iter().map(|v| by_var[v].clone()).collect();
        Term::Binder(BinderKind::Fix, order, bodies)
    }

    pub fn stop() -> Term {
        Term::Op(Op::Stop, vec![])
    }

    pub fn div() -> Term {
        Term::Op(Op::Div, vec![])
    }

    pub fn arrow(a: ActName, body: Term) -> Term {
        Term::Op(Op::Arrow(a), vec![body])
    }

    pub fn ext_choice(left: Term, right: Term) -> Term {
        Term::Op(Op::ExtChoice, vec![left, right])
    }

    pub fn int_choice(left: Term, right: Term) -> Term {
        Term::Op(Op::IntChoice, vec![left, right])
    }

    pub fn sync(left: Term, set: BTreeSet<ActName>, right: Term) -> Term {
        Term::Op(Op::Sync(set), vec![left, right])
    }

    pub fn conceal(body: Term, b: ActName) -> Term {
        Term::Op(Op::Conceal(b), vec![body])
    }

    pub fn rename(body: Term, f: Renaming) -> Term {
        Term::Op(Op::Rename(f), vec![body])
    }

    pub fn mu(var: VarName, body: Term) -> Term {
        Term::Binder(BinderKind::Mu, vec![var], vec![body])
    }

    // -- basic queries -------------------------------------------------------

    /// Exactly the variables with a free occurrence.
    pub fn free_vars(&self) -> BTreeSet<VarName> {
        self.free_vars_ordered().into_iter().collect()
    }

    /// Free variables in order of first occurrence, without duplicates.
    pub fn free_vars_ordered(&self) -> Vec<VarName> {
        fn walk(t: &Term, bound: &mut Vec<VarName>, out: &mut Vec<VarName>) {
            match t {
                Term::Var(x) => {
                    if !bound.contains(x) && !out.contains(x) {
                        out.push(x.clone());
                    }
                }
                Term::Op(_, args) => args.iter().for_each(|a| walk(a, bound, out)),
                Term::Binder(_, vars, bodies) => {
                    let depth = bound.len();
                    bound.extend(vars.iter().cloned());
                    bodies.iter().for_each(|b| walk(b, bound, out));
                    bound.truncate(depth);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars_ordered().is_empty()
    }

    /// Every variable name occurring in the term, free or bound.
    pub fn all_vars(&self) -> BTreeSet<VarName> {
        let mut out = BTreeSet::new();
        fn walk(t: &Term, out: &mut BTreeSet<VarName>) {
            match t {
                Term::Var(x) => {
                    out.insert(x.clone());
                }
                Term::Op(_, args) => args.iter().for_each(|a| walk(a, out)),
                Term::Binder(_, vars, bodies) => {
                    out.extend(vars.iter().cloned());
                    bodies.iter().for_each(|b| walk(b, out));
                }
            }
        }
        walk(self, &mut out);
        out
    }

    /// All action names mentioned in operator payloads, with polarity
    /// stripped. Used for alphabet inference.
    pub fn action_names(&self) -> BTreeSet<ActName> {
        let mut out = BTreeSet::new();
        fn walk(t: &Term, out: &mut BTreeSet<ActName>) {
            if let Term::Op(op, _) = t {
                match op {
                    Op::Prefix(Label::Act(a)) => {
                        out.insert(a.unbarred());
                    }
                    Op::Restrict(set) | Op::Sync(set) => {
                        out.extend(set.iter().map(ActName::unbarred));
                    }
                    Op::Relabel(f) => {
                        for (old, new) in f.pairs() {
                            out.insert(old.clone());
                            out.insert(new.clone());
                        }
                    }
                    Op::Rename(f) => {
                        for (old, new) in f.pairs() {
                            out.insert(old.clone());
                            out.insert(new.clone());
                        }
                    }
                    Op::Arrow(a) | Op::Conceal(a) => {
                        out.insert(a.clone());
                    }
                    _ => {}
                }
            }
            match t {
                Term::Op(_, args) => args.iter().for_each(|a| walk(a, out)),
                Term::Binder(_, _, bodies) => bodies.iter().for_each(|b| walk(b, out)),
                Term::Var(_) => {}
            }
        }
        walk(self, &mut out);
        out
    }

    /// Checks that all operators and binders belong to `lang`.
    pub fn check_lang(&self, lang: LangId) -> Result<(), TermError> {
        match self {
            Term::Var(_) => Ok(()),
            Term::Op(op, args) => {
                if op.lang() != lang {
                    return Err(TermError::MixedLanguages(op.lang(), lang));
                }
                args.iter().try_for_each(|a| a.check_lang(lang))
            }
            Term::Binder(kind, _, bodies) => {
                if kind.lang() != lang {
                    return Err(TermError::MixedLanguages(kind.lang(), lang));
                }
                bodies.iter().try_for_each(|b| b.check_lang(lang))
            }
        }
    }

    // -- substitution --------------------------------------------------------

    /// Capture-avoiding simultaneous substitution: each free occurrence of
    /// `X ∈ dom(σ)` is replaced by `σ(X)`, renaming bound variables so that
    /// no free variable of any `σ(X)` is captured. The result is well-defined
    /// up to α-equivalence; bound names are only changed when capture forces
    /// it, and then deterministically.
    pub fn apply_subst(&self, subst: &Subst) -> Term {
        match self {
            Term::Var(x) => subst
                .get(x)
                .cloned()
                .unwrap_or_else(|| Term::Var(x.clone())),
            Term::Op(op, args) => Term::Op(
                op.clone(),
                args.iter().map(|a| a.apply_subst(subst)).collect(),
            ),
            Term::Binder(kind, vars, bodies) => {
                // Restrict to the entries that can act under this binder.
                let free_here = self.free_vars();
                let active: Vec<(&VarName, &Term)> = subst
                    .iter()
                    .filter(|(v, _)| free_here.contains(v))
                    .collect();
                if active.is_empty() {
                    return self.clone();
                }
                let mut range_fv: BTreeSet<VarName> = BTreeSet::new();
                for (_, t) in &active {
                    range_fv.extend(t.free_vars());
                }
                let mut inner = Subst::new();
                for (v, t) in &active {
                    inner.insert((*v).clone(), (*t).clone());
                }
                let mut new_vars = vars.clone();
                if vars.iter().any(|v| range_fv.contains(v)) {
                    let mut avoid: BTreeSet<VarName> = range_fv.clone();
                    avoid.extend(vars.iter().cloned());
                    for b in bodies {
                        avoid.extend(b.all_vars());
                    }
                    avoid.extend(active.iter().map(|(v, _)| (*v).clone()));
                    for (i, v) in vars.iter().enumerate() {
                        if range_fv.contains(v) {
                            let fresh = fresh_name(v.id(), &avoid);
                            avoid.insert(fresh.clone());
                            inner.insert(v.clone(), Term::Var(fresh.clone()));
                            new_vars[i] = fresh;
                        }
                    }
                }
                let new_bodies = bodies.iter().map(|b| b.apply_subst(&inner)).collect();
                Term::Binder(*kind, new_vars, new_bodies)
            }
        }
    }

    // -- α-equivalence -------------------------------------------------------

    /// α-canonical form: bound variables are renamed to `%level` names
    /// determined purely by binding depth and position, so two terms are
    /// α-equivalent iff their canonical forms are structurally equal.
    pub fn canon(&self) -> Term {
        fn walk(t: &Term, env: &mut Vec<(VarName, VarName)>) -> Term {
            match t {
                Term::Var(x) => {
                    for (orig, fresh) in env.iter().rev() {
                        if orig == x {
                            return Term::Var(fresh.clone());
                        }
                    }
                    Term::Var(x.clone())
                }
                Term::Op(op, args) => {
                    Term::Op(op.clone(), args.iter().map(|a| walk(a, env)).collect())
                }
                Term::Binder(kind, vars, bodies) => {
                    let depth = env.len();
                    let new_vars: Vec<VarName> = (0..vars.len())
                        .map(|i| VarName::canonical(depth + i))
                        .collect();
                    for (v, n) in vars.iter().zip(&new_vars) {
                        env.push((v.clone(), n.clone()));
                    }
                    let new_bodies = bodies.iter().map(|b| walk(b, env)).collect();
                    env.truncate(depth);
                    Term::Binder(*kind, new_vars, new_bodies)
                }
            }
        }
        walk(self, &mut Vec::new())
    }

    /// True iff the terms differ only by capture-avoiding renaming of bound
    /// variables.
    pub fn alpha_eq(&self, other: &Term) -> bool {
        self.canon() == other.canon()
    }

    // -- prefix preorder and heads -------------------------------------------

    /// If `self ≤ other` in the syntactic prefix preorder, returns a
    /// substitution σ with `self[σ] =α other` and `dom(σ) ⊆ free_vars(self)`.
    pub fn match_prefix(&self, other: &Term) -> Option<Subst> {
        fn walk(
            pat: &Term,
            target: &Term,
            pairs: &mut Vec<(VarName, VarName)>,
            subst: &mut BTreeMap<VarName, Term>,
        ) -> bool {
            match (pat, target) {
                (Term::Var(x), t) => {
                    // Bound pattern variables must line up positionally.
                    for (pv, tv) in pairs.iter().rev() {
                        if pv == x {
                            return matches!(t, Term::Var(y) if y == tv);
                        }
                    }
                    // Free pattern variable: the matched subterm must not
                    // mention target-side bound variables, or the binding
                    // would not survive outside the binder.
                    let tfv = t.free_vars();
                    if pairs.iter().any(|(_, tv)| tfv.contains(tv)) {
                        return false;
                    }
                    match subst.get(x) {
                        Some(prev) => prev.alpha_eq(t),
                        None => {
                            subst.insert(x.clone(), t.clone());
                            true
                        }
                    }
                }
                (Term::Op(o1, a1), Term::Op(o2, a2)) => {
                    o1 == o2
                        && a1.len() == a2.len()
                        && a1
                            .iter()
                            .zip(a2)
                            .all(|(p, t)| walk(p, t, pairs, subst))
                }
                (Term::Binder(k1, v1, b1), Term::Binder(k2, v2, b2)) => {
                    if k1 != k2 || v1.len() != v2.len() || b1.len() != b2.len() {
                        return false;
                    }
                    let depth = pairs.len();
                    for (pv, tv) in v1.iter().zip(v2) {
                        pairs.push((pv.clone(), tv.clone()));
                    }
                    let ok = b1.iter().zip(b2).all(|(p, t)| walk(p, t, pairs, subst));
                    pairs.truncate(depth);
                    ok
                }
                _ => false,
            }
        }
        let mut subst = BTreeMap::new();
        if walk(self, other, &mut Vec::new(), &mut subst) {
            Some(Subst(subst))
        } else {
            None
        }
    }

    /// Head decomposition: the canonical head of a non-variable term,
    /// together with the substitution reconstructing the term. Maximal
    /// subterms containing no variable bound by an enclosing binder of the
    /// term are replaced by fresh variables `X1, X2, …` in left-to-right
    /// order; constants are heads of themselves.
    pub fn head(&self) -> Result<(Term, Subst), TermError> {
        self.head_named("X")
    }

    /// As [`Term::head`] with a custom fresh-name stem; heads produced under
    /// different stems are equal up to injective renaming of variables.
    pub fn head_named(&self, stem: &str) -> Result<(Term, Subst), TermError> {
        if matches!(self, Term::Var(_)) {
            return Err(TermError::HeadOfVariable);
        }
        let used = self.all_vars();
        let mut next = 1usize;
        let mut fresh = || loop {
            let v = VarName::new(format!("{stem}{next}"));
            next += 1;
            if !used.contains(&v) {
                return v;
            }
        };
        let mut sigma: Vec<(VarName, Term)> = Vec::new();

        fn extract(
            t: &Term,
            bound: &BTreeSet<VarName>,
            fresh: &mut dyn FnMut() -> VarName,
            sigma: &mut Vec<(VarName, Term)>,
        ) -> Term {
            if t.free_vars().is_disjoint(bound) {
                let x = fresh();
                sigma.push((x.clone(), t.clone()));
                return Term::Var(x);
            }
            match t {
                Term::Var(x) => Term::Var(x.clone()),
                Term::Op(op, args) => Term::Op(
                    op.clone(),
                    args.iter()
                        .map(|a| extract(a, bound, fresh, sigma))
                        .collect(),
                ),
                Term::Binder(kind, vars, bodies) => {
                    let mut inner = bound.clone();
                    inner.extend(vars.iter().cloned());
                    Term::Binder(
                        *kind,
                        vars.clone(),
                        bodies
                            .iter()
                            .map(|b| extract(b, &inner, fresh, sigma))
                            .collect(),
                    )
                }
            }
        }

        let head = match self {
            Term::Var(_) => unreachable!(),
            Term::Op(op, args) => Term::Op(
                op.clone(),
                args.iter()
                    .map(|a| extract(a, &BTreeSet::new(), &mut fresh, &mut sigma))
                    .collect(),
            ),
            Term::Binder(kind, vars, bodies) => {
                let bound: BTreeSet<VarName> = vars.iter().cloned().collect();
                Term::Binder(
                    *kind,
                    vars.clone(),
                    bodies
                        .iter()
                        .map(|b| extract(b, &bound, &mut fresh, &mut sigma))
                        .collect(),
                )
            }
        };
        Ok((head, Subst(sigma.into_iter().collect())))
    }
}

// ---------------------------------------------------------------------------
// Substitutions
// ---------------------------------------------------------------------------

/// A finite partial map from variables to terms, extended by the identity
/// outside its domain.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Subst(BTreeMap<VarName, Term>);

impl Subst {
    pub fn new() -> Self {
        Subst(BTreeMap::new())
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (VarName, Term)>) -> Self {
        Subst(pairs.into_iter().collect())
    }

    pub fn singleton(var: VarName, term: Term) -> Self {
        Subst(BTreeMap::from([(var, term)]))
    }

    pub fn insert(&mut self, var: VarName, term: Term) {
        self.0.insert(var, term);
    }

    pub fn get(&self, var: &VarName) -> Option<&Term> {
        self.0.get(var)
    }

    pub fn domain(&self) -> impl Iterator<Item = &VarName> {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VarName, &Term)> {
        self.0.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Composition `ξ • σ`, defined by `(ξ•σ)(X) = σ(X)[ξ]` on `dom(σ)` and
    /// by `ξ(X)` on `dom(ξ) \ dom(σ)`, so that `E[σ][ξ] =α E[ξ•σ]`.
    pub fn compose(outer: &Subst, inner: &Subst) -> Subst {
        let mut map = BTreeMap::new();
        for (v, t) in inner.iter() {
            map.insert(v.clone(), t.apply_subst(outer));
        }
        for (v, t) in outer.iter() {
            map.entry(v.clone()).or_insert_with(|| t.clone());
        }
        Subst(map)
    }

    /// True iff every entry maps a variable to itself.
    pub fn is_renaming_to_identity(&self) -> bool {
        self.iter().all(|(v, t)| matches!(t, Term::Var(w) if w == v))
    }

    /// True iff the substitution maps variables to variables injectively.
    pub fn is_injective_renaming(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.iter().all(|(_, t)| match t {
            Term::Var(w) => seen.insert(w.clone()),
            _ => false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a() -> ActName {
        ActName::plain("a")
    }

    fn act(t: Term) -> Term {
        Term::prefix_act(a(), t)
    }

    // Schematic examples over f, g, c are instantiated at the
    // CCS signature: f := |, g := a._ , c := 0.
    fn f(x: Term, y: Term) -> Term {
        Term::par(x, y)
    }

    fn g(x: Term) -> Term {
        act(x)
    }

    fn c() -> Term {
        Term::nil()
    }

    fn x() -> VarName {
        VarName::new("X")
    }

    fn y() -> VarName {
        VarName::new("Y")
    }

    #[test]
    fn free_vars_of_variable() {
        assert_eq!(
            Term::var("X").free_vars(),
            BTreeSet::from([VarName::new("X")])
        );
    }

    #[test]
    fn free_vars_fully_bound_recursion() {
        let t = Term::fix(&x(), vec![(x(), act(Term::Var(x())))]);
        assert!(t.free_vars().is_empty());
    }

    #[test]
    fn free_vars_recursion_with_free_parameter() {
        // fix_X{X = f(Y, g(g(X)))}
        let body = f(Term::Var(y()), g(g(Term::Var(x()))));
        let t = Term::fix(&x(), vec![(x(), body)]);
        assert_eq!(t.free_vars(), BTreeSet::from([y()]));
    }

    #[test]
    fn subst_example_from_prefix_decomposition() {
        // f(X,Y)[X↦c, Y↦g(c)] = f(c, g(c))
        let t = f(Term::Var(x()), Term::Var(y()));
        let s = Subst::from_pairs([(x(), c()), (y(), g(c()))]);
        assert_eq!(t.apply_subst(&s), f(c(), g(c())));
    }

    #[test]
    fn subst_identity() {
        let t = Term::fix(&x(), vec![(x(), f(Term::Var(y()), Term::Var(x())))]);
        assert!(t.apply_subst(&Subst::new()).alpha_eq(&t));
    }

    #[test]
    fn subst_is_simultaneous() {
        // {X↦Y, Y↦c} applied to f(X,Y) gives f(Y,c), not f(c,c).
        let t = f(Term::Var(x()), Term::Var(y()));
        let s = Subst::from_pairs([(x(), Term::Var(y())), (y(), c())]);
        assert_eq!(t.apply_subst(&s), f(Term::Var(y()), c()));
    }

    #[test]
    fn subst_avoids_capture() {
        // (fix_X{X = Y | a.X})[Y↦a.X]: the bound X must be renamed.
        let t = Term::fix(&x(), vec![(x(), f(Term::Var(y()), act(Term::Var(x()))))]);
        let s = Subst::singleton(y(), act(Term::Var(x())));
        let r = t.apply_subst(&s);
        assert_eq!(r.free_vars(), BTreeSet::from([x()]));
        // The expected result renames the binder.
        let x1 = VarName::new("X1");
        let expected = Term::fix(
            &x1,
            vec![(x1.clone(), f(act(Term::Var(x())), act(Term::Var(x1.clone()))))],
        );
        assert!(r.alpha_eq(&expected));
    }

    #[test]
    fn compose_on_domains() {
        // σ = {X↦Y}, ξ = {Y↦c}: (ξ•σ)(X) = c, and Y stays mapped by ξ.
        let sigma = Subst::singleton(x(), Term::Var(y()));
        let xi = Subst::singleton(y(), c());
        let comp = Subst::compose(&xi, &sigma);
        assert_eq!(comp.get(&x()), Some(&c()));
        assert_eq!(comp.get(&y()), Some(&c()));
    }

    #[test]
    fn compose_identity_left() {
        let sigma = Subst::from_pairs([(x(), g(c()))]);
        let t = f(Term::Var(x()), Term::Var(y()));
        let composed = Subst::compose(&Subst::new(), &sigma);
        assert!(t.apply_subst(&composed).alpha_eq(&t.apply_subst(&sigma)));
    }

    #[test]
    fn alpha_eq_recursion_renaming() {
        let t1 = Term::fix(&x(), vec![(x(), act(Term::Var(x())))]);
        let t2 = Term::fix(&y(), vec![(y(), act(Term::Var(y())))]);
        assert!(t1.alpha_eq(&t2));
    }

    #[test]
    fn alpha_eq_distinguishes_free_vars() {
        assert!(!act(Term::Var(x())).alpha_eq(&act(Term::Var(y()))));
    }

    #[test]
    fn alpha_eq_mu() {
        let t1 = Term::mu(x(), Term::arrow(a(), Term::Var(x())));
        let t2 = Term::mu(y(), Term::arrow(a(), Term::Var(y())));
        assert!(t1.alpha_eq(&t2));
    }

    #[test]
    fn alpha_eq_mutual_recursion_equation_order() {
        // The same specification written with equations in either order.
        let b = ActName::plain("b");
        let t1 = Term::fix(
            &x(),
            vec![
                (x(), act(Term::Var(y()))),
                (y(), Term::prefix_act(b.clone(), Term::Var(x()))),
            ],
        );
        let t2 = Term::fix(
            &x(),
            vec![
                (y(), Term::prefix_act(b, Term::Var(x()))),
                (x(), act(Term::Var(y()))),
            ],
        );
        assert!(t1.alpha_eq(&t2));
    }

    #[test]
    fn match_prefix_example() {
        // f(X, g(Y)) ≤ f(c, g(c)) with σ = {X↦c, Y↦c}
        let pat = f(Term::Var(x()), g(Term::Var(y())));
        let target = f(c(), g(c()));
        let s = pat.match_prefix(&target).expect("should match");
        assert_eq!(s.get(&x()), Some(&c()));
        assert_eq!(s.get(&y()), Some(&c()));
        assert!(pat.apply_subst(&s).alpha_eq(&target));
    }

    #[test]
    fn match_prefix_reflexive() {
        let t = Term::fix(&x(), vec![(x(), f(Term::Var(y()), act(Term::Var(x()))))]);
        let s = t.match_prefix(&t).expect("reflexive");
        assert!(s.is_renaming_to_identity());
    }

    #[test]
    fn match_prefix_head_mismatch() {
        assert!(g(Term::Var(x())).match_prefix(&f(c(), g(c()))).is_none());
    }

    #[test]
    fn match_prefix_rejects_escaping_bound_var() {
        // Y (free) cannot match a subterm mentioning the target's bound var.
        let pat = Term::fix(&x(), vec![(x(), f(Term::Var(y()), Term::Var(x())))]);
        let target = Term::fix(&x(), vec![(x(), f(act(Term::Var(x())), Term::Var(x())))]);
        assert!(pat.match_prefix(&target).is_none());
    }

    #[test]
    fn head_of_applied_operator() {
        // head(f(c, g(c))) = (f(X1,X2), {X1↦c, X2↦g(c)})
        let t = f(c(), g(c()));
        let (h, s) = t.head().unwrap();
        assert_eq!(h, f(Term::var("X1"), Term::var("X2")));
        assert_eq!(s.get(&VarName::new("X1")), Some(&c()));
        assert_eq!(s.get(&VarName::new("X2")), Some(&g(c())));
        assert!(h.apply_subst(&s).alpha_eq(&t));
    }

    #[test]
    fn head_of_recursion() {
        // head(fix_X{X = f(g(c), g(g(X)))}) = (fix_X{X = f(X1, g(g(X)))}, {X1↦g(c)})
        let t = Term::fix(&x(), vec![(x(), f(g(c()), g(g(Term::Var(x())))))]);
        let (h, s) = t.head().unwrap();
        let expected = Term::fix(&x(), vec![(x(), f(Term::var("X1"), g(g(Term::Var(x())))))]);
        assert!(h.alpha_eq(&expected));
        assert_eq!(s.get(&VarName::new("X1")), Some(&g(c())));
        assert!(h.apply_subst(&s).alpha_eq(&t));
    }

    #[test]
    fn head_of_prefix() {
        // head(a.0) = (a.X1, {X1↦0})
        let t = act(c());
        let (h, s) = t.head().unwrap();
        assert_eq!(h, act(Term::var("X1")));
        assert_eq!(s.get(&VarName::new("X1")), Some(&c()));
    }

    #[test]
    fn head_of_constant_is_itself() {
        let (h, s) = Term::nil().head().unwrap();
        assert_eq!(h, Term::nil());
        assert!(s.is_empty());
        let (h, s) = Term::stop().head().unwrap();
        assert_eq!(h, Term::stop());
        assert!(s.is_empty());
    }

    #[test]
    fn head_of_variable_is_error() {
        assert_eq!(Term::var("X").head(), Err(TermError::HeadOfVariable));
    }

    #[test]
    fn heads_under_different_stems_are_equivalent() {
        let t = f(g(c()), f(c(), g(g(c()))));
        let (h1, _) = t.head().unwrap();
        let (h2, _) = t.head_named("Y").unwrap();
        let s12 = h1.match_prefix(&h2).expect("h1 ≤ h2");
        let s21 = h2.match_prefix(&h1).expect("h2 ≤ h1");
        assert!(s12.is_injective_renaming());
        assert!(s21.is_injective_renaming());
    }

    #[test]
    fn bar_involution() {
        let act = ActName::primed("a").bar();
        assert_eq!(act.bar(), ActName::primed("a"));
    }

    #[test]
    fn relabelling_is_bar_closed() {
        let f = Relabelling::new([(ActName::plain("a"), ActName::plain("b"))]).unwrap();
        assert_eq!(f.apply_act(&ActName::plain("a")), ActName::plain("b"));
        assert_eq!(f.apply_act(&ActName::plain("a").bar()), ActName::plain("b").bar());
        assert_eq!(f.apply(&Label::Tau), Label::Tau);
    }

    #[test]
    fn relabelling_rejects_duplicate_source() {
        let err = Relabelling::new([
            (ActName::plain("a"), ActName::plain("b")),
            (ActName::plain("a"), ActName::plain("c")),
        ]);
        assert_eq!(err, Err(MapError::DuplicateSource(ActName::plain("a"))));
    }
}
