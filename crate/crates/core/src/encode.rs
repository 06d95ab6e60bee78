//! The CSP→CCS translation over a tripled alphabet. Synchronisation over a
//! set `A` is simulated by a pair of recursive relay processes put in
//! parallel with the translated operands: the left relay re-letters each
//! `a ∈ A` into the sequence `a' a'' a'` (and `a ∉ A` into `a''`), the right
//! relay into `'a' 'a'` (resp. `a''`). Restricting the primed copies forces
//! the two relays to handshake around the `a''` that remains visible, which
//! a final relabelling maps back to `a`. The translation preserves trace
//! sets but not branching structure or divergence.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::equiv::{trace_equiv, Verdict};
use crate::lts::{explore, GraphError, ProcessGraph, StepError};
use crate::term::{
    ActName, BinderKind, Label, Op, Relabelling, Term, VarName,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error("action `{0}` is outside the translation alphabet")]
    OutsideAlphabet(ActName),
    #[error("alphabet names must be plain communications, got `{0}`")]
    NotPlain(ActName),
    #[error("the translation source must be a CSP term")]
    NotCsp,
}

/// A base set of communications together with its primed and doubly-primed
/// copies; the three copies are kept disjoint by the decoration field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripledAlphabet {
    base: BTreeSet<ActName>,
}

impl TripledAlphabet {
    pub fn new(names: impl IntoIterator<Item = ActName>) -> Result<Self, EncodeError> {
        let mut base = BTreeSet::new();
        for n in names {
            if !n.is_plain_name() {
                return Err(EncodeError::NotPlain(n));
            }
            base.insert(n);
        }
        Ok(TripledAlphabet { base })
    }

    /// The alphabet of all communications mentioned by a CSP term.
    pub fn from_term(term: &Term) -> Result<Self, EncodeError> {
        Self::new(term.action_names())
    }

    pub fn base(&self) -> &BTreeSet<ActName> {
        &self.base
    }

    pub fn contains(&self, a: &ActName) -> bool {
        self.base.contains(a)
    }

    pub fn primed(&self) -> BTreeSet<ActName> {
        self.base
            .iter()
            .map(|a| ActName::primed(a.base.clone()))
            .collect()
    }

    /// The relabelling `a'' ↦ a` for every base name, identity elsewhere.
    pub fn unprime(&self) -> Relabelling {
        Relabelling::new(
            self.base
                .iter()
                .map(|a| (ActName::doubly_primed(a.base.clone()), a.clone())),
        )
        .expect("base names are distinct")
    }
}

/// Which side of the translated parallel composition a relay serves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GadgetFlavor {
    /// Left relay: `a ∈ A` becomes `a' a'' a'`, `a ∉ A` becomes `a''`.
    Left,
    /// Right relay: `a ∈ A` becomes `'a' 'a'`, `a ∉ A` becomes `a''`.
    Right,
}

/// The recursive relay process for a synchronisation set `A ⊆ alphabet`.
/// For the empty alphabet the body is the empty sum `0`.
pub fn gadget(
    flavor: GadgetFlavor,
    sync: &BTreeSet<ActName>,
    alphabet: &TripledAlphabet,
) -> Result<Term, EncodeError> {
    gadget_named(flavor, sync, alphabet, &VarName::new("X"))
}

fn gadget_named(
    flavor: GadgetFlavor,
    sync: &BTreeSet<ActName>,
    alphabet: &TripledAlphabet,
    var: &VarName,
) -> Result<Term, EncodeError> {
    for a in sync {
        if !alphabet.contains(a) {
            return Err(EncodeError::OutsideAlphabet(a.clone()));
        }
    }
    let mut summands = Vec::new();
    for a in alphabet.base() {
        let again = Term::Var(var.clone());
        let primed = ActName::primed(a.base.clone());
        let doubly = ActName::doubly_primed(a.base.clone());
        let chain = if sync.contains(a) {
            match flavor {
                GadgetFlavor::Left => Term::prefix_act(
                    a.bar(),
                    Term::prefix_act(
                        primed.clone(),
                        Term::prefix_act(doubly, Term::prefix_act(primed, again)),
                    ),
                ),
                GadgetFlavor::Right => Term::prefix_act(
                    a.bar(),
                    Term::prefix_act(primed.bar(), Term::prefix_act(primed.bar(), again)),
                ),
            }
        } else {
            Term::prefix_act(a.bar(), Term::prefix_act(doubly, again))
        };
        summands.push(chain);
    }
    let body = Term::choice(summands);
    Ok(Term::fix(var, vec![(var.clone(), body)]))
}

/// Translates a CSP term (possibly open; variables pass through) into CCS
/// over the tripled alphabet. Free variables are preserved exactly.
pub fn encode(term: &Term, alphabet: &TripledAlphabet) -> Result<Term, EncodeError> {
    match term {
        Term::Var(x) => Ok(Term::Var(x.clone())),
        Term::Op(op, args) => match op {
            Op::Stop | Op::Div => Ok(Term::nil()),
            Op::Arrow(a) => {
                if !alphabet.contains(a) {
                    return Err(EncodeError::OutsideAlphabet(a.clone()));
                }
                Ok(Term::prefix_act(a.clone(), encode(&args[0], alphabet)?))
            }
            Op::ExtChoice | Op::IntChoice => Ok(Term::choice(vec![
                encode(&args[0], alphabet)?,
                encode(&args[1], alphabet)?,
            ])),
            Op::Conceal(b) => {
                if !alphabet.contains(b) {
                    return Err(EncodeError::OutsideAlphabet(b.clone()));
                }
                let inner = encode(&args[0], alphabet)?;
                let var = crate::term::fresh_name("X", &inner.all_vars());
                let absorber = Term::fix(
                    &var,
                    vec![(
                        var.clone(),
                        Term::prefix_act(b.bar(), Term::Var(var.clone())),
                    )],
                );
                Ok(Term::restrict(
                    Term::par(inner, absorber),
                    BTreeSet::from([b.clone()]),
                ))
            }
            Op::Rename(f) => {
                for (old, new) in f.pairs() {
                    if !alphabet.contains(old) {
                        return Err(EncodeError::OutsideAlphabet(old.clone()));
                    }
                    if !alphabet.contains(new) {
                        return Err(EncodeError::OutsideAlphabet(new.clone()));
                    }
                }
                Ok(Term::relabel(encode(&args[0], alphabet)?, f.as_relabelling()))
            }
            Op::Sync(sync) => {
                let left = encode(&args[0], alphabet)?;
                let right = encode(&args[1], alphabet)?;
                let mut avoid = left.all_vars();
                avoid.extend(right.all_vars());
                let var = crate::term::fresh_name("X", &avoid);
                let left_relay = gadget_named(GadgetFlavor::Left, sync, alphabet, &var)?;
                let right_relay = gadget_named(GadgetFlavor::Right, sync, alphabet, &var)?;
                let component = |p: Term, relay: Term| {
                    Term::restrict(Term::par(p, relay), alphabet.base().clone())
                };
                Ok(Term::relabel(
                    Term::restrict(
                        Term::par(component(left, left_relay), component(right, right_relay)),
                        alphabet.primed(),
                    ),
                    alphabet.unprime(),
                ))
            }
            _ => Err(EncodeError::NotCsp),
        },
        Term::Binder(BinderKind::Mu, vars, bodies) => {
            let body = encode(&bodies[0], alphabet)?;
            Ok(Term::fix(&vars[0], vec![(vars[0].clone(), body)]))
        }
        Term::Binder(BinderKind::Fix, _, _) => Err(EncodeError::NotCsp),
    }
}

/// Rewrites a relay-free CCS term over plain names, replacing each visible
/// prefix `a` by the letter sequence the left relay would produce: `a ∈
/// sync` becomes `a'.a''.a'`, other names become `a''`. Used as the
/// syntactic oracle for [`gadget_effect_check`].
pub fn relay_prefix_rewrite(
    term: &Term,
    sync: &BTreeSet<ActName>,
    alphabet: &TripledAlphabet,
) -> Result<Term, EncodeError> {
    match term {
        Term::Var(x) => Ok(Term::Var(x.clone())),
        Term::Op(Op::Prefix(Label::Act(a)), args) => {
            if !a.is_plain_name() || !alphabet.contains(a) {
                return Err(EncodeError::OutsideAlphabet(a.clone()));
            }
            let rest = relay_prefix_rewrite(&args[0], sync, alphabet)?;
            let primed = ActName::primed(a.base.clone());
            let doubly = ActName::doubly_primed(a.base.clone());
            Ok(if sync.contains(a) {
                Term::prefix_act(
                    primed.clone(),
                    Term::prefix_act(doubly, Term::prefix_act(primed, rest)),
                )
            } else {
                Term::prefix_act(doubly, rest)
            })
        }
        Term::Op(Op::Prefix(Label::Tau), args) => Ok(Term::prefix(
            Label::Tau,
            relay_prefix_rewrite(&args[0], sync, alphabet)?,
        )),
        Term::Op(Op::Choice, args) => Ok(Term::Op(
            Op::Choice,
            args.iter()
                .map(|t| relay_prefix_rewrite(t, sync, alphabet))
                .collect::<Result<_, _>>()?,
        )),
        Term::Binder(BinderKind::Fix, vars, bodies) => Ok(Term::Binder(
            BinderKind::Fix,
            vars.clone(),
            bodies
                .iter()
                .map(|t| relay_prefix_rewrite(t, sync, alphabet))
                .collect::<Result<_, _>>()?,
        )),
        _ => Err(EncodeError::NotCsp),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EffectCheckError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Step(#[from] StepError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Verifies the relay's re-lettering semantics on a concrete process `p`
/// over plain names: `(p | left-relay) \ alphabet` must be trace-equivalent
/// to the syntactic rewrite of `p`.
pub fn gadget_effect_check(
    p: &Term,
    sync: &BTreeSet<ActName>,
    alphabet: &TripledAlphabet,
    max_states: usize,
) -> Result<Verdict, EffectCheckError> {
    let relay = gadget(GadgetFlavor::Left, sync, alphabet)?;
    let composed = Term::restrict(Term::par(p.clone(), relay), alphabet.base().clone());
    let rewritten = relay_prefix_rewrite(p, sync, alphabet)?;
    let sem = crate::ccs::CcsSemantics::default();
    let g1 = explore(&composed, &sem, max_states)?;
    let g2 = explore(&rewritten, &sem, max_states)?;
    Ok(trace_equiv(&g1, &g2)?)
}

/// Explores the graphs of a closed CSP term and of its encoding and checks
/// trace equivalence between them.
pub fn encoding_trace_check(
    p: &Term,
    alphabet: &TripledAlphabet,
    max_states: usize,
) -> Result<(Verdict, ProcessGraph, ProcessGraph), EffectCheckError> {
    let source = explore(p, &crate::csp::CspSemantics, max_states)?;
    let encoded = encode(p, alphabet)?;
    let target = explore(&encoded, &crate::ccs::CcsSemantics::default(), max_states)?;
    let verdict = trace_equiv(&target, &source)?;
    Ok((verdict, source, target))
}
