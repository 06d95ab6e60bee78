//! Translations between the two languages as first-class values: a
//! compositional context-table representation, wrappers for composition and
//! free-variable repair, and the compositionalisation of an arbitrary
//! term-level translation by head decomposition.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::encode::{encode, EncodeError, TripledAlphabet};
use crate::term::{BinderKind, LangId, Op, Subst, Term, TermError, VarName};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranslateError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error("no target context for operator {0:?}")]
    MissingContext(String),
    #[error("base translation is undefined on `{0}`")]
    Partial(String),
    #[error(transparent)]
    Term(#[from] TermError),
}

/// A translation from source-language terms to target-language terms.
pub trait Translation: Send + Sync {
    fn name(&self) -> String;
    fn source(&self) -> LangId;
    fn target(&self) -> LangId;
    fn translate(&self, term: &Term) -> Result<Term, TranslateError>;
}

/// The hole variables `X1, X2, …` target contexts are written over.
pub fn hole(i: usize) -> VarName {
    VarName::new(format!("X{}", i + 1))
}

// ---------------------------------------------------------------------------
// Context tables
// ---------------------------------------------------------------------------

type OpContextFn = dyn Fn(&Op, usize) -> Result<Term, TranslateError> + Send + Sync;
type BinderClauseFn =
    dyn Fn(BinderKind, &[VarName], Vec<Term>) -> Result<Term, TranslateError> + Send + Sync;

/// A translation given per-construct: each operator maps to an open target
/// context over `X1…Xn`, binders to a reconstruction clause, and variables
/// to themselves. Applying the table commutes with substitution by
/// construction, since contexts are instantiated by capture-avoiding
/// substitution.
pub struct ContextTable {
    name: String,
    source: LangId,
    target: LangId,
    op_context: Box<OpContextFn>,
    binder_clause: Box<BinderClauseFn>,
}

impl ContextTable {
    pub fn new(
        name: impl Into<String>,
        source: LangId,
        target: LangId,
        op_context: Box<OpContextFn>,
        binder_clause: Box<BinderClauseFn>,
    ) -> Self {
        ContextTable {
            name: name.into(),
            source,
            target,
            op_context,
            binder_clause,
        }
    }

    /// The target context for an operator, for inspection.
    pub fn op_context(&self, op: &Op, arity: usize) -> Result<Term, TranslateError> {
        (self.op_context)(op, arity)
    }
}

impl Translation for ContextTable {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn source(&self) -> LangId {
        self.source
    }

    fn target(&self) -> LangId {
        self.target
    }

    fn translate(&self, term: &Term) -> Result<Term, TranslateError> {
        match term {
            Term::Var(x) => Ok(Term::Var(x.clone())),
            Term::Op(op, args) => {
                let ctx = (self.op_context)(op, args.len())?;
                let mut subst = Subst::new();
                for (i, arg) in args.iter().enumerate() {
                    subst.insert(hole(i), self.translate(arg)?);
                }
                Ok(ctx.apply_subst(&subst))
            }
            Term::Binder(kind, vars, bodies) => {
                let translated = bodies
                    .iter()
                    .map(|b| self.translate(b))
                    .collect::<Result<Vec<_>, _>>()?;
                (self.binder_clause)(*kind, vars, translated)
            }
        }
    }
}

/// The identity translation of a language into itself.
pub fn identity(lang: LangId) -> ContextTable {
    ContextTable::new(
        format!("identity-{lang}"),
        lang,
        lang,
        Box::new(|op, arity| {
            Ok(Term::Op(
                op.clone(),
                (0..arity).map(|i| Term::Var(hole(i))).collect(),
            ))
        }),
        Box::new(|kind, vars, bodies| match kind {
            BinderKind::Fix => Ok(Term::fix(
                &vars[0],
                vars.iter().cloned().zip(bodies).collect(),
            )),
            BinderKind::Mu => Ok(Term::mu(vars[0].clone(), bodies.into_iter().next().unwrap())),
        }),
    )
}

/// The CSP→CCS encoding as a [`Translation`].
pub struct EncodeTranslation {
    pub alphabet: TripledAlphabet,
}

impl Translation for EncodeTranslation {
    fn name(&self) -> String {
        "encode".to_string()
    }

    fn source(&self) -> LangId {
        LangId::Csp
    }

    fn target(&self) -> LangId {
        LangId::Ccs
    }

    fn translate(&self, term: &Term) -> Result<Term, TranslateError> {
        Ok(encode(term, &self.alphabet)?)
    }
}

/// The encoding expressed as a context table; used to cross-check the
/// direct recursive definition.
pub fn encode_context_table(alphabet: TripledAlphabet) -> ContextTable {
    let ab = alphabet.clone();
    ContextTable::new(
        "encode-by-contexts",
        LangId::Csp,
        LangId::Ccs,
        Box::new(move |op, arity| {
            // Translating the operator applied to distinct variables yields
            // exactly the target context over the holes.
            let applied = Term::Op(
                op.clone(),
                (0..arity).map(|i| Term::Var(hole(i))).collect(),
            );
            Ok(encode(&applied, &ab)?)
        }),
        Box::new(|kind, vars, bodies| match kind {
            BinderKind::Mu => Ok(Term::fix(
                &vars[0],
                vec![(vars[0].clone(), bodies.into_iter().next().unwrap())],
            )),
            BinderKind::Fix => Err(TranslateError::Encode(EncodeError::NotCsp)),
        }),
    )
}

// ---------------------------------------------------------------------------
// Wrappers
// ---------------------------------------------------------------------------

/// Sequential composition: `second ∘ first`.
pub struct Composed {
    pub first: Box<dyn Translation>,
    pub second: Box<dyn Translation>,
}

impl Translation for Composed {
    fn name(&self) -> String {
        format!("{} . {}", self.second.name(), self.first.name())
    }

    fn source(&self) -> LangId {
        self.first.source()
    }

    fn target(&self) -> LangId {
        self.second.target()
    }

    fn translate(&self, term: &Term) -> Result<Term, TranslateError> {
        self.second.translate(&self.first.translate(term)?)
    }
}

/// Free-variable repair: replaces every free variable of the translated
/// term that is not free in the source term by a fixed closed target term.
pub struct FvrWrapped {
    inner: Box<dyn Translation>,
    filler: Term,
}

/// Wraps a translation so it becomes free-variable respecting, substituting
/// the closed term `filler` for stray variables.
pub fn make_fvr(inner: Box<dyn Translation>, filler: Term) -> FvrWrapped {
    assert!(filler.is_closed(), "the fvr filler must be a closed term");
    FvrWrapped { inner, filler }
}

impl Translation for FvrWrapped {
    fn name(&self) -> String {
        format!("fvr({})", self.inner.name())
    }

    fn source(&self) -> LangId {
        self.inner.source()
    }

    fn target(&self) -> LangId {
        self.inner.target()
    }

    fn translate(&self, term: &Term) -> Result<Term, TranslateError> {
        let translated = self.inner.translate(term)?;
        let allowed = term.free_vars();
        let stray: BTreeSet<VarName> = translated
            .free_vars()
            .difference(&allowed)
            .cloned()
            .collect();
        if stray.is_empty() {
            return Ok(translated);
        }
        let subst = Subst::from_pairs(
            stray
                .into_iter()
                .map(|v| (v, self.filler.clone())),
        );
        Ok(translated.apply_subst(&subst))
    }
}

/// Whether a translation introduces no new free variables on a sample of
/// terms.
pub fn is_fvr_on<'a>(
    t: &dyn Translation,
    terms: impl IntoIterator<Item = &'a Term>,
) -> Result<bool, TranslateError> {
    for term in terms {
        let translated = t.translate(term)?;
        if !translated
            .free_vars()
            .is_subset(&term.free_vars())
        {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Compositionalisation
// ---------------------------------------------------------------------------

pub type BaseFn = dyn Fn(&Term) -> Result<Term, TranslateError> + Send + Sync;

/// The compositional translation induced by an arbitrary term-level
/// function: variables map to themselves, and any other term is decomposed
/// into its canonical head `H` and substitution σ, translated as
/// `base(H)[induced ∘ σ]`.
pub struct Compositionalized {
    name: String,
    source: LangId,
    target: LangId,
    base: Box<BaseFn>,
}

pub fn compositionalize(
    name: impl Into<String>,
    source: LangId,
    target: LangId,
    base: Box<BaseFn>,
) -> Compositionalized {
    Compositionalized {
        name: name.into(),
        source,
        target,
        base,
    }
}

impl Translation for Compositionalized {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn source(&self) -> LangId {
        self.source
    }

    fn target(&self) -> LangId {
        self.target
    }

    fn translate(&self, term: &Term) -> Result<Term, TranslateError> {
        match term {
            Term::Var(x) => Ok(Term::Var(x.clone())),
            _ => {
                let (head, sigma) = term.head()?;
                let translated_head = (self.base)(&head)?;
                let mut subst = Subst::new();
                for (v, t) in sigma.iter() {
                    subst.insert(v.clone(), self.translate(t)?);
                }
                Ok(translated_head.apply_subst(&subst))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Deliberately defective translations, used by the verification harnesses
// and the test suite as mutation fixtures.
// ---------------------------------------------------------------------------

pub mod fixtures {
    use super::*;
    use crate::term::{ActName, Label};

    /// The encoding with a broken internal-choice clause that drops the
    /// right operand. Still compositional, no longer trace-correct.
    pub fn broken_int_choice(alphabet: TripledAlphabet) -> ContextTable {
        let ab = alphabet.clone();
        ContextTable::new(
            "encode-broken-intchoice",
            LangId::Csp,
            LangId::Ccs,
            Box::new(move |op, arity| match op {
                Op::IntChoice => Ok(Term::Var(hole(0))),
                _ => {
                    let applied = Term::Op(
                        op.clone(),
                        (0..arity).map(|i| Term::Var(hole(i))).collect(),
                    );
                    Ok(encode(&applied, &ab)?)
                }
            }),
            Box::new(|kind, vars, bodies| match kind {
                BinderKind::Mu => Ok(Term::fix(
                    &vars[0],
                    vec![(vars[0].clone(), bodies.into_iter().next().unwrap())],
                )),
                BinderKind::Fix => Err(TranslateError::Encode(EncodeError::NotCsp)),
            }),
        )
    }

    /// A CSP→CSP translation whose prefix clause grafts the operand into a
    /// recursion binding the operand's own first free variable, capturing
    /// it. Fails compositionality on any prefix over an open operand.
    pub struct Capturing;

    impl Translation for Capturing {
        fn name(&self) -> String {
            "capturing-prefix".to_string()
        }

        fn source(&self) -> LangId {
            LangId::Csp
        }

        fn target(&self) -> LangId {
            LangId::Csp
        }

        fn translate(&self, term: &Term) -> Result<Term, TranslateError> {
            match term {
                Term::Var(x) => Ok(Term::Var(x.clone())),
                Term::Op(Op::Arrow(a), args) => {
                    let body = self.translate(&args[0])?;
                    let var = body
                        .free_vars_ordered()
                        .first()
                        .cloned()
                        .unwrap_or_else(|| VarName::new("Z"));
                    Ok(Term::Binder(
                        BinderKind::Mu,
                        vec![var],
                        vec![Term::arrow(a.clone(), body)],
                    ))
                }
                Term::Op(op, args) => Ok(Term::Op(
                    op.clone(),
                    args.iter()
                        .map(|t| self.translate(t))
                        .collect::<Result<_, _>>()?,
                )),
                Term::Binder(kind, vars, bodies) => Ok(Term::Binder(
                    *kind,
                    vars.clone(),
                    bodies
                        .iter()
                        .map(|t| self.translate(t))
                        .collect::<Result<_, _>>()?,
                )),
            }
        }
    }

    /// A non-compositional but trace-correct base translation: one specific
    /// closed term is special-cased to a trace-equivalent variant, all other
    /// terms go through the encoding.
    pub fn special_cased_base(alphabet: TripledAlphabet) -> Box<BaseFn> {
        let special = Term::arrow(ActName::plain("b"), Term::stop());
        Box::new(move |t: &Term| {
            if t == &special {
                // τ-pad and duplicate: trace-equivalent to b.0.
                let b = Term::prefix_act(ActName::plain("b"), Term::nil());
                Ok(Term::choice(vec![
                    Term::prefix(Label::Tau, b.clone()),
                    b,
                ]))
            } else {
                Ok(encode(t, &alphabet)?)
            }
        })
    }
}
