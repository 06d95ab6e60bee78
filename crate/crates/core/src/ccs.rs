//! CCS: concrete syntax, pretty-printer and the structural operational
//! semantics over closed terms.
//!
//! Grammar (precedence from loosest to tightest: `+`, `|`, prefix,
//! restriction/relabelling, atoms):
//!
//! ```text
//! P ::= "0" | act "." P | P "+" P | P "|" P
//!     | P "\" "{" names "}" | P "[" renames "]"
//!     | ident | "fix" ident "{" ident "=" P ("," ident "=" P)* "}"
//!     | "(" P ")"
//! act ::= "tau" | name | "'" name
//! name ::= [a-z][a-zA-Z0-9]* ("'" | "''")?
//! ```
//!
//! Unparenthesised `+`-chains are a single n-ary choice; parentheses keep
//! nested sums distinct. Conames are written with a leading apostrophe,
//! relabellings as `[new/old, ...]` and are bar-closed by construction.

use std::collections::BTreeSet;

use crate::lts::{Semantics, StepError};
use crate::parse::{ParseError, Scanner};
use crate::term::{BinderKind, Label, LangId, Op, Relabelling, Term, VarName};

/// Transitions of a closed CCS term, derived from the SOS rules. Successor
/// terms are deduplicated up to α-equivalence.
pub fn ccs_step(term: &Term) -> Result<BTreeSet<(Label, Term)>, StepError> {
    CcsSemantics::default().step(term)
}

pub fn parse_ccs(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser {
        s: Scanner::new(text),
    };
    let t = p.term()?;
    if !p.s.at_end() {
        return Err(p.s.error("unexpected trailing input"));
    }
    Ok(t)
}

/// Parses either a single CCS term or a definitions file with a `main`
/// entry (see [`crate::parse_definitions_file`]).
pub fn parse_ccs_input(text: &str) -> Result<Term, ParseError> {
    crate::parse_definitions_file(text, parse_ccs)
}

// ---------------------------------------------------------------------------
// Stepper
// ---------------------------------------------------------------------------

/// One node of a transition-proof tree: an instance of a named SOS rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proof {
    pub rule: &'static str,
    pub source: Term,
    pub label: Label,
    pub target: Term,
    pub premises: Vec<Proof>,
}

impl Proof {
    fn leaf(rule: &'static str, source: Term, label: Label, target: Term) -> Proof {
        Proof {
            rule,
            source,
            label,
            target,
            premises: Vec::new(),
        }
    }

    /// Renders the proof as an indented tree, premises first.
    pub fn render(&self) -> String {
        fn walk(p: &Proof, depth: usize, out: &mut String) {
            for q in &p.premises {
                walk(q, depth + 1, out);
            }
            out.push_str(&"  ".repeat(depth));
            out.push_str(&format!(
                "[{}] {} --{}--> {}\n",
                p.rule,
                print_ccs(&p.source),
                p.label,
                print_ccs(&p.target)
            ));
        }
        let mut out = String::new();
        walk(self, 0, &mut out);
        out
    }
}

/// The CCS stepper. `max_unfold` bounds how many recursion unfoldings a
/// single step derivation may pass through; exceeding it signals unguarded
/// recursion such as `fix X {X = X}`, whose transition search would not
/// terminate.
#[derive(Debug, Clone, Copy)]
pub struct CcsSemantics {
    pub max_unfold: usize,
}

impl Default for CcsSemantics {
    fn default() -> Self {
        CcsSemantics { max_unfold: 64 }
    }
}

impl CcsSemantics {
    /// Transitions together with their derivation trees.
    pub fn step_proofs(&self, term: &Term) -> Result<Vec<(Label, Term, Proof)>, StepError> {
        self.derive(term, 0)
    }

    fn derive(&self, term: &Term, depth: usize) -> Result<Vec<(Label, Term, Proof)>, StepError> {
        match term {
            Term::Var(x) => Err(StepError::OpenTerm(x.clone())),
            Term::Op(op, args) => match op {
                Op::Prefix(alpha) => {
                    let target = args[0].clone();
                    Ok(vec![(
                        alpha.clone(),
                        target.clone(),
                        Proof::leaf("Act", term.clone(), alpha.clone(), target),
                    )])
                }
                Op::Choice => {
                    let mut out = Vec::new();
                    for arg in args {
                        for (l, t, p) in self.derive(arg, depth)? {
                            out.push((
                                l.clone(),
                                t.clone(),
                                Proof {
                                    rule: "Sum",
                                    source: term.clone(),
                                    label: l,
                                    target: t,
                                    premises: vec![p],
                                },
                            ));
                        }
                    }
                    Ok(out)
                }
                Op::Par => {
                    let left = self.derive(&args[0], depth)?;
                    let right = self.derive(&args[1], depth)?;
                    let mut out = Vec::new();
                    for (l, t, p) in &left {
                        let target = Term::par(t.clone(), args[1].clone());
                        out.push((
                            l.clone(),
                            target.clone(),
                            Proof {
                                rule: "ParL",
                                source: term.clone(),
                                label: l.clone(),
                                target,
                                premises: vec![p.clone()],
                            },
                        ));
                    }
                    for (l, t, p) in &right {
                        let target = Term::par(args[0].clone(), t.clone());
                        out.push((
                            l.clone(),
                            target.clone(),
                            Proof {
                                rule: "ParR",
                                source: term.clone(),
                                label: l.clone(),
                                target,
                                premises: vec![p.clone()],
                            },
                        ));
                    }
                    for (ll, lt, lp) in &left {
                        if let Label::Act(a) = ll {
                            for (rl, rt, rp) in &right {
                                if rl == &Label::Act(a.bar()) {
                                    let target = Term::par(lt.clone(), rt.clone());
                                    out.push((
                                        Label::Tau,
                                        target.clone(),
                                        Proof {
                                            rule: "Comm",
                                            source: term.clone(),
                                            label: Label::Tau,
                                            target,
                                            premises: vec![lp.clone(), rp.clone()],
                                        },
                                    ));
                                }
                            }
                        }
                    }
                    Ok(out)
                }
                Op::Restrict(set) => {
                    let mut out = Vec::new();
                    for (l, t, p) in self.derive(&args[0], depth)? {
                        let blocked = match &l {
                            Label::Tau => false,
                            Label::Act(a) => set.contains(&a.unbarred()),
                        };
                        if blocked {
                            continue;
                        }
                        let target = Term::restrict(t, set.clone());
                        out.push((
                            l.clone(),
                            target.clone(),
                            Proof {
                                rule: "Res",
                                source: term.clone(),
                                label: l,
                                target,
                                premises: vec![p],
                            },
                        ));
                    }
                    Ok(out)
                }
                Op::Relabel(f) => {
                    let mut out = Vec::new();
                    for (l, t, p) in self.derive(&args[0], depth)? {
                        let label = f.apply(&l);
                        let target = Term::relabel(t, f.clone());
                        out.push((
                            label.clone(),
                            target.clone(),
                            Proof {
                                rule: "Rel",
                                source: term.clone(),
                                label,
                                target,
                                premises: vec![p],
                            },
                        ));
                    }
                    Ok(out)
                }
                _ => Err(StepError::WrongLanguage {
                    expected: LangId::Ccs,
                    found: LangId::Csp,
                }),
            },
            Term::Binder(BinderKind::Fix, vars, bodies) => {
                if depth >= self.max_unfold {
                    return Err(StepError::UnguardedRecursion { depth });
                }
                let eqns: Vec<(VarName, Term)> =
                    vars.iter().cloned().zip(bodies.iter().cloned()).collect();
                let mut subst = crate::term::Subst::new();
                for v in vars {
                    subst.insert(v.clone(), Term::fix(v, eqns.clone()));
                }
                let unfolded = bodies[0].apply_subst(&subst);
                let mut out = Vec::new();
                for (l, t, p) in self.derive(&unfolded, depth + 1)? {
                    out.push((
                        l.clone(),
                        t.clone(),
                        Proof {
                            rule: "Rec",
                            source: term.clone(),
                            label: l,
                            target: t,
                            premises: vec![p],
                        },
                    ));
                }
                Ok(out)
            }
            Term::Binder(BinderKind::Mu, _, _) => Err(StepError::WrongLanguage {
                expected: LangId::Ccs,
                found: LangId::Csp,
            }),
        }
    }
}

impl Semantics for CcsSemantics {
    fn lang(&self) -> LangId {
        LangId::Ccs
    }

    fn step(&self, term: &Term) -> Result<BTreeSet<(Label, Term)>, StepError> {
        let proofs = self.step_proofs(term)?;
        Ok(crate::lts::dedup_alpha(
            proofs.into_iter().map(|(l, t, _)| (l, t)),
        ))
    }

    fn print(&self, term: &Term) -> String {
        print_ccs(term)
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser<'a> {
    s: Scanner<'a>,
}

impl<'a> Parser<'a> {
    fn term(&mut self) -> Result<Term, ParseError> {
        // Unparenthesised chains of `+` form one n-ary choice.
        let first = self.par()?;
        let mut summands = vec![first];
        while self.s.eat("+") {
            summands.push(self.par()?);
        }
        Ok(Term::choice(summands))
    }

    fn par(&mut self) -> Result<Term, ParseError> {
        let mut t = self.prefix()?;
        while self.s.eat("|") {
            let rhs = self.prefix()?;
            t = Term::par(t, rhs);
        }
        Ok(t)
    }

    fn prefix(&mut self) -> Result<Term, ParseError> {
        if self.s.eat("tau") {
            self.s.expect(".")?;
            return Ok(Term::prefix(Label::Tau, self.prefix()?));
        }
        if self.s.peek_act_start(true) && !self.s.peek_keyword("fix") {
            let a = self.s.act_name(true)?;
            self.s.expect(".")?;
            return Ok(Term::prefix_act(a, self.prefix()?));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Term, ParseError> {
        let mut t = self.atom()?;
        loop {
            if self.s.eat("\\") {
                self.s.expect("{")?;
                let mut names = BTreeSet::new();
                if !self.s.eat("}") {
                    loop {
                        let n = self.s.act_name(false)?;
                        names.insert(n);
                        if self.s.eat(",") {
                            continue;
                        }
                        self.s.expect("}")?;
                        break;
                    }
                }
                t = Term::restrict(t, names);
            } else if self.s.eat("[") {
                let mut pairs = Vec::new();
                if !self.s.eat("]") {
                    loop {
                        let new = self.s.act_name(false)?;
                        self.s.expect("/")?;
                        let old = self.s.act_name(false)?;
                        pairs.push((old, new));
                        if self.s.eat(",") {
                            continue;
                        }
                        self.s.expect("]")?;
                        break;
                    }
                }
                let f = Relabelling::new(pairs).map_err(|e| self.s.error(e))?;
                t = Term::relabel(t, f);
            } else {
                return Ok(t);
            }
        }
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        if self.s.eat("0") {
            return Ok(Term::nil());
        }
        if self.s.eat("(") {
            let t = self.term()?;
            self.s.expect(")")?;
            return Ok(t);
        }
        if self.s.eat("fix") {
            let main = VarName::new(self.s.ident()?);
            self.s.expect("{")?;
            let mut eqns = Vec::new();
            loop {
                let v = VarName::new(self.s.ident()?);
                self.s.expect("=")?;
                let body = self.term()?;
                if eqns.iter().any(|(w, _)| *w == v) {
                    return Err(self.s.error(format!("duplicate recursion variable {v}")));
                }
                eqns.push((v, body));
                if self.s.eat(",") {
                    continue;
                }
                self.s.expect("}")?;
                break;
            }
            if !eqns.iter().any(|(w, _)| *w == main) {
                return Err(self
                    .s
                    .error(format!("main recursion variable {main} has no equation")));
            }
            return Ok(Term::fix(&main, eqns));
        }
        if self.s.peek_ident() {
            return Ok(Term::Var(VarName::new(self.s.ident()?)));
        }
        self.s.skip_ws();
        Err(self.s.error(match self.s.peek() {
            Some(c) => format!("expected a CCS term, found `{c}`"),
            None => "expected a CCS term, found end of input".to_string(),
        }))
    }
}

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

/// Pretty-prints a CCS term with minimal parentheses;
/// `parse_ccs(print_ccs(t))` is α-equivalent to `t`.
pub fn print_ccs(term: &Term) -> String {
    let mut out = String::new();
    print_at(term, 0, &mut out);
    out
}

// Precedence levels: 0 choice, 1 parallel, 2 prefix, 3 postfix, 4 atom.
fn level(term: &Term) -> u8 {
    match term {
        Term::Var(_) | Term::Binder(_, _, _) => 4,
        Term::Op(op, args) => match op {
            Op::Choice if args.is_empty() => 4,
            Op::Choice => 0,
            Op::Par => 1,
            Op::Prefix(_) => 2,
            Op::Restrict(_) | Op::Relabel(_) => 3,
            _ => panic!("print_ccs: not a CCS construct: {op:?}"),
        },
    }
}

fn print_at(term: &Term, min: u8, out: &mut String) {
    if level(term) < min {
        out.push('(');
        print_at(term, 0, out);
        out.push(')');
        return;
    }
    match term {
        Term::Var(x) => out.push_str(x.id()),
        Term::Binder(BinderKind::Fix, vars, bodies) => {
            out.push_str("fix ");
            out.push_str(vars[0].id());
            out.push_str(" {");
            for (i, (v, b)) in vars.iter().zip(bodies).enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(v.id());
                out.push_str(" = ");
                print_at(b, 0, out);
            }
            out.push('}');
        }
        Term::Binder(BinderKind::Mu, _, _) => panic!("print_ccs: CSP recursion in a CCS term"),
        Term::Op(op, args) => match op {
            Op::Choice if args.is_empty() => out.push('0'),
            Op::Choice => {
                debug_assert!(args.len() >= 2, "singleton choice is not printable");
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(" + ");
                    }
                    print_at(a, 1, out);
                }
            }
            Op::Par => {
                print_at(&args[0], 1, out);
                out.push_str(" | ");
                print_at(&args[1], 2, out);
            }
            Op::Prefix(l) => {
                out.push_str(&l.to_string());
                out.push('.');
                print_at(&args[0], 2, out);
            }
            Op::Restrict(set) => {
                print_at(&args[0], 3, out);
                out.push_str("\\{");
                for (i, n) in set.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    out.push_str(&n.to_string());
                }
                out.push('}');
            }
            Op::Relabel(f) => {
                print_at(&args[0], 3, out);
                out.push('[');
                for (i, (old, new)) in f.pairs().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    out.push_str(&format!("{new}/{old}"));
                }
                out.push(']');
            }
            _ => panic!("print_ccs: not a CCS construct: {op:?}"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{ActName, Subst};

    fn step_set(src: &str) -> BTreeSet<(Label, Term)> {
        ccs_step(&parse_ccs(src).unwrap()).unwrap()
    }

    fn expect_transitions(src: &str, expected: &[(&str, &str)]) {
        let got = step_set(src);
        let want: BTreeSet<(Label, Term)> = expected
            .iter()
            .map(|(l, t)| {
                let label = if *l == "tau" {
                    Label::Tau
                } else {
                    let mut s = Scanner::new(l);
                    Label::Act(s.act_name(true).unwrap())
                };
                (label, parse_ccs(t).unwrap().canon())
            })
            .collect();
        let got_canon: BTreeSet<(Label, Term)> =
            got.into_iter().map(|(l, t)| (l, t.canon())).collect();
        assert_eq!(got_canon, want, "transitions of {src}");
    }

    #[test]
    fn parse_choice_of_prefix_chains() {
        let t = parse_ccs("b.0 + b.c.0").unwrap();
        let b = ActName::plain("b");
        let c = ActName::plain("c");
        let expected = Term::choice(vec![
            Term::prefix_act(b.clone(), Term::nil()),
            Term::prefix_act(b, Term::prefix_act(c, Term::nil())),
        ]);
        assert_eq!(t, expected);
    }

    #[test]
    fn parse_zero_is_empty_choice() {
        assert_eq!(parse_ccs("0").unwrap(), Term::Op(Op::Choice, vec![]));
    }

    #[test]
    fn parse_recursion_with_coname_prefix() {
        let t = parse_ccs("fix X {X = 'b.X}").unwrap();
        let x = VarName::new("X");
        let expected = Term::fix(
            &x,
            vec![(
                x.clone(),
                Term::prefix_act(ActName::plain("b").bar(), Term::Var(x.clone())),
            )],
        );
        assert_eq!(t, expected);
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = parse_ccs("a.").unwrap_err();
        assert_eq!((err.line, err.col), (1, 3));
        assert!(parse_ccs("a.0 +").is_err());
        assert!(parse_ccs("(a.0").is_err());
    }

    #[test]
    fn parse_rejects_duplicate_relabel_source() {
        assert!(parse_ccs("a.0[b/a, c/a]").is_err());
    }

    #[test]
    fn parse_flattens_sum_chains_but_keeps_parens() {
        let flat = parse_ccs("a.0 + b.0 + c.0").unwrap();
        assert!(matches!(&flat, Term::Op(Op::Choice, args) if args.len() == 3));
        let nested = parse_ccs("(a.0 + b.0) + c.0").unwrap();
        assert!(matches!(&nested, Term::Op(Op::Choice, args) if args.len() == 2));
    }

    #[test]
    fn restriction_binds_tighter_than_prefix() {
        let t = parse_ccs("a.0\\{a}").unwrap();
        // a.(0\{a}) still performs a.
        let steps = ccs_step(&t).unwrap();
        assert_eq!(steps.len(), 1);
    }

    #[test]
    fn step_parallel_handshake() {
        expect_transitions(
            "a.0 | 'a.0",
            &[
                ("a", "0 | 'a.0"),
                ("'a", "a.0 | 0"),
                ("tau", "0 | 0"),
            ],
        );
    }

    #[test]
    fn step_restriction_blocks_name_and_coname() {
        expect_transitions("(a.0)\\{a}", &[]);
        expect_transitions("('a.0)\\{a}", &[]);
        expect_transitions("(tau.0)\\{a}", &[("tau", "0\\{a}")]);
    }

    #[test]
    fn step_recursion_unfolds() {
        expect_transitions("fix X {X = a.X}", &[("a", "fix X {X = a.X}")]);
    }

    #[test]
    fn step_mutual_recursion() {
        expect_transitions(
            "fix X {X = a.Y, Y = b.X}",
            &[("a", "fix Y {Y = b.X, X = a.Y}")],
        );
    }

    #[test]
    fn unguarded_recursion_is_reported() {
        let t = parse_ccs("fix X {X = X}").unwrap();
        assert!(matches!(
            ccs_step(&t),
            Err(StepError::UnguardedRecursion { .. })
        ));
        let t = parse_ccs("fix X {X = 0 + X}").unwrap();
        assert!(matches!(
            ccs_step(&t),
            Err(StepError::UnguardedRecursion { .. })
        ));
    }

    #[test]
    fn step_relabelling_follows_bar_closure() {
        expect_transitions("('a.0)[b/a]", &[("'b", "0[b/a]")]);
    }

    #[test]
    fn steps_are_alpha_deduplicated() {
        // Both summands step to α-equivalent recursions.
        let t = parse_ccs("fix X {X = a.X} + fix Y {Y = a.Y}").unwrap();
        assert_eq!(ccs_step(&t).unwrap().len(), 1);
    }

    #[test]
    fn proof_trees_reconstruct_transitions() {
        let sem = CcsSemantics::default();
        let t = parse_ccs("a.0 | 'a.0").unwrap();
        let proofs = sem.step_proofs(&t).unwrap();
        assert_eq!(proofs.len(), 3);
        for (l, target, proof) in &proofs {
            assert_eq!(&proof.source, &t);
            assert_eq!(&proof.label, l);
            assert_eq!(&proof.target, target);
        }
        let comm = proofs
            .iter()
            .find(|(l, _, _)| l.is_tau())
            .map(|(_, _, p)| p)
            .unwrap();
        assert_eq!(comm.rule, "Comm");
        assert_eq!(comm.premises.len(), 2);
        assert_eq!(comm.premises[0].rule, "Act");
        assert!(!comm.render().is_empty());
    }

    #[test]
    fn proof_of_recursion_carries_unfolding_premise() {
        let sem = CcsSemantics::default();
        let t = parse_ccs("fix X {X = a.X}").unwrap();
        let proofs = sem.step_proofs(&t).unwrap();
        assert_eq!(proofs.len(), 1);
        assert_eq!(proofs[0].2.rule, "Rec");
        assert_eq!(proofs[0].2.premises[0].rule, "Act");
    }

    #[test]
    fn print_examples() {
        assert_eq!(print_ccs(&Term::nil()), "0");
        let t = parse_ccs("b.c.0").unwrap();
        assert_eq!(print_ccs(&t), "b.c.0");
        let t = parse_ccs("(a.0 + b.0) | c.0\\{d}").unwrap();
        assert_eq!(print_ccs(&t), "(a.0 + b.0) | c.0\\{d}");
    }

    #[test]
    fn print_right_nested_parallel_keeps_parens() {
        let t = Term::par(
            Term::prefix_act(ActName::plain("a"), Term::nil()),
            Term::par(
                Term::prefix_act(ActName::plain("b"), Term::nil()),
                Term::nil(),
            ),
        );
        let printed = print_ccs(&t);
        assert_eq!(printed, "a.0 | (b.0 | 0)");
        assert!(parse_ccs(&printed).unwrap().alpha_eq(&t));
    }

    #[test]
    fn file_input_with_definitions() {
        let text = "P = a.0\nQ = P | 'a.0\nmain = Q + b.0\n";
        let t = parse_ccs_input(text).unwrap();
        let expected = parse_ccs("(a.0 | 'a.0) + b.0").unwrap();
        assert!(t.alpha_eq(&expected));
    }

    #[test]
    fn stepping_a_csp_term_is_a_language_error() {
        let t = Term::stop();
        assert!(matches!(
            ccs_step(&t),
            Err(StepError::WrongLanguage { .. })
        ));
    }

    #[test]
    fn step_substituted_choice_example() {
        // (X + a.0)[X ↦ tau.b.0] steps by both summands.
        let open = Term::choice(vec![
            Term::Var(VarName::new("X")),
            parse_ccs("a.0").unwrap(),
        ]);
        let closed = open.apply_subst(&Subst::singleton(
            VarName::new("X"),
            parse_ccs("tau.b.0").unwrap(),
        ));
        expect_transitions(&print_ccs(&closed), &[("tau", "b.0"), ("a", "0")]);
    }
}
