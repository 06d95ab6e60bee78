//! CSP: concrete syntax, pretty-printer and the structural operational
//! semantics over closed terms.
//!
//! Grammar (precedence from loosest to tightest: `[]`/`|~|`, `[|A|]`,
//! concealment/renaming, prefix, atoms):
//!
//! ```text
//! P ::= "STOP" | "DIV" | name "->" P
//!     | P "[]" P | P "|~|" P | P "[|" "{" names "}" "|]" P
//!     | P "\" name | P "[[" renames "]]"
//!     | ident | "mu" ident "." P | "(" P ")"
//! name ::= [a-z][a-zA-Z0-9]*
//! ```
//!
//! `[]` and `|~|` have equal precedence and mixed, unparenthesised chains
//! are rejected. The body of `mu X . P` extends as far right as possible.
//! Communications are plain names: primed or barred actions are CCS-side
//! artefacts and do not occur in CSP terms.

use std::collections::BTreeSet;

use crate::lts::{Semantics, StepError};
use crate::parse::{ParseError, Scanner};
use crate::term::{ActName, BinderKind, Decoration, Label, LangId, Op, Renaming, Subst, Term, VarName};

/// Transitions of a closed CSP term, derived from the SOS rules.
pub fn csp_step(term: &Term) -> Result<BTreeSet<(Label, Term)>, StepError> {
    CspSemantics.step(term)
}

pub fn parse_csp(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser {
        s: Scanner::new(text),
    };
    let t = p.term()?;
    if !p.s.at_end() {
        return Err(p.s.error("unexpected trailing input"));
    }
    Ok(t)
}

/// Parses either a single CSP term or a definitions file with a `main`
/// entry (see [`crate::parse_definitions_file`]).
pub fn parse_csp_input(text: &str) -> Result<Term, ParseError> {
    crate::parse_definitions_file(text, parse_csp)
}

// ---------------------------------------------------------------------------
// Stepper
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Default)]
pub struct CspSemantics;

impl CspSemantics {
    fn derive(&self, term: &Term) -> Result<Vec<(Label, Term)>, StepError> {
        match term {
            Term::Var(x) => Err(StepError::OpenTerm(x.clone())),
            Term::Op(op, args) => match op {
                Op::Stop => Ok(vec![]),
                Op::Div => Ok(vec![(Label::Tau, Term::div())]),
                Op::Arrow(a) => Ok(vec![(Label::Act(a.clone()), args[0].clone())]),
                Op::IntChoice => Ok(vec![
                    (Label::Tau, args[0].clone()),
                    (Label::Tau, args[1].clone()),
                ]),
                Op::ExtChoice => {
                    let mut out = Vec::new();
                    for (l, t) in self.derive(&args[0])? {
                        match l {
                            // A τ-step does not resolve the choice.
                            Label::Tau => out.push((
                                Label::Tau,
                                Term::ext_choice(t, args[1].clone()),
                            )),
                            vis => out.push((vis, t)),
                        }
                    }
                    for (l, t) in self.derive(&args[1])? {
                        match l {
                            Label::Tau => out.push((
                                Label::Tau,
                                Term::ext_choice(args[0].clone(), t),
                            )),
                            vis => out.push((vis, t)),
                        }
                    }
                    Ok(out)
                }
                Op::Sync(set) => {
                    let left = self.derive(&args[0])?;
                    let right = self.derive(&args[1])?;
                    let mut out = Vec::new();
                    let in_set = |l: &Label| match l {
                        Label::Tau => false,
                        Label::Act(a) => set.contains(a),
                    };
                    for (l, t) in &left {
                        if !in_set(l) {
                            out.push((
                                l.clone(),
                                Term::sync(t.clone(), set.clone(), args[1].clone()),
                            ));
                        }
                    }
                    for (l, t) in &right {
                        if !in_set(l) {
                            out.push((
                                l.clone(),
                                Term::sync(args[0].clone(), set.clone(), t.clone()),
                            ));
                        }
                    }
                    for (ll, lt) in &left {
                        if in_set(ll) {
                            for (rl, rt) in &right {
                                if rl == ll {
                                    out.push((
                                        ll.clone(),
                                        Term::sync(lt.clone(), set.clone(), rt.clone()),
                                    ));
                                }
                            }
                        }
                    }
                    Ok(out)
                }
                Op::Conceal(b) => {
                    let mut out = Vec::new();
                    for (l, t) in self.derive(&args[0])? {
                        let label = match &l {
                            Label::Act(a) if a == b => Label::Tau,
                            other => other.clone(),
                        };
                        out.push((label, Term::conceal(t, b.clone())));
                    }
                    Ok(out)
                }
                Op::Rename(f) => {
                    let mut out = Vec::new();
                    for (l, t) in self.derive(&args[0])? {
                        out.push((f.apply(&l), Term::rename(t, f.clone())));
                    }
                    Ok(out)
                }
                _ => Err(StepError::WrongLanguage {
                    expected: LangId::Csp,
                    found: LangId::Ccs,
                }),
            },
            Term::Binder(BinderKind::Mu, vars, bodies) => {
                let unfolded = bodies[0].apply_subst(&Subst::singleton(
                    vars[0].clone(),
                    term.clone(),
                ));
                Ok(vec![(Label::Tau, unfolded)])
            }
            Term::Binder(BinderKind::Fix, _, _) => Err(StepError::WrongLanguage {
                expected: LangId::Csp,
                found: LangId::Ccs,
            }),
        }
    }
}

impl Semantics for CspSemantics {
    fn lang(&self) -> LangId {
        LangId::Csp
    }

    fn step(&self, term: &Term) -> Result<BTreeSet<(Label, Term)>, StepError> {
        Ok(crate::lts::dedup_alpha(self.derive(term)?))
    }

    fn print(&self, term: &Term) -> String {
        print_csp(term)
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser<'a> {
    s: Scanner<'a>,
}

impl<'a> Parser<'a> {
    fn comm(&mut self) -> Result<ActName, ParseError> {
        let a = self.s.act_name(false)?;
        if a.decoration != Decoration::Plain {
            return Err(self
                .s
                .error("primed names are not CSP communications"));
        }
        Ok(a)
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let mut t = self.par_level()?;
        let mut seen: Option<&'static str> = None;
        loop {
            let op = if self.s.eat("[]") {
                "[]"
            } else if self.s.eat("|~|") {
                "|~|"
            } else {
                return Ok(t);
            };
            if let Some(prev) = seen {
                if prev != op {
                    return Err(self.s.error(
                        "mixed `[]` and `|~|` at the same level; add parentheses",
                    ));
                }
            }
            seen = Some(op);
            let rhs = self.par_level()?;
            t = if op == "[]" {
                Term::ext_choice(t, rhs)
            } else {
                Term::int_choice(t, rhs)
            };
        }
    }

    fn par_level(&mut self) -> Result<Term, ParseError> {
        let mut t = self.hide_level()?;
        while self.s.eat("[|") {
            self.s.expect("{")?;
            let mut names = BTreeSet::new();
            if !self.s.eat("}") {
                loop {
                    names.insert(self.comm()?);
                    if self.s.eat(",") {
                        continue;
                    }
                    self.s.expect("}")?;
                    break;
                }
            }
            self.s.expect("|]")?;
            let rhs = self.hide_level()?;
            t = Term::sync(t, names, rhs);
        }
        Ok(t)
    }

    fn hide_level(&mut self) -> Result<Term, ParseError> {
        let mut t = self.prefix_level()?;
        loop {
            if self.s.eat("[[") {
                let mut pairs = Vec::new();
                loop {
                    let new = self.comm()?;
                    self.s.expect("/")?;
                    let old = self.comm()?;
                    pairs.push((old, new));
                    if self.s.eat(",") {
                        continue;
                    }
                    self.s.expect("]]")?;
                    break;
                }
                let f = Renaming::new(pairs).map_err(|e| self.s.error(e))?;
                t = Term::rename(t, f);
            } else if self.s.eat("\\") {
                let b = self.comm()?;
                t = Term::conceal(t, b);
            } else {
                return Ok(t);
            }
        }
    }

    fn prefix_level(&mut self) -> Result<Term, ParseError> {
        if self.s.eat("mu") {
            let v = VarName::new(self.s.ident()?);
            self.s.expect(".")?;
            let body = self.term()?;
            return Ok(Term::mu(v, body));
        }
        if self.s.peek_act_start(false) {
            let a = self.comm()?;
            self.s.expect("->")?;
            return Ok(Term::arrow(a, self.prefix_level()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        if self.s.eat("STOP") {
            return Ok(Term::stop());
        }
        if self.s.eat("DIV") {
            return Ok(Term::div());
        }
        if self.s.eat("(") {
            let t = self.term()?;
            self.s.expect(")")?;
            return Ok(t);
        }
        if self.s.peek_ident() {
            return Ok(Term::Var(VarName::new(self.s.ident()?)));
        }
        self.s.skip_ws();
        Err(self.s.error(match self.s.peek() {
            Some(c) => format!("expected a CSP term, found `{c}`"),
            None => "expected a CSP term, found end of input".to_string(),
        }))
    }
}

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

/// Pretty-prints a CSP term with minimal parentheses;
/// `parse_csp(print_csp(t))` is α-equivalent to `t`.
pub fn print_csp(term: &Term) -> String {
    let mut out = String::new();
    print_at(term, 0, &mut out);
    out
}

// Precedence levels: 0 choice (and mu, whose body is maximal), 1 parallel,
// 2 concealment/renaming, 3 prefix, 4 atom.
fn level(term: &Term) -> u8 {
    match term {
        Term::Var(_) => 4,
        Term::Binder(BinderKind::Mu, _, _) => 0,
        Term::Binder(BinderKind::Fix, _, _) => panic!("print_csp: CCS recursion in a CSP term"),
        Term::Op(op, _) => match op {
            Op::Stop | Op::Div => 4,
            Op::Arrow(_) => 3,
            Op::Conceal(_) | Op::Rename(_) => 2,
            Op::Sync(_) => 1,
            Op::ExtChoice | Op::IntChoice => 0,
            other => panic!("print_csp: not a CSP construct: {other:?}"),
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
        Term::Binder(BinderKind::Mu, vars, bodies) => {
            out.push_str("mu ");
            out.push_str(vars[0].id());
            out.push_str(" . ");
            print_at(&bodies[0], 0, out);
        }
        Term::Binder(BinderKind::Fix, _, _) => unreachable!(),
        Term::Op(op, args) => match op {
            Op::Stop => out.push_str("STOP"),
            Op::Div => out.push_str("DIV"),
            Op::Arrow(a) => {
                out.push_str(&a.to_string());
                out.push_str(" -> ");
                print_at(&args[0], 3, out);
            }
            Op::Conceal(b) => {
                print_at(&args[0], 2, out);
                out.push_str(" \\ ");
                out.push_str(&b.to_string());
            }
            Op::Rename(f) => {
                print_at(&args[0], 2, out);
                out.push_str("[[");
                for (i, (old, new)) in f.pairs().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    out.push_str(&format!("{new}/{old}"));
                }
                out.push_str("]]");
            }
            Op::Sync(set) => {
                print_at(&args[0], 1, out);
                out.push_str(" [|{");
                for (i, n) in set.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    out.push_str(&n.to_string());
                }
                out.push_str("}|] ");
                print_at(&args[1], 2, out);
            }
            Op::ExtChoice | Op::IntChoice => {
                let same_kind = |t: &Term| {
                    matches!(t, Term::Op(o, _) if o == op)
                };
                if same_kind(&args[0]) {
                    print_at(&args[0], 0, out);
                } else {
                    print_at(&args[0], 1, out);
                }
                out.push_str(if *op == Op::ExtChoice { " [] " } else { " |~| " });
                print_at(&args[1], 1, out);
            }
            other => panic!("print_csp: not a CSP construct: {other:?}"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_set(src: &str) -> BTreeSet<(Label, Term)> {
        csp_step(&parse_csp(src).unwrap()).unwrap()
    }

    fn expect_transitions(src: &str, expected: &[(&str, &str)]) {
        let got: BTreeSet<(Label, Term)> = step_set(src)
            .into_iter()
            .map(|(l, t)| (l, t.canon()))
            .collect();
        let want: BTreeSet<(Label, Term)> = expected
            .iter()
            .map(|(l, t)| {
                let label = if *l == "tau" {
                    Label::Tau
                } else {
                    Label::Act(ActName::plain(*l))
                };
                (label, parse_csp(t).unwrap().canon())
            })
            .collect();
        assert_eq!(got, want, "transitions of {src}");
    }

    #[test]
    fn parse_external_choice_of_prefixes() {
        let t = parse_csp("(b -> STOP) [] (b -> (c -> STOP))").unwrap();
        let b = ActName::plain("b");
        let c = ActName::plain("c");
        let expected = Term::ext_choice(
            Term::arrow(b.clone(), Term::stop()),
            Term::arrow(b, Term::arrow(c, Term::stop())),
        );
        assert_eq!(t, expected);
    }

    #[test]
    fn parse_constants_and_recursion() {
        assert_eq!(parse_csp("DIV").unwrap(), Term::div());
        let t = parse_csp("mu X . (a -> X)").unwrap();
        let x = VarName::new("X");
        assert_eq!(
            t,
            Term::mu(x.clone(), Term::arrow(ActName::plain("a"), Term::Var(x)))
        );
    }

    #[test]
    fn parse_rejects_mixed_choice_without_parens() {
        assert!(parse_csp("STOP [] STOP |~| STOP").is_err());
        assert!(parse_csp("(STOP [] STOP) |~| STOP").is_ok());
    }

    #[test]
    fn parse_rejects_primed_communications() {
        assert!(parse_csp("a' -> STOP").is_err());
    }

    #[test]
    fn parse_precedence_prefix_then_conceal() {
        // prefix binds tightest, so concealment applies to the whole prefix.
        let t = parse_csp("a -> STOP \\ b").unwrap();
        assert!(matches!(&t, Term::Op(Op::Conceal(_), _)));
        let u = parse_csp("a -> (STOP \\ b)").unwrap();
        assert!(matches!(&u, Term::Op(Op::Arrow(_), _)));
    }

    #[test]
    fn mu_body_is_maximal() {
        let t = parse_csp("mu X . a -> X [] STOP").unwrap();
        let Term::Binder(BinderKind::Mu, _, bodies) = &t else {
            panic!("expected mu at top level");
        };
        assert!(matches!(&bodies[0], Term::Op(Op::ExtChoice, _)));
    }

    #[test]
    fn step_div_loops() {
        expect_transitions("DIV", &[("tau", "DIV")]);
    }

    #[test]
    fn step_internal_choice_two_taus() {
        expect_transitions(
            "(a -> STOP) |~| (b -> STOP)",
            &[("tau", "a -> STOP"), ("tau", "b -> STOP")],
        );
    }

    #[test]
    fn step_external_choice_preserves_tau_context() {
        expect_transitions(
            "DIV [] (b -> STOP)",
            &[("tau", "DIV [] (b -> STOP)"), ("b", "STOP")],
        );
    }

    #[test]
    fn step_synchronisation() {
        expect_transitions(
            "(a -> STOP) [|{a}|] (a -> STOP)",
            &[("a", "STOP [|{a}|] STOP")],
        );
    }

    #[test]
    fn step_interleaving_outside_sync_set() {
        expect_transitions(
            "(a -> STOP) [|{b}|] (c -> STOP)",
            &[
                ("a", "STOP [|{b}|] (c -> STOP)"),
                ("c", "(a -> STOP) [|{b}|] STOP"),
            ],
        );
    }

    #[test]
    fn step_mu_unfolds_by_tau() {
        expect_transitions("mu X . (a -> X)", &[("tau", "a -> (mu X . (a -> X))")]);
    }

    #[test]
    fn step_concealment() {
        expect_transitions("(a -> STOP) \\ a", &[("tau", "STOP \\ a")]);
        expect_transitions("(a -> STOP) \\ b", &[("a", "STOP \\ b")]);
    }

    #[test]
    fn step_renaming_fixes_tau() {
        expect_transitions("(a -> DIV)[[b/a]]", &[("b", "DIV[[b/a]]")]);
        expect_transitions("DIV[[b/a]]", &[("tau", "DIV[[b/a]]")]);
    }

    #[test]
    fn print_examples() {
        assert_eq!(print_csp(&Term::stop()), "STOP");
        let t = parse_csp("(a -> STOP) [|{a}|] (a -> STOP)").unwrap();
        assert_eq!(print_csp(&t), "a -> STOP [|{a}|] a -> STOP");
        assert!(parse_csp(&print_csp(&t)).unwrap().alpha_eq(&t));
        let t = parse_csp("(STOP [] STOP) |~| STOP").unwrap();
        assert_eq!(print_csp(&t), "(STOP [] STOP) |~| STOP");
    }

    #[test]
    fn file_input_with_definitions() {
        let text = "# two processes\nP = a -> STOP\nmain = P [] (b -> P)\n";
        let t = parse_csp_input(text).unwrap();
        let expected = parse_csp("(a -> STOP) [] (b -> (a -> STOP))").unwrap();
        assert!(t.alpha_eq(&expected));
    }

    #[test]
    fn stepping_a_ccs_term_is_a_language_error() {
        assert!(matches!(
            csp_step(&Term::nil()),
            Err(StepError::WrongLanguage { .. })
        ));
    }
}
