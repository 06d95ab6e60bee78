//! A workbench for comparing process calculi: labelled transition systems
//! derived from the structural operational semantics of CCS and CSP, a
//! trace-correct CSP→CCS encoding, equivalence checkers, and corpus-scale
//! verification of translation-correctness notions.

pub mod ccs;
pub mod corpus;
pub mod csp;
pub mod dfa;
pub mod encode;
pub mod equiv;
pub mod lts;
pub mod oracle;
pub mod parse;
pub mod term;
pub mod translate;
pub mod verify;

pub use term::{ActName, Label, LangId, Subst, Term, VarName};

use parse::ParseError;

/// Parses process text that is either a single term or a definitions file:
/// one `Name = term` definition per line plus a distinguished `main`.
/// Later definitions (and `main`) may refer to earlier names, which are
/// substituted in; the expanded `main` term is returned. A file is treated
/// as a definitions file iff some line starts with `main =`.
pub fn parse_definitions_file(
    text: &str,
    parse_term: impl Fn(&str) -> Result<Term, ParseError>,
) -> Result<Term, ParseError> {
    let is_definitions = text.lines().any(|line| {
        let t = line.trim_start();
        t.strip_prefix("main")
            .map(|rest| rest.trim_start().starts_with('='))
            .unwrap_or(false)
    });
    if !is_definitions {
        return parse_term(text);
    }

    let mut env = Subst::new();
    let mut main: Option<Term> = None;
    for (no, line) in text.lines().enumerate() {
        let at = |col: usize, msg: String| ParseError {
            line: no + 1,
            col,
            msg,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let eq = line
            .find('=')
            .ok_or_else(|| at(1, "expected `name = term`".to_string()))?;
        let name = line[..eq].trim();
        let rhs = &line[eq + 1..];
        let term = parse_term(rhs).map_err(|e| ParseError {
            line: no + 1,
            col: e.col + eq + 1,
            msg: e.msg,
        })?;
        let expanded = term.apply_subst(&env);
        if name == "main" {
            if main.is_some() {
                return Err(at(1, "duplicate `main` definition".to_string()));
            }
            main = Some(expanded);
        } else {
            if name.is_empty() || !name.chars().next().unwrap().is_ascii_uppercase() {
                return Err(at(
                    1,
                    format!("definition name `{name}` must start with an uppercase letter"),
                ));
            }
            if !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(at(1, format!("invalid definition name `{name}`")));
            }
            let var = VarName::new(name);
            if env.get(&var).is_some() {
                return Err(at(1, format!("duplicate definition of `{name}`")));
            }
            env.insert(var, expanded);
        }
    }
    main.ok_or_else(|| ParseError {
        line: 1,
        col: 1,
        msg: "definitions file has no `main`".to_string(),
    })
}
