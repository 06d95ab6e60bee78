//! Corpus-scale checking of translation-correctness notions: respect for a
//! relation on closed terms, correctness under equivalent valuations,
//! compositionality, validity, congruence sampling, refinement-hierarchy
//! harnesses, and the parallel-composition separation fixture.
//!
//! Every universally quantified notion is checked on seeded finite samples;
//! reports carry the sample sizes and never claim more than was checked.

use rand::Rng;
use rayon::prelude::*;

use crate::ccs::parse_ccs;
use crate::corpus::{self, Corpus, GenParams};
use crate::csp::parse_csp;
use crate::dfa::TraceDfa;
use crate::encode::{encode, TripledAlphabet};
use crate::equiv::{check_relation, RelationId};
use crate::lts::{deadlocks, diverges, explore, semantics_for, ProcessGraph, Semantics};
use crate::term::{ActName, LangId, Subst, Term, VarName};
use crate::translate::Translation;

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail(String),
    Skip(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckEntry {
    pub index: usize,
    pub subject: String,
    pub relation: Option<RelationId>,
    /// (source states, target states) where applicable.
    pub states: Option<(usize, usize)>,
    pub outcome: Outcome,
}

impl CheckEntry {
    fn render(&self) -> String {
        let outcome = match &self.outcome {
            Outcome::Pass => "pass".to_string(),
            Outcome::Fail(why) => format!("fail\t{why}"),
            Outcome::Skip(why) => format!("skip\t{why}"),
        };
        let relation = self
            .relation
            .map(|r| r.to_string())
            .unwrap_or_else(|| "-".to_string());
        let states = self
            .states
            .map(|(a, b)| format!("states={a}/{b}"))
            .unwrap_or_else(|| "-".to_string());
        format!(
            "{}\t{}\t{}\t{}\t{}",
            self.index, relation, states, outcome, self.subject
        )
    }
}

/// A line-oriented, byte-deterministic check report: one record per sample
/// plus a counted summary. Timing is deliberately not part of the report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub title: String,
    pub notes: Vec<String>,
    pub entries: Vec<CheckEntry>,
}

impl Report {
    pub fn counts(&self) -> (usize, usize, usize) {
        let mut pass = 0;
        let mut fail = 0;
        let mut skip = 0;
        for e in &self.entries {
            match e.outcome {
                Outcome::Pass => pass += 1,
                Outcome::Fail(_) => fail += 1,
                Outcome::Skip(_) => skip += 1,
            }
        }
        (pass, fail, skip)
    }

    pub fn all_pass(&self) -> bool {
        let (_, fail, _) = self.counts();
        fail == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries
            .iter()
            .filter(|e| matches!(e.outcome, Outcome::Fail(_)))
    }

    pub fn render(&self) -> String {
        let mut out = format!("# {}\n", self.title);
        for n in &self.notes {
            out.push_str(&format!("# note: {n}\n"));
        }
        for e in &self.entries {
            out.push_str(&e.render());
            out.push('\n');
        }
        let (pass, fail, skip) = self.counts();
        out.push_str(&format!(
            "# summary checked={} pass={pass} fail={fail} skip={skip} result={}\n",
            self.entries.len(),
            if fail == 0 { "PASS" } else { "FAIL" }
        ));
        out
    }
}

/// A closed valuation sampled for some hole variables.
type Valuation = Vec<(VarName, Term)>;
/// An open context with a pair of pointwise-related valuations.
type CongruenceSample = (Term, Valuation, Valuation);

// ---------------------------------------------------------------------------
// Respect for a relation on closed terms (the closed-term correctness check)
// ---------------------------------------------------------------------------

/// Checks `⟦T(P)⟧ ∼ ⟦P⟧` for every closed corpus term, by exploring both
/// sides and running the relation checker. The translation must be
/// free-variable respecting, which is verified per term.
pub fn check_respects(
    translation: &dyn Translation,
    rel: RelationId,
    corpus: &Corpus,
    max_states: usize,
) -> Report {
    let src_sem = semantics_for(translation.source());
    let tgt_sem = semantics_for(translation.target());
    let entries: Vec<CheckEntry> = corpus
        .terms
        .par_iter()
        .enumerate()
        .map(|(index, p)| {
            let subject = src_sem.print(p);
            let (states, outcome) =
                respects_one(translation, rel, p, src_sem.as_ref(), tgt_sem.as_ref(), max_states);
            CheckEntry {
                index,
                subject,
                relation: Some(rel),
                states,
                outcome,
            }
        })
        .collect();
    Report {
        title: format!(
            "respects: translation={} relation={rel} seed={} size={} max-states={max_states}",
            translation.name(),
            corpus.seed,
            corpus.terms.len()
        ),
        notes: vec![
            "verdicts compare the explored graph of T(P) against that of P".to_string(),
            "checked on the listed finite corpus only".to_string(),
        ],
        entries,
    }
}

fn respects_one(
    translation: &dyn Translation,
    rel: RelationId,
    p: &Term,
    src_sem: &dyn Semantics,
    tgt_sem: &dyn Semantics,
    max_states: usize,
) -> (Option<(usize, usize)>, Outcome) {
    let source_g = match explore(p, src_sem, max_states) {
        Ok(g) => g,
        Err(e) => return (None, Outcome::Skip(format!("source exploration failed: {e}"))),
    };
    if !source_g.complete {
        return (None, Outcome::Skip("source state cap exhausted".to_string()));
    }
    let translated = match translation.translate(p) {
        Ok(t) => t,
        Err(e) => return (None, Outcome::Fail(format!("translation failed: {e}"))),
    };
    if !translated.is_closed() {
        return (
            None,
            Outcome::Fail(format!(
                "translation is not free-variable respecting; stray variables {:?}",
                translated
                    .free_vars()
                    .iter()
                    .map(|v| v.id().to_string())
                    .collect::<Vec<_>>()
            )),
        );
    }
    let target_g = match explore(&translated, tgt_sem, max_states) {
        Ok(g) => g,
        Err(e) => return (None, Outcome::Skip(format!("target exploration failed: {e}"))),
    };
    if !target_g.complete {
        return (
            Some((source_g.n_states(), target_g.n_states())),
            Outcome::Skip("target state cap exhausted".to_string()),
        );
    }
    let states = Some((source_g.n_states(), target_g.n_states()));
    match check_relation(rel, &target_g, &source_g) {
        Ok(v) if v.holds => (states, Outcome::Pass),
        Ok(v) => (states, Outcome::Fail(v.evidence.render())),
        Err(e) => (states, Outcome::Skip(e.to_string())),
    }
}

// ---------------------------------------------------------------------------
// Correctness under equivalent valuations (open terms)
// ---------------------------------------------------------------------------

fn render_valuation(sem: &dyn Semantics, vals: &[(VarName, Term)]) -> String {
    vals.iter()
        .map(|(v, t)| format!("{v}:={}", sem.print(t)))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Checks `⟦T(E)⟧(η) ∼ ⟦E⟧(ρ)` on sampled open terms E (corpus terms with
/// holes punched) and sampled valuations with `η(X) ∼ ρ(X)` pointwise. η is
/// built as `T ∘ ρ` plus relation-preserving mutations; samples whose
/// valuations fail the pointwise check are skipped, not passed.
pub fn check_correct_up_to(
    translation: &dyn Translation,
    rel: RelationId,
    corpus: &Corpus,
    valuation_samples: usize,
    max_states: usize,
) -> Report {
    let src_sem = semantics_for(translation.source());
    let tgt_sem = semantics_for(translation.target());
    let mut rng = corpus::rng_from_seed(corpus.seed ^ 0x5eed_c0de);

    let mut planned = Vec::new();
    let mut attempts = 0;
    while planned.len() < valuation_samples && attempts < valuation_samples * 20 {
        attempts += 1;
        if corpus.terms.is_empty() {
            break;
        }
        let base = &corpus.terms[rng.gen_range(0..corpus.terms.len())];
        let (open, holes) = corpus::punch_holes(base, &mut rng, 2);
        if holes.is_empty() {
            continue;
        }
        let rho: Vec<(VarName, Term)> = holes
            .iter()
            .map(|h| {
                let v = &corpus.terms[rng.gen_range(0..corpus.terms.len())];
                (h.clone(), v.clone())
            })
            .collect();
        let eta: Vec<(VarName, Term, bool)> = rho
            .iter()
            .map(|(h, v)| {
                let translated = translation.translate(v);
                match translated {
                    Ok(t) => {
                        if rng.gen_bool(0.5) {
                            (
                                h.clone(),
                                corpus::mutate_preserving(
                                    &t,
                                    translation.target(),
                                    rel,
                                    &mut rng,
                                ),
                                true,
                            )
                        } else {
                            (h.clone(), t, false)
                        }
                    }
                    Err(_) => (h.clone(), Term::nil(), false),
                }
            })
            .collect();
        planned.push((open, rho, eta));
    }

    let entries: Vec<CheckEntry> = planned
        .par_iter()
        .enumerate()
        .map(|(index, (open, rho, eta))| {
            let eta_pairs: Vec<(VarName, Term)> = eta
                .iter()
                .map(|(v, t, _)| (v.clone(), t.clone()))
                .collect();
            let subject = format!(
                "E = {}; rho = [{}]; eta = [{}]",
                src_sem.print(open),
                render_valuation(src_sem.as_ref(), rho),
                render_valuation(tgt_sem.as_ref(), &eta_pairs)
            );
            let outcome = correct_one(
                translation,
                rel,
                open,
                rho,
                &eta_pairs,
                src_sem.as_ref(),
                tgt_sem.as_ref(),
                max_states,
            );
            CheckEntry {
                index,
                subject,
                relation: Some(rel),
                states: None,
                outcome,
            }
        })
        .collect();

    Report {
        title: format!(
            "correct-up-to: translation={} relation={rel} seed={} samples={}",
            translation.name(),
            corpus.seed,
            entries.len()
        ),
        notes: vec![
            "eta is sampled as T∘rho plus relation-preserving mutations".to_string(),
            "pointwise-unrelated valuation samples are skipped, never passed".to_string(),
        ],
        entries,
    }
}

#[allow(clippy::too_many_arguments)]
fn correct_one(
    translation: &dyn Translation,
    rel: RelationId,
    open: &Term,
    rho: &[(VarName, Term)],
    eta: &[(VarName, Term)],
    src_sem: &dyn Semantics,
    tgt_sem: &dyn Semantics,
    max_states: usize,
) -> Outcome {
    // Pointwise η(X) ∼ ρ(X).
    for ((_, rv), (hv, ev)) in rho.iter().zip(eta) {
        let rg = match explore(rv, src_sem, max_states) {
            Ok(g) if g.complete => g,
            _ => return Outcome::Skip("valuation exploration failed".to_string()),
        };
        let eg = match explore(ev, tgt_sem, max_states) {
            Ok(g) if g.complete => g,
            _ => return Outcome::Skip("valuation exploration failed".to_string()),
        };
        match check_relation(rel, &eg, &rg) {
            Ok(v) if v.holds => {}
            Ok(_) => {
                return Outcome::Skip(format!(
                    "valuations not pointwise related at {hv}; sample discarded"
                ))
            }
            Err(e) => return Outcome::Skip(e.to_string()),
        }
    }

    let translated = match translation.translate(open) {
        Ok(t) => t,
        Err(e) => return Outcome::Fail(format!("translation failed: {e}")),
    };
    let source_closed = open.apply_subst(&Subst::from_pairs(rho.iter().cloned()));
    let target_closed = translated.apply_subst(&Subst::from_pairs(eta.iter().cloned()));
    let sg = match explore(&source_closed, src_sem, max_states) {
        Ok(g) if g.complete => g,
        Ok(_) => return Outcome::Skip("source state cap exhausted".to_string()),
        Err(e) => return Outcome::Skip(format!("source exploration failed: {e}")),
    };
    let tg = match explore(&target_closed, tgt_sem, max_states) {
        Ok(g) if g.complete => g,
        Ok(_) => return Outcome::Skip("target state cap exhausted".to_string()),
        Err(e) => return Outcome::Skip(format!("target exploration failed: {e}")),
    };
    match check_relation(rel, &tg, &sg) {
        Ok(v) if v.holds => Outcome::Pass,
        Ok(v) => Outcome::Fail(v.evidence.render()),
        Err(e) => Outcome::Skip(e.to_string()),
    }
}

// ---------------------------------------------------------------------------
// Compositionality
// ---------------------------------------------------------------------------

/// Checks `T(E[σ]) =α T(E)[T∘σ]` and `T(X) = X` on random open terms and
/// substitutions.
pub fn check_compositional(
    translation: &dyn Translation,
    samples: usize,
    seed: u64,
) -> Report {
    let mut params = GenParams::defaults(translation.source());
    params.size = samples.max(4);
    params.max_depth = 3;
    let pool = corpus::generate(seed, params);
    let src_sem = semantics_for(translation.source());
    let mut rng = corpus::rng_from_seed(seed ^ 0x00c0_4056);

    let mut entries = Vec::new();
    let mut attempts = 0;
    while entries.len() < samples && attempts < samples * 20 {
        attempts += 1;
        let base = &pool.terms[rng.gen_range(0..pool.terms.len())];
        let (open, holes) = corpus::punch_holes(base, &mut rng, 2);
        if holes.is_empty() {
            continue;
        }
        let mut sigma = Subst::new();
        for h in &holes {
            if rng.gen_bool(0.85) {
                let value = if rng.gen_bool(0.3) {
                    // Open substituend: exercises capture avoidance.
                    let v = &pool.terms[rng.gen_range(0..pool.terms.len())];
                    corpus::punch_holes(v, &mut rng, 1).0
                } else {
                    pool.terms[rng.gen_range(0..pool.terms.len())].clone()
                };
                sigma.insert(h.clone(), value);
            }
        }
        let index = entries.len();
        let subject = format!(
            "E = {}; sigma = [{}]",
            src_sem.print(&open),
            sigma
                .iter()
                .map(|(v, t)| format!("{v}:={}", src_sem.print(t)))
                .collect::<Vec<_>>()
                .join(", ")
        );
        let outcome = (|| {
            let var = Term::var("Q0");
            let tv = translation
                .translate(&var)
                .map_err(|e| format!("translation failed on a variable: {e}"))?;
            if tv != var {
                return Err("T(X) ≠ X".to_string());
            }
            let lhs = translation
                .translate(&open.apply_subst(&sigma))
                .map_err(|e| format!("translation failed: {e}"))?;
            let mut translated_sigma = Subst::new();
            for (v, t) in sigma.iter() {
                translated_sigma.insert(
                    v.clone(),
                    translation
                        .translate(t)
                        .map_err(|e| format!("translation failed: {e}"))?,
                );
            }
            let rhs = translation
                .translate(&open)
                .map_err(|e| format!("translation failed: {e}"))?
                .apply_subst(&translated_sigma);
            if lhs.alpha_eq(&rhs) {
                Ok(())
            } else {
                Err("T(E[σ]) differs from T(E)[T∘σ] up to α".to_string())
            }
        })();
        entries.push(CheckEntry {
            index,
            subject,
            relation: None,
            states: None,
            outcome: match outcome {
                Ok(()) => Outcome::Pass,
                Err(why) => Outcome::Fail(why),
            },
        });
    }

    Report {
        title: format!(
            "compositional: translation={} seed={seed} samples={}",
            translation.name(),
            entries.len()
        ),
        notes: vec!["both clauses checked: substitution commutation and identity on variables"
            .to_string()],
        entries,
    }
}

// ---------------------------------------------------------------------------
// Validity
// ---------------------------------------------------------------------------

/// Validity = compositionality + respect for the relation; denotability of
/// all semantic values holds by construction for closed-term domains and is
/// recorded as a note.
pub fn check_valid(
    translation: &dyn Translation,
    rel: RelationId,
    corpus: &Corpus,
    samples: usize,
    max_states: usize,
) -> Report {
    let comp = check_compositional(translation, samples, corpus.seed);
    let resp = check_respects(translation, rel, corpus, max_states);
    let mut entries = Vec::new();
    for e in comp.entries {
        entries.push(CheckEntry {
            index: entries.len(),
            subject: format!("compositionality: {}", e.subject),
            ..e
        });
    }
    for e in resp.entries {
        entries.push(CheckEntry {
            index: entries.len(),
            subject: format!("respects: {}", e.subject),
            ..e
        });
    }
    Report {
        title: format!(
            "valid: translation={} relation={rel} seed={}",
            translation.name(),
            corpus.seed
        ),
        notes: vec![
            "semantic values are closed terms, so every value is denotable by construction"
                .to_string(),
            "existence of related target valuations is witnessed by the translation itself"
                .to_string(),
        ],
        entries,
    }
}

// ---------------------------------------------------------------------------
// Congruence sampling
// ---------------------------------------------------------------------------

/// Directed witnesses worth trying before random sampling; currently the
/// classic τ-preemption context for CCS choice.
fn directed_congruence_witnesses(
    lang: LangId,
    rel: RelationId,
) -> Vec<CongruenceSample> {
    if lang == LangId::Ccs
        && matches!(rel, RelationId::WeakBisim | RelationId::ConvergentWeakBisim)
    {
        let x = VarName::new("X");
        let e = Term::choice(vec![
            Term::Var(x.clone()),
            parse_ccs("a.0").expect("fixture parses"),
        ]);
        let rho = vec![(x.clone(), parse_ccs("tau.b.0").unwrap())];
        let nu = vec![(x, parse_ccs("b.0").unwrap())];
        vec![(e, rho, nu)]
    } else {
        Vec::new()
    }
}

/// Samples open terms E and pairs of pointwise-related closed valuations
/// ν ∼ ρ, and reports every context where `⟦E⟧(ν) ≁ ⟦E⟧(ρ)` — a congruence
/// violation. A report with failures means violations were found.
pub fn check_congruence_sampled(
    lang: LangId,
    rel: RelationId,
    samples: usize,
    seed: u64,
    max_states: usize,
) -> Report {
    let sem = semantics_for(lang);
    let mut params = GenParams::defaults(lang);
    params.size = 40.min(samples.max(8));
    params.max_depth = 3;
    let pool = corpus::generate(seed, params);
    let mut rng = corpus::rng_from_seed(seed ^ 0xc09e_c09e);

    let mut planned: Vec<CongruenceSample> = directed_congruence_witnesses(lang, rel);
    let mut attempts = 0;
    while planned.len() < samples && attempts < samples * 20 {
        attempts += 1;
        let base = &pool.terms[rng.gen_range(0..pool.terms.len())];
        let (open, holes) = corpus::punch_holes(base, &mut rng, 2);
        if holes.is_empty() {
            continue;
        }
        let rho: Vec<(VarName, Term)> = holes
            .iter()
            .map(|h| {
                (
                    h.clone(),
                    pool.terms[rng.gen_range(0..pool.terms.len())].clone(),
                )
            })
            .collect();
        let nu: Vec<(VarName, Term)> = rho
            .iter()
            .map(|(h, v)| {
                (
                    h.clone(),
                    corpus::mutate_preserving(v, lang, rel, &mut rng),
                )
            })
            .collect();
        planned.push((open, rho, nu));
    }

    let entries: Vec<CheckEntry> = planned
        .par_iter()
        .enumerate()
        .map(|(index, (open, rho, nu))| {
            let subject = format!(
                "E = {}; rho = [{}]; nu = [{}]",
                sem.print(open),
                render_valuation(sem.as_ref(), rho),
                render_valuation(sem.as_ref(), nu)
            );
            let outcome = congruence_one(rel, open, rho, nu, sem.as_ref(), max_states);
            CheckEntry {
                index,
                subject,
                relation: Some(rel),
                states: None,
                outcome,
            }
        })
        .collect();

    Report {
        title: format!(
            "congruence: lang={lang} relation={rel} seed={seed} samples={}",
            entries.len()
        ),
        notes: vec![
            "a fail entry is a genuine congruence violation witness".to_string(),
            "valuation pairs are verified pointwise related before use".to_string(),
        ],
        entries,
    }
}

fn congruence_one(
    rel: RelationId,
    open: &Term,
    rho: &[(VarName, Term)],
    nu: &[(VarName, Term)],
    sem: &dyn Semantics,
    max_states: usize,
) -> Outcome {
    for ((hv, rv), (_, nv)) in rho.iter().zip(nu) {
        let rg = match explore(rv, sem, max_states) {
            Ok(g) if g.complete => g,
            _ => return Outcome::Skip("valuation exploration failed".to_string()),
        };
        let ng = match explore(nv, sem, max_states) {
            Ok(g) if g.complete => g,
            _ => return Outcome::Skip("valuation exploration failed".to_string()),
        };
        match check_relation(rel, &ng, &rg) {
            Ok(v) if v.holds => {}
            Ok(_) => {
                return Outcome::Skip(format!("valuations not pointwise related at {hv}"))
            }
            Err(e) => return Outcome::Skip(e.to_string()),
        }
    }
    let with_rho = open.apply_subst(&Subst::from_pairs(rho.iter().cloned()));
    let with_nu = open.apply_subst(&Subst::from_pairs(nu.iter().cloned()));
    let rg = match explore(&with_rho, sem, max_states) {
        Ok(g) if g.complete => g,
        _ => return Outcome::Skip("instantiation exploration failed".to_string()),
    };
    let ng = match explore(&with_nu, sem, max_states) {
        Ok(g) if g.complete => g,
        _ => return Outcome::Skip("instantiation exploration failed".to_string()),
    };
    match check_relation(rel, &ng, &rg) {
        Ok(v) if v.holds => Outcome::Pass,
        Ok(v) => Outcome::Fail(format!("congruence violation: {}", v.evidence.render())),
        Err(e) => Outcome::Skip(e.to_string()),
    }
}

/// Congruence restricted to translated contexts and valuations into the
/// image of the translation: samples source terms E, compares `⟦T(E)⟧(ν)`
/// against `⟦T(E)⟧(η)` for pointwise-related ν, η built from translated
/// pool values and their mutations.
pub fn check_congruence_translated(
    translation: &dyn Translation,
    rel: RelationId,
    samples: usize,
    seed: u64,
    max_states: usize,
) -> Report {
    let tgt_sem = semantics_for(translation.target());
    let src_sem = semantics_for(translation.source());
    let mut params = GenParams::defaults(translation.source());
    params.size = 40.min(samples.max(8));
    params.max_depth = 3;
    let pool = corpus::generate(seed, params);
    let mut rng = corpus::rng_from_seed(seed ^ 0x7a41_5a7e);

    let mut entries = Vec::new();
    let mut attempts = 0;
    while entries.len() < samples && attempts < samples * 20 {
        attempts += 1;
        let base = &pool.terms[rng.gen_range(0..pool.terms.len())];
        let (open, holes) = corpus::punch_holes(base, &mut rng, 2);
        if holes.is_empty() {
            continue;
        }
        let translated_open = match translation.translate(&open) {
            Ok(t) => t,
            Err(_) => continue,
        };
        let mut nu = Vec::new();
        let mut eta = Vec::new();
        let mut ok = true;
        for h in &holes {
            let source_val = &pool.terms[rng.gen_range(0..pool.terms.len())];
            match translation.translate(source_val) {
                Ok(tv) => {
                    nu.push((h.clone(), tv.clone()));
                    eta.push((
                        h.clone(),
                        corpus::mutate_preserving(&tv, translation.target(), rel, &mut rng),
                    ));
                }
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let index = entries.len();
        let subject = format!(
            "T(E) with E = {}; nu = [{}]; eta = [{}]",
            src_sem.print(&open),
            render_valuation(tgt_sem.as_ref(), &nu),
            render_valuation(tgt_sem.as_ref(), &eta)
        );
        let outcome = congruence_one(rel, &translated_open, &nu, &eta, tgt_sem.as_ref(), max_states);
        entries.push(CheckEntry {
            index,
            subject,
            relation: Some(rel),
            states: None,
            outcome,
        });
    }

    Report {
        title: format!(
            "congruence-for-translated: translation={} relation={rel} seed={seed} samples={}",
            translation.name(),
            entries.len()
        ),
        notes: vec![
            "contexts are images of source terms; valuations range over translated values"
                .to_string(),
        ],
        entries,
    }
}

// ---------------------------------------------------------------------------
// Hierarchy harnesses
// ---------------------------------------------------------------------------

/// Whenever the respect check passes at the finer relation on a term, it
/// must pass at the coarser one; any counterexample indicates a checker or
/// refinement-metadata bug.
pub fn hierarchy_harness(
    translation: &dyn Translation,
    finer: RelationId,
    coarser: RelationId,
    corpus: &Corpus,
    max_states: usize,
) -> Report {
    assert!(
        finer.refines(coarser),
        "{finer} is not declared finer than {coarser}"
    );
    let fine = check_respects(translation, finer, corpus, max_states);
    let coarse = check_respects(translation, coarser, corpus, max_states);
    let entries: Vec<CheckEntry> = fine
        .entries
        .iter()
        .zip(&coarse.entries)
        .enumerate()
        .map(|(index, (f, c))| {
            let outcome = match (&f.outcome, &c.outcome) {
                (Outcome::Skip(why), _) | (_, Outcome::Skip(why)) => Outcome::Skip(why.clone()),
                (Outcome::Pass, Outcome::Fail(why)) => Outcome::Fail(format!(
                    "passes at {finer} but fails at {coarser}: {why}"
                )),
                _ => Outcome::Pass,
            };
            CheckEntry {
                index,
                subject: f.subject.clone(),
                relation: None,
                states: f.states,
                outcome,
            }
        })
        .collect();
    Report {
        title: format!(
            "hierarchy: translation={} finer={finer} coarser={coarser} seed={}",
            translation.name(),
            corpus.seed
        ),
        notes: vec!["pass means the finer→coarser implication held (possibly vacuously)"
            .to_string()],
        entries,
    }
}

/// Computes all five verdicts for each graph pair and checks every declared
/// refinement implication between them.
pub fn relation_implications(pairs: &[(ProcessGraph, ProcessGraph)]) -> Report {
    let entries: Vec<CheckEntry> = pairs
        .par_iter()
        .enumerate()
        .map(|(index, (g1, g2))| {
            let mut verdicts = Vec::new();
            let mut outcome = Outcome::Pass;
            for rel in RelationId::ALL {
                match check_relation(rel, g1, g2) {
                    Ok(v) => verdicts.push((rel, v.holds)),
                    Err(e) => {
                        outcome = Outcome::Skip(e.to_string());
                        break;
                    }
                }
            }
            if matches!(outcome, Outcome::Pass) {
                'outer: for (f, fh) in &verdicts {
                    for (c, ch) in &verdicts {
                        if f != c && f.refines(*c) && *fh && !*ch {
                            outcome = Outcome::Fail(format!(
                                "holds at {f} but not at the coarser {c}"
                            ));
                            break 'outer;
                        }
                    }
                }
            }
            let subject = verdicts
                .iter()
                .map(|(r, h)| format!("{r}={}", if *h { "T" } else { "F" }))
                .collect::<Vec<_>>()
                .join(" ");
            CheckEntry {
                index,
                subject,
                relation: None,
                states: Some((g1.n_states(), g2.n_states())),
                outcome,
            }
        })
        .collect();
    Report {
        title: format!("relation-implications: pairs={}", pairs.len()),
        notes: vec![
            "declared refinements: iso⇒strong⇒weak⇒trace and cweak⇒weak".to_string(),
        ],
        entries,
    }
}

/// Cross-check of the correctness→congruence implication: if the
/// correctness report passed everywhere but source-congruence sampling
/// found a violation, the checkers disagree with the metatheory and the
/// run is flagged.
pub fn consistency_diagnostic(
    correct_report: &Report,
    source_congruence_report: &Report,
) -> Option<String> {
    let correct_all = correct_report.all_pass() && !correct_report.entries.is_empty();
    let congruence_violated = !source_congruence_report.all_pass();
    if correct_all && congruence_violated {
        Some(
            "INCONSISTENCY: correctness passed on the corpus but a source-congruence violation \
             was found; correctness implies source congruence, so a checker or sampler is wrong"
                .to_string(),
        )
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// The separation fixture
// ---------------------------------------------------------------------------

/// Everything the fixture records for one valuation of the encoded open
/// parallel composition.
#[derive(Debug, Clone)]
pub struct FixtureRow {
    pub name: &'static str,
    pub encoded_instance: Term,
    pub csp_instance: Term,
    pub encoded_states: usize,
    pub csp_states: usize,
    pub traces_up_to_4: Vec<Vec<ActName>>,
    pub encoded_diverges: Option<Vec<usize>>,
    pub csp_diverges: Option<Vec<usize>>,
    pub encoded_deadlocks: Vec<usize>,
    pub csp_deadlocks: Vec<usize>,
    /// Verdicts (encoded instance vs CSP counterpart) for all five relations.
    pub verdicts: Vec<(RelationId, bool)>,
}

/// Concrete behavioural facts around the parallel-composition open term
/// `X [|{b,c}|] Y` and its encoding, instantiated under the valuations the
/// untranslatability argument uses.
#[derive(Debug, Clone)]
pub struct SeparationFixture {
    pub open_csp: Term,
    pub open_encoded: Term,
    /// weak bisimilarity of b.0+b.c.0 (CCS) and (b→STOP)□(b→(c→STOP)) (CSP).
    pub witness_weak_bisim: bool,
    /// ... and the same under the divergence-respecting refinement.
    pub witness_cweak_bisim: bool,
    pub witness_divergence_free: bool,
    /// Traces of ⟦X‖Y⟧(ρ) on the CSP side.
    pub rho_traces: Vec<Vec<ActName>>,
    pub nu_divergence_free: bool,
    pub nu_deadlock_reachable: bool,
    /// Path simulation at trace level: every trace of the ν-instance is a
    /// trace of the η-instance.
    pub nu_traces_included_in_eta: bool,
    pub rows: Vec<FixtureRow>,
}

pub fn separation_fixture(max_states: usize) -> SeparationFixture {
    let ccs_sem = crate::ccs::CcsSemantics::default();
    let csp_sem = crate::csp::CspSemantics;

    let rho_val = parse_csp("(b -> STOP) [] (b -> (c -> STOP))").unwrap();
    let eta_val = parse_ccs("b.0 + b.c.0").unwrap();
    let nu_val = parse_ccs("b.0").unwrap();
    let nu_csp_val = parse_csp("b -> STOP").unwrap();

    let x = VarName::new("X");
    let y = VarName::new("Y");
    let sync: std::collections::BTreeSet<ActName> =
        [ActName::plain("b"), ActName::plain("c")].into_iter().collect();
    let open_csp = Term::sync(Term::Var(x.clone()), sync, Term::Var(y.clone()));
    let alphabet = TripledAlphabet::new([ActName::plain("b"), ActName::plain("c")]).unwrap();
    let open_encoded = encode(&open_csp, &alphabet).unwrap();

    let val = |xa: &Term, ya: &Term| {
        Subst::from_pairs([(x.clone(), xa.clone()), (y.clone(), ya.clone())])
    };
    let plans: Vec<(&'static str, Subst, Subst)> = vec![
        (
            "eta",
            val(&eta_val, &eta_val),
            val(&rho_val, &rho_val),
        ),
        (
            "nu",
            val(&nu_val, &nu_val),
            val(&nu_csp_val, &nu_csp_val),
        ),
        (
            "xi",
            val(&nu_val, &eta_val),
            val(&nu_csp_val, &rho_val),
        ),
    ];

    let mut rows = Vec::new();
    let mut eta_dfa: Option<TraceDfa> = None;
    let mut nu_dfa: Option<TraceDfa> = None;
    let mut nu_row_facts = (false, false);
    for (name, ccs_subst, csp_subst) in plans {
        let encoded_instance = open_encoded.apply_subst(&ccs_subst);
        let csp_instance = open_csp.apply_subst(&csp_subst);
        let eg = explore(&encoded_instance, &ccs_sem, max_states).unwrap();
        let cg = explore(&csp_instance, &csp_sem, max_states).unwrap();
        let dfa = TraceDfa::from_graph(&eg).unwrap();
        let traces = dfa.words_up_to(4);
        let encoded_diverges = diverges(&eg, eg.initial).unwrap();
        let csp_diverges = diverges(&cg, cg.initial).unwrap();
        let encoded_deadlocks = deadlocks(&eg);
        let csp_deadlocks = deadlocks(&cg);
        let verdicts: Vec<(RelationId, bool)> = RelationId::ALL
            .iter()
            .map(|r| (*r, check_relation(*r, &eg, &cg).unwrap().holds))
            .collect();
        if name == "eta" {
            eta_dfa = Some(dfa.clone());
        }
        if name == "nu" {
            nu_row_facts = (encoded_diverges.is_none(), !encoded_deadlocks.is_empty());
            nu_dfa = Some(dfa.clone());
        }
        rows.push(FixtureRow {
            name,
            encoded_instance,
            csp_instance,
            encoded_states: eg.n_states(),
            csp_states: cg.n_states(),
            traces_up_to_4: traces,
            encoded_diverges,
            csp_diverges,
            encoded_deadlocks,
            csp_deadlocks,
            verdicts,
        });
    }

    // The witness pair behind the η valuation.
    let wg1 = explore(&eta_val, &ccs_sem, max_states).unwrap();
    let wg2 = explore(&rho_val, &csp_sem, max_states).unwrap();
    let witness_weak = crate::equiv::weak_bisim(&wg1, &wg2).unwrap().holds;
    let witness_cweak = crate::equiv::cweak_bisim(&wg1, &wg2).unwrap().holds;
    let witness_divergence_free = diverges(&wg1, wg1.initial).unwrap().is_none()
        && diverges(&wg2, wg2.initial).unwrap().is_none();

    let rho_instance = open_csp.apply_subst(&val(&rho_val, &rho_val));
    let rho_g = explore(&rho_instance, &csp_sem, max_states).unwrap();
    let rho_traces = TraceDfa::from_graph(&rho_g).unwrap().words_up_to(4);

    let (eta_dfa, nu_dfa) = (eta_dfa.unwrap(), nu_dfa.unwrap());
    let nu_traces_included_in_eta = nu_dfa
        .words_up_to(6)
        .iter()
        .all(|w| eta_dfa.accepts(w));

    SeparationFixture {
        open_csp,
        open_encoded,
        witness_weak_bisim: witness_weak,
        witness_cweak_bisim: witness_cweak,
        witness_divergence_free,
        rho_traces,
        nu_divergence_free: nu_row_facts.0,
        nu_deadlock_reachable: nu_row_facts.1,
        nu_traces_included_in_eta,
        rows,
    }
}

fn render_words(words: &[Vec<ActName>]) -> String {
    words
        .iter()
        .map(|w| {
            if w.is_empty() {
                "<empty>".to_string()
            } else {
                w.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
            }
        })
        .collect::<Vec<_>>()
        .join(", ")
}

impl SeparationFixture {
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str("# separation fixture: X [|{b, c}|] Y under the witness valuations\n");
        out.push_str(&format!(
            "open CSP term: {}\n",
            crate::csp::print_csp(&self.open_csp)
        ));
        out.push_str(&format!(
            "encoded open term: {}\n",
            crate::ccs::print_ccs(&self.open_encoded)
        ));
        out.push_str(&format!(
            "witness pair weakly bisimilar: {}\n",
            self.witness_weak_bisim
        ));
        out.push_str(&format!(
            "witness pair divergence-free (so the divergence-respecting verdict agrees): {} / cweak: {}\n",
            self.witness_divergence_free, self.witness_cweak_bisim
        ));
        out.push_str(&format!(
            "CSP-side traces under rho: {}\n",
            render_words(&self.rho_traces)
        ));
        out.push_str(&format!(
            "nu-instance divergence-free: {}, reaches a deadlock: {}\n",
            self.nu_divergence_free, self.nu_deadlock_reachable
        ));
        out.push_str(&format!(
            "nu-instance traces included in eta-instance traces: {}\n",
            self.nu_traces_included_in_eta
        ));
        for row in &self.rows {
            out.push_str(&format!(
                "\n[{}] encoded = {}\n",
                row.name,
                crate::ccs::print_ccs(&row.encoded_instance)
            ));
            out.push_str(&format!(
                "[{}] csp counterpart = {}\n",
                row.name,
                crate::csp::print_csp(&row.csp_instance)
            ));
            out.push_str(&format!(
                "[{}] states encoded/csp: {}/{}\n",
                row.name, row.encoded_states, row.csp_states
            ));
            out.push_str(&format!(
                "[{}] traces (length ≤ 4): {}\n",
                row.name,
                render_words(&row.traces_up_to_4)
            ));
            out.push_str(&format!(
                "[{}] diverges encoded/csp: {}/{}\n",
                row.name,
                row.encoded_diverges.is_some(),
                row.csp_diverges.is_some()
            ));
            out.push_str(&format!(
                "[{}] deadlock states encoded/csp: {:?}/{:?}\n",
                row.name, row.encoded_deadlocks, row.csp_deadlocks
            ));
            for (rel, holds) in &row.verdicts {
                out.push_str(&format!("[{}] {} (encoded vs csp): {}\n", row.name, rel, holds));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::translate::{identity, EncodeTranslation};

    fn small_csp_corpus(seed: u64, size: usize) -> Corpus {
        let mut params = GenParams::defaults(LangId::Csp);
        params.size = size;
        corpus::generate(seed, params)
    }

    fn alphabet() -> TripledAlphabet {
        TripledAlphabet::new(["a", "b", "c"].map(ActName::plain)).unwrap()
    }

    #[test]
    fn respects_encode_trace_on_small_corpus() {
        let corpus = small_csp_corpus(11, 8);
        let t = EncodeTranslation {
            alphabet: alphabet(),
        };
        let report = check_respects(&t, RelationId::Trace, &corpus, 20_000);
        assert!(report.all_pass(), "{}", report.render());
        assert_eq!(report.entries.len(), 8);
    }

    #[test]
    fn respects_identity_strong_on_ccs() {
        let mut params = GenParams::defaults(LangId::Ccs);
        params.size = 8;
        let corpus = corpus::generate(3, params);
        let t = identity(LangId::Ccs);
        let report = check_respects(&t, RelationId::StrongBisim, &corpus, 20_000);
        assert!(report.all_pass(), "{}", report.render());
    }

    #[test]
    fn respects_encode_weak_fails_on_internal_choice() {
        let mut corpus = small_csp_corpus(11, 2);
        corpus.terms = vec![
            parse_csp("(a -> STOP) |~| (b -> STOP)").unwrap(),
            parse_csp("DIV").unwrap(),
        ];
        let t = EncodeTranslation {
            alphabet: alphabet(),
        };
        let weak = check_respects(&t, RelationId::WeakBisim, &corpus, 20_000);
        assert!(!weak.all_pass(), "{}", weak.render());
        let cweak = check_respects(&t, RelationId::ConvergentWeakBisim, &corpus, 20_000);
        // DIV ↦ 0 drops divergence, so cweak must fail on the DIV entry.
        assert!(matches!(cweak.entries[1].outcome, Outcome::Fail(_)));
    }

    #[test]
    fn congruence_directed_witness_fires() {
        let report =
            check_congruence_sampled(LangId::Ccs, RelationId::WeakBisim, 3, 5, 20_000);
        assert!(matches!(report.entries[0].outcome, Outcome::Fail(_)),
            "{}", report.render());
    }

    #[test]
    fn consistency_diagnostic_triggers_only_on_contradiction() {
        let pass = Report {
            title: "t".into(),
            notes: vec![],
            entries: vec![CheckEntry {
                index: 0,
                subject: "s".into(),
                relation: None,
                states: None,
                outcome: Outcome::Pass,
            }],
        };
        let fail = Report {
            title: "t".into(),
            notes: vec![],
            entries: vec![CheckEntry {
                index: 0,
                subject: "s".into(),
                relation: None,
                states: None,
                outcome: Outcome::Fail("x".into()),
            }],
        };
        assert!(consistency_diagnostic(&pass, &fail).is_some());
        assert!(consistency_diagnostic(&pass, &pass).is_none());
        assert!(consistency_diagnostic(&fail, &fail).is_none());
    }

    #[test]
    fn report_rendering_is_deterministic() {
        let corpus = small_csp_corpus(21, 5);
        let t = EncodeTranslation {
            alphabet: alphabet(),
        };
        let a = check_respects(&t, RelationId::Trace, &corpus, 20_000).render();
        let b = check_respects(&t, RelationId::Trace, &corpus, 20_000).render();
        assert_eq!(a, b);
    }

    #[test]
    fn separation_fixture_facts() {
        let fx = separation_fixture(20_000);
        assert!(fx.witness_weak_bisim);
        assert!(fx.witness_cweak_bisim);
        assert!(fx.witness_divergence_free);
        let words: Vec<String> = fx
            .rho_traces
            .iter()
            .map(|w| w.iter().map(ToString::to_string).collect::<Vec<_>>().join(""))
            .collect();
        assert_eq!(words, vec!["", "b", "bc"]);
        assert!(fx.nu_divergence_free);
        assert!(fx.nu_deadlock_reachable);
        assert!(fx.nu_traces_included_in_eta);
        assert!(!fx.render().is_empty());
    }
}
