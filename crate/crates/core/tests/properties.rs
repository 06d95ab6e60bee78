//! Property tests over seeded random terms: the substitution laws, the
//! prefix preorder, head decomposition, printer/parser round trips, and
//! α-invariance of the steppers and analyses.

use proptest::prelude::*;

use procalc::ccs::{parse_ccs, print_ccs, CcsSemantics};
use procalc::corpus::{self, alpha_variant, punch_holes, GenParams};
use procalc::csp::{parse_csp, print_csp, CspSemantics};
use procalc::equiv::{check_relation, RelationId};
use procalc::lts::{explore, weak_closure, Semantics};
use procalc::term::Subst;
use procalc::{LangId, Term, VarName};

fn term_from_seed(lang: LangId, seed: u64, depth: usize) -> Term {
    let mut params = GenParams::defaults(lang);
    params.size = 1;
    params.max_depth = depth;
    corpus::generate(seed, params)
        .terms
        .into_iter()
        .next()
        .expect("generator yields a term")
}

/// An open term together with a substitution on (some of) its holes.
fn open_with_subst(lang: LangId, seed: u64) -> (Term, Subst) {
    let mut rng = corpus::rng_from_seed(seed);
    let base = term_from_seed(lang, seed, 3);
    let (open, holes) = punch_holes(&base, &mut rng, 2);
    let mut sigma = Subst::new();
    for (i, h) in holes.iter().enumerate() {
        let value_base = term_from_seed(lang, seed.wrapping_add(17 * (i as u64 + 1)), 2);
        let value = if i % 2 == 0 {
            value_base
        } else {
            punch_holes(&value_base, &mut rng, 1).0
        };
        sigma.insert(h.clone(), value);
    }
    (open, sigma)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn subst_identity_law(seed in any::<u64>(), ccs in any::<bool>()) {
        let lang = if ccs { LangId::Ccs } else { LangId::Csp };
        let (open, _) = open_with_subst(lang, seed);
        prop_assert!(open.apply_subst(&Subst::new()).alpha_eq(&open));
    }

    #[test]
    fn subst_composition_law(seed in any::<u64>(), ccs in any::<bool>()) {
        // t[σ][ξ] =α t[ξ•σ]
        let lang = if ccs { LangId::Ccs } else { LangId::Csp };
        let (open, sigma) = open_with_subst(lang, seed);
        let (_, xi_src) = open_with_subst(lang, seed.wrapping_mul(31).wrapping_add(7));
        // Build ξ over the free variables remaining after σ.
        let mut xi = Subst::new();
        for (i, v) in open.apply_subst(&sigma).free_vars().into_iter().enumerate() {
            if let Some((_, t)) = xi_src.iter().nth(i % xi_src.len().max(1)) {
                xi.insert(v, t.clone());
            }
        }
        let two_step = open.apply_subst(&sigma).apply_subst(&xi);
        let one_step = open.apply_subst(&Subst::compose(&xi, &sigma));
        prop_assert!(
            two_step.alpha_eq(&one_step),
            "two-step and composed substitution disagree"
        );
    }

    #[test]
    fn prefix_preorder_reflexive_and_transitive(seed in any::<u64>(), ccs in any::<bool>()) {
        let lang = if ccs { LangId::Ccs } else { LangId::Csp };
        let (e, sigma) = open_with_subst(lang, seed);
        // Reflexivity.
        prop_assert!(e.match_prefix(&e).is_some());
        // e ≤ e[σ] ≤ e[σ][ξ], and prefix relations compose.
        let mid = e.apply_subst(&sigma);
        let (_, xi) = open_with_subst(lang, seed.wrapping_add(1234));
        let low = mid.apply_subst(&xi);
        let s1 = e.match_prefix(&mid);
        prop_assert!(s1.is_some(), "e must be a prefix of e[σ]");
        let s2 = mid.match_prefix(&low);
        prop_assert!(s2.is_some());
        let s3 = e.match_prefix(&low);
        prop_assert!(s3.is_some(), "prefix order must be transitive");
        let witness = s3.unwrap();
        prop_assert!(e.apply_subst(&witness).alpha_eq(&low));
    }

    #[test]
    fn mutual_prefixes_are_injective_renamings(seed in any::<u64>(), ccs in any::<bool>()) {
        let lang = if ccs { LangId::Ccs } else { LangId::Csp };
        let (e, _) = open_with_subst(lang, seed);
        // Rename free variables injectively; both directions must witness
        // injective renamings.
        let mut renaming = Subst::new();
        let mut back = Subst::new();
        for (i, v) in e.free_vars().into_iter().enumerate() {
            let fresh = VarName::new(format!("N{i}"));
            renaming.insert(v.clone(), Term::Var(fresh.clone()));
            back.insert(fresh, Term::Var(v));
        }
        let renamed = e.apply_subst(&renaming);
        let fwd = e.match_prefix(&renamed);
        let bwd = renamed.match_prefix(&e);
        prop_assert!(fwd.is_some() && bwd.is_some());
        prop_assert!(fwd.unwrap().is_injective_renaming());
        prop_assert!(bwd.unwrap().is_injective_renaming());
    }

    #[test]
    fn head_reconstructs_term(seed in any::<u64>(), ccs in any::<bool>()) {
        let lang = if ccs { LangId::Ccs } else { LangId::Csp };
        let (t, _) = open_with_subst(lang, seed);
        if matches!(t, Term::Var(_)) {
            prop_assert!(t.head().is_err());
        } else {
            let (head, sigma) = t.head().unwrap();
            prop_assert!(head.apply_subst(&sigma).alpha_eq(&t));
            prop_assert!(!matches!(head, Term::Var(_)));
        }
    }

    #[test]
    fn heads_unique_up_to_renaming(seed in any::<u64>(), ccs in any::<bool>()) {
        let lang = if ccs { LangId::Ccs } else { LangId::Csp };
        let (t, _) = open_with_subst(lang, seed);
        if matches!(t, Term::Var(_)) {
            return Ok(());
        }
        let (h1, _) = t.head().unwrap();
        let (h2, _) = t.head_named("Y").unwrap();
        let fwd = h1.match_prefix(&h2);
        let bwd = h2.match_prefix(&h1);
        prop_assert!(fwd.is_some() && bwd.is_some());
        prop_assert!(fwd.unwrap().is_injective_renaming());
    }

    #[test]
    fn ccs_print_parse_round_trip(seed in any::<u64>()) {
        let t = term_from_seed(LangId::Ccs, seed, 4);
        let printed = print_ccs(&t);
        let back = parse_ccs(&printed)
            .unwrap_or_else(|e| panic!("`{printed}` failed to reparse: {e}"));
        prop_assert!(back.alpha_eq(&t), "round trip changed `{printed}`");
    }

    #[test]
    fn csp_print_parse_round_trip(seed in any::<u64>()) {
        let t = term_from_seed(LangId::Csp, seed, 4);
        let printed = print_csp(&t);
        let back = parse_csp(&printed)
            .unwrap_or_else(|e| panic!("`{printed}` failed to reparse: {e}"));
        prop_assert!(back.alpha_eq(&t), "round trip changed `{printed}`");
    }

    #[test]
    fn steppers_are_alpha_invariant(seed in any::<u64>(), ccs in any::<bool>()) {
        // α-equivalent closed terms must have
        // α-equivalent transition sets and indistinguishable analyses.
        let lang = if ccs { LangId::Ccs } else { LangId::Csp };
        let t = term_from_seed(lang, seed, 3);
        let mut rng = corpus::rng_from_seed(seed ^ 0xa1fa);
        let variant = alpha_variant(&t, &mut rng);
        let sem = procalc::lts::semantics_for(lang);
        let canon_steps = |u: &Term| {
            sem.step(u)
                .unwrap()
                .into_iter()
                .map(|(l, s)| (l, s.canon()))
                .collect::<std::collections::BTreeSet<_>>()
        };
        prop_assert_eq!(canon_steps(&t), canon_steps(&variant));
        let g1 = explore(&t, sem.as_ref(), 20_000).unwrap();
        let g2 = explore(&variant, sem.as_ref(), 20_000).unwrap();
        for rel in RelationId::ALL {
            let v = check_relation(rel, &g1, &g2).unwrap();
            prop_assert!(v.holds, "{} failed between α-variants", rel);
        }
    }

    #[test]
    fn weak_closure_idempotent_on_random_graphs(seed in any::<u64>()) {
        let mut rng = corpus::rng_from_seed(seed);
        let g = corpus::random_graph(&mut rng, 12);
        let w = weak_closure(&g).unwrap();
        prop_assert_eq!(weak_closure(&w).unwrap(), w);
    }

    #[test]
    fn traces_are_prefix_closed_and_contain_epsilon(seed in any::<u64>()) {
        let mut rng = corpus::rng_from_seed(seed);
        let g = corpus::random_graph(&mut rng, 12);
        let dfa = procalc::dfa::TraceDfa::from_graph(&g).unwrap();
        prop_assert!(dfa.accepts(&[]));
        for word in dfa.words_up_to(4) {
            for cut in 0..word.len() {
                prop_assert!(dfa.accepts(&word[..cut]));
            }
        }
    }

    #[test]
    fn aut_round_trip_random_graphs(seed in any::<u64>()) {
        let mut rng = corpus::rng_from_seed(seed);
        let g = corpus::random_graph(&mut rng, 15);
        let back = procalc::lts::import_aut(&procalc::lts::export_aut(&g)).unwrap();
        prop_assert_eq!(g.initial, back.initial);
        let orig: Vec<_> = g.transitions().map(|(s, l, t)| (s, l.clone(), t)).collect();
        let round: Vec<_> = back.transitions().map(|(s, l, t)| (s, l.clone(), t)).collect();
        prop_assert_eq!(orig, round);
    }

    #[test]
    fn weak_bisim_is_an_equivalence_on_samples(seed in any::<u64>()) {
        use procalc::equiv::weak_bisim;
        let mut rng = corpus::rng_from_seed(seed);
        let a = corpus::random_graph(&mut rng, 8);
        let b = corpus::weak_variant(&a, &mut rng);
        let c = corpus::weak_variant(&b, &mut rng);
        // Reflexivity, symmetry on a related pair, transitivity via chain.
        prop_assert!(weak_bisim(&a, &a).unwrap().holds);
        prop_assert!(weak_bisim(&a, &b).unwrap().holds);
        prop_assert!(weak_bisim(&b, &a).unwrap().holds);
        prop_assert!(weak_bisim(&b, &c).unwrap().holds);
        prop_assert!(weak_bisim(&a, &c).unwrap().holds);
    }
}

#[test]
fn stepper_alpha_invariance_on_recursion_example() {
    // A fixed spot check in addition to the random ones.
    let t = parse_ccs("fix X {X = a.X | b.0}").unwrap();
    let u = parse_ccs("fix Y {Y = a.Y | b.0}").unwrap();
    let sem = CcsSemantics::default();
    let s1: Vec<_> = sem
        .step(&t)
        .unwrap()
        .into_iter()
        .map(|(l, s)| (l, s.canon()))
        .collect();
    let s2: Vec<_> = sem
        .step(&u)
        .unwrap()
        .into_iter()
        .map(|(l, s)| (l, s.canon()))
        .collect();
    assert_eq!(s1, s2);
}

#[test]
fn csp_stepper_mu_unfold_is_single_tau() {
    let t = parse_csp("mu X . (a -> X) [] (b -> STOP)").unwrap();
    let steps = CspSemantics.step(&t).unwrap();
    assert_eq!(steps.len(), 1);
    let (l, _) = steps.into_iter().next().unwrap();
    assert!(l.is_tau());
}
