use std::collections::BTreeSet;

use proptest::prelude::*;

use cllr_core::generate::{rng, HoleGuard, TermGen};
use cllr_core::refinement::Analysis;
use cllr_core::sos::ExplorationLimit;
use cllr_core::syntax::{parse_script, parse_term, pretty};
use cllr_core::term::{
    alpha_eq, canonicalize, free_vars, reduce_conjunctions, substitute_one, Name, Term,
};

fn closed(seed: u64, depth: usize) -> Term {
    TermGen::default().closed(&mut rng(seed), depth)
}

fn small_limit() -> ExplorationLimit {
    ExplorationLimit {
        max_states: 400,
        max_term_size: 200,
        max_term_depth: 40,
        ..ExplorationLimit::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn pretty_then_parse_is_alpha_identity(seed in any::<u64>()) {
        let t = closed(seed, 5);
        let back = parse_term(&pretty(&t)).unwrap();
        prop_assert!(alpha_eq(&t, &back), "{}", pretty(&t));
    }

    #[test]
    fn bound_contexts_round_trip(seed in any::<u64>()) {
        let c = TermGen::default().context(&mut rng(seed), 4, "X", HoleGuard::Strong);
        let t = Term::rec1("X", c).unwrap();
        let back = parse_term(&pretty(&t)).unwrap();
        prop_assert!(alpha_eq(&t, &back), "{}", pretty(&t));
    }

    #[test]
    fn parsing_never_panics(src in "\\PC{0,60}") {
        let _ = parse_term(&src);
        let _ = parse_script(&src);
    }

    #[test]
    fn parsing_operator_soup_never_panics(src in "[a-cXY0 .()\\[\\]{}=;|/\\\\,]{0,40}|rec [XY] \\{[ a-cXY.;=/\\\\|]{0,30}\\}") {
        let _ = parse_term(&src);
    }

    #[test]
    fn substitution_replaces_the_variable(seed in any::<u64>(), useed in any::<u64>()) {
        let c = TermGen::default().context(&mut rng(seed), 4, "X", HoleGuard::Any);
        let u = closed(useed, 3);
        let s = substitute_one(&c, "X", &u);
        prop_assert!(free_vars(&s).is_empty());
        let mut expected: BTreeSet<Name> = free_vars(&c);
        expected.remove("X");
        prop_assert_eq!(free_vars(&s), expected);
    }

    #[test]
    fn substituting_a_variable_for_itself_is_identity(seed in any::<u64>()) {
        let c = TermGen::default().context(&mut rng(seed), 4, "X", HoleGuard::Weak);
        let s = substitute_one(&c, "X", &Term::Var(Name::from("X")));
        prop_assert!(alpha_eq(&c, &s));
    }

    #[test]
    fn canonical_form_is_idempotent(seed in any::<u64>()) {
        let t = closed(seed, 5);
        let c = canonicalize(&t);
        prop_assert_eq!(&canonicalize(&c), &c);
        prop_assert!(alpha_eq(&t, &c));
    }

    #[test]
    fn reduction_is_idempotent(seed in any::<u64>()) {
        let t = canonicalize(&closed(seed, 5));
        let r = reduce_conjunctions(&t);
        prop_assert_eq!(reduce_conjunctions(&r), r);
    }

    #[test]
    fn reduction_preserves_semantics(seed in any::<u64>()) {
        let t = closed(seed, 4);
        let r = reduce_conjunctions(&canonicalize(&t));
        let Ok(a) = Analysis::new(&[t, r], small_limit().alpha_only()) else {
            return Ok(());
        };
        let (x, y) = (a.root(0), a.root(1));
        prop_assert_eq!(a.f().contains(x), a.f().contains(y));
        prop_assert!(a.equiv(x, y).holds());
    }
}
