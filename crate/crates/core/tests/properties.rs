use proptest::prelude::*;

use linapprox::beta::{beta_step, enumerate_redexes};
use linapprox::lambda::{free_vars, parse_term, print_term, Term};
use linapprox::resource::{
    msubst, msubst_literal, normalize_with, parse_rterm, print_rterm, Bag, RSum, RTerm,
    Strategy as RStrategy,
};
use linapprox::semiring::Rational;
use linapprox::taylor::{self_coherent, taylor_by_promotion, taylor_truncated};

fn lambda_term() -> impl Strategy<Value = Term> {
    let leaf = prop::sample::select(vec!["x", "y", "z"]).prop_map(Term::var);
    leaf.prop_recursive(4, 12, 2, |inner| {
        prop_oneof![
            (prop::sample::select(vec!["x", "y", "z"]), inner.clone())
                .prop_map(|(v, b)| Term::lam(v, b)),
            (inner.clone(), inner).prop_map(|(f, a)| Term::app(f, a)),
        ]
    })
}

fn resource_term() -> impl Strategy<Value = RTerm> {
    let leaf = prop::sample::select(vec!["x", "y"]).prop_map(RTerm::var);
    leaf.prop_recursive(3, 10, 3, |inner| {
        prop_oneof![
            (prop::sample::select(vec!["x", "y"]), inner.clone())
                .prop_map(|(v, b)| RTerm::lam(v, b)),
            (inner.clone(), prop::collection::vec(inner, 0..3))
                .prop_map(|(f, args)| RTerm::app(f, Bag::new(args))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn lambda_print_parse_round_trip(t in lambda_term()) {
        prop_assert_eq!(parse_term(&print_term(&t)).unwrap(), t);
    }

    #[test]
    fn resource_print_parse_round_trip(t in resource_term()) {
        prop_assert_eq!(parse_rterm(&print_rterm(&t)).unwrap(), t);
    }

    #[test]
    fn beta_steps_do_not_add_free_variables(t in lambda_term()) {
        for r in enumerate_redexes(&t) {
            let u = beta_step(&t, &r.position).unwrap();
            prop_assert!(free_vars(&u).is_subset(&free_vars(&t)));
        }
    }

    #[test]
    fn expansion_matches_promotion_oracle(t in lambda_term()) {
        let direct = taylor_truncated::<Rational>(t.clone(), 7).sum;
        prop_assert!(self_coherent(&direct));
        prop_assert_eq!(direct, taylor_by_promotion::<Rational>(&t, 7));
    }

    #[test]
    fn substitution_matches_permutation_oracle(u in resource_term(), elems in prop::collection::vec(resource_term(), 0..4)) {
        let bag = Bag::new(elems);
        let fast: RSum<Rational> = msubst(&u, "x", &bag);
        prop_assert_eq!(fast, msubst_literal::<Rational>(&u, "x", &bag));
    }

    #[test]
    fn normalization_is_strategy_independent(t in resource_term()) {
        let lo: RSum<Rational> = normalize_with(&t, RStrategy::LeftmostOutermost);
        prop_assert_eq!(lo, normalize_with(&t, RStrategy::LeftmostInnermost));
    }
}
