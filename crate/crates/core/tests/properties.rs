use std::collections::BTreeMap;
use std::sync::OnceLock;

use nearlab::algebra::{eval_term, AlgebraClass, FiniteAlgebra};
use nearlab::congruences::{all_congruences, quotient, Partition};
use nearlab::consequence::{consequence, Mode, Query};
use nearlab::enumerate::catalog_up_to;
use nearlab::filters::{all_filters, generated_filter, is_filter};
use nearlab::formulas::{build_mn, parse_formula, substitute, Signature, Term};
use nearlab::gentzen::*;
use nearlab::Subset;
use proptest::prelude::*;

fn catalog(max: usize) -> &'static AlgebraClass {
    static C4: OnceLock<AlgebraClass> = OnceLock::new();
    static C3: OnceLock<AlgebraClass> = OnceLock::new();
    let cell = if max == 3 { &C3 } else { &C4 };
    assert!(max == 3 || max == 4);
    cell.get_or_init(|| AlgebraClass::nearlattices(catalog_up_to(max).unwrap()).unwrap())
}

fn term(vars: u32, depth: u32) -> impl Strategy<Value = Term> {
    let leaf = (0..vars).prop_map(Term::var);
    leaf.prop_recursive(depth, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), inner.clone()).prop_map(|(a, b, c)| Term::m(a, b, c)),
            (inner.clone(), inner).prop_map(|(a, b)| Term::join(a, b)),
        ]
    })
}

fn sequent(vars: u32, depth: u32, max_premises: usize) -> impl Strategy<Value = Sequent> {
    (prop::collection::vec(term(vars, depth), 0..=max_premises), term(vars, depth))
        .prop_map(|(p, c)| Sequent::new(p, c))
}

fn plain_holds(s: &Sequent, class: &AlgebraClass) -> bool {
    sequent_holds(s, class).unwrap().is_none()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn search_agrees_with_the_catalog(s in sequent(3, 2, 3)) {
        let outcome = prove(&s, DEFAULT_DEPTH, DEFAULT_MN_BOUND);
        prop_assert_eq!(outcome.proof().is_some(), plain_holds(&s, catalog(4)), "{}", s);
        if let Some(p) = outcome.proof() {
            prop_assert_eq!(&p.sequent, &s);
            prop_assert!(check_proof(p).is_ok());
        }
    }

    #[test]
    fn certificates_round_trip(s in sequent(3, 2, 2)) {
        if let SearchOutcome::Proved(p) = prove(&s, DEFAULT_DEPTH, DEFAULT_MN_BOUND) {
            let cert = write_certificate(&p);
            let back = parse_certificate(&cert, &Signature::plain()).unwrap();
            prop_assert!(check_proof(&back).is_ok());
            prop_assert_eq!(&write_certificate(&back), &cert);
            prop_assert_eq!(cert.lines().last().unwrap().split(" ; ").next().unwrap().split_once(". ").unwrap().1,
                s.to_string());
        }
    }

    #[test]
    fn substituted_proofs_still_check(s in sequent(2, 2, 2), a in term(3, 1), b in term(3, 1)) {
        if let SearchOutcome::Proved(p) = prove(&s, DEFAULT_DEPTH, DEFAULT_MN_BOUND) {
            let map: BTreeMap<u32, Term> = [(0, a), (1, b)].into_iter().collect();
            let q = substitute_proof(&p, &map);
            prop_assert!(check_proof(&q).is_ok());
            let want = Sequent::new(s.premises().iter().map(|t| substitute(t, &map)), substitute(s.conclusion(), &map));
            prop_assert_eq!(&q.sequent, &want);
        }
    }

    #[test]
    fn formulas_print_and_parse_back(t in term(4, 3)) {
        prop_assert_eq!(parse_formula(&t.to_string(), &Signature::plain()).unwrap(), t);
    }

    #[test]
    fn sequents_print_and_parse_back(s in sequent(3, 2, 3)) {
        prop_assert_eq!(parse_sequent(&s.to_string(), &Signature::plain()).unwrap(), s);
    }

    #[test]
    fn modes_are_ordered(s in sequent(3, 2, 2)) {
        let class = catalog(3).with_tops().unwrap();
        let holds = |mode| consequence(&class, &Query::new(s.premises().to_vec(), s.conclusion().clone(), mode))
            .unwrap()
            .holds();
        let (plain, degrees, truth) = (holds(Mode::Plain), holds(Mode::Degrees), holds(Mode::Truth));
        prop_assert!(!plain || degrees);
        prop_assert!(!degrees || truth);
        if s.premises().is_empty() {
            prop_assert!(plain == degrees && degrees == truth);
        }
    }

    #[test]
    fn mn_of_premises_is_below_the_last(args in prop::collection::vec(term(3, 1), 1..4), last in term(3, 1)) {
        let mn = build_mn(&args, &last).unwrap();
        let s = Sequent::new([mn], last.clone());
        let holds = plain_holds(&Sequent::new(args.clone(), last), catalog(4));
        prop_assert_eq!(plain_holds(&s, catalog(4)), holds);
    }
}

fn members() -> &'static [FiniteAlgebra] {
    catalog(4).members()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn generated_filters_are_least(idx in 0usize..17, bits in 1u64..16) {
        let a = &members()[idx % members().len()];
        let x = Subset(bits & Subset::full(a.size()).0);
        prop_assume!(!x.is_empty());
        let f = generated_filter(a, x).unwrap().carrier();
        prop_assert!(x.is_subset(f));
        prop_assert!(is_filter(a, f));
        for g in all_filters(a).unwrap() {
            if x.is_subset(g.carrier()) {
                prop_assert!(f.is_subset(g.carrier()));
            }
        }
    }

    #[test]
    fn quotients_satisfy_the_identities(idx in 0usize..17, pick in any::<prop::sample::Index>()) {
        let a = &members()[idx % members().len()];
        let cons = all_congruences(a).unwrap();
        let theta: &Partition = pick.get(&cons);
        let q = quotient(a, theta).unwrap();
        prop_assert_eq!(q.size(), theta.num_blocks());
        prop_assert!(q.is_distributive_nearlattice());
    }

    #[test]
    fn evaluation_respects_joins(idx in 0usize..17, t in term(2, 2), u in term(2, 2), v0 in 0usize..4, v1 in 0usize..4) {
        let a = &members()[idx % members().len()];
        let asg: BTreeMap<u32, usize> = [(0, v0 % a.size()), (1, v1 % a.size())].into_iter().collect();
        let (x, y) = (eval_term(a, &t, &asg).unwrap(), eval_term(a, &u, &asg).unwrap());
        prop_assert_eq!(eval_term(a, &Term::join(t, u), &asg).unwrap(), a.join(x, y));
    }
}
