use std::sync::Arc;

use proptest::prelude::*;

use clclab::clcs::{LTrace, SEngine};
use clclab::harness::{gen_convertible_to_f, random_lterm, random_reduction, random_term, GenConfig};
use clclab::labelled::{leftmost_erase, refines, LTerm, LabConst};
use clclab::systems::{ConversionSequence, EqVerdict, Fuel, Oracle, SystemId, Trace};
use clclab::term::{apply_subst, match_pattern, Const, Position, Substitution, Term};

fn fuel() -> Fuel {
    Fuel::new(2_000, 40, 4)
}

fn term_strategy() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        prop::sample::select(Const::ALL.to_vec()).prop_map(Term::Const),
        prop::sample::select(vec!["x", "y", "z"]).prop_map(Term::var),
    ];
    leaf.prop_recursive(5, 24, 2, |inner| {
        (inner.clone(), inner).prop_map(|(l, r)| Term::app(l, r))
    })
}

fn lterm_strategy() -> impl Strategy<Value = LTerm> {
    let lab = prop_oneof![
        Just(LabConst::C1),
        Just(LabConst::C2),
        Just(LabConst::T1),
        Just(LabConst::F1),
        Just(LabConst::K1),
        prop::collection::vec(1u32..3, 2..4).prop_map(|ns| LabConst::s(&ns)),
    ];
    let leaf = prop_oneof![
        prop::sample::select(Const::ALL.to_vec()).prop_map(LTerm::Const),
        lab.prop_map(LTerm::Lab),
        Just(LTerm::var("x")),
    ];
    leaf.prop_recursive(4, 20, 3, |inner| {
        prop_oneof![
            3 => (inner.clone(), inner.clone()).prop_map(|(l, r)| LTerm::app(l, r)),
            1 => prop::collection::vec(inner, 2..4).prop_map(LTerm::group),
        ]
    })
}

fn some_position(t: &Term, pick: usize) -> Position {
    let ps = t.positions();
    ps[pick % ps.len()].clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn term_print_parse_roundtrip(t in term_strategy()) {
        prop_assert_eq!(Term::parse(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn lterm_print_parse_roundtrip(t in lterm_strategy()) {
        prop_assert_eq!(LTerm::parse(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn replacing_a_subterm_by_itself_is_identity(t in term_strategy(), pick in any::<usize>()) {
        let p = some_position(&t, pick);
        let sub = t.subterm_at(&p).unwrap().clone();
        prop_assert_eq!(t.replace_at(&p, sub).unwrap(), t);
    }

    #[test]
    fn replace_then_read_back(t in term_strategy(), u in term_strategy(), pick in any::<usize>()) {
        let p = some_position(&t, pick);
        let t2 = t.replace_at(&p, u.clone()).unwrap();
        prop_assert_eq!(t2.subterm_at(&p).unwrap(), &u);
        prop_assert_eq!(t2.size(), t.size() - t.subterm_at(&p).unwrap().size() + u.size());
    }

    #[test]
    fn instances_match_their_pattern(p in term_strategy(), a in term_strategy(), b in term_strategy()) {
        let mut sigma = Substitution::new();
        sigma.bind("x", a);
        sigma.bind("y", b);
        let inst = apply_subst(&sigma, &p);
        let found = match_pattern(&p, &inst).expect("an instance matches");
        for v in p.variables() {
            let own = Term::Var(Arc::clone(&v));
            prop_assert_eq!(found.get(&v), Some(sigma.get(&v).unwrap_or(&own)));
        }
        prop_assert_eq!(apply_subst(&found, &p), inst);
    }

    #[test]
    fn refinement_is_leftmost_erasure(t in lterm_strategy(), q in term_strategy()) {
        let tuple_free = t.subterms().iter().all(|(_, s)| !s.is_tuple());
        if tuple_free {
            prop_assert!(refines(&t, &leftmost_erase(&t)));
        }
        if refines(&t, &q) {
            prop_assert_eq!(leftmost_erase(&t), q);
        }
    }

    #[test]
    fn labelled_sizes_agree_with_erasure_without_tuples(t in term_strategy()) {
        let lt = LTerm::from(t.clone());
        prop_assert_eq!(lt.size(), t.size());
        prop_assert!(lt.is_iterm());
        prop_assert_eq!(leftmost_erase(&lt), t.clone());
        prop_assert_eq!(lt.to_term(), Some(t));
    }

    #[test]
    fn trace_jsonl_roundtrip(seed in any::<u64>()) {
        let cfg = GenConfig::default().with_seed(seed);
        let mut rng = cfg.rng();
        let t = random_term(&mut rng, &cfg, 20);
        let oracle = Oracle::new(fuel());
        let tr = random_reduction(&mut rng, &oracle, SystemId::Clc, &t, 4);
        prop_assert_eq!(Trace::from_jsonl(&tr.to_jsonl()).unwrap(), tr.clone());
        prop_assert!(oracle.replay_trace(&tr).is_ok());
    }

    #[test]
    fn ltrace_jsonl_roundtrip(t in lterm_strategy()) {
        let eng = SEngine::new(fuel());
        let mut tr = LTrace::empty(t.clone());
        if let Some(r) = eng.s_redexes(&t).redexes.first() {
            tr.push(eng.s_step(&t, &r.position, r.rule).unwrap());
        }
        prop_assert_eq!(LTrace::from_jsonl(&tr.to_jsonl()).unwrap(), tr);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_conversions_replay_and_reach_f(seed in any::<u64>()) {
        let cfg = GenConfig::default().with_seed(seed);
        let conv = gen_convertible_to_f(&cfg);
        prop_assert_eq!(conv.end(), &Term::Const(Const::F));
        prop_assert!(conv.terms().iter().all(|q| q.size() <= cfg.max_size));
        let oracle = Oracle::new(Fuel::default());
        prop_assert!(oracle.replay_conversion(&conv).is_ok());
        prop_assert_eq!(ConversionSequence::from_jsonl(&conv.to_jsonl()).unwrap(), conv.clone());
        prop_assert_eq!(gen_convertible_to_f(&cfg), conv);
    }

    #[test]
    fn s_steps_consume_labels(seed in any::<u64>()) {
        let cfg = GenConfig::default().with_seed(seed);
        let t = random_lterm(&mut cfg.rng(), &cfg, 30);
        let eng = SEngine::new(fuel());
        for r in eng.s_redexes(&t).redexes {
            let step = eng.s_step(&t, &r.position, r.rule).unwrap();
            prop_assert!(step.to.label_count() < t.label_count(), "{} -> {}", t, step.to);
        }
    }

    #[test]
    fn standardness_is_inherited_by_subterms(t in lterm_strategy()) {
        let eng = SEngine::new(fuel());
        if let Ok(true) = eng.is_standard(&t) {
            for (_, sub) in t.subterms() {
                prop_assert_ne!(eng.is_standard(sub), Ok(false), "{} inside {}", sub, t);
            }
        }
    }

    #[test]
    fn eq_witnesses_replay_and_persist_at_higher_levels(a in term_strategy(), b in term_strategy()) {
        let oracle = Oracle::new(fuel());
        for sys in [SystemId::Clc0, SystemId::Clc] {
            for level in 1..3 {
                let v = oracle.eq_at(sys, &a, &b, level, true);
                if let EqVerdict::Yes(w) = &v {
                    prop_assert!(oracle.replay_witness(&a, &b, w).is_ok());
                    let up = oracle.eq_at(sys, &a, &b, level + 1, true);
                    prop_assert!(!up.is_no(), "{} = {} at level {} but not above", a, b, level);
                }
            }
        }
    }
}
